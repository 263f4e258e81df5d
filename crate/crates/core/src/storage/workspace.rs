use super::SparseBuilder;
use crate::error::Result;

/// Dense scratch row for out-of-order accumulation into a sparse output.
///
/// Between [`Workspace::expand`] and [`Workspace::compress`], `filled[i]` is
/// true exactly for the indices recorded in `added[..count]`.
#[derive(Debug, Clone)]
pub struct Workspace {
    values: Vec<f64>,
    filled: Vec<bool>,
    added: Vec<usize>,
    count: usize,
}

impl Workspace {
    /// Allocates a zeroed workspace for an innermost dimension of `extent`.
    pub fn expand(extent: usize) -> Self {
        Workspace {
            values: vec![0.0; extent],
            filled: vec![false; extent],
            added: vec![0; extent],
            count: 0,
        }
    }

    pub fn extent(&self) -> usize {
        self.values.len()
    }

    /// Adds `value` at `index`, recording the index on first touch.
    pub fn scatter(&mut self, index: usize, value: f64) {
        if !self.filled[index] {
            self.filled[index] = true;
            self.added[self.count] = index;
            self.count += 1;
        }
        self.values[index] += value;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn added(&self) -> &[usize] {
        &self.added[..self.count]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn filled(&self) -> &[bool] {
        &self.filled
    }

    /// Sorts the touched indices, inserts `(prefix, index)` for each of them
    /// into `builder` (storage order, the workspace index last), and resets
    /// only the touched entries.
    pub fn compress(&mut self, builder: &mut SparseBuilder, prefix: &[usize]) -> Result<()> {
        let mut coords = Vec::with_capacity(prefix.len() + 1);
        coords.extend_from_slice(prefix);
        coords.push(0);
        let last = prefix.len();
        self.added[..self.count].sort_unstable();
        let mut result = Ok(());
        for k in 0..self.count {
            let i = self.added[k];
            if result.is_ok() {
                coords[last] = i;
                result = builder.insert_storage(&coords, self.values[i]);
            }
            self.values[i] = 0.0;
            self.filled[i] = false;
        }
        self.count = 0;
        result
    }
}
