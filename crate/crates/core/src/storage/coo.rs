use crate::error::{Error, Result};

/// Coordinate-list tensor: the exchange format between files, generators,
/// storage schemes and the dense oracle.
///
/// Coordinates are zero-based and stored flat, `rank` entries per element.
#[derive(Debug, Clone, PartialEq)]
pub struct CooTensor {
    shape: Vec<usize>,
    coords: Vec<usize>,
    values: Vec<f64>,
}

impl CooTensor {
    pub fn new(shape: Vec<usize>) -> Self {
        CooTensor {
            shape,
            coords: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(shape: Vec<usize>, nnz: usize) -> Self {
        let rank = shape.len();
        CooTensor {
            shape,
            coords: Vec::with_capacity(nnz * rank),
            values: Vec::with_capacity(nnz),
        }
    }

    pub fn from_entries<I, C>(shape: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, f64)>,
        C: AsRef<[usize]>,
    {
        let mut t = CooTensor::new(shape);
        for (c, v) in entries {
            t.push(c.as_ref(), v)?;
        }
        Ok(t)
    }

    /// Appends an element, checking its coordinates against the shape.
    pub fn push(&mut self, coords: &[usize], value: f64) -> Result<()> {
        if coords.len() != self.shape.len() {
            return Err(Error::RankMismatch {
                expected: self.shape.len(),
                found: coords.len(),
            });
        }
        if coords.iter().zip(&self.shape).any(|(&c, &n)| c >= n) {
            return Err(Error::CoordOutOfBounds {
                coords: coords.to_vec(),
                shape: self.shape.clone(),
            });
        }
        self.coords.extend_from_slice(coords);
        self.values.push(value);
        Ok(())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Number of entries, explicit zeros included.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coords(&self, i: usize) -> &[usize] {
        let r = self.rank();
        &self.coords[i * r..(i + 1) * r]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        (0..self.len()).map(move |i| (self.coords(i), self.values[i]))
    }

    /// Number of entries with a nonzero value.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn volume(&self) -> usize {
        self.shape.iter().product()
    }

    /// Sorts entries lexicographically and sums duplicate coordinates.
    pub fn normalize(&mut self) {
        if self.is_normalized() {
            return;
        }
        let rank = self.rank();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.coords(a).cmp(self.coords(b)));
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.values.len());
        for i in order {
            let c = self.coords(i);
            let n = values.len();
            if n > 0 && &coords[(n - 1) * rank..n * rank] == c {
                values[n - 1] += self.values[i];
            } else {
                coords.extend_from_slice(c);
                values.push(self.values[i]);
            }
        }
        self.coords = coords;
        self.values = values;
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// Strictly increasing lexicographic coordinates.
    pub fn is_normalized(&self) -> bool {
        (1..self.len()).all(|i| self.coords(i - 1) < self.coords(i))
    }

    /// Drops entries whose value is exactly zero.
    pub fn without_zeros(&self) -> CooTensor {
        let mut out = CooTensor::new(self.shape.clone());
        for (c, v) in self.entries() {
            if v != 0.0 {
                out.coords.extend_from_slice(c);
                out.values.push(v);
            }
        }
        out
    }

    /// Normalized nonzero entries, the canonical form used for comparisons.
    pub fn nonzero_entries(&self) -> Vec<(Vec<usize>, f64)> {
        let t = self.clone().normalized().without_zeros();
        t.entries().map(|(c, v)| (c.to_vec(), v)).collect()
    }

    /// Coordinates of the nonzero entries, sorted.
    pub fn nonzero_set(&self) -> Vec<Vec<usize>> {
        self.nonzero_entries().into_iter().map(|(c, _)| c).collect()
    }
}
