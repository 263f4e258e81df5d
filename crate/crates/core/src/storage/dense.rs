use super::CooTensor;
use crate::error::{Error, Result};

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        DenseTensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn from_data(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} holds {n} elements but {} were given",
                data.len()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    /// Scatters a coordinate list into a zero-filled tensor. Duplicates add up.
    pub fn from_coo(coo: &CooTensor) -> Self {
        let mut t = DenseTensor::zeros(coo.shape().to_vec());
        for (c, v) in coo.entries() {
            let off = t.offset(c);
            t.data[off] += v;
        }
        t
    }

    /// Nonzero elements in lexicographic order.
    pub fn to_coo(&self) -> CooTensor {
        let mut coo = CooTensor::new(self.shape.clone());
        let mut coords = vec![0; self.rank()];
        for (off, &v) in self.data.iter().enumerate() {
            if v != 0.0 {
                self.unravel(off, &mut coords);
                coo.push(&coords, v).expect("in bounds");
            }
        }
        coo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    pub fn offset(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    pub fn get(&self, coords: &[usize]) -> f64 {
        self.data[self.offset(coords)]
    }

    pub fn set(&mut self, coords: &[usize], v: f64) {
        let off = self.offset(coords);
        self.data[off] = v;
    }

    fn unravel(&self, mut off: usize, coords: &mut [usize]) {
        for d in (0..self.rank()).rev() {
            coords[d] = off % self.shape[d];
            off /= self.shape[d];
        }
    }
}

pub fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for d in (0..shape.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * shape[d + 1];
    }
    strides
}
