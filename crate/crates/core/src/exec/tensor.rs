use crate::encoding::{Encoding, TensorType};
use crate::error::{Error, Result};
use crate::storage::{CooTensor, DenseTensor, SparseStorage};

/// A runtime tensor value: a plain dense array or packed sparse storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Dense(DenseTensor),
    Sparse(SparseStorage),
}

impl Tensor {
    /// Packs a coordinate list into the layout a tensor type asks for.
    pub fn from_coo(coo: &CooTensor, ttype: &TensorType) -> Result<Tensor> {
        if coo.shape() != ttype.shape() {
            return Err(Error::ShapeMismatch(format!(
                "tensor of shape {:?} where {:?} is expected",
                coo.shape(),
                ttype.shape()
            )));
        }
        Ok(match ttype.encoding() {
            Some(e) => Tensor::Sparse(SparseStorage::pack(coo, e)?),
            None => Tensor::Dense(DenseTensor::from_coo(coo)),
        })
    }

    pub fn shape(&self) -> &[usize] {
        match self {
            Tensor::Dense(d) => d.shape(),
            Tensor::Sparse(s) => s.shape(),
        }
    }

    pub fn encoding(&self) -> Option<&Encoding> {
        match self {
            Tensor::Dense(_) => None,
            Tensor::Sparse(s) => Some(s.encoding()),
        }
    }

    pub fn tensor_type(&self) -> TensorType {
        TensorType::new(self.shape().to_vec(), self.encoding().cloned())
            .expect("runtime tensors have valid types")
    }

    /// Stored elements as a normalized coordinate list. Dense tensors
    /// contribute their nonzeros; sparse ones every stored element.
    pub fn to_coo(&self) -> CooTensor {
        match self {
            Tensor::Dense(d) => d.to_coo(),
            Tensor::Sparse(s) => s.unpack(),
        }
    }

    pub fn to_dense(&self) -> DenseTensor {
        match self {
            Tensor::Dense(d) => d.clone(),
            Tensor::Sparse(s) => DenseTensor::from_coo(&s.unpack()),
        }
    }

    /// Number of nonzero values, explicit zeros excluded.
    pub fn nnz(&self) -> usize {
        match self {
            Tensor::Dense(d) => d.data().iter().filter(|v| **v != 0.0).count(),
            Tensor::Sparse(s) => s.nnz(),
        }
    }

    pub fn as_sparse(&self) -> Option<&SparseStorage> {
        match self {
            Tensor::Sparse(s) => Some(s),
            Tensor::Dense(_) => None,
        }
    }

    pub fn as_dense(&self) -> Option<&DenseTensor> {
        match self {
            Tensor::Dense(d) => Some(d),
            Tensor::Sparse(_) => None,
        }
    }
}

/// Changes the layout of `t` to `to`, going through coordinates: sparse
/// storage is unpacked and repacked, dense arrays drop their zeros first,
/// and a dense target is filled by scattering.
pub fn convert(t: &Tensor, to: &TensorType) -> Result<Tensor> {
    if t.shape() != to.shape() {
        return Err(Error::ShapeMismatch(format!(
            "cannot convert shape {:?} to {:?}",
            t.shape(),
            to.shape()
        )));
    }
    match (t, to.encoding()) {
        (Tensor::Dense(d), None) => Ok(Tensor::Dense(d.clone())),
        (Tensor::Sparse(s), None) => Ok(Tensor::Dense(DenseTensor::from_coo(&s.unpack()))),
        (Tensor::Dense(d), Some(e)) => Ok(Tensor::Sparse(SparseStorage::pack(&d.to_coo(), e)?)),
        (Tensor::Sparse(s), Some(e)) => Ok(Tensor::Sparse(SparseStorage::pack(&s.unpack(), e)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sparse(t: &Tensor) -> &SparseStorage {
        t.as_sparse().unwrap()
    }

    #[test]
    fn csr_to_csc() {
        let a =
            Tensor::Sparse(SparseStorage::pack(&fixtures::matrix_a(), &Encoding::csr()).unwrap());
        let csc = TensorType::new(vec![3, 4], Some(Encoding::csc())).unwrap();
        let b = convert(&a, &csc).unwrap();
        // Columns 0 and 3 hold one element each, in rows 0/2 and 0.
        assert_eq!(sparse(&b).level_pointers(1).unwrap(), &[0, 2, 2, 2, 3]);
        assert_eq!(sparse(&b).level_indices(1).unwrap(), &[0, 2, 0]);
        assert_eq!(
            sparse(&b).values_view(),
            &[fixtures::A00, fixtures::A20, fixtures::A03]
        );
    }

    #[test]
    fn dense_vector_to_compressed() {
        let d = Tensor::Dense(DenseTensor::from_data(vec![4], vec![1.0, 0.0, 2.0, 0.0]).unwrap());
        let t = TensorType::new(
            vec![4],
            Some(Encoding::with_levels(&[crate::LevelType::Compressed]).unwrap()),
        )
        .unwrap();
        let s = convert(&d, &t).unwrap();
        assert_eq!(sparse(&s).level_pointers(0).unwrap(), &[0, 2]);
        assert_eq!(sparse(&s).level_indices(0).unwrap(), &[0, 2]);
        assert_eq!(sparse(&s).values_view(), &[1.0, 2.0]);
    }

    #[test]
    fn dcsc_to_dense() {
        let a =
            Tensor::Sparse(SparseStorage::pack(&fixtures::matrix_a(), &Encoding::dcsc()).unwrap());
        let d = convert(&a, &TensorType::dense(vec![3, 4]).unwrap()).unwrap();
        assert_eq!(
            d.as_dense().unwrap(),
            &DenseTensor::from_coo(&fixtures::matrix_a())
        );
    }

    #[test]
    fn shape_mismatch() {
        let a = Tensor::Dense(DenseTensor::zeros(vec![2, 2]));
        assert!(matches!(
            convert(&a, &TensorType::dense(vec![2, 3]).unwrap()),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
