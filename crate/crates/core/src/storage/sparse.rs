use super::{CooTensor, SparseBuilder};
use crate::encoding::{fits_width, Encoding, LevelType, TensorType};
use crate::error::{Error, Result};

/// Packed sparse storage realizing an [`Encoding`].
///
/// Arrays are kept per storage level. A compressed level `l` owns
/// `pointers[l]`, one offset per position of level `l - 1` plus one, and
/// `indices[l]`, the coordinate of each of its stored positions. Elements of
/// parent position `p` live at positions `pointers[l][p]..pointers[l][p+1]`.
/// Dense levels own no arrays: position `p * extent + c` is implicit. The
/// values array has one slot per position of the last level.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseStorage {
    shape: Vec<usize>,
    encoding: Encoding,
    pointers: Vec<Vec<usize>>,
    indices: Vec<Vec<usize>>,
    values: Vec<f64>,
}

impl SparseStorage {
    /// Assembles storage from raw arrays and checks every invariant.
    pub fn from_parts(
        shape: Vec<usize>,
        encoding: Encoding,
        pointers: Vec<Vec<usize>>,
        indices: Vec<Vec<usize>>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let s = SparseStorage {
            shape,
            encoding,
            pointers,
            indices,
            values,
        };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn from_parts_unchecked(
        shape: Vec<usize>,
        encoding: Encoding,
        pointers: Vec<Vec<usize>>,
        indices: Vec<Vec<usize>>,
        values: Vec<f64>,
    ) -> Self {
        SparseStorage {
            shape,
            encoding,
            pointers,
            indices,
            values,
        }
    }

    /// Packs a coordinate list: coordinates are permuted into storage order,
    /// sorted, then inserted level by level. Dense levels are materialized in
    /// full, so they may introduce explicit zeros.
    pub fn pack(coo: &CooTensor, encoding: &Encoding) -> Result<Self> {
        if coo.rank() != encoding.rank() {
            return Err(Error::RankMismatch {
                expected: encoding.rank(),
                found: coo.rank(),
            });
        }
        let rank = coo.rank();
        let mut keyed: Vec<(Vec<usize>, f64)> = coo
            .entries()
            .map(|(c, v)| (encoding.to_storage(c), v))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut builder = SparseBuilder::new(coo.shape().to_vec(), encoding.clone())?;
        let mut i = 0;
        while i < keyed.len() {
            // Duplicates sum, like CooTensor::normalize.
            let mut v = keyed[i].1;
            let mut j = i + 1;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                v += keyed[j].1;
                j += 1;
            }
            debug_assert_eq!(keyed[i].0.len(), rank);
            builder.insert_storage(&keyed[i].0, v)?;
            i = j;
        }
        builder.finish()
    }

    /// Every stored element, explicit zeros included, as a normalized
    /// coordinate list.
    pub fn unpack(&self) -> CooTensor {
        let mut coo = CooTensor::with_capacity(self.shape.clone(), self.values.len());
        for (c, v) in self.iter() {
            coo.push(&c, v).expect("storage coordinates are in bounds");
        }
        coo.normalize();
        coo
    }

    /// Stored elements in storage-lexicographic order, with logical coordinates.
    pub fn iter(&self) -> StorageIter<'_> {
        StorageIter::new(self)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn tensor_type(&self) -> TensorType {
        TensorType::new(self.shape.clone(), Some(self.encoding.clone())).expect("valid type")
    }

    /// Extent of storage level `level`.
    pub fn level_extent(&self, level: usize) -> usize {
        self.shape[self.encoding.dim_of_level(level)]
    }

    /// Pointers array of a compressed level.
    pub fn level_pointers(&self, level: usize) -> Result<&[usize]> {
        self.check_compressed(level)?;
        Ok(&self.pointers[level])
    }

    /// Indices array of a compressed level.
    pub fn level_indices(&self, level: usize) -> Result<&[usize]> {
        self.check_compressed(level)?;
        Ok(&self.indices[level])
    }

    pub fn values_view(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn pointers_raw(&self, level: usize) -> &[usize] {
        &self.pointers[level]
    }

    pub(crate) fn indices_raw(&self, level: usize) -> &[usize] {
        &self.indices[level]
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<f64> {
        &mut self.values
    }

    /// Number of stored elements, explicit zeros included.
    pub fn stored_len(&self) -> usize {
        self.values.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Number of positions at storage level `level`.
    pub fn level_size(&self, level: usize) -> usize {
        let parent = if level == 0 {
            1
        } else {
            self.level_size(level - 1)
        };
        match self.encoding.level_type(level) {
            LevelType::Dense => parent * self.level_extent(level),
            LevelType::Compressed => self.indices[level].len(),
        }
    }

    fn check_compressed(&self, level: usize) -> Result<()> {
        if level >= self.rank() {
            return Err(Error::LevelOutOfRange {
                level,
                rank: self.rank(),
            });
        }
        if self.encoding.level_type(level) == LevelType::Dense {
            return Err(Error::LevelIsDense(level));
        }
        Ok(())
    }

    /// Checks every storage invariant: array presence per level type,
    /// monotone pointers, strictly increasing in-bounds indices per segment,
    /// values length, and bit widths.
    pub fn validate(&self) -> Result<()> {
        let rank = self.rank();
        let bad = |msg: String| Err(Error::InvalidStorage(msg));
        if self.encoding.rank() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                found: self.encoding.rank(),
            });
        }
        if self.pointers.len() != rank || self.indices.len() != rank {
            return bad(format!("expected {rank} pointer and index arrays"));
        }
        let pw = self.encoding.pointer_bit_width();
        let iw = self.encoding.index_bit_width();
        let mut parent_size = 1usize;
        for l in 0..rank {
            let extent = self.level_extent(l);
            let (ptr, idx) = (&self.pointers[l], &self.indices[l]);
            match self.encoding.level_type(l) {
                LevelType::Dense => {
                    if !ptr.is_empty() || !idx.is_empty() {
                        return bad(format!("dense level {l} must not own arrays"));
                    }
                    parent_size *= extent;
                }
                LevelType::Compressed => {
                    if ptr.len() != parent_size + 1 {
                        return bad(format!(
                            "level {l}: {} pointers for {parent_size} parent positions",
                            ptr.len()
                        ));
                    }
                    if ptr[0] != 0 || *ptr.last().unwrap() != idx.len() {
                        return bad(format!("level {l}: pointers must span [0, {})", idx.len()));
                    }
                    for w in ptr.windows(2) {
                        if w[0] > w[1] {
                            return bad(format!("level {l}: pointers decrease"));
                        }
                        let seg = &idx[w[0]..w[1]];
                        if seg.windows(2).any(|s| s[0] >= s[1]) {
                            return bad(format!("level {l}: indices not strictly increasing"));
                        }
                    }
                    if let Some(&i) = idx.iter().find(|&&i| i >= extent) {
                        return bad(format!("level {l}: index {i} exceeds extent {extent}"));
                    }
                    if let Some(&p) = ptr.iter().find(|&&p| !fits_width(p, pw)) {
                        return Err(Error::BitWidthOverflow {
                            what: "pointer",
                            value: p,
                            width: pw,
                        });
                    }
                    if let Some(&i) = idx.iter().find(|&&i| !fits_width(i, iw)) {
                        return Err(Error::BitWidthOverflow {
                            what: "index",
                            value: i,
                            width: iw,
                        });
                    }
                    parent_size = idx.len();
                }
            }
        }
        if self.values.len() != parent_size {
            return bad(format!(
                "{} values for {parent_size} stored positions",
                self.values.len()
            ));
        }
        Ok(())
    }
}

/// Walks stored elements level by level, like an odometer over position ranges.
pub struct StorageIter<'a> {
    storage: &'a SparseStorage,
    pos: Vec<usize>,
    end: Vec<usize>,
    level: usize,
    started: bool,
    done: bool,
}

impl<'a> StorageIter<'a> {
    fn new(storage: &'a SparseStorage) -> Self {
        let rank = storage.rank();
        StorageIter {
            storage,
            pos: vec![0; rank],
            end: vec![0; rank],
            level: 0,
            started: false,
            done: rank == 0,
        }
    }

    fn range(&self, level: usize, parent: usize) -> (usize, usize) {
        match self.storage.encoding.level_type(level) {
            LevelType::Dense => {
                let n = self.storage.level_extent(level);
                (parent * n, parent * n + n)
            }
            LevelType::Compressed => {
                let p = &self.storage.pointers[level];
                (p[parent], p[parent + 1])
            }
        }
    }

    fn coord(&self, level: usize) -> usize {
        let p = self.pos[level];
        match self.storage.encoding.level_type(level) {
            LevelType::Dense => p % self.storage.level_extent(level),
            LevelType::Compressed => self.storage.indices[level][p],
        }
    }
}

impl Iterator for StorageIter<'_> {
    type Item = (Vec<usize>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let last = self.storage.rank() - 1;
        if self.started {
            self.pos[last] += 1;
        } else {
            self.started = true;
            let (lo, hi) = self.range(0, 0);
            self.pos[0] = lo;
            self.end[0] = hi;
            self.level = 0;
        }
        loop {
            let l = self.level;
            if self.pos[l] < self.end[l] {
                if l == last {
                    let storage_coords: Vec<usize> = (0..=last).map(|k| self.coord(k)).collect();
                    let coords = self.storage.encoding.to_logical(&storage_coords);
                    return Some((coords, self.storage.values[self.pos[l]]));
                }
                let (lo, hi) = self.range(l + 1, self.pos[l]);
                self.pos[l + 1] = lo;
                self.end[l + 1] = hi;
                self.level = l + 1;
            } else {
                if l == 0 {
                    self.done = true;
                    return None;
                }
                self.level = l - 1;
                self.pos[l - 1] += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use LevelType::*;

    #[test]
    fn sparse_vector() {
        let s = SparseStorage::pack(&vector_x(), &Encoding::all_compressed(1).unwrap()).unwrap();
        assert_eq!(s.level_pointers(0).unwrap(), &[0, 4]);
        assert_eq!(s.level_indices(0).unwrap(), &[3, 6, 7, 10]);
        assert_eq!(s.values_view(), &[X3, X6, X7, X10]);
    }

    #[test]
    fn csr_repeats_pointer_for_empty_row() {
        let s = SparseStorage::pack(&matrix_a(), &Encoding::csr()).unwrap();
        assert_eq!(s.level_pointers(1).unwrap(), &[0, 2, 2, 3]);
        assert_eq!(s.level_indices(1).unwrap(), &[0, 3, 0]);
        assert_eq!(s.values_view(), &[A00, A03, A20]);
        assert_eq!(s.level_indices(0), Err(Error::LevelIsDense(0)));
        assert_eq!(s.level_pointers(0), Err(Error::LevelIsDense(0)));
    }

    #[test]
    fn compressed_dense_has_explicit_zeros() {
        let s = SparseStorage::pack(&matrix_a(), &Encoding::cdr()).unwrap();
        assert_eq!(s.level_pointers(0).unwrap(), &[0, 2]);
        assert_eq!(s.level_indices(0).unwrap(), &[0, 2]);
        assert_eq!(s.values_view(), &[A00, 0.0, 0.0, A03, A20, 0.0, 0.0, 0.0]);
        let coo = s.unpack();
        assert_eq!(coo.len(), 8);
        assert_eq!(coo.values().iter().filter(|v| **v == 0.0).count(), 5);
    }

    #[test]
    fn dcsc() {
        let s = SparseStorage::pack(&matrix_a(), &Encoding::dcsc()).unwrap();
        assert_eq!(s.level_pointers(0).unwrap(), &[0, 2]);
        assert_eq!(s.level_indices(0).unwrap(), &[0, 3]);
        assert_eq!(s.level_pointers(1).unwrap(), &[0, 2, 3]);
        assert_eq!(s.level_indices(1).unwrap(), &[0, 2, 0]);
        assert_eq!(s.values_view(), &[A00, A20, A03]);
        let order: Vec<_> = s.iter().map(|(c, _)| c).collect();
        assert_eq!(order, vec![vec![0, 0], vec![2, 0], vec![0, 3]]);
    }

    #[test]
    fn triply_compressed_tensor() {
        let s = SparseStorage::pack(&tensor_t(), &Encoding::all_compressed(3).unwrap()).unwrap();
        assert_eq!(s.level_pointers(0).unwrap(), &[0, 2]);
        assert_eq!(s.level_indices(0).unwrap(), &[0, 2]);
        assert_eq!(s.level_pointers(1).unwrap(), &[0, 1, 3]);
        assert_eq!(s.level_indices(1).unwrap(), &[0, 0, 1]);
        assert_eq!(s.level_pointers(2).unwrap(), &[0, 1, 3, 5]);
        assert_eq!(s.level_indices(2).unwrap(), &[0, 0, 2, 2, 3]);
        assert_eq!(s.values_view(), &[T000, T200, T202, T212, T213]);
    }

    #[test]
    fn csr_iteration_order() {
        let s = SparseStorage::pack(&matrix_a(), &Encoding::csr()).unwrap();
        let got: Vec<_> = s.iter().collect();
        assert_eq!(
            got,
            vec![(vec![0, 0], A00), (vec![0, 3], A03), (vec![2, 0], A20)]
        );
        let coo = s.unpack();
        assert_eq!(coo.nonzero_entries(), matrix_a().nonzero_entries());
    }

    #[test]
    fn dense_vector_expands() {
        let coo = CooTensor::from_entries(vec![4], [([1], 5.0)]).unwrap();
        let s = SparseStorage::pack(&coo, &Encoding::with_levels(&[Dense]).unwrap()).unwrap();
        let got: Vec<_> = s.iter().collect();
        assert_eq!(
            got,
            vec![
                (vec![0], 0.0),
                (vec![1], 5.0),
                (vec![2], 0.0),
                (vec![3], 0.0)
            ]
        );
    }

    #[test]
    fn empty_storage() {
        let s = SparseStorage::pack(&CooTensor::new(vec![3, 4]), &Encoding::dcsr()).unwrap();
        assert_eq!(s.level_pointers(0).unwrap(), &[0, 0]);
        assert!(s.unpack().is_empty());
        assert_eq!(s.iter().count(), 0);
        let s = SparseStorage::pack(&CooTensor::new(vec![3, 4]), &Encoding::csr()).unwrap();
        assert_eq!(s.level_pointers(1).unwrap(), &[0, 0, 0, 0]);
        assert!(s.unpack().is_empty());
    }

    #[test]
    fn width_overflow() {
        let coo = CooTensor::from_entries(vec![300], [([299], 1.0)]).unwrap();
        let enc = Encoding::new(vec![Compressed], None, None, Some(8)).unwrap();
        assert!(matches!(
            SparseStorage::pack(&coo, &enc),
            Err(Error::BitWidthOverflow { what: "index", .. })
        ));
        let coo = CooTensor::from_entries(vec![300], (0..256).map(|i| ([i], 1.0))).unwrap();
        let enc = Encoding::new(vec![Compressed], None, Some(8), None).unwrap();
        assert!(matches!(
            SparseStorage::pack(&coo, &enc),
            Err(Error::BitWidthOverflow {
                what: "pointer",
                ..
            })
        ));
    }

    #[test]
    fn from_parts_rejects_bad_arrays() {
        let r = SparseStorage::from_parts(
            vec![4],
            Encoding::all_compressed(1).unwrap(),
            vec![vec![0, 2]],
            vec![vec![3, 1]],
            vec![1.0, 2.0],
        );
        assert!(r.is_err());
    }
}
