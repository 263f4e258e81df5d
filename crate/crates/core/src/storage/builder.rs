use super::SparseStorage;
use crate::encoding::{fits_width, Encoding, LevelType};
use crate::error::{Error, Result};

/// Incremental construction of [`SparseStorage`] from insertions in strictly
/// increasing storage-lexicographic order.
///
/// Each insertion only touches the levels below the first coordinate that
/// differs from the previous insertion, so building is linear in the number
/// of stored positions.
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    shape: Vec<usize>,
    encoding: Encoding,
    extents: Vec<usize>,
    pointers: Vec<Vec<usize>>,
    indices: Vec<Vec<usize>>,
    values: Vec<f64>,
    /// Current position per storage level.
    pos: Vec<usize>,
    last: Option<Vec<usize>>,
}

impl SparseBuilder {
    pub fn new(shape: Vec<usize>, encoding: Encoding) -> Result<Self> {
        if shape.len() != encoding.rank() {
            return Err(Error::RankMismatch {
                expected: shape.len(),
                found: encoding.rank(),
            });
        }
        let rank = shape.len();
        let extents = (0..rank).map(|l| shape[encoding.dim_of_level(l)]).collect();
        Ok(SparseBuilder {
            shape,
            encoding,
            extents,
            pointers: vec![Vec::new(); rank],
            indices: vec![Vec::new(); rank],
            values: Vec::new(),
            pos: vec![0; rank],
            last: None,
        })
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    /// Inserts an element given its logical coordinates.
    pub fn insert(&mut self, coords: &[usize], value: f64) -> Result<()> {
        if coords.len() != self.shape.len() {
            return Err(Error::RankMismatch {
                expected: self.shape.len(),
                found: coords.len(),
            });
        }
        let s = self.encoding.to_storage(coords);
        self.insert_storage(&s, value)
    }

    /// Inserts an element given its coordinates in storage order.
    pub fn insert_storage(&mut self, coords: &[usize], value: f64) -> Result<()> {
        let rank = self.extents.len();
        if coords.iter().zip(&self.extents).any(|(&c, &n)| c >= n) {
            return Err(Error::CoordOutOfBounds {
                coords: self.encoding.to_logical(coords),
                shape: self.shape.clone(),
            });
        }
        let first = match &self.last {
            None => 0,
            Some(prev) => match (0..rank).find(|&l| coords[l] != prev[l]) {
                Some(l) if coords[l] > prev[l] => l,
                _ => {
                    return Err(Error::OutOfOrderInsertion {
                        coords: self.encoding.to_logical(coords),
                        previous: self.encoding.to_logical(prev),
                    })
                }
            },
        };
        let iw = self.encoding.index_bit_width();
        for l in first..rank {
            let parent = if l == 0 { 0 } else { self.pos[l - 1] };
            match self.encoding.level_type(l) {
                LevelType::Dense => self.pos[l] = parent * self.extents[l] + coords[l],
                LevelType::Compressed => {
                    if !fits_width(coords[l], iw) {
                        return Err(Error::BitWidthOverflow {
                            what: "index",
                            value: coords[l],
                            width: iw,
                        });
                    }
                    let (ptr, idx) = (&mut self.pointers[l], &mut self.indices[l]);
                    while ptr.len() <= parent {
                        ptr.push(idx.len());
                    }
                    idx.push(coords[l]);
                    self.pos[l] = idx.len() - 1;
                }
            }
        }
        let p = self.pos[rank - 1];
        if self.values.len() <= p {
            self.values.resize(p + 1, 0.0);
        }
        self.values[p] = value;
        match &mut self.last {
            Some(prev) => prev.copy_from_slice(coords),
            None => self.last = Some(coords.to_vec()),
        }
        Ok(())
    }

    /// Closes all pointer segments and pads dense trailing positions.
    pub fn finish(mut self) -> Result<SparseStorage> {
        let rank = self.extents.len();
        let pw = self.encoding.pointer_bit_width();
        let mut parent_size = 1usize;
        for l in 0..rank {
            match self.encoding.level_type(l) {
                LevelType::Dense => parent_size *= self.extents[l],
                LevelType::Compressed => {
                    let (ptr, idx) = (&mut self.pointers[l], &self.indices[l]);
                    while ptr.len() <= parent_size {
                        ptr.push(idx.len());
                    }
                    if let Some(&p) = ptr.last().filter(|&&p| !fits_width(p, pw)) {
                        return Err(Error::BitWidthOverflow {
                            what: "pointer",
                            value: p,
                            width: pw,
                        });
                    }
                    parent_size = idx.len();
                }
            }
        }
        self.values.resize(parent_size, 0.0);
        let s = SparseStorage::from_parts_unchecked(
            self.shape,
            self.encoding,
            self.pointers,
            self.indices,
            self.values,
        );
        debug_assert_eq!(s.validate(), Ok(()));
        Ok(s)
    }
}
