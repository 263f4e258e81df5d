//! Sparse tensor format annotations.
//!
//! An [`Encoding`] describes how a `d`-dimensional tensor is laid out in
//! storage: one [`LevelType`] per storage level, a dimension ordering that
//! maps each logical dimension to its storage level, and the bit widths used
//! for the pointers and indices arrays.

use std::fmt;

use crate::error::{Error, Result};

/// Bit widths accepted for pointers and indices. `0` selects the native width.
pub const BIT_WIDTHS: [u32; 5] = [0, 8, 16, 32, 64];

/// Per-level storage discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelType {
    /// Every coordinate of the level is materialized.
    Dense,
    /// Only coordinates that hold stored elements are kept, through a
    /// pointers array and an indices array.
    Compressed,
}

impl LevelType {
    pub fn name(self) -> &'static str {
        match self {
            LevelType::Dense => "dense",
            LevelType::Compressed => "compressed",
        }
    }

    pub fn is_compressed(self) -> bool {
        self == LevelType::Compressed
    }
}

impl fmt::Display for LevelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LevelType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dense" | "d" | "D" => Ok(LevelType::Dense),
            "compressed" | "c" | "C" => Ok(LevelType::Compressed),
            other => Err(Error::Unsupported(format!("level type `{other}`"))),
        }
    }
}

/// Format annotation of a sparse tensor.
///
/// `levels[l]` is the type of storage level `l`. `ordering[dim]` is the
/// storage level at which logical dimension `dim` is stored, so the column
/// major map `(i,j) -> (j,i)` is written `[1, 0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Encoding {
    levels: Vec<LevelType>,
    ordering: Vec<usize>,
    pointer_bit_width: u32,
    index_bit_width: u32,
}

impl Encoding {
    /// Builds and validates an encoding. The ordering defaults to the identity
    /// and both widths default to native.
    pub fn new(
        levels: Vec<LevelType>,
        ordering: Option<Vec<usize>>,
        pointer_bit_width: Option<u32>,
        index_bit_width: Option<u32>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::RankMismatch {
                expected: 1,
                found: 0,
            });
        }
        let rank = levels.len();
        let ordering = match ordering {
            Some(o) => {
                if o.len() != rank {
                    return Err(Error::RankMismatch {
                        expected: rank,
                        found: o.len(),
                    });
                }
                if !is_permutation(&o) {
                    return Err(Error::NotAPermutation(o));
                }
                o
            }
            None => (0..rank).collect(),
        };
        let pointer_bit_width = check_width(pointer_bit_width.unwrap_or(0))?;
        let index_bit_width = check_width(index_bit_width.unwrap_or(0))?;
        Ok(Encoding {
            levels,
            ordering,
            pointer_bit_width,
            index_bit_width,
        })
    }

    /// Identity-ordered, native-width encoding.
    pub fn with_levels(levels: &[LevelType]) -> Result<Self> {
        Self::new(levels.to_vec(), None, None, None)
    }

    pub fn csr() -> Self {
        use LevelType::*;
        Self::new(vec![Dense, Compressed], None, None, None).unwrap()
    }

    pub fn csc() -> Self {
        use LevelType::*;
        Self::new(vec![Dense, Compressed], Some(vec![1, 0]), None, None).unwrap()
    }

    pub fn dcsr() -> Self {
        use LevelType::*;
        Self::new(vec![Compressed, Compressed], None, None, None).unwrap()
    }

    pub fn dcsc() -> Self {
        use LevelType::*;
        Self::new(vec![Compressed, Compressed], Some(vec![1, 0]), None, None).unwrap()
    }

    /// Compressed rows stored densely: compressed outer level, dense inner level.
    pub fn cdr() -> Self {
        use LevelType::*;
        Self::new(vec![Compressed, Dense], None, None, None).unwrap()
    }

    /// All levels compressed, identity ordering.
    pub fn all_compressed(rank: usize) -> Result<Self> {
        Self::with_levels(&vec![LevelType::Compressed; rank])
    }

    /// Looks up a named preset (`csr`, `csc`, `dcsr`, `dcsc`, `cdr`, `sv`).
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "csr" => Some(Self::csr()),
            "csc" => Some(Self::csc()),
            "dcsr" => Some(Self::dcsr()),
            "dcsc" => Some(Self::dcsc()),
            "cdr" => Some(Self::cdr()),
            "sv" | "sparse-vector" => Self::all_compressed(1).ok(),
            _ => None,
        }
    }

    pub fn rank(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[LevelType] {
        &self.levels
    }

    pub fn level_type(&self, level: usize) -> LevelType {
        self.levels[level]
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn pointer_bit_width(&self) -> u32 {
        self.pointer_bit_width
    }

    pub fn index_bit_width(&self) -> u32 {
        self.index_bit_width
    }

    pub fn is_identity_ordering(&self) -> bool {
        self.ordering.iter().enumerate().all(|(d, &l)| d == l)
    }

    /// Storage level holding logical dimension `dim`.
    pub fn level_of_dim(&self, dim: usize) -> usize {
        self.ordering[dim]
    }

    /// Logical dimension stored at storage level `level`.
    pub fn dim_of_level(&self, level: usize) -> usize {
        self.ordering.iter().position(|&l| l == level).unwrap()
    }

    /// Permutes logical coordinates into storage order.
    pub fn to_storage<T: Copy>(&self, logical: &[T]) -> Vec<T> {
        let mut out = logical.to_vec();
        for (dim, &level) in self.ordering.iter().enumerate() {
            out[level] = logical[dim];
        }
        out
    }

    /// Inverse of [`Encoding::to_storage`].
    pub fn to_logical<T: Copy>(&self, storage: &[T]) -> Vec<T> {
        self.ordering.iter().map(|&level| storage[level]).collect()
    }

    /// Short label used in reports, e.g. `dense;compressed`.
    pub fn levels_label(&self) -> String {
        self.levels
            .iter()
            .map(|l| l.name())
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn ordering_label(&self) -> String {
        self.ordering
            .iter()
            .map(|o| o.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Prints the clause syntax accepted by the kernel parser, omitting defaults.
impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels: Vec<_> = self.levels.iter().map(|l| l.name()).collect();
        write!(f, "format({})", levels.join(","))?;
        if !self.is_identity_ordering() {
            let ord: Vec<_> = self.ordering.iter().map(|o| o.to_string()).collect();
            write!(f, " order({})", ord.join(","))?;
        }
        if self.pointer_bit_width != 0 {
            write!(f, " ptr({})", self.pointer_bit_width)?;
        }
        if self.index_bit_width != 0 {
            write!(f, " idx({})", self.index_bit_width)?;
        }
        Ok(())
    }
}

/// Logical type of a tensor: its shape and an optional sparse encoding.
/// Tensors without an encoding are dense, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorType {
    shape: Vec<usize>,
    encoding: Option<Encoding>,
}

impl TensorType {
    pub fn new(shape: Vec<usize>, encoding: Option<Encoding>) -> Result<Self> {
        if let Some(e) = &encoding {
            if e.rank() != shape.len() {
                return Err(Error::RankMismatch {
                    expected: shape.len(),
                    found: e.rank(),
                });
            }
        }
        if shape.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "extents must be positive, got {shape:?}"
            )));
        }
        Ok(TensorType { shape, encoding })
    }

    pub fn dense(shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, None)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn encoding(&self) -> Option<&Encoding> {
        self.encoding.as_ref()
    }

    pub fn is_sparse(&self) -> bool {
        self.encoding.is_some()
    }

    /// Level type of logical dimension `dim`; unannotated tensors are dense.
    pub fn dim_level_type(&self, dim: usize) -> LevelType {
        match &self.encoding {
            Some(e) => e.level_type(e.level_of_dim(dim)),
            None => LevelType::Dense,
        }
    }
}

/// Number of distinct encodings for a `d`-dimensional tensor counting two
/// level types, all orderings and four choices for each bit width.
pub fn format_space_size(d: usize) -> u128 {
    let factorial: u128 = (1..=d as u128).product();
    (1u128 << d) * factorial * 16
}

/// Every encoding of rank `d`, in a deterministic order: level combinations
/// lexicographic with dense before compressed, then orderings in lexicographic
/// order, then pointer width and index width ascending. Without bit widths
/// only the native pair is produced.
pub fn enumerate_encodings(d: usize, include_bitwidths: bool) -> Vec<Encoding> {
    let widths: &[u32] = if include_bitwidths { &BIT_WIDTHS } else { &[0] };
    let orderings = permutations(d);
    let mut out = Vec::new();
    for mask in 0..(1usize << d) {
        // Most significant bit is level 0 so the outer level varies slowest.
        let levels: Vec<LevelType> = (0..d)
            .map(|l| {
                if mask >> (d - 1 - l) & 1 == 1 {
                    LevelType::Compressed
                } else {
                    LevelType::Dense
                }
            })
            .collect();
        for ordering in &orderings {
            for &ptr in widths {
                for &idx in widths {
                    out.push(Encoding {
                        levels: levels.clone(),
                        ordering: ordering.clone(),
                        pointer_bit_width: ptr,
                        index_bit_width: idx,
                    });
                }
            }
        }
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    // Standard next-permutation walk.
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let pivot = i - 1;
        let j = (i..n).rev().find(|&j| current[j] > current[pivot]).unwrap();
        current.swap(pivot, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Whether `value` is representable as an unsigned integer of `width` bits.
/// Native (0) and 64-bit widths accept every value.
pub fn fits_width(value: usize, width: u32) -> bool {
    width == 0 || width >= 64 || (value as u128) < (1u128 << width)
}

fn check_width(w: u32) -> Result<u32> {
    if BIT_WIDTHS.contains(&w) {
        Ok(w)
    } else {
        Err(Error::InvalidBitWidth(w))
    }
}

fn is_permutation(o: &[usize]) -> bool {
    let mut seen = vec![false; o.len()];
    for &x in o {
        if x >= o.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}
