//! Reading and writing tensors: Matrix Market, FROSTT, extended FROSTT and
//! literal constants.

mod frostt;
mod literal;
mod mtx;

use std::path::{Path, PathBuf};

pub use frostt::{
    format_extended_frostt, format_value, has_extended_header, parse_extended_frostt, parse_frostt,
};
pub use literal::{read_dense_literal, read_sparse_literal};
pub use mtx::parse_matrix_market;

use crate::error::Result;
use crate::storage::CooTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    MatrixMarket,
    Frostt,
    ExtendedFrostt,
}

impl FileFormat {
    /// Picks a format from the extension, falling back to the file header.
    pub fn detect(path: &Path, text: &str) -> FileFormat {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if ext.as_deref() == Some("mtx")
            || text
                .trim_start()
                .to_ascii_lowercase()
                .starts_with("%%matrixmarket")
        {
            FileFormat::MatrixMarket
        } else if has_extended_header(text) {
            FileFormat::ExtendedFrostt
        } else {
            FileFormat::Frostt
        }
    }

    pub fn parse(self, text: &str) -> Result<CooTensor> {
        match self {
            FileFormat::MatrixMarket => parse_matrix_market(text),
            FileFormat::Frostt => parse_frostt(text),
            FileFormat::ExtendedFrostt => parse_extended_frostt(text),
        }
    }
}

/// A tensor file plus, optionally, its format. Without one, the format is
/// detected when the file is read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpec {
    pub path: PathBuf,
    pub format: Option<FileFormat>,
}

impl SourceSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        SourceSpec {
            path: path.into(),
            format: None,
        }
    }

    pub fn with_format(path: impl Into<PathBuf>, format: FileFormat) -> Self {
        SourceSpec {
            path: path.into(),
            format: Some(format),
        }
    }
}

/// Reads a tensor file into a normalized coordinate list (0-based).
pub fn read_tensor(src: &SourceSpec) -> Result<CooTensor> {
    let text = std::fs::read_to_string(&src.path)?;
    let format = src
        .format
        .unwrap_or_else(|| FileFormat::detect(&src.path, &text));
    format.parse(&text)
}

/// Writes `coo` as extended FROSTT.
pub fn write_tensor(coo: &CooTensor, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_extended_frostt(coo))?;
    Ok(())
}
