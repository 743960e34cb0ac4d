//! JSON encodings for states and custom channels.
//!
//! Matrices are nested row-major arrays of `[re, im]` pairs:
//!
//! ```json
//! { "d": 2, "matrix": [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, C64};

/// Tolerance applied to Kraus completeness when loading a channel file.
pub const CHANNEL_FILE_TOL: f64 = 1e-8;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub d: usize,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub d: usize,
    pub operators: Vec<MatrixJson>,
}

pub fn encode_matrix(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Decodes a `d`×`d` matrix, naming the offending field on shape errors.
pub fn decode_matrix(field: &str, d: usize, rows: &MatrixJson) -> Result<ComplexMatrix> {
    if rows.len() != d {
        return Err(Error::Schema {
            field: field.to_string(),
            message: format!("expected {d} rows, found {}", rows.len()),
        });
    }
    let mut data = Vec::with_capacity(d * d);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Schema {
                field: format!("{field}[{i}]"),
                message: format!("expected {d} entries, found {}", row.len()),
            });
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Schema {
                    field: format!("{field}[{i}][{j}]"),
                    message: "non-finite entry".into(),
                });
            }
            data.push(C64::new(re, im));
        }
    }
    ComplexMatrix::new(d, d, data)
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            d: rho.dim(),
            matrix: encode_matrix(rho.matrix()),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        if self.d < 2 {
            return Err(Error::Schema {
                field: "d".into(),
                message: format!("dimension {} is below 2", self.d),
            });
        }
        DensityMatrix::new(decode_matrix("matrix", self.d, &self.matrix)?)
    }
}

pub fn parse_state(json: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(json).map_err(schema_error)?;
    file.to_density()
}

pub fn read_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn state_to_json(rho: &DensityMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateFile::from_density(rho))?)
}

impl ChannelFile {
    pub fn from_channel(chan: &KrausChannel) -> Self {
        Self {
            d: chan.dim(),
            operators: chan.operators().iter().map(encode_matrix).collect(),
        }
    }

    /// Decodes into a custom channel; completeness is enforced at
    /// [`CHANNEL_FILE_TOL`].
    pub fn to_channel(&self) -> Result<KrausChannel> {
        if self.d < 2 {
            return Err(Error::Schema {
                field: "d".into(),
                message: format!("dimension {} is below 2", self.d),
            });
        }
        if self.operators.is_empty() {
            return Err(Error::Schema {
                field: "operators".into(),
                message: "no Kraus operators".into(),
            });
        }
        let ops = self
            .operators
            .iter()
            .enumerate()
            .map(|(k, m)| decode_matrix(&format!("operators[{k}]"), self.d, m))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::custom(self.d, ops, CHANNEL_FILE_TOL)
    }
}

pub fn parse_channel(json: &str) -> Result<KrausChannel> {
    let file: ChannelFile = serde_json::from_str(json).map_err(schema_error)?;
    file.to_channel()
}

pub fn read_channel(path: impl AsRef<Path>) -> Result<KrausChannel> {
    parse_channel(&std::fs::read_to_string(path)?)
}

fn schema_error(e: serde_json::Error) -> Error {
    // serde reports the field in its message (`missing field `d``, `unknown field ...`).
    Error::Schema {
        field: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}
