//! Row-major nested-array (de)serialization for `DMatrix<f64>`.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Rows {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
}

pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let data = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    Rows { rows: m.nrows(), cols: m.ncols(), data }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
    let Rows { rows, cols, data } = Rows::deserialize(d)?;
    if data.len() != rows || data.iter().any(|r| r.len() != cols) {
        return Err(D::Error::custom(format!("matrix data does not match declared shape {rows}x{cols}")));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| data[i][j]))
}

/// The same encoding for a list of matrices.
pub mod list {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "super")] DMatrix<f64>);

    pub fn serialize<S: Serializer>(ms: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(ms.iter().map(|m| Wrapped(m.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
        Ok(Vec::<Wrapped>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}
