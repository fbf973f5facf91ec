//! JSON encoding of complex matrices and vectors.
//!
//! A complex scalar is a `[re, im]` pair; a vector is four scalars; a matrix
//! is four rows of four scalars, row-major. Numbers go through serde_json's
//! shortest round-trip formatting, so encoding is lossless for finite values.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMatrix4, CVector4};
use num_complex::Complex64;

pub type ScalarRepr = [f64; 2];
pub type VectorRepr = [ScalarRepr; 4];
pub type MatrixRepr = [[ScalarRepr; 4]; 4];

pub fn scalar_repr(z: Complex64) -> ScalarRepr {
    [z.re, z.im]
}

pub fn matrix_repr(m: &CMatrix4) -> MatrixRepr {
    let mut out = [[[0.0; 2]; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = scalar_repr(m[(i, j)]);
        }
    }
    out
}

pub fn matrix_from_repr(repr: &MatrixRepr) -> CMatrix4 {
    CMatrix4::from_fn(|i, j| Complex64::new(repr[i][j][0], repr[i][j][1]))
}

pub fn vector_repr(v: &CVector4) -> VectorRepr {
    [
        scalar_repr(v[0]),
        scalar_repr(v[1]),
        scalar_repr(v[2]),
        scalar_repr(v[3]),
    ]
}

pub fn vector_from_repr(repr: &VectorRepr) -> CVector4 {
    CVector4::from_fn(|i, _| Complex64::new(repr[i][0], repr[i][1]))
}

/// Parses a JSON array of matrices.
pub fn parse_matrix_list(text: &str) -> serde_json::Result<Vec<CMatrix4>> {
    let reprs: Vec<MatrixRepr> = serde_json::from_str(text)?;
    Ok(reprs.iter().map(matrix_from_repr).collect())
}

pub fn parse_matrix(text: &str) -> serde_json::Result<CMatrix4> {
    let repr: MatrixRepr = serde_json::from_str(text)?;
    Ok(matrix_from_repr(&repr))
}

pub fn parse_vector_list(text: &str) -> serde_json::Result<Vec<CVector4>> {
    let reprs: Vec<VectorRepr> = serde_json::from_str(text)?;
    Ok(reprs.iter().map(vector_from_repr).collect())
}

pub fn matrix_list_to_string(matrices: &[CMatrix4]) -> String {
    let reprs: Vec<MatrixRepr> = matrices.iter().map(matrix_repr).collect();
    serde_json::to_string(&reprs).expect("finite matrices always serialize")
}

/// `#[serde(with = ...)]` adapter for a `CMatrix4` field.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix4, s: S) -> Result<S::Ok, S::Error> {
        matrix_repr(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix4, D::Error> {
        MatrixRepr::deserialize(d).map(|r| matrix_from_repr(&r))
    }
}

/// `#[serde(with = ...)]` adapter for an `Option<CMatrix4>` field.
pub mod option_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMatrix4>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMatrix4>, D::Error> {
        Option::<MatrixRepr>::deserialize(d).map(|r| r.as_ref().map(matrix_from_repr))
    }
}

/// `#[serde(with = ...)]` adapter for a `CVector4` field.
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector4, s: S) -> Result<S::Ok, S::Error> {
        vector_repr(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector4, D::Error> {
        VectorRepr::deserialize(d).map(|r| vector_from_repr(&r))
    }
}

/// `#[serde(with = ...)]` adapter for a `Complex64` field.
pub mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        scalar_repr(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        ScalarRepr::deserialize(d).map(|r| Complex64::new(r[0], r[1]))
    }
}
