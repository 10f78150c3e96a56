//! JSON schemas for matrices, states, bases, and embeddings.
//!
//! A Hermitian matrix is `{"dim": d, "rows": [[[re, im], ...], ...]}` with
//! row-major complex entries. Deserialization re-validates Hermiticity (and
//! state validity for density operators), so hand-edited files fail loudly.

use num_complex::Complex64;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::density::DensityOperator;
use crate::error::Result;
use crate::hermitian::{HermitianMatrix, OrthonormalBasis};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    fn pack(dim: usize, entries: &[Complex64]) -> Self {
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| {
                let z = entries[i * dim + j];
                [z.re, z.im]
            }).collect())
            .collect();
        Self { dim, rows }
    }

    fn unpack(&self) -> std::result::Result<Vec<Complex64>, String> {
        if self.rows.len() != self.dim {
            return Err(format!("expected {} rows, got {}", self.dim, self.rows.len()));
        }
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.dim {
                return Err(format!("row {i} has {} entries, expected {}", row.len(), self.dim));
            }
            entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        Ok(entries)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::pack(self.dim(), self.entries()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let entries = raw.unpack().map_err(D::Error::custom)?;
        HermitianMatrix::new(raw.dim, entries).map_err(D::Error::custom)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = HermitianMatrix::deserialize(d)?;
        DensityOperator::new(m).map_err(D::Error::custom)
    }
}

impl Serialize for OrthonormalBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::pack(self.dim(), self.entries()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrthonormalBasis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let entries = raw.unpack().map_err(D::Error::custom)?;
        OrthonormalBasis::new(raw.dim, entries).map_err(D::Error::custom)
    }
}

pub fn load_matrix_json(path: &std::path::Path) -> Result<HermitianMatrix> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_matrix_json(path: &std::path::Path, m: &HermitianMatrix) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(m)?)?;
    Ok(())
}

pub fn load_state_json(path: &std::path::Path) -> Result<DensityOperator> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_state_json(path: &std::path::Path, rho: &DensityOperator) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(rho.matrix())?)?;
    Ok(())
}
