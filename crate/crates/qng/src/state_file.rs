//! Density-matrix files: `{"dim": d, "entries": [[re, im], ...]}` with the
//! `d²` entries in row-major order.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use qng_core::fock::DensityMatrix;
use qng_core::CMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Hermiticity and trace tolerance applied on load.
pub const LOAD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let entries = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = rho.element(i, j);
                [z.re, z.im]
            })
            .collect();
        Self { dim: d, entries }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(CliError::Usage(format!(
                "state file has {} entries, dim {} needs {}",
                self.entries.len(),
                self.dim,
                self.dim * self.dim
            )));
        }
        let m = CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            Complex64::new(re, im)
        });
        Ok(DensityMatrix::with_tolerance(m, LOAD_TOLERANCE)?)
    }
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: StateFile = serde_json::from_str(&text)?;
    file.to_density()
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_density(rho))?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
