// SPDX-License-Identifier: Apache-2.0

//! Hamiltonian files, presets and initial-state specs.

use std::path::Path;

use ito_dilation::linalg::{c, vec_norm};
use ito_dilation::{Hamiltonian, C64};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// On-disk form: `{"dim": d, "matrix": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl HamiltonianFile {
    pub fn from_hamiltonian(h: &Hamiltonian) -> Self {
        Self {
            dim: h.dim(),
            matrix: matrix_to_pairs(h.matrix()),
        }
    }

    pub fn into_hamiltonian(self) -> Result<Hamiltonian, CliError> {
        if self.dim == 0 {
            return Err(CliError::Validation("dim must be at least 1".into()));
        }
        if self.matrix.len() != self.dim || self.matrix.iter().any(|r| r.len() != self.dim) {
            return Err(CliError::Validation(format!("matrix is not {0}x{0}", self.dim)));
        }
        let data = self.matrix.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
        let m = Array2::from_shape_vec((self.dim, self.dim), data).expect("shape checked above");
        Hamiltonian::new(m).map_err(|e| CliError::Validation(e.to_string()))
    }
}

pub fn matrix_to_pairs(m: &Array2<C64>) -> Vec<Vec<[f64; 2]>> {
    m.rows().into_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn vector_to_pairs(v: &Array1<C64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: HamiltonianFile =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: malformed: {e}", path.display())))?;
    file.into_hamiltonian()
}

/// `pauli-x`, `pauli-y`, `pauli-z` or `random-hermitian:D:SEED`.
pub fn preset(name: &str) -> Result<Hamiltonian, CliError> {
    match name {
        "pauli-x" => Ok(Hamiltonian::pauli_x()),
        "pauli-y" => Ok(Hamiltonian::pauli_y()),
        "pauli-z" => Ok(Hamiltonian::pauli_z()),
        other => {
            let parts: Vec<&str> = other.split(':').collect();
            match parts.as_slice() {
                ["random-hermitian", d, seed] => {
                    let d: usize = d.parse().map_err(|_| bad_preset(other))?;
                    let seed: u64 = seed.parse().map_err(|_| bad_preset(other))?;
                    if d == 0 {
                        return Err(bad_preset(other));
                    }
                    Ok(Hamiltonian::random(d, seed))
                }
                _ => Err(bad_preset(other)),
            }
        }
    }
}

fn bad_preset(name: &str) -> CliError {
    CliError::Validation(format!(
        "unknown preset '{name}' (expected pauli-x, pauli-y, pauli-z or random-hermitian:D:SEED)"
    ))
}

/// `uniform`, `eigen:K`, `basis:K`, or a JSON list of `[re, im]` pairs.
pub fn parse_psi(spec: &str, h: &Hamiltonian) -> Result<Array1<C64>, CliError> {
    let d = h.dim();
    let index = |s: &str| -> Result<usize, CliError> {
        s.parse::<usize>()
            .ok()
            .filter(|&k| k < d)
            .ok_or_else(|| CliError::Validation(format!("index '{s}' out of range for dim {d}")))
    };
    let psi = if spec == "uniform" {
        Array1::from_elem(d, c(1.0 / (d as f64).sqrt()))
    } else if let Some(k) = spec.strip_prefix("eigen:") {
        h.eigenvector(index(k)?).expect("index checked")
    } else if let Some(k) = spec.strip_prefix("basis:") {
        let mut v = Array1::zeros(d);
        v[index(k)?] = c(1.0);
        v
    } else {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(spec)
            .map_err(|e| CliError::Validation(format!("psi: expected uniform, eigen:K, basis:K or JSON: {e}")))?;
        if pairs.len() != d {
            return Err(CliError::Validation(format!("psi has {} entries, expected {d}", pairs.len())));
        }
        Array1::from_iter(pairs.into_iter().map(|[re, im]| C64::new(re, im)))
    };
    let norm = vec_norm(&psi);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(CliError::Validation(format!("psi has norm {norm}, expected 1")));
    }
    Ok(psi)
}
