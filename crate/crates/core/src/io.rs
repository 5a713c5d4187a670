//! JSON state files.
//!
//! Mixed states are stored as `{"n_local": N, "matrix": [[[re, im], ...], ...]}`
//! with `N² × N²` row-major entries; pure states as
//! `{"n_local": N, "vector": [[re, im], ...]}`. The composite index is
//! `a·N + b` and each local basis runs from `m = j` down to `m = −j`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkit::{ComplexMatrix, C64};
use crate::states::{DensityMatrix, PureState};

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum Raw {
    Matrix { n_local: usize, matrix: Vec<Vec<[f64; 2]>> },
    Vector { n_local: usize, vector: Vec<[f64; 2]> },
}

/// Contents of a state file.
#[derive(Clone, Debug)]
pub enum StateFile {
    Mixed(DensityMatrix),
    Pure(PureState),
}

impl StateFile {
    pub fn n_local(&self) -> usize {
        match self {
            StateFile::Mixed(rho) => rho.n_local(),
            StateFile::Pure(psi) => psi.n_local(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            StateFile::Mixed(rho) => rho.clone(),
            StateFile::Pure(psi) => psi.density(),
        }
    }

    pub fn to_json(&self) -> String {
        let raw = match self {
            StateFile::Mixed(rho) => {
                let m = rho.matrix();
                Raw::Matrix {
                    n_local: rho.n_local(),
                    matrix: (0..m.rows()).map(|r| (0..m.cols()).map(|c| pair(m.get(r, c))).collect()).collect(),
                }
            }
            StateFile::Pure(psi) => {
                Raw::Vector { n_local: psi.n_local(), vector: psi.vector().iter().map(|&z| pair(z)).collect() }
            }
        };
        serde_json::to_string(&raw).expect("state serialization cannot fail")
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Parses and validates a state from JSON text.
pub fn parse_state(text: &str) -> Result<StateFile> {
    let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match raw {
        Raw::Matrix { n_local, matrix } => {
            let d = n_local * n_local;
            if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
                return Err(Error::Parse(format!("matrix for n_local={n_local} must be {d}x{d}")));
            }
            let flat: Vec<C64> = matrix.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
            let m = ComplexMatrix::from_row_major(d, d, flat)?;
            Ok(StateFile::Mixed(DensityMatrix::new(n_local, m)?))
        }
        Raw::Vector { n_local, vector } => {
            let v: Vec<C64> = vector.iter().map(|&[re, im]| C64::new(re, im)).collect();
            Ok(StateFile::Pure(PureState::new(n_local, v)?))
        }
    }
}

pub fn read_state(path: &Path) -> Result<StateFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_state(&text)
}

pub fn write_state(path: &Path, state: &StateFile) -> Result<()> {
    fs::write(path, state.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinspace::CoupledSpinSystem;
    use crate::states::{family_state, random_density, random_pure, seeded_rng};

    #[test]
    fn mixed_round_trip_is_exact() {
        let mut rng = seeded_rng(5, 0);
        let rho = random_density(4, 3, &mut rng).unwrap();
        let text = StateFile::Mixed(rho.clone()).to_json();
        let back = parse_state(&text).unwrap();
        assert_eq!(back.n_local(), 4);
        assert_eq!(back.density().matrix().max_abs_diff(rho.matrix()), 0.0);
    }

    #[test]
    fn pure_round_trip_is_exact() {
        let mut rng = seeded_rng(6, 0);
        let psi = random_pure(4, &mut rng).unwrap();
        let back = parse_state(&StateFile::Pure(psi.clone()).to_json()).unwrap();
        match back {
            StateFile::Pure(p) => assert_eq!(p.vector(), psi.vector()),
            StateFile::Mixed(_) => panic!("pure state read back as mixed"),
        }
    }

    #[test]
    fn file_round_trip() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let rho = family_state(&sys, 0.3).unwrap();
        let path = std::env::temp_dir().join(format!("entwit-io-{}.json", std::process::id()));
        write_state(&path, &StateFile::Mixed(rho.clone())).unwrap();
        let back = read_state(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(back.density().matrix().max_abs_diff(rho.matrix()), 0.0);
    }

    #[test]
    fn rejects_malformed_and_invalid() {
        assert!(matches!(parse_state("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_state(r#"{"n_local": 4}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_state(r#"{"n_local": 4, "matrix": [[[1, 0]]]}"#), Err(Error::Parse(_))));
        // right shape, trace 0
        let zeros: Vec<Vec<[f64; 2]>> = vec![vec![[0.0, 0.0]; 16]; 16];
        let text = serde_json::json!({"n_local": 4, "matrix": zeros}).to_string();
        assert!(matches!(parse_state(&text), Err(Error::InvalidState(_))));
        let v = vec![[0.5, 0.0]; 16];
        let text = serde_json::json!({"n_local": 4, "vector": v}).to_string();
        assert!(matches!(parse_state(&text), Err(Error::InvalidState(_))));
        assert!(matches!(read_state(Path::new("/nonexistent/state.json")), Err(Error::Io(_))));
    }
}
