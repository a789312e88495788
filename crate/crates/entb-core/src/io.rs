//! JSON persistence for states and observable pairs.
//!
//! State files hold `{"dims":[m,n],"matrix":[[re,im],...]}` with `(m*n)^2`
//! row-major entries. Serialization uses shortest round-trip float encoding,
//! so write-then-read restores every matrix bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loo::{LooPair, LooSet};
use crate::matrix::{c, CMatrix};
use crate::qstate::{BipartiteDims, DensityMatrix};

/// On-disk form of a density matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    /// `[m, n]` as stored; reading canonicalizes to `m <= n`.
    pub dims: [usize; 2],
    /// Row-major `[re, im]` entries.
    pub matrix: Vec<[f64; 2]>,
}

fn matrix_entries(mat: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(mat.nrows() * mat.ncols());
    for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            out.push([mat[(i, j)].re, mat[(i, j)].im]);
        }
    }
    out
}

fn entries_to_matrix(entries: &[[f64; 2]], rows: usize, cols: usize) -> Result<CMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!(
            "matrix has {} entries, expected {}",
            entries.len(),
            rows * cols
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = entries[i * cols + j];
        c(re, im)
    }))
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            dims: [rho.dims().m(), rho.dims().n()],
            matrix: matrix_entries(rho.mat()),
        }
    }

    /// Validates the stored matrix into a density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let [m, n] = self.dims;
        if m == 0 || n == 0 {
            return Err(Error::Parse("dims entries must be positive".into()));
        }
        let d = m * n;
        let mat = entries_to_matrix(&self.matrix, d, d)?;
        DensityMatrix::new(mat, m, n)
    }
}

/// Serializes a state to the JSON document format.
pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string(&StateFile::from_density(rho)).expect("state serialization")
}

/// Parses the raw document without validating the state (the `validate`
/// command reports invariant magnitudes itself).
pub fn state_file_from_json(text: &str) -> Result<StateFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses and validates a state from JSON text.
pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_density()
}

/// Writes a state file.
pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    fs::write(path, state_to_json(rho))?;
    Ok(())
}

/// Reads and validates a state file.
pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)?;
    state_from_json(&text)
}

/// On-disk form of an observable pair, in the same numeric conventions as
/// [`StateFile`]: `n^2` A-side matrices (`m x m`, zero-padded tail included)
/// and `n^2` B-side matrices (`n x n`), each row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LooPairFile {
    pub dims: [usize; 2],
    pub set_a: Vec<Vec<[f64; 2]>>,
    pub set_b: Vec<Vec<[f64; 2]>>,
}

impl LooPairFile {
    pub fn from_pair(pair: &LooPair) -> Self {
        Self {
            dims: [pair.dims().m(), pair.dims().n()],
            set_a: pair.a_padded().iter().map(matrix_entries).collect(),
            set_b: pair.set_b().mats().iter().map(matrix_entries).collect(),
        }
    }

    pub fn to_pair(&self) -> Result<LooPair> {
        let [m, n] = self.dims;
        let dims = BipartiteDims::new(m, n)
            .map_err(|_| Error::Parse(format!("bad pair dims [{m}, {n}]")))?;
        if self.set_a.len() != n * n || self.set_b.len() != n * n {
            return Err(Error::Parse(format!(
                "pair file needs {} matrices per side, got {} and {}",
                n * n,
                self.set_a.len(),
                self.set_b.len()
            )));
        }
        let mats_a = self.set_a[..m * m]
            .iter()
            .map(|e| entries_to_matrix(e, m, m))
            .collect::<Result<Vec<_>>>()?;
        for (idx, tail) in self.set_a[m * m..].iter().enumerate() {
            let mat = entries_to_matrix(tail, m, m)?;
            if crate::matrix::max_abs(&mat) > 1e-12 {
                return Err(Error::Parse(format!(
                    "A-side position {} must be zero-padded",
                    m * m + idx
                )));
            }
        }
        let mats_b = self
            .set_b
            .iter()
            .map(|e| entries_to_matrix(e, n, n))
            .collect::<Result<Vec<_>>>()?;
        LooPair::new(dims, LooSet::new(m, mats_a)?, LooSet::new(n, mats_b)?)
    }
}

/// Writes an observable pair file.
pub fn write_pair(path: &Path, pair: &LooPair) -> Result<()> {
    fs::write(path, serde_json::to_string(&LooPairFile::from_pair(pair)).expect("serialization"))?;
    Ok(())
}

/// Reads and validates an observable pair file.
pub fn read_pair(path: &Path) -> Result<LooPair> {
    let text = fs::read_to_string(path)?;
    let file: LooPairFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_pair()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loo::schmidt_pair;
    use crate::qstate::{random_ginibre, random_pure_with};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn state_roundtrip_is_bit_exact() {
        let rho = random_ginibre(2, 3, 77).unwrap();
        let text = state_to_json(&rho);
        let back = state_from_json(&text).unwrap();
        assert_eq!(back.mat(), rho.mat());
        assert_eq!(back.dims(), rho.dims());
    }

    #[test]
    fn parse_errors_carry_context() {
        let err = state_from_json("{\"dims\":[2,2],\"matrix\":[[0.5").unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line"), "message: {msg}"),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn invalid_state_fails_validation_not_parsing() {
        let mut file = StateFile::from_density(&random_ginibre(2, 2, 1).unwrap());
        for entry in &mut file.matrix {
            entry[0] *= 0.9;
            entry[1] *= 0.9;
        }
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(state_from_json(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn pair_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = crate::qstate::BipartiteDims::new(2, 3).unwrap();
        let psi = random_pure_with(dims, &mut rng);
        let pair = schmidt_pair(&psi.schmidt(), dims).unwrap();
        let file = LooPairFile::from_pair(&pair);
        let back = file.to_pair().unwrap();
        for (a, b) in pair.set_a().mats().iter().zip(back.set_a().mats()) {
            assert_eq!(a, b);
        }
        for (a, b) in pair.set_b().mats().iter().zip(back.set_b().mats()) {
            assert_eq!(a, b);
        }
    }
}
