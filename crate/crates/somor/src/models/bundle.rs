//! Directory bundles: six Matrix Market files plus a JSON sidecar.
//!
//! A bundle directory holds `M.mtx`, `D.mtx`, `K.mtx`, `B.mtx`, `Cp.mtx`,
//! `Cv.mtx` and `meta.json`. Reading tolerates partial bundles so externally
//! prepared data drops in easily: a missing `D.mtx` is reconstructed as a
//! stiffness-proportional damping `scale * K` (the scale comes from the
//! metadata key `stiffness_damping_scale`, default `1e-6`), missing output
//! maps default to the colocated choice `C_v = B'`, `C_p = 0`, and a missing
//! `meta.json` yields placeholder metadata.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mmio::{read_matrix_market_file, write_matrix_market_file};
use super::ModelError;
use crate::linalg::DMat;
use crate::sos::SecondOrderSystem;

/// Default damping scale applied to `K` when a bundle has no `D.mtx`.
const DEFAULT_DAMPING_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDims {
    pub n: usize,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleMeta {
    pub generator: String,
    pub dimensions: BundleDims,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

impl BundleMeta {
    pub fn new(
        generator: &str,
        sys: &SecondOrderSystem,
        parameters: serde_json::Value,
    ) -> Self {
        BundleMeta {
            generator: generator.to_string(),
            dimensions: BundleDims {
                n: sys.order(),
                inputs: sys.n_inputs(),
                outputs: sys.n_outputs(),
            },
            parameters,
        }
    }
}

/// Writes all six matrices and the metadata sidecar into `dir`, creating it
/// if needed.
pub fn write_bundle(
    dir: &Path,
    sys: &SecondOrderSystem,
    meta: &BundleMeta,
) -> Result<(), ModelError> {
    fs::create_dir_all(dir)?;
    for (name, mat) in [
        ("M.mtx", &sys.m),
        ("D.mtx", &sys.d),
        ("K.mtx", &sys.k),
        ("B.mtx", &sys.b_u),
        ("Cp.mtx", &sys.c_p),
        ("Cv.mtx", &sys.c_v),
    ] {
        write_matrix_market_file(mat, &dir.join(name))?;
    }
    let mut text = serde_json::to_string_pretty(meta)
        .map_err(|e| ModelError::Inconsistent(format!("metadata serialization failed: {}", e)))?;
    text.push('\n');
    fs::write(dir.join("meta.json"), text)?;
    Ok(())
}

/// Reads a bundle directory back into a system, filling the gaps described
/// in the module docs, and cross-checks any metadata dimensions.
pub fn read_bundle(dir: &Path) -> Result<(SecondOrderSystem, BundleMeta), ModelError> {
    let m = read_required(dir, "M.mtx")?;
    let k = read_required(dir, "K.mtx")?;
    let b_u = read_required(dir, "B.mtx")?;

    let meta_path = dir.join("meta.json");
    let meta: Option<BundleMeta> = match fs::read_to_string(&meta_path) {
        Ok(text) => Some(serde_json::from_str(&text).map_err(|e| ModelError::Parse {
            line: e.line(),
            msg: format!("meta.json: {}", e),
        })?),
        Err(e) if e.kind() == ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };

    let d = match read_optional(dir, "D.mtx")? {
        Some(d) => d,
        None => {
            let scale = meta
                .as_ref()
                .and_then(|m| m.parameters.get("stiffness_damping_scale"))
                .and_then(|v| v.as_f64())
                .unwrap_or(DEFAULT_DAMPING_SCALE);
            &k * scale
        }
    };

    let c_p = read_optional(dir, "Cp.mtx")?;
    let c_v = read_optional(dir, "Cv.mtx")?;
    let n = m.nrows();
    let (c_p, c_v) = match (c_p, c_v) {
        (Some(p), Some(v)) => (p, v),
        (Some(p), None) => {
            let rows = p.nrows();
            (p, DMat::zeros(rows, n))
        }
        (None, Some(v)) => {
            let rows = v.nrows();
            (DMat::zeros(rows, n), v)
        }
        (None, None) => (DMat::zeros(b_u.ncols(), n), b_u.transpose()),
    };

    let sys = SecondOrderSystem::new(m, d, k, b_u, c_p, c_v)?;
    let meta = match meta {
        Some(meta) => {
            let actual = BundleDims {
                n: sys.order(),
                inputs: sys.n_inputs(),
                outputs: sys.n_outputs(),
            };
            if meta.dimensions != actual {
                return Err(ModelError::Inconsistent(format!(
                    "meta.json dimensions {:?} disagree with the matrices {:?}",
                    meta.dimensions, actual
                )));
            }
            meta
        }
        None => BundleMeta::new("unknown", &sys, serde_json::Value::Null),
    };
    Ok((sys, meta))
}

fn read_required(dir: &Path, name: &str) -> Result<DMat, ModelError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(ModelError::Inconsistent(format!(
            "bundle {} is missing {}",
            dir.display(),
            name
        )));
    }
    read_matrix_market_file(&path)
}

fn read_optional(dir: &Path, name: &str) -> Result<Option<DMat>, ModelError> {
    let path = dir.join(name);
    if path.is_file() {
        Ok(Some(read_matrix_market_file(&path)?))
    } else {
        Ok(None)
    }
}
