//! Function spec file:
//!
//! ```json
//! {
//!   "tau": [0.3, 1.0],
//!   "zeros": [[0.25, 0.0], [0.725, 0.75]],
//!   "poles": [[0.5, 0.0], "auto"],
//!   "scale": [1.0, 0.0]
//! }
//! ```
//!
//! `tau` is the period ratio of the lattice `(1, tau)`. The final pole may
//! be the string `"auto"`, in which case it is derived from the sum
//! constraint. `scale` is optional and defaults to 1.

use super::{EllipticError, EllipticFunction, Lattice, ZeroPoleData};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PoleEntry {
    Auto(String),
    Point([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub tau: [f64; 2],
    pub zeros: Vec<[f64; 2]>,
    poles: Vec<PoleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<[f64; 2]>,
}

impl FunctionSpec {
    pub fn from_function(f: &EllipticFunction) -> FunctionSpec {
        let c = |z: Complex64| [z.re, z.im];
        FunctionSpec {
            tau: c(f.lattice().tau()),
            zeros: f.zeros().iter().map(|&z| c(z)).collect(),
            poles: f.poles().iter().map(|&z| PoleEntry::Point(c(z))).collect(),
            scale: Some(c(f.scale())),
        }
    }
}

pub fn function_from_json(text: &str) -> Result<EllipticFunction, EllipticError> {
    let spec: FunctionSpec =
        serde_json::from_str(text).map_err(|e| EllipticError::BadSpec(e.to_string()))?;
    let tau = Complex64::new(spec.tau[0], spec.tau[1]);
    let lattice = Lattice::from_tau(tau)?;
    let zeros: Vec<Complex64> = spec
        .zeros
        .iter()
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    let mut poles = Vec::new();
    let mut auto_close = false;
    for (i, entry) in spec.poles.iter().enumerate() {
        match entry {
            PoleEntry::Point(p) => {
                if auto_close {
                    return Err(EllipticError::BadSpec(
                        "\"auto\" is only allowed as the final pole".into(),
                    ));
                }
                poles.push(Complex64::new(p[0], p[1]));
            }
            PoleEntry::Auto(s) => {
                if s != "auto" {
                    return Err(EllipticError::BadSpec(format!(
                        "unrecognized pole entry {s:?}"
                    )));
                }
                if i + 1 != spec.poles.len() {
                    return Err(EllipticError::BadSpec(
                        "\"auto\" is only allowed as the final pole".into(),
                    ));
                }
                auto_close = true;
            }
        }
    }
    let data = ZeroPoleData {
        zeros,
        poles,
        auto_close,
    };
    let f = EllipticFunction::canonical(&data, lattice)?;
    match spec.scale {
        Some([re, im]) => f.with_scale(Complex64::new(re, im)),
        None => Ok(f),
    }
}

/// Serializes with the closing point resolved to an explicit pole.
pub fn function_to_json(f: &EllipticFunction) -> String {
    serde_json::to_string_pretty(&FunctionSpec::from_function(f))
        .expect("function serialization cannot fail")
}
