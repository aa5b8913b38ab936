pub mod analyze;
pub mod bridge;
pub mod chain;
pub mod keygen;
pub mod mine;
pub mod plasma;
pub mod sim;
pub mod swap;
pub mod tx;

use chainbench_core::crypto::CurveParams;

use crate::CliError;

/// Resolve a curve profile by name.
pub fn curve_by_name(name: &str) -> Result<CurveParams, CliError> {
    CurveParams::by_name(name).ok_or_else(|| {
        CliError::Domain(format!(
            "unknown curve profile {name:?} (toy17, toy10007, toy9739, secp256k1)"
        ))
    })
}
