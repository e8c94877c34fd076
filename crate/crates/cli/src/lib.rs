//! Scenario-driven front end for `invphase-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod presets;
pub mod run;
pub mod scenario;

use std::path::Path;

use sha2::{Digest, Sha256};

pub use error::CliError;
pub use run::{execute, Artifact};
pub use scenario::{parse_scenario, Scenario};

/// Hex sha256 of the scenario file as read.
pub fn scenario_hash(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn load(path: &Path) -> Result<(Scenario, String), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let bytes = std::fs::read(path).map_err(io)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Validation("scenario file is not UTF-8".into()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok((parse_scenario(&text, base)?, scenario_hash(&bytes)))
}
