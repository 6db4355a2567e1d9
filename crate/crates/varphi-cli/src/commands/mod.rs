pub mod check;
pub mod eig;
pub mod family;
pub mod indices;
pub mod norms;
pub mod sweep;

use crate::config::RunConfig;

/// Everything a command needs besides its own config section.
pub struct Ctx {
    pub cfg: RunConfig,
    pub config_hash: String,
    pub seed: u64,
    pub emit_minimizer: bool,
    pub has_out: bool,
}
