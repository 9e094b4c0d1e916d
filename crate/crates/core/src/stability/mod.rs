//! Linear stability of the fluid tip dynamics and of compliance networks.

pub mod equation;
pub mod modes;
pub mod roots;
pub mod spectral;

pub use modes::{find_x0, verify_unstable_mode, ModeCheck};
pub use roots::{count_roots, SpectralRegion};
pub use spectral::{check_sufficient_condition, compliance_matrix, SamplingGrid, SufficientReport};
