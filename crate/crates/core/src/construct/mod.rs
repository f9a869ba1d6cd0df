//! Regular majorants, the equilibrium system `σ(t)`, `δ_j(t)` and the
//! rearrangement estimates built on them.

mod equilibrium;
mod estimates;
mod majorant;

pub use equilibrium::{equilibrium, equilibrium_with, EquilibriumOptions, EquilibriumSystem};
pub use estimates::{
    pointwise_estimate, rearrangement_bound, sampled_log_norm, sigma_norm_check, AxisBound,
    PointwiseReport, RatioValue, RearrangementBound, SigmaNormReport,
};
pub use majorant::{check_nodes, majorize, MajorantCertificate, MajorantResult, CERT_SLACK};
