//! End-to-end checks of the embedding inequalities on built-in families.

mod checks;
mod family;
mod sweep;

pub use checks::{
    check_limit, check_metrics, check_nolimit, default_order, default_orders, CheckGrids, CheckKind,
    VerificationReport, DEFAULT_PER_DECADE, INEQUALITY_SLACK,
};
pub use family::{builtin_family, cardinal_bspline, Family, FamilySpec, DEFAULT_BUMP_POWER};
pub use sweep::{dilation_set, dilation_sweep, SweepCheck, SweepConfig, SweepResult, SweepRow};
