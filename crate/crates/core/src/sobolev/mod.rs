//! Sobolev and Lebesgue norms, interpolation checks, sampled constants for
//! embedding and product inequalities, and the Gronwall bootstrap verifier.

mod gronwall;
mod norms;
mod probes;

pub use gronwall::{cumulative_trapezoid, gronwall_verify, GronwallTrace, GronwallVerdict};
pub use norms::{
    hs_norm, hs_norm_scalar, inhomogeneous_hs_norm, interpolation_check, lp_norm, lp_norm_vector, InterpolationCheck,
    NormKind, NormRequest,
};
pub use probes::{
    inequality_probe, kato_ponce_probe, kato_ponce_ratios, InequalityId, KatoPonceExponents, KatoPonceReport,
    ProbeOptions, ProbeReport,
};
