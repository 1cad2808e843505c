//! Run monitors: energy balance, exact cancellations, Sobolev budgets,
//! monotonicity and decay of the critical norm, twin-run comparison and
//! fitted constants of the 2½D estimates.

mod budget;
mod checks;
mod energy;
mod monitors;
mod planar;
mod record;

pub use budget::{budget_identities, budget_terms, critical_constant_sample, BudgetCheck};
pub use checks::{adjointness_check, cancellation_check, leray_check};
pub use energy::{cumulative_integral, energy_budget, EnergyBudget};
pub use monitors::{
    decay_monitor, monotonicity_monitor, twin_sample, weakstrong_monitor, DecayReport, MonotonicityReport, TwinRunDelta,
    TwinSample, WeakStrongReport, UPTICK_TOLERANCE,
};
pub use planar::{planar_constants, OmegaBound, PlanarConstants, PlanarSample};
pub use record::{csv_header, to_csv, write_csv, DiagnosticsRecord, Recorder, RecordOptions, COLUMNS};

#[cfg(test)]
mod tests;
