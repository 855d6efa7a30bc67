//! Discrete optimal transport for the cost `c = d²/2`.

mod cyclic;
mod identity;
mod measure;
mod plan;
pub mod simplex;
mod solve;

pub use cyclic::{check_cyclic_monotonicity, cycle_slack, CycleMode, CycleReport, MAX_TUPLES};
pub use identity::{verify_transport_identity, Grid, IdentityResidual};
pub use measure::DiscreteMeasure;
pub use plan::{extract_monge_map, MongeOutcome, PotentialPair, TransportMap, TransportPlan};
pub use simplex::PivotRule;
pub use solve::{
    brute_force_oracle, c_subdifferential, c_transform, c_transform_back, psi_r, solve_kantorovich,
    solve_kantorovich_with, KantorovichSolution, MAX_BRUTE_FORCE, MAX_SUPPORT,
};
