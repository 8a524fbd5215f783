//! Dynamics of a two-population organization — leaders and foot soldiers —
//! under recruitment, promotion, desertion, and targeted removal.
//!
//! The model is a planar affine ODE. Leaders are produced by promoting foot
//! soldiers and lost to desertion and removal; foot soldiers are recruited
//! in proportion to the organization's present strength `S = m*L + F` and
//! lost the same two ways. Because the system is affine, everything about
//! it is computable in closed form: the equilibrium, the eigenstructure,
//! the invariant lines that partition the phase plane, and the exact
//! solution through any starting point.
//!
//! The crate is organized around that closed-form core:
//!
//! - [`model`] — parameters, states, the vector field, and the system
//!   matrix.
//! - [`analysis`] — regime classification, the equilibrium, the sink and
//!   trend lines, and the decline-based defeat test.
//! - [`simulate`] — exact and RK4 time evolution, collapse detection, and
//!   phase-portrait sampling.
//! - [`policy`] — counter-measure comparisons: sink-line sensitivities,
//!   the leader/soldier exchange rate, and budget allocation.
//! - [`io`] — scenario files, trajectory CSV, SVG phase portraits, and
//!   plain-text reports.
//!
//! The most-used names are re-exported at the crate root.

pub mod analysis;
pub mod error;
pub mod io;
pub mod model;
pub mod policy;
pub mod simulate;

pub use analysis::{
    classify, critical_desertion, eigen_coords, eigen_structure, fixed_point, regime, sink_line,
    trend_line, victory_check, ClassKind, Classification, EigenCoords, EigenStructure, FixedPoint,
    Line, PhaseAnalysis, RegimeKind, VictoryReport, VictoryVerdict, DEFAULT_CLASS_TOL,
    DEGENERACY_EPS,
};
pub use error::{Error, Result};
pub use model::{
    derivative, promotion_drain_transform, strength, system_matrix, DrainMode, OrgParams,
    OrgState, ParamName, SystemMatrix, Vec2,
};
pub use policy::{
    apply_allocation, bk_equivalence, compare_strategies, preferred_target,
    sink_feasible_allocation, sink_sensitivity, tangency_allocation, Allocation, BkEquivalence,
    CostModel, FeasibilityOutcome, PreferredTarget, SensitivityReport, StrategyComparison,
    TargetReport,
};
pub use simulate::{
    closed_form_state, integrate_rk4, sample_orbits, simulate, strength_series, vector_field,
    Bounds, FieldArrow, Method, Orbit, Outcome, SimOptions, Trajectory, TrajectorySample,
    VectorFieldGrid, HORIZON_EPS,
};
