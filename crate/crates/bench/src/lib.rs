//! Shared fixtures for the benchmark suite.

use orgdyn_core::{OrgParams, OrgState, PhaseAnalysis};

/// The saddle-regime parameter set used throughout the benchmarks.
pub fn representative() -> OrgParams {
    OrgParams::uniform(0.1, 0.25, 10.0, 2.0, 5.0, 0.3).expect("fixture parameters are valid")
}

/// Eight starts ringed around the equilibrium, mixing growing and
/// collapsing fates, for orbit-heavy benchmarks.
pub fn ring(params: &OrgParams) -> Vec<OrgState> {
    let fp = PhaseAnalysis::new(params).expect("fixture is non-degenerate").fixed_point;
    (0..8)
        .map(|i| {
            let angle = std::f64::consts::PI * (0.1 + 1.8 * f64::from(i) / 8.0);
            OrgState::new(
                fp.leaders + 2.2 * angle.cos(),
                fp.foot_soldiers + 20.0 * angle.sin(),
                0.0,
            )
            .expect("ring stays inside the quadrant")
        })
        .collect()
}
