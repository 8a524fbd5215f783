//! Counter-measure analysis: which lever moves the sink line the most,
//! what one unit of leader removal is worth in soldier removals, and how to
//! split a removal budget against a concrete organization.
//!
//! Two budget-allocation notions coexist deliberately. The *tangency*
//! allocation removes the largest possible amount of strength for the
//! budget — the natural greedy choice. The *sink-feasibility* search
//! instead asks whether any allocation on the budget boundary pushes the
//! state below the sink line, i.e. actually defeats the organization.
//! The two disagree in general, and `compare_strategies` puts them side by
//! side: maximal strength removal can leave the organization in the growth
//! region while a geometry-aware split of the same budget destroys it.

use crate::analysis::{sink_line, Classification, Line, PhaseAnalysis, DEFAULT_CLASS_TOL};
use crate::error::{invalid, Error, Result};
use crate::model::{OrgParams, OrgState, ParamName, Vec2};

/// Absolute tolerance on the cost-normalized margin within which neither
/// removal target is preferred.
pub const BALANCED_MARGIN_TOL: f64 = 1e-9;

/// Relative step for the finite-difference sensitivity probes.
const SENSITIVITY_REL_STEP: f64 = 1e-6;

/// Convergence goal for the boundary search: the bracket is shrunk until
/// the candidate sink-coordinates differ by less than this.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Number of coarse probes on the budget boundary before refinement.
const BOUNDARY_SCAN_POINTS: usize = 512;

/// Cost of removing members: `cost_leaders * l^convexity +
/// cost_soldiers * f^convexity`, capped by `budget`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Price coefficient for removing leaders (must be positive; leaders
    /// are typically far more expensive to reach).
    pub cost_leaders: f64,
    /// Price coefficient for removing foot soldiers (must be positive).
    pub cost_soldiers: f64,
    /// Exponent of the cost curve; strictly above 1, so marginal removals
    /// get more expensive and the tangency optimum is unique.
    pub convexity: f64,
    /// Total budget; zero is legal and buys nothing.
    pub budget: f64,
}

impl CostModel {
    pub fn new(cost_leaders: f64, cost_soldiers: f64, convexity: f64, budget: f64) -> Result<Self> {
        let model = CostModel {
            cost_leaders,
            cost_soldiers,
            convexity,
            budget,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let positive_finite = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, v, "must be positive and finite"))
            }
        };
        positive_finite("cost_leaders", self.cost_leaders)?;
        positive_finite("cost_soldiers", self.cost_soldiers)?;
        if !(self.convexity > 1.0 && self.convexity.is_finite()) {
            return Err(invalid("convexity", self.convexity, "must exceed 1"));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(invalid("budget", self.budget, "must be non-negative and finite"));
        }
        Ok(())
    }

    /// Price of removing `leaders` and `soldiers` members.
    pub fn cost(&self, leaders: f64, soldiers: f64) -> f64 {
        self.cost_leaders * leaders.powf(self.convexity)
            + self.cost_soldiers * soldiers.powf(self.convexity)
    }
}

/// A one-shot removal of members, priced under some [`CostModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub leaders_removed: f64,
    pub soldiers_removed: f64,
    /// Price of this removal under the cost model it was built with.
    pub cost: f64,
    /// Strength removed, `m * leaders_removed + soldiers_removed`.
    pub strength_removed: f64,
}

/// Applies a removal to a state, clipping at zero: nobody can be removed
/// twice.
pub fn apply_allocation(state: &OrgState, allocation: &Allocation) -> OrgState {
    OrgState {
        leaders: (state.leaders - allocation.leaders_removed).max(0.0),
        foot_soldiers: (state.foot_soldiers - allocation.soldiers_removed).max(0.0),
        time: state.time,
    }
}

/// How the sink line responds to nudging one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport {
    pub param: ParamName,
    /// The sink line at the unperturbed parameters.
    pub baseline: Line,
    /// The sink line with the parameter shifted by `delta`.
    pub perturbed: Line,
    /// The shift the perturbed line was computed at.
    pub delta: f64,
    /// d(intercept)/d(param); positive means raising the parameter lifts
    /// the sink line and shrinks the survival region.
    pub intercept_per_unit: f64,
    /// d(slope)/d(param); positive means the line flattens.
    pub slope_per_unit: f64,
}

/// Which removal rate shifts the sink line more per budget unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreferredTarget {
    Leaders,
    FootSoldiers,
    Balanced,
}

impl std::fmt::Display for PreferredTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PreferredTarget::Leaders => "leaders",
            PreferredTarget::FootSoldiers => "foot-soldiers",
            PreferredTarget::Balanced => "balanced",
        })
    }
}

/// Cost-normalized comparison of the two removal levers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetReport {
    pub target: PreferredTarget,
    /// Intercept shift per budget unit spent on leader removal minus the
    /// same for soldier removal; positive prefers leaders.
    pub margin: f64,
    /// Intercept shift per budget unit spent on the leader-removal rate.
    pub leader_shift_per_cost: f64,
    /// Intercept shift per budget unit spent on the soldier-removal rate.
    pub soldier_shift_per_cost: f64,
}

/// Exchange rate between the two removal rates, measured on the sink-line
/// intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkEquivalence {
    /// d(intercept)/d(leader-removal rate b).
    pub per_unit_leader_removal: f64,
    /// d(intercept)/d(soldier-removal rate k).
    pub per_unit_soldier_removal: f64,
    /// Units of soldier removal equivalent to one unit of leader removal;
    /// equals the magnitude of the sink-line slope.
    pub ratio: f64,
}

/// Result of searching the budget boundary for a defeat-achieving removal.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityOutcome {
    /// Some full-budget allocation pushes the state onto or below the sink
    /// line; the best one found is returned.
    Feasible {
        allocation: Allocation,
        post_state: OrgState,
        /// Sink-coordinate of the post state (non-positive here).
        post_d1: f64,
    },
    /// No allocation on the budget boundary reaches the sink line; the
    /// closest attempt is returned.
    Infeasible {
        best: Allocation,
        post_state: OrgState,
        /// Sink-coordinate of the best post state (positive here).
        post_d1: f64,
    },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }

    pub fn allocation(&self) -> &Allocation {
        match self {
            FeasibilityOutcome::Feasible { allocation, .. } => allocation,
            FeasibilityOutcome::Infeasible { best, .. } => best,
        }
    }

    pub fn post_state(&self) -> &OrgState {
        match self {
            FeasibilityOutcome::Feasible { post_state, .. }
            | FeasibilityOutcome::Infeasible { post_state, .. } => post_state,
        }
    }

    pub fn post_d1(&self) -> f64 {
        match self {
            FeasibilityOutcome::Feasible { post_d1, .. }
            | FeasibilityOutcome::Infeasible { post_d1, .. } => *post_d1,
        }
    }
}

/// Side-by-side comparison of the strength-greedy allocation and the
/// sink-line-aware search on the same budget.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyComparison {
    /// The tangency allocation (maximal strength removal).
    pub max_strength: Allocation,
    pub max_strength_post: OrgState,
    /// Where the tangency removal leaves the organization; a positive
    /// unstable coordinate means it grows back.
    pub max_strength_post_class: Classification,
    /// What the boundary search achieves with the same budget.
    pub sink_push: FeasibilityOutcome,
    pub sink_push_post_class: Classification,
    /// True in the headline regime: maximal strength removal leaves the
    /// organization alive while the boundary search defeats it on the
    /// same budget.
    pub tangency_insufficient: bool,
}

fn central_or_forward(params: &OrgParams, name: ParamName) -> Result<(f64, f64)> {
    let x = params.get(name);
    let h = SENSITIVITY_REL_STEP * x.abs().max(1.0);
    let at = |v: f64| -> Result<Line> { sink_line(&params.with(name, v)?) };
    if x - h < 0.0 {
        // the domain boundary forbids a left probe; fall back to forward
        let base = sink_line(params)?;
        let up = at(x + h)?;
        Ok((
            (up.f_intercept - base.f_intercept) / h,
            (up.slope - base.slope) / h,
        ))
    } else {
        let up = at(x + h)?;
        let dn = at(x - h)?;
        Ok((
            (up.f_intercept - dn.f_intercept) / (2.0 * h),
            (up.slope - dn.slope) / (2.0 * h),
        ))
    }
}

/// Finite-difference response of the sink line to one parameter, with a
/// relative step of `1e-6` (central where the domain allows, forward at the
/// zero boundary), alongside the concrete line at `param + delta`.
///
/// Saddle regime only; errors if any probe — including the `delta` shift —
/// leaves it or the parameter domain.
pub fn sink_sensitivity(
    params: &OrgParams,
    param: ParamName,
    delta: f64,
) -> Result<SensitivityReport> {
    if !delta.is_finite() {
        return Err(invalid("delta", delta, "perturbation must be finite"));
    }
    let baseline = sink_line(params)?;
    let perturbed = sink_line(&params.with(param, params.get(param) + delta)?)?;
    let (intercept_per_unit, slope_per_unit) = central_or_forward(params, param)?;
    Ok(SensitivityReport {
        param,
        baseline,
        perturbed,
        delta,
        intercept_per_unit,
        slope_per_unit,
    })
}

/// Exchange rate between the removal rates, from the equilibrium shift.
///
/// A unit increase of either removal rate translates the equilibrium by a
/// column of the inverse system matrix without rotating the sink line, so
/// the intercept change is the shifted anchor's offset from the line —
/// computed here by direct linear solves, independently of any
/// finite-difference route. Saddle regime only.
pub fn bk_equivalence(params: &OrgParams) -> Result<BkEquivalence> {
    let pa = PhaseAnalysis::new(params)?;
    pa.require_saddle()?;
    let a = crate::model::system_matrix(params);
    let det = a.a11 * a.a22 - a.a12 * a.a21;
    let slope = pa
        .sink_line
        .as_ref()
        .expect("saddle regime has a sink line")
        .slope;
    // equilibrium shift per unit of forcing on each population
    let shift_b = Vec2::new(a.a22 / det, -a.a21 / det);
    let shift_k = Vec2::new(-a.a12 / det, a.a11 / det);
    let intercept_change = |shift: Vec2| shift.f - slope * shift.l;
    let per_b = intercept_change(shift_b);
    let per_k = intercept_change(shift_k);
    Ok(BkEquivalence {
        per_unit_leader_removal: per_b,
        per_unit_soldier_removal: per_k,
        ratio: per_b / per_k,
    })
}

/// Which removal rate to prefer when one budget unit buys `1/unit_cost_b`
/// units of leader removal or `1/unit_cost_k` units of soldier removal:
/// whichever shifts the sink-line intercept more per unit of money.
pub fn preferred_target(
    params: &OrgParams,
    unit_cost_b: f64,
    unit_cost_k: f64,
) -> Result<TargetReport> {
    for (name, v) in [("unit_cost_b", unit_cost_b), ("unit_cost_k", unit_cost_k)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, v, "unit cost must be positive and finite"));
        }
    }
    let eq = bk_equivalence(params)?;
    let leader_shift_per_cost = eq.per_unit_leader_removal / unit_cost_b;
    let soldier_shift_per_cost = eq.per_unit_soldier_removal / unit_cost_k;
    let margin = leader_shift_per_cost - soldier_shift_per_cost;
    let target = if margin.abs() <= BALANCED_MARGIN_TOL {
        PreferredTarget::Balanced
    } else if margin > 0.0 {
        PreferredTarget::Leaders
    } else {
        PreferredTarget::FootSoldiers
    };
    Ok(TargetReport {
        target,
        margin,
        leader_shift_per_cost,
        soldier_shift_per_cost,
    })
}

/// The allocation removing the most strength for the full budget: the
/// tangency point of the iso-strength line and the budget surface,
/// `l/f = (m * cost_soldiers / cost_leaders)^(1/(convexity-1))`,
/// where `m` is the leader weight in the strength measure.
pub fn tangency_allocation(cost: &CostModel, leader_weight: f64) -> Result<Allocation> {
    cost.validate()?;
    if !(leader_weight > 0.0 && leader_weight.is_finite()) {
        return Err(invalid(
            "leader_weight",
            leader_weight,
            "must be positive and finite",
        ));
    }
    let m = leader_weight;
    let sigma = cost.convexity;
    let q = (m * cost.cost_soldiers / cost.cost_leaders).powf(1.0 / (sigma - 1.0));
    let f = (cost.budget / (cost.cost_leaders * q.powf(sigma) + cost.cost_soldiers))
        .powf(1.0 / sigma);
    let l = q * f;
    Ok(Allocation {
        leaders_removed: l,
        soldiers_removed: f,
        cost: cost.cost(l, f),
        strength_removed: m * l + f,
    })
}

/// Searches the full-budget boundary for the allocation that drives the
/// state's sink-coordinate lowest (coarse scan, then golden-section
/// refinement). Removals beyond the present population are wasted, not
/// credited: the post state is clipped at zero. Saddle regime only.
pub fn sink_feasible_allocation(
    params: &OrgParams,
    state: &OrgState,
    cost: &CostModel,
) -> Result<FeasibilityOutcome> {
    cost.validate()?;
    if !(state.leaders >= 0.0 && state.foot_soldiers >= 0.0) {
        return Err(Error::Domain(
            "removal planning needs a state inside the population quadrant".into(),
        ));
    }
    let pa = PhaseAnalysis::new(params)?;
    pa.require_saddle()?;
    let m = params.leader_weight;
    let sigma = cost.convexity;
    let l_max = (cost.budget / cost.cost_leaders).powf(1.0 / sigma);
    let f_max = (cost.budget / cost.cost_soldiers).powf(1.0 / sigma);

    // theta = 0 spends everything on leaders, pi/2 everything on soldiers
    let removal_at = |theta: f64| -> (f64, f64) {
        let (sin, cos) = theta.sin_cos();
        (
            l_max * (cos * cos).powf(1.0 / sigma),
            f_max * (sin * sin).powf(1.0 / sigma),
        )
    };
    let post_of = |theta: f64| -> (OrgState, f64) {
        let (l, f) = removal_at(theta);
        let post = OrgState {
            leaders: (state.leaders - l).max(0.0),
            foot_soldiers: (state.foot_soldiers - f).max(0.0),
            time: state.time,
        };
        let d1 = pa.coords_of_position(post.position()).d1;
        (post, d1)
    };
    let d1_at = |theta: f64| post_of(theta).1;

    let half_pi = std::f64::consts::FRAC_PI_2;
    let step = half_pi / BOUNDARY_SCAN_POINTS as f64;
    let mut best_idx = 0;
    let mut best_d1 = f64::INFINITY;
    for i in 0..=BOUNDARY_SCAN_POINTS {
        let d1 = d1_at(i as f64 * step);
        if d1 < best_d1 {
            best_d1 = d1;
            best_idx = i;
        }
    }
    // golden-section refinement inside the bracketing cells
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut lo = best_idx.saturating_sub(1) as f64 * step;
    let mut hi = ((best_idx + 1).min(BOUNDARY_SCAN_POINTS)) as f64 * step;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (d1_at(c), d1_at(d));
    for _ in 0..300 {
        if (fc - fd).abs() < FEASIBILITY_TOL && (hi - lo) < 1e-12 {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = d1_at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = d1_at(d);
        }
    }
    let theta = if fc < fd { c } else { d };
    let (theta, _) = [(theta, d1_at(theta)), (best_idx as f64 * step, best_d1)]
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("two candidates");

    let (l, f) = removal_at(theta);
    let (post_state, post_d1) = post_of(theta);
    let allocation = Allocation {
        leaders_removed: l,
        soldiers_removed: f,
        cost: cost.cost(l, f),
        strength_removed: m * l + f,
    };
    if post_d1 <= 0.0 {
        Ok(FeasibilityOutcome::Feasible {
            allocation,
            post_state,
            post_d1,
        })
    } else {
        Ok(FeasibilityOutcome::Infeasible {
            best: allocation,
            post_state,
            post_d1,
        })
    }
}

/// Runs both allocation strategies on the same budget and reports where
/// each leaves the organization. Saddle regime only; strictly convex cost.
pub fn compare_strategies(
    params: &OrgParams,
    state: &OrgState,
    cost: &CostModel,
) -> Result<StrategyComparison> {
    let pa = PhaseAnalysis::new(params)?;
    pa.require_saddle()?;
    let max_strength = tangency_allocation(cost, params.leader_weight)?;
    let max_strength_post = apply_allocation(state, &max_strength);
    let max_strength_post_class = pa.classify(&max_strength_post, DEFAULT_CLASS_TOL);
    let sink_push = sink_feasible_allocation(params, state, cost)?;
    let sink_push_post_class = pa.classify(sink_push.post_state(), DEFAULT_CLASS_TOL);
    let tangency_insufficient =
        max_strength_post_class.coords.d1 > 0.0 && sink_push.is_feasible();
    Ok(StrategyComparison {
        max_strength,
        max_strength_post,
        max_strength_post_class,
        sink_push,
        sink_push_post_class,
        tangency_insufficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{eigen_structure, fixed_point, stability_denominator};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn representative() -> OrgParams {
        OrgParams::uniform(0.1, 0.25, 10.0, 2.0, 5.0, 0.3).unwrap()
    }

    fn unit_cost(budget: f64) -> CostModel {
        CostModel::new(1.0, 1.0, 2.0, budget).unwrap()
    }

    #[test]
    fn cost_model_validation() {
        assert!(CostModel::new(0.0, 1.0, 2.0, 10.0).is_err());
        assert!(CostModel::new(1.0, -1.0, 2.0, 10.0).is_err());
        assert!(CostModel::new(1.0, 1.0, 0.9, 10.0).is_err());
        // marginal costs must grow: a linear cost curve is rejected
        assert!(CostModel::new(1.0, 1.0, 1.0, 10.0).is_err());
        assert!(CostModel::new(1.0, 1.0, 2.0, -1.0).is_err());
        // a zero budget is legal (it buys nothing)
        assert!(CostModel::new(1.0, 1.0, 2.0, 0.0).is_ok());
    }

    #[test]
    fn cost_evaluates_the_power_law() {
        let model = CostModel::new(2.0, 3.0, 2.0, 100.0).unwrap();
        assert_eq!(model.cost(2.0, 1.0), 11.0);
        assert_eq!(model.cost(0.0, 0.0), 0.0);
    }

    #[test]
    fn tangency_allocation_frozen_example() {
        // leader weight 2, unit quadratic costs, budget 100
        let alloc = tangency_allocation(&unit_cost(100.0), 2.0).unwrap();
        assert_relative_eq!(alloc.leaders_removed, 8.94427190999916, max_relative = 1e-12);
        assert_relative_eq!(alloc.soldiers_removed, 4.47213595499958, max_relative = 1e-12);
        assert_relative_eq!(alloc.strength_removed, 22.360679774997898, max_relative = 1e-12);
        assert_relative_eq!(alloc.cost, 100.0, max_relative = 1e-12);
    }

    #[test]
    fn tangency_exhausts_the_budget_and_balances_marginal_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..200 {
            let m = rng.gen_range(0.5..25.0);
            let cost = CostModel::new(
                rng.gen_range(0.2..5.0),
                rng.gen_range(0.2..5.0),
                rng.gen_range(1.2..4.0),
                rng.gen_range(1.0..500.0),
            )
            .unwrap();
            let alloc = tangency_allocation(&cost, m).unwrap();
            assert_relative_eq!(alloc.cost, cost.budget, max_relative = 1e-9);
            // Lagrange condition: strength per marginal unit of money is
            // equal across the two targets.
            let s = cost.convexity;
            let marg_l = m / (s * cost.cost_leaders * alloc.leaders_removed.powf(s - 1.0));
            let marg_f = 1.0 / (s * cost.cost_soldiers * alloc.soldiers_removed.powf(s - 1.0));
            assert_relative_eq!(marg_l, marg_f, max_relative = 1e-9);
        }
    }

    #[test]
    fn tangency_beats_other_boundary_points() {
        let m = 10.0;
        let cost = CostModel::new(0.8, 1.7, 2.5, 64.0).unwrap();
        let best = tangency_allocation(&cost, m).unwrap();
        let sigma = cost.convexity;
        for i in 1..100 {
            let f = (cost.budget / cost.cost_soldiers).powf(1.0 / sigma) * i as f64 / 100.0;
            let rest = cost.budget - cost.cost_soldiers * f.powf(sigma);
            let l = (rest / cost.cost_leaders).powf(1.0 / sigma);
            let value = m * l + f;
            assert!(value <= best.strength_removed + 1e-9);
        }
    }

    #[test]
    fn tangency_with_zero_budget_removes_nobody() {
        let alloc = tangency_allocation(&unit_cost(0.0), 10.0).unwrap();
        assert_eq!(alloc.leaders_removed, 0.0);
        assert_eq!(alloc.soldiers_removed, 0.0);
        assert_eq!(alloc.strength_removed, 0.0);
    }

    #[test]
    fn tangency_pours_into_leaders_as_their_weight_dominates() {
        // m -> infinity: the split concentrates on leaders
        let alloc = tangency_allocation(&unit_cost(100.0), 1e8).unwrap();
        assert!(alloc.soldiers_removed / alloc.leaders_removed < 1e-7);
        // leader removals priced out of reach: the split concentrates on
        // foot soldiers instead
        let pricey = CostModel::new(1e12, 1.0, 2.0, 100.0).unwrap();
        let alloc = tangency_allocation(&pricey, 10.0).unwrap();
        assert!(alloc.leaders_removed / alloc.soldiers_removed < 1e-7);
        assert_relative_eq!(alloc.soldiers_removed, 10.0, max_relative = 1e-6);
    }

    #[test]
    fn apply_allocation_clips_at_zero() {
        let state = OrgState::new(3.0, 10.0, 1.5).unwrap();
        let alloc = Allocation {
            leaders_removed: 5.0,
            soldiers_removed: 4.0,
            cost: 0.0,
            strength_removed: 0.0,
        };
        let post = apply_allocation(&state, &alloc);
        assert_eq!(post.leaders, 0.0);
        assert_eq!(post.foot_soldiers, 6.0);
        assert_eq!(post.time, 1.5);
    }

    #[test]
    fn bk_equivalence_ratio_is_the_sink_slope_magnitude() {
        let params = representative();
        let eq = bk_equivalence(&params).unwrap();
        let slope = sink_line(&params).unwrap().slope;
        assert_relative_eq!(eq.ratio, -slope, max_relative = 1e-12);
        assert_relative_eq!(eq.ratio, 3.903882032022075, max_relative = 1e-12);
        assert!(eq.per_unit_leader_removal > 0.0);
        assert!(eq.per_unit_soldier_removal > 0.0);
    }

    #[test]
    fn bk_equivalence_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let p = rng.gen_range(0.02..0.6);
            let r = rng.gen_range(0.05..0.6);
            let m = rng.gen_range(1.5..15.0);
            let d = rng.gen_range(0.0..0.8) * crate::analysis::critical_desertion(p, r, m);
            let params = OrgParams::uniform(p, r, m, 2.0, 5.0, d).unwrap();
            let eq = bk_equivalence(&params).unwrap();
            let h = 1e-6;
            let c = |pp: &OrgParams| sink_line(pp).unwrap().f_intercept;
            let db = (c(&params.with(ParamName::LeaderRemoval, 2.0 + h).unwrap())
                - c(&params.with(ParamName::LeaderRemoval, 2.0 - h).unwrap()))
                / (2.0 * h);
            let dk = (c(&params.with(ParamName::SoldierRemoval, 5.0 + h).unwrap())
                - c(&params.with(ParamName::SoldierRemoval, 5.0 - h).unwrap()))
                / (2.0 * h);
            assert_relative_eq!(eq.per_unit_leader_removal, db, max_relative = 1e-5);
            assert_relative_eq!(eq.per_unit_soldier_removal, dk, max_relative = 1e-5);
        }
    }

    #[test]
    fn bk_ratio_ignores_the_removal_rates_themselves() {
        // the exchange rate is a property of the flow matrix alone, so
        // changing b or k must not move it at all
        let base = representative();
        let eq0 = bk_equivalence(&base).unwrap();
        let moved = base
            .with(ParamName::LeaderRemoval, 17.0)
            .unwrap()
            .with(ParamName::SoldierRemoval, 0.0)
            .unwrap();
        let eq1 = bk_equivalence(&moved).unwrap();
        assert_eq!(eq0.ratio, eq1.ratio);
        assert_eq!(eq0.per_unit_leader_removal, eq1.per_unit_leader_removal);
        assert_eq!(eq0.per_unit_soldier_removal, eq1.per_unit_soldier_removal);
    }

    #[test]
    fn preferred_target_follows_equal_cost_effectiveness() {
        // top-heavy influence: weak promotion, strong recruitment cascade
        let steep = OrgParams::uniform(0.01, 0.5, 20.0, 1.0, 1.0, 0.45).unwrap();
        let report = preferred_target(&steep, 1.0, 1.0).unwrap();
        assert_eq!(report.target, PreferredTarget::Leaders);
        assert!(report.margin > 0.0);
        // soldier-driven organization: removing soldiers pays more
        let flat = OrgParams::uniform(0.5, 0.1, 2.0, 1.0, 1.0, 0.05).unwrap();
        let report = preferred_target(&flat, 1.0, 1.0).unwrap();
        assert_eq!(report.target, PreferredTarget::FootSoldiers);
        assert!(report.margin < 0.0);
    }

    #[test]
    fn expensive_leaders_flip_the_preferred_target() {
        let steep = OrgParams::uniform(0.01, 0.5, 20.0, 1.0, 1.0, 0.45).unwrap();
        let eq = bk_equivalence(&steep).unwrap();
        assert!(eq.ratio > 1.0);
        // price leader removal well past its effectiveness edge
        let report = preferred_target(&steep, 2.0 * eq.ratio, 1.0).unwrap();
        assert_eq!(report.target, PreferredTarget::FootSoldiers);
    }

    #[test]
    fn preferred_target_balanced_construction() {
        // the exchange ratio is exactly 1 when m = (r + p)/r
        let params = OrgParams::uniform(0.1, 0.25, 1.4, 1.0, 1.0, 0.3).unwrap();
        let eq = bk_equivalence(&params).unwrap();
        assert_abs_diff_eq!(eq.ratio, 1.0, epsilon = 1e-12);
        let report = preferred_target(&params, 1.0, 1.0).unwrap();
        assert_eq!(report.target, PreferredTarget::Balanced);
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn tuning_unit_costs_to_the_exchange_rate_balances_the_margin() {
        // pricing leader removal at exactly its effectiveness multiple
        // makes both levers equally attractive per budget unit
        let params = representative();
        let eq = bk_equivalence(&params).unwrap();
        let report = preferred_target(&params, eq.ratio, 1.0).unwrap();
        assert!(report.margin.abs() < 1e-9, "margin = {}", report.margin);
        assert_eq!(report.target, PreferredTarget::Balanced);
    }

    #[test]
    fn exchange_rate_balances_exactly_where_predicted() {
        // independent route to the balance point: bisect the leader weight
        // until the ratio crosses 1, and compare with m = (r + p)/r
        let (p, r) = (0.1, 0.25);
        let ratio_at = |m: f64| {
            let params = OrgParams::uniform(p, r, m, 1.0, 1.0, 0.3).unwrap();
            bk_equivalence(&params).unwrap().ratio - 1.0
        };
        // stay inside the saddle regime, which for these rates needs m > 0.6
        let (mut lo, mut hi) = (0.7, 30.0);
        assert!(ratio_at(lo) < 0.0 && ratio_at(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio_at(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(0.5 * (lo + hi), (r + p) / r, max_relative = 1e-12);
    }

    #[test]
    fn sensitivity_signs_for_representative_params() {
        let params = representative();
        let sign = |p: ParamName| {
            sink_sensitivity(&params, p, 1e-3)
                .unwrap()
                .intercept_per_unit
                .signum()
        };
        // raising removal or desertion lifts the sink line (good);
        // raising promotion or recruitment lowers it (bad)
        assert_eq!(sign(ParamName::LeaderRemoval), 1.0);
        assert_eq!(sign(ParamName::SoldierRemoval), 1.0);
        assert_eq!(sign(ParamName::LeaderDesertion), 1.0);
        assert_eq!(sign(ParamName::SoldierDesertion), 1.0);
        assert_eq!(sign(ParamName::Promotion), -1.0);
        assert_eq!(sign(ParamName::Recruitment), -1.0);
    }

    #[test]
    fn sensitivity_reports_both_lines_and_the_shift() {
        let params = representative();
        let report = sink_sensitivity(&params, ParamName::SoldierRemoval, 0.5).unwrap();
        assert_eq!(report.param, ParamName::SoldierRemoval);
        assert_eq!(report.delta, 0.5);
        assert_relative_eq!(
            report.baseline.f_intercept,
            37.626932847715935,
            max_relative = 1e-12
        );
        // the perturbed line is the sink line of the shifted parameters
        let shifted = params.with(ParamName::SoldierRemoval, 5.5).unwrap();
        assert_eq!(report.perturbed, sink_line(&shifted).unwrap());
        assert!(report.perturbed.f_intercept > report.baseline.f_intercept);
    }

    #[test]
    fn sensitivity_matches_the_exchange_closed_forms() {
        let params = representative();
        let den = stability_denominator(&params);
        let eig = eigen_structure(&params).unwrap();
        let s2 = eig.e2.f / eig.e2.l;
        let db = sink_sensitivity(&params, ParamName::LeaderRemoval, 0.1)
            .unwrap()
            .intercept_per_unit;
        let dk = sink_sensitivity(&params, ParamName::SoldierRemoval, 0.1)
            .unwrap()
            .intercept_per_unit;
        assert_relative_eq!(db, eig.lambda2 * s2 / den, max_relative = 1e-5);
        assert_relative_eq!(dk, -eig.lambda2 / den, max_relative = 1e-5);
    }

    #[test]
    fn removal_rates_never_rotate_the_sink_line() {
        let params = representative();
        for p in [ParamName::LeaderRemoval, ParamName::SoldierRemoval] {
            let report = sink_sensitivity(&params, p, 1.0).unwrap();
            // bit-exact zero: the probe lines are built from an identical
            // eigenvector computation
            assert_eq!(report.slope_per_unit, 0.0);
            assert_eq!(report.perturbed.slope, report.baseline.slope);
        }
    }

    #[test]
    fn desertion_rates_rotate_the_sink_line_in_opposite_directions() {
        let params = representative();
        // leader desertion flattens the line, soldier desertion steepens it
        let dl = sink_sensitivity(&params, ParamName::LeaderDesertion, 1e-3).unwrap();
        let df = sink_sensitivity(&params, ParamName::SoldierDesertion, 1e-3).unwrap();
        assert!(dl.slope_per_unit > 0.0);
        assert!(df.slope_per_unit < 0.0);
    }

    #[test]
    fn sensitivity_handles_the_zero_boundary_with_forward_differences() {
        // b = 0 forbids a central probe on the removal rate
        let params = OrgParams::uniform(0.1, 0.25, 10.0, 0.0, 5.0, 0.3).unwrap();
        let report = sink_sensitivity(&params, ParamName::LeaderRemoval, 0.1).unwrap();
        let den = stability_denominator(&params);
        let eig = eigen_structure(&params).unwrap();
        let s2 = eig.e2.f / eig.e2.l;
        // forward differencing is first-order; the tolerance is looser
        assert_relative_eq!(
            report.intercept_per_unit,
            eig.lambda2 * s2 / den,
            max_relative = 1e-4
        );
    }

    #[test]
    fn sensitivity_rejects_probes_that_leave_the_saddle() {
        // pushing soldier desertion past its critical value flips the
        // regime, so the perturbed line does not exist
        let params = representative();
        let err = sink_sensitivity(&params, ParamName::SoldierDesertion, 1.0);
        assert!(matches!(err, Err(Error::NotSaddle(_))), "{err:?}");
        // a negative shift below the domain is rejected too
        let err = sink_sensitivity(&params, ParamName::LeaderRemoval, -5.0);
        assert!(err.is_err());
    }

    fn fortified() -> (OrgParams, OrgState, CostModel) {
        // strong organization: tangency removal fails to defeat it, a
        // geometry-aware split of the same budget succeeds
        let params = OrgParams::uniform(1.0, 0.04, 12.0, 0.2, 1.5, 0.3).unwrap();
        let state = OrgState::new(12.0, 7.0, 0.0).unwrap();
        (params, state, unit_cost(100.0))
    }

    #[test]
    fn strength_greedy_removal_can_leave_the_organization_alive() {
        let (params, state, cost) = fortified();
        let cmp = compare_strategies(&params, &state, &cost).unwrap();
        // the greedy split pours almost everything into leaders...
        assert_relative_eq!(
            cmp.max_strength.leaders_removed,
            9.965457582448796,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cmp.max_strength.soldiers_removed,
            0.8304547985373997,
            max_relative = 1e-12
        );
        // ...yet leaves the state above the sink line,
        assert!(cmp.max_strength_post_class.coords.d1 > 0.0);
        // while the boundary search defeats it on the same budget
        assert!(cmp.sink_push.is_feasible());
        assert!(cmp.sink_push.post_d1() <= 0.0);
        assert_eq!(
            cmp.sink_push_post_class.kind,
            crate::analysis::ClassKind::Defeated
        );
        assert!(cmp.tangency_insufficient);
        let best = cmp.sink_push.allocation();
        assert_abs_diff_eq!(best.leaders_removed, 7.14, epsilon = 0.05);
        assert_abs_diff_eq!(best.soldiers_removed, 7.00, epsilon = 0.05);
        assert_abs_diff_eq!(cmp.sink_push.post_d1(), -0.608, epsilon = 0.01);
    }

    #[test]
    fn comparison_does_not_cry_wolf_when_both_strategies_win() {
        // weak organization, generous budget: both removals defeat it and
        // the headline flag stays down
        let params = representative();
        let state = OrgState::new(4.0, 30.0, 0.0).unwrap();
        let cost = unit_cost(2000.0);
        let cmp = compare_strategies(&params, &state, &cost).unwrap();
        assert!(cmp.max_strength_post_class.coords.d1 <= 0.0);
        assert!(cmp.sink_push.is_feasible());
        assert!(!cmp.tangency_insufficient);
    }

    #[test]
    fn enormous_budget_razes_the_state_to_the_origin() {
        let (params, state, _) = fortified();
        let outcome = sink_feasible_allocation(&params, &state, &unit_cost(1e8)).unwrap();
        assert!(outcome.is_feasible());
        let post = outcome.post_state();
        assert_eq!((post.leaders, post.foot_soldiers), (0.0, 0.0));
        assert_eq!(
            PhaseAnalysis::new(&params)
                .unwrap()
                .classify(post, crate::analysis::DEFAULT_CLASS_TOL)
                .kind,
            crate::analysis::ClassKind::Defeated
        );
    }

    #[test]
    fn boundary_search_rejects_states_outside_the_quadrant() {
        let (params, _, cost) = fortified();
        let bad = OrgState {
            leaders: -1.0,
            foot_soldiers: 5.0,
            time: 0.0,
        };
        assert!(matches!(
            sink_feasible_allocation(&params, &bad, &cost),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn whenever_tangency_defeats_the_boundary_search_agrees() {
        // dominance: the boundary search can only improve on the tangency
        // point, which itself lies on the searched boundary
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut observed = 0;
        for _ in 0..200 {
            let m = rng.gen_range(2.0..15.0);
            let params = OrgParams::uniform(0.1, 0.25, m, 2.0, 5.0, 0.3).unwrap();
            let state = OrgState::new(rng.gen_range(1.0..10.0), rng.gen_range(1.0..40.0), 0.0)
                .unwrap();
            let cost = CostModel::new(
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.5..3.0),
                2.0,
                rng.gen_range(5.0..300.0),
            )
            .unwrap();
            let pa = PhaseAnalysis::new(&params).unwrap();
            let tangency = tangency_allocation(&cost, m).unwrap();
            let post = apply_allocation(&state, &tangency);
            let tangency_d1 = pa.coords_of_position(post.position()).d1;
            if tangency_d1 < -1e-6 {
                observed += 1;
                let outcome = sink_feasible_allocation(&params, &state, &cost).unwrap();
                assert!(outcome.is_feasible());
                assert!(outcome.post_d1() <= tangency_d1 + 1e-6);
            }
        }
        assert!(observed > 20, "wanted defeat-capable draws, got {observed}");
    }

    #[test]
    fn feasibility_search_spends_the_whole_budget() {
        let (params, state, cost) = fortified();
        let outcome = sink_feasible_allocation(&params, &state, &cost).unwrap();
        assert_relative_eq!(outcome.allocation().cost, cost.budget, max_relative = 1e-9);
    }

    #[test]
    fn tiny_budget_is_infeasible_against_a_strong_state() {
        let (params, state, _) = fortified();
        let outcome = sink_feasible_allocation(&params, &state, &unit_cost(1.0)).unwrap();
        assert!(!outcome.is_feasible());
        assert!(outcome.post_d1() > 0.0);
        // still reports its best attempt on the boundary
        assert_relative_eq!(outcome.allocation().cost, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn zero_budget_feasibility_reduces_to_the_plain_classification() {
        let params = representative();
        let cost = unit_cost(0.0);
        // a defeated state needs no spending at all
        let doomed = OrgState::new(1.0, 5.0, 0.0).unwrap();
        let outcome = sink_feasible_allocation(&params, &doomed, &cost).unwrap();
        assert!(outcome.is_feasible());
        assert_eq!(outcome.allocation().strength_removed, 0.0);
        // a growing state cannot be touched without money
        let alive = OrgState::new(9.0, 9.0, 0.0).unwrap();
        let outcome = sink_feasible_allocation(&params, &alive, &cost).unwrap();
        assert!(!outcome.is_feasible());
    }

    #[test]
    fn feasible_post_state_is_defeated_and_clipped() {
        let (params, state, cost) = fortified();
        let outcome = sink_feasible_allocation(&params, &state, &cost).unwrap();
        let post = outcome.post_state();
        assert!(post.leaders >= 0.0 && post.foot_soldiers >= 0.0);
        assert!(post.leaders <= state.leaders && post.foot_soldiers <= state.foot_soldiers);
        // the post state flows to collapse
        let traj = crate::simulate::simulate(
            &params,
            post,
            &crate::simulate::SimOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            traj.outcome,
            crate::simulate::Outcome::Collapsed { .. }
        ));
    }

    #[test]
    fn collapse_regime_rejects_the_boundary_search() {
        let params = OrgParams::uniform(3.0, 1.0, 1.0, 0.0, 1.0, 3.0).unwrap();
        let state = OrgState::new(5.0, 5.0, 0.0).unwrap();
        let err = sink_feasible_allocation(&params, &state, &unit_cost(10.0));
        assert!(matches!(err, Err(Error::NotSaddle(_))));
    }

    #[test]
    fn fixed_point_shift_matches_the_solver_route() {
        // independent check of the equilibrium-shift solve inside
        // bk_equivalence: nudging the removal rates moves the equilibrium
        // by the predicted columns
        let params = representative();
        let a = crate::model::system_matrix(&params);
        let det = a.a11 * a.a22 - a.a12 * a.a21;
        let base = fixed_point(&params).unwrap();
        let h = 1e-7;
        let up = fixed_point(&params.with(ParamName::LeaderRemoval, 2.0 + h).unwrap()).unwrap();
        assert_relative_eq!((up.leaders - base.leaders) / h, a.a22 / det, max_relative = 1e-6);
        assert_relative_eq!(
            (up.foot_soldiers - base.foot_soldiers) / h,
            -a.a21 / det,
            max_relative = 1e-6
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            // The boundary parameterization always prices out at the budget.
            #[test]
            fn boundary_points_cost_the_budget(
                theta in 0.0..std::f64::consts::FRAC_PI_2,
                sigma in 1.05..4.0f64,
                budget in 0.5..200.0f64,
            ) {
                let cost = CostModel::new(1.3, 0.7, sigma, budget).unwrap();
                let l = (budget / cost.cost_leaders).powf(1.0 / sigma)
                    * (theta.cos() * theta.cos()).powf(1.0 / sigma);
                let f = (budget / cost.cost_soldiers).powf(1.0 / sigma)
                    * (theta.sin() * theta.sin()).powf(1.0 / sigma);
                prop_assert!((cost.cost(l, f) - budget).abs() <= 1e-9 * budget);
            }

            // Tangency allocations are optimal among sampled alternatives.
            #[test]
            fn tangency_dominates_random_feasible_allocations(
                m in 0.5..20.0f64,
                sigma in 1.25..3.5f64,
                budget in 1.0..300.0f64,
                frac in 0.0..1.0f64,
            ) {
                let cost = CostModel::new(1.0, 2.0, sigma, budget).unwrap();
                let best = tangency_allocation(&cost, m).unwrap();
                let f = (budget / cost.cost_soldiers).powf(1.0 / sigma) * frac;
                let rest = budget - cost.cost_soldiers * f.powf(sigma);
                let l = (rest.max(0.0) / cost.cost_leaders).powf(1.0 / sigma);
                prop_assert!(m * l + f <= best.strength_removed * (1.0 + 1e-9) + 1e-9);
            }
        }
    }
}
