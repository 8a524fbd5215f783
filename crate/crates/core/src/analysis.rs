//! Phase analysis of the affine system: equilibrium, eigenstructure,
//! invariant lines, and state classification.
//!
//! For valid parameters the system matrix always has two real eigenvalues
//! (the discriminant rearranges to `(r - d_F + d_L)^2 + 4*p*r*m`, a sum of
//! squares and positive terms), so there are no spirals. The sign of the
//! stability denominator `d_L*(r - d_F) + r*m*p` decides between the two
//! possible regimes:
//!
//! * `Saddle` (denominator > 0): one growing and one decaying mode. The
//!   stable eigendirection through the equilibrium is the **sink line** —
//!   the watershed between organizations that collapse and organizations
//!   that grow without bound. The unstable direction is the **trend line**
//!   every surviving orbit eventually follows.
//! * `SinkCollapse` (denominator < 0): both modes decay, but the attracting
//!   equilibrium has a non-positive foot-soldier coordinate, so every orbit
//!   starting with real populations is dragged across an axis in finite
//!   time. The organization collapses from all initial conditions.

use crate::error::{Error, Result};
use crate::model::{derivative, strength, system_matrix, OrgParams, OrgState, Vec2};

/// Absolute threshold below which the stability denominator (or the
/// eigenvalue spread) is treated as zero and analysis refused.
pub const DEGENERACY_EPS: f64 = 1e-12;

/// Default classification tolerance, relative to the state's distance from
/// the equilibrium.
pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

/// Long-run regime of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// Saddle equilibrium: survival depends on the side of the sink line.
    Saddle,
    /// Attracting equilibrium outside the feasible quadrant: guaranteed
    /// collapse from every initial condition.
    SinkCollapse,
    /// The stability denominator vanishes; the equilibrium escapes to
    /// infinity and the decomposition is meaningless.
    Degenerate,
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeKind::Saddle => "Saddle",
            RegimeKind::SinkCollapse => "SinkCollapse",
            RegimeKind::Degenerate => "Degenerate",
        })
    }
}

/// Equilibrium of the affine system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    /// Equilibrium leader population `L*`.
    pub leaders: f64,
    /// Equilibrium foot-soldier population `F*`.
    pub foot_soldiers: f64,
    /// Stability denominator `d_L*(r - d_F) + r*m*p`; its sign decides the regime.
    pub denominator: f64,
    /// True when either coordinate is negative, i.e. the equilibrium lies
    /// outside the population quadrant. A negative `F*` is the hallmark of
    /// the collapse regime.
    pub negative_coordinates: bool,
}

impl FixedPoint {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.leaders, self.foot_soldiers)
    }
}

/// Real eigendecomposition of the system matrix.
///
/// `lambda1 > lambda2` always; both eigenvectors are unit length with a
/// strictly positive leader component. In the saddle regime `e1` spans the
/// growing mode and `e2` the decaying one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenStructure {
    pub lambda1: f64,
    pub lambda2: f64,
    pub e1: Vec2,
    pub e2: Vec2,
}

/// An invariant line of the flow, anchored at the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    /// A point on the line (the equilibrium).
    pub anchor: Vec2,
    /// Unit direction with positive leader component.
    pub direction: Vec2,
    /// Rise over run in `(L, F)` coordinates.
    pub slope: f64,
    /// Where the line meets the `F` axis: `anchor.f - slope * anchor.l`.
    pub f_intercept: f64,
}

/// Coordinates of a displacement from the equilibrium in the eigenbasis:
/// `state - fixed_point = d1*e1 + d2*e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCoords {
    pub d1: f64,
    pub d2: f64,
}

/// Which side of the invariant lines a state falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    /// Below the sink line (`d1 < 0`): the organization decays and
    /// eventually loses one population entirely.
    Defeated,
    /// Above the sink line and left of the trend line (`d1 > 0`, `d2 < 0`):
    /// foot-soldier rich, grows after an initial dip in `F`.
    PType,
    /// Above the sink line and right of the trend line (`d1 > 0`, `d2 > 0`):
    /// leader rich, grows after an initial dip in `L` and `S`.
    RType,
    /// Within tolerance of the sink line.
    OnSinkLine,
    /// Above the sink line and within tolerance of the trend line.
    OnTrendLine,
}

impl std::fmt::Display for ClassKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClassKind::Defeated => "defeated",
            ClassKind::PType => "p-type",
            ClassKind::RType => "r-type",
            ClassKind::OnSinkLine => "on-sink-line",
            ClassKind::OnTrendLine => "on-trend-line",
        })
    }
}

/// Classification of a state, with the eigencoordinates that justify it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub kind: ClassKind,
    pub coords: EigenCoords,
}

/// Outcome of the observable-decline test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VictoryVerdict {
    /// Strength and foot soldiers are both declining; the state is below
    /// the sink line and collapse is certain under unchanged measures.
    CollapseGuaranteed,
    /// The observed rates do not certify defeat.
    NotSufficient,
}

/// Result of checking whether observable declines certify defeat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VictoryReport {
    /// `dS/dt` at the state.
    pub strength_rate: f64,
    /// `dF/dt` at the state.
    pub soldier_rate: f64,
    pub classification: Classification,
    pub verdict: VictoryVerdict,
    /// True when the geometry backing `CollapseGuaranteed` is valid: the
    /// sink line must be no steeper than the iso-strength lines
    /// (`slope >= -m`), which holds exactly when `d_F <= d_L + p*m` — in
    /// particular, always, under a uniform desertion rate. Outside this
    /// envelope simultaneous declines can occur above the sink line and the
    /// verdict must not be trusted.
    pub guarantee_applies: bool,
}

impl VictoryReport {
    /// Whether the total-strength decline condition holds.
    pub fn strength_declining(&self) -> bool {
        self.strength_rate < 0.0
    }

    /// Whether the foot-soldier decline condition holds.
    pub fn soldiers_declining(&self) -> bool {
        self.soldier_rate < 0.0
    }

    /// The decline conditions that do *not* hold — the reason a verdict of
    /// `NotSufficient` was returned. Empty for `CollapseGuaranteed`.
    pub fn failing_conditions(&self) -> Vec<&'static str> {
        let mut failing = Vec::new();
        if !self.strength_declining() {
            failing.push("total strength is not declining");
        }
        if !self.soldiers_declining() {
            failing.push("foot soldiers are not declining");
        }
        failing
    }
}

/// The stability denominator `d_L*(r - d_F) + r*m*p` (the negated
/// determinant of the system matrix).
pub fn stability_denominator(params: &OrgParams) -> f64 {
    params.leader_desertion * (params.recruitment - params.soldier_desertion)
        + params.recruitment * params.leader_weight * params.promotion
}

/// Classifies the regime by the sign of the stability denominator.
pub fn regime(params: &OrgParams) -> RegimeKind {
    let den = stability_denominator(params);
    if den > DEGENERACY_EPS {
        RegimeKind::Saddle
    } else if den < -DEGENERACY_EPS {
        RegimeKind::SinkCollapse
    } else {
        RegimeKind::Degenerate
    }
}

/// Solves for the equilibrium `L* = (p*k - b*(r - d_F)) / den`,
/// `F* = (k*d_L + r*m*b) / den`. Negative coordinates are returned as-is
/// and flagged.
pub fn fixed_point(params: &OrgParams) -> Result<FixedPoint> {
    let den = stability_denominator(params);
    if den.abs() <= DEGENERACY_EPS {
        return Err(Error::Degenerate(format!(
            "stability denominator {den:.3e} is numerically zero; no equilibrium"
        )));
    }
    let (p, r) = (params.promotion, params.recruitment);
    let (b, k) = (params.leader_removal, params.soldier_removal);
    let leaders = (p * k - b * (r - params.soldier_desertion)) / den;
    let foot_soldiers = (k * params.leader_desertion + r * params.leader_weight * b) / den;
    Ok(FixedPoint {
        leaders,
        foot_soldiers,
        denominator: den,
        negative_coordinates: leaders < 0.0 || foot_soldiers < 0.0,
    })
}

/// Eigenvalues and unit eigenvectors of the system matrix, computed by the
/// quadratic formula on trace and determinant. The root that adds `trace`
/// and the square root with the same sign is evaluated directly; the other
/// is recovered from the product of roots to avoid cancellation.
pub fn eigen_structure(params: &OrgParams) -> Result<EigenStructure> {
    let a = system_matrix(params);
    let tr = a.trace();
    let det = a.det();
    // Discriminant rearranged into a provably non-negative form.
    let w = params.recruitment - params.soldier_desertion + params.leader_desertion;
    let disc = w * w + 4.0 * params.promotion * params.recruitment * params.leader_weight;
    let spread = disc.sqrt();
    if spread <= DEGENERACY_EPS {
        return Err(Error::Degenerate(format!(
            "eigenvalue spread {spread:.3e} is numerically zero; no eigenbasis"
        )));
    }
    let (lambda1, lambda2) = if tr >= 0.0 {
        let big = 0.5 * (tr + spread);
        (big, det / big)
    } else {
        let small = 0.5 * (tr - spread);
        (det / small, small)
    };
    // For eigenvalue x the matrix row (-d_L - x, p) annihilates (p, x + d_L),
    // and p > 0 keeps the leader component positive.
    let d_l = params.leader_desertion;
    let e1 = Vec2::new(params.promotion, lambda1 + d_l).unit();
    let e2 = Vec2::new(params.promotion, lambda2 + d_l).unit();
    Ok(EigenStructure {
        lambda1,
        lambda2,
        e1,
        e2,
    })
}

/// The desertion rate at which the saddle collapses: the positive root of
/// `d*(r - d) + r*m*p = 0`, i.e. `(r + sqrt(r^2 + 4*r*m*p)) / 2`. For a
/// uniform desertion rate `d` strictly below this value the regime is a
/// saddle; above it, guaranteed collapse. As `p -> 0` the threshold drops
/// to `r`.
pub fn critical_desertion(promotion: f64, recruitment: f64, leader_weight: f64) -> f64 {
    let r = recruitment;
    0.5 * (r + (r * r + 4.0 * r * leader_weight * promotion).sqrt())
}

fn line_along(anchor: Vec2, direction: Vec2) -> Line {
    let slope = direction.f / direction.l;
    Line {
        anchor,
        direction,
        slope,
        f_intercept: anchor.f - slope * anchor.l,
    }
}

/// The sink line: the stable eigendirection through the equilibrium.
/// States below it are doomed, states above it grow. Saddle regime only.
pub fn sink_line(params: &OrgParams) -> Result<Line> {
    PhaseAnalysis::new(params)?.require_sink_line()
}

/// The trend line: the unstable eigendirection through the equilibrium,
/// the asymptote of every surviving orbit. Saddle regime only.
pub fn trend_line(params: &OrgParams) -> Result<Line> {
    PhaseAnalysis::new(params)?.require_trend_line()
}

/// Expresses `state - fixed_point` in the eigenbasis. Saddle regime only.
pub fn eigen_coords(params: &OrgParams, state: &OrgState) -> Result<EigenCoords> {
    let pa = PhaseAnalysis::new(params)?;
    pa.require_saddle()?;
    Ok(pa.eigen_coords(state))
}

/// Classifies `state` against the sink and trend lines with tolerance `tol`
/// (relative to the state's distance from the equilibrium). Saddle regime only.
pub fn classify(params: &OrgParams, state: &OrgState, tol: f64) -> Result<Classification> {
    let pa = PhaseAnalysis::new(params)?;
    pa.require_saddle()?;
    Ok(pa.classify(state, tol))
}

/// Tests whether observed declines in strength and foot soldiers certify
/// defeat. Saddle regime only.
pub fn victory_check(params: &OrgParams, state: &OrgState) -> Result<VictoryReport> {
    let pa = PhaseAnalysis::new(params)?;
    pa.victory_check(state)
}

/// One-shot phase analysis of a parameter set. Construction fails only when
/// the decomposition is numerically degenerate; the collapse regime is a
/// legal analysis in which the invariant lines are absent.
#[derive(Debug, Clone)]
pub struct PhaseAnalysis {
    pub params: OrgParams,
    pub fixed_point: FixedPoint,
    pub eigen: EigenStructure,
    pub regime: RegimeKind,
    pub sink_line: Option<Line>,
    pub trend_line: Option<Line>,
    /// Determinant of the eigenbasis matrix, cached for coordinate solves.
    basis_det: f64,
}

impl PhaseAnalysis {
    pub fn new(params: &OrgParams) -> Result<Self> {
        params.validate()?;
        let fp = fixed_point(params)?;
        let eigen = eigen_structure(params)?;
        let kind = regime(params);
        let basis_det = eigen.e1.l * eigen.e2.f - eigen.e2.l * eigen.e1.f;
        if basis_det.abs() <= DEGENERACY_EPS {
            return Err(Error::Degenerate(format!(
                "eigenbasis is numerically collinear (det {basis_det:.3e})"
            )));
        }
        let (sink, trend) = if kind == RegimeKind::Saddle {
            (
                Some(line_along(fp.position(), eigen.e2)),
                Some(line_along(fp.position(), eigen.e1)),
            )
        } else {
            (None, None)
        };
        Ok(PhaseAnalysis {
            params: *params,
            fixed_point: fp,
            eigen,
            regime: kind,
            sink_line: sink,
            trend_line: trend,
            basis_det,
        })
    }

    pub(crate) fn require_saddle(&self) -> Result<()> {
        if self.regime == RegimeKind::Saddle {
            Ok(())
        } else {
            Err(Error::NotSaddle(self.regime))
        }
    }

    fn require_sink_line(&self) -> Result<Line> {
        self.sink_line.ok_or(Error::NotSaddle(self.regime))
    }

    fn require_trend_line(&self) -> Result<Line> {
        self.trend_line.ok_or(Error::NotSaddle(self.regime))
    }

    /// Coordinates of `position - fixed_point` in the eigenbasis.
    pub(crate) fn coords_of_position(&self, position: Vec2) -> EigenCoords {
        let dx = position - self.fixed_point.position();
        let (e1, e2) = (self.eigen.e1, self.eigen.e2);
        EigenCoords {
            d1: (dx.l * e2.f - e2.l * dx.f) / self.basis_det,
            d2: (e1.l * dx.f - dx.l * e1.f) / self.basis_det,
        }
    }

    /// Expresses `state - fixed_point` in the eigenbasis.
    pub fn eigen_coords(&self, state: &OrgState) -> EigenCoords {
        self.coords_of_position(state.position())
    }

    /// Classifies a state against the invariant lines. `tol` is relative to
    /// the distance between the state and the equilibrium, so a state
    /// constructed on a line is recognized as on it at any scale.
    pub fn classify(&self, state: &OrgState, tol: f64) -> Classification {
        let coords = self.eigen_coords(state);
        let dist = (state.position() - self.fixed_point.position()).norm();
        let tau = tol * dist;
        let kind = if coords.d1 < -tau {
            ClassKind::Defeated
        } else if coords.d1 <= tau {
            ClassKind::OnSinkLine
        } else if coords.d2 < -tau {
            ClassKind::PType
        } else if coords.d2 <= tau {
            ClassKind::OnTrendLine
        } else {
            ClassKind::RType
        };
        Classification { kind, coords }
    }

    /// Whether the decline-implies-defeat geometry holds for these
    /// parameters: the sink line must be no steeper than the iso-strength
    /// lines, equivalently `d_F <= d_L + p*m`.
    pub fn decline_guarantee_applies(&self) -> bool {
        self.params.soldier_desertion
            <= self.params.leader_desertion + self.params.promotion * self.params.leader_weight
    }

    /// Tests whether observed declines at `state` certify defeat.
    /// Saddle regime only.
    pub fn victory_check(&self, state: &OrgState) -> Result<VictoryReport> {
        self.require_saddle()?;
        let (dl, df) = derivative(&self.params, state);
        let ds = self.params.leader_weight * dl + df;
        let classification = self.classify(state, DEFAULT_CLASS_TOL);
        let verdict = if ds < 0.0 && df < 0.0 {
            VictoryVerdict::CollapseGuaranteed
        } else {
            VictoryVerdict::NotSufficient
        };
        Ok(VictoryReport {
            strength_rate: ds,
            soldier_rate: df,
            classification,
            verdict,
            guarantee_applies: self.decline_guarantee_applies(),
        })
    }

    /// Strength of a state under these parameters.
    pub fn strength(&self, state: &OrgState) -> f64 {
        strength(state, self.params.leader_weight)
    }
}
