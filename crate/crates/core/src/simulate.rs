//! Time evolution: exact closed-form evaluation, fixed-step RK4, and orbit
//! sampling for phase portraits.
//!
//! Because the system is affine with real distinct eigenvalues, the exact
//! solution is a two-term exponential around the equilibrium and the
//! closed-form method evaluates it directly; RK4 exists as an independent
//! route for cross-checking and for callers who want a conventional
//! integrator. Both methods walk the same time grid, record the same
//! samples, and terminate the same way, so their outputs are directly
//! comparable.
//!
//! A trajectory ends either when it crosses a population axis — the model
//! stops being meaningful there, and the crossing time is located by linear
//! interpolation inside the offending step — or at the time horizon, where
//! the final state is classified against the phase geometry.

use crate::analysis::{Classification, PhaseAnalysis, RegimeKind, DEFAULT_CLASS_TOL};
use crate::error::{invalid, Error, Result};
use crate::model::{derivative_at, OrgParams, OrgState, Vec2};

/// Relative threshold (against the equilibrium scale) for deciding that a
/// horizon state has reached, or will asymptotically reach, the equilibrium.
pub const HORIZON_EPS: f64 = 1e-9;

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Exact evaluation of the affine solution in the eigenbasis.
    #[default]
    ClosedForm,
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed",
            Method::Rk4 => "rk4",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "closed" | "closed-form" => Ok(Method::ClosedForm),
            "rk4" => Ok(Method::Rk4),
            other => Err(format!("unknown method '{other}' (expected 'closed' or 'rk4')")),
        }
    }
}

/// Time-stepping options shared by both methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub method: Method,
    /// Step size of the time grid.
    pub dt: f64,
    /// Horizon, measured from the start state's own time.
    pub t_max: f64,
    /// Record every n-th grid point (the start and the final state are
    /// always recorded).
    pub sample_every: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            method: Method::ClosedForm,
            dt: 0.01,
            t_max: 100.0,
            sample_every: 10,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", self.dt, "step size must be positive and finite"));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", self.t_max, "horizon must be non-negative and finite"));
        }
        if self.sample_every == 0 {
            return Err(invalid(
                "sample_every",
                0.0,
                "sampling stride must be at least 1",
            ));
        }
        Ok(())
    }
}

/// How a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// A population hit zero at `t_end`; the organization has effectively
    /// been destroyed.
    Collapsed { t_end: f64 },
    /// Still above the sink line at the horizon: growing without bound.
    GrowingAtHorizon,
    /// Still shrinking at the horizon but not yet across an axis; under
    /// unchanged dynamics collapse follows after the horizon.
    DecliningAtHorizon,
    /// At the equilibrium (or on the sink line and converging to it).
    FixedPointReached,
}

impl Outcome {
    /// Stable lowercase tag, used in file output.
    pub fn tag(&self) -> &'static str {
        match self {
            Outcome::Collapsed { .. } => "collapsed",
            Outcome::GrowingAtHorizon => "growing-at-horizon",
            Outcome::DecliningAtHorizon => "declining-at-horizon",
            Outcome::FixedPointReached => "fixed-point-reached",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub leaders: f64,
    pub foot_soldiers: f64,
    /// Strength `m*L + F` under the parameters the trajectory was run with.
    pub strength: f64,
}

/// A simulated orbit: recorded samples plus how it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// At least the start state; strictly increasing in time.
    pub samples: Vec<TrajectorySample>,
    pub outcome: Outcome,
    /// How the samples were produced.
    pub method: Method,
}

impl Trajectory {
    /// The last recorded point (the crossing point for collapses, the
    /// horizon state otherwise).
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory always has samples")
    }

    pub fn final_state(&self) -> OrgState {
        let s = self.final_sample();
        OrgState {
            leaders: s.leaders,
            foot_soldiers: s.foot_soldiers,
            time: s.time,
        }
    }
}

/// An orbit sampled for a phase portrait.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub start: OrgState,
    /// Side of the invariant lines the start falls on; absent outside the
    /// saddle regime.
    pub classification: Option<Classification>,
    pub trajectory: Trajectory,
}

/// A vector-field probe for portrait rendering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldArrow {
    pub position: Vec2,
    pub velocity: Vec2,
}

/// Exact state after `elapsed` time units: the affine solution
/// `x* + d1*exp(lambda1*t)*e1 + d2*exp(lambda2*t)*e2`. This is the affine
/// extension of the model — for an orbit that has left the population
/// quadrant the returned coordinates are negative rather than clipped.
pub fn closed_form_state(params: &OrgParams, start: &OrgState, elapsed: f64) -> Result<OrgState> {
    let pa = PhaseAnalysis::new(params)?;
    let pos = closed_form_position(&pa, start.position(), elapsed);
    Ok(OrgState {
        leaders: pos.l,
        foot_soldiers: pos.f,
        time: start.time + elapsed,
    })
}

fn closed_form_position(pa: &PhaseAnalysis, start: Vec2, elapsed: f64) -> Vec2 {
    let coords = pa.coords_of_position(start);
    pa.fixed_point.position()
        + pa.eigen.e1 * (coords.d1 * (pa.eigen.lambda1 * elapsed).exp())
        + pa.eigen.e2 * (coords.d2 * (pa.eigen.lambda2 * elapsed).exp())
}

fn rk4_step(params: &OrgParams, pos: Vec2, h: f64) -> Vec2 {
    let field = |q: Vec2| {
        let (dl, df) = derivative_at(params, q.l, q.f);
        Vec2::new(dl, df)
    };
    let k1 = field(pos);
    let k2 = field(pos + k1 * (h / 2.0));
    let k3 = field(pos + k2 * (h / 2.0));
    let k4 = field(pos + k3 * h);
    pos + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Runs one trajectory from `start` under `options`.
///
/// Degenerate parameter sets (vanishing stability denominator) are rejected
/// for both methods: even RK4 output could not be classified without the
/// equilibrium.
pub fn simulate(params: &OrgParams, start: &OrgState, options: &SimOptions) -> Result<Trajectory> {
    options.validate()?;
    let pa = PhaseAnalysis::new(params)?;
    let m = params.leader_weight;
    let start_pos = start.position();

    let sample_of = |t_rel: f64, pos: Vec2| TrajectorySample {
        time: start.time + t_rel,
        leaders: pos.l,
        foot_soldiers: pos.f,
        strength: m * pos.l + pos.f,
    };

    // Fixed time grid; a shorter final step lands exactly on the horizon.
    let full_steps = (options.t_max / options.dt + 1e-9).floor() as u64;
    let remainder = options.t_max - full_steps as f64 * options.dt;
    let partial = remainder > options.dt * 1e-9;
    let total_steps = full_steps + u64::from(partial);

    let mut samples = vec![sample_of(0.0, start_pos)];
    let mut pos = start_pos;
    let mut t_prev = 0.0;
    for k in 1..=total_steps {
        let (t_k, h) = if k <= full_steps {
            (k as f64 * options.dt, options.dt)
        } else {
            (options.t_max, remainder)
        };
        let next = match options.method {
            Method::Rk4 => rk4_step(params, pos, h),
            Method::ClosedForm => closed_form_position(&pa, start_pos, t_k),
        };
        if next.l < 0.0 || next.f < 0.0 {
            // Locate the axis crossing by linear interpolation inside the
            // step (for both methods: consistent, and accurate to O(dt^2)).
            let frac_l = if next.l < 0.0 { pos.l / (pos.l - next.l) } else { 1.0 };
            let frac_f = if next.f < 0.0 { pos.f / (pos.f - next.f) } else { 1.0 };
            let frac = frac_l.min(frac_f).clamp(0.0, 1.0);
            let mut cross = pos + (next - pos) * frac;
            // the coordinate that crossed sits exactly on its axis
            if frac_l <= frac {
                cross.l = 0.0;
            }
            if frac_f <= frac {
                cross.f = 0.0;
            }
            let cross = Vec2::new(cross.l.max(0.0), cross.f.max(0.0));
            let t_cross = t_prev + frac * h;
            let ending = sample_of(t_cross, cross);
            // an instant crossing from a recorded axis point replaces it
            if ending.time > samples.last().expect("non-empty").time {
                samples.push(ending);
            } else {
                *samples.last_mut().expect("non-empty") = ending;
            }
            return Ok(Trajectory {
                samples,
                outcome: Outcome::Collapsed {
                    t_end: start.time + t_cross,
                },
                method: options.method,
            });
        }
        pos = next;
        t_prev = t_k;
        if k % options.sample_every as u64 == 0 && k != total_steps {
            samples.push(sample_of(t_k, pos));
        }
    }
    if total_steps > 0 {
        samples.push(sample_of(options.t_max, pos));
    }
    Ok(Trajectory {
        samples,
        outcome: classify_horizon(&pa, pos),
        method: options.method,
    })
}

/// Classifies the state a trajectory ended in at the horizon.
fn classify_horizon(pa: &PhaseAnalysis, pos: Vec2) -> Outcome {
    let x_star = pa.fixed_point.position();
    let scale = x_star.norm().max(1.0);
    if (pos - x_star).norm() <= HORIZON_EPS * scale {
        return Outcome::FixedPointReached;
    }
    if pa.regime == RegimeKind::Saddle {
        // The threshold is measured against the equilibrium scale, not the
        // (possibly vanishing) distance, so integrator roundoff near the
        // equilibrium cannot masquerade as growth.
        let tau = HORIZON_EPS * scale;
        let d1 = pa.coords_of_position(pos).d1;
        if d1 > tau {
            Outcome::GrowingAtHorizon
        } else if d1 < -tau {
            Outcome::DecliningAtHorizon
        } else {
            Outcome::FixedPointReached
        }
    } else {
        // Attracting equilibrium outside the quadrant: the orbit is en
        // route to an axis it has not crossed yet.
        Outcome::DecliningAtHorizon
    }
}

/// Fixed-step fourth-order Runge-Kutta run recording every step, for
/// callers that want the raw integrator rather than simulation options.
pub fn integrate_rk4(
    params: &OrgParams,
    start: &OrgState,
    dt: f64,
    t_max: f64,
) -> Result<Trajectory> {
    if dt > t_max {
        return Err(invalid("dt", dt, "step size must not exceed the horizon"));
    }
    let options = SimOptions {
        method: Method::Rk4,
        dt,
        t_max,
        sample_every: 1,
    };
    simulate(params, start, &options)
}

/// Axis-aligned rectangle in the `(L, F)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub l_min: f64,
    pub l_max: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl Bounds {
    /// A validated rectangle; both sides must have positive finite extent.
    pub fn new(l_min: f64, l_max: f64, f_min: f64, f_max: f64) -> Result<Self> {
        let b = Bounds {
            l_min,
            l_max,
            f_min,
            f_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("l_min", self.l_min),
            ("l_max", self.l_max),
            ("f_min", self.f_min),
            ("f_max", self.f_max),
        ] {
            if !value.is_finite() {
                return Err(invalid(name, value, "bound must be finite"));
            }
        }
        if self.l_min >= self.l_max {
            return Err(invalid(
                "l_max",
                self.l_max,
                "leader extent must be non-degenerate",
            ));
        }
        if self.f_min >= self.f_max {
            return Err(invalid(
                "f_max",
                self.f_max,
                "foot-soldier extent must be non-degenerate",
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.l_max - self.l_min
    }

    pub fn height(&self) -> f64 {
        self.f_max - self.f_min
    }
}

/// Direction-field samples on a regular grid of cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldGrid {
    pub bounds: Bounds,
    /// Cells along the leader axis.
    pub cols: usize,
    /// Cells along the foot-soldier axis.
    pub rows: usize,
    /// Row-major from the bottom-left cell; `cols * rows` entries.
    pub arrows: Vec<FieldArrow>,
}

/// Samples the vector field at the centers of a `cols x rows` grid of
/// cells covering `bounds`, row by row from the bottom-left.
pub fn vector_field(
    params: &OrgParams,
    bounds: &Bounds,
    cols: usize,
    rows: usize,
) -> Result<VectorFieldGrid> {
    params.validate()?;
    bounds.validate()?;
    if cols < 2 || rows < 2 {
        return Err(invalid(
            "grid",
            cols.min(rows) as f64,
            "grid needs at least 2 cells per side",
        ));
    }
    let mut arrows = Vec::with_capacity(cols * rows);
    for row in 0..rows {
        let f = bounds.f_min + (row as f64 + 0.5) * bounds.height() / rows as f64;
        for col in 0..cols {
            let l = bounds.l_min + (col as f64 + 0.5) * bounds.width() / cols as f64;
            let (dl, df) = derivative_at(params, l, f);
            arrows.push(FieldArrow {
                position: Vec2::new(l, f),
                velocity: Vec2::new(dl, df),
            });
        }
    }
    Ok(VectorFieldGrid {
        bounds: *bounds,
        cols,
        rows,
        arrows,
    })
}

/// Runs one trajectory per start and tags each with the start's
/// classification (absent outside the saddle regime).
pub fn sample_orbits(
    params: &OrgParams,
    starts: &[OrgState],
    options: &SimOptions,
) -> Result<Vec<Orbit>> {
    if starts.is_empty() {
        return Err(Error::Domain(
            "orbit sampling needs at least one start state".into(),
        ));
    }
    let pa = PhaseAnalysis::new(params)?;
    let mut orbits = Vec::with_capacity(starts.len());
    for start in starts {
        let classification = (pa.regime == RegimeKind::Saddle)
            .then(|| pa.classify(start, DEFAULT_CLASS_TOL));
        orbits.push(Orbit {
            start: *start,
            classification,
            trajectory: simulate(params, start, options)?,
        });
    }
    Ok(orbits)
}

/// Strength of a recorded sample list at its recorded times — convenience
/// for plotting-style consumers.
pub fn strength_series(trajectory: &Trajectory) -> Vec<(f64, f64)> {
    trajectory
        .samples
        .iter()
        .map(|s| (s.time, s.strength))
        .collect()
}
