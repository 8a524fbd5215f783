//! Core model types: parameters, states, and the linear system they induce.
//!
//! The organization is tracked as two populations, leaders `L` and foot
//! soldiers `F`. Leaders are produced by promoting foot soldiers, recruitment
//! is driven by total organizational strength `S = m*L + F` (leaders count
//! `m`-fold), and both populations are drained by desertion and by external
//! removal at fixed rates. The resulting dynamics are affine:
//!
//! ```text
//! dL/dt = p*F - d_L*L - b
//! dF/dt = r*(m*L + F) - d_F*F - k
//! ```
//!
//! Everything downstream (phase analysis, simulation, policy) consumes the
//! [`OrgParams`] / [`OrgState`] pair defined here.

use crate::error::{Error, Result};

/// Rate and weight parameters of the two-population model.
///
/// All rates are per unit time; removals are persons per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrgParams {
    /// Promotion rate `p`: fraction of foot soldiers promoted to leaders.
    pub promotion: f64,
    /// Recruitment rate `r`: foot soldiers gained per unit of strength.
    pub recruitment: f64,
    /// Leader weight `m`: contribution of one leader to strength, relative
    /// to one foot soldier. Normally exceeds 1.
    pub leader_weight: f64,
    /// Counter-measure removal of leaders `b`.
    pub leader_removal: f64,
    /// Counter-measure removal of foot soldiers `k`.
    pub soldier_removal: f64,
    /// Desertion rate of leaders `d_L`.
    pub leader_desertion: f64,
    /// Desertion rate of foot soldiers `d_F`.
    pub soldier_desertion: f64,
}

/// Population snapshot at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrgState {
    /// Leader population `L`.
    pub leaders: f64,
    /// Foot-soldier population `F`.
    pub foot_soldiers: f64,
    /// Time the snapshot refers to.
    pub time: f64,
}

/// A direction or displacement in the `(L, F)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    /// Component along the leader axis.
    pub l: f64,
    /// Component along the foot-soldier axis.
    pub f: f64,
}

/// The affine system `d(L,F)/dt = A*(L,F) + f` written out entrywise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    /// Constant forcing on the leader equation (`-b`).
    pub f1: f64,
    /// Constant forcing on the foot-soldier equation (`-k`).
    pub f2: f64,
}

/// Names of the tunable model parameters, as used in scenario files,
/// sweeps, and sensitivity reports. `UniformDesertion` addresses both
/// desertion rates at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamName {
    Promotion,
    Recruitment,
    LeaderWeight,
    LeaderRemoval,
    SoldierRemoval,
    LeaderDesertion,
    SoldierDesertion,
    UniformDesertion,
}

/// How to fold the promotion drain (the `-p*F` term leaders gain at the
/// expense of foot soldiers) back into the foot-soldier equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrainMode {
    /// Lower recruitment to `r - p` and raise the leader weight to
    /// `r*m / (r - p)` so that the product `r*m` is preserved.
    AdjustRecruitment,
    /// Keep recruitment and leader weight, raise foot-soldier desertion
    /// to `d_F + p`.
    AdjustDesertion,
}

impl OrgParams {
    /// Builds a validated parameter set. `promotion` and `recruitment` must
    /// be strictly positive; `leader_weight` must be strictly positive
    /// (values at or below 1 are legal but flagged by [`OrgParams::warnings`]);
    /// removals and desertion rates must be non-negative. All values must be
    /// finite.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        promotion: f64,
        recruitment: f64,
        leader_weight: f64,
        leader_removal: f64,
        soldier_removal: f64,
        leader_desertion: f64,
        soldier_desertion: f64,
    ) -> Result<Self> {
        let params = OrgParams {
            promotion,
            recruitment,
            leader_weight,
            leader_removal,
            soldier_removal,
            leader_desertion,
            soldier_desertion,
        };
        params.validate()?;
        Ok(params)
    }

    /// Convenience constructor for the common case of a single desertion
    /// rate `d` shared by both populations.
    pub fn uniform(
        promotion: f64,
        recruitment: f64,
        leader_weight: f64,
        leader_removal: f64,
        soldier_removal: f64,
        desertion: f64,
    ) -> Result<Self> {
        OrgParams::new(
            promotion,
            recruitment,
            leader_weight,
            leader_removal,
            soldier_removal,
            desertion,
            desertion,
        )
    }

    /// Re-checks every parameter invariant.
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, f64, bool, &'static str); 7] = [
            (
                "p",
                self.promotion,
                self.promotion.is_finite() && self.promotion > 0.0,
                "promotion rate must be finite and > 0",
            ),
            (
                "r",
                self.recruitment,
                self.recruitment.is_finite() && self.recruitment > 0.0,
                "recruitment rate must be finite and > 0",
            ),
            (
                "m",
                self.leader_weight,
                self.leader_weight.is_finite() && self.leader_weight > 0.0,
                "leader weight must be finite and > 0",
            ),
            (
                "b",
                self.leader_removal,
                self.leader_removal.is_finite() && self.leader_removal >= 0.0,
                "leader removal must be finite and >= 0",
            ),
            (
                "k",
                self.soldier_removal,
                self.soldier_removal.is_finite() && self.soldier_removal >= 0.0,
                "foot-soldier removal must be finite and >= 0",
            ),
            (
                "d_L",
                self.leader_desertion,
                self.leader_desertion.is_finite() && self.leader_desertion >= 0.0,
                "leader desertion must be finite and >= 0",
            ),
            (
                "d_F",
                self.soldier_desertion,
                self.soldier_desertion.is_finite() && self.soldier_desertion >= 0.0,
                "foot-soldier desertion must be finite and >= 0",
            ),
        ];
        for (name, value, ok, reason) in checks {
            if !ok {
                return Err(Error::invalid(name, value, reason));
            }
        }
        Ok(())
    }

    /// Non-fatal oddities worth surfacing to a user. Currently: a leader
    /// weight at or below 1, which makes leaders no more valuable than the
    /// rank and file and undercuts the usual interpretation of `m`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.leader_weight <= 1.0 {
            out.push(format!(
                "leader weight m = {} does not exceed 1; leaders are modeled as no more \
                 valuable than foot soldiers",
                self.leader_weight
            ));
        }
        out
    }

    /// Reads the parameter named by `name` (`UniformDesertion` reads `d_L`).
    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::Promotion => self.promotion,
            ParamName::Recruitment => self.recruitment,
            ParamName::LeaderWeight => self.leader_weight,
            ParamName::LeaderRemoval => self.leader_removal,
            ParamName::SoldierRemoval => self.soldier_removal,
            ParamName::LeaderDesertion | ParamName::UniformDesertion => self.leader_desertion,
            ParamName::SoldierDesertion => self.soldier_desertion,
        }
    }

    /// Returns a copy with the named parameter set to `value`, re-validated.
    /// `UniformDesertion` sets both desertion rates.
    pub fn with(&self, name: ParamName, value: f64) -> Result<Self> {
        let mut params = *self;
        match name {
            ParamName::Promotion => params.promotion = value,
            ParamName::Recruitment => params.recruitment = value,
            ParamName::LeaderWeight => params.leader_weight = value,
            ParamName::LeaderRemoval => params.leader_removal = value,
            ParamName::SoldierRemoval => params.soldier_removal = value,
            ParamName::LeaderDesertion => params.leader_desertion = value,
            ParamName::SoldierDesertion => params.soldier_desertion = value,
            ParamName::UniformDesertion => {
                params.leader_desertion = value;
                params.soldier_desertion = value;
            }
        }
        params.validate()?;
        Ok(params)
    }
}

impl OrgState {
    /// Builds a validated state: populations must be finite and non-negative,
    /// time finite.
    pub fn new(leaders: f64, foot_soldiers: f64, time: f64) -> Result<Self> {
        if !leaders.is_finite() || leaders < 0.0 {
            return Err(Error::invalid("L", leaders, "leader count must be finite and >= 0"));
        }
        if !foot_soldiers.is_finite() || foot_soldiers < 0.0 {
            return Err(Error::invalid(
                "F",
                foot_soldiers,
                "foot-soldier count must be finite and >= 0",
            ));
        }
        if !time.is_finite() {
            return Err(Error::invalid("t", time, "time must be finite"));
        }
        Ok(OrgState {
            leaders,
            foot_soldiers,
            time,
        })
    }

    /// State as a position vector, dropping the time stamp.
    pub fn position(&self) -> Vec2 {
        Vec2 {
            l: self.leaders,
            f: self.foot_soldiers,
        }
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { l: 0.0, f: 0.0 };

    pub fn new(l: f64, f: f64) -> Self {
        Vec2 { l, f }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.l * other.l + self.f * other.f
    }

    pub fn norm(self) -> f64 {
        self.l.hypot(self.f)
    }

    /// Unit vector in the same direction. The norm must be nonzero.
    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        Vec2 {
            l: self.l / n,
            f: self.f / n,
        }
    }

    /// Counter-clockwise perpendicular (same length).
    pub fn perp(self) -> Vec2 {
        Vec2 {
            l: -self.f,
            f: self.l,
        }
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.l + rhs.l, self.f + rhs.f)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.l - rhs.l, self.f - rhs.f)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.l * rhs, self.f * rhs)
    }
}

impl SystemMatrix {
    /// Applies the affine map to a position: returns `A*x + f`.
    pub fn apply(&self, x: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * x.l + self.a12 * x.f + self.f1,
            self.a21 * x.l + self.a22 * x.f + self.f2,
        )
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }
}

impl ParamName {
    /// All parameter names, in canonical scenario-file order.
    pub const ALL: [ParamName; 8] = [
        ParamName::Promotion,
        ParamName::Recruitment,
        ParamName::LeaderWeight,
        ParamName::LeaderRemoval,
        ParamName::SoldierRemoval,
        ParamName::UniformDesertion,
        ParamName::LeaderDesertion,
        ParamName::SoldierDesertion,
    ];

    /// Canonical short key, matching scenario-file syntax.
    pub fn key(self) -> &'static str {
        match self {
            ParamName::Promotion => "p",
            ParamName::Recruitment => "r",
            ParamName::LeaderWeight => "m",
            ParamName::LeaderRemoval => "b",
            ParamName::SoldierRemoval => "k",
            ParamName::LeaderDesertion => "d_L",
            ParamName::SoldierDesertion => "d_F",
            ParamName::UniformDesertion => "d",
        }
    }
}

impl std::fmt::Display for ParamName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        for name in ParamName::ALL {
            if s == name.key() {
                return Ok(name);
            }
        }
        Err(Error::Domain(format!(
            "unknown parameter {s:?}; expected one of p, r, m, b, k, d, d_L, d_F"
        )))
    }
}

/// Organizational strength `S = m*L + F`.
pub fn strength(state: &OrgState, leader_weight: f64) -> f64 {
    leader_weight * state.leaders + state.foot_soldiers
}

/// Instantaneous rates `(dL/dt, dF/dt)` at `state`.
pub fn derivative(params: &OrgParams, state: &OrgState) -> (f64, f64) {
    derivative_at(params, state.leaders, state.foot_soldiers)
}

/// Rates at raw coordinates. Callers that step through intermediate points
/// (integrators, vector-field grids) use this to avoid re-validating states.
pub(crate) fn derivative_at(params: &OrgParams, leaders: f64, foot_soldiers: f64) -> (f64, f64) {
    let dl = params.promotion * foot_soldiers
        - params.leader_desertion * leaders
        - params.leader_removal;
    let df = params.recruitment * (params.leader_weight * leaders + foot_soldiers)
        - params.soldier_desertion * foot_soldiers
        - params.soldier_removal;
    (dl, df)
}

/// The system written in matrix form.
pub fn system_matrix(params: &OrgParams) -> SystemMatrix {
    SystemMatrix {
        a11: -params.leader_desertion,
        a12: params.promotion,
        a21: params.recruitment * params.leader_weight,
        a22: params.recruitment - params.soldier_desertion,
        f1: -params.leader_removal,
        f2: -params.soldier_removal,
    }
}

/// Accounts for the foot soldiers lost to promotion (the `-p*F` drain that
/// mirrors the leaders' `+p*F` gain), which the base equations leave out.
///
/// Both modes produce the same dynamics; they differ only in which
/// parameters absorb the drain. `AdjustRecruitment` requires `r > p` and
/// preserves the product `r*m`; `AdjustDesertion` simply adds `p` to the
/// foot-soldier desertion rate.
pub fn promotion_drain_transform(params: &OrgParams, mode: DrainMode) -> Result<OrgParams> {
    let mut out = *params;
    match mode {
        DrainMode::AdjustRecruitment => {
            let (p, r, m) = (params.promotion, params.recruitment, params.leader_weight);
            if r <= p {
                return Err(Error::invalid(
                    "r",
                    r,
                    "recruitment must exceed promotion to fold the drain into recruitment",
                ));
            }
            out.recruitment = r - p;
            out.leader_weight = r * m / (r - p);
        }
        DrainMode::AdjustDesertion => {
            out.soldier_desertion = params.soldier_desertion + params.promotion;
        }
    }
    out.validate()?;
    Ok(out)
}
