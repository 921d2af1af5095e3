//! Computed-torque control laws.
//!
//! All four controllers share the compensator `τ = M(θ) u + C(θ, θ̇)`; they
//! differ only in how the auxiliary acceleration `u` is produced:
//!
//! * PD: `u = θ̈_d + K_d ė + K_p e`
//! * FLC: `u_i = flc(e_i, ė_i)` with one fuzzy surface shared by both joints
//!
//! The GA-tuned variants reuse these code paths with tuned parameters.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fuzzy::FuzzyController;
use crate::ini::Document;
use crate::plant::{JointState, PlantParams, Vec2};

/// Natural frequency (rad/s) of the baseline critically damped PD loop.
pub const BASELINE_OMEGA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdGains {
    kp: Vec2,
    kd: Vec2,
}

impl PdGains {
    pub fn new(kp: Vec2, kd: Vec2) -> Result<Self> {
        if kp.iter().chain(kd.iter()).any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::Config(format!(
                "PD gains must be positive and finite (kp = [{}, {}], kd = [{}, {}])",
                kp[0], kp[1], kd[0], kd[1]
            )));
        }
        Ok(Self { kp, kd })
    }

    /// Same gains on both joints.
    pub fn uniform(kp: f64, kd: f64) -> Result<Self> {
        Self::new(Vec2::new(kp, kp), Vec2::new(kd, kd))
    }

    pub fn kp(&self) -> Vec2 {
        self.kp
    }
    pub fn kd(&self) -> Vec2 {
        self.kd
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# PD gains, joint 1 then joint 2\n[pd]\n");
        let _ = writeln!(s, "kp = {:?} {:?}", self.kp[0], self.kp[1]);
        let _ = writeln!(s, "kd = {:?} {:?}", self.kd[0], self.kd[1]);
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let sec = doc.require_section("pd")?;
        sec.deny_unknown(&["kp", "kd"])?;
        let kp = sec.require("kp")?;
        let kd = sec.require("kd")?;
        let p: Vec<f64> = kp.parse_list(2)?;
        let d: Vec<f64> = kd.parse_list(2)?;
        Self::new(Vec2::new(p[0], p[1]), Vec2::new(d[0], d[1])).map_err(|e| kp.error(e.to_string()))
    }
}

/// Desired position, velocity and acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub theta_d: Vec2,
    pub theta_dot_d: Vec2,
    pub theta_ddot_d: Vec2,
}

impl Reference {
    /// Constant set-point with zero desired velocity and acceleration.
    pub fn step(theta_d: Vec2) -> Self {
        Self {
            theta_d,
            theta_dot_d: Vec2::zeros(),
            theta_ddot_d: Vec2::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.theta_d, self.theta_dot_d, self.theta_ddot_d]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Position error `θ_d − θ`.
    pub fn error(&self, state: &JointState) -> Vec2 {
        self.theta_d - state.theta
    }

    /// Velocity error `θ̇_d − θ̇`.
    pub fn error_rate(&self, state: &JointState) -> Vec2 {
        self.theta_dot_d - state.theta_dot
    }
}

/// Maps a state and reference to joint torques.
pub trait ControlLaw {
    fn torque(&self, state: &JointState, reference: &Reference, plant: &PlantParams) -> Vec2;
}

impl<F> ControlLaw for F
where
    F: Fn(&JointState, &Reference, &PlantParams) -> Vec2,
{
    fn torque(&self, state: &JointState, reference: &Reference, plant: &PlantParams) -> Vec2 {
        self(state, reference, plant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControllerKind {
    GaFlc,
    GaPd,
    Flc,
    Pd,
}

impl ControllerKind {
    /// Column order of the comparison table.
    pub const TABLE_ORDER: [ControllerKind; 4] = [Self::GaFlc, Self::GaPd, Self::Flc, Self::Pd];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pd => "pd",
            Self::Flc => "flc",
            Self::GaPd => "ga-pd",
            Self::GaFlc => "ga-flc",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Pd => "PD",
            Self::Flc => "FLC",
            Self::GaPd => "GA-PD",
            Self::GaFlc => "GA-FLC",
        }
    }

    pub fn is_fuzzy(self) -> bool {
        matches!(self, Self::Flc | Self::GaFlc)
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pd" => Ok(Self::Pd),
            "flc" => Ok(Self::Flc),
            "ga-pd" => Ok(Self::GaPd),
            "ga-flc" => Ok(Self::GaFlc),
            other => Err(Error::Config(format!(
                "unknown controller '{other}' (expected pd, flc, ga-pd or ga-flc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Pd(PdGains),
    Flc(FuzzyController),
    GaPd(PdGains),
    GaFlc(FuzzyController),
}

impl Controller {
    pub fn kind(&self) -> ControllerKind {
        match self {
            Self::Pd(_) => ControllerKind::Pd,
            Self::Flc(_) => ControllerKind::Flc,
            Self::GaPd(_) => ControllerKind::GaPd,
            Self::GaFlc(_) => ControllerKind::GaFlc,
        }
    }
}

impl ControlLaw for Controller {
    fn torque(&self, state: &JointState, reference: &Reference, plant: &PlantParams) -> Vec2 {
        match self {
            Self::Pd(g) | Self::GaPd(g) => pd_computed_torque(state, reference, g, plant),
            Self::Flc(f) | Self::GaFlc(f) => flc_computed_torque(state, reference, f, plant),
        }
    }
}

/// `M(θ) a + C(θ, θ̇)`, the feedback-linearizing compensator.
///
/// Non-finite states propagate as non-finite torques; the simulator turns
/// those into a divergence error.
fn compensate(state: &JointState, accel: Vec2, plant: &PlantParams) -> Vec2 {
    let c2 = state.theta[1].cos();
    let s2 = state.theta[1].sin();
    let (a1, a2, a3) = (plant.a1(), plant.a2(), plant.a3());
    let off = a3 + a2 * c2;
    let (w1, w2) = (state.theta_dot[0], state.theta_dot[1]);
    Vec2::new(
        (a1 + 2.0 * a2 * c2) * accel[0] + off * accel[1] - a2 * s2 * (w2 * w2 + 2.0 * w1 * w2),
        off * accel[0] + a3 * accel[1] + a2 * s2 * w1 * w1,
    )
}

pub fn pd_computed_torque(state: &JointState, reference: &Reference, gains: &PdGains, plant: &PlantParams) -> Vec2 {
    let e = reference.error(state);
    let de = reference.error_rate(state);
    let u = reference.theta_ddot_d + gains.kd.component_mul(&de) + gains.kp.component_mul(&e);
    compensate(state, u, plant)
}

pub fn flc_computed_torque(
    state: &JointState,
    reference: &Reference,
    fdef: &FuzzyController,
    plant: &PlantParams,
) -> Vec2 {
    let e = reference.error(state);
    let de = reference.error_rate(state);
    let u = Vec2::new(fdef.output(e[0], de[0]), fdef.output(e[1], de[1]));
    compensate(state, u, plant)
}

/// Baseline gains for the compensated double-integrator loop.
///
/// Classical ultimate-cycle tuning has no finite ultimate gain on a double
/// integrator, so the baseline places both poles at `-ω`: `kp = ω²`, `kd = 2ω`.
pub fn ziegler_nichols_baseline(_plant: &PlantParams) -> PdGains {
    baseline_gains(BASELINE_OMEGA)
}

pub fn baseline_gains(omega: f64) -> PdGains {
    PdGains::uniform(omega * omega, 2.0 * omega).expect("omega must be positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{coriolis_vector, inertia_matrix};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn compensator_matches_plant_terms() {
        let plant = PlantParams::default();
        let s = JointState::new(Vec2::new(0.2, -1.3), Vec2::new(0.7, -0.4));
        let u = Vec2::new(1.5, -2.5);
        let expect = inertia_matrix(&s.theta, &plant).unwrap() * u + coriolis_vector(&s, &plant).unwrap();
        let got = compensate(&s, u, &plant);
        assert_relative_eq!(got, expect, epsilon = 1e-15);
    }

    #[test]
    fn pd_zero_error_at_rest_is_zero() {
        let plant = PlantParams::default();
        let r = Reference::step(Vec2::new(1.0, 0.5));
        let s = JointState::at_rest(r.theta_d);
        let g = baseline_gains(5.0);
        assert_eq!(pd_computed_torque(&s, &r, &g, &plant), Vec2::zeros());
    }

    #[test]
    fn pd_without_feedback_is_coriolis() {
        let plant = PlantParams::default();
        let s = JointState::new(Vec2::new(0.1, 0.9), Vec2::new(1.0, -2.0));
        let r = Reference::step(Vec2::new(1.0, 0.5));
        // Near-zero gains approximate the feed-forward-only law.
        let g = PdGains::uniform(1e-300, 1e-300).unwrap();
        let tau = pd_computed_torque(&s, &r, &g, &plant);
        assert_relative_eq!(tau, coriolis_vector(&s, &plant).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn gains_validation() {
        assert!(PdGains::uniform(0.0, 1.0).is_err());
        assert!(PdGains::uniform(1.0, -1.0).is_err());
        assert!(PdGains::uniform(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn baseline_formula() {
        let g = ziegler_nichols_baseline(&PlantParams::default());
        assert_eq!(g.kp(), Vec2::new(25.0, 25.0));
        assert_eq!(g.kd(), Vec2::new(10.0, 10.0));
        let g = baseline_gains(1.0);
        assert_eq!((g.kp()[0], g.kd()[0]), (1.0, 2.0));
    }

    #[test]
    fn flc_zero_error_at_rest_is_zero() {
        let plant = PlantParams::default();
        let r = Reference::step(Vec2::new(1.0, 0.5));
        let s = JointState::at_rest(r.theta_d);
        let tau = flc_computed_torque(&s, &r, &FuzzyController::default(), &plant);
        assert!(tau.norm() < 1e-12);
    }

    #[test]
    fn flc_positive_error_pushes_forward() {
        let plant = PlantParams::default();
        let s = JointState::at_rest(Vec2::new(0.0, FRAC_PI_2));
        let r = Reference::step(Vec2::new(0.5, FRAC_PI_2));
        let tau = flc_computed_torque(&s, &r, &FuzzyController::default(), &plant);
        assert!(tau[0] > 0.0, "{tau}");
    }

    #[test]
    fn gains_text_roundtrip() {
        let g = PdGains::new(Vec2::new(123.456789, 0.1), Vec2::new(1.0 / 3.0, 59.9)).unwrap();
        let text = g.to_text();
        let back = PdGains::from_text(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), text);
        assert!(PdGains::from_text("[pd]\nkp = 1 2\n").is_err());
        assert!(PdGains::from_text("[pd]\nkp = 1 2\nkd = 0 1\n").is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in ControllerKind::TABLE_ORDER {
            assert_eq!(k.as_str().parse::<ControllerKind>().unwrap(), k);
        }
        assert!("pid".parse::<ControllerKind>().is_err());
    }
}
