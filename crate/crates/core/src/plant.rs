//! Rigid-body model of the two-axis mount.
//!
//! Both axes are treated as the joints of a planar two-link arm:
//!
//! ```text
//! M(θ) θ̈ + C(θ, θ̇) + G(θ) + τ_d = τ
//! ```
//!
//! with
//!
//! ```text
//! M = [[a1 + 2 a2 cos θ2, a3 + a2 cos θ2],
//!      [a3 + a2 cos θ2,   a3           ]]
//! C = [-a2 sin θ2 (θ̇2² + 2 θ̇1 θ̇2), a2 sin θ2 θ̇1²]
//! G = [g1 cos θ1, g2 cos(θ1 + θ2)]          (only when enabled)
//! ```
//!
//! A balanced mount has no gravity torque, so gravity is off by default.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Name of the built-in parameter profile.
pub const DEFAULT_PROFILE: &str = "kao-14in-default";

/// Relative threshold on det(M) below which the inertia matrix is treated as singular.
const SINGULAR_RTOL: f64 = 1e-12;

/// Number of θ2 samples used to check invertibility at construction.
const INVERTIBILITY_GRID: usize = 1000;

/// Joint positions (rad) and velocities (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub theta: Vec2,
    pub theta_dot: Vec2,
}

impl JointState {
    pub fn new(theta: Vec2, theta_dot: Vec2) -> Self {
        Self { theta, theta_dot }
    }

    pub fn at_rest(theta: Vec2) -> Self {
        Self::new(theta, Vec2::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(self.theta_dot.iter()).all(|v| v.is_finite())
    }

    /// Packs the state as `[θ1, θ2, θ̇1, θ̇2]` for the integrator.
    pub fn to_array(&self) -> [f64; 4] {
        [self.theta[0], self.theta[1], self.theta_dot[0], self.theta_dot[1]]
    }

    pub fn from_array(y: &[f64; 4]) -> Self {
        Self::new(Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]))
    }
}

impl Default for JointState {
    fn default() -> Self {
        Self::at_rest(Vec2::zeros())
    }
}

/// Inertia, gravity and disturbance coefficients of the mount.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    a1: f64,
    a2: f64,
    a3: f64,
    gravity_enabled: bool,
    g1_coeff: f64,
    g2_coeff: f64,
    tau_d: Vec2,
}

impl PlantParams {
    /// Builds a validated parameter set.
    ///
    /// Rejects non-finite coefficients, non-positive `a1`/`a3`, and any set
    /// whose inertia matrix becomes (near) singular for some θ2.
    pub fn new(
        a1: f64,
        a2: f64,
        a3: f64,
        gravity_enabled: bool,
        g1_coeff: f64,
        g2_coeff: f64,
        tau_d: Vec2,
    ) -> Result<Self> {
        let all = [a1, a2, a3, g1_coeff, g2_coeff, tau_d[0], tau_d[1]];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPlant("coefficients must be finite".into()));
        }
        if a1 <= 0.0 || a3 <= 0.0 {
            return Err(Error::InvalidPlant(format!(
                "a1 and a3 must be positive (a1 = {a1}, a3 = {a3})"
            )));
        }
        let params = Self {
            a1,
            a2,
            a3,
            gravity_enabled,
            g1_coeff,
            g2_coeff,
            tau_d,
        };
        for k in 0..=INVERTIBILITY_GRID {
            let q2 = TAU * k as f64 / INVERTIBILITY_GRID as f64;
            let m = params.inertia_at(q2);
            // det must stay positive: a sign change means M passes through singularity.
            let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if m.determinant() <= SINGULAR_RTOL * scale * scale {
                return Err(Error::InvalidPlant(format!(
                    "inertia matrix is singular near theta2 = {q2:.4} rad"
                )));
            }
        }
        Ok(params)
    }

    /// Inertia-only parameters with gravity off and no disturbance.
    pub fn balanced(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        Self::new(a1, a2, a3, false, 0.0, 0.0, Vec2::zeros())
    }

    /// Looks up a named profile.
    pub fn profile(name: &str) -> Option<Self> {
        match name {
            DEFAULT_PROFILE => Some(Self::default()),
            _ => None,
        }
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn a3(&self) -> f64 {
        self.a3
    }
    pub fn gravity_enabled(&self) -> bool {
        self.gravity_enabled
    }
    pub fn g1_coeff(&self) -> f64 {
        self.g1_coeff
    }
    pub fn g2_coeff(&self) -> f64 {
        self.g2_coeff
    }
    pub fn tau_d(&self) -> Vec2 {
        self.tau_d
    }

    /// Returns a copy with the given constant disturbance torque.
    pub fn with_disturbance(mut self, tau_d: Vec2) -> Result<Self> {
        if !tau_d.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPlant("disturbance must be finite".into()));
        }
        self.tau_d = tau_d;
        Ok(self)
    }

    /// Returns a copy with gravity torques enabled.
    pub fn with_gravity(mut self, g1_coeff: f64, g2_coeff: f64) -> Result<Self> {
        if !(g1_coeff.is_finite() && g2_coeff.is_finite()) {
            return Err(Error::InvalidPlant("gravity coefficients must be finite".into()));
        }
        self.gravity_enabled = true;
        self.g1_coeff = g1_coeff;
        self.g2_coeff = g2_coeff;
        Ok(self)
    }

    fn inertia_at(&self, theta2: f64) -> Mat2 {
        let c2 = theta2.cos();
        let off = self.a3 + self.a2 * c2;
        Mat2::new(self.a1 + 2.0 * self.a2 * c2, off, off, self.a3)
    }
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            a1: 0.12,
            a2: 0.03,
            a3: 0.02,
            gravity_enabled: false,
            g1_coeff: 0.0,
            g2_coeff: 0.0,
            tau_d: Vec2::zeros(),
        }
    }
}

fn is_singular(m: &Mat2) -> bool {
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    m.determinant().abs() <= SINGULAR_RTOL * scale * scale
}

fn ensure_finite(v: &Vec2, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(what))
    }
}

pub fn inertia_matrix(theta: &Vec2, params: &PlantParams) -> Result<Mat2> {
    ensure_finite(theta, "theta")?;
    Ok(params.inertia_at(theta[1]))
}

pub fn coriolis_vector(state: &JointState, params: &PlantParams) -> Result<Vec2> {
    if !state.is_finite() {
        return Err(Error::Domain("joint state"));
    }
    Ok(coriolis_unchecked(state, params))
}

fn coriolis_unchecked(state: &JointState, params: &PlantParams) -> Vec2 {
    let s2 = state.theta[1].sin();
    let (w1, w2) = (state.theta_dot[0], state.theta_dot[1]);
    Vec2::new(
        -params.a2 * s2 * (w2 * w2 + 2.0 * w1 * w2),
        params.a2 * s2 * w1 * w1,
    )
}

pub fn gravity_vector(theta: &Vec2, params: &PlantParams) -> Result<Vec2> {
    ensure_finite(theta, "theta")?;
    Ok(gravity_unchecked(theta, params))
}

fn gravity_unchecked(theta: &Vec2, params: &PlantParams) -> Vec2 {
    if !params.gravity_enabled {
        return Vec2::zeros();
    }
    Vec2::new(
        params.g1_coeff * theta[0].cos(),
        params.g2_coeff * (theta[0] + theta[1]).cos(),
    )
}

/// Solves `M(θ) θ̈ = τ − C − G − τ_d` for the joint accelerations.
pub fn forward_dynamics(state: &JointState, tau: &Vec2, params: &PlantParams) -> Result<Vec2> {
    if !state.is_finite() {
        return Err(Error::Domain("joint state"));
    }
    ensure_finite(tau, "torque")?;
    let m = params.inertia_at(state.theta[1]);
    if is_singular(&m) {
        return Err(Error::Singular {
            det: m.determinant(),
        });
    }
    let rhs = tau
        - coriolis_unchecked(state, params)
        - gravity_unchecked(&state.theta, params)
        - params.tau_d;
    // 2x2 Cramer's rule; M is symmetric.
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Ok(Vec2::new(
        (m[(1, 1)] * rhs[0] - m[(0, 1)] * rhs[1]) / det,
        (m[(0, 0)] * rhs[1] - m[(1, 0)] * rhs[0]) / det,
    ))
}

/// Kinetic energy `½ θ̇ᵀ M(θ) θ̇`.
///
/// The gravity field `[g1 cos θ1, g2 cos(θ1+θ2)]` has no potential (its
/// Jacobian is not symmetric), so only the kinetic part is returned; the
/// quantity is conserved when gravity, disturbance and input torque are zero.
pub fn total_energy(state: &JointState, params: &PlantParams) -> f64 {
    let m = params.inertia_at(state.theta[1]);
    0.5 * state.theta_dot.dot(&(m * state.theta_dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p() -> PlantParams {
        PlantParams::default()
    }

    #[test]
    fn inertia_closed_form_cases() {
        let m = inertia_matrix(&Vec2::new(0.3, FRAC_PI_2), &p()).unwrap();
        assert_relative_eq!(m[(0, 0)], 0.12, epsilon = 1e-15);
        assert_relative_eq!(m[(0, 1)], 0.02, epsilon = 1e-15);
        assert_relative_eq!(m[(1, 1)], 0.02, epsilon = 1e-15);

        let m = inertia_matrix(&Vec2::new(-1.0, 0.0), &p()).unwrap();
        assert_eq!(m, Mat2::new(0.18, 0.05, 0.05, 0.02));

        // Independent scalar evaluation at θ2 = 1 rad: cos(1) = 0.5403023058681398.
        let m = inertia_matrix(&Vec2::new(0.0, 1.0), &p()).unwrap();
        assert_relative_eq!(m[(0, 0)], 0.1524181383520884, epsilon = 1e-15);
        assert_relative_eq!(m[(0, 1)], 0.03620906917604419, epsilon = 1e-15);
        assert_relative_eq!(m[(1, 0)], 0.03620906917604419, epsilon = 1e-15);
        assert_relative_eq!(m[(1, 1)], 0.02, epsilon = 1e-15);
    }

    #[test]
    fn inertia_is_symmetric_positive_definite_on_grid() {
        for k in 0..1000 {
            let q2 = -PI + TAU * k as f64 / 999.0;
            let m = inertia_matrix(&Vec2::new(0.0, q2), &p()).unwrap();
            assert_eq!(m[(0, 1)], m[(1, 0)]);
            let eig = m.symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l > 0.0), "θ2 = {q2}: {eig:?}");
        }
    }

    #[test]
    fn coriolis_cases() {
        let c = coriolis_vector(&JointState::at_rest(Vec2::new(0.4, 1.1)), &p()).unwrap();
        assert_eq!(c, Vec2::zeros());
        let c = coriolis_vector(&JointState::new(Vec2::zeros(), Vec2::new(2.0, -3.0)), &p()).unwrap();
        assert_eq!(c, Vec2::zeros());
        let s = JointState::new(Vec2::new(0.0, FRAC_PI_2), Vec2::new(1.0, 1.0));
        let c = coriolis_vector(&s, &p()).unwrap();
        assert_relative_eq!(c[0], -0.09, epsilon = 1e-15);
        assert_relative_eq!(c[1], 0.03, epsilon = 1e-15);
    }

    #[test]
    fn gravity_cases() {
        assert_eq!(gravity_vector(&Vec2::new(0.0, 0.0), &p()).unwrap(), Vec2::zeros());
        let g = p().with_gravity(1.0, 0.5).unwrap();
        let v = gravity_vector(&Vec2::new(FRAC_PI_2, 0.0), &g).unwrap();
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
        assert_eq!(gravity_vector(&Vec2::zeros(), &g).unwrap(), Vec2::new(1.0, 0.5));
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        assert!(matches!(
            inertia_matrix(&Vec2::new(f64::NAN, 0.0), &p()),
            Err(Error::Domain(_))
        ));
        let s = JointState::new(Vec2::zeros(), Vec2::new(f64::INFINITY, 0.0));
        assert!(coriolis_vector(&s, &p()).is_err());
        assert!(forward_dynamics(&s, &Vec2::zeros(), &p()).is_err());
        assert!(gravity_vector(&Vec2::new(0.0, f64::NAN), &p()).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(PlantParams::balanced(0.0, 0.03, 0.02).is_err());
        assert!(PlantParams::balanced(0.12, 0.03, -0.02).is_err());
        // det = a1 a3 - a3² - a2² cos² θ2 vanishes at θ2 = 0.
        assert!(PlantParams::balanced(0.05, 0.03, 0.02).is_err());
        assert!(PlantParams::balanced(0.12, f64::NAN, 0.02).is_err());
        assert!(PlantParams::balanced(0.12, 0.03, 0.02).is_ok());
    }

    #[test]
    fn forward_dynamics_balanced_torque_gives_zero_acceleration() {
        let plant = p().with_gravity(0.7, -0.2).unwrap().with_disturbance(Vec2::new(0.01, -0.02)).unwrap();
        let s = JointState::new(Vec2::new(0.3, -0.8), Vec2::new(0.5, 1.5));
        let tau = coriolis_vector(&s, &plant).unwrap() + gravity_vector(&s.theta, &plant).unwrap() + plant.tau_d();
        let acc = forward_dynamics(&s, &tau, &plant).unwrap();
        assert!(acc.norm() < 1e-12, "{acc}");
    }

    #[test]
    fn forward_dynamics_inverts_inertia() {
        let s = JointState::at_rest(Vec2::new(0.0, FRAC_PI_2));
        let m = inertia_matrix(&s.theta, &p()).unwrap();
        let acc = forward_dynamics(&s, &(m * Vec2::new(1.0, 0.0)), &p()).unwrap();
        assert_relative_eq!(acc[0], 1.0, epsilon = 1e-12);
        assert!(acc[1].abs() < 1e-12);
    }

    #[test]
    fn kinetic_energy_cases() {
        assert_eq!(total_energy(&JointState::at_rest(Vec2::new(0.2, 0.3)), &p()), 0.0);
        let s = JointState::new(Vec2::new(0.0, FRAC_PI_2), Vec2::new(1.0, 0.0));
        assert_relative_eq!(total_energy(&s, &p()), 0.06, epsilon = 1e-15);
    }

    #[test]
    fn profile_lookup() {
        assert_eq!(PlantParams::profile(DEFAULT_PROFILE), Some(PlantParams::default()));
        assert!(PlantParams::profile("nope").is_none());
        let d = PlantParams::default();
        assert!(!d.gravity_enabled());
        assert_eq!(d.tau_d(), Vec2::zeros());
    }
}
