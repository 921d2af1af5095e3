//! Fixed-step fifth-order Runge-Kutta integration and the closed-loop driver.
//!
//! The step uses the fifth-order solution of the Dormand-Prince 5(4) pair
//! without error control:
//!
//! ```text
//! c  | a
//! 0      |
//! 1/5    | 1/5
//! 3/10   | 3/40        9/40
//! 4/5    | 44/45       -56/15       32/9
//! 8/9    | 19372/6561  -25360/2187  64448/6561  -212/729
//! 1      | 9017/3168   -355/33      46732/5247  49/176   -5103/18656
//! -------+-----------------------------------------------------------------
//! b      | 35/384      0            500/1113    125/192  -2187/6784  11/84
//! ```
//!
//! Coefficients are kept as integer ratios so that the step can be evaluated
//! in any [`Real`] scalar without first rounding them to `f64`.

use std::fmt::Write as _;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::controllers::{ControlLaw, Reference};
use crate::error::{Error, Result};
use crate::plant::{forward_dynamics, JointState, PlantParams, Vec2};

/// Scalar field the Runge-Kutta step is generic over.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn is_finite(self) -> bool;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_f64(num as f64) / Self::from_f64(den as f64)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

type Ratio = (i64, i64);

const C: [Ratio; 6] = [(0, 1), (1, 5), (3, 10), (4, 5), (8, 9), (1, 1)];

const A: [&[Ratio]; 6] = [
    &[],
    &[(1, 5)],
    &[(3, 40), (9, 40)],
    &[(44, 45), (-56, 15), (32, 9)],
    &[(19372, 6561), (-25360, 2187), (64448, 6561), (-212, 729)],
    &[(9017, 3168), (-355, 33), (46732, 5247), (49, 176), (-5103, 18656)],
];

const B: [Ratio; 6] = [(35, 384), (0, 1), (500, 1113), (125, 192), (-2187, 6784), (11, 84)];

/// Advances `y` by one fifth-order Dormand-Prince step of size `h`.
///
/// Fails with [`Error::Integration`] if any stage derivative is non-finite.
pub fn rk5_step<T, const N: usize, F>(mut f: F, t: T, y: &[T; N], h: T) -> Result<[T; N]>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let zero = T::from_f64(0.0);
    let mut k = [[zero; N]; 6];
    for s in 0..6 {
        let mut ys = *y;
        for (j, &(num, den)) in A[s].iter().enumerate() {
            let a = T::ratio(num, den) * h;
            for (yi, kj) in ys.iter_mut().zip(&k[j]) {
                *yi = *yi + a * *kj;
            }
        }
        let ts = t + T::ratio(C[s].0, C[s].1) * h;
        k[s] = f(ts, &ys);
        if !k[s].iter().all(|v| v.is_finite()) {
            return Err(Error::Integration { t: ts.to_f64() });
        }
    }
    let mut out = *y;
    for (s, &(num, den)) in B.iter().enumerate() {
        if num == 0 {
            continue;
        }
        let b = T::ratio(num, den) * h;
        for (yi, ki) in out.iter_mut().zip(&k[s]) {
            *yi = *yi + b * *ki;
        }
    }
    Ok(out)
}

/// Upper bound on the number of steps in one simulation.
pub const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub step_size: f64,
    pub duration: f64,
    pub theta_desired: Vec2,
    pub theta_dot_desired: Vec2,
    pub theta_ddot_desired: Vec2,
    pub initial_state: JointState,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-3,
            duration: 3.0,
            theta_desired: Vec2::new(60f64.to_radians(), 50f64.to_radians()),
            theta_dot_desired: Vec2::zeros(),
            theta_ddot_desired: Vec2::zeros(),
            initial_state: JointState::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let h = self.step_size;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!("step_size must be positive, got {h}")));
        }
        if !(self.duration.is_finite() && self.duration >= h) {
            return Err(Error::Config(format!(
                "duration {} must be at least one step ({h})",
                self.duration
            )));
        }
        if self.duration / h > MAX_STEPS {
            return Err(Error::Config(format!(
                "duration / step_size = {:e} exceeds {MAX_STEPS:e}",
                self.duration / h
            )));
        }
        if !self.reference().is_finite() || !self.initial_state.is_finite() {
            return Err(Error::Config("reference and initial state must be finite".into()));
        }
        Ok(())
    }

    pub fn reference(&self) -> Reference {
        Reference {
            theta_d: self.theta_desired,
            theta_dot_d: self.theta_dot_desired,
            theta_ddot_d: self.theta_ddot_desired,
        }
    }

    /// Number of integration steps, `floor(duration / step_size)`.
    pub fn steps(&self) -> usize {
        // Absorb representation error so that e.g. 3.0 / 1e-3 counts 3000 steps.
        (self.duration / self.step_size * (1.0 + 1e-12)).floor() as usize
    }
}

/// Sampled closed-loop response. Row `k` is at `t = k * step_size`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub step_size: f64,
    pub times: Vec<f64>,
    pub states: Vec<JointState>,
    pub torques: Vec<Vec2>,
    pub errors: Vec<Vec2>,
}

pub const TRACE_COLUMNS: [&str; 9] = [
    "t",
    "theta1",
    "theta2",
    "theta1_dot",
    "theta2_dot",
    "tau1",
    "tau2",
    "e1",
    "e2",
];

impl SimTrace {
    fn with_capacity(step_size: f64, n: usize) -> Self {
        Self {
            step_size,
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            torques: Vec::with_capacity(n),
            errors: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Position samples of one joint.
    pub fn joint_positions(&self, joint: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.theta[joint]).collect()
    }

    /// CSV with a header row; numbers in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.len() * 160);
        s.push_str(&TRACE_COLUMNS.join(","));
        s.push('\n');
        for i in 0..self.len() {
            let (st, tau, e) = (&self.states[i], &self.torques[i], &self.errors[i]);
            let _ = writeln!(
                s,
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                self.times[i],
                st.theta[0],
                st.theta[1],
                st.theta_dot[0],
                st.theta_dot[1],
                tau[0],
                tau[1],
                e[0],
                e[1]
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        if header.split(',').map(str::trim).ne(TRACE_COLUMNS) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header '{}'", TRACE_COLUMNS.join(",")),
            });
        }
        let mut trace = SimTrace::default();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: e.to_string(),
                })?;
            if v.len() != TRACE_COLUMNS.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} columns, found {}", TRACE_COLUMNS.len(), v.len()),
                });
            }
            trace.times.push(v[0]);
            trace.states.push(JointState::new(Vec2::new(v[1], v[2]), Vec2::new(v[3], v[4])));
            trace.torques.push(Vec2::new(v[5], v[6]));
            trace.errors.push(Vec2::new(v[7], v[8]));
        }
        if trace.times.len() >= 2 {
            trace.step_size = trace.times[1] - trace.times[0];
        }
        Ok(trace)
    }
}

/// Closed-loop state derivative `[θ̇, θ̈]`.
///
/// Invalid states map to NaN so the step reports them as non-finite.
fn closed_loop_rate<L: ControlLaw + ?Sized>(
    y: &[f64; 4],
    law: &L,
    reference: &Reference,
    plant: &PlantParams,
) -> [f64; 4] {
    let state = JointState::from_array(y);
    let tau = law.torque(&state, reference, plant);
    match forward_dynamics(&state, &tau, plant) {
        Ok(acc) => [y[2], y[3], acc[0], acc[1]],
        Err(_) => [f64::NAN; 4],
    }
}

/// Integrates the closed loop from `cfg.initial_state` over `[0, duration]`.
///
/// The controller is evaluated at every Runge-Kutta stage; the trace stores
/// the torque at the start of each step.
pub fn simulate<L: ControlLaw + ?Sized>(plant: &PlantParams, controller: &L, cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let reference = cfg.reference();
    let h = cfg.step_size;
    let steps = cfg.steps();
    let mut trace = SimTrace::with_capacity(h, steps + 1);
    let mut y = cfg.initial_state.to_array();

    for k in 0..=steps {
        let state = JointState::from_array(&y);
        let tau = controller.torque(&state, &reference, plant);
        if !state.is_finite() || !tau.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged { step: k });
        }
        trace.times.push(k as f64 * h);
        trace.states.push(state);
        trace.torques.push(tau);
        trace.errors.push(reference.error(&state));
        if k == steps {
            break;
        }
        let t = k as f64 * h;
        y = rk5_step(|_, ys| closed_loop_rate(ys, controller, &reference, plant), t, &y, h)
            .map_err(|_| Error::Diverged { step: k + 1 })?;
    }
    Ok(trace)
}
