use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::domain::RigidMotion;
use crate::error::{LabError, Result};
use crate::numeric::{composite_gauss, rk4_integrate, smooth_step, smooth_step_derivative, CompensatedSum};

/// Start and length of the window where the temporal factor is active.
const RAMP_START: f64 = 0.1;
const RAMP_LENGTH: f64 = 0.8;

/// Temporal factor `h(t)` of a separable Hamiltonian `h(t) H_0(p)`.
///
/// `h` is a smooth bump supported in `[0.1, 0.9]` with prescribed integral,
/// so the cumulative `int_0^t h` vanishes on `[0, 0.1]` and is constant on
/// `[0.9, 1]`; the generated isotopy is the identity near `t = 0` and
/// frozen at its time-one map near `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemporalProfile {
    pub integral: f64,
}

impl TemporalProfile {
    pub fn new(integral: f64) -> Self {
        Self { integral }
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.integral * smooth_step_derivative((t - RAMP_START) / RAMP_LENGTH) / RAMP_LENGTH
    }

    /// `int_0^t h`.
    pub fn cumulative(&self, t: f64) -> f64 {
        self.integral * smooth_step((t - RAMP_START) / RAMP_LENGTH)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    /// `(1 - r^2/rho^2)^3`, C^2 across the support boundary.
    Polynomial,
    /// `exp(1 - 1/(1 - r^2/rho^2))`, C-infinity.
    Exponential,
}

/// Radial bump `a phi(|p - c|^2 / rho^2)` times a temporal profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub shape: BumpShape,
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    pub temporal: TemporalProfile,
}

fn exponential_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        composite_gauss(0.0, 1.0, 64, 16)
            .into_iter()
            .map(|(u, w)| w * (1.0 - 1.0 / (1.0 - u)).exp())
            .collect::<CompensatedSum>()
            .value()
    })
}

impl Bump {
    pub fn validate(&self) -> Result<()> {
        let ok = self.center.iter().all(|c| c.is_finite())
            && self.radius.is_finite()
            && self.radius > 0.0
            && self.amplitude.is_finite()
            && self.temporal.integral.is_finite();
        if !ok {
            return Err(LabError::InvalidParameter(format!(
                "bump needs finite center, amplitude, temporal integral and a positive radius, got {self:?}"
            )));
        }
        Ok(())
    }

    /// `(phi(u), phi'(u))` for `u = r^2 / rho^2`.
    fn profile(&self, u: f64) -> (f64, f64) {
        if u >= 1.0 {
            return (0.0, 0.0);
        }
        let v = 1.0 - u;
        match self.shape {
            BumpShape::Polynomial => (v * v * v, -3.0 * v * v),
            BumpShape::Exponential => {
                let e = (1.0 - 1.0 / v).exp();
                (e, -e / (v * v))
            }
        }
    }

    pub fn spatial_value(&self, p: [f64; 2]) -> f64 {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        self.amplitude * self.profile((dx * dx + dy * dy) / (self.radius * self.radius)).0
    }

    /// `g'(r^2)` where the spatial profile is `g(r^2)`.
    pub fn radial_derivative(&self, r2: f64) -> f64 {
        let rho2 = self.radius * self.radius;
        self.amplitude * self.profile(r2 / rho2).1 / rho2
    }

    /// `X_{H_0} = 2 g'(r^2) (y, -x)` relative to the center.
    pub fn spatial_vector_field(&self, p: [f64; 2]) -> [f64; 2] {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let g = 2.0 * self.radial_derivative(dx * dx + dy * dy);
        [g * dy, -g * dx]
    }

    /// `int H_0 dx dy`.
    pub fn spatial_integral(&self) -> f64 {
        let mass = match self.shape {
            BumpShape::Polynomial => 0.25,
            BumpShape::Exponential => exponential_mass(),
        };
        self.amplitude * PI * self.radius * self.radius * mass
    }
}

/// Compactly supported time-dependent Hamiltonian on a planar domain,
/// `H: [0, 1] x Sigma -> R`, together with the operations that build new
/// isotopies out of old ones.
///
/// Sign convention: `X_H = (dH/dy, -dH/dx)`, i.e. `i_X (dx ^ dy) = dH`.
#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    Zero,
    Bump(Bump),
    /// `2 H_1(2t)` on `[0, 1/2]`, then `2 H_2(2t - 1)`: runs the first
    /// isotopy, then the second one after its time-one map.
    Concat(Box<Hamiltonian>, Box<Hamiltonian>),
    /// `-H(1 - t, p)`, generating `phi^{1-t} o (phi^1)^{-1}`.
    Reversed(Box<Hamiltonian>),
    /// `-H(t, phi^t p)`, generating `(phi^t)^{-1}`.
    Inverse(Box<Hamiltonian>),
    /// `H_C(t, p) + H_K(t, (C^t)^{-1} p)`, generating `C^t o K^t`.
    Compose {
        outer: Box<Hamiltonian>,
        inner: Box<Hamiltonian>,
    },
    /// `H(t, m^{-1} p)`, generating `m o phi^t o m^{-1}`.
    Moved {
        inner: Box<Hamiltonian>,
        motion: RigidMotion,
    },
    Sum(Vec<Hamiltonian>),
}

/// Central-difference step for Jacobians of composite isotopies.
const JACOBIAN_EPS: f64 = 1e-6;

impl Hamiltonian {
    pub fn is_zero(&self) -> bool {
        match self {
            Hamiltonian::Zero => true,
            Hamiltonian::Bump(b) => b.amplitude == 0.0 || b.temporal.integral == 0.0,
            Hamiltonian::Concat(a, b) => a.is_zero() && b.is_zero(),
            Hamiltonian::Reversed(h) | Hamiltonian::Inverse(h) => h.is_zero(),
            Hamiltonian::Compose { outer, inner } => outer.is_zero() && inner.is_zero(),
            Hamiltonian::Moved { inner, .. } => inner.is_zero(),
            Hamiltonian::Sum(hs) => hs.iter().all(Hamiltonian::is_zero),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hamiltonian::Zero => Ok(()),
            Hamiltonian::Bump(b) => b.validate(),
            Hamiltonian::Concat(a, b) => {
                a.validate()?;
                b.validate()
            }
            Hamiltonian::Reversed(h) | Hamiltonian::Inverse(h) => h.validate(),
            Hamiltonian::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()
            }
            Hamiltonian::Moved { inner, motion } => {
                if !(motion.angle.is_finite() && motion.shift.iter().all(|s| s.is_finite())) {
                    return Err(LabError::InvalidParameter(format!(
                        "rigid motion must be finite, got {motion:?}"
                    )));
                }
                inner.validate()
            }
            Hamiltonian::Sum(hs) => hs.iter().try_for_each(Hamiltonian::validate),
        }
    }

    /// Discs `(center, radius)` whose union contains the support for all t.
    pub fn supports(&self) -> Vec<([f64; 2], f64)> {
        match self {
            Hamiltonian::Zero => Vec::new(),
            Hamiltonian::Bump(b) => {
                if b.amplitude == 0.0 || b.temporal.integral == 0.0 {
                    Vec::new()
                } else {
                    vec![(b.center, b.radius)]
                }
            }
            Hamiltonian::Concat(a, b) | Hamiltonian::Compose { outer: a, inner: b } => {
                let mut s = a.supports();
                s.extend(b.supports());
                s
            }
            Hamiltonian::Reversed(h) | Hamiltonian::Inverse(h) => h.supports(),
            Hamiltonian::Moved { inner, motion } => inner
                .supports()
                .into_iter()
                .map(|(c, r)| (motion.apply(c), r))
                .collect(),
            Hamiltonian::Sum(hs) => hs.iter().flat_map(Hamiltonian::supports).collect(),
        }
    }

    fn outside_support(&self, p: [f64; 2]) -> bool {
        self.supports().iter().all(|(c, r)| {
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            dx * dx + dy * dy >= r * r
        })
    }

    /// `H(t, p)`; `step` is the integrator step for composite variants.
    pub fn value(&self, t: f64, p: [f64; 2], step: f64) -> f64 {
        match self {
            Hamiltonian::Zero => 0.0,
            Hamiltonian::Bump(b) => {
                let r = b.temporal.rate(t);
                if r == 0.0 {
                    0.0
                } else {
                    r * b.spatial_value(p)
                }
            }
            Hamiltonian::Concat(a, b) => {
                if t < 0.5 {
                    2.0 * a.value(2.0 * t, p, step)
                } else {
                    2.0 * b.value(2.0 * t - 1.0, p, step)
                }
            }
            Hamiltonian::Reversed(h) => -h.value(1.0 - t, p, step),
            Hamiltonian::Inverse(h) => -h.value(t, h.flow(t, p, step), step),
            Hamiltonian::Compose { outer, inner } => {
                outer.value(t, p, step) + inner.value(t, outer.inverse_flow(t, p, step), step)
            }
            Hamiltonian::Moved { inner, motion } => inner.value(t, motion.apply_inverse(p), step),
            Hamiltonian::Sum(hs) => hs.iter().map(|h| h.value(t, p, step)).sum(),
        }
    }

    /// `X_{H_t}(p) = (dH/dy, -dH/dx)`.
    pub fn vector_field(&self, t: f64, p: [f64; 2], step: f64) -> [f64; 2] {
        match self {
            Hamiltonian::Zero => [0.0, 0.0],
            Hamiltonian::Bump(b) => {
                let r = b.temporal.rate(t);
                if r == 0.0 {
                    return [0.0, 0.0];
                }
                let x = b.spatial_vector_field(p);
                [r * x[0], r * x[1]]
            }
            Hamiltonian::Concat(a, b) => {
                let x = if t < 0.5 {
                    a.vector_field(2.0 * t, p, step)
                } else {
                    b.vector_field(2.0 * t - 1.0, p, step)
                };
                [2.0 * x[0], 2.0 * x[1]]
            }
            Hamiltonian::Reversed(h) => {
                let x = h.vector_field(1.0 - t, p, step);
                [-x[0], -x[1]]
            }
            Hamiltonian::Inverse(h) => {
                if h.outside_support(p) {
                    return [0.0, 0.0];
                }
                let q = h.flow(t, p, step);
                let x = h.vector_field(t, q, step);
                let j = jacobian(|z| h.flow(t, z, step), p);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                // -(D phi)^{-1} x
                [
                    -(j[1][1] * x[0] - j[0][1] * x[1]) / det,
                    -(-j[1][0] * x[0] + j[0][0] * x[1]) / det,
                ]
            }
            Hamiltonian::Compose { outer, inner } => {
                let xc = outer.vector_field(t, p, step);
                let q = outer.inverse_flow(t, p, step);
                if inner.outside_support(q) {
                    return xc;
                }
                let xk = inner.vector_field(t, q, step);
                let j = jacobian(|z| outer.flow(t, z, step), q);
                [
                    xc[0] + j[0][0] * xk[0] + j[0][1] * xk[1],
                    xc[1] + j[1][0] * xk[0] + j[1][1] * xk[1],
                ]
            }
            Hamiltonian::Moved { inner, motion } => motion.rotate(inner.vector_field(t, motion.apply_inverse(p), step)),
            Hamiltonian::Sum(hs) => hs.iter().fold([0.0, 0.0], |acc, h| {
                let x = h.vector_field(t, p, step);
                [acc[0] + x[0], acc[1] + x[1]]
            }),
        }
    }

    /// `phi^t(p)`, by fixed-step RK4 or by composing the flows of the parts.
    pub fn flow(&self, t: f64, p: [f64; 2], step: f64) -> [f64; 2] {
        if t == 0.0 || self.outside_support(p) {
            return p;
        }
        match self {
            Hamiltonian::Zero => p,
            Hamiltonian::Concat(a, b) => {
                if t <= 0.5 {
                    a.flow(2.0 * t, p, step)
                } else {
                    b.flow(2.0 * t - 1.0, a.flow(1.0, p, step), step)
                }
            }
            Hamiltonian::Inverse(h) => h.inverse_flow(t, p, step),
            Hamiltonian::Compose { outer, inner } => outer.flow(t, inner.flow(t, p, step), step),
            Hamiltonian::Moved { inner, motion } => motion.apply(inner.flow(t, motion.apply_inverse(p), step)),
            _ => {
                let f = |s: f64, y: [f64; 2]| self.vector_field(s, y, step);
                rk4_integrate(&f, 0.0, t, p, step)
            }
        }
    }

    /// `(phi^t)^{-1}(p)`.
    pub fn inverse_flow(&self, t: f64, p: [f64; 2], step: f64) -> [f64; 2] {
        if t == 0.0 || self.outside_support(p) {
            return p;
        }
        match self {
            Hamiltonian::Zero => p,
            Hamiltonian::Concat(a, b) => {
                if t <= 0.5 {
                    a.inverse_flow(2.0 * t, p, step)
                } else {
                    a.inverse_flow(1.0, b.inverse_flow(2.0 * t - 1.0, p, step), step)
                }
            }
            Hamiltonian::Inverse(h) => h.flow(t, p, step),
            Hamiltonian::Compose { outer, inner } => inner.inverse_flow(t, outer.inverse_flow(t, p, step), step),
            Hamiltonian::Moved { inner, motion } => motion.apply(inner.inverse_flow(t, motion.apply_inverse(p), step)),
            _ => {
                let f = |s: f64, y: [f64; 2]| self.vector_field(s, y, step);
                rk4_integrate(&f, t, 0.0, p, step)
            }
        }
    }

    /// `2 int_0^1 int H_t dx dy dt` from closed forms and the algebraic
    /// rules (concatenation adds, reversal and inversion negate, area
    /// preserving changes of variables leave the integral unchanged).
    pub fn calabi(&self) -> f64 {
        match self {
            Hamiltonian::Zero => 0.0,
            Hamiltonian::Bump(b) => 2.0 * b.temporal.integral * b.spatial_integral(),
            Hamiltonian::Concat(a, b) | Hamiltonian::Compose { outer: a, inner: b } => a.calabi() + b.calabi(),
            Hamiltonian::Reversed(h) | Hamiltonian::Inverse(h) => -h.calabi(),
            Hamiltonian::Moved { inner, .. } => inner.calabi(),
            Hamiltonian::Sum(hs) => hs.iter().map(Hamiltonian::calabi).sum(),
        }
    }
}

/// Central-difference Jacobian `J[i][j] = d f_i / d p_j`.
pub(crate) fn jacobian<F: Fn([f64; 2]) -> [f64; 2]>(f: F, p: [f64; 2]) -> [[f64; 2]; 2] {
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let mut plus = p;
        let mut minus = p;
        plus[c] += JACOBIAN_EPS;
        minus[c] -= JACOBIAN_EPS;
        let (a, b) = (f(plus), f(minus));
        for r in 0..2 {
            j[r][c] = (a[r] - b[r]) / (2.0 * JACOBIAN_EPS);
        }
    }
    j
}
