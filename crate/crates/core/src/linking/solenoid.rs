use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Axisymmetric divergence-free field supported in a solid torus of major
/// radius `R0` and minor radius `a` around the z-axis.
///
/// With `s` the distance to the core circle and `u = s^2 / a^2 < 1`:
///
/// * toroidal part `B_phi = t (r / R0) (1 - u^q)`,
/// * poloidal part `curl(psi / r e_phi)` with
///   `psi = p a^2 F(u)`, `F(u) = q/(q+1) - u + u^(q+1)/(q+1)`,
///   i.e. `B_r = 2 p (1 - u^q) z / r`, `B_z = -2 p (1 - u^q) (r - R0) / r`.
///
/// Both parts vanish continuously on the boundary of the support and the
/// field lines lie on the tori `u = const`. The mirrored variant is the
/// pushforward under `z -> -z`, which negates the helicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solenoid {
    pub major_radius: f64,
    pub minor_radius: f64,
    pub toroidal: f64,
    pub poloidal: f64,
    pub exponent: u32,
    #[serde(default)]
    pub mirrored: bool,
}

impl Solenoid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.major_radius.is_finite()
            && self.minor_radius.is_finite()
            && self.minor_radius > 0.0
            && self.minor_radius < self.major_radius
            && self.toroidal.is_finite()
            && self.poloidal.is_finite()
            && self.exponent >= 1;
        if !ok {
            return Err(LabError::InvalidParameter(format!(
                "solenoid needs 0 < minor_radius < major_radius, finite amplitudes and exponent >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            toroidal: self.toroidal * factor,
            poloidal: self.poloidal * factor,
            ..*self
        }
    }

    pub fn mirror(&self) -> Self {
        Self {
            mirrored: !self.mirrored,
            ..*self
        }
    }

    /// `u = s^2 / a^2` at `x`.
    fn normalized_radius(&self, x: [f64; 3]) -> (f64, f64) {
        let r = x[0].hypot(x[1]);
        let dr = r - self.major_radius;
        (r, (dr * dr + x[2] * x[2]) / (self.minor_radius * self.minor_radius))
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        self.normalized_radius(x).1 < 1.0
    }

    pub fn evaluate(&self, x: [f64; 3]) -> [f64; 3] {
        if self.mirrored {
            let v = self.evaluate_upright([x[0], x[1], -x[2]]);
            [v[0], v[1], -v[2]]
        } else {
            self.evaluate_upright(x)
        }
    }

    fn evaluate_upright(&self, x: [f64; 3]) -> [f64; 3] {
        let (r, u) = self.normalized_radius(x);
        if u >= 1.0 || r == 0.0 {
            return [0.0; 3];
        }
        let w = 1.0 - u.powi(self.exponent as i32);
        let b_phi = self.toroidal * (r / self.major_radius) * w;
        let b_r = 2.0 * self.poloidal * w * x[2] / r;
        let b_z = -2.0 * self.poloidal * w * (r - self.major_radius) / r;
        let (c, s) = (x[0] / r, x[1] / r);
        [b_r * c - b_phi * s, b_r * s + b_phi * c, b_z]
    }

    /// Central-difference divergence at `x`.
    pub fn divergence(&self, x: [f64; 3], eps: f64) -> f64 {
        (0..3)
            .map(|a| {
                let mut p = x;
                let mut m = x;
                p[a] += eps;
                m[a] -= eps;
                (self.evaluate(p)[a] - self.evaluate(m)[a]) / (2.0 * eps)
            })
            .sum()
    }

    /// Volume of the support, `2 pi^2 R0 a^2`.
    pub fn support_volume(&self) -> f64 {
        2.0 * PI * PI * self.major_radius * self.minor_radius * self.minor_radius
    }

    /// Exact helicity `2 int psi B_phi / r = 4 pi^2 t p a^4 int_0^1 F (1 - u^q) du`.
    pub fn helicity_closed_form(&self) -> f64 {
        let q = self.exponent as f64;
        let int_f = q / (q + 1.0) - 0.5 + 1.0 / ((q + 1.0) * (q + 2.0));
        let int_f_uq = q / ((q + 1.0) * (q + 1.0)) - 1.0 / (q + 2.0) + 1.0 / ((q + 1.0) * (2.0 * q + 2.0));
        let a4 = self.minor_radius.powi(4);
        let h = 4.0 * PI * PI * self.toroidal * self.poloidal * a4 * (int_f - int_f_uq);
        if self.mirrored {
            -h
        } else {
            h
        }
    }

    /// Axis-aligned bounding box `[lo, hi]` of the support.
    pub fn bounding_box(&self) -> [[f64; 2]; 3] {
        let e = self.major_radius + self.minor_radius;
        [[-e, e], [-e, e], [-self.minor_radius, self.minor_radius]]
    }
}
