use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Open planar domain carrying the area form `dx ^ dy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceDomain {
    Disc { center: [f64; 2], radius: f64 },
    Square { center: [f64; 2], half_side: f64 },
}

impl SurfaceDomain {
    pub fn disc(center: [f64; 2], radius: f64) -> Result<Self> {
        let d = SurfaceDomain::Disc { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn square(center: [f64; 2], half_side: f64) -> Result<Self> {
        let d = SurfaceDomain::Square { center, half_side };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let (c, r) = match self {
            SurfaceDomain::Disc { center, radius } => (center, radius),
            SurfaceDomain::Square { center, half_side } => (center, half_side),
        };
        if !(c[0].is_finite() && c[1].is_finite() && r.is_finite() && *r > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "surface domain needs a finite center and positive size, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> [f64; 2] {
        match self {
            SurfaceDomain::Disc { center, .. } | SurfaceDomain::Square { center, .. } => *center,
        }
    }

    /// Half-width of the axis-aligned bounding square.
    pub fn half_extent(&self) -> f64 {
        match self {
            SurfaceDomain::Disc { radius, .. } => *radius,
            SurfaceDomain::Square { half_side, .. } => *half_side,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let c = self.center();
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        match self {
            SurfaceDomain::Disc { radius, .. } => dx * dx + dy * dy < radius * radius,
            SurfaceDomain::Square { half_side, .. } => dx.abs() < *half_side && dy.abs() < *half_side,
        }
    }

    /// Distance from `p` to the complement of the domain (negative outside).
    pub fn depth(&self, p: [f64; 2]) -> f64 {
        let c = self.center();
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        match self {
            SurfaceDomain::Disc { radius, .. } => radius - dx.hypot(dy),
            SurfaceDomain::Square { half_side, .. } => half_side - dx.abs().max(dy.abs()),
        }
    }

    /// Margin by which the closed disc `(center, radius)` sits inside the
    /// domain; positive when strictly inside.
    pub fn disc_margin(&self, center: [f64; 2], radius: f64) -> f64 {
        match self {
            SurfaceDomain::Disc { .. } => self.depth(center) - radius,
            SurfaceDomain::Square { half_side, center: c } => {
                let dx = (center[0] - c[0]).abs();
                let dy = (center[1] - c[1]).abs();
                half_side - dx.max(dy) - radius
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            SurfaceDomain::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
            SurfaceDomain::Square { half_side, .. } => 4.0 * half_side * half_side,
        }
    }
}

/// Orientation-preserving isometry of the plane, `p -> R(angle) p + shift`.
/// Preserves `dx ^ dy`, so it transports Hamiltonians to Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidMotion {
    pub angle: f64,
    pub shift: [f64; 2],
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self {
            angle: 0.0,
            shift: [0.0, 0.0],
        }
    }

    pub fn rotate(&self, v: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let r = self.rotate(p);
        [r[0] + self.shift[0], r[1] + self.shift[1]]
    }

    pub fn apply_inverse(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        let q = [p[0] - self.shift[0], p[1] - self.shift[1]];
        [c * q[0] + s * q[1], -s * q[0] + c * q[1]]
    }

    pub fn map_domain(&self, d: &SurfaceDomain) -> SurfaceDomain {
        match *d {
            SurfaceDomain::Disc { center, radius } => SurfaceDomain::Disc {
                center: self.apply(center),
                radius,
            },
            // a rotated square is not axis aligned; use its circumscribed square
            SurfaceDomain::Square { center, half_side } => {
                let (s, c) = self.angle.sin_cos();
                let grow = c.abs() + s.abs();
                SurfaceDomain::Square {
                    center: self.apply(center),
                    half_side: half_side * grow,
                }
            }
        }
    }
}
