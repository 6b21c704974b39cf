//! Compactly supported time-dependent Hamiltonians on planar domains,
//! their isotopies and the Calabi invariant.

mod calabi;
mod domain;
mod hamiltonian;

pub use calabi::{calabi_quadrature, CalabiQuadrature};
pub use domain::{RigidMotion, SurfaceDomain};
pub use hamiltonian::{Bump, BumpShape, Hamiltonian, TemporalProfile};

use crate::error::{LabError, Result};

/// Default RK4 step for isotopies.
pub const DEFAULT_STEP: f64 = 1e-3;

/// A Hamiltonian together with the domain it lives on and the integrator
/// step used for its isotopy.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentHamiltonian {
    domain: SurfaceDomain,
    generator: Hamiltonian,
    step: f64,
}

impl TimeDependentHamiltonian {
    /// Fails unless every support disc lies strictly inside `domain`.
    pub fn new(domain: SurfaceDomain, generator: Hamiltonian) -> Result<Self> {
        domain.validate()?;
        generator.validate()?;
        for (c, r) in generator.supports() {
            let margin = domain.disc_margin(c, r);
            if margin <= 0.0 {
                return Err(LabError::SupportLeak(format!(
                    "support disc centered at {c:?} with radius {r} is not strictly inside {domain:?}"
                )));
            }
        }
        Ok(Self {
            domain,
            generator,
            step: DEFAULT_STEP,
        })
    }

    pub fn zero(domain: SurfaceDomain) -> Result<Self> {
        Self::new(domain, Hamiltonian::Zero)
    }

    pub fn bump(domain: SurfaceDomain, bump: Bump) -> Result<Self> {
        Self::new(domain, Hamiltonian::Bump(bump))
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0 && step <= 0.1) {
            return Err(LabError::InvalidParameter(format!(
                "isotopy step must lie in (0, 0.1], got {step}"
            )));
        }
        self.step = step;
        Ok(self)
    }

    pub fn domain(&self) -> &SurfaceDomain {
        &self.domain
    }

    pub fn generator(&self) -> &Hamiltonian {
        &self.generator
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn is_zero(&self) -> bool {
        self.generator.is_zero()
    }

    /// Smallest distance from a support disc to the boundary of the domain.
    pub fn support_margin(&self) -> f64 {
        self.generator
            .supports()
            .iter()
            .map(|&(c, r)| self.domain.disc_margin(c, r))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn value(&self, t: f64, p: [f64; 2]) -> f64 {
        self.generator.value(t, p, self.step)
    }

    pub fn flow(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        self.generator.flow(t, p, self.step)
    }

    pub fn inverse_flow(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        self.generator.inverse_flow(t, p, self.step)
    }

    /// Same Hamiltonian transported by a rigid motion onto `domain`.
    pub fn moved(&self, motion: RigidMotion, domain: SurfaceDomain) -> Result<Self> {
        Self::new(
            domain,
            Hamiltonian::Moved {
                inner: Box::new(self.generator.clone()),
                motion,
            },
        )?
        .with_step(self.step)
    }
}

/// `X_H(t, p) = (dH/dy, -dH/dx)`.
pub fn ham_vector_field(h: &TimeDependentHamiltonian, t: f64, p: [f64; 2]) -> Result<[f64; 2]> {
    if !h.domain.contains(p) {
        return Err(LabError::OutsideDomain { x: p[0], y: p[1] });
    }
    Ok(h.generator.vector_field(t, p, h.step))
}

/// `phi^t(p)` by fixed-step RK4.
pub fn integrate_isotopy(h: &TimeDependentHamiltonian, p: [f64; 2], t: f64) -> Result<[f64; 2]> {
    if !(0.0..=1.0).contains(&t) {
        return Err(LabError::InvalidParameter(format!(
            "isotopy time must lie in [0, 1], got {t}"
        )));
    }
    Ok(h.flow(t, p))
}

/// `Cal = 2 int_0^1 int_Sigma H dt ^ omega`.
pub fn calabi(h: &TimeDependentHamiltonian) -> f64 {
    h.generator.calabi()
}

fn same_domain(a: &TimeDependentHamiltonian, b: &TimeDependentHamiltonian) -> Result<()> {
    if a.domain != b.domain {
        return Err(LabError::DomainMismatch(format!("{:?} vs {:?}", a.domain, b.domain)));
    }
    Ok(())
}

/// The isotopy `phi_1^t` followed by `phi_2^t o phi_1^1`, reparametrised
/// into `[0, 1]`.
pub fn concatenate(a: &TimeDependentHamiltonian, b: &TimeDependentHamiltonian) -> Result<TimeDependentHamiltonian> {
    same_domain(a, b)?;
    Ok(TimeDependentHamiltonian {
        domain: a.domain,
        generator: Hamiltonian::Concat(Box::new(a.generator.clone()), Box::new(b.generator.clone())),
        step: a.step.min(b.step),
    })
}

/// `-H(1 - t, p)`: the isotopy run backwards from its time-one map.
pub fn time_reversed(h: &TimeDependentHamiltonian) -> TimeDependentHamiltonian {
    TimeDependentHamiltonian {
        domain: h.domain,
        generator: Hamiltonian::Reversed(Box::new(h.generator.clone())),
        step: h.step,
    }
}

/// `-H(t, phi^t p)`, generating the pointwise inverse isotopy.
pub fn inverse_isotopy(h: &TimeDependentHamiltonian) -> TimeDependentHamiltonian {
    TimeDependentHamiltonian {
        domain: h.domain,
        generator: Hamiltonian::Inverse(Box::new(h.generator.clone())),
        step: h.step,
    }
}

/// Generator of `outer^t o inner^t`.
pub fn compose(outer: &TimeDependentHamiltonian, inner: &TimeDependentHamiltonian) -> Result<TimeDependentHamiltonian> {
    same_domain(outer, inner)?;
    Ok(TimeDependentHamiltonian {
        domain: outer.domain,
        generator: Hamiltonian::Compose {
            outer: Box::new(outer.generator.clone()),
            inner: Box::new(inner.generator.clone()),
        },
        step: outer.step.min(inner.step),
    })
}

/// Determinant of the central-difference Jacobian of `phi^t` at `p`.
pub fn isotopy_jacobian_determinant(h: &TimeDependentHamiltonian, p: [f64; 2], t: f64, eps: f64) -> f64 {
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let mut plus = p;
        let mut minus = p;
        plus[c] += eps;
        minus[c] -= eps;
        let (a, b) = (h.flow(t, plus), h.flow(t, minus));
        for r in 0..2 {
            j[r][c] = (a[r] - b[r]) / (2.0 * eps);
        }
    }
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}
