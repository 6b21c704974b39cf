use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, VectorField3, PERIOD};
use crate::error::{LabError, Result};
use crate::numeric::smooth_step;

/// One real Fourier term `e_c (cos a cos(k.x) + sin b sin(k.x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierMode {
    pub wavevector: [i64; 3],
    /// Component index, 1-based (1 = x, 2 = y, 3 = z).
    pub component: usize,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Closed-form description of a test field, the ingestion format of run
/// configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`.
    Abc {
        a: f64,
        b: f64,
        c: f64,
    },
    Fourier {
        modes: Vec<FourierMode>,
    },
    Zero,
    Constant {
        value: [f64; 3],
    },
    /// Exact shear flow along `axis` whose axis component depends only on
    /// the next cyclic coordinate `s`: it equals 1 exactly for
    /// `s` in `[lo, hi]`, falls off smoothly over `ramp`, and is shifted so
    /// that its grid mean is zero. Inside the plateau it is the pure
    /// suspension field, so plugs can be inserted there.
    Channel {
        axis: usize,
        lo: f64,
        hi: f64,
        ramp: f64,
    },
}

/// Integer matrix with determinant one, acting on T^3 by `x -> M x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[[i64; 3]; 3]", into = "[[i64; 3]; 3]")]
pub struct Unimodular([[i64; 3]; 3]);

impl Unimodular {
    pub fn new(m: [[i64; 3]; 3]) -> Result<Self> {
        let d = det(&m);
        if d != 1 {
            return Err(LabError::InvalidParameter(format!(
                "matrix {m:?} has determinant {d}, expected 1"
            )));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> [[i64; 3]; 3] {
        self.0
    }

    /// Integer inverse (the adjugate, since the determinant is one).
    pub fn inverse(&self) -> Unimodular {
        let m = &self.0;
        let mut inv = [[0i64; 3]; 3];
        for (r, row) in inv.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                *v = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
            }
        }
        Unimodular(inv)
    }

    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [0, 1, 2].map(|r| (0..3).map(|c| m[r][c] as f64 * x[c]).sum())
    }

    fn transpose_apply(&self, k: [i64; 3]) -> [i64; 3] {
        let m = &self.0;
        [0, 1, 2].map(|c| (0..3).map(|r| m[r][c] * k[r]).sum())
    }
}

fn det(m: &[[i64; 3]; 3]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl TryFrom<[[i64; 3]; 3]> for Unimodular {
    type Error = LabError;
    fn try_from(m: [[i64; 3]; 3]) -> Result<Self> {
        Unimodular::new(m)
    }
}

impl From<Unimodular> for [[i64; 3]; 3] {
    fn from(u: Unimodular) -> Self {
        u.0
    }
}

fn plateau(s: f64, lo: f64, hi: f64, ramp: f64) -> f64 {
    if (lo..=hi).contains(&s) {
        1.0
    } else if s < lo {
        smooth_step((s - (lo - ramp)) / ramp)
    } else {
        smooth_step((hi + ramp - s) / ramp)
    }
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(LabError::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match self {
            FieldSpec::Abc { a, b, c } => {
                finite(*a, "abc amplitude a")?;
                finite(*b, "abc amplitude b")?;
                finite(*c, "abc amplitude c")
            }
            FieldSpec::Fourier { modes } => {
                for m in modes {
                    if !(1..=3).contains(&m.component) {
                        return Err(LabError::InvalidParameter(format!(
                            "fourier component index must be 1, 2 or 3, got {}",
                            m.component
                        )));
                    }
                    finite(m.cos, "fourier cos amplitude")?;
                    finite(m.sin, "fourier sin amplitude")?;
                }
                Ok(())
            }
            FieldSpec::Zero => Ok(()),
            FieldSpec::Constant { value } => value.iter().try_for_each(|v| finite(*v, "constant value")),
            FieldSpec::Channel { axis, lo, hi, ramp } => {
                if *axis > 2 {
                    return Err(LabError::InvalidParameter(format!(
                        "channel axis must be 0, 1 or 2, got {axis}"
                    )));
                }
                finite(*lo, "channel lo")?;
                finite(*hi, "channel hi")?;
                finite(*ramp, "channel ramp")?;
                if !(*ramp > 0.0 && lo < hi && lo - ramp >= 0.0 && hi + ramp <= PERIOD) {
                    return Err(LabError::InvalidParameter(format!(
                        "channel needs ramp > 0 and 0 <= lo - ramp < hi + ramp <= 2 pi, got lo={lo}, hi={hi}, ramp={ramp}"
                    )));
                }
                if lo - ramp <= 0.0 && hi + ramp >= PERIOD {
                    return Err(LabError::InvalidParameter(
                        "channel plateau covers the whole period".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// The field as a list of real Fourier terms, when it has one.
    pub fn modes(&self) -> Option<Vec<FourierMode>> {
        let m = |k: [i64; 3], component: usize, cos: f64, sin: f64| FourierMode {
            wavevector: k,
            component,
            cos,
            sin,
        };
        match self {
            FieldSpec::Abc { a, b, c } => Some(vec![
                m([0, 0, 1], 1, 0.0, *a),
                m([0, 1, 0], 1, *c, 0.0),
                m([1, 0, 0], 2, 0.0, *b),
                m([0, 0, 1], 2, *a, 0.0),
                m([0, 1, 0], 3, 0.0, *c),
                m([1, 0, 0], 3, *b, 0.0),
            ]),
            FieldSpec::Fourier { modes } => Some(modes.clone()),
            FieldSpec::Zero => Some(Vec::new()),
            FieldSpec::Constant { value } => Some(
                (0..3)
                    .filter(|&c| value[c] != 0.0)
                    .map(|c| m([0, 0, 0], c + 1, value[c], 0.0))
                    .collect(),
            ),
            FieldSpec::Channel { .. } => None,
        }
    }

    /// Fails with the first wavevector that the grid cannot resolve
    /// (every component must satisfy `|k_i| < n/2`).
    pub fn check_resolution(&self, grid: GridSpec) -> Result<()> {
        let half = (grid.n() / 2) as i64;
        if let Some(modes) = self.modes() {
            for m in modes {
                if m.wavevector.iter().any(|k| k.abs() >= half) {
                    return Err(LabError::Unresolved {
                        wavevector: m.wavevector,
                        n: grid.n(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Closed-form value at `p` for mode-based kinds.
    pub fn evaluate(&self, p: [f64; 3]) -> Option<[f64; 3]> {
        let modes = self.modes()?;
        Some(eval_modes(&modes, p))
    }

    /// Exact point samples of the field on `grid`.
    pub fn materialize(&self, grid: GridSpec) -> Result<VectorField3> {
        self.validate()?;
        self.check_resolution(grid)?;
        match self {
            FieldSpec::Zero => Ok(VectorField3::zeros(grid)),
            FieldSpec::Abc { a, b, c } => {
                let (a, b, c) = (*a, *b, *c);
                Ok(VectorField3::from_fn(grid, move |p| {
                    let [x, y, z] = p;
                    [
                        a * z.sin() + c * y.cos(),
                        b * x.sin() + a * z.cos(),
                        c * y.sin() + b * x.cos(),
                    ]
                }))
            }
            FieldSpec::Channel { axis, lo, hi, ramp } => {
                let (axis, lo, hi, ramp) = (*axis, *lo, *hi, *ramp);
                let across = (axis + 1) % 3;
                let n = grid.n();
                let profile: Vec<f64> = (0..n).map(|i| plateau(grid.coord(i), lo, hi, ramp)).collect();
                let mean = profile
                    .iter()
                    .copied()
                    .collect::<crate::numeric::CompensatedSum>()
                    .value()
                    / n as f64;
                let shifted: Vec<f64> = profile
                    .iter()
                    .map(|&b| if b == 1.0 { 1.0 } else { (b - mean) / (1.0 - mean) })
                    .collect();
                Ok(VectorField3::from_fn(grid, move |p| {
                    let i = (p[across] / grid.spacing()).round() as usize % n;
                    let mut v = [0.0; 3];
                    v[axis] = shifted[i];
                    v
                }))
            }
            _ => {
                let modes = self.modes().expect("mode-based kind");
                Ok(VectorField3::from_fn(grid, move |p| eval_modes(&modes, p)))
            }
        }
    }

    /// Pullback by the torus automorphism `x -> M x`: the field
    /// `x -> M^{-1} W(M x)`, again as a list of Fourier terms.
    pub fn pullback(&self, m: &Unimodular) -> Result<FieldSpec> {
        self.validate()?;
        let modes = self.modes().ok_or_else(|| {
            LabError::InvalidParameter("pullback needs a mode-based field (abc, fourier, zero, constant)".into())
        })?;
        let inv = m.inverse().matrix();
        let mut out = Vec::new();
        for mode in modes {
            let k = m.transpose_apply(mode.wavevector);
            let c = mode.component - 1;
            for (d, row) in inv.iter().enumerate() {
                let f = row[c] as f64;
                if f != 0.0 {
                    out.push(FourierMode {
                        wavevector: k,
                        component: d + 1,
                        cos: f * mode.cos,
                        sin: f * mode.sin,
                    });
                }
            }
        }
        Ok(FieldSpec::Fourier { modes: out })
    }
}

fn eval_modes(modes: &[FourierMode], p: [f64; 3]) -> [f64; 3] {
    let mut v = [0.0; 3];
    for m in modes {
        let phase = m.wavevector[0] as f64 * p[0] + m.wavevector[1] as f64 * p[1] + m.wavevector[2] as f64 * p[2];
        let (s, c) = phase.sin_cos();
        v[m.component - 1] += m.cos * c + m.sin * s;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abc_modes_agree_with_closed_form() {
        let spec = FieldSpec::Abc {
            a: 0.7,
            b: -1.3,
            c: 2.1,
        };
        let grid = GridSpec::new(8).unwrap();
        let w = spec.materialize(grid).unwrap();
        let modes = FieldSpec::Fourier {
            modes: spec.modes().unwrap(),
        };
        let v = modes.materialize(grid).unwrap();
        assert!(w.max_distance(&v).unwrap() < 1e-14);
    }

    #[test]
    fn unresolved_mode_names_wavevector() {
        let spec = FieldSpec::Fourier {
            modes: vec![FourierMode {
                wavevector: [0, 4, 1],
                component: 1,
                cos: 1.0,
                sin: 0.0,
            }],
        };
        let err = spec.materialize(GridSpec::new(8).unwrap()).unwrap_err();
        assert_eq!(
            err,
            LabError::Unresolved {
                wavevector: [0, 4, 1],
                n: 8
            }
        );
    }

    #[test]
    fn unimodular_inverse_round_trips() {
        let m = Unimodular::new([[1, 1, 0], [0, 1, 0], [2, 3, 1]]).unwrap();
        let inv = m.inverse();
        let x = [0.3, -1.2, 2.5];
        let y = inv.apply(m.apply(x));
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
        assert!(Unimodular::new([[2, 0, 0], [0, 1, 0], [0, 0, 1]]).is_err());
    }

    #[test]
    fn pullback_matches_pointwise_definition() {
        let spec = FieldSpec::Abc {
            a: 1.0,
            b: 0.5,
            c: -0.25,
        };
        let m = Unimodular::new([[1, 1, 0], [0, 1, 1], [0, 0, 1]]).unwrap();
        let pulled = spec.pullback(&m).unwrap();
        let inv = m.inverse().matrix();
        for p in [[0.1, 0.2, 0.3], [2.0, -1.0, 4.5]] {
            let w = spec.evaluate(m.apply(p)).unwrap();
            let expect = [0, 1, 2].map(|r| (0..3).map(|c| inv[r][c] as f64 * w[c]).sum::<f64>());
            let got = pulled.evaluate(p).unwrap();
            for i in 0..3 {
                assert!((expect[i] - got[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_is_exact_suspension_on_plateau() {
        let spec = FieldSpec::Channel {
            axis: 0,
            lo: 2.0,
            hi: 4.0,
            ramp: 1.0,
        };
        let grid = GridSpec::new(32).unwrap();
        let w = spec.materialize(grid).unwrap();
        assert!(w.component(0).mean().abs() < 1e-15);
        for idx in 0..grid.len() {
            let y = grid.position(idx)[1];
            let v = w.at(idx);
            assert_eq!(v[1], 0.0);
            assert_eq!(v[2], 0.0);
            if (2.0..=4.0).contains(&y) {
                assert_eq!(v[0], 1.0);
            }
        }
    }
}
