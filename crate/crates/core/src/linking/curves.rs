use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::numeric::CompensatedSum;

type V3 = [f64; 3];

#[inline]
fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

/// Closed polygon: the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    points: Vec<V3>,
}

impl ClosedCurve {
    /// Checks finiteness, at least three vertices, and that no segment is
    /// longer than an eighth of the total length.
    pub fn new(points: Vec<V3>) -> Result<Self> {
        let c = Self::unchecked(points)?;
        let (len, max) = (c.length(), c.max_segment());
        if max >= len / 8.0 {
            return Err(LabError::InvalidParameter(format!(
                "curve segment of length {max:.3e} exceeds an eighth of the curve length {len:.3e}"
            )));
        }
        Ok(c)
    }

    /// Closed polygon without the segment-length condition (trajectory
    /// loops have one long closing chord).
    pub fn unchecked(points: Vec<V3>) -> Result<Self> {
        if points.len() < 3 {
            return Err(LabError::InvalidParameter(
                "a closed curve needs at least 3 points".into(),
            ));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(LabError::InvalidParameter("curve points must be finite".into()));
        }
        Ok(Self { points })
    }

    /// Circle `center + r (cos t e1 + sin t e2)` with `segments` vertices.
    pub fn circle(center: V3, e1: V3, e2: V3, radius: f64, segments: usize) -> Result<Self> {
        let points = (0..segments)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / segments as f64;
                let (s, c) = t.sin_cos();
                [0, 1, 2].map(|i| center[i] + radius * (c * e1[i] + s * e2[i]))
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[V3] {
        &self.points
    }

    pub fn segment_count(&self) -> usize {
        self.points.len()
    }

    /// Segment `k` as `(start, end)`.
    #[inline]
    pub fn segment(&self, k: usize) -> (V3, V3) {
        let n = self.points.len();
        (self.points[k], self.points[(k + 1) % n])
    }

    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|k| {
                let (a, b) = self.segment(k);
                norm(sub(b, a))
            })
            .sum()
    }

    pub fn max_segment(&self) -> f64 {
        (0..self.segment_count())
            .map(|k| {
                let (a, b) = self.segment(k);
                norm(sub(b, a))
            })
            .fold(0.0, f64::max)
    }

    /// Image under `x -> R x + shift`.
    pub fn transformed(&self, rotation: [[f64; 3]; 3], shift: V3) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| [0, 1, 2].map(|r| dot(rotation[r], *p) + shift[r]))
            .collect();
        Self { points }
    }

    /// Smallest distance between a segment of `self` and `segment`.
    pub fn distance_to_segment(&self, segment: (V3, V3)) -> f64 {
        (0..self.segment_count())
            .map(|k| segment_distance(self.segment(k), segment))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Smallest distance between two segments.
pub fn segment_distance(s: (V3, V3), t: (V3, V3)) -> f64 {
    let d1 = sub(s.1, s.0);
    let d2 = sub(t.1, t.0);
    let r = sub(s.0, t.0);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);
    let (sc, tc);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return norm(r);
    }
    if a <= f64::EPSILON {
        sc = 0.0;
        tc = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(d1, r);
        if e <= f64::EPSILON {
            tc = 0.0;
            sc = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            sc = s0;
            tc = t0;
        }
    }
    let p = [0, 1, 2].map(|i| s.0[i] + sc * d1[i]);
    let q = [0, 1, 2].map(|i| t.0[i] + tc * d2[i]);
    norm(sub(p, q))
}

/// Smallest vertex-to-vertex distance between two curves.
fn vertex_distance(a: &ClosedCurve, b: &ClosedCurve) -> f64 {
    a.points
        .par_iter()
        .map(|p| b.points.iter().map(|q| norm(sub(*p, *q))).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Gauss linking integral `1/(4 pi) sum (m_i - m_j) . (d_i x d_j) / |m_i - m_j|^3`
/// over segment midpoints `m` and segment vectors `d`.
///
/// Requires the curves to stay more than ten times the longest segment
/// apart, where the midpoint rule is reliable.
pub fn gauss_linking(c1: &ClosedCurve, c2: &ClosedCurve) -> Result<f64> {
    let bound = 10.0 * c1.max_segment().max(c2.max_segment());
    let distance = vertex_distance(c1, c2);
    if distance <= bound {
        return Err(LabError::CurvesTooClose { distance, bound });
    }
    let mids = |c: &ClosedCurve| -> Vec<(V3, V3)> {
        (0..c.segment_count())
            .map(|k| {
                let (a, b) = c.segment(k);
                (
                    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])],
                    sub(b, a),
                )
            })
            .collect()
    };
    let (s1, s2) = (mids(c1), mids(c2));
    // the integrand is symmetric, so accumulating in a canonical order makes
    // swapping the arguments bit-identical
    let (outer, inner) = if canonical_first(c1, c2) {
        (&s1, &s2)
    } else {
        (&s2, &s1)
    };
    let rows: Vec<f64> = outer
        .par_iter()
        .map(|&(m1, d1)| {
            inner
                .iter()
                .map(|&(m2, d2)| {
                    let r = sub(m1, m2);
                    let l = norm(r);
                    dot(r, cross(d1, d2)) / (l * l * l)
                })
                .collect::<CompensatedSum>()
                .value()
        })
        .collect();
    Ok(rows.into_iter().collect::<CompensatedSum>().value() / (4.0 * PI))
}

fn canonical_first(a: &ClosedCurve, b: &ClosedCurve) -> bool {
    for (p, q) in a.points.iter().zip(&b.points) {
        for i in 0..3 {
            if p[i] != q[i] {
                return p[i] < q[i];
            }
        }
    }
    a.points.len() <= b.points.len()
}

/// Exact linking number of two disjoint closed polygons: the sum over all
/// segment pairs of the signed solid angle each pair subtends, divided by
/// `4 pi`. Integer up to rounding for any disjoint polygons, with no
/// proximity requirement.
pub fn polygon_linking(c1: &ClosedCurve, c2: &ClosedCurve) -> f64 {
    let n1 = c1.segment_count();
    let q = &c2.points;
    let m = q.len();
    let rows: Vec<f64> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let (p1, p2) = c1.segment(i);
            let r12 = sub(p2, p1);
            let mut acc = CompensatedSum::new();
            let mut a_prev = sub(q[0], p1);
            let mut b_prev = sub(q[0], p2);
            for j in 0..m {
                let next = q[(j + 1) % m];
                let a_next = sub(next, p1);
                let b_next = sub(next, p2);
                acc.add(segment_pair_solid_angle(a_prev, a_next, b_prev, b_next, r12));
                a_prev = a_next;
                b_prev = b_next;
            }
            acc.value()
        })
        .collect();
    rows.into_iter().collect::<CompensatedSum>().value() / (4.0 * PI)
}

/// Signed solid angle for segments `p1 p2` and `p3 p4`, given
/// `r13, r14, r23, r24` and `r12`.
#[inline]
fn segment_pair_solid_angle(r13: V3, r14: V3, r23: V3, r24: V3, r12: V3) -> f64 {
    let faces = [cross(r13, r14), cross(r14, r24), cross(r24, r23), cross(r23, r13)];
    let mut unit = [[0.0; 3]; 4];
    for (u, f) in unit.iter_mut().zip(faces) {
        let l = norm(f);
        if l == 0.0 {
            return 0.0;
        }
        *u = [f[0] / l, f[1] / l, f[2] / l];
    }
    let mut omega = 0.0;
    for k in 0..4 {
        omega += dot(unit[k], unit[(k + 1) % 4]).clamp(-1.0, 1.0).asin();
    }
    let r34 = sub(r14, r13);
    let s = dot(cross(r34, r12), r13);
    if s > 0.0 {
        omega
    } else if s < 0.0 {
        -omega
    } else {
        0.0
    }
}
