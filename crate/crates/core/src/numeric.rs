//! Small numerical kernels shared by every module: compensated and
//! deterministic summation, Gauss-Legendre rules, the smooth step used for
//! temporal cutoffs, and a fixed-step RK4.

use rayon::prelude::*;

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Chunk length for deterministic parallel reductions. Fixed so the
/// grouping of partial sums never depends on the thread count.
pub const REDUCTION_CHUNK: usize = 4096;

/// Sum `f(i)` for `i in 0..len` in parallel with a result that is
/// independent of the rayon pool size: each fixed-size chunk is summed with
/// compensation, then the chunk sums are combined serially in order.
pub fn deterministic_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = len.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * REDUCTION_CHUNK;
            let end = (start + REDUCTION_CHUNK).min(len);
            (start..end).map(&f).collect::<CompensatedSum>().value()
        })
        .collect();
    partials.into_iter().collect::<CompensatedSum>().value()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// C-infinity step: 0 for x <= 0, 1 for x >= 1, strictly increasing between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let f = (-1.0 / x).exp();
    let g = (-1.0 / (1.0 - x)).exp();
    f / (f + g)
}

/// Derivative of [`smooth_step`]; a C-infinity bump supported in (0, 1)
/// with unit integral.
pub fn smooth_step_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let f = (-1.0 / x).exp();
    let g = (-1.0 / (1.0 - x)).exp();
    let s = f + g;
    if s == 0.0 {
        return 0.0;
    }
    f * g * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x))) / (s * s)
}

/// One classical RK4 step for an autonomous-in-form system `dy/dt = f(t, y)`.
#[inline]
pub fn rk4_step<const D: usize, F>(f: &F, t: f64, y: [f64; D], h: f64) -> [f64; D]
where
    F: Fn(f64, [f64; D]) -> [f64; D],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    let k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    let k4 = f(t + h, axpy(y, h, k3));
    let mut out = y;
    for i in 0..D {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[inline]
fn axpy<const D: usize>(y: [f64; D], a: f64, x: [f64; D]) -> [f64; D] {
    let mut out = y;
    for i in 0..D {
        out[i] += a * x[i];
    }
    out
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` with equal RK4 steps no
/// longer than `max_step`. Works backwards in time when `t1 < t0`.
pub fn rk4_integrate<const D: usize, F>(f: &F, t0: f64, t1: f64, y0: [f64; D], max_step: f64) -> [f64; D]
where
    F: Fn(f64, [f64; D]) -> [f64; D],
{
    let span = t1 - t0;
    if span == 0.0 {
        return y0;
    }
    let steps = (span.abs() / max_step).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut y = y0;
    for s in 0..steps {
        y = rk4_step(f, t0 + s as f64 * h, y, h);
    }
    y
}
