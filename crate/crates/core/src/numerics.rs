//! Sampled functions, trapezoid quadrature and the CDF-inversion solver for
//! `df/du = N / g(f(u))`.
//!
//! The solver treats `u(f)` as a cumulative distribution: `N` is the integral
//! of `g` over the range of `f`, `u(f)` is the normalized running integral,
//! and `f(u)` is recovered by inverting that table.

use crate::error::{Error, Result};

/// Default number of grid nodes used when a continuous `g` is tabulated.
pub const DEFAULT_GRID_POINTS: usize = 65_536;

/// Per-step ramp used to make flat cumulative tables strictly increasing.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    pub grid_points: usize,
    pub tie_epsilon: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            tie_epsilon: TIE_EPSILON,
        }
    }
}

/// A function known at strictly increasing abscissae, evaluated by linear
/// interpolation. Outside the sampled range the end values are held.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SampledFunction {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "abscissae ({}) and ordinates ({}) differ in length",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::invalid("a sampled function needs at least 2 points"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("sampled function contains non-finite values"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("abscissae must be strictly increasing"));
        }
        Ok(Self { x, y })
    }

    /// Tabulates `f` on `n` uniformly spaced nodes covering `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(a < b) || n < 2 {
            return Err(Error::invalid(format!(
                "cannot tabulate on [{a}, {b}] with {n} nodes"
            )));
        }
        let x = uniform_grid(a, b, n);
        let y = x.iter().map(|&t| f(t)).collect();
        Self::new(x, y)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.x
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let j = self.x.partition_point(|&v| v <= t) - 1;
        let (x0, x1) = (self.x[j], self.x[j + 1]);
        let w = (t - x0) / (x1 - x0);
        self.y[j] + w * (self.y[j + 1] - self.y[j])
    }

    /// Slope of the interpolant on the cell containing `t`.
    pub fn slope(&self, t: f64) -> f64 {
        let n = self.x.len();
        let j = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        (self.y[j + 1] - self.y[j]) / (self.x[j + 1] - self.x[j])
    }
}

pub(crate) fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
        .collect()
}

/// Samples of `g` restricted to `[a, b]`, with interpolated end nodes.
fn restrict(g: &SampledFunction, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a < b) {
        return Err(Error::domain(format!("integration bounds must satisfy a < b (got {a}, {b})")));
    }
    let (lo, hi) = g.domain();
    let tol = 1e-12 * (hi - lo).abs().max(1.0);
    if a < lo - tol || b > hi + tol {
        return Err(Error::domain(format!(
            "bounds [{a}, {b}] outside sampled range [{lo}, {hi}]"
        )));
    }
    let mut x = vec![a];
    let mut y = vec![g.eval(a)];
    for (&xi, &yi) in g.x.iter().zip(&g.y) {
        if xi > a && xi < b {
            x.push(xi);
            y.push(yi);
        }
    }
    x.push(b);
    y.push(g.eval(b));
    Ok((x, y))
}

/// Replaces a vanishing end value by the interpolated value at the middle of
/// the boundary cell, so downstream divisions by `g` never see an exact zero.
fn lift_endpoints(y: &mut [f64]) {
    let n = y.len();
    if y[0] <= 0.0 {
        y[0] = 0.5 * (y[0] + y[1]);
    }
    if y[n - 1] <= 0.0 {
        y[n - 1] = 0.5 * (y[n - 1] + y[n - 2]);
    }
}

fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut c = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    c.push(0.0);
    for j in 1..x.len() {
        acc += 0.5 * (x[j] - x[j - 1]) * (y[j] + y[j - 1]);
        c.push(acc);
    }
    c
}

/// Composite trapezoid integral of `g` over `[a, b]`.
///
/// Uses the same endpoint rule as [`solve_cdf_ode`], so the readout count of a
/// solved path equals this integral bit for bit.
pub fn integrate(g: &SampledFunction, a: f64, b: f64) -> Result<f64> {
    let (x, mut y) = restrict(g, a, b)?;
    lift_endpoints(&mut y);
    Ok(*cumulative_trapezoid(&x, &y).last().unwrap())
}

/// Solution of `df/du = N / g(f)` on `f in (f_min, f_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSolution {
    pub n_total: f64,
    pub u_of_f: SampledFunction,
    pub f_of_u: SampledFunction,
    pub f_min: f64,
    pub f_max: f64,
}

impl CdfSolution {
    /// `g` at the nodes of `u_of_f`, after the endpoint rule.
    pub fn density_nodes(&self) -> Vec<f64> {
        let x = self.u_of_f.abscissae();
        let u = self.u_of_f.ordinates();
        let mut out = Vec::with_capacity(x.len());
        let n = x.len();
        for j in 0..n {
            let s = if j == 0 {
                (u[1] - u[0]) / (x[1] - x[0])
            } else if j == n - 1 {
                (u[n - 1] - u[n - 2]) / (x[n - 1] - x[n - 2])
            } else {
                (u[j + 1] - u[j - 1]) / (x[j + 1] - x[j - 1])
            };
            out.push(s * self.n_total);
        }
        out
    }
}

/// Strictly increasing copy of `v`: running maximum plus an epsilon ramp.
fn enforce_increasing(v: &mut [f64], eps: f64) -> bool {
    let mut touched = false;
    for j in 1..v.len() {
        if v[j] <= v[j - 1] {
            v[j] = v[j - 1] + eps;
            touched = true;
        }
    }
    touched
}

pub fn solve_cdf_ode(g: &SampledFunction, f_min: f64, f_max: f64) -> Result<CdfSolution> {
    solve_cdf_ode_with(g, f_min, f_max, &NumericsConfig::default())
}

pub fn solve_cdf_ode_with(
    g: &SampledFunction,
    f_min: f64,
    f_max: f64,
    cfg: &NumericsConfig,
) -> Result<CdfSolution> {
    if !(f_min < f_max) {
        return Err(Error::invalid(format!("f_min ({f_min}) must be below f_max ({f_max})")));
    }
    let (x, mut y) = restrict(g, f_min, f_max).map_err(|e| Error::invalid(e.to_string()))?;
    if let Some(j) = (1..y.len() - 1).find(|&j| !(y[j] > 0.0)) {
        return Err(Error::invalid(format!(
            "g must be positive on the open interval; g({}) = {}",
            x[j], y[j]
        )));
    }
    if y[0] < 0.0 || y[y.len() - 1] < 0.0 {
        return Err(Error::invalid("g is negative at an endpoint"));
    }
    lift_endpoints(&mut y);
    let c = cumulative_trapezoid(&x, &y);
    let n_total = *c.last().unwrap();
    if !(n_total > 0.0) {
        return Err(Error::invalid(format!("integral of g is not positive ({n_total})")));
    }
    let mut u: Vec<f64> = c.iter().map(|v| v / n_total).collect();
    if enforce_increasing(&mut u, cfg.tie_epsilon) {
        let last = *u.last().unwrap();
        u.iter_mut().for_each(|v| *v /= last);
    }
    let last = u.len() - 1;
    u[last] = 1.0;
    let u_of_f = SampledFunction::new(x.clone(), u.clone())?;
    let f_of_u = SampledFunction::new(u, x)?;
    Ok(CdfSolution {
        n_total,
        u_of_f,
        f_of_u,
        f_min,
        f_max,
    })
}

/// Inverse of a nondecreasing sampled function, resampled on `points`
/// uniform nodes of its ordinate range.
///
/// Flat runs are tolerated (and broken by an epsilon ramp); any decrease
/// larger than `1e-9` of the ordinate span is rejected.
pub fn invert_monotone(f: &SampledFunction, points: usize) -> Result<SampledFunction> {
    if points < 2 {
        return Err(Error::invalid("inverse grid needs at least 2 points"));
    }
    let y = f.ordinates();
    let span = (y[y.len() - 1] - y[0]).abs();
    let tol = 1e-9 * span.max(f64::MIN_POSITIVE);
    if let Some(w) = y.windows(2).find(|w| w[1] < w[0] - tol) {
        return Err(Error::invalid(format!(
            "function is not monotone: {} follows {}",
            w[1], w[0]
        )));
    }
    if !(y[y.len() - 1] > y[0]) {
        return Err(Error::invalid("function is constant; no inverse exists"));
    }
    let mut yy = y.to_vec();
    enforce_increasing(&mut yy, TIE_EPSILON * span);
    let swapped = SampledFunction::new(yy, f.abscissae().to_vec())?;
    let (a, b) = (y[0], y[y.len() - 1]);
    SampledFunction::from_fn(a, b, points, |u| swapped.eval(u))
}
