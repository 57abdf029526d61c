//! Arc-length speed profile and raster sampling of a parametric k-space curve
//! under gradient amplitude and slew limits.
//!
//! The curve is tabulated on a fine parameter grid. The speed cap at each
//! node is the smaller of the amplitude limit and the curvature limit
//! `sqrt(a_max / kappa)`; forward and backward passes then bound the
//! tangential acceleration by whatever the normal acceleration leaves of
//! `a_max`. The readout starts from rest and ends at speed.

use crate::error::{Error, Result};
use crate::vec3::{cross, norm, scale, sub, Vec3};

use super::HardwareConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Fraction of the slew limit used for the first profile.
    pub slew_margin: f64,
    /// Slew-margin reductions tried before giving up.
    pub max_refinements: usize,
    pub min_nodes: usize,
    pub nodes_per_turn: usize,
    pub max_nodes: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            slew_margin: 0.95,
            max_refinements: 20,
            min_nodes: 2048,
            nodes_per_turn: 48,
            max_nodes: 1 << 16,
        }
    }
}

impl ProfileOptions {
    pub(crate) fn nodes_for_turns(&self, turns: f64) -> usize {
        let want = self.min_nodes as f64 + self.nodes_per_turn as f64 * turns.max(0.0);
        (want.ceil() as usize).clamp(self.min_nodes, self.max_nodes)
    }
}

pub(crate) struct SampledCurve {
    param: Vec<f64>,
    arc: Vec<f64>,
    curvature: Vec<f64>,
}

impl SampledCurve {
    pub(crate) fn new(curve: &dyn Fn(f64) -> Vec3, p_max: f64, nodes: usize) -> Self {
        let nodes = nodes.max(3);
        let param: Vec<f64> = crate::numerics::uniform_grid(0.0, p_max, nodes);
        let pts: Vec<Vec3> = param.iter().map(|&p| curve(p)).collect();
        let mut arc = Vec::with_capacity(nodes);
        arc.push(0.0);
        for j in 1..nodes {
            arc.push(arc[j - 1] + norm(sub(pts[j], pts[j - 1])));
        }
        let mut curvature = vec![0.0; nodes];
        for j in 1..nodes - 1 {
            let a = sub(pts[j], pts[j - 1]);
            let b = sub(pts[j + 1], pts[j]);
            let c = sub(pts[j + 1], pts[j - 1]);
            let denom = norm(a) * norm(b) * norm(c);
            if denom > 0.0 {
                // Menger curvature of the three neighbouring nodes
                curvature[j] = 2.0 * norm(cross(a, b)) / denom;
            }
        }
        curvature[0] = curvature[1];
        curvature[nodes - 1] = curvature[nodes - 2];
        Self {
            param,
            arc,
            curvature,
        }
    }

    pub(crate) fn length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    fn param_at_arc(&self, s: f64, j: usize) -> f64 {
        let (s0, s1) = (self.arc[j], self.arc[j + 1]);
        if s1 <= s0 {
            return self.param[j];
        }
        let w = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        self.param[j] + w * (self.param[j + 1] - self.param[j])
    }
}

pub(crate) struct SpeedProfile {
    v: Vec<f64>,
    t: Vec<f64>,
}

impl SpeedProfile {
    pub(crate) fn duration(&self) -> f64 {
        *self.t.last().unwrap()
    }
}

fn tangential_budget(a_max: f64, kappa: f64, v: f64) -> f64 {
    let normal = kappa * v * v;
    (a_max * a_max - normal * normal).max(0.0).sqrt()
}

pub(crate) fn speed_profile(curve: &SampledCurve, v_cap: f64, a_max: f64) -> SpeedProfile {
    let n = curve.arc.len();
    let cap: Vec<f64> = curve
        .curvature
        .iter()
        .map(|&k| if k > 0.0 { v_cap.min((a_max / k).sqrt()) } else { v_cap })
        .collect();
    let mut v = vec![0.0; n];
    for j in 0..n - 1 {
        let ds = curve.arc[j + 1] - curve.arc[j];
        let at = tangential_budget(a_max, curve.curvature[j], v[j]);
        v[j + 1] = cap[j + 1].min((v[j] * v[j] + 2.0 * at * ds).sqrt());
    }
    for j in (0..n - 1).rev() {
        let ds = curve.arc[j + 1] - curve.arc[j];
        let at = tangential_budget(a_max, curve.curvature[j + 1], v[j + 1]);
        v[j] = v[j].min((v[j + 1] * v[j + 1] + 2.0 * at * ds).sqrt());
    }
    v[0] = 0.0;
    let mut t = vec![0.0; n];
    for j in 0..n - 1 {
        let ds = curve.arc[j + 1] - curve.arc[j];
        let vs = v[j] + v[j + 1];
        t[j + 1] = t[j] + if vs > 0.0 { 2.0 * ds / vs } else { 0.0 };
    }
    SpeedProfile { v, t }
}

pub(crate) fn raster_steps(total: f64, dt: f64) -> usize {
    ((total / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Positions at raster times `i * dt`, `i = 0..=n`, with the time axis
/// stretched so the last sample lands exactly on the end of the curve.
pub(crate) fn raster(
    curve_fn: &dyn Fn(f64) -> Vec3,
    curve: &SampledCurve,
    profile: &SpeedProfile,
    dt: f64,
) -> Vec<Vec3> {
    let total = profile.duration();
    let steps = raster_steps(total, dt);
    let stretch = total / (steps as f64 * dt);
    let last = curve.param.len() - 1;
    let mut out = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        if i == steps {
            out.push(curve_fn(curve.param[last]));
            break;
        }
        let tau = i as f64 * dt * stretch;
        let j = (profile.t.partition_point(|&t| t <= tau).max(1) - 1).min(last - 1);
        let ds = curve.arc[j + 1] - curve.arc[j];
        let (v0, v1) = (profile.v[j], profile.v[j + 1]);
        let acc = if ds > 0.0 { (v1 * v1 - v0 * v0) / (2.0 * ds) } else { 0.0 };
        let d = tau - profile.t[j];
        let s = (curve.arc[j] + v0 * d + 0.5 * acc * d * d).clamp(curve.arc[j], curve.arc[j + 1]);
        out.push(curve_fn(curve.param_at_arc(s, j)));
    }
    out
}

/// Result of discretizing a curve at the hardware raster.
pub(crate) struct Rasterized {
    pub k: Vec<Vec3>,
    pub g: Vec<Vec3>,
}

/// Interval gradients `(k[i+1] - k[i]) / (rate dt)`, with the last interval
/// repeated so both lists have one entry per raster point.
pub(crate) fn interval_gradients(k: &[Vec3], k_rate: f64, dt: f64) -> Vec<Vec3> {
    let mut g: Vec<Vec3> = k
        .windows(2)
        .map(|w| scale(sub(w[1], w[0]), 1.0 / (k_rate * dt)))
        .collect();
    let last = *g.last().unwrap_or(&[0.0; 3]);
    g.push(last);
    g
}

pub(crate) fn max_amplitude(g: &[Vec3]) -> f64 {
    g.iter().map(|&v| norm(v)).fold(0.0, f64::max)
}

/// Largest finite-difference slew, including the step up from rest.
pub(crate) fn max_slew(g: &[Vec3], dt: f64) -> f64 {
    let first = g.first().map(|&v| norm(v) / dt).unwrap_or(0.0);
    g.windows(2)
        .map(|w| norm(sub(w[1], w[0])) / dt)
        .fold(first, f64::max)
}

/// Time-parameterizes `curve_fn` on `[0, p_max]` and samples it at `hw.dt`.
///
/// The slew margin is lowered until the rasterized waveform meets both
/// limits; the design is infeasible if the traversal exceeds `hw.t_read`.
pub(crate) fn synthesize(
    curve_fn: &dyn Fn(f64) -> Vec3,
    p_max: f64,
    nodes: usize,
    hw: &HardwareConfig,
    opts: &ProfileOptions,
) -> Result<Rasterized> {
    let rate = hw.k_rate();
    let curve = SampledCurve::new(curve_fn, p_max, nodes);
    if curve.length() <= 0.0 {
        return Err(Error::invalid("template curve has zero length"));
    }
    let v_cap = rate * hw.g_max * (1.0 - 1e-6);
    let mut margin = opts.slew_margin;
    for _ in 0..=opts.max_refinements {
        let profile = speed_profile(&curve, v_cap, rate * hw.s_max * margin);
        let duration = raster_steps(profile.duration(), hw.dt) as f64 * hw.dt;
        if duration > hw.t_read * (1.0 + 1e-12) {
            return Err(Error::Infeasible {
                reason: format!(
                    "traversal takes {duration:.4} ms, readout window is {:.4} ms",
                    hw.t_read
                ),
                min_t_read: duration,
            });
        }
        let k = raster(curve_fn, &curve, &profile, hw.dt);
        let g = interval_gradients(&k, rate, hw.dt);
        if max_slew(&g, hw.dt) <= hw.s_max && max_amplitude(&g) <= hw.g_max {
            return Ok(Rasterized { k, g });
        }
        margin *= 0.9;
    }
    Err(Error::Infeasible {
        reason: "slew limit could not be met by slowing the traversal".into(),
        min_t_read: f64::INFINITY,
    })
}
