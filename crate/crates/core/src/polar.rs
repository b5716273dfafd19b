//! Graded polar quadrature on the disk against `dA_γ`, and graded angular
//! quadrature on the circle.
//!
//! Radially the variable is `t = 1 - |z|`. Segments touching the circle are
//! split into geometric panels `[b 2^{-k-1}, b 2^{-k}]`; level `l` keeps
//! `level_panels(l)` of them and closes the remaining `[0, τ]` with the
//! substitution `y = t^{γ+1}`, which integrates the `dA_γ` density exactly.
//! Angular panels are graded toward focus angles down to a width tied to the
//! radial depth of the node.

use crate::error::{invalid, Result};
use crate::geometry::{one_minus_product, DiskPoint};
use crate::quad::{gl, graded_breakpoints, level_panels, Estimate, GaussLegendre, Protocol};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_PI, PI, TAU};

/// Angular extent of a polar domain at each radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Angular {
    Full,
    Range { lo: f64, hi: f64 },
    /// Pseudo-ball `||z| - |u|| + |1 - e^{i(θ_z - θ_u)}| < radius`.
    Ball { theta: f64, t_center: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarDomain {
    pub t_lo: f64,
    pub t_hi: f64,
    pub angular: Angular,
}

impl PolarDomain {
    pub fn disk() -> Self {
        Self {
            t_lo: 0.0,
            t_hi: 1.0,
            angular: Angular::Full,
        }
    }
}

/// Angle toward which panels are graded. `scale = 0` marks a boundary
/// singularity; a positive scale marks a peak of that angular width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Focus {
    pub theta: f64,
    pub scale: f64,
}

impl Focus {
    pub fn singular(theta: f64) -> Self {
        Self { theta, scale: 0.0 }
    }

    pub fn peak(theta: f64, scale: f64) -> Self {
        Self { theta, scale }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarOptions {
    pub order: usize,
    pub max_level: usize,
    pub protocol: Protocol,
}

impl Default for PolarOptions {
    fn default() -> Self {
        Self {
            order: 10,
            max_level: 6,
            protocol: Protocol::default(),
        }
    }
}

impl PolarOptions {
    pub fn with_level(max_level: usize) -> Self {
        Self {
            max_level,
            ..Self::default()
        }
    }
}

const MAX_ANGULAR_PANEL: f64 = PI / 8.0;
const SQRT_GRADING_DEPTH: usize = 40;

fn angular_interval(angular: &Angular, t: f64, foci: &[Focus]) -> Option<(f64, f64)> {
    match *angular {
        Angular::Full => {
            let c = foci.first().map_or(0.0, |f| f.theta);
            Some((c - PI, c + PI))
        }
        Angular::Range { lo, hi } => Some((lo, hi)),
        Angular::Ball {
            theta,
            t_center,
            radius,
        } => {
            let c = radius - (t - t_center).abs();
            if c <= 0.0 {
                None
            } else if c >= 2.0 {
                Some((theta - PI, theta + PI))
            } else {
                let half = 2.0 * (0.5 * c).asin();
                Some((theta - half, theta + half))
            }
        }
    }
}

fn focus_depth(scale: f64, t: f64) -> usize {
    let m = 0.25 * scale.max(t);
    if m <= 0.0 {
        return 60;
    }
    (PI / m).log2().ceil().clamp(0.0, 60.0) as usize
}

fn angular_breaks(lo: f64, hi: f64, foci: &[Focus], depth_of: impl Fn(&Focus) -> usize) -> Vec<f64> {
    let mut breaks = Vec::new();
    for f in foci {
        let depth = depth_of(f);
        for shift in [-TAU, 0.0, TAU] {
            let c = f.theta + shift;
            if c < lo - PI || c > hi + PI {
                continue;
            }
            graded_breakpoints(lo, hi, c, PI, depth, &mut breaks);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn for_each_node(
    rule: &GaussLegendre,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    max_width: f64,
    mut g: impl FnMut(f64, f64),
) {
    let mut a = lo;
    for &b in breaks.iter().chain(std::iter::once(&hi)) {
        if b <= a {
            continue;
        }
        let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
        let step = (b - a) / pieces as f64;
        for j in 0..pieces {
            let pa = a + step * j as f64;
            let pb = if j + 1 == pieces { b } else { pa + step };
            for (x, w) in rule.mapped(pa, pb) {
                g(x, w);
            }
        }
        a = b;
    }
}

struct Ctx<'a, F> {
    angular: Angular,
    foci: &'a [Focus],
    gamma: f64,
    f: F,
    buf: Vec<f64>,
}

impl<F: Fn(DiskPoint, &mut [f64])> Ctx<'_, F> {
    /// Adds `weight · ∫ f(t, θ) dθ` into `acc`.
    fn ring(&mut self, rule: &GaussLegendre, t: f64, weight: f64, acc: &mut [f64]) {
        let Some((lo, hi)) = angular_interval(&self.angular, t, self.foci) else {
            return;
        };
        let breaks = angular_breaks(lo, hi, self.foci, |f| focus_depth(f.scale, t));
        let Self { f, buf, .. } = self;
        for_each_node(rule, lo, hi, &breaks, MAX_ANGULAR_PANEL, |theta, w| {
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(DiskPoint::new(t, theta), buf);
            for (a, v) in acc.iter_mut().zip(buf.iter()) {
                *a += weight * w * v;
            }
        });
    }

    fn density(&self, t: f64) -> f64 {
        (self.gamma + 1.0) * FRAC_1_PI * (self.gamma * (t * (2.0 - t)).ln()).exp() * (1.0 - t)
    }

    fn panel(&mut self, rule: &GaussLegendre, a: f64, b: f64, acc: &mut [f64]) {
        for (t, w) in rule.mapped(a, b) {
            let d = self.density(t);
            self.ring(rule, t, w * d, acc);
        }
    }

    /// `∫_0^τ` using `y = t^{γ+1}` on dyadic subpanels of `[0, τ]`.
    fn tail(&mut self, rule: &GaussLegendre, tau: f64, acc: &mut [f64]) {
        let g = self.gamma + 1.0;
        for (y_lo, y_hi) in tail_panels(tau, g) {
            for (y, w) in rule.mapped(y_lo, y_hi) {
                let t = y.powf(1.0 / g);
                if t <= 0.0 {
                    continue;
                }
                let d = FRAC_1_PI * (self.gamma * (2.0 - t).ln()).exp() * (1.0 - t);
                self.ring(rule, t, w * d, acc);
            }
        }
    }
}

/// Panels in `y = t^g` covering `t ∈ [0, τ]`, split at `τ 2^{-j}`.
pub(crate) fn tail_panels(tau: f64, g: f64) -> Vec<(f64, f64)> {
    const SPLITS: i32 = 20;
    let mut out = vec![(0.0, (tau * (-SPLITS as f64).exp2()).powf(g))];
    for j in (0..SPLITS).rev() {
        let hi = tau * (-(j as f64)).exp2();
        out.push(((0.5 * hi).powf(g), hi.powf(g)));
    }
    out
}

/// `∫_Ω f dA_γ` for `ncomp` integrands at once. `f(point, out)` writes the
/// integrand values into `out`.
pub fn integrate<F>(
    dom: &PolarDomain,
    gamma: f64,
    foci: &[Focus],
    ncomp: usize,
    opts: &PolarOptions,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(DiskPoint, &mut [f64]),
{
    if !(gamma > -1.0) {
        return Err(invalid("gamma must exceed -1"));
    }
    if !(dom.t_lo >= 0.0 && dom.t_lo < dom.t_hi && dom.t_hi <= 1.0) {
        return Err(invalid(format!("radial range [{}, {}] is not a subrange of [0, 1]", dom.t_lo, dom.t_hi)));
    }
    let mut kinks: Vec<(f64, bool)> = Vec::new();
    if let Angular::Ball { t_center, radius, .. } = dom.angular {
        kinks.push((t_center, false));
        if radius > 2.0 {
            kinks.push((t_center - (radius - 2.0), true));
            kinks.push((t_center + (radius - 2.0), true));
        }
    }
    let mut cuts: Vec<(f64, bool)> = vec![(dom.t_lo, false)];
    cuts.extend(kinks.into_iter().filter(|(x, _)| *x > dom.t_lo && *x < dom.t_hi));
    cuts.push((dom.t_hi, false));
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    cuts.dedup_by(|a, b| a.0 == b.0);

    let mut ctx = Ctx {
        angular: dom.angular,
        foci,
        gamma,
        f,
        buf: vec![0.0; ncomp],
    };
    let rule = gl(opts.order);
    let rule_hi = gl(opts.order + 4);

    let mut plain = vec![0.0; ncomp];
    let mut plain_hi = vec![0.0; ncomp];
    let mut graded_end: Option<f64> = None;
    for w in cuts.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        if a == 0.0 {
            graded_end = Some(b);
            continue;
        }
        let mut breaks = Vec::new();
        let mut x = 2.0 * a;
        while x < b {
            breaks.push(x);
            x *= 2.0;
        }
        if sa {
            let mut h = 0.5 * (b - a);
            for _ in 0..SQRT_GRADING_DEPTH {
                breaks.push(a + h);
                h *= 0.5;
            }
        }
        if sb {
            let mut h = 0.5 * (b - a);
            for _ in 0..SQRT_GRADING_DEPTH {
                breaks.push(b - h);
                h *= 0.5;
            }
        }
        breaks.retain(|x| *x > a && *x < b);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        for (r, acc) in [(rule, &mut plain), (rule_hi, &mut plain_hi)] {
            let mut nodes = Vec::new();
            for_each_node(r, a, b, &breaks, 0.125, |t, wt| nodes.push((t, wt)));
            for (t, wt) in nodes {
                let d = ctx.density(t);
                ctx.ring(r, t, wt * d, acc);
            }
        }
    }

    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); ncomp];
    match graded_end {
        None => {
            for c in 0..ncomp {
                traces[c] = vec![plain[c], plain_hi[c]];
            }
        }
        Some(b) => {
            let mut body = plain.clone();
            let mut done = 0usize;
            for level in 0..=opts.max_level {
                let k_max = level_panels(level);
                for k in done..k_max {
                    let hi = b * (-(k as f64)).exp2();
                    ctx.panel(rule, 0.5 * hi, hi, &mut body);
                }
                done = k_max;
                let mut total = body.clone();
                ctx.tail(rule, b * (-(k_max as f64)).exp2(), &mut total);
                for c in 0..ncomp {
                    traces[c].push(total[c]);
                }
                if traces.iter().all(|tr| opts.protocol.converged_at(tr).is_some()) {
                    break;
                }
            }
        }
    }
    Ok(traces.into_iter().map(|tr| opts.protocol.estimate(tr)).collect())
}

/// `∫_{D(c,R)} f dA_γ` over a Bergman disk, through `u = φ_c(v)` with
/// `|v| < tanh R` and `dA_γ(u) = |k_c(v)|² dA_γ(v)`.
pub fn integrate_bergman_disk<F>(
    center: DiskPoint,
    radius: f64,
    gamma: f64,
    ncomp: usize,
    opts: &PolarOptions,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(DiskPoint, &mut [f64]),
{
    if !(radius > 0.0) {
        return Err(invalid("Bergman radius must be positive"));
    }
    let rho = radius.tanh();
    let dom = PolarDomain {
        t_lo: 1.0 - rho,
        t_hi: 1.0,
        angular: Angular::Full,
    };
    let c = center.z();
    let dc = center.dist2();
    let e = 2.0 + gamma;
    integrate(&dom, gamma, &[], ncomp, opts, |v, out| {
        let denom = one_minus_product(v, center);
        let dn2 = denom.norm_sqr();
        let jac = (e * (dc.ln() - dn2.ln())).exp();
        let du = dc * v.dist2() / dn2;
        let t = du / (1.0 + (1.0 - du).max(0.0).sqrt());
        let num = c - v.z();
        let theta = if num.norm() == 0.0 { 0.0 } else { (num / denom).arg() };
        f(DiskPoint::new(t, theta), out);
        out.iter_mut().for_each(|x| *x *= jac);
    })
}

/// `∫_{lo}^{hi} f(θ) dθ` with grading toward the foci. Singular foci are
/// approached by `level_panels(l)` halvings at level `l`; peak foci by a fixed
/// depth set by their scale.
pub fn integrate_circle<F>(
    lo: f64,
    hi: f64,
    foci: &[Focus],
    ncomp: usize,
    opts: &PolarOptions,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(f64, &mut [f64]),
{
    if !(hi > lo) {
        return Err(invalid("empty angular interval"));
    }
    let singular = foci.iter().any(|f| f.scale == 0.0);
    let mut buf = vec![0.0; ncomp];
    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); ncomp];
    let mut run = |rule: &GaussLegendre, depth_singular: usize, traces: &mut Vec<Vec<f64>>| {
        let breaks = angular_breaks(lo, hi, foci, |f| {
            if f.scale == 0.0 {
                depth_singular
            } else {
                focus_depth(f.scale, 0.0)
            }
        });
        let mut acc = vec![0.0; ncomp];
        for_each_node(rule, lo, hi, &breaks, MAX_ANGULAR_PANEL, |theta, w| {
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(theta, &mut buf);
            for (a, v) in acc.iter_mut().zip(buf.iter()) {
                *a += w * v;
            }
        });
        for c in 0..ncomp {
            traces[c].push(acc[c]);
        }
    };
    if singular {
        for level in 0..=opts.max_level {
            run(gl(opts.order), level_panels(level).min(1000), &mut traces);
            if traces.iter().all(|tr| opts.protocol.converged_at(tr).is_some()) {
                break;
            }
        }
    } else {
        run(gl(opts.order), 0, &mut traces);
        run(gl(opts.order + 4), 0, &mut traces);
    }
    Ok(traces.into_iter().map(|tr| opts.protocol.estimate(tr)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Convergence;

    #[test]
    fn disk_mass_is_one() {
        for gamma in [-0.99, -0.5, 0.0, 1.0, 3.0] {
            let e = integrate(&PolarDomain::disk(), gamma, &[], 1, &PolarOptions::default(), |_, o| o[0] = 1.0)
                .unwrap()
                .remove(0);
            assert!((e.value - 1.0).abs() < 1e-10, "gamma {gamma}: {}", e.value);
        }
    }

    #[test]
    fn radial_power_detects_divergence() {
        // ∫ (1-|z|²)^{-1.5} dA_0 diverges
        let e = integrate(&PolarDomain::disk(), 0.0, &[], 1, &PolarOptions::default(), |p, o| {
            o[0] = p.dist2().powf(-1.5)
        })
        .unwrap()
        .remove(0);
        assert_eq!(e.status, Convergence::Divergent);
    }

    #[test]
    fn bergman_disk_mass_matches_closed_form() {
        // A_0(D(0,R)) = tanh(R)²
        let e = integrate_bergman_disk(DiskPoint::new(1.0, 0.0), 0.7, 0.0, 1, &PolarOptions::default(), |_, o| {
            o[0] = 1.0
        })
        .unwrap()
        .remove(0);
        assert!((e.value - 0.7f64.tanh().powi(2)).abs() < 1e-12);
    }
}
