//! Weight-class characteristics, the power-weight membership oracle, BMO
//! diagnostics, openness and reverse Hölder estimation.

use crate::error::{check_budget, invalid, Error, Result};
use crate::geometry::{
    boundary_samples, discrete_path, region_sampler, DiskPoint, Region, RegionFamily, RegionKind, Space, SpaceParams,
    TreeNode,
};
use crate::polar::{self, Focus, PolarOptions};
use crate::quad::{gl, Convergence};
use crate::symbols::{Symbol, WeightSpec};
use crate::transforms::{berezin_moments, heat_tilde_abs_pow, poisson_moments, QuadratureGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassKind {
    ApArcs,
    BpGammaBalls,
    AprCubes { r: f64 },
    ApInvariant,
    BpGammaInvariant,
    BerezinBpGamma,
    PoissonAp,
    HeatChar { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub kind: ClassKind,
    pub params: SpaceParams,
}

impl ClassSpec {
    pub fn new(kind: ClassKind, params: SpaceParams) -> Result<Self> {
        params.validate()?;
        let ok = match kind {
            ClassKind::ApArcs | ClassKind::PoissonAp | ClassKind::ApInvariant => params.space == Space::HardyCircle,
            ClassKind::BpGammaBalls | ClassKind::BerezinBpGamma | ClassKind::BpGammaInvariant => {
                matches!(params.space, Space::BergmanDisk | Space::BergmanBall)
            }
            ClassKind::AprCubes { r } => params.space == Space::Fock && r > 0.0,
            ClassKind::HeatChar { alpha, beta } => params.space == Space::Fock && alpha > 0.0 && beta > 0.0,
        };
        if !ok {
            return Err(invalid(format!("{kind:?} is not defined on {:?}", params.space)));
        }
        if params.space == Space::BergmanBall {
            return Err(Error::Unsupported("Bergman-side characteristics on the ball (n > 1)".into()));
        }
        Ok(Self { kind, params })
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    Divergent,
    Inconclusive,
}

/// Running supremum after all regions of levels `≤ level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub level: u32,
    pub regions_evaluated: usize,
    pub running_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    pub spec: ClassSpec,
    pub weight: WeightSpec,
    pub estimate: f64,
    pub refinement_trace: Vec<TracePoint>,
    pub argmax_region: Option<Region>,
    /// Sample point of the supremum for the transform-based kinds.
    pub argmax_point: Option<Vec<f64>>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl CharacteristicReport {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("level,regions_evaluated,running_sup\n");
        for t in &self.refinement_trace {
            s.push_str(&format!("{},{},{:e}\n", t.level, t.regions_evaluated, t.running_sup));
        }
        s
    }
}

/// Numerical settings shared by the characteristic engines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub polar: PolarOptions,
    pub cube_order: usize,
    pub directions: usize,
    pub jitter: Option<u64>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            polar: PolarOptions::default(),
            cube_order: 10,
            directions: 8,
            jitter: None,
        }
    }
}

impl EngineOptions {
    pub fn from_grid(grid: &QuadratureGrid) -> Self {
        Self {
            polar: grid.polar_options(),
            ..Self::default()
        }
    }
}

/// `avg(w)·avg(w^{-1/(p-1)})^{p-1}` over one region, with the averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApRatio {
    pub value: f64,
    pub log_value: f64,
    pub log_avg_w: f64,
    pub log_avg_dual: f64,
    pub status: Convergence,
}

fn combine(a: Convergence, b: Convergence) -> Convergence {
    use Convergence::*;
    match (a, b) {
        (Divergent, _) | (_, Divergent) => Divergent,
        (Unresolved, _) | (_, Unresolved) => Unresolved,
        _ => Convergent,
    }
}

fn dual_exponent(p: f64) -> f64 {
    -1.0 / (p - 1.0)
}

/// Log-averages of `|w|^{e}` over a region for each exponent, with a joint status.
pub fn region_log_averages(
    w: &WeightSpec,
    region: &Region,
    exps: &[f64],
    params: &SpaceParams,
    opts: &EngineOptions,
) -> Result<(Vec<f64>, Convergence)> {
    let foci: Vec<Focus> = w.singular_angles().into_iter().map(Focus::singular).collect();
    let powered = |lw: f64, out: &mut [f64]| {
        out[0] = 1.0;
        for (o, e) in out[1..].iter_mut().zip(exps) {
            *o = if *e == 0.0 { 1.0 } else { (e * lw).exp() };
        }
    };
    let ncomp = exps.len() + 1;
    let disk = |dom: &polar::PolarDomain| {
        polar::integrate(dom, params.gamma, &foci, ncomp, &opts.polar, |u, out| powered(w.log_abs_disk(u), out))
    };
    let ests = match &region.kind {
        RegionKind::Arc { center, length } => {
            if params.space != Space::HardyCircle {
                return Err(invalid("arcs need circle params"));
            }
            let (lo, hi) = (center - 0.5 * length, center + 0.5 * length);
            let shifted: Vec<Focus> = foci
                .iter()
                .flat_map(|f| [-TAU, 0.0, TAU].map(|k| Focus { theta: f.theta + k, ..*f }))
                .filter(|f| f.theta >= lo - 1e-12 && f.theta <= hi + 1e-12)
                .collect();
            polar::integrate_circle(lo, hi, &shifted, ncomp, &opts.polar, |theta, out| {
                powered(w.log_abs_circle(theta), out)
            })?
        }
        RegionKind::PseudoBall { center, radius } => disk(&crate::geometry::pseudo_ball_domain(*center, *radius))?,
        RegionKind::BergmanDisk { center, radius } => {
            polar::integrate_bergman_disk(*center, *radius, params.gamma, ncomp, &opts.polar, |u, out| {
                powered(w.log_abs_disk(u), out)
            })?
        }
        RegionKind::DyadicRect { n, m, k } => disk(&crate::geometry::DyadicRect::new(*n, *m, *k)?.polar_box().domain())?,
        RegionKind::CarlesonSquare { depth, index } => {
            disk(&TreeNode::new(*depth, *index, params.gamma)?.carleson_box().domain())?
        }
        RegionKind::CarlesonUnion { depth, indices } => {
            let mut sum = vec![0.0; ncomp];
            let mut status = Convergence::Convergent;
            for &i in indices {
                let e = disk(&TreeNode::new(*depth, i, params.gamma)?.carleson_box().domain())?;
                for (s, x) in sum.iter_mut().zip(&e) {
                    *s += x.value;
                    status = combine(status, x.status);
                }
            }
            let logs = sum[1..].iter().map(|v| (v / sum[0]).ln()).collect();
            return Ok((logs, status));
        }
        RegionKind::Cube { center, side } => {
            return cube_log_averages(w, center, *side, exps, opts.cube_order);
        }
    };
    let status = ests.iter().fold(Convergence::Convergent, |s, e| combine(s, e.status));
    let mass = ests[0].value;
    let logs = ests[1..]
        .iter()
        .map(|e| if e.value.is_finite() { (e.value / mass).ln() } else { f64::INFINITY })
        .collect();
    Ok((logs, status))
}

/// Agreement of the two cube orders, in log units.
const LOG_TOL: f64 = 1e-7;

fn log_sum_exp(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let v: Vec<(f64, f64)> = terms.collect();
    let m = v.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|(l, w)| w * (l - m).exp()).sum::<f64>().ln()
}

/// `log ∫_a^b e^{φ(s)} ds` with kinks at the listed points and panels short
/// enough that `φ` moves by at most about one unit per panel.
fn log_integral_1d(phi: &dyn Fn(f64) -> f64, a: f64, b: f64, kinks: &[f64], slope: f64, order: usize) -> f64 {
    let mut breaks: Vec<f64> = Vec::new();
    for &k in kinks {
        if k > a && k < b {
            crate::quad::graded_breakpoints(a, b, k, (b - a).min(1.0), 40, &mut breaks);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let width = if slope > 0.0 { (1.0 / slope).min(b - a) } else { b - a };
    let rule = gl(order);
    let mut nodes = Vec::new();
    let mut lo = a;
    for &hi in breaks.iter().chain(std::iter::once(&b)) {
        if hi <= lo {
            continue;
        }
        let pieces = ((hi - lo) / width).ceil().clamp(1.0, 1e6) as usize;
        let step = (hi - lo) / pieces as f64;
        for j in 0..pieces {
            let pa = lo + step * j as f64;
            for (x, wt) in rule.mapped(pa, pa + step) {
                nodes.push((phi(x), wt));
            }
        }
        lo = hi;
    }
    log_sum_exp(nodes.into_iter())
}

fn cube_slope(w: &Symbol, center: &[f64], side: f64, e: f64) -> f64 {
    let g = w.plane_growth().unwrap_or(crate::symbols::Growth {
        quad: 0.0,
        lin: 4.0,
        degree: 4.0,
    });
    let far = center.iter().map(|c| c * c).sum::<f64>().sqrt() + side;
    e.abs() * (2.0 * g.quad * far + g.lin + g.degree)
}

/// Log-averages of `|w|^{e}` over the cube `center + [-side/2, side/2]^{2n}`.
/// Separable weights factor into 1-D integrals; the rest use a tensor rule.
/// Each exponent is computed at two orders and compared.
pub fn cube_log_averages(
    w: &Symbol,
    center: &[f64],
    side: f64,
    exps: &[f64],
    order: usize,
) -> Result<(Vec<f64>, Convergence)> {
    if !(side > 0.0) || center.is_empty() {
        return Err(invalid("cube needs positive side and a center"));
    }
    let dim = center.len();
    let h = 0.5 * side;
    let log_vol = dim as f64 * side.ln();
    let mut logs = Vec::with_capacity(exps.len());
    let mut status = Convergence::Convergent;
    for &e in exps {
        let mut pair = [0.0; 2];
        for (slot, ord) in pair.iter_mut().zip([order, order + 4]) {
            *slot = if w.is_plane_separable() {
                let base = vec![1.0; dim];
                let lb = w.log_abs_plane(&base);
                let mut total = e * lb;
                for i in 0..dim {
                    let phi = |s: f64| {
                        let mut x = base.clone();
                        x[i] = s;
                        e * (w.log_abs_plane(&x) - lb)
                    };
                    let slope = cube_slope(w, center, side, e);
                    total += log_integral_1d(&phi, center[i] - h, center[i] + h, &[0.0], slope, ord);
                }
                total
            } else {
                tensor_log_integral(w, center, h, e, ord)?
            } - log_vol;
        }
        let (a, b) = (pair[0], pair[1]);
        let s = if a.is_nan() || b.is_nan() {
            Convergence::Unresolved
        } else if b.is_infinite() && b > 0.0 {
            Convergence::Divergent
        } else if (a - b).abs() <= LOG_TOL {
            Convergence::Convergent
        } else {
            Convergence::Unresolved
        };
        status = combine(status, s);
        logs.push(b);
    }
    Ok((logs, status))
}

fn tensor_log_integral(w: &Symbol, center: &[f64], h: f64, e: f64, order: usize) -> Result<f64> {
    let dim = center.len();
    let slope = cube_slope(w, center, 2.0 * h, e);
    let pieces = ((2.0 * h * slope).ceil() as usize).clamp(1, 16);
    let rule = gl(order);
    let mut axis: Vec<(f64, f64)> = Vec::new();
    let step = 2.0 / pieces as f64;
    for j in 0..pieces {
        let a = -1.0 + step * j as f64;
        axis.extend(rule.mapped(a, a + step));
    }
    let count = axis.len().pow(dim as u32);
    check_budget("cube tensor nodes", count)?;
    let mut idx = vec![0usize; dim];
    let mut terms = Vec::with_capacity(count);
    let mut x = vec![0.0; dim];
    loop {
        let mut wt = 1.0;
        for d in 0..dim {
            let (s, ws) = axis[idx[d]];
            x[d] = center[d] + h * s;
            wt *= h * ws;
        }
        terms.push((e * w.log_abs_plane(&x), wt));
        let mut d = 0;
        while d < dim {
            idx[d] += 1;
            if idx[d] < axis.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dim {
            break;
        }
    }
    Ok(log_sum_exp(terms.into_iter()))
}

/// `avg(w)·avg(w^{-1/(p-1)})^{p-1}` over `region`.
pub fn local_ap_ratio(
    w: &WeightSpec,
    region: &Region,
    p: f64,
    params: &SpaceParams,
    opts: &EngineOptions,
) -> Result<ApRatio> {
    if !(p > 1.0) {
        return Err(invalid("p must exceed 1"));
    }
    let (logs, status) = region_log_averages(w, region, &[1.0, dual_exponent(p)], params, opts)?;
    let log_value = logs[0] + (p - 1.0) * logs[1];
    let status = if log_value.is_nan() { Convergence::Unresolved } else { status };
    Ok(ApRatio {
        value: log_value.exp(),
        log_value,
        log_avg_w: logs[0],
        log_avg_dual: logs[1],
        status,
    })
}

pub(crate) struct Sample {
    pub level: u32,
    pub log_value: f64,
    pub status: Convergence,
}

/// Ordered fold into the level trace, the argmax and the verdict: divergent
/// when any sample diverges or the running sup more than doubles across the
/// last two levels.
pub(crate) fn fold_samples(samples: &[Sample]) -> (Vec<TracePoint>, Option<usize>, Verdict) {
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut best: Option<usize> = None;
    let mut any_div = false;
    let mut any_unres = false;
    for (i, s) in samples.iter().enumerate() {
        match s.status {
            Convergence::Divergent => any_div = true,
            Convergence::Unresolved => any_unres = true,
            Convergence::Convergent => {}
        }
        if s.status != Convergence::Divergent
            && !s.log_value.is_nan()
            && best.is_none_or(|b| s.log_value > samples[b].log_value)
        {
            best = Some(i);
        }
        let sup = best.map_or(f64::NAN, |b| samples[b].log_value.exp());
        match trace.last_mut() {
            Some(t) if t.level == s.level => {
                t.regions_evaluated += 1;
                t.running_sup = sup;
            }
            _ => trace.push(TracePoint {
                level: s.level,
                regions_evaluated: trace.last().map_or(0, |t| t.regions_evaluated) + 1,
                running_sup: sup,
            }),
        }
    }
    let growing = match trace.as_slice() {
        [.., a, b] => {
            let (la, lb) = (a.running_sup.ln(), b.running_sup.ln());
            lb.is_infinite() || (lb - la) > LN_2
        }
        _ => false,
    };
    let verdict = if any_div || growing {
        Verdict::Divergent
    } else if any_unres || best.is_none() {
        Verdict::Inconclusive
    } else {
        Verdict::Finite
    };
    (trace, best, verdict)
}

fn region_family(kind: ClassKind) -> Option<RegionFamily> {
    match kind {
        ClassKind::ApArcs => Some(RegionFamily::Arcs),
        ClassKind::BpGammaBalls => Some(RegionFamily::PseudoBalls),
        ClassKind::AprCubes { r } => Some(RegionFamily::Cubes { r }),
        _ => None,
    }
}

/// Supremum of [`local_ap_ratio`] over a region family.
pub fn region_characteristic(
    w: &WeightSpec,
    spec: ClassSpec,
    regions: Vec<Region>,
    opts: &EngineOptions,
) -> Result<CharacteristicReport> {
    let p = spec.p();
    let results: Vec<Result<ApRatio>> = regions
        .par_iter()
        .map(|r| local_ap_ratio(w, r, p, &spec.params, opts))
        .collect();
    let mut samples = Vec::with_capacity(regions.len());
    for (r, res) in regions.iter().zip(results) {
        let a = res?;
        samples.push(Sample {
            level: r.depth.unwrap_or(0),
            log_value: a.log_value,
            status: a.status,
        });
    }
    let (trace, best, verdict) = fold_samples(&samples);
    Ok(CharacteristicReport {
        spec,
        weight: w.clone(),
        estimate: best.map_or(f64::NAN, |b| samples[b].log_value.exp()),
        refinement_trace: trace,
        argmax_region: best.map(|b| regions[b].clone()),
        argmax_point: None,
        verdict,
        notes: Vec::new(),
    })
}

/// Plane sample points: the origin, then `2^{j-1}` times a set of unit
/// directions at level `j`.
pub fn plane_samples(n: usize, levels: u32, dirs: usize) -> Vec<(u32, Vec<f64>)> {
    let dim = 2 * n;
    let mut units: Vec<Vec<f64>> = Vec::new();
    for i in 0..dirs.max(1) {
        let a = TAU * i as f64 / dirs.max(1) as f64;
        let mut u = vec![0.0; dim];
        u[0] = a.cos();
        u[1] = a.sin();
        units.push(u);
    }
    for d in 2..dim {
        for s in [-1.0, 1.0] {
            let mut u = vec![0.0; dim];
            u[d] = s;
            units.push(u);
        }
    }
    if dim > 2 {
        units.push(vec![1.0 / (dim as f64).sqrt(); dim]);
    }
    let mut out = vec![(0, vec![0.0; dim])];
    for j in 1..=levels {
        let rad = (j as f64 - 1.0).exp2();
        for u in &units {
            out.push((j, u.iter().map(|v| v * rad).collect()));
        }
    }
    out
}

/// Supremum of a transform product over boundary-refined (disk, circle) or
/// shell (plane) samples.
fn transform_characteristic(
    w: &WeightSpec,
    spec: ClassSpec,
    max_refinement: u32,
    opts: &EngineOptions,
) -> Result<CharacteristicReport> {
    let p = spec.p();
    let q = spec.params.q;
    let d = dual_exponent(p);
    let mut grid = QuadratureGrid::disk(&SpaceParams::bergman_disk(spec.params.gamma.max(-0.5), p)?, 0)?;
    grid.params = spec.params;
    grid.level = opts.polar.max_level;
    grid.order = opts.polar.order;
    grid.protocol = opts.polar.protocol;
    type Eval = Box<dyn Fn(&[f64]) -> Result<(f64, Convergence)> + Sync>;
    let product = move |e: &[crate::quad::Estimate]| {
        let lv = e[0].value.ln() + (p - 1.0) * e[1].value.ln();
        (lv, combine(e[0].status, e[1].status))
    };
    let (points, eval): (Vec<(u32, Vec<f64>)>, Eval) = match spec.kind {
        ClassKind::BerezinBpGamma | ClassKind::BpGammaInvariant | ClassKind::PoissonAp | ClassKind::ApInvariant => {
            let pairs = match spec.kind {
                ClassKind::BerezinBpGamma | ClassKind::PoissonAp => [(1.0, p), (d, q)],
                _ => [(1.0, 2.0), (d, 2.0)],
            };
            let hardy = matches!(spec.kind, ClassKind::PoissonAp | ClassKind::ApInvariant);
            let pts = boundary_samples(max_refinement, opts.directions, &w.singular_angles())
                .into_iter()
                .map(|(l, z)| (l, vec![z.t, z.theta]))
                .collect();
            let w = w.clone();
            let grid = grid.clone();
            (
                pts,
                Box::new(move |x: &[f64]| {
                    let z = DiskPoint::new(x[0], x[1]);
                    let e = if hardy {
                        poisson_moments(&w, z, &pairs, &grid)?
                    } else {
                        berezin_moments(&w, z, &pairs, &grid)?
                    };
                    Ok(product(&e))
                }),
            )
        }
        ClassKind::HeatChar { alpha, beta } => {
            let pts = plane_samples(spec.params.n, max_refinement, opts.directions);
            let w = w.clone();
            (
                pts,
                Box::new(move |x: &[f64]| {
                    let a = heat_tilde_abs_pow(&w, 1.0, x, alpha)?;
                    let b = heat_tilde_abs_pow(&w, d, x, beta)?;
                    Ok(product(&[a, b]))
                }),
            )
        }
        _ => return Err(invalid("not a transform-based class")),
    };
    let results: Vec<Result<(f64, Convergence)>> = points.par_iter().map(|(_, x)| eval(x)).collect();
    let mut samples = Vec::with_capacity(points.len());
    for ((level, _), r) in points.iter().zip(results) {
        let (log_value, status) = r?;
        samples.push(Sample {
            level: *level,
            log_value,
            status,
        });
    }
    let (trace, best, verdict) = fold_samples(&samples);
    Ok(CharacteristicReport {
        spec,
        weight: w.clone(),
        estimate: best.map_or(f64::NAN, |b| samples[b].log_value.exp()),
        refinement_trace: trace,
        argmax_region: None,
        argmax_point: best.map(|b| match spec.params.space {
            Space::Fock => points[b].1.clone(),
            _ => {
                let z = DiskPoint::new(points[b].1[0], points[b].1[1]).z();
                vec![z.re, z.im]
            }
        }),
        verdict,
        notes: Vec::new(),
    })
}

/// Supremum defining the class of `spec`, with a verdict from the refinement
/// trace.
pub fn characteristic(
    w: &WeightSpec,
    spec: ClassSpec,
    max_refinement: u32,
    opts: &EngineOptions,
) -> Result<CharacteristicReport> {
    let spec = ClassSpec::new(spec.kind, spec.params)?;
    match region_family(spec.kind) {
        Some(family) => {
            let regions = region_sampler(&spec.params, family, max_refinement, opts.jitter)?;
            region_characteristic(w, spec, regions, opts)
        }
        None => transform_characteristic(w, spec, max_refinement, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerVariant {
    #[serde(alias = "balls")]
    Plain,
    Invariant,
}

/// Membership of `(1-|z|²)^ζ` in the plain or invariant Bergman class.
pub fn power_weight_oracle(zeta: f64, p: f64, gamma: f64, n: usize, variant: PowerVariant) -> Result<bool> {
    if !(p > 1.0) || !(gamma > -1.0) || n == 0 {
        return Err(invalid("oracle needs p > 1, gamma > -1, n ≥ 1"));
    }
    let plain = -1.0 - gamma < zeta && zeta < (1.0 + gamma) * (p - 1.0);
    Ok(match variant {
        PowerVariant::Plain => plain,
        PowerVariant::Invariant => {
            let m = n as f64 + 1.0 + gamma;
            plain && -(p - 1.0) * m < zeta && zeta < m
        }
    })
}

/// A real-valued function on ℝ²ⁿ built from a symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "of", content = "symbol", rename_all = "snake_case")]
pub enum PlaneFn {
    Re(Symbol),
    LogAbs(Symbol),
}

impl PlaneFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Re(s) => s.eval_plane(x).re,
            Self::LogAbs(s) => s.log_abs_plane(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seminorm {
    pub value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoReport {
    pub bo_seminorm: Seminorm,
    pub ba_seminorm: Seminorm,
    pub bmo_seminorm: Seminorm,
    pub trace: Vec<[f64; 4]>,
}

fn ball_offsets(r: f64, dim: usize) -> Vec<Vec<f64>> {
    let h = r / if dim <= 2 { 8.0 } else { 4.0 };
    crate::transforms::lattice_ball(h, r, dim).unwrap_or_default()
}

fn growth_verdict(levels: &[f64]) -> Verdict {
    match levels {
        [.., a, b] if !b.is_finite() => Verdict::Divergent,
        [.., a, b] if *b > 1e-12 && (*a <= 1e-12 || b / a > 1.5) => Verdict::Divergent,
        [_, _, ..] => Verdict::Finite,
        _ => Verdict::Inconclusive,
    }
}

/// Oscillation, ball average and mean oscillation of `f` on balls of radius
/// `r` centred on [`plane_samples`], tracked level by level.
pub fn bmo_diagnostics(f: &PlaneFn, r: f64, p: f64, n: usize, levels: u32) -> Result<BmoReport> {
    if !(r > 0.0) || !(p >= 1.0) {
        return Err(invalid("need r > 0 and p ≥ 1"));
    }
    let dim = 2 * n;
    let offsets = ball_offsets(r, dim);
    check_budget("ball samples", offsets.len() * (levels as usize + 1) * 16)?;
    let centers = plane_samples(n, levels, 8);
    let per: Vec<(u32, [f64; 3])> = centers
        .par_iter()
        .map(|(l, z)| {
            let vals: Vec<f64> = offsets
                .iter()
                .map(|o| f.eval(&z.iter().zip(o).map(|(a, b)| a + b).collect::<Vec<_>>()))
                .collect();
            let fz = f.eval(z);
            let bo = vals.iter().map(|v| (fz - v).abs()).fold(0.0, f64::max);
            let m = vals.len() as f64;
            let ba = (vals.iter().map(|v| v.abs().powf(p)).sum::<f64>() / m).powf(1.0 / p);
            let mean = vals.iter().sum::<f64>() / m;
            let bmo = (vals.iter().map(|v| (v - mean).abs().powf(p)).sum::<f64>() / m).powf(1.0 / p);
            (*l, [bo, ba, bmo])
        })
        .collect();
    let mut trace: Vec<[f64; 4]> = Vec::new();
    let mut sup = [0.0f64; 3];
    for (l, v) in per {
        for i in 0..3 {
            sup[i] = sup[i].max(v[i]);
        }
        match trace.last_mut() {
            Some(t) if t[0] == l as f64 => t[1..].copy_from_slice(&sup),
            _ => trace.push([l as f64, sup[0], sup[1], sup[2]]),
        }
    }
    let comp = |i: usize| {
        let lv: Vec<f64> = trace.iter().map(|t| t[i + 1]).collect();
        Seminorm {
            value: sup[i],
            verdict: growth_verdict(&lv),
        }
    };
    Ok(BmoReport {
        bo_seminorm: comp(0),
        ba_seminorm: comp(1),
        bmo_seminorm: comp(2),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpennessResult {
    pub q: f64,
    pub verdict: Verdict,
    pub tried: Vec<(f64, Verdict, f64)>,
}

/// Scans `q = 1 + (p-1)2^{-k}` downward and returns the smallest `q` whose
/// cube characteristic is finite, stopping at the first failure.
pub fn openness_search(
    w: &WeightSpec,
    p: f64,
    r: f64,
    n: usize,
    max_refinement: u32,
    steps: u32,
    opts: &EngineOptions,
) -> Result<OpennessResult> {
    let params = SpaceParams::fock(n, 1.0, p)?;
    let base = characteristic(w, ClassSpec::new(ClassKind::AprCubes { r }, params)?, max_refinement, opts)?;
    let mut tried = vec![(p, base.verdict, base.estimate)];
    if base.verdict != Verdict::Finite {
        return Ok(OpennessResult {
            q: p,
            verdict: base.verdict,
            tried,
        });
    }
    let mut best = None;
    for k in 1..=steps {
        let q = 1.0 + (p - 1.0) * (-(k as f64)).exp2();
        let params = SpaceParams::fock(n, 1.0, q)?;
        let rep = characteristic(w, ClassSpec::new(ClassKind::AprCubes { r }, params)?, max_refinement, opts)?;
        tried.push((q, rep.verdict, rep.estimate));
        if rep.verdict != Verdict::Finite {
            break;
        }
        best = Some(q);
    }
    Ok(match best {
        Some(q) => OpennessResult {
            q,
            verdict: Verdict::Finite,
            tried,
        },
        None => OpennessResult {
            q: p,
            verdict: Verdict::Inconclusive,
            tried,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolder {
    pub epsilon: f64,
    pub constant: f64,
    pub evidence: Vec<(f64, Verdict, f64)>,
    pub explanation: Option<String>,
}

fn rh_sup(w: &WeightSpec, regions: &[Region], eps: f64, opts: &EngineOptions) -> Result<(f64, Verdict)> {
    let res: Vec<Result<(Vec<f64>, Convergence)>> = regions
        .par_iter()
        .map(|reg| match &reg.kind {
            RegionKind::Cube { center, side } => cube_log_averages(w, center, *side, &[1.0 + eps, 1.0], opts.cube_order),
            _ => Err(invalid("reverse Hölder runs on cubes")),
        })
        .collect();
    let mut samples = Vec::with_capacity(regions.len());
    for (reg, r) in regions.iter().zip(res) {
        let (l, status) = r?;
        samples.push(Sample {
            level: reg.depth.unwrap_or(0),
            log_value: l[0] / (1.0 + eps) - l[1],
            status,
        });
    }
    let (_, best, verdict) = fold_samples(&samples);
    Ok((best.map_or(f64::NAN, |b| samples[b].log_value.exp()), verdict))
}

/// Largest `ε ∈ (0, 1]` with a finite reverse Hölder constant on the sampled
/// cubes of side `r`: `ε = 1` first, then bisection.
pub fn reverse_holder_estimate(
    w: &WeightSpec,
    r: f64,
    p: f64,
    n: usize,
    max_refinement: u32,
    opts: &EngineOptions,
) -> Result<ReverseHolder> {
    let params = SpaceParams::fock(n, 1.0, p)?;
    let spec = ClassSpec::new(ClassKind::AprCubes { r }, params)?;
    let pre = characteristic(w, spec, max_refinement, opts)?;
    if pre.verdict != Verdict::Finite {
        return Err(invalid(format!(
            "reverse Hölder needs a finite cube characteristic; got {:?}",
            pre.verdict
        )));
    }
    let regions = region_sampler(&params, RegionFamily::Cubes { r }, max_refinement, opts.jitter)?;
    let mut evidence = Vec::new();
    let (c, v) = rh_sup(w, &regions, 1.0, opts)?;
    evidence.push((1.0, v, c));
    if v == Verdict::Finite {
        return Ok(ReverseHolder {
            epsilon: 1.0,
            constant: c,
            evidence,
            explanation: None,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best: Option<(f64, f64)> = None;
    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        let (c, v) = rh_sup(w, &regions, mid, opts)?;
        evidence.push((mid, v, c));
        if v == Verdict::Finite {
            best = Some((mid, c));
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(match best {
        Some((epsilon, constant)) => ReverseHolder {
            epsilon,
            constant,
            evidence,
            explanation: None,
        },
        None => ReverseHolder {
            epsilon: 0.0,
            constant: f64::NAN,
            evidence,
            explanation: Some("no sampled ε in (0, 1] gave a finite constant".into()),
        },
    })
}

/// Outcome of a quantitative check over sampled configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub constant: f64,
    pub checked: usize,
    pub violations: usize,
    /// Largest `log(lhs) - log(bound)` seen; `≤ 0` when every case holds.
    pub worst_log_margin: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

fn log_cube_mass(w: &WeightSpec, center: &[f64], side: f64, order: usize) -> Result<f64> {
    let (l, _) = cube_log_averages(w, center, side, &[1.0], order)?;
    Ok(l[0] + center.len() as f64 * side.ln())
}

fn cube_characteristic_estimate(w: &WeightSpec, r: f64, p: f64, n: usize, refinement: u32, opts: &EngineOptions) -> Result<f64> {
    let spec = ClassSpec::new(ClassKind::AprCubes { r }, SpaceParams::fock(n, 1.0, p)?)?;
    let rep = characteristic(w, spec, refinement, opts)?;
    if rep.verdict != Verdict::Finite {
        return Err(invalid(format!("cube characteristic at side {r} is {:?}", rep.verdict)));
    }
    Ok(rep.estimate)
}

/// `w(3Q_r) ≤ 3^{2np} K w(Q_r)` on every sampled cube, `K` the measured
/// characteristic at side `3r`.
pub fn lemma32_check(w: &WeightSpec, r: f64, p: f64, n: usize, refinement: u32, opts: &EngineOptions) -> Result<BoundCheck> {
    let k = cube_characteristic_estimate(w, 3.0 * r, p, n, refinement, opts)?;
    let log_c = (2 * n) as f64 * p * 3f64.ln() + k.ln();
    let params = SpaceParams::fock(n, 1.0, p)?;
    let regions = region_sampler(&params, RegionFamily::Cubes { r }, refinement, opts.jitter)?;
    let margins: Vec<Result<f64>> = regions
        .par_iter()
        .map(|reg| match &reg.kind {
            RegionKind::Cube { center, .. } => {
                Ok(log_cube_mass(w, center, 3.0 * r, opts.cube_order)? - log_cube_mass(w, center, r, opts.cube_order)? - log_c)
            }
            _ => unreachable!(),
        })
        .collect();
    summarize(k, margins)
}

fn summarize(constant: f64, margins: Vec<Result<f64>>) -> Result<BoundCheck> {
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    let checked = margins.len();
    for m in margins {
        let m = m?;
        if m > 1e-9 || m.is_nan() {
            violations += 1;
        }
        worst = worst.max(m);
    }
    Ok(BoundCheck {
        constant,
        checked,
        violations,
        worst_log_margin: worst,
    })
}

/// `w(Q_r(ν))/w(Q_r(ν′)) ≤ (3^{2np}K)^{|Γ(ν,ν′)|}` on random lattice pairs with
/// coordinates in `[-reach, reach]`.
#[allow(clippy::too_many_arguments)]
pub fn lemma34_check(
    w: &WeightSpec,
    r: f64,
    p: f64,
    n: usize,
    pairs: usize,
    reach: i64,
    seed: u64,
    refinement: u32,
    opts: &EngineOptions,
) -> Result<BoundCheck> {
    let k = cube_characteristic_estimate(w, 3.0 * r, p, n, refinement, opts)?;
    let log_c = (2 * n) as f64 * p * 3f64.ln() + k.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * n;
    let cases: Vec<(Vec<i64>, Vec<i64>)> = (0..pairs)
        .map(|_| {
            let a = (0..dim).map(|_| rng.gen_range(-reach..=reach)).collect();
            let b = (0..dim).map(|_| rng.gen_range(-reach..=reach)).collect();
            (a, b)
        })
        .collect();
    let margins: Vec<Result<f64>> = cases
        .par_iter()
        .map(|(a, b)| {
            let path = discrete_path(a, b, r)?;
            let ca: Vec<f64> = a.iter().map(|&v| v as f64 * r).collect();
            let cb: Vec<f64> = b.iter().map(|&v| v as f64 * r).collect();
            let lhs = log_cube_mass(w, &ca, r, opts.cube_order)? - log_cube_mass(w, &cb, r, opts.cube_order)?;
            Ok(lhs - path.length as f64 * log_c)
        })
        .collect();
    summarize(k, margins)
}

/// `w(S) ≤ (1 - 1/(2^p K)) w(Q_r)` for random unions `S` of dyadic sub-boxes of
/// sampled cubes with `v(S) ≤ v(Q_r)/2`.
#[allow(clippy::too_many_arguments)]
pub fn prop45_check(
    w: &WeightSpec,
    r: f64,
    p: f64,
    n: usize,
    trials: usize,
    seed: u64,
    refinement: u32,
    opts: &EngineOptions,
) -> Result<BoundCheck> {
    let k = cube_characteristic_estimate(w, r, p, n, refinement, opts)?;
    let delta = 1.0 - 1.0 / (2f64.powf(p) * k);
    let params = SpaceParams::fock(n, 1.0, p)?;
    let regions = region_sampler(&params, RegionFamily::Cubes { r }, refinement, opts.jitter)?;
    let dim = 2 * n;
    let split = 4usize;
    let cells = split.pow(dim as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(usize, Vec<usize>)> = (0..trials)
        .map(|_| {
            let reg = rng.gen_range(0..regions.len());
            let take = rng.gen_range(1..=cells / 2);
            let mut chosen: Vec<usize> = (0..cells).collect();
            for i in 0..take {
                let j = rng.gen_range(i..cells);
                chosen.swap(i, j);
            }
            chosen.truncate(take);
            (reg, chosen)
        })
        .collect();
    let sub = r / split as f64;
    let margins: Vec<Result<f64>> = cases
        .par_iter()
        .map(|(reg, chosen)| {
            let RegionKind::Cube { center, .. } = &regions[*reg].kind else { unreachable!() };
            let total = log_cube_mass(w, center, r, opts.cube_order)?;
            let mut parts = Vec::with_capacity(chosen.len());
            for &c in chosen {
                let mut idx = c;
                let sc: Vec<f64> = (0..dim)
                    .map(|d| {
                        let i = idx % split;
                        idx /= split;
                        center[d] - 0.5 * r + (i as f64 + 0.5) * sub
                    })
                    .collect();
                parts.push((log_cube_mass(w, &sc, sub, opts.cube_order)?, 1.0));
            }
            Ok(log_sum_exp(parts.into_iter()) - total - delta.ln())
        })
        .collect();
    summarize(delta, margins)
}

/// Pseudo-ball and fixed-radius Bergman disk characteristics side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedRadiusExperiment {
    pub radius: f64,
    pub pseudo_balls: CharacteristicReport,
    pub bergman_disks: CharacteristicReport,
    pub verdicts_agree: bool,
}

pub fn fixed_radius_experiment(
    w: &WeightSpec,
    params: &SpaceParams,
    radius: f64,
    max_refinement: u32,
    opts: &EngineOptions,
) -> Result<FixedRadiusExperiment> {
    let spec = ClassSpec::new(ClassKind::BpGammaBalls, *params)?;
    let pseudo_balls = characteristic(w, spec, max_refinement, opts)?;
    let regions = region_sampler(params, RegionFamily::BergmanDisks { radius }, max_refinement, opts.jitter)?;
    let mut bergman_disks = region_characteristic(w, spec, regions, opts)?;
    bergman_disks.notes.push(format!("regions: Bergman disks of radius {radius}"));
    Ok(FixedRadiusExperiment {
        radius,
        verdicts_agree: pseudo_balls.verdict == bergman_disks.verdict,
        pseudo_balls,
        bergman_disks,
    })
}

/// `∫_a^b f` by adaptive Simpson, for cross-checks.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        assert!(power_weight_oracle(0.5, 2.0, 0.0, 1, PowerVariant::Plain).unwrap());
        assert!(power_weight_oracle(2.5, 4.0, 0.0, 1, PowerVariant::Plain).unwrap());
        assert!(!power_weight_oracle(2.5, 4.0, 0.0, 1, PowerVariant::Invariant).unwrap());
        assert!(!power_weight_oracle(-1.0, 2.0, 0.0, 1, PowerVariant::Plain).unwrap());
    }

    #[test]
    fn cube_average_of_exponential() {
        let w: Symbol = "expreal:c=1".parse().unwrap();
        let (l, s) = cube_log_averages(&w, &[3.0, -2.0], 1.0, &[1.0], 10).unwrap();
        let exact = 3.0 + (2.0 * (0.5f64).sinh()).ln();
        assert_eq!(s, Convergence::Convergent);
        assert!((l[0] - exact).abs() < 1e-10);
    }
}
