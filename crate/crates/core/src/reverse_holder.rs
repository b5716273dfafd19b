//! Dyadic reverse Hölder pipeline on the disk: the `C₁` characteristic over
//! dyadic rectangles, the constants chain `δ, δ′, C̃, ε`, and direct checks of
//! the resulting inequalities.

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    boundary_samples, conjugate_exponent, dyadic_subrects, global_dyadic_rects, mobius_disk, DiskPoint, DyadicRect,
    Region, SpaceParams, TreeNode,
};
use crate::quad::Convergence;
use crate::symbols::{Family, Symbol};
use crate::transforms::{berezin_moments, QuadratureGrid};
use crate::weight_classes::{fold_samples, region_log_averages, EngineOptions, Sample, TracePoint, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

fn require_analytic(f: &Symbol) -> Result<()> {
    let ok = match &f.family {
        Family::Const { c } => c.norm() > 0.0,
        Family::Analytic { .. } | Family::ExpLinear { .. } => true,
        _ => false,
    };
    if !ok || f.scale.norm() == 0.0 {
        return Err(invalid(format!(
            "`{f}` is not a nonvanishing symbol from the analytic families (const, analytic, explinear)"
        )));
    }
    Ok(())
}

fn require_p(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p must lie in (1, ∞)"));
    }
    Ok(conjugate_exponent(p))
}

/// Averages of `w = |f|^p` and `w^{-1/(p-1)}` over one dyadic rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareRow {
    pub rect: DyadicRect,
    pub avg_w: f64,
    pub avg_dual: f64,
    pub product: f64,
    pub status: Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    pub value: f64,
    pub verdict: Verdict,
    /// Running sup after each rectangle level.
    pub trace: Vec<TracePoint>,
    pub argmax: Option<DyadicRect>,
    pub squares: Vec<SquareRow>,
}

impl C1Report {
    /// `level,m,k,avg_w,avg_dual,product,status`.
    pub fn squares_csv(&self) -> String {
        let mut s = String::from("level,m,k,avg_w,avg_dual,product,status\n");
        for r in &self.squares {
            let _ = writeln!(
                s,
                "{},{},{},{:e},{:e},{:e},{:?}",
                r.rect.n, r.rect.m, r.rect.k, r.avg_w, r.avg_dual, r.product, r.status
            );
        }
        s
    }
}

fn rect_log_averages(
    f: &Symbol,
    rects: &[DyadicRect],
    exps: &[f64],
    params: &SpaceParams,
    opts: &EngineOptions,
) -> Result<Vec<(Vec<f64>, Convergence)>> {
    rects
        .par_iter()
        .map(|q| region_log_averages(f, &Region::dyadic(*q, params.gamma), exps, params, opts))
        .collect()
}

/// `sup_Q avg_Q(w)·avg_Q(w^{-1/(p-1)})^{p-1}` over every `Q_{n,m,k}` with
/// `n ≤ depth`, for `w = |f|^p` against `dA_γ`.
pub fn c1_characteristic(f: &Symbol, p: f64, gamma: f64, depth: u32, grid: &QuadratureGrid) -> Result<C1Report> {
    require_analytic(f)?;
    require_p(p)?;
    let params = SpaceParams::bergman_disk(gamma, p)?;
    let rects = global_dyadic_rects(depth)?;
    let opts = EngineOptions::from_grid(grid);
    let logs = rect_log_averages(f, &rects, &[p, -p / (p - 1.0)], &params, &opts)?;
    let mut squares = Vec::with_capacity(rects.len());
    let mut samples = Vec::with_capacity(rects.len());
    for (q, (l, status)) in rects.iter().zip(logs) {
        let log_value = l[0] + (p - 1.0) * l[1];
        samples.push(Sample {
            level: q.n,
            log_value,
            status,
        });
        squares.push(SquareRow {
            rect: *q,
            avg_w: l[0].exp(),
            avg_dual: l[1].exp(),
            product: log_value.exp(),
            status,
        });
    }
    let (trace, best, verdict) = fold_samples(&samples);
    Ok(C1Report {
        value: best.map_or(f64::NAN, |b| samples[b].log_value.exp()),
        verdict,
        trace,
        argmax: best.map(|b| rects[b]),
        squares,
    })
}

/// `δ = 1 - 1/(2^p C₁)` and `δ′ = 1 - 1/(2^q C₁^{q-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub delta: f64,
    pub delta_prime: f64,
}

pub fn constants_from_c1(c1: f64, p: f64) -> Result<Deltas> {
    let q = require_p(p)?;
    if !(c1 >= 1.0 && c1.is_finite()) {
        return Err(invalid(format!("C1 = {c1} must be finite and at least 1")));
    }
    Ok(Deltas {
        delta: 1.0 - 1.0 / (p.exp2() * c1),
        delta_prime: 1.0 - 1.0 / (q.exp2() * c1.powf(q - 1.0)),
    })
}

/// `max A_γ(2Q)/A_γ(Q)` over dyadic rectangles of levels `1..=depth`, where
/// `2Q` is the rectangle one quadrisection up.
pub fn doubling_constant(gamma: f64, depth: u32) -> Result<f64> {
    if depth == 0 {
        return Err(invalid("doubling constant needs depth at least 1"));
    }
    if !(gamma > -1.0) {
        return Err(invalid("gamma must exceed -1"));
    }
    let root = TreeNode::new(0, 0, gamma)?;
    let best = dyadic_subrects(&root, depth)?
        .par_iter()
        .map(|s| s.parent.measure(gamma) / s.rect.measure(gamma))
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Admissible range for the reverse Hölder exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissible {
    pub c_tilde: f64,
    pub delta: f64,
    /// `log(1/δ)/log(2C̃)`.
    pub epsilon_max: f64,
}

impl Admissible {
    /// `(1 + (2C̃)^ε/(1 - (2C̃)^ε δ))^{1/(1+ε)}`; requires `0 < ε < ε_max`.
    pub fn rh_constant(&self, eps: f64) -> Result<f64> {
        let a = (2.0 * self.c_tilde).powf(eps);
        if !(eps > 0.0) || !(a * self.delta < 1.0) {
            return Err(invalid(format!(
                "ε = {eps} is outside (0, {}) for C̃ = {}, δ = {}",
                self.epsilon_max, self.c_tilde, self.delta
            )));
        }
        Ok((1.0 + a / (1.0 - a * self.delta)).powf(1.0 / (1.0 + eps)))
    }
}

pub fn admissible_epsilon(c_tilde: f64, delta: f64) -> Result<Admissible> {
    if !(c_tilde >= 1.0 && c_tilde.is_finite()) {
        return Err(invalid("C̃ must be finite and at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("δ must lie in (0, 1)"));
    }
    Ok(Admissible {
        c_tilde,
        delta,
        epsilon_max: (1.0 / delta).ln() / (2.0 * c_tilde).ln(),
    })
}

/// `ε₁ = ε₂p²/(q² + ε₂q - ε₂p)`.
pub fn epsilon_pair(epsilon2: f64, p: f64) -> Result<f64> {
    let q = require_p(p)?;
    if !(epsilon2 > 0.0) {
        return Err(invalid("ε₂ must be positive"));
    }
    let denom = q * q + epsilon2 * q - epsilon2 * p;
    if !(denom > 0.0) {
        return Err(invalid(format!("ε₂ = {epsilon2} makes the pairing denominator non-positive")));
    }
    Ok(epsilon2 * p * p / denom)
}

/// Inverse of [`epsilon_pair`]: the `ε₂` that pairs with a given `ε₁`.
pub fn epsilon_pair_inverse(epsilon1: f64, p: f64) -> Result<f64> {
    let q = require_p(p)?;
    let denom = p * p - epsilon1 * q + epsilon1 * p;
    if !(epsilon1 > 0.0 && denom > 0.0) {
        return Err(invalid(format!("ε₁ = {epsilon1} has no positive partner")));
    }
    Ok(epsilon1 * q * q / denom)
}

/// Worst case of one inequality over an enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub bound: f64,
    pub worst: f64,
    pub worst_rect: Option<DyadicRect>,
    pub checked: usize,
    pub pass: bool,
}

fn check_rows(bound: f64, rows: impl Iterator<Item = (DyadicRect, f64)>) -> InequalityCheck {
    let mut out = InequalityCheck {
        bound,
        worst: f64::NEG_INFINITY,
        worst_rect: None,
        checked: 0,
        pass: true,
    };
    for (q, v) in rows {
        out.checked += 1;
        if v.is_nan() || v > out.worst {
            out.worst = v;
            out.worst_rect = Some(q);
        }
        if !(v <= bound) {
            out.pass = false;
        }
    }
    out
}

/// The full constants chain with per-rectangle evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RHCertificate {
    pub f_spec: Symbol,
    pub p: f64,
    pub gamma: f64,
    pub depth: u32,
    pub c1: f64,
    pub c1_verdict: Verdict,
    pub c1_trace: Vec<TracePoint>,
    pub argmax_rect: Option<DyadicRect>,
    pub delta: f64,
    pub delta_prime: f64,
    pub c_tilde: f64,
    pub epsilon_max: f64,
    pub epsilon_max_prime: f64,
    /// Common exponent used in the per-rectangle checks: the larger of `ε₁, ε₂`.
    pub epsilon: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub epsilon_rule: String,
    pub rh_constant: f64,
    pub rh_constant_prime: f64,
    /// `(avg w^{1+ε})^{1/(1+ε)}/avg w` against `rh_constant`.
    pub reverse_holder_w: InequalityCheck,
    /// Same for `σ = w^{-1/(p-1)}` against `rh_constant_prime`.
    pub reverse_holder_dual: InequalityCheck,
    /// Characteristic of `w^{1+ε}` against `C₁^{1+ε}(1+K_δ)(1+K_δ′)^{p-1}`.
    pub composite: InequalityCheck,
    pub pass: bool,
    #[serde(skip)]
    pub squares: Vec<SquareRow>,
}

impl RHCertificate {
    pub fn squares_csv(&self) -> String {
        C1Report {
            value: self.c1,
            verdict: self.c1_verdict,
            trace: Vec::new(),
            argmax: None,
            squares: self.squares.clone(),
        }
        .squares_csv()
    }
}

/// Runs the pipeline at one depth: `C₁`, `δ, δ′`, `C̃`, the exponent pair and
/// the reverse Hölder inequalities on every rectangle.
pub fn rh_certificate(f: &Symbol, p: f64, gamma: f64, depth: u32, grid: &QuadratureGrid) -> Result<RHCertificate> {
    let c1r = c1_characteristic(f, p, gamma, depth, grid)?;
    if c1r.verdict != Verdict::Finite {
        return Err(Error::NonFinite(format!("C1 characteristic is {:?}", c1r.verdict)));
    }
    let c1 = c1r.value.max(1.0);
    let d = constants_from_c1(c1, p)?;
    let c_tilde = doubling_constant(gamma, depth.max(1))?;
    let adm = admissible_epsilon(c_tilde, d.delta)?;
    let adm_prime = admissible_epsilon(c_tilde, d.delta_prime)?;
    let target = 0.5 * adm.epsilon_max.min(adm_prime.epsilon_max);
    let (epsilon1, epsilon2, rule) = if p <= 2.0 {
        (epsilon_pair(target, p)?, target, "ε₂ = ½·min(ε_max(δ), ε_max(δ′)), ε₁ paired")
    } else {
        (target, epsilon_pair_inverse(target, p)?, "ε₁ = ½·min(ε_max(δ), ε_max(δ′)), ε₂ paired")
    };
    let epsilon = epsilon1.max(epsilon2);
    let rh = adm.rh_constant(epsilon)?;
    let rh_prime = adm_prime.rh_constant(epsilon)?;

    let params = SpaceParams::bergman_disk(gamma, p)?;
    let opts = EngineOptions::from_grid(grid);
    let rects: Vec<DyadicRect> = c1r.squares.iter().map(|s| s.rect).collect();
    let s = p / (p - 1.0);
    let logs = rect_log_averages(f, &rects, &[p * (1.0 + epsilon), -s * (1.0 + epsilon)], &params, &opts)?;
    let e1 = 1.0 + epsilon;
    let rows: Vec<(DyadicRect, f64, f64, f64)> = c1r
        .squares
        .iter()
        .zip(&logs)
        .map(|(row, (l, _))| {
            let lw = (l[0] / e1 - row.avg_w.ln()).exp();
            let ld = (l[1] / e1 - row.avg_dual.ln()).exp();
            let comp = (l[0] + (p - 1.0) * l[1]).exp();
            (row.rect, lw, ld, comp)
        })
        .collect();
    let k = |a: &Admissible| {
        let x = (2.0 * a.c_tilde).powf(epsilon);
        1.0 + x / (1.0 - x * a.delta)
    };
    let composite_bound = c1.powf(e1) * k(&adm) * k(&adm_prime).powf(p - 1.0);
    let reverse_holder_w = check_rows(rh, rows.iter().map(|r| (r.0, r.1)));
    let reverse_holder_dual = check_rows(rh_prime, rows.iter().map(|r| (r.0, r.2)));
    let composite = check_rows(composite_bound, rows.iter().map(|r| (r.0, r.3)));
    let all_converged = logs.iter().all(|(_, st)| *st == Convergence::Convergent);
    Ok(RHCertificate {
        f_spec: f.clone(),
        p,
        gamma,
        depth,
        c1,
        c1_verdict: c1r.verdict,
        c1_trace: c1r.trace,
        argmax_rect: c1r.argmax,
        delta: d.delta,
        delta_prime: d.delta_prime,
        c_tilde,
        epsilon_max: adm.epsilon_max,
        epsilon_max_prime: adm_prime.epsilon_max,
        epsilon,
        epsilon1,
        epsilon2,
        epsilon_rule: rule.into(),
        rh_constant: rh,
        rh_constant_prime: rh_prime,
        pass: all_converged && reverse_holder_w.pass && reverse_holder_dual.pass && composite.pass,
        reverse_holder_w,
        reverse_holder_dual,
        composite,
        squares: c1r.squares,
    })
}

/// The product at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointProduct {
    pub level: u32,
    pub z: DiskPoint,
    pub value: f64,
    pub status: Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem51Report {
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// Products with `ε₁ = ε₂ = 0`.
    pub base_sup: f64,
    pub base_verdict: Verdict,
    pub sup: f64,
    pub verdict: Verdict,
    pub trace: Vec<TracePoint>,
    pub argmax: Option<DiskPoint>,
    pub points: Vec<PointProduct>,
}

/// `{B_γ(|f k_z^{1-2/p}|^{p+ε₁})(z)}^{1/(p+ε₁)}·{B_γ(|f^{-1} k_z^{1-2/q}|^{q+ε₂})(z)}^{1/(q+ε₂)}`
/// in log form, with a joint status.
pub fn twisted_product(
    f: &Symbol,
    p: f64,
    epsilon1: f64,
    epsilon2: f64,
    z: DiskPoint,
    grid: &QuadratureGrid,
) -> Result<(f64, Convergence)> {
    let q = require_p(p)?;
    let (a, b) = (p + epsilon1, q + epsilon2);
    let pairs = [(a, (1.0 - 2.0 / p) * a + 2.0), (-b, (1.0 - 2.0 / q) * b + 2.0)];
    if pairs.iter().any(|(_, e)| !(*e > 0.0)) {
        return Err(invalid("kernel exponent must be positive"));
    }
    let est = berezin_moments(f, z, &pairs, grid)?;
    let status = match (est[0].status, est[1].status) {
        (Convergence::Divergent, _) | (_, Convergence::Divergent) => Convergence::Divergent,
        (Convergence::Convergent, Convergence::Convergent) => Convergence::Convergent,
        _ => Convergence::Unresolved,
    };
    Ok((est[0].value.ln() / a + est[1].value.ln() / b, status))
}

fn fold_points(points: &[PointProduct]) -> (f64, Verdict, Vec<TracePoint>, Option<DiskPoint>) {
    let samples: Vec<Sample> = points
        .iter()
        .map(|pt| Sample {
            level: pt.level,
            log_value: pt.value.ln(),
            status: pt.status,
        })
        .collect();
    let (trace, best, verdict) = fold_samples(&samples);
    (
        best.map_or(f64::NAN, |b| points[b].value),
        verdict,
        trace,
        best.map(|b| points[b].z),
    )
}

/// Evaluates the twisted product at the sample points, first with `ε = 0`
/// and then with the given pair. The samples are visited in level order.
pub fn verify_theorem51(
    f: &Symbol,
    p: f64,
    epsilon1: f64,
    epsilon2: f64,
    z_samples: &[(u32, DiskPoint)],
    grid: &QuadratureGrid,
) -> Result<Theorem51Report> {
    require_analytic(f)?;
    let mut samples = z_samples.to_vec();
    samples.sort_by_key(|s| s.0);
    let eval = |e1: f64, e2: f64| -> Result<Vec<PointProduct>> {
        samples
            .par_iter()
            .map(|&(level, z)| {
                let (lv, status) = twisted_product(f, p, e1, e2, z, grid)?;
                Ok(PointProduct {
                    level,
                    z,
                    value: lv.exp(),
                    status,
                })
            })
            .collect()
    };
    let base = eval(0.0, 0.0)?;
    let (base_sup, base_verdict, _, _) = fold_points(&base);
    if base_verdict == Verdict::Divergent {
        return Err(Error::NonFinite("the ε = 0 product diverges on the samples".into()));
    }
    let points = eval(epsilon1, epsilon2)?;
    let (sup, verdict, trace, argmax) = fold_points(&points);
    Ok(Theorem51Report {
        epsilon1,
        epsilon2,
        base_sup,
        base_verdict,
        sup,
        verdict,
        trace,
        argmax,
        points,
    })
}

/// `z = (1 - 2^{-j})e^{iθ}` for `j = 0..=levels` and `dirs` directions, plus
/// the points aimed at the singular angles of `f`.
pub fn theorem51_samples(f: &Symbol, levels: u32, dirs: usize) -> Vec<(u32, DiskPoint)> {
    boundary_samples(levels, dirs, &f.singular_angles())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma59Report {
    pub epsilon: f64,
    /// Smallest `C` passing every trial.
    pub constant: f64,
    pub trials: usize,
    pub worst_beta: Option<(u32, u64)>,
}

/// Depth of the leaf rectangles whose unions form the test sets.
pub const LEMMA59_LEAF_DEPTH: u32 = 3;

/// Smallest `C` with `w^{1+ε}(E) ≤ C·w^{1+ε}(S_β)(A_γ(E)/A_γ(S_β))^{ε/(1+ε)}`
/// over `E = S_β` and random unions `E` of leaf rectangles of each `S_β`. Trial `t` draws
/// from ChaCha stream `t` of `seed`, so a longer run extends a shorter one.
#[allow(clippy::too_many_arguments)]
pub fn lemma59_check(
    f: &Symbol,
    p: f64,
    gamma: f64,
    epsilon: f64,
    betas: &[TreeNode],
    subset_trials: usize,
    seed: u64,
    grid: &QuadratureGrid,
) -> Result<Lemma59Report> {
    require_analytic(f)?;
    require_p(p)?;
    if !(epsilon > 0.0) {
        return Err(invalid("ε must be positive"));
    }
    let params = SpaceParams::bergman_disk(gamma, p)?;
    let opts = EngineOptions::from_grid(grid);
    let expo = 1.0 - 1.0 / (1.0 + epsilon);
    let mut constant: f64 = 0.0;
    let mut worst_beta = None;
    for beta in betas {
        let leaves: Vec<DyadicRect> = dyadic_subrects(beta, LEMMA59_LEAF_DEPTH)?
            .into_iter()
            .filter(|s| s.rect.n == beta.depth + LEMMA59_LEAF_DEPTH)
            .map(|s| s.rect)
            .collect();
        let mass: Vec<f64> = leaves.iter().map(|q| q.measure(gamma)).collect();
        let logs = rect_log_averages(f, &leaves, &[p * (1.0 + epsilon)], &params, &opts)?;
        let wmass: Vec<f64> = logs.iter().zip(&mass).map(|((l, _), m)| l[0].exp() * m).collect();
        let (w_total, a_total) = (wmass.iter().sum::<f64>(), mass.iter().sum::<f64>());
        let c = (0..subset_trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let density: f64 = rng.gen();
                let (mut we, mut ae) = (0.0, 0.0);
                for (i, (wm, m)) in wmass.iter().zip(&mass).enumerate() {
                    if rng.gen::<f64>() < density || (ae == 0.0 && i + 1 == mass.len()) {
                        we += wm;
                        ae += m;
                    }
                }
                (we / w_total) / (ae / a_total).powf(expo)
            })
            .reduce(|| 1.0, f64::max);
        if c > constant {
            constant = c;
            worst_beta = Some((beta.depth, beta.index));
        }
    }
    Ok(Lemma59Report {
        epsilon,
        constant,
        trials: subset_trials,
        worst_beta,
    })
}

/// Worst `max(|f(z)|/|f(w)|, |f(w)|/|f(z)|)` over `pair_samples` seeded pairs
/// with `z` in the Bergman disk `D(w, R)`.
pub fn lemma52_check(f: &Symbol, radius: f64, pair_samples: usize, seed: u64) -> Result<f64> {
    require_analytic(f)?;
    if !(radius > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    let rho = radius.tanh();
    let worst = (0..pair_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let w = DiskPoint::new((-12.0 * rng.gen::<f64>()).exp2(), std::f64::consts::TAU * rng.gen::<f64>());
            let v = crate::C64::from_polar(rho * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>());
            let z = DiskPoint::from_complex(mobius_disk(w.z(), v));
            (f.log_abs_disk(z) - f.log_abs_disk(w)).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst.exp())
}
