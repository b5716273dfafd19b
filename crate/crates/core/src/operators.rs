//! Discretized projections, weighted operator norms, Toeplitz truncations and
//! the invertibility criteria for Toeplitz products.

use crate::error::{check_budget, invalid, Error, Result};
use crate::geometry::{boundary_samples, Space, SpaceParams};
use crate::quad::{gl, integrate_singular, Convergence, Protocol};
use crate::symbols::{Family, Symbol, WeightSpec};
use crate::transforms::{
    berezin_moments, fock_radius, fock_spacing, heat_tilde_abs_pow, lattice_ball, poisson_moments, QuadratureGrid,
};
use crate::weight_classes::{fold_samples, plane_samples, Sample, TracePoint, Verdict};
use crate::C64;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    FockP,
    FockH,
    BergmanP,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    MonomialNormalized,
    FourierModes,
    GridNodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub space: SpaceParams,
    pub basis: Basis,
    pub entries: DMatrix<C64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixHeader {
    format: String,
    rows: usize,
    cols: usize,
    dtype: String,
    layout: String,
    basis: Basis,
    space: SpaceParams,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// One JSON header line, then `rows·cols` pairs of little-endian `f64`
    /// (real, imaginary) in row-major order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let header = MatrixHeader {
            format: "weightlab.matrix/1".into(),
            rows: self.entries.nrows(),
            cols: self.entries.ncols(),
            dtype: "complex128-le".into(),
            layout: "row-major".into(),
            basis: self.basis,
            space: self.space,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for i in 0..self.entries.nrows() {
            for j in 0..self.entries.ncols() {
                let v = self.entries[(i, j)];
                out.write_all(&v.re.to_le_bytes())?;
                out.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| invalid("matrix file has no header line"))?;
        let header: MatrixHeader = serde_json::from_slice(&bytes[..nl])?;
        let body = &bytes[nl + 1..];
        if body.len() != header.rows * header.cols * 16 {
            return Err(invalid("matrix body length does not match its header"));
        }
        let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().unwrap());
        let entries = DMatrix::from_fn(header.rows, header.cols, |i, j| {
            let k = 2 * (i * header.cols + j);
            C64::new(f(k), f(k + 1))
        });
        Ok(Self {
            space: header.space,
            basis: header.basis,
            entries,
        })
    }

    /// `row,col,re,im` for every entry; refused above 512 rows.
    pub fn to_csv(&self) -> Result<String> {
        if self.dim() > 512 {
            return Err(invalid("CSV export is limited to N ≤ 512"));
        }
        let mut s = String::from("row,col,re,im\n");
        for i in 0..self.entries.nrows() {
            for j in 0..self.entries.ncols() {
                let v = self.entries[(i, j)];
                s.push_str(&format!("{i},{j},{:e},{:e}\n", v.re, v.im));
            }
        }
        Ok(s)
    }
}

/// Nodes of `grid` as complex points.
fn grid_points(grid: &QuadratureGrid) -> Vec<Vec<C64>> {
    grid.nodes
        .iter()
        .map(|x| x.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
        .collect()
}

fn dot_conj(z: &[C64], u: &[C64]) -> C64 {
    z.iter().zip(u).map(|(a, b)| a * b.conj()).sum()
}

/// Node-wise quadrature of `P_α`, `H_α` (plane grids) or `P_γ` (disk grids).
pub fn apply_projection(kind: ProjectionKind, f: &[C64], grid: &QuadratureGrid) -> Result<Vec<C64>> {
    if f.len() != grid.nodes.len() {
        return Err(invalid("function values must match the grid nodes"));
    }
    let params = &grid.params;
    let space_ok = match kind {
        ProjectionKind::FockP | ProjectionKind::FockH => params.space == Space::Fock,
        ProjectionKind::BergmanP => params.space == Space::BergmanDisk,
    };
    if !space_ok {
        return Err(invalid(format!("{kind:?} does not act on {:?} grids", params.space)));
    }
    check_budget("projection kernel evaluations", f.len().saturating_mul(f.len()) / 64)?;
    let pts = grid_points(grid);
    let n = params.n as f64;
    let alpha = params.alpha;
    let e = 2.0 + params.gamma;
    let out = pts
        .par_iter()
        .map(|z| {
            let mut acc = C64::new(0.0, 0.0);
            for ((u, fu), w) in pts.iter().zip(f).zip(&grid.weights) {
                let k = match kind {
                    ProjectionKind::FockP => {
                        let u2: f64 = u.iter().map(|c| c.norm_sqr()).sum();
                        (alpha / PI).powf(n) * (alpha * dot_conj(z, u) - alpha * u2).exp()
                    }
                    ProjectionKind::FockH => {
                        let d2: f64 = z.iter().zip(u).map(|(a, b)| (a - b).norm_sqr()).sum();
                        C64::new((-0.5 * alpha * d2).exp(), 0.0)
                    }
                    ProjectionKind::BergmanP => (-e * (C64::new(1.0, 0.0) - dot_conj(z, u)).ln()).exp(),
                };
                acc += k * fu * w;
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Plane lattice of the given level, ignoring the node budget in `grid_build`.
fn plane_nodes(params: &SpaceParams, level: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let r = fock_radius(level);
    let h = fock_spacing(params.alpha, r);
    Ok((lattice_ball(h, r, 2 * params.n)?, h))
}

/// Discretized operator on `L^p(w dv)` in Gaussian-conjugated form, as the
/// matrix `D^{1/p} A D^{-1/p}` acting on `ℓ^p`.
pub fn weighted_matrix(kind: ProjectionKind, w: &WeightSpec, p: f64, params: &SpaceParams, level: usize) -> Result<DMatrix<C64>> {
    if params.space != Space::Fock {
        return Err(Error::Unsupported(format!("{kind:?} norm estimation on {:?}", params.space)));
    }
    let (nodes, h) = plane_nodes(params, level)?;
    let m = nodes.len();
    check_budget("operator matrix entries", m * m / 16)?;
    let vol = h.powi(2 * params.n as i32);
    let alpha = params.alpha;
    let norm = match kind {
        ProjectionKind::FockP => (alpha / PI).powi(params.n as i32),
        ProjectionKind::FockH => 1.0,
        ProjectionKind::BergmanP => return Err(Error::Unsupported("BergmanP norm estimation".into())),
    };
    let lw: Vec<f64> = nodes.iter().map(|x| w.log_abs_plane(x)).collect();
    if lw.iter().any(|v| !v.is_finite()) {
        return Err(invalid("weight must be positive and finite on the grid nodes"));
    }
    let z: Vec<Vec<C64>> = nodes
        .iter()
        .map(|x| x.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
        .collect();
    let rows: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    let d2: f64 = nodes[i].iter().zip(&nodes[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    let mag = norm * vol * (-0.5 * alpha * d2 + (lw[i] - lw[j]) / p).exp();
                    match kind {
                        ProjectionKind::FockP => C64::from_polar(mag, alpha * dot_conj(&z[i], &z[j]).im),
                        _ => C64::new(mag, 0.0),
                    }
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

fn lp_norm(v: &[C64], p: f64) -> f64 {
    v.iter().map(|x| x.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn duality(v: &[C64], p: f64) -> Vec<C64> {
    v.iter()
        .map(|x| {
            let a = x.norm();
            if a == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                x * a.powf(p - 2.0)
            }
        })
        .collect()
}

/// Outcome of the `ℓ^p` power method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMethod {
    pub estimate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `‖B‖_{p→p}` by Boyd's iteration from the all-ones vector.
pub fn pnorm_power_method(b: &DMatrix<C64>, p: f64, iters: usize, tol: f64) -> PowerMethod {
    let m = b.ncols();
    let q = p / (p - 1.0);
    let bh = b.adjoint();
    let mut x = nalgebra::DVector::from_element(m, C64::new(1.0, 0.0));
    x /= C64::new(lp_norm(x.as_slice(), p), 0.0);
    let mut est = 0.0;
    for it in 1..=iters {
        let y = b * &x;
        let ny = lp_norm(y.as_slice(), p);
        if ny == 0.0 {
            return PowerMethod {
                estimate: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let dy = nalgebra::DVector::from_vec(duality(y.as_slice(), p));
        let zv = &bh * dy;
        let mut xn = nalgebra::DVector::from_vec(duality(zv.as_slice(), q));
        let nx = lp_norm(xn.as_slice(), p);
        if nx == 0.0 {
            break;
        }
        xn /= C64::new(nx, 0.0);
        let prev = est;
        est = ny;
        x = xn;
        if it > 1 && (est - prev).abs() <= tol * est {
            return PowerMethod {
                estimate: est,
                iterations: it,
                converged: true,
            };
        }
    }
    PowerMethod {
        estimate: est,
        iterations: iters,
        converged: false,
    }
}

/// `σ_max(B)` by Golub–Kahan bidiagonalization with full reorthogonalization,
/// started from the all-ones vector.
pub fn lanczos_norm(b: &DMatrix<C64>, max_steps: usize, tol: f64) -> PowerMethod {
    type V = nalgebra::DVector<C64>;
    let m = b.ncols();
    let steps = max_steps.min(m).max(1);
    let bh = b.adjoint();
    let real = |x: f64| C64::new(x, 0.0);
    let mut vs: Vec<V> = vec![V::from_element(m, real(1.0 / (m as f64).sqrt()))];
    let mut us: Vec<V> = Vec::new();
    let (mut alphas, mut betas): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut est = 0.0_f64;
    let reorth = |x: &mut V, basis: &[V]| {
        for _ in 0..2 {
            for q in basis {
                let c = q.dotc(x);
                x.axpy(-c, q, real(1.0));
            }
        }
    };
    for k in 0..steps {
        let mut u = b * &vs[k];
        if let (Some(prev), Some(&beta)) = (us.last(), betas.last()) {
            u.axpy(real(-beta), prev, real(1.0));
        }
        reorth(&mut u, &us);
        let a = u.norm();
        alphas.push(a);
        if a == 0.0 {
            break;
        }
        u /= real(a);
        us.push(u);
        let size = alphas.len();
        let bd = DMatrix::from_fn(size, size, |i, j| {
            if i == j {
                alphas[i]
            } else if j == i + 1 {
                betas[i]
            } else {
                0.0
            }
        });
        let prev = est;
        est = bd.singular_values().iter().copied().fold(0.0, f64::max);
        if k > 0 && (est - prev).abs() <= tol * est {
            return PowerMethod {
                estimate: est,
                iterations: k + 1,
                converged: true,
            };
        }
        let mut v = &bh * us.last().unwrap();
        v.axpy(real(-a), &vs[k], real(1.0));
        reorth(&mut v, &vs);
        let beta = v.norm();
        if beta <= 1e-14 * est {
            return PowerMethod {
                estimate: est,
                iterations: k + 1,
                converged: true,
            };
        }
        betas.push(beta);
        v /= real(beta);
        vs.push(v);
    }
    PowerMethod {
        estimate: est,
        iterations: steps,
        converged: steps == m,
    }
}

/// `‖B‖_{p→p}`: Boyd's iteration, or bidiagonalization when `p = 2`.
pub fn operator_pnorm(b: &DMatrix<C64>, p: f64, iters: usize, tol: f64) -> PowerMethod {
    if p == 2.0 {
        lanczos_norm(b, iters, tol)
    } else {
        pnorm_power_method(b, p, iters, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpnormLevel {
    pub level: usize,
    pub nodes: usize,
    pub estimate: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpnormReport {
    pub kind: ProjectionKind,
    pub weight: WeightSpec,
    pub p: f64,
    pub estimate: f64,
    pub trace: Vec<OpnormLevel>,
    pub verdict: Verdict,
}

/// Last-two-level ratio at most this is read as a bounded trace.
pub const OPNORM_STABLE_RATIO: f64 = 1.1;
/// Last-two-level ratio above this is read as growth without bound.
pub const OPNORM_GROWTH_RATIO: f64 = 1.5;

/// Weighted operator norm on grids of levels `0..=max_level`, with a verdict
/// from the last two levels.
pub fn weighted_opnorm(
    kind: ProjectionKind,
    w: &WeightSpec,
    p: f64,
    params: &SpaceParams,
    max_level: usize,
    iters: usize,
) -> Result<OpnormReport> {
    if !(p > 1.0) {
        return Err(invalid("p must exceed 1"));
    }
    let mut trace = Vec::new();
    for level in 0..=max_level {
        let b = weighted_matrix(kind, w, p, params, level)?;
        let pm = operator_pnorm(&b, p, iters, 1e-8);
        trace.push(OpnormLevel {
            level,
            nodes: b.nrows(),
            estimate: pm.estimate,
            converged: pm.converged,
        });
    }
    let verdict = match trace.as_slice() {
        [.., a, b] => {
            let ratio = b.estimate / a.estimate;
            if !b.estimate.is_finite() || ratio > OPNORM_GROWTH_RATIO {
                Verdict::Divergent
            } else if ratio <= OPNORM_STABLE_RATIO && b.converged {
                Verdict::Finite
            } else {
                Verdict::Inconclusive
            }
        }
        _ => Verdict::Inconclusive,
    };
    Ok(OpnormReport {
        kind,
        weight: w.clone(),
        p,
        estimate: trace.last().map_or(f64::NAN, |t| t.estimate),
        trace,
        verdict,
    })
}

/// `‖z^k‖²` in the space's reference measure by radial quadrature, for
/// `k < len`.
pub fn monomial_norms_sq(params: &SpaceParams, len: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let proto = Protocol {
        rel_tol: 1e-12,
        ..Protocol::default()
    };
    match params.space {
        Space::HardyCircle => Ok(vec![1.0; len]),
        Space::BergmanDisk => {
            let g = params.gamma;
            (0..len)
                .into_par_iter()
                .map(|k| {
                    // (γ+1) ∫_0^1 s^k (1-s)^γ ds
                    let e = integrate_singular(0.0, 1.0, &[1.0], 6, 12, &proto, |s| {
                        let t = 1.0 - s;
                        if t <= 0.0 {
                            return 0.0;
                        }
                        (k as f64 * s.ln() + g * t.ln()).exp()
                    });
                    if !e.value.is_finite() || e.value <= 0.0 {
                        return Err(Error::NonFinite(format!("‖z^{k}‖² quadrature")));
                    }
                    Ok((g + 1.0) * e.value)
                })
                .collect()
        }
        Space::Fock => {
            if params.n != 1 {
                return Err(Error::Unsupported("monomial bases on ℂⁿ for n > 1".into()));
            }
            let a = params.alpha;
            (0..len)
                .map(|k| {
                    // ∫_0^∞ α s^k e^{-αs} ds, panels of width ~√(k+1)/α around the peak k/α
                    let kf = k as f64;
                    let width = (kf + 1.0).sqrt() / a / 4.0;
                    let hi = (kf + 40.0 + 8.0 * (kf + 1.0).sqrt()) / a;
                    let panels = ((hi / width).ceil() as usize).max(8);
                    let rule = gl(16);
                    let peak = if k == 0 { 0.0 } else { kf * (kf / a).ln() - kf };
                    let mut acc = 0.0;
                    for j in 0..panels {
                        let lo = hi * j as f64 / panels as f64;
                        let up = hi * (j + 1) as f64 / panels as f64;
                        acc += rule.integrate(lo, up, |s| {
                            if s <= 0.0 {
                                return if k == 0 { a * (-peak).exp() } else { 0.0 };
                            }
                            a * (kf * s.ln() - a * s - peak).exp()
                        });
                    }
                    Ok(acc * peak.exp())
                })
                .collect()
        }
        Space::BergmanBall => Err(Error::Unsupported("monomial bases on the ball".into())),
    }
}

/// Fourier coefficients `ĉ(m)`, `|m| < len`, of a boundary symbol by the
/// midpoint rule on `samples` points. Index `m + len - 1`.
pub fn fourier_coefficients(symbol: &Symbol, len: usize, samples: usize) -> Vec<C64> {
    let vals: Vec<C64> = (0..samples)
        .map(|j| symbol.eval_circle(TAU * (j as f64 + 0.5) / samples as f64))
        .collect();
    (0..2 * len - 1)
        .into_par_iter()
        .map(|idx| {
            let m = idx as i64 - (len as i64 - 1);
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                let th = TAU * (j as f64 + 0.5) / samples as f64;
                acc += v * C64::from_polar(1.0, -(m as f64) * th);
            }
            acc / samples as f64
        })
        .collect()
}

fn is_analytic(symbol: &Symbol) -> bool {
    matches!(
        symbol.family,
        Family::Const { .. } | Family::Analytic { .. } | Family::Poly { .. }
    ) || matches!(&symbol.family, Family::ExpLinear { b } if b.len() == 1)
}

/// `N×N` truncation of `T_f` (or `T_{f̄}` when `conjugate`) in the
/// orthonormal monomial / Fourier basis.
pub fn toeplitz_matrix(params: &SpaceParams, symbol: &Symbol, n: usize, conjugate: bool) -> Result<OperatorMatrix> {
    if n == 0 {
        return Err(invalid("truncation size must be positive"));
    }
    check_budget("Toeplitz entries", n * n)?;
    let basis = match params.space {
        Space::HardyCircle => Basis::FourierModes,
        _ => Basis::MonomialNormalized,
    };
    let entries = if is_analytic(symbol) {
        let c = symbol.taylor(n)?;
        let norms: Vec<f64> = monomial_norms_sq(params, n)?.into_iter().map(f64::sqrt).collect();
        let t = DMatrix::from_fn(n, n, |j, k| {
            if j >= k {
                c[j - k] * (norms[j] / norms[k])
            } else {
                C64::new(0.0, 0.0)
            }
        });
        if conjugate {
            t.adjoint()
        } else {
            t
        }
    } else if params.space == Space::HardyCircle {
        let c = fourier_coefficients(symbol, n, 16 * n.max(64));
        let t = DMatrix::from_fn(n, n, |j, k| c[j + n - 1 - k]);
        if conjugate {
            t.adjoint()
        } else {
            t
        }
    } else {
        return Err(Error::Unsupported(format!(
            "Toeplitz truncation of `{symbol}` on {:?} (analytic families only)",
            params.space
        )));
    };
    Ok(OperatorMatrix {
        space: *params,
        basis,
        entries,
    })
}

/// `P_N T_f T_{ḡ} P_N`; equals the product of the truncations because
/// `T_{ḡ}` preserves polynomials of degree `< N` for analytic `g`.
pub fn product_truncation(params: &SpaceParams, f: &Symbol, g: &Symbol, n: usize) -> Result<DMatrix<C64>> {
    if !is_analytic(g) {
        return Err(Error::Unsupported(format!("`{g}` is not in an analytic family")));
    }
    let tf = toeplitz_matrix(params, f, n, false)?;
    let tg = toeplitz_matrix(params, g, n, true)?;
    Ok(tf.entries * tg.entries)
}

pub fn smallest_singular_value(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `(N, σ_min)` of the truncated product for each `N`.
pub fn product_invertibility_evidence(params: &SpaceParams, f: &Symbol, g: &Symbol, ns: &[usize]) -> Result<Vec<(usize, f64)>> {
    if params.p != 2.0 {
        return Err(invalid("matrix evidence is defined at p = 2 only"));
    }
    ns.iter()
        .map(|&n| Ok((n, smallest_singular_value(&product_truncation(params, f, g, n)?))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionVerdict {
    BoundedInvertible,
    NotInvertible,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub inf_product: f64,
    /// Set when the per-level minima of `|fg|` decay toward 0.
    pub vanishing: bool,
    pub sup_product: f64,
    pub sup_verdict: Verdict,
    pub verdict: CriterionVerdict,
    pub sampling: String,
    pub samples: usize,
    pub matrix_evidence: Option<Vec<(usize, f64)>>,
}

/// Minimum over all samples and whether the per-level minima decay to 0.
fn infimum(levels: &[(u32, f64)]) -> (f64, bool) {
    let mut per: Vec<f64> = Vec::new();
    let mut last = None;
    for &(l, v) in levels {
        if last != Some(l) {
            per.push(f64::INFINITY);
            last = Some(l);
        }
        let m = per.last_mut().unwrap();
        *m = m.min(v);
    }
    let min = per.iter().copied().fold(f64::INFINITY, f64::min);
    let decaying = per.len() >= 4 && per[per.len() - 4..].windows(2).all(|w| w[1] < 0.75 * w[0]);
    let vanishing = min == 0.0 || decaying || (per.len() >= 2 && per[per.len() - 1] < 1e-6 * per[0]);
    (if vanishing { 0.0 } else { min }, vanishing)
}

/// The sup verdict with the two-level growth test at [`OPNORM_GROWTH_RATIO`]:
/// sample radii double per level, so power growth shows as a fixed ratio.
fn criterion_sup_verdict(trace: &[TracePoint], verdict: Verdict) -> Verdict {
    match trace {
        [.., a, b] if verdict != Verdict::Divergent && b.running_sup / a.running_sup > OPNORM_GROWTH_RATIO => Verdict::Divergent,
        _ => verdict,
    }
}

fn verdict_of(inf: f64, vanishing: bool, sup: Verdict) -> CriterionVerdict {
    match sup {
        Verdict::Divergent => CriterionVerdict::Unbounded,
        _ if vanishing || inf <= 0.0 => CriterionVerdict::NotInvertible,
        Verdict::Finite => CriterionVerdict::BoundedInvertible,
        Verdict::Inconclusive => CriterionVerdict::Inconclusive,
    }
}

/// Disk and circle sampling depth and directions used by the criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionOptions {
    pub levels: u32,
    pub directions: usize,
}

impl Default for CriterionOptions {
    fn default() -> Self {
        Self {
            levels: 12,
            directions: 16,
        }
    }
}

/// The two product conditions for `T_f T_{ḡ}` on the Bergman space (twisted
/// Berezin transforms) or the Hardy space (Poisson extensions).
pub fn invertibility_criterion(
    params: &SpaceParams,
    f: &Symbol,
    g: &Symbol,
    grid: &QuadratureGrid,
    opts: &CriterionOptions,
) -> Result<CriterionReport> {
    let (p, q) = (params.p, params.q);
    let hardy = match params.space {
        Space::HardyCircle => true,
        Space::BergmanDisk => false,
        other => return Err(Error::Unsupported(format!("criterion on {other:?}"))),
    };
    let mut foci = f.singular_angles();
    foci.extend(g.singular_angles());
    foci.sort_by(f64::total_cmp);
    foci.dedup();
    let pts = boundary_samples(opts.levels, opts.directions, &foci);
    let mut g_grid = grid.clone();
    g_grid.params = *params;
    let results: Vec<Result<(f64, Convergence, f64)>> = pts
        .par_iter()
        .map(|(_, z)| {
            let (a, b) = if hardy {
                (
                    poisson_moments(f, *z, &[(p, p)], &g_grid)?.remove(0),
                    poisson_moments(g, *z, &[(q, q)], &g_grid)?.remove(0),
                )
            } else {
                (
                    berezin_moments(f, *z, &[(p, p)], &g_grid)?.remove(0),
                    berezin_moments(g, *z, &[(q, q)], &g_grid)?.remove(0),
                )
            };
            let lv = a.value.ln() / p + b.value.ln() / q;
            let status = match (a.status, b.status) {
                (Convergence::Divergent, _) | (_, Convergence::Divergent) => Convergence::Divergent,
                (Convergence::Convergent, Convergence::Convergent) => Convergence::Convergent,
                _ => Convergence::Unresolved,
            };
            let fg = (f.log_abs_disk(*z) + g.log_abs_disk(*z)).exp();
            Ok((lv, status, fg))
        })
        .collect();
    let mut samples = Vec::with_capacity(pts.len());
    let mut prods = Vec::with_capacity(pts.len());
    for ((level, _), r) in pts.iter().zip(results) {
        let (log_value, status, fg) = r?;
        samples.push(Sample {
            level: *level,
            log_value,
            status,
        });
        prods.push((*level, fg));
    }
    let (trace, best, sup_verdict) = fold_samples(&samples);
    let sup_verdict = criterion_sup_verdict(&trace, sup_verdict);
    let (inf_product, vanishing) = infimum(&prods);
    Ok(CriterionReport {
        inf_product,
        vanishing,
        sup_product: best.map_or(f64::NAN, |b| samples[b].log_value.exp()),
        sup_verdict,
        verdict: verdict_of(inf_product, vanishing, sup_verdict),
        sampling: format!(
            "z = (1 - 2^-j) e^(iθ), j ≤ {}, {} directions plus points near {:?}",
            opts.levels, opts.directions, foci
        ),
        samples: pts.len(),
        matrix_evidence: None,
    })
}

/// Per-point heat product of the Fock criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockSample {
    pub z: Vec<f64>,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockCriterion {
    pub report: CriterionReport,
    pub points: Vec<FockSample>,
}

/// Sup over lattice shells of `(|f|^p)~^{(αp/2)}(z)^{1/p} (|g|^q)~^{(αq/2)}(z)^{1/q}`.
pub fn fock_product_criterion(f: &Symbol, g: &Symbol, p: f64, alpha: f64, n: usize, levels: u32) -> Result<FockCriterion> {
    let params = SpaceParams::fock(n, alpha, p)?;
    let q = params.q;
    for s in [f, g] {
        let ok = matches!(s.family, Family::Const { .. } | Family::ExpLinear { .. } | Family::Poly { .. });
        if !ok {
            return Err(Error::Unsupported(format!("`{s}` is not an exp-linear or polynomial symbol")));
        }
    }
    let pts = plane_samples(n, levels, 8);
    let results: Vec<Result<(f64, Convergence, f64)>> = pts
        .par_iter()
        .map(|(_, x)| {
            let a = heat_tilde_abs_pow(f, p, x, alpha * p / 2.0)?;
            let b = heat_tilde_abs_pow(g, q, x, alpha * q / 2.0)?;
            let lv = a.value.ln() / p + b.value.ln() / q;
            let status = if a.is_convergent() && b.is_convergent() {
                Convergence::Convergent
            } else {
                Convergence::Unresolved
            };
            let fg = (f.log_abs_plane(x) + g.log_abs_plane(x)).exp();
            Ok((lv, status, fg))
        })
        .collect();
    let mut samples = Vec::new();
    let mut prods = Vec::new();
    let mut points = Vec::new();
    for ((level, x), r) in pts.iter().zip(results) {
        let (log_value, status, fg) = r?;
        samples.push(Sample {
            level: *level,
            log_value,
            status,
        });
        prods.push((*level, fg));
        points.push(FockSample {
            z: x.clone(),
            product: log_value.exp(),
        });
    }
    let (trace, best, sup_verdict) = fold_samples(&samples);
    let sup_verdict = criterion_sup_verdict(&trace, sup_verdict);
    let (inf_product, vanishing) = infimum(&prods);
    Ok(FockCriterion {
        report: CriterionReport {
            inf_product,
            vanishing,
            sup_product: best.map_or(f64::NAN, |b| samples[b].log_value.exp()),
            sup_verdict,
            verdict: verdict_of(inf_product, vanishing, sup_verdict),
            sampling: format!("origin and radii 2^(j-1), j ≤ {levels}, on 8 directions per complex plane"),
            samples: pts.len(),
            matrix_evidence: None,
        },
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarasonResult {
    pub is_pair: bool,
    /// `P(z) = p0 + p1·z`.
    pub p: Option<[C64; 2]>,
    pub c: Option<C64>,
    pub reason: Option<String>,
}

/// `scale·e^{βz}·Q(z)` for the supported entire families.
fn exp_poly_form(s: &Symbol) -> Option<(C64, Vec<C64>)> {
    match &s.family {
        Family::Const { c } => Some((C64::new(0.0, 0.0), vec![c * s.scale])),
        Family::ExpLinear { b } if b.len() == 1 => Some((b[0], vec![s.scale])),
        Family::Poly { coeffs } => Some((C64::new(0.0, 0.0), coeffs.iter().map(|c| c * s.scale).collect())),
        _ => None,
    }
}

fn trim(mut v: Vec<C64>, tol: f64) -> Vec<C64> {
    while v.len() > 1 && v.last().is_some_and(|c| c.norm() <= tol) {
        v.pop();
    }
    v
}

/// Decides whether `f = e^P` with `P` linear and `g = c e^{-P}`.
pub fn sarason_fock_classifier(f: &Symbol, g: &Symbol, tol: f64) -> Result<SarasonResult> {
    let no = |reason: &str| SarasonResult {
        is_pair: false,
        p: None,
        c: None,
        reason: Some(reason.into()),
    };
    if f.is_zero() || g.is_zero() {
        return Ok(no("degenerate symbol"));
    }
    let (Some((bf, qf)), Some((bg, qg))) = (exp_poly_form(f), exp_poly_form(g)) else {
        return Err(Error::Unsupported("classifier accepts constants, exp-linear symbols and polynomials (n = 1)".into()));
    };
    let (qf, qg) = (trim(qf, tol), trim(qg, tol));
    let mut conv = vec![C64::new(0.0, 0.0); qf.len() + qg.len() - 1];
    for (i, a) in qf.iter().enumerate() {
        for (j, b) in qg.iter().enumerate() {
            conv[i + j] += a * b;
        }
    }
    let scale = conv[0].norm().max(1.0);
    let fg_constant = (bf + bg).norm() <= tol && conv[1..].iter().all(|c| c.norm() <= tol * scale) && conv[0].norm() > tol;
    if !fg_constant {
        return Ok(no("fg nonconstant or g not entire"));
    }
    if qf.len() != 1 {
        return Ok(no("f has zeros, so log f is not affine"));
    }
    let cf = qf[0];
    let cg = qg[0];
    Ok(SarasonResult {
        is_pair: true,
        p: Some([cf.ln(), bf]),
        c: Some(cf * cg),
        reason: None,
    })
}

/// Fock kernel weight `e^{-α|z|²}` helper for building test functions on
/// plane grids: `f(z) e^{-α|z|²/2}`.
pub fn gaussian_conjugate(f: &[C64], grid: &QuadratureGrid) -> Vec<C64> {
    let a = grid.params.alpha;
    grid.nodes
        .iter()
        .zip(f)
        .map(|(x, v)| v * (-0.5 * a * x.iter().map(|c| c * c).sum::<f64>()).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_shift() {
        let params = SpaceParams::hardy(2.0).unwrap();
        let z: Symbol = "poly:c=0;1".parse().unwrap();
        let t = toeplitz_matrix(&params, &z, 5, false).unwrap().entries;
        for j in 0..5 {
            for k in 0..5 {
                let e = if j == k + 1 { 1.0 } else { 0.0 };
                assert!((t[(j, k)] - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let params = SpaceParams::hardy(2.0).unwrap();
        let f: Symbol = "analytic:a=0.3".parse().unwrap();
        let m = toeplitz_matrix(&params, &f, 6, false).unwrap();
        let mut buf = Vec::new();
        m.write_binary(&mut buf).unwrap();
        assert_eq!(OperatorMatrix::read_binary(&buf).unwrap(), m);
    }

    #[test]
    fn lanczos_matches_svd() {
        let b = DMatrix::from_fn(40, 40, |i, j| C64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, (i as f64 - j as f64) * 0.1));
        let exact = b.clone().singular_values().iter().copied().fold(0.0, f64::max);
        let r = lanczos_norm(&b, 200, 1e-12);
        assert!((r.estimate - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn power_method_on_diagonal() {
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(3.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        for p in [1.5, 2.0, 3.0] {
            let r = pnorm_power_method(&b, p, 200, 1e-12);
            assert!((r.estimate - 3.0).abs() < 1e-6, "{p} {}", r.estimate);
        }
    }
}
