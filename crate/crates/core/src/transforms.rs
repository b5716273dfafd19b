//! Reproducing kernels and the Berezin, Poisson and heat transforms.

use crate::error::{check_budget, invalid, Error, Result};
use crate::geometry::{one_minus_product, DiskPoint, Space, SpaceParams};
use crate::polar::{self, Focus, PolarDomain, PolarOptions};
use crate::quad::{gl, level_panels, Estimate, Protocol};
use crate::symbols::Symbol;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    BergmanK,
    BergmanNormalized,
    HardyNormalized,
    FockReproducing,
    Heat,
}

fn inner(z: &[C64], u: &[C64]) -> C64 {
    z.iter().zip(u).map(|(a, b)| a * b.conj()).sum()
}

/// Kernel value at `(z, u)`; `Heat` is `(α/π)ⁿ e^{-α|z-u|²}`.
pub fn kernel_eval(kind: KernelKind, z: &[C64], u: &[C64], params: &SpaceParams) -> Result<C64> {
    if z.len() != params.n || u.len() != params.n {
        return Err(invalid(format!("points must lie in dimension {}", params.n)));
    }
    let one = C64::new(1.0, 0.0);
    let n = params.n as f64;
    let singular = |w: C64| -> Result<C64> {
        if w == C64::new(0.0, 0.0) {
            Err(Error::NonFinite("kernel evaluated at boundary contact 1 - z·ū = 0".into()))
        } else {
            Ok(w)
        }
    };
    let v = match kind {
        KernelKind::BergmanK => {
            let w = singular(one - inner(z, u))?;
            (-(n + 1.0 + params.gamma) * w.ln()).exp()
        }
        KernelKind::BergmanNormalized => {
            let e = n + 1.0 + params.gamma;
            let w = singular(one - inner(u, z))?;
            let dz = 1.0 - inner(z, z).re;
            (0.5 * e * dz.ln() - e * w.ln()).exp()
        }
        KernelKind::HardyNormalized => {
            let w = singular(one - inner(u, z))?;
            let dz = 1.0 - inner(z, z).re;
            (0.5 * n * dz.ln() - n * w.ln()).exp()
        }
        KernelKind::FockReproducing => (params.alpha * inner(z, u)).exp(),
        KernelKind::Heat => {
            let d2: f64 = z.iter().zip(u).map(|(a, b)| (a - b).norm_sqr()).sum();
            C64::new((params.alpha / PI).powf(n) * (-params.alpha * d2).exp(), 0.0)
        }
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite(format!("{kind:?} kernel overflowed")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub order: usize,
    pub angular_nodes: usize,
    pub protocol: Protocol,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            order: 10,
            angular_nodes: 64,
            protocol: Protocol::default(),
        }
    }
}

/// Tensor quadrature for the space's reference measure. Transforms use the
/// grid's level and order as their refinement schedule and add panels around
/// the evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub params: SpaceParams,
    pub level: usize,
    pub order: usize,
    pub protocol: Protocol,
    /// Real coordinates: `(x, y)` on the disk, `(θ)` on the circle, `ℝ²ⁿ` on the plane.
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub spacing: Option<f64>,
    pub truncation_radius: Option<f64>,
    pub tail_bound: Option<f64>,
}

/// Lattice spacing resolving the phase `e^{iα Im(z ū)}` out to radius `r`.
pub fn fock_spacing(alpha: f64, r: f64) -> f64 {
    TAU / (alpha * r + (60.0 * alpha).sqrt())
}

pub fn fock_radius(level: usize) -> f64 {
    4.0 * 2f64.sqrt().powi(level as i32)
}

/// Mass of `(α/π)ⁿ e^{-α|x|²}` outside `|x| ≤ r`.
pub fn gaussian_tail(alpha: f64, n: usize, r: f64) -> f64 {
    let x = alpha * r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n {
        term *= x / k as f64;
        sum += term;
    }
    (-x).exp() * sum
}

/// Points of `h ℤ^{dim}` within distance `r` of the origin.
pub fn lattice_ball(h: f64, r: f64, dim: usize) -> Result<Vec<Vec<f64>>> {
    let reach = (r / h).floor() as i64;
    let est = ((2 * reach + 1) as f64).powi(dim as i32);
    if est > 1e9 {
        return Err(Error::Budget {
            what: "lattice nodes",
            needed: usize::MAX,
            budget: crate::error::budget(),
        });
    }
    let mut out = Vec::new();
    let mut idx = vec![-reach; dim];
    let r2 = r * r;
    'outer: loop {
        let x: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= r2 * (1.0 + 1e-12) {
            out.push(x);
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i <= reach {
                continue 'outer;
            }
            *i = -reach;
        }
        break;
    }
    check_budget("lattice nodes", out.len())?;
    Ok(out)
}

pub fn grid_build(params: &SpaceParams, level: usize, options: &GridOptions) -> Result<QuadratureGrid> {
    params.validate()?;
    let mut grid = QuadratureGrid {
        params: *params,
        level,
        order: options.order,
        protocol: options.protocol,
        nodes: Vec::new(),
        weights: Vec::new(),
        spacing: None,
        truncation_radius: None,
        tail_bound: None,
    };
    match params.space {
        Space::BergmanDisk => {
            let k_max = level_panels(level);
            let m = options.angular_nodes;
            check_budget("grid nodes", (k_max + 2) * options.order * m)?;
            let g = params.gamma;
            let rule = gl(options.order);
            let mut radial: Vec<(f64, f64)> = Vec::new();
            for k in 0..k_max {
                let hi = (-(k as f64)).exp2();
                for (t, w) in rule.mapped(0.5 * hi, hi) {
                    let d = (g + 1.0) / PI * (g * (t * (2.0 - t)).ln()).exp() * (1.0 - t);
                    radial.push((t, w * d));
                }
            }
            let tau = (-(k_max as f64)).exp2();
            for (y_lo, y_hi) in polar::tail_panels(tau, g + 1.0) {
                for (y, w) in rule.mapped(y_lo, y_hi) {
                    let t = y.powf(1.0 / (g + 1.0));
                    radial.push((t, w / PI * (g * (2.0 - t).ln()).exp() * (1.0 - t)));
                }
            }
            for (t, wr) in radial {
                for j in 0..m {
                    let theta = TAU * j as f64 / m as f64;
                    let z = DiskPoint::new(t, theta).z();
                    grid.nodes.push(vec![z.re, z.im]);
                    grid.weights.push(wr * TAU / m as f64);
                }
            }
        }
        Space::HardyCircle => {
            let m = options.angular_nodes << level.min(16);
            check_budget("grid nodes", m)?;
            for j in 0..m {
                grid.nodes.push(vec![TAU * j as f64 / m as f64]);
                grid.weights.push(1.0 / m as f64);
            }
        }
        Space::Fock => {
            let r = fock_radius(level);
            let h = fock_spacing(params.alpha, r);
            let nodes = lattice_ball(h, r, 2 * params.n)?;
            let w = h.powi(2 * params.n as i32);
            grid.weights = vec![w; nodes.len()];
            grid.nodes = nodes;
            grid.spacing = Some(h);
            grid.truncation_radius = Some(r);
            grid.tail_bound = Some(gaussian_tail(params.alpha, params.n, r));
        }
        Space::BergmanBall => {
            return Err(Error::Unsupported("ball grids for n > 1".into()));
        }
    }
    Ok(grid)
}

impl QuadratureGrid {
    /// Schedule-only disk grid for the transforms (no node table).
    pub fn disk(params: &SpaceParams, level: usize) -> Result<Self> {
        params.validate()?;
        if params.space != Space::BergmanDisk {
            return Err(invalid("disk grid needs BergmanDisk params"));
        }
        Ok(Self::schedule(params, level))
    }

    pub fn circle(params: &SpaceParams, level: usize) -> Result<Self> {
        params.validate()?;
        if params.space != Space::HardyCircle {
            return Err(invalid("circle grid needs HardyCircle params"));
        }
        Ok(Self::schedule(params, level))
    }

    fn schedule(params: &SpaceParams, level: usize) -> Self {
        Self {
            params: *params,
            level,
            order: 10,
            protocol: Protocol::default(),
            nodes: Vec::new(),
            weights: Vec::new(),
            spacing: None,
            truncation_radius: None,
            tail_bound: None,
        }
    }

    pub fn polar_options(&self) -> PolarOptions {
        PolarOptions {
            order: self.order,
            max_level: self.level,
            protocol: self.protocol,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `log|k_z(u)|` for the normalized Bergman kernel of `dA_γ`.
pub fn log_abs_bergman_kernel(z: DiskPoint, u: DiskPoint, gamma: f64) -> f64 {
    let e = 2.0 + gamma;
    0.5 * e * z.dist2().ln() - e * one_minus_product(u, z).norm().ln()
}

/// `log|k_z(e^{iθ})|` for the normalized Szegő kernel.
pub fn log_abs_hardy_kernel(z: DiskPoint, theta: f64) -> f64 {
    0.5 * z.dist2().ln() - one_minus_product(DiskPoint::boundary(theta), z).norm().ln()
}

fn disk_foci(z: DiskPoint, extra: &[f64]) -> Vec<Focus> {
    let mut foci = Vec::new();
    if z.t < 0.5 {
        foci.push(Focus::peak(z.theta, z.t));
    }
    foci.extend(extra.iter().map(|&a| Focus::singular(a)));
    foci
}

fn require_disk(params: &SpaceParams) -> Result<()> {
    match params.space {
        Space::BergmanDisk => Ok(()),
        Space::BergmanBall => Err(Error::Unsupported("Berezin transforms on the ball (n > 1)".into())),
        _ => Err(invalid("Berezin transforms need Bergman params")),
    }
}

/// `∫ |f|^{t_i} |k_z|^{e_i} dA_γ` for several `(t_i, e_i)` pairs at once.
pub fn berezin_moments(f: &Symbol, z: DiskPoint, pairs: &[(f64, f64)], grid: &QuadratureGrid) -> Result<Vec<Estimate>> {
    require_disk(&grid.params)?;
    if !(z.t > 0.0 && z.t <= 1.0) {
        return Err(invalid("evaluation point must lie in the open disk"));
    }
    let gamma = grid.params.gamma;
    let foci = disk_foci(z, &f.singular_angles());
    let pairs = pairs.to_vec();
    polar::integrate(&PolarDomain::disk(), gamma, &foci, pairs.len(), &grid.polar_options(), |u, out| {
        let lf = f.log_abs_disk(u);
        let lk = log_abs_bergman_kernel(z, u, gamma);
        for (o, (t, e)) in out.iter_mut().zip(&pairs) {
            let lk_term = if *e == 0.0 { 0.0 } else { e * lk };
            let lf_term = if *t == 0.0 { 0.0 } else { t * lf };
            *o = (lf_term + lk_term).exp();
        }
    })
}

/// `B_γ(|f|)(z) = ∫ |f(u)| |k_z(u)|² dA_γ(u)`.
pub fn berezin(f: &Symbol, z: DiskPoint, grid: &QuadratureGrid) -> Result<Estimate> {
    Ok(berezin_moments(f, z, &[(1.0, 2.0)], grid)?.remove(0))
}

/// `B_γ(|f k_z^s|^t)(z) = ∫ |f|^t |k_z|^{st+2} dA_γ`; rejects `st + 2 ≤ 0`.
pub fn twisted_berezin(f: &Symbol, z: DiskPoint, s: f64, t: f64, grid: &QuadratureGrid) -> Result<Estimate> {
    let e = s * t + 2.0;
    if !(e > 0.0) {
        return Err(invalid(format!(
            "kernel exponent st + 2 = {e} must be positive for the twisted transform"
        )));
    }
    Ok(berezin_moments(f, z, &[(t, e)], grid)?.remove(0))
}

/// Real and imaginary parts of a Poisson integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexEstimate {
    pub fn value(&self) -> C64 {
        C64::new(self.re.value, self.im.value)
    }
}

/// Poisson extension `f̂(z) = ∫ f(e^{iθ}) P_z(θ) dθ/2π`.
pub fn poisson_hat(f: &Symbol, z: DiskPoint, grid: &QuadratureGrid) -> Result<ComplexEstimate> {
    if !(z.t > 0.0) {
        return Err(invalid("evaluation point must lie in the open disk"));
    }
    let foci = disk_foci(z, &f.singular_angles());
    let mut est = polar::integrate_circle(-PI, PI, &foci, 2, &grid.polar_options(), |theta, out| {
        let p = (2.0 * log_abs_hardy_kernel(z, theta)).exp() / TAU;
        let v = f.eval_circle(theta);
        out[0] = v.re * p;
        out[1] = v.im * p;
    })?;
    let im = est.pop().unwrap();
    let re = est.pop().unwrap();
    Ok(ComplexEstimate { re, im })
}

/// `∫ |f|^{t_i} |k_z|^{e_i} dσ` on the circle for several pairs.
pub fn poisson_moments(f: &Symbol, z: DiskPoint, pairs: &[(f64, f64)], grid: &QuadratureGrid) -> Result<Vec<Estimate>> {
    if !(z.t > 0.0) {
        return Err(invalid("evaluation point must lie in the open disk"));
    }
    let foci = disk_foci(z, &f.singular_angles());
    polar::integrate_circle(-PI, PI, &foci, pairs.len(), &grid.polar_options(), |theta, out| {
        let lf = f.log_abs_circle(theta);
        let lk = log_abs_hardy_kernel(z, theta);
        for (o, (t, e)) in out.iter_mut().zip(pairs) {
            let lf_term = if *t == 0.0 { 0.0 } else { t * lf };
            *o = (lf_term + e * lk).exp() / TAU;
        }
    })
}

/// Truncation radius and spacing for a heat transform of a symbol in the
/// given growth class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatPlan {
    pub radius: f64,
    pub spacing: f64,
    pub nodes: usize,
}

fn heat_plan(f: &Symbol, power: f64, z: &[f64], alpha: f64, refine: f64) -> Result<HeatPlan> {
    let g = f.plane_growth().ok_or_else(|| {
        Error::Unsupported(format!("`{f}` has no declared growth class on ℂⁿ"))
    })?;
    let (quad, lin, degree) = if power >= 0.0 {
        (g.quad * power, g.lin * power, g.degree * power)
    } else {
        match &f.family {
            crate::symbols::Family::ExpLinear { .. }
            | crate::symbols::Family::ExpReal { .. }
            | crate::symbols::Family::ExpAbs { .. }
            | crate::symbols::Family::Const { .. } => (0.0, g.lin * power.abs(), 0.0),
            crate::symbols::Family::ExpQuad { delta } if *delta <= 0.0 => (delta.abs() * power.abs(), 0.0, 0.0),
            _ => {
                return Err(Error::Unsupported(format!(
                    "negative powers of `{f}` have no declared growth class"
                )))
            }
        }
    };
    if quad >= alpha {
        return Err(invalid(format!(
            "integrand grows like e^{{{quad}|x|²}}, at least the Gaussian rate {alpha}; the heat transform diverges"
        )));
    }
    let a = alpha - quad;
    let zn = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let shift = (2.0 * quad * zn + lin) / (2.0 * a);
    let poly = degree * (2.0 + zn + shift).ln();
    let radius = shift + ((40.0 + poly.max(0.0)) / a).sqrt();
    let spacing = PI / (40.0 * alpha).sqrt() / refine;
    Ok(HeatPlan {
        radius,
        spacing,
        nodes: 0,
    })
}

fn heat_sum(f: &Symbol, power: Option<f64>, z: &[f64], alpha: f64, plan: &HeatPlan) -> Result<(f64, f64)> {
    let dim = z.len();
    let offsets = lattice_ball(plan.spacing, plan.radius, dim)?;
    let n = (dim / 2) as f64;
    let mut logs = Vec::with_capacity(offsets.len());
    let mut signs = Vec::with_capacity(offsets.len());
    let mut x = vec![0.0; dim];
    for v in &offsets {
        for i in 0..dim {
            x[i] = z[i] + v[i];
        }
        let v2: f64 = v.iter().map(|a| a * a).sum();
        let (l, s) = match power {
            Some(t) => (t * f.log_abs_plane(&x), 1.0),
            None => {
                let re = f.eval_plane(&x).re;
                (re.abs().ln(), re.signum())
            }
        };
        logs.push(l - alpha * v2);
        signs.push(s);
    }
    let m = logs.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Ok((0.0, 1.0));
    }
    let s: f64 = logs.iter().zip(&signs).map(|(l, s)| s * (l - m).exp()).sum();
    let log_pref = n * (alpha / PI).ln() + dim as f64 * plan.spacing.ln();
    Ok((m + log_pref + s.abs().ln(), s.signum()))
}

fn heat_estimate(f: &Symbol, power: Option<f64>, z: &[f64], alpha: f64) -> Result<(Estimate, HeatPlan)> {
    if !(alpha > 0.0) {
        return Err(invalid("heat parameter must be positive"));
    }
    if z.is_empty() || !z.len().is_multiple_of(2) {
        return Err(invalid("plane points have an even number of real coordinates"));
    }
    let t = power.unwrap_or(1.0);
    let mut trace = Vec::new();
    let mut plan_used = None;
    for refine in [1.0, 1.25] {
        let plan = heat_plan(f, t, z, alpha, refine)?;
        let (l, s) = heat_sum(f, power, z, alpha, &plan)?;
        trace.push(s * l.exp());
        plan_used = Some(plan);
    }
    let plan = plan_used.unwrap();
    let nodes = ((2.0 * plan.radius / plan.spacing).powi(z.len() as i32)) as usize;
    Ok((
        Protocol {
            rel_tol: 1e-9,
            ..Protocol::default()
        }
        .estimate(trace),
        HeatPlan { nodes, ..plan },
    ))
}

/// `f̃^{(α)}(z) = (α/π)ⁿ ∫ e^{-α|z-u|²} Re f(u) dv(u)` by a translated lattice.
pub fn heat_tilde(f: &Symbol, z: &[f64], alpha: f64) -> Result<Estimate> {
    heat_estimate(f, None, z, alpha).map(|r| r.0)
}

/// Heat transform of `|f|^t`, summed in the log domain.
pub fn heat_tilde_abs_pow(f: &Symbol, t: f64, z: &[f64], alpha: f64) -> Result<Estimate> {
    heat_estimate(f, Some(t), z, alpha).map(|r| r.0)
}

/// Same as [`heat_tilde_abs_pow`], also returning the truncation used.
pub fn heat_tilde_with_plan(f: &Symbol, t: f64, z: &[f64], alpha: f64) -> Result<(Estimate, HeatPlan)> {
    heat_estimate(f, Some(t), z, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bergman_kernel_at_origin_is_one() {
        let params = SpaceParams::bergman_disk(0.5, 2.0).unwrap();
        let z = [C64::new(0.3, -0.7)];
        let v = kernel_eval(KernelKind::BergmanK, &z, &[C64::new(0.0, 0.0)], &params).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        let k0 = kernel_eval(KernelKind::BergmanNormalized, &[C64::new(0.0, 0.0)], &z, &params).unwrap();
        assert!((k0 - 1.0).norm() < 1e-15);
    }

    #[test]
    fn boundary_contact_is_an_error() {
        let params = SpaceParams::bergman_disk(0.0, 2.0).unwrap();
        let one = [C64::new(1.0, 0.0)];
        assert!(kernel_eval(KernelKind::BergmanK, &one, &one, &params).is_err());
    }

    #[test]
    fn disk_grid_total_mass() {
        for gamma in [-0.99, 0.0, 2.0] {
            let params = SpaceParams::bergman_disk(gamma, 2.0).unwrap();
            for level in 0..3 {
                let g = grid_build(&params, level, &GridOptions::default()).unwrap();
                assert!((g.total_weight() - 1.0).abs() < 1e-8, "{gamma} {level} {}", g.total_weight());
                assert!(g.weights.iter().all(|w| *w > 0.0));
            }
        }
    }

    #[test]
    fn heat_refuses_gaussian_growth_at_rate() {
        let f: Symbol = "expquad:delta=0.5".parse().unwrap();
        assert!(heat_tilde(&f, &[0.0, 0.0], 0.5).is_err());
        assert!(heat_tilde(&f, &[0.0, 0.0], 0.6).is_ok());
    }
}
