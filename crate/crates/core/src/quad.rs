//! Gauss–Legendre rules, geometrically graded panels and the refinement
//! protocol that turns a sequence of level estimates into a verdict.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the three-term Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
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
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

const MAX_CACHED_ORDER: usize = 64;

/// Shared cached rule of the given order (orders above 64 are computed fresh
/// and leaked once).
pub fn gl(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Vec<OnceLock<GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=MAX_CACHED_ORDER).map(|_| OnceLock::new()).collect());
    if n <= MAX_CACHED_ORDER {
        cache[n].get_or_init(|| GaussLegendre::new(n))
    } else {
        Box::leak(Box::new(GaussLegendre::new(n)))
    }
}

/// Outcome of the refinement protocol for one integral or supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Convergent,
    Divergent,
    Unresolved,
}

/// Thresholds of the refinement protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    /// Successive relative difference below which a level sequence is convergent.
    pub rel_tol: f64,
    /// Ratio of the last two levels above which the sequence is divergent.
    pub divergence_factor: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            divergence_factor: 1.5,
        }
    }
}

impl Protocol {
    /// Index at which `levels` first meets the convergence tolerance.
    pub fn converged_at(&self, levels: &[f64]) -> Option<usize> {
        (1..levels.len()).find(|&l| {
            let (a, b) = (levels[l - 1], levels[l]);
            a.is_finite() && b.is_finite() && (b - a).abs() <= self.rel_tol * b.abs().max(f64::MIN_POSITIVE)
        })
    }

    /// Verdict for a completed level sequence of a nonnegative quantity.
    pub fn classify(&self, levels: &[f64]) -> Convergence {
        if levels.iter().any(|v| v.is_nan()) {
            return Convergence::Unresolved;
        }
        if levels.iter().any(|v| v.is_infinite()) {
            return Convergence::Divergent;
        }
        if self.converged_at(levels).is_some() {
            return Convergence::Convergent;
        }
        match levels {
            [.., a, b] if a.abs() > 0.0 && (b / a).abs() > self.divergence_factor => Convergence::Divergent,
            [.., a, b] if *a == 0.0 && *b > 0.0 => Convergence::Divergent,
            _ => Convergence::Unresolved,
        }
    }

    pub fn estimate(&self, levels: Vec<f64>) -> Estimate {
        let status = self.classify(&levels);
        let (value, error) = match self.converged_at(&levels) {
            Some(l) => (levels[l], (levels[l] - levels[l - 1]).abs()),
            None => match levels.as_slice() {
                [] => (f64::NAN, f64::INFINITY),
                [v] => (*v, f64::INFINITY),
                [.., a, b] => (*b, (b - a).abs()),
            },
        };
        Estimate {
            value,
            error,
            status,
            trace: levels,
        }
    }
}

/// A quadrature estimate together with its level trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub status: Convergence,
    pub trace: Vec<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            status: Convergence::Convergent,
            trace: vec![value],
        }
    }

    pub fn is_convergent(&self) -> bool {
        self.status == Convergence::Convergent
    }
}

/// Panel counts used by the graded integrators at successive levels.
pub fn level_panels(level: usize) -> usize {
    8usize << level.min(12)
}

/// Breakpoints of a geometric grading toward `focus` inside `[a, b]`:
/// `focus ± width·2^{-k}` for `k = 0..depth`, clipped to the interval.
pub fn graded_breakpoints(a: f64, b: f64, focus: f64, width: f64, depth: usize, out: &mut Vec<f64>) {
    let mut w = width;
    for _ in 0..=depth {
        for x in [focus - w, focus + w] {
            if x > a && x < b {
                out.push(x);
            }
        }
        w *= 0.5;
    }
    if focus > a && focus < b {
        out.push(focus);
    }
}

/// Integral of `f` over `[a, b]` on panels delimited by sorted breakpoints,
/// with each panel additionally split so no panel is wider than `max_width`.
pub fn composite<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    breaks: &[f64],
    max_width: f64,
    mut f: F,
) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    for &hi in breaks.iter().chain(std::iter::once(&b)) {
        if hi <= lo {
            continue;
        }
        let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        let step = (hi - lo) / pieces as f64;
        for j in 0..pieces {
            let pa = lo + step * j as f64;
            let pb = if j + 1 == pieces { hi } else { pa + step };
            total += rule.integrate(pa, pb, &mut f);
        }
        lo = hi;
    }
    total
}

/// One-dimensional integral over `[a, b]` of a function that may be singular
/// at the listed interior or endpoint locations. At level `l` each singular
/// location is approached by `level_panels(l)` geometric panels; the level
/// sequence is classified by `protocol`.
pub fn integrate_singular<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    singular: &[f64],
    max_level: usize,
    order: usize,
    protocol: &Protocol,
    mut f: F,
) -> Estimate {
    let rule = gl(order);
    let mut levels = Vec::with_capacity(max_level + 1);
    let width = b - a;
    for level in 0..=max_level {
        let depth = level_panels(level);
        let mut breaks = Vec::new();
        for &s in singular {
            graded_breakpoints(a, b, s, width, depth, &mut breaks);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let v = composite(rule, a, b, &breaks, width / 8.0, &mut f);
        levels.push(v);
        if singular.is_empty() || protocol.converged_at(&levels).is_some() {
            break;
        }
    }
    if singular.is_empty() {
        let check = composite(gl(order + 6), a, b, &[], width / 8.0, &mut f);
        levels.push(check);
    }
    protocol.estimate(levels)
}
