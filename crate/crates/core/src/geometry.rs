//! Domains, metrics, region families, the Bergman tree of the disk and
//! lattice paths in ℝ²ⁿ.

use crate::error::{check_budget, invalid, Result};
use crate::polar::{self, Angular, PolarDomain, PolarOptions};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    BergmanDisk,
    BergmanBall,
    HardyCircle,
    Fock,
}

/// Function space, exponent and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub space: Space,
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

impl SpaceParams {
    pub fn new(space: Space, n: usize, gamma: f64, alpha: f64, p: f64) -> Result<Self> {
        let params = Self {
            space,
            n,
            gamma,
            alpha,
            p,
            q: conjugate_exponent(p),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn bergman_disk(gamma: f64, p: f64) -> Result<Self> {
        Self::new(Space::BergmanDisk, 1, gamma, 1.0, p)
    }

    pub fn hardy(p: f64) -> Result<Self> {
        Self::new(Space::HardyCircle, 1, 0.0, 1.0, p)
    }

    pub fn fock(n: usize, alpha: f64, p: f64) -> Result<Self> {
        Self::new(Space::Fock, n, 0.0, alpha, p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(invalid(format!("p must exceed 1, got {}", self.p)));
        }
        if self.q != conjugate_exponent(self.p) {
            return Err(invalid("q must equal p/(p-1)"));
        }
        if self.n == 0 {
            return Err(invalid("dimension n must be at least 1"));
        }
        match self.space {
            Space::BergmanDisk | Space::BergmanBall if !(self.gamma > -1.0 && self.gamma.is_finite()) => {
                Err(invalid(format!("gamma must exceed -1, got {}", self.gamma)))
            }
            Space::BergmanDisk | Space::HardyCircle if self.n != 1 => {
                Err(invalid("disk and circle spaces force n = 1"))
            }
            Space::Fock if !(self.alpha > 0.0 && self.alpha.is_finite()) => {
                Err(invalid(format!("alpha must be positive, got {}", self.alpha)))
            }
            _ => Ok(()),
        }
    }
}

/// A point `(1 - t)·e^{iθ}` of the closed disk, carrying `t = 1 - |z|` so
/// that `1 - |z|²` stays accurate next to the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub t: f64,
    pub theta: f64,
}

impl DiskPoint {
    pub fn new(t: f64, theta: f64) -> Self {
        Self { t, theta }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Self { t: 1.0 - r, theta }
    }

    /// The origin maps to angle 0.
    pub fn from_complex(z: C64) -> Self {
        let r = z.norm();
        let theta = if r == 0.0 { 0.0 } else { z.arg() };
        Self { t: 1.0 - r, theta }
    }

    pub fn boundary(theta: f64) -> Self {
        Self { t: 0.0, theta }
    }

    pub fn r(&self) -> f64 {
        1.0 - self.t
    }

    pub fn z(&self) -> C64 {
        C64::from_polar(self.r(), self.theta)
    }

    /// `1 - |z|²`.
    pub fn dist2(&self) -> f64 {
        self.t * (2.0 - self.t)
    }

    /// `1 - z`, accurate near `z = 1`.
    pub fn one_minus(&self) -> C64 {
        one_minus_product(*self, DiskPoint::new(0.0, 0.0))
    }
}

/// `1 - a·b̄` computed without cancellation when both points are near the
/// same boundary point.
pub fn one_minus_product(a: DiskPoint, b: DiskPoint) -> C64 {
    let psi = a.theta - b.theta;
    let one_minus_rho = a.t + b.t - a.t * b.t;
    let rho = 1.0 - one_minus_rho;
    let s = (0.5 * psi).sin();
    C64::new(one_minus_rho + 2.0 * rho * s * s, -rho * psi.sin())
}

fn unit_direction(z: &[C64]) -> Vec<C64> {
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        let mut e = vec![C64::new(0.0, 0.0); z.len()];
        e[0] = C64::new(1.0, 0.0);
        e
    } else {
        z.iter().map(|c| c / norm).collect()
    }
}

/// `d(z, u) = ||z| - |u|| + |1 - ⟨z/|z|, u/|u|⟩|` with `0/|0| := e₁`.
pub fn pseudo_metric(z: &[C64], u: &[C64]) -> f64 {
    assert_eq!(z.len(), u.len(), "points must share a dimension");
    let nz = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nu = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let (a, b) = (unit_direction(z), unit_direction(u));
    let inner: C64 = a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum();
    (nz - nu).abs() + (C64::new(1.0, 0.0) - inner).norm()
}

/// Disk version of [`pseudo_metric`] on [`DiskPoint`]s.
pub fn pseudo_metric_disk(a: DiskPoint, b: DiskPoint) -> f64 {
    (a.t - b.t).abs() + 2.0 * (0.5 * (a.theta - b.theta)).sin().abs()
}

/// `φ_u(w) = (u - w)/(1 - ū w)`.
pub fn mobius_disk(u: C64, w: C64) -> C64 {
    (u - w) / (C64::new(1.0, 0.0) - u.conj() * w)
}

/// Hyperbolic distance `½ log((1+ρ)/(1-ρ))`, `ρ = |φ_c(z)|`.
pub fn bergman_distance(center: C64, z: C64) -> f64 {
    mobius_disk(center, z).norm().atanh()
}

/// Closed Bergman disk membership.
pub fn bergman_disk_contains(center: C64, radius: f64, z: C64) -> bool {
    mobius_disk(center, z).norm() <= radius.tanh()
}

/// Annular sector `{(1-t)e^{iθ} : t_lo ≤ t ≤ t_hi, θ_lo ≤ θ ≤ θ_hi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarBox {
    pub t_lo: f64,
    pub t_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl PolarBox {
    /// Normalized `A_γ` measure in closed form.
    pub fn measure(&self, gamma: f64) -> f64 {
        let g = gamma + 1.0;
        let outer = self.t_lo * (2.0 - self.t_lo);
        let inner = self.t_hi * (2.0 - self.t_hi);
        let radial = if outer == 0.0 {
            inner.powf(g)
        } else {
            -inner.powf(g) * (g * (outer / inner).ln()).exp_m1()
        };
        (self.theta_hi - self.theta_lo) / TAU * radial
    }

    pub fn domain(&self) -> PolarDomain {
        PolarDomain {
            t_lo: self.t_lo,
            t_hi: self.t_hi,
            angular: Angular::Range {
                lo: self.theta_lo,
                hi: self.theta_hi,
            },
        }
    }

    pub fn contains(&self, p: DiskPoint) -> bool {
        let th = (p.theta - self.theta_lo).rem_euclid(TAU) + self.theta_lo;
        p.t >= self.t_lo && p.t <= self.t_hi && th >= self.theta_lo && th <= self.theta_hi
    }
}

/// `Q_{n,m,k}`: radii `[(m-1)2^{-n}, m 2^{-n})`, angles `[(k-1)2^{1-n}π, k 2^{1-n}π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicRect {
    pub n: u32,
    pub m: u64,
    pub k: u64,
}

impl DyadicRect {
    pub fn new(n: u32, m: u64, k: u64) -> Result<Self> {
        let side = 1u64 << n;
        if n > 60 || m == 0 || k == 0 || m > side || k > side {
            return Err(invalid(format!("Q_{{{n},{m},{k}}} out of range")));
        }
        Ok(Self { n, m, k })
    }

    pub fn unit_disk() -> Self {
        Self { n: 0, m: 1, k: 1 }
    }

    fn scale(&self) -> f64 {
        (-(self.n as f64)).exp2()
    }

    pub fn polar_box(&self) -> PolarBox {
        let h = self.scale();
        let side = 1u64 << self.n;
        PolarBox {
            t_lo: (side - self.m) as f64 * h,
            t_hi: (side - self.m + 1) as f64 * h,
            theta_lo: (self.k - 1) as f64 * TAU * h,
            theta_hi: self.k as f64 * TAU * h,
        }
    }

    /// `z_Q = (m - ½)2^{-n} e^{i(k - ½)2^{1-n}π}`.
    pub fn center(&self) -> C64 {
        let h = self.scale();
        C64::from_polar((self.m as f64 - 0.5) * h, (self.k as f64 - 0.5) * TAU * h)
    }

    pub fn center_point(&self) -> DiskPoint {
        let h = self.scale();
        let side = 1u64 << self.n;
        DiskPoint::new((side - self.m) as f64 * h + 0.5 * h, (self.k as f64 - 0.5) * TAU * h)
    }

    pub fn measure(&self, gamma: f64) -> f64 {
        self.polar_box().measure(gamma)
    }

    pub fn touches_boundary(&self) -> bool {
        self.m == 1u64 << self.n
    }

    /// The double `2Q`: the rectangle one quadrisection shallower.
    pub fn parent(&self) -> Option<Self> {
        (self.n > 0).then(|| Self {
            n: self.n - 1,
            m: self.m.div_ceil(2),
            k: self.k.div_ceil(2),
        })
    }

    pub fn children(&self) -> [Self; 4] {
        let (n, m, k) = (self.n + 1, 2 * self.m, 2 * self.k);
        [
            Self { n, m: m - 1, k: k - 1 },
            Self { n, m: m - 1, k },
            Self { n, m, k: k - 1 },
            Self { n, m, k },
        ]
    }

    pub fn contains_rect(&self, other: &Self) -> bool {
        if other.n < self.n {
            return false;
        }
        let shift = other.n - self.n;
        (other.m - 1) >> shift == self.m - 1 && (other.k - 1) >> shift == self.k - 1
    }
}

/// Node `β = (n, k)` of the Bergman tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub depth: u32,
    pub index: u64,
    pub center: C64,
    pub measure_s: f64,
    pub measure_t: f64,
}

impl TreeNode {
    pub fn new(depth: u32, index: u64, gamma: f64) -> Result<Self> {
        if depth > 60 || index >= 1u64 << depth {
            return Err(invalid(format!("tree node ({depth},{index}) out of range")));
        }
        let h = (-(depth as f64)).exp2();
        let center = C64::from_polar(1.0 - 0.75 * h, (index as f64 + 0.5) * TAU * h);
        let mut node = Self {
            depth,
            index,
            center,
            measure_s: 0.0,
            measure_t: 0.0,
        };
        node.measure_s = node.carleson_rect().measure(gamma);
        node.measure_t = node.top_box().measure(gamma);
        Ok(node)
    }

    /// `S_β = Q_{n, 2ⁿ, k+1}`.
    pub fn carleson_rect(&self) -> DyadicRect {
        DyadicRect {
            n: self.depth,
            m: 1u64 << self.depth,
            k: self.index + 1,
        }
    }

    pub fn carleson_box(&self) -> PolarBox {
        self.carleson_rect().polar_box()
    }

    /// `T_β`: the part of `S_β` not covered by its children.
    pub fn top_box(&self) -> PolarBox {
        let h = (-(self.depth as f64)).exp2();
        let s = self.carleson_box();
        PolarBox {
            t_lo: 0.5 * h,
            t_hi: h,
            ..s
        }
    }

    pub fn children(&self, gamma: f64) -> Result<[Self; 2]> {
        Ok([
            Self::new(self.depth + 1, 2 * self.index, gamma)?,
            Self::new(self.depth + 1, 2 * self.index + 1, gamma)?,
        ])
    }

    /// `β ≤ β′` iff `S_{β′} ⊆ S_β`.
    pub fn precedes(&self, other: &Self) -> bool {
        other.depth >= self.depth && other.index >> (other.depth - self.depth) == self.index
    }
}

/// All tree nodes of depth at most `max_depth`, breadth first.
pub fn tree_decompose(gamma: f64, max_depth: u32) -> Result<Vec<TreeNode>> {
    if max_depth > 40 {
        return Err(invalid("tree depth above 40"));
    }
    check_budget("tree nodes", (2usize << max_depth) - 1)?;
    let mut out = Vec::with_capacity((2usize << max_depth) - 1);
    for d in 0..=max_depth {
        for k in 0..1u64 << d {
            out.push(TreeNode::new(d, k, gamma)?);
        }
    }
    Ok(out)
}

/// A dyadic subrectangle with its double.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubRect {
    pub rect: DyadicRect,
    pub parent: DyadicRect,
    pub center: C64,
}

/// Subrectangles of `S_β` from 1 to `depth` quadrisections, shallow first.
pub fn dyadic_subrects(beta: &TreeNode, depth: u32) -> Result<Vec<SubRect>> {
    if depth == 0 {
        return Err(invalid("quadrisection depth must be at least 1"));
    }
    let total: usize = (1..=depth).map(|d| 1usize << (2 * d)).sum();
    check_budget("dyadic subrectangles", total)?;
    let mut out = Vec::with_capacity(total);
    let mut layer = vec![beta.carleson_rect()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(layer.len() * 4);
        for q in &layer {
            for c in q.children() {
                out.push(SubRect {
                    rect: c,
                    parent: *q,
                    center: c.center(),
                });
                next.push(c);
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Every `Q_{n,m,k}` with `n ≤ max_level`, level by level.
pub fn global_dyadic_rects(max_level: u32) -> Result<Vec<DyadicRect>> {
    if max_level > 30 {
        return Err(invalid("dyadic level above 30"));
    }
    let total: usize = (0..=max_level).map(|d| 1usize << (2 * d)).sum();
    check_budget("dyadic rectangles", total)?;
    let mut out = Vec::with_capacity(total);
    for n in 0..=max_level {
        let side = 1u64 << n;
        for m in 1..=side {
            for k in 1..=side {
                out.push(DyadicRect { n, m, k });
            }
        }
    }
    Ok(out)
}

/// `S̃_β`: `S_β` together with its two angular neighbours (indices mod 2ⁿ).
pub fn neighbor_union(beta: &TreeNode, gamma: f64) -> Result<Region> {
    if beta.depth == 0 {
        return Err(invalid("neighbor union needs depth at least 1"));
    }
    let side = 1u64 << beta.depth;
    let mut indices = vec![(beta.index + side - 1) % side, beta.index, (beta.index + 1) % side];
    indices.sort_unstable();
    indices.dedup();
    let measure = indices
        .iter()
        .map(|&k| TreeNode::new(beta.depth, k, gamma).map(|n| n.measure_s))
        .sum::<Result<f64>>()?;
    Ok(Region {
        kind: RegionKind::CarlesonUnion {
            depth: beta.depth,
            indices,
        },
        measure,
        depth: Some(beta.depth),
        index: Some(beta.index),
    })
}

/// One axis-aligned run of a [`LatticePath`], in units of the spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSegment {
    pub axis: usize,
    pub from: i64,
    pub to: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePath {
    pub r: f64,
    pub start: Vec<i64>,
    pub end: Vec<i64>,
    pub segments: Vec<PathSegment>,
    pub length: u64,
}

impl LatticePath {
    /// Lattice points visited, in integer coordinates.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let mut cur = self.start.clone();
        let mut out = vec![cur.clone()];
        for seg in &self.segments {
            let step = (seg.to - seg.from).signum();
            while cur[seg.axis] != seg.to {
                cur[seg.axis] += step;
                out.push(cur.clone());
            }
        }
        out
    }

    pub fn real_points(&self) -> Vec<Vec<f64>> {
        self.points()
            .into_iter()
            .map(|p| p.into_iter().map(|c| c as f64 * self.r).collect())
            .collect()
    }
}

/// Lattice path from `nu` to `nu2` (integer coordinates, spacing `r`)
/// correcting coordinates in ascending order.
pub fn discrete_path(nu: &[i64], nu2: &[i64], r: f64) -> Result<LatticePath> {
    if nu.len() != nu2.len() || nu.is_empty() || !nu.len().is_multiple_of(2) {
        return Err(invalid("lattice points must share an even real dimension"));
    }
    if !(r > 0.0) {
        return Err(invalid("spacing must be positive"));
    }
    let segments: Vec<PathSegment> = (0..nu.len())
        .filter(|&j| nu[j] != nu2[j])
        .map(|j| PathSegment {
            axis: j,
            from: nu[j],
            to: nu2[j],
        })
        .collect();
    let length = nu.iter().zip(nu2).map(|(a, b)| a.abs_diff(*b)).sum();
    Ok(LatticePath {
        r,
        start: nu.to_vec(),
        end: nu2.to_vec(),
        segments,
        length,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum RegionKind {
    Arc { center: f64, length: f64 },
    PseudoBall { center: DiskPoint, radius: f64 },
    Cube { center: Vec<f64>, side: f64 },
    CarlesonSquare { depth: u32, index: u64 },
    CarlesonUnion { depth: u32, indices: Vec<u64> },
    DyadicRect { n: u32, m: u64, k: u64 },
    BergmanDisk { center: DiskPoint, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    #[serde(flatten)]
    pub kind: RegionKind,
    pub measure: f64,
    pub depth: Option<u32>,
    pub index: Option<u64>,
}

impl Region {
    pub fn arc(center: f64, length: f64) -> Self {
        Self {
            kind: RegionKind::Arc { center, length },
            measure: length / TAU,
            depth: None,
            index: None,
        }
    }

    pub fn cube(center: Vec<f64>, side: f64) -> Self {
        let measure = side.powi(center.len() as i32);
        Self {
            kind: RegionKind::Cube { center, side },
            measure,
            depth: None,
            index: None,
        }
    }

    pub fn dyadic(rect: DyadicRect, gamma: f64) -> Self {
        Self {
            kind: RegionKind::DyadicRect {
                n: rect.n,
                m: rect.m,
                k: rect.k,
            },
            measure: rect.measure(gamma),
            depth: Some(rect.n),
            index: None,
        }
    }

    pub fn carleson(node: &TreeNode) -> Self {
        Self {
            kind: RegionKind::CarlesonSquare {
                depth: node.depth,
                index: node.index,
            },
            measure: node.measure_s,
            depth: Some(node.depth),
            index: Some(node.index),
        }
    }

    /// Pseudo-ball `{u : d(center, u) < radius}` on the disk.
    pub fn pseudo_ball(center: DiskPoint, radius: f64, gamma: f64) -> Result<Self> {
        let kind = RegionKind::PseudoBall { center, radius };
        let measure = disk_region_measure(&kind, gamma)?;
        Ok(Self {
            kind,
            measure,
            depth: None,
            index: None,
        })
    }

    pub fn bergman_disk(center: DiskPoint, radius: f64, gamma: f64) -> Result<Self> {
        let kind = RegionKind::BergmanDisk { center, radius };
        let measure = disk_region_measure(&kind, gamma)?;
        Ok(Self {
            kind,
            measure,
            depth: None,
            index: None,
        })
    }

    /// `radius ≥ 1 - |center|` for pseudo-balls.
    pub fn is_boundary_intersecting(&self) -> bool {
        match &self.kind {
            RegionKind::PseudoBall { center, radius } => *radius >= center.t,
            RegionKind::Arc { .. } => true,
            RegionKind::CarlesonSquare { .. } | RegionKind::CarlesonUnion { .. } => true,
            RegionKind::DyadicRect { n, m, .. } => *m == 1u64 << *n,
            _ => false,
        }
    }
}

/// Pseudo-ball as a polar domain: radial range `|t - t_c| < R`.
pub fn pseudo_ball_domain(center: DiskPoint, radius: f64) -> PolarDomain {
    PolarDomain {
        t_lo: (center.t - radius).max(0.0),
        t_hi: (center.t + radius).min(1.0),
        angular: Angular::Ball {
            theta: center.theta,
            t_center: center.t,
            radius,
        },
    }
}

fn disk_region_measure(kind: &RegionKind, gamma: f64) -> Result<f64> {
    let opts = PolarOptions::default();
    let est = match kind {
        RegionKind::PseudoBall { center, radius } => {
            let dom = pseudo_ball_domain(*center, *radius);
            polar::integrate(&dom, gamma, &[], 1, &opts, |_, out| out[0] = 1.0)?.remove(0)
        }
        RegionKind::BergmanDisk { center, radius } => {
            polar::integrate_bergman_disk(*center, *radius, gamma, 1, &opts, |_, out| out[0] = 1.0)?.remove(0)
        }
        _ => return Err(invalid("not a quadrature-measured disk region")),
    };
    Ok(est.value)
}

/// Region families realizing the suprema of the weight classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum RegionFamily {
    Arcs,
    PseudoBalls,
    Cubes { r: f64 },
    BergmanDisks { radius: f64 },
}

/// Largest pseudo-ball radius used: the pseudo-diameter of the disk.
pub const PSEUDO_DIAMETER: f64 = 3.0;

/// Deterministic dyadic families; level `j` regions carry `depth = j` and a
/// larger refinement only appends regions. `jitter` perturbs centers for
/// robustness runs.
pub fn region_sampler(
    params: &SpaceParams,
    family: RegionFamily,
    refinement: u32,
    jitter: Option<u64>,
) -> Result<Vec<Region>> {
    params.validate()?;
    let mut rng = jitter.map(ChaCha8Rng::seed_from_u64);
    let mut jit = |scale: f64| match rng.as_mut() {
        Some(r) => scale * (r.gen::<f64>() - 0.5) * 0.25,
        None => 0.0,
    };
    let mut out = Vec::new();
    match family {
        RegionFamily::Arcs => {
            if params.space != Space::HardyCircle {
                return Err(invalid("arc families live on the circle"));
            }
            if refinement > 24 {
                return Err(invalid("arc refinement above 24"));
            }
            check_budget("arcs", 2usize << (refinement + 1))?;
            for j in 0..=refinement {
                let len = TAU * (-(j as f64)).exp2();
                let count = 1u64 << j;
                let shifts: &[f64] = if j == 0 { &[0.5] } else { &[0.5, 1.0] };
                for &shift in shifts {
                    for k in 0..count {
                        let c = (k as f64 + shift) * len + jit(len);
                        let mut reg = Region::arc(c.rem_euclid(TAU), len);
                        reg.depth = Some(j);
                        reg.index = Some(k);
                        out.push(reg);
                    }
                }
            }
        }
        RegionFamily::PseudoBalls => {
            if params.space != Space::BergmanDisk {
                return Err(invalid("pseudo-ball families are implemented on the disk only"));
            }
            let mut radii: Vec<(u32, f64)> = vec![(0, PSEUDO_DIAMETER), (0, 2.0), (0, 1.0)];
            radii.extend((1..=refinement).map(|j| (j, (-(j as f64)).exp2())));
            check_budget("pseudo-balls", radii.len() * 12)?;
            for (level, rad) in radii {
                let rays = [0.0, 0.5 * PI, PI, 1.5 * PI, 0.5 * rad.min(1.0), -0.5 * rad.min(1.0)];
                for frac in [1.0, 0.5] {
                    let t = (rad * frac).min(1.0);
                    for (i, &theta) in rays.iter().enumerate() {
                        let center = DiskPoint::new(t, theta + jit(rad.min(1.0)));
                        let mut reg = Region::pseudo_ball(center, rad, params.gamma)?;
                        reg.depth = Some(level);
                        reg.index = Some(i as u64);
                        out.push(reg);
                    }
                }
            }
        }
        RegionFamily::Cubes { r } => {
            if params.space != Space::Fock {
                return Err(invalid("cube families live on ℂⁿ"));
            }
            if !(r > 0.0) {
                return Err(invalid("cube side must be positive"));
            }
            let dim = 2 * params.n;
            let reach = 1i64 << refinement.min(20);
            let est = (2 * reach + 1) as f64;
            let est = est.powi(dim as i32);
            if est > crate::error::budget() as f64 * 4.0 {
                check_budget("cubes", est as usize)?;
            }
            let mut centers: Vec<(u32, Vec<i64>)> = Vec::new();
            let mut idx = vec![-reach; dim];
            loop {
                let norm2: i64 = idx.iter().map(|v| v * v).sum();
                if norm2 <= reach * reach {
                    let norm = (norm2 as f64).sqrt();
                    let level = if norm <= 1.0 { 0 } else { norm.log2().ceil() as u32 };
                    centers.push((level, idx.clone()));
                }
                let mut d = 0;
                loop {
                    if d == dim {
                        break;
                    }
                    idx[d] += 1;
                    if idx[d] > reach {
                        idx[d] = -reach;
                        d += 1;
                    } else {
                        break;
                    }
                }
                if d == dim {
                    break;
                }
            }
            check_budget("cubes", centers.len())?;
            centers.sort_by_key(|(l, _)| *l);
            for (i, (level, c)) in centers.into_iter().enumerate() {
                let center = c.iter().map(|&v| v as f64 * r + jit(r)).collect();
                let mut reg = Region::cube(center, r);
                reg.depth = Some(level);
                reg.index = Some(i as u64);
                out.push(reg);
            }
        }
        RegionFamily::BergmanDisks { radius } => {
            if params.space != Space::BergmanDisk {
                return Err(invalid("Bergman disks live on the disk"));
            }
            check_budget("Bergman disks", (refinement as usize + 1) * 16)?;
            for j in 0..=refinement {
                let t = (-(j as f64)).exp2();
                let dirs: Vec<f64> = if j == 0 {
                    vec![0.0]
                } else {
                    (0..16).map(|i| TAU * i as f64 / 16.0).collect()
                };
                for (i, theta) in dirs.into_iter().enumerate() {
                    let center = if j == 0 {
                        DiskPoint::new(1.0, 0.0)
                    } else {
                        DiskPoint::new(t, theta + jit(t))
                    };
                    let mut reg = Region::bergman_disk(center, radius, params.gamma)?;
                    reg.depth = Some(j);
                    reg.index = Some(i as u64);
                    out.push(reg);
                }
            }
        }
    }
    Ok(out)
}

/// Boundary-refined sample `(1 - 2^{-j})e^{iθ}` for `j = 1..=levels`, with
/// `dirs` uniform directions plus points hugging each focus angle.
pub fn boundary_samples(levels: u32, dirs: usize, foci: &[f64]) -> Vec<(u32, DiskPoint)> {
    let mut out = vec![(0, DiskPoint::new(1.0, 0.0))];
    for j in 1..=levels {
        let t = (-(j as f64)).exp2();
        for i in 0..dirs {
            out.push((j, DiskPoint::new(t, TAU * i as f64 / dirs as f64)));
        }
        for &f in foci {
            for c in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
                out.push((j, DiskPoint::new(t, f + c * t)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accurate_one_minus_product() {
        let a = DiskPoint::new(1e-12, 1e-9);
        let b = DiskPoint::new(3e-12, -1e-9);
        let v = one_minus_product(a, b);
        let naive = C64::new(1.0, 0.0) - a.z() * b.z().conj();
        assert!((v - naive).norm() < 1e-15);
        assert!((v.re - (4e-12 + 2e-18)).abs() < 1e-20 + 1e-15 * v.re);
    }

    #[test]
    fn rect_measures_partition() {
        for gamma in [-0.5, 0.0, 1.0] {
            for n in 0..5 {
                let side = 1u64 << n;
                let s: f64 = (1..=side)
                    .flat_map(|m| (1..=side).map(move |k| DyadicRect { n, m, k }))
                    .map(|q| q.measure(gamma))
                    .sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn neighbours_at_depth_one_cover_disk() {
        let beta = TreeNode::new(1, 0, 0.0).unwrap();
        let u = neighbor_union(&beta, 0.0).unwrap();
        assert!((u.measure - 0.75).abs() < 1e-14);
    }
}
