mod common;

use weightlab::geometry::*;
use weightlab::C64;

#[test]
fn pseudo_metric_examples() {
    let half = [C64::new(0.5, 0.0)];
    assert_eq!(pseudo_metric(&half, &half), 0.0);
    let neg = [C64::new(-0.5, 0.0)];
    assert!((pseudo_metric(&half, &neg) - 2.0).abs() < 1e-15);
}

#[test]
fn mobius_examples() {
    let u = C64::new(0.5, 0.0);
    assert!((mobius_disk(u, C64::new(0.0, 0.0)) - u).norm() < 1e-15);
    assert!(mobius_disk(u, u).norm() < 1e-15);
    let z = C64::new(0.0, 0.3);
    assert!((mobius_disk(u, mobius_disk(u, z)) - z).norm() < 1e-14);
}

#[test]
fn bergman_disk_membership() {
    let o = C64::new(0.0, 0.0);
    assert!(bergman_disk_contains(o, 0.5, o));
    assert!(bergman_disk_contains(o, 1.0, C64::from_polar(1f64.tanh(), 0.7)));
    let c = C64::new(0.3, -0.4);
    for z in [C64::new(0.1, 0.2), C64::new(-0.6, 0.1), C64::new(0.5, -0.5)] {
        for r in [0.3, 0.8, 1.5] {
            assert_eq!(bergman_disk_contains(c, r, z), bergman_disk_contains(o, r, mobius_disk(c, z)));
        }
    }
}

#[test]
fn tree_levels_partition_the_disk() {
    for gamma in [-0.5, 0.0, 1.0] {
        let nodes = tree_decompose(gamma, 8).unwrap();
        assert_eq!(nodes[0].depth, 0);
        assert!((nodes[0].measure_s - 1.0).abs() < 1e-15);
        for d in 0..=8 {
            let h = (-(d as f64)).exp2();
            let annulus = (1.0 - (1.0 - h) * (1.0 - h)).powf(gamma + 1.0);
            let s: f64 = nodes.iter().filter(|b| b.depth == d).map(|b| b.measure_s).sum();
            assert!((s - annulus).abs() < 1e-12, "depth {d}: {s} vs {annulus}");
        }
        let tops: f64 = nodes.iter().map(|b| b.measure_t).sum();
        let rest: f64 = (0..512).map(|k| TreeNode::new(9, k, gamma).unwrap().measure_s).sum();
        assert!((tops + rest - 1.0).abs() < 1e-12);
        let scaled: Vec<f64> = nodes
            .iter()
            .map(|b| b.measure_t * (b.depth as f64 * (2.0 + gamma)).exp2())
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(hi / lo < 10.0, "γ={gamma}: {lo}..{hi}");
    }
}

#[test]
fn one_quadrisection_gives_four_children_of_s_beta() {
    let beta = TreeNode::new(2, 1, 0.0).unwrap();
    let subs = dyadic_subrects(&beta, 1).unwrap();
    assert_eq!(subs.len(), 4);
    assert!(subs.iter().all(|s| s.parent == beta.carleson_rect()));
    let total: f64 = subs.iter().map(|s| s.rect.measure(0.5)).sum();
    assert!((total - beta.carleson_rect().measure(0.5)).abs() < 1e-15);
}

#[test]
fn dyadic_center_formula() {
    let q = DyadicRect::new(3, 5, 2).unwrap();
    let h = 0.125;
    let expect = C64::from_polar(4.5 * h, 1.5 * std::f64::consts::TAU * h);
    assert!((q.center() - expect).norm() < 1e-15);
    assert!((q.center_point().z() - expect).norm() < 1e-14);
}

#[test]
fn doubling_ratio_bounded_over_enumeration() {
    for gamma in [-0.5, 0.0, 1.0] {
        let rects = global_dyadic_rects(8).unwrap();
        let worst = rects
            .iter()
            .filter_map(|q| q.parent().map(|p| p.measure(gamma) / q.measure(gamma)))
            .fold(0.0, f64::max);
        assert!(worst.is_finite() && worst <= 16.0, "γ={gamma}: {worst}");
    }
}

#[test]
fn neighbor_unions() {
    for k in 0..2 {
        let b = TreeNode::new(1, k, 0.0).unwrap();
        assert!((neighbor_union(&b, 0.0).unwrap().measure - 0.75).abs() < 1e-15);
    }
    for (d, k) in [(2, 0), (3, 7), (5, 11)] {
        let b = TreeNode::new(d, k, 1.0).unwrap();
        let u = neighbor_union(&b, 1.0).unwrap();
        assert!((u.measure - 3.0 * b.measure_s).abs() < 1e-14);
        match u.kind {
            RegionKind::CarlesonUnion { indices, .. } => assert!(indices.contains(&k)),
            _ => panic!("expected a union"),
        }
    }
}

#[test]
fn discrete_path_examples() {
    let p = discrete_path(&[0, 0], &[0, 0], 1.0).unwrap();
    assert_eq!(p.length, 0);
    assert_eq!(p.points().len(), 1);
    let p = discrete_path(&[0, 0], &[2, 3], 1.0).unwrap();
    assert_eq!(p.length, 5);
    let pts = p.points();
    assert_eq!(pts.first().unwrap(), &vec![0, 0]);
    assert_eq!(pts.last().unwrap(), &vec![2, 3]);
    for w in pts.windows(2) {
        let steps: i64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
        assert_eq!(steps, 1);
    }
}

#[test]
fn arc_family_refines() {
    let params = SpaceParams::hardy(2.0).unwrap();
    let r0 = region_sampler(&params, RegionFamily::Arcs, 0, None).unwrap();
    assert_eq!(r0.len(), 1);
    match &r0[0].kind {
        RegionKind::Arc { length, .. } => assert!((length - std::f64::consts::TAU).abs() < 1e-12),
        _ => panic!(),
    }
    for j in 0..5 {
        let a = region_sampler(&params, RegionFamily::Arcs, j, None).unwrap();
        let b = region_sampler(&params, RegionFamily::Arcs, j + 1, None).unwrap();
        assert!(a.iter().all(|r| b.contains(r)), "refinement {j}");
    }
}

#[test]
fn pseudo_ball_family_reaches_radius_one_eighth_at_boundary() {
    let params = SpaceParams::bergman_disk(0.0, 2.0).unwrap();
    let regions = region_sampler(&params, RegionFamily::PseudoBalls, 3, None).unwrap();
    assert!(regions.iter().any(|r| matches!(&r.kind,
        RegionKind::PseudoBall { radius, .. } if (*radius - 0.125).abs() < 1e-15) && r.is_boundary_intersecting()));
}
