use weightlab::geometry::SpaceParams;
use weightlab::operators::*;
use weightlab::symbols::Symbol;
use weightlab::transforms::{grid_build, GridOptions, QuadratureGrid};
use weightlab::weight_classes::Verdict;
use weightlab::C64;

fn sym(s: &str) -> Symbol {
    s.parse().unwrap()
}

fn fock_grid(alpha: f64, level: usize) -> QuadratureGrid {
    grid_build(&SpaceParams::fock(1, alpha, 2.0).unwrap(), level, &GridOptions::default()).unwrap()
}

#[test]
fn fock_projection_reproduces_monomials() {
    let g = fock_grid(1.0, 3);
    for k in 0..4 {
        let f: Vec<C64> = g.nodes.iter().map(|x| C64::new(x[0], x[1]).powu(k)).collect();
        let out = apply_projection(ProjectionKind::FockP, &f, &g).unwrap();
        for ((x, a), b) in g.nodes.iter().zip(&out).zip(&f) {
            if x[0].hypot(x[1]) < 1.0 {
                assert!((a - b).norm() < 1e-8, "k={k} at {x:?}");
            }
        }
    }
}

#[test]
fn fock_projection_is_idempotent_on_its_range() {
    let g = fock_grid(1.0, 3);
    let f: Vec<C64> = g.nodes.iter().map(|x| C64::new((-x[0] * x[0]).exp(), x[1])).collect();
    let once = apply_projection(ProjectionKind::FockP, &f, &g).unwrap();
    let twice = apply_projection(ProjectionKind::FockP, &once, &g).unwrap();
    for ((x, a), b) in g.nodes.iter().zip(&once).zip(&twice) {
        if x[0].hypot(x[1]) < 1.0 {
            assert!((a - b).norm() < 1e-7, "{x:?}");
        }
    }
}

#[test]
fn gaussian_integral_of_one() {
    for alpha in [0.5, 1.0, 2.0] {
        let g = fock_grid(alpha, 3);
        let ones = vec![C64::new(1.0, 0.0); g.nodes.len()];
        let out = apply_projection(ProjectionKind::FockH, &ones, &g).unwrap();
        let i = g.nodes.iter().position(|x| x[0] == 0.0 && x[1] == 0.0).unwrap();
        assert!((out[i].re - std::f64::consts::TAU / alpha).abs() < 1e-9 * std::f64::consts::TAU / alpha);
    }
}

#[test]
fn projection_rejects_wrong_grid() {
    let g = fock_grid(1.0, 1);
    let f = vec![C64::new(1.0, 0.0); g.nodes.len()];
    assert!(apply_projection(ProjectionKind::BergmanP, &f, &g).is_err());
    assert!(apply_projection(ProjectionKind::FockP, &f[1..], &g).is_err());
}

#[test]
fn unit_weight_norm_is_one() {
    let params = SpaceParams::fock(1, 0.25, 2.0).unwrap();
    let rep = weighted_opnorm(ProjectionKind::FockP, &sym("const:c=1"), 2.0, &params, 3, 200).unwrap();
    assert!((rep.estimate - 1.0).abs() < 1e-3, "{}", rep.estimate);
    assert_eq!(rep.verdict, Verdict::Finite);
    let bergman = SpaceParams::bergman_disk(0.0, 2.0).unwrap();
    assert!(weighted_opnorm(ProjectionKind::FockP, &sym("const:c=1"), 2.0, &bergman, 1, 10).is_err());
}

#[test]
fn hardy_shift_and_binomial_coefficients() {
    let hardy = SpaceParams::hardy(2.0).unwrap();
    let t = toeplitz_matrix(&hardy, &sym("poly:c=0;1"), 5, false).unwrap();
    for j in 0..5 {
        for k in 0..5 {
            let e = if j == k + 1 { 1.0 } else { 0.0 };
            assert!((t.entries[(j, k)] - C64::new(e, 0.0)).norm() < 1e-12);
        }
    }
    let a: f64 = 0.3;
    let t = toeplitz_matrix(&hardy, &sym("analytic:a=0.3"), 6, false).unwrap();
    let mut c = 1.0;
    for k in 0..6 {
        assert!((t.entries[(k, 0)].re - c).abs() < 1e-12, "k={k}");
        c *= (k as f64 - a) / (k as f64 + 1.0);
    }
}

#[test]
fn fock_multiplication_by_z_is_a_weighted_shift() {
    let alpha = 2.0;
    let params = SpaceParams::fock(1, alpha, 2.0).unwrap();
    let t = toeplitz_matrix(&params, &sym("poly:c=0;1"), 6, false).unwrap();
    for k in 0..5 {
        let expect = ((k as f64 + 1.0) / alpha).sqrt();
        assert!((t.entries[(k + 1, k)].re - expect).abs() < 1e-9, "k={k}");
    }
    let norms = monomial_norms_sq(&params, 5).unwrap();
    let mut fact = 1.0;
    for (k, n) in norms.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        assert!((n - fact / alpha.powi(k as i32)).abs() < 1e-9 * n, "k={k}");
    }
}

#[test]
fn identity_product_has_unit_singular_values() {
    let b = SpaceParams::bergman_disk(0.0, 2.0).unwrap();
    let one = sym("const:c=1");
    let ev = product_invertibility_evidence(&b, &one, &one, &[4, 16]).unwrap();
    assert!(ev.iter().all(|(_, s)| (s - 1.0).abs() < 1e-12));
    let p3 = SpaceParams::bergman_disk(0.0, 3.0).unwrap();
    assert!(product_invertibility_evidence(&p3, &one, &one, &[4]).is_err());
}

#[test]
fn matrix_serialization_round_trips() {
    let t = toeplitz_matrix(&SpaceParams::hardy(2.0).unwrap(), &sym("analytic:a=0.3"), 4, true).unwrap();
    let mut buf = Vec::new();
    t.write_binary(&mut buf).unwrap();
    assert_eq!(OperatorMatrix::read_binary(&buf).unwrap(), t);
    let csv = t.to_csv().unwrap();
    assert!(csv.starts_with("row,col,re,im\n"));
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn disk_and_circle_criteria() {
    let opts = CriterionOptions::default();
    for params in [SpaceParams::bergman_disk(0.0, 2.0).unwrap(), SpaceParams::hardy(2.0).unwrap()] {
        let grid = grid_build(&params, 6, &GridOptions::default()).unwrap();
        let one = sym("const:c=1");
        let r = invertibility_criterion(&params, &one, &one, &grid, &opts).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::BoundedInvertible, "{:?}", params.space);
        assert!((r.sup_product - 1.0).abs() < 1e-6);
        let r = invertibility_criterion(&params, &sym("poly:c=1;-1"), &one, &grid, &opts).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::NotInvertible, "{:?}", params.space);
        let f = sym("analytic:a=0.3");
        let g = sym("analytic:a=-0.3");
        let r = invertibility_criterion(&params, &f, &g, &grid, &opts).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::BoundedInvertible, "{:?}", params.space);
    }
}

#[test]
fn fock_criterion_examples() {
    let pair = fock_product_criterion(&sym("explinear:b=1"), &sym("explinear:b=-1"), 2.0, 1.0, 1, 5).unwrap();
    assert_eq!(pair.report.verdict, CriterionVerdict::BoundedInvertible);
    let unbounded = fock_product_criterion(&sym("poly:c=0;1"), &sym("const:c=1"), 2.0, 1.0, 1, 5).unwrap();
    assert_eq!(unbounded.report.sup_verdict, Verdict::Divergent);
    assert_eq!(unbounded.report.verdict, CriterionVerdict::Unbounded);
    assert_eq!(pair.points.len(), pair.report.samples);
}

#[test]
fn classifier_examples() {
    let r = sarason_fock_classifier(&sym("explinear:b=1"), &sym("scale:2,explinear:b=-1"), 1e-12).unwrap();
    assert!(r.is_pair);
    let [p0, p1] = r.p.unwrap();
    assert!(p0.norm() < 1e-12 && (p1 - 1.0).norm() < 1e-12);
    assert!((r.c.unwrap() - 2.0).norm() < 1e-12);
    let r = sarason_fock_classifier(&sym("poly:c=1;1"), &sym("const:c=1"), 1e-12).unwrap();
    assert!(!r.is_pair);
    let r = sarason_fock_classifier(&sym("const:c=3"), &sym("const:c=2"), 1e-12).unwrap();
    assert!(r.is_pair);
    assert!(sarason_fock_classifier(&sym("power:zeta=1"), &sym("const:c=1"), 1e-12).is_err());
}
