use weightlab::geometry::*;
use weightlab::reverse_holder::*;
use weightlab::symbols::Symbol;
use weightlab::transforms::{grid_build, GridOptions, QuadratureGrid};
use weightlab::weight_classes::Verdict;

fn sym(s: &str) -> Symbol {
    s.parse().unwrap()
}

fn grid(gamma: f64, p: f64, level: usize) -> QuadratureGrid {
    grid_build(&SpaceParams::bergman_disk(gamma, p).unwrap(), level, &GridOptions::default()).unwrap()
}

/// Normalized area of `Q_{n,m,k}` at `γ = 0`.
fn flat_area(n: u32, m: u64) -> f64 {
    let h = (-(n as f64)).exp2();
    let side = 1u64 << n;
    let r_hi = 1.0 - (side - m) as f64 * h;
    let r_lo = 1.0 - (side - m + 1) as f64 * h;
    (r_hi * r_hi - r_lo * r_lo) * h
}

#[test]
fn unit_symbol_has_c1_one() {
    let g = grid(0.0, 2.0, 4);
    let rep = c1_characteristic(&sym("const:c=1"), 2.0, 0.0, 4, &g).unwrap();
    assert!((rep.value - 1.0).abs() < 1e-9);
    assert_eq!(rep.verdict, Verdict::Finite);
    assert_eq!(rep.squares.len(), (0..=4).map(|d| 1usize << (2 * d)).sum::<usize>());
    assert!(rep.squares_csv().lines().count() == rep.squares.len() + 1);
}

#[test]
fn c1_grows_slowly_with_depth() {
    let f = sym("analytic:a=0.1");
    let g = grid(0.0, 2.0, 5);
    let vals: Vec<f64> = (4..=6).map(|d| c1_characteristic(&f, 2.0, 0.0, d, &g).unwrap().value).collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{vals:?}");
    assert!(vals[2] / vals[1] < 1.05);
    assert!(vals[0] > 1.0);
}

#[test]
fn c1_rejects_non_analytic_symbols() {
    let g = grid(0.0, 2.0, 3);
    assert!(c1_characteristic(&sym("power:zeta=0.5"), 2.0, 0.0, 2, &g).is_err());
    assert!(c1_characteristic(&sym("const:c=0"), 2.0, 0.0, 2, &g).is_err());
}

#[test]
fn delta_examples() {
    let d = constants_from_c1(1.0, 2.0).unwrap();
    assert_eq!(d.delta, 0.75);
    assert_eq!(d.delta_prime, 0.75);
    let d = constants_from_c1(2.5, 3.0).unwrap();
    assert!((d.delta - (1.0 - 1.0 / 20.0)).abs() < 1e-15);
    assert!((d.delta_prime - (1.0 - 1.0 / (1.5f64.exp2() * 2.5f64.sqrt()))).abs() < 1e-15);
    assert!(constants_from_c1(0.5, 2.0).is_err());
}

#[test]
fn flat_measure_matches_closed_form() {
    for q in global_dyadic_rects(5).unwrap() {
        assert!((q.measure(0.0) - flat_area(q.n, q.m)).abs() < 1e-14, "{q:?}");
    }
}

#[test]
fn doubling_examples() {
    let interior: Vec<f64> = (4..=7)
        .flat_map(|n| (1..=(1u64 << n) / 2).map(move |m| (n, m)))
        .filter(|&(_, m)| m >= 16)
        .map(|(n, m)| flat_area(n - 1, m.div_ceil(2)) / flat_area(n, m))
        .collect();
    assert!(interior.iter().all(|r| (r - 4.0).abs() < 0.15), "{interior:?}");
    let c7 = doubling_constant(0.0, 7).unwrap();
    let c8 = doubling_constant(0.0, 8).unwrap();
    assert!((c8 / c7 - 1.0).abs() < 0.01);
    for gamma in [-0.5, 0.0, 1.0] {
        assert!(doubling_constant(gamma, 5).unwrap() >= 4.0);
    }
    assert!(doubling_constant(0.0, 0).is_err());
}

#[test]
fn admissible_range_examples() {
    let a = admissible_epsilon(1.0, 0.75).unwrap();
    assert!((a.epsilon_max - (4.0f64 / 3.0).ln() / 2f64.ln()).abs() < 1e-15);
    assert!((a.epsilon_max - 0.415).abs() < 1e-3);
    let grid_eps: Vec<f64> = (1..40).map(|i| a.epsilon_max * i as f64 / 40.0).collect();
    let vals: Vec<f64> = grid_eps.iter().map(|&e| a.rh_constant(e).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    for &e in &grid_eps {
        assert!((2.0 * a.c_tilde).powf(e) * a.delta < 1.0);
    }
    assert!(a.rh_constant(a.epsilon_max * 1.01).is_err());
    assert!(a.rh_constant(0.0).is_err());
}

#[test]
fn epsilon_pairing_examples() {
    assert!((epsilon_pair(0.1, 2.0).unwrap() - 0.1).abs() < 1e-15);
    let (p, e2) = (3.0, 0.05);
    let q = p / (p - 1.0);
    let e1 = epsilon_pair(e2, p).unwrap();
    assert!((e2 / (q * (q + e2)) - e1 / (p * (p + e1))).abs() < 1e-14);
    assert!(e2 / (q + e2).powi(2) + e2 / (q * (q + e2)) > e1 / (p * (p + e1)));
    assert!(e1 / (p + e1).powi(2) + e1 / (p * (p + e1)) > e2 / (q * (q + e2)));
    assert!((epsilon_pair_inverse(e1, p).unwrap() - e2).abs() < 1e-15);
    assert!(epsilon_pair(-0.1, 2.0).is_err());
}

#[test]
fn certificate_for_a_mild_singularity() {
    let f = sym("analytic:a=0.1");
    let cert = rh_certificate(&f, 2.0, 0.0, 5, &grid(0.0, 2.0, 5)).unwrap();
    assert_eq!(cert.delta, 1.0 - 1.0 / (4.0 * cert.c1));
    assert!((2.0 * cert.c_tilde).powf(cert.epsilon) * cert.delta < 1.0);
    let expect = (1.0 + (2.0 * cert.c_tilde).powf(cert.epsilon) / (1.0 - (2.0 * cert.c_tilde).powf(cert.epsilon) * cert.delta))
        .powf(1.0 / (1.0 + cert.epsilon));
    assert!((cert.rh_constant - expect).abs() < 1e-12);
    assert!(cert.epsilon1 > 0.0 && cert.epsilon2 > 0.0);
    assert!(cert.reverse_holder_w.pass && cert.reverse_holder_dual.pass && cert.composite.pass);
    assert!(cert.pass);
    let json = serde_json::to_value(&cert).unwrap();
    assert!(json.get("squares").is_none());
}

#[test]
fn end_to_end_sweep_at_shallow_depth() {
    for a in [0.05, 0.2] {
        for p in [1.5, 3.0] {
            for gamma in [0.0, 1.0] {
                let f = sym(&format!("analytic:a={a}"));
                let g = grid(gamma, p, 5);
                let cert = rh_certificate(&f, p, gamma, 4, &g).unwrap();
                assert!(cert.pass, "a={a} p={p} γ={gamma}");
                let samples = theorem51_samples(&f, 8, 8);
                let rep = verify_theorem51(&f, p, cert.epsilon1, cert.epsilon2, &samples, &g).unwrap();
                assert_eq!(rep.verdict, Verdict::Finite, "a={a} p={p} γ={gamma}");
            }
        }
    }
}

#[test]
fn eq52_for_unit_symbol_and_monotonicity() {
    let g = grid(0.0, 2.0, 6);
    let samples = theorem51_samples(&sym("const:c=1"), 8, 8);
    let one = verify_theorem51(&sym("const:c=1"), 2.0, 0.1, 0.1, &samples, &g).unwrap();
    assert_eq!(one.verdict, Verdict::Finite);
    let f = sym("analytic:a=0.1");
    let samples = theorem51_samples(&f, 8, 8);
    let small = verify_theorem51(&f, 2.0, 0.02, 0.02, &samples, &g).unwrap();
    let large = verify_theorem51(&f, 2.0, 0.05, 0.05, &samples, &g).unwrap();
    assert!(small.sup <= large.sup * (1.0 + 1e-9));
    assert!(small.base_sup <= small.sup * (1.0 + 1e-9));
}

#[test]
fn lemma59_examples() {
    let g = grid(0.0, 2.0, 5);
    let betas: Vec<TreeNode> = (0..4).map(|k| TreeNode::new(2, k, 0.0).unwrap()).collect();
    let one = lemma59_check(&sym("const:c=1"), 2.0, 0.0, 0.05, &betas, 50, 1, &g).unwrap();
    assert_eq!(one.constant, 1.0);
    let f = sym("analytic:a=0.1");
    let a = lemma59_check(&f, 2.0, 0.0, 0.05, &betas, 200, 9, &g).unwrap();
    let b = lemma59_check(&f, 2.0, 0.0, 0.05, &betas, 400, 9, &g).unwrap();
    assert!(a.constant >= 1.0);
    assert!(b.constant >= a.constant - 1e-12);
    assert!(b.constant / a.constant <= 1.1);
}

#[test]
fn lemma52_examples() {
    assert_eq!(lemma52_check(&sym("const:c=1"), 1.0, 200, 3).unwrap(), 1.0);
    let f = sym("analytic:a=0.1");
    let r: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&rad| lemma52_check(&f, rad, 1000, 3).unwrap()).collect();
    assert!(r.windows(2).all(|w| w[1] >= w[0]), "{r:?}");
    let doubled = lemma52_check(&f, 1.0, 2000, 3).unwrap();
    assert!(doubled.is_finite() && doubled / r[1] < 1.1);
}
