use proptest::prelude::*;
use weightlab::geometry::*;
use weightlab::quad::gl;
use weightlab::reverse_holder::{constants_from_c1, epsilon_pair};
use weightlab::symbols::Symbol;
use weightlab::weight_classes::{power_weight_oracle, PowerVariant};
use weightlab::C64;

fn disk_point() -> impl Strategy<Value = C64> {
    (0.0..0.99f64, -3.2..3.2f64).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pseudo_metric_is_symmetric(a in disk_point(), b in disk_point()) {
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let (d1, d2) = (pseudo_metric(&[a], &[b]), pseudo_metric(&[b], &[a]));
        prop_assert!((d1 - d2).abs() < 1e-12);
        prop_assert!(d1 >= 0.0);
    }

    #[test]
    fn mobius_is_an_involution(u in disk_point(), z in disk_point()) {
        let back = mobius_disk(u, mobius_disk(u, z));
        prop_assert!((back - z).norm() < 1e-9);
    }

    #[test]
    fn lattice_paths_have_l1_length(a in prop::collection::vec(-20i64..20, 2), b in prop::collection::vec(-20i64..20, 2)) {
        let path = discrete_path(&a, &b, 1.0).unwrap();
        let l1: i64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        prop_assert_eq!(path.length as i64, l1);
        let l2 = a.iter().zip(&b).map(|(x, y)| ((x - y) as f64).powi(2)).sum::<f64>().sqrt();
        prop_assert!(path.length as f64 <= 2f64.sqrt() * l2 + 1e-9);
        let pts = path.points();
        prop_assert_eq!(pts.first().unwrap(), &a);
        prop_assert_eq!(pts.last().unwrap(), &b);
    }

    /// `1 - δ′` underflows once `2^q C₁^{q-1}` passes `2^53`; keep inside that.
    #[test]
    fn deltas_lie_in_the_unit_interval(c1 in 1.0..1e3f64, p in 1.25..20.0f64) {
        let d = constants_from_c1(c1, p).unwrap();
        prop_assert!(d.delta > 0.0 && d.delta < 1.0);
        prop_assert!(d.delta_prime > 0.0 && d.delta_prime < 1.0);
    }

    #[test]
    fn epsilon_pairing_balances(p in 1.1..8.0f64, e2 in 1e-4..0.5f64) {
        let q = p / (p - 1.0);
        if let Ok(e1) = epsilon_pair(e2, p) {
            prop_assert!(e1 > 0.0);
            let (l, r) = (e2 / (q * (q + e2)), e1 / (p * (p + e1)));
            prop_assert!((l - r).abs() <= 1e-14 * l.max(1.0));
        }
    }

    #[test]
    fn plain_oracle_is_an_open_interval(p in 1.1..6.0f64, gamma in -0.9..3.0f64) {
        let lo = -1.0 - gamma;
        let hi = (1.0 + gamma) * (p - 1.0);
        let member = |z: f64| power_weight_oracle(z, p, gamma, 1, PowerVariant::Plain).unwrap();
        prop_assert!(!member(lo) && !member(hi));
        prop_assert!(member(0.5 * (lo + hi)));
        prop_assert!(member(lo + 1e-9 * (hi - lo)) && member(hi - 1e-9 * (hi - lo)));
    }

    #[test]
    fn symbol_text_round_trips(kind in 0usize..4, x in -0.45..0.45f64, y in -2.0..2.0f64) {
        let text = match kind {
            0 => format!("power:zeta={x}"),
            1 => format!("analytic:a={x}"),
            2 => format!("expreal:c={x};{y}"),
            _ => format!("const:c={y}"),
        };
        let s: Symbol = text.parse().unwrap();
        let again: Symbol = s.to_string().parse().unwrap();
        prop_assert_eq!(s, again);
    }

    #[test]
    fn children_partition_the_parent(n in 0u32..8, m in 0u64..256, k in 0u64..256, gamma in -0.9..3.0f64) {
        let side = 1u64 << n;
        let q = DyadicRect::new(n, 1 + m % side, 1 + k % side).unwrap();
        let total: f64 = q.children().iter().map(|c| c.measure(gamma)).sum();
        prop_assert!((total - q.measure(gamma)).abs() <= 1e-12 * q.measure(gamma));
        prop_assert!(q.children().iter().all(|c| q.contains_rect(c) && c.parent() == Some(q)));
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree(n in 1usize..40, a in -3.0..0.0f64, b in 0.1..3.0f64) {
        let deg = 2 * n - 1;
        let exact = (b.powi(deg as i32 + 1) - a.powi(deg as i32 + 1)) / (deg as f64 + 1.0);
        let approx = gl(n).integrate(a, b, |x| x.powi(deg as i32));
        prop_assert!((approx - exact).abs() <= 1e-11 * exact.abs().max(1.0) * 3f64.powi(deg as i32).max(1.0).sqrt());
    }
}
