mod common;

use common::{rel, tanh_sinh, tanh_sinh_split};
use weightlab::geometry::*;
use weightlab::symbols::Symbol;
use weightlab::transforms::*;
use weightlab::C64;

fn sym(s: &str) -> Symbol {
    s.parse().unwrap()
}

fn disk_grid(gamma: f64, level: usize) -> QuadratureGrid {
    QuadratureGrid::disk(&SpaceParams::bergman_disk(gamma, 2.0).unwrap(), level).unwrap()
}

/// `(γ+1)∫₀¹ u^{ζ+γ} du` with `u = 1 - r²`, integrated numerically.
fn berezin_power_at_origin(zeta: f64, gamma: f64) -> f64 {
    (gamma + 1.0) * tanh_sinh(|u| u.powf(zeta + gamma), 0.0, 1.0)
}

#[test]
fn kernels_at_origin() {
    let params = SpaceParams::bergman_disk(0.5, 2.0).unwrap();
    let o = [C64::new(0.0, 0.0)];
    for z in [C64::new(0.3, 0.1), C64::new(-0.9, 0.0)] {
        let k = kernel_eval(KernelKind::BergmanK, &[z], &o, &params).unwrap();
        assert!((k - 1.0).norm() < 1e-15);
        let k = kernel_eval(KernelKind::BergmanNormalized, &o, &[z], &params).unwrap();
        assert!((k - 1.0).norm() < 1e-15);
    }
}

#[test]
fn berezin_of_one_is_one() {
    for gamma in [-0.5, 0.0, 2.0] {
        let g = disk_grid(gamma, 6);
        for z in [DiskPoint::new(1.0, 0.0), DiskPoint::new(0.1, 1.0), DiskPoint::new(1e-3, -2.0)] {
            let e = berezin(&sym("const:c=1"), z, &g).unwrap();
            assert!((e.value - 1.0).abs() < 1e-8, "γ={gamma} {z:?}: {}", e.value);
        }
    }
}

#[test]
fn berezin_power_weight_against_radial_oracle() {
    for gamma in [0.0, 1.0] {
        for zeta in [-0.5, 0.5, 1.0] {
            let oracle = berezin_power_at_origin(zeta, gamma);
            assert!(rel(oracle, (gamma + 1.0) / (gamma + zeta + 1.0)) < 1e-10, "{oracle} ζ={zeta} γ={gamma}");
            let e = berezin(&sym(&format!("power:zeta={zeta}")), DiskPoint::new(1.0, 0.0), &disk_grid(gamma, 6)).unwrap();
            assert!((e.value - oracle).abs() < 1e-7, "ζ={zeta} γ={gamma}");
        }
    }
}

#[test]
fn berezin_is_monotone_in_the_symbol() {
    let g = disk_grid(0.0, 6);
    let z = DiskPoint::new(0.2, 0.4);
    let a = berezin(&sym("power:zeta=1"), z, &g).unwrap().value;
    let b = berezin(&sym("power:zeta=0.5"), z, &g).unwrap().value;
    assert!(a <= b);
}

#[test]
fn berezin_trace_settles() {
    let z = DiskPoint::new(0.05, 0.3);
    let e = berezin(&sym("power:zeta=-0.5"), z, &disk_grid(0.0, 6)).unwrap();
    let last = e.trace.len() - 1;
    assert!(e.trace.len() >= 2);
    assert!((e.trace[last] - e.trace[last - 1]).abs() <= 1e-6 * e.trace[last].abs());
    assert!((e.value - e.trace[last]).abs() < 1e-15);
}

#[test]
fn twisted_reduces_to_berezin_at_p_two() {
    let g = disk_grid(0.0, 6);
    let z = DiskPoint::new(0.3, 0.5);
    let e = twisted_berezin(&sym("const:c=1"), z, 0.0, 2.0, &g).unwrap();
    assert!((e.value - 1.0).abs() < 1e-8);
}

/// `∫|k_z|⁴ dA = (1-|z|²)⁴ Σ_k ((k+1)(k+2)(k+3)/6)² |z|^{2k}/(k+1)`.
#[test]
fn twisted_kernel_power_against_series() {
    let r: f64 = 0.9;
    let series: f64 = (0..4000)
        .map(|k| {
            let k = k as f64;
            let c = (k + 1.0) * (k + 2.0) * (k + 3.0) / 6.0;
            c * c * r.powf(2.0 * k) / (k + 1.0)
        })
        .sum();
    let oracle = (1.0 - r * r).powi(4) * series;
    let g = disk_grid(0.0, 8);
    let e = twisted_berezin(&sym("const:c=1"), DiskPoint::new(0.1, 0.0), 0.5, 4.0, &g).unwrap();
    assert!(rel(e.value, oracle) < 1e-7, "{} vs {oracle}", e.value);
    let rot = twisted_berezin(&sym("const:c=1"), DiskPoint::new(0.1, 2.1), 0.5, 4.0, &g).unwrap();
    assert!(rel(rot.value, e.value) < 1e-9);
}

#[test]
fn twisted_rejects_nonpositive_kernel_exponent() {
    let g = disk_grid(0.0, 4);
    assert!(twisted_berezin(&sym("const:c=1"), DiskPoint::new(0.5, 0.0), -1.0, 2.0, &g).is_err());
}

#[test]
fn poisson_extension_examples() {
    let params = SpaceParams::hardy(2.0).unwrap();
    let g = QuadratureGrid::circle(&params, 6).unwrap();
    for z in [C64::new(0.2, -0.3), C64::new(0.0, 0.95)] {
        let p = DiskPoint::from_complex(z);
        let one = poisson_hat(&sym("const:c=1"), p, &g).unwrap();
        assert!((one.value() - 1.0).norm() < 1e-8);
        let id = poisson_hat(&sym("poly:c=0;1"), p, &g).unwrap();
        assert!((id.value() - z).norm() < 1e-8, "{:?}", id.value());
        let pos = poisson_hat(&sym("abspow:base=analytic(1-z)^1,s=0.5"), p, &g).unwrap();
        assert!(pos.value().re >= 0.0);
    }
}

#[test]
fn heat_examples() {
    for alpha in [0.5, 1.0, 2.0] {
        let z = [0.4, -1.2];
        let one = heat_tilde(&sym("const:c=1"), &z, alpha).unwrap();
        assert!((one.value - 1.0).abs() < 1e-8);
        let c = [0.7, 0.3];
        let e = heat_tilde(&sym("expreal:c=0.7;0.3"), &z, alpha).unwrap();
        let exact = (c[0] * z[0] + c[1] * z[1] + (c[0] * c[0] + c[1] * c[1]) / (4.0 * alpha)).exp();
        assert!(rel(e.value, exact) < 1e-7);
    }
}

/// `|z|²` spreads by `1/α`; composing two transforms adds the variances.
#[test]
fn heat_semigroup_on_a_polynomial() {
    let z = [0.6, -0.8];
    let (a, b) = (1.0, 3.0);
    let sq = sym("poly:c=0;1");
    let inner = |x: &[f64], t: f64| heat_tilde_abs_pow(&sq, 2.0, x, t).unwrap().value;
    let r2 = z[0] * z[0] + z[1] * z[1];
    assert!((inner(&z, b) - (r2 + 1.0 / b)).abs() < 1e-7);
    let composed = r2 + 1.0 / a + 1.0 / b;
    let direct = inner(&z, a * b / (a + b));
    assert!((direct - composed).abs() < 1e-7);
}

#[test]
fn grids_carry_unit_mass() {
    for gamma in [-0.9, 0.0, 3.0] {
        let params = SpaceParams::bergman_disk(gamma, 2.0).unwrap();
        for level in [0, 3] {
            let g = grid_build(&params, level, &GridOptions::default()).unwrap();
            assert!((g.total_weight() - 1.0).abs() < 1e-8, "γ={gamma} level {level}");
        }
    }
    for alpha in [0.5, 1.0] {
        let params = SpaceParams::fock(1, alpha, 2.0).unwrap();
        let g = grid_build(&params, 2, &GridOptions::default()).unwrap();
        let mass: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(x, w)| w * (alpha / std::f64::consts::PI) * (-alpha * (x[0] * x[0] + x[1] * x[1])).exp())
            .sum();
        assert!((mass - 1.0).abs() <= 1e-8 + g.tail_bound.unwrap());
    }
}

#[test]
fn oracle_self_check() {
    let v = tanh_sinh_split(|x| x.abs().sqrt(), -1.0, 1.0, &[0.0]);
    assert!(rel(v, 4.0 / 3.0) < 1e-12);
}
