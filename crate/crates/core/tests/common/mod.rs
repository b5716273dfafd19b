//! Independent reference quadrature for oracle tests.

#![allow(dead_code)]

/// Double-exponential (tanh-sinh) rule on `[a, b]`; tolerant of algebraic
/// singularities at `a` (put them there; `b - d` rounds).
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    for k in -(6 * 64)..=(6 * 64) {
        let t = k as f64 * h;
        let s = std::f64::consts::FRAC_PI_2 * t.sinh();
        let x = s.tanh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / s.cosh().powi(2);
        let dist = half * 2.0 / ((2.0 * s.abs()).exp() + 1.0);
        if dist <= 0.0 || w == 0.0 {
            continue;
        }
        let xx = if x < 0.0 { a + dist } else { b - dist };
        let v = f(xx);
        if v.is_finite() {
            sum += w * v;
        }
    }
    sum * half * h
}

/// `∫` over `[a, b]` split at interior breakpoints.
pub fn tanh_sinh_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|x| *x > a && *x < b));
    pts.push(b);
    pts.windows(2).map(|w| tanh_sinh(&f, w[0], w[1])).sum()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
