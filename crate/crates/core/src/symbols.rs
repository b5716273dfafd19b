//! Closed-form symbols and weights, parsed from a small string DSL.
//!
//! ```text
//! const:c=1                         c
//! power:zeta=0.5                    (1 - |z|²)^ζ
//! analytic:a=0.3                    (1 - z)^a, principal branch
//! abspow:base=analytic(1-z)^0.3,s=2 |base|^s   (base may also be [<dsl>])
//! explinear:b=1                     e^{b·z}, b complex, `;`-separated in ℂⁿ
//! expreal:c=0.3;0                   e^{c·x}, x ∈ ℝ²ⁿ
//! expquad:delta=0.1                 e^{δ|x|²}
//! expabs:b=1                        e^{b|x₁|}
//! abscoord:a=0.5                    |x₁|^a
//! poly:c=1;1                        Σ c_k z₁^k
//! scale:2,<dsl>                     2·<dsl>
//! ```

use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Const { c: C64 },
    Power { zeta: f64 },
    Analytic { a: f64 },
    AbsPow { base: Box<Symbol>, s: f64 },
    ExpLinear { b: Vec<C64> },
    ExpReal { c: Vec<f64> },
    ExpQuad { delta: f64 },
    ExpAbs { b: f64 },
    AbsCoord { a: f64 },
    Poly { coeffs: Vec<C64> },
}

/// A symbol or weight: `scale · family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Symbol {
    pub scale: C64,
    pub family: Family,
}

/// Weights are symbols read through their modulus.
pub type WeightSpec = Symbol;

/// Bound `log|f(x)| ≤ quad·|x|² + lin·|x| + degree·log(1+|x|) + C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub quad: f64,
    pub lin: f64,
    pub degree: f64,
}

struct At<'a> {
    z: &'a [C64],
    dist2: f64,
    one_minus: C64,
}

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Parses `1`, `-0.5`, `2i`, `1+2i`, `1.5e-3-i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    if s.is_empty() {
        return Err(parse_err(s, "empty number"));
    }
    let bytes = s.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let imag = |t: &str| -> Result<f64> {
        let body = t.strip_suffix('i').ok_or_else(|| parse_err(s, "imaginary part must end in i"))?;
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            b => b.parse::<f64>().map_err(|e| parse_err(s, e.to_string())),
        }
    };
    let real = |t: &str| t.parse::<f64>().map_err(|e| parse_err(s, e.to_string()));
    match (split, s.ends_with('i')) {
        (Some(i), true) => Ok(C64::new(real(&s[..i])?, imag(&s[i..])?)),
        (_, true) => Ok(C64::new(0.0, imag(s)?)),
        (_, false) => Ok(C64::new(real(s)?, 0.0)),
    }
}

fn fmt_complex(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_base(v: &str) -> Result<Symbol> {
    let v = v.trim();
    if let Some(inner) = v.strip_prefix('[').and_then(|x| x.strip_suffix(']')) {
        return inner.parse();
    }
    if let Some(a) = v.strip_prefix("analytic(1-z)^") {
        let a = a.parse::<f64>().map_err(|e| parse_err(v, e.to_string()))?;
        return Ok(Symbol::new(Family::Analytic { a }));
    }
    Err(parse_err(v, "base must be analytic(1-z)^<a> or [<dsl>]"))
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let s = input.trim();
        if let Some(rest) = s.strip_prefix("scale:") {
            let (c, tail) = rest
                .split_once(',')
                .ok_or_else(|| parse_err(input, "scale prefix needs a following symbol"))?;
            let mut sym: Symbol = tail.parse()?;
            sym.scale *= parse_complex(c)?;
            return Ok(sym);
        }
        let (tag, args) = s.split_once(':').ok_or_else(|| parse_err(input, "expected <family>:<args>"))?;
        let mut kv = std::collections::BTreeMap::new();
        for part in split_top(args, ',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| parse_err(input, format!("expected key=value, got `{part}`")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |k: &str| -> Result<String> {
            kv.get(k)
                .cloned()
                .ok_or_else(|| parse_err(input, format!("missing `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            let v = take(k)?;
            v.parse::<f64>().map_err(|e| parse_err(input, format!("{k}: {e}")))
        };
        let list_c = |k: &str| -> Result<Vec<C64>> { take(k)?.split(';').map(parse_complex).collect() };
        let family = match tag.trim() {
            "const" => Family::Const {
                c: parse_complex(&take("c")?)?,
            },
            "power" => Family::Power { zeta: num("zeta")? },
            "analytic" => Family::Analytic { a: num("a")? },
            "abspow" => Family::AbsPow {
                base: Box::new(parse_base(&take("base")?)?),
                s: num("s")?,
            },
            "explinear" => Family::ExpLinear { b: list_c("b")? },
            "expreal" => Family::ExpReal {
                c: take("c")?
                    .split(';')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| parse_err(input, e.to_string())))
                    .collect::<Result<_>>()?,
            },
            "expquad" => Family::ExpQuad { delta: num("delta")? },
            "expabs" => Family::ExpAbs { b: num("b")? },
            "abscoord" => Family::AbsCoord { a: num("a")? },
            "poly" => Family::Poly { coeffs: list_c("c")? },
            other => return Err(parse_err(input, format!("unknown family `{other}`"))),
        };
        let allowed: &[&str] = match &family {
            Family::Const { .. } | Family::ExpReal { .. } | Family::Poly { .. } => &["c"],
            Family::Power { .. } => &["zeta"],
            Family::Analytic { .. } | Family::AbsCoord { .. } => &["a"],
            Family::AbsPow { .. } => &["base", "s"],
            Family::ExpLinear { .. } | Family::ExpAbs { .. } => &["b"],
            Family::ExpQuad { .. } => &["delta"],
        };
        if let Some(extra) = kv.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(parse_err(input, format!("unexpected key `{extra}`")));
        }
        Ok(Symbol::new(family))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale != C64::new(1.0, 0.0) {
            write!(f, "scale:{},", fmt_complex(self.scale))?;
        }
        let join_c = |v: &[C64]| v.iter().map(|c| fmt_complex(*c)).collect::<Vec<_>>().join(";");
        match &self.family {
            Family::Const { c } => write!(f, "const:c={}", fmt_complex(*c)),
            Family::Power { zeta } => write!(f, "power:zeta={zeta}"),
            Family::Analytic { a } => write!(f, "analytic:a={a}"),
            Family::AbsPow { base, s } => match (&base.family, base.scale == C64::new(1.0, 0.0)) {
                (Family::Analytic { a }, true) => write!(f, "abspow:base=analytic(1-z)^{a},s={s}"),
                _ => write!(f, "abspow:base=[{base}],s={s}"),
            },
            Family::ExpLinear { b } => write!(f, "explinear:b={}", join_c(b)),
            Family::ExpReal { c } => write!(
                f,
                "expreal:c={}",
                c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
            ),
            Family::ExpQuad { delta } => write!(f, "expquad:delta={delta}"),
            Family::ExpAbs { b } => write!(f, "expabs:b={b}"),
            Family::AbsCoord { a } => write!(f, "abscoord:a={a}"),
            Family::Poly { coeffs } => write!(f, "poly:c={}", join_c(coeffs)),
        }
    }
}

impl From<Symbol> for String {
    fn from(s: Symbol) -> Self {
        s.to_string()
    }
}

impl TryFrom<String> for Symbol {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl Symbol {
    pub fn new(family: Family) -> Self {
        Self {
            scale: C64::new(1.0, 0.0),
            family,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Family::Const { c: C64::new(c, 0.0) })
    }

    pub fn scaled(mut self, c: C64) -> Self {
        self.scale *= c;
        self
    }

    fn log_abs_at(&self, at: &At) -> f64 {
        let core = match &self.family {
            Family::Const { c } => c.norm().ln(),
            Family::Power { zeta } => zeta * at.dist2.ln(),
            Family::Analytic { a } => a * at.one_minus.norm().ln(),
            Family::AbsPow { base, s } => s * base.log_abs_at(at),
            Family::ExpLinear { b } => b.iter().zip(at.z).map(|(b, z)| (b * z).re).sum(),
            Family::ExpReal { c } => c
                .iter()
                .enumerate()
                .map(|(i, ci)| {
                    let z = at.z.get(i / 2).copied().unwrap_or_default();
                    ci * if i % 2 == 0 { z.re } else { z.im }
                })
                .sum(),
            Family::ExpQuad { delta } => delta * at.z.iter().map(|z| z.norm_sqr()).sum::<f64>(),
            Family::ExpAbs { b } => b * at.z[0].re.abs(),
            Family::AbsCoord { a } => a * at.z[0].re.abs().ln(),
            Family::Poly { coeffs } => horner(coeffs, at.z[0]).norm().ln(),
        };
        core + self.scale.norm().ln()
    }

    fn eval_at(&self, at: &At) -> C64 {
        let core = match &self.family {
            Family::Const { c } => *c,
            Family::Analytic { a } => (at.one_minus.ln() * *a).exp(),
            Family::ExpLinear { b } => b.iter().zip(at.z).map(|(b, z)| b * z).sum::<C64>().exp(),
            Family::Poly { coeffs } => horner(coeffs, at.z[0]),
            _ => C64::new(self.log_abs_at(at) - self.scale.norm().ln(), 0.0).exp(),
        };
        core * self.scale
    }

    pub fn eval_disk(&self, p: DiskPoint) -> C64 {
        let z = [p.z()];
        self.eval_at(&At {
            z: &z,
            dist2: p.dist2(),
            one_minus: p.one_minus(),
        })
    }

    pub fn log_abs_disk(&self, p: DiskPoint) -> f64 {
        let z = [p.z()];
        self.log_abs_at(&At {
            z: &z,
            dist2: p.dist2(),
            one_minus: p.one_minus(),
        })
    }

    pub fn eval_circle(&self, theta: f64) -> C64 {
        self.eval_disk(DiskPoint::boundary(theta))
    }

    pub fn log_abs_circle(&self, theta: f64) -> f64 {
        self.log_abs_disk(DiskPoint::boundary(theta))
    }

    /// Point of ℂⁿ given as real coordinates `(Re z₁, Im z₁, …)`.
    pub fn eval_plane(&self, x: &[f64]) -> C64 {
        let z = plane_to_complex(x);
        let at = plane_at(&z);
        self.eval_at(&at)
    }

    pub fn log_abs_plane(&self, x: &[f64]) -> f64 {
        let z = plane_to_complex(x);
        let at = plane_at(&z);
        self.log_abs_at(&at)
    }

    pub fn eval_complex(&self, z: &[C64]) -> C64 {
        self.eval_at(&plane_at(z))
    }

    /// Circle angles where the symbol vanishes or blows up.
    pub fn singular_angles(&self) -> Vec<f64> {
        match &self.family {
            Family::Analytic { a } if *a != 0.0 => vec![0.0],
            Family::AbsPow { base, s } if *s != 0.0 => base.singular_angles(),
            _ => Vec::new(),
        }
    }

    pub fn is_radial(&self) -> bool {
        match &self.family {
            Family::Const { .. } | Family::Power { .. } | Family::ExpQuad { .. } => true,
            Family::AbsPow { base, .. } => base.is_radial(),
            _ => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale == C64::new(0.0, 0.0)
            || match &self.family {
                Family::Const { c } => *c == C64::new(0.0, 0.0),
                Family::Poly { coeffs } => coeffs.iter().all(|c| *c == C64::new(0.0, 0.0)),
                _ => false,
            }
    }

    /// Taylor coefficients at the origin for the analytic families (n = 1).
    pub fn taylor(&self, len: usize) -> Result<Vec<C64>> {
        let mut c = vec![C64::new(0.0, 0.0); len];
        match &self.family {
            Family::Const { c: v } => {
                if len > 0 {
                    c[0] = *v;
                }
            }
            Family::Analytic { a } => {
                let mut cur = C64::new(1.0, 0.0);
                for (k, slot) in c.iter_mut().enumerate() {
                    *slot = cur;
                    let kf = k as f64;
                    cur *= (kf - a) / (kf + 1.0);
                }
            }
            Family::ExpLinear { b } if b.len() == 1 => {
                let mut cur = C64::new(1.0, 0.0);
                for (k, slot) in c.iter_mut().enumerate() {
                    *slot = cur;
                    cur *= b[0] / (k as f64 + 1.0);
                }
            }
            Family::Poly { coeffs } => {
                for (slot, v) in c.iter_mut().zip(coeffs) {
                    *slot = *v;
                }
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "`{self}` has no Taylor expansion in the supported analytic families"
                )))
            }
        }
        Ok(c.into_iter().map(|v| v * self.scale).collect())
    }

    /// Whether `log|f(x)|` splits as a sum of functions of single real
    /// coordinates.
    pub fn is_plane_separable(&self) -> bool {
        match &self.family {
            Family::Const { .. }
            | Family::ExpLinear { .. }
            | Family::ExpReal { .. }
            | Family::ExpQuad { .. }
            | Family::ExpAbs { .. }
            | Family::AbsCoord { .. } => true,
            Family::AbsPow { base, .. } => base.is_plane_separable(),
            _ => false,
        }
    }

    pub fn plane_growth(&self) -> Option<Growth> {
        let g = |quad, lin, degree| Some(Growth { quad, lin, degree });
        match &self.family {
            Family::Const { .. } => g(0.0, 0.0, 0.0),
            Family::ExpLinear { b } => g(0.0, b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(), 0.0),
            Family::ExpReal { c } => g(0.0, c.iter().map(|x| x * x).sum::<f64>().sqrt(), 0.0),
            Family::ExpQuad { delta } => g(delta.max(0.0), 0.0, 0.0),
            Family::ExpAbs { b } => g(0.0, b.abs(), 0.0),
            Family::AbsCoord { a } if *a >= 0.0 => g(0.0, 0.0, *a),
            Family::Poly { coeffs } => g(0.0, 0.0, (coeffs.len().max(1) - 1) as f64),
            Family::AbsPow { base, s } if *s >= 0.0 => base.plane_growth().map(|b| Growth {
                quad: b.quad * s,
                lin: b.lin * s,
                degree: b.degree * s,
            }),
            Family::AbsPow { base, s } => match &base.family {
                Family::ExpLinear { .. } | Family::ExpReal { .. } | Family::ExpQuad { .. } | Family::ExpAbs { .. } => {
                    base.plane_growth().map(|b| Growth {
                        quad: (b.quad * s).max(0.0),
                        lin: b.lin * s.abs(),
                        degree: 0.0,
                    })
                }
                _ => None,
            },
            _ => None,
        }
    }
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn plane_to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks(2)
        .map(|c| C64::new(c[0], c.get(1).copied().unwrap_or(0.0)))
        .collect()
}

fn plane_at(z: &[C64]) -> At<'_> {
    let n2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    At {
        z,
        dist2: 1.0 - n2,
        one_minus: C64::new(1.0, 0.0) - z[0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dsl_round_trip() {
        for s in [
            "const:c=1",
            "power:zeta=0.5",
            "abspow:base=analytic(1-z)^0.3,s=2",
            "explinear:b=1",
            "expquad:delta=0.1",
            "scale:2,explinear:b=-1",
            "poly:c=1;1",
            "explinear:b=0.5+1i",
            "abspow:base=[explinear:b=1],s=2",
        ] {
            let sym: Symbol = s.parse().unwrap();
            let again: Symbol = sym.to_string().parse().unwrap();
            assert_eq!(sym, again, "{s}");
        }
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3-2.5i").unwrap(), C64::new(1e-3, -2.5));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn analytic_matches_principal_power() {
        let f: Symbol = "analytic:a=0.3".parse().unwrap();
        let p = DiskPoint::polar(0.6, 1.1);
        let direct = (C64::new(1.0, 0.0) - p.z()).powf(0.3);
        assert!((f.eval_disk(p) - direct).norm() < 1e-14);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!("power:zeta=1,extra=2".parse::<Symbol>().is_err());
        assert!("nosuch:x=1".parse::<Symbol>().is_err());
    }
}
