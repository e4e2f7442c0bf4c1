//! Transformations `G` applied to a Gaussian or linear input, with a compact
//! text form used on the command line.
//!
//! Canonical text forms:
//!
//! | form                     | meaning                              |
//! |--------------------------|--------------------------------------|
//! | `identity`               | `x`                                  |
//! | `square`, `cube`         | `x^2`, `x^3`                         |
//! | `abs`                    | `|x|`                                |
//! | `indicator:t`            | `1{x <= t}`                          |
//! | `poly:c0,c1,...`         | `c0 + c1 x + ...`                    |
//! | `hermite:m`              | `H_m(x)`                             |
//! | `shift:z:G`              | `G(x + z)`                           |
//! | `scale:s:G`              | `G(s x)`                             |
//! | `clip:c:G`               | `G(x)` clamped to `[-c, c]`          |
//! | `compose:{F}:{G}`        | `F(G(x))`                            |
//! | `laglin:w0,w1,...`       | `w0 y(n) + w1 y(n-1) + ...`          |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::hermite::hermite_poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TransformSpec {
    Identity,
    Square,
    Absolute,
    Cube,
    IndicatorBelow(f64),
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
    HermiteBasis(usize),
    Shifted {
        inner: Box<TransformSpec>,
        z: f64,
    },
    Scaled {
        inner: Box<TransformSpec>,
        s: f64,
    },
    Clipped {
        inner: Box<TransformSpec>,
        bound: f64,
    },
    Composed {
        outer: Box<TransformSpec>,
        inner: Box<TransformSpec>,
    },
    /// Weights over lags `0..=l`.
    LaggedLinear(Vec<f64>),
}

const ROOT_SCAN_HALF_WIDTH: f64 = 12.0;
const ROOT_SCAN_POINTS: usize = 4801;

impl TransformSpec {
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        let t = TransformSpec::Polynomial(coefficients);
        t.validate()?;
        Ok(t)
    }

    pub fn shifted(inner: TransformSpec, z: f64) -> Self {
        TransformSpec::Shifted {
            inner: Box::new(inner),
            z,
        }
    }

    pub fn scaled(inner: TransformSpec, s: f64) -> Result<Self> {
        let t = TransformSpec::Scaled {
            inner: Box::new(inner),
            s,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn clipped(inner: TransformSpec, bound: f64) -> Result<Self> {
        let t = TransformSpec::Clipped {
            inner: Box::new(inner),
            bound,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn composed(outer: TransformSpec, inner: TransformSpec) -> Self {
        TransformSpec::Composed {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    /// Checks the structural invariants recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            TransformSpec::IndicatorBelow(t) if !t.is_finite() => {
                Err(LrdError::Input("indicator threshold must be finite".into()))
            }
            TransformSpec::Polynomial(c) => {
                if c.is_empty() {
                    return Err(LrdError::Input("polynomial needs coefficients".into()));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(LrdError::Input(
                        "polynomial coefficients must be finite".into(),
                    ));
                }
                if *c.last().unwrap() == 0.0 && c.len() > 1 {
                    return Err(LrdError::Input(
                        "polynomial leading coefficient must be nonzero".into(),
                    ));
                }
                Ok(())
            }
            TransformSpec::Shifted { inner, z } => {
                if !z.is_finite() {
                    return Err(LrdError::Input("shift must be finite".into()));
                }
                inner.require_instantaneous()?;
                inner.validate()
            }
            TransformSpec::Scaled { inner, s } => {
                if *s == 0.0 || !s.is_finite() {
                    return Err(LrdError::Input(
                        "scale factor must be finite and nonzero".into(),
                    ));
                }
                inner.require_instantaneous()?;
                inner.validate()
            }
            TransformSpec::Clipped { inner, bound } => {
                if !(*bound > 0.0) || !bound.is_finite() {
                    return Err(LrdError::Input("clip bound must be positive".into()));
                }
                inner.require_instantaneous()?;
                inner.validate()
            }
            TransformSpec::Composed { outer, inner } => {
                outer.require_instantaneous()?;
                inner.require_instantaneous()?;
                outer.validate()?;
                inner.validate()
            }
            TransformSpec::LaggedLinear(w) => {
                if w.is_empty() || w.iter().any(|v| !v.is_finite()) {
                    return Err(LrdError::Input(
                        "lag weights must be finite and nonempty".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_instantaneous(&self) -> bool {
        !matches!(self, TransformSpec::LaggedLinear(_))
    }

    fn require_instantaneous(&self) -> Result<()> {
        if self.is_instantaneous() {
            Ok(())
        } else {
            Err(LrdError::Input(format!(
                "{self} has a lag structure and cannot be nested"
            )))
        }
    }

    /// Number of past values the transform looks at.
    pub fn lags(&self) -> usize {
        match self {
            TransformSpec::LaggedLinear(w) => w.len() - 1,
            _ => 0,
        }
    }

    /// Pointwise value. Lagged transforms evaluate with every lag equal to
    /// `x`; use [`TransformSpec::eval_window`] for sliding application.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TransformSpec::Identity => x,
            TransformSpec::Square => x * x,
            TransformSpec::Absolute => x.abs(),
            TransformSpec::Cube => x * x * x,
            TransformSpec::IndicatorBelow(t) => {
                if x <= *t {
                    1.0
                } else {
                    0.0
                }
            }
            TransformSpec::Polynomial(c) => c.iter().rev().fold(0.0, |acc, v| acc * x + v),
            TransformSpec::HermiteBasis(m) => hermite_poly(*m, x),
            TransformSpec::Shifted { inner, z } => inner.eval(x + z),
            TransformSpec::Scaled { inner, s } => inner.eval(s * x),
            TransformSpec::Clipped { inner, bound } => inner.eval(x).clamp(-bound, *bound),
            TransformSpec::Composed { outer, inner } => outer.eval(inner.eval(x)),
            TransformSpec::LaggedLinear(w) => w.iter().sum::<f64>() * x,
        }
    }

    /// Value on a window `[y(n), y(n-1), ..., y(n-l)]`.
    pub fn eval_window(&self, window: &[f64]) -> f64 {
        match self {
            TransformSpec::LaggedLinear(w) => w.iter().zip(window).map(|(a, b)| a * b).sum(),
            other => other.eval(window[0]),
        }
    }

    /// Degree when the transform is a polynomial in its argument.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            TransformSpec::Identity => Some(1),
            TransformSpec::Square => Some(2),
            TransformSpec::Cube => Some(3),
            TransformSpec::Polynomial(c) => Some(c.len() - 1),
            TransformSpec::HermiteBasis(m) => Some(*m),
            TransformSpec::Shifted { inner, .. } | TransformSpec::Scaled { inner, .. } => {
                inner.polynomial_degree()
            }
            TransformSpec::Composed { outer, inner } => {
                Some(outer.polynomial_degree()? * inner.polynomial_degree()?)
            }
            _ => None,
        }
    }

    /// Whether the transform is globally Lipschitz.
    pub fn is_lipschitz(&self) -> bool {
        match self {
            TransformSpec::Identity | TransformSpec::Absolute | TransformSpec::LaggedLinear(_) => {
                true
            }
            TransformSpec::Polynomial(c) => c.len() <= 2,
            TransformSpec::HermiteBasis(m) => *m <= 1,
            TransformSpec::Shifted { inner, .. } | TransformSpec::Scaled { inner, .. } => {
                inner.is_lipschitz()
            }
            // Clamping a continuous transform with polynomial growth keeps it
            // on a bounded set where it is smooth.
            TransformSpec::Clipped { inner, .. } => inner.is_continuous(),
            TransformSpec::Composed { outer, inner } => {
                outer.is_lipschitz() && inner.is_lipschitz()
            }
            _ => false,
        }
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            TransformSpec::IndicatorBelow(_) => false,
            TransformSpec::Shifted { inner, .. }
            | TransformSpec::Scaled { inner, .. }
            | TransformSpec::Clipped { inner, .. } => inner.is_continuous(),
            TransformSpec::Composed { outer, inner } => {
                outer.is_continuous() && inner.is_continuous()
            }
            _ => true,
        }
    }

    /// Points where the transform or its derivative is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            TransformSpec::Absolute => vec![0.0],
            TransformSpec::IndicatorBelow(t) => vec![*t],
            TransformSpec::Shifted { inner, z } => {
                inner.breakpoints().into_iter().map(|b| b - z).collect()
            }
            TransformSpec::Scaled { inner, s } => {
                inner.breakpoints().into_iter().map(|b| b / s).collect()
            }
            TransformSpec::Clipped { inner, bound } => {
                let mut v = inner.breakpoints();
                v.extend(level_crossings(inner, *bound));
                v.extend(level_crossings(inner, -bound));
                v
            }
            TransformSpec::Composed { outer, inner } => {
                let mut v = inner.breakpoints();
                for b in outer.breakpoints() {
                    v.extend(level_crossings(inner, b));
                }
                v
            }
            _ => Vec::new(),
        };
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out
    }

    /// Monomial coefficients (increasing degree) when the transform is a
    /// polynomial.
    pub fn polynomial_coefficients(&self) -> Option<Vec<f64>> {
        match self {
            TransformSpec::Identity => Some(vec![0.0, 1.0]),
            TransformSpec::Square => Some(vec![0.0, 0.0, 1.0]),
            TransformSpec::Cube => Some(vec![0.0, 0.0, 0.0, 1.0]),
            TransformSpec::Polynomial(c) => Some(c.clone()),
            TransformSpec::HermiteBasis(m) => Some(hermite_monomials(*m)),
            TransformSpec::Shifted { inner, z } => {
                let c = inner.polynomial_coefficients()?;
                Some(poly_compose(&c, &[*z, 1.0]))
            }
            TransformSpec::Scaled { inner, s } => {
                let c = inner.polynomial_coefficients()?;
                Some(poly_compose(&c, &[0.0, *s]))
            }
            TransformSpec::Composed { outer, inner } => Some(poly_compose(
                &outer.polynomial_coefficients()?,
                &inner.polynomial_coefficients()?,
            )),
            _ => None,
        }
    }

    /// Derivative of a polynomial transform.
    pub fn derivative(&self) -> Result<TransformSpec> {
        let c = self.polynomial_coefficients().ok_or_else(|| {
            LrdError::Input(format!(
                "{self} is not a polynomial; derivative unavailable"
            ))
        })?;
        let d: Vec<f64> = if c.len() <= 1 {
            vec![0.0]
        } else {
            c.iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| k as f64 * v)
                .collect()
        };
        Ok(TransformSpec::Polynomial(d))
    }
}

fn hermite_monomials(m: usize) -> Vec<f64> {
    // H_{k+1} = x H_k - k H_{k-1}
    let mut prev = vec![1.0];
    if m == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..m {
        let mut next = vec![0.0; k + 2];
        for (i, v) in cur.iter().enumerate() {
            next[i + 1] += v;
        }
        for (i, v) in prev.iter().enumerate() {
            next[i] -= k as f64 * v;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `outer(inner(x))` by Horner's scheme.
fn poly_compose(outer: &[f64], inner: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for c in outer.iter().rev() {
        acc = poly_mul(&acc, inner);
        acc[0] += c;
    }
    acc
}

/// Solutions of `g(x) = level` on the scan window, located by sign changes
/// on a fine grid and refined by bisection.
fn level_crossings(g: &TransformSpec, level: f64) -> Vec<f64> {
    let step = 2.0 * ROOT_SCAN_HALF_WIDTH / (ROOT_SCAN_POINTS - 1) as f64;
    let f = |x: f64| g.eval(x) - level;
    let mut roots = Vec::new();
    let mut x0 = -ROOT_SCAN_HALF_WIDTH;
    let mut f0 = f(x0);
    for i in 1..ROOT_SCAN_POINTS {
        let x1 = -ROOT_SCAN_HALF_WIDTH + i as f64 * step;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformSpec::Identity => write!(f, "identity"),
            TransformSpec::Square => write!(f, "square"),
            TransformSpec::Absolute => write!(f, "abs"),
            TransformSpec::Cube => write!(f, "cube"),
            TransformSpec::IndicatorBelow(t) => write!(f, "indicator:{t}"),
            TransformSpec::Polynomial(c) => write!(f, "poly:{}", join(c)),
            TransformSpec::HermiteBasis(m) => write!(f, "hermite:{m}"),
            TransformSpec::Shifted { inner, z } => write!(f, "shift:{z}:{inner}"),
            TransformSpec::Scaled { inner, s } => write!(f, "scale:{s}:{inner}"),
            TransformSpec::Clipped { inner, bound } => write!(f, "clip:{bound}:{inner}"),
            TransformSpec::Composed { outer, inner } => {
                write!(f, "compose:{{{outer}}}:{{{inner}}}")
            }
            TransformSpec::LaggedLinear(w) => write!(f, "laglin:{}", join(w)),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| LrdError::Parse(format!("not a number: {s:?}")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

/// Splits `"{a}:{b}"` into `a` and `b`, honouring nested braces.
fn split_braced_pair(s: &str) -> Result<(&str, &str)> {
    let bytes = s.as_bytes();
    if bytes.first() != Some(&b'{') {
        return Err(LrdError::Parse(format!("expected '{{' in {s:?}")));
    }
    let mut depth = 0usize;
    for (i, &c) in bytes.iter().enumerate() {
        match c {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    let first = &s[1..i];
                    let rest = s[i + 1..]
                        .strip_prefix(':')
                        .ok_or_else(|| LrdError::Parse(format!("expected ':' after {first:?}")))?;
                    let second = rest
                        .strip_prefix('{')
                        .and_then(|r| r.strip_suffix('}'))
                        .ok_or_else(|| LrdError::Parse(format!("expected braces in {rest:?}")))?;
                    return Ok((first, second));
                }
            }
            _ => {}
        }
    }
    Err(LrdError::Parse(format!("unbalanced braces in {s:?}")))
}

impl FromStr for TransformSpec {
    type Err = LrdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        fn need<'a>(head: &str, r: Option<&'a str>) -> Result<&'a str> {
            r.ok_or_else(|| LrdError::Parse(format!("transform {head:?} needs an argument")))
        }
        let t = match head {
            "identity" | "id" => TransformSpec::Identity,
            "square" => TransformSpec::Square,
            "abs" | "absolute" => TransformSpec::Absolute,
            "cube" => TransformSpec::Cube,
            "indicator" => TransformSpec::IndicatorBelow(parse_f64(need(head, rest)?)?),
            "poly" => TransformSpec::Polynomial(parse_list(need(head, rest)?)?),
            "hermite" => TransformSpec::HermiteBasis(
                need(head, rest)?
                    .trim()
                    .parse()
                    .map_err(|_| LrdError::Parse(format!("bad Hermite order in {s:?}")))?,
            ),
            "shift" | "scale" | "clip" => {
                let (num, inner) = need(head, rest)?
                    .split_once(':')
                    .ok_or_else(|| LrdError::Parse(format!("{head} needs an inner transform")))?;
                let value = parse_f64(num)?;
                let inner = Box::new(inner.parse::<TransformSpec>()?);
                match head {
                    "shift" => TransformSpec::Shifted { inner, z: value },
                    "scale" => TransformSpec::Scaled { inner, s: value },
                    _ => TransformSpec::Clipped {
                        inner,
                        bound: value,
                    },
                }
            }
            "compose" => {
                let (outer, inner) = split_braced_pair(need(head, rest)?)?;
                TransformSpec::composed(outer.parse()?, inner.parse()?)
            }
            "laglin" => TransformSpec::LaggedLinear(parse_list(need(head, rest)?)?),
            other => return Err(LrdError::Parse(format!("unknown transform {other:?}"))),
        };
        t.validate()?;
        Ok(t)
    }
}

impl From<TransformSpec> for String {
    fn from(t: TransformSpec) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TransformSpec {
    type Error = LrdError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polynomial_coefficients_agree_with_eval() {
        let specs = [
            "hermite:5",
            "shift:0.2:square",
            "scale:1.5:cube",
            "compose:{poly:1,2}:{hermite:2}",
            "poly:0.5,-1,0,0.25",
        ];
        for s in specs {
            let t: TransformSpec = s.parse().unwrap();
            let p = TransformSpec::Polynomial(t.polynomial_coefficients().unwrap());
            for x in [-2.0, -0.7, 0.0, 0.4, 1.9] {
                assert!((p.eval(x) - t.eval(x)).abs() < 1e-10, "{s} at {x}");
            }
        }
        assert!(TransformSpec::Absolute.polynomial_coefficients().is_none());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let t: TransformSpec = "shift:0.3:hermite:3".parse().unwrap();
        let d = t.derivative().unwrap();
        for x in [-1.5, 0.0, 0.8] {
            let fd = (t.eval(x + 1e-5) - t.eval(x - 1e-5)) / 2e-5;
            assert!((d.eval(x) - fd).abs() < 1e-6);
        }
        assert_eq!(TransformSpec::Identity.derivative().unwrap().eval(3.0), 1.0);
        assert!(TransformSpec::IndicatorBelow(0.0).derivative().is_err());
    }

    #[test]
    fn parses_canonical_examples() {
        assert_eq!(
            "square".parse::<TransformSpec>().unwrap(),
            TransformSpec::Square
        );
        assert_eq!(
            "poly:1,0,2".parse::<TransformSpec>().unwrap(),
            TransformSpec::Polynomial(vec![1.0, 0.0, 2.0])
        );
        assert_eq!(
            "shift:0.1:square".parse::<TransformSpec>().unwrap(),
            TransformSpec::shifted(TransformSpec::Square, 0.1)
        );
        assert_eq!(
            "indicator:0.0".parse::<TransformSpec>().unwrap(),
            TransformSpec::IndicatorBelow(0.0)
        );
        assert_eq!(
            "laglin:1,-1".parse::<TransformSpec>().unwrap(),
            TransformSpec::LaggedLinear(vec![1.0, -1.0])
        );
        let c: TransformSpec = "compose:{shift:0.2:square}:{scale:2:identity}"
            .parse()
            .unwrap();
        assert_eq!(c.eval(1.0), (2.0f64 + 0.2).powi(2));
    }

    #[test]
    fn rejects_invalid_forms() {
        assert!("poly:1,0,0".parse::<TransformSpec>().is_err());
        assert!("scale:0:square".parse::<TransformSpec>().is_err());
        assert!("wobble".parse::<TransformSpec>().is_err());
        assert!("shift:0.1:laglin:1,-1".parse::<TransformSpec>().is_err());
        assert!("compose:{square}".parse::<TransformSpec>().is_err());
    }

    #[test]
    fn evaluates_pointwise() {
        let p: TransformSpec = "poly:-0.3,1,0.3".parse().unwrap();
        assert!((p.eval(2.0) - (2.0 + 0.3 * 3.0)).abs() < 1e-15);
        assert_eq!(TransformSpec::IndicatorBelow(0.0).eval(0.0), 1.0);
        let clip: TransformSpec = "clip:1.5:abs".parse().unwrap();
        assert_eq!(clip.eval(-3.0), 1.5);
        assert_eq!(
            TransformSpec::LaggedLinear(vec![1.0, -1.0]).eval_window(&[3.0, 1.0]),
            2.0
        );
    }

    #[test]
    fn breakpoints_follow_the_structure() {
        let t: TransformSpec = "shift:0.5:abs".parse().unwrap();
        assert_eq!(t.breakpoints(), vec![-0.5]);
        let c: TransformSpec = "clip:1:abs".parse().unwrap();
        let bps = c.breakpoints();
        assert_eq!(bps.len(), 3);
        assert!(
            (bps[0] + 1.0).abs() < 1e-12 && bps[1].abs() < 1e-12 && (bps[2] - 1.0).abs() < 1e-12
        );
        let ind: TransformSpec = "compose:{indicator:1}:{square}".parse().unwrap();
        let bps = ind.breakpoints();
        assert_eq!(bps.len(), 2);
        assert!((bps[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_classification() {
        assert!(TransformSpec::Absolute.is_lipschitz());
        assert!(!TransformSpec::Square.is_lipschitz());
        assert!("clip:2:square"
            .parse::<TransformSpec>()
            .unwrap()
            .is_lipschitz());
        assert!(!TransformSpec::IndicatorBelow(0.0).is_lipschitz());
    }

    fn leaf() -> impl Strategy<Value = TransformSpec> {
        prop_oneof![
            Just(TransformSpec::Identity),
            Just(TransformSpec::Square),
            Just(TransformSpec::Absolute),
            Just(TransformSpec::Cube),
            (-3.0f64..3.0).prop_map(TransformSpec::IndicatorBelow),
            (0usize..8).prop_map(TransformSpec::HermiteBasis),
            proptest::collection::vec(-5.0f64..5.0, 1..5).prop_filter_map("leading", |mut c| {
                let last = c.len() - 1;
                if c[last] == 0.0 {
                    c[last] = 1.0;
                }
                Some(TransformSpec::Polynomial(c))
            }),
        ]
    }

    fn spec() -> impl Strategy<Value = TransformSpec> {
        leaf().prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), -2.0f64..2.0).prop_map(|(t, z)| TransformSpec::shifted(t, z)),
                (inner.clone(), 0.1f64..3.0).prop_map(|(t, s)| TransformSpec::Scaled {
                    inner: Box::new(t),
                    s
                }),
                (inner.clone(), 0.1f64..3.0).prop_map(|(t, b)| TransformSpec::Clipped {
                    inner: Box::new(t),
                    bound: b
                }),
                (inner.clone(), inner).prop_map(|(a, b)| TransformSpec::composed(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn text_form_round_trips(t in spec()) {
            let text = t.to_string();
            let back: TransformSpec = text.parse().unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
