//! Computable bounds on use and yield.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundError {
    #[error("cannot parse bound `{0}`")]
    Parse(String),
    #[error("h_alpha requires alpha >= 1, got {0}")]
    AlphaTooSmall(Rational),
    #[error("affine slope must be nonnegative, got {0}")]
    NegativeSlope(Rational),
    #[error("table bound is empty")]
    EmptyTable,
    #[error("table bound decreases at index {0}")]
    Decreasing(usize),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

/// A total, nondecreasing bound `m: N -> N`.
///
/// Text forms: `cl:c`, `h:alpha,c` (also `h_alpha:`), `table:v0,v1,..`,
/// `affine:a,b`. Rational parameters accept decimals (`1.5`) or fractions
/// (`3/2`) and are kept exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BoundSpec {
    /// `n + c`
    Cl { c: u64 },
    /// `ceil(alpha * (n + c))`
    HAlpha { alpha: Rational, c: u64 },
    /// Explicit values; saturates at the last entry past the end.
    Table(Vec<u64>),
    /// `max(0, ceil(a * n + b))`
    Affine { a: Rational, b: Rational },
}

impl BoundSpec {
    pub fn cl(c: u64) -> Self {
        BoundSpec::Cl { c }
    }

    pub fn h_alpha(alpha: Rational, c: u64) -> Result<Self, BoundError> {
        if alpha < Rational::from_integer(1) {
            return Err(BoundError::AlphaTooSmall(alpha));
        }
        Ok(BoundSpec::HAlpha { alpha, c })
    }

    pub fn table(values: Vec<u64>) -> Result<Self, BoundError> {
        if values.is_empty() {
            return Err(BoundError::EmptyTable);
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(BoundError::Decreasing(i + 1));
        }
        Ok(BoundSpec::Table(values))
    }

    pub fn affine(a: Rational, b: Rational) -> Result<Self, BoundError> {
        if a < Rational::from_integer(0) {
            return Err(BoundError::NegativeSlope(a));
        }
        Ok(BoundSpec::Affine { a, b })
    }

    pub fn eval(&self, n: u64) -> u64 {
        match self {
            BoundSpec::Cl { c } => n + c,
            BoundSpec::HAlpha { alpha, c } => {
                ceil_div(*alpha.numer() as i128 * (n + c) as i128, *alpha.denom() as i128)
            }
            BoundSpec::Table(v) => v[(n as usize).min(v.len() - 1)],
            BoundSpec::Affine { a, b } => {
                // a*n + b = (an*bd*n + bn*ad) / (ad*bd)
                let num = *a.numer() as i128 * *b.denom() as i128 * n as i128
                    + *b.numer() as i128 * *a.denom() as i128;
                ceil_div(num, *a.denom() as i128 * *b.denom() as i128)
            }
        }
    }

    /// `lim m(n)/n` for the closed-form families.
    pub fn limit_ratio(&self) -> Option<Rational> {
        match self {
            BoundSpec::Cl { .. } => Some(Rational::from_integer(1)),
            BoundSpec::HAlpha { alpha, .. } => Some(*alpha),
            BoundSpec::Affine { a, .. } => Some(*a),
            BoundSpec::Table(_) => None,
        }
    }

    pub fn is_cl(&self) -> bool {
        matches!(self, BoundSpec::Cl { .. })
    }
}

fn ceil_div(num: i128, den: i128) -> u64 {
    debug_assert!(den > 0);
    if num <= 0 {
        return 0;
    }
    ((num + den - 1) / den) as u64
}

/// Finite-horizon stand-in for `limsup m(n)/n`, reported next to the exact
/// limit when the bound family has one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimsupRatio {
    pub horizon: u64,
    /// `max bound(n)/n` over `n` in `[ceil(N/2), N]`.
    #[serde(with = "rational_str")]
    pub surrogate: Rational,
    #[serde(with = "opt_rational_str")]
    pub closed_form: Option<Rational>,
}

impl LimsupRatio {
    /// The closed form when known, otherwise the surrogate.
    pub fn factor(&self) -> Rational {
        self.closed_form.unwrap_or(self.surrogate)
    }

    pub fn factor_f64(&self) -> f64 {
        to_f64(self.factor())
    }
}

pub fn limsup_ratio(bound: &BoundSpec, horizon: u64) -> Result<LimsupRatio, BoundError> {
    if horizon == 0 {
        return Err(BoundError::ZeroHorizon);
    }
    let lo = horizon.div_ceil(2).max(1);
    let surrogate = (lo..=horizon)
        .map(|n| Rational::new(bound.eval(n) as i64, n as i64))
        .max()
        .expect("window is nonempty");
    Ok(LimsupRatio {
        horizon,
        surrogate,
        closed_form: bound.limit_ratio(),
    })
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact decimal or fraction parsing: `2`, `1.5`, `3/2`, `-0.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        return (d != 0).then(|| Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 12 {
        return None;
    }
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let int_v: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_v: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let num = int_v.checked_mul(scale)?.checked_add(frac_v)?;
    Some(Rational::new(if neg { -num } else { num }, scale))
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for BoundSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundSpec::Cl { c } => write!(f, "cl:{c}"),
            BoundSpec::HAlpha { alpha, c } => write!(f, "h:{},{c}", fmt_rational(alpha)),
            BoundSpec::Table(v) => {
                let vals: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "table:{}", vals.join(","))
            }
            BoundSpec::Affine { a, b } => {
                write!(f, "affine:{},{}", fmt_rational(a), fmt_rational(b))
            }
        }
    }
}

impl FromStr for BoundSpec {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, BoundError> {
        let err = || BoundError::Parse(s.to_string());
        let (kind, args) = s.trim().split_once(':').ok_or_else(err)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |v: &str| v.parse::<u64>().map_err(|_| err());
        let rat = |v: &str| parse_rational(v).ok_or_else(err);
        match (kind, args.as_slice()) {
            ("cl", [c]) => Ok(BoundSpec::cl(int(c)?)),
            ("h" | "h_alpha", [alpha, c]) => BoundSpec::h_alpha(rat(alpha)?, int(c)?),
            ("h" | "h_alpha", [alpha]) => BoundSpec::h_alpha(rat(alpha)?, 0),
            ("table", vals) => BoundSpec::table(vals.iter().map(|v| int(v)).collect::<Result<_, _>>()?),
            ("affine", [a, b]) => BoundSpec::affine(rat(a)?, rat(b)?),
            _ => Err(err()),
        }
    }
}

impl TryFrom<String> for BoundSpec {
    type Error = BoundError;
    fn try_from(s: String) -> Result<Self, BoundError> {
        s.parse()
    }
}

impl From<BoundSpec> for String {
    fn from(b: BoundSpec) -> String {
        b.to_string()
    }
}

mod rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s}")))
    }
}

mod opt_rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&fmt_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| {
            parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s}")))
        })
        .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn closed_forms() {
        assert_eq!(BoundSpec::cl(3).eval(10), 13);
        let h = BoundSpec::h_alpha(r(2, 1), 1).unwrap();
        assert_eq!(h.eval(2), 6);
        let h = BoundSpec::h_alpha(r(3, 2), 1).unwrap();
        assert_eq!(h.eval(0), 2);
        assert_eq!(h.eval(1), 3);
        assert_eq!(h.eval(2), 5);
        let a = BoundSpec::affine(r(1, 2), r(-3, 1)).unwrap();
        assert_eq!(a.eval(0), 0);
        assert_eq!(a.eval(7), 1);
    }

    #[test]
    fn decimal_alpha_is_exact() {
        // 1.1 * 10 is 11 exactly; a float would round up to 12.
        let h: BoundSpec = "h:1.1,0".parse().unwrap();
        assert_eq!(h.eval(10), 11);
    }

    #[test]
    fn constructors_validate() {
        assert!(BoundSpec::h_alpha(r(1, 2), 0).is_err());
        assert_eq!(BoundSpec::table(vec![1, 3, 2]), Err(BoundError::Decreasing(2)));
        assert_eq!(BoundSpec::table(vec![]), Err(BoundError::EmptyTable));
        assert!(BoundSpec::affine(r(-1, 1), r(0, 1)).is_err());
        assert!("cl".parse::<BoundSpec>().is_err());
        assert!("cl:x".parse::<BoundSpec>().is_err());
        assert!("h:0.5,1".parse::<BoundSpec>().is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["cl:0", "h:2,1", "h:3/2,1", "table:1,2,2,5", "affine:2,-1/2"] {
            let b: BoundSpec = s.parse().unwrap();
            assert_eq!(b.to_string(), s);
            let json = serde_json::to_string(&b).unwrap();
            assert_eq!(serde_json::from_str::<BoundSpec>(&json).unwrap(), b);
        }
        assert_eq!("h_alpha:1.5,1".parse::<BoundSpec>().unwrap().to_string(), "h:3/2,1");
    }

    #[test]
    fn table_saturates() {
        let t = BoundSpec::table(vec![0, 2, 4]).unwrap();
        assert_eq!(t.eval(1), 2);
        assert_eq!(t.eval(100), 4);
    }

    #[test]
    fn limsup_examples() {
        let l = limsup_ratio(&BoundSpec::cl(3), 1000).unwrap();
        assert!(to_f64(l.surrogate) <= 1.006 + 1e-12);
        assert_eq!(l.closed_form, Some(r(1, 1)));

        let l = limsup_ratio(&BoundSpec::h_alpha(r(2, 1), 0).unwrap(), 1000).unwrap();
        assert_eq!(l.surrogate, r(2, 1));

        let l = limsup_ratio(&BoundSpec::h_alpha(r(3, 2), 1).unwrap(), 1000).unwrap();
        // Brute-force the window with floats as an independent check.
        let brute = (500..=1000u64)
            .map(|n| (1.5 * (n as f64 + 1.0)).ceil() / n as f64)
            .fold(f64::MIN, f64::max);
        assert!((to_f64(l.surrogate) - brute).abs() < 1e-12);
        assert!((to_f64(l.surrogate) - 1.5).abs() < 0.01);
        assert_eq!(l.closed_form, Some(r(3, 2)));

        assert_eq!(limsup_ratio(&BoundSpec::cl(0), 0), Err(BoundError::ZeroHorizon));
        let t = limsup_ratio(&BoundSpec::table(vec![0, 3]).unwrap(), 4).unwrap();
        assert_eq!(t.closed_form, None);
        assert_eq!(t.factor(), r(3, 2));
    }

    #[test]
    fn h_alpha_one_is_cl_pointwise() {
        for c in [0u64, 1, 7] {
            let h = BoundSpec::h_alpha(r(1, 1), c).unwrap();
            let cl = BoundSpec::cl(c);
            assert!((0..=1_000_000u64).all(|n| h.eval(n) == cl.eval(n)));
        }
    }

    proptest! {
        #[test]
        fn bounds_are_nondecreasing(num in 1i64..50, den in 1i64..10, c in 0u64..20, n in 0u64..100_000) {
            prop_assume!(num >= den);
            let h = BoundSpec::h_alpha(r(num, den), c).unwrap();
            prop_assert!(h.eval(n) <= h.eval(n + 1));
            prop_assert!(h.eval(n) as f64 >= (num as f64 / den as f64) * (n + c) as f64 - 1e-9);
        }
    }
}
