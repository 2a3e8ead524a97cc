//! The sets A = {n >= 0 : ||p(n)|| <= eps(n)} and exact membership.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::realkernel::{form_cmp_threshold, parse_decimal, RealDescriptor, Threshold};

/// Relative error allowed for schedules evaluated in floating point.
const FLOAT_SLACK: f64 = 1.0 / (1u64 << 48) as f64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EpsilonSchedule {
    Constant(BigRational),
    /// max(floor, min(1/2, c / ln n)), and 1/2 for n <= 1.
    InverseLog { c: BigRational, floor: BigRational },
    /// min(1/2, n^-delta), and 1/2 for n <= 1.
    InversePower { delta: BigRational },
    /// Value of the last entry with key <= n.
    Table(Vec<(u64, BigRational)>),
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

pub(crate) fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.contains('/') {
        crate::bitset::rational_str::parse(s).ok_or_else(|| Error::Parse(format!("bad rational {s:?}")))
    } else {
        parse_decimal(s)
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fixed-point bounds lo <= v * 2^128 <= hi of a rational in [0, 1/2].
fn fixed_bounds(r: &BigRational) -> (u128, u128) {
    let s = BigRational::from_integer(BigInt::one() << 128u32);
    let v = r * s;
    let lo = v.floor().to_integer().to_u128().unwrap_or(u128::MAX);
    let hi = v.ceil().to_integer().to_u128().unwrap_or(u128::MAX);
    (lo, hi)
}

fn f64_fixed(v: f64) -> u128 {
    (v * 2f64.powi(128)) as u128
}

impl EpsilonSchedule {
    pub fn constant(eps: BigRational) -> Result<Self> {
        let s = EpsilonSchedule::Constant(eps);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |r: &BigRational| r.is_positive() && r <= &half();
        let bad = |what: &str| Err(Error::Precondition(format!("schedule: {what}")));
        match self {
            EpsilonSchedule::Constant(e) if !ok(e) => bad("eps0 must lie in (0, 1/2]"),
            EpsilonSchedule::InverseLog { c, floor } if !c.is_positive() || !ok(floor) => {
                bad("need c > 0 and floor in (0, 1/2]")
            }
            EpsilonSchedule::InversePower { delta } if !delta.is_positive() => bad("need delta > 0"),
            EpsilonSchedule::Table(t) => {
                if t.first().map(|e| e.0) != Some(0) {
                    return bad("table must start at n = 0");
                }
                if t.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return bad("table keys must increase");
                }
                if t.iter().any(|(_, v)| !ok(v)) {
                    return bad("table values must lie in (0, 1/2]");
                }
                let tail: Vec<_> = t.iter().filter(|e| e.0 >= 2).collect();
                if tail.windows(2).any(|w| w[0].1 < w[1].1) {
                    return bad("table must be non-increasing for n >= 2");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Float value of the unclamped part (c / ln n or n^-delta).
    fn float_core(&self, n: u64) -> Option<f64> {
        match self {
            EpsilonSchedule::InverseLog { c, .. } => {
                Some(c.to_f64().unwrap() / (n as f64).ln())
            }
            EpsilonSchedule::InversePower { delta } => {
                Some((-(delta.to_f64().unwrap()) * (n as f64).ln()).exp())
            }
            _ => None,
        }
    }

    /// Rational bounds lo <= eps(n) <= hi; equal when eps(n) is known exactly.
    pub fn bounds(&self, n: u64) -> (BigRational, BigRational) {
        match self {
            EpsilonSchedule::Constant(e) => (e.clone(), e.clone()),
            EpsilonSchedule::Table(t) => {
                let v = t.iter().rev().find(|(k, _)| *k <= n).map(|e| e.1.clone()).unwrap();
                (v.clone(), v)
            }
            _ if n <= 1 => (half(), half()),
            _ => {
                let v = self.float_core(n).unwrap();
                let lo = BigRational::from_float(v * (1.0 - FLOAT_SLACK)).unwrap();
                let hi = BigRational::from_float(v * (1.0 + FLOAT_SLACK)).unwrap();
                let clamp = |r: BigRational| {
                    let r = r.min(half());
                    match self {
                        EpsilonSchedule::InverseLog { floor, .. } => r.max(floor.clone()),
                        _ => r,
                    }
                };
                (clamp(lo), clamp(hi))
            }
        }
    }

    /// Floating value, for reports.
    pub fn value_f64(&self, n: u64) -> f64 {
        let (lo, hi) = self.bounds(n);
        ((lo + hi) / BigInt::from(2)).to_f64().unwrap_or(f64::NAN)
    }
}

/// Precomputed fixed-point threshold bounds for the fast membership path.
enum FixedEps {
    Exact(u128, u128),
    Table(Vec<(u64, u128, u128)>),
    Float { floor: Option<(u128, u128)> },
}

impl FixedEps {
    fn new(s: &EpsilonSchedule) -> Self {
        match s {
            EpsilonSchedule::Constant(e) => {
                let (l, h) = fixed_bounds(e);
                FixedEps::Exact(l, h)
            }
            EpsilonSchedule::Table(t) => FixedEps::Table(
                t.iter()
                    .map(|(k, v)| {
                        let (l, h) = fixed_bounds(v);
                        (*k, l, h)
                    })
                    .collect(),
            ),
            EpsilonSchedule::InverseLog { floor, .. } => FixedEps::Float { floor: Some(fixed_bounds(floor)) },
            EpsilonSchedule::InversePower { .. } => FixedEps::Float { floor: None },
        }
    }

    fn at(&self, s: &EpsilonSchedule, n: u64) -> (u128, u128) {
        const HALF: u128 = 1 << 127;
        match self {
            FixedEps::Exact(l, h) => (*l, *h),
            FixedEps::Table(t) => {
                let e = t.iter().rev().find(|e| e.0 <= n).unwrap();
                (e.1, e.2)
            }
            FixedEps::Float { floor } => {
                if n <= 1 {
                    return (HALF, HALF);
                }
                let v = s.float_core(n).unwrap();
                let mut lo = f64_fixed(v * (1.0 - 2.0 * FLOAT_SLACK)).min(HALF);
                let mut hi = f64_fixed(v * (1.0 + 2.0 * FLOAT_SLACK)).saturating_add(1).min(HALF);
                if let Some((fl, fh)) = floor {
                    lo = lo.max(*fl);
                    hi = hi.max(*fh);
                }
                (lo, hi)
            }
        }
    }
}

impl fmt::Display for EpsilonSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonSchedule::Constant(e) => write!(f, "const:{}", fmt_rat(e)),
            EpsilonSchedule::InverseLog { c, floor } => write!(f, "invlog:{},{}", fmt_rat(c), fmt_rat(floor)),
            EpsilonSchedule::InversePower { delta } => write!(f, "invpow:{}", fmt_rat(delta)),
            EpsilonSchedule::Table(t) => {
                let body: Vec<String> = t.iter().map(|(k, v)| format!("{k}={}", fmt_rat(v))).collect();
                write!(f, "table:{}", body.join(","))
            }
        }
    }
}

impl FromStr for EpsilonSchedule {
    type Err = Error;
    /// `const:0.1`, `invlog:c[,floor]`, `invpow:delta`, `table:0=1/2,10=0.2`.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, body) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("schedule needs a tag: {s:?}")))?;
        let sched = match tag {
            "const" => EpsilonSchedule::Constant(parse_rat(body)?),
            "invlog" => {
                let (c, fl) = body.split_once(',').unwrap_or((body, "1/1000"));
                EpsilonSchedule::InverseLog { c: parse_rat(c)?, floor: parse_rat(fl)? }
            }
            "invpow" => EpsilonSchedule::InversePower { delta: parse_rat(body)? },
            "table" => EpsilonSchedule::Table(
                body.split(',')
                    .map(|kv| {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| Error::Parse(format!("table entry {kv:?}")))?;
                        let k = k.trim().parse().map_err(|_| Error::Parse(format!("table key {k:?}")))?;
                        Ok((k, parse_rat(v)?))
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(Error::Parse(format!("unknown schedule {tag:?}"))),
        };
        sched.validate()?;
        Ok(sched)
    }
}

impl Serialize for EpsilonSchedule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EpsilonSchedule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// p(n) = sum of coeff * n^degree, together with the schedule eps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecurrenceSetSpec {
    pub poly: Vec<(u32, RealDescriptor)>,
    pub schedule: EpsilonSchedule,
}

impl RecurrenceSetSpec {
    pub fn new(poly: Vec<(u32, RealDescriptor)>, schedule: EpsilonSchedule) -> Result<Self> {
        let mut degs: Vec<u32> = poly.iter().map(|t| t.0).collect();
        degs.sort_unstable();
        if degs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("polynomial degrees must be distinct".into()));
        }
        schedule.validate()?;
        Ok(RecurrenceSetSpec { poly, schedule })
    }

    /// alpha * n^d with a constant eps0.
    pub fn monomial(alpha: RealDescriptor, d: u32, eps0: BigRational) -> Result<Self> {
        RecurrenceSetSpec::new(vec![(d, alpha)], EpsilonSchedule::constant(eps0)?)
    }

    /// True when some coefficient is known to be irrational (the sets are
    /// periodic otherwise).
    pub fn has_irrational(&self) -> bool {
        self.poly.iter().any(|(_, c)| !c.is_rational())
    }

    fn terms(&self, n: &BigInt) -> Vec<(BigInt, &RealDescriptor)> {
        self.poly
            .iter()
            .map(|(d, c)| (num::pow(n.clone(), *d as usize), c))
            .collect()
    }
}

/// ||p(n)|| <= eps(n), decided exactly.
pub fn contains(spec: &RecurrenceSetSpec, n: u64) -> Result<bool> {
    let nb = BigInt::from(n);
    let terms = spec.terms(&nb);
    let (lo, hi) = spec.schedule.bounds(n);
    if lo == hi {
        return Ok(form_cmp_threshold(&terms, &lo)?.within());
    }
    if form_cmp_threshold(&terms, &hi)? == Threshold::Above {
        return Ok(false);
    }
    if form_cmp_threshold(&terms, &lo)?.within() {
        return Ok(true);
    }
    Err(Error::Undecidable { max_precision: 48 })
}

/// Fixed-point view of one coefficient: frac(c) * 2^128 lies in [f, f + e].
#[derive(Clone, Copy)]
struct FixedCoeff {
    deg: u32,
    f: u128,
    e: u128,
}

fn fixed_coeff(deg: u32, c: &RealDescriptor) -> Option<FixedCoeff> {
    let bits = c.stated_bits().map_or(136, |b| b.min(136));
    let (lo, hi) = c.enclose(bits).ok()?;
    let base = lo.floor();
    let s = BigRational::from_integer(BigInt::one() << 128u32);
    let f = ((&lo - &base) * &s).floor().to_integer();
    let top = ((&hi - &base) * &s).ceil().to_integer();
    let e = (&top - &f).to_u128()?.max(1);
    Some(FixedCoeff { deg, f: f.to_u128()?, e })
}

/// Decide membership from 128-bit fixed-point phases; None means "too close
/// to call", leaving the decision to the exact path.
fn fast_member(coeffs: &[FixedCoeff], n: u64, eps: (u128, u128)) -> Option<bool> {
    let mut v: u128 = 0;
    let mut w: u128 = 1;
    for c in coeffs {
        let pw = (n as u128).checked_pow(c.deg)?;
        v = v.wrapping_add(pw.wrapping_mul(c.f));
        w = w.checked_add(pw.checked_mul(c.e)?)?;
    }
    if w > 1u128 << 120 {
        return None;
    }
    let dv = v.min(v.wrapping_neg());
    if dv.checked_add(w)? <= eps.0 {
        return Some(true);
    }
    if dv > eps.1.checked_add(w)? {
        return Some(false);
    }
    None
}

const CHUNK_WORDS: usize = 64;

/// Membership bitset over [0, T].
pub fn enumerate(spec: &RecurrenceSetSpec, t: u64) -> Result<Bitset> {
    let len = t as usize + 1;
    let mut bits = Bitset::new(len)?;
    let coeffs: Option<Vec<FixedCoeff>> = spec.poly.iter().map(|(d, c)| fixed_coeff(*d, c)).collect();
    let fixed_eps = FixedEps::new(&spec.schedule);
    let results: Vec<Result<()>> = bits
        .words_mut()
        .par_chunks_mut(CHUNK_WORDS)
        .enumerate()
        .map(|(ci, chunk)| {
            let start = (ci * CHUNK_WORDS * 64) as u64;
            for (wi, word) in chunk.iter_mut().enumerate() {
                for b in 0..64u64 {
                    let n = start + wi as u64 * 64 + b;
                    if n > t {
                        break;
                    }
                    let fast = coeffs
                        .as_ref()
                        .and_then(|c| fast_member(c, n, fixed_eps.at(&spec.schedule, n)));
                    let member = match fast {
                        Some(m) => m,
                        None => contains(spec, n)?,
                    };
                    if member {
                        *word |= 1 << b;
                    }
                }
            }
            Ok(())
        })
        .collect();
    for r in results {
        r?;
    }
    Ok(bits)
}

/// |A ∩ {1, ..., T}| / T.
pub fn density(spec: &RecurrenceSetSpec, t: u64) -> Result<BigRational> {
    if t == 0 {
        return Err(Error::Precondition("T must be >= 1".into()));
    }
    let b = enumerate(spec, t)?;
    let count = b.count_ones() - usize::from(b.get(0));
    Ok(BigRational::new(count.into(), BigInt::from(t)))
}

/// Members as a one-column CSV.
pub fn members_csv(members: &Bitset) -> String {
    let mut s = String::from("n\n");
    for n in members.iter_ones() {
        s.push_str(&n.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tenth() -> BigRational {
        BigRational::new(1.into(), 10.into())
    }

    #[test]
    fn small_members_of_sqrt2_squares() {
        let spec = RecurrenceSetSpec::monomial(RealDescriptor::sqrt(2), 2, tenth()).unwrap();
        assert!(contains(&spec, 0).unwrap());
        assert!(!contains(&spec, 1).unwrap());
        assert!(!contains(&spec, 2).unwrap());
    }

    #[test]
    fn fast_path_agrees_with_exact() {
        let spec = RecurrenceSetSpec::monomial(RealDescriptor::sqrt(2), 2, tenth()).unwrap();
        let b = enumerate(&spec, 3000).unwrap();
        for n in 0..=3000u64 {
            assert_eq!(b.get(n as usize), contains(&spec, n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn schedule_text_roundtrip() {
        for s in ["const:1/10", "invlog:1/2,1/100", "invpow:1/100", "table:0=1/2,10=1/5"] {
            let e: EpsilonSchedule = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert!("const:0.6".parse::<EpsilonSchedule>().is_err());
    }
}
