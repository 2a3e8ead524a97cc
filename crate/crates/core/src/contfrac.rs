//! Continued-fraction expansions, convergents, error terms and the
//! approximation predicates built on them.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::realkernel::{
    fmt_decimal, form_interval, form_sign, IntervalValue, QuadSurd, RealDescriptor,
};

/// Indices are 1-based digit positions: digits[start - 1 ..][..len] repeat forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Period {
    pub start: usize,
    pub len: usize,
}

/// [a0; a1, a2, ...] of `scale * source`.
#[derive(Clone, Debug)]
pub struct CfExpansion {
    pub a0: BigInt,
    /// a_1, a_2, ...
    pub digits: Vec<BigInt>,
    pub source: RealDescriptor,
    pub scale: BigInt,
    /// The expansion ended (rational input) after `digits.len()` digits.
    pub terminated: bool,
    pub period: Option<Period>,
}

impl CfExpansion {
    /// a_i, with a_0 at index 0.
    pub fn digit(&self, i: usize) -> Option<&BigInt> {
        if i == 0 {
            Some(&self.a0)
        } else {
            self.digits.get(i - 1)
        }
    }

    /// Number of digits including a_0.
    pub fn len(&self) -> usize {
        self.digits.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fails with `RationalTerminated` unless `count` digits are present.
    pub fn require(&self, count: usize) -> Result<()> {
        if self.len() < count {
            if self.terminated {
                return Err(Error::RationalTerminated { len: self.len() });
            }
            return Err(Error::PrecisionExhausted { requested: count as u64, available: self.len() as u64 });
        }
        Ok(())
    }

    /// Longer expansion of the same number.
    pub fn extend(&self, count: usize) -> Result<CfExpansion> {
        expand_scaled(&self.source, &self.scale, count)
    }

    pub fn all_digits(&self) -> Vec<BigInt> {
        let mut v = vec![self.a0.clone()];
        v.extend(self.digits.iter().cloned());
        v
    }
}

impl std::fmt::Display for CfExpansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let body: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        write!(f, "[{};{}]", self.a0, body.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub n: i64,
    #[serde(with = "crate::bitset::bigint_str")]
    pub p: BigInt,
    #[serde(with = "crate::bitset::bigint_str")]
    pub q: BigInt,
}

/// q^2 (x - p/q) for convergent n: exact for surds and rationals.
#[derive(Clone, Debug)]
pub enum DeltaValue {
    Exact(QuadSurd),
    Interval(IntervalValue),
}

impl DeltaValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            DeltaValue::Exact(q) => q.to_f64(),
            DeltaValue::Interval(iv) => iv.mid_f64(),
        }
    }

    pub fn bounds(&self) -> (BigRational, BigRational) {
        match self {
            DeltaValue::Exact(q) => q.enclose(96),
            DeltaValue::Interval(iv) => (iv.lo_rat(), iv.hi_rat()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ErrorTerm {
    pub n: usize,
    pub p: BigInt,
    pub q: BigInt,
    pub delta: DeltaValue,
}

/// Value of the finite continued fraction [b0; b1, ..., bk].
pub(crate) fn finite_cf_value(digits: &[BigInt]) -> BigRational {
    let mut it = digits.iter().rev();
    let mut v = match it.next() {
        Some(d) => BigRational::from_integer(d.clone()),
        None => return BigRational::zero(),
    };
    for d in it {
        v = BigRational::from_integer(d.clone()) + v.recip();
    }
    v
}

fn rational_digits(r: &BigRational, count: usize) -> (Vec<BigInt>, bool) {
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    let mut out = Vec::new();
    while out.len() < count {
        let (q, rem) = n.div_mod_floor(&d);
        out.push(q);
        if rem.is_zero() {
            return (out, true);
        }
        n = d;
        d = rem;
    }
    (out, false)
}

/// Digits of an irrational surd via the (P + sqrt D)/Q state recurrence,
/// stopping after `count` digits or at the first repeated state when
/// `until_period` is set.
fn surd_digits(x: &QuadSurd, count: usize, until_period: bool) -> (Vec<BigInt>, Option<Period>) {
    let c2 = &x.c * &x.c;
    let dd = &x.b * &x.b * &c2 * &x.d;
    let (mut p, mut q) = if x.b.is_positive() { (&x.a * &x.c, c2) } else { (-(&x.a * &x.c), -c2) };
    let s = dd.sqrt();
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut out = Vec::new();
    let mut period = None;
    loop {
        let k = out.len();
        if period.is_none() && k >= 1 {
            if let Some(&first) = seen.get(&(p.clone(), q.clone())) {
                period = Some(Period { start: first, len: k - first });
                if until_period {
                    break;
                }
            } else {
                seen.insert((p.clone(), q.clone()), k);
            }
        }
        if out.len() >= count {
            break;
        }
        let a = if q.is_positive() {
            (&p + &s).div_floor(&q)
        } else {
            (-&p - &s - BigInt::one()).div_floor(&(-&q))
        };
        let np = &a * &q - &p;
        let nq = (&dd - &np * &np) / &q;
        out.push(a);
        p = np;
        q = nq;
    }
    (out, period)
}

/// Digits from a rational enclosure [lo, hi] via the Gauss map, stopping when
/// the enclosure no longer pins the next digit.
fn gauss_digits(mut lo: BigRational, mut hi: BigRational, count: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    while out.len() < count {
        let a = lo.floor().to_integer();
        let a_r = BigRational::from_integer(a.clone());
        if hi.floor().to_integer() != a || lo == a_r {
            break;
        }
        out.push(a);
        let (l, h) = (&lo - &a_r, &hi - &a_r);
        lo = h.recip();
        hi = l.recip();
    }
    out
}

/// First `count` digits (a_0 included) of x.
pub fn expand(x: &RealDescriptor, count: usize) -> Result<CfExpansion> {
    expand_scaled(x, &BigInt::one(), count)
}

/// First `count` digits (a_0 included) of scale * x.
pub fn expand_scaled(x: &RealDescriptor, scale: &BigInt, count: usize) -> Result<CfExpansion> {
    if count == 0 {
        return Err(Error::Precondition("count must be >= 1".into()));
    }
    let build = |mut all: Vec<BigInt>, terminated: bool, period: Option<Period>| {
        let a0 = all.remove(0);
        CfExpansion { a0, digits: all, source: x.clone(), scale: scale.clone(), terminated, period }
    };
    if let Some(q) = x.exact() {
        let y = q.scale(scale);
        if let Some(r) = y.as_rational() {
            let (digits, done) = rational_digits(&r, count);
            return Ok(build(digits, done, None));
        }
        let (digits, period) = surd_digits(&y, count, false);
        return Ok(build(digits, false, period));
    }
    if let (RealDescriptor::CfStream(s), true) = (x, scale.is_one()) {
        let mut all = Vec::with_capacity(count);
        for i in 0..count {
            all.push(s.digit(i)?);
        }
        return Ok(build(all, false, None));
    }
    let terms = [(scale.clone(), x)];
    let mut bits = 64u64;
    loop {
        let (lo, hi) = match form_interval(&terms, bits) {
            Ok(v) => v,
            Err(Error::PrecisionExhausted { available, .. }) => {
                let (lo, hi) = form_interval(&terms, available.saturating_sub(scale.bits() + 4).max(1))?;
                let d = gauss_digits(lo, hi, count);
                return Err(Error::PrecisionExhausted {
                    requested: count as u64,
                    available: d.len() as u64,
                });
            }
            Err(e) => return Err(e),
        };
        let digits = gauss_digits(lo, hi, count);
        if digits.len() >= count {
            return Ok(build(digits, false, None));
        }
        if bits >= crate::realkernel::MAX_REFINE_BITS {
            return Err(Error::Undecidable { max_precision: bits });
        }
        bits = (bits * 2).max(8 * count as u64);
    }
}

/// Pre-period and period of a quadratic irrational's expansion.
pub fn surd_period(x: &QuadSurd) -> Result<(Vec<BigInt>, Period)> {
    if x.is_rational() {
        return Err(Error::Precondition("rational input has no period".into()));
    }
    let (digits, period) = surd_digits(x, usize::MAX, true);
    Ok((digits, period.expect("state recurrence is finite")))
}

/// Convergents p_n/q_n for n = 0..=upto.
pub fn convergents(cf: &CfExpansion, upto: usize) -> Result<Vec<Convergent>> {
    cf.require(upto + 1)?;
    let mut out = Vec::with_capacity(upto + 1);
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (cf.a0.clone(), BigInt::one());
    out.push(Convergent { n: 0, p: p1.clone(), q: q1.clone() });
    for (i, a) in cf.digits.iter().take(upto).enumerate() {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        out.push(Convergent { n: i as i64 + 1, p: p1.clone(), q: q1.clone() });
    }
    Ok(out)
}

/// delta_n = q_n^2 (x - p_n/q_n).
pub fn error_term(x: &RealDescriptor, n: usize) -> Result<ErrorTerm> {
    let cf = expand(x, n + 1)?;
    let conv = convergents(&cf, n)?;
    let Convergent { p, q, .. } = conv[n].clone();
    let delta = match x.exact() {
        Some(v) => {
            let pq = QuadSurd::from_int(&p * &q);
            DeltaValue::Exact(v.scale(&(&q * &q)) - pq)
        }
        None => {
            let one = RealDescriptor::integer(1);
            let terms = [(&q * &q, x), (-(&p * &q), &one)];
            let (lo, hi) = form_interval(&terms, 64)?;
            DeltaValue::Interval(IntervalValue::outward(&lo, &hi, 66))
        }
    };
    Ok(ErrorTerm { n, p, q, delta })
}

/// Estimate of delta_n from the digit window a_{n-l}, ..., a_{n+l}.
///
/// With rho = [a_n; a_{n+1}, ..., a_{n+l}] and lambda = [0; a_{n-1}, ..., a_{n-l}]
/// the estimate is (-1)^n (rho - a_n)(a_n + lambda) / (rho + lambda); the
/// exact delta_n is the same expression with infinite tails.
pub fn delta_estimate(window: &[BigInt], n_odd: bool, l: usize) -> Result<BigRational> {
    if l == 0 || window.len() != 2 * l + 1 {
        return Err(Error::Precondition(format!(
            "window must hold 2l+1 = {} digits, got {}",
            2 * l + 1,
            window.len()
        )));
    }
    let an = BigRational::from_integer(window[l].clone());
    let rho = finite_cf_value(&window[l..]);
    let mut back = vec![BigInt::zero()];
    back.extend(window[..l].iter().rev().cloned());
    let lambda = finite_cf_value(&back);
    let e = (&rho - &an) * (&an + &lambda) / (&rho + &lambda);
    Ok(if n_odd { -e } else { e })
}

/// Sign of |q1 x - p1| - |q2 x - p2|.
fn abs_linear_cmp(x: &RealDescriptor, (p1, q1): (&BigInt, &BigInt), (p2, q2): (&BigInt, &BigInt)) -> Result<Ordering> {
    let one = RealDescriptor::integer(1);
    let s1 = form_sign(&[(q1.clone(), x), (-p1, &one)])?;
    let s2 = form_sign(&[(q2.clone(), x), (-p2, &one)])?;
    let k1 = if s1 == Ordering::Less { -BigInt::one() } else { BigInt::one() };
    let k2 = if s2 == Ordering::Less { -BigInt::one() } else { BigInt::one() };
    form_sign(&[(&k1 * q1 - &k2 * q2, x), (-(&k1 * p1) + &k2 * p2, &one)])
}

/// |x - p/q| < 1 / (2 q^2).
pub fn legendre_check(p: &BigInt, q: &BigInt, x: &RealDescriptor) -> Result<bool> {
    if !q.is_positive() {
        return Err(Error::Precondition("q must be >= 1".into()));
    }
    let one = RealDescriptor::integer(1);
    let m = BigInt::from(2) * q * q;
    let c = BigInt::from(2) * p * q;
    let upper = form_sign(&[(m.clone(), x), (-(&c + BigInt::one()), &one)])?;
    let lower = form_sign(&[(m, x), (-(&c - BigInt::one()), &one)])?;
    Ok(upper == Ordering::Less && lower == Ordering::Greater)
}

/// Best approximation of the second kind: |q x - p| < |q' x - p'| for every
/// other p'/q' with q' <= q.
pub fn is_best_approx(p: &BigInt, q: &BigInt, x: &RealDescriptor) -> Result<bool> {
    if !q.is_positive() || !p.gcd(q).is_one() {
        return Err(Error::Precondition("need q >= 1 and gcd(p, q) = 1".into()));
    }
    if q.is_one() {
        let one = RealDescriptor::integer(1);
        let half = BigInt::from(2);
        // |x - p| < 1/2  <=>  -1 < 2x - 2p < 1
        let hi = form_sign(&[(half.clone(), x), (-(&half * p) - 1, &one)])?;
        let lo = form_sign(&[(half.clone(), x), (-(&half * p) + 1, &one)])?;
        return Ok(hi == Ordering::Less && lo == Ordering::Greater);
    }
    let mut count = 8usize;
    loop {
        let cf = expand(x, count)?;
        let avail = cf.len() - 1;
        let conv = convergents(&cf, avail)?;
        if let Some(i) = conv.iter().position(|c| &c.p == p && &c.q == q) {
            let prev = &conv[i - 1];
            return Ok(abs_linear_cmp(x, (p, q), (&prev.p, &prev.q))? == Ordering::Less);
        }
        if cf.terminated || conv.last().is_some_and(|c| &c.q > q) {
            return Ok(false);
        }
        count *= 2;
    }
}

/// Frequency of `pattern` starting at positions j = 1..=n_windows.
pub fn pattern_density(cf: &CfExpansion, pattern: &[BigInt], n_windows: usize) -> Result<BigRational> {
    if n_windows == 0 || pattern.is_empty() {
        return Err(Error::Precondition("need N >= 1 and a nonempty pattern".into()));
    }
    let need = n_windows + pattern.len() - 1;
    if cf.digits.len() < need {
        return Err(Error::Precondition(format!(
            "pattern density needs {need} digits, expansion has {}",
            cf.digits.len()
        )));
    }
    let hits = (0..n_windows)
        .filter(|&j| cf.digits[j..j + pattern.len()] == *pattern)
        .count();
    Ok(BigRational::new(hits.into(), n_windows.into()))
}

/// CSV rows n, a_n, p_n, q_n, delta_n_lo, delta_n_hi.
pub fn convergent_table_csv(x: &RealDescriptor, upto: usize) -> Result<String> {
    let cf = expand(x, upto + 1)?;
    let upto = upto.min(cf.len() - 1);
    let conv = convergents(&cf, upto)?;
    let mut out = String::from("n,a_n,p_n,q_n,delta_n_lo,delta_n_hi\n");
    for c in conv {
        let n = c.n as usize;
        let e = error_term(x, n)?;
        let (lo, hi) = e.delta.bounds();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            n,
            cf.digit(n).unwrap(),
            c.p,
            c.q,
            fmt_decimal(&lo, 18, false),
            fmt_decimal(&hi, 18, true)
        );
    }
    Ok(out)
}
