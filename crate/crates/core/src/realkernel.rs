//! Real numbers that can be compared exactly (rationals, quadratic surds) or
//! refined on demand (continued-fraction streams, decimal literals, nested
//! interval limits), plus decidable threshold tests for `||m x||`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::higherdeg::GammaReal;
pub use crate::quad::QuadSurd;
use crate::quad::{rat_to_f64, squarefree_split};

/// Refinement stops here for sources that never run dry.
pub const MAX_REFINE_BITS: u64 = 1 << 15;

/// Digit supply for a continued-fraction stream; `digit(i)` is a_i for i >= 1.
pub trait DigitSource: Send + Sync + fmt::Debug {
    fn digit(&self, i: usize) -> Result<BigInt>;
    /// Last available index, if the supply is finite.
    fn horizon(&self) -> Option<usize>;
    /// Text form, including the `cf:` prefix.
    fn describe(&self, a0: &BigInt) -> String;
}

/// A known digit prefix whose continuation is unknown.
#[derive(Debug, Clone)]
pub struct PrefixDigits(pub Vec<BigInt>);

impl DigitSource for PrefixDigits {
    fn digit(&self, i: usize) -> Result<BigInt> {
        self.0.get(i.wrapping_sub(1)).cloned().ok_or(Error::PrecisionExhausted {
            requested: i as u64,
            available: self.0.len() as u64,
        })
    }
    fn horizon(&self) -> Option<usize> {
        Some(self.0.len())
    }
    fn describe(&self, a0: &BigInt) -> String {
        let body: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        format!("cf:[{};{},...]", a0, body.join(","))
    }
}

/// Digits of e = [2; 1,2,1, 1,4,1, 1,6,1, ...].
#[derive(Debug, Clone, Copy)]
pub struct EulerDigits;

impl DigitSource for EulerDigits {
    fn digit(&self, i: usize) -> Result<BigInt> {
        Ok(if i % 3 == 2 { BigInt::from(2 * (i + 1) / 3) } else { BigInt::one() })
    }
    fn horizon(&self) -> Option<usize> {
        None
    }
    fn describe(&self, _a0: &BigInt) -> String {
        "cf:@e".to_string()
    }
}

#[derive(Debug, Default)]
struct ConvCache {
    digits: Vec<BigInt>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

/// Continued-fraction stream [a0; a1, a2, ...] with a memoised convergent table.
#[derive(Clone)]
pub struct CfStream {
    a0: BigInt,
    source: Arc<dyn DigitSource>,
    cache: Arc<Mutex<ConvCache>>,
}

impl fmt::Debug for CfStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CfStream({})", self.source.describe(&self.a0))
    }
}

impl CfStream {
    pub fn new(a0: BigInt, source: Arc<dyn DigitSource>) -> Self {
        let cache = ConvCache {
            digits: vec![a0.clone()],
            p: vec![a0.clone()],
            q: vec![BigInt::one()],
        };
        CfStream { a0, source, cache: Arc::new(Mutex::new(cache)) }
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    pub fn horizon(&self) -> Option<usize> {
        self.source.horizon()
    }

    pub fn source(&self) -> &Arc<dyn DigitSource> {
        &self.source
    }

    fn extend_to(&self, cache: &mut ConvCache, n: usize) -> Result<()> {
        while cache.digits.len() <= n {
            let i = cache.digits.len();
            let a = self.source.digit(i)?;
            if !a.is_positive() {
                return Err(Error::Precondition(format!("digit a_{i} = {a} is not positive")));
            }
            let (pm2, qm2) = if i >= 2 {
                (cache.p[i - 2].clone(), cache.q[i - 2].clone())
            } else {
                (BigInt::one(), BigInt::zero())
            };
            let p = &a * &cache.p[i - 1] + pm2;
            let q = &a * &cache.q[i - 1] + qm2;
            cache.digits.push(a);
            cache.p.push(p);
            cache.q.push(q);
        }
        Ok(())
    }

    /// a_i (a_0 for i = 0).
    pub fn digit(&self, i: usize) -> Result<BigInt> {
        let mut c = self.cache.lock().unwrap();
        self.extend_to(&mut c, i)?;
        Ok(c.digits[i].clone())
    }

    /// (p_n, q_n).
    pub fn convergent(&self, n: usize) -> Result<(BigInt, BigInt)> {
        let mut c = self.cache.lock().unwrap();
        self.extend_to(&mut c, n)?;
        Ok((c.p[n].clone(), c.q[n].clone()))
    }

    /// Convergent sandwich: x lies between p_n/q_n and p_{n+1}/q_{n+1}, and
    /// the gap is 1/(q_n q_{n+1}).
    pub fn enclose(&self, bits: u64) -> Result<(BigRational, BigRational)> {
        let target = BigInt::one() << bits;
        let mut c = self.cache.lock().unwrap();
        let mut n = 0usize;
        loop {
            if let Err(e) = self.extend_to(&mut c, n + 1) {
                if let Error::PrecisionExhausted { .. } = e {
                    let last = c.q.len() - 1;
                    let avail = if last >= 1 { (&c.q[last] * &c.q[last - 1]).bits() } else { 0 };
                    return Err(Error::PrecisionExhausted { requested: bits, available: avail });
                }
                return Err(e);
            }
            if &c.q[n] * &c.q[n + 1] >= target {
                let a = BigRational::new(c.p[n].clone(), c.q[n].clone());
                let b = BigRational::new(c.p[n + 1].clone(), c.q[n + 1].clone());
                return Ok(if a <= b { (a, b) } else { (b, a) });
            }
            n += 1;
        }
    }
}

/// Decimal text with a user-asserted accuracy: the literal denotes some x with
/// |x - value| <= 2^-(bits+2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecimalLiteral {
    pub digits: String,
    pub bits: u64,
    pub value: BigRational,
}

impl DecimalLiteral {
    pub fn new(digits: &str, bits: u64) -> Result<Self> {
        let value = parse_decimal(digits)?;
        if bits == 0 {
            return Err(Error::Parse("decimal literal needs bits >= 1".into()));
        }
        Ok(DecimalLiteral { digits: digits.to_string(), bits, value })
    }

    pub fn radius(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << (self.bits + 2))
    }

    pub fn enclose(&self, bits: u64) -> Result<(BigRational, BigRational)> {
        if bits > self.bits {
            return Err(Error::PrecisionExhausted { requested: bits, available: self.bits });
        }
        let r = self.radius();
        Ok((&self.value - &r, &self.value + &r))
    }
}

pub(crate) fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(Error::Parse(format!("bad decimal {s:?}")));
    }
    let all: String = format!("{ip}{fp}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad decimal {s:?}")));
    }
    let n = BigInt::from_str(if all.is_empty() { "0" } else { &all })
        .map_err(|e| Error::Parse(e.to_string()))?;
    let den = num::pow(BigInt::from(10u32), fp.len());
    let r = BigRational::new(n, den);
    Ok(if neg { -r } else { r })
}

/// A real number: exact, or refinable to any requested width.
#[derive(Clone, Debug)]
pub enum RealDescriptor {
    Rational(BigRational),
    QuadraticSurd(QuadSurd),
    CfStream(CfStream),
    DecimalLiteral(DecimalLiteral),
    NestedIntervals(GammaReal),
}

impl RealDescriptor {
    pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        RealDescriptor::Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        RealDescriptor::Rational(BigRational::from_integer(n.into()))
    }

    /// (a + b sqrt(d)) / c, with square factors of d pulled into b.
    pub fn surd(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let (a, b, c, d) = (a.into(), b.into(), c.into(), d.into());
        if c.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        if b.is_zero() {
            return Ok(RealDescriptor::Rational(BigRational::new(a, c)));
        }
        let (s, r) = squarefree_split(&d)
            .ok_or_else(|| Error::Parse(format!("cannot take sqrt of {d}")))?;
        if r.is_one() {
            return Ok(RealDescriptor::Rational(BigRational::new(a + b * s, c)));
        }
        Ok(RealDescriptor::QuadraticSurd(QuadSurd::new(a, b * s, c, r)))
    }

    pub fn sqrt(d: u64) -> Self {
        RealDescriptor::surd(0, 1, 1, d).expect("positive radicand")
    }

    pub fn golden_ratio() -> Self {
        RealDescriptor::surd(1, 1, 2, 5).unwrap()
    }

    pub fn from_quad(q: QuadSurd) -> Self {
        match q.as_rational() {
            Some(r) => RealDescriptor::Rational(r),
            None => RealDescriptor::QuadraticSurd(q),
        }
    }

    pub fn cf_stream(a0: impl Into<BigInt>, source: Arc<dyn DigitSource>) -> Self {
        RealDescriptor::CfStream(CfStream::new(a0.into(), source))
    }

    pub fn decimal(digits: &str, bits: u64) -> Result<Self> {
        Ok(RealDescriptor::DecimalLiteral(DecimalLiteral::new(digits, bits)?))
    }

    /// Exact value when the descriptor is rational or a quadratic surd.
    pub fn exact(&self) -> Option<QuadSurd> {
        match self {
            RealDescriptor::Rational(r) => Some(QuadSurd::from_rational(r)),
            RealDescriptor::QuadraticSurd(q) => Some(q.clone()),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealDescriptor::Rational(_))
    }

    /// Precision ceiling of the source, if it has one.
    pub fn stated_bits(&self) -> Option<u64> {
        match self {
            RealDescriptor::DecimalLiteral(d) => Some(d.bits),
            _ => None,
        }
    }

    /// Rational lo <= x <= hi with hi - lo <= 2^-bits.
    pub fn enclose(&self, bits: u64) -> Result<(BigRational, BigRational)> {
        match self {
            RealDescriptor::Rational(r) => Ok((r.clone(), r.clone())),
            RealDescriptor::QuadraticSurd(q) => Ok(q.enclose(bits)),
            RealDescriptor::CfStream(s) => s.enclose(bits),
            RealDescriptor::DecimalLiteral(d) => d.enclose(bits),
            RealDescriptor::NestedIntervals(g) => g.enclose(bits),
        }
    }

    /// Like `enclose` but a decimal literal answers with its best enclosure
    /// instead of failing; the flag reports whether that happened.
    fn enclose_clamped(&self, bits: u64) -> Result<(BigRational, BigRational, bool)> {
        match self {
            RealDescriptor::DecimalLiteral(d) if bits > d.bits => {
                let (lo, hi) = d.enclose(d.bits)?;
                Ok((lo, hi, true))
            }
            _ => self.enclose(bits).map(|(lo, hi)| (lo, hi, false)),
        }
    }

    pub fn approx_f64(&self) -> f64 {
        match self.enclose(60) {
            Ok((lo, hi)) => rat_to_f64(&((lo + hi) / BigInt::from(2))),
            Err(_) => match self {
                RealDescriptor::DecimalLiteral(d) => rat_to_f64(&d.value),
                _ => f64::NAN,
            },
        }
    }
}

impl fmt::Display for RealDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealDescriptor::Rational(r) => write!(f, "rat:{}/{}", r.numer(), r.denom()),
            RealDescriptor::QuadraticSurd(q) => write!(f, "surd:{q}"),
            RealDescriptor::CfStream(s) => write!(f, "{}", s.source.describe(&s.a0)),
            RealDescriptor::DecimalLiteral(d) => write!(f, "dec:{}~bits={}", d.digits, d.bits),
            RealDescriptor::NestedIntervals(g) => write!(f, "{g}"),
        }
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    BigInt::from_str(t).map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

fn parse_surd(body: &str) -> Result<RealDescriptor> {
    let s: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    let (numer, den) = match s.rsplit_once(")/") {
        Some((n, d)) => (n.trim_start_matches('('), parse_int(d)?),
        None => (s.trim_start_matches('(').trim_end_matches(')'), BigInt::one()),
    };
    let sq = numer
        .find("sqrt(")
        .ok_or_else(|| Error::Parse(format!("surd without sqrt: {body:?}")))?;
    let d_str = numer[sq + 5..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Parse(format!("bad surd {body:?}")))?;
    let d = parse_int(d_str)?;
    let head = numer[..sq].trim_end_matches('*');
    // head looks like "a+b", "a-b", "a+-b", "b" or "-b"
    let split = head
        .char_indices()
        .skip(1)
        .filter(|&(i, c)| (c == '+' || c == '-') && !matches!(head.as_bytes()[i - 1], b'+' | b'-'))
        .map(|(i, _)| i)
        .last();
    let (a, b) = match split {
        Some(i) => {
            let a = parse_int(&head[..i])?;
            let rest = &head[i..];
            let bs = rest.strip_prefix('+').unwrap_or(rest);
            let b = if bs == "-" || bs.is_empty() {
                if bs == "-" { -BigInt::one() } else { BigInt::one() }
            } else {
                parse_int(bs)?
            };
            (a, b)
        }
        None => {
            let b = match head {
                "" | "+" => BigInt::one(),
                "-" => -BigInt::one(),
                h => parse_int(h)?,
            };
            (BigInt::zero(), b)
        }
    };
    if d < BigInt::from(2) {
        return Err(Error::Parse(format!("radicand must be >= 2 in {body:?}")));
    }
    RealDescriptor::surd(a, b, den, d)
}

/// Value of [b0; b1, ..., bn, t] as a Mobius image of t.
fn mobius(block: &[BigInt], t: QuadSurd) -> QuadSurd {
    let (mut p0, mut p1) = (BigInt::one(), block[0].clone());
    let (mut q0, mut q1) = (BigInt::zero(), BigInt::one());
    for a in &block[1..] {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    let num = t.clone().scale(&p1) + QuadSurd::from_int(p0);
    let den = t.scale(&q1) + QuadSurd::from_int(q0);
    num.div(&den)
}

/// Exact value of [a0; pre, (period)*].
pub fn periodic_cf_value(a0: &BigInt, pre: &[BigInt], period: &[BigInt]) -> Result<QuadSurd> {
    if period.is_empty() || period.iter().any(|d| !d.is_positive()) || pre.iter().any(|d| !d.is_positive()) {
        return Err(Error::Parse("periodic digits must be positive".into()));
    }
    // y = [period; y]  =>  Q y^2 + (Q' - P) y - P' = 0
    let (mut p0, mut p1) = (BigInt::one(), period[0].clone());
    let (mut q0, mut q1) = (BigInt::zero(), BigInt::one());
    for a in &period[1..] {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    let bq = &q0 - &p1;
    let disc = &bq * &bq + BigInt::from(4) * &q1 * &p0;
    let (s, r) = squarefree_split(&disc).ok_or_else(|| Error::Parse("discriminant too large".into()))?;
    let y = QuadSurd::new(-bq, s, BigInt::from(2) * &q1, r);
    let mut block = vec![a0.clone()];
    block.extend(pre.iter().cloned());
    // x = [a0; pre, y]: treat y as the tail after the block
    let x = if block.len() == 1 {
        QuadSurd::from_int(a0.clone()) + y.recip()
    } else {
        mobius(&block, y)
    };
    Ok(x)
}

fn parse_digit_list(s: &str) -> Result<Vec<BigInt>> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(parse_int).collect()
}

fn parse_cf(body: &str) -> Result<RealDescriptor> {
    let s: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(name) = s.strip_prefix('@') {
        let (name, params) = name.split_once(':').unwrap_or((name, ""));
        return match name {
            "e" => Ok(RealDescriptor::cf_stream(2, Arc::new(EulerDigits))),
            "exceptional" => {
                let plan = crate::exceptional::ExceptionalAlphaPlan::from_params(params)?;
                crate::exceptional::exceptional_stream(plan)
            }
            _ => Err(Error::Parse(format!("unknown generator {name:?}"))),
        };
    }
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("bad cf {body:?}")))?;
    let (a0s, rest) = inner.split_once(';').unwrap_or((inner, ""));
    let a0 = parse_int(a0s)?;
    if let Some((pre, per)) = rest.split_once('|') {
        let q = periodic_cf_value(&a0, &parse_digit_list(pre)?, &parse_digit_list(per)?)?;
        return Ok(RealDescriptor::from_quad(q));
    }
    if let Some(prefix) = rest.strip_suffix(",...").or_else(|| rest.strip_suffix("...")) {
        let digits = parse_digit_list(prefix)?;
        if digits.iter().any(|d| !d.is_positive()) {
            return Err(Error::Parse("cf digits must be positive".into()));
        }
        return Ok(RealDescriptor::cf_stream(a0, Arc::new(PrefixDigits(digits))));
    }
    let digits = parse_digit_list(rest)?;
    if digits.iter().any(|d| !d.is_positive()) {
        return Err(Error::Parse("cf digits must be positive".into()));
    }
    let mut v = BigRational::from_integer(BigInt::zero());
    let mut started = false;
    for d in digits.iter().rev() {
        v = if started { BigRational::from_integer(d.clone()) + v.recip() } else { BigRational::from_integer(d.clone()) };
        started = true;
    }
    let x = if started { BigRational::from_integer(a0) + v.recip() } else { BigRational::from_integer(a0) };
    Ok(RealDescriptor::Rational(x))
}

impl FromStr for RealDescriptor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing type tag in {s:?}")))?;
        match tag {
            "rat" => {
                let (n, d) = body.split_once('/').unwrap_or((body, "1"));
                let (n, d) = (parse_int(n)?, parse_int(d)?);
                if d.is_zero() {
                    return Err(Error::Parse("zero denominator".into()));
                }
                Ok(RealDescriptor::Rational(BigRational::new(n, d)))
            }
            "surd" => parse_surd(body),
            "cf" => parse_cf(body),
            "dec" => {
                let (digits, bits) = body
                    .split_once("~bits=")
                    .ok_or_else(|| Error::Parse(format!("decimal needs ~bits=: {s:?}")))?;
                let bits: u64 = bits.parse().map_err(|_| Error::Parse(format!("bad bits in {s:?}")))?;
                RealDescriptor::decimal(digits, bits)
            }
            "gamma" => Ok(RealDescriptor::NestedIntervals(GammaReal::parse(body)?)),
            _ => Err(Error::Parse(format!("unknown type tag {tag:?}"))),
        }
    }
}

impl Serialize for RealDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RealDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Closed dyadic interval [lo / 2^exp, hi / 2^exp].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalValue {
    pub lo: BigInt,
    pub hi: BigInt,
    pub exp: u64,
}

impl IntervalValue {
    /// Smallest interval on the 2^-exp grid containing [lo, hi].
    pub fn outward(lo: &BigRational, hi: &BigRational, exp: u64) -> Self {
        let s = BigInt::one() << exp;
        let l = (lo * BigRational::from_integer(s.clone())).floor().to_integer();
        let h = (hi * BigRational::from_integer(s)).ceil().to_integer();
        IntervalValue { lo: l, hi: h, exp }
    }

    pub fn lo_rat(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.exp)
    }

    pub fn hi_rat(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.exp)
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(&self.hi - &self.lo, BigInt::one() << self.exp)
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lo_rat() <= r && r <= &self.hi_rat()
    }

    pub fn contains_quad(&self, q: &QuadSurd) -> bool {
        q.cmp_rational(&self.lo_rat()) != Ordering::Less && q.cmp_rational(&self.hi_rat()) != Ordering::Greater
    }

    pub fn is_within(&self, outer: &IntervalValue) -> bool {
        outer.lo_rat() <= self.lo_rat() && self.hi_rat() <= outer.hi_rat()
    }

    pub fn mid_f64(&self) -> f64 {
        rat_to_f64(&((self.lo_rat() + self.hi_rat()) / BigInt::from(2)))
    }
}

impl fmt::Display for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]*2^-{}", self.lo, self.hi, self.exp)
    }
}

fn floor_scaled(r: &BigRational, bits: u64) -> BigInt {
    (r.numer() << bits).div_floor(r.denom())
}

/// Canonical dyadic enclosure [f, f+1] * 2^-bits with f = floor(x 2^bits);
/// the canonical choice makes successive precisions nest.
pub fn to_interval(x: &RealDescriptor, bits: u64) -> Result<IntervalValue> {
    if bits == 0 {
        return Err(Error::Precondition("precision_bits must be >= 1".into()));
    }
    let unit = |f: BigInt| IntervalValue { hi: &f + 1, lo: f, exp: bits };
    match x {
        RealDescriptor::Rational(r) => Ok(unit(floor_scaled(r, bits))),
        RealDescriptor::QuadraticSurd(q) => Ok(unit(q.floor_scaled(bits))),
        RealDescriptor::DecimalLiteral(d) => {
            if bits > d.bits {
                return Err(Error::PrecisionExhausted { requested: bits, available: d.bits });
            }
            let (lo, hi) = d.enclose(d.bits)?;
            Ok(IntervalValue::outward(&lo, &hi, d.bits + 2))
        }
        _ => {
            let mut extra = 8u64;
            while bits + extra <= MAX_REFINE_BITS + bits {
                let (lo, hi) = x.enclose(bits + extra)?;
                let fl = floor_scaled(&lo, bits);
                if fl == floor_scaled(&hi, bits) {
                    return Ok(unit(fl));
                }
                extra *= 2;
            }
            Err(Error::Undecidable { max_precision: bits + MAX_REFINE_BITS })
        }
    }
}

/// Distance to the nearest integer of a rational.
pub fn frac_dist_rat(r: &BigRational) -> BigRational {
    let f = r - r.floor();
    let g = BigRational::one() - &f;
    if f <= g { f } else { g }
}

/// Bounds on ||t|| for t ranging over [lo, hi].
pub fn frac_dist_bounds(lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if hi - lo >= BigRational::one() {
        return (BigRational::zero(), half);
    }
    let f = lo.floor();
    let l = lo - &f;
    let h = hi - &f;
    let contains_int = l.is_zero() || h >= BigRational::one();
    let contains_half = (l <= half && h >= half) || h >= BigRational::new(BigInt::from(3), BigInt::from(2));
    let (dl, dh) = (frac_dist_rat(&l), frac_dist_rat(&h));
    let min = if contains_int { BigRational::zero() } else { dl.clone().min(dh.clone()) };
    let max = if contains_half { half } else { dl.max(dh) };
    (min, max)
}

/// ||m x||: exact for rationals and surds, an enclosure otherwise.
#[derive(Clone, Debug)]
pub enum FracDistance {
    Exact { value: QuadSurd, nearest: BigInt },
    Interval(IntervalValue),
}

impl FracDistance {
    pub fn to_f64(&self) -> f64 {
        match self {
            FracDistance::Exact { value, .. } => value.to_f64(),
            FracDistance::Interval(iv) => iv.mid_f64(),
        }
    }

    pub fn upper(&self) -> BigRational {
        match self {
            FracDistance::Exact { value, .. } => value.enclose(80).1,
            FracDistance::Interval(iv) => iv.hi_rat(),
        }
    }

    pub fn lower(&self) -> BigRational {
        match self {
            FracDistance::Exact { value, .. } => value.enclose(80).0,
            FracDistance::Interval(iv) => iv.lo_rat(),
        }
    }
}

/// Integer combination sum m_j x_j, the shape every membership test reduces to.
pub type Form<'a> = [(BigInt, &'a RealDescriptor)];

/// Exact value of the form when every term lives in one quadratic field.
pub fn form_exact(terms: &Form) -> Option<QuadSurd> {
    let mut acc = QuadSurd::zero();
    for (m, x) in terms {
        if m.is_zero() {
            continue;
        }
        let v = x.exact()?.scale(m);
        if !acc.same_field(&v) {
            return None;
        }
        acc = acc + v;
    }
    Some(acc)
}

fn form_enclose(terms: &Form, bits: u64) -> Result<(BigRational, BigRational, bool)> {
    let slack = 2 + (terms.len() as u64).max(1).ilog2() as u64;
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    let mut saturated = false;
    for (m, x) in terms {
        if m.is_zero() {
            continue;
        }
        let (l, h, sat) = x.enclose_clamped(bits + m.bits() + slack)?;
        saturated |= sat;
        let mr = BigRational::from_integer(m.clone());
        let (a, b) = (l * &mr, h * &mr);
        if m.is_negative() {
            lo += b;
            hi += a;
        } else {
            lo += a;
            hi += b;
        }
    }
    Ok((lo, hi, saturated))
}

fn precision_ceiling(terms: &Form) -> u64 {
    terms
        .iter()
        .filter_map(|(_, x)| x.stated_bits())
        .min()
        .unwrap_or(MAX_REFINE_BITS)
}

/// Rational enclosure of the form of width <= 2^-bits.
pub fn form_interval(terms: &Form, bits: u64) -> Result<(BigRational, BigRational)> {
    let (lo, hi, sat) = form_enclose(terms, bits)?;
    if sat {
        return Err(Error::PrecisionExhausted { requested: bits, available: precision_ceiling(terms) });
    }
    Ok((lo, hi))
}

pub fn form_frac_distance(terms: &Form) -> Result<FracDistance> {
    if let Some(y) = form_exact(terms) {
        let nearest = y.round();
        let value = (y - QuadSurd::from_int(nearest.clone())).abs();
        return Ok(FracDistance::Exact { value, nearest });
    }
    let bits = 64;
    let (lo, hi, _) = form_enclose(terms, bits)?;
    let (dl, dh) = frac_dist_bounds(&lo, &hi);
    Ok(FracDistance::Interval(IntervalValue::outward(&dl, &dh, bits + 2)))
}

pub fn fractional_distance(x: &RealDescriptor, m: &BigInt) -> Result<FracDistance> {
    form_frac_distance(&[(m.clone(), x)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Threshold {
    Below,
    Equal,
    Above,
}

impl Threshold {
    fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Threshold::Below,
            Ordering::Equal => Threshold::Equal,
            Ordering::Greater => Threshold::Above,
        }
    }

    /// Closed membership test `||.|| <= theta`.
    pub fn within(self) -> bool {
        self != Threshold::Above
    }
}

fn check_theta(theta: &BigRational) -> Result<()> {
    if theta.is_negative() || theta > &BigRational::new(BigInt::one(), BigInt::from(2)) {
        return Err(Error::Precondition(format!("theta {theta} outside [0, 1/2]")));
    }
    Ok(())
}

/// Decide ||sum m_j x_j|| against theta.
pub fn form_cmp_threshold(terms: &Form, theta: &BigRational) -> Result<Threshold> {
    check_theta(theta)?;
    if let Some(y) = form_exact(terms) {
        let nearest = y.round();
        let dist = (y - QuadSurd::from_int(nearest)).abs();
        return Ok(Threshold::from_ordering(dist.cmp_rational(theta)));
    }
    let mut bits = 64u64;
    loop {
        let (lo, hi, saturated) = form_enclose(terms, bits)?;
        let (dl, dh) = frac_dist_bounds(&lo, &hi);
        if &dh < theta {
            return Ok(Threshold::Below);
        }
        if &dl > theta {
            return Ok(Threshold::Above);
        }
        if dl == dh {
            return Ok(Threshold::Equal);
        }
        if saturated {
            return Err(Error::Undecidable { max_precision: precision_ceiling(terms) });
        }
        if bits >= MAX_REFINE_BITS {
            return Err(Error::Undecidable { max_precision: bits });
        }
        bits *= 2;
    }
}

pub fn cmp_threshold(x: &RealDescriptor, m: &BigInt, theta: &BigRational) -> Result<Threshold> {
    form_cmp_threshold(&[(m.clone(), x)], theta)
}

/// Sign of sum m_j x_j, refined until decided.
pub fn form_sign(terms: &Form) -> Result<Ordering> {
    if let Some(y) = form_exact(terms) {
        return Ok(y.signum());
    }
    let mut bits = 64u64;
    loop {
        let (lo, hi, saturated) = form_enclose(terms, bits)?;
        if lo.is_positive() {
            return Ok(Ordering::Greater);
        }
        if hi.is_negative() {
            return Ok(Ordering::Less);
        }
        if lo.is_zero() && hi.is_zero() {
            return Ok(Ordering::Equal);
        }
        if saturated {
            return Err(Error::Undecidable { max_precision: precision_ceiling(terms) });
        }
        if bits >= MAX_REFINE_BITS {
            return Err(Error::Undecidable { max_precision: bits });
        }
        bits *= 2;
    }
}

/// floor(sum m_j x_j), refined until decided.
pub fn form_floor(terms: &Form) -> Result<BigInt> {
    if let Some(y) = form_exact(terms) {
        return Ok(y.floor());
    }
    let mut bits = 64u64;
    loop {
        let (lo, hi, saturated) = form_enclose(terms, bits)?;
        let (fl, fh) = (lo.floor().to_integer(), hi.floor().to_integer());
        if fl == fh {
            return Ok(fl);
        }
        if saturated {
            return Err(Error::Undecidable { max_precision: precision_ceiling(terms) });
        }
        if bits >= MAX_REFINE_BITS {
            return Err(Error::Undecidable { max_precision: bits });
        }
        bits *= 2;
    }
}

/// Nearest integer to sum m_j x_j (ties up).
pub fn form_round(terms: &Form, half: &RealDescriptor) -> Result<BigInt> {
    let mut t: Vec<(BigInt, &RealDescriptor)> = terms.to_vec();
    t.push((BigInt::one(), half));
    form_floor(&t)
}


/// Decimal rendering with `places` fractional digits, rounded down or up.
pub fn fmt_decimal(r: &BigRational, places: usize, round_up: bool) -> String {
    let scale = num::pow(BigInt::from(10u32), places);
    let scaled = r * BigRational::from_integer(scale);
    let v = if round_up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let neg = v.is_negative();
    let digits = v.abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (ip, fp) = digits.split_at(digits.len() - places);
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parse_roundtrip() {
        for s in [
            "rat:7/3",
            "surd:(0+1*sqrt(2))/1",
            "surd:(1+1*sqrt(5))/2",
            "surd:(3-2*sqrt(7))/5",
            "dec:3.14159~bits=16",
        ] {
            let x: RealDescriptor = s.parse().unwrap();
            assert_eq!(x.to_string(), s);
        }
        let x: RealDescriptor = "surd:(1+-1*sqrt(8))/1".parse().unwrap();
        assert_eq!(x.to_string(), "surd:(1-2*sqrt(2))/1");
    }

    #[test]
    fn periodic_cf_is_surd() {
        let x: RealDescriptor = "cf:[1;|2]".parse().unwrap();
        assert_eq!(x.to_string(), "surd:(0+1*sqrt(2))/1");
        let g: RealDescriptor = "cf:[1;|1]".parse().unwrap();
        assert_eq!(g.to_string(), "surd:(1+1*sqrt(5))/2");
    }

    #[test]
    fn finite_cf_is_rational() {
        let x: RealDescriptor = "cf:[2;3]".parse().unwrap();
        assert_eq!(x.to_string(), "rat:7/3");
    }

    #[test]
    fn frac_bounds_cover_half() {
        let (lo, hi) = frac_dist_bounds(&r(2, 5), &r(3, 5));
        assert_eq!(lo, r(2, 5));
        assert_eq!(hi, r(1, 2));
        let (lo, hi) = frac_dist_bounds(&r(9, 10), &r(11, 10));
        assert_eq!(lo, r(0, 1));
        assert_eq!(hi, r(1, 10));
    }

    #[test]
    fn decimal_precision_is_enforced() {
        let x = RealDescriptor::decimal("0.3", 4).unwrap();
        assert!(matches!(to_interval(&x, 5), Err(Error::PrecisionExhausted { .. })));
        // ||x|| near 0.3 vs 0.3 cannot be decided from a 4-bit literal
        let e = cmp_threshold(&x, &BigInt::one(), &r(3, 10)).unwrap_err();
        assert!(matches!(e, Error::Undecidable { .. }));
    }
}
