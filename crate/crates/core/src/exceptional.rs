//! A continued fraction alpha whose convergent denominators pick up ever
//! higher powers of 2 (on even indices) and of an odd prime p (on odd
//! indices), built digit by digit with the CRT. Such alpha make
//! A = {n : ||n^2 alpha|| <= eps0} a basis of order 2.

use std::fmt;
use std::sync::{Arc, Mutex};

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realkernel::{DigitSource, RealDescriptor};
use crate::recurrence::RecurrenceSetSpec;
use crate::sumset::complement;

/// k_i = floor(i / div) + add.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSchedule {
    pub div: u64,
    pub add: u64,
}

impl LinearSchedule {
    pub fn at(&self, i: usize) -> u64 {
        i as u64 / self.div + self.add
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSchedule {
    pub p: u64,
    #[serde(flatten)]
    pub growth: LinearSchedule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalAlphaPlan {
    /// 2 first, then odd primes.
    pub primes: Vec<PrimeSchedule>,
    /// log2 of the digit cap: h_i = 2^(floor(i / div) + add).
    pub cap: LinearSchedule,
}

impl Default for ExceptionalAlphaPlan {
    fn default() -> Self {
        let g = LinearSchedule { div: 8, add: 1 };
        ExceptionalAlphaPlan {
            primes: vec![PrimeSchedule { p: 2, growth: g }, PrimeSchedule { p: 3, growth: g }],
            cap: LinearSchedule { div: 4, add: 4 },
        }
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn parse_sched(s: &str) -> Result<LinearSchedule> {
    let (d, a) = s.split_once(':').ok_or_else(|| Error::Parse(format!("schedule {s:?} is not div:add")))?;
    let num = |t: &str| t.parse::<u64>().map_err(|_| Error::Parse(format!("bad number {t:?}")));
    Ok(LinearSchedule { div: num(d)?, add: num(a)? })
}

impl ExceptionalAlphaPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Precondition(format!("exceptional: {m}")));
        if self.primes.first().map(|s| s.p) != Some(2) {
            return bad("the first prime must be 2");
        }
        for (i, s) in self.primes.iter().enumerate() {
            if !is_prime(s.p) || (i > 0 && s.p == 2) {
                return bad(&format!("{} is not an odd prime", s.p));
            }
            if self.primes[..i].iter().any(|t| t.p == s.p) {
                return bad(&format!("prime {} listed twice", s.p));
            }
            if s.growth.div == 0 || s.growth.add == 0 {
                return bad("growth schedules need div >= 1 and add >= 1");
            }
        }
        if self.cap.div == 0 {
            return bad("cap schedule needs div >= 1");
        }
        Ok(())
    }

    /// `2=8:1,3=8:1,h=4:4`; the empty string is the default plan.
    pub fn from_params(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(Self::default());
        }
        let mut primes = Vec::new();
        let mut cap = Self::default().cap;
        for part in s.split(',') {
            let (key, val) = part.split_once('=').ok_or_else(|| Error::Parse(format!("bad plan entry {part:?}")))?;
            if key == "h" {
                cap = parse_sched(val)?;
            } else {
                let p = key.parse::<u64>().map_err(|_| Error::Parse(format!("bad prime {key:?}")))?;
                primes.push(PrimeSchedule { p, growth: parse_sched(val)? });
            }
        }
        primes.sort_by_key(|s| s.p);
        let plan = ExceptionalAlphaPlan { primes, cap };
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_params(&self) -> String {
        let mut parts: Vec<String> =
            self.primes.iter().map(|s| format!("{}={}:{}", s.p, s.growth.div, s.growth.add)).collect();
        parts.push(format!("h={}:{}", self.cap.div, self.cap.add));
        parts.join(",")
    }

    /// log2 h_i.
    pub fn cap_bits(&self, i: usize) -> u64 {
        self.cap.at(i)
    }

    pub fn target(&self, p: u64, i: usize) -> Option<u64> {
        self.primes.iter().find(|s| s.p == p).map(|s| s.growth.at(i))
    }
}

#[derive(Debug, Default)]
struct BuildState {
    digits: Vec<BigInt>,
    /// q_{i-1}, q_i for the last built i.
    q_prev: BigInt,
    q_cur: BigInt,
}

/// Digit generator for a plan; `limit` caps the horizon.
#[derive(Debug)]
pub struct ExceptionalDigits {
    plan: ExceptionalAlphaPlan,
    limit: Option<usize>,
    state: Mutex<BuildState>,
}

/// Residue forced for prime p at digit index i, as (value, modulus).
fn residue_for(p: u64, k: u64, i: usize, q1: &BigInt, q2: &BigInt) -> Result<(BigInt, BigInt)> {
    let pb = BigInt::from(p);
    let divisible_step = if p == 2 { i.is_multiple_of(2) } else { i % 2 == 1 };
    if divisible_step {
        // p^k | a q1 + q2  <=>  a = -q2 / q1 mod p^k
        let modulus = num::pow(pb.clone(), k as usize);
        let inv = (q1.mod_floor(&modulus))
            .modinv(&modulus)
            .ok_or_else(|| Error::Precondition(format!("exceptional: q_{} divisible by {p}", i - 1)))?;
        Ok(((-q2 * inv).mod_floor(&modulus), modulus))
    } else {
        // p must not divide a q1 + q2
        if q1.is_multiple_of(&pb) {
            return Ok((BigInt::zero(), BigInt::one()));
        }
        let r = (0..p)
            .map(BigInt::from)
            .find(|r| !(r * q1 + q2).is_multiple_of(&pb))
            .expect("some residue avoids 0 mod p");
        Ok((r, pb))
    }
}

fn crt(parts: &[(BigInt, BigInt)]) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, n) in parts {
        // x + m t = r mod n
        let inv = m.mod_floor(n).modinv(n).unwrap_or_else(BigInt::zero);
        let t = ((r - &x) * inv).mod_floor(n);
        x += &m * t;
        m *= n;
    }
    (x.mod_floor(&m), m)
}

impl ExceptionalDigits {
    pub fn new(plan: ExceptionalAlphaPlan, limit: Option<usize>) -> Result<Self> {
        plan.validate()?;
        let state = BuildState { digits: Vec::new(), q_prev: BigInt::zero(), q_cur: BigInt::one() };
        Ok(ExceptionalDigits { plan, limit, state: Mutex::new(state) })
    }

    fn build_next(&self, st: &mut BuildState) -> Result<()> {
        let i = st.digits.len() + 1;
        let parts = self
            .plan
            .primes
            .iter()
            .map(|s| residue_for(s.p, s.growth.at(i), i, &st.q_cur, &st.q_prev))
            .collect::<Result<Vec<_>>>()?;
        let (r, m) = crt(&parts);
        let a = if r.is_zero() { m } else { r };
        let cap = BigInt::one() << self.plan.cap_bits(i);
        if a > cap {
            return Err(Error::ScheduleInfeasible { index: i, residue: a.to_string(), cap: cap.to_string() });
        }
        let q = &a * &st.q_cur + &st.q_prev;
        st.q_prev = std::mem::replace(&mut st.q_cur, q);
        st.digits.push(a);
        Ok(())
    }
}

impl DigitSource for ExceptionalDigits {
    fn digit(&self, i: usize) -> Result<BigInt> {
        if i == 0 || self.limit.is_some_and(|l| i > l) {
            return Err(Error::PrecisionExhausted { requested: i as u64, available: self.limit.unwrap_or(0) as u64 });
        }
        let mut st = self.state.lock().unwrap();
        while st.digits.len() < i {
            self.build_next(&mut st)?;
        }
        Ok(st.digits[i - 1].clone())
    }

    fn horizon(&self) -> Option<usize> {
        self.limit
    }

    fn describe(&self, _a0: &BigInt) -> String {
        let base = format!("cf:@exceptional:{}", self.plan.to_params());
        match self.limit {
            Some(_) => {
                let st = self.state.lock().unwrap();
                let body: Vec<String> = st.digits.iter().map(|d| d.to_string()).collect();
                format!("cf:[0;{},...]", body.join(","))
            }
            None => base,
        }
    }
}

impl fmt::Display for ExceptionalAlphaPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_params())
    }
}

/// The unbounded stream for a plan, alpha in (0, 1).
pub fn exceptional_stream(plan: ExceptionalAlphaPlan) -> Result<RealDescriptor> {
    Ok(RealDescriptor::cf_stream(0, Arc::new(ExceptionalDigits::new(plan, None)?)))
}

/// The first `count` digits, built eagerly; the stream's horizon is `count`.
pub fn construct_exceptional(plan: &ExceptionalAlphaPlan, count: usize) -> Result<RealDescriptor> {
    if count == 0 {
        return Err(Error::Precondition("count must be >= 1".into()));
    }
    let src = ExceptionalDigits::new(plan.clone(), Some(count))?;
    src.digit(count)?;
    Ok(RealDescriptor::cf_stream(0, Arc::new(src)))
}

fn nu(n: &BigInt, p: u64) -> u64 {
    if n.is_zero() {
        return u64::MAX;
    }
    let pb = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while n.is_multiple_of(&pb) {
        n /= &pb;
        v += 1;
    }
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct ValuationTable {
    pub p: u64,
    /// (i, nu_p(q_i)) on the indices where q_i should gain factors of p.
    pub q: Vec<(usize, u64)>,
    /// (i, nu_p(a_i)) for all i >= 1.
    pub a: Vec<(usize, u64)>,
    /// First index from which the q column is non-decreasing.
    pub monotone_from: usize,
    /// First index whose valuation falls short of the plan, if any.
    pub target_miss: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    pub count: usize,
    pub inconclusive: bool,
    pub two: ValuationTable,
    pub odd: ValuationTable,
    /// a_i = (q_i - q_{i-2}) / q_{i-1} for every i.
    pub recursion_ok: bool,
    /// gcd(q_i, q_{i-1}) = 1 for every i.
    pub coprime_ok: bool,
    /// max ln(a_i)/i over the second and last quarter of the indices.
    pub growth_mid: f64,
    pub growth_tail: f64,
    /// growth_tail < growth_mid, the finite-horizon shadow of ln(a_i)/i -> 0.
    pub growth_decreasing: bool,
    pub pass: bool,
}

fn table(p: u64, digits: &[BigInt], q: &[BigInt], plan: &ExceptionalAlphaPlan) -> ValuationTable {
    let want_even = p == 2;
    let qcol: Vec<(usize, u64)> = (1..q.len())
        .filter(|&i| (i % 2 == 0) == want_even)
        .map(|i| (i, nu(&q[i], p)))
        .collect();
    let acol = digits.iter().enumerate().map(|(j, a)| (j + 1, nu(a, p))).collect();
    let mut start = qcol.len();
    while start > 0 && (start == qcol.len() || qcol[start - 1].1 <= qcol[start].1) {
        start -= 1;
    }
    let monotone_from = qcol.get(start).map(|x| x.0).unwrap_or(0);
    let target_miss = plan.target(p, 0).and_then(|_| {
        qcol.iter().find(|(i, v)| *v < plan.target(p, *i).unwrap()).map(|x| x.0)
    });
    ValuationTable { p, q: qcol, a: acol, monotone_from, target_miss }
}

/// Checks the divisibility pattern of the first `count` denominators
/// against `plan` (the default plan when None).
pub fn verify_conditions(
    alpha: &RealDescriptor,
    count: usize,
    p_odd: u64,
    plan: Option<&ExceptionalAlphaPlan>,
) -> Result<ConditionsReport> {
    let default_plan;
    let plan = match plan {
        Some(p) => p,
        None => {
            default_plan = ExceptionalAlphaPlan::default();
            &default_plan
        }
    };
    if p_odd == 2 || !is_prime(p_odd) {
        return Err(Error::Precondition(format!("{p_odd} is not an odd prime")));
    }
    let RealDescriptor::CfStream(s) = alpha else {
        let cf = crate::contfrac::expand(alpha, count + 1)?;
        cf.require(count + 1)?;
        let src = crate::realkernel::PrefixDigits(cf.digits.clone());
        let stream = RealDescriptor::cf_stream(cf.a0.clone(), Arc::new(src));
        return verify_conditions(&stream, count, p_odd, Some(plan));
    };
    let mut digits = Vec::with_capacity(count);
    let mut q = vec![BigInt::one()];
    for i in 1..=count {
        digits.push(s.digit(i)?);
        q.push(s.convergent(i)?.1);
    }
    let recursion_ok = (1..=count).all(|i| {
        let q2 = if i >= 2 { q[i - 2].clone() } else { BigInt::zero() };
        let (a, r) = (&q[i] - q2).div_rem(&q[i - 1]);
        r.is_zero() && a == digits[i - 1]
    });
    let coprime_ok = (1..=count).all(|i| q[i].gcd(&q[i - 1]).is_one());
    let mut plan_p = plan.clone();
    if plan_p.target(p_odd, 0).is_none() {
        let g = plan.primes.get(1).map(|s| s.growth).unwrap_or(LinearSchedule { div: 8, add: 1 });
        plan_p.primes.push(PrimeSchedule { p: p_odd, growth: g });
    }
    let two = table(2, &digits, &q, &plan_p);
    let odd = table(p_odd, &digits, &q, &plan_p);
    let ratio = |i: usize| digits[i - 1].to_f64().map(f64::ln).unwrap_or(f64::INFINITY) / i as f64;
    let quarter_max = |from: usize, to: usize| (from.max(1)..=to).map(ratio).fold(0.0f64, f64::max);
    let (growth_mid, growth_tail) = if count >= 4 {
        (quarter_max(count / 4, count / 2), quarter_max(3 * count / 4, count))
    } else {
        (f64::NAN, f64::NAN)
    };
    let inconclusive = count < 4;
    let pass = !inconclusive && recursion_ok && coprime_ok && two.target_miss.is_none() && odd.target_miss.is_none();
    Ok(ConditionsReport {
        count,
        inconclusive,
        two,
        odd,
        recursion_ok,
        coprime_ok,
        growth_mid,
        growth_tail,
        growth_decreasing: growth_tail < growth_mid,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisReport {
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(with = "crate::bitset::rational_str")]
    pub eps0: BigRational,
    /// [1, T] \ 2A.
    pub complement: Vec<u64>,
    pub largest: Option<u64>,
    /// Every N in [tail_empty_from, T] lies in 2A.
    pub tail_empty_from: u64,
}

/// Brute-force 2A complement in [1, T] for alpha at constant eps0.
pub fn basis_check(alpha: &RealDescriptor, eps0: &BigRational, t: u64) -> Result<BasisReport> {
    if !eps0.is_positive() {
        return Err(Error::Precondition("eps0 must be positive".into()));
    }
    let spec = RecurrenceSetSpec::monomial(alpha.clone(), 2, eps0.clone())?;
    let rep = complement(&spec, 2, t)?;
    let comp: Vec<u64> = rep.complement.into_iter().filter(|&n| n >= 1).collect();
    let largest = comp.last().copied();
    Ok(BasisReport { t, eps0: eps0.clone(), tail_empty_from: largest.map_or(1, |n| n + 1), largest, complement: comp })
}
