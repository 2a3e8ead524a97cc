//! Degree >= 3: the nested-interval construction of alpha with
//! ||N_i alpha - 1/2|| <= N_i^-d, witness checks for it, and the
//! trichotomy test on affine families of polynomials.

use std::fmt;
use std::sync::{Arc, Mutex};

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::obstruction::VerificationOutcome;
use crate::realkernel::{
    form_cmp_threshold, fractional_distance, IntervalValue, QuadSurd, RealDescriptor,
};
use crate::recurrence::{enumerate, EpsilonSchedule, RecurrenceSetSpec};
use crate::sumset::{complement, SumsetReport};

/// Levels past this are never built on demand.
pub const MAX_GAMMA_LEVELS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaLevel {
    pub n: BigInt,
    /// Index j of the chosen interval centred at (2j+1)/(2n).
    pub j: BigInt,
    pub lo: BigRational,
    pub hi: BigRational,
    /// How many admissible intervals the previous level left to choose from.
    pub choices: BigInt,
}

/// The limit point of the nested intervals, refinable level by level.
#[derive(Clone)]
pub struct GammaReal {
    pub d: u32,
    pub n1: BigInt,
    pub ratio: BigRational,
    pub bits: Vec<bool>,
    cache: Arc<Mutex<Vec<GammaLevel>>>,
}

impl fmt::Debug for GammaReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GammaReal({self})")
    }
}

impl PartialEq for GammaReal {
    fn eq(&self, o: &Self) -> bool {
        self.d == o.d && self.n1 == o.n1 && self.ratio == o.ratio && self.bits == o.bits
    }
}

fn pow_big(n: &BigInt, e: u32) -> BigInt {
    num::pow(n.clone(), e as usize)
}

impl GammaReal {
    pub fn new(d: u32, n1: BigInt, ratio: BigRational, bits: Vec<bool>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Precondition("degree must be >= 2".into()));
        }
        if n1 < BigInt::from(3) || n1.is_even() {
            return Err(Error::Precondition("N_1 must be odd and >= 3".into()));
        }
        if !ratio.is_positive() {
            return Err(Error::Precondition("growth ratio must be positive".into()));
        }
        Ok(GammaReal { d, n1, ratio, bits, cache: Arc::new(Mutex::new(Vec::new())) })
    }

    /// Parameters `d=3,n1=11,ratio=4,bits=0101` (all but d optional).
    pub fn parse(body: &str) -> Result<Self> {
        let mut d = None;
        let mut n1 = BigInt::from(11);
        let mut ratio = BigRational::from_integer(4.into());
        let mut bits = Vec::new();
        for kv in body.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("gamma parameter {kv:?}")))?;
            let v = v.trim();
            match k.trim() {
                "d" => d = Some(v.parse::<u32>().map_err(|_| Error::Parse(format!("bad d {v:?}")))?),
                "n1" => n1 = v.parse().map_err(|_| Error::Parse(format!("bad n1 {v:?}")))?,
                "ratio" => {
                    ratio = crate::bitset::rational_str::parse(v)
                        .ok_or_else(|| Error::Parse(format!("bad ratio {v:?}")))?
                }
                "bits" => {
                    bits = v
                        .chars()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            _ => Err(Error::Parse(format!("bad branch bit {c:?}"))),
                        })
                        .collect::<Result<_>>()?
                }
                other => return Err(Error::Parse(format!("unknown gamma key {other:?}"))),
            }
        }
        let d = d.ok_or_else(|| Error::Parse("gamma needs d=".into()))?;
        GammaReal::new(d, n1, ratio, bits)
    }

    fn bit(&self, level: usize) -> bool {
        self.bits.get(level).copied().unwrap_or(false)
    }

    /// Smallest odd integer strictly above ratio * n^(d+1).
    pub fn next_n(&self, n: &BigInt) -> BigInt {
        let t = &self.ratio * BigRational::from_integer(pow_big(n, self.d + 1));
        let mut m: BigInt = t.floor().to_integer() + 1;
        if m.is_even() {
            m += 1;
        }
        m
    }

    fn build(&self, cache: &mut Vec<GammaLevel>, upto: usize) -> Result<()> {
        while cache.len() < upto {
            let level = cache.len();
            let (n, lo_b, hi_b) = match cache.last() {
                None => (self.n1.clone(), BigRational::zero(), BigRational::one()),
                Some(prev) => (self.next_n(&prev.n), prev.lo.clone(), prev.hi.clone()),
            };
            let h = BigRational::new(BigInt::one(), pow_big(&n, self.d + 1));
            let two_n = BigRational::from_integer(BigInt::from(2) * &n);
            let one = BigRational::one();
            // centre (2j+1)/(2n) with [c - h, c + h] inside [lo_b, hi_b]
            let j_min = (((&lo_b + &h) * &two_n - &one) / BigInt::from(2)).ceil().to_integer();
            let j_max = (((&hi_b - &h) * &two_n - &one) / BigInt::from(2)).floor().to_integer();
            let choices = if j_max >= j_min { &j_max - &j_min + 1 } else { BigInt::zero() };
            if choices < BigInt::from(2) {
                return Err(Error::BranchExhausted { level: level + 1, children: choices.to_string() });
            }
            let j = if self.bit(level) { j_max } else { j_min };
            let c = BigRational::new(BigInt::from(2) * &j + 1, BigInt::from(2) * &n);
            cache.push(GammaLevel { lo: &c - &h, hi: &c + &h, n, j, choices });
        }
        Ok(())
    }

    /// First `count` levels.
    pub fn levels(&self, count: usize) -> Result<Vec<GammaLevel>> {
        let mut c = self.cache.lock().unwrap();
        self.build(&mut c, count)?;
        Ok(c[..count].to_vec())
    }

    pub fn enclose(&self, bits: u64) -> Result<(BigRational, BigRational)> {
        let target = BigRational::new(BigInt::one(), BigInt::one() << bits);
        let mut c = self.cache.lock().unwrap();
        for level in 1..=MAX_GAMMA_LEVELS {
            self.build(&mut c, level)?;
            let l = &c[level - 1];
            if &l.hi - &l.lo <= target {
                return Ok((l.lo.clone(), l.hi.clone()));
            }
        }
        let l = &c[MAX_GAMMA_LEVELS - 1];
        let width = &l.hi - &l.lo;
        let avail = width.denom().bits().saturating_sub(width.numer().bits());
        Err(Error::PrecisionExhausted { requested: bits, available: avail })
    }
}

impl fmt::Display for GammaReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        let ratio = if self.ratio.is_integer() {
            self.ratio.numer().to_string()
        } else {
            format!("{}/{}", self.ratio.numer(), self.ratio.denom())
        };
        write!(f, "gamma:d={},n1={},ratio={},bits={}", self.d, self.n1, ratio, bits)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaConstruction {
    pub d: u32,
    #[serde(serialize_with = "ser_bigints")]
    pub n_sequence: Vec<BigInt>,
    pub branch_bits: String,
    /// Dyadic outward rounding of the last level's interval.
    pub enclosure: String,
    #[serde(skip)]
    pub levels: Vec<GammaLevel>,
    #[serde(serialize_with = "ser_display")]
    pub alpha: RealDescriptor,
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|n| n.to_string()))
}

fn ser_display<S: serde::Serializer>(v: &RealDescriptor, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl GammaConstruction {
    /// Every level's constraint holds on the final interval, checked exactly.
    pub fn check(&self) -> bool {
        let Some(last) = self.levels.last() else { return false };
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        self.levels.iter().all(|l| {
            let bound = BigRational::new(BigInt::one(), pow_big(&l.n, self.d));
            let n = BigRational::from_integer(l.n.clone());
            // N alpha - 1/2 - j stays within +-N^-d at both endpoints
            let j = BigRational::from_integer(l.j.clone());
            let off = |x: &BigRational| (&n * x - &half - &j).abs();
            l.lo <= last.lo && last.hi <= l.hi && off(&last.lo) <= bound && off(&last.hi) <= bound
        })
    }
}

/// `levels` levels of nested intervals with N_1 = n1 and
/// N_{i+1} = next odd integer above ratio * N_i^(d+1).
pub fn gamma_construct(
    d: u32,
    n1: BigInt,
    ratio: BigRational,
    branch_bits: &str,
    levels: usize,
) -> Result<GammaConstruction> {
    if levels == 0 || levels > MAX_GAMMA_LEVELS {
        return Err(Error::Precondition(format!("levels must be in 1..={MAX_GAMMA_LEVELS}")));
    }
    let bits = branch_bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("bad branch bit {c:?}"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    let g = GammaReal::new(d, n1, ratio, bits)?;
    let lv = g.levels(levels)?;
    let last = lv.last().unwrap();
    let width = &last.hi - &last.lo;
    let exp = width.denom().bits().saturating_sub(width.numer().bits()) + 8;
    let enclosure = IntervalValue::outward(&last.lo, &last.hi, exp).to_string();
    Ok(GammaConstruction {
        d,
        n_sequence: lv.iter().map(|l| l.n.clone()).collect(),
        branch_bits: branch_bits.to_string(),
        enclosure,
        levels: lv,
        alpha: RealDescriptor::NestedIntervals(g),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NearMiss {
    pub n1: u64,
    pub n2: u64,
    /// ||n1^d alpha|| and ||n2^d alpha||
    pub dist1: f64,
    pub dist2: f64,
    /// ||n1^d alpha - (-1)^d n2^d alpha||, close to 1/2.
    pub telescoped: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HighDegReport {
    pub outcome: VerificationOutcome,
    /// The split minimising max(||n1^d alpha||, ||n2^d alpha||); only
    /// computed when brute force runs.
    pub near_miss: Option<NearMiss>,
}

/// Above this N the report is algebra-only.
pub const HIGHDEG_BRUTE_CAP: u64 = 1_000_000;

/// Confirms that no n1 + n2 = N has ||n1^d alpha||, ||n2^d alpha|| <= eps0,
/// given ||N alpha - 1/2|| <= N^-d.
pub fn verify_highdeg_witness(alpha: &RealDescriptor, n: &BigInt, d: u32, eps0: &BigRational) -> Result<HighDegReport> {
    if d < 2 {
        return Err(Error::Precondition("degree must be >= 2".into()));
    }
    if !n.is_positive() || n.is_even() {
        return Err(Error::Precondition("N must be odd and positive".into()));
    }
    let half = RealDescriptor::rational(1, 2);
    let bound = BigRational::new(BigInt::one(), pow_big(n, d));
    let near_half = form_cmp_threshold(&[(n.clone(), alpha), (-BigInt::one(), &half)], &bound)?;
    if !near_half.within() {
        return Err(Error::Precondition(format!("||N alpha - 1/2|| exceeds N^-{d}")));
    }
    let Some(nv) = n.to_u64().filter(|&v| v <= HIGHDEG_BRUTE_CAP) else {
        return Ok(HighDegReport { outcome: VerificationOutcome::AlgebraOnly, near_miss: None });
    };
    let spec = RecurrenceSetSpec::monomial(alpha.clone(), d, eps0.clone())?;
    let members = enumerate(&spec, nv)?;
    if let Some(a) = (0..=nv).find(|&a| members.get(a as usize) && members.get((nv - a) as usize)) {
        return Ok(HighDegReport {
            outcome: VerificationOutcome::Refuted(format!("{nv} = {a} + {}", nv - a)),
            near_miss: None,
        });
    }
    let dist = |m: u64| -> Result<f64> {
        Ok(fractional_distance(alpha, &pow_big(&BigInt::from(m), d))?.to_f64())
    };
    let mut best: Option<(f64, u64)> = None;
    for a in 0..=nv / 2 {
        let worst = dist(a)?.max(dist(nv - a)?);
        if best.is_none_or(|(w, _)| worst < w) {
            best = Some((worst, a));
        }
    }
    let (_, a) = best.expect("N >= 1");
    let b = nv - a;
    let sign = if d.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let tele = pow_big(&BigInt::from(a), d) - sign * pow_big(&BigInt::from(b), d);
    let near_miss = NearMiss {
        n1: a,
        n2: b,
        dist1: dist(a)?,
        dist2: dist(b)?,
        telescoped: fractional_distance(alpha, &tele)?.to_f64(),
    };
    Ok(HighDegReport { outcome: VerificationOutcome::AlgebraAndBruteForce, near_miss: Some(near_miss) })
}

/// n1^d - (-1)^d n2^d - N sum_{j<d} (-1)^j n1^{d-1-j} n2^j for N = n1 + n2,
/// which vanishes identically.
pub fn telescoping_residual(n1: &BigInt, n2: &BigInt, d: u32) -> BigInt {
    let n = n1 + n2;
    let sign = if d.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let lhs = pow_big(n1, d) - sign * pow_big(n2, d);
    let mut s = BigInt::zero();
    for j in 0..d {
        let t = pow_big(n1, d - 1 - j) * pow_big(n2, j);
        if j % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    lhs - n * s
}

/// {base + sum_i t_i dir_i : t in R^r}; polynomials as (degree, coefficient).
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct AffineFamilySpec {
    pub base: Vec<(u32, RealDescriptor)>,
    pub directions: Vec<Vec<(u32, RealDescriptor)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Trichotomy {
    AllDegreeLE2,
    FixedLeadingTerm,
    GenericBasisExpected,
}

/// Whether a coefficient is known to vanish. Non-exact descriptors count as
/// nonzero.
fn is_zero_coeff(c: &RealDescriptor) -> bool {
    c.exact().is_some_and(|q| q.is_zero())
}

/// Combined coefficient per degree; `None` when some are not exact.
fn exact_coeffs(p: &[(u32, RealDescriptor)]) -> Option<std::collections::BTreeMap<u32, QuadSurd>> {
    let mut m = std::collections::BTreeMap::new();
    for (d, c) in p {
        let q = c.exact()?;
        let e = m.entry(*d).or_insert_with(QuadSurd::zero);
        if !e.same_field(&q) {
            return None;
        }
        *e = e.clone() + q;
    }
    Some(m)
}

fn degree(p: &[(u32, RealDescriptor)]) -> Option<u32> {
    if let Some(m) = exact_coeffs(p) {
        return m.iter().rev().find(|(_, q)| !q.is_zero()).map(|(d, _)| *d);
    }
    p.iter().filter(|(_, c)| !is_zero_coeff(c)).map(|(d, _)| *d).max()
}

impl AffineFamilySpec {
    /// Rank of the directions over the reals when every coefficient lies in
    /// one quadratic field; `None` otherwise.
    pub fn exact_rank(&self) -> Option<usize> {
        let rows: Vec<_> = self.directions.iter().map(|d| exact_coeffs(d)).collect::<Option<_>>()?;
        let degs: std::collections::BTreeSet<u32> = rows.iter().flat_map(|r| r.keys().copied()).collect();
        let mut mat: Vec<Vec<QuadSurd>> = rows
            .iter()
            .map(|r| degs.iter().map(|d| r.get(d).cloned().unwrap_or_else(QuadSurd::zero)).collect())
            .collect();
        let all: Vec<&QuadSurd> = mat.iter().flatten().collect();
        if all.iter().any(|a| all.iter().any(|b| !a.same_field(b))) {
            return None;
        }
        let mut rank = 0;
        for col in 0..degs.len() {
            let Some(piv) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) else { continue };
            mat.swap(rank, piv);
            let pivot = mat[rank].clone();
            let p = pivot[col].clone();
            for (r, row) in mat.iter_mut().enumerate() {
                if r != rank && !row[col].is_zero() {
                    let f = row[col].div(&p);
                    for (v, pv) in row.iter_mut().zip(&pivot).skip(col) {
                        *v = v.clone() - f.clone() * pv.clone();
                    }
                }
            }
            rank += 1;
        }
        Some(rank)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.exact_rank() {
            if r < self.directions.len() {
                return Err(Error::Precondition("directions are linearly dependent".into()));
            }
        }
        Ok(())
    }
}

/// Which of the three alternatives of the degree trichotomy the family
/// satisfies first: every member has degree <= 2; some member p has
/// deg p > deg(p - q) for all q (the base outranks every direction);
/// otherwise A is expected to be a basis for almost every member.
pub fn family_trichotomy(family: &AffineFamilySpec) -> Trichotomy {
    let base = degree(&family.base);
    let dirs = family.directions.iter().filter_map(|d| degree(d)).max();
    let top = base.max(dirs).unwrap_or(0);
    if top <= 2 {
        Trichotomy::AllDegreeLE2
    } else if base.is_some() && base > dirs {
        Trichotomy::FixedLeadingTerm
    } else {
        Trichotomy::GenericBasisExpected
    }
}

/// Brute-force kA complement for alpha n^d under the given schedule.
pub fn complement_survey_highdeg(
    alpha: &RealDescriptor,
    d: u32,
    schedule: EpsilonSchedule,
    t: u64,
    k: usize,
) -> Result<SumsetReport> {
    if d < 3 {
        return Err(Error::Precondition("degree must be >= 3".into()));
    }
    let spec = RecurrenceSetSpec::new(vec![(d, alpha.clone())], schedule)?;
    complement(&spec, k, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_levels() {
        let g = gamma_construct(3, BigInt::from(11), BigRational::from_integer(4.into()), "0101", 4).unwrap();
        assert!(g.check());
        assert_eq!(g.n_sequence[1], BigInt::from(58565));
    }

    #[test]
    fn trichotomy_examples() {
        let one = RealDescriptor::integer(1);
        let fam = |base: Vec<(u32, RealDescriptor)>, dirs: Vec<Vec<(u32, RealDescriptor)>>| {
            family_trichotomy(&AffineFamilySpec { base, directions: dirs })
        };
        assert_eq!(fam(vec![], vec![vec![(3, one.clone())]]), Trichotomy::GenericBasisExpected);
        assert_eq!(fam(vec![(3, one.clone())], vec![vec![(1, one.clone())]]), Trichotomy::FixedLeadingTerm);
        assert_eq!(fam(vec![], vec![vec![(2, one.clone())], vec![(0, one.clone())]]), Trichotomy::AllDegreeLE2);
    }

    #[test]
    fn telescoping() {
        assert!(telescoping_residual(&BigInt::from(17), &BigInt::from(-5), 5).is_zero());
    }
}
