//! Certificates (N, k, m, gamma, delta) proving N is not in 2A for
//! A = {n : ||n^2 alpha|| <= eps0}, and the diagnostics around them.
//!
//! With N odd, k even, m odd and gcd(m, k) = 1, write
//! N alpha = m/k + gamma/(kN). If |gamma| < 1 - delta then no
//! decomposition N = n1 + n2 has both ||n_i^2 alpha|| <= delta/(2k).

use std::cmp::Ordering;

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::contfrac::{convergents, expand};
use crate::equidist::orbit_hits;
use crate::error::{Error, Result};
use crate::realkernel::{
    fmt_decimal, form_cmp_threshold, form_exact, form_interval, form_round, fractional_distance,
    FracDistance, IntervalValue, QuadSurd, RealDescriptor, Threshold,
};

/// Grid on which the delta margin is rounded down.
pub const DELTA_BITS: u64 = 40;
/// Largest k tried by `exact_form`.
pub const EXACT_FORM_K_CAP: u64 = 64;

#[derive(Clone, Debug)]
pub enum GammaValue {
    Exact(QuadSurd),
    Interval(IntervalValue),
}

impl GammaValue {
    pub fn bounds(&self) -> (BigRational, BigRational) {
        match self {
            GammaValue::Exact(q) => q.enclose(64),
            GammaValue::Interval(iv) => (iv.lo_rat(), iv.hi_rat()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            GammaValue::Exact(q) => q.to_f64(),
            GammaValue::Interval(iv) => iv.mid_f64(),
        }
    }

    /// Upper bound on |gamma| (exact when available).
    fn abs_upper(&self) -> BigRational {
        let (lo, hi) = self.bounds();
        lo.abs().max(hi.abs())
    }
}

#[derive(Clone, Debug)]
pub struct ObstructionCertificate {
    pub n: BigInt,
    pub k: u64,
    pub m: BigInt,
    pub gamma: GammaValue,
    pub delta: BigRational,
    pub eps0_max: BigRational,
    pub alpha: RealDescriptor,
}

impl ObstructionCertificate {
    pub fn eps0_max_f64(&self) -> f64 {
        self.eps0_max.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    #[serde(rename = "N")]
    n: String,
    k: u64,
    m: String,
    gamma_lo: String,
    gamma_hi: String,
    delta: String,
    eps0_max: String,
    verified: &'a str,
    alpha: String,
}

impl ObstructionCertificate {
    /// JSON object with the given verification tag ("algebra" or "brute").
    pub fn to_json(&self, verified: &str) -> serde_json::Value {
        let (lo, hi) = self.gamma.bounds();
        let j = CertificateJson {
            n: self.n.to_string(),
            k: self.k,
            m: self.m.to_string(),
            gamma_lo: fmt_decimal(&lo, 20, false),
            gamma_hi: fmt_decimal(&hi, 20, true),
            delta: format!("{}/{}", self.delta.numer(), self.delta.denom()),
            eps0_max: format!("{}/{}", self.eps0_max.numer(), self.eps0_max.denom()),
            verified,
            alpha: self.alpha.to_string(),
        };
        serde_json::to_value(j).expect("certificate serialises")
    }
}

impl ObstructionCertificate {
    /// Inverse of `to_json`; gamma is taken from the stored bounds.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| {
            v.get(k)
                .and_then(|x| x.as_str().map(str::to_string).or_else(|| x.as_u64().map(|n| n.to_string())))
                .ok_or_else(|| Error::Parse(format!("certificate field {k:?} missing")))
        };
        let int = |k: &str| field(k)?.parse::<BigInt>().map_err(|_| Error::Parse(format!("bad {k}")));
        let rat = |k: &str| crate::recurrence::parse_rat(&field(k)?);
        let k = field("k")?.parse::<u64>().map_err(|_| Error::Parse("bad k".into()))?;
        let (lo, hi) = (rat("gamma_lo")?, rat("gamma_hi")?);
        Ok(ObstructionCertificate {
            n: int("N")?,
            k,
            m: int("m")?,
            gamma: GammaValue::Interval(IntervalValue::outward(&lo, &hi, 80)),
            delta: rat("delta")?,
            eps0_max: rat("eps0_max")?,
            alpha: field("alpha")?.parse()?,
        })
    }
}

impl Serialize for ObstructionCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json("algebra").serialize(s)
    }
}

fn one() -> RealDescriptor {
    RealDescriptor::integer(1)
}

fn half() -> RealDescriptor {
    RealDescriptor::rational(1, 2)
}

/// gamma = N (k N alpha - m).
fn gamma_of(alpha: &RealDescriptor, n: &BigInt, k: u64, m: &BigInt) -> Result<GammaValue> {
    let kb = BigInt::from(k);
    let unit = one();
    let terms = [(&kb * n * n, alpha), (-(n * m), &unit)];
    if let Some(g) = form_exact(&terms) {
        return Ok(GammaValue::Exact(g));
    }
    let (lo, hi) = form_interval(&terms, 80)?;
    Ok(GammaValue::Interval(IntervalValue::outward(&lo, &hi, 82)))
}

/// Largest delta on the 2^-40 grid with |gamma| < 1 - delta, if positive.
fn delta_margin(gamma: &GammaValue) -> Option<BigRational> {
    let grid = BigInt::one() << DELTA_BITS;
    let (slack_floor, exact_hit) = match gamma {
        GammaValue::Exact(g) => {
            let t = QuadSurd::from_int(BigInt::one()) - g.abs();
            let f = t.floor_scaled(DELTA_BITS);
            let hit = t.as_rational() == Some(BigRational::new(f.clone(), grid.clone()));
            (f, hit)
        }
        GammaValue::Interval(_) => {
            let t = BigRational::one() - gamma.abs_upper();
            let f = (t.numer() << DELTA_BITS).div_floor(t.denom());
            let hit = BigRational::new(f.clone(), grid.clone()) == t;
            (f, hit)
        }
    };
    let f = if exact_hit { slack_floor - 1 } else { slack_floor };
    f.is_positive().then(|| BigRational::new(f, grid))
}

/// Certificate for the given (k, m), or None when |gamma| >= 1.
pub fn certificate_for(alpha: &RealDescriptor, n: &BigInt, k: u64, m: &BigInt) -> Result<Option<ObstructionCertificate>> {
    if !n.is_positive() || n.is_even() {
        return Err(Error::InvalidParity);
    }
    if k == 0 || k % 2 == 1 {
        return Err(Error::Precondition("k must be even and positive".into()));
    }
    if m.is_even() || !m.gcd(&BigInt::from(k)).is_one() {
        return Ok(None);
    }
    let gamma = gamma_of(alpha, n, k, m)?;
    let Some(delta) = delta_margin(&gamma) else {
        return Ok(None);
    };
    let eps0_max = &delta / BigInt::from(2 * k);
    Ok(Some(ObstructionCertificate { n: n.clone(), k, m: m.clone(), gamma, delta, eps0_max, alpha: alpha.clone() }))
}

fn nearest_multiple(alpha: &RealDescriptor, mult: &BigInt) -> Result<BigInt> {
    let h = half();
    form_round(&[(mult.clone(), alpha)], &h)
}

/// Best certificate over even k <= k_max, maximising eps0_max (smallest k on ties).
pub fn certify(alpha: &RealDescriptor, n: &BigInt, k_max: u64) -> Result<Option<ObstructionCertificate>> {
    if !n.is_positive() || n.is_even() {
        return Err(Error::InvalidParity);
    }
    let mut best: Option<ObstructionCertificate> = None;
    for k in (2..=k_max).step_by(2) {
        let m = nearest_multiple(alpha, &(BigInt::from(k) * n))?;
        if let Some(c) = certificate_for(alpha, n, k, &m)? {
            if best.as_ref().is_none_or(|b| c.eps0_max > b.eps0_max) {
                best = Some(c);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum VerificationOutcome {
    AlgebraOnly,
    AlgebraAndBruteForce,
    Refuted(String),
}

impl VerificationOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, VerificationOutcome::Refuted(_))
    }
}

/// Re-derive the inequality chain and, when N <= t_check, confirm by brute
/// force that N has no decomposition at `eps0` (which must not exceed
/// eps0_max).
pub fn verify_certificate(cert: &ObstructionCertificate, t_check: u64, eps0: &BigRational) -> Result<VerificationOutcome> {
    let refuted = |why: &str| Ok(VerificationOutcome::Refuted(why.to_string()));
    if !cert.n.is_positive() || cert.n.is_even() {
        return refuted("N is not odd");
    }
    if cert.k == 0 || cert.k % 2 == 1 {
        return refuted("k is not even");
    }
    if cert.m.is_even() || !cert.m.gcd(&BigInt::from(cert.k)).is_one() {
        return refuted("m is not odd and coprime to k");
    }
    if cert.eps0_max != &cert.delta / BigInt::from(2 * cert.k) || !cert.delta.is_positive() {
        return refuted("eps0_max is not delta/(2k)");
    }
    let gamma = gamma_of(&cert.alpha, &cert.n, cert.k, &cert.m)?;
    let consistent = match (&gamma, &cert.gamma) {
        (GammaValue::Exact(a), GammaValue::Exact(b)) => a == b,
        (g, stored) => {
            let (a, b) = g.bounds();
            let (c, d) = stored.bounds();
            a <= d && c <= b
        }
    };
    if !consistent {
        return refuted("gamma does not match N alpha - m/k");
    }
    let margin_ok = match &gamma {
        GammaValue::Exact(g) => {
            (g.abs() + QuadSurd::from_rational(&cert.delta)).cmp_rational(&BigRational::one()) == Ordering::Less
        }
        GammaValue::Interval(_) => gamma.abs_upper() + &cert.delta < BigRational::one(),
    };
    if !margin_ok {
        return refuted("|gamma| >= 1 - delta");
    }
    if eps0 > &cert.eps0_max {
        return Err(Error::Precondition(format!(
            "eps0 {eps0} exceeds the certified eps0_max {}",
            cert.eps0_max
        )));
    }
    match cert.n.to_u64() {
        Some(n) if n <= t_check => match orbit_hits(&cert.alpha, n, eps0)? {
            Some(a) => Ok(VerificationOutcome::Refuted(format!("{} = {} + {}", n, a, n - a))),
            None => Ok(VerificationOutcome::AlgebraAndBruteForce),
        },
        _ => Ok(VerificationOutcome::AlgebraOnly),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanHit {
    pub k: u64,
    /// ||k N alpha||
    pub distance: f64,
}

/// All k <= k_max with ||k N alpha|| <= bound_scale / N, best (smallest
/// k ||k N alpha||) first.
pub fn rational_obstruction_scan(
    alpha: &RealDescriptor,
    n: &BigInt,
    k_max: u64,
    bound_scale: &BigRational,
) -> Result<Vec<ScanHit>> {
    if !n.is_positive() {
        return Err(Error::Precondition("N must be >= 1".into()));
    }
    let theta = (bound_scale / n).min(BigRational::new(1.into(), 2.into()));
    let mut hits = Vec::new();
    for k in 1..=k_max {
        let kn = BigInt::from(k) * n;
        if form_cmp_threshold(&[(kn.clone(), alpha)], &theta)?.within() {
            let d = fractional_distance(alpha, &kn)?;
            hits.push(ScanHit { k, distance: d.to_f64() });
        }
    }
    hits.sort_by(|a, b| {
        (a.distance * a.k as f64)
            .total_cmp(&(b.distance * b.k as f64))
            .then(a.k.cmp(&b.k))
    });
    Ok(hits)
}

/// Empirical N above which complement elements at eps0 = 4 eps1 were all
/// seen to have the exact shape: 2 (4 eps1)^(-5/2). Calibrated on sqrt 2,
/// sqrt 3, sqrt 5, sqrt 7, the golden ratio, (1 + 3 sqrt 7)/4 and e for
/// eps0 in {0.05, 0.1, 0.2} up to 10^5.
pub fn exact_form_threshold(eps1: &BigRational) -> f64 {
    let e = eps1.to_f64().unwrap_or(0.0) * 4.0;
    if e <= 0.0 {
        return f64::INFINITY;
    }
    (2.0 * e.powf(-2.5)).ceil()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactForm {
    pub k: u64,
    #[serde(with = "crate::bitset::bigint_str")]
    pub m: BigInt,
    pub gamma: f64,
    /// (1 - |gamma|) / (2k)
    pub margin: f64,
    /// False when N is below `exact_form_threshold(eps1)`.
    pub reliable: bool,
}

/// Even k with gcd(m, k) = 1, N alpha = m/k + gamma/(kN) and
/// (1 - |gamma|)/(2k) > eps1; smallest such k up to `EXACT_FORM_K_CAP`.
pub fn exact_form(alpha: &RealDescriptor, n: &BigInt, eps1: &BigRational) -> Result<Option<ExactForm>> {
    if !n.is_positive() || n.is_even() {
        return Ok(None);
    }
    for k in (2..=EXACT_FORM_K_CAP).step_by(2) {
        let m = nearest_multiple(alpha, &(BigInt::from(k) * n))?;
        if !m.gcd(&BigInt::from(k)).is_one() {
            continue;
        }
        let gamma = gamma_of(alpha, n, k, &m)?;
        let two_k = BigRational::from_integer(BigInt::from(2 * k));
        let ok = match &gamma {
            GammaValue::Exact(g) => {
                let margin = (QuadSurd::from_int(BigInt::one()) - g.abs()).div(&QuadSurd::from_rational(&two_k));
                margin.cmp_rational(eps1) == Ordering::Greater
            }
            GammaValue::Interval(_) => (BigRational::one() - gamma.abs_upper()) / &two_k > *eps1,
        };
        if ok {
            let g = gamma.to_f64();
            return Ok(Some(ExactForm {
                k,
                m,
                gamma: g,
                margin: (1.0 - g.abs()) / (2 * k) as f64,
                reliable: n.to_f64().unwrap_or(f64::INFINITY) >= exact_form_threshold(eps1),
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub enum GammaLimit {
    Exact(String),
    Interval { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitObstruction {
    pub k: u64,
    pub gamma_limit: GammaLimit,
    /// |gamma_i - limit| for each certificate, in input order.
    pub deviations: Vec<f64>,
    pub irrationality_checked_to: u64,
}

#[derive(Clone, Debug, Serialize)]
pub enum LimitOutcome {
    Limit(LimitObstruction),
    /// gamma + k n^2 alpha is (exact) or may be (not exact) an integer.
    Degenerate { n: u64, exact: bool },
}

/// Is gamma + k n^2 alpha an integer for some n <= n_bound?
fn exact_degeneracy(alpha: &QuadSurd, gamma: &QuadSurd, k: u64, n_bound: u64) -> Option<u64> {
    let kb = BigInt::from(k);
    let is_int = |v: &QuadSurd| v.is_rational() && v.c.is_one();
    if alpha.is_rational() || !gamma.same_field(alpha) {
        if !gamma.same_field(alpha) {
            // 1, sqrt(d1), sqrt(d2) are independent over Q: only n = 0 can work
            return is_int(gamma).then_some(0);
        }
        return (0..=n_bound).find(|&n| {
            let v = gamma.clone() + alpha.scale(&(&kb * BigInt::from(n) * BigInt::from(n)));
            is_int(&v)
        });
    }
    if gamma.is_rational() {
        return is_int(gamma).then_some(0);
    }
    // surd parts cancel iff n^2 = -(gamma.b / gamma.c) / (k alpha.b / alpha.c)
    let n2 = BigRational::new(-(&gamma.b * &alpha.c), &gamma.c * &kb * &alpha.b);
    if !n2.is_integer() || n2.is_negative() {
        return None;
    }
    let n2 = n2.to_integer();
    let n = n2.sqrt();
    if &n * &n != n2 {
        return None;
    }
    let n = n.to_u64()?;
    if n > n_bound {
        return None;
    }
    let v = gamma.clone() + alpha.scale(&(&kb * BigInt::from(n) * BigInt::from(n)));
    is_int(&v).then_some(n)
}

/// Estimate the accumulation point of the certificates' gamma and rule out
/// gamma + k n^2 alpha in Z for n <= n_bound. A known exact limit can be
/// supplied as `candidate`; the certificates must then approach it.
pub fn limit_obstruction_check(
    alpha: &RealDescriptor,
    certs: &[ObstructionCertificate],
    k: u64,
    n_bound: u64,
    candidate: Option<&QuadSurd>,
) -> Result<LimitOutcome> {
    if certs.is_empty() || certs.iter().any(|c| c.k != k) {
        return Err(Error::Precondition("certificates must be nonempty and share k".into()));
    }
    let kb = BigInt::from(k);
    if let Some(cand) = candidate {
        if let Some(a) = alpha.exact() {
            if let Some(n) = exact_degeneracy(&a, cand, k, n_bound) {
                return Ok(LimitOutcome::Degenerate { n, exact: true });
            }
        } else {
            let g = RealDescriptor::from_quad(cand.clone());
            for n in 0..=n_bound {
                let terms = [(BigInt::one(), &g), (&kb * BigInt::from(n) * BigInt::from(n), alpha)];
                match form_cmp_threshold(&terms, &BigRational::zero()) {
                    Ok(Threshold::Above) => {}
                    Ok(_) => return Ok(LimitOutcome::Degenerate { n, exact: true }),
                    Err(e) if e.is_precision() => return Ok(LimitOutcome::Degenerate { n, exact: false }),
                    Err(e) => return Err(e),
                }
            }
        }
        let cf = cand.to_f64();
        let deviations: Vec<f64> = certs.iter().map(|c| (c.gamma.to_f64() - cf).abs()).collect();
        let last = *deviations.last().unwrap();
        let close = last <= 1.0 / certs.last().unwrap().n.to_f64().unwrap_or(f64::INFINITY);
        let shrinking = deviations.len() >= 2 && last < deviations[0];
        if !(close || shrinking) {
            return Err(Error::Precondition("certificates do not approach the candidate limit".into()));
        }
        return Ok(LimitOutcome::Limit(LimitObstruction {
            k,
            gamma_limit: GammaLimit::Exact(cand.to_string()),
            deviations,
            irrationality_checked_to: n_bound,
        }));
    }
    let g_last = certs.last().unwrap().gamma.to_f64();
    let spread = if certs.len() >= 2 {
        (g_last - certs[certs.len() - 2].gamma.to_f64()).abs()
    } else {
        1.0 / certs[0].n.to_f64().unwrap_or(1.0)
    }
    .max(1e-15);
    let (lo, hi) = (g_last - spread, g_last + spread);
    let (glo, ghi) = (BigRational::from_float(lo).unwrap(), BigRational::from_float(hi).unwrap());
    for n in 0..=n_bound {
        let m = &kb * BigInt::from(n) * BigInt::from(n);
        let (al, ah) = form_interval(&[(m, alpha)], 64)?;
        let (l, h) = (&glo + al, &ghi + ah);
        if l.ceil() <= h.floor() {
            return Ok(LimitOutcome::Degenerate { n, exact: false });
        }
    }
    let deviations = certs.iter().map(|c| (c.gamma.to_f64() - g_last).abs()).collect();
    Ok(LimitOutcome::Limit(LimitObstruction {
        k,
        gamma_limit: GammaLimit::Interval { lo, hi },
        deviations,
        irrationality_checked_to: n_bound,
    }))
}

/// Least q >= 1 with ||q alpha|| <= delta (always a convergent denominator).
pub fn q0(alpha: &RealDescriptor, delta: &BigRational) -> Result<BigInt> {
    if delta >= &BigRational::new(1.into(), 2.into()) {
        return Ok(BigInt::one());
    }
    if !delta.is_positive() && !alpha.is_rational() {
        return Err(Error::Precondition("delta must be positive for irrational alpha".into()));
    }
    let mut count = 16usize;
    let mut checked = 0usize;
    loop {
        let cf = expand(alpha, count)?;
        let conv = convergents(&cf, cf.len() - 1)?;
        for c in conv.iter().skip(checked) {
            if c.q.is_positive() && form_cmp_threshold(&[(c.q.clone(), alpha)], delta)?.within() {
                return Ok(c.q.clone());
            }
        }
        if cf.terminated {
            return Err(Error::Precondition("no q reaches delta".into()));
        }
        checked = conv.len();
        count *= 2;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapDiagnostic {
    #[serde(with = "crate::bitset::bigint_str")]
    pub l: BigInt,
    pub m: u64,
    /// ||m L alpha||
    pub norm: f64,
    /// k ||k' N' alpha|| + k' ||k N alpha||
    pub bound: f64,
    pub triangle_holds: bool,
    /// Least q with ||q alpha|| <= ||m L alpha||; m L >= q0 forces L >= q0 / m.
    #[serde(with = "crate::bitset::bigint_str")]
    pub q0: BigInt,
}

pub fn gap_bound_diagnostic(
    alpha: &RealDescriptor,
    n: &BigInt,
    n2: &BigInt,
    k: u64,
    k2: u64,
) -> Result<GapDiagnostic> {
    if n >= n2 {
        return Err(Error::Precondition("need N < N'".into()));
    }
    let l = n2 - n;
    let m = k * k2;
    let norm = fractional_distance(alpha, &(BigInt::from(m) * &l))?;
    let a = fractional_distance(alpha, &(BigInt::from(k2) * n2))?;
    let b = fractional_distance(alpha, &(BigInt::from(k) * n))?;
    let triangle_holds = match (&norm, &a, &b) {
        (
            FracDistance::Exact { value: v, .. },
            FracDistance::Exact { value: x, .. },
            FracDistance::Exact { value: y, .. },
        ) if v.same_field(x) && v.same_field(y) => {
            let rhs = x.scale(&BigInt::from(k)) + y.scale(&BigInt::from(k2));
            (rhs - v.clone()).signum() != Ordering::Less
        }
        _ => norm.lower() <= a.upper() * BigInt::from(k) + b.upper() * BigInt::from(k2),
    };
    let q = q0(alpha, &norm.upper())?;
    Ok(GapDiagnostic {
        l,
        m,
        norm: norm.to_f64(),
        bound: k as f64 * a.to_f64() + k2 as f64 * b.to_f64(),
        triangle_holds,
        q0: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_35() {
        let c = certify(&RealDescriptor::sqrt(2), &BigInt::from(35), 8).unwrap().unwrap();
        assert_eq!(c.k, 2);
        assert_eq!(c.m, BigInt::from(99));
        assert!((c.gamma.to_f64() + 0.1767).abs() < 1e-3);
        assert!((c.eps0_max_f64() - 0.2058).abs() < 1e-3);
    }

    #[test]
    fn even_n_rejected() {
        assert_eq!(certify(&RealDescriptor::sqrt(2), &BigInt::from(36), 8).unwrap_err(), Error::InvalidParity);
    }
}
