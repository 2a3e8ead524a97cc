//! Explicit complement witnesses: Pell-based for quadratic surds, selected
//! convergents of 2 alpha for bounded-digit alpha, and (A, A, A) digit
//! patterns for generic alpha.

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::contfrac::{convergents, expand_scaled, surd_period, CfExpansion, Convergent};
use crate::error::{Error, Result};
use crate::obstruction::{certificate_for, ObstructionCertificate};
use crate::quad::squarefree_split;
use crate::realkernel::{QuadSurd, RealDescriptor};

pub const DEFAULT_FLOOR: u64 = 10;
/// Digit horizon beyond which the convergent-based generators give up.
pub const MAX_SCAN_DIGITS: usize = 1 << 12;

#[derive(Clone, Debug)]
pub struct WitnessOptions {
    /// Witnesses with N below this are dropped.
    pub floor: u64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions { floor: DEFAULT_FLOOR }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family")]
pub enum Provenance {
    PellSqrt2 { i: usize },
    /// `i` counts powers of the unit phi = (x + y sqrt d)^base_power.
    PellSurd { i: usize, base_power: u32, mu: u64, period: usize },
    BadApprox { i: usize, kappa: u32, k: u64 },
    Generic { j: usize, a: u64, i: usize },
    HighDeg { level: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessRecord {
    #[serde(rename = "N", with = "crate::bitset::bigint_str")]
    pub n: BigInt,
    pub provenance: Provenance,
    pub certificate: ObstructionCertificate,
    /// A priori bound on |gamma| from the construction, when it has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_bound: Option<f64>,
}

fn nu2(n: &BigInt) -> u64 {
    if n.is_zero() {
        u64::MAX
    } else {
        n.trailing_zeros().unwrap_or(0)
    }
}

/// Least solution x + y sqrt(d) > 1 of x^2 - d y^2 = 1.
pub fn pell_fundamental(d: &BigInt) -> Result<(BigInt, BigInt)> {
    match squarefree_split(d) {
        Some((s, r)) if s.is_one() && r > BigInt::one() => {}
        _ => return Err(Error::Precondition(format!("pell: d = {d} is not squarefree >= 2"))),
    }
    let root = QuadSurd::sqrt(d.clone());
    let (mut digits, period) = surd_period(&root)?;
    // one period after a0 gives x^2 - d y^2 = (-1)^len; two periods always give +1
    let per: Vec<BigInt> = digits[period.start..period.start + period.len].to_vec();
    digits.truncate(period.start);
    digits.extend(per.iter().cloned());
    digits.extend(per.iter().cloned());
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (digits[0].clone(), BigInt::one());
    for a in &digits[1..] {
        if &p1 * &p1 - d * &q1 * &q1 == BigInt::one() {
            return Ok((p1, q1));
        }
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    debug_assert!(&p1 * &p1 - d * &q1 * &q1 == BigInt::one());
    Ok((p1, q1))
}

/// Powers (x + y sqrt d)^i = a_i + b_i sqrt d of a Pell unit.
#[derive(Clone, Debug)]
pub struct PellSequence {
    pub d: BigInt,
    pub x: BigInt,
    pub y: BigInt,
    a: Vec<BigInt>,
    b: Vec<BigInt>,
}

impl PellSequence {
    pub fn new(d: BigInt) -> Result<Self> {
        let (x, y) = pell_fundamental(&d)?;
        Ok(Self::from_unit(d, x, y))
    }

    pub fn from_unit(d: BigInt, x: BigInt, y: BigInt) -> Self {
        PellSequence { a: vec![BigInt::one(), x.clone()], b: vec![BigInt::zero(), y.clone()], d, x, y }
    }

    /// (a_i, b_i), extending by a_{i+2} = 2x a_{i+1} - a_i.
    pub fn term(&mut self, i: usize) -> (BigInt, BigInt) {
        let two_x = &self.x * 2;
        while self.a.len() <= i {
            let n = self.a.len();
            let a = &two_x * &self.a[n - 1] - &self.a[n - 2];
            let b = &two_x * &self.b[n - 1] - &self.b[n - 2];
            self.a.push(a);
            self.b.push(b);
        }
        (self.a[i].clone(), self.b[i].clone())
    }

    pub fn mu(&self) -> u64 {
        nu2(&self.y)
    }

    /// The unit squared: (x^2 + d y^2) + 2xy sqrt d.
    pub fn squared(&self) -> PellSequence {
        let x = &self.x * &self.x + &self.d * &self.y * &self.y;
        let y = &self.x * &self.y * 2;
        PellSequence::from_unit(self.d.clone(), x, y)
    }
}

/// N_i = b_i / 2 for odd i >= 3 with b from (3 + 2 sqrt 2)^i, each with a
/// k = 2 certificate.
pub fn pell_witnesses_sqrt2(count: usize, opts: &WitnessOptions) -> Result<Vec<WitnessRecord>> {
    if count == 0 {
        return Err(Error::Precondition("count must be >= 1".into()));
    }
    let alpha = RealDescriptor::sqrt(2);
    let mut seq = PellSequence::from_unit(BigInt::from(2), BigInt::from(3), BigInt::from(2));
    let mut out = Vec::with_capacity(count);
    let mut i = 3;
    while out.len() < count {
        let (a, b) = seq.term(i);
        let n = b / 2;
        if n >= BigInt::from(opts.floor) {
            let cert = certificate_for(&alpha, &n, 2, &a)?
                .ok_or_else(|| Error::Precondition(format!("witnesses: no certificate at i = {i}")))?;
            out.push(WitnessRecord { n, provenance: Provenance::PellSqrt2 { i }, certificate: cert, gamma_bound: None });
        }
        i += 2;
    }
    Ok(out)
}

/// Witnesses for alpha = (a + b sqrt d)/c from powers of a Pell unit whose
/// y has 2-adic valuation mu > v2(b) with 2^mu > |b| c.
pub fn pell_witnesses_surd(alpha: &QuadSurd, count: usize, opts: &WitnessOptions) -> Result<Vec<WitnessRecord>> {
    if alpha.is_rational() {
        return Err(Error::DegenerateAlpha);
    }
    if count == 0 {
        return Err(Error::Precondition("count must be >= 1".into()));
    }
    let (a, b, c, d) = (&alpha.a, &alpha.b, &alpha.c, &alpha.d);
    let (vb, vc) = (nu2(b), nu2(c));
    let bc = b.abs() * c;
    let mut base = PellSequence::new(d.clone())?;
    let mut base_power = 1u32;
    while !(base.mu() > vb && (BigInt::one() << base.mu()) > bc) {
        base = base.squared();
        base_power *= 2;
    }
    let mu = base.mu();
    // indices i = 1 + jL keep v2(y_i) = mu
    let period = (1..=8usize)
        .find(|&l| (0..8).all(|j| nu2(&base.term(1 + j * l).1) == mu))
        .unwrap_or(0);
    if period == 0 {
        return Err(Error::Precondition("witnesses: 2-adic valuations never stabilise".into()));
    }
    let k_exp = vc + mu - vb;
    let k = 1u64.checked_shl(k_exp as u32).filter(|_| k_exp < 63).ok_or_else(|| {
        Error::Precondition(format!("witnesses: modulus 2^{k_exp} too large"))
    })?;
    let n_div = BigInt::one() << (vc + mu);
    let m_div = BigInt::one() << vb;
    let alpha_d = RealDescriptor::from_quad(alpha.clone());
    let mut out = Vec::with_capacity(count);
    let mut i = 1usize;
    let mut tries = 0usize;
    while out.len() < count {
        let (x_i, y_i) = base.term(i);
        let (n, nr) = (c * &y_i).div_rem(&n_div);
        let (m, mr) = (a * &y_i + b * &x_i).div_rem(&m_div);
        if !nr.is_zero() || !mr.is_zero() {
            return Err(Error::Precondition(format!("witnesses: non-integral N or m at i = {i}")));
        }
        if n >= BigInt::from(opts.floor) {
            if let Some(cert) = certificate_for(&alpha_d, &n, k, &m)? {
                out.push(WitnessRecord {
                    n,
                    provenance: Provenance::PellSurd { i, base_power, mu, period },
                    certificate: cert,
                    gamma_bound: None,
                });
            }
        }
        i += period;
        tries += 1;
        if tries > 64 * count + 64 {
            break;
        }
    }
    Ok(out)
}

fn expansion_of_double(alpha: &RealDescriptor, count: usize) -> Result<CfExpansion> {
    expand_scaled(alpha, &BigInt::from(2), count)
}

fn check_digits(cf: &CfExpansion, digit_bound: &BigInt) -> Result<()> {
    for (i, a) in cf.digits.iter().enumerate() {
        if a > digit_bound {
            return Err(Error::UnboundedDigits { index: i + 1, digit: a.to_string() });
        }
    }
    Ok(())
}

/// One witness per block of 4 consecutive convergent indices of 2 alpha:
/// the first i with p_i odd and v2(q_i) < kappa gives N = q_i / 2^v2(q_i),
/// k = 2^(v2(q_i)+1), m = p_i.
pub fn badapprox_witnesses(
    alpha: &RealDescriptor,
    count: usize,
    digit_bound: &BigInt,
    opts: &WitnessOptions,
) -> Result<Vec<WitnessRecord>> {
    if count == 0 {
        return Err(Error::Precondition("count must be >= 1".into()));
    }
    let mut horizon = 8 * count + 16;
    loop {
        let cf = expansion_of_double(alpha, horizon)?;
        check_digits(&cf, digit_bound)?;
        let kappa = cf.digits.iter().map(nu2).max().unwrap_or(0) as u32 + 1;
        let upto = cf.len() - 1;
        let conv = convergents(&cf, upto)?;
        let mut out = Vec::new();
        for block in conv.chunks(4) {
            if out.len() == count {
                break;
            }
            let pick = block.iter().find(|c| c.p.is_odd() && nu2(&c.q) < kappa as u64);
            let Some(Convergent { n: i, p, q }) = pick else { continue };
            let v = nu2(q);
            let n = q >> v;
            if n < BigInt::from(opts.floor) || v >= 62 {
                continue;
            }
            let k = 1u64 << (v + 1);
            if let Some(cert) = certificate_for(alpha, &n, k, p)? {
                out.push(WitnessRecord {
                    n,
                    provenance: Provenance::BadApprox { i: *i as usize, kappa, k },
                    certificate: cert,
                    gamma_bound: None,
                });
            }
        }
        if out.len() >= count || cf.terminated || horizon >= MAX_SCAN_DIGITS {
            return Ok(out);
        }
        horizon *= 2;
    }
}

/// Witnesses at occurrences a_{j+1} = a_{j+2} = a_{j+3} = A in the digits
/// of 2 alpha: N = q_i, k = 2, m = p_i for the first i in {j, j+1, j+2}
/// with p_i, q_i both odd; |gamma| < 1/A.
pub fn generic_witnesses(
    alpha: &RealDescriptor,
    a: u64,
    count: usize,
    scan_limit: usize,
    opts: &WitnessOptions,
) -> Result<Vec<WitnessRecord>> {
    if a < 3 || a.is_multiple_of(2) {
        return Err(Error::Precondition("A must be odd and >= 3".into()));
    }
    if count == 0 {
        return Err(Error::Precondition("count must be >= 1".into()));
    }
    let cf = match expansion_of_double(alpha, scan_limit + 4) {
        Ok(cf) => cf,
        Err(Error::PrecisionExhausted { available, .. }) if available > 4 => {
            expansion_of_double(alpha, available as usize)?
        }
        Err(e) => return Err(e),
    };
    let target = BigInt::from(a);
    let upto = cf.len() - 1;
    let conv = convergents(&cf, upto)?;
    let mut found_pattern = false;
    let mut out: Vec<WitnessRecord> = Vec::new();
    for j in 0..upto.saturating_sub(2) {
        if out.len() == count {
            break;
        }
        if !(1..=3).all(|t| cf.digit(j + t) == Some(&target)) {
            continue;
        }
        found_pattern = true;
        let Some(c) = conv[j..j + 3].iter().find(|c| c.p.is_odd() && c.q.is_odd()) else {
            continue;
        };
        if c.q < BigInt::from(opts.floor) || out.iter().any(|w| w.n == c.q) {
            continue;
        }
        if let Some(cert) = certificate_for(alpha, &c.q, 2, &c.p)? {
            out.push(WitnessRecord {
                n: c.q.clone(),
                provenance: Provenance::Generic { j, a, i: c.n as usize },
                certificate: cert,
                gamma_bound: Some(1.0 / a as f64),
            });
        }
    }
    if !found_pattern {
        return Err(Error::PatternNotFound { scanned: upto });
    }
    Ok(out)
}

/// Smallest N ever emitted for alpha by any family, for reports.
pub fn min_n(records: &[WitnessRecord]) -> Option<u64> {
    records.iter().filter_map(|r| r.n.to_u64()).min()
}

/// eps0 at which a record is checked by brute force: half the certified maximum.
pub fn soundness_eps(r: &WitnessRecord) -> BigRational {
    &r.certificate.eps0_max / BigInt::from(2)
}
