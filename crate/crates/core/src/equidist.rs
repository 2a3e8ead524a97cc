//! Orbit hit-testing on the torus, Weyl sums, frequency-scan verdicts and
//! the C-infinity[N] norm of k p(n) + l p(N - n).

use num::integer::binomial;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::realkernel::{form_frac_distance, form_interval, RealDescriptor};
use crate::recurrence::{enumerate, RecurrenceSetSpec};

/// Least n in [0, N] with ||n^2 alpha|| <= eps0 and ||(N-n)^2 alpha|| <= eps0.
pub fn orbit_hits(alpha: &RealDescriptor, n: u64, eps0: &BigRational) -> Result<Option<u64>> {
    if n == 0 {
        return Err(Error::Precondition("N must be >= 1".into()));
    }
    let spec = RecurrenceSetSpec::monomial(alpha.clone(), 2, eps0.clone())?;
    let m = enumerate(&spec, n)?;
    Ok((0..=n).find(|&a| m.get(a as usize) && m.get((n - a) as usize)))
}

const FIX_BITS: u64 = 128;
const WEYL_CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylResult {
    pub re: f64,
    pub im: f64,
    /// |(1/N) sum_{n <= N} e(phase(n))|
    pub magnitude: f64,
    /// Bound on the error of `magnitude`.
    pub error_bound: f64,
}

/// Fractional part of k * x as a 0.128 fixed-point number, and an upper
/// bound on its error in units of 2^-128.
fn fixed_coeff(k: i64, x: &RealDescriptor) -> Result<(u128, u128)> {
    let (lo, hi) = form_interval(&[(BigInt::from(k), x)], FIX_BITS + 64)?;
    let scale = BigInt::one() << FIX_BITS;
    let frac = |r: &BigRational| {
        let f = r - r.floor();
        (f.numer() * &scale / f.denom()).to_u128().unwrap_or(u128::MAX)
    };
    let err = ((&hi - &lo) * BigRational::from_integer(scale.clone())).ceil().to_integer();
    Ok((frac(&lo), err.to_u128().unwrap_or(u128::MAX).saturating_add(1)))
}

fn pow_wrapping(n: u64, d: u32) -> u128 {
    (0..d).fold(1u128, |acc, _| acc.wrapping_mul(n as u128))
}

/// |(1/N) sum_{n=1}^N e(sum_j freq_j alpha_j n^{d_j})| with compensated
/// summation in a fixed chunk order.
pub fn weyl_sum(poly: &[(u32, RealDescriptor)], freq: &[i64], n: u64) -> Result<WeylResult> {
    if n == 0 {
        return Err(Error::Precondition("N must be >= 1".into()));
    }
    if poly.len() != freq.len() {
        return Err(Error::Precondition("one frequency per term".into()));
    }
    let mut coeffs = Vec::new();
    let mut phase_err = 0f64;
    for ((d, x), &k) in poly.iter().zip(freq) {
        if k == 0 {
            continue;
        }
        let (c, e) = fixed_coeff(k, x)?;
        if c != 0 || e > 1 {
            coeffs.push((*d, c));
        }
        phase_err += e as f64 * (n as f64).powi(*d as i32) * 2f64.powi(-(FIX_BITS as i32));
    }
    let chunks = n.div_ceil(WEYL_CHUNK);
    let partial: Vec<(f64, f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut re, mut rc, mut im, mut ic) = (0.0, 0.0, 0.0, 0.0);
            for m in (c * WEYL_CHUNK + 1)..=((c + 1) * WEYL_CHUNK).min(n) {
                let ph = coeffs.iter().fold(0u128, |acc, (d, cf)| acc.wrapping_add(cf.wrapping_mul(pow_wrapping(m, *d))));
                let t = (ph >> 64) as f64 * 2f64.powi(-64) * std::f64::consts::TAU;
                neumaier(&mut re, &mut rc, t.cos());
                neumaier(&mut im, &mut ic, t.sin());
            }
            (re, rc, im, ic)
        })
        .collect();
    let (mut re, mut rc, mut im, mut ic) = (0.0, 0.0, 0.0, 0.0);
    for (a, b, c, d) in partial {
        neumaier(&mut re, &mut rc, a);
        neumaier(&mut re, &mut rc, b);
        neumaier(&mut im, &mut ic, c);
        neumaier(&mut im, &mut ic, d);
    }
    let (re, im) = ((re + rc) / n as f64, (im + ic) / n as f64);
    // per term: phase truncation to 64 bits, cos/sin rounding, coefficient error
    let per_term = std::f64::consts::TAU * (2f64.powi(-64) + phase_err) + 4.0 * f64::EPSILON;
    Ok(WeylResult { re, im, magnitude: re.hypot(im), error_bound: per_term + 4.0 * f64::EPSILON })
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    LooksEquidistributed { checked: usize },
    Obstruction { freq: Vec<i64>, magnitude: f64, borderline: bool },
}

/// Nonzero frequency vectors with entries in [-cap, cap], by increasing
/// max-norm and lexicographically within a norm.
pub fn frequency_order(terms: usize, cap: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if terms == 0 {
        return out;
    }
    for r in 1..=cap {
        let mut v = vec![-r; terms];
        'odometer: loop {
            if v.iter().any(|x| x.abs() == r) {
                out.push(v.clone());
            }
            for i in (0..terms).rev() {
                if v[i] < r {
                    v[i] += 1;
                    v[i + 1..].iter_mut().for_each(|x| *x = -r);
                    continue 'odometer;
                }
            }
            break;
        }
    }
    out
}

/// First frequency (in `frequency_order`) whose Weyl magnitude exceeds delta.
pub fn equidist_verdict(poly: &[(u32, RealDescriptor)], n: u64, delta: f64, freq_cap: i64) -> Result<Verdict> {
    if freq_cap < 1 {
        return Err(Error::Precondition("freq_cap must be >= 1".into()));
    }
    let freqs = frequency_order(poly.len(), freq_cap);
    for f in &freqs {
        let w = weyl_sum(poly, f, n)?;
        if w.magnitude > delta {
            return Ok(Verdict::Obstruction {
                freq: f.clone(),
                magnitude: w.magnitude,
                borderline: w.magnitude - w.error_bound <= delta,
            });
        }
    }
    Ok(Verdict::LooksEquidistributed { checked: freqs.len() })
}

/// Frequency table as CSV rows `k1;k2;...,magnitude`.
pub fn weyl_table_csv(poly: &[(u32, RealDescriptor)], n: u64, freq_cap: i64) -> Result<String> {
    let mut s = String::from("freq,magnitude\n");
    for f in frequency_order(poly.len(), freq_cap) {
        let w = weyl_sum(poly, &f, n)?;
        let key: Vec<String> = f.iter().map(|k| k.to_string()).collect();
        s.push_str(&format!("{},{:.12}\n", key.join(";"), w.magnitude));
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoeffNorm {
    pub degree: u32,
    /// Bounds on ||beta_j||.
    pub dist_lo: f64,
    pub dist_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessNorm {
    #[serde(rename = "N")]
    pub n: u64,
    pub k: i64,
    pub l: i64,
    pub coefficients: Vec<CoeffNorm>,
    /// max_j N^j ||beta_j|| over all j.
    pub value: f64,
    /// The same maximum over j >= 1.
    pub value_nonconstant: f64,
    /// ||(k + (-1)^d l) alpha_d||
    pub leading: f64,
    /// ||beta_{d-1}||, where beta_{d-1} = k alpha_{d-1} + (-1)^{d-1} l (alpha_{d-1} + d N alpha_d).
    pub subleading: f64,
}

/// beta_j for k p(n) + l p(N - n) as an integer form in the alpha_i.
fn beta_terms(poly: &[(u32, RealDescriptor)], j: u32, n: u64, k: i64, l: i64) -> Vec<(BigInt, &RealDescriptor)> {
    let nb = BigInt::from(n);
    let sign = if j.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let mut out = Vec::new();
    for (i, a) in poly {
        if *i < j {
            continue;
        }
        let mut c = BigInt::from(l) * binomial(BigInt::from(*i), BigInt::from(j)) * num::pow(nb.clone(), (*i - j) as usize) * &sign;
        if *i == j {
            c += BigInt::from(k);
        }
        if !c.is_zero() {
            out.push((c, a));
        }
    }
    out
}

fn dist_bounds(terms: &[(BigInt, &RealDescriptor)]) -> Result<(BigRational, BigRational)> {
    if terms.is_empty() {
        return Ok((BigRational::zero(), BigRational::zero()));
    }
    let d = form_frac_distance(terms)?;
    Ok((d.lower(), d.upper()))
}

fn smoothness_one(poly: &[(u32, RealDescriptor)], n: u64, k: i64, l: i64) -> Result<SmoothnessNorm> {
    let deg = poly.iter().map(|(d, _)| *d).max().unwrap_or(0);
    let mut coefficients = Vec::new();
    let (mut value, mut value_nonconstant) = (0f64, 0f64);
    let (mut leading, mut subleading) = (0f64, 0f64);
    for j in 0..=deg {
        let terms = beta_terms(poly, j, n, k, l);
        let (lo, hi) = dist_bounds(&terms)?;
        let (lo, hi) = (lo.to_f64().unwrap_or(0.0), hi.to_f64().unwrap_or(0.5));
        let weighted = (n as f64).powi(j as i32) * hi;
        value = value.max(weighted);
        if j >= 1 {
            value_nonconstant = value_nonconstant.max(weighted);
        }
        if j == deg {
            leading = hi;
        }
        if deg >= 1 && j == deg - 1 {
            subleading = hi;
        }
        coefficients.push(CoeffNorm { degree: j, dist_lo: lo, dist_hi: hi });
    }
    Ok(SmoothnessNorm { n, k, l, coefficients, value, value_nonconstant, leading, subleading })
}

/// C-infinity[N] norms of k p(n) + l p(N - n) over the given ranges,
/// (0, 0) skipped, smallest norm (ignoring the constant term) first.
pub fn smoothness_obstruction(
    poly: &[(u32, RealDescriptor)],
    n: u64,
    k_range: std::ops::RangeInclusive<i64>,
    l_range: std::ops::RangeInclusive<i64>,
) -> Result<Vec<SmoothnessNorm>> {
    if k_range.is_empty() || l_range.is_empty() || poly.is_empty() {
        return Err(Error::Precondition("empty range or polynomial".into()));
    }
    let pairs: Vec<(i64, i64)> = k_range
        .flat_map(|k| l_range.clone().map(move |l| (k, l)))
        .filter(|&p| p != (0, 0))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Precondition("(k, l) = (0, 0) is excluded".into()));
    }
    let mut out = pairs
        .par_iter()
        .map(|&(k, l)| smoothness_one(poly, n, k, l))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| {
        a.value_nonconstant
            .total_cmp(&b.value_nonconstant)
            .then(a.k.abs().max(a.l.abs()).cmp(&b.k.abs().max(b.l.abs())))
            .then((a.k, a.l).cmp(&(b.k, b.l)))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_ordered() {
        let f = frequency_order(2, 1);
        assert_eq!(f.len(), 8);
        assert_eq!(f[0], vec![-1, -1]);
        assert_eq!(frequency_order(1, 2), vec![vec![-1], vec![1], vec![-2], vec![2]]);
    }

    #[test]
    fn zero_frequency_is_one() {
        let w = weyl_sum(&[(1, RealDescriptor::sqrt(2))], &[0], 1000).unwrap();
        assert_eq!(w.magnitude, 1.0);
    }
}
