//! Test-side reference implementations. Nothing here calls into the
//! library's arithmetic: these are plain big-integer computations used to
//! freeze expected values and to cross-check.
#![allow(dead_code)]

use std::cmp::Ordering;

use num::{BigInt, Integer, One, Signed, Zero};

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Euclid on p/q (q > 0).
pub fn cf_rational(p: &BigInt, q: &BigInt) -> Vec<BigInt> {
    let (mut a, mut b) = (p.clone(), q.clone());
    let mut out = Vec::new();
    while !b.is_zero() {
        let (d, r) = a.div_mod_floor(&b);
        out.push(d);
        a = std::mem::replace(&mut b, r);
    }
    out
}

/// Classical expansion of sqrt(d) for non-square d: (a0, period).
pub fn cf_sqrt(d: u64) -> (u64, Vec<u64>) {
    let a0 = (d as f64).sqrt() as u64;
    let a0 = (a0.saturating_sub(2)..=a0 + 2).filter(|x| x * x <= d).max().unwrap();
    let (mut m, mut den, mut a) = (0u64, 1u64, a0);
    let mut period = Vec::new();
    loop {
        m = den * a - m;
        den = (d - m * m) / den;
        a = (a0 + m) / den;
        period.push(a);
        if a == 2 * a0 {
            return (a0, period);
        }
    }
}

/// Sign of u sqrt(d) - w.
pub fn sign_surd_minus(u: &BigInt, d: u64, w: &BigInt) -> Ordering {
    let us = u.signum();
    let ws = w.signum();
    match (us.is_positive(), us.is_zero(), ws.is_positive(), ws.is_zero()) {
        (_, true, _, _) => BigInt::zero().cmp(w),
        (true, false, false, _) => Ordering::Greater,
        (false, false, true, _) | (false, false, false, true) => Ordering::Less,
        _ => {
            let l = u * u * BigInt::from(d);
            let r = w * w;
            if us.is_positive() {
                l.cmp(&r)
            } else {
                r.cmp(&l)
            }
        }
    }
}

/// ||m sqrt(d)|| <= num/den, exactly (d not a square).
pub fn near_integer_sqrt(m: &BigInt, d: u64, num: &BigInt, den: &BigInt) -> bool {
    let m = m.abs();
    let x2 = &m * &m * BigInt::from(d);
    let fl = x2.sqrt();
    // x - fl <= eps  <=>  den x <= den fl + num
    let below = {
        let r = &fl * den + num;
        &x2 * den * den <= &r * &r
    };
    let above = {
        let r: BigInt = (&fl + 1) * den - num;
        r.is_negative() || &x2 * den * den >= &r * &r
    };
    below || above
}

/// Membership bitmap of {0 <= n <= t : ||n^deg sqrt(d)|| <= num/den}.
pub fn members_sqrt(d: u64, deg: u32, num: i64, den: i64, t: usize) -> Vec<bool> {
    let (num, den) = (big(num), big(den));
    (0..=t).map(|n| near_integer_sqrt(&num::pow(BigInt::from(n), deg as usize), d, &num, &den)).collect()
}

/// Sorted N in [0, t] that are not a sum of two members.
pub fn complement2(members: &[bool]) -> Vec<u64> {
    let t = members.len() - 1;
    let a: Vec<usize> = (0..=t).filter(|&i| members[i]).collect();
    let mut hit = vec![false; t + 1];
    for (i, &x) in a.iter().enumerate() {
        for &y in &a[i..] {
            if x + y > t {
                break;
            }
            hit[x + y] = true;
        }
    }
    (0..=t as u64).filter(|&n| !hit[n as usize]).collect()
}

/// Three-fold version of `complement2`.
pub fn complement3(members: &[bool]) -> Vec<u64> {
    let t = members.len() - 1;
    let a: Vec<usize> = (0..=t).filter(|&i| members[i]).collect();
    let mut two = vec![false; t + 1];
    for (i, &x) in a.iter().enumerate() {
        for &y in &a[i..] {
            if x + y > t {
                break;
            }
            two[x + y] = true;
        }
    }
    let mut three = vec![false; t + 1];
    for s in 0..=t {
        if two[s] {
            for &z in &a {
                if s + z > t {
                    break;
                }
                three[s + z] = true;
            }
        }
    }
    (0..=t as u64).filter(|&n| !three[n as usize]).collect()
}

/// Smallest (x, y) with x^2 - d y^2 = 1, y >= 1, by scanning y.
pub fn pell_scan(d: u64, y_max: u64) -> Option<(u64, u64)> {
    (1..=y_max).find_map(|y| {
        let x2 = 1 + d as u128 * y as u128 * y as u128;
        let x = (x2 as f64).sqrt() as u128;
        (x.saturating_sub(2)..=x + 2).find(|c| c * c == x2).map(|x| (x as u64, y))
    })
}

/// Best approximations of the second kind to sqrt(d): all (p, q) with
/// q <= q_max and |q sqrt d - p| < |q' sqrt d - p'| for every q' < q.
pub fn best_approximations_sqrt(d: u64, q_max: u64) -> Vec<(BigInt, BigInt)> {
    let mut out: Vec<(BigInt, BigInt)> = Vec::new();
    // current record (u, w) with |u sqrt d - w| minimal so far
    let mut record: Option<(BigInt, BigInt)> = None;
    for q in 1..=q_max {
        let qb = BigInt::from(q);
        let fl = (&qb * &qb * BigInt::from(d)).sqrt();
        let p = if sign_surd_minus(&(&qb * 2), d, &(&fl * 2 + 1)) == Ordering::Greater { fl + 1 } else { fl };
        // |q sqrt d - p| as s (q sqrt d - p)
        let s = if sign_surd_minus(&qb, d, &p) == Ordering::Less { -BigInt::one() } else { BigInt::one() };
        let (u, w) = (&s * &qb, &s * &p);
        let better = match &record {
            None => true,
            Some((ru, rw)) => sign_surd_minus(&(&u - ru), d, &(&w - rw)) == Ordering::Less,
        };
        if better {
            out.push((p, qb));
            record = Some((u, w));
        }
    }
    out
}

/// Golden ratio membership: ||n^2 (1 + sqrt 5)/2|| <= num/den.
pub fn members_golden(num: i64, den: i64, t: usize) -> Vec<bool> {
    // n^2 phi = (n^2 + n^2 sqrt 5) / 2 ; distance of that to Z equals
    // ||(n^2 + n^2 sqrt 5)/2||; scale: x = n^2 sqrt 5, target (x + n^2)/2.
    (0..=t)
        .map(|n| {
            let n2 = BigInt::from(n as u64 * n as u64);
            // ||(x + n2)/2|| <= e  <=>  ||x + n2 - 2j|| over odd/even... use:
            // (x + n2)/2 within e of integer j  <=>  x within 2e of 2j - n2
            let x2: BigInt = &n2 * &n2 * 5;
            let fl = x2.sqrt();
            let (num, den) = (big(num), big(den));
            // candidate integers c with c = n2 mod 2 near x
            let cands = [&fl - 1, fl.clone(), &fl + 1, &fl + 2];
            cands.iter().filter(|c| (*c - &n2).is_even()).any(|c| {
                // |x - c| <= 2 num/den
                let lo: BigInt = c * &den - &num * 2;
                let hi: BigInt = c * &den + &num * 2;
                let ok_hi = &x2 * &den * &den <= &hi * &hi;
                let ok_lo = lo.is_negative() || &x2 * &den * &den >= &lo * &lo;
                ok_hi && ok_lo
            })
        })
        .collect()
}
