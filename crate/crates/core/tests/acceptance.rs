//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num::{BigInt, BigRational, One, Signed, ToPrimitive};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use recbases::contfrac::*;
use recbases::equidist::orbit_hits;
use recbases::exceptional::*;
use recbases::higherdeg::*;
use recbases::obstruction::*;
use recbases::realkernel::*;
use recbases::recurrence::*;
use recbases::sumset::*;
use recbases::witnesses::*;

const SEED: u64 = 20240601;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn sqrt2() -> RealDescriptor {
    RealDescriptor::sqrt(2)
}

fn eps1() -> f64 {
    0.25 * (1.0 - 1.0 / (4.0 * 2f64.sqrt()))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_surd(rng: &mut StdRng, d_max: u64) -> RealDescriptor {
    loop {
        let d = rng.gen_range(2..=d_max);
        if d.isqrt_ok() {
            continue;
        }
        let a = rng.gen_range(-30i64..=30);
        let b = loop {
            let b = rng.gen_range(-9i64..=9);
            if b != 0 {
                break b;
            }
        };
        let c = rng.gen_range(1i64..=20);
        return RealDescriptor::surd(a, b, c, d).unwrap();
    }
}

trait Square {
    fn isqrt_ok(&self) -> bool;
}

impl Square for u64 {
    fn isqrt_ok(&self) -> bool {
        let s = num::integer::Roots::sqrt(self);
        s * s == *self
    }
}

fn random_big(rng: &mut StdRng, decimal_digits: usize) -> BigInt {
    let s: String = (0..decimal_digits).map(|i| char::from(b'0' + rng.gen_range(if i == 0 { 1 } else { 0 }..10u8))).collect();
    s.parse().unwrap()
}

fn complement_from(spec: &RecurrenceSetSpec, k: usize, t: u64, from: u64) -> Vec<u64> {
    complement(spec, k, t).unwrap().complement.into_iter().filter(|&n| n >= from).collect()
}

fn c1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut inputs = Vec::new();
    for _ in 0..10 {
        let q = random_big(&mut rng, 400);
        let p = random_big(&mut rng, 401);
        inputs.push(RealDescriptor::Rational(BigRational::new(p, q)));
    }
    for _ in 0..10 {
        inputs.push(random_surd(&mut rng, 50));
    }
    let mut bad = Vec::new();
    for x in &inputs {
        let cf = expand(x, 500).unwrap();
        let upto = cf.len().min(500) - 1;
        let c = convergents(&cf, upto).unwrap();
        for n in 0..c.len() - 1 {
            let det = &c[n].q * &c[n + 1].p - &c[n + 1].q * &c[n].p;
            let want = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            if det != want {
                bad.push(format!("{x} n={n}"));
                break;
            }
        }
        let surd = matches!(x, RealDescriptor::QuadraticSurd(_));
        if surd && (cf.period.is_none() || cf.len() < 500) {
            bad.push(format!("{x}: no period"));
        }
    }
    outcome(bad.is_empty(), format!("20 inputs x 500 digits, failures {bad:?}"))
}

fn c2() -> Outcome {
    let spec = RecurrenceSetSpec::monomial(sqrt2(), 2, r(1, 10)).unwrap();
    let found = complement_from(&spec, 2, 100_000, 10);
    let predicted = [35u64, 1189, 40391];
    let exact = found == predicted;
    let mut certs_ok = true;
    let mut last = 0.0;
    for &n in &predicted {
        match certify(&sqrt2(), &BigInt::from(n), 2).unwrap() {
            Some(c) if c.k == 2 => {
                let v = verify_certificate(&c, 100_000, &r(1, 10)).unwrap();
                certs_ok &= v == VerificationOutcome::AlgebraAndBruteForce;
                last = c.eps0_max_f64();
            }
            _ => certs_ok = false,
        }
    }
    let close = (last - eps1()).abs() <= 1e-3;
    outcome(
        exact && certs_ok && close,
        format!("complement in [10, 1e5] = {found:?}; certificates verified {certs_ok}; eps0_max(40391) = {last:.6} vs {:.6}", eps1()),
    )
}

fn c3() -> Outcome {
    let spec = RecurrenceSetSpec::monomial(sqrt2(), 2, r(1, 10)).unwrap();
    let found = complement_from(&spec, 3, 10_000, 10);
    outcome(found.is_empty(), format!("3-fold complement in [10, 1e4] = {found:?}"))
}

fn c4() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, alpha) in [("sqrt2", sqrt2()), ("golden", RealDescriptor::golden_ratio())] {
        let spec = RecurrenceSetSpec::monomial(alpha, 2, r(1, 10)).unwrap();
        let found = complement_from(&spec, 2, 100_000, 10);
        let bad: Vec<(u64, u64)> = found.windows(2).filter(|w| w[1] < 5 * w[0]).map(|w| (w[0], w[1])).collect();
        pass &= bad.is_empty();
        detail.push(format!("{name}: {} elements, pairs with ratio < 5: {bad:?}", found.len()));
    }
    outcome(pass, detail.join("; "))
}

fn c5() -> Outcome {
    let spec = RecurrenceSetSpec::monomial(sqrt2(), 2, r(1, 10)).unwrap();
    let rep = complement(&spec, 2, 100_000).unwrap();
    let counts: Vec<usize> = [1_000u64, 10_000, 100_000].iter().map(|&t| rep.complement.iter().filter(|&&n| n <= t).count()).collect();
    outcome(counts.windows(2).all(|w| w[1] <= w[0] + 2), format!("counts at 1e3, 1e4, 1e5 = {counts:?}"))
}

fn c6() -> Outcome {
    let opts = WitnessOptions::default();
    let mut records = pell_witnesses_sqrt2(4, &opts).unwrap();
    for q in ["surd:(1+1*sqrt(5))/2", "surd:(0+1*sqrt(3))/1", "surd:(0+1*sqrt(7))/1", "surd:(1+3*sqrt(7))/4"] {
        let x: RealDescriptor = q.parse().unwrap();
        let RealDescriptor::QuadraticSurd(s) = &x else { unreachable!() };
        records.extend(pell_witnesses_surd(s, 3, &opts).unwrap());
    }
    for x in [sqrt2(), RealDescriptor::golden_ratio(), RealDescriptor::sqrt(3), RealDescriptor::sqrt(11)] {
        records.extend(badapprox_witnesses(&x, 10, &BigInt::from(100), &opts).unwrap());
    }
    // 2 alpha with planted (5,5,5) blocks
    let mut digits = vec![BigInt::from(0)];
    for _ in 0..6 {
        digits.extend([1, 2, 1, 1, 2, 5, 5, 5, 2, 1].map(BigInt::from));
    }
    digits.push(BigInt::from(3));
    let mut v = BigRational::from_integer(digits.last().unwrap().clone());
    for d in digits.iter().rev().skip(1) {
        v = BigRational::from_integer(d.clone()) + v.recip();
    }
    let planted = RealDescriptor::Rational(v / BigInt::from(2));
    records.extend(generic_witnesses(&planted, 5, 20, digits.len() - 5, &opts).unwrap());

    let mut checked = 0;
    let mut refuted = Vec::new();
    for rec in &records {
        let Some(n) = rec.n.to_u64().filter(|&n| n <= 10_000) else { continue };
        checked += 1;
        let alpha = &rec.certificate.alpha;
        if orbit_hits(alpha, n, &soundness_eps(rec)).unwrap().is_some() {
            refuted.push(format!("{} N={n}", rec.certificate.alpha));
        }
    }
    let g = gamma_construct(3, BigInt::from(11), BigRational::from_integer(4.into()), "0101", 4).unwrap();
    let hd = verify_highdeg_witness(&g.alpha, &g.n_sequence[0], 3, &r(1, 5)).unwrap();
    checked += 1;
    if hd.outcome != VerificationOutcome::AlgebraAndBruteForce {
        refuted.push("gamma N_1".into());
    }
    outcome(checked > 10 && refuted.is_empty(), format!("{checked} certificates with N <= 1e4, refuted {refuted:?}"))
}

fn c7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 7);
    let mut mismatches = Vec::new();
    for _ in 0..100 {
        let alpha = random_surd(&mut rng, 50);
        let n = rng.gen_range(1..=5000u64);
        let eps = r(rng.gen_range(5..=250), 1000);
        let spec = RecurrenceSetSpec::monomial(alpha.clone(), 2, eps.clone()).unwrap();
        let s = sumset_bitmap(&enumerate(&spec, n).unwrap(), 2).unwrap();
        if s.get(n as usize) != orbit_hits(&alpha, n, &eps).unwrap().is_some() {
            mismatches.push(format!("{alpha} N={n} eps={eps}"));
        }
    }
    outcome(mismatches.is_empty(), format!("100 triples, mismatches {mismatches:?}"))
}

fn c8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 8);
    let mut worst = [0.0f64; 3];
    let mut pass = true;
    for _ in 0..10 {
        let x = random_surd(&mut rng, 50);
        let cf = expand(&x, 60).unwrap();
        for n in 20..=40usize {
            let exact = error_term(&x, n).unwrap().delta.to_f64();
            for (slot, l) in [4usize, 8, 12].into_iter().enumerate() {
                let window: Vec<BigInt> = (n - l..=n + l).map(|i| cf.digit(i).unwrap().clone()).collect();
                let est = delta_estimate(&window, n % 2 == 1, l).unwrap().to_f64().unwrap();
                let err = (exact - est).abs();
                let bound = 8.0 * 2f64.powf(-(l as f64) / 2.0);
                pass &= err <= bound;
                worst[slot] = worst[slot].max(err / bound);
            }
        }
    }
    outcome(pass, format!("worst error / bound for l = 4, 8, 12: {worst:.4?}"))
}

fn c9() -> Outcome {
    let plan = ExceptionalAlphaPlan::default();
    let alpha = construct_exceptional(&plan, 200).unwrap();
    let cond = verify_conditions(&alpha, 200, 3, Some(&plan)).unwrap();
    let stream = exceptional_stream(plan).unwrap();
    let basis = basis_check(&stream, &r(1, 10), 10_000).unwrap();
    let window: Vec<u64> = basis.complement.iter().copied().filter(|&n| n >= 50).collect();
    outcome(
        cond.pass && window.is_empty(),
        format!(
            "conditions pass {}; complement in [50, 1e4] = {window:?}; empty from {}; growth mid {:.3} tail {:.3}",
            cond.pass, basis.tail_empty_from, cond.growth_mid, cond.growth_tail
        ),
    )
}

fn c10() -> Outcome {
    let g = gamma_construct(3, BigInt::from(11), BigRational::from_integer(4.into()), "0101", 4).unwrap();
    let n1 = &g.n_sequence[0];
    let hd = verify_highdeg_witness(&g.alpha, n1, 3, &r(1, 5)).unwrap();
    let gamma_ok = g.check() && n1 <= &BigInt::from(10_000) && hd.outcome == VerificationOutcome::AlgebraAndBruteForce;
    let sched = EpsilonSchedule::constant(r(1, 10)).unwrap();
    let rep = complement_survey_highdeg(&sqrt2(), 3, sched, 10_000, 2).unwrap();
    let window: Vec<u64> = rep.complement.iter().copied().filter(|&n| n >= 50).collect();
    outcome(
        gamma_ok && window.is_empty(),
        format!("gamma N_1 = {n1} confirmed {gamma_ok}; sqrt2 cubic complement in [50, 1e4] = {window:?}"),
    )
}

fn c11() -> Outcome {
    let x = sqrt2();
    let cf = expand(&x, 20).unwrap();
    let conv = convergents(&cf, 19).unwrap();
    let mut predicted: Vec<(BigInt, BigInt)> =
        conv.iter().filter(|c| c.q <= BigInt::from(1000)).map(|c| (c.p.clone(), c.q.clone())).collect();
    predicted.dedup_by(|a, b| a.1 == b.1);
    // exhaustive: record-setting |q x - p| over all q <= 1000, p nearest
    let mut found = Vec::new();
    let mut best: Option<(BigInt, BigInt)> = None;
    for q in 1..=1000i64 {
        let qb = BigInt::from(q);
        let sq: BigInt = &qb * &qb * 2;
        let p = sq.sqrt_floor_round();
        let better = match &best {
            None => true,
            Some((bp, bq)) => {
                let lhs = [(qb.clone(), &x), (-&p, &RealDescriptor::integer(1))];
                let rhs = [(bq.clone(), &x), (-bp, &RealDescriptor::integer(1))];
                let a = form_frac_distance_abs(&lhs);
                let b = form_frac_distance_abs(&rhs);
                a < b
            }
        };
        if better {
            best = Some((p.clone(), qb.clone()));
            found.push((p, qb));
        }
    }
    outcome(found == predicted, format!("{} best approximations, convergent prediction {}", found.len(), predicted.len()))
}

trait SqrtRound {
    fn sqrt_floor_round(&self) -> BigInt;
}

impl SqrtRound for BigInt {
    /// Nearest integer to sqrt(self).
    fn sqrt_floor_round(&self) -> BigInt {
        let f = num::integer::Roots::sqrt(self);
        // sqrt(n) > f + 1/2 iff 4n > (2f+1)^2
        let t: BigInt = &f * 2 + 1;
        if self * 4 > &t * &t {
            f + 1
        } else {
            f
        }
    }
}

/// |sum c_j x_j| as an exact or enclosed value, compared through its interval.
fn form_frac_distance_abs(terms: &[(BigInt, &RealDescriptor)]) -> Ordered {
    let (lo, hi) = form_interval(terms, 200).unwrap();
    Ordered(if lo.is_negative() { -hi } else { lo })
}

#[derive(PartialEq, PartialOrd)]
struct Ordered(BigRational);

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 continued-fraction exactness", c1, Duration::from_secs(10)),
        ("2 sqrt2 witness reproduction", c2, Duration::from_secs(120)),
        ("3 order-3 coverage", c3, Duration::from_secs(60)),
        ("4 gap growth", c4, Duration::MAX),
        ("5 complement-count scaling", c5, Duration::MAX),
        ("6 certificate soundness", c6, Duration::MAX),
        ("7 oracle equivalence", c7, Duration::MAX),
        ("8 delta estimator", c8, Duration::MAX),
        ("9 exceptional alpha", c9, Duration::MAX),
        ("10 higher degree", c10, Duration::MAX),
        ("11 best approximations", c11, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, f, budget) in criteria {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= budget;
        if !pass {
            failed += 1;
        }
        println!("{} criterion {name} ({:.2}s): {}", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64(), o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
