//! Property tests for the invariants of each module.

mod common;

use num::integer::Roots;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use recbases::contfrac::*;
use recbases::equidist::*;
use recbases::exceptional::*;
use recbases::higherdeg::*;
use recbases::obstruction::*;
use recbases::realkernel::*;
use recbases::recurrence::*;
use recbases::sumset::*;
use recbases::witnesses::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn b(n: i64) -> BigInt {
    BigInt::from(n)
}

fn is_square(d: u64) -> bool {
    let s = d.sqrt();
    s * s == d
}

/// (a + b sqrt d) / c with d not a square and b != 0.
fn surd() -> impl Strategy<Value = (i64, i64, i64, u64)> {
    (-50i64..50, (-20i64..20).prop_filter("b", |b| *b != 0), 1i64..30, 2u64..60)
        .prop_filter("square", |t| !is_square(t.3))
}

fn surd_desc(t: (i64, i64, i64, u64)) -> RealDescriptor {
    RealDescriptor::surd(t.0, t.1, t.2, t.3).unwrap()
}

/// floor(x * 2^bits) for x = (a + b sqrt d) / c, computed from an integer
/// square root.
fn scaled_floor(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt, bits: u32) -> BigInt {
    let s = BigInt::one() << bits;
    let rad = b * b * d * &s * &s;
    let root = rad.sqrt();
    let exact = &root * &root == rad;
    let t = if b.is_negative() {
        if exact { -root } else { -root - 1 }
    } else {
        root
    };
    (a * &s + t).div_floor(c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fractional_distance_matches_isqrt_oracle(t in surd(), m in -1_000_000_000i64..1_000_000_000) {
        let x = surd_desc(t);
        let RealDescriptor::QuadraticSurd(q) = &x else { unreachable!() };
        let bits = 80;
        let f = scaled_floor(&(&q.a * m), &(&q.b * m), &q.c, &q.d, bits);
        let one = BigInt::one() << bits;
        let frac = f.mod_floor(&one);
        let dist = frac.clone().min(&one - &frac);
        let approx = BigRational::new(dist, one);
        let got = fractional_distance(&x, &b(m)).unwrap();
        let tol = r(1, 1 << 50);
        prop_assert!((got.lower() - &approx).abs() <= tol);
        prop_assert!((got.upper() - &approx).abs() <= tol);
    }

    #[test]
    fn cmp_threshold_is_consistent(t in surd(), m in 1i64..10_000, num in 1i64..500) {
        let x = surd_desc(t);
        let theta = r(num, 1000);
        let d = fractional_distance(&x, &b(m)).unwrap();
        match cmp_threshold(&x, &b(m), &theta).unwrap() {
            Threshold::Below => {
                prop_assert!(d.upper() <= theta);
                let below = &d.lower() / BigInt::from(2);
                prop_assert_eq!(cmp_threshold(&x, &b(m), &below).unwrap(), Threshold::Above);
            }
            Threshold::Above => prop_assert!(d.lower() >= theta),
            Threshold::Equal => prop_assert!(false, "surd distance cannot be rational"),
        }
    }

    #[test]
    fn intervals_nest(t in surd(), p in 1u64..200) {
        let x = surd_desc(t);
        let a = to_interval(&x, p).unwrap();
        let c = to_interval(&x, p + 1).unwrap();
        prop_assert!(a.lo_rat() <= c.lo_rat() && c.hi_rat() <= a.hi_rat());
        prop_assert!(a.lo <= a.hi);
    }

    #[test]
    fn convergent_identities(t in surd()) {
        let x = surd_desc(t);
        let cf = expand(&x, 40).unwrap();
        let c = convergents(&cf, 38).unwrap();
        for n in 0..c.len() - 1 {
            let det = &c[n].q * &c[n + 1].p - &c[n + 1].q * &c[n].p;
            prop_assert_eq!(det, if n % 2 == 0 { b(1) } else { b(-1) });
        }
        for n in 0..c.len() {
            for m in 0..c.len() - n {
                // q_{n+m}^2 >= 2^(m-1) q_n^2
                let lhs = &c[n + m].q * &c[n + m].q * 2;
                let rhs = (&c[n].q * &c[n].q) << m;
                prop_assert!(lhs >= rhs);
            }
        }
        let RealDescriptor::QuadraticSurd(q) = &x else { unreachable!() };
        for (n, conv) in c.iter().enumerate() {
            let o = q.cmp_rational(&BigRational::new(conv.p.clone(), conv.q.clone()));
            prop_assert_eq!(o, if n % 2 == 0 { std::cmp::Ordering::Greater } else { std::cmp::Ordering::Less });
        }
        // mirror: q_{n+1}/q_n = [a_{n+1}; a_n, ..., a_1]
        for n in 1..c.len() - 1 {
            let mut v = BigRational::from_integer(cf.digit(1).unwrap().clone());
            for i in 2..=n + 1 {
                v = BigRational::from_integer(cf.digit(i).unwrap().clone()) + v.recip();
            }
            prop_assert_eq!(v, BigRational::new(c[n + 1].q.clone(), c[n].q.clone()));
        }
    }

    #[test]
    fn digits_positive_and_truncations_close(t in surd()) {
        let x = surd_desc(t);
        let cf = expand(&x, 30).unwrap();
        prop_assert!(cf.digits.iter().skip(1).all(|a| a >= &BigInt::one()));
        let c = convergents(&cf, 28).unwrap();
        for n in 0..28 {
            let e = error_term(&x, n).unwrap();
            let bound = BigRational::new(c[n].q.clone(), c[n + 1].q.clone());
            prop_assert!(e.delta.to_f64().abs() < bound.to_f64().unwrap() + 1e-12);
        }
    }

    #[test]
    fn periods_reproduce_expansion(t in surd()) {
        let x = surd_desc(t);
        let RealDescriptor::QuadraticSurd(q) = &x else { unreachable!() };
        let (digits, per) = surd_period(q).unwrap();
        let cf = expand(&x, per.start + 3 * per.len).unwrap();
        for i in 0..cf.len() {
            let j = if i < per.start { i } else { per.start + (i - per.start) % per.len };
            prop_assert_eq!(cf.digit(i).unwrap(), &digits[j]);
        }
    }
}

#[test]
fn best_approximations_match_exhaustive_search() {
    for d in [2u64, 3, 7, 13] {
        let x = RealDescriptor::sqrt(d);
        let found = common::best_approximations_sqrt(d, 1000);
        for q in 1..=1000i64 {
            let near = (BigInt::from(q * q) * BigInt::from(d)).sqrt();
            for p in [near.clone(), near + 1] {
                if !p.gcd(&b(q)).is_one() {
                    continue;
                }
                let accepted = is_best_approx(&p, &b(q), &x).unwrap();
                assert_eq!(accepted, found.contains(&(p.clone(), b(q))), "sqrt {d}: {p}/{q}");
            }
        }
    }
}

fn sqrt2() -> RealDescriptor {
    RealDescriptor::sqrt(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn enumerate_is_monotone_in_eps(t in surd(), d in 1u32..4, e1 in 1i64..250, e2 in 1i64..250) {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let a = RecurrenceSetSpec::monomial(surd_desc(t), d, r(lo, 500)).unwrap();
        let c = RecurrenceSetSpec::monomial(surd_desc(t), d, r(hi, 500)).unwrap();
        let ma = enumerate(&a, 3000).unwrap();
        let mc = enumerate(&c, 3000).unwrap();
        prop_assert!(ma.is_subset(&mc));
        prop_assert!(ma.get(0));
    }

    #[test]
    fn half_gives_even_numbers(e in 1i64..499, t in 0u64..2000) {
        let s = RecurrenceSetSpec::monomial(RealDescriptor::rational(1, 2), 1, r(e, 1000)).unwrap();
        let m = enumerate(&s, t).unwrap();
        prop_assert!((0..=t as usize).all(|n| m.get(n) == (n % 2 == 0)));
    }

    #[test]
    fn sumsets_grow_with_k(members in proptest::collection::vec(1usize..400, 0..30), k in 1usize..4) {
        let mut set = recbases::bitset::Bitset::from_members(400, members).unwrap();
        set.set(0);
        let s1 = sumset_bitmap(&set, k).unwrap();
        let s2 = sumset_bitmap(&set, k + 1).unwrap();
        prop_assert!(s1.is_subset(&s2));
    }

    #[test]
    fn orbit_hits_agrees_with_sumset(t in surd(), e in 5i64..200, n in 1u64..3000) {
        let alpha = surd_desc(t);
        let eps = r(e, 1000);
        let spec = RecurrenceSetSpec::monomial(alpha.clone(), 2, eps.clone()).unwrap();
        let m = enumerate(&spec, n).unwrap();
        let s = sumset_bitmap(&m, 2).unwrap();
        prop_assert_eq!(s.get(n as usize), orbit_hits(&alpha, n, &eps).unwrap().is_some());
    }

    #[test]
    fn certificates_are_sound(t in surd(), n in (5u64..5000).prop_map(|n| 2 * n + 1)) {
        let alpha = surd_desc(t);
        if let Some(c) = certify(&alpha, &b(n as i64), 16).unwrap() {
            prop_assert!(c.k % 2 == 0 && c.m.is_odd() && c.m.gcd(&b(c.k as i64)).is_one());
            let again = certify(&alpha, &b(n as i64), 16).unwrap().unwrap();
            prop_assert_eq!((again.k, &again.m), (c.k, &c.m));
            let eps = c.eps0_max.clone();
            prop_assert!(!verify_certificate(&c, 10_000, &eps).unwrap().is_refuted());
            // ||N alpha - m/k|| = |gamma| / (k N)
            let dist = fractional_distance(&alpha, &(b(n as i64) * c.k)).unwrap().to_f64() / c.k as f64;
            let want = c.gamma.to_f64().abs() / (c.k as f64 * n as f64);
            prop_assert!((dist - want).abs() <= 1e-12 * (1.0 + want));
        }
    }

    #[test]
    fn telescoping_identity(n1 in -10i64.pow(12)..10i64.pow(12), n2 in -10i64.pow(12)..10i64.pow(12), d in 1u32..12) {
        prop_assert!(telescoping_residual(&b(n1), &b(n2), d).is_zero());
    }

    #[test]
    fn trichotomy_ignores_parametrization(
        deg_base in 0u32..5,
        dirs in proptest::collection::vec(0u32..5, 1..3),
        shift in -5i64..5,
        scale in (1i64..5).prop_map(|s| s * if s % 2 == 0 { -1 } else { 1 }),
    ) {
        let coeff = |k: i64| RealDescriptor::surd(k, 1, 1, 2).unwrap();
        let mut dirs = dirs;
        dirs.sort();
        dirs.dedup();
        let fam = AffineFamilySpec {
            base: vec![(deg_base, coeff(1))],
            directions: dirs.iter().map(|&d| vec![(d, coeff(0))]).collect(),
        };
        // base -> base + shift * dir_0, dir_0 -> scale * dir_0
        let d0 = dirs[0];
        let mut base = vec![(deg_base, coeff(1))];
        if shift != 0 {
            if d0 == deg_base {
                base = vec![(deg_base, RealDescriptor::surd(1, 1 + shift, 1, 2).unwrap())];
            } else {
                base.push((d0, RealDescriptor::surd(0, shift, 1, 2).unwrap()));
            }
        }
        let mut directions: Vec<Vec<(u32, RealDescriptor)>> = dirs.iter().map(|&d| vec![(d, coeff(0))]).collect();
        directions[0] = vec![(d0, RealDescriptor::surd(0, scale, 1, 2).unwrap())];
        let re = AffineFamilySpec { base, directions };
        prop_assert_eq!(family_trichotomy(&fam), family_trichotomy(&re));
    }

    #[test]
    fn weyl_ignores_integer_shift(t in surd(), c in -1000i64..1000, h in -5i64..5, n in 1u64..3000) {
        let x = surd_desc(t);
        let base = weyl_sum(&[(2, x.clone())], &[h], n).unwrap();
        let shifted = weyl_sum(&[(2, x.clone()), (0, RealDescriptor::integer(c))], &[h, 1], n).unwrap();
        prop_assert!((base.magnitude - shifted.magnitude).abs() <= base.error_bound + shifted.error_bound + 1e-12);
    }
}

#[test]
fn sqrt2_complement_grows_slowly() {
    let spec = RecurrenceSetSpec::monomial(sqrt2(), 2, r(1, 10)).unwrap();
    let rep = complement(&spec, 2, 100_000).unwrap();
    let counts: Vec<usize> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&t| rep.complement.iter().filter(|&&n| n <= t).count())
        .collect();
    assert!(counts.windows(2).all(|w| w[1] - w[0] <= 2), "{counts:?}");
    let ordered = rep.complement.windows(2).all(|w| w[0] < w[1]);
    assert!(ordered);
    for (t, c) in counts_at(&rep.complement, 100_000) {
        assert_eq!(c, rep.complement.iter().filter(|&&n| n <= t).count());
    }
}

#[test]
fn complement_elements_have_rational_obstructions() {
    let spec = RecurrenceSetSpec::monomial(sqrt2(), 2, r(1, 10)).unwrap();
    let rep = complement(&spec, 2, 100_000).unwrap();
    for &n in rep.complement.iter().filter(|&&n| n >= 10) {
        let hits = rational_obstruction_scan(&sqrt2(), &b(n as i64), 16, &r(10_000, 1)).unwrap();
        assert!(!hits.is_empty(), "{n}");
    }
}

#[test]
fn pell_witnesses_recur_and_are_sound() {
    let w = pell_witnesses_sqrt2(8, &WitnessOptions::default()).unwrap();
    for i in 1..w.len() - 1 {
        assert_eq!(&w[i + 1].n, &(&w[i].n * 34 - &w[i - 1].n));
    }
    for rec in &w {
        if let Some(n) = rec.n.to_u64().filter(|&n| n <= 100_000) {
            assert_eq!(orbit_hits(&sqrt2(), n, &soundness_eps(rec)).unwrap(), None);
        }
    }
}

#[test]
fn surd_witnesses_are_deterministic_and_sound() {
    for q in ["surd:(1+1*sqrt(5))/2", "surd:(0+1*sqrt(3))/1", "surd:(1+3*sqrt(7))/4", "surd:(0+1*sqrt(6))/1"] {
        let x: RealDescriptor = q.parse().unwrap();
        let RealDescriptor::QuadraticSurd(s) = &x else { unreachable!() };
        let w = pell_witnesses_surd(s, 3, &WitnessOptions::default()).unwrap();
        let again = pell_witnesses_surd(s, 3, &WitnessOptions::default()).unwrap();
        assert_eq!(w.iter().map(|r| &r.n).collect::<Vec<_>>(), again.iter().map(|r| &r.n).collect::<Vec<_>>());
        for rec in &w {
            if let Some(n) = rec.n.to_u64().filter(|&n| n <= 100_000) {
                assert_eq!(orbit_hits(&x, n, &soundness_eps(rec)).unwrap(), None, "{q} {n}");
            }
        }
    }
}

#[test]
fn badapprox_witness_counting() {
    for x in [sqrt2(), RealDescriptor::golden_ratio(), RealDescriptor::sqrt(3), RealDescriptor::sqrt(11)] {
        let w = badapprox_witnesses(&x, 12, &b(100), &WitnessOptions { floor: 0 }).unwrap();
        let mut idx = Vec::new();
        let mut kappa = 0;
        for rec in &w {
            if let Provenance::BadApprox { i, kappa: k, .. } = rec.provenance {
                idx.push(i);
                kappa = k;
            }
        }
        let last = *idx.last().unwrap();
        for end in (4 * kappa as usize..=last).step_by(4) {
            let seen = idx.iter().filter(|&&i| i < end).count();
            assert!(seen >= end / (4 * kappa as usize), "{x} end={end}");
        }
    }
}

#[test]
fn exceptional_digits_respect_caps_and_targets() {
    for params in ["", "2=4:1,3=8:1,h=4:4", "2=8:1,5=16:1,h=4:4"] {
        let plan = ExceptionalAlphaPlan::from_params(params).unwrap();
        let a = construct_exceptional(&plan, 80).unwrap();
        let cf = expand(&(a.clone()), 80).unwrap();
        for i in 1..cf.len() {
            let cap = BigInt::one() << plan.cap_bits(i);
            assert!(cf.digit(i).unwrap() >= &BigInt::one() && cf.digit(i).unwrap() <= &cap, "{params} {i}");
        }
        let odd = plan.primes.iter().map(|p| p.p).find(|&p| p != 2).unwrap();
        let rep = verify_conditions(&a, 80, odd, Some(&plan)).unwrap();
        assert!(rep.pass, "{params}");
    }
}

#[test]
fn exceptional_growth_ratio_reported() {
    let a = construct_exceptional(&ExceptionalAlphaPlan::default(), 200).unwrap();
    let rep = verify_conditions(&a, 200, 3, None).unwrap();
    assert!(rep.growth_tail.is_finite() && rep.growth_mid.is_finite());
}

#[test]
fn gamma_enclosures_meet_every_level() {
    for (d, bits) in [(3u32, "0110"), (3, "1111"), (4, "010")] {
        let g = gamma_construct(d, b(11), BigRational::from_integer(4.into()), bits, bits.len()).unwrap();
        assert!(g.check());
        for w in g.levels.windows(2) {
            assert!(w[0].lo <= w[1].lo && w[1].hi <= w[0].hi);
            let len = &w[1].hi - &w[1].lo;
            assert_eq!(len, BigRational::new(b(2), num::pow(w[1].n.clone(), d as usize + 1)));
        }
    }
}

/// On the circle, a sequence whose first few Weyl sums are at most delta
/// leaves no gap longer than C * delta. C = 6 is an empirical calibration
/// over the surds below, not a proven constant.
#[test]
fn weyl_verdict_calibration_against_gaps() {
    const C: f64 = 6.0;
    let delta = 0.05;
    let mut tested = 0;
    for d in 2u64..40 {
        if is_square(d) {
            continue;
        }
        for deg in 1u32..=2 {
            let x = RealDescriptor::sqrt(d);
            let n = 2000u64;
            if let Verdict::LooksEquidistributed { .. } = equidist_verdict(&[(deg, x.clone())], n, delta, 8).unwrap() {
                tested += 1;
                let v = to_interval(&x, 60).unwrap().mid_f64();
                let mut pts: Vec<f64> = (1..=n).map(|k| ((k as f64).powi(deg as i32) * v).rem_euclid(1.0)).collect();
                pts.sort_by(f64::total_cmp);
                let mut gap = pts[0] + 1.0 - pts[pts.len() - 1];
                for w in pts.windows(2) {
                    gap = gap.max(w[1] - w[0]);
                }
                assert!(gap <= C * delta, "sqrt {d} deg {deg}: gap {gap}");
            }
        }
    }
    assert!(tested > 10);
}

#[test]
fn sqrt_expansions_detect_known_periods() {
    for d in 2u64..200 {
        if is_square(d) {
            continue;
        }
        let x = RealDescriptor::sqrt(d);
        let RealDescriptor::QuadraticSurd(q) = &x else { unreachable!() };
        let (digits, per) = surd_period(q).unwrap();
        let (a0, period) = common::cf_sqrt(d);
        assert_eq!(per.start, 1);
        assert_eq!(digits[0], BigInt::from(a0));
        assert_eq!(digits[1..].iter().map(|v| v.to_u64().unwrap()).collect::<Vec<_>>(), period);
    }
}
