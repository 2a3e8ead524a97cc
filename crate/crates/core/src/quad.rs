//! Exact arithmetic in a real quadratic field: values (a + b*sqrt(d)) / c.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// (a + b*sqrt(d)) / c with c > 0 and gcd(a, b, c) = 1.
///
/// `b == 0` encodes a rational and then `d` is normalised to 0, so a rational
/// combines with any field. Mixing two irrational values with different `d`
/// panics in the operator impls; use [`QuadSurd::same_field`] first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl QuadSurd {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        assert!(!c.is_zero(), "zero denominator");
        let (mut a, mut b, mut c) = (a, b, c);
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let d = if b.is_zero() { BigInt::zero() } else { d };
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        QuadSurd { a, b, c, d }
    }

    pub fn from_int(n: BigInt) -> Self {
        QuadSurd::new(n, BigInt::zero(), BigInt::one(), BigInt::zero())
    }

    pub fn from_rational(r: &BigRational) -> Self {
        QuadSurd::new(r.numer().clone(), BigInt::zero(), r.denom().clone(), BigInt::zero())
    }

    /// sqrt(d) itself.
    pub fn sqrt(d: BigInt) -> Self {
        QuadSurd::new(BigInt::zero(), BigInt::one(), BigInt::one(), d)
    }

    pub fn zero() -> Self {
        QuadSurd::from_int(BigInt::zero())
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    pub fn same_field(&self, other: &QuadSurd) -> bool {
        self.is_rational() || other.is_rational() || self.d == other.d
    }

    fn field_d(&self, other: &QuadSurd) -> BigInt {
        if !self.is_rational() && !other.is_rational() {
            assert_eq!(self.d, other.d, "mixed quadratic fields");
        }
        if self.is_rational() {
            other.d.clone()
        } else {
            self.d.clone()
        }
    }

    /// Sign of the numerator a + b*sqrt(d), which is the sign of the value.
    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b, &self.d)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn floor(&self) -> BigInt {
        floor_num(&self.a, &self.b, &self.d).div_floor(&self.c)
    }

    /// Nearest integer, ties rounded up.
    pub fn round(&self) -> BigInt {
        let twice = QuadSurd::new(
            &self.a * 2 + &self.c,
            &self.b * 2,
            &self.c * 2,
            self.d.clone(),
        );
        twice.floor()
    }

    pub fn scale(&self, m: &BigInt) -> Self {
        QuadSurd::new(&self.a * m, &self.b * m, self.c.clone(), self.d.clone())
    }

    pub fn add_rational(&self, r: &BigRational) -> Self {
        self.clone() + QuadSurd::from_rational(r)
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        (self.clone() - QuadSurd::from_rational(r)).signum()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        let norm = &self.a * &self.a - &self.b * &self.b * &self.d;
        QuadSurd::new(&self.a * &self.c, -(&self.b * &self.c), norm, self.d.clone())
    }

    pub fn div(&self, other: &QuadSurd) -> Self {
        self.clone() * other.recip()
    }

    /// Fractional part in [0, 1).
    pub fn fract(&self) -> Self {
        self.clone() - QuadSurd::from_int(self.floor())
    }

    /// floor(self * 2^bits).
    pub fn floor_scaled(&self, bits: u64) -> BigInt {
        let s = BigInt::one() << bits;
        QuadSurd::new(&self.a * &s, &self.b * &s, self.c.clone(), self.d.clone()).floor()
    }

    /// Rational enclosure of width at most 2^-bits.
    pub fn enclose(&self, bits: u64) -> (BigRational, BigRational) {
        if let Some(r) = self.as_rational() {
            return (r.clone(), r);
        }
        let f = self.floor_scaled(bits);
        let den = BigInt::one() << bits;
        (
            BigRational::new(f.clone(), den.clone()),
            BigRational::new(f + 1, den),
        )
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, _) = self.enclose(64);
        rat_to_f64(&lo)
    }
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let shift = 64 - (r.numer().bits() as i64 - r.denom().bits() as i64);
    let q = if shift >= 0 {
        (r.numer() << (shift as u64)) / r.denom()
    } else {
        r.numer() / (r.denom() << ((-shift) as u64))
    };
    let m = q.to_f64().unwrap_or(f64::NAN);
    if shift.abs() > 2000 {
        return if shift > 0 { 0.0 * m } else { m * f64::INFINITY };
    }
    m * 2f64.powi(-(shift as i32))
}

/// Sign of a + b*sqrt(d) for d >= 0.
pub(crate) fn sign_of(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    if b.is_zero() || d.is_zero() {
        return a.cmp(&BigInt::zero());
    }
    let sb = b.cmp(&BigInt::zero());
    if a.is_zero() {
        return sb;
    }
    if (a.is_positive() && b.is_positive()) || (a.is_negative() && b.is_negative()) {
        return if a.is_positive() { Ordering::Greater } else { Ordering::Less };
    }
    let lhs = a * a;
    let rhs = b * b * d;
    match lhs.cmp(&rhs) {
        Ordering::Greater => a.cmp(&BigInt::zero()),
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

/// floor(a + b*sqrt(d)) for d >= 0 not a perfect square (or b == 0).
pub(crate) fn floor_num(a: &BigInt, b: &BigInt, d: &BigInt) -> BigInt {
    if b.is_zero() || d.is_zero() {
        return a.clone();
    }
    let sq = b * b * d;
    let s = sq.sqrt();
    if b.is_positive() {
        a + s
    } else if &s * &s == sq {
        a - s
    } else {
        a - s - 1
    }
}

impl Add for QuadSurd {
    type Output = QuadSurd;
    fn add(self, o: QuadSurd) -> QuadSurd {
        let d = self.field_d(&o);
        QuadSurd::new(
            &self.a * &o.c + &o.a * &self.c,
            &self.b * &o.c + &o.b * &self.c,
            &self.c * &o.c,
            d,
        )
    }
}

impl Sub for QuadSurd {
    type Output = QuadSurd;
    fn sub(self, o: QuadSurd) -> QuadSurd {
        self + (-o)
    }
}

impl Neg for QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        QuadSurd { a: -self.a, b: -self.b, c: self.c, d: self.d }
    }
}

impl Mul for QuadSurd {
    type Output = QuadSurd;
    fn mul(self, o: QuadSurd) -> QuadSurd {
        let d = self.field_d(&o);
        QuadSurd::new(
            &self.a * &o.a + &self.b * &o.b * &d,
            &self.a * &o.b + &self.b * &o.a,
            &self.c * &o.c,
            d,
        )
    }
}

impl PartialOrd for QuadSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.same_field(other)
            .then(|| (self.clone() - other.clone()).signum())
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_negative() {
            write!(f, "({}-{}*sqrt({}))/{}", self.a, -&self.b, self.d, self.c)
        } else {
            write!(f, "({}+{}*sqrt({}))/{}", self.a, self.b, self.d, self.c)
        }
    }
}

/// Split n = s^2 * r with r squarefree (trial division).
pub fn squarefree_split(n: &BigInt) -> Option<(BigInt, BigInt)> {
    if !n.is_positive() {
        return None;
    }
    let mut r = n.clone();
    let mut s = BigInt::one();
    let mut p = BigInt::from(2u32);
    let mut steps = 0u64;
    while &p * &p <= r {
        let pp = &p * &p;
        while (&r % &pp).is_zero() {
            r /= &pp;
            s *= &p;
        }
        p += 1;
        steps += 1;
        if steps > 2_000_000 {
            return None;
        }
    }
    Some((s, r))
}
