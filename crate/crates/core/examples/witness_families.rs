//! Witness generators for several kinds of alpha.

use num::{BigInt, BigRational};
use recbases::realkernel::RealDescriptor;
use recbases::witnesses::*;

fn show(label: &str, recs: &[WitnessRecord]) {
    println!("{label}");
    for r in recs {
        println!("  N = {:<28} k = {:<3} eps0_max = {:.5}", r.n.to_string(), r.certificate.k, r.certificate.eps0_max_f64());
    }
}

fn main() -> recbases::Result<()> {
    let opts = WitnessOptions::default();
    show("pell, sqrt 2", &pell_witnesses_sqrt2(5, &opts)?);

    let golden = RealDescriptor::golden_ratio();
    if let RealDescriptor::QuadraticSurd(q) = &golden {
        show("pell, golden ratio", &pell_witnesses_surd(q, 3, &opts)?);
    }
    show("badly approximable, sqrt 3", &badapprox_witnesses(&RealDescriptor::sqrt(3), 5, &BigInt::from(100), &opts)?);

    // 2 alpha = [0; (1,2,1,1,2,5,5,5,2,1) x 4, 3]
    let mut digits = vec![0i64];
    for _ in 0..4 {
        digits.extend([1, 2, 1, 1, 2, 5, 5, 5, 2, 1]);
    }
    digits.push(3);
    let mut v = BigRational::from_integer(BigInt::from(*digits.last().unwrap()));
    for &d in digits.iter().rev().skip(1) {
        v = BigRational::from_integer(BigInt::from(d)) + v.recip();
    }
    let alpha = RealDescriptor::Rational(v / BigInt::from(2));
    show("generic, planted (5,5,5)", &generic_witnesses(&alpha, 5, 3, digits.len() - 5, &opts)?);
    Ok(())
}
