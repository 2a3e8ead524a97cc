//! Integers outside A + A for alpha = sqrt 2, with their certificates.

use num::{BigInt, BigRational};
use recbases::obstruction::{certify, verify_certificate};
use recbases::realkernel::RealDescriptor;
use recbases::recurrence::RecurrenceSetSpec;
use recbases::sumset::complement;

fn main() -> recbases::Result<()> {
    let alpha = RealDescriptor::sqrt(2);
    let eps = BigRational::new(1.into(), 10.into());
    let spec = RecurrenceSetSpec::monomial(alpha.clone(), 2, eps.clone())?;
    let rep = complement(&spec, 2, 100_000)?;
    println!("[1, 1e5] minus 2A: {:?}", rep.complement);
    println!("counts: {:?}", rep.counts_at);

    for &n in rep.complement.iter().filter(|&&n| n >= 35 && n % 2 == 1) {
        match certify(&alpha, &BigInt::from(n), 16)? {
            Some(c) => {
                let v = verify_certificate(&c, 100_000, &(c.eps0_max.clone() / BigInt::from(2)))?;
                println!("N = {n:>5}: k = {}, m = {}, gamma = {:+.5}, eps0_max = {:.5}, {v:?}", c.k, c.m, c.gamma.to_f64(), c.eps0_max_f64());
            }
            None => println!("N = {n:>5}: no certificate with k <= 16"),
        }
    }
    Ok(())
}
