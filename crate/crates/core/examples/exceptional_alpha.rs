//! Build the alpha with prescribed 2-adic and 3-adic divisibility and look at A + A.

use num::BigRational;
use recbases::exceptional::{basis_check, exceptional_stream, verify_conditions, ExceptionalAlphaPlan};

fn main() -> recbases::Result<()> {
    let plan = ExceptionalAlphaPlan::default();
    println!("plan: {}", plan.to_params());
    let alpha = exceptional_stream(plan.clone())?;
    let rep = verify_conditions(&alpha, 120, 3, Some(&plan))?;
    println!(
        "conditions pass {}: recursion {}, coprime {}, growth {:.3} -> {:.3}",
        rep.pass, rep.recursion_ok, rep.coprime_ok, rep.growth_mid, rep.growth_tail
    );
    let b = basis_check(&alpha, &BigRational::new(1.into(), 10.into()), 10_000)?;
    println!("[1, 1e4] minus 2A: {:?}", b.complement);
    println!("every N >= {} is in 2A", b.tail_empty_from);
    Ok(())
}
