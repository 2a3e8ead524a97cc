//! Nested-interval construction of a cubic counterexample.

use num::{BigInt, BigRational, ToPrimitive};
use recbases::higherdeg::{gamma_construct, verify_highdeg_witness};

fn main() -> recbases::Result<()> {
    let g = gamma_construct(3, BigInt::from(11), BigRational::from_integer(4.into()), "0101", 4)?;
    println!("N_i: {:?}", g.n_sequence.iter().map(|n| n.to_string()).collect::<Vec<_>>());
    let last = g.levels.last().unwrap();
    println!("alpha = {:.15} (enclosure width {:.1e})", last.lo.to_f64().unwrap(), (&last.hi - &last.lo).to_f64().unwrap());
    println!("levels consistent: {}", g.check());
    let rep = verify_highdeg_witness(&g.alpha, &g.n_sequence[0], 3, &BigRational::new(1.into(), 5.into()))?;
    println!("N_1 = {}: {:?}", g.n_sequence[0], rep.outcome);
    if let Some(m) = rep.near_miss {
        println!("near miss {} + {}: telescoped {:.4}", m.n1, m.n2, m.telescoped);
    }
    Ok(())
}
