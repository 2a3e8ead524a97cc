//! Exact comparisons of ||m x|| against thresholds.

use num::{BigInt, BigRational, ToPrimitive};
use recbases::realkernel::{cmp_threshold, fractional_distance, to_interval, RealDescriptor};

fn main() -> recbases::Result<()> {
    let inputs = ["rat:22/7", "surd:(0+1*sqrt(2))/1", "surd:(1+1*sqrt(5))/2", "cf:@e", "dec:3.14159~bits=16"];
    for s in inputs {
        let x: RealDescriptor = s.parse()?;
        let iv = to_interval(&x, 12)?;
        println!("{s:>24}  in [{:.6}, {:.6}]", iv.lo_rat().to_f64().unwrap(), iv.hi_rat().to_f64().unwrap());
    }

    let x = RealDescriptor::sqrt(2);
    let theta = BigRational::new(1.into(), 10.into());
    for m in [1, 5, 12, 29, 35, 70, 169] {
        let d = fractional_distance(&x, &BigInt::from(m))?;
        let c = cmp_threshold(&x, &BigInt::from(m), &theta)?;
        println!("||{m:>3} sqrt2|| = {:.8}  vs 1/10: {c:?}", d.to_f64());
    }
    Ok(())
}
