//! Weyl sums and the smoothness norm around a witness.

use recbases::equidist::{equidist_verdict, smoothness_obstruction, weyl_sum};
use recbases::realkernel::RealDescriptor;

fn main() -> recbases::Result<()> {
    let s2 = RealDescriptor::sqrt(2);
    for n in [100u64, 1_000, 10_000, 100_000] {
        let w = weyl_sum(&[(2, s2.clone())], &[1], n)?;
        println!("|S_N| for sqrt2 n^2, N = {n:>6}: {:.5} (+- {:.1e})", w.magnitude, w.error_bound);
    }
    println!("{:?}", equidist_verdict(&[(2, s2.clone())], 10_000, 0.05, 8)?);

    let scan = smoothness_obstruction(&[(2, s2)], 35, -3..=3, -3..=3)?;
    for s in scan.iter().take(4) {
        println!("k = {:+}, l = {:+}: nonconstant norm {:.5}", s.k, s.l, s.value_nonconstant);
    }
    Ok(())
}
