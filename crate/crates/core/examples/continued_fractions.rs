//! Digits, convergents and error terms.

use recbases::contfrac::{convergents, delta_estimate, error_term, expand};
use recbases::realkernel::RealDescriptor;

fn main() -> recbases::Result<()> {
    for s in ["rat:355/113", "surd:(0+1*sqrt(2))/1", "surd:(0+1*sqrt(31))/1", "cf:@e"] {
        let x: RealDescriptor = s.parse()?;
        let cf = expand(&x, 16)?;
        println!("{s}: {cf} period {:?}", cf.period);
    }

    let x = RealDescriptor::sqrt(2);
    let cf = expand(&x, 12)?;
    println!("\n n       p_n       q_n   delta_n");
    for c in convergents(&cf, 10)? {
        let e = error_term(&x, c.n as usize)?;
        println!("{:>2} {:>9} {:>9}   {:+.6}", c.n, c.p, c.q, e.delta.to_f64());
    }

    // the estimate only looks at a window of digits around n
    let window = &cf.all_digits()[2..11];
    let est = delta_estimate(window, false, 4)?;
    println!("\nwindow estimate of delta_6: {:+.6}", num::ToPrimitive::to_f64(&est).unwrap());
    Ok(())
}
