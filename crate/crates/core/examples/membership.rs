//! The set A = {n : ||alpha n^2|| <= eps(n)} for a few schedules.

use recbases::recurrence::{density, enumerate, EpsilonSchedule, RecurrenceSetSpec};
use recbases::realkernel::RealDescriptor;

fn main() -> recbases::Result<()> {
    let alpha = RealDescriptor::sqrt(2);
    for sched in ["const:0.1", "const:0.25", "invlog:1", "invpow:0.1"] {
        let eps: EpsilonSchedule = sched.parse()?;
        let spec = RecurrenceSetSpec::new(vec![(2, alpha.clone())], eps)?;
        let first: Vec<usize> = enumerate(&spec, 200)?.iter_ones().take(15).collect();
        let d = num::ToPrimitive::to_f64(&density(&spec, 100_000)?).unwrap();
        println!("{sched:>11}: density {d:.4}  first {first:?}");
    }
    Ok(())
}
