//! The decision form: does any witness reach a given number of counting
//! models? The search stops as soon as either answer is certain, so a
//! "yes" can come back before the true maximum is pinned down.

use baxcount::cegar::{decide_dmaxsat, SolverConfig};
use baxcount::formula::parse_instance;

fn main() {
    // The best witness (x1 false) has 4 counting models.
    let inst = parse_instance(
        "p cnf 3 1\n\
         c max 1 0\n\
         c ind 2 3 0\n\
         -1 2 0\n",
    )
    .unwrap();

    let cfg = SolverConfig::exact(17);
    for bound in [0u128, 2, 4, 5] {
        let decision = decide_dmaxsat(&inst, bound, &cfg).unwrap();
        println!(
            "bound {bound}: {} (best witness seen counted {}, {} counting calls)",
            if decision.answer { "yes" } else { "no" },
            decision.result.count,
            decision.result.stats.oracle.count_calls
        );
    }
}
