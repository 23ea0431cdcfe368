//! Witness generalization: grow one rejected candidate into a whole region
//! that provably cannot beat the incumbent, so a single blocking clause
//! removes all of it.

use baxcount::counter::OracleStats;
use baxcount::formula::{parse_instance, PartialWitness};
use baxcount::generalize::{generalize, GeneralizeRequest};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // x1 = true forces y3, cutting the class to 2 models; x2 is noise.
    let inst = parse_instance(
        "p cnf 4 1\n\
         c max 1 2 0\n\
         c ind 3 4 0\n\
         -1 3 0\n",
    )
    .unwrap();

    let candidate = PartialWitness::from_pairs([(1, true), (2, true)]);
    let req = GeneralizeRequest {
        instance: &inst,
        witness: &candidate,
        candidate_count: 2,
        best_count: 2,
        epsilon: 0.0,
        delta: 0.5,
        exact: true,
        sweep_order: None,
    };
    let mut stats = OracleStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let out = generalize(&req, &mut stats, &mut rng).unwrap();

    println!("candidate        {candidate}  (class count 2, incumbent 2)");
    println!("generalized to   {}  — x2 was irrelevant", out.witness);
    println!("class bounded by {}", out.class_estimate);
    for step in &out.steps {
        println!(
            "  {:?}: tried removing {:?} -> {}",
            step.phase,
            step.removed,
            if step.accepted { "kept out" } else { "put back" }
        );
    }
    // Rejected relaxations that counted above the incumbent are promising
    // spots for a later, better witness: they come back as leads.
    for lead in &out.leads {
        println!("lead: {} with estimate {}", lead.witness, lead.estimate);
    }
}
