//! The counting oracles on their own: exact enumeration versus
//! parity-hashing estimation of a projected model count.

use baxcount::counter::{approx_projected_count, exact_projected_count, CountQuery, OracleStats};
use baxcount::formula::{parse_instance, PartialWitness};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // Ten free counting variables and a witness variable that halves the
    // space when set: y1 .. y10 free unless x11 pins y1.
    let inst = parse_instance(
        "p cnf 11 1\n\
         c max 11 0\n\
         c ind 1 2 3 4 5 6 7 8 9 10 0\n\
         -11 1 0\n",
    )
    .unwrap();

    let mut stats = OracleStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for witness in [
        PartialWitness::new(),
        PartialWitness::from_pairs([(11, true)]),
    ] {
        let q = CountQuery {
            instance: &inst,
            witness: &witness,
            epsilon: 0.8,
            delta: 0.2,
        };
        let exact = exact_projected_count(&q, &mut stats, &mut rng).unwrap();
        let approx = approx_projected_count(&q, &mut stats, &mut rng).unwrap();
        let shown = if witness.is_empty() {
            "(empty)".to_string()
        } else {
            witness.to_string()
        };
        println!(
            "witness {shown:10}  exact {exact:5}  estimate {:5}  (estimate flagged exact: {})",
            approx.value, approx.exact
        );
    }
    println!(
        "oracle work: {} SAT calls, {} counting calls",
        stats.sat_calls, stats.count_calls
    );
}
