//! Candidate-selection heuristics: leads (replay promising relaxations),
//! vsids (activity order), rnd (random order), and none (engine order) all
//! reach the same answer; they differ in how they get there.

use baxcount::cegar::{solve_maxcount, SolverConfig};
use baxcount::formula::parse_instance;
use baxcount::heuristics::DecisionHeuristic;

fn main() {
    let inst = parse_instance(
        "p cnf 9 6\n\
         c max 1 2 3 0\n\
         c ind 4 5 6 7 0\n\
         -1 4 0\n\
         -1 5 0\n\
         -2 6 0\n\
         -3 7 0\n\
         1 2 3 0\n\
         8 9 0\n",
    )
    .unwrap();

    println!("heuristic  count  iterations  sat-calls  count-calls  leads-taken");
    for h in [
        DecisionHeuristic::Leads,
        DecisionHeuristic::Vsids,
        DecisionHeuristic::Rnd,
        DecisionHeuristic::None,
    ] {
        let cfg = SolverConfig {
            heuristic: h,
            ..SolverConfig::exact(13)
        };
        let r = solve_maxcount(&inst, &cfg).unwrap();
        println!(
            "{:9}  {:5}  {:10}  {:9}  {:11}  {:11}",
            h.name(),
            r.count,
            r.stats.iterations,
            r.stats.oracle.sat_calls,
            r.stats.oracle.count_calls,
            r.stats.leads_taken
        );
    }
}
