//! Equivalent-literal merging: binary clauses that force two literals to
//! agree let the solver substitute one for the other before searching.

use baxcount::cegar::{solve_maxcount, SolverConfig};
use baxcount::formula::parse_instance;
use baxcount::preprocess::{prepare, PreprocessOptions};

fn main() {
    // (x1 -> x2) and (x2 -> x1) pin the two witness variables together;
    // the counting space only sees their shared value through y3.
    let inst = parse_instance(
        "p cnf 3 3\n\
         c max 1 2 0\n\
         c ind 3 0\n\
         -1 2 0\n\
         -2 1 0\n\
         -1 3 0\n",
    )
    .unwrap();

    let prep = prepare(&inst, &PreprocessOptions::default());
    println!("merged variables: {}", prep.summary.merged_vars);
    for (var, rep) in &prep.merges {
        println!("  x{var} replaced by {rep}");
    }

    // The solve works on the reduced instance, but the witness it returns
    // is over the original variables: merged ones are filled back in.
    let result = solve_maxcount(&inst, &SolverConfig::exact(2)).unwrap();
    println!(
        "witness {} with count {}",
        result.witness.unwrap(),
        result.count
    );
}
