//! Exact maximization: find the witness whose counting-variable space is
//! largest, with every oracle answer computed by enumeration.

use baxcount::cegar::{solve_maxcount, SolverConfig};
use baxcount::formula::parse_instance;

fn main() {
    // Witness variables are declared with `c max`, counting variables with
    // `c ind`; everything else is existentially projected. Setting x1 false
    // leaves both counting variables free (4 models), while x1 true pins y2.
    let inst = parse_instance(
        "p cnf 3 1\n\
         c max 1 0\n\
         c ind 2 3 0\n\
         -1 2 0\n",
    )
    .unwrap();

    let result = solve_maxcount(&inst, &SolverConfig::exact(7)).unwrap();

    match &result.witness {
        Some(w) => println!("witness   {w}"),
        None => println!("witness   (none: the formula is unsatisfiable)"),
    }
    println!("count     {}", result.count);
    println!("exact     {}", result.exact);
    println!(
        "work      {} iterations, {} blocked classes, {} counting calls",
        result.stats.iterations, result.stats.blocked_classes, result.stats.oracle.count_calls
    );
}
