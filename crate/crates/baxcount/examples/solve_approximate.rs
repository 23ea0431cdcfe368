//! Probabilistic maximization: the returned count is within a factor
//! 1 + epsilon of the true maximum with probability at least 1 - delta.
//! The overall budget is split into per-oracle-call tolerances up front.

use baxcount::cegar::{solve_maxcount, SolverConfig};
use baxcount::counter::derive_parameters;
use baxcount::formula::parse_instance;

fn main() {
    let inst = parse_instance(
        "p cnf 8 4\n\
         c max 1 2 0\n\
         c ind 3 4 5 6 7 8 0\n\
         -1 3 0\n\
         -1 4 0\n\
         -2 5 0\n\
         1 2 0\n",
    )
    .unwrap();

    let (epsilon, delta) = (0.8, 0.2);
    let params = derive_parameters(epsilon, delta, inst.x_vars().len()).unwrap();
    println!("overall budget  epsilon = {epsilon}, delta = {delta}");
    println!(
        "derived         epsilon0 = epsilon1 = kappa = {:.5}",
        params.epsilon0
    );
    println!(
        "                delta0 = delta2 = {}, delta1 = {:.5}",
        params.delta0, params.delta1
    );

    let cfg = SolverConfig::approximate(epsilon, delta, 42);
    let result = solve_maxcount(&inst, &cfg).unwrap();

    println!("witness         {}", result.witness.as_ref().unwrap());
    println!("count           {}", result.count);
    // Small counting spaces are enumerated outright, so even a
    // probabilistic run can come back flagged exact.
    println!("answer exact    {}", result.exact);
}
