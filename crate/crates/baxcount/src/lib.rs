//! Max#SAT solving: find the assignment of a witness set `X` that maximizes
//! the number of assignments of a counting set `Y` for which the formula is
//! satisfiable (any remaining variables `Z` are projected out existentially).
//!
//! The solver runs a counterexample-guided loop: a SAT oracle proposes a
//! witness, a projected model counter scores it, and rejected witnesses are
//! generalized to entire regions of the witness space that can be blocked at
//! once. Counting can be exact (projected enumeration) or probabilistic
//! (pairwise-independent parity hashing with an (epsilon, delta) guarantee).
//!
//! # Modules
//!
//! - [`formula`]: CNF instances with an X/Y/Z variable partition, the
//!   extended DIMACS format, and a brute-force reference oracle.
//! - [`sat`]: a self-contained CDCL SAT solver used by every other layer.
//! - [`counter`]: exact and probabilistic projected model counting.
//! - [`generalize`]: witness generalization (redundancy elimination, random
//!   relaxation, greedy refinement).
//! - [`heuristics`]: candidate-selection strategies, lead pool, and literal
//!   activity bookkeeping.
//! - [`preprocess`]: symmetry breaking and equivalent-literal substitution.
//! - [`cegar`]: the refinement loop tying everything together, plus the
//!   threshold decision procedure.
//! - [`gadgets`]: constructors for formulas with prescribed model counts,
//!   useful for building counter test beds and hardness reductions.
//! - [`cli`]: the command-line entry points (`solve`, `decide`, `gadget`,
//!   `bench`) and the JSON run report.
//!
//! # Example
//!
//! ```
//! use baxcount::cegar::{solve_maxcount, SolverConfig};
//! use baxcount::formula::parse_instance;
//!
//! let text = "p cnf 3 1\nc max 1 0\nc ind 2 3 0\n-1 2 0\n";
//! let instance = parse_instance(text).unwrap();
//! let result = solve_maxcount(&instance, &SolverConfig::exact(7)).unwrap();
//! assert_eq!(result.count, 4); // x1 = false leaves all four (y2, y3) pairs
//! ```
//!
//! Runnable walkthroughs for each capability live under `examples/`; try
//! `cargo run --example solve_exact`.

pub mod cegar;
pub mod cli;
pub mod counter;
pub mod formula;
pub mod gadgets;
pub mod generalize;
pub mod heuristics;
pub mod preprocess;
pub mod sat;
