//! Seeded random instance sampler.
//!
//! Produces small partitioned CNF instances for test beds, calibration
//! harnesses, and benchmarks. Variables are laid out in partition blocks
//! (`X` first, then `Y`, then `Z`); clause structure is randomized.

use rand::Rng;

use super::{Clause, Lit, ProblemInstance, Var, VarPartition};

/// Shape parameters for [`random_instance`].
#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    /// Clauses per variable; the clause count is `ceil(ratio * num_vars)`.
    pub clause_ratio: f64,
}

impl RandomSpec {
    pub fn new(x: u32, y: u32, z: u32, clause_ratio: f64) -> RandomSpec {
        RandomSpec {
            x,
            y,
            z,
            clause_ratio,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.x + self.y + self.z
    }
}

/// Sample an instance: clause widths are mostly 3 with occasional 1s and 2s,
/// variables drawn without replacement, signs fair coins. Tautologies cannot
/// arise (variables within a clause are distinct).
pub fn random_instance(spec: &RandomSpec, rng: &mut impl Rng) -> ProblemInstance {
    let num_vars = spec.num_vars();
    assert!(num_vars >= 1, "instance needs at least one variable");
    let num_clauses = ((spec.clause_ratio * f64::from(num_vars)).ceil() as usize).max(1);
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let width = match rng.gen_range(0..10u32) {
            0 => 1usize,
            1..=3 => 2,
            _ => 3,
        }
        .min(num_vars as usize);
        let mut vars: Vec<Var> = Vec::with_capacity(width);
        while vars.len() < width {
            let v = rng.gen_range(1..=num_vars);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let lits = vars.into_iter().map(|v| Lit::new(v, rng.gen())).collect();
        clauses.push(Clause::new(lits));
    }
    let x = (1..=spec.x).collect();
    let y = (spec.x + 1..=spec.x + spec.y).collect();
    let partition = VarPartition::with_implicit_z(x, y, num_vars);
    ProblemInstance::new(num_vars, clauses, partition).expect("sampled instance is valid")
}
