//! Projected model counting, exact and probabilistic.
//!
//! Both counters answer the same question: given an instance and a partial
//! witness `w` over `E ⊆ X`, how many `Y` assignments can be extended to a
//! model by *some* completion of `w` (with `Z` and the unassigned part of `X`
//! chosen existentially)?
//!
//! - [`exact_projected_count`] enumerates the distinct `Y` projections with a
//!   SAT solver and blocking clauses.
//! - [`approx_projected_count`] uses random parity constraints over `Y`
//!   (pairwise-independent hashing) and returns a `(1+epsilon)`-factor
//!   estimate that is correct with probability at least `1 - delta`. When
//!   `2^|Y|` does not exceed the enumeration pivot the call silently falls
//!   back to the exact path and flags the estimate as exact.
//! - [`derive_parameters`] splits a caller-level `(epsilon, delta)` budget
//!   into the per-oracle tolerances used by the refinement loop.

use rand::Rng;

use thiserror::Error;

use crate::formula::{Lit, PartialWitness, ProblemInstance, Var};
use crate::sat::{SatOutcome, SolveOptions, Solver};

#[derive(Debug, Error, PartialEq)]
pub enum CounterError {
    #[error("witness assigns variable {0} which is not in the witness set X")]
    WitnessOutsideX(Var),
    #[error("parameter {name} = {value} out of range {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// A counting request: how many `Y` projections extend the witness class?
#[derive(Clone, Copy, Debug)]
pub struct CountQuery<'a> {
    pub instance: &'a ProblemInstance,
    pub witness: &'a PartialWitness,
    /// Relative tolerance of the probabilistic counter (ignored by the exact
    /// path).
    pub epsilon: f64,
    /// Failure probability bound (ignored by the exact path).
    pub delta: f64,
}

/// A count together with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountEstimate {
    pub value: u128,
    /// True when the value is exact (exhaustive enumeration finished below
    /// the pivot), not a hashing estimate.
    pub exact: bool,
}

/// Oracle-call accounting shared by the solver layers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleStats {
    /// Individual SAT queries, including those inside counting loops.
    pub sat_calls: u64,
    /// SAT decisions across all queries.
    pub sat_decisions: u64,
    /// Counting-oracle invocations (exact or probabilistic).
    pub count_calls: u64,
}

impl OracleStats {
    fn absorb(&mut self, s: crate::sat::EngineStats) {
        self.sat_calls += s.solves;
        self.sat_decisions += s.decisions;
    }
}

/// Enumeration cutoff of the probabilistic counter, as a function of the
/// tolerance (standard hashing-counter constant).
pub fn pivot(epsilon: f64) -> u64 {
    (9.84 * (1.0 + epsilon / (1.0 + epsilon)) * (1.0 + 1.0 / epsilon).powi(2)).ceil() as u64
}

/// Number of hashing repetitions needed for confidence `1 - delta` (standard
/// median-amplification constant).
pub fn repetitions(delta: f64) -> u32 {
    (17.0 * (3.0 / delta).log2()).ceil().max(1.0) as u32
}

/// Per-oracle parameters derived from one caller-level `(epsilon, delta)`
/// budget, mirroring how the refinement loop splits its guarantee:
/// `epsilon0 = epsilon1 = kappa = (1+epsilon)^(1/3) - 1`, `delta0 = delta2 =
/// delta/2`, and `delta1 = delta / (2(|X|+1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedParams {
    /// Tolerance of whole-space (upper-bound) counts.
    pub epsilon0: f64,
    /// Tolerance of per-candidate counts.
    pub epsilon1: f64,
    /// Early-termination slack of the refinement loop.
    pub kappa: f64,
    /// Confidence budget of whole-space counts.
    pub delta0: f64,
    /// Confidence budget of per-candidate counts (shared across at most
    /// `|X|+1` calls per iteration).
    pub delta1: f64,
    /// Confidence budget of generalization.
    pub delta2: f64,
}

pub fn derive_parameters(
    epsilon: f64,
    delta: f64,
    x_size: usize,
) -> Result<DerivedParams, CounterError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CounterError::ParamOutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "(0, 1)",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CounterError::ParamOutOfRange {
            name: "delta",
            value: delta,
            range: "(0, 1)",
        });
    }
    let shared = (1.0 + epsilon).cbrt() - 1.0;
    Ok(DerivedParams {
        epsilon0: shared,
        epsilon1: shared,
        kappa: shared,
        delta0: delta / 2.0,
        delta1: delta / (2.0 * (x_size as f64 + 1.0)),
        delta2: delta / 2.0,
    })
}

fn validate_witness(inst: &ProblemInstance, w: &PartialWitness) -> Result<(), CounterError> {
    for v in w.vars() {
        if !inst.x_vars().contains(&v) {
            return Err(CounterError::WitnessOutsideX(v));
        }
    }
    Ok(())
}

/// A parity constraint `xor(vars) = bit` over counting variables.
#[derive(Clone, Debug)]
struct Parity {
    vars: Vec<Var>,
    bit: bool,
}

/// Forbid every assignment of `vars` whose parity differs from `bit`
/// (direct CNF expansion; callers keep `vars` at four or fewer).
fn add_direct_parity(solver: &mut Solver, vars: &[Var], bit: bool) {
    debug_assert!(vars.len() <= 4);
    if vars.is_empty() {
        if bit {
            solver.add_clause(&[]); // xor() = 1 is unsatisfiable
        }
        return;
    }
    for a in 0u32..(1 << vars.len()) {
        let parity = a.count_ones() % 2 == 1;
        if parity != bit {
            let clause: Vec<Lit> = vars
                .iter()
                .enumerate()
                .map(|(i, &v)| Lit::new(v, a & (1 << i) != 0))
                .collect();
            solver.add_clause(&clause);
        }
    }
}

/// Encode `xor(vars) = bit`, chunking long constraints with fresh auxiliary
/// variables (each auxiliary equals the parity of its chunk, so models
/// project one-to-one onto the original variables).
fn add_parity(solver: &mut Solver, constraint: &Parity) {
    let mut acc: Vec<Var> = constraint.vars.clone();
    while acc.len() > 3 {
        let mut next = Vec::with_capacity(acc.len() / 2 + 1);
        for chunk in acc.chunks(3) {
            if chunk.len() == 1 {
                next.push(chunk[0]);
            } else {
                let t = solver.new_var();
                let mut group = chunk.to_vec();
                group.push(t);
                add_direct_parity(solver, &group, false); // t = xor(chunk)
                next.push(t);
            }
        }
        acc = next;
    }
    add_direct_parity(solver, &acc, constraint.bit);
}

/// Count distinct `Y` projections of models extending `w`, stopping at
/// `limit`. Returns the count and whether the limit was hit (in which case
/// the true count may be larger).
fn bounded_count(
    inst: &ProblemInstance,
    w: &PartialWitness,
    parities: &[Parity],
    limit: u128,
    stats: &mut OracleStats,
    rng: &mut impl Rng,
) -> (u128, bool) {
    let mut solver = Solver::from_instance(inst);
    for p in parities {
        add_parity(&mut solver, p);
    }
    let assumptions = w.literals();
    let opts = SolveOptions::default();
    let ys: Vec<Var> = inst.y_vars().iter().copied().collect();
    let mut count: u128 = 0;
    loop {
        if count >= limit {
            stats.absorb(solver.stats());
            return (count, true);
        }
        match solver.solve(&assumptions, &opts, rng) {
            SatOutcome::Unsat => {
                stats.absorb(solver.stats());
                return (count, false);
            }
            SatOutcome::Sat(model) => {
                count += 1;
                if ys.is_empty() {
                    // The single (empty) Y assignment is covered; done.
                    stats.absorb(solver.stats());
                    return (count, false);
                }
                let block: Vec<Lit> = ys.iter().map(|&v| Lit::new(v, !model.get(v))).collect();
                solver.add_clause(&block);
            }
        }
    }
}

/// Exact projected count by enumeration with blocking clauses over `Y`.
pub fn exact_projected_count(
    q: &CountQuery,
    stats: &mut OracleStats,
    rng: &mut impl Rng,
) -> Result<u128, CounterError> {
    validate_witness(q.instance, q.witness)?;
    stats.count_calls += 1;
    let (count, saturated) = bounded_count(q.instance, q.witness, &[], u128::MAX, stats, rng);
    debug_assert!(!saturated);
    Ok(count)
}

/// Probabilistic projected count with a `(1+epsilon, delta)` guarantee:
/// with probability at least `1 - delta` the returned value lies within a
/// factor `1 + epsilon` of the true count (on both sides).
pub fn approx_projected_count(
    q: &CountQuery,
    stats: &mut OracleStats,
    rng: &mut impl Rng,
) -> Result<CountEstimate, CounterError> {
    validate_witness(q.instance, q.witness)?;
    if !(q.epsilon > 0.0) {
        return Err(CounterError::ParamOutOfRange {
            name: "epsilon",
            value: q.epsilon,
            range: "(0, inf)",
        });
    }
    if !(q.delta > 0.0 && q.delta < 1.0) {
        return Err(CounterError::ParamOutOfRange {
            name: "delta",
            value: q.delta,
            range: "(0, 1)",
        });
    }
    stats.count_calls += 1;
    let ny = q.instance.y_vars().len() as u32;
    let piv = u128::from(pivot(q.epsilon));
    let y_space: Option<u128> = (ny < 128).then(|| 1u128 << ny);

    // Small Y space: enumeration is cheaper and exact.
    if let Some(space) = y_space {
        if space <= piv {
            let (count, _) = bounded_count(q.instance, q.witness, &[], u128::MAX, stats, rng);
            return Ok(CountEstimate {
                value: count,
                exact: true,
            });
        }
    }

    // The count itself may still be small; check before hashing.
    let (count, saturated) = bounded_count(q.instance, q.witness, &[], piv + 1, stats, rng);
    if !saturated {
        return Ok(CountEstimate {
            value: count,
            exact: true,
        });
    }

    let ys: Vec<Var> = q.instance.y_vars().iter().copied().collect();
    let rounds = repetitions(q.delta);
    let mut estimates: Vec<u128> = Vec::with_capacity(rounds as usize);
    let mut prev_m: u32 = 1;
    for _ in 0..rounds {
        // Fresh hash stack for the round; prefixes give nested cells, so the
        // cell count is non-increasing in m.
        let stack: Vec<Parity> = (0..ny)
            .map(|_| {
                let vars: Vec<Var> = ys.iter().copied().filter(|_| rng.gen::<bool>()).collect();
                Parity {
                    vars,
                    bit: rng.gen(),
                }
            })
            .collect();
        // Find the smallest m whose cell fits under the pivot, starting from
        // the previous round's m (counts are monotone in m, so a local walk
        // finds it exactly).
        let mut m = prev_m.clamp(1, ny);
        let cell = |m: u32, stats: &mut OracleStats, rng: &mut _| {
            bounded_count(q.instance, q.witness, &stack[..m as usize], piv + 1, stats, rng)
        };
        let (mut c, sat) = cell(m, stats, rng);
        if sat {
            // Walk up until a cell fits (or every level saturates).
            let mut fitted = None;
            while m < ny {
                m += 1;
                let (c2, sat2) = cell(m, stats, rng);
                if !sat2 {
                    fitted = Some((m, c2));
                    break;
                }
            }
            match fitted {
                Some((mm, cc)) => {
                    m = mm;
                    c = cc;
                }
                None => continue, // round failed; all cells above pivot
            }
        } else {
            // Walk down while the smaller prefix still fits.
            while m > 1 {
                let (c2, sat2) = cell(m - 1, stats, rng);
                if sat2 {
                    break;
                }
                m -= 1;
                c = c2;
            }
        }
        prev_m = m;
        let scaled = c.checked_shl(m).unwrap_or(u128::MAX);
        estimates.push(match y_space {
            Some(space) => scaled.min(space),
            None => scaled,
        });
    }

    let value = match estimates.len() {
        0 => y_space.unwrap_or(u128::MAX), // every round failed (vanishing probability)
        n => {
            estimates.sort_unstable();
            estimates[(n - 1) / 2]
        }
    };
    Ok(CountEstimate {
        value,
        exact: false,
    })
}

/// Count with the oracle selected by `exact`, using the query's tolerances
/// for the probabilistic path.
pub fn projected_count(
    q: &CountQuery,
    exact: bool,
    stats: &mut OracleStats,
    rng: &mut impl Rng,
) -> Result<CountEstimate, CounterError> {
    if exact {
        Ok(CountEstimate {
            value: exact_projected_count(q, stats, rng)?,
            exact: true,
        })
    } else {
        approx_projected_count(q, stats, rng)
    }
}
