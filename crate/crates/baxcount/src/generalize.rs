//! Witness generalization: relax a rejected candidate into the largest
//! witness class that provably stays at or below the incumbent count.
//!
//! When the refinement loop rejects a candidate `x` (its count `c` does not
//! beat the incumbent `n_m`), blocking only `x` makes slow progress — there
//! are up to `2^|X|` candidates. Instead we relax `x` to a partial witness
//! `x|_E` over a subset `E` of the witness variables, chosen so that the
//! whole class still counts at most `n_m` models. Blocking the class prunes
//! `2^(|X| - |E|)` candidates at once.
//!
//! The relaxation runs in three phases:
//!
//! 1. **Redundancy elimination** — a variable whose flipped value admits no
//!    model at all can leave `E` for free: the class count cannot change.
//!    This costs one SAT call per variable and no counting calls.
//! 2. **Logarithmic elimination** — the gap `log2(n_m) - log2(c)` suggests
//!    how many variables can likely be dropped simultaneously. Random
//!    subsets of that size are tried, and the size shrinks by one after
//!    each rejection. The phase is capped at `|X|` counting calls.
//! 3. **Refinement sweep** — one final pass over a snapshot of `E`, dropping
//!    each variable individually when the relaxed class still fits. Also at
//!    most `|X|` counting calls.
//!
//! Acceptance uses an estimate-aware threshold: an exact count may reach
//! `n_m` itself, while a probabilistic estimate must stay below
//! `n_m / (1 + epsilon)` so that the true count is at most `n_m` with the
//! configured confidence.
//!
//! Rejected relaxations whose estimate *exceeds* `n_m` double as leads:
//! the relaxed class demonstrably contains more models than the incumbent,
//! so some completion of it may be a better witness. Leads are returned to
//! the caller for the candidate-selection heuristics.

use std::collections::BTreeSet;

use rand::Rng;

use crate::counter::{
    approx_projected_count, exact_projected_count, CountEstimate, CounterError, CountQuery,
    OracleStats,
};
use crate::formula::{PartialWitness, ProblemInstance, Var};
use crate::sat::flip_is_unsat;

/// Phase of the relaxation that produced a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelaxPhase {
    Redundancy,
    Log,
    Sweep,
}

/// One attempted relaxation, kept for observability and replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxationStep {
    pub phase: RelaxPhase,
    /// Variables whose removal from `E` was attempted (sorted).
    pub removed: Vec<Var>,
    /// Count of the relaxed class; `None` for redundancy steps, which are
    /// decided by a SAT call alone.
    pub estimate: Option<u128>,
    pub accepted: bool,
}

/// A witness class observed to hold more models than the incumbent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lead {
    pub witness: PartialWitness,
    pub estimate: u128,
}

/// Inputs of one generalization call.
#[derive(Clone, Copy, Debug)]
pub struct GeneralizeRequest<'a> {
    /// The current working formula (with all blocking clauses added so far).
    pub instance: &'a ProblemInstance,
    /// The rejected candidate, total over `X`.
    pub witness: &'a PartialWitness,
    /// The candidate's count at call time.
    pub candidate_count: u128,
    /// The incumbent count `n_m`.
    pub best_count: u128,
    /// Counting tolerance; also the slack in the acceptance threshold.
    pub epsilon: f64,
    /// Overall confidence budget of this call, split evenly across its
    /// counting calls.
    pub delta: f64,
    /// Use the exact counter instead of the probabilistic one.
    pub exact: bool,
    /// Preferred order for the refinement sweep (variables absent from the
    /// current `E` are skipped; `E` members missing here follow in
    /// ascending order).
    pub sweep_order: Option<&'a [Var]>,
}

/// Result of a generalization call.
#[derive(Clone, Debug)]
pub struct GeneralizeOutcome {
    /// The relaxed class `x|_E`. Empty domain means the whole search space
    /// fits under the incumbent — the caller can stop.
    pub witness: PartialWitness,
    /// Count bound of the returned class: the estimate from its last
    /// accepted counting step, or the candidate's own count when only
    /// count-preserving steps (redundancy) were accepted.
    pub class_estimate: u128,
    pub steps: Vec<RelaxationStep>,
    pub leads: Vec<Lead>,
    /// Counting calls spent (the SAT-only redundancy phase not included).
    pub count_calls: u64,
}

fn accepts(est: CountEstimate, best: u128, epsilon: f64) -> bool {
    if est.exact || epsilon == 0.0 {
        est.value <= best
    } else {
        (est.value as f64) <= (best as f64) / (1.0 + epsilon)
    }
}

fn count_class(
    req: &GeneralizeRequest,
    w: &PartialWitness,
    per_call_delta: f64,
    stats: &mut OracleStats,
    rng: &mut impl Rng,
) -> Result<CountEstimate, CounterError> {
    let q = CountQuery {
        instance: req.instance,
        witness: w,
        epsilon: req.epsilon,
        delta: per_call_delta,
    };
    if req.exact {
        Ok(CountEstimate {
            value: exact_projected_count(&q, stats, rng)?,
            exact: true,
        })
    } else {
        approx_projected_count(&q, stats, rng)
    }
}

/// Relax `witness` to the largest class found that still counts at most
/// `best_count`, per the three-phase procedure above.
pub fn generalize(
    req: &GeneralizeRequest,
    stats: &mut OracleStats,
    rng: &mut impl Rng,
) -> Result<GeneralizeOutcome, CounterError> {
    // The candidate may already be partial (a progressively rejected
    // prefix); relaxation then starts from its domain instead of all of X.
    let x_size = req.instance.x_vars().len();

    // Degenerate call: the candidate itself exceeds the incumbent, so no
    // relaxation is sound. Return the unrelaxed class.
    if req.candidate_count > req.best_count {
        return Ok(GeneralizeOutcome {
            witness: req.witness.clone(),
            class_estimate: req.candidate_count,
            steps: Vec::new(),
            leads: Vec::new(),
            count_calls: 0,
        });
    }

    let mut e: BTreeSet<Var> = req.witness.domain();
    let mut steps: Vec<RelaxationStep> = Vec::new();
    let mut leads: Vec<Lead> = Vec::new();
    let mut count_calls: u64 = 0;
    let mut class_estimate: u128 = req.candidate_count;
    // Split the confidence budget across the worst-case number of counting
    // calls (both capped phases).
    let per_call_delta = req.delta / (2.0 * x_size.max(1) as f64);

    let note_lead = |w: &PartialWitness, est: CountEstimate, leads: &mut Vec<Lead>| {
        // An empty relaxation is the whole space; it is not actionable as a
        // candidate class, so it never becomes a lead.
        if est.value > req.best_count && !w.is_empty() {
            leads.push(Lead {
                witness: w.clone(),
                estimate: est.value,
            });
        }
    };

    // Phase 1: redundancy elimination. If flipping `v` (keeping the rest of
    // the class fixed) is unsatisfiable, the relaxed class has exactly the
    // same models — drop `v` without counting.
    let initial: Vec<Var> = e.iter().copied().collect();
    for v in initial {
        let current = req.witness.restrict_to(&e);
        let redundant = flip_is_unsat(req.instance, &current, v, rng);
        stats.sat_calls += 1;
        steps.push(RelaxationStep {
            phase: RelaxPhase::Redundancy,
            removed: vec![v],
            estimate: None,
            accepted: redundant,
        });
        if redundant {
            e.remove(&v);
        }
    }

    // Phase 2: logarithmic elimination. The count can at most double per
    // freed variable, so the log-gap bounds how many variables a fitting
    // class can spare; start there and back off on rejection.
    let gap = req.best_count.max(1).ilog2() - req.candidate_count.max(1).ilog2();
    let mut k = (gap as usize).min(e.len());
    let mut log_calls = 0usize;
    while k > 0 && !e.is_empty() && log_calls < x_size {
        let pool: Vec<Var> = e.iter().copied().collect();
        let take = k.min(pool.len());
        let picked = rand::seq::index::sample(rng, pool.len(), take);
        let dropped: BTreeSet<Var> = picked.iter().map(|i| pool[i]).collect();
        let kept: BTreeSet<Var> = e.difference(&dropped).copied().collect();
        let relaxed = req.witness.restrict_to(&kept);
        let est = count_class(req, &relaxed, per_call_delta, stats, rng)?;
        log_calls += 1;
        let ok = accepts(est, req.best_count, req.epsilon);
        steps.push(RelaxationStep {
            phase: RelaxPhase::Log,
            removed: dropped.iter().copied().collect(),
            estimate: Some(est.value),
            accepted: ok,
        });
        if ok {
            e = kept;
            class_estimate = est.value;
        } else {
            note_lead(&relaxed, est, &mut leads);
            k -= 1;
        }
    }
    count_calls += log_calls as u64;

    // Phase 3: refinement sweep over a snapshot of `E`, one variable at a
    // time, in the caller's preferred order.
    let snapshot: Vec<Var> = match req.sweep_order {
        Some(order) => {
            let mut seen: BTreeSet<Var> = BTreeSet::new();
            let mut out: Vec<Var> = Vec::with_capacity(e.len());
            for &v in order {
                if e.contains(&v) && seen.insert(v) {
                    out.push(v);
                }
            }
            out.extend(e.iter().copied().filter(|v| !seen.contains(v)));
            out
        }
        None => e.iter().copied().collect(),
    };
    let mut sweep_calls = 0usize;
    for v in snapshot {
        if !e.contains(&v) || sweep_calls >= x_size {
            break;
        }
        let kept: BTreeSet<Var> = e.iter().copied().filter(|&u| u != v).collect();
        let relaxed = req.witness.restrict_to(&kept);
        let est = count_class(req, &relaxed, per_call_delta, stats, rng)?;
        sweep_calls += 1;
        let ok = accepts(est, req.best_count, req.epsilon);
        steps.push(RelaxationStep {
            phase: RelaxPhase::Sweep,
            removed: vec![v],
            estimate: Some(est.value),
            accepted: ok,
        });
        if ok {
            e = kept;
            class_estimate = est.value;
        } else {
            note_lead(&relaxed, est, &mut leads);
        }
    }
    count_calls += sweep_calls as u64;

    Ok(GeneralizeOutcome {
        witness: req.witness.restrict_to(&e),
        class_estimate,
        steps,
        leads,
        count_calls,
    })
}
