//! The refinement loop: counterexample-guided search for the witness with
//! the maximal projected model count, plus the threshold decision procedure.
//!
//! The loop keeps a working formula `phi_s` (the instance plus every
//! blocking clause added so far), an incumbent witness with count `n_m`,
//! and an upper bound `N` — the projected count of the *whole* remaining
//! space, which bounds every remaining class from above. Each iteration:
//!
//! 1. Ask the SAT oracle for a candidate witness in `phi_s` (steered by the
//!    configured heuristic, constructed progressively so hopeless prefixes
//!    are rejected before a full count is paid).
//! 2. Count the candidate's class. A candidate that beats `n_m` becomes the
//!    new incumbent and its point class is blocked; stale leads are flushed
//!    and their classes blocked too. A candidate that does not beat `n_m`
//!    is generalized to a whole region counting at most `n_m`, and that
//!    region is blocked.
//! 3. Recount `N` over the shrunken space. The loop stops as soon as
//!    `n_m >= N / (1 + kappa)`: nothing left can beat the incumbent by more
//!    than the configured slack.
//!
//! In exact mode every oracle answer is an exact count and the result is
//! the true maximum. In probabilistic mode the per-call tolerances are
//! derived from the caller's overall `(epsilon, delta)` budget, and the
//! returned count is within a factor `1 + epsilon` of the true maximum with
//! probability at least `1 - delta`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::counter::{derive_parameters, projected_count, CounterError, CountQuery, OracleStats};
use crate::formula::{blocking_clause, FormulaError, Lit, PartialWitness, ProblemInstance, Var};
use crate::generalize::{generalize, GeneralizeRequest, Lead};
use crate::heuristics::{
    default_batch, pick_candidate, ActivityTable, DecisionHeuristic, LeadPool, Pick, PickOracles,
    PickRequest,
};
use crate::preprocess::{prepare, PreprocessOptions, PreprocessSummary, Prepared};
use crate::sat::{PolarityMode, SolveOptions, Solver};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Counter(#[from] CounterError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

pub const DEFAULT_EPSILON: f64 = 0.8;
pub const DEFAULT_DELTA: f64 = 0.2;

/// Full solver configuration. [`SolverConfig::exact`] and
/// [`SolverConfig::approximate`] give the two standard setups.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Use exact projected counting everywhere.
    pub exact: bool,
    /// Overall relative tolerance of the returned count (probabilistic
    /// mode).
    pub epsilon: f64,
    /// Overall failure probability (probabilistic mode).
    pub delta: f64,
    /// Early-stopping slack override; derived from `epsilon` when absent.
    pub kappa: Option<f64>,
    pub heuristic: DecisionHeuristic,
    pub polarity: PolarityMode,
    /// Enable symmetry breaking during preprocessing.
    pub symmetry: bool,
    /// Enable equivalent-literal merging during preprocessing.
    pub equivalences: bool,
    pub seed: u64,
    pub timeout: Option<Duration>,
    /// Progressive construction batch size; defaults to `ceil(|X| / 4)`.
    pub progressive_batch: Option<usize>,
    /// Record every blocking event for later replay.
    pub record_trace: bool,
    /// Assert, after each block, that the recorded evidence respects the
    /// incumbent bound (debug aid).
    pub debug_checks: bool,
}

impl SolverConfig {
    pub fn exact(seed: u64) -> SolverConfig {
        SolverConfig {
            exact: true,
            epsilon: DEFAULT_EPSILON,
            delta: DEFAULT_DELTA,
            kappa: None,
            heuristic: DecisionHeuristic::Leads,
            polarity: PolarityMode::Rnd,
            symmetry: true,
            equivalences: true,
            seed,
            timeout: None,
            progressive_batch: None,
            record_trace: false,
            debug_checks: false,
        }
    }

    pub fn approximate(epsilon: f64, delta: f64, seed: u64) -> SolverConfig {
        SolverConfig {
            exact: false,
            epsilon,
            delta,
            ..SolverConfig::exact(seed)
        }
    }
}

/// How a solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// The loop terminated by its own stopping criterion.
    Complete,
    /// The time budget ran out; the result is the best found so far.
    TimedOut,
}

/// Why a class was blocked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSource {
    /// The point class of a new incumbent.
    NewBest,
    /// A generalized region counting at most the incumbent.
    Generalized,
    /// A pooled lead whose estimate fell to or below the incumbent.
    Lead,
}

/// One blocking clause added to the working formula, with the evidence that
/// justified it at the time.
#[derive(Clone, Debug)]
pub struct BlockEvent {
    pub class: PartialWitness,
    /// Incumbent bound the block was measured against (for a new best, the
    /// updated incumbent — its count equals the bound by construction).
    pub incumbent: u128,
    /// The estimate that justified the block.
    pub estimate: u128,
    pub source: BlockSource,
}

/// Everything needed to replay a run's blocking decisions.
#[derive(Clone, Debug)]
pub struct Trace {
    /// The preprocessed instance the loop actually ran on.
    pub prepared: ProblemInstance,
    pub events: Vec<BlockEvent>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveStats {
    /// Loop iterations (candidates considered, including rejected
    /// prefixes).
    pub iterations: u64,
    /// Times the incumbent improved.
    pub improvements: u64,
    pub blocked_classes: u64,
    /// Candidates that came out of the lead pool.
    pub leads_taken: u64,
    pub generalize_calls: u64,
    /// Whole-space recounts.
    pub recounts: u64,
    pub oracle: OracleStats,
    pub preprocess: PreprocessSummary,
    pub elapsed: Duration,
}

/// Result of a maximization run.
#[derive(Clone, Debug)]
pub struct MaxCountResult {
    /// A witness attaining `count`, over the original witness variables;
    /// `None` when the formula has no models at all.
    pub witness: Option<PartialWitness>,
    /// The (estimated) maximal projected model count.
    pub count: u128,
    /// Final whole-space count of the unblocked remainder: an upper bound
    /// on every class the search did not visit.
    pub upper_bound: u128,
    /// True when every estimate contributing to the result was exact
    /// (always in exact mode; in probabilistic mode, when every oracle call
    /// took the enumeration path).
    pub exact: bool,
    pub status: SolveStatus,
    pub stats: SolveStats,
    pub trace: Option<Trace>,
}

/// Decision form: is the maximal count at least the threshold?
#[derive(Clone, Debug)]
pub struct DecideResult {
    pub answer: bool,
    /// True when the answer rests on probabilistic counts.
    pub probabilistic: bool,
    pub result: MaxCountResult,
}

/// Maximize the projected model count over the witness space.
pub fn solve_maxcount(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<MaxCountResult, SolverError> {
    run(inst, cfg, None)
}

/// Decide whether some witness reaches `threshold` projected models. The
/// search stops early once the incumbent proves "yes" or the upper bound
/// proves "no"; a zero threshold is trivially true.
pub fn decide_dmaxsat(
    inst: &ProblemInstance,
    threshold: u128,
    cfg: &SolverConfig,
) -> Result<DecideResult, SolverError> {
    if threshold == 0 {
        // Every witness has at least zero models; no search needed.
        let witness =
            PartialWitness::from_pairs(inst.x_vars().iter().map(|&v| (v, false)));
        return Ok(DecideResult {
            answer: true,
            probabilistic: false,
            result: MaxCountResult {
                witness: Some(witness),
                count: 0,
                upper_bound: 0,
                exact: true,
                status: SolveStatus::Complete,
                stats: SolveStats::default(),
                trace: None,
            },
        });
    }
    let result = run(inst, cfg, Some(threshold))?;
    Ok(DecideResult {
        answer: result.count >= threshold,
        probabilistic: !result.exact,
        result,
    })
}

/// Per-run derived tolerances.
struct LoopParams {
    eps0: f64,
    kappa: f64,
    delta0: f64,
    delta2: f64,
}

/// Shared per-run solver state: the working formula plus the oracles the
/// candidate picker needs.
struct Driver<'a> {
    phi_s: ProblemInstance,
    cfg: &'a SolverConfig,
    eps1: f64,
    delta1: f64,
    stats: SolveStats,
    all_exact: bool,
    rng: ChaCha8Rng,
    deadline: Option<Instant>,
}

impl Driver<'_> {
    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn count_class(
        &mut self,
        w: &PartialWitness,
        epsilon: f64,
        delta: f64,
    ) -> Result<u128, CounterError> {
        let q = CountQuery {
            instance: &self.phi_s,
            witness: w,
            epsilon,
            delta,
        };
        let est = projected_count(&q, self.cfg.exact, &mut self.stats.oracle, &mut self.rng)?;
        self.all_exact &= est.exact;
        Ok(est.value)
    }
}

impl PickOracles for Driver<'_> {
    fn solve_on_x(&mut self, assumptions: &[Lit], order: Option<&[Var]>) -> Option<PartialWitness> {
        let opts = SolveOptions {
            polarity: self.cfg.polarity,
            decision_order: order.map(|o| o.to_vec()),
        };
        let mut solver = Solver::from_instance(&self.phi_s);
        let outcome = solver.solve(assumptions, &opts, &mut self.rng);
        self.stats.oracle.sat_calls += solver.stats().solves;
        self.stats.oracle.sat_decisions += solver.stats().decisions;
        outcome
            .model()
            .map(|m| PartialWitness::from_assignment(m, self.phi_s.x_vars()))
    }

    fn estimate_count(&mut self, witness: &PartialWitness) -> Result<u128, CounterError> {
        self.count_class(witness, self.eps1, self.delta1)
    }
}

fn run(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    target: Option<u128>,
) -> Result<MaxCountResult, SolverError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let prep_opts = PreprocessOptions {
        equivalences: cfg.equivalences,
        symmetry: cfg.symmetry,
        ..PreprocessOptions::default()
    };
    let prep: Prepared = prepare(inst, &prep_opts);
    let stats = SolveStats {
        preprocess: prep.summary,
        ..SolveStats::default()
    };
    if prep.unsat {
        let mut stats = stats;
        stats.elapsed = start.elapsed();
        return Ok(MaxCountResult {
            witness: None,
            count: 0,
            upper_bound: 0,
            exact: true,
            status: SolveStatus::Complete,
            stats,
            trace: cfg.record_trace.then(|| Trace {
                prepared: prep.instance.clone(),
                events: Vec::new(),
            }),
        });
    }

    let x_size = prep.instance.x_vars().len();
    let (params, eps1, delta1) = if cfg.exact {
        (
            LoopParams {
                eps0: 0.0,
                kappa: cfg.kappa.unwrap_or(0.0),
                delta0: 0.5,
                delta2: 0.5,
            },
            0.0,
            0.5,
        )
    } else {
        let p = derive_parameters(cfg.epsilon, cfg.delta, x_size)?;
        (
            LoopParams {
                eps0: p.epsilon0,
                kappa: cfg.kappa.unwrap_or(p.kappa),
                delta0: p.delta0,
                delta2: p.delta2,
            },
            p.epsilon1,
            p.delta1,
        )
    };

    let mut driver = Driver {
        phi_s: prep.instance.clone(),
        cfg,
        eps1,
        delta1,
        stats,
        all_exact: true,
        rng: ChaCha8Rng::seed_from_u64(rng.gen()),
        deadline: cfg.timeout.map(|t| start + t),
    };

    let outcome = run_loop(&mut driver, &prep, &params, target, &mut rng)?;

    let mut stats = driver.stats;
    stats.elapsed = start.elapsed();
    let witness = outcome.best_witness.map(|w| prep.restore_witness(&w));
    Ok(MaxCountResult {
        witness,
        count: outcome.best_count,
        upper_bound: outcome.upper_bound,
        exact: driver.all_exact,
        status: outcome.status,
        stats,
        trace: cfg.record_trace.then(|| Trace {
            prepared: prep.instance,
            events: outcome.events,
        }),
    })
}

struct LoopOutcome {
    best_witness: Option<PartialWitness>,
    best_count: u128,
    upper_bound: u128,
    status: SolveStatus,
    events: Vec<BlockEvent>,
}

fn run_loop(
    driver: &mut Driver,
    prep: &Prepared,
    params: &LoopParams,
    target: Option<u128>,
    rng: &mut ChaCha8Rng,
) -> Result<LoopOutcome, SolverError> {
    let x_vars: BTreeSet<Var> = prep.instance.x_vars().clone();
    let empty = PartialWitness::new();
    let mut best_witness: Option<PartialWitness> = None;
    let mut best_count: u128 = 0;
    let mut events: Vec<BlockEvent> = Vec::new();
    let mut pool = LeadPool::new();
    let mut activity = ActivityTable::new(prep.instance.num_vars());
    let batch = driver
        .cfg
        .progressive_batch
        .unwrap_or_else(|| default_batch(x_vars.len()));

    let mut upper = driver.count_class(&empty, params.eps0, params.delta0)?;
    driver.stats.recounts += 1;

    // No witness variables: the empty class is the only candidate.
    if x_vars.is_empty() {
        return Ok(LoopOutcome {
            best_witness: (upper > 0).then(PartialWitness::new),
            best_count: upper,
            upper_bound: upper,
            status: SolveStatus::Complete,
            events,
        });
    }

    let keep_going = |n_m: u128, n: u128| -> bool {
        if params.kappa == 0.0 {
            n_m < n
        } else {
            (n_m as f64) * (1.0 + params.kappa) < n as f64
        }
    };

    let mut status = SolveStatus::Complete;
    while keep_going(best_count, upper) {
        if let Some(t) = target {
            // Decision mode: stop as soon as the answer is settled either way.
            if best_count >= t || upper < t {
                break;
            }
        }
        if driver.timed_out() {
            status = SolveStatus::TimedOut;
            break;
        }
        driver.stats.iterations += 1;

        let req = PickRequest {
            x_vars: &x_vars,
            best_count,
            heuristic: driver.cfg.heuristic,
            batch,
        };
        let mut pick_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        let pick = pick_candidate(driver, &req, &mut pool, &activity, &mut pick_rng)?;

        // Resolve the pick into the class to block, with its evidence.
        let resolved: Option<(PartialWitness, u128, BlockSource)> = match pick {
            Pick::Exhausted => None,
            Pick::Candidate { witness, from_lead } => {
                if from_lead {
                    driver.stats.leads_taken += 1;
                }
                if driver.timed_out() {
                    status = SolveStatus::TimedOut;
                    break;
                }
                let c = driver.estimate_count(&witness)?;
                if c > best_count {
                    best_count = c;
                    best_witness = Some(witness.clone());
                    driver.stats.improvements += 1;
                    // Stale leads can no longer beat the incumbent; their
                    // recorded estimates bound them at or below it, so their
                    // whole classes are blocked alongside the point class.
                    for lead in pool.flush_stale(best_count) {
                        block(
                            driver,
                            &mut activity,
                            &mut events,
                            lead.witness,
                            best_count,
                            lead.estimate,
                            BlockSource::Lead,
                        )?;
                    }
                    Some((witness, c, BlockSource::NewBest))
                } else {
                    relax(
                        driver, &witness, c, best_count, params, &mut pool, &activity, rng,
                    )?
                    .map(|(class, est)| (class, est, BlockSource::Generalized))
                }
            }
            Pick::Rejected {
                witness,
                estimate,
                from_lead,
            } => {
                if from_lead {
                    driver.stats.leads_taken += 1;
                }
                relax(
                    driver, &witness, estimate, best_count, params, &mut pool, &activity, rng,
                )?
                .map(|(class, est)| (class, est, BlockSource::Generalized))
            }
        };

        // No class to block means the search space is settled: either no
        // model is left, or generalization emptied the witness (everything
        // remaining fits under the incumbent).
        let Some((class, estimate, source)) = resolved else {
            break;
        };
        block(
            driver,
            &mut activity,
            &mut events,
            class,
            best_count,
            estimate,
            source,
        )?;

        if driver.timed_out() {
            status = SolveStatus::TimedOut;
            break;
        }
        upper = driver.count_class(&empty, params.eps0, params.delta0)?;
        driver.stats.recounts += 1;
    }

    Ok(LoopOutcome {
        best_witness,
        best_count,
        upper_bound: upper,
        status,
        events,
    })
}

/// Generalize a rejected candidate, absorbing discovered leads into the
/// pool. Returns the class to block with its evidence, or `None` when the
/// relaxation emptied the witness — proof that everything left fits under
/// the incumbent.
#[allow(clippy::too_many_arguments)]
fn relax(
    driver: &mut Driver,
    witness: &PartialWitness,
    candidate_count: u128,
    best_count: u128,
    params: &LoopParams,
    pool: &mut LeadPool,
    activity: &ActivityTable,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(PartialWitness, u128)>, SolverError> {
    driver.stats.generalize_calls += 1;
    let sweep_order = match driver.cfg.heuristic {
        DecisionHeuristic::Leads => Some(pool.frequency_order(driver.phi_s.x_vars())),
        DecisionHeuristic::Vsids => Some(activity.order_desc(driver.phi_s.x_vars())),
        DecisionHeuristic::Rnd | DecisionHeuristic::None => None,
    };
    let req = GeneralizeRequest {
        instance: &driver.phi_s,
        witness,
        candidate_count,
        best_count,
        epsilon: if driver.cfg.exact { 0.0 } else { driver.eps1 },
        delta: params.delta2,
        exact: driver.cfg.exact,
        sweep_order: sweep_order.as_deref(),
    };
    let mut gen_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let out = generalize(&req, &mut driver.stats.oracle, &mut gen_rng)?;
    for lead in out.leads {
        absorb_lead(pool, lead);
    }
    if out.witness.is_empty() {
        return Ok(None);
    }
    Ok(Some((out.witness, out.class_estimate)))
}

fn absorb_lead(pool: &mut LeadPool, lead: Lead) {
    pool.push(lead);
}

/// Add a blocking clause for `class`, record the event, and feed the
/// literal activity.
fn block(
    driver: &mut Driver,
    activity: &mut ActivityTable,
    events: &mut Vec<BlockEvent>,
    class: PartialWitness,
    incumbent: u128,
    estimate: u128,
    source: BlockSource,
) -> Result<(), SolverError> {
    let clause = blocking_clause(&class)?;
    activity.record_clause(clause.lits());
    driver.phi_s = driver.phi_s.extended_with([clause]);
    driver.stats.blocked_classes += 1;
    if driver.cfg.debug_checks {
        assert!(
            estimate <= incumbent,
            "blocked class evidence {estimate} above incumbent {incumbent}"
        );
    }
    if driver.cfg.record_trace {
        events.push(BlockEvent {
            class,
            incumbent,
            estimate,
            source,
        });
    }
    Ok(())
}
