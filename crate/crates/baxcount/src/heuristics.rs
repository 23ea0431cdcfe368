//! Candidate-selection heuristics for the refinement loop: the lead pool,
//! literal activity, decision ordering, and progressive candidate
//! construction.
//!
//! The loop's progress depends on which candidate the SAT oracle hands it
//! next. Three signals steer that choice:
//!
//! - **Leads** — witness classes observed (during generalization) to hold
//!   more models than the incumbent. Assuming a lead's literals steers the
//!   next candidate into a provably promising region.
//! - **Activity** — recency-weighted frequency of literals in the blocking
//!   clauses added so far. Variables that keep appearing in blocks are the
//!   contended ones; deciding them first tends to expose large classes.
//! - **Randomness** — a shuffled decision order as a diversification
//!   baseline.
//!
//! Independently of ordering, candidates are *constructed progressively*:
//! the oracle's model is revealed a batch of witness variables at a time,
//! and the partial class is counted between batches. A prefix whose class
//! already fits under the incumbent condemns every completion, so the loop
//! can reject (and then generalize) the prefix without ever paying for a
//! full-witness count.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::counter::CounterError;
use crate::formula::{Lit, PartialWitness, Var};
use crate::generalize::Lead;

/// Maximum number of leads retained; weakest are evicted first.
pub const LEAD_POOL_CAPACITY: usize = 64;

const ACTIVITY_DECAY: f64 = 0.95;
const ACTIVITY_RESCALE: f64 = 1e100;

/// Decision-ordering strategy for candidate selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DecisionHeuristic {
    /// Steer into lead classes; order remaining variables by how often they
    /// appear in pooled leads.
    #[default]
    Leads,
    /// Order witness variables by blocking-clause literal activity.
    Vsids,
    /// Shuffle the witness variables.
    Rnd,
    /// Leave ordering to the SAT engine.
    None,
}

impl DecisionHeuristic {
    pub fn parse(s: &str) -> Option<DecisionHeuristic> {
        match s {
            "leads" => Some(DecisionHeuristic::Leads),
            "vsids" => Some(DecisionHeuristic::Vsids),
            "rnd" => Some(DecisionHeuristic::Rnd),
            "none" => Some(DecisionHeuristic::None),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DecisionHeuristic::Leads => "leads",
            DecisionHeuristic::Vsids => "vsids",
            DecisionHeuristic::Rnd => "rnd",
            DecisionHeuristic::None => "none",
        }
    }
}

/// Bounded pool of leads, strongest first.
///
/// Order: higher estimate first; among equal estimates, smaller (more
/// general) classes first. Pushing an already-pooled class keeps the larger
/// estimate.
#[derive(Clone, Debug, Default)]
pub struct LeadPool {
    leads: Vec<Lead>,
}

impl LeadPool {
    pub fn new() -> LeadPool {
        LeadPool::default()
    }

    pub fn len(&self) -> usize {
        self.leads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leads.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Lead> {
        self.leads.iter()
    }

    pub fn push(&mut self, lead: Lead) {
        debug_assert!(!lead.witness.is_empty());
        if let Some(existing) = self.leads.iter_mut().find(|l| l.witness == lead.witness) {
            existing.estimate = existing.estimate.max(lead.estimate);
        } else {
            self.leads.push(lead);
        }
        self.leads
            .sort_by(|a, b| b.estimate.cmp(&a.estimate).then(a.witness.len().cmp(&b.witness.len())));
        self.leads.truncate(LEAD_POOL_CAPACITY);
    }

    /// Remove and return the strongest lead.
    pub fn pop_best(&mut self) -> Option<Lead> {
        if self.leads.is_empty() {
            None
        } else {
            Some(self.leads.remove(0))
        }
    }

    /// Drain every lead whose estimate no longer beats the incumbent.
    /// The returned classes are exactly the ones the caller may block: their
    /// recorded estimate says they hold at most `best_count` models.
    pub fn flush_stale(&mut self, best_count: u128) -> Vec<Lead> {
        let (stale, live): (Vec<Lead>, Vec<Lead>) = self
            .leads
            .drain(..)
            .partition(|l| l.estimate <= best_count);
        self.leads = live;
        stale
    }

    /// How often each variable occurs across pooled leads — the decision
    /// signal of the leads heuristic.
    fn var_frequency(&self) -> std::collections::BTreeMap<Var, usize> {
        let mut freq = std::collections::BTreeMap::new();
        for lead in &self.leads {
            for (v, _) in lead.witness.iter() {
                *freq.entry(v).or_insert(0) += 1;
            }
        }
        freq
    }

    /// Witness variables ordered by lead frequency (descending, ties by
    /// variable index).
    pub fn frequency_order(&self, x_vars: &BTreeSet<Var>) -> Vec<Var> {
        let freq = self.var_frequency();
        let mut order: Vec<Var> = x_vars.iter().copied().collect();
        order.sort_by_key(|v| (std::cmp::Reverse(freq.get(v).copied().unwrap_or(0)), *v));
        order
    }
}

/// Recency-weighted literal occurrence scores.
///
/// Each recorded clause bumps its literals, then every score decays by a
/// constant factor, so recent blocks dominate. Scores are stored as
/// `raw * scale` with a shared scale factor, so decay is O(1); the raw
/// values are renormalized before they can overflow.
#[derive(Clone, Debug)]
pub struct ActivityTable {
    raw: Vec<f64>,
    scale: f64,
}

impl ActivityTable {
    pub fn new(num_vars: u32) -> ActivityTable {
        ActivityTable {
            raw: vec![0.0; 2 * (num_vars as usize + 1)],
            scale: 1.0,
        }
    }

    fn ensure(&mut self, lit: Lit) {
        let idx = lit.code() as usize;
        if idx >= self.raw.len() {
            self.raw.resize(idx + 1, 0.0);
        }
    }

    pub fn bump(&mut self, lit: Lit) {
        self.ensure(lit);
        self.raw[lit.code() as usize] += 1.0 / self.scale;
        if 1.0 / self.scale > ACTIVITY_RESCALE {
            for r in &mut self.raw {
                *r *= self.scale;
            }
            self.scale = 1.0;
        }
    }

    pub fn decay(&mut self) {
        self.scale *= ACTIVITY_DECAY;
    }

    /// Bump every literal of a clause, then decay — one "event".
    pub fn record_clause(&mut self, lits: &[Lit]) {
        for &l in lits {
            self.bump(l);
        }
        self.decay();
    }

    pub fn score(&self, lit: Lit) -> f64 {
        self.raw
            .get(lit.code() as usize)
            .copied()
            .unwrap_or(0.0)
            * self.scale
    }

    /// A variable's score is the better of its two literal scores.
    pub fn var_score(&self, v: Var) -> f64 {
        self.score(Lit::new(v, true)).max(self.score(Lit::new(v, false)))
    }

    /// Witness variables by descending score, ties by variable index.
    pub fn order_desc(&self, x_vars: &BTreeSet<Var>) -> Vec<Var> {
        let mut order: Vec<Var> = x_vars.iter().copied().collect();
        order.sort_by(|&a, &b| {
            self.var_score(b)
                .partial_cmp(&self.var_score(a))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }
}

/// The two oracle calls candidate selection needs, abstracted so the loop
/// driver owns the solver and counter state.
pub trait PickOracles {
    /// A model of the working formula under `assumptions`, restricted to
    /// the witness variables (total over `X`); `None` when unsatisfiable.
    fn solve_on_x(&mut self, assumptions: &[Lit], order: Option<&[Var]>)
        -> Option<PartialWitness>;

    /// Estimated model count of the witness class, at the driver's
    /// per-candidate tolerances.
    fn estimate_count(&mut self, witness: &PartialWitness) -> Result<u128, CounterError>;
}

/// What candidate selection produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pick {
    /// A total witness to count in full.
    Candidate {
        witness: PartialWitness,
        from_lead: bool,
    },
    /// A witness prefix whose class already fits under the incumbent; every
    /// completion is condemned, so the caller can generalize and block it
    /// without counting further.
    Rejected {
        witness: PartialWitness,
        estimate: u128,
        from_lead: bool,
    },
    /// The working formula has no model left: the witness space is
    /// exhausted.
    Exhausted,
}

/// Selection parameters.
#[derive(Clone, Copy, Debug)]
pub struct PickRequest<'a> {
    pub x_vars: &'a BTreeSet<Var>,
    /// Incumbent count `n_m`.
    pub best_count: u128,
    pub heuristic: DecisionHeuristic,
    /// Progressive batch size `q`: the partial class is counted after every
    /// `q` revealed variables. `q >= |X|` disables intermediate checks.
    pub batch: usize,
}

/// Default progressive batch size: a quarter of the witness variables.
pub fn default_batch(x_size: usize) -> usize {
    x_size.div_ceil(4).max(1)
}

/// Pick the next candidate witness.
///
/// With the leads heuristic, pooled leads are tried strongest-first: a lead
/// whose class has no model left in the working formula is dead and is
/// dropped on the spot. Whatever the ordering source, the resulting model
/// is revealed progressively and may be rejected early on a prefix.
pub fn pick_candidate(
    oracles: &mut dyn PickOracles,
    req: &PickRequest,
    pool: &mut LeadPool,
    activity: &ActivityTable,
    rng: &mut impl Rng,
) -> Result<Pick, CounterError> {
    let order: Vec<Var> = match req.heuristic {
        DecisionHeuristic::Leads => pool.frequency_order(req.x_vars),
        DecisionHeuristic::Vsids => activity.order_desc(req.x_vars),
        DecisionHeuristic::Rnd => {
            let mut o: Vec<Var> = req.x_vars.iter().copied().collect();
            o.shuffle(rng);
            o
        }
        DecisionHeuristic::None => req.x_vars.iter().copied().collect(),
    };
    let engine_order = (req.heuristic != DecisionHeuristic::None).then_some(order.as_slice());

    // Try pooled leads first (strongest first), dropping dead ones.
    if req.heuristic == DecisionHeuristic::Leads {
        while let Some(lead) = pool.pop_best() {
            let assumptions = lead.witness.literals();
            match oracles.solve_on_x(&assumptions, engine_order) {
                Some(model) => {
                    return progressive(oracles, req, &order, model, true);
                }
                None => continue, // dead lead: class emptied by blocking
            }
        }
    }

    match oracles.solve_on_x(&[], engine_order) {
        Some(model) => progressive(oracles, req, &order, model, false),
        None => Ok(Pick::Exhausted),
    }
}

/// Reveal `model` in `order`, a batch at a time, counting each strict
/// prefix; return early when a prefix class fits under the incumbent.
fn progressive(
    oracles: &mut dyn PickOracles,
    req: &PickRequest,
    order: &[Var],
    model: PartialWitness,
    from_lead: bool,
) -> Result<Pick, CounterError> {
    let q = req.batch.max(1);
    let n = order.len();
    let mut revealed = q;
    while revealed < n {
        let prefix: BTreeSet<Var> = order[..revealed].iter().copied().collect();
        let partial = model.restrict_to(&prefix);
        let estimate = oracles.estimate_count(&partial)?;
        if estimate <= req.best_count {
            return Ok(Pick::Rejected {
                witness: partial,
                estimate,
                from_lead,
            });
        }
        revealed += q;
    }
    Ok(Pick::Candidate {
        witness: model,
        from_lead,
    })
}
