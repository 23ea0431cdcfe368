//! A small CDCL SAT solver.
//!
//! Complete and deterministic: the same clause set, assumptions, options and
//! RNG seed always produce the same outcome (and the same model). Assumptions
//! are applied as forced first decisions; a falsified assumption reports
//! unsatisfiability without extracting a core. Models are checked against
//! every problem clause before being returned.
//!
//! The engine deliberately stays simple where the workload allows it:
//! two-watched-literal propagation, first-UIP clause learning, exponential
//! variable activity decay, Luby restarts, and no learnt-clause deletion
//! (queries in this crate are small and short-lived).

use rand::Rng;

use crate::formula::{Assignment, Clause, Lit, PartialWitness, ProblemInstance, Var};

/// Which value a decision assigns first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PolarityMode {
    /// Saved phase per variable, initially `false`.
    Cache,
    /// Always `false` first.
    #[default]
    Neg,
    /// Always `true` first.
    Pos,
    /// Seeded coin flip per decision.
    Rnd,
}

impl PolarityMode {
    pub fn parse(s: &str) -> Option<PolarityMode> {
        match s {
            "cache" => Some(PolarityMode::Cache),
            "neg" => Some(PolarityMode::Neg),
            "pos" => Some(PolarityMode::Pos),
            "rnd" => Some(PolarityMode::Rnd),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolarityMode::Cache => "cache",
            PolarityMode::Neg => "neg",
            PolarityMode::Pos => "pos",
            PolarityMode::Rnd => "rnd",
        }
    }
}

/// Per-query options.
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub polarity: PolarityMode,
    /// Variables to decide first, in order, before the internal activity
    /// order takes over. Typically the witness variables.
    pub decision_order: Option<Vec<Var>>,
}

/// Outcome of a query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Assignment),
    Unsat,
}

impl SatOutcome {
    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SatOutcome::Sat(a) => Some(a),
            SatOutcome::Unsat => None,
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }
}

/// Counters accumulated across all queries of one engine.
#[derive(Clone, Copy, Debug, Default)]
pub struct EngineStats {
    pub solves: u64,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

const VAR_DECAY: f64 = 0.95;
const RESCALE_LIMIT: f64 = 1e100;
const RESTART_UNIT: u64 = 100;

type ClauseRef = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    Undef,
    True,
    False,
}

pub struct Solver {
    num_vars: u32,
    /// Problem clauses (index < first_learnt) followed by learnt clauses.
    clauses: Vec<Vec<Lit>>,
    first_learnt: usize,
    watches: Vec<Vec<ClauseRef>>, // indexed by watched literal code
    assign: Vec<Value>,           // indexed by var
    phase: Vec<bool>,             // saved polarity per var
    reason: Vec<Option<ClauseRef>>,
    level: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    prop_head: usize,
    activity: Vec<f64>,
    act_inc: f64,
    unsat: bool,
    stats: EngineStats,
    seen: Vec<bool>, // scratch for conflict analysis
}

impl Solver {
    pub fn new(num_vars: u32) -> Solver {
        let n = num_vars as usize;
        Solver {
            num_vars,
            clauses: Vec::new(),
            first_learnt: 0,
            watches: vec![Vec::new(); 2 * (n + 1)],
            assign: vec![Value::Undef; n + 1],
            phase: vec![false; n + 1],
            reason: vec![None; n + 1],
            level: vec![0; n + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            prop_head: 0,
            activity: vec![0.0; n + 1],
            act_inc: 1.0,
            unsat: false,
            stats: EngineStats::default(),
            seen: vec![false; n + 1],
        }
    }

    /// Engine preloaded with the instance's clauses.
    pub fn from_instance(inst: &ProblemInstance) -> Solver {
        let mut s = Solver::new(inst.num_vars());
        for c in inst.clauses() {
            s.add_clause(c.lits());
        }
        s
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    /// Allocate a fresh variable (used for parity-constraint auxiliaries).
    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.assign.push(Value::Undef);
        self.phase.push(false);
        self.reason.push(None);
        self.level.push(0);
        self.activity.push(0.0);
        self.seen.push(false);
        self.num_vars
    }

    fn value_lit(&self, l: Lit) -> Value {
        match self.assign[l.var() as usize] {
            Value::Undef => Value::Undef,
            Value::True => {
                if l.is_positive() {
                    Value::True
                } else {
                    Value::False
                }
            }
            Value::False => {
                if l.is_positive() {
                    Value::False
                } else {
                    Value::True
                }
            }
        }
    }

    /// Add a clause. May be called between queries; the solver must be at
    /// decision level 0 (which `solve` guarantees on return).
    pub fn add_clause(&mut self, lits: &[Lit]) {
        debug_assert!(self.trail_lim.is_empty());
        if self.unsat {
            return;
        }
        let normalized = Clause::new(lits.to_vec());
        if normalized.is_tautology() {
            return;
        }
        // Root-level simplification.
        let mut c: Vec<Lit> = Vec::with_capacity(normalized.len());
        for &l in normalized.lits() {
            debug_assert!(l.var() >= 1 && l.var() <= self.num_vars);
            match self.value_lit(l) {
                Value::True => return, // satisfied forever
                Value::False => {}     // falsified at root, drop
                Value::Undef => c.push(l),
            }
        }
        match c.len() {
            0 => self.unsat = true,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
            }
            _ => {
                let idx = self.push_clause(c);
                if self.first_learnt == idx as usize {
                    self.first_learnt += 1;
                }
            }
        }
    }

    fn push_clause(&mut self, c: Vec<Lit>) -> ClauseRef {
        let idx = self.clauses.len() as ClauseRef;
        self.watches[c[0].code()].push(idx);
        self.watches[c[1].code()].push(idx);
        self.clauses.push(c);
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        debug_assert_eq!(self.value_lit(l), Value::Undef);
        let v = l.var() as usize;
        self.assign[v] = if l.is_positive() {
            Value::True
        } else {
            Value::False
        };
        self.reason[v] = reason;
        self.level[v] = self.trail_lim.len() as u32;
        self.trail.push(l);
    }

    /// Propagate until fixpoint; returns the conflicting clause if any.
    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.prop_head < self.trail.len() {
            let p = self.trail[self.prop_head];
            self.prop_head += 1;
            self.stats.propagations += 1;
            let falsified = !p;
            let mut i = 0;
            while i < self.watches[falsified.code()].len() {
                let cref = self.watches[falsified.code()][i];
                // Normalize so the falsified watch sits at position 1.
                if self.clauses[cref as usize][0] == falsified {
                    self.clauses[cref as usize].swap(0, 1);
                }
                debug_assert_eq!(self.clauses[cref as usize][1], falsified);
                let first = self.clauses[cref as usize][0];
                if self.value_lit(first) == Value::True {
                    i += 1;
                    continue;
                }
                // Look for a replacement watch.
                let len = self.clauses[cref as usize].len();
                let mut replaced = false;
                for k in 2..len {
                    let cand = self.clauses[cref as usize][k];
                    if self.value_lit(cand) != Value::False {
                        self.clauses[cref as usize].swap(1, k);
                        self.watches[falsified.code()].swap_remove(i);
                        self.watches[cand.code()].push(cref);
                        replaced = true;
                        break;
                    }
                }
                if replaced {
                    continue;
                }
                // No replacement: unit or conflict.
                if self.value_lit(first) == Value::False {
                    return Some(cref);
                }
                self.enqueue(first, Some(cref));
                i += 1;
            }
        }
        None
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, target: u32) {
        while self.decision_level() > target {
            let start = self.trail_lim.pop().unwrap();
            for &l in &self.trail[start..] {
                let v = l.var() as usize;
                self.phase[v] = l.is_positive();
                self.assign[v] = Value::Undef;
                self.reason[v] = None;
            }
            self.trail.truncate(start);
        }
        self.prop_head = self.prop_head.min(self.trail.len());
    }

    fn bump_var(&mut self, v: Var) {
        self.activity[v as usize] += self.act_inc;
        if self.activity[v as usize] > RESCALE_LIMIT {
            for a in &mut self.activity {
                *a *= 1.0 / RESCALE_LIMIT;
            }
            self.act_inc *= 1.0 / RESCALE_LIMIT;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, conflict: ClauseRef) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::positive(1)]; // placeholder slot 0
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut cref = conflict;
        let mut trail_idx = self.trail.len();
        let current = self.decision_level();

        loop {
            let skip = usize::from(p.is_some());
            for k in skip..self.clauses[cref as usize].len() {
                let q = self.clauses[cref as usize][k];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // Walk back to the next marked literal on the trail.
            loop {
                trail_idx -= 1;
                if self.seen[self.trail[trail_idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[trail_idx];
            self.seen[lit.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = !lit;
                break;
            }
            cref = self.reason[lit.var() as usize].expect("non-decision literal has a reason");
            p = Some(lit);
        }

        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        // Backjump to the second-highest level in the learnt clause.
        let mut back = 0;
        let mut at = 1;
        for (i, l) in learnt.iter().enumerate().skip(1) {
            let lv = self.level[l.var() as usize];
            if lv > back {
                back = lv;
                at = i;
            }
        }
        if learnt.len() > 1 {
            learnt.swap(1, at);
        }
        self.act_inc /= VAR_DECAY;
        (learnt, back)
    }

    /// Luby sequence (1 1 2 1 1 2 4 ...), 0-indexed.
    fn luby(mut x: u64) -> u64 {
        let mut size = 1u64;
        let mut seq = 0u32;
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1u64 << seq
    }

    fn pick_branch_var(&self, opts: &SolveOptions) -> Option<Var> {
        if let Some(order) = &opts.decision_order {
            for &v in order {
                if self.assign[v as usize] == Value::Undef {
                    return Some(v);
                }
            }
        }
        let mut best: Option<Var> = None;
        let mut best_act = f64::NEG_INFINITY;
        for v in 1..=self.num_vars {
            if self.assign[v as usize] == Value::Undef && self.activity[v as usize] > best_act {
                best = Some(v);
                best_act = self.activity[v as usize];
            }
        }
        best
    }

    /// Solve under the given assumptions.
    pub fn solve(
        &mut self,
        assumptions: &[Lit],
        opts: &SolveOptions,
        rng: &mut impl Rng,
    ) -> SatOutcome {
        self.stats.solves += 1;
        if self.unsat {
            return SatOutcome::Unsat;
        }
        if self.propagate().is_some() {
            self.unsat = true;
            return SatOutcome::Unsat;
        }

        let mut conflicts_here = 0u64;
        let mut restart_round = 0u64;
        let mut restart_budget = Self::luby(restart_round) * RESTART_UNIT;
        let outcome = loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    break SatOutcome::Unsat;
                }
                let (learnt, back) = self.analyze(conflict);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.push_clause(learnt.clone());
                    self.enqueue(learnt[0], Some(cref));
                }
                continue;
            }
            if conflicts_here >= restart_budget {
                conflicts_here = 0;
                restart_round += 1;
                restart_budget = Self::luby(restart_round) * RESTART_UNIT;
                self.cancel_until(0);
                continue;
            }
            // Apply pending assumptions as forced decisions.
            let lvl = self.decision_level() as usize;
            if lvl < assumptions.len() {
                let a = assumptions[lvl];
                match self.value_lit(a) {
                    Value::True => {
                        self.new_decision_level(); // already implied; keep level bookkeeping
                        continue;
                    }
                    Value::False => break SatOutcome::Unsat, // assumption conflict
                    Value::Undef => {
                        self.new_decision_level();
                        self.enqueue(a, None);
                        continue;
                    }
                }
            }
            match self.pick_branch_var(opts) {
                None => {
                    let model = self.extract_model();
                    break SatOutcome::Sat(model);
                }
                Some(v) => {
                    self.stats.decisions += 1;
                    let value = match opts.polarity {
                        PolarityMode::Cache => self.phase[v as usize],
                        PolarityMode::Neg => false,
                        PolarityMode::Pos => true,
                        PolarityMode::Rnd => rng.gen::<bool>(),
                    };
                    self.new_decision_level();
                    self.enqueue(Lit::new(v, value), None);
                }
            }
        };
        if let SatOutcome::Sat(model) = &outcome {
            self.verify_model(model, assumptions);
        }
        self.cancel_until(0);
        outcome
    }

    fn extract_model(&self) -> Assignment {
        let mut values = vec![false; self.num_vars as usize + 1];
        for v in 1..=self.num_vars as usize {
            values[v] = self.assign[v] == Value::True;
        }
        Assignment::from_values(values)
    }

    /// Every problem (non-learnt) clause and every assumption must hold in a
    /// returned model; a violation is an engine bug, so it panics.
    fn verify_model(&self, model: &Assignment, assumptions: &[Lit]) {
        for c in &self.clauses[..self.first_learnt] {
            assert!(
                c.iter().any(|&l| model.lit_true(l)),
                "model violates clause {c:?}"
            );
        }
        for &a in assumptions {
            assert!(model.lit_true(a), "model violates assumption {a}");
        }
    }
}

/// One-shot satisfiability of `inst` under `assumptions`.
pub fn solve_instance(
    inst: &ProblemInstance,
    assumptions: &[Lit],
    opts: &SolveOptions,
    rng: &mut impl Rng,
) -> SatOutcome {
    Solver::from_instance(inst).solve(assumptions, opts, rng)
}

/// Does flipping witness variable `v` in the total witness `x` make the
/// formula unsatisfiable? Used by generalization's redundancy elimination.
pub fn flip_is_unsat(
    inst: &ProblemInstance,
    x: &PartialWitness,
    v: Var,
    rng: &mut impl Rng,
) -> bool {
    let flipped = x.flipped(v);
    let assumptions = flipped.literals();
    !solve_instance(inst, &assumptions, &SolveOptions::default(), rng).is_sat()
}
