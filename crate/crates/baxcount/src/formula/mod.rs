//! CNF formulas over a three-way variable partition.
//!
//! A [`ProblemInstance`] is a clause set together with a partition of its
//! variables into a witness set `X` (maximized over), a counting set `Y`
//! (projected model counting happens over these), and an intermediate set `Z`
//! (existentially projected away). The module also provides the extended
//! DIMACS reader/writer ([`parse_instance`], [`serialize_instance`]) and a
//! brute-force reference oracle ([`brute`]) for small instances.

mod parse;

pub mod brute;
pub mod random;

pub use parse::{parse_instance, serialize_instance, ParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Variable index, 1-based as in DIMACS.
pub type Var = u32;

/// Errors from structural operations on formulas.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("literal mentions variable {0} but the instance has {1} variables")]
    VarOutOfRange(Var, u32),
    #[error("variable {0} appears in more than one partition class")]
    PartitionOverlap(Var),
    #[error("variable {0} is not assigned to any partition class")]
    PartitionGap(Var),
    #[error("cannot build a blocking clause from an empty witness")]
    EmptyWitness,
    #[error("witness assigns variable {0} which is not in the witness set X")]
    WitnessOutsideX(Var),
    #[error("brute force supports at most {limit} variables, instance has {actual}")]
    BruteForceTooLarge { limit: u32, actual: u32 },
}

/// A literal: a variable together with a sign.
///
/// Stored packed (`var << 1 | negated`) so literals index arrays directly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    /// Literal over `var` with the given sign (`true` = positive).
    pub fn new(var: Var, positive: bool) -> Lit {
        debug_assert!(var >= 1, "variables are 1-based");
        Lit(var << 1 | u32::from(!positive))
    }

    pub fn positive(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn negative(var: Var) -> Lit {
        Lit::new(var, false)
    }

    /// Parse from a signed DIMACS integer (non-zero).
    pub fn from_dimacs(n: i64) -> Lit {
        debug_assert!(n != 0, "DIMACS literals are non-zero");
        Lit::new(n.unsigned_abs() as Var, n > 0)
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negated(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    /// Signed DIMACS form.
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// Dense index usable for literal-keyed tables (`2..=2*num_vars+1`).
    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// Inverse of [`Lit::code`].
    pub fn from_code(code: usize) -> Lit {
        debug_assert!(code >= 2, "codes start at 2 (variables are 1-based)");
        Lit(code as u32)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        self.negated()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, kept sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Normalize: sort by literal code and drop duplicate literals.
    ///
    /// A clause containing both `v` and `-v` is kept as given (normalized);
    /// use [`Clause::is_tautology`] to detect and discard it.
    pub fn new(mut lits: Vec<Lit>) -> Clause {
        lits.sort_unstable();
        lits.dedup();
        Clause { lits }
    }

    pub fn from_dimacs(lits: &[i64]) -> Clause {
        Clause::new(lits.iter().map(|&n| Lit::from_dimacs(n)).collect())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    /// The empty clause is unsatisfiable.
    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// True when some variable occurs with both signs.
    pub fn is_tautology(&self) -> bool {
        // After normalization the two signs of a variable are adjacent.
        self.lits.windows(2).any(|w| w[0].var() == w[1].var())
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn max_var(&self) -> Var {
        self.lits.iter().map(|l| l.var()).max().unwrap_or(0)
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Which of the three partition classes a variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Witness variable: the solver maximizes over assignments of these.
    X,
    /// Counting variable: model counts are projections onto these.
    Y,
    /// Intermediate variable: existentially projected away.
    Z,
}

/// Disjoint variable sets `X`, `Y`, `Z` covering `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarPartition {
    x: BTreeSet<Var>,
    y: BTreeSet<Var>,
    z: BTreeSet<Var>,
}

impl VarPartition {
    pub fn new(x: BTreeSet<Var>, y: BTreeSet<Var>, z: BTreeSet<Var>) -> VarPartition {
        VarPartition { x, y, z }
    }

    /// Partition where `X` and `Y` are given and everything else up to
    /// `num_vars` is `Z`.
    pub fn with_implicit_z(
        x: BTreeSet<Var>,
        y: BTreeSet<Var>,
        num_vars: u32,
    ) -> VarPartition {
        let z = (1..=num_vars)
            .filter(|v| !x.contains(v) && !y.contains(v))
            .collect();
        VarPartition { x, y, z }
    }

    pub fn x(&self) -> &BTreeSet<Var> {
        &self.x
    }

    pub fn y(&self) -> &BTreeSet<Var> {
        &self.y
    }

    pub fn z(&self) -> &BTreeSet<Var> {
        &self.z
    }

    pub fn kind(&self, v: Var) -> VarKind {
        if self.x.contains(&v) {
            VarKind::X
        } else if self.y.contains(&v) {
            VarKind::Y
        } else {
            VarKind::Z
        }
    }

    /// Move a set of variables into `Z` (used when preprocessing eliminates
    /// witness or counting variables: they no longer occur in any clause, and
    /// parking them in `Z` keeps the partition total without renumbering).
    pub fn demote_to_z(&self, vars: &BTreeSet<Var>) -> VarPartition {
        VarPartition {
            x: self.x.difference(vars).copied().collect(),
            y: self.y.difference(vars).copied().collect(),
            z: self.z.union(vars).copied().collect(),
        }
    }

    fn validate(&self, num_vars: u32) -> Result<(), FormulaError> {
        for v in self.x.iter().chain(&self.y).chain(&self.z) {
            if *v < 1 || *v > num_vars {
                return Err(FormulaError::VarOutOfRange(*v, num_vars));
            }
        }
        for v in &self.x {
            if self.y.contains(v) || self.z.contains(v) {
                return Err(FormulaError::PartitionOverlap(*v));
            }
        }
        for v in &self.y {
            if self.z.contains(v) {
                return Err(FormulaError::PartitionOverlap(*v));
            }
        }
        for v in 1..=num_vars {
            if !(self.x.contains(&v) || self.y.contains(&v) || self.z.contains(&v)) {
                return Err(FormulaError::PartitionGap(v));
            }
        }
        Ok(())
    }
}

/// A CNF formula plus its variable partition.
///
/// Instances are immutable; blocking and preprocessing build new instances
/// via [`ProblemInstance::extended_with`] or [`ProblemInstance::new`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    num_vars: u32,
    clauses: Vec<Clause>,
    partition: VarPartition,
}

impl ProblemInstance {
    pub fn new(
        num_vars: u32,
        clauses: Vec<Clause>,
        partition: VarPartition,
    ) -> Result<ProblemInstance, FormulaError> {
        partition.validate(num_vars)?;
        for c in &clauses {
            for l in c.lits() {
                if l.var() < 1 || l.var() > num_vars {
                    return Err(FormulaError::VarOutOfRange(l.var(), num_vars));
                }
            }
        }
        Ok(ProblemInstance {
            num_vars,
            clauses,
            partition,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn partition(&self) -> &VarPartition {
        &self.partition
    }

    pub fn x_vars(&self) -> &BTreeSet<Var> {
        self.partition.x()
    }

    pub fn y_vars(&self) -> &BTreeSet<Var> {
        self.partition.y()
    }

    pub fn z_vars(&self) -> &BTreeSet<Var> {
        self.partition.z()
    }

    /// New instance with extra clauses appended (the clause list is
    /// append-only; the original is untouched).
    pub fn extended_with(&self, extra: impl IntoIterator<Item = Clause>) -> ProblemInstance {
        let mut clauses = self.clauses.clone();
        for c in extra {
            debug_assert!(c.max_var() <= self.num_vars);
            clauses.push(c);
        }
        ProblemInstance {
            num_vars: self.num_vars,
            clauses,
            partition: self.partition.clone(),
        }
    }

    /// New instance with `extra_vars` fresh `Z` variables appended after the
    /// current range, plus extra clauses that may use them.
    pub fn extended_with_aux(
        &self,
        extra_vars: u32,
        extra: impl IntoIterator<Item = Clause>,
    ) -> ProblemInstance {
        let num_vars = self.num_vars + extra_vars;
        let mut partition = self.partition.clone();
        partition.z.extend(self.num_vars + 1..=num_vars);
        let mut clauses = self.clauses.clone();
        for c in extra {
            debug_assert!(c.max_var() <= num_vars);
            clauses.push(c);
        }
        ProblemInstance {
            num_vars,
            clauses,
            partition,
        }
    }
}

/// A total assignment over `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>, // index 0 unused
}

impl Assignment {
    pub fn new(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![false; num_vars as usize + 1],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    pub fn get(&self, v: Var) -> bool {
        self.values[v as usize]
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.values[v as usize] = value;
    }

    pub fn lit_true(&self, l: Lit) -> bool {
        self.get(l.var()) == l.is_positive()
    }

    pub fn satisfies(&self, c: &Clause) -> bool {
        c.lits().iter().any(|&l| self.lit_true(l))
    }

    pub fn satisfies_all(&self, inst: &ProblemInstance) -> bool {
        inst.clauses().iter().all(|c| self.satisfies(c))
    }
}

/// A partial assignment of witness variables (keys drawn from `X`).
///
/// A total witness assigns every `X` variable; a partial one describes a
/// *class* of witnesses (all completions of the assigned prefix).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialWitness {
    map: BTreeMap<Var, bool>,
}

impl PartialWitness {
    pub fn new() -> PartialWitness {
        PartialWitness::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, bool)>) -> PartialWitness {
        PartialWitness {
            map: pairs.into_iter().collect(),
        }
    }

    /// The `X` part of a total assignment.
    pub fn from_assignment(a: &Assignment, x_vars: &BTreeSet<Var>) -> PartialWitness {
        PartialWitness {
            map: x_vars.iter().map(|&v| (v, a.get(v))).collect(),
        }
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.map.insert(v, value);
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.map.get(&v).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.map.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.map.iter().map(|(&v, &b)| (v, b))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The witness restricted to the variables in `keep` (written `x|_E`).
    pub fn restrict_to(&self, keep: &BTreeSet<Var>) -> PartialWitness {
        PartialWitness {
            map: self
                .map
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(&v, &b)| (v, b))
                .collect(),
        }
    }

    /// The assigned variables as a set.
    pub fn domain(&self) -> BTreeSet<Var> {
        self.map.keys().copied().collect()
    }

    /// The witness as a sorted literal vector.
    pub fn literals(&self) -> Vec<Lit> {
        self.map.iter().map(|(&v, &b)| Lit::new(v, b)).collect()
    }

    pub fn is_total_over(&self, vars: &BTreeSet<Var>) -> bool {
        vars.iter().all(|v| self.map.contains_key(v))
    }

    /// Same witness with one variable's value flipped (must be assigned).
    pub fn flipped(&self, v: Var) -> PartialWitness {
        let mut w = self.clone();
        let cur = w.map[&v];
        w.map.insert(v, !cur);
        w
    }
}

impl fmt::Display for PartialWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, b)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}={}", if b { "T" } else { "F" })?;
        }
        write!(f, "}}")
    }
}

/// Substitute a partial witness into the formula: clauses satisfied by `w`
/// are removed and literals falsified by `w` are deleted (an emptied clause
/// stays, marking the residue unsatisfiable).
pub fn restrict(inst: &ProblemInstance, w: &PartialWitness) -> ProblemInstance {
    let mut clauses = Vec::with_capacity(inst.clauses.len());
    'clause: for c in &inst.clauses {
        let mut kept = Vec::with_capacity(c.len());
        for &l in c.lits() {
            match w.get(l.var()) {
                Some(b) if b == l.is_positive() => continue 'clause, // satisfied
                Some(_) => {}                                        // falsified, drop literal
                None => kept.push(l),
            }
        }
        clauses.push(Clause::new(kept));
    }
    ProblemInstance {
        num_vars: inst.num_vars,
        clauses,
        partition: inst.partition.clone(),
    }
}

/// The clause excluding every completion of `w`: the disjunction of the
/// negations of `w`'s literals.
///
/// Empty witnesses are rejected: blocking the whole witness space is a
/// termination condition for the caller, not a clause.
pub fn blocking_clause(w: &PartialWitness) -> Result<Clause, FormulaError> {
    if w.is_empty() {
        return Err(FormulaError::EmptyWitness);
    }
    Ok(Clause::new(w.literals().iter().map(|&l| !l).collect()))
}

/// Convenience: brute-force maximum count (see [`brute::max_count`]).
pub fn brute_force_max_count(
    inst: &ProblemInstance,
) -> Result<(Option<PartialWitness>, u128), FormulaError> {
    brute::max_count(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ProblemInstance {
        // X = {1}, Y = {2, 3}, clause (-1 2)
        parse_instance("p cnf 3 1\nc max 1 0\nc ind 2 3 0\n-1 2 0\n").unwrap()
    }

    #[test]
    fn literal_roundtrip() {
        let l = Lit::from_dimacs(-7);
        assert_eq!(l.var(), 7);
        assert!(!l.is_positive());
        assert_eq!((!l).to_dimacs(), 7);
        assert_eq!(l.to_dimacs(), -7);
        assert_eq!(Lit::positive(3).code(), 6);
        assert_eq!(Lit::negative(3).code(), 7);
    }

    #[test]
    fn clause_normalization() {
        let c = Clause::from_dimacs(&[2, -1, 2]);
        assert_eq!(c.lits(), &[Lit::negative(1), Lit::positive(2)]);
        assert!(!c.is_tautology());
        assert!(Clause::from_dimacs(&[1, -1]).is_tautology());
        assert!(Clause::new(vec![]).is_empty());
    }

    #[test]
    fn partition_kinds() {
        let inst = tiny();
        assert_eq!(inst.partition().kind(1), VarKind::X);
        assert_eq!(inst.partition().kind(2), VarKind::Y);
        assert_eq!(inst.x_vars().len(), 1);
        assert!(inst.z_vars().is_empty());
    }

    #[test]
    fn partition_validation() {
        let x: BTreeSet<Var> = [1].into();
        let y: BTreeSet<Var> = [1].into();
        let p = VarPartition::new(x, y, BTreeSet::new());
        assert_eq!(
            ProblemInstance::new(1, vec![], p).unwrap_err(),
            FormulaError::PartitionOverlap(1)
        );

        let p = VarPartition::new([1].into(), BTreeSet::new(), BTreeSet::new());
        assert_eq!(
            ProblemInstance::new(2, vec![], p).unwrap_err(),
            FormulaError::PartitionGap(2)
        );
    }

    #[test]
    fn restrict_substitutes() {
        // {(1 2), (-1 3)} with 1 -> true: first clause satisfied, second loses -1.
        let inst = parse_instance("p cnf 3 2\nc max 1 0\nc ind 2 3 0\n1 2 0\n-1 3 0\n").unwrap();
        let w = PartialWitness::from_pairs([(1, true)]);
        let r = restrict(&inst, &w);
        assert_eq!(r.clauses(), &[Clause::from_dimacs(&[3])]);

        let w = PartialWitness::from_pairs([(1, false)]);
        let r = restrict(&inst, &w);
        assert_eq!(r.clauses(), &[Clause::from_dimacs(&[2])]);
    }

    #[test]
    fn restrict_can_empty_a_clause() {
        let inst = parse_instance("p cnf 1 1\nc max 1 0\n1 0\n").unwrap();
        let w = PartialWitness::from_pairs([(1, false)]);
        let r = restrict(&inst, &w);
        assert_eq!(r.clauses().len(), 1);
        assert!(r.clauses()[0].is_empty());
    }

    #[test]
    fn blocking_clause_negates() {
        let w = PartialWitness::from_pairs([(1, true), (3, false)]);
        assert_eq!(blocking_clause(&w).unwrap(), Clause::from_dimacs(&[-1, 3]));
        let w = PartialWitness::from_pairs([(2, false)]);
        assert_eq!(blocking_clause(&w).unwrap(), Clause::from_dimacs(&[2]));
        assert_eq!(
            blocking_clause(&PartialWitness::new()).unwrap_err(),
            FormulaError::EmptyWitness
        );
    }

    #[test]
    fn witness_restriction_and_flip() {
        let w = PartialWitness::from_pairs([(1, true), (2, false), (5, true)]);
        let e: BTreeSet<Var> = [1, 5].into();
        assert_eq!(
            w.restrict_to(&e),
            PartialWitness::from_pairs([(1, true), (5, true)])
        );
        assert_eq!(w.flipped(2).get(2), Some(true));
        assert_eq!(w.literals(), vec![Lit::positive(1), Lit::negative(2), Lit::positive(5)]);
    }

    #[test]
    fn assignment_evaluation() {
        let inst = tiny();
        let mut a = Assignment::new(3);
        a.set(1, true);
        assert!(!a.satisfies_all(&inst)); // needs 2 = true
        a.set(2, true);
        assert!(a.satisfies_all(&inst));
    }
}
