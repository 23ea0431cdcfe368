//! Formula constructors with closed-form model counts.
//!
//! Each gadget builds a Boolean formula whose number of models is a known
//! function of its inputs, which makes them sharp test oracles for the
//! counting machinery:
//!
//! - [`lambda2`] packs two counts into one: the result counts
//!   `|M(phi)| + |M(psi)| * 2^(n+1)`, so the inputs are recoverable as
//!   remainder and quotient by `2^(n+1)`.
//! - [`lambda_k`] iterates the packing so that the count of the i-th input
//!   becomes the base-`2^(n+1)` digit of order i of the result's count.
//! - [`m_gadget`] is a comparator with *exactly* `c` models — the
//!   assignments encoding the values `0..c`.
//! - [`chi`] has `K(p) = p * (2^n - p + 2*delta)` models where `p` is the
//!   input's count; [`k_poly`] evaluates that polynomial, whose strict
//!   maximum over `0..=2^n` sits exactly at `p = 2^(n-1) + delta`.
//!
//! Gadgets are built structurally as and/or/not trees. [`GadgetFormula::size`]
//! counts binary connectives (negation is free — the packing identities
//! charge nothing for it), and [`GadgetFormula::to_instance`] produces an
//! equi-countable CNF instance: gate variables are fresh and existentially
//! projected, so the projected count over the original variables equals the
//! structural model count.

use num_bigint::{BigInt, BigUint};
use rand::Rng;
use thiserror::Error;

use crate::formula::{Clause, Lit, ProblemInstance, Var, VarPartition};
use std::collections::BTreeSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("the formula family is empty")]
    EmptyFamily,
    #[error("family members range over {0} and {1} variables; all must match")]
    MixedArity(u32, u32),
    #[error("constant {c} out of range 0..=2^{n}")]
    ConstantOutOfRange { n: u32, c: u128 },
    #[error("offset {delta} out of range 0..=2^({n}-1)")]
    OffsetOutOfRange { n: u32, delta: u128 },
    #[error("construction needs more than {} variables", u32::MAX)]
    TooManyVariables,
    #[error("variable {0} exceeds the declared range of {1} variables")]
    VarOutOfDeclaredRange(Var, u32),
}

/// A Boolean formula as a connective tree over variables `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Const(bool),
    Var(Var),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

impl Node {
    pub fn var(v: Var) -> Node {
        Node::Var(v)
    }

    pub fn negated(self) -> Node {
        Node::Not(Box::new(self))
    }

    pub fn and(self, rhs: Node) -> Node {
        Node::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Node) -> Node {
        Node::Or(Box::new(self), Box::new(rhs))
    }

    /// Number of binary connectives in the tree.
    pub fn size(&self) -> u64 {
        match self {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Not(a) => a.size(),
            Node::And(a, b) | Node::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn max_var(&self) -> Var {
        match self {
            Node::Const(_) => 0,
            Node::Var(v) => *v,
            Node::Not(a) => a.max_var(),
            Node::And(a, b) | Node::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Evaluate under the assignment where variable `v` reads bit `v - 1`.
    pub fn eval(&self, bits: u64) -> bool {
        match self {
            Node::Const(b) => *b,
            Node::Var(v) => bits >> (v - 1) & 1 == 1,
            Node::Not(a) => !a.eval(bits),
            Node::And(a, b) => a.eval(bits) && b.eval(bits),
            Node::Or(a, b) => a.eval(bits) || b.eval(bits),
        }
    }

    /// The same formula with every variable index raised by `offset`.
    pub fn shifted(&self, offset: u32) -> Node {
        match self {
            Node::Const(b) => Node::Const(*b),
            Node::Var(v) => Node::Var(v + offset),
            Node::Not(a) => Node::Not(Box::new(a.shifted(offset))),
            Node::And(a, b) => Node::And(Box::new(a.shifted(offset)), Box::new(b.shifted(offset))),
            Node::Or(a, b) => Node::Or(Box::new(a.shifted(offset)), Box::new(b.shifted(offset))),
        }
    }
}

/// Which constructor produced a formula, with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GadgetKind {
    /// Hand-built input formula.
    Input,
    Lambda2 { n: u32, m: u32 },
    LambdaK { k: u32, n: u32 },
    M { n: u32, c: u128 },
    Chi { n: u32, delta: u128 },
}

/// A formula over a declared variable range `1..=num_vars`, tagged with the
/// gadget that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetFormula {
    root: Node,
    num_vars: u32,
    kind: GadgetKind,
}

impl GadgetFormula {
    /// Wrap a hand-built tree. Every variable must lie in `1..=num_vars`
    /// (unused variables in the range still count toward the model space).
    pub fn from_parts(root: Node, num_vars: u32) -> Result<GadgetFormula, GadgetError> {
        let top = root.max_var();
        if top > num_vars {
            return Err(GadgetError::VarOutOfDeclaredRange(top, num_vars));
        }
        Ok(GadgetFormula {
            root,
            num_vars,
            kind: GadgetKind::Input,
        })
    }

    /// View a CNF clause list as a formula tree (a conjunction of
    /// disjunctions), e.g. to feed a parsed instance into a gadget.
    pub fn from_clauses(num_vars: u32, clauses: &[Clause]) -> Result<GadgetFormula, GadgetError> {
        let clause_node = |c: &Clause| {
            let mut lits = c.lits().iter();
            let lit_node = |l: &Lit| {
                let v = Node::Var(l.var());
                if l.is_positive() {
                    v
                } else {
                    v.negated()
                }
            };
            match lits.next() {
                None => Node::Const(false),
                Some(first) => lits.fold(lit_node(first), |acc, l| acc.or(lit_node(l))),
            }
        };
        let mut cs = clauses.iter();
        let root = match cs.next() {
            None => Node::Const(true),
            Some(first) => cs.fold(clause_node(first), |acc, c| acc.and(clause_node(c))),
        };
        GadgetFormula::from_parts(root, num_vars)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn kind(&self) -> &GadgetKind {
        &self.kind
    }

    /// Binary-connective count of the structural form.
    pub fn size(&self) -> u64 {
        self.root.size()
    }

    /// Model count by exhaustive evaluation (guarded to small ranges).
    pub fn brute_count(&self) -> u128 {
        assert!(
            self.num_vars <= 30,
            "exhaustive evaluation is exponential; refusing beyond 30 variables"
        );
        let mut count: u128 = 0;
        for bits in 0..(1u64 << self.num_vars) {
            count += u128::from(self.root.eval(bits));
        }
        count
    }

    /// CNF translation with fresh gate variables. The original variables
    /// become the counting set and the gates are existentially projected,
    /// so the instance's projected count equals [`Self::brute_count`].
    pub fn to_instance(&self) -> ProblemInstance {
        let mut clauses = Vec::new();
        let mut next = self.num_vars;
        let root = encode(&self.root, &mut next, &mut clauses);
        clauses.push(Clause::new(vec![root]));
        let y: BTreeSet<Var> = (1..=self.num_vars).collect();
        let z: BTreeSet<Var> = (self.num_vars + 1..=next).collect();
        let partition = VarPartition::new(BTreeSet::new(), y, z);
        ProblemInstance::new(next, clauses, partition)
            .expect("gate translation stays within the allocated range")
    }
}

/// Tseitin step: returns a literal equivalent to the node, appending the
/// defining clauses for any gate it allocates.
fn encode(node: &Node, next: &mut u32, clauses: &mut Vec<Clause>) -> Lit {
    match node {
        Node::Var(v) => Lit::new(*v, true),
        Node::Not(a) => !encode(a, next, clauses),
        Node::Const(b) => {
            *next += 1;
            let t = Lit::new(*next, true);
            clauses.push(Clause::new(vec![if *b { t } else { !t }]));
            t
        }
        Node::And(a, b) => {
            let (la, lb) = (encode(a, next, clauses), encode(b, next, clauses));
            *next += 1;
            let t = Lit::new(*next, true);
            clauses.push(Clause::new(vec![!t, la]));
            clauses.push(Clause::new(vec![!t, lb]));
            clauses.push(Clause::new(vec![t, !la, !lb]));
            t
        }
        Node::Or(a, b) => {
            let (la, lb) = (encode(a, next, clauses), encode(b, next, clauses));
            *next += 1;
            let t = Lit::new(*next, true);
            clauses.push(Clause::new(vec![!t, la, lb]));
            clauses.push(Clause::new(vec![t, !la]));
            clauses.push(Clause::new(vec![t, !lb]));
            t
        }
    }
}

/// Pack two formulas into one whose count combines theirs:
/// over `n + m + 2` variables, build
///
/// ```text
/// (phi ∧ ¬X_{n+1} ∧ … ∧ ¬X_{n+m+2}) ∨ (psi' ∧ X_{n+m+1})
/// ```
///
/// where `psi'` is `psi` renamed onto `X_{n+1}..X_{n+m}`. The disjuncts
/// disagree on `X_{n+m+1}`, so the count is exactly
/// `|M(phi)| + |M(psi)| * 2^(n+1)`: the left disjunct pins everything but
/// `phi`'s variables, while the right leaves `phi`'s variables and
/// `X_{n+m+2}` free. Since `|M(phi)| ≤ 2^n`, the two input counts are the
/// remainder and quotient of the result's count by `2^(n+1)`.
///
/// Size identity: `size = |phi| + |psi| + m + 4` (the `m + 2` negated
/// conjuncts, the right conjunction, and the disjunction).
pub fn lambda2(phi: &GadgetFormula, psi: &GadgetFormula) -> Result<GadgetFormula, GadgetError> {
    let (n, m) = (phi.num_vars, psi.num_vars);
    let total = n
        .checked_add(m)
        .and_then(|t| t.checked_add(2))
        .ok_or(GadgetError::TooManyVariables)?;
    let mut left = phi.root.clone();
    for v in n + 1..=total {
        left = left.and(Node::Var(v).negated());
    }
    let right = psi.root.shifted(n).and(Node::Var(total - 1));
    Ok(GadgetFormula {
        root: left.or(right),
        num_vars: total,
        kind: GadgetKind::Lambda2 { n, m },
    })
}

/// Pack a family of `k` formulas, each over `n` variables, into one formula
/// over `k*n + 2*(k-1)` variables whose count has `|M(phi_i)|` as its
/// base-`2^(n+1)` digit of order `i`:
///
/// ```text
/// count = sum_i |M(phi_i)| * 2^(i*(n+1))
/// ```
///
/// The construction nests [`lambda2`] from the right — the head formula
/// contributes the low digit and the packed tail is scaled by `2^(n+1)`:
/// `pack(phi_0, …, phi_{k-1}) = lambda2(phi_0, pack(phi_1, …, phi_{k-1}))`.
/// Each digit is recoverable because every input count is at most `2^n`.
pub fn lambda_k(phis: &[GadgetFormula]) -> Result<GadgetFormula, GadgetError> {
    let first = phis.first().ok_or(GadgetError::EmptyFamily)?;
    let n = first.num_vars;
    for phi in phis {
        if phi.num_vars != n {
            return Err(GadgetError::MixedArity(n, phi.num_vars));
        }
    }
    let mut acc = phis[phis.len() - 1].clone();
    for phi in phis[..phis.len() - 1].iter().rev() {
        acc = lambda2(phi, &acc)?;
    }
    Ok(GadgetFormula {
        kind: GadgetKind::LambdaK {
            k: phis.len() as u32,
            n,
        },
        ..acc
    })
}

/// A comparator over `n` variables with exactly `c` models: the assignments
/// where the encoded value `sum_i 2^i * X_{i+1}` is strictly below `c`,
/// i.e. the values `0..c`. Built as a most-significant-bit-first chain, so
/// the size is below `n`.
pub fn m_gadget(n: u32, c: u128) -> Result<GadgetFormula, GadgetError> {
    let space = (n < 128).then(|| 1u128 << n);
    if space.is_some_and(|s| c > s) {
        return Err(GadgetError::ConstantOutOfRange { n, c });
    }
    let root = if c == 0 {
        Node::Const(false)
    } else if space == Some(c) {
        Node::Const(true)
    } else {
        // Low bits of c below its lowest set bit cannot make the value
        // smaller, so the chain starts at that bit.
        let low = c.trailing_zeros();
        let mut acc = Node::Var(low + 1).negated();
        for i in low + 1..n {
            let xi = Node::Var(i + 1).negated();
            acc = if c >> i & 1 == 1 {
                xi.or(acc)
            } else {
                xi.and(acc)
            };
        }
        acc
    };
    Ok(GadgetFormula {
        root,
        num_vars: n,
        kind: GadgetKind::M { n, c },
    })
}

/// The threshold gadget over `2n + 1` variables:
///
/// ```text
/// phi(X_1..X_n) ∧ ((¬phi(X_{n+1}..X_{2n}) ∧ ¬X_{2n+1}) ∨ (M_{2delta}(X_{n+1}..X_{2n}) ∧ X_{2n+1}))
/// ```
///
/// With `p = |M(phi)|`, the first factor contributes `p` choices and the
/// second `(2^n - p) + 2*delta` (the switch variable keeps the disjuncts
/// apart), for a count of `K(p) = p * (2^n - p + 2*delta)` — see
/// [`k_poly`]. Requires `delta ≤ 2^(n-1)` so that the parabola's peak
/// `2^(n-1) + delta` stays within `0..=2^n`.
pub fn chi(phi: &GadgetFormula, delta: u128) -> Result<GadgetFormula, GadgetError> {
    let n = phi.num_vars;
    let bound = (n >= 1 && n <= 128).then(|| 1u128 << (n - 1));
    if bound.is_some_and(|b| delta > b) || (n == 0 && delta > 0) {
        return Err(GadgetError::OffsetOutOfRange { n, delta });
    }
    let comparator = m_gadget(n, 2 * delta)?;
    let switch = Node::Var(2 * n + 1);
    let off = phi
        .root
        .shifted(n)
        .negated()
        .and(switch.clone().negated());
    let on = comparator.root.shifted(n).and(switch);
    Ok(GadgetFormula {
        root: phi.root.clone().and(off.or(on)),
        num_vars: 2 * n + 1,
        kind: GadgetKind::Chi { n, delta },
    })
}

/// The threshold polynomial `K(p) = p * (2^n - p + 2*delta)`, evaluated
/// exactly. Over `p` in `0..=2^n` it is a downward parabola peaking at
/// `p = 2^(n-1) + delta`; the result is signed because nothing stops a
/// caller passing `p` beyond the root `2^n + 2*delta`.
pub fn k_poly(n: u32, delta: impl Into<BigUint>, p: impl Into<BigUint>) -> BigInt {
    let p = BigInt::from(p.into());
    let two_delta = BigInt::from(delta.into()) * 2;
    let space = BigInt::from(2u32).pow(n);
    &p * (space - &p + two_delta)
}

/// A random connective tree over `1..=n` with roughly `ops` binary
/// connectives — handy fuzz input for the count identities.
pub fn random_formula(n: u32, ops: usize, rng: &mut impl Rng) -> GadgetFormula {
    fn leaf(n: u32, rng: &mut impl Rng) -> Node {
        let v = Node::Var(rng.gen_range(1..=n));
        if rng.gen() {
            v
        } else {
            v.negated()
        }
    }
    fn tree(n: u32, ops: usize, rng: &mut impl Rng) -> Node {
        if ops == 0 {
            return leaf(n, rng);
        }
        let left_ops = rng.gen_range(0..ops);
        let left = tree(n, left_ops, rng);
        let right = tree(n, ops - 1 - left_ops, rng);
        let node = if rng.gen() {
            left.and(right)
        } else {
            left.or(right)
        };
        if rng.gen_ratio(1, 4) {
            node.negated()
        } else {
            node
        }
    }
    assert!(n >= 1, "a random formula needs at least one variable");
    GadgetFormula::from_parts(tree(n, ops, rng), n)
        .expect("leaves are sampled within the declared range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::{exact_projected_count, CountQuery, OracleStats};
    use crate::formula::PartialWitness;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_var() -> GadgetFormula {
        GadgetFormula::from_parts(Node::var(1), 1).unwrap()
    }

    fn contradiction(n: u32) -> GadgetFormula {
        GadgetFormula::from_parts(Node::var(1).and(Node::var(1).negated()), n).unwrap()
    }

    fn tautology(n: u32) -> GadgetFormula {
        GadgetFormula::from_parts(Node::var(1).or(Node::var(1).negated()), n).unwrap()
    }

    #[test]
    fn lambda2_remainder_and_quotient() {
        let packed = lambda2(&single_var(), &single_var()).unwrap();
        assert_eq!(packed.num_vars(), 4);
        assert_eq!(packed.brute_count(), 5); // 1 + 1 * 2^2
        assert_eq!(packed.brute_count() % 4, 1);
        assert_eq!(packed.brute_count() / 4, 1);

        let unsat_left = lambda2(&contradiction(1), &single_var()).unwrap();
        assert_eq!(unsat_left.brute_count(), 4); // 0 + 1 * 2^2
        assert_eq!(unsat_left.brute_count() % 4, 0);

        let both_unsat = lambda2(&contradiction(1), &contradiction(1)).unwrap();
        assert_eq!(both_unsat.brute_count(), 0);
    }

    #[test]
    fn lambda2_matches_the_closed_form_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x2a);
        for round in 0..220 {
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=4);
            let phi = random_formula(n, rng.gen_range(0..=5), &mut rng);
            let psi = random_formula(m, rng.gen_range(0..=5), &mut rng);
            let packed = lambda2(&phi, &psi).unwrap();
            let (cp, cq) = (phi.brute_count(), psi.brute_count());
            let base = 1u128 << (n + 1);
            assert_eq!(
                packed.brute_count(),
                cp + cq * base,
                "count identity failed in round {round}"
            );
            // The inputs are recoverable from the packed count alone.
            assert_eq!(packed.brute_count() % base, cp);
            assert_eq!(packed.brute_count() / base, cq);
            assert_eq!(packed.size(), phi.size() + psi.size() + u64::from(m) + 4);
        }
    }

    #[test]
    fn lambda2_disjuncts_disagree_on_the_switch_variable() {
        let phi = random_formula(2, 3, &mut ChaCha8Rng::seed_from_u64(9));
        let psi = random_formula(3, 2, &mut ChaCha8Rng::seed_from_u64(10));
        let packed = lambda2(&phi, &psi).unwrap();
        let switch = packed.num_vars() - 1;
        let Node::Or(left, right) = packed.root() else {
            panic!("expected a top-level disjunction");
        };
        fn conjuncts(node: &Node, out: &mut Vec<Node>) {
            match node {
                Node::And(a, b) => {
                    conjuncts(a, out);
                    conjuncts(b, out);
                }
                other => out.push(other.clone()),
            }
        }
        let mut left_parts = Vec::new();
        conjuncts(left, &mut left_parts);
        assert!(left_parts.contains(&Node::var(switch).negated()));
        let mut right_parts = Vec::new();
        conjuncts(right, &mut right_parts);
        assert!(right_parts.contains(&Node::var(switch)));
    }

    #[test]
    fn lambda_k_base_case_is_the_identity() {
        let phi = random_formula(3, 4, &mut ChaCha8Rng::seed_from_u64(77));
        let packed = lambda_k(std::slice::from_ref(&phi)).unwrap();
        assert_eq!(packed.root(), phi.root());
        assert_eq!(packed.num_vars(), phi.num_vars());
        assert_eq!(packed.kind(), &GadgetKind::LambdaK { k: 1, n: 3 });
    }

    #[test]
    fn lambda_k_packs_counts_as_digits() {
        // Inputs over one variable with counts (1, 0, 2): the packed count
        // reads those digits in base 2^2 = 4.
        let family = [single_var(), contradiction(1), tautology(1)];
        let packed = lambda_k(&family).unwrap();
        assert_eq!(packed.num_vars(), 3 + 2 * 2);
        assert_eq!(packed.brute_count(), 1 + 0 * 4 + 2 * 16);
    }

    #[test]
    fn lambda_k_sizes_match_on_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_formula(2, 1, &mut rng);
        let psi = random_formula(2, 1, &mut rng);
        assert_eq!(phi.size(), 1);
        assert_eq!(psi.size(), 1);
        let packed = lambda_k(&[phi, psi]).unwrap();
        assert_eq!(packed.size(), 2 + (2 + 4));
    }

    #[test]
    fn lambda_k_digits_recovered_on_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd161);
        for round in 0..200 {
            let (k, n) = loop {
                let k = rng.gen_range(2..=4u32);
                let n = rng.gen_range(1..=3u32);
                // Keep the packed variable count enumerable.
                if k * n + 2 * (k - 1) <= 14 {
                    break (k, n);
                }
            };
            let family: Vec<GadgetFormula> = (0..k)
                .map(|_| random_formula(n, rng.gen_range(0..=4), &mut rng))
                .collect();
            let packed = lambda_k(&family).unwrap();
            assert_eq!(packed.num_vars(), k * n + 2 * (k - 1));
            let total = packed.brute_count();
            let base = 1u128 << (n + 1);
            for (i, phi) in family.iter().enumerate() {
                let digit = total >> (i as u32 * (n + 1)) & (base - 1);
                assert_eq!(
                    digit,
                    phi.brute_count(),
                    "digit {i} drifted in round {round} (k={k}, n={n})"
                );
            }
        }
    }

    #[test]
    fn lambda_k_digits_at_the_var_budget() {
        // One run at the largest family the digit tests promise: k = 4
        // inputs over n = 3 variables, 18 packed variables.
        let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
        let family: Vec<GadgetFormula> =
            (0..4).map(|_| random_formula(3, 3, &mut rng)).collect();
        let packed = lambda_k(&family).unwrap();
        assert_eq!(packed.num_vars(), 18);
        let total = packed.brute_count();
        for (i, phi) in family.iter().enumerate() {
            assert_eq!(total >> (i as u32 * 4) & 15, phi.brute_count());
        }
    }

    #[test]
    fn m_gadget_counts_exactly_c() {
        assert_eq!(m_gadget(3, 5).unwrap().brute_count(), 5);
        assert_eq!(m_gadget(3, 0).unwrap().brute_count(), 0);
        assert_eq!(m_gadget(3, 8).unwrap().brute_count(), 8);
        for n in 0..=4u32 {
            for c in 0..=1u128 << n {
                let g = m_gadget(n, c).unwrap();
                assert_eq!(g.brute_count(), c, "n={n} c={c}");
                assert!(g.size() < u64::from(n.max(1)), "size must stay linear");
            }
        }
    }

    #[test]
    fn m_gadget_models_are_the_small_values() {
        let g = m_gadget(4, 11).unwrap();
        for bits in 0..16u64 {
            assert_eq!(g.root().eval(bits), bits < 11);
        }
    }

    #[test]
    fn m_gadget_random_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x3c);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10u32);
            let c = rng.gen_range(0..=1u128 << n);
            assert_eq!(m_gadget(n, c).unwrap().brute_count(), c);
        }
    }

    #[test]
    fn chi_counts_follow_the_polynomial() {
        // p = 2 over n = 2 variables with delta = 1: 2 * (4 - 2 + 2) = 8.
        let phi = GadgetFormula::from_parts(Node::var(1), 2).unwrap();
        let g = chi(&phi, 1).unwrap();
        assert_eq!(g.num_vars(), 5);
        assert_eq!(g.brute_count(), 8);

        let dead = chi(&contradiction(2), 1).unwrap();
        assert_eq!(dead.brute_count(), 0);
    }

    #[test]
    fn chi_matches_k_poly_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xc4b);
        for round in 0..200 {
            let n = rng.gen_range(1..=5u32);
            let phi = random_formula(n, rng.gen_range(0..=5), &mut rng);
            let delta = rng.gen_range(0..=1u128 << (n - 1));
            let g = chi(&phi, delta).unwrap();
            let p = phi.brute_count();
            let expected = p * ((1u128 << n) - p + 2 * delta);
            assert_eq!(g.brute_count(), expected, "round {round} n={n} delta={delta}");
            assert_eq!(
                BigInt::from(expected),
                k_poly(n, delta, p),
                "polynomial drifted from the gadget"
            );
        }
    }

    #[test]
    fn k_poly_reference_values() {
        assert_eq!(k_poly(2, 1u32, 2u32), BigInt::from(8));
        assert_eq!(k_poly(3, 0u32, 4u32), BigInt::from(16));
        assert_eq!(k_poly(9, 200u32, 0u32), BigInt::from(0));
    }

    #[test]
    fn k_poly_peaks_exactly_at_the_threshold() {
        for n in 1..=6u32 {
            for delta in 0..=1u64 << (n - 1) {
                let peak = (1u64 << (n - 1)) + delta;
                let at_peak = k_poly(n, delta, peak);
                for p in 0..=1u64 << n {
                    let reached = k_poly(n, delta, p) >= at_peak;
                    assert_eq!(
                        reached,
                        p == peak,
                        "threshold reachability must single out the peak (n={n}, delta={delta}, p={p})"
                    );
                }
            }
        }
    }

    #[test]
    fn gate_translation_preserves_projected_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e17);
        let mut stats = OracleStats::default();
        for _ in 0..40 {
            let n = rng.gen_range(1..=4u32);
            let phi = random_formula(n, rng.gen_range(0..=6), &mut rng);
            let inst = phi.to_instance();
            let q = CountQuery {
                instance: &inst,
                witness: &PartialWitness::new(),
                epsilon: 0.5,
                delta: 0.2,
            };
            let count = exact_projected_count(&q, &mut stats, &mut rng).unwrap();
            assert_eq!(count, phi.brute_count());
        }
        // A constant-true gadget keeps its full model space through the
        // translation as well.
        let all = m_gadget(3, 8).unwrap().to_instance();
        let q = CountQuery {
            instance: &all,
            witness: &PartialWitness::new(),
            epsilon: 0.5,
            delta: 0.2,
        };
        assert_eq!(exact_projected_count(&q, &mut stats, &mut rng).unwrap(), 8);
    }

    #[test]
    fn constructor_errors() {
        assert_eq!(lambda_k(&[]).unwrap_err(), GadgetError::EmptyFamily);
        let a = single_var();
        let b = random_formula(2, 1, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(
            lambda_k(&[a.clone(), b]).unwrap_err(),
            GadgetError::MixedArity(1, 2)
        );
        assert_eq!(
            m_gadget(3, 9).unwrap_err(),
            GadgetError::ConstantOutOfRange { n: 3, c: 9 }
        );
        assert_eq!(
            chi(&random_formula(2, 1, &mut ChaCha8Rng::seed_from_u64(2)), 3).unwrap_err(),
            GadgetError::OffsetOutOfRange { n: 2, delta: 3 }
        );
        assert_eq!(
            GadgetFormula::from_parts(Node::var(4), 3).unwrap_err(),
            GadgetError::VarOutOfDeclaredRange(4, 3)
        );
    }

    #[test]
    fn clause_view_round_trips_counts() {
        let inst = crate::formula::parse_instance(
            "p cnf 3 2\nc ind 1 2 3 0\n1 -2 0\n2 3 0\n",
        )
        .unwrap();
        let phi = GadgetFormula::from_clauses(inst.num_vars(), inst.clauses()).unwrap();
        let mut expected = 0u128;
        for bits in 0..8u64 {
            let x1 = bits & 1 == 1;
            let x2 = bits >> 1 & 1 == 1;
            let x3 = bits >> 2 & 1 == 1;
            expected += u128::from((x1 || !x2) && (x2 || x3));
        }
        assert_eq!(phi.brute_count(), expected);
        assert_eq!(GadgetFormula::from_clauses(2, &[]).unwrap().brute_count(), 4);
    }
}
