//! Count-preserving preprocessing: equivalent-literal merging and symmetry
//! breaking.
//!
//! Both transformations rewrite the instance before the search starts, and
//! both preserve what the solver is asked to compute — the maximal projected
//! model count and (after back-mapping) a witness attaining it.
//!
//! **Equivalent literals.** Binary clauses induce implications; literals in
//! the same strongly connected component of the implication graph agree in
//! every model. Each component keeps one representative (witness variables
//! preferred, then counting, then projection; lowest index breaks ties) and
//! every other literal is substituted away. A substituted variable is
//! *demoted* to the projection set `Z` rather than renumbered: it no longer
//! occurs in any clause, and since its value was determined by its
//! representative in every model, neither the per-class counts nor the
//! maximum change. If a component contains a literal and its own negation
//! the formula has no models at all, which is reported instead.
//!
//! **Symmetry breaking.** The instance is viewed as a colored incidence
//! graph: two nodes per variable (one per literal) joined by a consistency
//! edge, one node per clause joined to the literals it contains. Literal
//! nodes are colored by their variable's role (witness / counting /
//! projection), so any color-preserving graph automorphism maps clauses to
//! clauses, respects negation, and permutes each role within itself — hence
//! it permutes witness classes while preserving their counts. The search
//! refines the coloring to a fixpoint, individualizes candidate node pairs,
//! and greedily extends each to a full mapping; every candidate is verified
//! syntactically before use, so the breaking predicates are sound for
//! whatever subset of the automorphism group the budgeted search finds.
//! For each verified generator a lexicographic-leader predicate over its
//! witness support is appended (with auxiliary chain variables in `Z`),
//! keeping exactly the lexicographically smallest member of each witness
//! orbit — among which the count-maximal class always appears.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Clause, Lit, PartialWitness, ProblemInstance, Var, VarKind};

/// Budget for the automorphism search, in node-signature computations.
pub const DEFAULT_REFINEMENT_BUDGET: u64 = 1_000_000;

/// Upper bound on verified generators collected per instance.
pub const DEFAULT_MAX_GENERATORS: usize = 16;

#[derive(Clone, Copy, Debug)]
pub struct PreprocessOptions {
    /// Merge equivalent literals (implication-graph components).
    pub equivalences: bool,
    /// Search for symmetries and add lexicographic-leader predicates.
    pub symmetry: bool,
    /// Color counting and projection literals alike. This admits more
    /// candidate symmetries but is only sound when the counting set itself
    /// maps onto counting variables; the verifier still rejects mappings
    /// that mix the roles, so this mainly widens the refinement cells.
    pub two_color: bool,
    pub refinement_budget: u64,
    pub max_generators: usize,
}

impl Default for PreprocessOptions {
    fn default() -> PreprocessOptions {
        PreprocessOptions {
            equivalences: true,
            symmetry: true,
            two_color: false,
            refinement_budget: DEFAULT_REFINEMENT_BUDGET,
            max_generators: DEFAULT_MAX_GENERATORS,
        }
    }
}

/// What preprocessing did, for reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PreprocessSummary {
    pub merged_vars: u32,
    pub generators_found: u32,
    pub lex_clauses_added: u32,
    pub aux_vars_added: u32,
}

/// A variable permutation with signs: variable `v` maps to the literal
/// `image[v]` (and `¬v` to its negation).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    image: Vec<Lit>, // indexed by var, slot 0 unused
}

impl Generator {
    pub fn image_of(&self, v: Var) -> Lit {
        self.image[v as usize]
    }

    pub fn maps_lit(&self, l: Lit) -> Lit {
        let img = self.image[l.var() as usize];
        if l.is_positive() {
            img
        } else {
            !img
        }
    }

    /// Witness variables the generator actually moves.
    pub fn x_support(&self, inst: &ProblemInstance) -> Vec<Var> {
        inst.x_vars()
            .iter()
            .copied()
            .filter(|&v| self.image_of(v) != Lit::new(v, true))
            .collect()
    }

    fn is_identity(&self) -> bool {
        self.image
            .iter()
            .enumerate()
            .skip(1)
            .all(|(v, &l)| l == Lit::new(v as Var, true))
    }
}

/// The preprocessed instance plus everything needed to interpret results in
/// terms of the original one.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub instance: ProblemInstance,
    /// The implication graph proved the formula has no models.
    pub unsat: bool,
    pub summary: PreprocessSummary,
    /// Substituted variables: `v` holds the same value as the stored
    /// literal in every model.
    pub merges: Vec<(Var, Lit)>,
    pub generators: Vec<Generator>,
    original_x: BTreeSet<Var>,
}

impl Prepared {
    /// Extend a witness found on the preprocessed instance with the values
    /// of substituted witness variables, yielding a witness of the original.
    /// Substituted counting/projection variables stay out of the witness.
    pub fn restore_witness(&self, w: &PartialWitness) -> PartialWitness {
        let mut out = w.clone();
        for &(v, rep) in &self.merges {
            if !self.original_x.contains(&v) {
                continue;
            }
            if let Some(b) = out.get(rep.var()) {
                let value = if rep.is_positive() { b } else { !b };
                out.set(v, value);
            }
        }
        out
    }
}

/// Run the enabled transformations: equivalences first (they shrink the
/// instance), then symmetry breaking on the substituted formula.
pub fn prepare(inst: &ProblemInstance, opts: &PreprocessOptions) -> Prepared {
    let original_x = inst.x_vars().clone();
    let mut instance = inst.clone();
    let mut summary = PreprocessSummary::default();
    let mut merges = Vec::new();

    if opts.equivalences {
        match merge_equivalent_literals(&instance) {
            EquivOutcome::Contradiction => {
                return Prepared {
                    instance,
                    unsat: true,
                    summary,
                    merges,
                    generators: Vec::new(),
                    original_x,
                };
            }
            EquivOutcome::Merged {
                instance: merged,
                substitutions,
            } => {
                summary.merged_vars = substitutions.len() as u32;
                merges = substitutions;
                instance = merged;
            }
        }
    }

    let mut generators = Vec::new();
    if opts.symmetry {
        generators = find_generators(&instance, opts);
        summary.generators_found = generators.len() as u32;
        if !generators.is_empty() {
            let before_vars = instance.num_vars();
            let before_clauses = instance.clauses().len();
            instance = add_lex_leader_predicates(&instance, &generators);
            summary.aux_vars_added = instance.num_vars() - before_vars;
            summary.lex_clauses_added = (instance.clauses().len() - before_clauses) as u32;
        }
    }

    Prepared {
        instance,
        unsat: false,
        summary,
        merges,
        generators,
        original_x,
    }
}

// ---------------------------------------------------------------------------
// Equivalent literals
// ---------------------------------------------------------------------------

enum EquivOutcome {
    Contradiction,
    Merged {
        instance: ProblemInstance,
        substitutions: Vec<(Var, Lit)>,
    },
}

/// Literal node index for the implication graph (vars are 1-based; literal
/// codes start at 2).
fn node(l: Lit) -> usize {
    l.code() - 2
}

fn node_lit(n: usize) -> Lit {
    Lit::from_code(n + 2)
}

/// Iterative Tarjan over the implication graph; returns the component index
/// of every literal node.
fn strongly_connected(adj: &[Vec<u32>]) -> Vec<u32> {
    let n = adj.len();
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![u32::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;
    // Explicit DFS frames: (node, next child position).
    let mut frames: Vec<(u32, usize)> = Vec::new();
    for start in 0..n as u32 {
        if index[start as usize] != u32::MAX {
            continue;
        }
        frames.push((start, 0));
        index[start as usize] = next_index;
        low[start as usize] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start as usize] = true;
        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            if *child < adj[v as usize].len() {
                let w = adj[v as usize][*child];
                *child += 1;
                if index[w as usize] == u32::MAX {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    frames.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent as usize] = low[parent as usize].min(low[v as usize]);
                }
                if low[v as usize] == index[v as usize] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp[w as usize] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

fn kind_rank(kind: VarKind) -> u8 {
    match kind {
        VarKind::X => 0,
        VarKind::Y => 1,
        VarKind::Z => 2,
    }
}

fn merge_equivalent_literals(inst: &ProblemInstance) -> EquivOutcome {
    let n = 2 * inst.num_vars() as usize;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for c in inst.clauses() {
        if c.len() == 2 {
            let (a, b) = (c.lits()[0], c.lits()[1]);
            adj[node(!a)].push(node(b) as u32);
            adj[node(!b)].push(node(a) as u32);
        }
    }
    let comp = strongly_connected(&adj);

    // Contradiction: a variable equivalent to its own negation.
    for v in 1..=inst.num_vars() {
        if comp[node(Lit::new(v, true))] == comp[node(Lit::new(v, false))] {
            return EquivOutcome::Contradiction;
        }
    }

    // Group literal nodes by component and pick representatives.
    let mut members: BTreeMap<u32, Vec<Lit>> = BTreeMap::new();
    for i in 0..n {
        members.entry(comp[i]).or_default().push(node_lit(i));
    }
    let mut lit_map: Vec<Lit> = (0..n).map(|i| Lit::from_code(i + 2)).collect();
    let mut substitutions: Vec<(Var, Lit)> = Vec::new();
    let mut done: BTreeSet<u32> = BTreeSet::new();
    for (&comp_id, lits) in &members {
        if lits.len() < 2 || done.contains(&comp_id) {
            continue;
        }
        let rep = *lits
            .iter()
            .min_by_key(|l| {
                (
                    kind_rank(inst.partition().kind(l.var())),
                    l.var(),
                    !l.is_positive(),
                )
            })
            .expect("non-empty component");
        done.insert(comp_id);
        done.insert(comp[node(!rep)]);
        for &m in lits {
            if m.var() == rep.var() {
                continue;
            }
            lit_map[node(m)] = rep;
            lit_map[node(!m)] = !rep;
            // `m` и `rep` agree in every model: positive `m` means the
            // variable equals `rep` as stated; negative `m` means it equals
            // the negation.
            let value = if m.is_positive() { rep } else { !rep };
            substitutions.push((m.var(), value));
        }
    }

    if substitutions.is_empty() {
        return EquivOutcome::Merged {
            instance: inst.clone(),
            substitutions,
        };
    }

    let mut clauses: Vec<Clause> = Vec::with_capacity(inst.clauses().len());
    for c in inst.clauses() {
        let mapped: Vec<i64> = c.lits().iter().map(|&l| lit_map[node(l)].to_dimacs()).collect();
        let nc = Clause::from_dimacs(&mapped);
        if !nc.is_tautology() {
            clauses.push(nc);
        }
    }
    let demoted: BTreeSet<Var> = substitutions.iter().map(|&(v, _)| v).collect();
    let partition = inst.partition().demote_to_z(&demoted);
    let instance = ProblemInstance::new(inst.num_vars(), clauses, partition)
        .expect("substitution preserves well-formedness");
    EquivOutcome::Merged {
        instance,
        substitutions,
    }
}

// ---------------------------------------------------------------------------
// Symmetry detection
// ---------------------------------------------------------------------------

struct SymGraph {
    node_count: usize,
    lit_nodes: usize,
    adj: Vec<Vec<u32>>,
    init_color: Vec<u32>,
}

impl SymGraph {
    fn build(inst: &ProblemInstance, two_color: bool) -> SymGraph {
        let lit_nodes = 2 * inst.num_vars() as usize;
        let node_count = lit_nodes + inst.clauses().len();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); node_count];
        for v in 1..=inst.num_vars() {
            let p = node(Lit::new(v, true));
            let q = node(Lit::new(v, false));
            adj[p].push(q as u32);
            adj[q].push(p as u32);
        }
        for (ci, c) in inst.clauses().iter().enumerate() {
            let cn = lit_nodes + ci;
            for &l in c.lits() {
                adj[node(l)].push(cn as u32);
                adj[cn].push(node(l) as u32);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut init_color = vec![0u32; node_count];
        for v in 1..=inst.num_vars() {
            let color = match inst.partition().kind(v) {
                VarKind::X => 0,
                VarKind::Y => 1,
                VarKind::Z if two_color => 1,
                VarKind::Z => 2,
            };
            init_color[node(Lit::new(v, true))] = color;
            init_color[node(Lit::new(v, false))] = color;
        }
        for i in lit_nodes..node_count {
            init_color[i] = 3;
        }
        SymGraph {
            node_count,
            lit_nodes,
            adj,
            init_color,
        }
    }
}

/// Refine two colorings in lockstep with a shared signature dictionary
/// until both are stable. Returns false when their color histograms
/// diverge (no automorphism maps one side to the other) or the budget runs
/// out.
fn pair_refine(g: &SymGraph, left: &mut [u32], right: &mut [u32], budget: &mut i64) -> bool {
    loop {
        let mut dict: BTreeMap<(u32, Vec<u32>), u32> = BTreeMap::new();
        let sig_of = |colors: &[u32], dict: &mut BTreeMap<(u32, Vec<u32>), u32>| {
            let mut out = vec![0u32; g.node_count];
            for i in 0..g.node_count {
                let mut nb: Vec<u32> = g.adj[i].iter().map(|&j| colors[j as usize]).collect();
                nb.sort_unstable();
                let key = (colors[i], nb);
                let next = dict.len() as u32;
                out[i] = *dict.entry(key).or_insert(next);
            }
            out
        };
        *budget -= 2 * g.node_count as i64;
        if *budget < 0 {
            return false;
        }
        let new_left = sig_of(left, &mut dict);
        let new_right = sig_of(right, &mut dict);
        let mut hist_l: BTreeMap<u32, u32> = BTreeMap::new();
        let mut hist_r: BTreeMap<u32, u32> = BTreeMap::new();
        for &c in new_left.iter() {
            *hist_l.entry(c).or_insert(0) += 1;
        }
        for &c in new_right.iter() {
            *hist_r.entry(c).or_insert(0) += 1;
        }
        if hist_l != hist_r {
            return false;
        }
        let stable = new_left == left && new_right == right;
        left.copy_from_slice(&new_left);
        right.copy_from_slice(&new_right);
        if stable {
            return true;
        }
    }
}

/// Cells (grouped node lists) of a coloring, keyed by color.
fn cells(colors: &[u32]) -> BTreeMap<u32, Vec<u32>> {
    let mut out: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (i, &c) in colors.iter().enumerate() {
        out.entry(c).or_default().push(i as u32);
    }
    out
}

/// Try to extend the individualization `u -> w` into a full color-preserving
/// node bijection by repeated shared refinement and first-to-first pairing.
fn try_extend(g: &SymGraph, base: &[u32], u: u32, w: u32, budget: &mut i64) -> Option<Vec<u32>> {
    let mut left = base.to_vec();
    let mut right = base.to_vec();
    let mut fresh = left.iter().chain(right.iter()).copied().max().unwrap_or(0) + 1;
    left[u as usize] = fresh;
    right[w as usize] = fresh;
    loop {
        if !pair_refine(g, &mut left, &mut right, budget) {
            return None;
        }
        let cl = cells(&left);
        let cr = cells(&right);
        // Find the first non-singleton cell; pair its first members.
        let mut split: Option<(u32, u32)> = None;
        for (color, nodes_l) in &cl {
            let nodes_r = cr.get(color)?;
            if nodes_l.len() != nodes_r.len() {
                return None;
            }
            if nodes_l.len() > 1 && split.is_none() {
                split = Some((nodes_l[0], nodes_r[0]));
            }
        }
        match split {
            None => {
                // Discrete on both sides: read the bijection off the colors.
                let mut by_color: BTreeMap<u32, u32> = BTreeMap::new();
                for (i, &c) in right.iter().enumerate() {
                    by_color.insert(c, i as u32);
                }
                let mut mapping = vec![0u32; g.node_count];
                for (i, &c) in left.iter().enumerate() {
                    mapping[i] = *by_color.get(&c)?;
                }
                return Some(mapping);
            }
            Some((a, b)) => {
                fresh += 1;
                left[a as usize] = fresh;
                right[b as usize] = fresh;
            }
        }
    }
}

/// Turn a literal-node bijection into a signed variable permutation,
/// rejecting anything that breaks negation pairing.
fn mapping_to_generator(g: &SymGraph, inst: &ProblemInstance, mapping: &[u32]) -> Option<Generator> {
    let mut image = vec![Lit::new(1, true); inst.num_vars() as usize + 1];
    for v in 1..=inst.num_vars() {
        let p = node(Lit::new(v, true));
        let q = node(Lit::new(v, false));
        if mapping[p] as usize >= g.lit_nodes || mapping[q] as usize >= g.lit_nodes {
            return None;
        }
        let img_p = node_lit(mapping[p] as usize);
        let img_q = node_lit(mapping[q] as usize);
        if img_q != !img_p {
            return None;
        }
        image[v as usize] = img_p;
    }
    Some(Generator { image })
}

/// Full syntactic check: the generator permutes the clause multiset and
/// preserves every variable's role.
fn verify_generator(inst: &ProblemInstance, gen: &Generator) -> bool {
    for v in 1..=inst.num_vars() {
        let img = gen.image_of(v);
        if inst.partition().kind(v) != inst.partition().kind(img.var()) {
            return false;
        }
    }
    // Bijectivity over variables.
    let mut seen = vec![false; inst.num_vars() as usize + 1];
    for v in 1..=inst.num_vars() {
        let tv = gen.image_of(v).var() as usize;
        if seen[tv] {
            return false;
        }
        seen[tv] = true;
    }
    let mut original: Vec<&Clause> = inst.clauses().iter().collect();
    original.sort();
    let mut mapped: Vec<Clause> = inst
        .clauses()
        .iter()
        .map(|c| {
            Clause::from_dimacs(
                &c.lits()
                    .iter()
                    .map(|&l| gen.maps_lit(l).to_dimacs())
                    .collect::<Vec<i64>>(),
            )
        })
        .collect();
    mapped.sort();
    original.len() == mapped.len()
        && original.iter().zip(mapped.iter()).all(|(a, b)| **a == *b)
}

/// Budgeted generator search: refine to a stable coloring, then try to map
/// each cell's first node onto every other member of its cell.
fn find_generators(inst: &ProblemInstance, opts: &PreprocessOptions) -> Vec<Generator> {
    if inst.num_vars() == 0 || inst.clauses().is_empty() {
        return Vec::new();
    }
    let g = SymGraph::build(inst, opts.two_color);
    let mut budget = opts.refinement_budget as i64;
    let mut base = g.init_color.clone();
    {
        let mut mirror = base.clone();
        if !pair_refine(&g, &mut base, &mut mirror, &mut budget) {
            return Vec::new();
        }
    }
    let mut found: Vec<Generator> = Vec::new();
    for (_, members) in cells(&base) {
        if members.len() < 2 {
            continue;
        }
        // Only literal-node cells can seed a variable mapping.
        if members[0] as usize >= g.lit_nodes {
            continue;
        }
        let u = members[0];
        for &w in &members[1..] {
            if found.len() >= opts.max_generators || budget < 0 {
                return found;
            }
            let Some(mapping) = try_extend(&g, &base, u, w, &mut budget) else {
                continue;
            };
            let Some(gen) = mapping_to_generator(&g, inst, &mapping) else {
                continue;
            };
            if !gen.is_identity() && verify_generator(inst, &gen) && !found.contains(&gen) {
                found.push(gen);
            }
        }
    }
    found
}

// ---------------------------------------------------------------------------
// Lexicographic-leader predicates
// ---------------------------------------------------------------------------

/// Append, for every generator, clauses keeping only witness assignments
/// that are lexicographically no larger than their image (false before
/// true, lower-numbered variables most significant). Chain variables live
/// in the projection set, with full equivalence encodings so their values
/// are determined in every model.
fn add_lex_leader_predicates(inst: &ProblemInstance, gens: &[Generator]) -> ProblemInstance {
    let mut next_aux: u32 = inst.num_vars();
    let mut clauses: Vec<Clause> = Vec::new();
    for gen in gens {
        let support = gen.x_support(inst);
        let n = support.len();
        if n == 0 {
            continue;
        }
        let cl = |lits: &[Lit]| Clause::from_dimacs(&lits.iter().map(|l| l.to_dimacs()).collect::<Vec<i64>>());
        let push = |c: Clause, out: &mut Vec<Clause>| {
            if !c.is_tautology() && !c.is_empty() {
                out.push(c);
            }
        };
        // prefix_eq holds the previous chain variable y_{i-1}; none for i=1.
        let mut prefix_eq: Option<Lit> = None;
        for (i, &v) in support.iter().enumerate() {
            let vi = Lit::new(v, true);
            let li = gen.image_of(v);
            // Ordering constraint: prefix equal so far implies v_i <= l_i.
            let mut ord = vec![!vi, li];
            if let Some(y) = prefix_eq {
                ord.push(!y);
            }
            push(cl(&ord), &mut clauses);
            if i + 1 == n {
                break; // no chain needed beyond the last ordering clause
            }
            // e_i <-> (v_i <-> l_i)
            next_aux += 1;
            let e = Lit::new(next_aux, true);
            push(cl(&[!e, !vi, li]), &mut clauses);
            push(cl(&[!e, vi, !li]), &mut clauses);
            push(cl(&[e, vi, li]), &mut clauses);
            push(cl(&[e, !vi, !li]), &mut clauses);
            // y_i <-> y_{i-1} /\ e_i (aliased to e_1 at the chain head).
            let y = match prefix_eq {
                None => e,
                Some(prev) => {
                    next_aux += 1;
                    let yi = Lit::new(next_aux, true);
                    push(cl(&[!yi, prev]), &mut clauses);
                    push(cl(&[!yi, e]), &mut clauses);
                    push(cl(&[yi, !prev, !e]), &mut clauses);
                    yi
                }
            };
            prefix_eq = Some(y);
        }
    }
    inst.extended_with_aux(next_aux - inst.num_vars(), clauses)
}
