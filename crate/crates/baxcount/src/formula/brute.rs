//! Brute-force reference oracle for small instances.
//!
//! Everything here works by direct enumeration and clause evaluation over
//! bit-packed assignments — deliberately independent of the SAT engine and
//! the counting oracles so it can serve as ground truth in tests. Guarded to
//! instances with at most [`BRUTE_FORCE_VAR_LIMIT`] variables.

use std::collections::BTreeSet;

use super::{FormulaError, PartialWitness, ProblemInstance, Var, VarKind};

/// Maximum total variable count accepted by the brute-force routines.
pub const BRUTE_FORCE_VAR_LIMIT: u32 = 24;

/// Bit-mask view of a clause split by partition class.
///
/// `xy` masks index a combined space (`X` bits first, then `Y` bits); `z`
/// masks index the `Z` space.
struct MaskClause {
    xy_pos: u64,
    xy_neg: u64,
    z_pos: u64,
    z_neg: u64,
    /// For small `Z`: bitset over all `Z` assignments whose bits satisfy the
    /// clause's `Z` part (only meaningful when the clause has `Z` literals).
    z_allowed: u64,
    has_z: bool,
}

struct Kernel {
    xs: Vec<Var>,
    ys: Vec<Var>,
    zs: Vec<Var>,
    clauses: Vec<MaskClause>,
    /// `Z` small enough to precompute per-clause allowed-assignment bitsets.
    z_bitset: bool,
}

impl Kernel {
    fn build(inst: &ProblemInstance) -> Result<Kernel, FormulaError> {
        if inst.num_vars() > BRUTE_FORCE_VAR_LIMIT {
            return Err(FormulaError::BruteForceTooLarge {
                limit: BRUTE_FORCE_VAR_LIMIT,
                actual: inst.num_vars(),
            });
        }
        let xs: Vec<Var> = inst.x_vars().iter().copied().collect();
        let ys: Vec<Var> = inst.y_vars().iter().copied().collect();
        let zs: Vec<Var> = inst.z_vars().iter().copied().collect();
        let z_bitset = zs.len() <= 6;

        let mut index = vec![(VarKind::Z, 0usize); inst.num_vars() as usize + 1];
        for (i, &v) in xs.iter().enumerate() {
            index[v as usize] = (VarKind::X, i);
        }
        for (i, &v) in ys.iter().enumerate() {
            index[v as usize] = (VarKind::Y, xs.len() + i);
        }
        for (i, &v) in zs.iter().enumerate() {
            index[v as usize] = (VarKind::Z, i);
        }

        let clauses = inst
            .clauses()
            .iter()
            .map(|c| {
                let mut m = MaskClause {
                    xy_pos: 0,
                    xy_neg: 0,
                    z_pos: 0,
                    z_neg: 0,
                    z_allowed: 0,
                    has_z: false,
                };
                for &l in c.lits() {
                    let (kind, bit) = index[l.var() as usize];
                    let mask = 1u64 << bit;
                    match kind {
                        VarKind::X | VarKind::Y => {
                            if l.is_positive() {
                                m.xy_pos |= mask;
                            } else {
                                m.xy_neg |= mask;
                            }
                        }
                        VarKind::Z => {
                            m.has_z = true;
                            if l.is_positive() {
                                m.z_pos |= mask;
                            } else {
                                m.z_neg |= mask;
                            }
                        }
                    }
                }
                if z_bitset && m.has_z {
                    for zb in 0u64..(1 << zs.len()) {
                        if (zb & m.z_pos) != 0 || (!zb & m.z_neg) != 0 {
                            m.z_allowed |= 1 << zb;
                        }
                    }
                }
                m
            })
            .collect();

        Ok(Kernel {
            xs,
            ys,
            zs,
            clauses,
            z_bitset,
        })
    }

    /// Is there a `Z` assignment completing the given `X`+`Y` bits to a model?
    fn exists_z(&self, xy: u64) -> bool {
        if self.z_bitset {
            let full: u64 = if self.zs.len() == 6 {
                u64::MAX
            } else {
                (1 << (1 << self.zs.len())) - 1
            };
            let mut acc = full;
            for m in &self.clauses {
                if (xy & m.xy_pos) != 0 || (!xy & m.xy_neg) != 0 {
                    continue; // satisfied without Z
                }
                if !m.has_z {
                    return false; // falsified and no Z literals to save it
                }
                acc &= m.z_allowed;
                if acc == 0 {
                    return false;
                }
            }
            acc != 0
        } else {
            'z: for zb in 0u64..(1 << self.zs.len()) {
                for m in &self.clauses {
                    let sat = (xy & m.xy_pos) != 0
                        || (!xy & m.xy_neg) != 0
                        || (zb & m.z_pos) != 0
                        || (!zb & m.z_neg) != 0;
                    if !sat {
                        continue 'z;
                    }
                }
                return true;
            }
            false
        }
    }

    /// Pack a witness over the `X` bit positions, returning (bits, mask of
    /// assigned positions).
    fn pack_witness(&self, w: &PartialWitness) -> Result<(u64, u64), FormulaError> {
        let mut bits = 0u64;
        let mut mask = 0u64;
        for (v, b) in w.iter() {
            match self.xs.binary_search(&v) {
                Ok(i) => {
                    mask |= 1 << i;
                    if b {
                        bits |= 1 << i;
                    }
                }
                Err(_) => return Err(FormulaError::WitnessOutsideX(v)),
            }
        }
        Ok((bits, mask))
    }
}

/// The set of `Y` assignments reachable from some completion of `w`, as a
/// bitset over packed `Y` bit-vectors (bit `yb` set means `Y` assignment
/// `yb` is in the projected union).
pub fn models_projected(
    inst: &ProblemInstance,
    w: &PartialWitness,
) -> Result<Vec<u64>, FormulaError> {
    let k = Kernel::build(inst)?;
    let (wbits, wmask) = k.pack_witness(w)?;
    let nx = k.xs.len();
    let ny = k.ys.len();
    let mut bitset = vec![0u64; ((1usize << ny) + 63) / 64];
    // Enumerate completions of the witness, then Y assignments.
    let free_positions: Vec<usize> = (0..nx).filter(|i| wmask & (1 << i) == 0).collect();
    for fill in 0u64..(1 << free_positions.len()) {
        let mut xbits = wbits;
        for (j, &pos) in free_positions.iter().enumerate() {
            if fill & (1 << j) != 0 {
                xbits |= 1 << pos;
            }
        }
        for yb in 0u64..(1 << ny) {
            if bitset[(yb >> 6) as usize] & (1 << (yb & 63)) != 0 {
                continue; // already covered by another completion
            }
            let xy = xbits | (yb << nx);
            if k.exists_z(xy) {
                bitset[(yb >> 6) as usize] |= 1 << (yb & 63);
            }
        }
    }
    Ok(bitset)
}

/// `Count(w)`: the number of `Y` assignments extendable to a model by *some*
/// completion of the (possibly partial) witness `w`.
pub fn count_partial(inst: &ProblemInstance, w: &PartialWitness) -> Result<u128, FormulaError> {
    let bitset = models_projected(inst, w)?;
    Ok(bitset.iter().map(|word| u128::from(word.count_ones())).sum())
}

/// The exact maximum: the total witness with the most projected `Y` models,
/// or `None` when the formula has no model at all.
///
/// Ties resolve to the lexicographically first packed witness so the result
/// is deterministic.
pub fn max_count(
    inst: &ProblemInstance,
) -> Result<(Option<PartialWitness>, u128), FormulaError> {
    let k = Kernel::build(inst)?;
    let nx = k.xs.len();
    let ny = k.ys.len();
    let mut best: Option<(u64, u128)> = None;
    for xbits in 0u64..(1 << nx) {
        let mut count = 0u128;
        for yb in 0u64..(1 << ny) {
            if k.exists_z(xbits | (yb << nx)) {
                count += 1;
            }
        }
        if count > 0 && best.map_or(true, |(_, c)| count > c) {
            best = Some((xbits, count));
        }
    }
    Ok(match best {
        Some((xbits, count)) => {
            let w = PartialWitness::from_pairs(
                k.xs.iter()
                    .enumerate()
                    .map(|(i, &v)| (v, xbits & (1 << i) != 0)),
            );
            (Some(w), count)
        }
        None => (None, 0),
    })
}

/// All total witnesses (over the full `X` set) whose count attains `target`.
/// Useful for checking that a solver-reported witness is a true maximizer.
pub fn witnesses_with_count(
    inst: &ProblemInstance,
    target: u128,
) -> Result<Vec<PartialWitness>, FormulaError> {
    let k = Kernel::build(inst)?;
    let nx = k.xs.len();
    let ny = k.ys.len();
    let mut hits = Vec::new();
    for xbits in 0u64..(1 << nx) {
        let mut count = 0u128;
        for yb in 0u64..(1 << ny) {
            if k.exists_z(xbits | (yb << nx)) {
                count += 1;
            }
        }
        if count == target {
            hits.push(PartialWitness::from_pairs(
                k.xs.iter()
                    .enumerate()
                    .map(|(i, &v)| (v, xbits & (1 << i) != 0)),
            ));
        }
    }
    Ok(hits)
}

/// Number of distinct X-projections of models (`|M_X|`).
pub fn x_projection_count(inst: &ProblemInstance) -> Result<u128, FormulaError> {
    let k = Kernel::build(inst)?;
    let nx = k.xs.len();
    let ny = k.ys.len();
    let mut count = 0u128;
    for xbits in 0u64..(1 << nx) {
        let mut any = false;
        for yb in 0u64..(1 << ny) {
            if k.exists_z(xbits | (yb << nx)) {
                any = true;
                break;
            }
        }
        if any {
            count += 1;
        }
    }
    Ok(count)
}

/// Convenience used by tests: count for a set `E` of kept positions of a
/// total witness (`Count_E(x)` = count of `x|_E`).
pub fn count_restricted(
    inst: &ProblemInstance,
    x: &PartialWitness,
    e: &BTreeSet<Var>,
) -> Result<u128, FormulaError> {
    count_partial(inst, &x.restrict_to(e))
}
