//! Counting gadgets: formulas with closed-form model counts, checked here
//! against the exact counting oracle.

use baxcount::counter::{exact_projected_count, CountQuery, OracleStats};
use baxcount::formula::PartialWitness;
use baxcount::gadgets::{chi, k_poly, lambda_k, m_gadget, GadgetFormula, Node};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn oracle_count(g: &GadgetFormula) -> u128 {
    let inst = g.to_instance();
    let q = CountQuery {
        instance: &inst,
        witness: &PartialWitness::new(),
        epsilon: 0.5,
        delta: 0.2,
    };
    let mut stats = OracleStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    exact_projected_count(&q, &mut stats, &mut rng).unwrap()
}

fn main() {
    // A comparator with exactly c models: the values 0 .. c.
    let comparator = m_gadget(4, 11).unwrap();
    println!(
        "m_gadget(4, 11): promised 11, counted {}",
        oracle_count(&comparator)
    );

    // Pack three one-variable formulas with counts (1, 0, 2); the counts
    // come back as the base-4 digits of the packed count.
    let one = GadgetFormula::from_parts(Node::var(1), 1).unwrap();
    let zero = GadgetFormula::from_parts(Node::var(1).and(Node::var(1).negated()), 1).unwrap();
    let two = GadgetFormula::from_parts(Node::var(1).or(Node::var(1).negated()), 1).unwrap();
    let packed = lambda_k(&[one.clone(), zero, two]).unwrap();
    let total = oracle_count(&packed);
    println!(
        "lambda_k digits (1, 0, 2): packed count {total} = {} + {}*4 + {}*16",
        total % 4,
        total / 4 % 4,
        total / 16 % 4
    );

    // The threshold gadget realizes the polynomial K(p) = p(2^n - p + 2d).
    let thresh = chi(&one, 1).unwrap();
    println!(
        "chi(p = 1, delta = 1) over n = 1: counted {}, k_poly says {}",
        oracle_count(&thresh),
        k_poly(1, 1u32, 1u32)
    );

    // K peaks exactly at p = 2^(n-1) + delta, which is what makes it a
    // threshold detector.
    let (n, delta) = (4u32, 3u64);
    let peak = (1u64 << (n - 1)) + delta;
    let best = (0..=1u64 << n).max_by_key(|&p| k_poly(n, delta, p)).unwrap();
    println!("k_poly(n = {n}, delta = {delta}) peaks at p = {best} (expected {peak})");
}
