//! Helpers shared by the integration test targets: independent exhaustive
//! oracles and deterministic random-state builders.

use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use efx::valuation::{sym_value, SymbolicValue};
use efx::{AgentType, Allocation, Instance, ItemSet};

/// Exhaustive reference for `min_preferred_set`: tries every subset of `s`
/// by ascending cardinality and returns the smallest size with a subset the
/// agent strictly prefers to its own bundle, together with the best
/// symbolic value among subsets of that size.
pub fn exhaustive_min_preferred(
    instance: &Instance,
    allocation: &Allocation,
    i: usize,
    s: &ItemSet,
) -> Option<(usize, SymbolicValue)> {
    let viewer = instance.agent_type(i);
    let own = sym_value(instance, viewer, allocation.bundle(i));
    let items: Vec<usize> = s.iter().collect();
    for k in 1..=items.len() {
        let best = items
            .iter()
            .combinations(k)
            .map(|subset| {
                sym_value(
                    instance,
                    viewer,
                    &subset.into_iter().copied().collect::<ItemSet>(),
                )
            })
            .filter(|value| *value > own)
            .max();
        if let Some(best) = best {
            return Some((k, best));
        }
    }
    None
}

/// A random instance with agent types, integer values in `[0, hi]`, drawn
/// from `rng`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, hi: i64) -> Instance {
    let agent_types = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                AgentType::Alpha
            } else {
                AgentType::Beta
            }
        })
        .collect();
    let alpha: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=hi)).collect();
    let beta: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=hi)).collect();
    Instance::from_integers(agent_types, &alpha, &beta)
}

/// A random partial allocation: each item lands in a uniformly chosen
/// bundle or the pool.
pub fn random_allocation(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Allocation {
    let mut bundles = vec![ItemSet::new(); n];
    let mut pool = ItemSet::new();
    for item in 0..m {
        let place = rng.gen_range(0..=n);
        if place == n {
            pool.insert(item);
        } else {
            bundles[place].insert(item);
        }
    }
    Allocation::new(bundles, pool)
}

/// A random nonempty item subset of `0..m`, at most `max_len` items.
pub fn random_subset(rng: &mut ChaCha8Rng, m: usize, max_len: usize) -> ItemSet {
    loop {
        let set: ItemSet = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
        if !set.is_empty() && set.len() <= max_len {
            return set;
        }
    }
}
