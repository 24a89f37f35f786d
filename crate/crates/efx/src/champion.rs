//! Minimum preferred sets, the κ quantities, most-envious-agent sets, and
//! champion queries.
//!
//! For an agent `i` and an item set `S`, the *minimum preferred set*
//! `P(i, S)` is a smallest-cardinality subset of `S` that `i` strictly
//! prefers to its own bundle, and `κ(i, S)` is its cardinality (`+∞` when no
//! subset of `S` beats the bundle — equivalently, when `S` itself does not,
//! by monotonicity). The agents minimizing `κ(·, S)` are the *most envious
//! agents* for `S`; a most envious agent for `X_j ∪ {g}` is a *champion* of
//! `j`, and a *self-champion* when it champions its own augmented bundle.
//!
//! Because values are additive, the maximum-value `k`-subset of `S` is the
//! top `k` items of `S` by single-item value: swapping any chosen item for a
//! discarded higher-valued one can only increase the sum. Hence a beating
//! `k`-subset exists iff the top-`k` prefix beats the bundle, and the minimum
//! preferred set is the shortest such prefix. The symbolic order makes
//! single-item values pairwise distinct, so the prefix — and therefore the
//! returned witness — is unique and deterministic.

use crate::model::{Allocation, Instance, ItemSet};
use crate::valuation::{self, SymbolicValue};

/// A smallest-cardinality subset of some queried set that the querying agent
/// strictly prefers to its own bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferredSet {
    pub items: ItemSet,
    /// `|items|`, the agent's κ value for the queried set.
    pub kappa: usize,
}

/// `κ(i, S)` with the infinite case explicit rather than a sentinel integer.
///
/// The derived `Ord` places every finite value below `Infinite` because the
/// finite variant is declared first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kappa {
    Finite(usize),
    Infinite,
}

/// Computes `P(i, s)`: the smallest-cardinality subset of `s` that agent `i`
/// strictly prefers (symbolically) to its own bundle, or `None` when no
/// subset beats the bundle (`κ = +∞`).
pub fn min_preferred_set(
    instance: &Instance,
    allocation: &Allocation,
    i: usize,
    s: &ItemSet,
) -> Option<PreferredSet> {
    let viewer = instance.agent_type(i);
    let values = instance.values(viewer);
    let own = valuation::sym_value(instance, viewer, allocation.bundle(i));

    // Items of S in descending symbolic value; distinct by the tiebreak, so
    // the sort order (and hence the witness) is unique.
    let mut ranked: Vec<usize> = s.iter().collect();
    ranked.sort_by(|&a, &b| valuation::sym_item(values, b).cmp(&valuation::sym_item(values, a)));

    let mut prefix = ItemSet::new();
    let mut prefix_value = SymbolicValue::zero();
    for (count, item) in ranked.into_iter().enumerate() {
        prefix.insert(item);
        prefix_value += &valuation::sym_item(values, item);
        if prefix_value > own {
            return Some(PreferredSet {
                items: prefix,
                kappa: count + 1,
            });
        }
    }
    None
}

/// `κ(i, s)`: the cardinality of the minimum preferred set, or `+∞`.
pub fn kappa(instance: &Instance, allocation: &Allocation, i: usize, s: &ItemSet) -> Kappa {
    match min_preferred_set(instance, allocation, i, s) {
        Some(preferred) => Kappa::Finite(preferred.kappa),
        None => Kappa::Infinite,
    }
}

/// The most envious agents for `s`: the global minimum of `κ(·, s)` together
/// with every agent attaining it (ascending index). When no agent has a
/// finite κ the result is `(Infinite, [])`.
pub fn most_envious(
    instance: &Instance,
    allocation: &Allocation,
    s: &ItemSet,
) -> (Kappa, Vec<usize>) {
    let mut best = Kappa::Infinite;
    let mut agents = Vec::new();
    for i in instance.agents() {
        let k = kappa(instance, allocation, i, s);
        if k == Kappa::Infinite {
            continue;
        }
        if k < best {
            best = k;
            agents.clear();
        }
        if k == best {
            agents.push(i);
        }
    }
    (best, agents)
}

/// The champions of agent `j` with respect to pooled item `g`: the most
/// envious agents for `X_j ∪ {g}`.
///
/// Never empty: `j` itself strictly prefers `X_j ∪ {g}` to `X_j` under the
/// symbolic order, so `κ(j, X_j ∪ g)` is finite.
///
/// # Panics
///
/// Panics if `g` is already in some bundle.
pub fn champions_of(
    instance: &Instance,
    allocation: &Allocation,
    j: usize,
    g: usize,
) -> (Kappa, Vec<usize>) {
    assert!(
        !allocation.bundles().iter().any(|b| b.contains(g)),
        "champions_of requires an unallocated item, but {g} is in a bundle"
    );
    most_envious(instance, allocation, &allocation.bundle(j).with(g))
}

#[cfg(test)]
mod tests {
    use itertools::Itertools;
    use proptest::prelude::*;

    use super::*;
    use crate::model::AgentType;
    use crate::valuation::sym_value;

    /// Exhaustive by-cardinality search for the minimum preferred set:
    /// the smallest `k` admitting a beating `k`-subset, and the best value
    /// among beating `k`-subsets. Only feasible for small `|s|`.
    fn exhaustive_min_preferred(
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

    fn one_agent(values: &[i64]) -> Instance {
        let zeros = vec![0; values.len()];
        Instance::from_integers(vec![AgentType::Alpha], values, &zeros)
    }

    #[test]
    fn two_items_needed_when_no_single_beats_bundle() {
        // Bundle worth 5; S has values {4,3,2}: no singleton beats 5, the
        // top two (4+3=7) do. The exhaustive oracle confirms κ=2.
        let instance = one_agent(&[5, 4, 3, 2]);
        let allocation = Allocation::new(
            vec![ItemSet::singleton(0)],
            ItemSet::from_iter([1, 2, 3]),
        );
        let s = ItemSet::from_iter([1, 2, 3]);
        let preferred = min_preferred_set(&instance, &allocation, 0, &s).unwrap();
        assert_eq!(preferred.kappa, 2);
        assert_eq!(preferred.items, ItemSet::from_iter([1, 2]));
        let (k, value) = exhaustive_min_preferred(&instance, &allocation, 0, &s).unwrap();
        assert_eq!(k, 2);
        assert_eq!(
            value,
            sym_value(&instance, AgentType::Alpha, &preferred.items)
        );
    }

    #[test]
    fn any_positive_item_beats_empty_bundle() {
        let instance = one_agent(&[3]);
        let allocation = Allocation::empty(1, 1);
        let preferred =
            min_preferred_set(&instance, &allocation, 0, &ItemSet::singleton(0)).unwrap();
        assert_eq!(preferred.kappa, 1);
        assert_eq!(preferred.items, ItemSet::singleton(0));
        assert_eq!(
            kappa(&instance, &allocation, 0, &ItemSet::singleton(0)),
            Kappa::Finite(1)
        );
    }

    #[test]
    fn empty_set_never_beats() {
        let instance = one_agent(&[3]);
        let allocation = Allocation::empty(1, 1);
        assert_eq!(min_preferred_set(&instance, &allocation, 0, &ItemSet::new()), None);
        assert_eq!(
            kappa(&instance, &allocation, 0, &ItemSet::new()),
            Kappa::Infinite
        );
    }

    #[test]
    fn most_envious_with_empty_bundles_ties_everyone() {
        let instance = Instance::from_integers(
            vec![AgentType::Alpha, AgentType::Beta],
            &[1, 1],
            &[2, 2],
        );
        let allocation = Allocation::empty(2, 2);
        let (k, agents) = most_envious(&instance, &allocation, &ItemSet::singleton(0));
        assert_eq!(k, Kappa::Finite(1));
        assert_eq!(agents, vec![0, 1]);
    }

    #[test]
    fn most_envious_of_empty_set_is_nobody() {
        let instance = one_agent(&[1]);
        let allocation = Allocation::empty(1, 1);
        assert_eq!(
            most_envious(&instance, &allocation, &ItemSet::new()),
            (Kappa::Infinite, vec![])
        );
    }

    #[test]
    fn most_envious_picks_smaller_kappa() {
        // Agent 0 (α) holds {0} worth 5 and needs two of {1,2,3} (4+3=7>5):
        // κ=2. Agent 1 (β) holds {4} worth 5 and needs all three 2s: κ=3.
        let instance = Instance::new(
            5,
            vec![AgentType::Alpha, AgentType::Beta],
            [5, 4, 3, 2, 0].map(crate::model::rational).to_vec(),
            [0, 2, 2, 2, 5].map(crate::model::rational).to_vec(),
        );
        let allocation = Allocation::new(
            vec![ItemSet::singleton(0), ItemSet::singleton(4)],
            ItemSet::from_iter([1, 2, 3]),
        );
        let s = ItemSet::from_iter([1, 2, 3]);
        assert_eq!(kappa(&instance, &allocation, 0, &s), Kappa::Finite(2));
        assert_eq!(kappa(&instance, &allocation, 1, &s), Kappa::Finite(3));
        assert_eq!(
            most_envious(&instance, &allocation, &s),
            (Kappa::Finite(2), vec![0])
        );
    }

    #[test]
    fn champions_include_all_empty_bundled_agents() {
        let instance = Instance::from_integers(
            vec![AgentType::Alpha, AgentType::Beta],
            &[1, 1],
            &[2, 2],
        );
        let allocation = Allocation::empty(2, 2);
        let (k, champions) = champions_of(&instance, &allocation, 0, 1);
        assert_eq!(k, Kappa::Finite(1));
        assert_eq!(champions, vec![0, 1]);
    }

    #[test]
    fn single_agent_self_champions() {
        let instance = one_agent(&[2, 3]);
        let allocation = Allocation::empty(1, 2).with_bundle(0, ItemSet::singleton(0));
        let (k, champions) = champions_of(&instance, &allocation, 0, 1);
        assert_eq!(k, Kappa::Finite(1));
        assert_eq!(champions, vec![0]);
    }

    #[test]
    #[should_panic(expected = "unallocated")]
    fn champions_of_allocated_item_panics() {
        let instance = one_agent(&[1, 1]);
        let allocation = Allocation::empty(1, 2).with_bundle(0, ItemSet::singleton(0));
        champions_of(&instance, &allocation, 0, 0);
    }

    /// A small random query: values, a bundle for the querying agent, and a
    /// queried set drawn from the remaining items.
    fn query() -> impl Strategy<Value = (Vec<i64>, Vec<usize>, Vec<usize>)> {
        (2usize..=8).prop_flat_map(|m| {
            (
                proptest::collection::vec(0i64..=9, m),
                proptest::collection::vec(0u8..3, m),
            )
                .prop_map(|(values, role)| {
                    let bundle: Vec<usize> = role
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| **r == 1)
                        .map(|(i, _)| i)
                        .collect();
                    let s: Vec<usize> = role
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| **r == 2)
                        .map(|(i, _)| i)
                        .collect();
                    (values, bundle, s)
                })
        })
    }

    proptest! {
        #[test]
        fn matches_exhaustive_oracle((values, bundle, s) in query()) {
            let instance = one_agent(&values);
            let m = values.len();
            let allocation = Allocation::empty(1, m).with_bundle(0, ItemSet::from_iter(bundle));
            let s = ItemSet::from_iter(s);
            let fast = min_preferred_set(&instance, &allocation, 0, &s);
            let oracle = exhaustive_min_preferred(&instance, &allocation, 0, &s);
            match (fast, oracle) {
                (None, None) => {}
                (Some(preferred), Some((k, best))) => {
                    prop_assert_eq!(preferred.kappa, k);
                    prop_assert_eq!(
                        sym_value(&instance, AgentType::Alpha, &preferred.items),
                        best
                    );
                }
                (fast, oracle) => {
                    return Err(TestCaseError::fail(format!(
                        "finiteness disagrees: fast {fast:?}, oracle {oracle:?}"
                    )));
                }
            }
        }

        #[test]
        fn witness_is_minimal((values, bundle, s) in query()) {
            let instance = one_agent(&values);
            let m = values.len();
            let allocation = Allocation::empty(1, m).with_bundle(0, ItemSet::from_iter(bundle));
            let own = sym_value(&instance, AgentType::Alpha, allocation.bundle(0));
            if let Some(preferred) =
                min_preferred_set(&instance, &allocation, 0, &ItemSet::from_iter(s))
            {
                for h in &preferred.items {
                    let reduced = preferred.items.without(h);
                    prop_assert!(
                        sym_value(&instance, AgentType::Alpha, &reduced) <= own,
                        "dropping {} should stop the witness beating the bundle",
                        h
                    );
                }
            }
        }

        #[test]
        fn kappa_monotone_in_bundle_growth((values, bundle, s) in query()) {
            let instance = one_agent(&values);
            let m = values.len();
            let small = ItemSet::from_iter(bundle);
            let grown: ItemSet = small.union(&ItemSet::singleton(m - 1));
            let s = ItemSet::from_iter(s).without(m - 1);
            let with_small = Allocation::empty(1, m).with_bundle(0, small);
            let with_grown = Allocation::empty(1, m).with_bundle(0, grown);
            prop_assert!(
                kappa(&instance, &with_grown, 0, &s) >= kappa(&instance, &with_small, 0, &s)
            );
        }
    }
}
