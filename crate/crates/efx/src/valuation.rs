//! Exact additive bundle valuation plus the non-degeneracy mechanism: a
//! symbolic lexicographic order under which, for each agent type, distinct
//! item sets always compare strictly.
//!
//! A numeric perturbation (adding `ε·2^j` to item `j`'s value for a
//! sufficiently small `ε > 0`) would need `ε` chosen against the minimum gap
//! between any two subset sums, which requires enumerating exponentially many
//! subset pairs. Taking the `ε → 0⁺` limit instead yields an exact
//! lexicographic order: compare real values first, and break exact ties by
//! the perturbation coefficient `Σ_{j∈S} 2^j`, which uniquely encodes the
//! set. The order is total and strict on distinct sets, agrees with the raw
//! order whenever raw values differ, and therefore any allocation that is
//! EFX under it is EFX under the raw values as well.
//!
//! All solver-internal comparisons (envy, champions, agent orderings, the
//! strict-inequality chains of the exchange step) use [`SymbolicValue`]; the
//! final certificate is additionally checked under raw values by the
//! `checker` module.

use std::cmp::Ordering;
use std::ops::AddAssign;

use num::bigint::BigUint;
use num::Zero;

use crate::model::{AgentType, Allocation, Instance, ItemSet, Rational};

/// The value of an item set under the symbolically perturbed valuation: the
/// exact rational sum plus the perturbation coefficient `Σ_{j∈S} 2^j`.
///
/// Comparison is lexicographic (base first, then tiebreak), which the derived
/// `Ord` provides thanks to field order. Since the tiebreak uniquely encodes
/// the set, distinct sets of the same base value still compare strictly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicValue {
    pub base: Rational,
    pub tiebreak: BigUint,
}

impl SymbolicValue {
    /// The value of the empty set.
    pub fn zero() -> SymbolicValue {
        SymbolicValue {
            base: Rational::zero(),
            tiebreak: BigUint::zero(),
        }
    }
}

impl AddAssign<&SymbolicValue> for SymbolicValue {
    fn add_assign(&mut self, other: &SymbolicValue) {
        self.base += &other.base;
        self.tiebreak += &other.tiebreak;
    }
}

/// Additive raw value of `s` under the given type: `Σ_{j∈s} v_type(j)`.
pub fn raw_value(instance: &Instance, agent_type: AgentType, s: &ItemSet) -> Rational {
    let values = instance.values(agent_type);
    s.iter().map(|item| &values[item]).sum()
}

/// Symbolic value of `s` under the given type.
pub fn sym_value(instance: &Instance, agent_type: AgentType, s: &ItemSet) -> SymbolicValue {
    sym_sum(instance.values(agent_type), s)
}

/// Symbolic value of a single item against a raw value vector.
pub fn sym_item(values: &[Rational], item: usize) -> SymbolicValue {
    let mut tiebreak = BigUint::zero();
    tiebreak.set_bit(item as u64, true);
    SymbolicValue {
        base: values[item].clone(),
        tiebreak,
    }
}

/// Symbolic value of an item set against a raw value vector.
pub fn sym_sum(values: &[Rational], s: &ItemSet) -> SymbolicValue {
    let mut total = SymbolicValue::zero();
    for item in s {
        total.base += &values[item];
        total.tiebreak.set_bit(item as u64, true);
    }
    total
}

/// True iff agent `i` envies agent `j`: `i` strictly prefers `j`'s bundle to
/// its own under the symbolic order. Irreflexive by strictness.
pub fn envies(instance: &Instance, allocation: &Allocation, i: usize, j: usize) -> bool {
    if i == j {
        return false;
    }
    let viewer = instance.agent_type(i);
    sym_value(instance, viewer, allocation.bundle(j))
        > sym_value(instance, viewer, allocation.bundle(i))
}

/// Compares two item sets from one agent type's point of view.
pub fn compare_sets(
    instance: &Instance,
    agent_type: AgentType,
    s: &ItemSet,
    t: &ItemSet,
) -> Ordering {
    sym_value(instance, agent_type, s).cmp(&sym_value(instance, agent_type, t))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::model::{rational, Instance};

    fn alpha_instance(values: &[i64]) -> Instance {
        let zeros = vec![0; values.len()];
        Instance::from_integers(vec![AgentType::Alpha, AgentType::Alpha], values, &zeros)
    }

    #[test]
    fn raw_value_sums_selected_items() {
        let instance = alpha_instance(&[10, 7, 2, 1]);
        let s = ItemSet::from_iter([0, 2]);
        assert_eq!(raw_value(&instance, AgentType::Alpha, &s), rational(12));
    }

    #[test]
    fn raw_value_of_empty_set_is_zero() {
        let instance = alpha_instance(&[10, 7]);
        assert_eq!(
            raw_value(&instance, AgentType::Alpha, &ItemSet::new()),
            rational(0)
        );
    }

    #[test]
    fn raw_value_sums_exact_fractions() {
        let instance = Instance::from_json(
            r#"{"m":2,"agents":["beta"],"values":{"alpha":[0,0],"beta":["1/2","1/3"]}}"#,
        )
        .unwrap();
        assert_eq!(
            raw_value(&instance, AgentType::Beta, &ItemSet::from_iter([0, 1])),
            Rational::new(5.into(), 6.into())
        );
    }

    #[test]
    fn equal_base_breaks_ties_by_higher_indexed_items() {
        let instance = alpha_instance(&[1, 1]);
        let s = sym_value(&instance, AgentType::Alpha, &ItemSet::singleton(0));
        let t = sym_value(&instance, AgentType::Alpha, &ItemSet::singleton(1));
        assert_eq!(s.base, t.base);
        assert_eq!(s.tiebreak, BigUint::from(1u32));
        assert_eq!(t.tiebreak, BigUint::from(2u32));
        assert!(t > s);
    }

    #[test]
    fn identical_sets_compare_equal() {
        let instance = alpha_instance(&[1, 1]);
        let s = ItemSet::from_iter([0, 1]);
        assert_eq!(
            sym_value(&instance, AgentType::Alpha, &s),
            sym_value(&instance, AgentType::Alpha, &s)
        );
    }

    #[test]
    fn base_dominates_tiebreak() {
        let instance = alpha_instance(&[3, 1]);
        let s = sym_value(&instance, AgentType::Alpha, &ItemSet::singleton(0));
        let t = sym_value(&instance, AgentType::Alpha, &ItemSet::singleton(1));
        assert!(s > t);
    }

    #[test]
    fn empty_bundles_do_not_envy() {
        let instance = alpha_instance(&[1, 1]);
        let allocation = Allocation::empty(2, 2);
        assert!(!envies(&instance, &allocation, 0, 1));
        assert!(!envies(&instance, &allocation, 1, 0));
    }

    #[test]
    fn positive_item_attracts_envy_from_empty_bundle() {
        let instance = alpha_instance(&[1, 1]);
        let allocation = Allocation::empty(2, 2).with_bundle(1, ItemSet::singleton(0));
        assert!(envies(&instance, &allocation, 0, 1));
        assert!(!envies(&instance, &allocation, 1, 0));
    }

    #[test]
    fn envy_is_irreflexive() {
        let instance = alpha_instance(&[5, 3]);
        let allocation =
            Allocation::complete(vec![ItemSet::singleton(0), ItemSet::singleton(1)]);
        assert!(!envies(&instance, &allocation, 0, 0));
        assert!(!envies(&instance, &allocation, 1, 1));
    }

    #[test]
    fn poorer_identical_agent_envies_richer() {
        // Identical values [5,3]: the holder of {1} envies the holder of {0}.
        let instance = alpha_instance(&[5, 3]);
        let allocation =
            Allocation::complete(vec![ItemSet::singleton(0), ItemSet::singleton(1)]);
        assert!(envies(&instance, &allocation, 1, 0));
        assert!(!envies(&instance, &allocation, 0, 1));
    }

    /// Random item subsets over an `m`-item universe, alongside the values.
    fn values_and_two_sets() -> impl Strategy<Value = (Vec<i64>, Vec<usize>, Vec<usize>)> {
        (2usize..=10).prop_flat_map(|m| {
            (
                proptest::collection::vec(0i64..=6, m),
                proptest::collection::vec(any::<bool>(), m),
                proptest::collection::vec(any::<bool>(), m),
            )
                .prop_map(|(values, in_s, in_t)| {
                    let pick = |mask: Vec<bool>| {
                        mask.into_iter()
                            .enumerate()
                            .filter(|(_, b)| *b)
                            .map(|(i, _)| i)
                            .collect::<Vec<_>>()
                    };
                    (values, pick(in_s), pick(in_t))
                })
        })
    }

    proptest! {
        #[test]
        fn comparison_is_total_and_strict_on_distinct_sets(
            (values, s, t) in values_and_two_sets()
        ) {
            let instance = alpha_instance(&values);
            let s = ItemSet::from_iter(s);
            let t = ItemSet::from_iter(t);
            let ordering = compare_sets(&instance, AgentType::Alpha, &s, &t);
            if s == t {
                prop_assert_eq!(ordering, Ordering::Equal);
            } else {
                prop_assert_ne!(ordering, Ordering::Equal);
                prop_assert_eq!(
                    compare_sets(&instance, AgentType::Alpha, &t, &s),
                    ordering.reverse()
                );
            }
        }

        #[test]
        fn symbolic_agrees_with_raw_when_raw_differs(
            (values, s, t) in values_and_two_sets()
        ) {
            let instance = alpha_instance(&values);
            let s = ItemSet::from_iter(s);
            let t = ItemSet::from_iter(t);
            let raw_s = raw_value(&instance, AgentType::Alpha, &s);
            let raw_t = raw_value(&instance, AgentType::Alpha, &t);
            if raw_s != raw_t {
                prop_assert_eq!(
                    compare_sets(&instance, AgentType::Alpha, &s, &t),
                    raw_s.cmp(&raw_t)
                );
            }
        }

        #[test]
        fn supersets_compare_strictly_greater(
            (values, s, extra) in values_and_two_sets()
        ) {
            let instance = alpha_instance(&values);
            let s = ItemSet::from_iter(s);
            let t = s.union(&ItemSet::from_iter(extra));
            let ordering = compare_sets(&instance, AgentType::Alpha, &t, &s);
            if t == s {
                prop_assert_eq!(ordering, Ordering::Equal);
            } else {
                prop_assert_eq!(ordering, Ordering::Greater);
            }
        }

        #[test]
        fn value_is_additive_over_disjoint_sets(
            (values, s, t) in values_and_two_sets()
        ) {
            let instance = alpha_instance(&values);
            let s = ItemSet::from_iter(s);
            let t = ItemSet::from_iter(t).difference(&s);
            let mut combined = sym_value(&instance, AgentType::Alpha, &s);
            combined += &sym_value(&instance, AgentType::Alpha, &t);
            prop_assert_eq!(
                combined,
                sym_value(&instance, AgentType::Alpha, &s.union(&t))
            );
        }
    }
}
