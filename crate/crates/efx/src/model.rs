//! Core immutable domain types shared by all modules: instances, item sets,
//! allocations, and their JSON formats.
//!
//! An [`Instance`] describes `m` indivisible items and `n` agents, each agent
//! holding one of two additive valuation functions (its [`AgentType`]). An
//! [`Allocation`] partitions a subset of the items into per-agent bundles and
//! keeps the unallocated remainder in a pool. Both types are plain immutable
//! data; mutation is expressed by constructing new values.
//!
//! Semantic problems (length mismatches, negative values, overlapping
//! bundles, a pool that is not the complement of the bundles) are *not*
//! rejected at construction or parse time. They are reported exhaustively by
//! [`Instance::validate`] and [`allocation_valid`], so callers can
//! distinguish malformed input (a [`ParseError`]) from well-formed but
//! invalid input (a list of [`Violation`]s).

use std::collections::BTreeSet;
use std::fmt;

use num::bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value as JsonValue;
use thiserror::Error;

/// Exact arbitrary-precision rational number; all item values use this type.
///
/// No floating point appears anywhere in solver logic: strict-inequality
/// chains must be decided exactly.
pub type Rational = num::rational::BigRational;

/// Builds a `Rational` from an integer; convenience for tests and callers.
pub fn rational(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// One of the two additive valuation functions present in an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentType {
    Alpha,
    Beta,
}

impl AgentType {
    /// The other type.
    pub fn other(self) -> AgentType {
        match self {
            AgentType::Alpha => AgentType::Beta,
            AgentType::Beta => AgentType::Alpha,
        }
    }
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentType::Alpha => f.write_str("alpha"),
            AgentType::Beta => f.write_str("beta"),
        }
    }
}

/// A set of item indices with canonical ascending iteration order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ItemSet(BTreeSet<usize>);

impl ItemSet {
    /// The empty set.
    pub fn new() -> ItemSet {
        ItemSet(BTreeSet::new())
    }

    /// The set containing exactly `item`.
    pub fn singleton(item: usize) -> ItemSet {
        ItemSet(BTreeSet::from([item]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.contains(&item)
    }

    /// The smallest item in the set, if any.
    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    /// Inserts `item`; returns whether it was newly added.
    pub fn insert(&mut self, item: usize) -> bool {
        self.0.insert(item)
    }

    /// Removes `item`; returns whether it was present.
    pub fn remove(&mut self, item: usize) -> bool {
        self.0.remove(&item)
    }

    /// Iterates the items in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// `self ∪ {item}`, leaving `self` untouched.
    pub fn with(&self, item: usize) -> ItemSet {
        let mut set = self.clone();
        set.insert(item);
        set
    }

    /// `self ∖ {item}`, leaving `self` untouched.
    pub fn without(&self, item: usize) -> ItemSet {
        let mut set = self.clone();
        set.remove(item);
        set
    }

    /// `self ∪ other`.
    pub fn union(&self, other: &ItemSet) -> ItemSet {
        ItemSet(self.0.union(&other.0).copied().collect())
    }

    /// `self ∖ other`.
    pub fn difference(&self, other: &ItemSet) -> ItemSet {
        ItemSet(self.0.difference(&other.0).copied().collect())
    }

    /// True iff every item of `self` is in `other`.
    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> ItemSet {
        ItemSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ItemSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A fair-division instance: `m` items, `n` agents, and the two value
/// vectors.
///
/// Construction never fails; use [`Instance::validate`] to obtain the full
/// list of invariant violations before handing an instance to the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    item_count: usize,
    agent_types: Vec<AgentType>,
    values_alpha: Vec<Rational>,
    values_beta: Vec<Rational>,
}

impl Instance {
    pub fn new(
        item_count: usize,
        agent_types: Vec<AgentType>,
        values_alpha: Vec<Rational>,
        values_beta: Vec<Rational>,
    ) -> Instance {
        Instance {
            item_count,
            agent_types,
            values_alpha,
            values_beta,
        }
    }

    /// Convenience constructor from integer values; `m` is taken from the
    /// value vectors, which must have equal length.
    pub fn from_integers(
        agent_types: Vec<AgentType>,
        values_alpha: &[i64],
        values_beta: &[i64],
    ) -> Instance {
        assert_eq!(
            values_alpha.len(),
            values_beta.len(),
            "value vectors must have equal length"
        );
        Instance {
            item_count: values_alpha.len(),
            agent_types,
            values_alpha: values_alpha.iter().copied().map(rational).collect(),
            values_beta: values_beta.iter().copied().map(rational).collect(),
        }
    }

    /// Number of items `m`; items are indexed `0..m`.
    pub fn item_count(&self) -> usize {
        self.item_count
    }

    /// Number of agents `n`; agents are indexed `0..n`.
    pub fn agent_count(&self) -> usize {
        self.agent_types.len()
    }

    pub fn agent_type(&self, agent: usize) -> AgentType {
        self.agent_types[agent]
    }

    pub fn agent_types(&self) -> &[AgentType] {
        &self.agent_types
    }

    /// The value vector of the given type.
    pub fn values(&self, agent_type: AgentType) -> &[Rational] {
        match agent_type {
            AgentType::Alpha => &self.values_alpha,
            AgentType::Beta => &self.values_beta,
        }
    }

    /// The value a given type assigns to a single item.
    pub fn item_value(&self, agent_type: AgentType, item: usize) -> &Rational {
        &self.values(agent_type)[item]
    }

    pub fn items(&self) -> std::ops::Range<usize> {
        0..self.item_count
    }

    pub fn agents(&self) -> std::ops::Range<usize> {
        0..self.agent_count()
    }

    /// Agents of the given type, in ascending index order.
    pub fn agents_of_type(&self, agent_type: AgentType) -> impl Iterator<Item = usize> + '_ {
        self.agent_types
            .iter()
            .enumerate()
            .filter(move |(_, t)| **t == agent_type)
            .map(|(i, _)| i)
    }

    /// `(|N_α|, |N_β|)`.
    pub fn type_counts(&self) -> (usize, usize) {
        let alphas = self
            .agent_types
            .iter()
            .filter(|t| **t == AgentType::Alpha)
            .count();
        (alphas, self.agent_count() - alphas)
    }

    /// Checks every instance invariant and returns all violations found
    /// (empty means the instance is valid). Never aborts.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if self.item_count == 0 {
            violations.push(Violation::NoItems);
        }
        if self.agent_types.is_empty() {
            violations.push(Violation::NoAgents);
        }
        for (agent_type, values) in [
            (AgentType::Alpha, &self.values_alpha),
            (AgentType::Beta, &self.values_beta),
        ] {
            if values.len() != self.item_count {
                violations.push(Violation::ValueLengthMismatch {
                    agent_type,
                    expected: self.item_count,
                    found: values.len(),
                });
            }
            for (item, value) in values.iter().enumerate() {
                if value < &Rational::from_integer(BigInt::from(0)) {
                    violations.push(Violation::NegativeValue { agent_type, item });
                }
            }
        }
        violations
    }

    /// Parses the JSON instance format:
    ///
    /// ```json
    /// { "m": 2, "agents": ["alpha", "beta"], "values": { "alpha": [1, 2], "beta": ["1/2", 3] } }
    /// ```
    ///
    /// where each value is an integer or a `"p/q"` string with `q > 0`.
    /// Parsing only rejects malformed input; semantic violations are left to
    /// [`Instance::validate`].
    pub fn from_json(json: &str) -> Result<Instance, ParseError> {
        let dto: InstanceDto = serde_json::from_str(json)?;
        Ok(Instance {
            item_count: dto.m,
            agent_types: dto.agents,
            values_alpha: rationals_from_json(&dto.values.alpha)?,
            values_beta: rationals_from_json(&dto.values.beta)?,
        })
    }

    /// Renders the instance in the format accepted by [`Instance::from_json`]
    /// (compact, deterministic key order).
    pub fn to_json(&self) -> String {
        let dto = InstanceDto {
            m: self.item_count,
            agents: self.agent_types.clone(),
            values: ValuesDto {
                alpha: self.values_alpha.iter().map(rational_to_json).collect(),
                beta: self.values_beta.iter().map(rational_to_json).collect(),
            },
        };
        serde_json::to_string(&dto).expect("instance serialization cannot fail")
    }
}

/// A partition of a subset of the items into per-agent bundles, with the
/// unallocated remainder in the pool.
///
/// For a valid allocation the pool is exactly the complement of the bundle
/// union; parsed allocations carry whatever pool the input declared so that
/// [`allocation_valid`] can report a mismatch. All mutating helpers preserve
/// the complement invariant over the allocation's universe (bundles ∪ pool).
#[derive(Clone, PartialEq, Eq)]
pub struct Allocation {
    bundles: Vec<ItemSet>,
    pool: ItemSet,
}

impl Allocation {
    /// The empty allocation: `n` empty bundles, all of `0..m` pooled.
    pub fn empty(agent_count: usize, item_count: usize) -> Allocation {
        Allocation {
            bundles: vec![ItemSet::new(); agent_count],
            pool: (0..item_count).collect(),
        }
    }

    /// An allocation with explicitly given bundles and pool, as declared.
    pub fn new(bundles: Vec<ItemSet>, pool: ItemSet) -> Allocation {
        Allocation { bundles, pool }
    }

    /// A complete allocation (empty pool) from its bundles.
    pub fn complete(bundles: Vec<ItemSet>) -> Allocation {
        Allocation {
            bundles,
            pool: ItemSet::new(),
        }
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: usize) -> &ItemSet {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    /// The unallocated items.
    pub fn pool(&self) -> &ItemSet {
        &self.pool
    }

    /// Union of all bundles.
    pub fn allocated(&self) -> ItemSet {
        self.bundles
            .iter()
            .fold(ItemSet::new(), |acc, b| acc.union(b))
    }

    /// True iff every item of the universe is in some bundle.
    pub fn is_complete(&self) -> bool {
        self.pool.is_empty()
    }

    /// Replaces one agent's bundle, recomputing the pool as the complement
    /// of the new bundle union within the same universe.
    pub fn with_bundle(&self, agent: usize, bundle: ItemSet) -> Allocation {
        let mut bundles = self.bundles.clone();
        bundles[agent] = bundle;
        Allocation::repooled(bundles, self)
    }

    /// Replaces several bundles at once (same pool recomputation).
    pub fn with_bundles(&self, changes: &[(usize, ItemSet)]) -> Allocation {
        let mut bundles = self.bundles.clone();
        for (agent, bundle) in changes {
            bundles[*agent] = bundle.clone();
        }
        Allocation::repooled(bundles, self)
    }

    fn repooled(bundles: Vec<ItemSet>, previous: &Allocation) -> Allocation {
        let universe = previous.allocated().union(&previous.pool);
        let allocated = bundles
            .iter()
            .fold(ItemSet::new(), |acc, b| acc.union(b));
        Allocation {
            bundles,
            pool: universe.difference(&allocated),
        }
    }

    /// Parses the JSON allocation format:
    ///
    /// ```json
    /// { "bundles": [[0, 2], [1]], "pool": [3] }
    /// ```
    ///
    /// The declared pool is kept verbatim; [`allocation_valid`] checks that
    /// it matches the complement of the bundles.
    pub fn from_json(json: &str) -> Result<Allocation, ParseError> {
        let dto: AllocationDto = serde_json::from_str(json)?;
        Ok(Allocation {
            bundles: dto.bundles.into_iter().map(ItemSet::from_iter).collect(),
            pool: dto.pool.into_iter().collect(),
        })
    }

    /// Renders the allocation in the format accepted by
    /// [`Allocation::from_json`] (compact, items ascending).
    pub fn to_json(&self) -> String {
        let dto = AllocationDto {
            bundles: self.bundles.iter().map(|b| b.iter().collect()).collect(),
            pool: self.pool.iter().collect(),
        };
        serde_json::to_string(&dto).expect("allocation serialization cannot fail")
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Allocation")
            .field("bundles", &self.bundles)
            .field("pool", &self.pool)
            .finish()
    }
}

/// Checks an allocation against an instance: bundle count, item ranges,
/// pairwise disjointness, and pool = complement of the bundle union over
/// `0..m`. Returns all violations found (empty means valid).
pub fn allocation_valid(instance: &Instance, allocation: &Allocation) -> Vec<Violation> {
    let m = instance.item_count();
    let mut violations = Vec::new();

    if allocation.agent_count() != instance.agent_count() {
        violations.push(Violation::BundleCountMismatch {
            expected: instance.agent_count(),
            found: allocation.agent_count(),
        });
    }

    let mut out_of_range = BTreeSet::new();
    let mut bundle_holders = vec![0usize; m];
    for bundle in allocation.bundles() {
        for item in bundle {
            if item >= m {
                out_of_range.insert(item);
            } else {
                bundle_holders[item] += 1;
            }
        }
    }
    for item in allocation.pool() {
        if item >= m {
            out_of_range.insert(item);
        }
    }
    for item in out_of_range {
        violations.push(Violation::ItemOutOfRange {
            item,
            item_count: m,
        });
    }
    for (item, count) in bundle_holders.iter().enumerate() {
        if *count > 1 {
            violations.push(Violation::DuplicateItem { item });
        }
    }

    // The pool must be exactly the in-range items held by no bundle.
    let expected_pool: ItemSet = bundle_holders
        .iter()
        .enumerate()
        .filter(|(_, count)| **count == 0)
        .map(|(item, _)| item)
        .collect();
    let declared_pool: ItemSet = allocation.pool().iter().filter(|item| *item < m).collect();
    if declared_pool != expected_pool {
        violations.push(Violation::PoolMismatch {
            missing: expected_pool.difference(&declared_pool).iter().collect(),
            extra: declared_pool.difference(&expected_pool).iter().collect(),
        });
    }

    violations
}

/// A single invariant violation found by [`Instance::validate`] or
/// [`allocation_valid`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("instance has no items (m must be ≥ 1)")]
    NoItems,
    #[error("instance has no agents")]
    NoAgents,
    #[error("value vector length mismatch for {agent_type}: expected {expected} entries, found {found}")]
    ValueLengthMismatch {
        agent_type: AgentType,
        expected: usize,
        found: usize,
    },
    #[error("negative value for item {item} under {agent_type}")]
    NegativeValue { agent_type: AgentType, item: usize },
    #[error("allocation has {found} bundles but the instance has {expected} agents")]
    BundleCountMismatch { expected: usize, found: usize },
    #[error("item {item} in two bundles")]
    DuplicateItem { item: usize },
    #[error("item {item} out of range for item count {item_count}")]
    ItemOutOfRange { item: usize, item_count: usize },
    #[error("pool does not match complement of the bundles (missing {missing:?}, extra {extra:?})")]
    PoolMismatch {
        missing: Vec<usize>,
        extra: Vec<usize>,
    },
}

/// Malformed input that could not be decoded at all (as opposed to
/// well-formed input violating a semantic invariant).
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid rational value {text}: {reason}")]
    Rational { text: String, reason: &'static str },
}

#[derive(Serialize, Deserialize)]
struct InstanceDto {
    m: usize,
    agents: Vec<AgentType>,
    values: ValuesDto,
}

#[derive(Serialize, Deserialize)]
struct ValuesDto {
    alpha: Vec<JsonValue>,
    beta: Vec<JsonValue>,
}

#[derive(Serialize, Deserialize)]
struct AllocationDto {
    bundles: Vec<Vec<usize>>,
    pool: Vec<usize>,
}

fn rationals_from_json(values: &[JsonValue]) -> Result<Vec<Rational>, ParseError> {
    values.iter().map(rational_from_json).collect()
}

/// Decodes one rational: a JSON integer or a `"p/q"` string with `q > 0`.
pub fn rational_from_json(value: &JsonValue) -> Result<Rational, ParseError> {
    let invalid = |reason| ParseError::Rational {
        text: value.to_string(),
        reason,
    };
    match value {
        JsonValue::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_integer(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(BigInt::from(u)))
            } else {
                Err(invalid("expected an integer or a \"p/q\" string"))
            }
        }
        JsonValue::String(s) => {
            let (p, q) = s
                .split_once('/')
                .ok_or_else(|| invalid("string form must be \"p/q\""))?;
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| invalid("numerator is not an integer"))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| invalid("denominator is not an integer"))?;
            if q <= BigInt::from(0) {
                return Err(invalid("denominator must be positive"));
            }
            Ok(Rational::new(p, q))
        }
        _ => Err(invalid("expected an integer or a \"p/q\" string")),
    }
}

/// Encodes one rational as a JSON integer when possible, else `"p/q"`.
pub fn rational_to_json(value: &Rational) -> JsonValue {
    use num::ToPrimitive;
    if value.is_integer() {
        if let Some(i) = value.numer().to_i64() {
            return JsonValue::from(i);
        }
    }
    JsonValue::from(format!("{}/{}", value.numer(), value.denom()))
}
