//! The improvement-step engine: a five-case dispatch that, given an EFX
//! partial allocation and a pooled item, produces a Pareto-dominating EFX
//! allocation with strictly larger potential — plus the outer loop that
//! drives it from the empty allocation to a complete, certified result.
//!
//! For instances where one valuation type is absent or held by a single
//! agent, complete EFX allocations come from direct constructions
//! ([`greedy_identical`] and a one-special-agent variant) instead of the
//! loop. Otherwise each iteration picks the lowest-index pooled item `g` and
//! applies the first case that fires:
//!
//! 1. **Free insertion** — some agent can absorb `g` without becoming
//!    EFX-envied.
//! 2. **Cycle elimination** — the envy graph has a dicycle; rotating bundles
//!    along it improves everyone on the cycle (`g` is not consumed).
//! 3. **Self-champion** — some agent is a most envious agent for its own
//!    bundle plus `g`; it keeps only its minimum preferred subset.
//! 4. **Single-source path** — the acyclic envy graph has one source; its
//!    champion takes its preferred set and bundles shift backwards along an
//!    envy path from the source.
//! 5. **Two-source exchange** — the two sources are the per-type minimum
//!    agents; they exchange preferred sets and the result is trimmed until
//!    the second-minimum agents no longer EFX-envy them.
//!
//! The potential function `φ(X) = Σ_i v_i(X_i)` (componentwise symbolic sum)
//! strictly increases on every step, so the loop terminates: there are
//! finitely many partial allocations. Guarantees that hold by theorem —
//! the case-5 inequality chains and the no-EFX-envy pairs after the trim —
//! are checked at runtime as assertions when [`SolveOptions::assert_lemmas`]
//! is set (the default in debug builds); they are the cheapest possible bug
//! detectors for the subtlest branch.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::champion;
use crate::checker::{self, ValueMode};
use crate::envy;
use crate::model::{
    rational_to_json, AgentType, Allocation, Instance, ItemSet, Rational, Violation,
};
use crate::valuation::{self, SymbolicValue};

/// Which of the five improvement cases produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    FreeInsertion,
    CycleElimination,
    SelfChampion,
    SingleSourcePath,
    TwoSourceExchange,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::FreeInsertion => "FREE_INSERTION",
            CaseLabel::CycleElimination => "CYCLE_ELIMINATION",
            CaseLabel::SelfChampion => "SELF_CHAMPION",
            CaseLabel::SingleSourcePath => "SINGLE_SOURCE_PATH",
            CaseLabel::TwoSourceExchange => "TWO_SOURCE_EXCHANGE",
        }
    }
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case-specific data recorded for inspection and tracing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseDetail {
    FreeInsertion {
        agent: usize,
    },
    CycleElimination {
        /// Every rotated cycle, in application order.
        rotations: Vec<Vec<usize>>,
    },
    SelfChampion {
        agent: usize,
        preferred: ItemSet,
    },
    SingleSourcePath {
        source: usize,
        champion: usize,
        /// The envy path from the source to the champion, inclusive.
        path: Vec<usize>,
        preferred: ItemSet,
    },
    TwoSourceExchange {
        alpha0: usize,
        beta0: usize,
        p_a: ItemSet,
        p_b: ItemSet,
        /// The trimmed bundle assigned to α₀/β₀, when the trim fired.
        trimmed_alpha: Option<ItemSet>,
        trimmed_beta: Option<ItemSet>,
    },
}

/// The result of one improvement case: the new allocation plus what
/// happened.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub allocation: Allocation,
    pub case: CaseLabel,
    pub detail: CaseDetail,
}

/// One entry of a solve run's trace.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: u64,
    pub case: CaseLabel,
    /// The pooled item the step was driven by (cycle elimination leaves it
    /// pooled).
    pub g: usize,
    /// Bundles that differ from the previous allocation, by agent.
    pub changed_bundles: BTreeMap<usize, ItemSet>,
    pub detail: CaseDetail,
    /// The full allocation after the step.
    pub after: Allocation,
    /// Potential after the step.
    pub potential: SymbolicValue,
}

#[derive(Serialize)]
struct StepLine<'a> {
    step: u64,
    case: &'a str,
    g: usize,
    changed_bundles: BTreeMap<usize, Vec<usize>>,
    pool: Vec<usize>,
    potential: PotentialLine,
}

#[derive(Serialize)]
struct PotentialLine {
    base: serde_json::Value,
    tiebreak: String,
}

impl StepRecord {
    /// Renders this step as JSON trace lines: for cycle eliminations, one
    /// `{"case":"cycle","cycle":[…]}` record per rotation first, then the
    /// step record itself.
    pub fn to_trace_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        if let CaseDetail::CycleElimination { rotations } = &self.detail {
            for cycle in rotations {
                lines.push(
                    serde_json::to_string(&serde_json::json!({
                        "case": "cycle",
                        "cycle": cycle,
                    }))
                    .expect("rotation serialization cannot fail"),
                );
            }
        }
        let line = StepLine {
            step: self.step,
            case: self.case.as_str(),
            g: self.g,
            changed_bundles: self
                .changed_bundles
                .iter()
                .map(|(agent, bundle)| (*agent, bundle.iter().collect()))
                .collect(),
            pool: self.after.pool().iter().collect(),
            potential: PotentialLine {
                base: rational_to_json(&self.potential.base),
                tiebreak: self.potential.tiebreak.to_string(),
            },
        };
        lines.push(serde_json::to_string(&line).expect("step serialization cannot fail"));
        lines
    }
}

/// Knobs for [`solve`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Hard cap on improvement steps; purely defensive, since the potential
    /// argument bounds the loop.
    pub max_steps: u64,
    /// Runtime-check the theorem-guaranteed facts (the case-5 lemma
    /// inequalities and per-step improvement verification). Defaults to on
    /// in debug builds, off in release.
    pub assert_lemmas: bool,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            max_steps: 1_000_000,
            assert_lemmas: cfg!(debug_assertions),
        }
    }
}

/// A completed run: the certified allocation and the trace that got there.
/// Direct-construction base cases produce an empty trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub allocation: Allocation,
    pub steps: Vec<StepRecord>,
}

/// A theorem-guaranteed fact failed at runtime; always an implementation
/// bug, never a property of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{context}: {message}")]
pub struct AssertionFailure {
    pub context: &'static str,
    pub message: String,
}

fn ensure(
    condition: bool,
    context: &'static str,
    message: impl FnOnce() -> String,
) -> Result<(), AssertionFailure> {
    if condition {
        Ok(())
    } else {
        Err(AssertionFailure {
            context,
            message: message(),
        })
    }
}

/// Why a solve run failed.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid instance: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance { violations: Vec<Violation> },
    #[error("iteration cap of {cap} steps exceeded before the allocation completed")]
    IterationCap {
        cap: u64,
        /// Trace up to the abort, for diagnostics.
        steps: Vec<StepRecord>,
    },
    #[error("assertion failed at step {step}: {failure}")]
    Assertion {
        step: u64,
        failure: AssertionFailure,
        /// Trace up to the failing step.
        steps: Vec<StepRecord>,
    },
    #[error("final certification failed: {message}")]
    Certification { message: String },
}

/// The potential `φ(X) = Σ_i v_i(X_i)`: componentwise symbolic sum of every
/// agent's own-bundle value. Strictly increases on every improvement step
/// because each agent's own value weakly increases and at least one strictly
/// does.
pub fn potential(instance: &Instance, allocation: &Allocation) -> SymbolicValue {
    let mut total = SymbolicValue::zero();
    for agent in instance.agents() {
        total += &valuation::sym_value(
            instance,
            instance.agent_type(agent),
            allocation.bundle(agent),
        );
    }
    total
}

/// Engine-internal EFX-envy predicate (symbolic). The dispatch deliberately
/// does not route through the checker module, so that the checker remains an
/// independent verification path for the engine's output.
fn efx_envies_sym(instance: &Instance, allocation: &Allocation, i: usize, j: usize) -> bool {
    if i == j {
        return false;
    }
    let viewer = instance.agent_type(i);
    let own = valuation::sym_value(instance, viewer, allocation.bundle(i));
    let envied = allocation.bundle(j);
    envied
        .iter()
        .any(|h| valuation::sym_value(instance, viewer, &envied.without(h)) > own)
}

/// Case (1): scans agents in ascending index order for one that can receive
/// `g` without becoming EFX-envied by anyone; returns the first success.
pub fn try_free_insertion(
    instance: &Instance,
    allocation: &Allocation,
    g: usize,
) -> Option<StepOutcome> {
    for i in instance.agents() {
        let candidate = allocation.with_bundle(i, allocation.bundle(i).with(g));
        let envied = instance
            .agents()
            .any(|s| s != i && efx_envies_sym(instance, &candidate, s, i));
        if !envied {
            return Some(StepOutcome {
                allocation: candidate,
                case: CaseLabel::FreeInsertion,
                detail: CaseDetail::FreeInsertion { agent: i },
            });
        }
    }
    None
}

/// Case (3): scans agents in ascending index order for a self-champion —
/// an agent among the most envious agents for its own bundle plus `g`. Such
/// an agent keeps only its minimum preferred subset of `X_i ∪ {g}`; the
/// rest returns to the pool.
pub fn resolve_self_champion(
    instance: &Instance,
    allocation: &Allocation,
    g: usize,
) -> Option<StepOutcome> {
    for i in instance.agents() {
        let (_, champions) = champion::champions_of(instance, allocation, i, g);
        if champions.contains(&i) {
            let preferred =
                champion::min_preferred_set(instance, allocation, i, &allocation.bundle(i).with(g))
                    .expect("a self-champion's κ for its own augmented bundle is finite");
            let next = allocation.with_bundle(i, preferred.items.clone());
            return Some(StepOutcome {
                allocation: next,
                case: CaseLabel::SelfChampion,
                detail: CaseDetail::SelfChampion {
                    agent: i,
                    preferred: preferred.items,
                },
            });
        }
    }
    None
}

/// Shortest path from `from` to `to` along envy edges, lowest-index
/// tie-break (neighbors are explored in ascending order).
fn bfs_path(graph: &envy::EnvyGraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut parent: Vec<Option<usize>> = vec![None; graph.agent_count()];
    let mut visited = vec![false; graph.agent_count()];
    visited[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut current = to;
            while let Some(p) = parent[current] {
                path.push(p);
                current = p;
            }
            path.reverse();
            return Some(path);
        }
        for &w in graph.out_neighbors(v) {
            if !visited[w] {
                visited[w] = true;
                parent[w] = Some(v);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Case (4): the acyclic envy graph has `source` as its unique source and no
/// self-champion exists. The lowest-index champion `i` of the source takes
/// its minimum preferred subset of `X_source ∪ {g}`, and every agent on an
/// envy path `source = t_1 → … → t_r = i` receives its successor's bundle.
/// Everyone on the path strictly improves: each receives a bundle it envied,
/// and the champion a set it strictly prefers.
pub fn path_shift(
    instance: &Instance,
    allocation: &Allocation,
    g: usize,
    source: usize,
) -> Result<StepOutcome, AssertionFailure> {
    const CTX: &str = "path_shift";
    let target = allocation.bundle(source).with(g);
    let (_, champions) = champion::champions_of(instance, allocation, source, g);
    let champion_agent = champions.first().copied().ok_or_else(|| AssertionFailure {
        context: CTX,
        message: format!("no champion exists for source {source}"),
    })?;
    ensure(champion_agent != source, CTX, || {
        format!("champion of source {source} is the source itself despite self-champion dispatch")
    })?;
    let graph = envy::build_envy_graph(instance, allocation);
    let path = bfs_path(&graph, source, champion_agent).ok_or_else(|| AssertionFailure {
        context: CTX,
        message: format!(
            "no envy path from unique source {source} to champion {champion_agent}"
        ),
    })?;
    let preferred = champion::min_preferred_set(instance, allocation, champion_agent, &target)
        .ok_or_else(|| AssertionFailure {
            context: CTX,
            message: format!("champion {champion_agent} has infinite κ for the augmented bundle"),
        })?;
    let mut changes: Vec<(usize, ItemSet)> = Vec::new();
    for l in 0..path.len() - 1 {
        changes.push((path[l], allocation.bundle(path[l + 1]).clone()));
    }
    changes.push((champion_agent, preferred.items.clone()));
    Ok(StepOutcome {
        allocation: allocation.with_bundles(&changes),
        case: CaseLabel::SingleSourcePath,
        detail: CaseDetail::SingleSourcePath {
            source,
            champion: champion_agent,
            path,
            preferred: preferred.items,
        },
    })
}

/// Agents of one type ordered by ascending own-bundle symbolic value.
/// Distinct nonempty bundles have distinct symbolic values, so the order is
/// strict whenever it is consulted (case 5 requires nonempty bundles).
fn agents_by_own_value(
    instance: &Instance,
    allocation: &Allocation,
    agent_type: AgentType,
) -> Vec<usize> {
    let mut agents: Vec<usize> = instance.agents_of_type(agent_type).collect();
    agents.sort_by(|&a, &b| {
        valuation::sym_value(instance, agent_type, allocation.bundle(a))
            .cmp(&valuation::sym_value(instance, agent_type, allocation.bundle(b)))
    });
    agents
}

/// Case (5): with the envy graph acyclic, no free insertion, no
/// self-champion, and at least two sources, the sources must be exactly the
/// two per-type minimum agents α₀ and β₀. Each champions the other's bundle
/// plus `g`; they exchange their minimum preferred sets,
///
/// ```text
/// X′_{α₀} = (X_{α₀} ∪ P_A) ∖ P_B,   P_A = P(α₀, X_{β₀} ∪ g),
/// X′_{β₀} = (X_{β₀} ∪ P_B) ∖ P_A,   P_B = P(β₀, X_{α₀} ∪ g),
/// ```
///
/// and since `g` lies in both preferred sets it stays pooled. If the
/// second-minimum agent α₁ EFX-envies α₀ afterwards, α₀'s bundle is further
/// trimmed to `P_{X′}(α₁, X′_{α₀})` — the smallest subset α₁ still prefers
/// to its own bundle — and symmetrically for β₁/β₀.
///
/// With `assert_lemmas`, the theorem-guaranteed facts are checked on every
/// invocation: the per-type minima beat each other's bundles crosswise,
/// each is a champion of the other, the exchange chain inequalities hold,
/// the trimmed result leaves all six critical pairs EFX-envy-free, and the
/// step verifies as an improvement.
pub fn two_source_exchange(
    instance: &Instance,
    allocation: &Allocation,
    g: usize,
    assert_lemmas: bool,
) -> Result<StepOutcome, AssertionFailure> {
    const CTX: &str = "two_source_exchange";

    for i in instance.agents() {
        ensure(!allocation.bundle(i).is_empty(), CTX, || {
            format!("agent {i} has an empty bundle at branch entry")
        })?;
    }

    let ordered_alpha = agents_by_own_value(instance, allocation, AgentType::Alpha);
    let ordered_beta = agents_by_own_value(instance, allocation, AgentType::Beta);
    ensure(ordered_alpha.len() >= 2 && ordered_beta.len() >= 2, CTX, || {
        format!(
            "both types need at least two agents, got {} and {}",
            ordered_alpha.len(),
            ordered_beta.len()
        )
    })?;
    let (alpha0, alpha1) = (ordered_alpha[0], ordered_alpha[1]);
    let (beta0, beta1) = (ordered_beta[0], ordered_beta[1]);

    let graph = envy::build_envy_graph(instance, allocation);
    let sources = graph.sources();
    let mut expected = vec![alpha0, beta0];
    expected.sort_unstable();
    ensure(sources == expected, CTX, || {
        format!("sources {sources:?} are not exactly the per-type minima {expected:?}")
    })?;

    let alpha_of = |s: &ItemSet| valuation::sym_value(instance, AgentType::Alpha, s);
    let beta_of = |s: &ItemSet| valuation::sym_value(instance, AgentType::Beta, s);
    let x_alpha0 = allocation.bundle(alpha0);
    let x_beta0 = allocation.bundle(beta0);

    if assert_lemmas {
        ensure(alpha_of(x_alpha0) > alpha_of(x_beta0), CTX, || {
            format!("expected X_{{α0={alpha0}}} >_α X_{{β0={beta0}}}")
        })?;
        ensure(beta_of(x_beta0) > beta_of(x_alpha0), CTX, || {
            format!("expected X_{{β0={beta0}}} >_β X_{{α0={alpha0}}}")
        })?;
        let (_, champs_of_beta0) = champion::champions_of(instance, allocation, beta0, g);
        ensure(champs_of_beta0.contains(&alpha0), CTX, || {
            format!("α0={alpha0} is not a champion of β0={beta0}")
        })?;
        let (_, champs_of_alpha0) = champion::champions_of(instance, allocation, alpha0, g);
        ensure(champs_of_alpha0.contains(&beta0), CTX, || {
            format!("β0={beta0} is not a champion of α0={alpha0}")
        })?;
    }

    let p_a = champion::min_preferred_set(instance, allocation, alpha0, &x_beta0.with(g))
        .ok_or_else(|| AssertionFailure {
            context: CTX,
            message: format!("α0={alpha0} has infinite κ for X_β0 ∪ g"),
        })?;
    let p_b = champion::min_preferred_set(instance, allocation, beta0, &x_alpha0.with(g))
        .ok_or_else(|| AssertionFailure {
            context: CTX,
            message: format!("β0={beta0} has infinite κ for X_α0 ∪ g"),
        })?;

    // g must sit in both preferred sets; that is what keeps it pooled after
    // the exchange, so it is checked unconditionally.
    ensure(p_a.items.contains(g), CTX, || {
        format!("g={g} missing from P_A = {:?}", p_a.items)
    })?;
    ensure(p_b.items.contains(g), CTX, || {
        format!("g={g} missing from P_B = {:?}", p_b.items)
    })?;

    let x1_alpha0 = x_alpha0.union(&p_a.items).difference(&p_b.items);
    let x1_beta0 = x_beta0.union(&p_b.items).difference(&p_a.items);
    let x_prime = allocation.with_bundles(&[(alpha0, x1_alpha0), (beta0, x1_beta0)]);

    if assert_lemmas {
        // Exchange chains: X′_{α0} >_α X_{α0} >_α X_{β0} >_α X′_{β0} and the
        // β counterpart; the middle links restate the crosswise fact above.
        let chain: [(&str, SymbolicValue, SymbolicValue); 6] = [
            ("X′_α0 >_α X_α0", alpha_of(x_prime.bundle(alpha0)), alpha_of(x_alpha0)),
            ("X_α0 >_α X_β0", alpha_of(x_alpha0), alpha_of(x_beta0)),
            ("X_β0 >_α X′_β0", alpha_of(x_beta0), alpha_of(x_prime.bundle(beta0))),
            ("X′_β0 >_β X_β0", beta_of(x_prime.bundle(beta0)), beta_of(x_beta0)),
            ("X_β0 >_β X_α0", beta_of(x_beta0), beta_of(x_alpha0)),
            ("X_α0 >_β X′_α0", beta_of(x_alpha0), beta_of(x_prime.bundle(alpha0))),
        ];
        for (name, left, right) in chain {
            ensure(left > right, CTX, || {
                format!("exchange chain inequality {name} failed")
            })?;
        }
    }

    // Trim: both conditions and preferred sets are evaluated in X′.
    let mut changes: Vec<(usize, ItemSet)> = Vec::new();
    let mut trimmed_alpha = None;
    let mut trimmed_beta = None;
    if efx_envies_sym(instance, &x_prime, alpha1, alpha0) {
        let p = champion::min_preferred_set(instance, &x_prime, alpha1, x_prime.bundle(alpha0))
            .ok_or_else(|| AssertionFailure {
                context: CTX,
                message: format!("α1={alpha1} EFX-envies α0 in X′ yet has infinite κ for X′_α0"),
            })?;
        changes.push((alpha0, p.items.clone()));
        trimmed_alpha = Some(p.items);
    }
    if efx_envies_sym(instance, &x_prime, beta1, beta0) {
        let p = champion::min_preferred_set(instance, &x_prime, beta1, x_prime.bundle(beta0))
            .ok_or_else(|| AssertionFailure {
                context: CTX,
                message: format!("β1={beta1} EFX-envies β0 in X′ yet has infinite κ for X′_β0"),
            })?;
        changes.push((beta0, p.items.clone()));
        trimmed_beta = Some(p.items);
    }
    let x_second = if changes.is_empty() {
        x_prime.clone()
    } else {
        x_prime.with_bundles(&changes)
    };

    if assert_lemmas {
        // The six pairs whose EFX-envy-freedom carries the correctness proof
        // of this branch.
        let pairs = [
            (alpha1, alpha0),
            (beta1, beta0),
            (alpha1, beta0),
            (beta1, alpha0),
            (alpha0, beta0),
            (beta0, alpha0),
        ];
        for (i, j) in pairs {
            ensure(
                !checker::efx_envies(instance, &x_second, i, j, ValueMode::Symbolic),
                CTX,
                || format!("agent {i} EFX-envies agent {j} after the exchange and trim"),
            )?;
        }
        if let Err(violation) = checker::check_improvement(instance, allocation, &x_second, Some(g))
        {
            return Err(AssertionFailure {
                context: CTX,
                message: violation.to_string(),
            });
        }
    }

    Ok(StepOutcome {
        allocation: x_second,
        case: CaseLabel::TwoSourceExchange,
        detail: CaseDetail::TwoSourceExchange {
            alpha0,
            beta0,
            p_a: p_a.items,
            p_b: p_b.items,
            trimmed_alpha,
            trimmed_beta,
        },
    })
}

/// One improvement step: applies the first case that fires, in the fixed
/// order free insertion → cycle elimination → self-champion → single-source
/// path → two-source exchange. Exactly one case fires on a valid EFX state
/// with both types holding at least two agents.
///
/// # Panics
///
/// Panics if `g` is not pooled (a caller bug, not an input property).
pub fn improvement_step(
    instance: &Instance,
    allocation: &Allocation,
    g: usize,
    assert_lemmas: bool,
) -> Result<StepOutcome, AssertionFailure> {
    assert!(
        allocation.pool().contains(g),
        "improvement_step requires a pooled item, but {g} is not in the pool"
    );
    if let Some(outcome) = try_free_insertion(instance, allocation, g) {
        return Ok(outcome);
    }
    let graph = envy::build_envy_graph(instance, allocation);
    if graph.find_dicycle().is_some() {
        let (rotated, rotations) = envy::eliminate_cycles(instance, allocation);
        return Ok(StepOutcome {
            allocation: rotated,
            case: CaseLabel::CycleElimination,
            detail: CaseDetail::CycleElimination { rotations },
        });
    }
    if let Some(outcome) = resolve_self_champion(instance, allocation, g) {
        return Ok(outcome);
    }
    let sources = graph.sources();
    ensure(!sources.is_empty(), "improvement_step", || {
        "acyclic envy graph has no source".to_string()
    })?;
    if sources.len() == 1 {
        return path_shift(instance, allocation, g, sources[0]);
    }
    two_source_exchange(instance, allocation, g, assert_lemmas)
}

/// Distributes items with identical valuations: sorts items by descending
/// symbolic value and places each into the currently minimum-value bundle
/// (lowest index on the empty-bundle tie).
///
/// The result is EFX for agents sharing `values`: when an item lands in the
/// poorest bundle, it becomes that bundle's minimum-value member, so
/// removing it drops the bundle to at most every other bundle's value at
/// that moment — and those values only grow afterwards.
pub fn greedy_identical(values: &[Rational], agent_count: usize) -> Allocation {
    assert!(agent_count >= 1, "greedy_identical requires an agent");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        valuation::sym_item(values, b).cmp(&valuation::sym_item(values, a))
    });
    let mut bundles = vec![ItemSet::new(); agent_count];
    let mut sums = vec![SymbolicValue::zero(); agent_count];
    for item in order {
        let mut poorest = 0;
        for k in 1..agent_count {
            if sums[k] < sums[poorest] {
                poorest = k;
            }
        }
        bundles[poorest].insert(item);
        sums[poorest] += &valuation::sym_item(values, item);
    }
    Allocation::complete(bundles)
}

/// Base case for a single agent of one type: run [`greedy_identical`] under
/// the majority type's values, hand the minority agent the bundle
/// maximizing its own valuation, and deal the remaining bundles to the
/// majority agents in ascending index order.
fn singleton_type_allocation(instance: &Instance, minority: AgentType) -> Allocation {
    let majority = minority.other();
    let greedy = greedy_identical(instance.values(majority), instance.agent_count());
    let special = instance
        .agents_of_type(minority)
        .next()
        .expect("minority type has exactly one agent");

    let mut best = 0;
    for k in 1..greedy.agent_count() {
        let better = valuation::sym_value(instance, minority, greedy.bundle(k))
            > valuation::sym_value(instance, minority, greedy.bundle(best));
        if better {
            best = k;
        }
    }

    let mut leftovers = (0..greedy.agent_count()).filter(|&k| k != best);
    let bundles = instance
        .agents()
        .map(|agent| {
            if agent == special {
                greedy.bundle(best).clone()
            } else {
                greedy
                    .bundle(leftovers.next().expect("one leftover bundle per majority agent"))
                    .clone()
            }
        })
        .collect();
    Allocation::complete(bundles)
}

fn changed_bundles(before: &Allocation, after: &Allocation) -> BTreeMap<usize, ItemSet> {
    (0..before.agent_count())
        .filter(|&i| before.bundle(i) != after.bundle(i))
        .map(|i| (i, after.bundle(i).clone()))
        .collect()
}

fn improvement_loop(
    instance: &Instance,
    options: &SolveOptions,
) -> Result<(Allocation, Vec<StepRecord>), EngineError> {
    let mut allocation = Allocation::empty(instance.agent_count(), instance.item_count());
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut potential_before = potential(instance, &allocation);

    while !allocation.is_complete() {
        if steps.len() as u64 >= options.max_steps {
            return Err(EngineError::IterationCap {
                cap: options.max_steps,
                steps,
            });
        }
        let step = steps.len() as u64 + 1;
        let g = allocation.pool().first().expect("incomplete ⇒ pool nonempty");
        let outcome = match improvement_step(instance, &allocation, g, options.assert_lemmas) {
            Ok(outcome) => outcome,
            Err(failure) => {
                return Err(EngineError::Assertion {
                    step,
                    failure,
                    steps,
                })
            }
        };

        // The termination witness is always checked: a non-increasing step
        // would otherwise spin silently until the iteration cap.
        let potential_after = potential(instance, &outcome.allocation);
        if potential_after <= potential_before {
            return Err(EngineError::Assertion {
                step,
                failure: AssertionFailure {
                    context: "potential",
                    message: "potential did not strictly increase".to_string(),
                },
                steps,
            });
        }
        if options.assert_lemmas {
            if let Err(violation) =
                checker::check_improvement(instance, &allocation, &outcome.allocation, Some(g))
            {
                return Err(EngineError::Assertion {
                    step,
                    failure: AssertionFailure {
                        context: "check_improvement",
                        message: violation.to_string(),
                    },
                    steps,
                });
            }
        }

        steps.push(StepRecord {
            step,
            case: outcome.case,
            g,
            changed_bundles: changed_bundles(&allocation, &outcome.allocation),
            detail: outcome.detail,
            after: outcome.allocation.clone(),
            potential: potential_after.clone(),
        });
        allocation = outcome.allocation;
        potential_before = potential_after;
    }
    Ok((allocation, steps))
}

/// Solves an instance: returns a complete allocation certified EFX by the
/// checker in raw mode, together with the improvement-step trace (empty for
/// the direct-construction base cases).
///
/// Dispatch: with one type absent the instance is an identical-valuations
/// problem and [`greedy_identical`] solves it directly; with exactly one
/// agent of some type, that agent receives its favourite greedy bundle; in
/// all other shapes the improvement loop runs from the empty allocation,
/// consuming the lowest-index pooled item each iteration.
pub fn solve(instance: &Instance, options: &SolveOptions) -> Result<SolveResult, EngineError> {
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(EngineError::InvalidInstance { violations });
    }

    let (n_alpha, n_beta) = instance.type_counts();
    let (allocation, steps, direct_construction) = if n_alpha == 0 || n_beta == 0 {
        let only = if n_alpha == 0 {
            AgentType::Beta
        } else {
            AgentType::Alpha
        };
        let allocation = greedy_identical(instance.values(only), instance.agent_count());
        (allocation, Vec::new(), true)
    } else if n_alpha == 1 || n_beta == 1 {
        let minority = if n_alpha == 1 {
            AgentType::Alpha
        } else {
            AgentType::Beta
        };
        (singleton_type_allocation(instance, minority), Vec::new(), true)
    } else {
        let (allocation, steps) = improvement_loop(instance, options)?;
        (allocation, steps, false)
    };

    let allocation = certified(instance, allocation, direct_construction)?;
    Ok(SolveResult { allocation, steps })
}

/// Final gate: the allocation must be complete and EFX under raw values.
/// The direct constructions are proven EFX, but they are machine-checked
/// rather than trusted; should certification ever fail there, the
/// brute-force oracle is consulted for a replacement before giving up.
fn certified(
    instance: &Instance,
    allocation: Allocation,
    direct_construction: bool,
) -> Result<Allocation, EngineError> {
    if !allocation.is_complete() {
        return Err(EngineError::Certification {
            message: format!("allocation is incomplete: pool {:?}", allocation.pool()),
        });
    }
    match checker::check_efx(instance, &allocation, ValueMode::Raw) {
        Ok(()) => Ok(allocation),
        Err(witness) => {
            if direct_construction {
                let fallback =
                    checker::brute_force_complete_efx(instance, ValueMode::Raw, true, checker::ORACLE_CAP);
                if let Ok(mut found) = fallback {
                    if let Some(replacement) = found.pop() {
                        return Ok(replacement);
                    }
                }
            }
            Err(EngineError::Certification {
                message: format!(
                    "agent {} EFX-envies agent {} after removing item {}",
                    witness.envious, witness.envied, witness.removed
                ),
            })
        }
    }
}
