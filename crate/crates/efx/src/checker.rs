//! Independent verification: envy/EFX predicates, Pareto domination,
//! improvement checking, and brute-force enumeration oracles for desk-scale
//! ground truth.
//!
//! Everything here is implemented directly from the definitions and shares
//! no logic with the engine: the engine never drives its own case dispatch
//! through this module, and this module never consults champions, envy
//! graphs, or the improvement cases. That separation is what makes the final
//! certificate — and the oracle cross-checks in the test suite — meaningful.
//!
//! Predicates take a [`ValueMode`]: the solver's internal guarantees are
//! stated under the symbolic (non-degenerate) order, while end users care
//! about the raw values, so final certificates are checked in [`ValueMode::Raw`].
//! Symbolic EFX implies raw EFX, never the other way around.

use thiserror::Error;

use crate::model::{Allocation, Instance, ItemSet};
use crate::valuation;

/// Which order bundle comparisons use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueMode {
    /// Exact rational values as given.
    Raw,
    /// Symbolically perturbed values (strict on distinct sets).
    Symbolic,
}

/// Default cap on `n^m` for the complete-allocation oracle.
pub const ORACLE_CAP: u64 = 10_000_000;

/// Default cap on `(n+1)^m` for the partial-allocation oracle, which grows
/// faster and is therefore capped harder.
pub const PARTIAL_ORACLE_CAP: u64 = 1_000_000;

/// Compares `s` against `t` from one agent's point of view under `mode`;
/// returns true iff `s` is strictly better.
fn strictly_better(
    instance: &Instance,
    viewer: usize,
    s: &ItemSet,
    t: &ItemSet,
    mode: ValueMode,
) -> bool {
    let ty = instance.agent_type(viewer);
    match mode {
        ValueMode::Raw => valuation::raw_value(instance, ty, s) > valuation::raw_value(instance, ty, t),
        ValueMode::Symbolic => {
            valuation::sym_value(instance, ty, s) > valuation::sym_value(instance, ty, t)
        }
    }
}

/// True iff `i` EFX-envies `j`: some single-item removal from `j`'s bundle
/// still leaves a bundle `i` strictly prefers to its own.
pub fn efx_envies(
    instance: &Instance,
    allocation: &Allocation,
    i: usize,
    j: usize,
    mode: ValueMode,
) -> bool {
    if i == j {
        return false;
    }
    let envied = allocation.bundle(j);
    envied
        .iter()
        .any(|h| strictly_better(instance, i, &envied.without(h), allocation.bundle(i), mode))
}

/// A concrete EFX violation: `envious` still prefers `envied`'s bundle after
/// `removed` is taken out of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EfxWitness {
    pub envious: usize,
    pub envied: usize,
    pub removed: usize,
}

/// Checks the EFX condition over every ordered agent pair; on failure
/// returns the lexicographically first witness (by envious agent, envied
/// agent, removed item).
pub fn check_efx(
    instance: &Instance,
    allocation: &Allocation,
    mode: ValueMode,
) -> Result<(), EfxWitness> {
    for i in instance.agents() {
        for j in instance.agents() {
            if i == j {
                continue;
            }
            let envied = allocation.bundle(j);
            for h in envied {
                if strictly_better(instance, i, &envied.without(h), allocation.bundle(i), mode) {
                    return Err(EfxWitness {
                        envious: i,
                        envied: j,
                        removed: h,
                    });
                }
            }
        }
    }
    Ok(())
}

/// True iff the allocation is EFX under `mode`.
pub fn is_efx(instance: &Instance, allocation: &Allocation, mode: ValueMode) -> bool {
    check_efx(instance, allocation, mode).is_ok()
}

/// True iff `b` Pareto dominates `a`: every agent's own bundle is weakly
/// better in `b` and at least one agent's is strictly better.
pub fn pareto_dominates(
    instance: &Instance,
    b: &Allocation,
    a: &Allocation,
    mode: ValueMode,
) -> bool {
    let mut strict = false;
    for agent in instance.agents() {
        if strictly_better(instance, agent, a.bundle(agent), b.bundle(agent), mode) {
            return false;
        }
        strict |= strictly_better(instance, agent, b.bundle(agent), a.bundle(agent), mode);
    }
    strict
}

/// True iff `i` EF1-envies `j`: envy survives even the best single-item
/// removal. Strictly weaker than EFX envy; used to property-test that EFX
/// implies EF1.
#[cfg(test)]
fn ef1_envies(
    instance: &Instance,
    allocation: &Allocation,
    i: usize,
    j: usize,
    mode: ValueMode,
) -> bool {
    if i == j {
        return false;
    }
    let envied = allocation.bundle(j);
    if envied.is_empty() {
        return strictly_better(instance, i, envied, allocation.bundle(i), mode);
    }
    envied
        .iter()
        .all(|h| strictly_better(instance, i, &envied.without(h), allocation.bundle(i), mode))
}

/// True iff no ordered pair EF1-envies under `mode`.
#[cfg(test)]
fn is_ef1(instance: &Instance, allocation: &Allocation, mode: ValueMode) -> bool {
    instance
        .agents()
        .all(|i| instance.agents().all(|j| !ef1_envies(instance, allocation, i, j, mode)))
}

/// The instance admits more assignments than the oracle cap allows.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("instance too large for oracle: {targets}^{items} assignments exceed cap {cap}")]
pub struct OracleTooLarge {
    /// Number of places each item can go (agents, plus one for the pool in
    /// the partial oracle).
    pub targets: usize,
    pub items: usize,
    pub cap: u64,
}

fn enumeration_guard(targets: usize, items: usize, cap: u64) -> Result<(), OracleTooLarge> {
    let too_large = OracleTooLarge {
        targets,
        items,
        cap,
    };
    let total = (targets as u128)
        .checked_pow(items as u32)
        .ok_or_else(|| too_large.clone())?;
    if total > cap as u128 {
        return Err(too_large);
    }
    Ok(())
}

/// Visits every base-`targets` assignment vector of length `items` in
/// lexicographic order (item 0 most significant).
fn for_each_assignment(targets: usize, items: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    let mut assignment = vec![0usize; items];
    'outer: loop {
        if !visit(&assignment) {
            return;
        }
        let mut pos = items;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < targets {
                continue 'outer;
            }
            assignment[pos] = 0;
        }
    }
}

/// Enumerates every complete allocation (all `n^m` assignments of items to
/// agents, in lexicographic assignment order) and returns those that are EFX
/// under `mode` — or only the first one found when `first_only` is set.
///
/// Fails fast with [`OracleTooLarge`] when `n^m` exceeds `cap`.
pub fn brute_force_complete_efx(
    instance: &Instance,
    mode: ValueMode,
    first_only: bool,
    cap: u64,
) -> Result<Vec<Allocation>, OracleTooLarge> {
    let n = instance.agent_count();
    let m = instance.item_count();
    enumeration_guard(n, m, cap)?;
    let mut found = Vec::new();
    for_each_assignment(n, m, |assignment| {
        let mut bundles = vec![ItemSet::new(); n];
        for (item, &agent) in assignment.iter().enumerate() {
            bundles[agent].insert(item);
        }
        let allocation = Allocation::complete(bundles);
        if is_efx(instance, &allocation, mode) {
            found.push(allocation);
            if first_only {
                return false;
            }
        }
        true
    });
    Ok(found)
}

/// Enumerates every *partial* allocation (each item goes to an agent or to
/// the pool, `(n+1)^m` assignments) and returns those that are EFX under
/// `mode`. Used to spot-check the engine's intermediate states.
pub fn brute_force_partial_efx(
    instance: &Instance,
    mode: ValueMode,
    cap: u64,
) -> Result<Vec<Allocation>, OracleTooLarge> {
    let n = instance.agent_count();
    let m = instance.item_count();
    enumeration_guard(n + 1, m, cap)?;
    let mut found = Vec::new();
    for_each_assignment(n + 1, m, |assignment| {
        let mut bundles = vec![ItemSet::new(); n];
        let mut pool = ItemSet::new();
        for (item, &target) in assignment.iter().enumerate() {
            if target == n {
                pool.insert(item);
            } else {
                bundles[target].insert(item);
            }
        }
        let allocation = Allocation::new(bundles, pool);
        if is_efx(instance, &allocation, mode) {
            found.push(allocation);
        }
        true
    });
    Ok(found)
}

/// Why an alleged improvement step is not one.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImprovementViolation {
    #[error("not EFX: agent {} EFX-envies agent {} after removing item {}", .0.envious, .0.envied, .0.removed)]
    NotEfx(EfxWitness),
    #[error("not Pareto dominating: agent {agent} is strictly worse off")]
    AgentWorseOff { agent: usize },
    #[error("not Pareto dominating: no agent is strictly better off")]
    NoStrictImprovement,
    #[error("item {item} appeared without being the inserted item")]
    UnexpectedItem { item: usize },
}

/// Verifies one improvement step from `before` to `after`: the result must
/// be EFX under the symbolic order, Pareto dominate `before` symbolically,
/// and allocate no item beyond `before`'s allocated set plus the inserted
/// item `g` (pass `None` when no insertion is expected).
///
/// `before` is assumed EFX; that is the step's precondition, not its effect.
pub fn check_improvement(
    instance: &Instance,
    before: &Allocation,
    after: &Allocation,
    g: Option<usize>,
) -> Result<(), ImprovementViolation> {
    check_efx(instance, after, ValueMode::Symbolic).map_err(ImprovementViolation::NotEfx)?;

    let mut strict = false;
    for agent in instance.agents() {
        if strictly_better(
            instance,
            agent,
            before.bundle(agent),
            after.bundle(agent),
            ValueMode::Symbolic,
        ) {
            return Err(ImprovementViolation::AgentWorseOff { agent });
        }
        strict |= strictly_better(
            instance,
            agent,
            after.bundle(agent),
            before.bundle(agent),
            ValueMode::Symbolic,
        );
    }
    if !strict {
        return Err(ImprovementViolation::NoStrictImprovement);
    }

    let mut admissible = before.allocated();
    if let Some(g) = g {
        admissible.insert(g);
    }
    if let Some(item) = after
        .allocated()
        .difference(&admissible)
        .first()
    {
        return Err(ImprovementViolation::UnexpectedItem { item });
    }
    Ok(())
}
