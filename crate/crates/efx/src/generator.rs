//! Seeded random instance generation for tests and experiments.
//!
//! Every draw flows through a [ChaCha8](rand_chacha::ChaCha8Rng) stream
//! keyed by a 64-bit seed, so a [`GenSpec`] is a complete, portable
//! description of its instance: the same [`GenSpec`] produces the same
//! instance on every platform and run.
//!
//! Integer-valued distributions are the default on purpose — raw-value ties
//! are common there, which stresses the symbolic tie-break machinery
//! instead of letting generic (tie-free) inputs mask bugs in it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value as JsonValue;
use thiserror::Error;

use crate::model::{
    rational_from_json, rational_to_json, AgentType, Instance, ParseError, Rational,
};

/// How item values are drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueDist {
    /// Independent uniform integers in `[lo, hi]` for both types.
    UniformInt { lo: i64, hi: i64 },
    /// Independent uniform rationals in `[0, 10]`: denominator uniform in
    /// `[1, den_max]`, then numerator uniform in `[0, 10·den]`.
    UniformRational { den_max: u32 },
    /// β's values are the convex mix `rho·v_α + (1−rho)·noise`, with `v_α`
    /// and the noise vector drawn as uniform integers in `[0, 10]`.
    /// `rho = 1` makes the types identical; `rho = 0` makes them
    /// independent.
    Correlated { rho: Rational },
}

/// A reproducible instance description: shape, value distribution, seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub m: usize,
    pub value_dist: ValueDist,
    pub seed: u64,
}

/// Rejected [`GenSpec`] parameters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no agents: n_alpha + n_beta must be at least 1")]
    NoAgents,
    #[error("no items: m must be at least 1")]
    NoItems,
    #[error("invalid integer range [{lo}, {hi}]: need 0 <= lo <= hi")]
    BadIntRange { lo: i64, hi: i64 },
    #[error("invalid denominator bound {den_max}: need at least 1")]
    BadDenominator { den_max: u32 },
    #[error("invalid correlation weight {rho}: need 0 <= rho <= 1")]
    BadRho { rho: String },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ValueDistDto {
    UniformInt { lo: i64, hi: i64 },
    UniformRational { den_max: u32 },
    Correlated { rho: JsonValue },
}

#[derive(Serialize, Deserialize)]
struct GenSpecDto {
    n_alpha: usize,
    n_beta: usize,
    m: usize,
    value_dist: ValueDistDto,
    seed: u64,
}

impl GenSpec {
    /// Decodes a spec from JSON, e.g.
    /// `{"n_alpha":2,"n_beta":2,"m":6,"value_dist":{"kind":"uniform_int","lo":0,"hi":10},"seed":7}`.
    /// `rho` accepts the same rational encoding as instance values.
    pub fn from_json(json: &str) -> Result<GenSpec, ParseError> {
        let dto: GenSpecDto = serde_json::from_str(json)?;
        let value_dist = match dto.value_dist {
            ValueDistDto::UniformInt { lo, hi } => ValueDist::UniformInt { lo, hi },
            ValueDistDto::UniformRational { den_max } => ValueDist::UniformRational { den_max },
            ValueDistDto::Correlated { rho } => ValueDist::Correlated {
                rho: rational_from_json(&rho)?,
            },
        };
        Ok(GenSpec {
            n_alpha: dto.n_alpha,
            n_beta: dto.n_beta,
            m: dto.m,
            value_dist,
            seed: dto.seed,
        })
    }

    /// Encodes this spec as a single-line JSON object.
    pub fn to_json(&self) -> String {
        let value_dist = match &self.value_dist {
            ValueDist::UniformInt { lo, hi } => ValueDistDto::UniformInt { lo: *lo, hi: *hi },
            ValueDist::UniformRational { den_max } => ValueDistDto::UniformRational {
                den_max: *den_max,
            },
            ValueDist::Correlated { rho } => ValueDistDto::Correlated {
                rho: rational_to_json(rho),
            },
        };
        let dto = GenSpecDto {
            n_alpha: self.n_alpha,
            n_beta: self.n_beta,
            m: self.m,
            value_dist,
            seed: self.seed,
        };
        serde_json::to_string(&dto).expect("spec serialization cannot fail")
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.n_alpha + self.n_beta == 0 {
            return Err(GenError::NoAgents);
        }
        if self.m == 0 {
            return Err(GenError::NoItems);
        }
        match &self.value_dist {
            ValueDist::UniformInt { lo, hi } => {
                if *lo < 0 || lo > hi {
                    return Err(GenError::BadIntRange { lo: *lo, hi: *hi });
                }
            }
            ValueDist::UniformRational { den_max } => {
                if *den_max == 0 {
                    return Err(GenError::BadDenominator { den_max: *den_max });
                }
            }
            ValueDist::Correlated { rho } => {
                let zero = Rational::from_integer(0.into());
                let one = Rational::from_integer(1.into());
                if *rho < zero || *rho > one {
                    return Err(GenError::BadRho {
                        rho: rho.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn uniform_ints(rng: &mut ChaCha8Rng, m: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..m)
        .map(|_| Rational::from_integer(rng.gen_range(lo..=hi).into()))
        .collect()
}

/// Produces the instance a spec describes. Deterministic for a fixed spec:
/// the α value vector is drawn first and the β (or noise) vector second,
/// each item-by-item in index order, so every value's position in the
/// ChaCha stream is pinned.
pub fn generate(spec: &GenSpec) -> Result<Instance, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.m;

    let (values_alpha, values_beta) = match &spec.value_dist {
        ValueDist::UniformInt { lo, hi } => (
            uniform_ints(&mut rng, m, *lo, *hi),
            uniform_ints(&mut rng, m, *lo, *hi),
        ),
        ValueDist::UniformRational { den_max } => {
            let draw = |rng: &mut ChaCha8Rng| -> Vec<Rational> {
                (0..m)
                    .map(|_| {
                        let den = rng.gen_range(1..=u64::from(*den_max));
                        let num = rng.gen_range(0..=10 * den);
                        Rational::new(num.into(), den.into())
                    })
                    .collect()
            };
            let alpha = draw(&mut rng);
            let beta = draw(&mut rng);
            (alpha, beta)
        }
        ValueDist::Correlated { rho } => {
            let alpha = uniform_ints(&mut rng, m, 0, 10);
            let noise = uniform_ints(&mut rng, m, 0, 10);
            let complement = Rational::from_integer(1.into()) - rho;
            let beta = alpha
                .iter()
                .zip(&noise)
                .map(|(a, n)| rho * a + &complement * n)
                .collect();
            (alpha, beta)
        }
    };

    let mut agent_types = vec![AgentType::Alpha; spec.n_alpha];
    agent_types.extend(std::iter::repeat(AgentType::Beta).take(spec.n_beta));
    Ok(Instance::new(m, agent_types, values_alpha, values_beta))
}
