use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::StateVector;

use super::oracle::{PreparationOracle, QueryCounts};

/// Exponential search over Grover powers for an unknown amplitude.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifyConfig {
    /// Growth factor of the power range.
    pub lambda: f64,
    /// Give up once this many applications of `X`/`X†` would be exceeded.
    pub max_queries: u64,
}

impl Default for AmplifyConfig {
    fn default() -> Self {
        Self { lambda: 1.32, max_queries: 1_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct AmplifyOutcome {
    /// Post-measurement state on a good flag; `None` when the query cap was
    /// hit first.
    pub state: Option<StateVector>,
    pub counts: QueryCounts,
    pub rounds: usize,
}

impl AmplifyOutcome {
    pub fn succeeded(&self) -> bool {
        self.state.is_some()
    }
}

pub fn amplitude_amplify<R: Rng + ?Sized>(x: &mut PreparationOracle, rng: &mut R) -> AmplifyOutcome {
    amplitude_amplify_with(x, &AmplifyConfig::default(), rng)
}

/// Each round draws `j` uniformly from `0..⌈m⌉`, prepares `Q^j X|0⟩` and
/// measures the flag; a good flag ends the search, otherwise `m ← λm`.
pub fn amplitude_amplify_with<R: Rng + ?Sized>(x: &mut PreparationOracle, cfg: &AmplifyConfig, rng: &mut R) -> AmplifyOutcome {
    let start = x.counts();
    let mut m = 1.0f64;
    let mut rounds = 0;
    loop {
        let j = rng.random_range(0..(m.ceil() as usize).max(1));
        let spent = x.counts().total() - start.total();
        if spent + 2 * j as u64 + 1 > cfg.max_queries {
            break;
        }
        rounds += 1;
        if let Some(state) = x.measure_iterate(j, rng) {
            let c = x.counts();
            return AmplifyOutcome {
                state: Some(state),
                counts: QueryCounts { forward: c.forward - start.forward, inverse: c.inverse - start.inverse },
                rounds,
            };
        }
        m *= cfg.lambda;
    }
    let c = x.counts();
    AmplifyOutcome {
        state: None,
        counts: QueryCounts { forward: c.forward - start.forward, inverse: c.inverse - start.inverse },
        rounds,
    }
}
