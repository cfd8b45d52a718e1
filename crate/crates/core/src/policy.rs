//! Serving-satellite selection among the satellites visible at one step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::RelativeGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    Closest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub kind: PolicyKind,
    /// Required for `random`; ignored by `closest`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SelectionPolicy {
    pub fn closest() -> Self {
        Self {
            kind: PolicyKind::Closest,
            seed: None,
        }
    }

    pub fn random(seed: u64) -> Self {
        Self {
            kind: PolicyKind::Random,
            seed: Some(seed),
        }
    }

    /// Picks from `(satellite_id, range_km)` candidates. The result does not
    /// depend on candidate order.
    pub fn select(&self, candidates: &[(u32, f64)], step_index: u64, user_index: u64) -> Option<u32> {
        match self.kind {
            PolicyKind::Closest => candidates
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|c| c.0),
            PolicyKind::Random => {
                if candidates.is_empty() {
                    return None;
                }
                let mut rng = keyed_rng(self.seed.unwrap_or(0), user_index, step_index);
                let pick = rng.random_range(0..candidates.len());
                if candidates.windows(2).all(|w| w[0].0 < w[1].0) {
                    return Some(candidates[pick].0);
                }
                let mut ids: Vec<u32> = candidates.iter().map(|c| c.0).collect();
                ids.sort_unstable();
                Some(ids[pick])
            }
        }
    }
}

/// Independent stream per (seed, user, step) so draws never depend on
/// evaluation order.
fn keyed_rng(seed: u64, user_index: u64, step_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&user_index.to_le_bytes());
    key[16..24].copy_from_slice(&step_index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub fn select_serving(
    visible: &[(u32, RelativeGeometry)],
    policy: &SelectionPolicy,
    step_index: u64,
    user_index: u64,
) -> Option<u32> {
    let candidates: Vec<(u32, f64)> = visible.iter().map(|(id, g)| (*id, g.range)).collect();
    policy.select(&candidates, step_index, user_index)
}
