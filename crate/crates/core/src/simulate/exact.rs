use serde::{Deserialize, Serialize};

use crate::error::{positive, require, Result};

use super::engine::exceeds_threshold;

pub const MAX_EXACT_N: u32 = 24;

/// `hits / total` with `total = 2ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactProb {
    pub hits: u64,
    pub total: u64,
}

impl ExactProb {
    pub fn value(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }

    /// Reduced fraction such as `"1/4"`, `"0"` or `"1"`.
    pub fn fraction(&self) -> String {
        if self.hits == 0 {
            return "0".to_string();
        }
        let g = gcd(self.hits, self.total);
        let (a, b) = (self.hits / g, self.total / g);
        if b == 1 {
            a.to_string()
        } else {
            format!("{a}/{b}")
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `P(max_{k≤n} |S_k| > n·x)` for independent signs, by walking every sign
/// path. Uses the same hit test as the Monte Carlo engine.
pub fn exact_deviation_prob_rademacher(n: u32, x: f64) -> Result<ExactProb> {
    require((1..=MAX_EXACT_N).contains(&n), || format!("n must be in 1..={MAX_EXACT_N}, got {n}"))?;
    positive("x", x)?;
    let threshold = n as f64 * x;
    Ok(ExactProb { hits: walk(0, n, threshold), total: 1u64 << n })
}

// Hit paths among the 2^remaining continuations of a prefix ending at `sum`
// that has not yet crossed.
fn walk(sum: i64, remaining: u32, threshold: f64) -> u64 {
    if remaining == 0 {
        return 0;
    }
    [sum - 1, sum + 1]
        .into_iter()
        .map(|s| {
            if exceeds_threshold(s.unsigned_abs() as f64, threshold) {
                1u64 << (remaining - 1)
            } else {
                walk(s, remaining - 1, threshold)
            }
        })
        .sum()
}
