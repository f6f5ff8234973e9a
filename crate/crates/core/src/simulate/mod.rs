//! Martingale-difference models, the Monte Carlo engine and its oracles.
//!
//! Path `i` of a run with master seed `s` draws from a ChaCha8 generator
//! seeded with `s` on stream `i`, so every path is fixed independently of
//! scheduling and hit counts are reduced by integer addition.

mod engine;
mod exact;
mod model;
mod rate;
mod truncate;

pub use engine::{clopper_pearson, exceeds_threshold, mc_deviation_grid, mc_deviation_prob, McEstimate, TIE_RTOL};
pub use exact::{exact_deviation_prob_rademacher, ExactProb, MAX_EXACT_N};
pub use model::{
    sample_path, CertOptions, Certificates, CorollaryCertificate, MdsModel, ModelKind, ModelSpec, MomentCertificate,
    PathState,
};
pub use rate::{rate_fit, rate_fit_estimates, RateFamily, RateFit};
pub use truncate::{truncate_decompose, Truncation};
