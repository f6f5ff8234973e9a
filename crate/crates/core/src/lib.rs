//! Deviation bounds for martingales in smooth Banach spaces, with exact and
//! Monte Carlo checks and numerical tightening of the proof constants.
//!
//! - [`spaces`]: concrete `(r, D)`-smooth spaces and their norms.
//! - [`bounds`]: closed-form deviation bounds.
//! - [`tails`]: `N_p`, weak-`L^p` norms and tail certificates.
//! - [`simulate`]: models, the Monte Carlo engine, exact enumeration.
//! - [`optimize`]: searches over the free truncation parameters.
//! - [`cli`]: campaign files and the command implementations behind `mdev`.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod optimize;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod spaces;
pub mod tails;

pub use bounds::{BoundResult, ExpCertificate, PolyCertificate};
pub use error::{Error, Result};
pub use simulate::{McEstimate, MdsModel};
pub use spaces::{Point, SpaceSpec};
