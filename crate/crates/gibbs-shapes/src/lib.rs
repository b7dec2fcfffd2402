//! Grand-canonical Gibbs ensembles of set partitions: regime
//! classification of energy functions, scaling solvers, certified series
//! sums, partition sampling, analytic limit-shape oracles, and the
//! verification suite that compares them.

pub mod acceptance;
pub mod cli;
pub mod energy;
pub mod ensemble;
pub mod error;
pub mod expr;
pub mod oracles;
pub mod regime;
pub mod scaling;
pub mod series;
pub mod special;
pub mod verify;

/// The guide chapters from `book/`, embedded so their code samples run
/// as doc-tests and stay in sync with the crate.
pub mod guide {
    #[doc = include_str!("../../../book/src/index.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/gibbs-ensembles.md")]
    pub mod gibbs_ensembles {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    pub mod regimes {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    pub mod scaling_plans {}
    #[doc = include_str!("../../../book/src/limit-shapes.md")]
    pub mod limit_shapes {}
    #[doc = include_str!("../../../book/src/local-profiles.md")]
    pub mod local_profiles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli_reference {}
}

pub use energy::{make_model, EnergyModel};
pub use error::{Error, Result};
pub use regime::{classify, RegimeReport, RegimeTag};
pub use scaling::{make_plan, ScalingPlan};
