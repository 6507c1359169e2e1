//! Simulation and optimization of RIS-assisted K-user interference networks
//! with finite-resolution phase shifters.

pub mod baselines;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod search;

pub use bounds::{BoundOptions, BoundResult, SymmetricScenario};
pub use channel::{ChannelSet, CsiFidelity, CsiScope, CsiView, FadingSpec};
pub use error::{Error, Result};
pub use harness::{MethodSpec, ResultRow, Scenario};
pub use metrics::{EffectiveGains, RateReport, ScoreVariant};
pub use model::{LinkBudget, PhaseConfig, Position, RadioParams, RisMode, SurfaceSpec, Topology};
pub use rng::SeedStream;
