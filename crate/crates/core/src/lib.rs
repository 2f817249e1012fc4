//! Expected and local (per-transition) information-theoretic emergence
//! measures for discrete Markov systems.
//!
//! The crate covers two families of emergence measure built on the one-step
//! excess entropy `I(X_{t-1}; X_t)`:
//!
//! * coarse-graining emergence ([`coarse`]): effective information,
//!   effectiveness, the log-ratio emergence score and the classification of
//!   individual transitions as congruent or incongruous across scales;
//! * synergy-based emergence ([`phiid`]): the 16-atom integrated information
//!   decomposition of a two-element system, solved by Möbius inversion both
//!   in expectation and for single transitions.
//!
//! [`netscale`] applies the coarse-graining machinery to random walkers on
//! weighted graphs and [`walker`] simulates seeded trajectories annotated
//! with the local measures, exposing "flickers" where an on-average emergent
//! property becomes locally misinformative.
//!
//! All numerical code is generic over [`Scalar`] (`f64` or `f32`). The type
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line front end uses.

pub mod coarse;
pub mod error;
pub mod netscale;
pub mod phiid;
pub mod prob;
pub mod rng;
pub mod scalar;
pub mod systems;
pub mod walker;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use coarse::{MacroScale, Partition, SearchMode, TransitionClass, Weighting};
pub use netscale::{CommunityAssignment, WeightedGraph};
pub use phiid::{AtomTable, FactorizedSystem, PhiAtom, SourceCollection};
pub use prob::{JointDist, Prior, ProbVector, TransitionMatrix};
pub use walker::{Start, WalkTrace};

/// `f64` probability vector.
pub type ProbVectorF64 = ProbVector<f64>;
/// `f64` joint distribution.
pub type JointDistF64 = JointDist<f64>;
/// `f64` transition matrix.
pub type TransitionMatrixF64 = TransitionMatrix<f64>;
/// `f64` macro scale.
pub type MacroScaleF64 = MacroScale<f64>;
/// `f64` two-element factorized system.
pub type FactorizedSystemF64 = FactorizedSystem<f64>;
/// `f64` atom table.
pub type AtomTableF64 = AtomTable<f64>;
/// `f64` weighted graph.
pub type WeightedGraphF64 = WeightedGraph<f64>;
/// `f64` annotated walk.
pub type WalkTraceF64 = WalkTrace<f64>;

/// `f32` probability vector.
pub type ProbVectorF32 = ProbVector<f32>;
/// `f32` transition matrix.
pub type TransitionMatrixF32 = TransitionMatrix<f32>;
/// `f32` two-element factorized system.
pub type FactorizedSystemF32 = FactorizedSystem<f32>;
