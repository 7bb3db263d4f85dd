//! Spatial preferential attachment (SPA) graphs: generation at scale and
//! empirical checks of their clustering and degree behaviour.
//!
//! The process lives on the unit m-torus. Each vertex owns a sphere of
//! influence of volume `min((A1·deg⁻ + A2)/t, 1)`; a newcomer links with
//! probability `p` to every vertex whose sphere contains it.

pub mod clustering;
pub mod config;
pub mod error;
pub mod generator;
pub mod geometry;
pub mod graph;
pub mod index;
pub mod io;
pub mod model;
pub mod rng;
pub mod stats;
pub mod verify;


pub use error::{Result, SpaError};
pub use generator::{generate, generate_naive, Generator};
pub use geometry::{NormChoice, TorusPoint};
pub use graph::{GrownGraph, TrajectoryPolicy, TrajectorySample};
pub use index::{CandidateSource, InfluenceEntry, InfluenceIndex, LinearScan};
pub use model::ModelParams;
pub use stats::{DegreeCensus, TheoryConstants, TrajectoryCheck};
pub use clustering::{ClusteringReport, OmegaMode, SplitPolicy, Variant};

