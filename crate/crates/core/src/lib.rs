//! Data-identified discrete chaotic maps and an image cipher built on them.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`maps`] iterates symbolic maps (Hénon, Lozi, a 3D logistic variant, or
//!    any identified model) to produce trajectories, optionally with noise.
//! 2. [`identify`] recovers an explicit map from a trajectory by sparse
//!    regression over a candidate library.
//! 3. [`keystream`] and [`cipher`] turn a map plus an initial-state key into a
//!    permutation-diffusion image cipher; [`analysis`] measures it.

pub mod analysis;
pub mod cipher;
pub mod error;
pub mod identify;
pub mod image;
pub mod keystream;
pub mod linalg;
pub mod maps;
pub mod model;
pub mod rng;
pub mod testimage;
pub mod trajio;

pub use cipher::{decrypt, encrypt, CipherConfig};
pub use error::{Error, Result};
pub use identify::{build_library, sindy_pi_fit, CandidateLibrary, FitOptions, IdentificationResult};
pub use image::GrayImage;
pub use keystream::{Key, KeystreamLayout};
pub use maps::{Basis, MapSpec, Term, Trajectory};
