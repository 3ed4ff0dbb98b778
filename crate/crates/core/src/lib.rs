//! Polarization estimation with the continuous maximum-likelihood POVM.
//!
//! The crate covers the full pipeline for light with arbitrary photon-number
//! statistics:
//!
//! - [`bloch`]: polarization states, fidelity, spherical caps and sphere quadrature.
//! - [`photon_stats`]: Fock, Poisson, thermal and custom photon-number distributions.
//! - [`fockspace`]: the POVM, risk and Lagrange operators in truncated Fock space,
//!   with a numerical certificate of the maximum-likelihood conditions.
//! - [`ml_povm`]: likelihood, success probability, mean fidelity and fidelity
//!   variance of the POVM, plus exact outcome sampling.
//! - [`greedy`]: the adaptive single-photon measurement used as a baseline.
//! - [`figures`]: CSV tables for likelihood, success probability and fidelity sweeps.
//! - [`cli`]: the command-line front end behind the `polarimetry` binary.
//!
//! ```
//! use polarimetry::ml_povm::LikelihoodModel;
//! use polarimetry::PhotonDistribution;
//!
//! let model = LikelihoodModel::new(PhotonDistribution::fock(2));
//! assert!((model.mean_fidelity() - 0.75).abs() < 1e-15);
//!
//! let thermal = LikelihoodModel::new(PhotonDistribution::thermal(1.0)?);
//! assert!(thermal.mean_fidelity() < 2.0 / 3.0);
//! # Ok::<(), polarimetry::Error>(())
//! ```

pub mod bloch;
pub mod cli;
pub mod error;
pub mod figures;
pub mod fockspace;
pub mod greedy;
pub mod mc;
pub mod ml_povm;
pub mod photon_stats;

pub use bloch::{build_quadrature, fidelity, PolVec, SphereQuadrature, SphericalCap};
pub use error::{Error, Result};
pub use photon_stats::{DistKind, PhotonDistribution};
