//! Figures of merit of the continuous ML-POVM.
//!
//! Everything depends on the outcome only through its fidelity `u` with the
//! true polarization, via the density `g(u) = Σ (n+1) P_n u^n` on `[0, 1]`.
//! Fock, Poisson and thermal light use closed forms; custom distributions
//! use the truncated series. Each quantity also has an explicit `*_series`
//! method so the two routes can be compared.

use std::f64::consts::PI;

use rand::Rng;

use crate::bloch::{fidelity, uniform_sample, PolVec};
use crate::mc::{run_trials, FidelitySample};
use crate::photon_stats::{DistKind, PhotonDistribution};

const FOUR_PI: f64 = 4.0 * PI;

/// Below these mean photon numbers the Poisson and thermal closed forms lose
/// digits to cancellation, so the (rapidly convergent) series is used instead.
const SMALL_MEAN_FIDELITY: f64 = 0.05;
const SMALL_MEAN_VARIANCE: f64 = 0.25;

/// The likelihood `P(r|r0) = Tr[Π(r) ρ(r0)]` for a given photon distribution.
#[derive(Debug, Clone)]
pub struct LikelihoodModel {
    dist: PhotonDistribution,
}

impl LikelihoodModel {
    pub fn new(dist: PhotonDistribution) -> Self {
        Self { dist }
    }

    pub fn dist(&self) -> &PhotonDistribution {
        &self.dist
    }

    pub fn n_max(&self) -> usize {
        self.dist.truncation_index()
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.dist.truncated_pmf().iter().copied().enumerate()
    }

    /// Probability density (per steradian) of outcome `r` given truth `r0`.
    pub fn likelihood(&self, r: &PolVec, r0: &PolVec) -> f64 {
        self.likelihood_at_fidelity(fidelity(r, r0))
    }

    /// The likelihood as a function of the fidelity `u = |f_{rr0}|²`.
    pub fn likelihood_at_fidelity(&self, u: f64) -> f64 {
        match self.dist.kind() {
            DistKind::Fock(n) => (*n as f64 + 1.0) * u.powi(*n as i32) / FOUR_PI,
            DistKind::Poisson(nbar) => (-nbar * (1.0 - u)).exp() * (1.0 + nbar * u) / FOUR_PI,
            DistKind::Thermal(nbar) => {
                let d = 1.0 - nbar / (1.0 + nbar) * u;
                1.0 / (FOUR_PI * (1.0 + nbar) * d * d)
            }
            DistKind::Custom(_) => self.likelihood_series(u),
        }
    }

    pub fn likelihood_series(&self, u: f64) -> f64 {
        self.terms()
            .map(|(n, p)| (n + 1) as f64 * p * u.powi(n as i32))
            .sum::<f64>()
            / FOUR_PI
    }

    /// Density `g(u)` of the outcome fidelity; integrates to one on `[0, 1]`.
    pub fn fidelity_pdf(&self, u: f64) -> f64 {
        FOUR_PI * self.likelihood_at_fidelity(u)
    }

    /// `G(u) = Σ P_n u^(n+1)`, the distribution function of the outcome fidelity.
    pub fn fidelity_cdf(&self, u: f64) -> f64 {
        match self.dist.kind() {
            DistKind::Fock(n) => u.powi(*n as i32 + 1),
            DistKind::Poisson(nbar) => u * (-nbar * (1.0 - u)).exp(),
            DistKind::Thermal(nbar) => u / (1.0 + nbar * (1.0 - u)),
            DistKind::Custom(_) => self.fidelity_cdf_series(u),
        }
    }

    pub fn fidelity_cdf_series(&self, u: f64) -> f64 {
        self.terms().map(|(n, p)| p * u.powi(n as i32 + 1)).sum()
    }

    /// Draws a POVM outcome for true polarization `r0`.
    ///
    /// The photon number is drawn first, then the fidelity from its
    /// Beta(n+1, 1) law by inverse CDF, then a uniform azimuth about `r0`.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, r0: &PolVec, rng: &mut R) -> PolVec {
        let n = self.dist.sample_n(rng);
        let u = sample_beta_n1(n, rng);
        let gamma = (2.0 * u - 1.0).clamp(-1.0, 1.0).acos();
        let alpha = rng.gen_range(0.0..2.0 * PI);
        r0.offset(gamma, alpha)
    }

    /// Probability that the outcome lands within angle `epsilon` of the truth.
    pub fn success_probability(&self, epsilon: f64) -> f64 {
        let c = cap_fidelity(epsilon);
        let s2 = (0.5 * epsilon).sin().powi(2);
        match self.dist.kind() {
            DistKind::Fock(n) => 1.0 - c.powi(*n as i32 + 1),
            DistKind::Poisson(nbar) => 1.0 - c * (-nbar * s2).exp(),
            DistKind::Thermal(nbar) => 1.0 - c / (1.0 + nbar * s2),
            DistKind::Custom(_) => self.success_probability_series(epsilon),
        }
    }

    /// `Σ P_n (1 − u^(n+1))`, summed term by term to avoid cancellation at
    /// small angles.
    pub fn success_probability_series(&self, epsilon: f64) -> f64 {
        let ln_u = cap_fidelity(epsilon).ln();
        self.terms()
            .map(|(n, p)| -p * ((n + 1) as f64 * ln_u).exp_m1())
            .sum()
    }

    /// Small-angle approximation of [`Self::success_probability`]; `None` for
    /// custom distributions.
    pub fn success_probability_small_angle(&self, epsilon: f64) -> Option<f64> {
        let e2 = epsilon * epsilon;
        match self.dist.kind() {
            DistKind::Fock(n) => Some(1.0 - (-e2 * (*n as f64 + 1.0) / 4.0).exp()),
            DistKind::Poisson(nbar) => Some(1.0 - (-e2 * (nbar + 1.0) / 4.0).exp()),
            DistKind::Thermal(nbar) => Some(1.0 - (4.0 - e2) / (4.0 + e2 * nbar)),
            DistKind::Custom(_) => None,
        }
    }

    /// Mean fidelity between the estimate and the truth, averaged over a
    /// uniform prior.
    pub fn mean_fidelity(&self) -> f64 {
        match self.dist.kind() {
            DistKind::Fock(n) => (*n as f64 + 1.0) / (*n as f64 + 2.0),
            DistKind::Poisson(x) if *x >= SMALL_MEAN_FIDELITY => {
                // 1 − e^{−x} = −expm1(−x)
                (x * x - x - (-x).exp_m1()) / (x * x)
            }
            DistKind::Thermal(x) if *x >= SMALL_MEAN_FIDELITY => {
                (1.0 + x) * (x - x.ln_1p()) / (x * x)
            }
            _ => self.mean_fidelity_series(),
        }
    }

    pub fn mean_fidelity_series(&self) -> f64 {
        self.terms().map(|(n, p)| p * level_mean(n)).sum()
    }

    /// Large-mean approximation of [`Self::mean_fidelity`] for Poisson and
    /// thermal light.
    pub fn mean_fidelity_large_mean(&self) -> Option<f64> {
        match self.dist.kind() {
            DistKind::Poisson(x) => Some(1.0 - 1.0 / x),
            DistKind::Thermal(x) => Some(1.0 - x.ln_1p() / x),
            _ => None,
        }
    }

    /// Variance of the fidelity over outcomes and truths.
    pub fn fidelity_variance(&self) -> f64 {
        match self.dist.kind() {
            DistKind::Fock(n) => {
                let n = *n as f64;
                (n + 1.0) / ((n + 3.0) * (n + 2.0).powi(2))
            }
            DistKind::Poisson(x) if *x >= SMALL_MEAN_VARIANCE => {
                let x2 = x * x;
                let e = (-x).exp();
                ((x2 - 2.0 * x - 1.0) + 2.0 * e * (1.0 + x + x2) - e * e) / (x2 * x2)
            }
            DistKind::Thermal(x) if *x >= SMALL_MEAN_VARIANCE => {
                let l = x.ln_1p();
                (1.0 + x) * (x * x - (1.0 + x) * l * l) / x.powi(4)
            }
            _ => self.fidelity_variance_series(),
        }
    }

    /// Series form of the variance, split into within-level and between-level
    /// parts so the truncation error does not cancel against `F²`.
    pub fn fidelity_variance_series(&self) -> f64 {
        let f = self.mean_fidelity_series();
        self.terms()
            .map(|(n, p)| p * (level_variance(n) + (level_mean(n) - f).powi(2)))
            .sum()
    }

    /// Fidelities of `draws` simulated estimates, each with a fresh uniformly
    /// random truth.
    pub fn simulate(&self, draws: usize, seed: u64) -> FidelitySample {
        FidelitySample::new(run_trials(draws, seed, |rng, _| {
            let r0 = uniform_sample(rng);
            let r = self.sample_outcome(&r0, rng);
            fidelity(&r, &r0)
        }))
    }
}

/// `(1 + cos ε) / 2`, the fidelity at the cap boundary.
pub fn cap_fidelity(epsilon: f64) -> f64 {
    (0.5 * epsilon).cos().powi(2)
}

/// Mean fidelity given `n` photons, `(n+1)/(n+2)`.
fn level_mean(n: usize) -> f64 {
    (n as f64 + 1.0) / (n as f64 + 2.0)
}

/// Fidelity variance given `n` photons, `(n+1)/((n+3)(n+2)²)`.
fn level_variance(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0) / ((n + 3.0) * (n + 2.0) * (n + 2.0))
}

/// Inverse-CDF draw from Beta(n+1, 1), whose CDF is `u^(n+1)`.
fn sample_beta_n1<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    let v: f64 = rng.gen();
    // 1 − v lies in (0, 1]
    (1.0 - v).powf(1.0 / (n as f64 + 1.0))
}
