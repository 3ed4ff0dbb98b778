//! Truncated two-mode Fock space and the operators of the continuous ML-POVM.
//!
//! Every operator here commutes with total photon number, so it is stored as a
//! list of dense blocks, one per photon number `n = 0..=n_max`. Inside block
//! `n` the basis is `|m⟩_H ⊗ |n−m⟩_V` ordered by ascending `m`, the number of
//! photons in the horizontal mode.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bloch::{build_quadrature, PolVec, SphereQuadrature};
use crate::error::{Error, Result};
use crate::photon_stats::PhotonDistribution;

/// Residual bound for the stationarity and completeness checks.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Lowest eigenvalue of `Υ − W(r)` still counted as non-negative.
pub const EIGENVALUE_TOLERANCE: f64 = -1e-10;

const FOUR_PI: f64 = 4.0 * PI;

/// The operator restricted to the `n`-photon subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBlock {
    pub n: usize,
    pub matrix: DMatrix<Complex64>,
}

impl FockBlock {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            matrix: DMatrix::zeros(n + 1, n + 1),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            matrix: DMatrix::identity(n + 1, n + 1),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_entry(&(&self.matrix - self.matrix.adjoint())) <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// A photon-number-conserving operator on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    blocks: Vec<FockBlock>,
}

impl FockOperator {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            blocks: (0..=n_max).map(FockBlock::zeros).collect(),
        }
    }

    pub fn identity(n_max: usize) -> Self {
        Self {
            blocks: (0..=n_max).map(FockBlock::identity).collect(),
        }
    }

    fn from_matrices(matrices: Vec<DMatrix<Complex64>>) -> Self {
        Self {
            blocks: matrices
                .into_iter()
                .enumerate()
                .map(|(n, matrix)| FockBlock { n, matrix })
                .collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, n: usize) -> &FockBlock {
        &self.blocks[n]
    }

    pub fn blocks(&self) -> &[FockBlock] {
        &self.blocks
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks.iter().map(|b| b.matrix.trace()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let c = Complex64::new(factor, 0.0);
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| FockBlock {
                    n: b.n,
                    matrix: &b.matrix * c,
                })
                .collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| b.is_hermitian(tol))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        assert_eq!(
            self.n_max(),
            other.n_max(),
            "operators truncated differently"
        );
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| max_entry(&(&a.matrix - &b.matrix)))
            .fold(0.0, f64::max)
    }

    /// Largest per-block Frobenius norm; an upper bound on the operator norm.
    pub fn max_block_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.matrix.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| b.hermitian_eigenvalues().first().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.n_max(), rhs.n_max(), "operators truncated differently");
        FockOperator::from_matrices(
            self.blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| &a.matrix - &b.matrix)
                .collect(),
        )
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.n_max(), rhs.n_max(), "operators truncated differently");
        FockOperator::from_matrices(
            self.blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| &a.matrix * &b.matrix)
                .collect(),
        )
    }
}

fn ln_binomial(n: usize, m: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(m as f64 + 1.0) - libm::lgamma((n - m) as f64 + 1.0)
}

/// Moduli `√C(n,m) cos^m(θ/2) sin^(n−m)(θ/2)` of the `n`-photon amplitudes.
fn real_amplitudes(n: usize, cos_half: f64, sin_half: f64) -> Vec<f64> {
    let ln_c = cos_half.ln();
    let ln_s = sin_half.ln();
    (0..=n)
        .map(|m| {
            let k = n - m;
            // 0^0 = 1 and 0^k = 0 must hold exactly at the poles
            if (m > 0 && cos_half == 0.0) || (k > 0 && sin_half == 0.0) {
                return 0.0;
            }
            let mut e = 0.5 * ln_binomial(n, m);
            if m > 0 {
                e += m as f64 * ln_c;
            }
            if k > 0 {
                e += k as f64 * ln_s;
            }
            e.exp()
        })
        .collect()
}

fn half_angles(cos_theta: f64) -> (f64, f64) {
    let c = (0.5 * (1.0 + cos_theta)).max(0.0).sqrt();
    let s = (0.5 * (1.0 - cos_theta)).max(0.0).sqrt();
    (c, s)
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The `n`-photon state with every photon polarized along `r`, expanded in
/// the H/V number basis. Component `m` is
/// `√C(n,m) cos^m(θ/2) (e^{iφ} sin(θ/2))^(n−m)`.
pub fn fock_state_vector(n: usize, r: &PolVec) -> DVector<Complex64> {
    let (c, s) = half_angles(r.theta().cos());
    let b = real_amplitudes(n, c, s);
    DVector::from_iterator(
        n + 1,
        b.iter()
            .enumerate()
            .map(|(m, bm)| Complex64::from_polar(*bm, (n - m) as f64 * r.phi())),
    )
}

/// `f_{rr'} = cos(θ/2)cos(θ'/2) + e^{i(φ'−φ)} sin(θ/2) sin(θ'/2)`, the
/// single-photon overlap `⟨1_r|1_r'⟩`.
pub fn single_photon_overlap(r: &PolVec, r2: &PolVec) -> Complex64 {
    let (s1, c1) = (0.5 * r.theta()).sin_cos();
    let (s2, c2) = (0.5 * r2.theta()).sin_cos();
    Complex64::new(c1 * c2, 0.0) + Complex64::from_polar(s1 * s2, r2.phi() - r.phi())
}

fn projector(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    v * v.adjoint()
}

/// `Π(r) = Σ_n (n+1)/4π |n⟩_r⟨n|`, truncated at `n_max`.
pub fn povm_element(r: &PolVec, n_max: usize) -> FockOperator {
    FockOperator::from_matrices(
        (0..=n_max)
            .map(|n| {
                projector(&fock_state_vector(n, r)) * Complex64::new((n + 1) as f64 / FOUR_PI, 0.0)
            })
            .collect(),
    )
}

/// `ρ(r) = Σ_n P_n |n⟩_r⟨n|`, truncated at `n_max`.
pub fn rho(r: &PolVec, dist: &PhotonDistribution, n_max: usize) -> FockOperator {
    FockOperator::from_matrices(
        (0..=n_max)
            .map(|n| projector(&fock_state_vector(n, r)) * Complex64::new(dist.pmf(n), 0.0))
            .collect(),
    )
}

/// Risk operator for a uniform prior and delta cost, `W(r) = ρ(r)/4π`.
pub fn risk_operator(r: &PolVec, dist: &PhotonDistribution, n_max: usize) -> FockOperator {
    rho(r, dist, n_max).scaled(1.0 / FOUR_PI)
}

/// `Υ = (1/4π) Σ_n P_n I_n`.
pub fn upsilon_closed_form(dist: &PhotonDistribution, n_max: usize) -> FockOperator {
    FockOperator::from_matrices(
        (0..=n_max)
            .map(|n| DMatrix::identity(n + 1, n + 1) * Complex64::new(dist.pmf(n) / FOUR_PI, 0.0))
            .collect(),
    )
}

/// Quadrature degree used for operator integrals up to `n_max` photons.
pub fn operator_quadrature_degree(n_max: usize) -> usize {
    2 * n_max + 2
}

/// Integrates `weight(n, |b|²) |n⟩_r⟨n|` over the sphere, block by block.
///
/// The product structure of the rule is used: the polar sum is a real
/// rank-one accumulation and the azimuth sum is the same phase factor for
/// every node, so the cost per block is `O(polar nodes · (n+1)²)`.
fn integrate_block_projectors<F>(
    n_max: usize,
    quad: &SphereQuadrature,
    mut weight: F,
) -> Vec<DMatrix<Complex64>>
where
    F: FnMut(usize, f64) -> f64,
{
    let dphi = quad.azimuth_weight();
    // phase_sums[k] = Σ_l Δφ e^{i k φ_l} for k = 0..=n_max
    let phase_sums: Vec<Complex64> = (0..=n_max)
        .map(|k| {
            quad.azimuths()
                .iter()
                .map(|phi| Complex64::from_polar(dphi, k as f64 * phi))
                .sum()
        })
        .collect();
    let half: Vec<(f64, f64)> = quad
        .polar_rule()
        .iter()
        .map(|(x, _)| half_angles(*x))
        .collect();

    (0..=n_max)
        .map(|n| {
            let mut polar = DMatrix::<f64>::zeros(n + 1, n + 1);
            for ((_, w), (c, s)) in quad.polar_rule().iter().zip(&half) {
                let b = DVector::from_vec(real_amplitudes(n, *c, *s));
                let coeff = w * weight(n, b.norm_squared());
                polar.ger(coeff, &b, &b, 1.0);
            }
            DMatrix::from_fn(n + 1, n + 1, |m, mp| {
                // (|a⟩⟨a|)_{m m'} carries e^{i(m'−m)φ}
                let z = if mp >= m {
                    phase_sums[mp - m]
                } else {
                    phase_sums[m - mp].conj()
                };
                z * polar[(m, mp)]
            })
        })
        .collect()
}

/// Numerical `Υ = ∫ W(r) Π(r) dr`.
pub fn upsilon(
    dist: &PhotonDistribution,
    n_max: usize,
    quad: &SphereQuadrature,
) -> Result<FockOperator> {
    upsilon_scaled(dist, n_max, quad, &vec![1.0; n_max + 1])
}

fn upsilon_scaled(
    dist: &PhotonDistribution,
    n_max: usize,
    quad: &SphereQuadrature,
    povm_scale: &[f64],
) -> Result<FockOperator> {
    quad.require_degree(2 * n_max)?;
    // W Π = P_n (n+1) ⟨a|a⟩ |a⟩⟨a| / 16π² on block n
    let blocks = integrate_block_projectors(n_max, quad, |n, norm2| {
        povm_scale[n] * dist.pmf(n) * (n + 1) as f64 * norm2 / (FOUR_PI * FOUR_PI)
    });
    Ok(FockOperator::from_matrices(blocks))
}

/// Numerical `∫ Π(r) dr`, which should be the identity.
pub fn povm_integral(n_max: usize, quad: &SphereQuadrature) -> Result<FockOperator> {
    povm_integral_scaled(n_max, quad, &vec![1.0; n_max + 1])
}

fn povm_integral_scaled(
    n_max: usize,
    quad: &SphereQuadrature,
    povm_scale: &[f64],
) -> Result<FockOperator> {
    quad.require_degree(2 * n_max)?;
    let blocks =
        integrate_block_projectors(n_max, quad, |n, _| povm_scale[n] * (n + 1) as f64 / FOUR_PI);
    Ok(FockOperator::from_matrices(blocks))
}

/// Outcome of certifying the maximum-likelihood conditions at one `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlReport {
    /// `max(‖(Υ−W)Π‖, ‖Π(Υ−W)‖)`, measured blockwise in Frobenius norm.
    pub commutation_residual: f64,
    /// Smallest eigenvalue of `Υ − W(r)` over all blocks.
    pub min_eigenvalue: f64,
    /// Largest entrywise deviation of `∫Π dr` from the identity.
    pub completeness_residual: f64,
}

impl MlReport {
    pub fn passes(&self) -> bool {
        self.commutation_residual < RESIDUAL_TOLERANCE
            && self.completeness_residual < RESIDUAL_TOLERANCE
            && self.min_eigenvalue > EIGENVALUE_TOLERANCE
    }
}

impl fmt::Display for MlReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "commutation_residual={:e} min_eigenvalue={:e} completeness_residual={:e} pass={}",
            self.commutation_residual,
            self.min_eigenvalue,
            self.completeness_residual,
            self.passes()
        )
    }
}

/// Checks the stationarity and positivity conditions for many `r` against a
/// fixed distribution. `Υ` and the completeness integral are computed once.
#[derive(Debug, Clone)]
pub struct MlCertifier {
    dist: PhotonDistribution,
    n_max: usize,
    povm_scale: Vec<f64>,
    upsilon: FockOperator,
    completeness_residual: f64,
}

impl MlCertifier {
    pub fn new(dist: &PhotonDistribution, n_max: usize, quad: &SphereQuadrature) -> Result<Self> {
        Self::with_scale(dist, n_max, quad, vec![1.0; n_max + 1])
    }

    /// Same as [`MlCertifier::new`] but with block `block` of `Π(r)` multiplied
    /// by `factor` everywhere. Used as a negative control.
    pub fn with_corrupted_block(
        dist: &PhotonDistribution,
        n_max: usize,
        quad: &SphereQuadrature,
        block: usize,
        factor: f64,
    ) -> Result<Self> {
        if block > n_max {
            return Err(Error::Config(format!(
                "corrupted block {block} beyond truncation {n_max}"
            )));
        }
        let mut scale = vec![1.0; n_max + 1];
        scale[block] = factor;
        Self::with_scale(dist, n_max, quad, scale)
    }

    fn with_scale(
        dist: &PhotonDistribution,
        n_max: usize,
        quad: &SphereQuadrature,
        povm_scale: Vec<f64>,
    ) -> Result<Self> {
        let upsilon = upsilon_scaled(dist, n_max, quad, &povm_scale)?;
        let integral = povm_integral_scaled(n_max, quad, &povm_scale)?;
        let completeness_residual = integral.max_abs_diff(&FockOperator::identity(n_max));
        Ok(Self {
            dist: dist.clone(),
            n_max,
            povm_scale,
            upsilon,
            completeness_residual,
        })
    }

    pub fn upsilon(&self) -> &FockOperator {
        &self.upsilon
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn certify(&self, r: &PolVec) -> MlReport {
        let povm = FockOperator::from_matrices(
            povm_element(r, self.n_max)
                .blocks
                .into_iter()
                .zip(&self.povm_scale)
                .map(|(b, s)| b.matrix * Complex64::new(*s, 0.0))
                .collect(),
        );
        let w = risk_operator(r, &self.dist, self.n_max);
        let gap = &self.upsilon - &w;
        let left = (&gap * &povm).max_block_norm();
        let right = (&povm * &gap).max_block_norm();
        MlReport {
            commutation_residual: left.max(right),
            min_eigenvalue: gap.min_eigenvalue(),
            completeness_residual: self.completeness_residual,
        }
    }
}

/// Certifies the ML conditions at a single `r` with the default quadrature.
pub fn verify_ml_conditions(
    r: &PolVec,
    dist: &PhotonDistribution,
    n_max: usize,
) -> Result<MlReport> {
    let quad = build_quadrature(operator_quadrature_degree(n_max))?;
    Ok(MlCertifier::new(dist, n_max, &quad)?.certify(r))
}
