//! Bloch-sphere geometry for pure polarization states.
//!
//! Angle convention: `theta` is the polar angle measured from the horizontal
//! (H) pole at +z, `phi` the azimuth measured from the +x axis. The vertical
//! (V) polarization sits at the south pole.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest degree accepted by [`build_quadrature`].
pub const MAX_QUADRATURE_DEGREE: usize = 1200;

/// A pure polarization state, i.e. a point on the surface of the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolVec {
    theta: f64,
    phi: f64,
    xyz: Vector3<f64>,
}

impl PolVec {
    /// Builds a state from spherical angles. `phi` is wrapped into `[0, 2π)`.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidPolVec(format!(
                "non-finite angles ({theta}, {phi})"
            )));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidPolVec(format!(
                "polar angle {theta} outside [0, π]"
            )));
        }
        let phi = wrap_azimuth(phi);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Ok(Self {
            theta,
            phi,
            xyz: Vector3::new(st * cp, st * sp, ct),
        })
    }

    /// Builds a state from any non-zero cartesian vector; the vector is normalized.
    pub fn from_cartesian(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidPolVec(format!(
                "cannot normalize vector ({}, {}, {})",
                v.x, v.y, v.z
            )));
        }
        let u = v / norm;
        // rounding can push |z| marginally above one
        let cos_theta = u.z.clamp(-1.0, 1.0);
        let theta = cos_theta.acos();
        let phi = if u.x == 0.0 && u.y == 0.0 {
            0.0
        } else {
            wrap_azimuth(u.y.atan2(u.x))
        };
        Ok(Self { theta, phi, xyz: u })
    }

    /// The horizontal polarization (north pole).
    pub fn horizontal() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
            xyz: Vector3::z(),
        }
    }

    /// The vertical polarization (south pole).
    pub fn vertical() -> Self {
        Self {
            theta: PI,
            phi: 0.0,
            xyz: -Vector3::z(),
        }
    }

    pub fn plus_x() -> Self {
        Self {
            theta: PI / 2.0,
            phi: 0.0,
            xyz: Vector3::x(),
        }
    }

    pub fn plus_y() -> Self {
        Self {
            theta: PI / 2.0,
            phi: PI / 2.0,
            xyz: Vector3::y(),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cartesian(&self) -> Vector3<f64> {
        self.xyz
    }

    pub fn dot(&self, other: &PolVec) -> f64 {
        self.xyz.dot(&other.xyz)
    }

    /// Great-circle angle to `other`, in `[0, π]`.
    pub fn angle_to(&self, other: &PolVec) -> f64 {
        let cross = self.xyz.cross(&other.xyz).norm();
        cross.atan2(self.dot(other))
    }

    /// The orthogonal polarization, diametrically opposite on the sphere.
    pub fn antipode(&self) -> PolVec {
        PolVec {
            theta: PI - self.theta,
            phi: wrap_azimuth(self.phi + PI),
            xyz: -self.xyz,
        }
    }

    /// An orthonormal pair spanning the tangent plane at this point.
    pub fn tangent_frame(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.xyz;
        // pick the coordinate axis least aligned with n
        let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
            Vector3::x()
        } else if n.y.abs() <= n.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let e1 = (helper - n * n.dot(&helper)).normalize();
        let e2 = n.cross(&e1);
        (e1, e2)
    }

    /// The point at polar angle `gamma` and azimuth `alpha` measured in a frame
    /// whose pole is `self`.
    pub fn offset(&self, gamma: f64, alpha: f64) -> PolVec {
        let (e1, e2) = self.tangent_frame();
        let (sg, cg) = gamma.sin_cos();
        let (sa, ca) = alpha.sin_cos();
        let v = self.xyz * cg + (e1 * ca + e2 * sa) * sg;
        PolVec::from_cartesian(v).expect("offset of a unit vector is non-zero")
    }
}

fn wrap_azimuth(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    // rem_euclid can return exactly 2π for tiny negative inputs
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Pure-state fidelity `(1 + r·r0) / 2`.
pub fn fidelity(r: &PolVec, r0: &PolVec) -> f64 {
    (0.5 * (1.0 + r.dot(r0))).clamp(0.0, 1.0)
}

pub fn antipode(r: &PolVec) -> PolVec {
    r.antipode()
}

/// Draws a point from the uniform measure on the sphere.
pub fn uniform_sample<R: Rng + ?Sized>(rng: &mut R) -> PolVec {
    let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    PolVec::from_angles(cos_theta.acos(), phi).expect("sampled angles are in range")
}

/// The set of states within angle `half_angle` of `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCap {
    center: PolVec,
    half_angle: f64,
}

impl SphericalCap {
    pub fn new(center: PolVec, half_angle: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&half_angle) {
            return Err(Error::InvalidPolVec(format!(
                "cap half-angle {half_angle} outside [0, π]"
            )));
        }
        Ok(Self { center, half_angle })
    }

    pub fn center(&self) -> &PolVec {
        &self.center
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    /// Lowest fidelity to the center of any member, `(1 + cos ε) / 2`.
    pub fn fidelity_threshold(&self) -> f64 {
        0.5 * (1.0 + self.half_angle.cos())
    }

    pub fn contains(&self, r: &PolVec) -> bool {
        self.center.angle_to(r) <= self.half_angle
    }

    pub fn contains_by_fidelity(&self, r: &PolVec) -> bool {
        fidelity(r, &self.center) >= self.fidelity_threshold()
    }

    /// Fraction of the sphere covered by the cap, `(1 − cos ε) / 2`.
    pub fn area_fraction(&self) -> f64 {
        (0.5 * self.half_angle).sin().powi(2)
    }
}

/// Product quadrature on the unit sphere: Gauss–Legendre in `cos θ` times an
/// equally weighted azimuth grid. Exact for polynomials in (x, y, z) of total
/// degree up to `degree`.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    degree: usize,
    /// (cos θ, weight) pairs; weights sum to 2.
    polar: Vec<(f64, f64)>,
    azimuths: Vec<f64>,
    nodes: Vec<PolVec>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[PolVec] {
        &self.nodes
    }

    /// Node weights; they sum to 4π.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The polar factor of the product rule as (cos θ, weight) pairs.
    pub fn polar_rule(&self) -> &[(f64, f64)] {
        &self.polar
    }

    /// Azimuth grid points; each carries weight `2π / len`.
    pub fn azimuths(&self) -> &[f64] {
        &self.azimuths
    }

    pub fn azimuth_weight(&self) -> f64 {
        2.0 * PI / self.azimuths.len() as f64
    }

    pub fn integrate<F: FnMut(&PolVec) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * f(r))
            .sum()
    }

    pub fn integrate_vector<F: FnMut(&PolVec) -> Vector3<f64>>(&self, mut f: F) -> Vector3<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(Vector3::zeros(), |acc, (r, w)| acc + f(r) * *w)
    }

    /// Returns an error unless the rule integrates degree `need` exactly.
    pub fn require_degree(&self, need: usize) -> Result<()> {
        if self.degree < need {
            Err(Error::QuadratureDegreeTooLow {
                have: self.degree,
                need,
            })
        } else {
            Ok(())
        }
    }
}

/// Builds the product rule exact up to total polynomial degree `degree`.
pub fn build_quadrature(degree: usize) -> Result<SphereQuadrature> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::QuadratureDegreeTooHigh {
            requested: degree,
            max: MAX_QUADRATURE_DEGREE,
        });
    }
    let n_polar = (degree + 2) / 2;
    let n_azimuth = degree + 1;
    let polar = gauss_legendre(n_polar);
    let dphi = 2.0 * PI / n_azimuth as f64;
    let azimuths: Vec<f64> = (0..n_azimuth).map(|k| k as f64 * dphi).collect();

    let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    for &(x, w) in &polar {
        let theta = x.clamp(-1.0, 1.0).acos();
        for &phi in &azimuths {
            nodes.push(PolVec::from_angles(theta, phi)?);
            weights.push(w * dphi);
        }
    }
    Ok(SphereQuadrature {
        degree,
        polar,
        azimuths,
        nodes,
        weights,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// three-term recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
