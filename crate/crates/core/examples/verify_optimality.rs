//! Numerical certification of the maximum-likelihood POVM in truncated Fock
//! space, with a deliberately broken POVM as a negative control.

use polarimetry::bloch::{build_quadrature, uniform_sample};
use polarimetry::fockspace::{operator_quadrature_degree, MlCertifier};
use polarimetry::PhotonDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polarimetry::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dist in [
        PhotonDistribution::fock(4),
        PhotonDistribution::poisson(2.0)?,
        PhotonDistribution::thermal(1.0)?,
    ] {
        let n_max = dist.truncation_index();
        let quad = build_quadrature(operator_quadrature_degree(n_max))?;
        let cert = MlCertifier::new(&dist, n_max, &quad)?;
        let r = uniform_sample(&mut rng);
        println!("{} (n_max {n_max}): {}", dist.label(), cert.certify(&r));
    }

    let dist = PhotonDistribution::fock(2);
    let quad = build_quadrature(operator_quadrature_degree(2))?;
    let broken = MlCertifier::with_corrupted_block(&dist, 2, &quad, 2, 1.01)?;
    println!(
        "corrupted fock(2): {}",
        broken.certify(&uniform_sample(&mut rng))
    );
    Ok(())
}
