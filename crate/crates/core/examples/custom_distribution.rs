//! Figures of merit for photon statistics read from a weights file.

use std::f64::consts::PI;

use polarimetry::bloch::{build_quadrature, PolVec};
use polarimetry::fockspace::{operator_quadrature_degree, MlCertifier};
use polarimetry::ml_povm::LikelihoodModel;
use polarimetry::PhotonDistribution;

fn main() -> polarimetry::Result<()> {
    let path = std::env::temp_dir().join("polarimetry_weights.txt");
    // heralded source: mostly single photons, some vacuum and pairs
    std::fs::write(&path, "# P_0, P_1, P_2\n0.1\n0.8\n0.1\n")?;
    let dist = PhotonDistribution::from_weights_file(&path)?;
    let m = LikelihoodModel::new(dist.clone());
    println!("{} with mean {:.3}", dist.label(), dist.mean());
    println!("Q(0.2π) = {:.5}", m.success_probability(0.2 * PI));
    println!("F       = {:.5}", m.mean_fidelity());
    println!("ΔF      = {:.5}", m.fidelity_variance().sqrt());

    let n_max = dist.truncation_index();
    let quad = build_quadrature(operator_quadrature_degree(n_max))?;
    let report = MlCertifier::new(&dist, n_max, &quad)?.certify(&PolVec::plus_y());
    println!("{report}");
    Ok(())
}
