//! Success probability, mean fidelity and fidelity spread of the ML-POVM for
//! Fock, Poisson and thermal light, with the large-n̄ approximations.

use std::f64::consts::PI;

use polarimetry::ml_povm::LikelihoodModel;
use polarimetry::PhotonDistribution;

fn main() -> polarimetry::Result<()> {
    let eps = 0.2 * PI;
    println!(
        "{:<16} {:>9} {:>9} {:>9} {:>9} {:>11}",
        "distribution", "Q(0.2π)", "Q approx", "F", "F approx", "ΔF"
    );
    for nbar in [1.0, 5.0, 20.0, 100.0] {
        for dist in [
            PhotonDistribution::fock(nbar as u32),
            PhotonDistribution::poisson(nbar)?,
            PhotonDistribution::thermal(nbar)?,
        ] {
            let m = LikelihoodModel::new(dist);
            let fmt = |v: Option<f64>| v.map(|v| format!("{v:.5}")).unwrap_or_else(|| "-".into());
            println!(
                "{:<16} {:>9.5} {:>9} {:>9.5} {:>9} {:>11.3e}",
                m.dist().label(),
                m.success_probability(eps),
                fmt(m.success_probability_small_angle(eps)),
                m.mean_fidelity(),
                fmt(m.mean_fidelity_large_mean()),
                m.fidelity_variance().sqrt()
            );
        }
    }

    let m = LikelihoodModel::new(PhotonDistribution::poisson(5.0)?);
    let sample = m.simulate(100_000, 11);
    let est = sample.mean();
    println!(
        "poisson(5) sampled outcomes: F = {:.5} ± {:.5} (exact {:.5})",
        est.value,
        est.std_error,
        m.mean_fidelity()
    );
    Ok(())
}
