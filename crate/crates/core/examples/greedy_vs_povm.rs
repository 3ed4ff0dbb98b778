//! The greedy adaptive single-photon scheme against the collective ML-POVM.

use polarimetry::greedy::GreedySimulator;
use polarimetry::mc::derive_seed;
use polarimetry::ml_povm::LikelihoodModel;
use polarimetry::PhotonDistribution;

fn main() -> polarimetry::Result<()> {
    let sim = GreedySimulator::default();
    let trials = 4000;
    println!(
        "{:<14} {:>9} {:>18} {:>9} {:>9}",
        "distribution", "F ML", "F greedy", "ΔF ML", "ΔF greedy"
    );
    for (i, dist) in [
        PhotonDistribution::fock(1),
        PhotonDistribution::fock(5),
        PhotonDistribution::poisson(5.0)?,
        PhotonDistribution::thermal(5.0)?,
        PhotonDistribution::thermal(10.0)?,
    ]
    .into_iter()
    .enumerate()
    {
        let sample = sim.simulate(&dist, trials, derive_seed(2, i as u64))?;
        let g = sample.mean();
        let m = LikelihoodModel::new(dist);
        println!(
            "{:<14} {:>9.5} {:>10.5} ± {:.5} {:>9.5} {:>9.5}",
            m.dist().label(),
            m.mean_fidelity(),
            g.value,
            g.std_error,
            m.fidelity_variance().sqrt(),
            sample.variance().value.sqrt()
        );
    }
    Ok(())
}
