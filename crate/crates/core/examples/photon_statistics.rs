//! Photon-number distributions: probabilities, truncation and sampling.

use polarimetry::PhotonDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polarimetry::Result<()> {
    let dists = [
        PhotonDistribution::fock(3),
        PhotonDistribution::poisson(3.0)?,
        PhotonDistribution::thermal(3.0)?,
        PhotonDistribution::custom(vec![0.2, 0.0, 0.5, 0.3])?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!(
        "{:<20} {:>6} {:>10} {:>10}  P_0..P_5",
        "distribution", "n_max", "mean", "sampled"
    );
    for d in &dists {
        let draws = 50_000;
        let sampled = (0..draws).map(|_| d.sample_n(&mut rng) as f64).sum::<f64>() / draws as f64;
        let head: Vec<String> = (0..6).map(|n| format!("{:.4}", d.pmf(n))).collect();
        println!(
            "{:<20} {:>6} {:>10.4} {:>10.4}  {}",
            d.label(),
            d.truncation_index(),
            d.mean(),
            sampled,
            head.join(" ")
        );
    }

    let tight = PhotonDistribution::poisson(100.0)?.with_tail(1e-15)?;
    println!(
        "poisson(100) keeps {} terms at tail 1e-15, mass {:.16}",
        tight.truncation_index() + 1,
        tight.truncated_mass()
    );
    Ok(())
}
