use polarimetry::greedy::GreedySimulator;
use polarimetry::mc::derive_seed;
use polarimetry::ml_povm::LikelihoodModel;
use polarimetry::PhotonDistribution;

#[test]
fn greedy_never_beats_the_povm_for_poisson_light() {
    let sim = GreedySimulator::default();
    for nbar in 1..=15u64 {
        let dist = PhotonDistribution::poisson(nbar as f64).unwrap();
        let g = sim
            .mean_fidelity_mc(&dist, 10_000, derive_seed(51, nbar))
            .unwrap();
        let ml = LikelihoodModel::new(dist).mean_fidelity();
        assert!(
            g.value <= ml + 3.0 * g.std_error,
            "nbar {nbar}: {g:?} vs {ml}"
        );
    }
}

#[test]
fn greedy_fidelity_spreads_more() {
    let sim = GreedySimulator::default();
    for n in 1..=10u32 {
        let dist = PhotonDistribution::fock(n);
        let g = sim
            .fidelity_variance_mc(&dist, 10_000, derive_seed(52, n as u64))
            .unwrap();
        let ml = LikelihoodModel::new(dist).fidelity_variance();
        assert!(
            g.value >= ml - 3.0 * g.std_error,
            "fock({n}): {g:?} vs {ml}"
        );
    }
}
