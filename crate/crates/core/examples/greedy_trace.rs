//! One adaptive run: the chosen bases, the outcomes and the final estimate.

use polarimetry::bloch::{fidelity, PolVec};
use polarimetry::greedy::{posterior_vector, GreedySimulator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polarimetry::Result<()> {
    let sim = GreedySimulator::default();
    let truth = PolVec::from_angles(1.1, 2.3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 12;
    let run = sim.run_trial(n, &truth, &mut rng)?;
    print!("{}", run.trace.to_records());

    let v = posterior_vector(&run.trace.posterior(), sim.quadrature_for(n)?)?;
    println!("truth    theta={:.4} phi={:.4}", truth.theta(), truth.phi());
    println!(
        "estimate theta={:.4} phi={:.4}",
        run.estimate.theta(),
        run.estimate.phi()
    );
    println!(
        "|V| = {:.3e}, fidelity {:.4}",
        v.norm(),
        fidelity(&run.estimate, &truth)
    );
    Ok(())
}
