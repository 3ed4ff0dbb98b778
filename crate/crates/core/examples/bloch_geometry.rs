//! Points on the Bloch sphere, fidelities, caps and exact sphere quadrature.

use std::f64::consts::PI;

use polarimetry::bloch::{build_quadrature, fidelity, uniform_sample, PolVec, SphericalCap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polarimetry::Result<()> {
    let h = PolVec::horizontal();
    let d = PolVec::plus_x();
    let r = PolVec::from_angles(0.2 * PI, 1.0)?;
    println!("F(H, H)  = {}", fidelity(&h, &h));
    println!("F(H, V)  = {}", fidelity(&h, &h.antipode()));
    println!("F(H, D)  = {}", fidelity(&h, &d));
    println!("F(H, r)  = {:.5}  (r is 0.2π from H)", fidelity(&h, &r));

    let cap = SphericalCap::new(h, 0.2 * PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 100_000;
    let inside = (0..draws)
        .filter(|_| cap.contains(&uniform_sample(&mut rng)))
        .count();
    println!(
        "cap of half-angle 0.2π: sampled fraction {:.4}, area fraction {:.4}",
        inside as f64 / draws as f64,
        cap.area_fraction()
    );

    let quad = build_quadrature(4)?;
    let x2y2 = quad.integrate(|p| {
        let v = p.cartesian();
        v.x * v.x * v.y * v.y
    });
    println!(
        "degree-4 rule with {} nodes: ∫x²y² dΩ = {x2y2:.15} (4π/15 = {:.15})",
        quad.len(),
        4.0 * PI / 15.0
    );
    Ok(())
}
