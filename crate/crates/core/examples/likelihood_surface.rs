//! Poisson likelihood P(r|r0) against mean photon number and fidelity,
//! written as CSV to stdout.

use polarimetry::figures::{likelihood_table, FigureConfig};

fn main() -> polarimetry::Result<()> {
    let cfg = FigureConfig {
        sweep: "0:20:5".parse()?,
        u_sweep: "0:1:0.25".parse()?,
        ..FigureConfig::likelihood_default()
    };
    likelihood_table(&cfg)?.write_csv(std::io::stdout().lock())
}
