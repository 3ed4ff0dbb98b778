//! Tabulated figures of merit as CSV: the likelihood surface, success
//! probabilities, mean fidelities and fidelity spreads for Fock, Poisson and
//! thermal light, with greedy-scheme Monte Carlo columns alongside.

use std::f64::consts::PI;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::greedy::GreedySimulator;
use crate::mc::{derive_seed, FidelitySample, McEstimate};
use crate::ml_povm::LikelihoodModel;
use crate::photon_stats::PhotonDistribution;

/// Inclusive parameter grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let sweep = Self { start, stop, step };
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidSweep(format!(
                "{sweep} has a non-finite bound"
            )));
        }
        if step <= 0.0 {
            return Err(Error::InvalidSweep(format!(
                "{sweep}: step must be positive"
            )));
        }
        if stop < start {
            return Err(Error::InvalidSweep(format!("{sweep}: stop is below start")));
        }
        if (stop - start) / step > 1e6 {
            return Err(Error::InvalidSweep(format!("{sweep} has too many points")));
        }
        Ok(sweep)
    }

    /// Grid points; `stop` is included when it lies on the grid up to rounding.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(Error::InvalidSweep(format!("`{s}` is not start:stop:step")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSweep(format!("`{t}` in `{s}` is not a number")))
        };
        Sweep::new(num(a)?, num(b)?, num(c)?)
    }
}

impl std::fmt::Display for Sweep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// A numeric table with a leading `#` comment line. Empty cells are written
/// for values that do not exist at a grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(comment: impl Into<String>, header: &[&str]) -> Self {
        Self {
            comment: comment.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.comment)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(
                row.iter()
                    .map(|c| c.map(|v| v.to_string()).unwrap_or_default()),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

/// Settings shared by the figure tables.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureConfig {
    /// Cap half-angle for success probabilities, in radians.
    pub epsilon: f64,
    /// Mean photon numbers (or photon numbers for Fock columns).
    pub sweep: Sweep,
    /// Fidelity grid for the likelihood surface.
    pub u_sweep: Sweep,
    /// Greedy Monte Carlo trials per grid point; 0 leaves those columns empty.
    pub trials: usize,
    pub seed: u64,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.2 * PI,
            sweep: Sweep {
                start: 0.0,
                stop: 30.0,
                step: 0.5,
            },
            u_sweep: Sweep {
                start: 0.0,
                stop: 1.0,
                step: 0.05,
            },
            trials: 10_000,
            seed: 1,
        }
    }
}

impl FigureConfig {
    pub fn likelihood_default() -> Self {
        Self {
            sweep: Sweep {
                start: 0.0,
                stop: 20.0,
                step: 1.0,
            },
            ..Self::default()
        }
    }

    fn describe(&self, what: &str) -> String {
        format!(
            "{what} epsilon={} sweep={} u_sweep={} trials={} seed={}",
            self.epsilon, self.sweep, self.u_sweep, self.trials, self.seed
        )
    }
}

/// The three photon statistics compared in the figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fock,
    Poisson,
    Thermal,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Fock, Scenario::Poisson, Scenario::Thermal];

    pub fn suffix(self) -> &'static str {
        match self {
            Scenario::Fock => "N",
            Scenario::Poisson => "Poi",
            Scenario::Thermal => "th",
        }
    }

    /// The distribution at grid value `x`; Fock states exist only at integers.
    pub fn distribution(self, x: f64) -> Result<Option<PhotonDistribution>> {
        Ok(match self {
            Scenario::Fock => {
                if x.fract() == 0.0 && x >= 0.0 && x <= u32::MAX as f64 {
                    Some(PhotonDistribution::fock(x as u32))
                } else {
                    None
                }
            }
            Scenario::Poisson => Some(PhotonDistribution::poisson(x)?),
            Scenario::Thermal => Some(PhotonDistribution::thermal(x)?),
        })
    }
}

/// Poisson likelihood `P(r|r0)` over a grid of mean photon numbers and
/// fidelities `u = |f_{r r0}|²`.
pub fn likelihood_table(cfg: &FigureConfig) -> Result<Table> {
    let mut table = Table::new(
        cfg.describe("likelihood dist=poisson"),
        &["nbar", "fidelity_u", "likelihood"],
    );
    for nbar in cfg.sweep.points() {
        let model = LikelihoodModel::new(PhotonDistribution::poisson(nbar)?);
        for u in cfg.u_sweep.points() {
            table.push(vec![
                Some(nbar),
                Some(u),
                Some(model.likelihood_at_fidelity(u)),
            ]);
        }
    }
    Ok(table)
}

/// Greedy fidelity samples, one per (grid point, scenario), each from its own
/// derived seed. `None` where the scenario does not exist or `trials = 0`.
fn greedy_samples(cfg: &FigureConfig, points: &[f64]) -> Result<Vec<[Option<FidelitySample>; 3]>> {
    let sim = GreedySimulator::default();
    let mut out = Vec::with_capacity(points.len());
    for (i, x) in points.iter().enumerate() {
        let mut row: [Option<FidelitySample>; 3] = [None, None, None];
        if cfg.trials > 0 {
            for (k, sc) in Scenario::ALL.iter().enumerate() {
                if let Some(dist) = sc.distribution(*x)? {
                    let seed = derive_seed(cfg.seed, (3 * i + k) as u64);
                    row[k] = Some(sim.simulate(&dist, cfg.trials, seed)?);
                }
            }
        }
        out.push(row);
    }
    Ok(out)
}

fn exact<F: Fn(&LikelihoodModel) -> f64>(sc: Scenario, x: f64, f: F) -> Result<Option<f64>> {
    Ok(sc.distribution(x)?.map(|d| f(&LikelihoodModel::new(d))))
}

fn split(e: Option<McEstimate>) -> (Option<f64>, Option<f64>) {
    (e.map(|e| e.value), e.map(|e| e.std_error))
}

fn header(groups: &[&[&str]]) -> Vec<String> {
    let mut h = vec!["nbar".to_string()];
    for g in groups {
        for sc in Scenario::ALL {
            for name in *g {
                h.push(name.replace('*', sc.suffix()));
            }
        }
    }
    h
}

fn table_with(comment: String, header: Vec<String>) -> Table {
    Table {
        comment,
        header,
        rows: Vec::new(),
    }
}

/// Success probabilities `Q(ε)`: exact ML-POVM columns, then greedy Monte
/// Carlo columns, then their standard errors.
pub fn fig2_table(cfg: &FigureConfig) -> Result<Table> {
    let points = cfg.sweep.points();
    let greedy = greedy_samples(cfg, &points)?;
    let threshold = crate::ml_povm::cap_fidelity(cfg.epsilon);
    let mut table = table_with(
        cfg.describe("fig2 success probability"),
        header(&[&["Q_*"], &["Q_*_g"], &["Q_*_g_se"]]),
    );
    for (x, samples) in points.iter().zip(&greedy) {
        let mut row = vec![Some(*x)];
        let mut est = Vec::new();
        for sc in Scenario::ALL {
            row.push(exact(sc, *x, |m| m.success_probability(cfg.epsilon))?);
        }
        for s in samples {
            est.push(split(s.as_ref().map(|s| s.fraction_at_least(threshold))));
        }
        row.extend(est.iter().map(|e| e.0));
        row.extend(est.iter().map(|e| e.1));
        table.push(row);
    }
    Ok(table)
}

/// Mean fidelities: exact ML-POVM columns, greedy Monte Carlo columns and
/// their standard errors.
pub fn fig3_table(cfg: &FigureConfig) -> Result<Table> {
    let points = cfg.sweep.points();
    let greedy = greedy_samples(cfg, &points)?;
    let mut table = table_with(
        cfg.describe("fig3 mean fidelity"),
        header(&[&["F_*"], &["F_*_g"], &["F_*_g_se"]]),
    );
    for (x, samples) in points.iter().zip(&greedy) {
        let mut row = vec![Some(*x)];
        for sc in Scenario::ALL {
            row.push(exact(sc, *x, LikelihoodModel::mean_fidelity)?);
        }
        let est: Vec<_> = samples
            .iter()
            .map(|s| split(s.as_ref().map(|s| s.mean())))
            .collect();
        row.extend(est.iter().map(|e| e.0));
        row.extend(est.iter().map(|e| e.1));
        table.push(row);
    }
    Ok(table)
}

/// Mean fidelity with its spread, per scenario: `F`, `ΔF`, `F − ΔF`, `F + ΔF`
/// for the ML-POVM and the same four for the greedy scheme. The upper band
/// is not capped at 1.
pub fn fig4_table(cfg: &FigureConfig) -> Result<Table> {
    let points = cfg.sweep.points();
    let greedy = greedy_samples(cfg, &points)?;
    let mut header = vec!["nbar".to_string()];
    for sc in Scenario::ALL {
        let s = sc.suffix();
        for name in ["F_", "dF_", "F_lo_", "F_hi_"] {
            header.push(format!("{name}{s}"));
        }
        for name in ["F_", "dF_", "F_lo_", "F_hi_"] {
            header.push(format!("{name}{s}_g"));
        }
    }
    let mut table = table_with(cfg.describe("fig4 fidelity spread"), header);
    let band = |f: Option<f64>, d: Option<f64>| match (f, d) {
        (Some(f), Some(d)) => [Some(f), Some(d), Some(f - d), Some(f + d)],
        _ => [None; 4],
    };
    for (x, samples) in points.iter().zip(&greedy) {
        let mut row = vec![Some(*x)];
        for (sc, s) in Scenario::ALL.iter().zip(samples) {
            let f = exact(*sc, *x, LikelihoodModel::mean_fidelity)?;
            let d = exact(*sc, *x, |m| m.fidelity_variance().max(0.0).sqrt())?;
            row.extend(band(f, d));
            let fg = s.as_ref().map(|s| s.mean().value);
            let dg = s.as_ref().map(|s| s.variance().value.max(0.0).sqrt());
            row.extend(band(fg, dg));
        }
        table.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_only() -> FigureConfig {
        FigureConfig {
            trials: 0,
            ..FigureConfig::default()
        }
    }

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "0:30:0.5".parse().unwrap();
        let pts = s.points();
        assert_eq!(pts.len(), 61);
        assert_eq!(pts[60], 30.0);
        let s: Sweep = "0:1:0.1".parse().unwrap();
        assert_eq!(s.points().len(), 11);
        assert_eq!("2:2:1".parse::<Sweep>().unwrap().points(), vec![2.0]);
        for bad in [
            "", "1:2", "1:2:0", "3:1:1", "a:2:1", "1:2:-1", "0:inf:1", "1:2:3:4",
        ] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }

    #[test]
    fn likelihood_rows() {
        let t = likelihood_table(&FigureConfig::likelihood_default()).unwrap();
        assert_eq!(t.rows.len(), 21 * 21);
        let find = |nbar: f64, u: f64| {
            t.rows
                .iter()
                .find(|r| r[0] == Some(nbar) && (r[1].unwrap() - u).abs() < 1e-12)
                .unwrap()[2]
                .unwrap()
        };
        assert!((find(0.0, 0.3) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((find(2.0, 1.0) - 3.0 / (4.0 * PI)).abs() < 1e-14);
        for chunk in t.rows.chunks(21).skip(1) {
            for w in chunk.windows(2) {
                assert!(w[1][2].unwrap() > w[0][2].unwrap());
            }
        }
    }

    #[test]
    fn fig2_exact_columns() {
        let t = fig2_table(&exact_only()).unwrap();
        assert_eq!(t.header[..4], ["nbar", "Q_N", "Q_Poi", "Q_th"]);
        assert_eq!(t.header.len(), 10);
        let first = &t.rows[0];
        for c in &first[1..4] {
            assert!((c.unwrap() - 0.0954915028125263).abs() < 1e-12);
        }
        assert!(first[4..].iter().all(Option::is_none));
        let half = t.rows.iter().find(|r| r[0] == Some(0.5)).unwrap();
        assert!(half[1].is_none() && half[2].is_some());
        for r in t.rows.iter().filter(|r| r[0].unwrap() >= 1.0) {
            assert!(r[3].unwrap() < r[2].unwrap());
            if let Some(qn) = r[1] {
                assert!((qn - r[2].unwrap()).abs() < 0.02);
            }
        }
    }

    #[test]
    fn fig3_and_fig4_exact_columns() {
        let t = fig3_table(&exact_only()).unwrap();
        let row = t.rows.iter().find(|r| r[0] == Some(1.0)).unwrap();
        assert!((row[1].unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((row[3].unwrap() - 0.6137056388801094).abs() < 1e-12);

        let t = fig4_table(&exact_only()).unwrap();
        assert_eq!(t.header.len(), 1 + 3 * 8);
        let f = t.column("F_th").unwrap();
        let d = t.column("dF_th").unwrap();
        let hi = t.column("F_hi_th").unwrap();
        for i in 0..f.len() {
            assert!((hi[i].unwrap() - f[i].unwrap() - d[i].unwrap()).abs() < 1e-15);
        }
        // one photon: F = 2/3, ΔF² = 2/4 − 4/9
        let dn = t.column("dF_N").unwrap();
        assert!((dn[2].unwrap() - (0.5f64 - 4.0 / 9.0).sqrt()).abs() < 1e-12);
        assert!(t.column("F_hi_N_g").unwrap().iter().all(Option::is_none));
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo seed=3", &["a", "b"]);
        t.push(vec![Some(0.1), None]);
        t.push(vec![Some(1.0), Some(2.5e-20)]);
        assert_eq!(
            t.to_csv_string(),
            "# demo seed=3\na,b\n0.1,\n1,0.000000000000000000025\n"
        );
    }

    #[test]
    fn greedy_columns_are_seeded() {
        let cfg = FigureConfig {
            sweep: "0:2:1".parse().unwrap(),
            trials: 300,
            seed: 11,
            ..FigureConfig::default()
        };
        let a = fig3_table(&cfg).unwrap().to_csv_string();
        let b = fig3_table(&cfg).unwrap().to_csv_string();
        assert_eq!(a, b);
        let other = fig3_table(&FigureConfig { seed: 12, ..cfg })
            .unwrap()
            .to_csv_string();
        assert_ne!(a, other);
    }
}
