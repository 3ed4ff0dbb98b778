//! Photon-number statistics `P_n` of the incoming light.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Default bound on the probability mass dropped by truncation.
pub const DEFAULT_TRUNCATION_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    /// Definite photon number.
    Fock(u32),
    /// Phase-randomized coherent light with mean `nbar`.
    Poisson(f64),
    /// Bose–Einstein statistics with mean `nbar`.
    Thermal(f64),
    /// Finite list of weights, normalized.
    Custom(Vec<f64>),
}

/// A photon-number distribution together with its truncated support.
#[derive(Debug, Clone)]
pub struct PhotonDistribution {
    kind: DistKind,
    tail: f64,
    n_max: usize,
    /// pmf over `0..=n_max`
    probs: Vec<f64>,
    /// running sums of `probs`
    cdf: Vec<f64>,
}

impl PhotonDistribution {
    pub fn fock(n: u32) -> Self {
        Self::build(DistKind::Fock(n), DEFAULT_TRUNCATION_TAIL)
    }

    pub fn vacuum() -> Self {
        Self::fock(0)
    }

    pub fn poisson(nbar: f64) -> Result<Self> {
        check_mean(nbar)?;
        Ok(Self::build(
            DistKind::Poisson(nbar),
            DEFAULT_TRUNCATION_TAIL,
        ))
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        check_mean(nbar)?;
        Ok(Self::build(
            DistKind::Thermal(nbar),
            DEFAULT_TRUNCATION_TAIL,
        ))
    }

    /// Weights are normalized to unit sum.
    pub fn custom(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no weights given".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        let normalized = weights.into_iter().map(|w| w / total).collect();
        Ok(Self::build(
            DistKind::Custom(normalized),
            DEFAULT_TRUNCATION_TAIL,
        ))
    }

    /// Loads custom weights from a text file holding one non-negative weight
    /// per line. Blank lines and lines starting with `#` are skipped.
    pub fn from_weights_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut weights = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w: f64 =
                line.parse()
                    .map_err(|e: std::num::ParseFloatError| Error::WeightParse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        reason: e.to_string(),
                    })?;
            weights.push(w);
        }
        Self::custom(weights)
    }

    /// Rebuilds the distribution with a different truncation tolerance.
    pub fn with_tail(self, tail: f64) -> Result<Self> {
        if !(tail > 0.0 && tail < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "truncation tail {tail} outside (0, 1)"
            )));
        }
        Ok(Self::build(self.kind, tail))
    }

    fn build(kind: DistKind, tail: f64) -> Self {
        let probs = match &kind {
            DistKind::Fock(n) => {
                let mut p = vec![0.0; *n as usize + 1];
                p[*n as usize] = 1.0;
                p
            }
            DistKind::Custom(w) => w.clone(),
            DistKind::Poisson(_) | DistKind::Thermal(_) => {
                let n_max = infinite_support_cutoff(&kind, tail);
                (0..=n_max).map(|n| kind_pmf(&kind, n)).collect()
            }
        };
        let cdf = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Self {
            n_max: probs.len() - 1,
            kind,
            tail,
            probs,
            cdf,
        }
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn truncation_tail(&self) -> f64 {
        self.tail
    }

    /// Probability of exactly `n` photons, valid for any `n`.
    pub fn pmf(&self, n: usize) -> f64 {
        kind_pmf(&self.kind, n)
    }

    /// Smallest `n_max` whose dropped tail mass is at most the tolerance.
    pub fn truncation_index(&self) -> usize {
        self.n_max
    }

    /// pmf over `0..=truncation_index()`.
    pub fn truncated_pmf(&self) -> &[f64] {
        &self.probs
    }

    /// Probability mass kept by the truncation.
    pub fn truncated_mass(&self) -> f64 {
        *self.cdf.last().expect("support is never empty")
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            DistKind::Fock(n) => *n as f64,
            DistKind::Poisson(nbar) | DistKind::Thermal(nbar) => *nbar,
            DistKind::Custom(w) => w.iter().enumerate().map(|(n, p)| n as f64 * p).sum(),
        }
    }

    /// Draws a photon number by inverse CDF over the truncated support.
    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if let DistKind::Fock(n) = self.kind {
            return n as usize;
        }
        let u = rng.gen::<f64>() * self.truncated_mass();
        let idx = self.cdf.partition_point(|c| *c <= u);
        idx.min(self.n_max)
    }

    /// Short tag used in reports, e.g. `poisson(2.5)`.
    pub fn label(&self) -> String {
        match &self.kind {
            DistKind::Fock(n) => format!("fock({n})"),
            DistKind::Poisson(nbar) => format!("poisson({nbar})"),
            DistKind::Thermal(nbar) => format!("thermal({nbar})"),
            DistKind::Custom(w) => format!("custom({} weights)", w.len()),
        }
    }
}

fn check_mean(nbar: f64) -> Result<()> {
    if nbar.is_finite() && nbar >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "mean photon number {nbar} must be finite and non-negative"
        )))
    }
}

fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

fn kind_pmf(kind: &DistKind, n: usize) -> f64 {
    match kind {
        DistKind::Fock(m) => {
            if n == *m as usize {
                1.0
            } else {
                0.0
            }
        }
        DistKind::Poisson(nbar) => {
            if *nbar == 0.0 {
                return if n == 0 { 1.0 } else { 0.0 };
            }
            (n as f64 * nbar.ln() - nbar - ln_factorial(n)).exp()
        }
        DistKind::Thermal(nbar) => {
            if *nbar == 0.0 {
                return if n == 0 { 1.0 } else { 0.0 };
            }
            let ratio = nbar / (1.0 + nbar);
            (n as f64 * ratio.ln() - nbar.ln_1p()).exp()
        }
        DistKind::Custom(w) => w.get(n).copied().unwrap_or(0.0),
    }
}

/// Cutoff for the two infinite-support families.
fn infinite_support_cutoff(kind: &DistKind, tail: f64) -> usize {
    match kind {
        DistKind::Thermal(nbar) => {
            if *nbar == 0.0 {
                return 0;
            }
            // tail beyond k is ratio^(k+1)
            let ratio = nbar / (1.0 + nbar);
            let log_ratio = ratio.ln();
            let mut k = ((tail.ln() / log_ratio).ceil() as usize).saturating_sub(1);
            while k > 0 && ((k as f64) * log_ratio).exp() <= tail {
                k -= 1;
            }
            while ((k as f64 + 1.0) * log_ratio).exp() > tail {
                k += 1;
            }
            k
        }
        DistKind::Poisson(nbar) => {
            if *nbar == 0.0 {
                return 0;
            }
            // far enough out that the pmf is below 1e-300
            let upper = (nbar + 40.0 * nbar.sqrt() + 60.0).ceil() as usize;
            let probs: Vec<f64> = (0..=upper).map(|n| kind_pmf(kind, n)).collect();
            let mut suffix = 0.0;
            let mut k = upper;
            // suffix holds the mass strictly above k
            while k > 0 {
                let next = suffix + probs[k];
                if next > tail {
                    break;
                }
                suffix = next;
                k -= 1;
            }
            k
        }
        DistKind::Fock(n) => *n as usize,
        DistKind::Custom(w) => w.len() - 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn pmf_examples() {
        let f = PhotonDistribution::fock(3);
        assert_eq!(f.pmf(3), 1.0);
        assert_eq!(f.pmf(2), 0.0);
        assert_eq!(PhotonDistribution::poisson(0.0).unwrap().pmf(0), 1.0);
        let t = PhotonDistribution::thermal(1.0).unwrap();
        assert!((t.pmf(0) - 0.5).abs() < 1e-15);
        assert!((t.pmf(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn poisson_pmf_matches_recurrence() {
        for nbar in [0.3, 4.0, 37.5] {
            let d = PhotonDistribution::poisson(nbar).unwrap();
            let mut p = (-nbar).exp();
            for n in 0..80 {
                assert!((d.pmf(n) - p).abs() <= 1e-12 * p.max(1e-300));
                p *= nbar / (n as f64 + 1.0);
            }
        }
        // large means stay finite and normalized
        let big = PhotonDistribution::poisson(1e4).unwrap();
        assert!((big.truncated_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn truncation_index_examples() {
        assert_eq!(PhotonDistribution::fock(5).truncation_index(), 5);
        assert_eq!(
            PhotonDistribution::thermal(1.0).unwrap().truncation_index(),
            39
        );
        assert_eq!(
            PhotonDistribution::custom(vec![1.0, 2.0, 0.5])
                .unwrap()
                .truncation_index(),
            2
        );
    }

    /// Cumulative summation oracle using the multiplicative recurrence.
    fn poisson_cutoff_oracle(nbar: f64, tail: f64) -> usize {
        let mut probs = vec![(-nbar).exp()];
        for n in 0..2000 {
            let next = probs[n] * nbar / (n as f64 + 1.0);
            probs.push(next);
        }
        (0..probs.len())
            .find(|&k| probs[k + 1..].iter().sum::<f64>() <= tail)
            .unwrap()
    }

    #[test]
    fn poisson_truncation_matches_cumulative_oracle() {
        let d = PhotonDistribution::poisson(10.0).unwrap();
        assert_eq!(d.truncation_index(), poisson_cutoff_oracle(10.0, 1e-12));
        // frozen from an arbitrary-precision cumulative sum
        assert_eq!(d.truncation_index(), 39);
        for (nbar, want) in [
            (0.1, 7),
            (0.5, 11),
            (1.0, 14),
            (5.0, 27),
            (20.0, 59),
            (100.0, 178),
        ] {
            assert_eq!(
                PhotonDistribution::poisson(nbar)
                    .unwrap()
                    .truncation_index(),
                want,
                "nbar {nbar}"
            );
        }
    }

    #[test]
    fn truncation_is_minimal() {
        for nbar in [0.1, 1.0, 10.0, 100.0] {
            for d in [
                PhotonDistribution::poisson(nbar).unwrap(),
                PhotonDistribution::thermal(nbar).unwrap(),
            ] {
                let k = d.truncation_index();
                let mass = d.truncated_mass();
                assert!(mass >= 1.0 - d.truncation_tail() - 1e-13, "{}", d.label());
                assert!(mass <= 1.0 + 1e-13);
                // mass at and beyond k, summed smallest first
                let beyond: f64 = (k..k + 20_000).rev().map(|n| d.pmf(n)).sum();
                let dropped: f64 = (k + 1..k + 20_000).rev().map(|n| d.pmf(n)).sum();
                assert!(dropped <= d.truncation_tail() * 1.001, "{}", d.label());
                // one fewer term would drop too much
                assert!(beyond > d.truncation_tail(), "{}", d.label());
            }
        }
    }

    #[test]
    fn means() {
        assert_eq!(PhotonDistribution::fock(7).mean(), 7.0);
        assert_eq!(PhotonDistribution::thermal(2.5).unwrap().mean(), 2.5);
        let c = PhotonDistribution::custom(vec![1.0, 1.0]).unwrap();
        assert!((c.mean() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn poisson_sample_mean() {
        let d = PhotonDistribution::poisson(4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 100_000;
        let total: usize = (0..draws).map(|_| d.sample_n(&mut rng)).sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 4.0).abs() < 3.0 * 2.0 / (draws as f64).sqrt());
    }

    fn chi_square_passes(d: &PhotonDistribution, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws = 100_000usize;
        let mut counts = vec![0usize; d.truncation_index() + 1];
        for _ in 0..draws {
            counts[d.sample_n(&mut rng)] += 1;
        }
        // pool cells with expected count below 5 into their neighbour
        let mut stat = 0.0;
        let mut cells = 0;
        let (mut obs, mut exp) = (0.0, 0.0);
        for (n, c) in counts.iter().enumerate() {
            obs += *c as f64;
            exp += d.pmf(n) * draws as f64;
            if exp >= 5.0 {
                stat += (obs - exp).powi(2) / exp;
                cells += 1;
                obs = 0.0;
                exp = 0.0;
            }
        }
        if exp > 0.0 {
            stat += (obs - exp).powi(2) / exp.max(1e-300);
            cells += 1;
        }
        if cells < 2 {
            return true;
        }
        let crit = ChiSquared::new((cells - 1) as f64)
            .unwrap()
            .inverse_cdf(0.999);
        stat < crit
    }

    #[test]
    fn sampling_goodness_of_fit() {
        for (i, nbar) in [0.1, 1.0, 10.0].into_iter().enumerate() {
            assert!(chi_square_passes(
                &PhotonDistribution::poisson(nbar).unwrap(),
                100 + i as u64
            ));
            assert!(chi_square_passes(
                &PhotonDistribution::thermal(nbar).unwrap(),
                200 + i as u64
            ));
        }
        let c = PhotonDistribution::custom(vec![0.2, 0.0, 0.5, 0.3]).unwrap();
        assert!(chi_square_passes(&c, 300));
    }

    #[test]
    fn custom_validation_and_file() {
        assert!(PhotonDistribution::custom(vec![]).is_err());
        assert!(PhotonDistribution::custom(vec![1.0, -0.1]).is_err());
        assert!(PhotonDistribution::custom(vec![0.0, 0.0]).is_err());
        assert!(PhotonDistribution::poisson(-1.0).is_err());
        assert!(PhotonDistribution::thermal(f64::INFINITY).is_err());

        let dir = std::env::temp_dir().join(format!("pstats-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let good = dir.join("w.txt");
        fs::write(&good, "# weights\n1\n\n3\n").unwrap();
        let d = PhotonDistribution::from_weights_file(&good).unwrap();
        assert_eq!(d.truncated_pmf(), &[0.25, 0.75][..]);
        let bad = dir.join("bad.txt");
        fs::write(&bad, "0.5\nabc\n").unwrap();
        assert!(matches!(
            PhotonDistribution::from_weights_file(&bad),
            Err(Error::WeightParse { line: 2, .. })
        ));
    }

    #[test]
    fn normalization_sweep() {
        for nbar in [0.1, 1.0, 10.0, 100.0] {
            for d in [
                PhotonDistribution::poisson(nbar).unwrap(),
                PhotonDistribution::thermal(nbar).unwrap(),
                PhotonDistribution::fock(nbar as u32),
            ] {
                let s: f64 = d.truncated_pmf().iter().sum();
                assert!(s >= 1.0 - d.truncation_tail() - 1e-14 && s <= 1.0 + 1e-14);
                assert!(d.truncated_pmf().iter().all(|p| *p >= 0.0));
            }
        }
    }
}
