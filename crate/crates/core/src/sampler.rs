//! Monte-Carlo estimators of stabilizer purities by sampling Pauli strings
//! from `Ξ_P = tr(Pρ)² / (2^m tr ρ²)`.

use crate::error::{Error, Result};
use crate::pauli::{compensated_sum, PauliSpectrum};
use crate::statevec::{DensityMatrix, MAX_RDM_SITES};
use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::WeightedAliasIndex;
use rayon::prelude::*;
use std::io::Write;

/// Expectations below this magnitude are treated as exact zeros.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplingPlan {
    pub n_samples: usize,
    pub renyi_n: usize,
    pub seed: u64,
    pub report_stride: usize,
    /// Number of independent RNG streams.
    pub workers: usize,
}

impl SamplingPlan {
    pub fn new(n_samples: usize, renyi_n: usize, seed: u64) -> Self {
        SamplingPlan {
            n_samples,
            renyi_n,
            seed,
            report_stride: (n_samples / 100).max(1),
            workers: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.report_stride = stride;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if self.renyi_n == 0 {
            return Err(Error::RenyiOutOfRange { n: 0, min: 1, max: usize::MAX });
        }
        if self.report_stride == 0 || self.workers == 0 {
            return Err(Error::InvalidArgument("stride and workers must be positive".into()));
        }
        Ok(())
    }
}

/// `Ξ` restricted to its support.
#[derive(Clone, Debug)]
pub struct XiDistribution {
    n_sites: usize,
    indices: Vec<u64>,
    probs: Vec<f64>,
    purity: f64,
}

impl XiDistribution {
    pub fn from_spectrum(spec: &PauliSpectrum) -> Result<Self> {
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        for (i, v) in spec.values().iter().enumerate() {
            if v.abs() > SUPPORT_TOL {
                indices.push(i as u64);
                weights.push(v * v);
            }
        }
        let total = compensated_sum(weights.iter().cloned());
        if total <= 0.0 {
            return Err(Error::InvalidArgument("Pauli spectrum vanishes".into()));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        Ok(XiDistribution {
            n_sites: spec.n_sites(),
            indices,
            probs,
            purity: spec.purity(),
        })
    }

    pub fn from_density_matrix(rho: &DensityMatrix) -> Result<Self> {
        if rho.n_sites() > MAX_RDM_SITES {
            return Err(Error::MemoryGuard {
                what: format!("Pauli distribution on {} sites", rho.n_sites()),
                bytes: 24u128 << (2 * rho.n_sites()),
                limit: 24u128 << (2 * MAX_RDM_SITES),
            });
        }
        Self::from_spectrum(&PauliSpectrum::from_density_matrix(rho)?)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn support_size(&self) -> usize {
        self.indices.len()
    }

    /// `(pauli index, Ξ_P)` over the support.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.indices.iter().cloned().zip(self.probs.iter().cloned())
    }

    pub fn prob_of(&self, index: u64) -> f64 {
        self.indices
            .binary_search(&index)
            .map_or(0.0, |pos| self.probs[pos])
    }

    /// Exact `q_n = Σ Ξ^n`, and `q_1 = Σ Ξ ln Ξ`.
    pub fn exact_q(&self, n: usize) -> f64 {
        if n == 1 {
            compensated_sum(self.probs.iter().map(|p| p * p.ln()))
        } else {
            compensated_sum(self.probs.iter().map(|p| p.powi(n as i32)))
        }
    }

    pub fn sampler(&self) -> Result<PauliSampler<'_>> {
        let alias = WeightedAliasIndex::new(self.probs.clone())
            .map_err(|e| Error::InvalidArgument(format!("alias table: {e}")))?;
        Ok(PauliSampler { dist: self, alias })
    }
}

/// O(1) draws from `Ξ` through an alias table.
pub struct PauliSampler<'a> {
    dist: &'a XiDistribution,
    alias: WeightedAliasIndex<f64>,
}

impl PauliSampler<'_> {
    /// Returns `(pauli index, Ξ_P)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, f64) {
        let k = self.alias.sample(rng);
        (self.dist.indices[k], self.dist.probs[k])
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub samples: usize,
    pub q_tilde: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorReport {
    pub renyi_n: usize,
    pub n_samples: usize,
    pub q_tilde: f64,
    pub stderr: f64,
    pub checkpoints: Vec<Checkpoint>,
}

fn term(n: usize, p: f64) -> f64 {
    assert!(p > 0.0, "sampled a zero-probability Pauli");
    if n == 1 {
        p.ln()
    } else {
        p.powi(n as i32 - 1)
    }
}

/// `q̃_1 = mean ln Ξ_P`, `q̃_n = mean Ξ_P^{n-1}`.
pub fn estimate_q(dist: &XiDistribution, plan: &SamplingPlan) -> Result<EstimatorReport> {
    plan.validate()?;
    let sampler = dist.sampler()?;
    let w = plan.workers;
    let per = plan.n_samples / w;
    let extra = plan.n_samples % w;
    let chunks: Vec<Vec<f64>> = (0..w)
        .into_par_iter()
        .map(|k| {
            let count = per + usize::from(k < extra);
            let mut rng = stream_rng(plan.seed, k as u64);
            (0..count)
                .map(|_| term(plan.renyi_n, sampler.sample(&mut rng).1))
                .collect()
        })
        .collect();
    let mut checkpoints = Vec::new();
    let (mut s1, mut s2, mut count) = (0.0f64, 0.0f64, 0usize);
    let snapshot = |s1: f64, s2: f64, c: usize| {
        let mean = s1 / c as f64;
        let var = if c > 1 {
            ((s2 - c as f64 * mean * mean) / (c as f64 - 1.0)).max(0.0)
        } else {
            0.0
        };
        Checkpoint {
            samples: c,
            q_tilde: mean,
            stderr: (var / c as f64).sqrt(),
        }
    };
    for x in chunks.iter().flatten() {
        s1 += x;
        s2 += x * x;
        count += 1;
        if count % plan.report_stride == 0 || count == plan.n_samples {
            checkpoints.push(snapshot(s1, s2, count));
        }
    }
    let last = *checkpoints.last().expect("at least one sample");
    Ok(EstimatorReport {
        renyi_n: plan.renyi_n,
        n_samples: plan.n_samples,
        q_tilde: last.q_tilde,
        stderr: last.stderr,
        checkpoints,
    })
}

impl EstimatorReport {
    /// Convergence CSV; `exact` fills the last column when known.
    pub fn write_csv<W: Write>(&self, w: &mut W, exact: Option<f64>) -> Result<()> {
        writeln!(w, "samples,q_tilde,stderr,exact_value")?;
        for c in &self.checkpoints {
            let e = exact.map_or(String::new(), |x| format!("{x:.17e}"));
            writeln!(w, "{},{:.17e},{:.17e},{}", c.samples, c.q_tilde, c.stderr, e)?;
        }
        Ok(())
    }
}

/// `ζ_2/ζ_1 = q_2 · 2^m · tr ρ²`
pub fn zeta_ratio_from_q2(q2: f64, dist: &XiDistribution) -> f64 {
    q2 * 2f64.powi(dist.n_sites() as i32) * dist.purity()
}

/// Sampled `M̃_2(ρ) = -ln(ζ_2/ζ_1)` with the exact purity.
pub fn sampled_mixed_sre2(rho: &DensityMatrix, samples: usize, seed: u64) -> Result<f64> {
    Ok(sampled_mixed_sre(rho, 2, samples, seed)?.0)
}

/// Sampled `M̃_n(ρ) = ln(ζ_n/ζ_1)/(1-n)` and its delta-method standard error,
/// using `ζ_n/ζ_1 = q_n 2^{m(n-1)} ζ_1^{n-1}` with the exact purity.
pub fn sampled_mixed_sre(rho: &DensityMatrix, n: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::RenyiOutOfRange { n, min: 2, max: usize::MAX });
    }
    let dist = XiDistribution::from_density_matrix(rho)?;
    let rep = estimate_q(&dist, &SamplingPlan::new(samples, n, seed))?;
    let k = (n - 1) as f64;
    let ln_ratio = rep.q_tilde.ln() + k * (dist.n_sites() as f64 * std::f64::consts::LN_2 + dist.purity().ln());
    Ok((ln_ratio / (1.0 - n as f64), rep.stderr / (rep.q_tilde * k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{EvolutionSpec, GateParams};
    use crate::statevec::Statevector;
    use crate::C64;

    fn bell_dist() -> XiDistribution {
        let rho = Statevector::bell_product(2).unwrap().density_matrix().unwrap();
        XiDistribution::from_density_matrix(&rho).unwrap()
    }

    #[test]
    fn mixed_qubit_is_point_mass() {
        let rho = DensityMatrix::from_raw(
            vec![0],
            vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        )
        .unwrap();
        let d = XiDistribution::from_density_matrix(&rho).unwrap();
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.prob_of(0), 1.0);
        let s = d.sampler().unwrap();
        let mut rng = stream_rng(1, 0);
        assert!((0..100).all(|_| s.sample(&mut rng).0 == 0));
    }

    #[test]
    fn bell_uniform_on_stabilizers() {
        let d = bell_dist();
        let labels: Vec<u64> = d.iter().map(|(i, _)| i).collect();
        // II, XX, YY, ZZ
        assert_eq!(labels, vec![0, 5, 10, 15]);
        assert!(d.iter().all(|(_, p)| (p - 0.25).abs() < 1e-15));
        let s = d.sampler().unwrap();
        let mut rng = stream_rng(42, 0);
        let draws = 100_000;
        let mut counts = [0usize; 16];
        for _ in 0..draws {
            counts[s.sample(&mut rng).0 as usize] += 1;
        }
        let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
        for i in [0, 5, 10, 15] {
            assert!((counts[i] as f64 - 0.25 * draws as f64).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn deterministic_streams() {
        let d = bell_dist();
        let plan = SamplingPlan::new(1000, 2, 9).with_workers(3);
        assert_eq!(estimate_q(&d, &plan).unwrap(), estimate_q(&d, &plan).unwrap());
        let s = d.sampler().unwrap();
        let a: Vec<u64> = {
            let mut r = stream_rng(5, 0);
            (0..50).map(|_| s.sample(&mut r).0).collect()
        };
        let b: Vec<u64> = {
            let mut r = stream_rng(5, 1);
            (0..50).map(|_| s.sample(&mut r).0).collect()
        };
        assert_ne!(a, b);
    }

    #[test]
    fn bell_q2_exact() {
        let d = bell_dist();
        let rep = estimate_q(&d, &SamplingPlan::new(500, 2, 3)).unwrap();
        assert!((rep.q_tilde - 0.25).abs() < 1e-15);
        assert!(rep.stderr < 1e-15);
        assert!((d.exact_q(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn checkpoints_and_mean() {
        let sv = Statevector::evolve(&EvolutionSpec::new(6, 2, GateParams::new(0.3, 0.5))).unwrap();
        let d = XiDistribution::from_density_matrix(&sv.reduced_density_matrix(&[0, 1, 2, 3]).unwrap())
            .unwrap();
        let rep = estimate_q(&d, &SamplingPlan::new(1003, 2, 1).with_stride(100)).unwrap();
        assert_eq!(rep.checkpoints.len(), 11);
        assert!(rep.checkpoints.windows(2).all(|w| w[0].samples < w[1].samples));
        assert_eq!(rep.checkpoints.last().unwrap().samples, 1003);
        let mut out = Vec::new();
        rep.write_csv(&mut out, Some(d.exact_q(2))).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("samples,q_tilde,stderr,exact_value\n100,"));
    }

    #[test]
    fn q1_uses_log() {
        let d = bell_dist();
        let rep = estimate_q(&d, &SamplingPlan::new(10, 1, 3)).unwrap();
        assert!((rep.q_tilde - 0.25f64.ln()).abs() < 1e-15);
        assert!((d.exact_q(1) - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn stderr_scaling() {
        let sv = Statevector::evolve(&EvolutionSpec::new(8, 3, GateParams::new(0.3, 0.5))).unwrap();
        let d = XiDistribution::from_density_matrix(&sv.reduced_density_matrix(&[0, 1, 2, 3, 4]).unwrap())
            .unwrap();
        let a = estimate_q(&d, &SamplingPlan::new(40_000, 2, 11)).unwrap();
        let b = estimate_q(&d, &SamplingPlan::new(80_000, 2, 12)).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn invalid_plans() {
        let d = bell_dist();
        assert!(estimate_q(&d, &SamplingPlan::new(0, 2, 1)).is_err());
        assert!(estimate_q(&d, &SamplingPlan::new(10, 0, 1)).is_err());
    }
}
