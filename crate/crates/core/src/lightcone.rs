//! Stabilizer purities of reduced states of the brick-wall circuit at
//! cost linear in depth.
//!
//! Every gate is a ZZ phase followed by a SWAP, so the two qubits of each
//! initial Bell pair travel ballistically and the evolved state is a phase
//! state over one spin `s_k` per pair:
//!
//! `|ψ⟩ = 2^{-M/2} Σ_s exp(-i Σ_{k<l} J_{kl} s_k s_l) |q(s)⟩`,
//!
//! with `J_{kl}` the summed coupling of every gate where the two world lines
//! cross. For a region `R`, only pairs with both qubits in `R` ("open" pairs)
//! can carry X-type Pauli weight. Summing over the subset `X` of open pairs
//! that do gives
//!
//! `ζ_n(ρ_R) = 2^{|F|-|R|} Σ_X Σ_{S_X} Π_{f∈X} [(1 + Π_r s_f^r)/2^{2n}] Π_{k∉X} h_k`,
//!
//! over `2n` replica spins per open pair, where each remaining pair is a
//! middle unit with `h_k = Π_r cos θ_r + [k touches R] Π_r sin θ_r` and
//! `θ_r = Σ_{f∈X} 2 J_{kf} s_f^r`.

use crate::circuit::{EvolutionSpec, GateParams};
use crate::error::{Error, Result};
use crate::pauli::mixed_sre;
use crate::sampler::sampled_mixed_sre;
use crate::scaled::Scaled;
use crate::statevec::{Statevector, MAX_RDM_SITES};
use std::collections::{BTreeMap, HashMap};

pub const MAX_LIGHTCONE_N: usize = 3;
/// Bound on enumerated open-pair replica configurations.
pub const MAX_CONFIGS: u64 = 1 << 26;
pub const MAX_BRUTE_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionFamily {
    B0,
    B1,
    Custom,
}

/// `A = [o, o+n_a)`, `B = [o+n_a+d, o+n_a+d+n_b)` on a ring of `n_a+n_b+2d` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    pub family: PartitionFamily,
    pub n_a: usize,
    pub n_b: usize,
    pub d: usize,
    pub offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    AB,
    A,
    B,
}

impl PartitionSpec {
    /// `n_a = n_b = 2T`, `d = 2(T-1)`.
    pub fn b0(layers: usize) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidPartition("B0 needs T >= 1".into()));
        }
        Ok(PartitionSpec {
            family: PartitionFamily::B0,
            n_a: 2 * layers,
            n_b: 2 * layers,
            d: 2 * (layers - 1),
            offset: layers % 2,
        })
    }

    /// `n_a = n_b = 2(T+1)`, `d = 2(T-1)`.
    pub fn b1(layers: usize) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidPartition("B1 needs T >= 1".into()));
        }
        Ok(PartitionSpec {
            family: PartitionFamily::B1,
            n_a: 2 * (layers + 1),
            n_b: 2 * (layers + 1),
            d: 2 * (layers - 1),
            offset: layers % 2,
        })
    }

    pub fn custom(n_a: usize, n_b: usize, d: usize, offset: usize) -> Result<Self> {
        let spec = PartitionSpec {
            family: PartitionFamily::Custom,
            n_a,
            n_b,
            d,
            offset,
        };
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidPartition("regions must be non-empty".into()));
        }
        if !spec.n_qubits().is_multiple_of(2) {
            return Err(Error::InvalidPartition(format!(
                "ring size n_a+n_b+2d = {} must be even",
                spec.n_qubits()
            )));
        }
        Ok(spec)
    }

    pub fn with_offset(mut self, offset: usize) -> Self {
        self.offset = offset;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_a + self.n_b + 2 * self.d
    }

    /// Sites of a region, A before B.
    pub fn sites(&self, region: Region) -> Vec<usize> {
        let n = self.n_qubits();
        let a = (0..self.n_a).map(|i| (self.offset + i) % n);
        let b0 = self.offset + self.n_a + self.d;
        let b = (0..self.n_b).map(|i| (b0 + i) % n);
        match region {
            Region::A => a.collect(),
            Region::B => b.collect(),
            Region::AB => a.chain(b).collect(),
        }
    }

    /// Checks the family constraints for depth `layers`.
    pub fn validate(&self, layers: usize) -> Result<()> {
        let expect = match self.family {
            PartitionFamily::B0 => Some(PartitionSpec::b0(layers)?),
            PartitionFamily::B1 => Some(PartitionSpec::b1(layers)?),
            PartitionFamily::Custom => None,
        };
        if let Some(e) = expect {
            if (e.n_a, e.n_b, e.d) != (self.n_a, self.n_b, self.d) {
                return Err(Error::InvalidPartition(format!(
                    "{:?} at T={layers} needs n_a=n_b={}, d={}",
                    self.family, e.n_a, e.d
                )));
            }
        }
        Ok(())
    }

    pub fn evolution(&self, params: GateParams, layers: usize) -> EvolutionSpec {
        EvolutionSpec::new(self.n_qubits(), layers, params)
    }
}

/// Pair world lines after the protocol.
#[derive(Clone, Debug)]
pub struct WorldLines {
    pub n_qubits: usize,
    /// Pair owning each site at the end.
    pub owner: Vec<usize>,
    /// Summed coupling between crossing world lines, keyed `(min, max)`.
    pub couplings: BTreeMap<(usize, usize), f64>,
    /// Gates per unordered pair of world lines, for bookkeeping.
    pub crossings: BTreeMap<(usize, usize), usize>,
    /// Gates where a pair meets itself (a global phase only).
    pub self_crossings: usize,
}

impl WorldLines {
    pub fn trace(spec: &EvolutionSpec) -> Result<Self> {
        let layers = spec.build_layers()?;
        let n = spec.n_qubits;
        let off = spec.convention.pair_offset();
        let mut owner = vec![0usize; n];
        for k in 0..n / 2 {
            owner[(2 * k + off) % n] = k;
            owner[(2 * k + 1 + off) % n] = k;
        }
        let mut couplings: HashMap<(usize, usize), f64> = HashMap::new();
        let mut crossings: HashMap<(usize, usize), usize> = HashMap::new();
        let mut self_crossings = 0;
        for layer in &layers {
            for b in &layer.bonds {
                let (p, q) = (owner[b.left], owner[b.right]);
                if p == q {
                    self_crossings += 1;
                } else {
                    let key = (p.min(q), p.max(q));
                    *couplings.entry(key).or_insert(0.0) += layer.coupling;
                    *crossings.entry(key).or_insert(0) += 1;
                }
                owner.swap(b.left, b.right);
            }
        }
        Ok(WorldLines {
            n_qubits: n,
            owner,
            couplings: couplings.into_iter().collect(),
            crossings: crossings.into_iter().collect(),
            self_crossings,
        })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_qubits / 2
    }
}

/// A pair outside the enumerated set: its cos/sin factor.
#[derive(Clone, Debug, PartialEq)]
pub struct MiddleUnit {
    pub pair: usize,
    pub touches_region: bool,
    /// `(open index, J)` for every coupling to an open pair.
    pub links: Vec<(usize, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ContractionMode {
    /// Multiply every middle unit.
    #[default]
    Linear,
    /// Group identical units and raise by squaring.
    Squaring,
}

/// The replica contraction for one region.
#[derive(Clone, Debug)]
pub struct ReplicaChannel {
    pub renyi_n: usize,
    pub region_size: usize,
    /// Pairs with both qubits in the region.
    pub open: Vec<usize>,
    pub units: Vec<MiddleUnit>,
    /// Multiplies the weight of every enumerated open pair (the light-cone
    /// end caps); exactly 1 except in fault-injection tests.
    pub endcap_scale: f64,
}

#[derive(Clone, Debug)]
pub struct ChannelTerm {
    /// Pair ids of the subset `X`.
    pub subset: Vec<usize>,
    pub value: Scaled,
}

#[derive(Clone, Debug)]
pub struct ChannelEvaluation {
    /// `log2` of the global prefactor `2^{|F|-|R|}`.
    pub log2_prefactor: i64,
    pub terms: Vec<ChannelTerm>,
}

impl ChannelEvaluation {
    fn total(&self) -> Scaled {
        self.terms.iter().map(|t| t.value).sum::<Scaled>() * Scaled::pow2(self.log2_prefactor)
    }

    pub fn zeta(&self) -> f64 {
        self.total().to_f64()
    }

    pub fn ln_zeta(&self) -> f64 {
        self.total().ln_abs()
    }

    /// Term for `X` given as pair ids, times the prefactor.
    pub fn term(&self, subset: &[usize]) -> Option<f64> {
        let mut want = subset.to_vec();
        want.sort_unstable();
        self.terms
            .iter()
            .find(|t| t.subset == want)
            .map(|t| (t.value * Scaled::pow2(self.log2_prefactor)).to_f64())
    }
}

impl ReplicaChannel {
    pub fn new(lines: &WorldLines, region: &[usize], n: usize) -> Result<Self> {
        if n == 0 || n > MAX_LIGHTCONE_N {
            return Err(Error::RenyiOutOfRange {
                n,
                min: 1,
                max: MAX_LIGHTCONE_N,
            });
        }
        let mut count = vec![0usize; lines.n_pairs()];
        let mut seen = vec![false; lines.n_qubits];
        for &s in region {
            if s >= lines.n_qubits {
                return Err(Error::SiteOutOfRange {
                    site: s,
                    n_qubits: lines.n_qubits,
                });
            }
            if seen[s] {
                return Err(Error::DuplicateSite(s));
            }
            seen[s] = true;
            count[lines.owner[s]] += 1;
        }
        let open: Vec<usize> = (0..lines.n_pairs()).filter(|&k| count[k] == 2).collect();
        let open_idx: HashMap<usize, usize> = open.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let mut links: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lines.n_pairs()];
        for (&(p, q), &j) in &lines.couplings {
            if let Some(&i) = open_idx.get(&q) {
                links[p].push((i, j));
            }
            if let Some(&i) = open_idx.get(&p) {
                links[q].push((i, j));
            }
        }
        let units = links
            .into_iter()
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(k, l)| MiddleUnit {
                pair: k,
                touches_region: count[k] >= 1,
                links: l,
            })
            .collect();
        Ok(ReplicaChannel {
            renyi_n: n,
            region_size: region.len(),
            open,
            units,
            endcap_scale: 1.0,
        })
    }

    /// Number of replica configurations the evaluation enumerates.
    pub fn config_count(&self) -> u64 {
        let per = 1u64 << (2 * self.renyi_n - 1);
        let f = self.open.len() as u32;
        // Σ_k C(f,k) per^k = (1 + per)^f
        (1 + per).checked_pow(f).unwrap_or(u64::MAX)
    }

    pub fn evaluate(&self, mode: ContractionMode) -> Result<ChannelEvaluation> {
        if self.config_count() > MAX_CONFIGS {
            return Err(Error::Unsupported(format!(
                "{} open pairs at n={} exceed the enumeration budget; use --method brute or sample",
                self.open.len(),
                self.renyi_n
            )));
        }
        let f = self.open.len();
        let mut terms = Vec::with_capacity(1 << f);
        for mask in 0u32..1 << f {
            let subset: Vec<usize> = (0..f).filter(|i| mask >> i & 1 == 1).collect();
            let value = self.subset_value(&subset, mode);
            terms.push(ChannelTerm {
                subset: subset.iter().map(|&i| self.open[i]).collect(),
                value,
            });
        }
        Ok(ChannelEvaluation {
            log2_prefactor: f as i64 - self.region_size as i64,
            terms,
        })
    }

    fn subset_value(&self, subset: &[usize], mode: ContractionMode) -> Scaled {
        let reps = 2 * self.renyi_n;
        let pos: HashMap<usize, usize> = subset.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        // Middle units restricted to X: (touches, links as (slot, 2J)), with multiplicity.
        let mut grouped: Vec<(UnitKey, u64)> = Vec::new();
        let mut index: HashMap<UnitKey, usize> = HashMap::new();
        for u in &self.units {
            if subset.contains(&self.open_index(u.pair)) {
                continue;
            }
            let mut l: Vec<(usize, u64)> = u
                .links
                .iter()
                .filter_map(|&(i, j)| pos.get(&i).map(|&p| (p, (2.0 * j).to_bits())))
                .collect();
            if l.is_empty() {
                continue;
            }
            l.sort_unstable();
            let key = (u.touches_region, l);
            match mode {
                ContractionMode::Squaring => {
                    if let Some(&g) = index.get(&key) {
                        grouped[g].1 += 1;
                    } else {
                        index.insert(key.clone(), grouped.len());
                        grouped.push((key, 1));
                    }
                }
                ContractionMode::Linear => grouped.push((key, 1)),
            }
        }
        // Even-parity replica strings per open pair in X.
        let evens: Vec<u32> = (0u32..1 << reps).filter(|s| s.count_ones() % 2 == 0).collect();
        let k = subset.len();
        let total = (evens.len() as u64).pow(k as u32);
        let weight = Scaled::new(2.0 * self.endcap_scale / (1u64 << reps) as f64).powi(k as u64);
        let mut acc = Scaled::ZERO;
        let mut spins = vec![0u32; k];
        let mut theta = vec![0.0f64; reps];
        for c in 0..total {
            let mut rest = c;
            for s in spins.iter_mut() {
                *s = evens[(rest % evens.len() as u64) as usize];
                rest /= evens.len() as u64;
            }
            let mut prod = Scaled::ONE;
            for ((touches, links), mult) in &grouped {
                theta.iter_mut().for_each(|t| *t = 0.0);
                for &(p, jb) in links {
                    let two_j = f64::from_bits(jb);
                    for (r, t) in theta.iter_mut().enumerate() {
                        *t += if spins[p] >> r & 1 == 0 { two_j } else { -two_j };
                    }
                }
                let mut h: f64 = theta.iter().map(|t| t.cos()).product();
                if *touches {
                    h += theta.iter().map(|t| t.sin()).product::<f64>();
                }
                prod = prod * Scaled::new(h).powi(*mult);
                if prod.is_zero() {
                    break;
                }
            }
            acc = acc + prod;
        }
        acc * weight
    }

    fn open_index(&self, pair: usize) -> usize {
        self.open.iter().position(|&p| p == pair).unwrap_or(usize::MAX)
    }
}

/// `ζ_n` of a region of the evolved ring.
pub fn zeta_region(spec: &EvolutionSpec, region: &[usize], n: usize) -> Result<ChannelEvaluation> {
    let lines = WorldLines::trace(spec)?;
    ReplicaChannel::new(&lines, region, n)?.evaluate(ContractionMode::Linear)
}

fn partition_zeta(
    part: &PartitionSpec,
    params: GateParams,
    layers: usize,
    n: usize,
    region: Region,
) -> Result<ChannelEvaluation> {
    part.validate(layers)?;
    zeta_region(&part.evolution(params, layers), &part.sites(region), n)
}

/// `ζ_n(ρ_AB)` for B0.
pub fn zeta_b0(j_odd: f64, j_even: f64, layers: usize, n: usize) -> Result<f64> {
    Ok(partition_zeta(&PartitionSpec::b0(layers)?, GateParams::new(j_odd, j_even), layers, n, Region::AB)?.zeta())
}

pub fn ln_zeta_b0(j_odd: f64, j_even: f64, layers: usize, n: usize) -> Result<f64> {
    Ok(partition_zeta(&PartitionSpec::b0(layers)?, GateParams::new(j_odd, j_even), layers, n, Region::AB)?.ln_zeta())
}

/// `ζ_n` for B1; `Region::B` equals `Region::A` by symmetry.
pub fn zeta_b1(j_odd: f64, j_even: f64, layers: usize, n: usize, region: Region) -> Result<f64> {
    Ok(partition_zeta(&PartitionSpec::b1(layers)?, GateParams::new(j_odd, j_even), layers, n, region)?.zeta())
}

/// `M̃_2 = -ln(ζ_2/ζ_1)` of one region, through the lightcone contraction.
pub fn mixed_sre2_lightcone(spec: &EvolutionSpec, region: &[usize]) -> Result<f64> {
    let lines = WorldLines::trace(spec)?;
    let z2 = ReplicaChannel::new(&lines, region, 2)?.evaluate(ContractionMode::Linear)?;
    let z1 = ReplicaChannel::new(&lines, region, 1)?.evaluate(ContractionMode::Linear)?;
    Ok(z1.ln_zeta() - z2.ln_zeta())
}

/// A middle unit seen from a subset: whether it touches it, and its links.
type UnitKey = (bool, Vec<(usize, u64)>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Lightcone,
    Brute,
    Sample { samples: usize, seed: u64 },
}

/// `M̃_n` of one region from its lightcone contraction.
pub fn mixed_sre_lightcone(lines: &WorldLines, region: &[usize], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::RenyiOutOfRange { n, min: 2, max: MAX_LIGHTCONE_N });
    }
    let zn = ReplicaChannel::new(lines, region, n)?.evaluate(ContractionMode::Linear)?;
    let z1 = ReplicaChannel::new(lines, region, 1)?.evaluate(ContractionMode::Linear)?;
    Ok((zn.ln_zeta() - z1.ln_zeta()) / (1.0 - n as f64))
}

/// `L = M̃_n(ρ_AB) - M̃_n(ρ_A) - M̃_n(ρ_B)`.
pub fn long_range_sre_partition(
    part: &PartitionSpec,
    params: GateParams,
    layers: usize,
    n: usize,
    method: Method,
) -> Result<f64> {
    part.validate(layers)?;
    let spec = part.evolution(params, layers);
    let (ab, a, b) = (part.sites(Region::AB), part.sites(Region::A), part.sites(Region::B));
    match method {
        Method::Lightcone => {
            let lines = WorldLines::trace(&spec)?;
            let m = |r: &[usize]| mixed_sre_lightcone(&lines, r, n);
            Ok(m(&ab)? - m(&a)? - m(&b)?)
        }
        Method::Brute | Method::Sample { .. } => {
            check_brute(&spec, ab.len())?;
            let sv = Statevector::evolve(&spec)?;
            let rho_ab = sv.reduced_density_matrix(&ab)?;
            let rho_a = rho_ab.partial_trace(&a)?;
            let rho_b = rho_ab.partial_trace(&b)?;
            match method {
                Method::Brute => Ok(mixed_sre(&rho_ab, n)? - mixed_sre(&rho_a, n)? - mixed_sre(&rho_b, n)?),
                Method::Sample { samples, seed } => {
                    let s = |rho, k: u64| sampled_mixed_sre(rho, n, samples, seed.wrapping_add(k)).map(|r| r.0);
                    Ok(s(&rho_ab, 0)? - s(&rho_a, 1)? - s(&rho_b, 2)?)
                }
                Method::Lightcone => unreachable!(),
            }
        }
    }
}

/// Size guard for dense evaluation of a region of `ab_sites` qubits.
pub fn check_brute(spec: &EvolutionSpec, ab_sites: usize) -> Result<()> {
    if ab_sites > MAX_RDM_SITES || spec.n_qubits > MAX_BRUTE_QUBITS {
        return Err(Error::Unsupported(format!(
            "dense evaluation needs N_A+N_B <= {MAX_RDM_SITES} and N <= {MAX_BRUTE_QUBITS} \
             (got {} and {}); use --method lightcone",
            ab_sites, spec.n_qubits
        )));
    }
    Ok(())
}

/// Gates whose outputs reach `region`, counted backwards through the light cone.
pub fn gates_in_backward_lightcone(spec: &EvolutionSpec, region: &[usize]) -> Result<usize> {
    let layers = spec.build_layers()?;
    let mut live = vec![false; spec.n_qubits];
    for &s in region {
        live[s] = true;
    }
    let mut count = 0;
    for layer in layers.iter().rev() {
        for b in &layer.bonds {
            if live[b.left] || live[b.right] {
                live[b.left] = true;
                live[b.right] = true;
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Power-of-two bookkeeping of the diagrammatic B0 proof, from circuit counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarLedger {
    pub renyi_n: usize,
    pub layers: usize,
    /// `(stage label, log2 of the accumulated scalar)`
    pub stages: Vec<(&'static str, i64)>,
}

impl ScalarLedger {
    pub fn stage(&self, label: &str) -> Option<i64> {
        self.stages.iter().find(|s| s.0 == label).map(|s| s.1)
    }

    pub fn final_exponent(&self) -> i64 {
        self.stages.last().map_or(0, |s| s.1)
    }
}

/// Scalar ledger for B0 at depth `layers`.
///
/// Stages: unnormalised gates and Bell pairs; unitarity outside the
/// backward light cone; Λ and Λ_z written as spiders; unitarity of the gates
/// not on open world lines; removal of the open-pair Λ_x, Λ_z.
pub fn b0_scalar_ledger(layers: usize, n: usize) -> Result<ScalarLedger> {
    let part = PartitionSpec::b0(layers)?;
    let spec = part.evolution(GateParams::uniform(0.0), layers);
    let region = part.sites(Region::AB);
    let lines = WorldLines::trace(&spec)?;
    let chan = ReplicaChannel::new(&lines, &region, 1)?;
    let n = n as i64;
    let bell = (spec.n_qubits / 2) as i64;
    let gates = bell * layers as i64;
    let inside = gates_in_backward_lightcone(&spec, &region)? as i64;
    let outside = gates - inside;
    let open = chan.open.len() as i64;
    let surviving: i64 = lines
        .crossings
        .iter()
        .filter(|((p, q), _)| chan.open.contains(p) || chan.open.contains(q))
        .map(|(_, &c)| c as i64)
        .sum();
    let lz = region.len() as i64 - 2 * open;
    let lam = 2 * open;
    let c1 = 2 * n * (gates - bell);
    let c2 = c1 - 2 * n * outside;
    let c4 = c2 + (n - 1) * lz + (2 * n - 1) * lam;
    let c8 = c4 - 2 * n * (inside - surviving);
    let c11 = c8 - (2 * n - 1) * open;
    Ok(ScalarLedger {
        renyi_n: n as usize,
        layers,
        stages: vec![
            ("initial", c1),
            ("outside lightcone", c2),
            ("spider form", c4),
            ("inner gates", c8),
            ("final", c11),
        ],
    })
}

/// Geometry of the phase-state picture, for diagnostics.
pub fn describe(spec: &EvolutionSpec, region: &[usize]) -> Result<String> {
    let lines = WorldLines::trace(spec)?;
    let chan = ReplicaChannel::new(&lines, region, 1)?;
    Ok(format!(
        "pairs={} open={:?} linked_units={} couplings={}",
        lines.n_pairs(),
        chan.open,
        chan.units.len(),
        lines.couplings.len()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{f_n, g_n, zeta_b0_closed, ClosedFormInputs};
    use crate::pauli::stabilizer_purity;
    use std::f64::consts::PI;

    fn brute_zeta(part: &PartitionSpec, params: GateParams, t: usize, n: usize, r: Region) -> f64 {
        let sv = Statevector::evolve(&part.evolution(params, t)).unwrap();
        stabilizer_purity(&sv.reduced_density_matrix(&part.sites(r)).unwrap(), n).unwrap()
    }

    #[test]
    fn partition_geometry() {
        let b0 = PartitionSpec::b0(2).unwrap();
        assert_eq!(b0.n_qubits(), 12);
        assert_eq!(b0.sites(Region::A), vec![0, 1, 2, 3]);
        assert_eq!(b0.sites(Region::B), vec![6, 7, 8, 9]);
        let b1 = PartitionSpec::b1(2).unwrap();
        assert_eq!(b1.n_qubits(), 16);
        assert_eq!(b1.sites(Region::AB).len(), 12);
        assert_eq!(PartitionSpec::b0(3).unwrap().n_qubits(), 20);
        assert!(PartitionSpec::custom(3, 2, 1, 0).is_err());
        assert!(b0.validate(4).is_err());
    }

    #[test]
    fn b0_matches_brute_small() {
        let part = PartitionSpec::b0(2).unwrap();
        for &(a, b) in &[(0.3, 0.3), (0.1, 0.7), (0.5, 0.2)] {
            for n in 1..=3 {
                let lc = zeta_b0(a, b, 2, n).unwrap();
                let br = brute_zeta(&part, GateParams::new(a, b), 2, n, Region::AB);
                assert!((lc - br).abs() < 1e-12, "{a} {b} {n}: {lc} vs {br}");
            }
        }
    }

    #[test]
    fn b0_matches_closed_form() {
        for t in [2, 4, 6, 10] {
            for n in 1..=3 {
                let lc = zeta_b0(0.3, 0.5, t, n).unwrap();
                let cf = zeta_b0_closed(&ClosedFormInputs::new(0.3, 0.5, t, n)).unwrap();
                assert!((lc / cf - 1.0).abs() < 1e-9, "T={t} n={n}");
            }
        }
    }

    #[test]
    fn b0_terms_match_structure() {
        let (a, b, t, n) = (0.3, 0.5, 4usize, 2usize);
        let part = PartitionSpec::b0(t).unwrap();
        let ev = partition_zeta(&part, GateParams::new(a, b), t, n, Region::AB).unwrap();
        let open: Vec<usize> = ReplicaChannel::new(
            &WorldLines::trace(&part.evolution(GateParams::new(a, b), t)).unwrap(),
            &part.sites(Region::AB),
            n,
        )
        .unwrap()
        .open;
        assert_eq!(open.len(), 2);
        let norm = 2f64.powi(4 * t as i32 - 2);
        let ff = f_n(a, n) * f_n(b, n);
        assert!((ev.term(&[]).unwrap() * norm - 1.0).abs() < 1e-12);
        assert!((ev.term(&open[..1]).unwrap() * norm - ff.powi(t as i32)).abs() < 1e-12);
        assert!((ev.term(&open[1..]).unwrap() * norm - ff.powi(t as i32)).abs() < 1e-12);
        let g = g_n(a, b, n) * ff.powi(2 * t as i32 - 4);
        assert!((ev.term(&open).unwrap() * norm - g).abs() < 1e-12);
    }

    #[test]
    fn squaring_mode_agrees() {
        let part = PartitionSpec::b0(6).unwrap();
        let spec = part.evolution(GateParams::new(0.2, 0.45), 6);
        let lines = WorldLines::trace(&spec).unwrap();
        let ch = ReplicaChannel::new(&lines, &part.sites(Region::AB), 2).unwrap();
        let a = ch.evaluate(ContractionMode::Linear).unwrap().zeta();
        let b = ch.evaluate(ContractionMode::Squaring).unwrap().zeta();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn b1_matches_brute() {
        let part = PartitionSpec::b1(2).unwrap();
        let p = GateParams::new(0.3, 0.6);
        for (n, r) in [(1, Region::AB), (2, Region::AB), (2, Region::A), (2, Region::B), (3, Region::A)] {
            let lc = zeta_b1(p.j_odd, p.j_even, 2, n, r).unwrap();
            let br = brute_zeta(&part, p, 2, n, r);
            assert!((lc - br).abs() < 1e-10, "{n} {r:?}: {lc} vs {br}");
        }
    }

    #[test]
    fn odd_depth_matches_brute() {
        let part = PartitionSpec::b0(3).unwrap();
        let p = GateParams::uniform(PI / 8.0);
        let sites = part.sites(Region::A);
        let spec = part.evolution(p, 3);
        let lc = zeta_region(&spec, &sites, 2).unwrap().zeta();
        let sv = Statevector::evolve(&spec).unwrap();
        let br = stabilizer_purity(&sv.reduced_density_matrix(&sites).unwrap(), 2).unwrap();
        assert!((lc - br).abs() < 1e-12);
    }

    #[test]
    fn long_times_underflow_safely() {
        let l = ln_zeta_b0(0.4, 0.4, 400, 2).unwrap() - ln_zeta_b0(0.4, 0.4, 400, 1).unwrap();
        assert!((-l - 2.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn ledger_matches_proof_exponents() {
        for t in [2i64, 4, 6] {
            for n in 1..=3i64 {
                let led = b0_scalar_ledger(t as usize, n as usize).unwrap();
                assert_eq!(led.stage("initial"), Some(n * (8 * t * t - 12 * t + 4)));
                assert_eq!(led.stage("outside lightcone"), Some(n * (6 * t * t - 10 * t + 4)));
                assert_eq!(led.stage("spider form"), Some(n * (6 * t * t - 6 * t + 8) - 4 * t));
                assert_eq!(led.stage("inner gates"), Some(4 * n * t + 8 * n - 4 * t));
                assert_eq!(led.final_exponent(), 4 * n * t + 4 * n - 4 * t + 2);
            }
        }
    }

    #[test]
    fn clifford_l_is_zero() {
        for part in [PartitionSpec::b0(2).unwrap(), PartitionSpec::b1(2).unwrap()] {
            let l = long_range_sre_partition(&part, GateParams::uniform(0.0), 2, 2, Method::Lightcone).unwrap();
            assert!(l.abs() < 1e-10);
        }
    }

    #[test]
    fn budget_guard() {
        let part = PartitionSpec::custom(12, 12, 0, 0).unwrap();
        let spec = part.evolution(GateParams::uniform(0.3), 1);
        let r = zeta_region(&spec, &part.sites(Region::AB), 3);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
