//! Pauli strings, Pauli spectra and stabilizer Renyi entropies.
//!
//! A Pauli string on `m` sites is indexed by `Σ_k code_k 4^k` with codes
//! I=0, X=1, Y=2, Z=3. The label lists site 0 first.

use crate::error::{Error, Result};
use crate::statevec::{DensityMatrix, Statevector};
use crate::C64;
use rayon::prelude::*;
use std::fmt;
use std::io::Write;

pub const MAX_PAULI_SITES: usize = 32;
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn code(self) -> u64 {
        self as u64
    }

    pub fn from_code(c: u64) -> Pauli {
        Pauli::ALL[(c & 3) as usize]
    }

    pub fn symbol(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Pauli string on at most 32 sites, two bits per site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    len: usize,
    word: u64,
}

impl PauliString {
    pub fn identity(len: usize) -> Result<Self> {
        Self::from_index(len, 0)
    }

    pub fn from_index(len: usize, index: u64) -> Result<Self> {
        if len > MAX_PAULI_SITES {
            return Err(Error::InvalidArgument(format!(
                "Pauli strings hold at most {MAX_PAULI_SITES} sites"
            )));
        }
        if len < MAX_PAULI_SITES && index >> (2 * len) != 0 {
            return Err(Error::InvalidArgument(format!(
                "index {index} too large for {len} sites"
            )));
        }
        Ok(PauliString { len, word: index })
    }

    pub fn from_paulis(ps: &[Pauli]) -> Result<Self> {
        let word = ps
            .iter()
            .enumerate()
            .fold(0u64, |w, (k, p)| w | p.code() << (2 * k));
        Self::from_index(ps.len(), word)
    }

    pub fn parse(label: &str) -> Result<Self> {
        let ps: Result<Vec<Pauli>> = label
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::Parse {
                    line: 0,
                    msg: format!("bad Pauli symbol {ch:?}"),
                }),
            })
            .collect();
        Self::from_paulis(&ps?)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self) -> u64 {
        self.word
    }

    pub fn get(&self, site: usize) -> Pauli {
        Pauli::from_code(self.word >> (2 * site))
    }

    pub fn weight(&self) -> usize {
        (0..self.len).filter(|&k| self.get(k) != Pauli::I).count()
    }

    /// Sites with X or Y, as a bit mask.
    pub fn flip_mask(&self) -> usize {
        (0..self.len)
            .filter(|&k| matches!(self.get(k), Pauli::X | Pauli::Y))
            .fold(0, |m, k| m | 1 << k)
    }

    /// Sites with Y or Z, as a bit mask.
    pub fn phase_mask(&self) -> usize {
        (0..self.len)
            .filter(|&k| matches!(self.get(k), Pauli::Y | Pauli::Z))
            .fold(0, |m, k| m | 1 << k)
    }

    pub fn y_count(&self) -> usize {
        (0..self.len).filter(|&k| self.get(k) == Pauli::Y).count()
    }

    pub fn label(&self) -> String {
        (0..self.len).map(|k| self.get(k).symbol()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn i_pow(k: usize) -> C64 {
    [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ][k % 4]
}

/// `⟨ψ|P|ψ⟩` with site `k` of `p` acting on qubit `k`.
pub fn pauli_expectation(state: &Statevector, p: &PauliString) -> Result<f64> {
    if p.len() != state.n_qubits() {
        return Err(Error::LengthMismatch {
            expected: state.n_qubits(),
            found: p.len(),
        });
    }
    let amps = state.amplitudes();
    let (fm, pm) = (p.flip_mask(), p.phase_mask());
    let mut acc = C64::new(0.0, 0.0);
    for (idx, a) in amps.iter().enumerate() {
        let sign = if (idx & pm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += amps[idx ^ fm].conj() * a * sign;
    }
    acc *= i_pow(p.y_count());
    if acc.im.abs() > IMAG_TOL {
        return Err(Error::NonRealExpectation {
            label: p.label(),
            imag: acc.im,
        });
    }
    Ok(acc.re)
}

/// All `tr(P ρ)` of a density matrix, in Pauli-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSpectrum {
    n_sites: usize,
    values: Vec<f64>,
}

/// Spread the low 16 bits of `x` to even positions.
fn spread(x: usize) -> u64 {
    let mut x = x as u64 & 0xffff;
    x = (x | (x << 8)) & 0x00ff00ff;
    x = (x | (x << 4)) & 0x0f0f0f0f;
    x = (x | (x << 2)) & 0x33333333;
    x = (x | (x << 1)) & 0x55555555;
    x
}

/// Per-qubit fast transform: each 2×2 block `(a00, a01, a10, a11)` becomes
/// `(a00+a11, a01+a10, i(a01-a10), a00-a11)` = traces against I, X, Y, Z.
pub fn fast_pauli_transform(rho: &DensityMatrix) -> Result<PauliSpectrum> {
    let m = rho.n_sites();
    let dim = rho.dim();
    let mut a = rho.data().to_vec();
    let i = C64::new(0.0, 1.0);
    for q in 0..m {
        let bit = 1usize << q;
        a.par_chunks_mut(2 * bit * dim).for_each(|block| {
            let (top, bottom) = block.split_at_mut(bit * dim);
            for (row0, row1) in top.chunks_mut(dim).zip(bottom.chunks_mut(dim)) {
                for c in (0..dim).filter(|c| c & bit == 0) {
                    let (a00, a01) = (row0[c], row0[c | bit]);
                    let (a10, a11) = (row1[c], row1[c | bit]);
                    row0[c] = a00 + a11;
                    row0[c | bit] = a01 + a10;
                    row1[c] = i * (a01 - a10);
                    row1[c | bit] = a00 - a11;
                }
            }
        });
    }
    // Code per qubit is 2*row_bit + col_bit.
    let mut values = vec![0.0; dim * dim];
    let mut worst = (0.0f64, 0usize);
    for r in 0..dim {
        let hi = spread(r) << 1 | spread(r >> 16) << 33;
        for c in 0..dim {
            let idx = (hi | spread(c) | spread(c >> 16) << 32) as usize;
            let z = a[r * dim + c];
            if z.im.abs() > worst.0 {
                worst = (z.im.abs(), idx);
            }
            values[idx] = z.re;
        }
    }
    if worst.0 > IMAG_TOL {
        return Err(Error::NonRealExpectation {
            label: PauliString::from_index(m, worst.1 as u64)?.label(),
            imag: worst.0,
        });
    }
    Ok(PauliSpectrum { n_sites: m, values })
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

impl PauliSpectrum {
    pub fn from_density_matrix(rho: &DensityMatrix) -> Result<Self> {
        fast_pauli_transform(rho)
    }

    /// Slow reference: one trace per Pauli string.
    pub fn by_enumeration(rho: &DensityMatrix) -> Result<Self> {
        let m = rho.n_sites();
        let dim = rho.dim();
        let mut values = vec![0.0; dim * dim];
        for (idx, v) in values.iter_mut().enumerate() {
            let p = PauliString::from_index(m, idx as u64)?;
            let (fm, pm) = (p.flip_mask(), p.phase_mask());
            let ph = i_pow(p.y_count());
            // tr(Pρ) = Σ_c ⟨c|Pρ|c⟩, P|b⟩ = ph (-1)^{b·pm} |b⊕fm⟩
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..dim {
                let sign = if (b & pm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += rho.get(b, b ^ fm) * ph * sign;
            }
            if acc.im.abs() > IMAG_TOL {
                return Err(Error::NonRealExpectation {
                    label: p.label(),
                    imag: acc.im,
                });
            }
            *v = acc.re;
        }
        Ok(PauliSpectrum { n_sites: m, values })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `tr ρ²` from Parseval.
    pub fn purity(&self) -> f64 {
        compensated_sum(self.values.iter().map(|v| v * v)) / (1u64 << self.n_sites) as f64
    }

    /// `ζ_n = 2^{-m} Σ_P tr(Pρ)^{2n}`
    pub fn stabilizer_purity(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::RenyiOutOfRange { n, min: 1, max: usize::MAX });
        }
        let e = (2 * n) as i32;
        Ok(compensated_sum(self.values.iter().map(|v| v.powi(e))) / (1u64 << self.n_sites) as f64)
    }

    /// `M̃_n = ln(ζ_n/ζ_1)/(1-n)`, natural log.
    pub fn mixed_sre(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::RenyiOutOfRange { n, min: 2, max: usize::MAX });
        }
        let zn = self.stabilizer_purity(n)?;
        let z1 = self.stabilizer_purity(1)?;
        Ok((zn / z1).ln() / (1.0 - n as f64))
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "pauli_index,pauli_label,expectation")?;
        for (idx, v) in self.values.iter().enumerate() {
            let p = PauliString::from_index(self.n_sites, idx as u64)?;
            writeln!(w, "{idx},{p},{v:.17e}")?;
        }
        Ok(())
    }
}

pub fn stabilizer_purity(rho: &DensityMatrix, n: usize) -> Result<f64> {
    PauliSpectrum::from_density_matrix(rho)?.stabilizer_purity(n)
}

/// `M_n(|ψ⟩) = ln(ζ_n)/(1-n)` for a pure state.
pub fn sre(state: &Statevector, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::RenyiOutOfRange { n, min: 2, max: usize::MAX });
    }
    let spec = PauliSpectrum::from_density_matrix(&state.density_matrix()?)?;
    Ok(spec.stabilizer_purity(n)?.ln() / (1.0 - n as f64))
}

pub fn mixed_sre(rho: &DensityMatrix, n: usize) -> Result<f64> {
    PauliSpectrum::from_density_matrix(rho)?.mixed_sre(n)
}

/// `L = M̃_2(ρ_AB) - M̃_2(ρ_A) - M̃_2(ρ_B)`
pub fn long_range_sre(
    rho_ab: &DensityMatrix,
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
) -> Result<f64> {
    let ab = rho_ab.sites();
    for &s in rho_a.sites() {
        if rho_b.sites().contains(&s) {
            return Err(Error::InvalidPartition(format!("site {s} in both A and B")));
        }
    }
    let mut union: Vec<usize> = rho_a.sites().iter().chain(rho_b.sites()).cloned().collect();
    union.sort_unstable();
    let mut sorted_ab = ab.to_vec();
    sorted_ab.sort_unstable();
    if union != sorted_ab {
        return Err(Error::InvalidPartition(
            "sites of A and B do not make up AB".into(),
        ));
    }
    Ok(mixed_sre(rho_ab, 2)? - mixed_sre(rho_a, 2)? - mixed_sre(rho_b, 2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{EvolutionSpec, GateParams};
    use proptest::prelude::*;

    fn t_state() -> Statevector {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Statevector::from_amplitudes(1, vec![C64::new(a, 0.0), C64::from_polar(a, std::f64::consts::FRAC_PI_4)])
            .unwrap()
    }

    #[test]
    fn labels_and_indices() {
        let p = PauliString::parse("XIZY").unwrap();
        assert_eq!(p.index(), 1 + 3 * 16 + 2 * 64);
        assert_eq!(p.label(), "XIZY");
        assert_eq!(PauliString::identity(3).unwrap().index(), 0);
        assert_eq!(p.weight(), 3);
        assert!(PauliString::from_index(2, 16).is_err());
    }

    #[test]
    fn t_state_sre() {
        // ζ_2 = (1 + 1/4 + 1/4)/2
        let m2 = sre(&t_state(), 2).unwrap();
        assert!((m2 - (4.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn bell_pairs_are_stabilizer() {
        let sv = Statevector::bell_product(6).unwrap();
        assert!(sre(&sv, 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn transform_matches_enumeration() {
        let sv = Statevector::evolve(&EvolutionSpec::new(8, 3, GateParams::new(0.3, 0.8))).unwrap();
        let rho = sv.reduced_density_matrix(&[5, 0, 2, 3]).unwrap();
        let fast = fast_pauli_transform(&rho).unwrap();
        let slow = PauliSpectrum::by_enumeration(&rho).unwrap();
        for (a, b) in fast.values().iter().zip(slow.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((fast.purity() - rho.purity()).abs() < 1e-12);
        assert!((fast.values()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_spectrum() {
        let sv = Statevector::evolve(&EvolutionSpec::new(6, 2, GateParams::new(0.3, 0.8))).unwrap();
        let spec = fast_pauli_transform(&sv.density_matrix().unwrap()).unwrap();
        for idx in [0u64, 5, 77, 1234, 4095] {
            let p = PauliString::from_index(6, idx).unwrap();
            let e = pauli_expectation(&sv, &p).unwrap();
            assert!((e - spec.values()[idx as usize]).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_input_flagged() {
        let mut data = vec![C64::new(0.0, 0.0); 4];
        data[0] = C64::new(1.0, 0.0);
        data[1] = C64::new(0.5, 0.0);
        let rho = DensityMatrix::from_raw(vec![0], data).unwrap();
        assert!(matches!(
            fast_pauli_transform(&rho),
            Err(Error::NonRealExpectation { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let rho = Statevector::bell_product(2).unwrap().density_matrix().unwrap();
        let mut out = Vec::new();
        fast_pauli_transform(&rho).unwrap().write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "pauli_index,pauli_label,expectation");
        assert_eq!(lines.len(), 17);
        assert!(lines[1].starts_with("0,II,1.0"));
        assert!(lines[6].starts_with("5,XX,1.0"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn index_roundtrip(len in 0usize..=32, raw in any::<u64>()) {
            let idx = if len == 32 { raw } else { raw & ((1u64 << (2 * len)) - 1) };
            let p = PauliString::from_index(len, idx).unwrap();
            prop_assert_eq!(PauliString::parse(&p.label()).unwrap(), p);
        }

        #[test]
        fn site_order_does_not_matter(jo in 0.0f64..1.6, je in 0.0f64..1.6) {
            let sv = Statevector::evolve(&EvolutionSpec::new(6, 2, GateParams::new(jo, je))).unwrap();
            let rho = sv.reduced_density_matrix(&[0, 1, 2]).unwrap();
            let spec = fast_pauli_transform(&rho).unwrap();
            let swapped = sv.reduced_density_matrix(&[2, 0, 1]).unwrap();
            let spec2 = fast_pauli_transform(&swapped).unwrap();
            for n in 1..=3 {
                let a = spec.stabilizer_purity(n).unwrap();
                let b = spec2.stabilizer_purity(n).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!(spec.stabilizer_purity(2).unwrap() <= 8.0 * spec.purity() * spec.purity() + 1e-12);
        }
    }
}
