//! Dense statevector simulation and reduced density matrices.
//!
//! Little-endian: site `k` is bit `k` of the basis index.

use crate::circuit::{EvolutionSpec, Gate4, Layer, LayerConvention};
use crate::error::{check_dense, Error, Result};
use crate::C64;
use rayon::prelude::*;
use std::io::{Read, Write};
use std::path::Path;

pub const MAX_STATE_QUBITS: usize = 26;
pub const MAX_RDM_SITES: usize = 13;
const MAGIC: &[u8; 8] = b"MAGICSV1";

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

fn check_state_size(n: usize) -> Result<()> {
    if n > MAX_STATE_QUBITS {
        return Err(Error::MemoryGuard {
            what: format!("statevector on {n} qubits"),
            bytes: 16u128 << n,
            limit: 16u128 << MAX_STATE_QUBITS,
        });
    }
    Ok(())
}

/// Expand `x` by inserting zero bits at the (ascending) positions in `holes`.
#[inline]
fn insert_zeros(mut x: usize, holes: &[usize]) -> usize {
    for &h in holes {
        let low = x & ((1 << h) - 1);
        x = ((x >> h) << (h + 1)) | low;
    }
    x
}

/// Gather the bits of `x` at `positions` into a packed integer, first position lowest.
#[cfg(test)]
fn gather_bits(x: usize, positions: &[usize]) -> usize {
    let mut out = 0;
    for (k, &p) in positions.iter().enumerate() {
        out |= ((x >> p) & 1) << k;
    }
    out
}

impl Statevector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_state_size(n_qubits)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_state_size(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::LengthMismatch {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        Ok(Statevector { n_qubits, amps })
    }

    /// `⊗_i |Φ+⟩` on bonds (2i, 2i+1).
    pub fn bell_product(n_qubits: usize) -> Result<Self> {
        Self::bell_product_with(n_qubits, LayerConvention::OddBondsFirst)
    }

    pub fn bell_product_with(n_qubits: usize, conv: LayerConvention) -> Result<Self> {
        if n_qubits < 2 || !n_qubits.is_multiple_of(2) {
            return Err(Error::OddQubitCount(n_qubits));
        }
        check_state_size(n_qubits)?;
        let pairs = n_qubits / 2;
        let off = conv.pair_offset();
        let amp = C64::new(0.5f64.powf(pairs as f64 / 2.0), 0.0);
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        for s in 0..1usize << pairs {
            let mut idx = 0;
            for i in 0..pairs {
                if s >> i & 1 == 1 {
                    idx |= 1 << ((2 * i + off) % n_qubits);
                    idx |= 1 << ((2 * i + 1 + off) % n_qubits);
                }
            }
            amps[idx] = amp;
        }
        Ok(Statevector { n_qubits, amps })
    }

    /// Bell product followed by every layer of `spec`.
    pub fn evolve(spec: &EvolutionSpec) -> Result<Self> {
        let layers = spec.build_layers()?;
        let mut sv = Self::bell_product_with(spec.n_qubits, spec.convention)?;
        for l in &layers {
            sv.apply_layer(l)?;
        }
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_site(&self, s: usize) -> Result<()> {
        if s >= self.n_qubits {
            return Err(Error::SiteOutOfRange {
                site: s,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Apply `gate` with site `i` as the first kron factor.
    pub fn apply_two_qubit_gate(&mut self, gate: &Gate4, i: usize, j: usize) -> Result<()> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(Error::DuplicateSite(i));
        }
        let holes = [i.min(j), i.max(j)];
        let (bi, bj) = (1usize << i, 1usize << j);
        let g = *gate;
        let quarter = self.amps.len() >> 2;
        let amps = &mut self.amps;
        for x in 0..quarter {
            let base = insert_zeros(x, &holes);
            let idx = [base, base | bj, base | bi, base | bi | bj];
            let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for r in 0..4 {
                amps[idx[r]] = g[(r, 0)] * v[0] + g[(r, 1)] * v[1] + g[(r, 2)] * v[2] + g[(r, 3)] * v[3];
            }
        }
        Ok(())
    }

    pub fn apply_layer(&mut self, layer: &Layer) -> Result<()> {
        for b in &layer.bonds {
            self.apply_two_qubit_gate(&layer.gate, b.left, b.right)?;
        }
        Ok(())
    }

    /// Relabel site `k` as `k + shift (mod N)`.
    pub fn translate(&self, shift: usize) -> Statevector {
        let n = self.n_qubits;
        let mask = (1usize << n) - 1;
        let s = shift % n;
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let rot = if s == 0 {
                idx
            } else {
                ((idx << s) | (idx >> (n - s))) & mask
            };
            amps[rot] = *a;
        }
        Statevector { n_qubits: n, amps }
    }

    /// Reduced density matrix on `sites`; `sites[0]` becomes bit 0.
    pub fn reduced_density_matrix(&self, sites: &[usize]) -> Result<DensityMatrix> {
        let m = sites.len();
        let mut seen = vec![false; self.n_qubits];
        for &s in sites {
            self.check_site(s)?;
            if seen[s] {
                return Err(Error::DuplicateSite(s));
            }
            seen[s] = true;
        }
        if m > MAX_RDM_SITES {
            return Err(Error::MemoryGuard {
                what: format!("density matrix on {m} sites"),
                bytes: 16u128 << (2 * m),
                limit: 16u128 << (2 * MAX_RDM_SITES),
            });
        }
        let rest: Vec<usize> = (0..self.n_qubits).filter(|&s| !seen[s]).collect();
        let dim = 1usize << m;
        let env = 1usize << rest.len();
        check_dense("purification matrix", (dim * env * 16) as u128)?;
        // a[r * env + e] = ψ(r, e)
        let mut a = vec![C64::new(0.0, 0.0); dim * env];
        let pos: Vec<usize> = (0..dim).map(|r| scatter(r, sites)).collect();
        let epos: Vec<usize> = (0..env).map(|e| scatter(e, &rest)).collect();
        for r in 0..dim {
            for e in 0..env {
                a[r * env + e] = self.amps[pos[r] | epos[e]];
            }
        }
        let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
        rho.par_chunks_mut(dim).enumerate().for_each(|(r1, row)| {
            let a1 = &a[r1 * env..(r1 + 1) * env];
            for (r2, out) in row.iter_mut().enumerate().skip(r1) {
                let a2 = &a[r2 * env..(r2 + 1) * env];
                let mut re = 0.0;
                let mut im = 0.0;
                for (x, y) in a1.iter().zip(a2) {
                    re += x.re * y.re + x.im * y.im;
                    im += x.im * y.re - x.re * y.im;
                }
                *out = C64::new(re, im);
            }
        });
        for r1 in 0..dim {
            for r2 in 0..r1 {
                rho[r1 * dim + r2] = rho[r2 * dim + r1].conj();
            }
        }
        Ok(DensityMatrix {
            sites: sites.to_vec(),
            dim,
            data: rho,
        })
    }

    /// Projector `|ψ⟩⟨ψ|` on all sites.
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        let sites: Vec<usize> = (0..self.n_qubits).collect();
        self.reduced_density_matrix(&sites)
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_dump(w, self.n_qubits, &self.amps)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let (n, amps) = read_dump(r)?;
        Self::from_amplitudes(n, amps)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_binary(&mut f)
    }
}

fn scatter(x: usize, positions: &[usize]) -> usize {
    let mut out = 0;
    for (k, &p) in positions.iter().enumerate() {
        out |= ((x >> k) & 1) << p;
    }
    out
}

fn write_dump<W: Write>(w: &mut W, n: usize, vals: &[C64]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    for v in vals {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_dump<R: Read>(r: &mut R) -> Result<(usize, Vec<C64>)> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if &head[..8] != MAGIC {
        return Err(Error::Parse {
            line: 0,
            msg: "bad magic bytes".into(),
        });
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if rest.len() % 16 != 0 {
        return Err(Error::Parse {
            line: 0,
            msg: "truncated amplitude data".into(),
        });
    }
    let vals = rest
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((n, vals))
}

/// Dense Hermitian matrix on a list of sites, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    sites: Vec<usize>,
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_raw(sites: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let dim = 1usize << sites.len();
        if data.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(DensityMatrix { sites, dim, data })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue; exact diagonalisation, intended for small matrices.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = nalgebra::DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c));
        m.symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Partial trace keeping `keep` (a subset of `self.sites()`), in that order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut pos = Vec::with_capacity(keep.len());
        for &s in keep {
            let p = self
                .sites
                .iter()
                .position(|&x| x == s)
                .ok_or(Error::InvalidArgument(format!("site {s} not in density matrix")))?;
            if pos.contains(&p) {
                return Err(Error::DuplicateSite(s));
            }
            pos.push(p);
        }
        let rest: Vec<usize> = (0..self.sites.len()).filter(|p| !pos.contains(p)).collect();
        let dk = 1usize << keep.len();
        let de = 1usize << rest.len();
        let kpos: Vec<usize> = (0..dk).map(|k| scatter(k, &pos)).collect();
        let epos: Vec<usize> = (0..de).map(|e| scatter(e, &rest)).collect();
        let mut out = vec![C64::new(0.0, 0.0); dk * dk];
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for &e in &epos {
                    acc += self.get(kpos[r] | e, kpos[c] | e);
                }
                out[r * dk + c] = acc;
            }
        }
        DensityMatrix::from_raw(keep.to_vec(), out)
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        write_dump(w, self.sites.len(), &self.data)
    }

    /// Reads a dump; the sites are labelled `0..m`.
    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let (m, data) = read_dump(r)?;
        Self::from_raw((0..m).collect(), data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{du_xxz_gate, GateParams};

    #[test]
    fn bell_four_qubits() {
        let sv = Statevector::bell_product(4).unwrap();
        let h = 0.5;
        for idx in [0b0000, 0b0011, 0b1100, 0b1111] {
            assert!((sv.amplitudes()[idx].re - h).abs() < 1e-15);
        }
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gate_ordering_first_site_is_high_bit() {
        // |b_i b_j⟩ = |1 0⟩ on (i, j) = (0, 3) is index 1.
        let mut amps = vec![C64::new(0.0, 0.0); 16];
        amps[1] = C64::new(1.0, 0.0);
        let mut sv = Statevector::from_amplitudes(4, amps).unwrap();
        sv.apply_two_qubit_gate(&du_xxz_gate(0.2), 0, 3).unwrap();
        // SWAP moves the excitation to site 3, phase e^{+iJ}.
        let a = sv.amplitudes()[8];
        assert!((a - C64::from_polar(1.0, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn evolution_is_norm_preserving() {
        let spec = EvolutionSpec::new(8, 5, GateParams::new(0.3, 0.7));
        let sv = Statevector::evolve(&spec).unwrap();
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_is_translation() {
        let spec = EvolutionSpec::new(8, 3, GateParams::new(0.3, 0.5));
        let a = Statevector::evolve(&spec).unwrap();
        let b = Statevector::evolve(&spec.with_convention(LayerConvention::EvenBondsFirst)).unwrap();
        let overlap = a.translate(1).inner(&b).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rdm_properties() {
        let spec = EvolutionSpec::new(10, 3, GateParams::new(0.3, 0.5));
        let sv = Statevector::evolve(&spec).unwrap();
        let rho = sv.reduced_density_matrix(&[7, 1, 2, 4]).unwrap();
        assert!((rho.trace() - 1.0).norm() < 1e-12);
        assert!(rho.hermiticity_residual() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-12);
        let sub = rho.partial_trace(&[2, 7]).unwrap();
        let direct = sv.reduced_density_matrix(&[2, 7]).unwrap();
        for (x, y) in sub.data().iter().zip(direct.data()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn full_projector_purity() {
        let sv = Statevector::evolve(&EvolutionSpec::new(6, 2, GateParams::uniform(0.4))).unwrap();
        let rho = sv.density_matrix().unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rdm_guards() {
        let sv = Statevector::bell_product(4).unwrap();
        assert!(matches!(sv.reduced_density_matrix(&[0, 0]), Err(Error::DuplicateSite(0))));
        assert!(matches!(
            sv.reduced_density_matrix(&[4]),
            Err(Error::SiteOutOfRange { .. })
        ));
        let big = Statevector::zero(14).unwrap();
        let all: Vec<usize> = (0..14).collect();
        assert!(matches!(big.reduced_density_matrix(&all), Err(Error::MemoryGuard { .. })));
    }

    #[test]
    fn dump_roundtrip() {
        let sv = Statevector::evolve(&EvolutionSpec::new(6, 2, GateParams::uniform(0.4))).unwrap();
        let mut buf = Vec::new();
        sv.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"MAGICSV1");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 6);
        assert_eq!(buf.len(), 12 + 16 * 64);
        let back = Statevector::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, sv);
        buf[0] = b'X';
        assert!(Statevector::read_binary(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn gather_scatter_inverse() {
        let pos = [5, 0, 3];
        for x in 0..8 {
            assert_eq!(gather_bits(scatter(x, &pos), &pos), x);
        }
    }
}
