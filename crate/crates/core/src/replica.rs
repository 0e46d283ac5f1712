//! Replica tensors and the transfer matrix of the half-step state.
//!
//! Replicas are interleaved `(ψ, ψ*, ψ, ψ*, …)`, replica 0 being the most
//! significant kron factor.

use crate::circuit::GateParams;
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::statevec::Statevector;
use crate::C64;
use nalgebra::{DMatrix, DVector};

pub type CMatrix = DMatrix<C64>;

pub const MAX_LAMBDA_N: usize = 4;
pub const MAX_TRANSFER_N: usize = 3;

fn cz() -> C64 {
    C64::new(0.0, 0.0)
}

fn pauli_matrix(p: Pauli) -> CMatrix {
    let m = p.matrix();
    CMatrix::from_fn(2, 2, |r, c| m[r][c])
}

fn kron_power(parts: &[CMatrix]) -> CMatrix {
    parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, p| acc.kronecker(p))
}

/// Dense operator on `2n` replica qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaTensor {
    pub renyi_n: usize,
    pub data: CMatrix,
}

impl ReplicaTensor {
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

#[derive(Clone, Debug)]
pub struct LambdaTensors {
    pub full: ReplicaTensor,
    pub x: ReplicaTensor,
    pub z: ReplicaTensor,
}

fn check_lambda_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_LAMBDA_N {
        return Err(Error::RenyiOutOfRange {
            n,
            min: 1,
            max: MAX_LAMBDA_N,
        });
    }
    Ok(())
}

/// `Λ = ½ Σ_α (σ_α ⊗ σ_α*)^{⊗n}`, `Λ_x = (1 + X^{⊗2n})/2`, `Λ_z = (1 + Z^{⊗2n})/2`.
pub fn lambda_tensors(n: usize) -> Result<LambdaTensors> {
    check_lambda_n(n)?;
    let dim = 1usize << (2 * n);
    let mut full = CMatrix::zeros(dim, dim);
    for p in Pauli::ALL {
        let s = pauli_matrix(p);
        let parts: Vec<CMatrix> = (0..2 * n)
            .map(|r| if r % 2 == 0 { s.clone() } else { s.map(|z| z.conj()) })
            .collect();
        full += kron_power(&parts);
    }
    full *= C64::new(0.5, 0.0);
    let id = CMatrix::identity(dim, dim);
    let string = |p: Pauli| kron_power(&vec![pauli_matrix(p); 2 * n]);
    let x = (&id + string(Pauli::X)) * C64::new(0.5, 0.0);
    let z = (&id + string(Pauli::Z)) * C64::new(0.5, 0.0);
    Ok(LambdaTensors {
        full: ReplicaTensor { renyi_n: n, data: full },
        x: ReplicaTensor { renyi_n: n, data: x },
        z: ReplicaTensor { renyi_n: n, data: z },
    })
}

/// `⟨b|Λ|c⟩` without building the tensor: 1 iff `b ⊕ c ∈ {0, 1…1}` and `|c|` is even.
pub fn lambda_entry(n: usize, b: usize, c: usize) -> f64 {
    let all = (1usize << (2 * n)) - 1;
    let x = b ^ c;
    if (x == 0 || x == all) && c.count_ones().is_multiple_of(2) {
        1.0
    } else {
        0.0
    }
}

/// Two-site unit cell of the half-step state, sites `(2i+1, 2i+2)`.
///
/// `A[p1 p2][l r] = δ(p2, l) δ(p1, r) e^{-iJ s_l s_r}/√2`; the bond carries
/// the value of the Bell pair it cuts.
#[derive(Clone, Debug)]
pub struct MpsUnitCell {
    pub j: f64,
    /// `tensor[2*p1 + p2][2*l + r]`
    pub tensor: [[C64; 4]; 4],
}

fn spin(b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn half_step_unit_cell(j: f64) -> MpsUnitCell {
    let mut tensor = [[cz(); 4]; 4];
    for l in 0..2 {
        for r in 0..2 {
            tensor[2 * r + l][2 * l + r] =
                C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -j * spin(l) * spin(r));
        }
    }
    MpsUnitCell { j, tensor }
}

impl MpsUnitCell {
    pub fn params(&self) -> GateParams {
        GateParams::uniform(self.j)
    }

    /// Ring of `n_cells` cells, cell `i` on sites `(2i+1, 2i+2 mod N)`.
    pub fn reconstruct(&self, n_cells: usize) -> Result<Statevector> {
        let n = 2 * n_cells;
        if n_cells == 0 || n > 20 {
            return Err(Error::InvalidArgument(format!(
                "ring reconstruction supports 1..=10 cells, got {n_cells}"
            )));
        }
        let mut amps = vec![cz(); 1 << n];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let mut m = [[C64::new(1.0, 0.0), cz()], [cz(), C64::new(1.0, 0.0)]];
            for i in 0..n_cells {
                let p1 = (idx >> (2 * i + 1)) & 1;
                let p2 = (idx >> ((2 * i + 2) % n)) & 1;
                let a = &self.tensor[2 * p1 + p2];
                let mut next = [[cz(); 2]; 2];
                for (row, nrow) in m.iter().zip(next.iter_mut()) {
                    for (r, out) in nrow.iter_mut().enumerate() {
                        *out = row[0] * a[r] + row[1] * a[2 + r];
                    }
                }
                m = next;
            }
            *amp = m[0][0] + m[1][1];
        }
        Statevector::from_amplitudes(n, amps)
    }
}

/// Transfer matrix on the Pauli-consistent bond space.
///
/// A bond carries a ket value per replica and a shared flip bit `x`; the bra
/// value is `ket ⊕ x`. Basis index `x·2^{2n} + ket`, replica 0 the highest
/// ket bit. Outside this subspace the full `2^{4n}` transfer matrix vanishes.
#[derive(Clone, Debug)]
pub struct TransferTensor {
    pub renyi_n: usize,
    pub j: f64,
    pub matrix: CMatrix,
}

/// `⟨b ⊕ x | P | b⟩` for a Pauli with flip bit `x`.
fn pauli_elem(p: Pauli, b: usize) -> C64 {
    p.matrix()[b ^ flip_bit(p)][b]
}

fn flip_bit(p: Pauli) -> usize {
    matches!(p, Pauli::X | Pauli::Y) as usize
}

pub fn transfer_tensor(cell: &MpsUnitCell, n: usize) -> Result<TransferTensor> {
    if n == 0 || n > MAX_TRANSFER_N {
        return Err(Error::RenyiOutOfRange {
            n,
            min: 1,
            max: MAX_TRANSFER_N,
        });
    }
    let reps = 2 * n;
    let kdim = 1usize << reps;
    let dim = 2 * kdim;
    let mut t = CMatrix::zeros(dim, dim);
    let bit = |v: usize, k: usize| (v >> (reps - 1 - k)) & 1;
    for xl in 0..2 {
        for xr in 0..2 {
            let p1s: Vec<Pauli> = Pauli::ALL.into_iter().filter(|&p| flip_bit(p) == xr).collect();
            let p2s: Vec<Pauli> = Pauli::ALL.into_iter().filter(|&p| flip_bit(p) == xl).collect();
            for lk in 0..kdim {
                for rk in 0..kdim {
                    let mut acc = cz();
                    for &p1 in &p1s {
                        for &p2 in &p2s {
                            let mut prod = C64::new(1.0, 0.0);
                            for k in 0..reps {
                                let (l, r) = (bit(lk, k), bit(rk, k));
                                let (lb, rb) = (l ^ xl, r ^ xr);
                                // site 1 holds r, site 2 holds l
                                let e = pauli_elem(p1, r)
                                    * pauli_elem(p2, l)
                                    * cell.tensor[2 * r + l][2 * l + r]
                                    * cell.tensor[2 * rb + lb][2 * lb + rb].conj();
                                prod *= if k % 2 == 0 { e } else { e.conj() };
                            }
                            acc += prod;
                        }
                    }
                    t[(xl * kdim + lk, xr * kdim + rk)] = acc * 0.25;
                }
            }
        }
    }
    Ok(TransferTensor {
        renyi_n: n,
        j: cell.j,
        matrix: t,
    })
}

impl TransferTensor {
    /// `tr(T^k)`
    pub fn trace_power(&self, k: usize) -> C64 {
        let mut p = CMatrix::identity(self.matrix.nrows(), self.matrix.ncols());
        for _ in 0..k {
            p = &p * &self.matrix;
        }
        p.trace()
    }

    /// `Λ^{(n)}` laid out on the bond space: entry `⟨ket|Λ|ket ⊕ x⟩`.
    pub fn lambda_vector(&self) -> DVector<C64> {
        let n = self.renyi_n;
        let kdim = 1usize << (2 * n);
        DVector::from_fn(2 * kdim, |i, _| {
            let (x, k) = (i / kdim, i % kdim);
            let bra = if x == 1 { k ^ (kdim - 1) } else { k };
            C64::new(lambda_entry(n, k, bra), 0.0)
        })
    }
}

#[derive(Clone, Debug)]
pub struct LeadingEigen {
    pub value: C64,
    pub second_modulus: f64,
    /// False when `|λ0| - |λ1| < 1e-8`.
    pub gapped: bool,
    /// Largest |Im λ| over the whole spectrum.
    pub max_imag: f64,
    pub eigenvector: DVector<C64>,
}

pub const GAP_TOL: f64 = 1e-8;

pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    use faer::complex_native::c64;
    let f = faer::Mat::<c64>::from_fn(m.nrows(), m.ncols(), |i, k| {
        let z = m[(i, k)];
        c64::new(z.re, z.im)
    });
    f.eigenvalues::<c64>()
        .into_iter()
        .map(|z| C64::new(z.re, z.im))
        .collect()
}

pub fn leading_eigenvalue(m: &CMatrix) -> Result<LeadingEigen> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidArgument("transfer matrix must be square".into()));
    }
    let mut ev = eigenvalues(m);
    ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    let value = ev[0];
    let second_modulus = ev.get(1).map_or(0.0, |z| z.norm());
    let max_imag = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let dim = m.nrows();
    let shifted = m - CMatrix::identity(dim, dim) * value;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    let eigenvector = vt.row(imin).transpose().map(|z| z.conj());
    Ok(LeadingEigen {
        value,
        second_modulus,
        gapped: value.norm() - second_modulus >= GAP_TOL,
        max_imag,
        eigenvector,
    })
}

/// `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`
pub fn fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

#[derive(Clone, Copy, Debug)]
pub struct HalfStepDensity {
    pub value: f64,
    pub lambda0: f64,
    pub gapped: bool,
}

/// `m_n = ln(λ0)/(2(1-n))` from the numerical leading eigenvalue.
pub fn sre_density_half_step(j: f64, n: usize) -> Result<HalfStepDensity> {
    if n < 2 {
        return Err(Error::RenyiOutOfRange {
            n,
            min: 2,
            max: MAX_TRANSFER_N,
        });
    }
    let t = transfer_tensor(&half_step_unit_cell(j), n)?;
    let lead = leading_eigenvalue(&t.matrix)?;
    let lambda0 = lead.value.re;
    Ok(HalfStepDensity {
        value: lambda0.ln() / (2.0 * (1.0 - n as f64)),
        lambda0,
        gapped: lead.gapped,
    })
}
