//! Dual-unitary XXZ gates and the periodic brick-wall protocol.
//!
//! Two-qubit matrices use kron ordering: basis index `2*b_first + b_second`.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::Matrix4;
use std::f64::consts::PI;

pub type Gate4 = Matrix4<C64>;

/// Couplings of the two brick-wall layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateParams {
    pub j_odd: f64,
    pub j_even: f64,
}

impl GateParams {
    pub fn new(j_odd: f64, j_even: f64) -> Self {
        GateParams { j_odd, j_even }
    }

    pub fn uniform(j: f64) -> Self {
        GateParams::new(j, j)
    }
}

/// Which bonds host the Bell pairs and which the first layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LayerConvention {
    /// Bell pairs on (2i, 2i+1); layer 1 on (2i+1, 2i+2).
    #[default]
    OddBondsFirst,
    /// Bell pairs on (2i+1, 2i+2); layer 1 on (2i, 2i+1).
    EvenBondsFirst,
}

impl LayerConvention {
    pub fn name(self) -> &'static str {
        match self {
            LayerConvention::OddBondsFirst => "odd-bonds-first",
            LayerConvention::EvenBondsFirst => "even-bonds-first",
        }
    }

    /// Left site of the Bell bonds.
    pub fn pair_offset(self) -> usize {
        match self {
            LayerConvention::OddBondsFirst => 0,
            LayerConvention::EvenBondsFirst => 1,
        }
    }
}

/// A nearest-neighbour bond on the ring; `right == (left + 1) % n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bond {
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub coupling: f64,
    pub gate: Gate4,
    pub bonds: Vec<Bond>,
}

/// Full description of a protocol run.
#[derive(Clone, Copy, Debug)]
pub struct EvolutionSpec {
    pub n_qubits: usize,
    pub layers: usize,
    pub params: GateParams,
    pub convention: LayerConvention,
}

impl EvolutionSpec {
    pub fn new(n_qubits: usize, layers: usize, params: GateParams) -> Self {
        EvolutionSpec {
            n_qubits,
            layers,
            params,
            convention: LayerConvention::default(),
        }
    }

    pub fn with_convention(mut self, c: LayerConvention) -> Self {
        self.convention = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 || !self.n_qubits.is_multiple_of(2) {
            return Err(Error::OddQubitCount(self.n_qubits));
        }
        Ok(())
    }

    pub fn build_layers(&self) -> Result<Vec<Layer>> {
        build_layers(self)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn swap() -> Gate4 {
    let mut m = Gate4::zeros();
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 2)] = c(1.0, 0.0);
    m[(2, 1)] = c(1.0, 0.0);
    m[(3, 3)] = c(1.0, 0.0);
    m
}

/// `exp(-i J Z⊗Z)`
pub fn zz_phase(j: f64) -> Gate4 {
    let a = C64::from_polar(1.0, -j);
    let b = C64::from_polar(1.0, j);
    Gate4::from_diagonal(&nalgebra::Vector4::new(a, b, b, a))
}

/// `U(J) = exp(-i J Z⊗Z) · SWAP`
pub fn du_xxz_gate(j: f64) -> Gate4 {
    zz_phase(j) * swap()
}

/// Space-time reshuffle `Ũ[(k,l),(i,j)] = U[(j,l),(i,k)]`; unitary iff `u` is dual unitary.
pub fn reshuffle_space_time(u: &Gate4) -> Gate4 {
    let mut out = Gate4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * k + l, 2 * i + j)] = u[(2 * j + l, 2 * i + k)];
                }
            }
        }
    }
    out
}

pub fn unitarity_residual(u: &Gate4) -> f64 {
    (u.adjoint() * u - Gate4::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Layers of the protocol in application order.
pub fn build_layers(spec: &EvolutionSpec) -> Result<Vec<Layer>> {
    spec.validate()?;
    let n = spec.n_qubits;
    let first = 1 - spec.convention.pair_offset();
    let mut out = Vec::with_capacity(spec.layers);
    for t in 0..spec.layers {
        let (start, coupling) = if t % 2 == 0 {
            (first, spec.params.j_odd)
        } else {
            (1 - first, spec.params.j_even)
        };
        let bonds = (0..n / 2)
            .map(|i| {
                let left = (2 * i + start) % n;
                Bond {
                    left,
                    right: (left + 1) % n,
                }
            })
            .collect();
        out.push(Layer {
            coupling,
            gate: du_xxz_gate(coupling),
            bonds,
        });
    }
    Ok(out)
}

/// `D = e^{id} diag(e^{ia}, e^{ib}, e^{ic}, 1)` rewritten as
/// `D·SWAP = exp(-iJ Z⊗Z) (P(β)⊗P(γ)) SWAP e^{iν}` with `P(θ) = diag(1, e^{iθ})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalSwapDecomposition {
    pub j: f64,
    pub beta: f64,
    pub gamma: f64,
    pub nu: f64,
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

impl DiagonalSwapDecomposition {
    pub fn reconstruct(&self) -> Gate4 {
        let p = |t: f64| [c(1.0, 0.0), C64::from_polar(1.0, t)];
        let (pb, pg) = (p(self.beta), p(self.gamma));
        let local = Gate4::from_diagonal(&nalgebra::Vector4::new(
            pb[0] * pg[0],
            pb[0] * pg[1],
            pb[1] * pg[0],
            pb[1] * pg[1],
        ));
        zz_phase(self.j) * local * swap() * C64::from_polar(1.0, self.nu)
    }
}

/// Decompose `D·SWAP` for `D = e^{id} diag(e^{ia}, e^{ib}, e^{ic}, 1)`.
///
/// `J` lands in `[0, π)`, the other angles in `[0, 2π)`.
pub fn decompose_diagonal_swap(a: f64, b: f64, cc: f64, d: f64) -> DiagonalSwapDecomposition {
    let alpha = (b + cc - a) / 2.0;
    let beta = (cc - a - b) / 2.0;
    let gamma = (b - a - cc) / 2.0;
    let mut nu = d - beta - gamma + alpha / 2.0;
    let mut j = alpha / 2.0;
    // exp(-i(J+π)ZZ) = -exp(-iJ ZZ)
    let shifts = (j / PI).floor();
    j -= shifts * PI;
    nu += shifts * PI;
    DiagonalSwapDecomposition {
        j: wrap(j, PI),
        beta: wrap(beta, 2.0 * PI),
        gamma: wrap(gamma, 2.0 * PI),
        nu: wrap(nu, 2.0 * PI),
    }
}

pub fn diagonal_swap(a: f64, b: f64, cc: f64, d: f64) -> Gate4 {
    let e = |t: f64| C64::from_polar(1.0, t + d);
    Gate4::from_diagonal(&nalgebra::Vector4::new(e(a), e(b), e(cc), e(0.0))) * swap()
}
