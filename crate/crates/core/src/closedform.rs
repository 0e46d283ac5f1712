//! Analytic results: magic density of the half-step state and moments for
//! the B0 partition at even depth.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_4, LN_2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormInputs {
    pub j_odd: f64,
    pub j_even: f64,
    pub layers: usize,
    pub n: usize,
}

impl ClosedFormInputs {
    pub fn new(j_odd: f64, j_even: f64, layers: usize, n: usize) -> Self {
        ClosedFormInputs {
            j_odd,
            j_even,
            layers,
            n,
        }
    }

    fn check(&self) -> Result<()> {
        if self.layers == 0 || !self.layers.is_multiple_of(2) {
            return Err(Error::OddLayers(self.layers));
        }
        if self.n == 0 {
            return Err(Error::RenyiOutOfRange { n: 0, min: 1, max: usize::MAX });
        }
        Ok(())
    }
}

/// `cos^{2n}(2J) + sin^{2n}(2J)`
pub fn f_n(j: f64, n: usize) -> f64 {
    let e = (2 * n) as i32;
    (2.0 * j).cos().powi(e) + (2.0 * j).sin().powi(e)
}

const BINOM4: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

pub fn g_n(j_odd: f64, j_even: f64, n: usize) -> f64 {
    let (p, m) = (2.0 * j_odd + 2.0 * j_even, 2.0 * j_odd - 2.0 * j_even);
    let (cp, sp, cm, sm) = (p.cos(), p.sin(), m.cos(), m.sin());
    let e = (2 * n) as i32;
    let mut acc = 0.0;
    for (k, b) in BINOM4.iter().enumerate() {
        let x = cp.powi(4 - k as i32) * sp.powi(k as i32);
        let y = cm.powi(4 - k as i32) * sm.powi(k as i32);
        acc += b * ((x + y).powi(e) + (x - y).powi(e));
    }
    acc / 2f64.powi(e)
}

fn is_clifford_angle(j: f64) -> bool {
    let r = j / FRAC_PI_4;
    (r - r.round()).abs() < 1e-14
}

fn check_even(layers: usize) -> Result<()> {
    if layers == 0 || !layers.is_multiple_of(2) {
        return Err(Error::OddLayers(layers));
    }
    Ok(())
}

/// `2^{4T-2} ζ_n(ρ_AB) - 1 = 2F^T + g F^{2T-4}`, `F = f_n(J_o) f_n(J_e)`.
fn excess(j_odd: f64, j_even: f64, layers: usize, n: usize) -> f64 {
    let ff = f_n(j_odd, n) * f_n(j_even, n);
    let t = layers as i32;
    2.0 * ff.powi(t) + g_n(j_odd, j_even, n) * ff.powi(2 * t - 4)
}

pub fn zeta_b0_closed(inp: &ClosedFormInputs) -> Result<f64> {
    inp.check()?;
    let t = inp.layers as i32;
    Ok((1.0 + excess(inp.j_odd, inp.j_even, inp.layers, inp.n)) / 2f64.powi(4 * t - 2))
}

/// `ln ζ_n`, valid where `ζ_n` underflows.
pub fn ln_zeta_b0_closed(inp: &ClosedFormInputs) -> Result<f64> {
    inp.check()?;
    let t = inp.layers as f64;
    Ok(excess(inp.j_odd, inp.j_even, inp.layers, inp.n).ln_1p() - (4.0 * t - 2.0) * LN_2)
}

/// `ln(ζ_n/ζ_1)`, exactly 0 on Clifford couplings.
fn ln_ratio(j_odd: f64, j_even: f64, layers: usize, n: usize) -> f64 {
    if is_clifford_angle(j_odd) && is_clifford_angle(j_even) {
        return 0.0;
    }
    excess(j_odd, j_even, layers, n).ln_1p() - excess(j_odd, j_even, layers, 1).ln_1p()
}

/// `L_B0 = -ln(ζ_2/ζ_1)`
pub fn l_b0_closed(j_odd: f64, j_even: f64, layers: usize) -> Result<f64> {
    check_even(layers)?;
    Ok(-ln_ratio(j_odd, j_even, layers, 2))
}

/// `M̃_n(ρ_AB) = ln(ζ_n/ζ_1)/(1-n)`
pub fn m_tilde_n_b0(inp: &ClosedFormInputs) -> Result<f64> {
    inp.check()?;
    if inp.n < 2 {
        return Err(Error::RenyiOutOfRange { n: inp.n, min: 2, max: usize::MAX });
    }
    Ok(ln_ratio(inp.j_odd, inp.j_even, inp.layers, inp.n) / (1.0 - inp.n as f64))
}

/// Magic density of the half-step translation-invariant state.
pub fn m_half_closed(j: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::RenyiOutOfRange { n, min: 2, max: usize::MAX });
    }
    if is_clifford_angle(j) {
        return Ok(0.0);
    }
    Ok(((1.0 + f_n(j, n)) / 2.0).ln() / (2.0 * (1.0 - n as f64)))
}
