//! Browser bindings: closed-form equilibration curve, half-step magic density,
//! and light-cone long-range magic for the B0/B1 partitions.

use magic_sre::circuit::GateParams;
use magic_sre::closedform::{l_b0_closed, m_half_closed};
use magic_sre::error::{Error, Result};
use magic_sre::lightcone::{long_range_sre_partition, Method, PartitionSpec};
use magic_sre::replica::sre_density_half_step;
use wasm_bindgen::prelude::*;

/// Largest T accepted by the equilibration curve.
pub const MAX_CURVE_T: usize = 4000;
/// Largest T accepted by the light-cone demo.
pub const MAX_DEMO_T: usize = 40;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_json())
}

/// `L_B0` at even `T = 2, 4, ..., t_max`.
pub fn equilibration(j_odd: f64, j_even: f64, t_max: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_CURVE_T).contains(&t_max) {
        return Err(Error::InvalidArgument(format!("t_max must be in 2..={MAX_CURVE_T}")));
    }
    (2..=t_max).step_by(2).map(|t| l_b0_closed(j_odd, j_even, t)).collect()
}

/// `[numerical, closed form]` magic density of the half-step state.
pub fn half_step(j: f64, n: usize) -> Result<Vec<f64>> {
    let numeric = sre_density_half_step(j, n)?.value;
    Ok(vec![numeric, m_half_closed(j, n)?])
}

/// Long-range magic `L_2` from the light-cone contraction.
pub fn lightcone_l(j_odd: f64, j_even: f64, layers: usize, partition: &str) -> Result<f64> {
    if layers == 0 || layers > MAX_DEMO_T {
        return Err(Error::InvalidArgument(format!("T must be in 1..={MAX_DEMO_T}")));
    }
    let part = match partition {
        "b0" => PartitionSpec::b0(layers)?,
        "b1" => PartitionSpec::b1(layers)?,
        other => return Err(Error::InvalidArgument(format!("unknown partition {other:?}"))),
    };
    long_range_sre_partition(&part, GateParams::new(j_odd, j_even), layers, 2, Method::Lightcone)
}

#[wasm_bindgen(js_name = equilibrationCurve)]
pub fn equilibration_curve(j_odd: f64, j_even: f64, t_max: usize) -> std::result::Result<Vec<f64>, JsError> {
    equilibration(j_odd, j_even, t_max).map_err(js)
}

#[wasm_bindgen(js_name = halfStepDensity)]
pub fn half_step_density(j: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
    half_step(j, n).map_err(js)
}

#[wasm_bindgen(js_name = lightconeLongRange)]
pub fn lightcone_long_range(j_odd: f64, j_even: f64, layers: usize, partition: &str) -> std::result::Result<f64, JsError> {
    lightcone_l(j_odd, j_even, layers, partition).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn curve_saturates() {
        let c = equilibration(0.4, 0.4, 200).unwrap();
        assert_eq!(c.len(), 100);
        assert!((c[99] - 2.0 * LN_2).abs() < 1e-6);
        assert!(equilibration(0.4, 0.4, 1).is_err());
    }

    #[test]
    fn half_step_agrees() {
        let v = half_step(0.3, 2).unwrap();
        assert!((v[0] - v[1]).abs() < 1e-10);
    }

    #[test]
    fn lightcone_matches_closed_form() {
        let l = lightcone_l(0.3, 0.5, 4, "b0").unwrap();
        assert!((l - l_b0_closed(0.3, 0.5, 4).unwrap()).abs() < 1e-9);
        assert!(lightcone_l(0.3, 0.5, 2, "b1").unwrap() > 0.0);
        assert!(lightcone_l(0.3, 0.5, 2, "b7").is_err());
    }
}
