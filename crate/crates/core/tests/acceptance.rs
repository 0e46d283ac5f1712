//! One line per acceptance criterion; exits nonzero if any fails.

use magic_sre::circuit::{decompose_diagonal_swap, diagonal_swap, EvolutionSpec, GateParams};
use magic_sre::closedform::{f_n, l_b0_closed, zeta_b0_closed, ClosedFormInputs};
use magic_sre::lightcone::{zeta_region, PartitionSpec, Region, WorldLines};
use magic_sre::pauli::PauliSpectrum;
use magic_sre::replica::{fidelity, half_step_unit_cell, leading_eigenvalue, transfer_tensor};
use magic_sre::sampler::{estimate_q, sampled_mixed_sre, stream_rng, SamplingPlan, XiDistribution};
use magic_sre::statevec::Statevector;
use magic_sre::zx;
use rand::Rng;
use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(value: f64, tol: f64) -> bool {
    value.is_finite() && value < tol
}

fn elapsed_ok(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.2}s (limit {}s)", e.as_secs_f64(), limit.as_secs()))
}

fn c1() -> Outcome {
    let start = Instant::now();
    let (mut dev, mut overlap_gap): (f64, f64) = (0.0, 0.0);
    for n in [2, 3] {
        for j in [0.1, 0.3, PI / 8.0, 0.7] {
            let t = transfer_tensor(&half_step_unit_cell(j), n).unwrap();
            let l = leading_eigenvalue(&t.matrix).unwrap();
            dev = dev.max((l.value - (1.0 + f_n(j, n)) / 2.0).norm());
            overlap_gap = overlap_gap.max(1.0 - fidelity(&l.eigenvector, &t.lambda_vector()));
        }
    }
    let (fast, time) = elapsed_ok(start, Duration::from_secs(1));
    outcome(
        within(dev, 1e-10) && within(overlap_gap, 1e-10) && fast,
        format!("max |λ0-(1+f_n)/2|={dev:.2e} (tol 1e-10), max 1-overlap={overlap_gap:.2e} (tol 1e-10), {time}"),
    )
}

fn c2() -> Outcome {
    let j = 0.3;
    let t = transfer_tensor(&half_step_unit_cell(j), 2).unwrap();
    let sv = Statevector::evolve(&EvolutionSpec::new(8, 1, GateParams::uniform(j))).unwrap();
    let z = PauliSpectrum::from_density_matrix(&sv.density_matrix().unwrap())
        .unwrap()
        .stabilizer_purity(2)
        .unwrap();
    let dev = (t.trace_power(4) - z).norm();
    outcome(within(dev, 1e-10), format!("|tr(T^4)-ζ_2|={dev:.2e} (tol 1e-10)"))
}

fn c3() -> Outcome {
    let start = Instant::now();
    let part = PartitionSpec::b0(2).unwrap();
    let ab = part.sites(Region::AB);
    let grid: Vec<f64> = (0..5).map(|k| 0.05 + k as f64 * 0.3).collect();
    let mut dev: f64 = 0.0;
    for &jo in &grid {
        for &je in &grid {
            let sv = Statevector::evolve(&part.evolution(GateParams::new(jo, je), 2)).unwrap();
            let spec = PauliSpectrum::from_density_matrix(&sv.reduced_density_matrix(&ab).unwrap()).unwrap();
            for n in 1..=3 {
                let brute = spec.stabilizer_purity(n).unwrap();
                let closed = zeta_b0_closed(&ClosedFormInputs::new(jo, je, 2, n)).unwrap();
                dev = dev.max((brute - closed).abs() / closed);
            }
        }
    }
    let (fast, time) = elapsed_ok(start, Duration::from_secs(120));
    outcome(
        within(dev, 1e-9) && fast,
        format!("N=12, ρ_AB on {} qubits, 5x5 grid, max rel |Δζ|={dev:.2e} (tol 1e-9), {time}", ab.len()),
    )
}

fn c4() -> Outcome {
    let mut dev: f64 = 0.0;
    for t in [2, 4, 6, 10] {
        let part = PartitionSpec::b0(t).unwrap();
        let ab = part.sites(Region::AB);
        for (jo, je) in [(0.3, 0.3), (0.2, 0.6), (PI / 8.0, 1.2), (0.05, 0.4)] {
            let spec = part.evolution(GateParams::new(jo, je), t);
            for n in 1..=3 {
                let lc = zeta_region(&spec, &ab, n).unwrap().ln_zeta();
                let cf = zeta_b0_closed(&ClosedFormInputs::new(jo, je, t, n)).unwrap().ln();
                dev = dev.max((lc - cf).abs());
            }
        }
    }
    outcome(within(dev, 1e-9), format!("T in {{2,4,6,10}}, n in {{1,2,3}}, max |Δ ln ζ|={dev:.2e} (tol 1e-9)"))
}

fn c5() -> Outcome {
    let mut worst: f64 = 0.0;
    for (jo, je) in [(0.0, 0.0), (PI / 4.0, PI / 4.0), (0.0, PI / 4.0), (PI / 4.0, 0.0)] {
        for t in (2..=40).step_by(2).chain([100, 1000]) {
            worst = worst.max(l_b0_closed(jo, je, t).unwrap().abs());
        }
    }
    outcome(within(worst, 1e-12), format!("max |L_B0| at J in {{0, π/4}}={worst:.2e} (tol 1e-12)"))
}

fn c6() -> Outcome {
    let sat = (l_b0_closed(0.4, 0.4, 1000).unwrap() - 2.0 * LN_2).abs();
    let values: Vec<f64> = (2..=1000).step_by(2).map(|t| l_b0_closed(0.4, 0.4, t).unwrap()).collect();
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    let below = values.iter().all(|&v| v <= 2.0 * LN_2 + 1e-15);
    outcome(
        within(sat, 1e-6) && monotone && below,
        format!("|L(T=1000)-2ln2|={sat:.2e} (tol 1e-6), nondecreasing over even T<=1000: {monotone}, bounded by 2ln2: {below}"),
    )
}

fn c7() -> Outcome {
    let start = Instant::now();
    let part = PartitionSpec::b0(2).unwrap();
    let ab = part.sites(Region::AB);
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, j) in [0.29, 0.39].into_iter().enumerate() {
        let rho = Statevector::evolve(&part.evolution(GateParams::uniform(j), 2))
            .unwrap()
            .reduced_density_matrix(&ab)
            .unwrap();
        let dist = XiDistribution::from_density_matrix(&rho).unwrap();
        let rep = estimate_q(&dist, &SamplingPlan::new(500_000, 2, 11 + k as u64)).unwrap();
        let z = |n| zeta_b0_closed(&ClosedFormInputs::new(j, j, 2, n)).unwrap();
        let exact = z(2) / (2f64.powi(ab.len() as i32) * z(1).powi(2));
        let diff = (rep.q_tilde - exact).abs();
        let tol = (5e-5f64).max(3.0 * rep.stderr);
        ok &= diff < tol;
        parts.push(format!("J={j}: |Δq|={diff:.2e} (tol {tol:.2e})"));
    }
    let (fast, time) = elapsed_ok(start, Duration::from_secs(300));
    outcome(ok && fast, format!("{}, {time}", parts.join(", ")))
}

fn c8() -> Outcome {
    let start = Instant::now();
    let part = PartitionSpec::b1(2).unwrap();
    let mut dev: f64 = 0.0;
    let mut l_values = Vec::new();
    for j in [0.2, PI / 8.0, 0.6] {
        let spec = part.evolution(GateParams::uniform(j), 2);
        let sv = Statevector::evolve(&spec).unwrap();
        let ab = part.sites(Region::AB);
        let rho_ab = sv.reduced_density_matrix(&ab).unwrap();
        for region in [Region::AB, Region::A] {
            let sites = part.sites(region);
            let rho = if region == Region::AB { rho_ab.clone() } else { rho_ab.partial_trace(&sites).unwrap() };
            let spectrum = PauliSpectrum::from_density_matrix(&rho).unwrap();
            for n in 1..=2 {
                let brute = spectrum.stabilizer_purity(n).unwrap();
                let lc = zeta_region(&spec, &sites, n).unwrap().zeta();
                dev = dev.max((brute - lc).abs() / brute);
            }
        }
        let lines = WorldLines::trace(&spec).unwrap();
        let m = |r| magic_sre::lightcone::mixed_sre_lightcone(&lines, &part.sites(r), 2).unwrap();
        l_values.push(format!("{:.4}", m(Region::AB) - m(Region::A) - m(Region::B)));
    }
    let (fast, time) = elapsed_ok(start, Duration::from_secs(900));
    outcome(
        within(dev, 1e-8) && fast,
        format!(
            "N=16, ρ_AB 12 qubits, ρ_A 6 qubits, max rel |Δζ|={dev:.2e} (tol 1e-8), L_B1(J=0.2,π/8,0.6)=[{}], {time}",
            l_values.join(", ")
        ),
    )
}

fn c9() -> Outcome {
    let reports = zx::certify(&zx::phase_samples(2024, 5));
    let worst = reports.iter().map(|r| r.max_deviation()).fold(0.0, f64::max);
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed(1e-12))
        .map(|r| r.id.as_str())
        .collect();
    outcome(
        failed.is_empty(),
        format!("{} identities, max deviation={worst:.2e} (tol 1e-12), failed={failed:?}", reports.len()),
    )
}

fn c10() -> Outcome {
    let mut rng = stream_rng(10, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-4.0 * PI..4.0 * PI));
        let dec = decompose_diagonal_swap(v[0], v[1], v[2], v[3]);
        let err = (dec.reconstruct() - diagonal_swap(v[0], v[1], v[2], v[3]))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    outcome(within(worst, 1e-12), format!("1000 tuples, max reconstruction error={worst:.2e} (tol 1e-12)"))
}

fn brute_l(part: &PartitionSpec, params: GateParams, t: usize) -> f64 {
    let sv = Statevector::evolve(&part.evolution(params, t)).unwrap();
    let rho_ab = sv.reduced_density_matrix(&part.sites(Region::AB)).unwrap();
    let m = |r: &magic_sre::statevec::DensityMatrix| PauliSpectrum::from_density_matrix(r).unwrap().mixed_sre(2).unwrap();
    let a = rho_ab.partial_trace(&part.sites(Region::A)).unwrap();
    let b = rho_ab.partial_trace(&part.sites(Region::B)).unwrap();
    m(&rho_ab) - m(&a) - m(&b)
}

fn c11() -> Outcome {
    let t = 3;
    let params = GateParams::uniform(PI / 8.0);
    // the window shifted by one, d = 5,4,3,2, is reported but not graded
    let shifted: Vec<f64> = [5, 4, 3, 2]
        .iter()
        .map(|&d| brute_l(&PartitionSpec::custom(2 * t, 2 * t, d, t % 2).unwrap(), params, t))
        .collect();
    let shifted_monotone = shifted.windows(2).all(|w| w[1] > w[0]);
    let mut brute_l = Vec::new();
    let mut consistent = true;
    let mut worst_z: f64 = 0.0;
    for d in [4, 3, 2, 1] {
        let part = PartitionSpec::custom(2 * t, 2 * t, d, t % 2).unwrap();
        let spec = part.evolution(params, t);
        let sv = Statevector::evolve(&spec).unwrap();
        let ab = part.sites(Region::AB);
        let rho_ab = sv.reduced_density_matrix(&ab).unwrap();
        let rhos = [
            rho_ab.clone(),
            rho_ab.partial_trace(&part.sites(Region::A)).unwrap(),
            rho_ab.partial_trace(&part.sites(Region::B)).unwrap(),
        ];
        let brute: Vec<f64> = rhos
            .iter()
            .map(|r| PauliSpectrum::from_density_matrix(r).unwrap().mixed_sre(2).unwrap())
            .collect();
        let (mut sampled, mut var) = (Vec::new(), 0.0);
        for (k, r) in rhos.iter().enumerate() {
            let (v, e) = sampled_mixed_sre(r, 2, 200_000, 70 + 3 * d as u64 + k as u64).unwrap();
            sampled.push(v);
            var += e * e;
        }
        let lb = brute[0] - brute[1] - brute[2];
        let ls = sampled[0] - sampled[1] - sampled[2];
        let z = (lb - ls).abs() / var.sqrt().max(1e-300);
        worst_z = worst_z.max(z);
        consistent &= (lb - ls).abs() <= 3.0 * var.sqrt();
        brute_l.push(lb);
    }
    let monotone = brute_l.windows(2).all(|w| w[1] > w[0]);
    let shown: Vec<String> = brute_l.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        monotone && consistent,
        format!(
            "L(d=4,3,2,1)=[{}] strictly increasing: {monotone}, max |brute-sample|/σ={worst_z:.2} (tol 3); \
             info: d=5,4,3,2 increasing: {shifted_monotone}",
            shown.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("transfer-tensor leading eigenvalue and eigenvector", c1),
        ("finite-size transfer trace at N=8", c2),
        ("closed form vs brute force, B0 T=2", c3),
        ("lightcone vs closed form, B0 even T", c4),
        ("Clifford zeros", c5),
        ("saturation and monotone equilibration", c6),
        ("sampling convergence of q2", c7),
        ("B1 lightcone vs brute force, T=2", c8),
        ("ZX certification", c9),
        ("diagonal-phase decomposition roundtrip", c10),
        ("separation trend at T=3, J=π/8", c11),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        if !o.passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{secs:.1}s]",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
