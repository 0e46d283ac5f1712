//! Command-line front end: figure sweeps with intra-run cross-checks, and the
//! verification suite.

use crate::circuit::{decompose_diagonal_swap, diagonal_swap, EvolutionSpec, GateParams};
use crate::closedform::{f_n, l_b0_closed, m_tilde_n_b0, zeta_b0_closed, ClosedFormInputs};
use crate::error::{Error, Result};
use crate::lightcone::{
    check_brute, ContractionMode, PartitionFamily, PartitionSpec, Region, ReplicaChannel,
    WorldLines, MAX_CONFIGS, MAX_LIGHTCONE_N,
};
use crate::pauli::PauliSpectrum;
use crate::replica::{half_step_unit_cell, leading_eigenvalue, transfer_tensor};
use crate::sampler::{estimate_q, sampled_mixed_sre, SamplingPlan, XiDistribution};
use crate::statevec::{DensityMatrix, Statevector};
use crate::zx;
use crate::ARTIFACT_VERSION;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "magic", version, about = "Long-range magic of dual-unitary XXZ circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Long-range magic L versus J
    Fig5(SweepArgs),
    /// Joint-state magic M̃_n(ρ_AB) versus J for several n
    Fig6(SweepArgs),
    /// L versus J at fixed T for several separations d
    Fig7(SweepArgs),
    /// Long-range magic for partition B1
    Fig8(SweepArgs),
    /// Equilibration of L in T
    Fig10(SweepArgs),
    /// Convergence of the sampled q̃_2 estimator
    Fig11(SweepArgs),
    /// Run the invariant suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct SweepArgs {
    /// Odd-layer couplings (paired with --Je)
    #[arg(long = "Jo", value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub j_odd: Vec<f64>,
    /// Even-layer couplings (paired with --Jo)
    #[arg(long = "Je", value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub j_even: Vec<f64>,
    /// Couplings with J_o = J_e = J; accepts forms like `pi/8`
    #[arg(long = "J", value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub j: Vec<f64>,
    /// Layer counts
    #[arg(long = "T", value_delimiter = ',')]
    pub layers: Vec<usize>,
    /// Largest T of the equilibration sweep (even T from 2)
    #[arg(long = "Tmax")]
    pub t_max: Option<usize>,
    /// Renyi indices
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Separations between A and B
    #[arg(long = "d", value_delimiter = ',')]
    pub separations: Vec<usize>,
    /// b0, b1 or custom:Na,Nb,d,offset
    #[arg(long, value_parser = parse_partition)]
    pub partition: Option<PartitionArg>,
    /// Subset of closed,lightcone,brute,sample; unavailable methods are errors
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<MethodId>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report entropies in bits
    #[arg(long)]
    pub log2: bool,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Coarser default grids
    #[arg(long)]
    pub quick: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerifyArgs {
    /// Fast subset
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scale the light-cone end-cap weights by 1+eps (fault injection)
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub perturb_endcap: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodId {
    Closed,
    Lightcone,
    Brute,
    Sample,
}

impl MethodId {
    fn name(self) -> &'static str {
        match self {
            MethodId::Closed => "closed",
            MethodId::Lightcone => "lightcone",
            MethodId::Brute => "brute",
            MethodId::Sample => "sample",
        }
    }

    fn describe(self, samples: usize, seed: u64) -> String {
        match self {
            MethodId::Closed => "closed-form".into(),
            MethodId::Lightcone => "lightcone-contraction".into(),
            MethodId::Brute => "dense-pauli-transform".into(),
            MethodId::Sample => format!("pauli-sampling(samples={samples};seed={seed})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PartitionArg {
    B0,
    B1,
    Custom {
        n_a: usize,
        n_b: usize,
        d: usize,
        offset: usize,
    },
}

impl PartitionArg {
    fn resolve(self, layers: usize) -> Result<PartitionSpec> {
        match self {
            PartitionArg::B0 => PartitionSpec::b0(layers),
            PartitionArg::B1 => PartitionSpec::b1(layers),
            PartitionArg::Custom { n_a, n_b, d, offset } => PartitionSpec::custom(n_a, n_b, d, offset),
        }
    }
}

pub fn parse_partition(s: &str) -> std::result::Result<PartitionArg, String> {
    match s {
        "b0" | "B0" => Ok(PartitionArg::B0),
        "b1" | "B1" => Ok(PartitionArg::B1),
        _ => {
            let rest = s
                .strip_prefix("custom:")
                .ok_or_else(|| format!("expected b0, b1 or custom:Na,Nb,d,offset, got {s:?}"))?;
            let v: Vec<usize> = rest
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
                .collect::<std::result::Result<_, _>>()?;
            if v.len() != 4 {
                return Err(format!("custom partition needs 4 numbers, got {}", v.len()));
            }
            Ok(PartitionArg::Custom {
                n_a: v[0],
                n_b: v[1],
                d: v[2],
                offset: v[3],
            })
        }
    }
}

/// A number, optionally times or divided by `pi`: `0.3`, `pi/8`, `3pi/8`, `0.25pi`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Some(i) = t.find("pi") {
        let (pre, post) = (&t[..i], &t[i + 2..]);
        let coef = match pre.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?,
        };
        let div = match post {
            "" => 1.0,
            p => p
                .strip_prefix('/')
                .ok_or_else(|| format!("{s:?}: expected /k after pi"))?
                .parse::<f64>()
                .map_err(|e| format!("{s:?}: {e}"))?,
        };
        Ok(coef * PI / div)
    } else {
        t.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
    }
}

/// Every input of a run, echoed into the output header.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    /// `(J_o, J_e)` pairs
    pub couplings: Vec<(f64, f64)>,
    pub layers: Vec<usize>,
    pub renyi: Vec<usize>,
    pub separations: Vec<usize>,
    pub partition: PartitionArg,
    pub methods: Vec<MethodId>,
    /// False when the method set is the figure default, in which case
    /// methods are skipped where their size guards fail.
    pub methods_explicit: bool,
    pub samples: usize,
    pub seed: u64,
    pub log2: bool,
    pub out: Option<PathBuf>,
}

fn grid(k: usize) -> Vec<(f64, f64)> {
    (0..=k)
        .map(|i| {
            let j = i as f64 * PI / (2 * k) as f64;
            (j, j)
        })
        .collect()
}

fn couplings(a: &SweepArgs, default: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    if !a.j.is_empty() {
        if !a.j_odd.is_empty() || !a.j_even.is_empty() {
            return Err(Error::InvalidArgument("--J cannot be combined with --Jo/--Je".into()));
        }
        return Ok(a.j.iter().map(|&j| (j, j)).collect());
    }
    match (a.j_odd.len(), a.j_even.len()) {
        (0, 0) => Ok(default),
        (1, k) if k > 0 => Ok(a.j_even.iter().map(|&e| (a.j_odd[0], e)).collect()),
        (k, 1) if k > 0 => Ok(a.j_odd.iter().map(|&o| (o, a.j_even[0])).collect()),
        (x, y) if x == y => Ok(a.j_odd.iter().copied().zip(a.j_even.iter().copied()).collect()),
        (x, y) => Err(Error::InvalidArgument(format!(
            "--Jo has {x} values and --Je has {y}; give equal lengths or one value"
        ))),
    }
}

fn or_default<T: Clone>(v: &[T], d: &[T]) -> Vec<T> {
    if v.is_empty() {
        d.to_vec()
    } else {
        v.to_vec()
    }
}

/// Figure defaults filled in from the arguments.
pub fn resolve(command: &str, a: &SweepArgs) -> Result<ExperimentConfig> {
    let k = if a.quick { 8 } else { 24 };
    let (pairs, layers, renyi, part, methods, samples): (_, Vec<usize>, Vec<usize>, _, Vec<MethodId>, usize) =
        match command {
            "fig5" => (
                couplings(a, grid(k))?,
                or_default(&a.layers, &[2, 3]),
                or_default(&a.n, &[2]),
                a.partition.unwrap_or(PartitionArg::B0),
                vec![MethodId::Closed, MethodId::Lightcone, MethodId::Brute, MethodId::Sample],
                20_000,
            ),
            "fig6" => (
                couplings(a, grid(k))?,
                or_default(&a.layers, &[2, 4, 16]),
                or_default(&a.n, &[2, 3, 4]),
                a.partition.unwrap_or(PartitionArg::B0),
                vec![MethodId::Closed, MethodId::Lightcone, MethodId::Brute],
                20_000,
            ),
            "fig7" => (
                couplings(a, grid(k))?,
                or_default(&a.layers, &[3]),
                or_default(&a.n, &[2]),
                a.partition.unwrap_or(PartitionArg::B0),
                vec![MethodId::Closed, MethodId::Lightcone, MethodId::Brute, MethodId::Sample],
                20_000,
            ),
            "fig8" => (
                couplings(a, grid(k))?,
                or_default(&a.layers, &[2, 4, 6, 10]),
                or_default(&a.n, &[2]),
                a.partition.unwrap_or(PartitionArg::B1),
                vec![MethodId::Lightcone, MethodId::Brute, MethodId::Sample],
                100_000,
            ),
            "fig10" => {
                let t_max = a.t_max.unwrap_or(if a.quick { 100 } else { 1000 });
                let ts: Vec<usize> = (2..=t_max).step_by(2).collect();
                (
                    couplings(a, vec![(0.4, 0.4), (0.2, 0.2), (0.1, 0.1), (0.05, 0.05)])?,
                    or_default(&a.layers, &ts),
                    or_default(&a.n, &[2]),
                    a.partition.unwrap_or(PartitionArg::B0),
                    vec![MethodId::Closed],
                    20_000,
                )
            }
            "fig11" => (
                couplings(a, vec![(0.29, 0.29), (0.39, 0.39)])?,
                or_default(&a.layers, &[2]),
                or_default(&a.n, &[2]),
                a.partition.unwrap_or(PartitionArg::B0),
                vec![MethodId::Sample, MethodId::Closed],
                if a.quick { 50_000 } else { 500_000 },
            ),
            other => return Err(Error::InvalidArgument(format!("unknown command {other}"))),
        };
    let separations = if command == "fig7" {
        or_default(&a.separations, &[4, 3, 2, 1])
    } else if !a.separations.is_empty() {
        return Err(Error::InvalidArgument("--d applies to fig7 only".into()));
    } else {
        vec![]
    };
    if layers.contains(&0) {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    if renyi.iter().any(|&n| n < 2) {
        return Err(Error::RenyiOutOfRange { n: 1, min: 2, max: usize::MAX });
    }
    let explicit = !a.method.is_empty();
    let mut methods = if explicit { a.method.clone() } else { methods };
    methods.dedup();
    Ok(ExperimentConfig {
        command: command.to_string(),
        couplings: pairs,
        layers,
        renyi,
        separations,
        partition: part,
        methods,
        methods_explicit: explicit,
        samples: a.samples.unwrap_or(samples),
        seed: a.seed.unwrap_or(1),
        log2: a.log2,
        out: a.out.clone(),
    })
}

/// Outcome of one cross-check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tol: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tol,
            passed: value < tol,
        }
    }
}

/// A CSV body plus the checks run while producing it.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub text: String,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn header(cfg: &ExperimentConfig, columns: &[(String, String)]) -> String {
    let mut s = String::new();
    writeln!(s, "# {ARTIFACT_VERSION}").unwrap();
    writeln!(s, "# config {}", serde_json::to_string(cfg).expect("config json")).unwrap();
    let cols: Vec<String> = columns.iter().map(|(c, m)| format!("{c}={m}")).collect();
    writeln!(s, "# columns {}", cols.join(" ")).unwrap();
    let unit = if cfg.log2 { "bits (log base 2)" } else { "nats (natural log)" };
    writeln!(s, "# units {unit}").unwrap();
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    // adding 0.0 maps -0.0 to 0.0
    v.map_or(String::new(), |x| format!("{:.17e}", x + 0.0))
}

/// What a sweep point needs to evaluate.
#[derive(Clone, Copy, Debug)]
struct Point {
    params: GateParams,
    layers: usize,
    n: usize,
    part: PartitionSpec,
}

#[derive(Clone, Debug, Default)]
struct PointValues {
    closed: Option<f64>,
    lightcone: Option<f64>,
    brute: Option<f64>,
    sample: Option<(f64, f64)>,
}

/// Default dense evaluations are limited to rings of this size; explicit
/// requests go up to the library guards.
const DEFAULT_DENSE_QUBITS: usize = 16;

fn lightcone_cost_ok(lines: &WorldLines, sites: &[usize], n: usize) -> Result<bool> {
    Ok(ReplicaChannel::new(lines, sites, n)?.config_count() <= MAX_CONFIGS)
}

/// `M̃_n` of the given regions (or their long-range combination) for each method.
fn evaluate_point(cfg: &ExperimentConfig, p: &Point, regions: &[Region], seed: u64, dense_limit: usize) -> Result<PointValues> {
    let strict = cfg.methods_explicit;
    let spec = p.part.evolution(p.params, p.layers);
    let sites: Vec<Vec<usize>> = regions.iter().map(|&r| p.part.sites(r)).collect();
    let combine = |v: &[f64]| v[0] - v[1..].iter().sum::<f64>();
    let mut out = PointValues::default();
    for &m in &cfg.methods {
        match m {
            MethodId::Closed => {
                let ok = p.part.family == PartitionFamily::B0 && p.layers.is_multiple_of(2);
                if !ok {
                    if strict {
                        return Err(if p.layers % 2 == 1 {
                            Error::OddLayers(p.layers)
                        } else {
                            Error::Unsupported("closed form exists for partition B0 only".into())
                        });
                    }
                    continue;
                }
                // marginals of B0 are maximally mixed
                out.closed = Some(m_tilde_n_b0(&ClosedFormInputs::new(
                    p.params.j_odd,
                    p.params.j_even,
                    p.layers,
                    p.n,
                ))?);
            }
            MethodId::Lightcone => {
                if p.n > MAX_LIGHTCONE_N {
                    if strict {
                        return Err(Error::RenyiOutOfRange { n: p.n, min: 2, max: MAX_LIGHTCONE_N });
                    }
                    continue;
                }
                let lines = WorldLines::trace(&spec)?;
                if !strict {
                    let mut ok = true;
                    for s in &sites {
                        ok &= lightcone_cost_ok(&lines, s, p.n)?;
                    }
                    if !ok {
                        continue;
                    }
                }
                let v: Vec<f64> = sites
                    .iter()
                    .map(|s| crate::lightcone::mixed_sre_lightcone(&lines, s, p.n))
                    .collect::<Result<_>>()?;
                out.lightcone = Some(combine(&v));
            }
            MethodId::Brute | MethodId::Sample => {}
        }
    }
    let want_brute = cfg.methods.contains(&MethodId::Brute);
    let want_sample = cfg.methods.contains(&MethodId::Sample);
    if want_brute || want_sample {
        let ab = &sites[0];
        let guard = check_brute(&spec, ab.len());
        let dense_ok = guard.is_ok() && (strict || spec.n_qubits <= dense_limit);
        if strict {
            guard?;
        }
        if dense_ok {
            let sv = Statevector::evolve(&spec)?;
            let rho_ab = sv.reduced_density_matrix(ab)?;
            let rhos: Vec<DensityMatrix> = sites
                .iter()
                .enumerate()
                .map(|(i, s)| if i == 0 { Ok(rho_ab.clone()) } else { rho_ab.partial_trace(s) })
                .collect::<Result<_>>()?;
            if want_brute {
                let v: Vec<f64> = rhos
                    .iter()
                    .map(|r| PauliSpectrum::from_density_matrix(r)?.mixed_sre(p.n))
                    .collect::<Result<_>>()?;
                out.brute = Some(combine(&v));
            }
            if want_sample {
                let mut vals = Vec::new();
                let mut var = 0.0;
                for (k, r) in rhos.iter().enumerate() {
                    let (v, e) = sampled_mixed_sre(r, p.n, cfg.samples, seed.wrapping_add(k as u64))?;
                    vals.push(v);
                    var += e * e;
                }
                out.sample = Some((combine(&vals), var.sqrt()));
            }
        }
    }
    Ok(out)
}

fn compare_col(name: &str, rows: &[PointValues], a: fn(&PointValues) -> Option<f64>, b: fn(&PointValues) -> Option<f64>, tol: f64) -> Option<Check> {
    let d: Vec<f64> = rows
        .iter()
        .filter_map(|r| Some((a(r)? - b(r)?).abs()))
        .collect();
    if d.is_empty() {
        None
    } else {
        Some(Check::below(name, d.iter().copied().fold(0.0, f64::max), tol))
    }
}

/// Cross-checks between the columns of a sweep.
fn sweep_checks(rows: &[PointValues]) -> Vec<Check> {
    let mut checks = Vec::new();
    let c = |r: &PointValues| r.closed;
    let l = |r: &PointValues| r.lightcone;
    let b = |r: &PointValues| r.brute;
    checks.extend(compare_col("closed-vs-lightcone", rows, c, l, 1e-9));
    checks.extend(compare_col("closed-vs-brute", rows, c, b, 1e-9));
    checks.extend(compare_col("lightcone-vs-brute", rows, l, b, 1e-9));
    // sampled values against the best exact column, in units of the error bar
    let z: Vec<f64> = rows
        .iter()
        .filter_map(|r| {
            let (v, e) = r.sample?;
            let exact = r.brute.or(r.lightcone).or(r.closed)?;
            Some((v - exact).abs() / (5.0 * e + 1e-6))
        })
        .collect();
    if !z.is_empty() {
        checks.push(Check::below("sample-within-5sigma", z.iter().copied().fold(0.0, f64::max), 1.0));
    }
    checks
}

fn scale_log(cfg: &ExperimentConfig, v: PointValues) -> PointValues {
    if !cfg.log2 {
        return v;
    }
    let s = |x: Option<f64>| x.map(|x| x / LN_2);
    PointValues {
        closed: s(v.closed),
        lightcone: s(v.lightcone),
        brute: s(v.brute),
        sample: v.sample.map(|(a, b)| (a / LN_2, b / LN_2)),
    }
}

fn point_seed(base: u64, idx: usize) -> u64 {
    base.wrapping_add((idx as u64) << 8)
}

/// Sweep over couplings × layers × n (× separations for fig7).
fn run_sweep(cfg: &ExperimentConfig, regions: &[Region], dense_limit: usize) -> Result<RunOutput> {
    let fig7 = cfg.command == "fig7";
    let mut points: Vec<(Vec<String>, Point)> = Vec::new();
    let seps: Vec<Option<usize>> = if fig7 {
        cfg.separations.iter().map(|&d| Some(d)).collect()
    } else {
        vec![None]
    };
    for &t in &cfg.layers {
        for &d in &seps {
            let part = match d {
                Some(d) => {
                    let s = PartitionSpec::custom(2 * t, 2 * t, d, t % 2)?;
                    if d == 2 * (t - 1) {
                        PartitionSpec { family: PartitionFamily::B0, ..s }
                    } else {
                        s
                    }
                }
                None => cfg.partition.resolve(t)?,
            };
            for &n in &cfg.renyi {
                for &(jo, je) in &cfg.couplings {
                    let mut key = vec![format!("{jo}"), format!("{je}"), t.to_string(), n.to_string()];
                    if let Some(d) = d {
                        key.push(d.to_string());
                    }
                    points.push((
                        key,
                        Point {
                            params: GateParams::new(jo, je),
                            layers: t,
                            n,
                            part,
                        },
                    ));
                }
            }
        }
    }
    let values: Vec<PointValues> = points
        .par_iter()
        .enumerate()
        .map(|(i, (_, p))| evaluate_point(cfg, p, regions, point_seed(cfg.seed, i), dense_limit))
        .collect::<Result<_>>()?;
    let checks = sweep_checks(&values);
    let mut key_cols = vec!["J_o", "J_e", "T", "n"];
    if fig7 {
        key_cols.push("d");
    }
    let quantity = if regions.len() == 1 { "M_n(rho_AB)" } else { "L_n" };
    let mut columns: Vec<(String, String)> = key_cols.iter().map(|k| (k.to_string(), "key".to_string())).collect();
    for &m in &cfg.methods {
        columns.push((m.name().to_string(), format!("{quantity}:{}", m.describe(cfg.samples, cfg.seed))));
    }
    if cfg.methods.contains(&MethodId::Sample) {
        columns.push(("sample_stderr".into(), "standard-error-of-sample".into()));
    }
    let mut text = header(cfg, &columns);
    let names: Vec<&str> = columns.iter().map(|c| c.0.as_str()).collect();
    writeln!(text, "{}", names.join(",")).unwrap();
    for ((key, _), v) in points.iter().zip(values) {
        let v = scale_log(cfg, v);
        let mut fields = key.clone();
        for &m in &cfg.methods {
            fields.push(match m {
                MethodId::Closed => fmt_opt(v.closed),
                MethodId::Lightcone => fmt_opt(v.lightcone),
                MethodId::Brute => fmt_opt(v.brute),
                MethodId::Sample => fmt_opt(v.sample.map(|s| s.0)),
            });
        }
        if cfg.methods.contains(&MethodId::Sample) {
            fields.push(fmt_opt(v.sample.map(|s| s.1)));
        }
        writeln!(text, "{}", fields.join(",")).unwrap();
    }
    Ok(RunOutput { text, checks })
}

fn run_fig10(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let regions = [Region::AB, Region::A, Region::B];
    let mut cfg = cfg.clone();
    cfg.command = "fig10".into();
    run_sweep(&cfg, &regions, DEFAULT_DENSE_QUBITS)
}

/// `q_2` of `ρ_AB` for B0 at even depth from the closed form:
/// `q_2 = ζ_2 / (2^m ζ_1^2)`.
pub fn exact_q2_b0(params: GateParams, layers: usize) -> Result<f64> {
    let z = |n| zeta_b0_closed(&ClosedFormInputs::new(params.j_odd, params.j_even, layers, n));
    let part = PartitionSpec::b0(layers)?;
    let m = part.sites(Region::AB).len() as i32;
    Ok(z(2)? / (2f64.powi(m) * z(1)?.powi(2)))
}

fn run_fig11(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if cfg.renyi != [2] {
        return Err(Error::Unsupported("fig11 tracks the n=2 estimator only".into()));
    }
    let mut text = header(
        cfg,
        &[
            ("samples".into(), "key".into()),
            ("q_tilde".into(), MethodId::Sample.describe(cfg.samples, cfg.seed)),
            ("stderr".into(), "standard-error-of-sample".into()),
            ("exact_value".into(), "closed-form".into()),
        ],
    );
    let mut checks = Vec::new();
    let mut idx = 0;
    for &t in &cfg.layers {
        let part = cfg.partition.resolve(t)?;
        for &(jo, je) in &cfg.couplings {
            let params = GateParams::new(jo, je);
            let spec = part.evolution(params, t);
            let ab = part.sites(Region::AB);
            check_brute(&spec, ab.len())?;
            let rho = Statevector::evolve(&spec)?.reduced_density_matrix(&ab)?;
            let dist = XiDistribution::from_density_matrix(&rho)?;
            let plan = SamplingPlan::new(cfg.samples, 2, point_seed(cfg.seed, idx))
                .with_stride((cfg.samples / 100).max(1));
            idx += 1;
            let rep = estimate_q(&dist, &plan)?;
            let closed = if part.family == PartitionFamily::B0 && t % 2 == 0 {
                Some(exact_q2_b0(params, t)?)
            } else {
                None
            };
            let enumerated = dist.exact_q(2);
            if let Some(c) = closed {
                checks.push(Check::below(
                    format!("enumerated-vs-closed-q2 J=({jo},{je}) T={t}"),
                    (enumerated - c).abs() / c,
                    1e-10,
                ));
            }
            let exact = closed.unwrap_or(enumerated);
            checks.push(Check::below(
                format!("sample-q2 J=({jo},{je}) T={t}"),
                (rep.q_tilde - exact).abs() / (5e-5f64).max(3.0 * rep.stderr),
                1.0,
            ));
            if cfg.couplings.len() * cfg.layers.len() > 1 {
                writeln!(text, "# block J_o={jo} J_e={je} T={t}").unwrap();
            }
            let mut buf = Vec::new();
            rep.write_csv(&mut buf, Some(exact))?;
            text.push_str(&String::from_utf8(buf).expect("utf8 csv"));
        }
    }
    Ok(RunOutput { text, checks })
}

/// Run one figure command and return its CSV.
pub fn run_figure(command: &str, args: &SweepArgs) -> Result<RunOutput> {
    let cfg = resolve(command, args)?;
    let lr = [Region::AB, Region::A, Region::B];
    match command {
        "fig5" | "fig8" => run_sweep(&cfg, &lr, DEFAULT_DENSE_QUBITS),
        "fig6" => run_sweep(&cfg, &[Region::AB], DEFAULT_DENSE_QUBITS),
        "fig7" => run_sweep(&cfg, &lr, crate::lightcone::MAX_BRUTE_QUBITS),
        "fig10" => run_fig10(&cfg),
        "fig11" => run_fig11(&cfg),
        other => Err(Error::InvalidArgument(format!("unknown command {other}"))),
    }
}

/// One row of the verification table.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub group: String,
    pub check: Check,
}

fn row(group: &str, check: Check) -> VerifyRow {
    VerifyRow {
        group: group.to_string(),
        check,
    }
}

fn lightcone_zeta(spec: &EvolutionSpec, region: &[usize], n: usize, endcap: f64) -> Result<f64> {
    let lines = WorldLines::trace(spec)?;
    let mut chan = ReplicaChannel::new(&lines, region, n)?;
    chan.endcap_scale = endcap;
    Ok(chan.evaluate(ContractionMode::Linear)?.ln_zeta())
}

/// The invariant suite; `perturb` scales the light-cone end caps by `1+perturb`.
pub fn verify_rows(quick: bool, perturb: Option<f64>) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let phases = zx::phase_samples(7, 3);
    for rep in zx::certify(&phases) {
        rows.push(row("zx", Check::below(rep.id.clone(), rep.max_deviation(), zx::RULE_TOL)));
    }

    let endcap = 1.0 + perturb.unwrap_or(0.0);
    let pairs: Vec<(f64, f64)> = if quick {
        vec![(0.3, 0.7), (PI / 8.0, 0.2)]
    } else {
        vec![(0.3, 0.7), (PI / 8.0, 0.2), (0.1, 0.1), (1.1, 0.45)]
    };
    let depths: &[usize] = if quick { &[2, 4] } else { &[2, 4, 6, 10] };
    let mut worst: f64 = 0.0;
    for &t in depths {
        let part = PartitionSpec::b0(t)?;
        let region = part.sites(Region::AB);
        for &(jo, je) in &pairs {
            let spec = part.evolution(GateParams::new(jo, je), t);
            for n in 1..=3 {
                let lc = lightcone_zeta(&spec, &region, n, endcap)?;
                let cf = zeta_b0_closed(&ClosedFormInputs::new(jo, je, t, n))?.ln();
                worst = worst.max((lc - cf).abs());
            }
        }
    }
    rows.push(row("oracle", Check::below("lightcone-vs-closed ln(zeta)", worst, 1e-9)));

    let mut worst: f64 = 0.0;
    let part = PartitionSpec::b0(2)?;
    let region = part.sites(Region::AB);
    for &(jo, je) in pairs.iter().take(if quick { 1 } else { pairs.len() }) {
        let sv = Statevector::evolve(&part.evolution(GateParams::new(jo, je), 2))?;
        let spec = PauliSpectrum::from_density_matrix(&sv.reduced_density_matrix(&region)?)?;
        for n in 1..=3 {
            let cf = zeta_b0_closed(&ClosedFormInputs::new(jo, je, 2, n))?;
            worst = worst.max((spec.stabilizer_purity(n)?.ln() - cf.ln()).abs());
        }
    }
    rows.push(row("oracle", Check::below("brute-vs-closed ln(zeta) T=2", worst, 1e-9)));

    let mut worst: f64 = 0.0;
    for n in if quick { 2..=2 } else { 2..=3 } {
        for &j in &[0.1, 0.3, PI / 8.0, 0.7] {
            let t = transfer_tensor(&half_step_unit_cell(j), n)?;
            let l = leading_eigenvalue(&t.matrix)?;
            worst = worst.max((l.value - (1.0 + f_n(j, n)) / 2.0).norm());
        }
    }
    rows.push(row("oracle", Check::below("transfer leading eigenvalue", worst, 1e-10)));

    let j = 0.3;
    let t = transfer_tensor(&half_step_unit_cell(j), 2)?;
    let sv = Statevector::evolve(&EvolutionSpec::new(8, 1, GateParams::uniform(j)))?;
    let z = PauliSpectrum::from_density_matrix(&sv.density_matrix()?)?.stabilizer_purity(2)?;
    rows.push(row("oracle", Check::below("tr(T^4) vs enumeration N=8", (t.trace_power(4) - z).norm(), 1e-10)));

    let mut worst: f64 = 0.0;
    for &(jo, je) in &[(0.0, 0.0), (PI / 4.0, PI / 4.0), (0.0, PI / 4.0), (PI / 2.0, PI / 4.0)] {
        for &t in &[2usize, 4, 10, 100, 1000] {
            worst = worst.max(l_b0_closed(jo, je, t)?.abs());
        }
    }
    rows.push(row("clifford", Check::below("closed-form L at Clifford points", worst, 1e-12)));

    let sat = (l_b0_closed(0.4, 0.4, 1000)? - 2.0 * LN_2).abs();
    rows.push(row("closed", Check::below("saturation at T=1000", sat, 1e-6)));

    let mut rng = crate::sampler::stream_rng(99, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..if quick { 100 } else { 1000 } {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-20.0..20.0));
        let dec = decompose_diagonal_swap(v[0], v[1], v[2], v[3]);
        let err = (dec.reconstruct() - diagonal_swap(v[0], v[1], v[2], v[3]))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    rows.push(row("circuit", Check::below("diagonal-gate decomposition", worst, 1e-12)));
    Ok(rows)
}

pub fn verify_table(rows: &[VerifyRow]) -> String {
    let mut s = String::new();
    writeln!(s, "# {ARTIFACT_VERSION}").unwrap();
    writeln!(s, "{:<10} {:<40} {:<6} {:>12} {:>8}", "group", "check", "status", "value", "tol").unwrap();
    for r in rows {
        let status = if r.check.passed { "pass" } else { "FAIL" };
        writeln!(
            s,
            "{:<10} {:<40} {:<6} {:>12.3e} {:>8.0e}",
            r.group, r.check.name, status, r.check.value, r.check.tol
        )
        .unwrap();
    }
    let failed = rows.iter().filter(|r| !r.check.passed).count();
    writeln!(s, "{} checks, {} failed", rows.len(), failed).unwrap();
    s
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

/// Apply `MAGIC_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MAGIC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("MAGIC_THREADS={v:?} is not a count")))?;
        if n == 0 {
            return Err(Error::InvalidArgument("MAGIC_THREADS must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckFailure<'a> {
    error: &'static str,
    message: String,
    failed: Vec<&'a Check>,
}

/// Exit code of a full invocation; diagnostics go to stderr.
pub fn run(cli: Cli) -> i32 {
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Verify(v) => {
            let rows = verify_rows(v.quick, v.perturb_endcap)?;
            write_output(&v.out, &verify_table(&rows))?;
            let failed: Vec<&Check> = rows.iter().filter(|r| !r.check.passed).map(|r| &r.check).collect();
            Ok(report_failures(&failed))
        }
        cmd => {
            let (name, args) = match cmd {
                Command::Fig5(a) => ("fig5", a),
                Command::Fig6(a) => ("fig6", a),
                Command::Fig7(a) => ("fig7", a),
                Command::Fig8(a) => ("fig8", a),
                Command::Fig10(a) => ("fig10", a),
                Command::Fig11(a) => ("fig11", a),
                Command::Verify(_) => unreachable!(),
            };
            let out = run_figure(name, args)?;
            write_output(&args.out, &out.text)?;
            for c in &out.checks {
                let status = if c.passed { "pass" } else { "FAIL" };
                eprintln!("# check {} {status} value={:.3e} tol={:.1e}", c.name, c.value, c.tol);
            }
            let failed: Vec<&Check> = out.checks.iter().filter(|c| !c.passed).collect();
            Ok(report_failures(&failed))
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            2
        }
    }
}

fn report_failures(failed: &[&Check]) -> i32 {
    if failed.is_empty() {
        return 0;
    }
    let msg = CheckFailure {
        error: "check_failed",
        message: format!("{} cross-check(s) outside tolerance", failed.len()),
        failed: failed.to_vec(),
    };
    eprintln!("{}", serde_json::to_string(&msg).expect("json"));
    1
}
