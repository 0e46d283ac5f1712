//! Numerical certificates for the rewrite rules and the replica-tensor lemmas.
//!
//! Every check builds both sides, evaluates them densely and compares
//! `lhs` with `expected · rhs`. The best-fit scalar `⟨rhs, lhs⟩ / ⟨rhs, rhs⟩`
//! is reported alongside, so a wrong stated scalar shows up as data.

use super::diagram::{NodeId, ZxDiagram, ZxTensor};
use crate::circuit::du_xxz_gate;
use crate::replica::{lambda_tensors, CMatrix};
use crate::C64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Tolerance used by the certification suite.
pub const RULE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    Fusion,
    ColorChange,
    Identity,
    HadamardSquare,
    PiCommute,
    Copy,
    Bialgebra,
    Hopf,
    GeneralBialgebra,
    Cnot,
    GateDiagram,
    Unitarity,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::Fusion,
        Rule::ColorChange,
        Rule::Identity,
        Rule::HadamardSquare,
        Rule::PiCommute,
        Rule::Copy,
        Rule::Bialgebra,
        Rule::Hopf,
        Rule::GeneralBialgebra,
        Rule::Cnot,
        Rule::GateDiagram,
        Rule::Unitarity,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::Fusion => "f",
            Rule::ColorChange => "h",
            Rule::Identity => "id",
            Rule::HadamardSquare => "hh",
            Rule::PiCommute => "pi",
            Rule::Copy => "c",
            Rule::Bialgebra => "b",
            Rule::Hopf => "hopf",
            Rule::GeneralBialgebra => "general-bialgebra",
            Rule::Cnot => "cnot",
            Rule::GateDiagram => "gate",
            Rule::Unitarity => "unitarity",
        }
    }

    pub fn from_id(id: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.id() == id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub config: String,
    /// `max |lhs - expected·rhs|`
    pub deviation: f64,
    pub expected_scalar: [f64; 2],
    pub inferred_scalar: [f64; 2],
    /// `max |lhs - inferred·rhs|`
    pub residual: f64,
}

impl CaseReport {
    fn failed(config: String) -> Self {
        CaseReport {
            config,
            deviation: f64::INFINITY,
            expected_scalar: [f64::NAN; 2],
            inferred_scalar: [f64::NAN; 2],
            residual: f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleCheckReport {
    pub id: String,
    pub cases: Vec<CaseReport>,
}

impl RuleCheckReport {
    pub fn new(id: impl Into<String>) -> Self {
        RuleCheckReport {
            id: id.into(),
            cases: Vec::new(),
        }
    }

    pub fn max_deviation(&self) -> f64 {
        self.cases.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.cases.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Exact equality, stated scalars included, in every case.
    pub fn passed(&self, tol: f64) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|c| c.deviation < tol)
    }

    fn compare(&mut self, config: String, lhs: &ZxDiagram, rhs: &ZxDiagram, expected: C64) {
        self.cases.push(compare(config, lhs, rhs, expected));
    }
}

fn compare(config: String, lhs: &ZxDiagram, rhs: &ZxDiagram, expected: C64) -> CaseReport {
    let (l, r) = match (lhs.evaluate(), rhs.evaluate()) {
        (Ok(l), Ok(r)) if l.n_ports == r.n_ports => (l, r),
        (l, r) => {
            let why = match (l, r) {
                (Err(e), _) | (_, Err(e)) => e.to_string(),
                _ => "port counts differ".to_string(),
            };
            return CaseReport::failed(format!("{config} [{why}]"));
        }
    };
    let inferred = best_scalar(&l, &r);
    CaseReport {
        config,
        deviation: max_dev(&l, &r, expected),
        expected_scalar: [expected.re, expected.im],
        inferred_scalar: [inferred.re, inferred.im],
        residual: max_dev(&l, &r, inferred),
    }
}

fn best_scalar(l: &ZxTensor, r: &ZxTensor) -> C64 {
    let num: C64 = r.data.iter().zip(&l.data).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = r.data.iter().map(|a| a.norm_sqr()).sum();
    if den == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        num / den
    }
}

fn max_dev(l: &ZxTensor, r: &ZxTensor, s: C64) -> f64 {
    l.data
        .iter()
        .zip(&r.data)
        .map(|(a, b)| (a - s * b).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Color {
    Z,
    X,
}

impl Color {
    fn other(self) -> Color {
        match self {
            Color::Z => Color::X,
            Color::X => Color::Z,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Color::Z => "Z",
            Color::X => "X",
        }
    }
}

fn spider(d: &mut ZxDiagram, c: Color, phase: f64) -> NodeId {
    match c {
        Color::Z => d.add_z(phase),
        Color::X => d.add_x(phase),
    }
}

fn ports_on(d: &mut ZxDiagram, node: NodeId, k: usize) {
    for _ in 0..k {
        let p = d.add_boundary();
        d.connect(node, p);
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pow2(e: f64) -> C64 {
    real(2f64.powf(e))
}

fn wire(d: &mut ZxDiagram, a: NodeId, b: NodeId) {
    d.connect(a, b);
}

fn fusion(rep: &mut RuleCheckReport, c: Color, a: f64, b: f64, la: usize, lb: usize) {
    let mut lhs = ZxDiagram::new();
    let s1 = spider(&mut lhs, c, a);
    let s2 = spider(&mut lhs, c, b);
    lhs.connect(s1, s2);
    ports_on(&mut lhs, s1, la);
    ports_on(&mut lhs, s2, lb);
    let mut rhs = ZxDiagram::new();
    let s = spider(&mut rhs, c, a + b);
    ports_on(&mut rhs, s, la + lb);
    let cfg = format!("{} ({a:.4},{b:.4}) legs {la}+{lb}", c.name());
    rep.compare(cfg, &lhs, &rhs, real(1.0));
}

fn color_change(rep: &mut RuleCheckReport, a: f64, k: usize) {
    let mut lhs = ZxDiagram::new();
    let x = lhs.add_x(a);
    ports_on(&mut lhs, x, k);
    let mut rhs = ZxDiagram::new();
    let z = rhs.add_z(a);
    for _ in 0..k {
        let h = rhs.add_h();
        let p = rhs.add_boundary();
        rhs.connect(z, h);
        rhs.connect(h, p);
    }
    rep.compare(format!("phase {a:.4} legs {k}"), &lhs, &rhs, real(1.0));
}

fn bare_wires(k: usize) -> ZxDiagram {
    let mut d = ZxDiagram::new();
    let outs = d.add_boundaries(k);
    let ins = d.add_boundaries(k);
    d.connect_all(&outs, &ins);
    d
}

fn identity(rep: &mut RuleCheckReport, c: Color) {
    let mut lhs = ZxDiagram::new();
    let ports = lhs.add_boundaries(2);
    let s = spider(&mut lhs, c, 0.0);
    lhs.connect(s, ports[0]);
    lhs.connect(s, ports[1]);
    rep.compare(format!("{} two legs", c.name()), &lhs, &bare_wires(1), real(1.0));
}

fn hadamard_square(rep: &mut RuleCheckReport) {
    let mut lhs = ZxDiagram::new();
    let ports = lhs.add_boundaries(2);
    let h1 = lhs.add_h();
    let h2 = lhs.add_h();
    lhs.connect(ports[0], h1);
    lhs.connect(h1, h2);
    lhs.connect(h2, ports[1]);
    rep.compare("H·H".into(), &lhs, &bare_wires(1), real(1.0));
}

/// A π spider of the other colour on the input leg of a phase-α spider.
fn pi_commute(rep: &mut RuleCheckReport, c: Color, a: f64, k: usize) {
    let mut lhs = ZxDiagram::new();
    let input = lhs.add_boundary();
    let outs = lhs.add_boundaries(k);
    let pi = spider(&mut lhs, c.other(), PI);
    let s = spider(&mut lhs, c, a);
    lhs.connect(input, pi);
    lhs.connect(pi, s);
    for &o in &outs {
        lhs.connect(s, o);
    }
    let mut rhs = ZxDiagram::new();
    let input = rhs.add_boundary();
    let outs = rhs.add_boundaries(k);
    let s = spider(&mut rhs, c, -a);
    rhs.connect(input, s);
    for &o in &outs {
        let pi = spider(&mut rhs, c.other(), PI);
        rhs.connect(s, pi);
        rhs.connect(pi, o);
    }
    let cfg = format!("{} phase {a:.4} outputs {k}", c.name());
    rep.compare(cfg, &lhs, &rhs, C64::from_polar(1.0, a));
}

/// A one-leg state of the other colour plugged into a spider with `k` outputs.
fn copy(rep: &mut RuleCheckReport, c: Color, a: f64, state: f64, k: usize) {
    let mut lhs = ZxDiagram::new();
    let st = spider(&mut lhs, c.other(), state);
    let s = spider(&mut lhs, c, a);
    lhs.connect(st, s);
    ports_on(&mut lhs, s, k);
    let mut rhs = ZxDiagram::new();
    for _ in 0..k {
        let st = spider(&mut rhs, c.other(), state);
        ports_on(&mut rhs, st, 1);
    }
    let flip = if state == 0.0 { 0.0 } else { a };
    let expected = C64::from_polar(2f64.powf((1.0 - k as f64) / 2.0), flip);
    let cfg = format!("{} phase {a:.4} state {state:.4} outputs {k}", c.name());
    rep.compare(cfg, &lhs, &rhs, expected);
}

/// Complete bipartite graph between `m` input spiders of colour `c` and `n`
/// output spiders of the other colour, against the two-spider form.
fn bialgebra(rep: &mut RuleCheckReport, c: Color, m: usize, n: usize) {
    let mut lhs = ZxDiagram::new();
    let ins = lhs.add_boundaries(m);
    let outs = lhs.add_boundaries(n);
    let left: Vec<NodeId> = (0..m).map(|_| spider(&mut lhs, c, 0.0)).collect();
    let right: Vec<NodeId> = (0..n).map(|_| spider(&mut lhs, c.other(), 0.0)).collect();
    lhs.connect_all(&ins, &left);
    lhs.connect_all(&outs, &right);
    for &l in &left {
        for &r in &right {
            lhs.connect(l, r);
        }
    }
    let mut rhs = ZxDiagram::new();
    let ins = rhs.add_boundaries(m);
    let outs = rhs.add_boundaries(n);
    let a = spider(&mut rhs, c.other(), 0.0);
    let b = spider(&mut rhs, c, 0.0);
    for &p in &ins {
        rhs.connect(a, p);
    }
    rhs.connect(a, b);
    for &p in &outs {
        rhs.connect(b, p);
    }
    let expected = pow2((1.0 - m as f64) * (n as f64 - 1.0) / 2.0);
    rep.compare(format!("{} K{m},{n}", c.name()), &lhs, &rhs, expected);
}

fn hopf(rep: &mut RuleCheckReport, c: Color) {
    let mut lhs = ZxDiagram::new();
    let ports = lhs.add_boundaries(2);
    let a = spider(&mut lhs, c, 0.0);
    let b = spider(&mut lhs, c.other(), 0.0);
    lhs.connect(ports[0], a);
    lhs.connect(a, b);
    lhs.connect(a, b);
    lhs.connect(b, ports[1]);
    let mut rhs = ZxDiagram::new();
    let ports = rhs.add_boundaries(2);
    let a = spider(&mut rhs, c, 0.0);
    let b = spider(&mut rhs, c.other(), 0.0);
    rhs.connect(ports[0], a);
    rhs.connect(b, ports[1]);
    rep.compare(format!("{} double edge", c.name()), &lhs, &rhs, real(0.5));
}

fn dense_matrix(d: &mut ZxDiagram, m: &CMatrix, s: C64, outs: &[NodeId], ins: &[NodeId]) {
    let k = ins.len();
    debug_assert_eq!(m.nrows(), 1 << outs.len());
    debug_assert_eq!(m.ncols(), 1 << k);
    let mut data = vec![C64::new(0.0, 0.0); m.nrows() * m.ncols()];
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            data[(r << k) | c] = m[(r, c)] * s;
        }
    }
    let node = d.add_dense(data);
    for &o in outs {
        d.connect(node, o);
    }
    for &i in ins {
        d.connect(node, i);
    }
}

fn cnot(rep: &mut RuleCheckReport) {
    let mut lhs = ZxDiagram::new();
    let p = lhs.add_boundaries(4);
    let c = lhs.add_z(0.0);
    let t = lhs.add_x(0.0);
    lhs.connect(c, p[0]);
    lhs.connect(c, p[2]);
    lhs.connect(t, p[1]);
    lhs.connect(t, p[3]);
    lhs.connect(c, t);
    let mut m = CMatrix::zeros(4, 4);
    for (col, row) in [0usize, 1, 3, 2].into_iter().enumerate() {
        m[(row, col)] = real(1.0);
    }
    let mut rhs = ZxDiagram::new();
    let p = rhs.add_boundaries(4);
    dense_matrix(&mut rhs, &m, real(1.0), &p[..2], &p[2..]);
    rep.compare("control Z, target X".into(), &lhs, &rhs, real(FRAC_1_SQRT_2));
}

/// Phase gadget `2^{-1/2} diag(1, e^{iα}, e^{iα}, 1)` on two wire spiders.
fn gadget(d: &mut ZxDiagram, alpha: f64) -> (NodeId, NodeId) {
    let a = d.add_z(0.0);
    let b = d.add_z(0.0);
    let g = d.add_x(0.0);
    let p = d.add_z(alpha);
    d.connect(a, g);
    d.connect(b, g);
    d.connect(g, p);
    (a, b)
}

/// Gadget followed by SWAP against `U(J)`.
fn gate_diagram(rep: &mut RuleCheckReport, j: f64) {
    let alpha = 2.0 * j;
    let mut lhs = ZxDiagram::new();
    let p = lhs.add_boundaries(4);
    let (a, b) = gadget(&mut lhs, alpha);
    lhs.connect(a, p[0]);
    lhs.connect(a, p[3]);
    lhs.connect(b, p[1]);
    lhs.connect(b, p[2]);
    let u = du_xxz_gate(j);
    let m = CMatrix::from_fn(4, 4, |r, c| u[(r, c)]);
    let mut rhs = ZxDiagram::new();
    let p = rhs.add_boundaries(4);
    dense_matrix(&mut rhs, &m, real(1.0), &p[..2], &p[2..]);
    let expected = C64::from_polar(FRAC_1_SQRT_2, alpha / 2.0);
    rep.compare(format!("J {j:.4}"), &lhs, &rhs, expected);
}

/// `D(α)·SWAP·SWAP·D(−α)` against bare wires, with and without the gate
/// prefactors `√2 e^{∓iα/2}`.
fn unitarity(rep: &mut RuleCheckReport, j: f64) {
    let alpha = 2.0 * j;
    for with_prefactor in [false, true] {
        let mut lhs = ZxDiagram::new();
        let outs = lhs.add_boundaries(2);
        let ins = lhs.add_boundaries(2);
        let (a1, b1) = gadget(&mut lhs, -alpha);
        let (a2, b2) = gadget(&mut lhs, alpha);
        lhs.connect(ins[0], a1);
        lhs.connect(ins[1], b1);
        // two crossings return each wire to its position
        lhs.connect(a1, a2);
        lhs.connect(b1, b2);
        lhs.connect(a2, outs[0]);
        lhs.connect(b2, outs[1]);
        let (expected, cfg) = if with_prefactor {
            let c = C64::from_polar(2f64.sqrt(), -alpha / 2.0);
            lhs.scale(c * c.conj());
            (real(1.0), format!("U U† J {j:.4}"))
        } else {
            (real(0.5), format!("D D† J {j:.4}"))
        };
        rep.compare(cfg, &lhs, &bare_wires(2), expected);
    }
}

/// Deterministic phase samples in `(-π, π)`.
pub fn phase_samples(seed: u64, k: usize) -> Vec<f64> {
    let mut rng = crate::sampler::stream_rng(seed, 0);
    (0..k).map(|_| rng.gen_range(-PI..PI)).collect()
}

pub fn check_rule(rule: Rule, phases: &[f64]) -> RuleCheckReport {
    let mut rep = RuleCheckReport::new(rule.id());
    let colors = [Color::Z, Color::X];
    match rule {
        Rule::Fusion => {
            for &c in &colors {
                for w in phases.windows(2) {
                    for (la, lb) in [(2, 2), (1, 2), (0, 2), (1, 1), (3, 0)] {
                        fusion(&mut rep, c, w[0], w[1], la, lb);
                    }
                }
                if phases.len() == 1 {
                    fusion(&mut rep, c, phases[0], -phases[0], 2, 2);
                }
            }
        }
        Rule::ColorChange => {
            for &a in phases {
                for k in 0..=4 {
                    color_change(&mut rep, a, k);
                }
            }
        }
        Rule::Identity => {
            for &c in &colors {
                identity(&mut rep, c);
            }
        }
        Rule::HadamardSquare => hadamard_square(&mut rep),
        Rule::PiCommute => {
            for &c in &colors {
                for &a in phases {
                    for k in 1..=3 {
                        pi_commute(&mut rep, c, a, k);
                    }
                }
            }
        }
        Rule::Copy => {
            for &c in &colors {
                for &a in phases {
                    for state in [0.0, PI] {
                        for k in 1..=3 {
                            copy(&mut rep, c, a, state, k);
                        }
                    }
                }
            }
        }
        Rule::Bialgebra => {
            for &c in &colors {
                bialgebra(&mut rep, c, 2, 2);
            }
        }
        Rule::Hopf => {
            for &c in &colors {
                hopf(&mut rep, c);
            }
        }
        Rule::GeneralBialgebra => {
            for &c in &colors {
                for (m, n) in [(1, 3), (2, 3), (3, 2), (3, 3), (4, 2), (3, 1)] {
                    bialgebra(&mut rep, c, m, n);
                }
            }
        }
        Rule::Cnot => cnot(&mut rep),
        Rule::GateDiagram => {
            for &a in phases {
                gate_diagram(&mut rep, a);
            }
        }
        Rule::Unitarity => {
            for &a in phases {
                unitarity(&mut rep, a);
            }
        }
    }
    rep
}

/// Wire spiders of colour `c` on `m` wires, all joined to one hub of the
/// other colour: `D_z = 2^{1-n} Λ_z` for `c = Z` and `m = 2n`.
fn projector_block(d: &mut ZxDiagram, c: Color, m: usize) -> Vec<NodeId> {
    let hub = spider(d, c.other(), 0.0);
    (0..m)
        .map(|_| {
            let w = spider(d, c, 0.0);
            d.connect(w, hub);
            w
        })
        .collect()
}

/// `Λ = 2^{2n-1} D_x D_z`; returns the X-side and Z-side wire spiders.
fn lambda_block(d: &mut ZxDiagram, m: usize) -> (Vec<NodeId>, Vec<NodeId>) {
    let xs = projector_block(d, Color::X, m);
    let zs = projector_block(d, Color::Z, m);
    d.connect_all(&xs, &zs);
    d.scale(pow2(m as f64 - 1.0));
    (xs, zs)
}

/// Per-wire spiders with legs to `a[i]` and `b[i]`.
fn wire_spiders(d: &mut ZxDiagram, c: Color, a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let s = spider(d, c, 0.0);
            wire(d, x, s);
            wire(d, s, y);
            s
        })
        .collect()
}

fn lambda_matrices(n: usize) -> (CMatrix, CMatrix, CMatrix) {
    let l = lambda_tensors(n).expect("n in range");
    (l.full.data, l.x.data, l.z.data)
}

fn color_lambda(c: Color, n: usize) -> CMatrix {
    let (_, x, z) = lambda_matrices(n);
    match c {
        Color::Z => z,
        Color::X => x,
    }
}

/// `(2^{1-n}Λ_c)² = 2^{1-n}·(2^{1-n}Λ_c)`.
fn lemma_projector(rep: &mut RuleCheckReport, c: Color, n: usize) {
    let m = 2 * n;
    let norm = 2f64.powi(1 - n as i32);
    let mut lhs = ZxDiagram::new();
    let outs = lhs.add_boundaries(m);
    let ins = lhs.add_boundaries(m);
    let w1 = projector_block(&mut lhs, c, m);
    let w2 = projector_block(&mut lhs, c, m);
    lhs.connect_all(&ins, &w1);
    lhs.connect_all(&w1, &w2);
    lhs.connect_all(&w2, &outs);
    let mut rhs = ZxDiagram::new();
    let outs = rhs.add_boundaries(m);
    let ins = rhs.add_boundaries(m);
    dense_matrix(&mut rhs, &color_lambda(c, n), real(norm), &outs, &ins);
    rep.compare(format!("D_{} n={n}", c.name().to_lowercase()), &lhs, &rhs, real(norm));
}

/// A copy spider of colour `c.other()` on each wire, `D_c` on both branches,
/// merged again: equals `2^{-n} D_c`.
fn lemma_across(rep: &mut RuleCheckReport, c: Color, n: usize) {
    let m = 2 * n;
    let norm = 2f64.powi(1 - n as i32);
    let mut lhs = ZxDiagram::new();
    let outs = lhs.add_boundaries(m);
    let ins = lhs.add_boundaries(m);
    let split: Vec<NodeId> = (0..m).map(|_| spider(&mut lhs, c.other(), 0.0)).collect();
    let merge: Vec<NodeId> = (0..m).map(|_| spider(&mut lhs, c.other(), 0.0)).collect();
    lhs.connect_all(&ins, &split);
    lhs.connect_all(&merge, &outs);
    for _ in 0..2 {
        let w = projector_block(&mut lhs, c, m);
        lhs.connect_all(&split, &w);
        lhs.connect_all(&w, &merge);
    }
    let mut rhs = ZxDiagram::new();
    let outs = rhs.add_boundaries(m);
    let ins = rhs.add_boundaries(m);
    dense_matrix(&mut rhs, &color_lambda(c, n), real(norm), &outs, &ins);
    let cfg = format!("D_{0} ⊙ D_{0} n={n}", c.name().to_lowercase());
    rep.compare(cfg, &lhs, &rhs, pow2(-(n as f64)));
}

/// Two `Λ` on the branches of a copy spider, merged again, equal one `Λ`.
fn lemma_lambda_twice(rep: &mut RuleCheckReport, n: usize) {
    let m = 2 * n;
    let mut lhs = ZxDiagram::new();
    let outs = lhs.add_boundaries(m);
    let ins = lhs.add_boundaries(m);
    let split: Vec<NodeId> = (0..m).map(|_| lhs.add_z(0.0)).collect();
    let merge: Vec<NodeId> = (0..m).map(|_| lhs.add_z(0.0)).collect();
    lhs.connect_all(&ins, &split);
    lhs.connect_all(&merge, &outs);
    for _ in 0..2 {
        let (xs, zs) = lambda_block(&mut lhs, m);
        lhs.connect_all(&split, &zs);
        lhs.connect_all(&xs, &merge);
    }
    let mut rhs = ZxDiagram::new();
    let outs = rhs.add_boundaries(m);
    let ins = rhs.add_boundaries(m);
    dense_matrix(&mut rhs, &lambda_matrices(n).0, real(1.0), &outs, &ins);
    rep.compare(format!("Λ ⊙ Λ n={n}"), &lhs, &rhs, real(1.0));
}

/// `D_z^{(2n)} (1 ⊗ D_z^{(n)}) = 2^{-n} D_z^{(n)} ⊗ D_z^{(n)}`.
fn lemma_gadget_split(rep: &mut RuleCheckReport, n: usize) {
    let m = 2 * n;
    let norm = 2f64.powi(1 - n as i32);
    let mut lhs = ZxDiagram::new();
    let out_p = lhs.add_boundaries(m);
    let out_q = lhs.add_boundaries(m);
    let in_p = lhs.add_boundaries(m);
    let in_q = lhs.add_boundaries(m);
    let big = projector_block(&mut lhs, Color::Z, 2 * m);
    let small = projector_block(&mut lhs, Color::Z, m);
    lhs.connect_all(&in_p, &big[..m]);
    lhs.connect_all(&big[..m], &out_p);
    lhs.connect_all(&in_q, &small);
    lhs.connect_all(&small, &big[m..]);
    lhs.connect_all(&big[m..], &out_q);
    let z = color_lambda(Color::Z, n);
    let zz = z.kronecker(&z);
    let mut rhs = ZxDiagram::new();
    let out_p = rhs.add_boundaries(m);
    let out_q = rhs.add_boundaries(m);
    let in_p = rhs.add_boundaries(m);
    let in_q = rhs.add_boundaries(m);
    let outs: Vec<NodeId> = out_p.iter().chain(&out_q).copied().collect();
    let ins: Vec<NodeId> = in_p.iter().chain(&in_q).copied().collect();
    dense_matrix(&mut rhs, &zz, real(norm * norm), &outs, &ins);
    rep.compare(format!("split n={n}"), &lhs, &rhs, pow2(-(n as f64)));
}

/// `Λ` on a loop hanging off each wire leaves only `Λ_z`.
fn lemma_loop(rep: &mut RuleCheckReport, n: usize) {
    let m = 2 * n;
    let mut lhs = ZxDiagram::new();
    let outs = lhs.add_boundaries(m);
    let ins = lhs.add_boundaries(m);
    let joints = wire_spiders(&mut lhs, Color::Z, &ins, &outs);
    let (xs, zs) = lambda_block(&mut lhs, m);
    lhs.connect_all(&joints, &zs);
    lhs.connect_all(&xs, &joints);
    let mut rhs = ZxDiagram::new();
    let outs = rhs.add_boundaries(m);
    let ins = rhs.add_boundaries(m);
    dense_matrix(&mut rhs, &color_lambda(Color::Z, n), real(1.0), &outs, &ins);
    rep.compare(format!("loop n={n}"), &lhs, &rhs, real(1.0));
}

/// Three-legged X spiders with `D_z` on legs a, b equal the same with
/// `D_z` on legs a, c.
fn lemma_slide(rep: &mut RuleCheckReport, n: usize) {
    let m = 2 * n;
    let norm = 2f64.powi(1 - n as i32);
    let mut lhs = ZxDiagram::new();
    let pa = lhs.add_boundaries(m);
    let pb = lhs.add_boundaries(m);
    let pc = lhs.add_boundaries(m);
    let hubs: Vec<NodeId> = (0..m).map(|_| lhs.add_x(0.0)).collect();
    let wa = projector_block(&mut lhs, Color::Z, m);
    let wb = projector_block(&mut lhs, Color::Z, m);
    lhs.connect_all(&pa, &wa);
    lhs.connect_all(&wa, &hubs);
    lhs.connect_all(&pb, &wb);
    lhs.connect_all(&wb, &hubs);
    lhs.connect_all(&hubs, &pc);
    let z = color_lambda(Color::Z, n);
    let mut rhs = ZxDiagram::new();
    let pa = rhs.add_boundaries(m);
    let pb = rhs.add_boundaries(m);
    let pc = rhs.add_boundaries(m);
    let hubs: Vec<NodeId> = (0..m).map(|_| rhs.add_x(0.0)).collect();
    dense_matrix(&mut rhs, &z, real(norm), &pa, &hubs);
    rhs.connect_all(&pb, &hubs);
    dense_matrix(&mut rhs, &z, real(norm), &hubs, &pc);
    rep.compare(format!("slide n={n}"), &lhs, &rhs, real(1.0));
}

pub const LEMMA_COUNT: usize = 6;

/// Lemma `k` in `1..=6` at replica index `n` in `1..=2`.
///
/// 1 projector, 2 across a copy pair, 3 two `Λ` on one spider, 4 gadget
/// split, 5 `Λ` on a loop, 6 sliding `Λ_z` through an X spider.
pub fn check_lemma(k: usize, n: usize) -> RuleCheckReport {
    let mut rep = RuleCheckReport::new(format!("lemma{k}"));
    if !(1..=2).contains(&n) {
        rep.cases.push(CaseReport::failed(format!("n={n} outside 1..=2")));
        return rep;
    }
    match k {
        1 => {
            lemma_projector(&mut rep, Color::Z, n);
            lemma_projector(&mut rep, Color::X, n);
        }
        2 => {
            lemma_across(&mut rep, Color::X, n);
            lemma_across(&mut rep, Color::Z, n);
        }
        3 => lemma_lambda_twice(&mut rep, n),
        4 => lemma_gadget_split(&mut rep, n),
        5 => lemma_loop(&mut rep, n),
        6 => lemma_slide(&mut rep, n),
        _ => rep.cases.push(CaseReport::failed(format!("no lemma {k}"))),
    }
    rep
}

/// Spider forms of `Λ_z`, `Λ_x` and `Λ = 2Λ_xΛ_z` against their matrices.
pub fn check_lsquiggle(n: usize) -> RuleCheckReport {
    let mut rep = RuleCheckReport::new(format!("lambda-forms n={n}"));
    if !(1..=2).contains(&n) {
        rep.cases.push(CaseReport::failed(format!("n={n} outside 1..=2")));
        return rep;
    }
    let m = 2 * n;
    let (full, x, z) = lambda_matrices(n);
    for (c, mat) in [(Color::Z, &z), (Color::X, &x)] {
        let mut lhs = ZxDiagram::new();
        let outs = lhs.add_boundaries(m);
        let ins = lhs.add_boundaries(m);
        let w = projector_block(&mut lhs, c, m);
        lhs.connect_all(&ins, &w);
        lhs.connect_all(&w, &outs);
        lhs.scale(pow2(n as f64 - 1.0));
        let mut rhs = ZxDiagram::new();
        let outs = rhs.add_boundaries(m);
        let ins = rhs.add_boundaries(m);
        dense_matrix(&mut rhs, mat, real(1.0), &outs, &ins);
        rep.compare(format!("Λ_{}", c.name().to_lowercase()), &lhs, &rhs, real(1.0));
    }
    let mut lhs = ZxDiagram::new();
    let outs = lhs.add_boundaries(m);
    let ins = lhs.add_boundaries(m);
    let (xs, zs) = lambda_block(&mut lhs, m);
    lhs.connect_all(&ins, &zs);
    lhs.connect_all(&xs, &outs);
    let mut rhs = ZxDiagram::new();
    let outs = rhs.add_boundaries(m);
    let ins = rhs.add_boundaries(m);
    dense_matrix(&mut rhs, &full, real(1.0), &outs, &ins);
    rep.compare("2 Λ_x Λ_z = Λ".into(), &lhs, &rhs, real(1.0));
    rep
}

/// Rules, lemmas at `n = 1, 2` and the spider forms, in a fixed order.
pub fn certify(phases: &[f64]) -> Vec<RuleCheckReport> {
    let mut jobs: Vec<Box<dyn Fn() -> RuleCheckReport + Sync>> = Vec::new();
    for rule in Rule::ALL {
        jobs.push(Box::new(move || check_rule(rule, phases)));
    }
    for n in 1..=2 {
        for k in 1..=LEMMA_COUNT {
            jobs.push(Box::new(move || {
                let mut r = check_lemma(k, n);
                r.id = format!("{} n={n}", r.id);
                r
            }));
        }
        jobs.push(Box::new(move || check_lsquiggle(n)));
    }
    jobs.par_iter().map(|f| f()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phases() -> Vec<f64> {
        let mut p = vec![PI / 3.0, PI / 5.0];
        p.extend(phase_samples(11, 3));
        p
    }

    #[test]
    fn fusion_example() {
        let mut rep = RuleCheckReport::new("f");
        fusion(&mut rep, Color::Z, PI / 3.0, PI / 5.0, 2, 2);
        assert!(rep.max_deviation() < 1e-12);
    }

    #[test]
    fn every_rule_holds_exactly() {
        let p = phases();
        for rule in Rule::ALL {
            let rep = check_rule(rule, &p);
            assert!(rep.passed(RULE_TOL), "{}: {:?}", rule.id(), rep);
        }
    }

    #[test]
    fn bialgebra_scalar() {
        let rep = check_rule(Rule::Bialgebra, &[]);
        for c in &rep.cases {
            assert!((c.inferred_scalar[0] - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!(c.inferred_scalar[1].abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_scalar_is_reported() {
        let mut rep = RuleCheckReport::new("b");
        let mut lhs = ZxDiagram::new();
        let p = lhs.add_z(0.0);
        ports_on(&mut lhs, p, 1);
        let mut rhs = lhs.clone();
        rhs.scale(real(2.0));
        rep.compare("x".into(), &lhs, &rhs, real(1.0));
        assert!(!rep.passed(RULE_TOL));
        assert!((rep.cases[0].inferred_scalar[0] - 0.5).abs() < 1e-15);
        assert!(rep.cases[0].residual < 1e-15);
    }

    #[test]
    fn lemmas_hold_for_n_1_and_2() {
        for n in 1..=2 {
            for k in 1..=LEMMA_COUNT {
                let rep = check_lemma(k, n);
                assert!(rep.passed(RULE_TOL), "lemma {k} n={n}: {:?}", rep);
            }
        }
    }

    #[test]
    fn lambda_forms() {
        for n in 1..=2 {
            let rep = check_lsquiggle(n);
            assert!(rep.passed(RULE_TOL), "{:?}", rep);
        }
    }

    #[test]
    fn out_of_range_lemma_fails() {
        assert!(!check_lemma(7, 1).passed(RULE_TOL));
        assert!(!check_lemma(1, 3).passed(RULE_TOL));
    }

    #[test]
    fn certify_is_reproducible() {
        let p = phase_samples(3, 3);
        let a = certify(&p);
        let b = certify(&p);
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.passed(RULE_TOL)));
    }
}
