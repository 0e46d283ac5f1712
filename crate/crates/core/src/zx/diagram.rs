//! Spider graphs, their dense evaluation and a line-oriented text format.

use super::tensor::{Label, Tensor};
use crate::error::{Error, Result};
use crate::C64;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

pub type NodeId = usize;

/// Open wires allowed in a dense evaluation.
pub const MAX_BOUNDARY: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Z(f64),
    X(f64),
    H,
    /// Open port; exactly one incident edge.
    Boundary,
    /// Arbitrary dense tensor; legs follow edge insertion order, first leg
    /// most significant.
    Dense(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZxDiagram {
    nodes: BTreeMap<NodeId, NodeKind>,
    edges: Vec<(NodeId, NodeId)>,
    boundary: Vec<NodeId>,
    scalar: C64,
    next_id: NodeId,
}

impl Default for ZxDiagram {
    fn default() -> Self {
        ZxDiagram::new()
    }
}

/// Result of [`ZxDiagram::evaluate`]: index bits follow the boundary order,
/// first port most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ZxTensor {
    pub n_ports: usize,
    pub data: Vec<C64>,
}

impl ZxTensor {
    /// Entry `(r, c)` when the first `n_rows` ports are read as the row index.
    pub fn matrix_entry(&self, n_rows: usize, r: usize, c: usize) -> C64 {
        self.data[(r << (self.n_ports - n_rows)) | c]
    }
}

pub fn z_spider_data(legs: usize, phase: f64) -> Vec<C64> {
    let mut d = vec![C64::new(0.0, 0.0); 1 << legs];
    d[0] += C64::new(1.0, 0.0);
    d[(1 << legs) - 1] += C64::from_polar(1.0, phase);
    d
}

pub fn x_spider_data(legs: usize, phase: f64) -> Vec<C64> {
    let norm = 2f64.powf(-(legs as f64) / 2.0);
    let e = C64::from_polar(1.0, phase);
    (0..1usize << legs)
        .map(|b| {
            let sign = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (C64::new(1.0, 0.0) + e * sign) * norm
        })
        .collect()
}

pub fn hadamard_data() -> Vec<C64> {
    let h = FRAC_1_SQRT_2;
    [h, h, h, -h].iter().map(|&x| C64::new(x, 0.0)).collect()
}

impl ZxDiagram {
    pub fn new() -> Self {
        ZxDiagram {
            nodes: BTreeMap::new(),
            edges: Vec::new(),
            boundary: Vec::new(),
            scalar: C64::new(1.0, 0.0),
            next_id: 0,
        }
    }

    pub fn add_node(&mut self, kind: NodeKind) -> NodeId {
        let id = self.next_id;
        self.insert_node(id, kind);
        id
    }

    /// Insert with an explicit id; replaces any node already there.
    pub fn insert_node(&mut self, id: NodeId, kind: NodeKind) {
        if kind == NodeKind::Boundary && !self.boundary.contains(&id) {
            self.boundary.push(id);
        }
        self.nodes.insert(id, kind);
        self.next_id = self.next_id.max(id + 1);
    }

    pub fn add_z(&mut self, phase: f64) -> NodeId {
        self.add_node(NodeKind::Z(phase))
    }

    pub fn add_x(&mut self, phase: f64) -> NodeId {
        self.add_node(NodeKind::X(phase))
    }

    pub fn add_h(&mut self) -> NodeId {
        self.add_node(NodeKind::H)
    }

    /// New open port, appended to the boundary order.
    pub fn add_boundary(&mut self) -> NodeId {
        self.add_node(NodeKind::Boundary)
    }

    pub fn add_boundaries(&mut self, k: usize) -> Vec<NodeId> {
        (0..k).map(|_| self.add_boundary()).collect()
    }

    pub fn add_dense(&mut self, data: Vec<C64>) -> NodeId {
        self.add_node(NodeKind::Dense(data))
    }

    pub fn connect(&mut self, a: NodeId, b: NodeId) {
        self.edges.push((a, b));
    }

    /// Edges `a[i]-b[i]`.
    pub fn connect_all(&mut self, a: &[NodeId], b: &[NodeId]) {
        for (&x, &y) in a.iter().zip(b) {
            self.connect(x, y);
        }
    }

    pub fn scale(&mut self, s: C64) {
        self.scalar *= s;
    }

    pub fn set_scalar(&mut self, s: C64) {
        self.scalar = s;
    }

    pub fn scalar(&self) -> C64 {
        self.scalar
    }

    pub fn boundary(&self) -> &[NodeId] {
        &self.boundary
    }

    /// Reorder the open ports; `order` must be a permutation of the boundary.
    pub fn set_boundary_order(&mut self, order: Vec<NodeId>) -> Result<()> {
        let mut a = order.clone();
        let mut b = self.boundary.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::InvalidArgument(
                "boundary order is not a permutation of the ports".into(),
            ));
        }
        self.boundary = order;
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeKind> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeKind)> {
        self.nodes.iter().map(|(&k, v)| (k, v))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == id) as usize + (b == id) as usize)
            .sum()
    }

    /// Swap Z and X on every spider.
    pub fn color_swapped(&self) -> ZxDiagram {
        let mut d = self.clone();
        for k in d.nodes.values_mut() {
            *k = match *k {
                NodeKind::Z(p) => NodeKind::X(p),
                NodeKind::X(p) => NodeKind::Z(p),
                ref other => other.clone(),
            };
        }
        d
    }

    /// Insert a Hadamard on every boundary wire.
    pub fn hadamard_boundary(&self) -> ZxDiagram {
        let mut d = self.clone();
        let ports = d.boundary.clone();
        for p in ports {
            let h = d.add_h();
            for e in d.edges.iter_mut() {
                if e.0 == p {
                    e.0 = h;
                } else if e.1 == p {
                    e.1 = h;
                }
            }
            d.edges.push((h, p));
        }
        d
    }

    /// Same diagram with node `k` renamed to `perm[k]`.
    pub fn relabeled(&self, perm: &[NodeId]) -> ZxDiagram {
        let mut d = ZxDiagram::new();
        for (&id, kind) in &self.nodes {
            if *kind != NodeKind::Boundary {
                d.insert_node(perm[id], kind.clone());
            }
        }
        for &p in &self.boundary {
            d.insert_node(perm[p], NodeKind::Boundary);
        }
        d.edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        d.scalar = self.scalar;
        d
    }

    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.edges {
            for id in [a, b] {
                if !self.nodes.contains_key(&id) {
                    return Err(Error::InvalidArgument(format!("edge to unknown node {id}")));
                }
            }
        }
        for &p in &self.boundary {
            let deg = self.degree(p);
            if deg != 1 {
                return Err(Error::InvalidArgument(format!(
                    "boundary port {p} has {deg} incident edges"
                )));
            }
        }
        if self.boundary.len() > MAX_BOUNDARY {
            return Err(Error::MemoryGuard {
                what: format!("zx evaluation with {} boundary wires", self.boundary.len()),
                bytes: 16u128 << self.boundary.len(),
                limit: 16u128 << MAX_BOUNDARY,
            });
        }
        for (&id, kind) in &self.nodes {
            let deg = self.degree(id);
            match kind {
                NodeKind::H if deg != 2 => {
                    return Err(Error::InvalidArgument(format!(
                        "Hadamard {id} has {deg} legs"
                    )))
                }
                NodeKind::Dense(d) if d.len() != 1 << deg => {
                    return Err(Error::LengthMismatch {
                        expected: 1 << deg,
                        found: d.len(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Contract all internal wires and return the tensor over the boundary.
    pub fn evaluate(&self) -> Result<ZxTensor> {
        self.validate()?;
        let mut legs: BTreeMap<NodeId, Vec<Label>> = BTreeMap::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            legs.entry(a).or_default().push(e);
            legs.entry(b).or_default().push(e);
        }
        let mut next_label = self.edges.len();
        let mut open: Vec<Label> = Vec::with_capacity(self.boundary.len());
        let mut tensors: Vec<(NodeId, Tensor)> = Vec::new();
        for &p in &self.boundary {
            let e = legs[&p][0];
            if open.contains(&e) {
                // bare wire between two ports
                let l = next_label;
                next_label += 1;
                let mut id = vec![C64::new(0.0, 0.0); 4];
                id[0] = C64::new(1.0, 0.0);
                id[3] = C64::new(1.0, 0.0);
                tensors.push((p, Tensor::from_legs(vec![e, l], id)));
                open.push(l);
            } else {
                open.push(e);
            }
        }
        for (&id, kind) in &self.nodes {
            let ls = legs.get(&id).cloned().unwrap_or_default();
            let k = ls.len();
            let data = match kind {
                NodeKind::Boundary => continue,
                NodeKind::Z(p) => z_spider_data(k, *p),
                NodeKind::X(p) => x_spider_data(k, *p),
                NodeKind::H => hadamard_data(),
                NodeKind::Dense(d) => d.clone(),
            };
            tensors.push((id, Tensor::from_legs(ls, data)));
        }
        // self-loops leave a label on a single tensor
        for (_, t) in tensors.iter_mut() {
            let lonely: Vec<Label> = t.labels.iter().copied().filter(|l| !open.contains(l)).collect();
            for l in lonely {
                let elsewhere = self
                    .edges
                    .get(l)
                    .map(|&(a, b)| a != b)
                    .unwrap_or(true);
                if !elsewhere {
                    let ones = Tensor {
                        labels: vec![l],
                        data: vec![C64::new(1.0, 0.0); 2],
                    };
                    *t = t.contract(&ones)?;
                }
            }
        }
        let result = contract_greedy(tensors)?;
        let mut out = result.permuted(&open);
        for z in out.data.iter_mut() {
            *z *= self.scalar;
        }
        Ok(ZxTensor {
            n_ports: open.len(),
            data: out.data,
        })
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        for (&id, kind) in &self.nodes {
            match kind {
                NodeKind::Z(p) => writeln!(s, "node {id} Z {p:?}").unwrap(),
                NodeKind::X(p) => writeln!(s, "node {id} X {p:?}").unwrap(),
                NodeKind::H => writeln!(s, "node {id} H").unwrap(),
                NodeKind::Boundary => {}
                NodeKind::Dense(_) => {
                    return Err(Error::Unsupported(
                        "dense nodes have no text form".into(),
                    ))
                }
            }
        }
        for &(a, b) in &self.edges {
            writeln!(s, "edge {a} {b}").unwrap();
        }
        let ids: Vec<String> = self.boundary.iter().map(|b| b.to_string()).collect();
        writeln!(s, "boundary {}", ids.join(" ")).unwrap();
        writeln!(s, "scalar {:?} {:?}", self.scalar.re, self.scalar.im).unwrap();
        Ok(s)
    }

    /// Parse the text format. Ids listed after `boundary` are open ports and
    /// must not also appear on a `node` line.
    pub fn parse(text: &str) -> Result<ZxDiagram> {
        let mut d = ZxDiagram::new();
        let mut edges = Vec::new();
        let mut ports: Option<Vec<NodeId>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| Error::Parse { line, msg };
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            let id = |t: &str| -> Result<NodeId> {
                t.parse().map_err(|_| err(format!("bad node id {t:?}")))
            };
            let num = |t: &str| -> Result<f64> {
                t.parse().map_err(|_| err(format!("bad number {t:?}")))
            };
            match toks[0] {
                "node" => {
                    if toks.len() < 3 || toks.len() > 4 {
                        return Err(err("expected `node <id> <Z|X|H> [phase]`".into()));
                    }
                    let nid = id(toks[1])?;
                    if d.nodes.contains_key(&nid) {
                        return Err(err(format!("duplicate node {nid}")));
                    }
                    let phase = toks.get(3).map(|t| num(t)).transpose()?.unwrap_or(0.0);
                    let kind = match toks[2] {
                        "Z" => NodeKind::Z(phase),
                        "X" => NodeKind::X(phase),
                        "H" if toks.len() == 3 => NodeKind::H,
                        "H" => return Err(err("Hadamard takes no phase".into())),
                        other => return Err(err(format!("unknown node type {other:?}"))),
                    };
                    d.insert_node(nid, kind);
                }
                "edge" => {
                    if toks.len() != 3 {
                        return Err(err("expected `edge <id> <id>`".into()));
                    }
                    edges.push((id(toks[1])?, id(toks[2])?, line));
                }
                "boundary" => {
                    if ports.is_some() {
                        return Err(err("boundary given twice".into()));
                    }
                    ports = Some(toks[1..].iter().map(|t| id(t)).collect::<Result<_>>()?);
                }
                "scalar" => {
                    if toks.len() != 3 {
                        return Err(err("expected `scalar <re> <im>`".into()));
                    }
                    d.scalar = C64::new(num(toks[1])?, num(toks[2])?);
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        for p in ports.unwrap_or_default() {
            if d.nodes.contains_key(&p) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("boundary id {p} is also a node"),
                });
            }
            d.insert_node(p, NodeKind::Boundary);
        }
        for (a, b, line) in edges {
            for x in [a, b] {
                if !d.nodes.contains_key(&x) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("edge to unknown node {x}"),
                    });
                }
            }
            d.connect(a, b);
        }
        d.validate()?;
        Ok(d)
    }
}

/// Repeatedly contract the connected pair with the smallest result, ties
/// broken by the smaller node ids. Disconnected pieces are joined last.
fn contract_greedy(mut ts: Vec<(NodeId, Tensor)>) -> Result<Tensor> {
    if ts.is_empty() {
        return Ok(Tensor::scalar(C64::new(1.0, 0.0)));
    }
    while ts.len() > 1 {
        let mut best: Option<(bool, usize, NodeId, NodeId, usize, usize)> = None;
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                let connected = ts[i].1.shares_label(&ts[j].1);
                let size = ts[i].1.result_labels(&ts[j].1).len();
                let (a, b) = (ts[i].0.min(ts[j].0), ts[i].0.max(ts[j].0));
                let key = (!connected, size, a, b, i, j);
                if best.is_none_or(|k| key < k) {
                    best = Some(key);
                }
            }
        }
        let (_, _, _, _, i, j) = best.unwrap();
        let (idj, tj) = ts.remove(j);
        let (idi, ti) = ts.remove(i);
        ts.push((idi.min(idj), ti.contract(&tj)?));
    }
    Ok(ts.pop().unwrap().1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::du_xxz_gate;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn one_leg_x_is_root2_zero() {
        let mut d = ZxDiagram::new();
        let x = d.add_x(0.0);
        let p = d.add_boundary();
        d.connect(x, p);
        let t = d.evaluate().unwrap();
        assert!(close(t.data[0], C64::new(SQRT_2, 0.0)));
        assert!(close(t.data[1], C64::new(0.0, 0.0)));
    }

    #[test]
    fn one_leg_z_is_root2_plus() {
        let mut d = ZxDiagram::new();
        let z = d.add_z(0.0);
        let p = d.add_boundary();
        d.connect(z, p);
        let t = d.evaluate().unwrap();
        assert!(close(t.data[0], C64::new(1.0, 0.0)));
        assert!(close(t.data[1], C64::new(1.0, 0.0)));
    }

    #[test]
    fn cnot_diagram() {
        let mut d = ZxDiagram::new();
        let ports = d.add_boundaries(4); // o1 o2 i1 i2
        let c = d.add_z(0.0);
        let t = d.add_x(0.0);
        d.connect(c, ports[0]);
        d.connect(c, ports[2]);
        d.connect(t, ports[1]);
        d.connect(t, ports[3]);
        d.connect(c, t);
        d.scale(C64::new(SQRT_2, 0.0));
        let m = d.evaluate().unwrap();
        let cnot = [0usize, 1, 3, 2];
        for r in 0..4 {
            for col in 0..4 {
                let want = if cnot[col] == r { 1.0 } else { 0.0 };
                assert!(close(m.matrix_entry(2, r, col), C64::new(want, 0.0)), "{r} {col}");
            }
        }
    }

    #[test]
    fn phase_gadget_swap_is_gate() {
        let j = 0.37;
        let alpha = 2.0 * j;
        let mut d = ZxDiagram::new();
        let ports = d.add_boundaries(4);
        let a = d.add_z(0.0);
        let b = d.add_z(0.0);
        let g = d.add_x(0.0);
        let p = d.add_z(alpha);
        d.connect(a, ports[0]);
        d.connect(a, ports[3]);
        d.connect(b, ports[1]);
        d.connect(b, ports[2]);
        d.connect(a, g);
        d.connect(b, g);
        d.connect(g, p);
        d.scale(C64::from_polar(SQRT_2, -alpha / 2.0));
        let m = d.evaluate().unwrap();
        let u = du_xxz_gate(j);
        for r in 0..4 {
            for col in 0..4 {
                assert!(close(m.matrix_entry(2, r, col), u[(r, col)]));
            }
        }
    }

    #[test]
    fn self_loop_on_z_is_trace() {
        let mut d = ZxDiagram::new();
        let z = d.add_z(0.4);
        let p = d.add_boundary();
        d.connect(z, z);
        d.connect(z, p);
        let t = d.evaluate().unwrap();
        assert!(close(t.data[0], C64::new(1.0, 0.0)));
        assert!(close(t.data[1], C64::from_polar(1.0, 0.4)));
    }

    #[test]
    fn bare_wire_between_ports() {
        let mut d = ZxDiagram::new();
        let p = d.add_boundaries(2);
        d.connect(p[0], p[1]);
        let t = d.evaluate().unwrap();
        assert_eq!(t.data.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn boundary_guard() {
        let mut d = ZxDiagram::new();
        let z = d.add_z(0.0);
        for _ in 0..17 {
            let p = d.add_boundary();
            d.connect(z, p);
        }
        assert!(matches!(d.evaluate(), Err(Error::MemoryGuard { .. })));
    }

    #[test]
    fn dangling_port_rejected() {
        let mut d = ZxDiagram::new();
        d.add_boundary();
        assert!(d.evaluate().is_err());
    }

    #[test]
    fn text_roundtrip() {
        let text = "# cnot\nnode 10 Z\nnode 11 X 0\nedge 10 11\nedge 10 0\nedge 10 2\n\
                    edge 11 1\nedge 11 3\nboundary 0 1 2 3\nscalar 1.4142135623730951 0\n";
        let d = ZxDiagram::parse(text).unwrap();
        let back = ZxDiagram::parse(&d.to_text().unwrap()).unwrap();
        assert_eq!(d.evaluate().unwrap(), back.evaluate().unwrap());
        assert!(close(d.evaluate().unwrap().matrix_entry(2, 3, 2), C64::new(1.0, 0.0)));
    }

    #[test]
    fn parse_errors_carry_line() {
        let e = ZxDiagram::parse("node 0 Z\nnode 1 Q\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(ZxDiagram::parse("node 0 H 0.3\n").is_err());
        assert!(ZxDiagram::parse("edge 0 1\n").is_err());
    }

    fn random_diagram(spec: &[(u8, f64)], edges: &[(usize, usize)], n_ports: usize) -> ZxDiagram {
        let mut d = ZxDiagram::new();
        let ids: Vec<NodeId> = spec
            .iter()
            .map(|&(c, p)| match c % 3 {
                0 => d.add_z(p),
                1 => d.add_x(p),
                _ => d.add_z(-p),
            })
            .collect();
        for &(a, b) in edges {
            d.connect(ids[a % ids.len()], ids[b % ids.len()]);
        }
        for k in 0..n_ports {
            let p = d.add_boundary();
            d.connect(ids[k % ids.len()], p);
        }
        d
    }

    fn max_diff(a: &ZxTensor, b: &ZxTensor) -> f64 {
        a.data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn color_duality(spec in prop::collection::vec((0u8..3, -PI..PI), 1..6),
                         edges in prop::collection::vec((0usize..6, 0usize..6), 0..8),
                         n_ports in 0usize..5) {
            let d = random_diagram(&spec, &edges, n_ports);
            let dual = d.color_swapped().hadamard_boundary();
            prop_assert!(max_diff(&d.evaluate().unwrap(), &dual.evaluate().unwrap()) < 1e-10);
        }

        #[test]
        fn multilinear_in_scalar(spec in prop::collection::vec((0u8..3, -PI..PI), 1..6),
                                 edges in prop::collection::vec((0usize..6, 0usize..6), 0..8),
                                 s in (-2.0f64..2.0, -2.0f64..2.0)) {
            let d = random_diagram(&spec, &edges, 3);
            let mut e = d.clone();
            let s = C64::new(s.0, s.1);
            e.scale(s);
            let a = d.evaluate().unwrap();
            let b = e.evaluate().unwrap();
            for (x, y) in a.data.iter().zip(&b.data) {
                prop_assert!((x * s - y).norm() < 1e-10);
            }
        }

        #[test]
        fn insertion_order_irrelevant(spec in prop::collection::vec((0u8..3, -PI..PI), 5),
                                      edges in prop::collection::vec((0usize..6, 0usize..6), 0..8),
                                      perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle()) {
            let d = random_diagram(&spec, &edges, 3);
            let e = d.relabeled(&perm);
            prop_assert!(max_diff(&d.evaluate().unwrap(), &e.evaluate().unwrap()) < 1e-12);
        }
    }
}
