//! Theta detection and minimum-total-length theta extraction.
//!
//! Existence is decided from the block decomposition: a graph contains a
//! theta iff some biconnected block has cycle rank at least two. The
//! minimum theta is found with a min-cost flow of value three between every
//! pair of candidate branch vertices on the vertex-split network.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::graph::{self, canonical_point, MetricGraph, Point};
use crate::rational::{self, Rational};

/// Edge lists of the biconnected blocks of `g`, ignoring self-loops.
/// Parallel edges belong to the same block.
pub fn blocks(g: &MetricGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    // Frames: (vertex, edge used to enter it, next neighbour position).
    let mut frames: Vec<(usize, Option<usize>, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        frames.push((root, None, 0));
        while let Some(&mut (v, parent_edge, ref mut pos)) = frames.last_mut() {
            if *pos < adj[v].len() {
                let (w, ei) = adj[v][*pos];
                *pos += 1;
                if Some(ei) == parent_edge || w == v {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push(ei);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    frames.push((w, Some(ei), 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push(ei);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                frames.pop();
                if let (Some(&(p, _, _)), Some(ei)) = (frames.last(), parent_edge) {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(top) = edge_stack.pop() {
                            block.push(top);
                            if top == ei {
                                break;
                            }
                        }
                        block.sort_unstable();
                        out.push(block);
                    }
                }
            }
        }
    }
    out
}

/// Cycle rank `m - n + 1` of a block given by its edges.
pub fn cycle_rank(g: &MetricGraph, block: &[usize]) -> usize {
    let mut vs: Vec<usize> = block
        .iter()
        .flat_map(|&e| [g.edge(e).ends.0, g.edge(e).ends.1])
        .collect();
    vs.sort_unstable();
    vs.dedup();
    block.len() + 1 - vs.len()
}

/// Cheap existence test: some block has cycle rank at least two.
pub fn contains_theta(g: &MetricGraph) -> bool {
    blocks(g).iter().any(|b| cycle_rank(g, b) >= 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub id: String,
    /// `true` when traversed from the edge's first endpoint to its second.
    pub forward: bool,
    #[serde(with = "crate::rational::serde_text")]
    pub length: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaPath {
    pub edges: Vec<DirectedEdge>,
    /// Vertex ids along the path, from `u` to `v`.
    pub vertices: Vec<String>,
    #[serde(with = "crate::rational::serde_text")]
    pub length: Rational,
}

impl ThetaPath {
    /// Arclengths (from `u`) of the path's internal vertices.
    pub fn internal_vertex_positions(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        let mut out = Vec::new();
        for e in &self.edges[..self.edges.len().saturating_sub(1)] {
            acc += &e.length;
            out.push(acc.clone());
        }
        out
    }

    fn edge_ids(&self) -> Vec<&str> {
        self.edges.iter().map(|e| e.id.as_str()).collect()
    }
}

/// Two branch vertices joined by three internally disjoint paths, sorted
/// by length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theta {
    pub u: String,
    pub v: String,
    pub paths: [ThetaPath; 3],
    #[serde(with = "crate::rational::serde_text")]
    pub total: Rational,
}

/// A point of a theta: a branch vertex, or an arclength from `u` along one
/// of the three paths (index 0, 1 or 2).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThetaPoint {
    U,
    V,
    OnPath {
        path: usize,
        #[serde(with = "crate::rational::serde_text")]
        arclength: Rational,
    },
}

impl ThetaPoint {
    pub fn on_path(path: usize, arclength: Rational) -> Self {
        ThetaPoint::OnPath { path, arclength }
    }
}

impl Theta {
    pub fn lengths(&self) -> [&Rational; 3] {
        [
            &self.paths[0].length,
            &self.paths[1].length,
            &self.paths[2].length,
        ]
    }

    /// Endpoint arclengths collapse to the branch tags.
    pub fn canonical(&self, p: &ThetaPoint) -> Result<ThetaPoint> {
        match p {
            ThetaPoint::OnPath { path, arclength } => {
                let path_ref = self
                    .paths
                    .get(*path)
                    .ok_or_else(|| Error::InvalidParameter(format!("theta path index {path}")))?;
                if arclength.is_negative() || *arclength > path_ref.length {
                    return Err(Error::InvalidParameter(format!(
                        "arclength {} outside path {path}",
                        rational::format(arclength)
                    )));
                }
                if arclength.is_zero() {
                    Ok(ThetaPoint::U)
                } else if *arclength == path_ref.length {
                    Ok(ThetaPoint::V)
                } else {
                    Ok(p.clone())
                }
            }
            other => Ok(other.clone()),
        }
    }

    /// `(path, arclength)` coordinates; branch vertices are reported on path 0.
    fn coords(&self, p: &ThetaPoint) -> Result<(usize, Rational)> {
        Ok(match self.canonical(p)? {
            ThetaPoint::U => (0, Rational::zero()),
            ThetaPoint::V => (0, self.paths[0].length.clone()),
            ThetaPoint::OnPath { path, arclength } => (path, arclength),
        })
    }

    /// Locates a theta point in the ambient graph.
    pub fn to_point(&self, g: &MetricGraph, p: &ThetaPoint) -> Result<Point> {
        match self.canonical(p)? {
            ThetaPoint::U => Ok(Point::Vertex(self.u.clone())),
            ThetaPoint::V => Ok(Point::Vertex(self.v.clone())),
            ThetaPoint::OnPath { path, arclength } => {
                let mut remaining = arclength;
                for e in &self.paths[path].edges {
                    if remaining <= e.length {
                        let offset = if e.forward {
                            remaining
                        } else {
                            &e.length - remaining
                        };
                        return canonical_point(g, &Point::on_edge(e.id.clone(), offset));
                    }
                    remaining -= &e.length;
                }
                Err(Error::Internal("arclength beyond theta path".into()))
            }
        }
    }

    /// Validates disjointness, orientation and sortedness against `g`.
    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        let bad = |m: &str| Err(Error::Internal(format!("invalid theta: {m}")));
        if self.u == self.v {
            return bad("branch vertices coincide");
        }
        let mut seen_edges = std::collections::HashSet::new();
        let mut seen_inner = std::collections::HashSet::new();
        let mut total = Rational::zero();
        for path in &self.paths {
            if path.edges.is_empty() || !path.length.is_positive() {
                return bad("empty path");
            }
            if path.vertices.first() != Some(&self.u) || path.vertices.last() != Some(&self.v) {
                return bad("path does not run from u to v");
            }
            if path.vertices.len() != path.edges.len() + 1 {
                return bad("vertex/edge count mismatch");
            }
            let mut len = Rational::zero();
            for (k, de) in path.edges.iter().enumerate() {
                let e = g.edge_by_id(&de.id).ok_or_else(|| Error::UnknownEdge(de.id.clone()))?;
                let (a, b) = (g.vertex_id(e.ends.0), g.vertex_id(e.ends.1));
                let (from, to) = if de.forward { (a, b) } else { (b, a) };
                if from != path.vertices[k] || to != path.vertices[k + 1] || de.length != e.length {
                    return bad("edge does not match path vertices");
                }
                if !seen_edges.insert(de.id.clone()) {
                    return bad("edge reused");
                }
                len += &e.length;
            }
            if len != path.length {
                return bad("path length mismatch");
            }
            for inner in &path.vertices[1..path.vertices.len() - 1] {
                if inner == &self.u || inner == &self.v || !seen_inner.insert(inner.clone()) {
                    return bad("paths not internally disjoint");
                }
            }
            total += len;
        }
        if total != self.total {
            return bad("total mismatch");
        }
        if !(self.paths[0].length <= self.paths[1].length
            && self.paths[1].length <= self.paths[2].length)
        {
            return bad("paths not sorted");
        }
        Ok(())
    }

    fn tie_key(&self) -> (Rational, Rational, Rational, &str, &str, [Vec<&str>; 3]) {
        (
            self.total.clone(),
            self.paths[0].length.clone(),
            self.paths[1].length.clone(),
            self.u.as_str(),
            self.v.as_str(),
            [
                self.paths[0].edge_ids(),
                self.paths[1].edge_ids(),
                self.paths[2].edge_ids(),
            ],
        )
    }
}

/// Intrinsic distance between two points of the theta.
pub fn theta_distance(t: &Theta, a: &ThetaPoint, b: &ThetaPoint) -> Result<Rational> {
    let (i, s) = t.coords(a)?;
    let (j, r) = t.coords(b)?;
    let len = |k: usize| &t.paths[k].length;
    if i == j {
        let direct = (&s - &r).abs();
        let other = (0..3).filter(|&k| k != i).map(len).min().unwrap();
        let around_u = &s + other + (len(i) - &r);
        let around_v = (len(i) - &s) + other + &r;
        Ok(direct.min(around_u).min(around_v))
    } else {
        let k = 3 - i - j;
        let via_u = &s + &r;
        let via_v = (len(i) - &s) + (len(j) - &r);
        let u_then_k = &s + len(k) + (len(j) - &r);
        let v_then_k = (len(i) - &s) + len(k) + &r;
        Ok(via_u.min(via_v).min(u_then_k).min(v_then_k))
    }
}

fn candidate_branch_vertices(g: &MetricGraph) -> Vec<usize> {
    (0..g.vertex_count())
        .filter(|&v| {
            g.edges()
                .iter()
                .filter(|e| !e.is_loop() && (e.ends.0 == v || e.ends.1 == v))
                .count()
                >= 3
        })
        .collect()
}

/// Minimum total length of three internally disjoint `s`-`t` paths, if any.
fn three_paths(g: &MetricGraph, s: usize, t: usize) -> Option<Theta> {
    let n = g.vertex_count();
    let node_in = |v: usize| 2 * v;
    let node_out = |v: usize| 2 * v + 1;
    let mut net = FlowNetwork::new(2 * n);
    for v in 0..n {
        if v != s && v != t {
            net.add_arc(node_in(v), node_out(v), 1, Rational::zero());
        }
    }
    let mut arc_edge = Vec::new();
    for (ei, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            continue;
        }
        let (a, b) = e.ends;
        let fwd = net.add_arc(node_out(a), node_in(b), 1, e.length.clone());
        let bwd = net.add_arc(node_out(b), node_in(a), 1, e.length.clone());
        arc_edge.push((fwd, ei, true));
        arc_edge.push((bwd, ei, false));
    }
    let (sent, total) = net.min_cost_flow(node_out(s), node_in(t), 3);
    if sent < 3 {
        return None;
    }
    let edge_of_arc: std::collections::HashMap<usize, (usize, bool)> = arc_edge
        .iter()
        .map(|&(arc, ei, fwd)| (arc, (ei, fwd)))
        .collect();
    let mut used = std::collections::HashSet::new();
    let mut paths = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut at = s;
        let mut edges = Vec::new();
        let mut vertices = vec![g.vertex_id(s).to_string()];
        let mut length = Rational::zero();
        loop {
            let arc = net
                .out_arcs(node_out(at))
                .find(|&a| net.flow_on(a) > 0 && edge_of_arc.contains_key(&a) && !used.contains(&a))?;
            used.insert(arc);
            let (ei, forward) = edge_of_arc[&arc];
            let e = g.edge(ei);
            edges.push(DirectedEdge {
                id: e.id.clone(),
                forward,
                length: e.length.clone(),
            });
            length += &e.length;
            at = net.head(arc) / 2;
            vertices.push(g.vertex_id(at).to_string());
            if at == t {
                break;
            }
        }
        paths.push(ThetaPath {
            edges,
            vertices,
            length,
        });
    }
    paths.sort_by(|a, b| {
        a.length
            .cmp(&b.length)
            .then_with(|| a.edge_ids().cmp(&b.edge_ids()))
    });
    let mut it = paths.into_iter();
    let theta = Theta {
        u: g.vertex_id(s).to_string(),
        v: g.vertex_id(t).to_string(),
        paths: [it.next()?, it.next()?, it.next()?],
        total,
    };
    debug_assert!(theta.validate(g).is_ok());
    Some(theta)
}

fn best_theta(g: &MetricGraph) -> Option<Theta> {
    let cands = candidate_branch_vertices(g);
    let mut best: Option<Theta> = None;
    for (k, &s) in cands.iter().enumerate() {
        for &t in &cands[k + 1..] {
            if let Some(theta) = three_paths(g, s, t) {
                let better = match &best {
                    None => true,
                    Some(b) => theta.tie_key().cmp(&b.tie_key()) == Ordering::Less,
                };
                if better {
                    best = Some(theta);
                }
            }
        }
    }
    best
}

/// Some theta of `g` (not necessarily minimal), or `None` if `g` is theta-free.
pub fn find_theta(g: &MetricGraph) -> Option<Theta> {
    let all = blocks(g);
    let block = all.iter().find(|b| cycle_rank(g, b) >= 2)?;
    let mut vs: Vec<usize> = block
        .iter()
        .flat_map(|&e| [g.edge(e).ends.0, g.edge(e).ends.1])
        .collect();
    vs.sort_unstable();
    vs.dedup();
    let sub = MetricGraph::new(
        vs.iter().map(|&v| g.vertex_id(v).to_string()).collect(),
        block
            .iter()
            .map(|&e| {
                let edge = g.edge(e);
                (
                    edge.id.clone(),
                    g.vertex_id(edge.ends.0).to_string(),
                    g.vertex_id(edge.ends.1).to_string(),
                    edge.length.clone(),
                )
            })
            .collect(),
    )
    .ok()?;
    best_theta(&sub)
}

/// A theta of minimum total length in `g`, with deterministic tie-breaking.
pub fn minimal_theta(g: &MetricGraph) -> Result<Theta> {
    if !contains_theta(g) {
        return Err(Error::NoTheta);
    }
    best_theta(g).ok_or_else(|| Error::Internal("block test found a theta but flow did not".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub x: ThetaPoint,
    pub y: ThetaPoint,
    #[serde(with = "crate::rational::serde_text")]
    pub ambient: Rational,
    #[serde(with = "crate::rational::serde_text")]
    pub intrinsic: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checked: usize,
    pub violations: Vec<LemmaViolation>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For points `x` within 1/2 of `u`, ambient and intrinsic distances to any
/// theta point agree. Checks each sample pair exactly.
pub fn check_branch_distance_lemma(
    g: &MetricGraph,
    t: &Theta,
    samples: &[(ThetaPoint, ThetaPoint)],
) -> Result<LemmaReport> {
    if g.min_edge_length().is_some_and(|l| *l < rational::one()) {
        return Err(Error::Precondition("every edge must have length at least 1".into()));
    }
    let minimal = minimal_theta(g)?;
    if minimal.total != t.total {
        return Err(Error::Precondition("theta is not of minimum total length".into()));
    }
    let half = rational::frac(1, 2);
    let mut violations = Vec::new();
    for (x, y) in samples {
        if theta_distance(t, x, &ThetaPoint::U)? > half {
            return Err(Error::Precondition("sample x is farther than 1/2 from u".into()));
        }
        let ambient = graph::distance(g, &t.to_point(g, x)?, &t.to_point(g, y)?)?;
        let intrinsic = theta_distance(t, x, y)?;
        if ambient != intrinsic {
            violations.push(LemmaViolation {
                x: x.clone(),
                y: y.clone(),
                ambient,
                intrinsic,
            });
        }
    }
    Ok(LemmaReport {
        checked: samples.len(),
        violations,
    })
}

/// Seeded samples `(x, y)` with `x` within 1/2 of `u` (on any path) and `y`
/// anywhere on the theta, offsets on a 1/24 grid of each path.
pub fn lemma_samples(t: &Theta, count: usize, seed: u64) -> Vec<(ThetaPoint, ThetaPoint)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let px = rng.gen_range(0..3);
            let sx = rational::frac(rng.gen_range(0..=12), 24);
            let py = rng.gen_range(0..3);
            let sy = &t.paths[py].length * rational::frac(rng.gen_range(0..=24), 24);
            let x = t.canonical(&ThetaPoint::on_path(px, sx)).unwrap();
            let y = t.canonical(&ThetaPoint::on_path(py, sy)).unwrap();
            (x, y)
        })
        .collect()
}
