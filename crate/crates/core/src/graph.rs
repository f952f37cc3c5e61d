//! Metric graphs, point addressing and the exact distance engine.
//!
//! A [`MetricGraph`] is a connected multigraph whose edges carry positive
//! rational lengths. Every point of the underlying length space is addressed
//! by a [`Point`]: either a vertex, or an offset along an edge measured from
//! the edge's first declared endpoint.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub ends: (usize, usize),
    pub length: Rational,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for MetricGraph {}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "PointRepr", try_from = "PointRepr")]
pub enum Point {
    Vertex(String),
    OnEdge { edge: String, offset: Rational },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<String>,
}

impl From<Point> for PointRepr {
    fn from(p: Point) -> Self {
        match p {
            Point::Vertex(v) => PointRepr {
                vertex: Some(v),
                edge: None,
                offset: None,
            },
            Point::OnEdge { edge, offset } => PointRepr {
                vertex: None,
                edge: Some(edge),
                offset: Some(rational::format(&offset)),
            },
        }
    }
}

impl TryFrom<PointRepr> for Point {
    type Error = Error;

    fn try_from(r: PointRepr) -> Result<Self> {
        match (r.vertex, r.edge, r.offset) {
            (Some(v), None, None) => Ok(Point::Vertex(v)),
            (None, Some(edge), Some(off)) => Ok(Point::OnEdge {
                edge,
                offset: rational::parse(&off)?,
            }),
            _ => Err(Error::Parse(
                "point must be {\"vertex\": id} or {\"edge\": id, \"offset\": rational}".into(),
            )),
        }
    }
}

impl Point {
    pub fn vertex(id: impl Into<String>) -> Self {
        Point::Vertex(id.into())
    }

    pub fn on_edge(edge: impl Into<String>, offset: Rational) -> Self {
        Point::OnEdge {
            edge: edge.into(),
            offset,
        }
    }

    pub fn as_vertex(&self) -> Option<&str> {
        match self {
            Point::Vertex(v) => Some(v),
            Point::OnEdge { .. } => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Vertex(v) => write!(f, "{v}"),
            Point::OnEdge { edge, offset } => write!(f, "{edge}@{}", rational::format(offset)),
        }
    }
}

/// On-disk graph description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub ends: [String; 2],
    pub length: String,
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph spec serializes")
    }
}

/// Validates a graph description.
pub fn build_graph(spec: &GraphSpec) -> Result<MetricGraph> {
    let mut edges = Vec::with_capacity(spec.edges.len());
    for e in &spec.edges {
        let length = rational::parse(&e.length).map_err(|_| Error::NonpositiveLength {
            edge: e.id.clone(),
            length: e.length.clone(),
        })?;
        edges.push((e.id.clone(), e.ends[0].clone(), e.ends[1].clone(), length));
    }
    MetricGraph::new(spec.vertices.clone(), edges)
}

impl MetricGraph {
    /// Builds and validates a graph from vertex ids and `(id, a, b, length)` edges.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String, String, Rational)>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Empty);
        }
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateId(v.clone()));
            }
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut built = Vec::with_capacity(edges.len());
        for (i, (id, a, b, length)) in edges.into_iter().enumerate() {
            if edge_index.insert(id.clone(), i).is_some() || vertex_index.contains_key(&id) {
                return Err(Error::DuplicateId(id));
            }
            let lookup = |v: &String| {
                vertex_index
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::DanglingEndpoint {
                        edge: id.clone(),
                        vertex: v.clone(),
                    })
            };
            let ends = (lookup(&a)?, lookup(&b)?);
            if !length.is_positive() {
                return Err(Error::NonpositiveLength {
                    edge: id,
                    length: rational::format(&length),
                });
            }
            built.push(Edge { id, ends, length });
        }
        let g = MetricGraph {
            vertices,
            edges: built,
            vertex_index,
            edge_index,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.vertices.len()
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    ends: [
                        self.vertices[e.ends.0].clone(),
                        self.vertices[e.ends.1].clone(),
                    ],
                    length: rational::format(&e.length),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        build_graph(&GraphSpec::from_json(text)?)
    }

    pub fn to_json(&self) -> String {
        self.to_spec().to_json()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_id(&self, idx: usize) -> &str {
        &self.vertices[idx]
    }

    pub fn vertex_idx(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_idx(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn edge_by_id(&self, id: &str) -> Option<&Edge> {
        self.edge_idx(id).map(|i| &self.edges[i])
    }

    /// Neighbour lists `(other end, edge index)`. A self-loop appears twice
    /// in its vertex's list, once per traversal direction.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.ends.0].push((e.ends.1, i));
            adj[e.ends.1].push((e.ends.0, i));
        }
        adj
    }

    /// Degree counting parallel edges; a self-loop counts twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.ends.0 == v) as usize + (e.ends.1 == v) as usize)
            .sum()
    }

    pub fn min_edge_length(&self) -> Option<&Rational> {
        self.edges.iter().map(|e| &e.length).min()
    }

    pub fn total_length(&self) -> Rational {
        self.edges.iter().map(|e| e.length.clone()).sum()
    }

    pub fn vertex_points(&self) -> Vec<Point> {
        self.vertices.iter().cloned().map(Point::Vertex).collect()
    }

    fn fresh_id(&self, base: String, taken: &mut HashSet<String>) -> String {
        let mut candidate = base.clone();
        let mut k = 1;
        while self.vertex_index.contains_key(&candidate)
            || self.edge_index.contains_key(&candidate)
            || taken.contains(&candidate)
        {
            candidate = format!("{base}~{k}");
            k += 1;
        }
        taken.insert(candidate.clone());
        candidate
    }
}

/// Returns the canonical form of `p`, validating it against `g`.
pub fn canonical_point(g: &MetricGraph, p: &Point) -> Result<Point> {
    match p {
        Point::Vertex(v) => {
            if g.vertex_idx(v).is_none() {
                return Err(Error::UnknownVertex(v.clone()));
            }
            Ok(p.clone())
        }
        Point::OnEdge { edge, offset } => {
            let e = g
                .edge_by_id(edge)
                .ok_or_else(|| Error::UnknownEdge(edge.clone()))?;
            if offset.is_negative() || *offset > e.length {
                return Err(Error::OffsetOutOfRange {
                    edge: edge.clone(),
                    offset: rational::format(offset),
                    length: rational::format(&e.length),
                });
            }
            if offset.is_zero() {
                Ok(Point::Vertex(g.vertex_id(e.ends.0).to_string()))
            } else if *offset == e.length {
                Ok(Point::Vertex(g.vertex_id(e.ends.1).to_string()))
            } else {
                Ok(p.clone())
            }
        }
    }
}

/// One piece of an edge after refinement: the sub-interval `[lo, hi]` of
/// edge `edge`, running from node `from` (at `lo`) to node `to` (at `hi`).
#[derive(Debug, Clone)]
struct Piece {
    edge: usize,
    lo: Rational,
    hi: Rational,
    from: usize,
    to: usize,
}

/// A graph refined so that a list of points become nodes. Nodes
/// `0..vertex_count` are the original vertices; inserted points follow.
struct Refined {
    node_count: usize,
    pieces: Vec<Piece>,
    adj: Vec<Vec<(usize, usize)>>,
    /// For inserted nodes: (edge index, offset).
    inserted: Vec<(usize, Rational)>,
}

fn refine(g: &MetricGraph, points: &[Point]) -> Result<(Refined, Vec<usize>)> {
    let nv = g.vertex_count();
    let mut cuts: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    let mut canon = Vec::with_capacity(points.len());
    for p in points {
        let c = canonical_point(g, p)?;
        if let Point::OnEdge { edge, offset } = &c {
            cuts.entry(g.edge_idx(edge).unwrap())
                .or_default()
                .push(offset.clone());
        }
        canon.push(c);
    }
    let mut inserted = Vec::new();
    let mut node_of_cut: HashMap<(usize, Rational), usize> = HashMap::new();
    let mut pieces = Vec::with_capacity(g.edge_count() + points.len());
    for (ei, e) in g.edges().iter().enumerate() {
        let mut offs = cuts.remove(&ei).unwrap_or_default();
        offs.sort();
        offs.dedup();
        let mut prev_node = e.ends.0;
        let mut prev_off = Rational::zero();
        for off in offs {
            let node = nv + inserted.len();
            inserted.push((ei, off.clone()));
            node_of_cut.insert((ei, off.clone()), node);
            pieces.push(Piece {
                edge: ei,
                lo: prev_off,
                hi: off.clone(),
                from: prev_node,
                to: node,
            });
            prev_node = node;
            prev_off = off;
        }
        pieces.push(Piece {
            edge: ei,
            lo: prev_off,
            hi: e.length.clone(),
            from: prev_node,
            to: e.ends.1,
        });
    }
    let node_count = nv + inserted.len();
    let mut adj = vec![Vec::new(); node_count];
    for (pi, piece) in pieces.iter().enumerate() {
        adj[piece.from].push((piece.to, pi));
        adj[piece.to].push((piece.from, pi));
    }
    let nodes = canon
        .iter()
        .map(|c| match c {
            Point::Vertex(v) => g.vertex_idx(v).unwrap(),
            Point::OnEdge { edge, offset } => {
                node_of_cut[&(g.edge_idx(edge).unwrap(), offset.clone())]
            }
        })
        .collect();
    Ok((
        Refined {
            node_count,
            pieces,
            adj,
            inserted,
        },
        nodes,
    ))
}

struct Search {
    dist: Vec<Option<Rational>>,
    pred: Vec<Option<(usize, usize)>>,
}

impl Refined {
    fn piece_len(&self, pi: usize) -> Rational {
        let p = &self.pieces[pi];
        &p.hi - &p.lo
    }

    /// Label-setting search from `src`; stops early once `target` is settled.
    fn dijkstra(&self, src: usize, target: Option<usize>) -> Search {
        let mut dist: Vec<Option<Rational>> = vec![None; self.node_count];
        let mut pred = vec![None; self.node_count];
        let mut done = vec![false; self.node_count];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(Rational::zero());
        heap.push(Reverse((Rational::zero(), src)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            if Some(x) == target {
                break;
            }
            for &(y, pi) in &self.adj[x] {
                if done[y] {
                    continue;
                }
                let nd = &d + self.piece_len(pi);
                if dist[y].as_ref().is_none_or(|old| nd < *old) {
                    dist[y] = Some(nd.clone());
                    pred[y] = Some((x, pi));
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        Search { dist, pred }
    }

    fn point_of(&self, g: &MetricGraph, node: usize) -> Point {
        let nv = g.vertex_count();
        if node < nv {
            Point::Vertex(g.vertex_id(node).to_string())
        } else {
            let (ei, off) = &self.inserted[node - nv];
            Point::on_edge(g.edge(*ei).id.clone(), off.clone())
        }
    }
}

/// The refinement of a graph at a list of points.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub graph: MetricGraph,
    /// Vertex id in `graph` for each input point, in input order.
    pub vertex_of: Vec<String>,
}

/// Subdivides edges so every point in `ps` becomes a vertex. The returned
/// graph is isometric to `g`; split edges keep their total length.
pub fn insert_points(g: &MetricGraph, ps: &[Point]) -> Result<Refinement> {
    let (refined, nodes) = refine(g, ps)?;
    let nv = g.vertex_count();
    let mut taken = HashSet::new();
    let mut names: Vec<String> = g.vertices().to_vec();
    for (ei, off) in &refined.inserted {
        let base = format!("{}@{}", g.edge(*ei).id, rational::format(off));
        names.push(g.fresh_id(base, &mut taken));
    }
    let mut pieces_per_edge = vec![0usize; g.edge_count()];
    for p in &refined.pieces {
        pieces_per_edge[p.edge] += 1;
    }
    let mut counter = vec![0usize; g.edge_count()];
    let mut edges = Vec::with_capacity(refined.pieces.len());
    for p in &refined.pieces {
        let orig = &g.edge(p.edge).id;
        let id = if pieces_per_edge[p.edge] == 1 {
            orig.clone()
        } else {
            let k = counter[p.edge];
            counter[p.edge] += 1;
            g.fresh_id(format!("{orig}#{k}"), &mut taken)
        };
        edges.push((
            id,
            names[p.from].clone(),
            names[p.to].clone(),
            &p.hi - &p.lo,
        ));
    }
    let graph = MetricGraph::new(names.clone(), edges)?;
    debug_assert!(refined.node_count >= nv);
    let vertex_of = nodes.into_iter().map(|n| names[n].clone()).collect();
    Ok(Refinement { graph, vertex_of })
}

/// Length of a shortest path between two points of the continuous space.
pub fn distance(g: &MetricGraph, p: &Point, q: &Point) -> Result<Rational> {
    let (refined, nodes) = refine(g, &[p.clone(), q.clone()])?;
    let (s, t) = (nodes[0], nodes[1]);
    if s == t {
        return Ok(Rational::zero());
    }
    let search = refined.dijkstra(s, Some(t));
    search.dist[t]
        .clone()
        .ok_or_else(|| Error::Internal("unreachable point in connected graph".into()))
}

/// A finite metric space labelled by points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteMetric {
    pub points: Vec<Point>,
    #[serde(with = "crate::rational::serde_text_matrix")]
    pub dist: Vec<Vec<Rational>>,
}

impl FiniteMetric {
    /// Validates symmetry, zero diagonal, positivity between distinct labels
    /// and the triangle inequality.
    pub fn new(points: Vec<Point>, dist: Vec<Vec<Rational>>) -> Result<Self> {
        let m = FiniteMetric { points, dist };
        m.validate()?;
        Ok(m)
    }

    /// A metric on anonymous points labelled `p0`, `p1`, ...
    pub fn from_matrix(dist: Vec<Vec<Rational>>) -> Result<Self> {
        let points = (0..dist.len())
            .map(|i| Point::Vertex(format!("p{i}")))
            .collect();
        Self::new(points, dist)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        let bad = |msg: String| Err(Error::MalformedMetric(msg));
        if self.dist.len() != n || self.dist.iter().any(|r| r.len() != n) {
            return bad(format!("distance matrix is not {n}x{n}"));
        }
        for i in 0..n {
            if !self.dist[i][i].is_zero() {
                return bad(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let d = &self.dist[i][j];
                if *d != self.dist[j][i] {
                    return bad(format!("asymmetric at ({i},{j})"));
                }
                if d.is_negative() {
                    return bad(format!("negative entry at ({i},{j})"));
                }
                if i != j && d.is_zero() && self.points[i] != self.points[j] {
                    return bad(format!("distinct points {i},{j} at distance 0"));
                }
                if i != j && !d.is_zero() && self.points[i] == self.points[j] {
                    return bad(format!("coincident labels {i},{j} at positive distance"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.dist[i][j] > &self.dist[i][k] + &self.dist[k][j] {
                        return bad(format!("triangle inequality fails for ({i},{j}) via {k}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn scaled(&self, t: &Rational) -> FiniteMetric {
        FiniteMetric {
            points: self.points.clone(),
            dist: self
                .dist
                .iter()
                .map(|r| r.iter().map(|d| d * t).collect())
                .collect(),
        }
    }

    /// Restriction to the given indices (in the given order).
    pub fn restrict(&self, idx: &[usize]) -> FiniteMetric {
        FiniteMetric {
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            dist: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| self.dist[i][j].clone()).collect())
                .collect(),
        }
    }

    pub fn diameter(&self) -> Rational {
        self.dist
            .iter()
            .flat_map(|r| r.iter())
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }
}

/// Pairwise distances among `ps`.
pub fn distance_matrix(g: &MetricGraph, ps: &[Point]) -> Result<FiniteMetric> {
    let (refined, nodes) = refine(g, ps)?;
    let n = ps.len();
    let mut dist = vec![vec![Rational::zero(); n]; n];
    let mut searched: HashMap<usize, Search> = HashMap::new();
    for i in 0..n {
        let search = searched
            .entry(nodes[i])
            .or_insert_with(|| refined.dijkstra(nodes[i], None));
        for j in (i + 1)..n {
            let d = search.dist[nodes[j]]
                .clone()
                .ok_or_else(|| Error::Internal("unreachable point in connected graph".into()))?;
            dist[i][j] = d.clone();
            dist[j][i] = d;
        }
    }
    let points = ps
        .iter()
        .map(|p| canonical_point(g, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteMetric { points, dist })
}

/// One traversal of (part of) an edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteStep {
    pub edge: String,
    #[serde(with = "crate::rational::serde_text")]
    pub from_offset: Rational,
    #[serde(with = "crate::rational::serde_text")]
    pub to_offset: Rational,
    /// The point reached at the end of this step.
    pub reached: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub start: Point,
    pub steps: Vec<RouteStep>,
    #[serde(with = "crate::rational::serde_text")]
    pub length: Rational,
}

/// A shortest route from `p` to `q`, as alternating points and edge segments.
pub fn shortest_path(g: &MetricGraph, p: &Point, q: &Point) -> Result<Route> {
    let (refined, nodes) = refine(g, &[p.clone(), q.clone()])?;
    let (s, t) = (nodes[0], nodes[1]);
    let start = canonical_point(g, p)?;
    if s == t {
        return Ok(Route {
            start,
            steps: Vec::new(),
            length: Rational::zero(),
        });
    }
    let search = refined.dijkstra(s, Some(t));
    let length = search.dist[t]
        .clone()
        .ok_or_else(|| Error::Internal("unreachable point in connected graph".into()))?;
    let mut chain = Vec::new();
    let mut at = t;
    while at != s {
        let (prev, pi) = search.pred[at].expect("predecessor on settled path");
        chain.push((prev, pi, at));
        at = prev;
    }
    chain.reverse();
    let mut steps: Vec<RouteStep> = Vec::new();
    for (prev, pi, next) in chain {
        let piece = &refined.pieces[pi];
        let (from_offset, to_offset) = if piece.from == prev && piece.to == next {
            (piece.lo.clone(), piece.hi.clone())
        } else {
            (piece.hi.clone(), piece.lo.clone())
        };
        let edge = g.edge(piece.edge).id.clone();
        let reached = refined.point_of(g, next);
        if let Some(last) = steps.last_mut() {
            // Merge with the previous step when continuing along the same
            // edge in the same direction through an inserted point.
            let same_dir = (last.to_offset > last.from_offset) == (to_offset > from_offset);
            if last.edge == edge && same_dir && last.to_offset == from_offset && next != t {
                if let Point::OnEdge { .. } = last.reached {
                    last.to_offset = to_offset;
                    last.reached = reached;
                    continue;
                }
            }
        }
        steps.push(RouteStep {
            edge,
            from_offset,
            to_offset,
            reached,
        });
    }
    Ok(Route {
        start,
        steps,
        length,
    })
}

impl Route {
    pub fn step_lengths(&self) -> Rational {
        self.steps
            .iter()
            .map(|s| (&s.to_offset - &s.from_offset).abs())
            .sum()
    }
}

/// Replaces every unit edge by a path of `k + 1` unit edges.
///
/// New vertex `e.j` sits at distance `j` from the first endpoint of `e`;
/// the sub-edges are `e/0 ..= e/k`.
pub fn subdivide(g: &MetricGraph, k: usize) -> Result<MetricGraph> {
    if k == 0 {
        return Err(Error::InvalidParameter("subdivision count must be positive".into()));
    }
    if let Some(e) = g.edges().iter().find(|e| !e.length.is_one()) {
        return Err(Error::NonUnitLength(e.id.clone()));
    }
    let mut vertices = g.vertices().to_vec();
    let mut edges = Vec::with_capacity(g.edge_count() * (k + 1));
    for e in g.edges() {
        let a = g.vertex_id(e.ends.0).to_string();
        let b = g.vertex_id(e.ends.1).to_string();
        let inner: Vec<String> = (1..=k).map(|j| format!("{}.{j}", e.id)).collect();
        vertices.extend(inner.iter().cloned());
        let mut chain = Vec::with_capacity(k + 2);
        chain.push(a);
        chain.extend(inner);
        chain.push(b);
        for j in 0..=k {
            edges.push((
                format!("{}/{j}", e.id),
                chain[j].clone(),
                chain[j + 1].clone(),
                Rational::one(),
            ));
        }
    }
    MetricGraph::new(vertices, edges)
}

/// Multiplies every edge length by `t > 0`.
pub fn scale(g: &MetricGraph, t: &Rational) -> Result<MetricGraph> {
    if !t.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be positive, got {}",
            rational::format(t)
        )));
    }
    let mut out = g.clone();
    for e in &mut out.edges {
        e.length = &e.length * t;
    }
    Ok(out)
}

/// A graph with its degree-2 vertices suppressed, plus the chains of
/// original edges each new edge stands for.
#[derive(Debug, Clone)]
pub struct Smoothing {
    pub graph: MetricGraph,
    /// For each edge of `graph`: original edge indices with traversal
    /// direction (`true` = first endpoint to second), in order.
    pub chains: Vec<Vec<(usize, bool)>>,
}

/// Suppresses every vertex of degree exactly two. When every vertex has
/// degree two (a cycle) the first vertex is kept.
pub fn smooth(g: &MetricGraph) -> Result<Smoothing> {
    let n = g.vertex_count();
    let mut keep: Vec<bool> = (0..n).map(|v| g.degree(v) != 2).collect();
    if !keep.iter().any(|&k| k) {
        keep[0] = true;
    }
    let adj = g.adjacency();
    let mut used = vec![false; g.edge_count()];
    let mut chains = Vec::new();
    let mut new_edges = Vec::new();
    for start in 0..n {
        if !keep[start] {
            continue;
        }
        for &(_, first_edge) in &adj[start] {
            if used[first_edge] {
                continue;
            }
            let mut chain = Vec::new();
            let mut at = start;
            let mut edge = first_edge;
            let mut length = Rational::zero();
            loop {
                used[edge] = true;
                let e = g.edge(edge);
                let forward = e.ends.0 == at;
                let next = if forward { e.ends.1 } else { e.ends.0 };
                chain.push((edge, forward));
                length += &e.length;
                at = next;
                if keep[at] {
                    break;
                }
                let cont = adj[at]
                    .iter()
                    .find(|&&(_, ei)| !used[ei])
                    .map(|&(_, ei)| ei);
                match cont {
                    Some(ei) => edge = ei,
                    None => {
                        return Err(Error::Internal(
                            "degree-2 chain ended at a suppressed vertex".into(),
                        ))
                    }
                }
            }
            let first = &g.edge(chain[0].0).id;
            let id = if chain.len() == 1 {
                first.clone()
            } else {
                format!("{first}..{}", g.edge(chain[chain.len() - 1].0).id)
            };
            new_edges.push((
                id,
                g.vertex_id(start).to_string(),
                g.vertex_id(at).to_string(),
                length,
            ));
            chains.push(chain);
        }
    }
    let vertices = (0..n)
        .filter(|&v| keep[v])
        .map(|v| g.vertex_id(v).to_string())
        .collect();
    let graph = MetricGraph::new(vertices, new_edges)?;
    Ok(Smoothing { graph, chains })
}

impl Smoothing {
    /// Maps a point of the smoothed graph back to the original graph.
    pub fn lift(&self, original: &MetricGraph, p: &Point) -> Result<Point> {
        let p = canonical_point(&self.graph, p)?;
        let (edge, offset) = match &p {
            Point::Vertex(_) => return Ok(p),
            Point::OnEdge { edge, offset } => (edge, offset),
        };
        let ei = self.graph.edge_idx(edge).unwrap();
        let mut remaining = offset.clone();
        for &(orig, forward) in &self.chains[ei] {
            let e = original.edge(orig);
            if remaining <= e.length {
                let local = if forward {
                    remaining
                } else {
                    &e.length - remaining
                };
                return canonical_point(original, &Point::on_edge(e.id.clone(), local));
            }
            remaining -= &e.length;
        }
        Err(Error::Internal("offset beyond smoothed edge".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn unit_theta() -> MetricGraph {
        MetricGraph::new(
            vec!["u".into(), "v".into()],
            (1..=3)
                .map(|i| (format!("e{i}"), "u".into(), "v".into(), int(1)))
                .collect(),
        )
        .unwrap()
    }

    fn spec(vertices: &[&str], edges: &[(&str, &str, &str, &str)]) -> GraphSpec {
        GraphSpec {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            edges: edges
                .iter()
                .map(|(id, a, b, l)| EdgeSpec {
                    id: id.to_string(),
                    ends: [a.to_string(), b.to_string()],
                    length: l.to_string(),
                })
                .collect(),
        }
    }

    #[test]
    fn build_accepts_theta_and_single_point() {
        let g = build_graph(&spec(
            &["u", "v"],
            &[("e1", "u", "v", "1"), ("e2", "u", "v", "1"), ("e3", "u", "v", "1")],
        ))
        .unwrap();
        assert_eq!(g, unit_theta());
        let single = build_graph(&spec(&["a"], &[])).unwrap();
        assert_eq!(single.vertex_count(), 1);
        assert_eq!(single.edge_count(), 0);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            build_graph(&spec(&["u", "v", "w"], &[("e1", "u", "v", "1")])),
            Err(Error::Disconnected)
        );
        assert!(matches!(
            build_graph(&spec(&["u", "u"], &[])),
            Err(Error::DuplicateId(_))
        ));
        assert!(matches!(
            build_graph(&spec(&["u", "v"], &[("e", "u", "v", "1"), ("e", "u", "v", "1")])),
            Err(Error::DuplicateId(_))
        ));
        assert!(matches!(
            build_graph(&spec(&["u", "v"], &[("e", "u", "v", "0")])),
            Err(Error::NonpositiveLength { .. })
        ));
        assert!(matches!(
            build_graph(&spec(&["u", "v"], &[("e", "u", "v", "-1/2")])),
            Err(Error::NonpositiveLength { .. })
        ));
        assert!(matches!(
            build_graph(&spec(&["u", "v"], &[("e", "u", "v", "x")])),
            Err(Error::NonpositiveLength { .. })
        ));
        assert!(matches!(
            build_graph(&spec(&["u"], &[("e", "u", "w", "1")])),
            Err(Error::DanglingEndpoint { .. })
        ));
        assert_eq!(build_graph(&spec(&[], &[])), Err(Error::Empty));
    }

    #[test]
    fn self_loops_and_parallel_edges_allowed() {
        let g = build_graph(&spec(
            &["u", "v"],
            &[("a", "u", "u", "3"), ("b", "u", "v", "1"), ("c", "u", "v", "2")],
        ))
        .unwrap();
        assert_eq!(g.degree(0), 4);
        let far = Point::on_edge("a", frac(3, 2));
        assert_eq!(distance(&g, &Point::vertex("v"), &far).unwrap(), frac(5, 2));
    }

    #[test]
    fn canonical_points() {
        let g = unit_theta();
        assert_eq!(
            canonical_point(&g, &Point::on_edge("e1", int(0))).unwrap(),
            Point::vertex("u")
        );
        assert_eq!(
            canonical_point(&g, &Point::on_edge("e1", int(1))).unwrap(),
            Point::vertex("v")
        );
        let interior = Point::on_edge("e1", frac(1, 12));
        assert_eq!(canonical_point(&g, &interior).unwrap(), interior);
        assert!(matches!(
            canonical_point(&g, &Point::on_edge("e1", frac(13, 12))),
            Err(Error::OffsetOutOfRange { .. })
        ));
        assert!(matches!(
            canonical_point(&g, &Point::on_edge("e9", frac(1, 2))),
            Err(Error::UnknownEdge(_))
        ));
        assert!(matches!(
            canonical_point(&g, &Point::vertex("w")),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn insert_points_splits_edges() {
        let g = unit_theta();
        let r = insert_points(&g, &[Point::on_edge("e1", frac(1, 3))]).unwrap();
        assert_eq!(r.graph.vertex_count(), 3);
        let lens: Vec<_> = r
            .graph
            .edges()
            .iter()
            .filter(|e| e.id.starts_with("e1"))
            .map(|e| e.length.clone())
            .collect();
        assert_eq!(lens, vec![frac(1, 3), frac(2, 3)]);
        assert_eq!(r.graph.total_length(), g.total_length());

        let same = insert_points(&g, &[Point::vertex("u")]).unwrap();
        assert_eq!(same.graph, g);
        assert_eq!(same.vertex_of, vec!["u".to_string()]);

        let two = insert_points(
            &g,
            &[Point::on_edge("e2", frac(3, 4)), Point::on_edge("e2", frac(1, 4))],
        )
        .unwrap();
        let lens: Vec<_> = two
            .graph
            .edges()
            .iter()
            .filter(|e| e.id.starts_with("e2"))
            .map(|e| e.length.clone())
            .collect();
        assert_eq!(lens, vec![frac(1, 4), frac(1, 2), frac(1, 4)]);
        assert_eq!(two.vertex_of, vec!["e2@3/4".to_string(), "e2@1/4".to_string()]);
    }

    #[test]
    fn theta_distances() {
        let g = unit_theta();
        let p = Point::on_edge("e1", frac(1, 3));
        let q = Point::on_edge("e2", frac(1, 3));
        assert_eq!(distance(&g, &p, &q).unwrap(), frac(2, 3));
        assert_eq!(distance(&g, &p, &p).unwrap(), int(0));
        let m = distance_matrix(
            &g,
            &[Point::vertex("u"), Point::vertex("v"), Point::on_edge("e1", frac(1, 2))],
        )
        .unwrap();
        assert_eq!(m.dist[0][1], int(1));
        assert_eq!(m.dist[0][2], frac(1, 2));
        assert_eq!(m.dist[1][2], frac(1, 2));
    }

    #[test]
    fn same_edge_pair_can_go_around() {
        // Long edge with a short parallel bypass.
        let g = MetricGraph::new(
            vec!["u".into(), "v".into()],
            vec![
                ("long".into(), "u".into(), "v".into(), int(10)),
                ("short".into(), "u".into(), "v".into(), int(1)),
            ],
        )
        .unwrap();
        let p = Point::on_edge("long", int(1));
        let q = Point::on_edge("long", int(9));
        assert_eq!(distance(&g, &p, &q).unwrap(), int(3));
        let route = shortest_path(&g, &p, &q).unwrap();
        assert_eq!(route.length, int(3));
        assert_eq!(route.step_lengths(), int(3));
    }

    #[test]
    fn degenerate_matrices() {
        let g = unit_theta();
        let one = distance_matrix(&g, &[Point::vertex("u")]).unwrap();
        assert_eq!(one.dist, vec![vec![int(0)]]);
        let p = Point::on_edge("e3", frac(1, 5));
        let two = distance_matrix(&g, &[p.clone(), p]).unwrap();
        assert_eq!(two.dist, vec![vec![int(0), int(0)], vec![int(0), int(0)]]);
        two.validate().unwrap();
    }

    #[test]
    fn shortest_path_examples() {
        let g = unit_theta();
        let u = Point::vertex("u");
        let empty = shortest_path(&g, &u, &u).unwrap();
        assert!(empty.steps.is_empty());
        assert_eq!(empty.length, int(0));

        let uv = shortest_path(&g, &u, &Point::vertex("v")).unwrap();
        assert_eq!(uv.steps.len(), 1);
        assert_eq!(uv.length, int(1));

        let p = Point::on_edge("e1", frac(1, 3));
        let q = Point::on_edge("e2", frac(1, 3));
        let r = shortest_path(&g, &p, &q).unwrap();
        assert_eq!(r.length, frac(2, 3));
        assert_eq!(r.steps[0].reached, u);
        assert_eq!(r.steps.last().unwrap().reached, q);
    }

    #[test]
    fn subdivide_counts_and_errors() {
        let k4 = crate::families::make_named(&crate::families::FamilySpec::Complete { n: 4 }).unwrap();
        let s = subdivide(&k4, 2).unwrap();
        assert_eq!((s.vertex_count(), s.edge_count()), (16, 18));
        let t = subdivide(&unit_theta(), 1).unwrap();
        assert_eq!((t.vertex_count(), t.edge_count()), (5, 6));
        let stretched = scale(&unit_theta(), &int(2)).unwrap();
        assert_eq!(subdivide(&stretched, 1), Err(Error::NonUnitLength("e1".into())));
        assert!(subdivide(&unit_theta(), 0).is_err());
    }

    #[test]
    fn scale_examples() {
        let g = unit_theta();
        let g2 = scale(&g, &int(2)).unwrap();
        assert!(g2.edges().iter().all(|e| e.length == int(2)));
        assert_eq!(scale(&g, &int(1)).unwrap(), g);
        let g3 = scale(&g, &int(3)).unwrap();
        assert_eq!(
            distance(&g3, &Point::vertex("u"), &Point::vertex("v")).unwrap(),
            int(3)
        );
        assert!(scale(&g, &int(0)).is_err());
        assert!(scale(&g, &int(-1)).is_err());
    }

    #[test]
    fn smoothing_subdivided_theta() {
        let g = subdivide(&unit_theta(), 4).unwrap();
        let s = smooth(&g).unwrap();
        assert_eq!(s.graph.vertex_count(), 2);
        assert!(s.graph.edges().iter().all(|e| e.length == int(5)));
        let p = Point::on_edge(s.graph.edge(0).id.clone(), frac(7, 2));
        let lifted = s.lift(&g, &p).unwrap();
        let d_s = distance(&s.graph, &Point::vertex("u"), &p).unwrap();
        let d_g = distance(&g, &Point::vertex("u"), &lifted).unwrap();
        assert_eq!(d_s, d_g);
    }

    #[test]
    fn point_json_format() {
        let p = Point::on_edge("e1", frac(1, 12));
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"edge":"e1","offset":"1/12"}"#);
        assert_eq!(serde_json::from_str::<Point>(&text).unwrap(), p);
        let v = Point::vertex("u");
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"vertex":"u"}"#);
        assert!(serde_json::from_str::<Point>(r#"{"vertex":"u","edge":"e"}"#).is_err());
    }

    #[test]
    fn graph_json_format() {
        let text = r#"{"vertices":["u","v"],"edges":[{"id":"e1","ends":["u","v"],"length":"1/2"}]}"#;
        let g = MetricGraph::from_json(text).unwrap();
        assert_eq!(g.to_json(), text);
    }
}
