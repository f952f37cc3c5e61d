//! Slow reference implementations used by the integration tests. Nothing
//! here calls the library's distance, theta, witness or analysis code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{Signed, Zero};
use thetagraph::graph::Point;
use thetagraph::rational::{frac, to_f64};
use thetagraph::{MetricGraph, Rational};

/// All-pairs vertex distances by Floyd-Warshall.
pub fn floyd(g: &MetricGraph) -> Vec<Vec<Option<Rational>>> {
    let n = g.vertex_count();
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Rational::zero());
    }
    for e in g.edges() {
        let (a, b) = e.ends;
        if d[a][b].as_ref().is_none_or(|x| e.length < *x) {
            d[a][b] = Some(e.length.clone());
            d[b][a] = Some(e.length.clone());
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k].clone() else { continue };
            for j in 0..n {
                if let Some(kj) = &d[k][j] {
                    let via = &ik + kj;
                    if d[i][j].as_ref().is_none_or(|x| via < *x) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    d
}

/// Single-source vertex distances, quadratic Dijkstra.
pub fn dijkstra(g: &MetricGraph, src: usize) -> Vec<Rational> {
    let n = g.vertex_count();
    let mut adj: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.ends.0].push((e.ends.1, &e.length));
        adj[e.ends.1].push((e.ends.0, &e.length));
    }
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut done = vec![false; n];
    dist[src] = Some(Rational::zero());
    loop {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if done[v] || dist[v].is_none() {
                continue;
            }
            if best.is_none_or(|b| dist[v] < dist[b]) {
                best = Some(v);
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        let du = dist[u].clone().unwrap();
        for &(v, l) in &adj[u] {
            let cand = &du + l;
            if dist[v].as_ref().is_none_or(|x| cand < *x) {
                dist[v] = Some(cand);
            }
        }
    }
    dist.into_iter().map(|d| d.expect("graph is connected")).collect()
}

type Anchors = (Vec<(usize, Rational)>, Option<(String, Rational)>);

/// Ways to leave a point: (vertex, distance to it), plus the edge it sits on.
fn anchors(g: &MetricGraph, p: &Point) -> Anchors {
    match p {
        Point::Vertex(v) => (vec![(g.vertex_idx(v).expect("known vertex"), Rational::zero())], None),
        Point::OnEdge { edge, offset } => {
            let e = g.edge_by_id(edge).expect("known edge");
            (
                vec![(e.ends.0, offset.clone()), (e.ends.1, &e.length - offset)],
                Some((edge.clone(), offset.clone())),
            )
        }
    }
}

/// Point-to-point distance given all-pairs vertex distances.
pub fn point_distance(g: &MetricGraph, apsp: &[Vec<Option<Rational>>], p: &Point, q: &Point) -> Rational {
    let (ap, ep) = anchors(g, p);
    let (aq, eq) = anchors(g, q);
    let mut best: Option<Rational> = None;
    let mut offer = |x: Rational| {
        if best.as_ref().is_none_or(|b| x < *b) {
            best = Some(x);
        }
    };
    if let (Some((e1, t1)), Some((e2, t2))) = (&ep, &eq) {
        if e1 == e2 {
            offer((t1 - t2).abs());
        }
    }
    for (a, ta) in &ap {
        for (b, tb) in &aq {
            if let Some(ab) = &apsp[*a][*b] {
                offer(ta + ab + tb);
            }
        }
    }
    best.expect("graph is connected")
}

pub fn distance(g: &MetricGraph, p: &Point, q: &Point) -> Rational {
    point_distance(g, &floyd(g), p, q)
}

pub fn distance_matrix(g: &MetricGraph, ps: &[Point]) -> Vec<Vec<Rational>> {
    let apsp = floyd(g);
    ps.iter()
        .map(|p| ps.iter().map(|q| point_distance(g, &apsp, p, q)).collect())
        .collect()
}

/// `sum over unordered pairs of w_i w_j d_ij`, computed as half the ordered sum.
pub fn gamma(d: &[Vec<Rational>], w: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for i in 0..w.len() {
        for j in 0..w.len() {
            if i != j {
                acc += &w[i] * &w[j] * &d[i][j];
            }
        }
    }
    acc / Rational::from_integer(2.into())
}

/// `sum_R + sum_B - sum_cross` for index triples, from the definition.
pub fn gap(d: &[Vec<Rational>], blue: &[usize], red: &[usize]) -> Rational {
    let within = |s: &[usize]| {
        let mut acc = Rational::zero();
        for a in 0..s.len() {
            for b in 0..s.len() {
                if a < b {
                    acc += &d[s[a]][s[b]];
                }
            }
        }
        acc
    };
    let mut cross = Rational::zero();
    for &b in blue {
        for &r in red {
            cross += &d[b][r];
        }
    }
    within(blue) + within(red) - cross
}

fn to_float(d: &[Vec<Rational>]) -> DMatrix<f64> {
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| to_f64(&d[i][j]))
}

/// Smallest eigenvalue of the Gram matrix `(d_in + d_jn - d_ij) / 2` based
/// at the last point, relative to the largest distance.
pub fn gram_min_eigenvalue(d: &[Vec<Rational>]) -> f64 {
    let n = d.len();
    if n < 2 {
        return 0.0;
    }
    let b = n - 1;
    let f = to_float(d);
    let gram = DMatrix::from_fn(b, b, |i, j| (f[(i, b)] + f[(j, b)] - f[(i, j)]) / 2.0);
    let scale = f.iter().cloned().fold(1.0, f64::max);
    SymmetricEigen::new(gram).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min) / scale
}

/// Negative type up to floating-point tolerance.
pub fn float_negative_type(d: &[Vec<Rational>]) -> bool {
    gram_min_eigenvalue(d) >= -1e-9
}

/// Number of clearly positive eigenvalues of the distance matrix.
pub fn positive_eigenvalues(d: &[Vec<Rational>]) -> usize {
    let eig = SymmetricEigen::new(to_float(d)).eigenvalues;
    let radius = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    eig.iter().filter(|&&x| x > 1e-9 * radius).count()
}

/// Checks `sum_S w_S delta_S = d` for cuts given as member lists.
pub fn cut_sum_matches(d: &[Vec<Rational>], cuts: &[(Vec<usize>, Rational)]) -> bool {
    let n = d.len();
    let mut sum = vec![vec![Rational::zero(); n]; n];
    for (members, w) in cuts {
        if w.is_negative() {
            return false;
        }
        let inside: BTreeSet<usize> = members.iter().copied().collect();
        for i in 0..n {
            for j in 0..n {
                if inside.contains(&i) != inside.contains(&j) {
                    sum[i][j] += w;
                }
            }
        }
    }
    sum == d
}

/// Number of simple paths between `a` and `b` avoiding edge `skip`.
fn count_paths(g: &MetricGraph, a: usize, b: usize, skip: usize, cap: usize) -> usize {
    fn go(g: &MetricGraph, at: usize, b: usize, skip: usize, seen: &mut Vec<bool>, count: &mut usize, cap: usize) {
        if *count >= cap {
            return;
        }
        if at == b {
            *count += 1;
            return;
        }
        for (k, e) in g.edges().iter().enumerate() {
            if k == skip || e.ends.0 == e.ends.1 {
                continue;
            }
            let next = if e.ends.0 == at {
                e.ends.1
            } else if e.ends.1 == at {
                e.ends.0
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                go(g, next, b, skip, seen, count, cap);
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[a] = true;
    let mut count = 0;
    go(g, a, b, skip, &mut seen, &mut count, cap);
    count
}

/// A graph has a theta iff some non-loop edge lies on two distinct cycles.
pub fn has_theta(g: &MetricGraph) -> bool {
    g.edges()
        .iter()
        .enumerate()
        .any(|(k, e)| e.ends.0 != e.ends.1 && count_paths(g, e.ends.0, e.ends.1, k, 2) >= 2)
}

/// Minimum total length of a theta subgraph, by enumerating edge subsets:
/// a subgraph is a subdivided theta iff it is connected and bridgeless with
/// two vertices of degree 3 and all other touched vertices of degree 2.
pub fn min_theta_total(g: &MetricGraph) -> Option<Rational> {
    let m = g.edge_count();
    assert!(m <= 16, "subset oracle is for small graphs");
    let n = g.vertex_count();
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|k| mask >> k & 1 == 1).collect();
        if chosen.iter().any(|&k| g.edge(k).ends.0 == g.edge(k).ends.1) {
            continue;
        }
        let mut deg = vec![0usize; n];
        for &k in &chosen {
            deg[g.edge(k).ends.0] += 1;
            deg[g.edge(k).ends.1] += 1;
        }
        if deg.iter().filter(|&&x| x == 3).count() != 2 || deg.iter().any(|&x| x != 0 && x != 2 && x != 3) {
            continue;
        }
        let connected_without = |skip: Option<usize>| {
            let start = g.edge(chosen[0]).ends.0;
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &k in &chosen {
                    if Some(k) == skip {
                        continue;
                    }
                    let (a, b) = g.edge(k).ends;
                    for (p, q) in [(a, b), (b, a)] {
                        if p == x && !seen[q] {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
            (0..n).all(|v| deg[v] == 0 || seen[v])
        };
        if !connected_without(None) || chosen.iter().any(|&k| !connected_without(Some(k))) {
            continue;
        }
        let total: Rational = chosen.iter().map(|&k| g.edge(k).length.clone()).sum();
        if best.as_ref().is_none_or(|b| total < *b) {
            best = Some(total);
        }
    }
    best
}

/// Largest gamma over weightings `k / den` with integer `k`, `sum k = 0`
/// and `sum |k| = den`.
pub fn grid_gap(d: &[Vec<Rational>], den: i64) -> Rational {
    let n = d.len();
    let mut best: Option<Rational> = None;
    let mut k = vec![-den; n];
    'outer: loop {
        if k.iter().sum::<i64>() == 0 && k.iter().map(|x| x.abs()).sum::<i64>() == den {
            let w: Vec<Rational> = k.iter().map(|&x| frac(x, den)).collect();
            let g = gamma(d, &w);
            if best.as_ref().is_none_or(|b| g > *b) {
                best = Some(g);
            }
        }
        for slot in k.iter_mut() {
            *slot += 1;
            if *slot <= den {
                continue 'outer;
            }
            *slot = -den;
        }
        return best.expect("a two-point weighting exists");
    }
}
