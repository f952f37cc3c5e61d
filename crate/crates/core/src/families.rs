//! Named graph families and seeded random generators.

use num_traits::{One, Signed};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Point};
use crate::rational::{self, Rational};

/// Largest denominator used for random lengths and offsets.
pub const RANDOM_DENOMINATOR: i64 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Theta {
        #[serde(with = "crate::rational::serde_text_vec")]
        lengths: Vec<Rational>,
    },
    Complete {
        n: usize,
    },
    CompleteBipartite {
        a: usize,
        b: usize,
    },
    Cycle {
        n: usize,
    },
    Path {
        n: usize,
    },
    RandomConnected {
        n: usize,
        m: usize,
        seed: u64,
        #[serde(with = "crate::rational::serde_text")]
        min_len: Rational,
    },
}

/// Two vertices `u`, `v` joined by three edges `e1`, `e2`, `e3`.
pub fn make_theta(l1: &Rational, l2: &Rational, l3: &Rational) -> Result<MetricGraph> {
    for l in [l1, l2, l3] {
        if !l.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "theta path length must be positive, got {}",
                rational::format(l)
            )));
        }
    }
    MetricGraph::new(
        vec!["u".into(), "v".into()],
        [l1, l2, l3]
            .iter()
            .enumerate()
            .map(|(i, l)| (format!("e{}", i + 1), "u".into(), "v".into(), (*l).clone()))
            .collect(),
    )
}

fn unit(vertices: Vec<String>, pairs: Vec<(String, usize, usize)>) -> Result<MetricGraph> {
    let edges = pairs
        .into_iter()
        .map(|(id, a, b)| (id, vertices[a].clone(), vertices[b].clone(), Rational::one()))
        .collect();
    MetricGraph::new(vertices, edges)
}

pub fn make_named(spec: &FamilySpec) -> Result<MetricGraph> {
    let invalid = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
    match spec {
        FamilySpec::Theta { lengths } => match lengths.as_slice() {
            [a, b, c] => make_theta(a, b, c),
            _ => invalid("theta needs exactly three lengths"),
        },
        FamilySpec::Complete { n } => {
            if *n == 0 {
                return invalid("complete graph needs n >= 1");
            }
            let vs = (0..*n).map(|i| format!("v{i}")).collect();
            let mut es = Vec::new();
            for i in 0..*n {
                for j in (i + 1)..*n {
                    es.push((format!("e{i}_{j}"), i, j));
                }
            }
            unit(vs, es)
        }
        FamilySpec::CompleteBipartite { a, b } => {
            if *a == 0 || *b == 0 {
                return invalid("complete bipartite graph needs a, b >= 1");
            }
            let mut vs: Vec<String> = (0..*a).map(|i| format!("a{i}")).collect();
            vs.extend((0..*b).map(|j| format!("b{j}")));
            let mut es = Vec::new();
            for i in 0..*a {
                for j in 0..*b {
                    es.push((format!("e{i}_{j}"), i, a + j));
                }
            }
            unit(vs, es)
        }
        FamilySpec::Cycle { n } => {
            if *n < 2 {
                return invalid("cycle needs n >= 2");
            }
            let vs = (0..*n).map(|i| format!("v{i}")).collect();
            let es = (0..*n).map(|i| (format!("e{i}"), i, (i + 1) % n)).collect();
            unit(vs, es)
        }
        FamilySpec::Path { n } => {
            if *n == 0 {
                return invalid("path needs n >= 1");
            }
            let vs = (0..*n).map(|i| format!("v{i}")).collect();
            let es = (0..n - 1).map(|i| (format!("e{i}"), i, i + 1)).collect();
            unit(vs, es)
        }
        FamilySpec::RandomConnected { n, m, seed, min_len } => {
            make_random_connected(*n, *m, *seed, min_len)
        }
    }
}

fn random_length(rng: &mut ChaCha8Rng, min_len: &Rational) -> Rational {
    let j = rng.gen_range(0..=RANDOM_DENOMINATOR);
    min_len * rational::frac(RANDOM_DENOMINATOR + j, RANDOM_DENOMINATOR)
}

/// Uniform random labelled tree on `n` vertices, as parent pairs (Prüfer decoding).
fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = (0..n).find(|&x| degree[x] == 1).unwrap();
        edges.push((leaf.min(c), leaf.max(c)));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&x| degree[x] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// A connected multigraph on `n` vertices with `m` edges: a uniform random
/// spanning tree plus `m - n + 1` extra non-loop edges. Lengths lie in
/// `[min_len, 2 min_len]` on a grid of denominator 60.
pub fn make_random_connected(n: usize, m: usize, seed: u64, min_len: &Rational) -> Result<MetricGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one vertex".into()));
    }
    if m + 1 < n {
        return Err(Error::InvalidParameter(format!(
            "{m} edges cannot connect {n} vertices"
        )));
    }
    if n == 1 && m > 0 {
        return Err(Error::InvalidParameter(
            "a single vertex admits no non-loop edges".into(),
        ));
    }
    if !min_len.is_positive() {
        return Err(Error::InvalidParameter("min_len must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = random_tree(&mut rng, n);
    while pairs.len() < m {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        pairs.push((a.min(b), a.max(b)));
    }
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            (
                format!("e{i}"),
                vertices[a].clone(),
                vertices[b].clone(),
                random_length(&mut rng, min_len),
            )
        })
        .collect();
    MetricGraph::new(vertices, edges)
}

/// A random cactus whose blocks are all cycles or bridges: `cycles` cycles
/// of length 2..=5 glued at random existing vertices, plus `pendants` tree
/// edges. Always theta-free.
pub fn make_random_cactus(cycles: usize, pendants: usize, seed: u64, min_len: &Rational) -> Result<MetricGraph> {
    if !min_len.is_positive() {
        return Err(Error::InvalidParameter("min_len must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = vec!["v0".to_string()];
    let mut edges = Vec::new();
    let fresh = |vertices: &mut Vec<String>| {
        let id = format!("v{}", vertices.len());
        vertices.push(id.clone());
        id
    };
    let mut tasks: Vec<bool> = std::iter::repeat_n(true, cycles)
        .chain(std::iter::repeat_n(false, pendants))
        .collect();
    tasks.shuffle(&mut rng);
    for is_cycle in tasks {
        let anchor = vertices[rng.gen_range(0..vertices.len())].clone();
        if is_cycle {
            let len = rng.gen_range(2..=5usize);
            let mut prev = anchor.clone();
            for _ in 0..len - 1 {
                let next = fresh(&mut vertices);
                edges.push((format!("e{}", edges.len()), prev, next.clone(), random_length(&mut rng, min_len)));
                prev = next;
            }
            edges.push((format!("e{}", edges.len()), prev, anchor, random_length(&mut rng, min_len)));
        } else {
            let next = fresh(&mut vertices);
            edges.push((format!("e{}", edges.len()), anchor, next, random_length(&mut rng, min_len)));
        }
    }
    MetricGraph::new(vertices, edges)
}

/// `count` random points: vertices or edge points with offsets on a grid of
/// denominator 12 relative to the edge length.
pub fn random_points(g: &MetricGraph, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            if g.edge_count() == 0 || rng.gen_bool(0.3) {
                Point::Vertex(g.vertex_id(rng.gen_range(0..g.vertex_count())).to_string())
            } else {
                let e = g.edge(rng.gen_range(0..g.edge_count()));
                let k = rng.gen_range(1..12);
                Point::on_edge(e.id.clone(), &e.length * rational::frac(k, 12))
            }
        })
        .collect()
}
