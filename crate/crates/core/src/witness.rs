//! Six-point negative-type violation witnesses for theta-containing graphs.
//!
//! Starting from a minimum-total-length theta with branch vertices `u`, `v`
//! and paths `P1 <= P2 <= P3`, points `x1, x2, x3` spaced 1/12 apart within
//! 1/2 of `u` on `P1` are mapped to their antipodes `y_k` on the cycle
//! `P1 + P2` and `z_k` on `P1 + P3`. For a suitable index `i`, the triples
//! `B = {x_i, y_i, z_i}` and `R = {x_{i+1}, y_{i+1}, z_{i+1}}` satisfy
//! `sum_R + sum_B - sum_cross >= 1/12` whenever every edge has length >= 1.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::Weighting;
use crate::error::{Error, Result};
use crate::graph::{self, canonical_point, smooth, subdivide, FiniteMetric, MetricGraph, Point};
use crate::rational::{self, frac, Rational};
use crate::theta::{minimal_theta, Theta, ThetaPoint};

/// The antipode of `x` on the cycle formed by paths `a` and `b`
/// (0-based path indices).
pub fn opposite_point(t: &Theta, cycle: (usize, usize), x: &ThetaPoint) -> Result<ThetaPoint> {
    let (a, b) = cycle;
    if a == b || a > 2 || b > 2 {
        return Err(Error::InvalidParameter(format!("bad cycle ({a}, {b})")));
    }
    let s = match t.canonical(x)? {
        ThetaPoint::U => Rational::zero(),
        ThetaPoint::V => t.paths[a].length.clone(),
        ThetaPoint::OnPath { path, arclength } if path == a => arclength,
        ThetaPoint::OnPath { path, .. } => {
            return Err(Error::InvalidParameter(format!(
                "point lies on path {path}, not on path {a}"
            )))
        }
    };
    let la = &t.paths[a].length;
    let circumference = la + &t.paths[b].length;
    // Cycle coordinate: path a runs u -> v over [0, la]; path b runs back
    // v -> u over [la, circumference].
    let mut c = s + &circumference / rational::int(2);
    if c >= circumference {
        c -= &circumference;
    }
    let p = if c <= *la {
        ThetaPoint::on_path(a, c)
    } else {
        ThetaPoint::on_path(b, &circumference - c)
    };
    t.canonical(&p)
}

/// A window `[start, start + 1/6]` along `P1` and its antipodal images on
/// `P2` and `P3`, as arclength intervals from `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    #[serde(with = "crate::rational::serde_text")]
    pub start: Rational,
    #[serde(with = "crate::rational::serde_text_vec")]
    pub j2: Vec<Rational>,
    #[serde(with = "crate::rational::serde_text_vec")]
    pub j3: Vec<Rational>,
}

fn window_at(t: &Theta, start: Rational) -> Window {
    let sixth = frac(1, 6);
    let half_cycle = |k: usize| (&t.paths[0].length + &t.paths[k].length) / rational::int(2);
    let image = |k: usize| {
        let hi = half_cycle(k) - &start;
        let lo = &hi - &sixth;
        vec![lo, hi]
    };
    Window {
        j2: image(1),
        j3: image(2),
        start,
    }
}

fn interior_vertex_free(t: &Theta, path: usize, interval: &[Rational]) -> bool {
    t.paths[path]
        .internal_vertex_positions()
        .iter()
        .all(|c| !(interval[0] < *c && *c < interval[1]))
}

/// Windows at `0, 1/6, 1/3` whose images have vertex-free interiors, in scan order.
pub fn candidate_windows(t: &Theta) -> Vec<Window> {
    [frac(0, 1), frac(1, 6), frac(1, 3)]
        .into_iter()
        .map(|a| window_at(t, a))
        .filter(|w| interior_vertex_free(t, 1, &w.j2) && interior_vertex_free(t, 2, &w.j3))
        .collect()
}

fn require_long_edges(g: &MetricGraph) -> Result<()> {
    match g.min_edge_length() {
        Some(l) if *l < Rational::one() => Err(Error::Precondition(format!(
            "every edge must have length at least 1 (found {})",
            rational::format(l)
        ))),
        _ => Ok(()),
    }
}

/// The first window in scan order whose `J2`, `J3` interiors avoid vertices.
pub fn choose_window(g: &MetricGraph, t: &Theta) -> Result<Window> {
    require_long_edges(g)?;
    let minimal = minimal_theta(g)?;
    if minimal.total != t.total {
        return Err(Error::Precondition("theta is not of minimum total length".into()));
    }
    candidate_windows(t)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Internal("no window with vertex-free images".into()))
}

/// Which term attains `d(y2, z2) = 1/6 + min(...)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinCase {
    Y1Z1,
    Y1Z3,
    Y3Z1,
    Y3Z3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub theta: Theta,
    pub window: Window,
    /// `x1..x3`, `y1..y3`, `z1..z3` as theta points.
    pub x: [ThetaPoint; 3],
    pub y: [ThetaPoint; 3],
    pub z: [ThetaPoint; 3],
    /// Distances among the nine points in the order `x1 x2 x3 y1 y2 y3 z1 z2 z3`.
    pub nine: FiniteMetric,
    /// Chosen index, 1 or 2.
    pub index: usize,
    pub blue: [Point; 3],
    pub red: [Point; 3],
    #[serde(with = "crate::rational::serde_text")]
    pub gap: Rational,
    pub case: MinCase,
}

pub const X: usize = 0;
pub const Y: usize = 3;
pub const Z: usize = 6;

impl Witness {
    /// Distance between constructed points, e.g. `d(Y + 1, Z + 0)` for `d(y2, z1)`.
    pub fn d(&self, a: usize, b: usize) -> &Rational {
        self.nine.d(a, b)
    }

    /// The six points `B` then `R` with their distance matrix.
    pub fn six(&self) -> FiniteMetric {
        let i = self.index - 1;
        self.nine
            .restrict(&[X + i, Y + i, Z + i, X + i + 1, Y + i + 1, Z + i + 1])
    }
}

/// `sum_R + sum_B - sum_cross` over unordered pairs; `blue` and `red` are
/// index triples into `m` (repeats allowed).
pub fn gap(m: &FiniteMetric, blue: &[usize], red: &[usize]) -> Result<Rational> {
    if blue.len() != 3 || red.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "gap needs two triples, got sizes {} and {}",
            blue.len(),
            red.len()
        )));
    }
    if let Some(&bad) = blue.iter().chain(red).find(|&&k| k >= m.len()) {
        return Err(Error::InvalidParameter(format!("index {bad} outside metric")));
    }
    let within = |s: &[usize]| -> Rational {
        let mut acc = Rational::zero();
        for a in 0..3 {
            for b in (a + 1)..3 {
                acc += m.d(s[a], s[b]);
            }
        }
        acc
    };
    let mut cross = Rational::zero();
    for &r in red {
        for &b in blue {
            cross += m.d(r, b);
        }
    }
    Ok(within(red) + within(blue) - cross)
}

/// Same as [`gap`] but addressing points by label.
pub fn gap_of_points(m: &FiniteMetric, blue: &[Point], red: &[Point]) -> Result<Rational> {
    let idx = |ps: &[Point]| -> Result<Vec<usize>> {
        ps.iter()
            .map(|p| {
                m.index_of(p)
                    .ok_or_else(|| Error::InvalidParameter(format!("point {p} not in metric")))
            })
            .collect()
    };
    gap(m, &idx(blue)?, &idx(red)?)
}

fn eq2_holds(w: &FiniteMetric, i: usize) -> bool {
    let (a, b) = (i, i + 1);
    w.d(Y + a, Z + a) + w.d(Y + b, Z + b) >= w.d(Y + a, Z + b) + w.d(Y + b, Z + a)
}

fn min_case(w: &FiniteMetric) -> Option<MinCase> {
    let target = w.d(Y + 1, Z + 1) - frac(1, 6);
    let terms = [
        (MinCase::Y1Z1, w.d(Y, Z)),
        (MinCase::Y1Z3, w.d(Y, Z + 2)),
        (MinCase::Y3Z1, w.d(Y + 2, Z)),
        (MinCase::Y3Z3, w.d(Y + 2, Z + 2)),
    ];
    let min = terms.iter().map(|(_, d)| *d).min()?;
    if *min != target {
        return None;
    }
    terms.iter().find(|(_, d)| *d == min).map(|(c, _)| *c)
}

/// Runs the full construction on `g`.
pub fn construct_witness(g: &MetricGraph) -> Result<Witness> {
    require_long_edges(g)?;
    let theta = minimal_theta(g)?;
    let twelfth = frac(1, 12);
    let bound = twelfth.clone();
    for window in candidate_windows(&theta) {
        let x: [ThetaPoint; 3] = std::array::from_fn(|k| {
            theta
                .canonical(&ThetaPoint::on_path(
                    0,
                    &window.start + &twelfth * rational::int(k as i64),
                ))
                .expect("window lies on P1")
        });
        let y: [ThetaPoint; 3] =
            std::array::from_fn(|k| opposite_point(&theta, (0, 1), &x[k]).expect("x on P1"));
        let z: [ThetaPoint; 3] =
            std::array::from_fn(|k| opposite_point(&theta, (0, 2), &x[k]).expect("x on P1"));
        let points = x
            .iter()
            .chain(&y)
            .chain(&z)
            .map(|p| theta.to_point(g, p))
            .collect::<Result<Vec<_>>>()?;
        let nine = graph::distance_matrix(g, &points)?;
        let Some(index) = (1..=2).find(|&i| eq2_holds(&nine, i - 1)) else {
            continue;
        };
        let i = index - 1;
        let blue = [X + i, Y + i, Z + i];
        let red = [X + i + 1, Y + i + 1, Z + i + 1];
        let value = gap(&nine, &blue, &red)?;
        if value < bound {
            continue;
        }
        let Some(case) = min_case(&nine) else {
            continue;
        };
        let pick = |s: [usize; 3]| s.map(|k| points[k].clone());
        return Ok(Witness {
            blue: pick(blue),
            red: pick(red),
            theta,
            window,
            x,
            y,
            z,
            nine,
            index,
            gap: value,
            case,
        });
    }
    Err(Error::Internal(
        "no window produced a gap of at least 1/12".into(),
    ))
}

/// Weighting `-1/6` on each blue point and `+1/6` on each red point,
/// accumulated over coincident points, together with the metric on the
/// distinct support points.
pub fn omega_from_witness(w: &Witness) -> (FiniteMetric, Weighting) {
    let six = w.six();
    let mut distinct: Vec<usize> = Vec::new();
    let mut slot = [0usize; 6];
    for k in 0..6 {
        match distinct.iter().position(|&d| six.points[d] == six.points[k]) {
            Some(pos) => slot[k] = pos,
            None => {
                slot[k] = distinct.len();
                distinct.push(k);
            }
        }
    }
    let metric = six.restrict(&distinct);
    let mut weights = vec![Rational::zero(); distinct.len()];
    for k in 0..6 {
        let sign = if k < 3 { -1 } else { 1 };
        weights[slot[k]] += frac(sign, 6);
    }
    (metric, Weighting::from_dense(&weights))
}

/// Nearest vertex for each point, ties going to the edge's first endpoint.
/// Fails if a point is farther than 1/2 from both ends of its edge.
pub fn round_to_vertices(g: &MetricGraph, ps: &[Point]) -> Result<Vec<String>> {
    let half = frac(1, 2);
    ps.iter()
        .map(|p| match canonical_point(g, p)? {
            Point::Vertex(v) => Ok(v),
            Point::OnEdge { edge, offset } => {
                let e = g.edge_by_id(&edge).unwrap();
                let rest = &e.length - &offset;
                let (d, v) = if offset <= rest {
                    (offset.clone(), e.ends.0)
                } else {
                    (rest, e.ends.1)
                };
                if d > half {
                    return Err(Error::Precondition(format!(
                        "point {edge}@{} is more than 1/2 from every vertex",
                        rational::format(&offset)
                    )));
                }
                Ok(g.vertex_id(v).to_string())
            }
        })
        .collect()
}

/// Witness on a k-subdivided unit graph, before and after rounding to vertices.
#[derive(Debug, Clone)]
pub struct SubdivisionWitness {
    pub k: usize,
    pub subdivided: MetricGraph,
    /// Continuous points of the subdivided graph, `B` then `R`.
    pub continuous: FiniteMetric,
    pub continuous_gap: Rational,
    pub blue_vertices: [String; 3],
    pub red_vertices: [String; 3],
    /// Vertex metric on the rounded points, `B'` then `R'`.
    pub rounded: FiniteMetric,
    pub vertex_gap: Rational,
    pub sandwich_holds: bool,
}

pub const MIN_SUBDIVISION: usize = 180;

/// Builds the k-subdivision of a unit graph with a theta, finds a witness on
/// its degree-2-suppressed form scaled to unit minimum, and rounds the six
/// points to vertices of the subdivision.
pub fn subdivision_witness(g0: &MetricGraph, k: usize) -> Result<SubdivisionWitness> {
    if k < MIN_SUBDIVISION {
        return Err(Error::Precondition(format!(
            "subdivision count must be at least {MIN_SUBDIVISION}"
        )));
    }
    if let Some(e) = g0.edges().iter().find(|e| !e.length.is_one()) {
        return Err(Error::NonUnitLength(e.id.clone()));
    }
    if !crate::theta::contains_theta(g0) {
        return Err(Error::NoTheta);
    }
    let sub = subdivide(g0, k)?;
    let smoothing = smooth(&sub)?;
    let segment = rational::int(k as i64 + 1);
    let unit = graph::scale(&smoothing.graph, &(Rational::one() / &segment))?;
    let w = construct_witness(&unit)?;
    let lift = |p: &Point| -> Result<Point> {
        let p = match p {
            Point::Vertex(_) => p.clone(),
            Point::OnEdge { edge, offset } => Point::on_edge(edge.clone(), offset * &segment),
        };
        smoothing.lift(&sub, &p)
    };
    let six: Vec<Point> = w
        .blue
        .iter()
        .chain(&w.red)
        .map(lift)
        .collect::<Result<_>>()?;
    let continuous = graph::distance_matrix(&sub, &six)?;
    let continuous_gap = gap(&continuous, &[0, 1, 2], &[3, 4, 5])?;
    if continuous_gap != &w.gap * &segment {
        return Err(Error::Internal("lifted witness does not scale".into()));
    }
    let rounded_ids = round_to_vertices(&sub, &six)?;
    let rounded_points: Vec<Point> = rounded_ids.iter().cloned().map(Point::Vertex).collect();
    let rounded = graph::distance_matrix(&sub, &rounded_points)?;
    let vertex_gap = gap(&rounded, &[0, 1, 2], &[3, 4, 5])?;
    let one = Rational::one();
    let mut sandwich_holds = true;
    for a in 0..6 {
        for b in (a + 1)..6 {
            let (d, dr) = (continuous.d(a, b), rounded.d(a, b));
            if !(dr + &one >= *d && *d >= dr - &one) {
                sandwich_holds = false;
            }
        }
    }
    if !vertex_gap.is_positive() {
        return Err(Error::Internal(format!(
            "rounded gap {} is not positive",
            rational::format(&vertex_gap)
        )));
    }
    let ids = |r: std::ops::Range<usize>| -> [String; 3] {
        let v: Vec<String> = rounded_ids[r].to_vec();
        [v[0].clone(), v[1].clone(), v[2].clone()]
    };
    Ok(SubdivisionWitness {
        k,
        subdivided: sub,
        continuous,
        continuous_gap,
        blue_vertices: ids(0..3),
        red_vertices: ids(3..6),
        rounded,
        vertex_gap,
        sandwich_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_named, make_theta, FamilySpec};
    use crate::rational::int;
    use crate::theta::theta_distance;

    fn theta(a: i64, b: i64, c: i64) -> MetricGraph {
        make_theta(&int(a), &int(b), &int(c)).unwrap()
    }

    #[test]
    fn opposite_point_examples() {
        let t = minimal_theta(&theta(1, 1, 1)).unwrap();
        assert_eq!(opposite_point(&t, (0, 1), &ThetaPoint::U).unwrap(), ThetaPoint::V);
        let x = ThetaPoint::on_path(0, frac(1, 12));
        let y = opposite_point(&t, (0, 1), &x).unwrap();
        assert_eq!(y, ThetaPoint::on_path(1, frac(11, 12)));
        assert_eq!(theta_distance(&t, &y, &ThetaPoint::V).unwrap(), frac(1, 12));

        let t = minimal_theta(&theta(1, 3, 3)).unwrap();
        let y = opposite_point(&t, (0, 1), &ThetaPoint::U).unwrap();
        assert_eq!(y, ThetaPoint::on_path(1, int(2)));

        let off = ThetaPoint::on_path(2, frac(1, 2));
        assert!(opposite_point(&t, (0, 1), &off).is_err());
    }

    #[test]
    fn opposite_point_is_an_involution_at_half_circumference() {
        let t = minimal_theta(&theta(2, 3, 5)).unwrap();
        for k in 0..=8 {
            let x = t.canonical(&ThetaPoint::on_path(0, frac(k, 4))).unwrap();
            let y = opposite_point(&t, (0, 2), &x).unwrap();
            assert_eq!(theta_distance(&t, &x, &y).unwrap(), frac(7, 2));
        }
    }

    #[test]
    fn window_examples() {
        let g = theta(1, 1, 1);
        let t = minimal_theta(&g).unwrap();
        let w = choose_window(&g, &t).unwrap();
        assert_eq!(w.start, int(0));
        assert_eq!(w.j2, vec![frac(5, 6), int(1)]);

        let g = theta(2, 2, 2);
        let t = minimal_theta(&g).unwrap();
        assert_eq!(choose_window(&g, &t).unwrap().start, int(0));

        let k4 = make_named(&FamilySpec::Complete { n: 4 }).unwrap();
        let t = minimal_theta(&k4).unwrap();
        let w = choose_window(&k4, &t).unwrap();
        assert_eq!(w.start, int(0));
        // P2 and P3 have length 2 with a middle vertex at arclength 1.
        assert_eq!(w.j2, vec![frac(4, 3), frac(3, 2)]);
    }

    #[test]
    fn window_falls_back_when_images_hit_vertices() {
        // P1 = 1, P2 = 2 split at 17/12: J2 for start 0 is [4/3, 3/2].
        let g = MetricGraph::new(
            vec!["u".into(), "v".into(), "m".into()],
            vec![
                ("p1".into(), "u".into(), "v".into(), int(1)),
                ("p2a".into(), "u".into(), "m".into(), frac(17, 12)),
                ("p2b".into(), "m".into(), "v".into(), frac(7, 12)),
                ("p3".into(), "u".into(), "v".into(), int(3)),
            ],
        );
        // p2b is shorter than 1, so only the window scan is checked here.
        let g = g.unwrap();
        let t = minimal_theta(&g).unwrap();
        let ws = candidate_windows(&t);
        assert_eq!(ws[0].start, frac(1, 6));
    }

    #[test]
    fn unit_theta_witness() {
        let w = construct_witness(&theta(1, 1, 1)).unwrap();
        assert_eq!(w.index, 1);
        assert_eq!(w.gap, frac(1, 12));
        assert_eq!(
            w.blue,
            [Point::vertex("u"), Point::vertex("v"), Point::vertex("v")]
        );
        let p = &w.theta.paths;
        assert_eq!(
            w.red,
            [
                Point::on_edge(p[0].edges[0].id.clone(), frac(1, 12)),
                Point::on_edge(p[1].edges[0].id.clone(), frac(11, 12)),
                Point::on_edge(p[2].edges[0].id.clone(), frac(11, 12)),
            ]
        );
        assert_eq!(w.case, MinCase::Y1Z1);
    }

    #[test]
    fn doubled_theta_witness() {
        let w = construct_witness(&theta(2, 2, 2)).unwrap();
        assert_eq!(w.gap, frac(1, 12));
    }

    #[test]
    fn short_edges_rejected() {
        let g = make_theta(&frac(1, 2), &int(1), &int(1)).unwrap();
        assert!(matches!(construct_witness(&g), Err(Error::Precondition(_))));
        let c4 = make_named(&FamilySpec::Cycle { n: 4 }).unwrap();
        assert_eq!(construct_witness(&c4), Err(Error::NoTheta));
    }

    #[test]
    fn gap_examples() {
        let m = FiniteMetric::from_matrix(vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        assert_eq!(gap(&m, &[0, 0, 0], &[0, 0, 0]).unwrap(), int(0));
        assert_eq!(gap(&m, &[0, 0, 0], &[1, 1, 1]).unwrap(), int(-9));
        assert!(gap(&m, &[0, 0], &[1, 1, 1]).is_err());
        assert!(gap(&m, &[0, 0, 2], &[1, 1, 1]).is_err());
    }

    #[test]
    fn unit_theta_gap_from_sums() {
        let w = construct_witness(&theta(1, 1, 1)).unwrap();
        let six = w.six();
        let within: Rational = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]
            .iter()
            .map(|&(a, b)| six.d(a, b).clone())
            .sum();
        let cross: Rational = (0..3)
            .flat_map(|a| (3..6).map(move |b| (a, b)))
            .map(|(a, b)| six.d(a, b).clone())
            .sum();
        assert_eq!(within, frac(25, 6));
        assert_eq!(cross, frac(49, 12));
    }

    #[test]
    fn omega_accumulates_multiplicity() {
        let w = construct_witness(&theta(1, 1, 1)).unwrap();
        let (m, omega) = omega_from_witness(&w);
        let u = m.index_of(&Point::vertex("u")).unwrap();
        let v = m.index_of(&Point::vertex("v")).unwrap();
        assert_eq!(omega.get(u), frac(-1, 6));
        assert_eq!(omega.get(v), frac(-1, 3));
        assert_eq!(omega.sum(), &int(0));
        assert_eq!(omega.abs_sum(), &int(1));
        assert_eq!(crate::analysis::gamma(&m, &omega).unwrap(), frac(1, 432));
    }

    #[test]
    fn rounding_examples() {
        let g = make_named(&FamilySpec::Path { n: 2 }).unwrap();
        let r = round_to_vertices(
            &g,
            &[
                Point::on_edge("e0", frac(5, 12)),
                Point::on_edge("e0", frac(1, 2)),
                Point::on_edge("e0", frac(7, 12)),
                Point::vertex("v1"),
            ],
        )
        .unwrap();
        assert_eq!(r, vec!["v0", "v0", "v1", "v1"]);
        let long = graph::scale(&g, &int(3)).unwrap();
        assert!(round_to_vertices(&long, &[Point::on_edge("e0", int(1))]).is_err());
    }

    #[test]
    fn subdivision_rejects_theta_free_and_small_k() {
        let c4 = make_named(&FamilySpec::Cycle { n: 4 }).unwrap();
        assert_eq!(subdivision_witness(&c4, 180).unwrap_err(), Error::NoTheta);
        let k23 = make_named(&FamilySpec::CompleteBipartite { a: 2, b: 3 }).unwrap();
        assert!(subdivision_witness(&k23, 10).is_err());
    }
}
