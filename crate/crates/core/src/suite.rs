//! Reproduction checks run by `check-paper`.
//!
//! Each check is self-contained and deterministic. Distances the checks
//! compare against brute force go through [`Ctx`], so a deliberately
//! corrupted engine (`Ctx::faulty`) makes the suite fail.

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::analysis::{self, check_chain_with_l1, gap_bracket, is_negative_type, ChainReport};
use crate::error::{Error, Result};
use crate::families::{make_named, make_random_cactus, make_random_connected, make_theta, random_points, FamilySpec};
use crate::graph::{self, FiniteMetric, MetricGraph, Point};
use crate::l1cut::{is_l1_embeddable, is_l1_embeddable_with_bound, k4_explicit_decomposition};
use crate::rational::{self, frac, int, Rational};
use crate::theta::{self, contains_theta, theta_distance, ThetaPoint};
use crate::witness::{construct_witness, omega_from_witness, subdivision_witness, Witness, X, Y, Z};

/// Distance engine used by the checks.
#[derive(Debug, Clone, Default)]
pub struct Ctx {
    fault: bool,
}

impl Ctx {
    pub fn new() -> Self {
        Ctx::default()
    }

    /// A context whose distances are off by `1/1000` between distinct points.
    pub fn faulty() -> Self {
        Ctx { fault: true }
    }

    pub fn distance(&self, g: &MetricGraph, p: &Point, q: &Point) -> Result<Rational> {
        let d = graph::distance(g, p, q)?;
        Ok(if self.fault && !d.is_zero() {
            d + frac(1, 1000)
        } else {
            d
        })
    }

    pub fn distance_matrix(&self, g: &MetricGraph, ps: &[Point]) -> Result<FiniteMetric> {
        let mut m = graph::distance_matrix(g, ps)?;
        if self.fault {
            for row in m.dist.iter_mut() {
                for d in row.iter_mut() {
                    if !d.is_zero() {
                        *d += frac(1, 1000);
                    }
                }
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub limit: Duration,
    run: fn(&Ctx, &mut Shared) -> Result<(bool, String)>,
}

/// Workloads reused by several checks.
#[derive(Default)]
pub struct Shared {
    witnesses: Option<Vec<(u64, MetricGraph, Witness)>>,
    theta_free: Option<Vec<(MetricGraph, Vec<Point>)>>,
    chains: Vec<ChainReport>,
}

impl Shared {
    fn witnesses(&mut self) -> Result<&[(u64, MetricGraph, Witness)]> {
        if self.witnesses.is_none() {
            let mut out = Vec::new();
            for (seed, g) in theta_workload(100) {
                let w = construct_witness(&g)?;
                out.push((seed, g, w));
            }
            self.witnesses = Some(out);
        }
        Ok(self.witnesses.as_deref().unwrap())
    }

    fn theta_free(&mut self) -> Result<&[(MetricGraph, Vec<Point>)]> {
        if self.theta_free.is_none() {
            self.theta_free = Some(theta_free_workload(50)?);
        }
        Ok(self.theta_free.as_deref().unwrap())
    }
}

pub fn checks() -> Vec<Check> {
    let s = Duration::from_secs;
    vec![
        Check { id: 1, name: "unit theta witness has gap exactly 1/12", limit: s(1), run: check_unit_witness },
        Check { id: 2, name: "witness gap >= 1/12 on 100 random theta graphs", limit: s(60), run: check_universality },
        Check { id: 3, name: "gamma of the witness weighting is gap/36 >= 1/432", limit: s(60), run: check_weighting_constant },
        Check { id: 4, name: "unit theta gap upper end <= 1", limit: s(60), run: check_upper_remark },
        Check { id: 5, name: "2-subdivided K4 cut decomposition and LP", limit: s(120), run: check_k4 },
        Check { id: 6, name: "180-subdivision of K23 witness and rounding", limit: s(60), run: check_subdivision },
        Check { id: 7, name: "theta-free samples are negative type and l1", limit: s(120), run: check_theta_free },
        Check { id: 8, name: "distance, minimal theta and gap oracles agree", limit: s(120), run: check_oracles },
        Check { id: 9, name: "witness identities and branch-distance lemma", limit: s(60), run: check_lemmas },
        Check { id: 10, name: "l1 => negative type => one positive eigenvalue", limit: s(120), run: check_chains },
    ]
}

/// Runs the selected checks (all when `only` is empty) in id order.
pub fn run(ctx: &Ctx, only: &[u8]) -> Vec<CheckResult> {
    let mut shared = Shared::default();
    let mut out = Vec::new();
    for check in checks() {
        if !only.is_empty() && !only.contains(&check.id) {
            continue;
        }
        let start = Instant::now();
        let result = (check.run)(ctx, &mut shared);
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match result {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if elapsed > check.limit {
            passed = false;
            detail = format!("{detail}; exceeded {} s", check.limit.as_secs());
        }
        out.push(CheckResult {
            id: check.id,
            name: check.name,
            passed,
            detail,
            seconds: elapsed.as_secs_f64(),
        });
    }
    out
}

/// Seeded theta-containing graphs: at most 8 vertices, at most 12 edges,
/// lengths in `[1, 2]`.
pub fn theta_workload(count: usize) -> Vec<(u64, MetricGraph)> {
    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        let n = 2 + (seed % 7) as usize;
        let m = (n + 1 + (seed / 7 % 5) as usize).min(12);
        if let Ok(g) = make_random_connected(n, m, seed, &int(1)) {
            if contains_theta(&g) {
                out.push((seed, g));
            }
        }
        seed += 1;
    }
    out
}

/// Seeded theta-free graphs (trees, cycles, cacti) with at most 8 sample points each.
pub fn theta_free_workload(count: usize) -> Result<Vec<(MetricGraph, Vec<Point>)>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count as u64 {
        let g = match k % 3 {
            0 => make_random_connected(3 + (k % 6) as usize, 2 + (k % 6) as usize, k, &int(1))?,
            1 => {
                let c = make_named(&FamilySpec::Cycle { n: 3 + (k % 5) as usize })?;
                graph::scale(&c, &frac(1 + (k % 4) as i64, 2))?
            }
            _ => make_random_cactus(1 + (k % 3) as usize, (k % 4) as usize, k, &int(1))?,
        };
        let pts = random_points(&g, 3 + (k % 6) as usize, 1000 + k);
        out.push((g, pts));
    }
    Ok(out)
}

fn check_unit_witness(_: &Ctx, _: &mut Shared) -> Result<(bool, String)> {
    let g = make_theta(&int(1), &int(1), &int(1))?;
    let w = construct_witness(&g)?;
    let blue_ok = w.blue == [Point::vertex("u"), Point::vertex("v"), Point::vertex("v")];
    let twelfth = frac(1, 12);
    let p = &w.theta.paths;
    let red_ok = w.red
        == [
            Point::on_edge(p[0].edges[0].id.clone(), twelfth.clone()),
            Point::on_edge(p[1].edges[0].id.clone(), frac(11, 12)),
            Point::on_edge(p[2].edges[0].id.clone(), frac(11, 12)),
        ];
    let passed = w.gap == twelfth && blue_ok && red_ok;
    Ok((passed, format!("gap {}", rational::format(&w.gap))))
}

fn check_universality(_: &Ctx, shared: &mut Shared) -> Result<(bool, String)> {
    let ws = shared.witnesses()?;
    let min = ws.iter().map(|(_, _, w)| w.gap.clone()).min().unwrap();
    let bad: Vec<u64> = ws
        .iter()
        .filter(|(_, _, w)| w.gap < frac(1, 12))
        .map(|(s, _, _)| *s)
        .collect();
    Ok((
        bad.is_empty() && ws.len() == 100,
        format!("{} graphs, smallest gap {}, failing seeds {bad:?}", ws.len(), rational::format(&min)),
    ))
}

fn check_weighting_constant(_: &Ctx, shared: &mut Shared) -> Result<(bool, String)> {
    let ws = shared.witnesses()?;
    let mut failures = 0;
    let mut smallest: Option<Rational> = None;
    for (_, _, w) in ws {
        let (m, omega) = omega_from_witness(w);
        let g = analysis::gamma(&m, &omega)?;
        if g != &w.gap / int(36) || g < frac(1, 432) {
            failures += 1;
        }
        if smallest.as_ref().is_none_or(|s| g < *s) {
            smallest = Some(g);
        }
    }
    Ok((
        failures == 0,
        format!(
            "smallest gamma {}, {failures} failures",
            smallest.map(|s| rational::format(&s)).unwrap_or_default()
        ),
    ))
}

fn check_upper_remark(ctx: &Ctx, _: &mut Shared) -> Result<(bool, String)> {
    let g = make_theta(&int(1), &int(1), &int(1))?;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..10u64 {
        let mut pts = random_points(&g, 2 + (seed % 7) as usize, seed);
        pts.sort_by_key(|p| p.to_string());
        pts.dedup();
        if pts.len() < 2 {
            continue;
        }
        let m = ctx.distance_matrix(&g, &pts)?;
        let b = gap_bracket(&m, 8, 200, seed)?;
        worst = worst.max(rational::to_f64(&b.upper));
    }
    Ok((worst <= 1.0 + 1e-6, format!("largest upper end {worst}")))
}

fn check_k4(_: &Ctx, shared: &mut Shared) -> Result<(bool, String)> {
    let (g, dec) = k4_explicit_decomposition()?;
    let m = graph::distance_matrix(&g, &g.vertex_points())?;
    let explicit = dec.cuts.len() == 12 && dec.verify(&m);
    let lp = is_l1_embeddable_with_bound(&m, 16)?;
    let feasible = lp.is_embeddable() && lp.verify(&m);
    shared.chains.push(check_chain_with_l1(&m, Some(feasible))?);
    Ok((
        explicit && feasible,
        format!("explicit 12-cut sum verified: {explicit}; LP feasible: {feasible}"),
    ))
}

fn check_subdivision(_: &Ctx, shared: &mut Shared) -> Result<(bool, String)> {
    let k23 = make_named(&FamilySpec::CompleteBipartite { a: 2, b: 3 })?;
    let sw = subdivision_witness(&k23, 180)?;
    let verdict = is_negative_type(&sw.rounded)?;
    let refuted = match &verdict {
        analysis::NegTypeVerdict::NotNegativeType { weighting, gamma, .. } => {
            weighting.sum().is_zero() && analysis::gamma(&sw.rounded, weighting)? == *gamma && gamma.is_positive()
        }
        _ => false,
    };
    let l1 = is_l1_embeddable(&sw.rounded)?.is_embeddable();
    shared.chains.push(check_chain_with_l1(&sw.rounded, Some(l1))?);
    let passed = sw.continuous_gap >= frac(181, 12) && sw.vertex_gap.is_positive() && sw.sandwich_holds && refuted;
    Ok((
        passed,
        format!(
            "{} vertices, continuous gap {}, vertex gap {}, negative type refuted: {refuted}",
            sw.subdivided.vertex_count(),
            rational::format(&sw.continuous_gap),
            rational::format(&sw.vertex_gap)
        ),
    ))
}

fn check_theta_free(ctx: &Ctx, shared: &mut Shared) -> Result<(bool, String)> {
    let samples = shared.theta_free()?.to_vec();
    let mut failures = Vec::new();
    for (k, (g, pts)) in samples.iter().enumerate() {
        let m = ctx.distance_matrix(g, pts)?;
        let neg = is_negative_type(&m)?.holds();
        let l1 = is_l1_embeddable(&m)?;
        if !neg || !l1.is_embeddable() || !l1.verify(&m) {
            failures.push(k);
        }
        shared.chains.push(check_chain_with_l1(&m, Some(l1.is_embeddable()))?);
    }
    Ok((failures.is_empty(), format!("{} samples, failures {failures:?}", samples.len())))
}

fn check_oracles(ctx: &Ctx, _: &mut Shared) -> Result<(bool, String)> {
    let mut notes = Vec::new();
    let mut passed = true;

    let mut pairs = 0;
    let mut mismatches = 0;
    let mut seed = 0u64;
    while pairs < 200 {
        let n = 2 + (seed % 5) as usize;
        let g = make_random_connected(n, n + (seed % 4) as usize, 500 + seed, &int(1))?;
        let pts = random_points(&g, 20, 900 + seed);
        for pair in pts.chunks(2) {
            let got = ctx.distance(&g, &pair[0], &pair[1])?;
            if got != oracle::route_distance(&g, &pair[0], &pair[1])? {
                mismatches += 1;
            }
            pairs += 1;
        }
        seed += 1;
    }
    passed &= mismatches == 0;
    notes.push(format!("distance: {mismatches}/{pairs} mismatches"));

    let mut theta_mismatch = 0;
    for s in 0..100u64 {
        let n = 2 + (s % 5) as usize;
        let g = make_random_connected(n, (n + 1 + (s % 3) as usize).min(9), 3000 + s, &int(1))?;
        let brute = oracle::min_theta_total(&g);
        let fast = match theta::minimal_theta(&g) {
            Ok(t) => Some(t.total),
            Err(Error::NoTheta) => None,
            Err(e) => return Err(e),
        };
        if brute != fast {
            theta_mismatch += 1;
        }
    }
    passed &= theta_mismatch == 0;
    notes.push(format!("minimal theta: {theta_mismatch}/100 mismatches"));

    let mut grid_fail = 0;
    for s in 0..20u64 {
        let m = oracle::random_four_point_metric(s);
        let b = gap_bracket(&m, 16, 300, s)?;
        let grid = oracle::grid_gap(&m, 24);
        if grid > b.upper || b.lower > b.upper {
            grid_fail += 1;
        }
    }
    passed &= grid_fail == 0;
    notes.push(format!("gap grid: {grid_fail}/20 outside bracket"));
    Ok((passed, notes.join("; ")))
}

fn check_lemmas(_: &Ctx, shared: &mut Shared) -> Result<(bool, String)> {
    let ws = shared.witnesses()?;
    let twelfth = frac(1, 12);
    let sixth = frac(1, 6);
    let mut failures = Vec::new();
    for (seed, g, w) in ws {
        let mut ok = true;
        for i in 0..2 {
            ok &= *w.d(X + i, Y + i) == w.d(X + i, Y + i + 1) + &twelfth;
            ok &= *w.d(X + i, Z + i) == w.d(X + i, Z + i + 1) + &twelfth;
        }
        let i = w.index - 1;
        ok &= w.d(Y + i, Z + i) + w.d(Y + i + 1, Z + i + 1) >= w.d(Y + i, Z + i + 1) + w.d(Y + i + 1, Z + i);
        let min = [(0, 0), (0, 2), (2, 0), (2, 2)]
            .iter()
            .map(|&(a, b)| w.d(Y + a, Z + b).clone())
            .min()
            .unwrap();
        ok &= *w.d(Y + 1, Z + 1) == &sixth + min;
        let theta_points: Vec<&ThetaPoint> = w.x.iter().chain(&w.y).chain(&w.z).collect();
        for j in 0..3 {
            for (k, q) in theta_points.iter().enumerate() {
                ok &= *w.d(X + j, k) == theta_distance(&w.theta, &w.x[j], q)?;
            }
        }
        let report = theta::check_branch_distance_lemma(g, &w.theta, &theta::lemma_samples(&w.theta, 20, *seed))?;
        ok &= report.passed() && report.checked == 20;
        if !ok {
            failures.push(*seed);
        }
    }
    Ok((failures.is_empty(), format!("{} witnesses, failing seeds {failures:?}", ws.len())))
}

fn check_chains(_: &Ctx, shared: &mut Shared) -> Result<(bool, String)> {
    let ws: Vec<FiniteMetric> = shared.witnesses()?.iter().map(|(_, _, w)| omega_from_witness(w).0).collect();
    for m in &ws {
        let l1 = is_l1_embeddable(m)?.is_embeddable();
        shared.chains.push(check_chain_with_l1(m, Some(l1))?);
    }
    let bad: Vec<String> = shared
        .chains
        .iter()
        .flat_map(|c| c.violations.iter().cloned())
        .collect();
    Ok((
        bad.is_empty(),
        format!("{} metrics, violations {bad:?}", shared.chains.len()),
    ))
}

/// Slow reference implementations.
pub mod oracle {
    use super::*;

    /// All simple vertex paths from `a` to `b` as (edge indices, length).
    pub fn simple_paths(g: &MetricGraph, a: usize, b: usize) -> Vec<(Vec<usize>, Rational)> {
        fn go(
            g: &MetricGraph,
            at: usize,
            b: usize,
            seen: &mut Vec<bool>,
            edges: &mut Vec<usize>,
            len: Rational,
            out: &mut Vec<(Vec<usize>, Rational)>,
        ) {
            if at == b {
                out.push((edges.clone(), len));
                return;
            }
            for (k, e) in g.edges().iter().enumerate() {
                if e.is_loop() {
                    continue;
                }
                let next = if e.ends.0 == at {
                    e.ends.1
                } else if e.ends.1 == at {
                    e.ends.0
                } else {
                    continue;
                };
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                edges.push(k);
                go(g, next, b, seen, edges, &len + &e.length, out);
                edges.pop();
                seen[next] = false;
            }
        }
        let mut seen = vec![false; g.vertex_count()];
        seen[a] = true;
        let mut out = Vec::new();
        go(g, a, b, &mut seen, &mut Vec::new(), Rational::zero(), &mut out);
        out
    }

    fn anchors(g: &MetricGraph, p: &Point) -> Result<Vec<(usize, Rational)>> {
        Ok(match graph::canonical_point(g, p)? {
            Point::Vertex(v) => vec![(g.vertex_idx(&v).unwrap(), Rational::zero())],
            Point::OnEdge { edge, offset } => {
                let e = g.edge_by_id(&edge).unwrap();
                vec![(e.ends.0, offset.clone()), (e.ends.1, &e.length - &offset)]
            }
        })
    }

    /// Minimum over every route leaving `p` and `q` through an end of their
    /// edge and joined by a simple path, plus the direct run on a shared edge.
    pub fn route_distance(g: &MetricGraph, p: &Point, q: &Point) -> Result<Rational> {
        let mut best: Option<Rational> = None;
        let mut offer = |d: Rational| {
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        };
        if let (Point::OnEdge { edge: e1, offset: s }, Point::OnEdge { edge: e2, offset: t }) =
            (graph::canonical_point(g, p)?, graph::canonical_point(g, q)?)
        {
            if e1 == e2 {
                offer((&s - &t).abs());
            }
        }
        if graph::canonical_point(g, p)? == graph::canonical_point(g, q)? {
            offer(Rational::zero());
        }
        for (a, da) in anchors(g, p)? {
            for (b, db) in anchors(g, q)? {
                for (_, len) in simple_paths(g, a, b) {
                    offer(&da + &db + len);
                }
            }
        }
        best.ok_or_else(|| Error::Internal("no route".into()))
    }

    /// Smallest total length over all triples of internally disjoint paths
    /// between two distinct vertices.
    pub fn min_theta_total(g: &MetricGraph) -> Option<Rational> {
        let mut best: Option<Rational> = None;
        for u in 0..g.vertex_count() {
            for v in (u + 1)..g.vertex_count() {
                let paths: Vec<(Vec<usize>, Vec<usize>, Rational)> = simple_paths(g, u, v)
                    .into_iter()
                    .map(|(edges, len)| {
                        let mut inner = Vec::new();
                        let mut at = u;
                        for &k in &edges[..edges.len() - 1] {
                            let e = g.edge(k);
                            at = if e.ends.0 == at { e.ends.1 } else { e.ends.0 };
                            inner.push(at);
                        }
                        (edges, inner, len)
                    })
                    .collect();
                let disjoint = |a: &(Vec<usize>, Vec<usize>, Rational), b: &(Vec<usize>, Vec<usize>, Rational)| {
                    a.0.iter().all(|e| !b.0.contains(e)) && a.1.iter().all(|x| !b.1.contains(x))
                };
                for i in 0..paths.len() {
                    for j in (i + 1)..paths.len() {
                        if !disjoint(&paths[i], &paths[j]) {
                            continue;
                        }
                        for k in (j + 1)..paths.len() {
                            if disjoint(&paths[i], &paths[k]) && disjoint(&paths[j], &paths[k]) {
                                let total = &paths[i].2 + &paths[j].2 + &paths[k].2;
                                if best.as_ref().is_none_or(|b| total < *b) {
                                    best = Some(total);
                                }
                            }
                        }
                    }
                }
            }
        }
        best
    }

    /// Distances in `[1, 2]` on a 1/12 grid; always a metric.
    pub fn random_four_point_metric(seed: u64) -> FiniteMetric {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut d = vec![vec![Rational::zero(); 4]; 4];
        for i in 0..4 {
            for j in (i + 1)..4 {
                let v = frac(12 + rng.gen_range(0..=12), 12);
                d[i][j] = v.clone();
                d[j][i] = v;
            }
        }
        FiniteMetric::from_matrix(d).expect("grid distances form a metric")
    }

    /// Largest `gamma` over weightings `k / den` with `sum k = 0`, `sum |k| = den`.
    pub fn grid_gap(m: &FiniteMetric, den: i64) -> Rational {
        let n = m.len();
        let mut best: Option<Rational> = None;
        let mut k = vec![-den; n - 1];
        loop {
            let last: i64 = -k.iter().sum::<i64>();
            let abs: i64 = k.iter().map(|x| x.abs()).sum::<i64>() + last.abs();
            if abs == den {
                let mut w: Vec<Rational> = k.iter().map(|&x| frac(x, den)).collect();
                w.push(frac(last, den));
                let g = analysis::gamma(m, &analysis::Weighting::from_dense(&w)).unwrap();
                if best.as_ref().is_none_or(|b| g > *b) {
                    best = Some(g);
                }
            }
            let mut pos = 0;
            loop {
                if pos == k.len() {
                    return best.unwrap();
                }
                k[pos] += 1;
                if k[pos] <= den {
                    break;
                }
                k[pos] = -den;
                pos += 1;
            }
        }
    }
}

/// Check ids and names, without running anything.
pub fn describe() -> Vec<(u8, &'static str)> {
    checks().iter().map(|c| (c.id, c.name)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_have_requested_sizes() {
        let ws = theta_workload(100);
        assert_eq!(ws.len(), 100);
        for (_, g) in &ws {
            assert!(g.vertex_count() <= 8 && g.edge_count() <= 12);
            assert!(g.edges().iter().all(|e| e.length >= int(1) && e.length <= int(2)));
        }
        let tf = theta_free_workload(50).unwrap();
        assert_eq!(tf.len(), 50);
        assert!(tf.iter().all(|(g, p)| !contains_theta(g) && p.len() <= 8));
    }

    #[test]
    fn oracles_on_small_cases() {
        let g = make_theta(&int(1), &int(2), &int(3)).unwrap();
        assert_eq!(oracle::min_theta_total(&g), Some(int(6)));
        let c4 = make_named(&FamilySpec::Cycle { n: 4 }).unwrap();
        assert_eq!(oracle::min_theta_total(&c4), None);
        let d = oracle::route_distance(&c4, &Point::on_edge("e0", frac(1, 2)), &Point::on_edge("e2", frac(1, 2))).unwrap();
        assert_eq!(d, int(2));
        let two = FiniteMetric::from_matrix(vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        assert_eq!(oracle::grid_gap(&two, 24), frac(-1, 4));
    }

    #[test]
    fn quick_checks_pass_and_fault_is_detected() {
        let results = run(&Ctx::new(), &[1, 4]);
        assert!(results.iter().all(|r| r.passed), "{results:?}");
        let results = run(&Ctx::faulty(), &[8]);
        assert!(!results[0].passed);
    }
}
