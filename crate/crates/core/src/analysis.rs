//! Negative-type machinery for finite metrics.
//!
//! `gamma` sums `w(x) w(y) d(x, y)` over unordered pairs of distinct
//! indices. A metric has negative type when `gamma <= 0` for every weighting
//! with total weight zero; this is decided exactly through a pivoted LDL^T
//! factorisation of the Gram matrix based at one point.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FiniteMetric;
use crate::linalg;
use crate::rational::{self, Rational};

/// A finitely supported weighting of metric points (by index).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Weighting {
    weights: BTreeMap<usize, Rational>,
    sum: Rational,
    abs_sum: Rational,
}

impl Weighting {
    pub fn from_dense(w: &[Rational]) -> Self {
        Self::from_pairs(w.iter().cloned().enumerate())
    }

    /// Accumulates repeated indices; zero totals are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut weights: BTreeMap<usize, Rational> = BTreeMap::new();
        for (i, w) in pairs {
            *weights.entry(i).or_insert_with(Rational::zero) += w;
        }
        weights.retain(|_, w| !w.is_zero());
        let sum = weights.values().cloned().sum();
        let abs_sum = weights.values().map(|w| w.abs()).sum();
        Weighting {
            weights,
            sum,
            abs_sum,
        }
    }

    pub fn get(&self, i: usize) -> Rational {
        self.weights.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn sum(&self) -> &Rational {
        &self.sum
    }

    pub fn abs_sum(&self) -> &Rational {
        &self.abs_sum
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.weights.iter().map(|(&i, w)| (i, w))
    }

    pub fn to_dense(&self, n: usize) -> Vec<Rational> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// Rescales so that `sum |w| = 1`. Returns `None` for the zero weighting.
    pub fn normalized(&self) -> Option<Weighting> {
        if self.abs_sum.is_zero() {
            return None;
        }
        let s = self.abs_sum.clone();
        Some(Self::from_pairs(
            self.weights.iter().map(|(&i, w)| (i, w / &s)),
        ))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.weights.keys().next_back().copied()
    }
}

impl Serialize for Weighting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> = self
            .weights
            .iter()
            .map(|(i, w)| (i.to_string(), rational::format(w)))
            .collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weighting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, String>::deserialize(d)?;
        let mut pairs = Vec::with_capacity(m.len());
        for (k, v) in m {
            let i = k.parse::<usize>().map_err(serde::de::Error::custom)?;
            let w = rational::parse(&v).map_err(serde::de::Error::custom)?;
            pairs.push((i, w));
        }
        Ok(Weighting::from_pairs(pairs))
    }
}

/// Sum of `w(x) w(y) d(x, y)` over unordered pairs `x != y`.
pub fn gamma(m: &FiniteMetric, w: &Weighting) -> Result<Rational> {
    if let Some(i) = w.max_index() {
        if i >= m.len() {
            return Err(Error::InvalidParameter(format!(
                "weighting index {i} outside a metric on {} points",
                m.len()
            )));
        }
    }
    let support: Vec<(usize, &Rational)> = w.support().collect();
    let mut acc = Rational::zero();
    for (a, (i, wi)) in support.iter().enumerate() {
        for (j, wj) in &support[a + 1..] {
            acc += *wi * *wj * m.d(*i, *j);
        }
    }
    Ok(acc)
}

/// Exact pivoted factorisation `G[order, order] = L D L^T` with `D >= 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    /// Gram index of each position, pivots first.
    pub order: Vec<usize>,
    #[serde(with = "crate::rational::serde_text_matrix")]
    pub l: Vec<Vec<Rational>>,
    #[serde(with = "crate::rational::serde_text_vec")]
    pub d: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NegTypeVerdict {
    NegativeType {
        basepoint: usize,
        elimination: Elimination,
    },
    NotNegativeType {
        basepoint: usize,
        weighting: Weighting,
        #[serde(with = "crate::rational::serde_text")]
        gamma: Rational,
    },
}

impl NegTypeVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, NegTypeVerdict::NegativeType { .. })
    }
}

/// Gram matrix based at `basepoint`; rows follow the remaining points in order.
pub fn gram_matrix(m: &FiniteMetric, basepoint: usize) -> (Vec<usize>, Vec<Vec<Rational>>) {
    let others: Vec<usize> = (0..m.len()).filter(|&i| i != basepoint).collect();
    let two = rational::int(2);
    let g = others
        .iter()
        .map(|&j| {
            others
                .iter()
                .map(|&k| (m.d(j, basepoint) + m.d(k, basepoint) - m.d(j, k)) / &two)
                .collect()
        })
        .collect();
    (others, g)
}

/// Exact decision with the last point as basepoint.
pub fn is_negative_type(m: &FiniteMetric) -> Result<NegTypeVerdict> {
    if m.is_empty() {
        return Err(Error::MalformedMetric("empty metric".into()));
    }
    is_negative_type_at(m, m.len() - 1)
}

pub fn is_negative_type_at(m: &FiniteMetric, basepoint: usize) -> Result<NegTypeVerdict> {
    if basepoint >= m.len() {
        return Err(Error::InvalidParameter("basepoint out of range".into()));
    }
    m.validate()?;
    let (others, gram) = gram_matrix(m, basepoint);
    match ldl_psd(&gram) {
        Ok((order, l, d)) => Ok(NegTypeVerdict::NegativeType {
            basepoint,
            elimination: Elimination {
                order: order.iter().map(|&p| others[p]).collect(),
                l,
                d,
            },
        }),
        Err(x) => {
            // x^T G x < 0; lift to a zero-sum weighting.
            let mut dense = vec![Rational::zero(); m.len()];
            let mut total = Rational::zero();
            for (pos, &point) in others.iter().enumerate() {
                dense[point] = x[pos].clone();
                total += &x[pos];
            }
            dense[basepoint] = -total;
            let weighting = Weighting::from_dense(&dense)
                .normalized()
                .ok_or_else(|| Error::Internal("zero violating direction".into()))?;
            let value = gamma(m, &weighting)?;
            if !value.is_positive() || !weighting.sum().is_zero() {
                return Err(Error::Internal("violating direction failed to certify".into()));
            }
            Ok(NegTypeVerdict::NotNegativeType {
                basepoint,
                weighting,
                gamma: value,
            })
        }
    }
}

type Factor = (Vec<usize>, Vec<Vec<Rational>>, Vec<Rational>);

/// Symmetric elimination with full diagonal pivoting. On success returns
/// the pivot order with factors `L` (unit lower) and `D`; otherwise a vector
/// `x` with `x^T G x < 0` in the original coordinates.
fn ldl_psd(g: &[Vec<Rational>]) -> std::result::Result<Factor, Vec<Rational>> {
    let n = g.len();
    let mut a: Vec<Vec<Rational>> = g.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![vec![Rational::zero(); n]; n];
    let mut d = vec![Rational::zero(); n];
    for (i, row) in l.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    for k in 0..n {
        let mut best = k;
        for j in (k + 1)..n {
            if a[j][j] > a[best][best] {
                best = j;
            }
        }
        let violation = if a[best][best].is_negative() {
            Some(vec![(best, Rational::one())])
        } else if a[best][best].is_zero() {
            let mut found = None;
            'scan: for p in k..n {
                if a[p][p].is_negative() {
                    found = Some(vec![(p, Rational::one())]);
                    break;
                }
                for q in (p + 1)..n {
                    if !a[p][q].is_zero() {
                        let s = if a[p][q].is_positive() {
                            -Rational::one()
                        } else {
                            Rational::one()
                        };
                        found = Some(vec![(p, Rational::one()), (q, s)]);
                        break 'scan;
                    }
                }
            }
            match found {
                Some(v) => Some(v),
                // Remaining Schur complement vanishes.
                None => return Ok((perm, l, d)),
            }
        } else {
            None
        };
        if let Some(z) = violation {
            return Err(lift(g, &perm, k, &z));
        }
        if best != k {
            a.swap(k, best);
            for row in a.iter_mut() {
                row.swap(k, best);
            }
            perm.swap(k, best);
            for c in 0..k {
                let tmp = l[k][c].clone();
                l[k][c] = l[best][c].clone();
                l[best][c] = tmp;
            }
        }
        let pivot = a[k][k].clone();
        d[k] = pivot.clone();
        for i in (k + 1)..n {
            l[i][k] = &a[i][k] / &pivot;
        }
        for i in (k + 1)..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in (k + 1)..n {
                let delta = &l[i][k] * &a[k][j];
                a[i][j] -= delta;
            }
        }
        for i in (k + 1)..n {
            a[i][k] = Rational::zero();
            a[k][i] = Rational::zero();
        }
    }
    Ok((perm, l, d))
}

/// Extends a negative direction `z` of the Schur complement after `k`
/// pivots (positions `>= k` of `perm`) to a full negative direction of `g`.
fn lift(g: &[Vec<Rational>], perm: &[usize], k: usize, z: &[(usize, Rational)]) -> Vec<Rational> {
    let n = g.len();
    let mut x = vec![Rational::zero(); n];
    for (pos, val) in z {
        x[perm[*pos]] = val.clone();
    }
    if k > 0 {
        let pivots = &perm[..k];
        let g11: Vec<Vec<Rational>> = pivots
            .iter()
            .map(|&r| pivots.iter().map(|&c| g[r][c].clone()).collect())
            .collect();
        let rhs: Vec<Rational> = pivots
            .iter()
            .map(|&r| {
                -z.iter()
                    .map(|(pos, val)| &g[r][perm[*pos]] * val)
                    .sum::<Rational>()
            })
            .collect();
        let w = linalg::solve(&g11, &rhs).expect("pivot block is positive definite");
        for (idx, &r) in pivots.iter().enumerate() {
            x[r] = w[idx].clone();
        }
    }
    x
}

/// Checks `G[order, order] = L D L^T`, `L` unit lower triangular, `D >= 0`.
pub fn verify_elimination(m: &FiniteMetric, basepoint: usize, e: &Elimination) -> bool {
    let (others, gram) = gram_matrix(m, basepoint);
    let n = others.len();
    if e.order.len() != n || e.l.len() != n || e.d.len() != n || e.l.iter().any(|r| r.len() != n) {
        return false;
    }
    let mut sorted = e.order.clone();
    sorted.sort_unstable();
    if sorted != others {
        return false;
    }
    if e.d.iter().any(|x| x.is_negative()) {
        return false;
    }
    for i in 0..n {
        if !e.l[i][i].is_one() || e.l[i][i + 1..].iter().any(|x| !x.is_zero()) {
            return false;
        }
    }
    let pos: Vec<usize> = e
        .order
        .iter()
        .map(|p| others.iter().position(|o| o == p).unwrap())
        .collect();
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Rational::zero();
            for k in 0..=j {
                acc += &e.l[i][k] * &e.d[k] * &e.l[j][k];
            }
            if acc != gram[pos[i]][pos[j]] {
                return false;
            }
        }
    }
    true
}

/// Lower bound certified by an exact weighting, and a sound upper bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapBracket {
    #[serde(with = "crate::rational::serde_text")]
    pub lower: Rational,
    pub weighting: Weighting,
    #[serde(with = "crate::rational::serde_text")]
    pub upper: Rational,
    pub upper_source: UpperSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperSource {
    /// Largest eigenvalue of the distance form on sum-zero vectors (floating
    /// point, inflated by a residual bound).
    Spectral,
    /// A quarter of the diameter (exact).
    Diameter,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            starts: 32,
            iters: 400,
            seed: 0,
        }
    }
}

pub fn gap_bracket(m: &FiniteMetric, starts: usize, iters: usize, seed: u64) -> Result<GapBracket> {
    gap_bracket_seeded(m, &SearchConfig { starts, iters, seed }, &[])
}

/// Brackets the negative type gap `sup gamma(w)` over `sum w = 0`,
/// `sum |w| = 1`. `seeds` are extra weightings evaluated exactly and used as
/// additional ascent starts.
pub fn gap_bracket_seeded(m: &FiniteMetric, cfg: &SearchConfig, seeds: &[Weighting]) -> Result<GapBracket> {
    let n = m.len();
    if n < 2 {
        return Err(Error::InvalidParameter("gap needs at least two points".into()));
    }
    m.validate()?;
    let df: Vec<Vec<f64>> = m
        .dist
        .iter()
        .map(|r| r.iter().map(rational::to_f64).collect())
        .collect();

    let mut best: Option<(Rational, Vec<Rational>)> = None;
    let mut offer = |w: &Weighting| -> Result<()> {
        if !w.sum().is_zero() || !w.abs_sum().is_one() {
            return Ok(());
        }
        let value = gamma(m, w)?;
        let dense = w.to_dense(n);
        let better = match &best {
            None => true,
            Some((bv, bw)) => value > *bv || (value == *bv && dense < *bw),
        };
        if better {
            best = Some((value, dense));
        }
        Ok(())
    };

    let half = rational::frac(1, 2);
    for j in 0..n {
        for k in 0..n {
            if j != k {
                offer(&Weighting::from_pairs([(j, half.clone()), (k, -half.clone())]))?;
            }
        }
    }
    let mut starts: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for s in seeds {
        if s.max_index().is_some_and(|i| i >= n) {
            return Err(Error::InvalidParameter("seed weighting outside metric".into()));
        }
        if let Some(norm) = s.normalized() {
            offer(&norm)?;
            let dense: Vec<f64> = norm.to_dense(n).iter().map(rational::to_f64).collect();
            starts.push((
                dense.iter().map(|x| 2.0 * x.max(0.0)).collect(),
                dense.iter().map(|x| 2.0 * (-x).max(0.0)).collect(),
            ));
        }
    }
    for s in 0..cfg.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.seed ^ (s as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        starts.push((random_simplex(&mut rng, n), random_simplex(&mut rng, n)));
    }
    for (alpha, beta) in starts {
        let omega = ascend(&df, alpha, beta, cfg.iters);
        if let Some(w) = rationalize(&omega) {
            offer(&w)?;
        }
    }
    let (lower, dense) = best.expect("polytope vertices always offered");
    let weighting = Weighting::from_dense(&dense);

    let diameter_bound = m.diameter() / rational::int(4);
    let (upper, upper_source) = match spectral_upper(&df) {
        Some(spec) if spec < diameter_bound => (spec, UpperSource::Spectral),
        _ => (diameter_bound, UpperSource::Diameter),
    };
    if lower > upper {
        return Err(Error::Internal("gap bracket lower end exceeds upper end".into()));
    }
    Ok(GapBracket {
        lower,
        weighting,
        upper,
        upper_source,
    })
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (i as f64 + 1.0);
        if x - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Projected gradient ascent of `gamma((a - b) / 2)` over pairs of
/// probability vectors. Returns the final `w = (a - b) / 2`.
fn ascend(d: &[Vec<f64>], mut a: Vec<f64>, mut b: Vec<f64>, iters: usize) -> Vec<f64> {
    let n = d.len();
    let norm = d
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-300);
    let step = 2.0 / norm;
    for _ in 0..iters {
        let w: Vec<f64> = (0..n).map(|i| (a[i] - b[i]) / 2.0).collect();
        let grad: Vec<f64> = (0..n)
            .map(|i| d[i].iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() / 2.0)
            .collect();
        for i in 0..n {
            a[i] += step * grad[i];
            b[i] -= step * grad[i];
        }
        project_simplex(&mut a);
        project_simplex(&mut b);
    }
    (0..n).map(|i| (a[i] - b[i]) / 2.0).collect()
}

/// Rounds to a 2^-24 grid, then rescales the positive and negative parts
/// to exactly `1/2` each.
fn rationalize(w: &[f64]) -> Option<Weighting> {
    let grid: Vec<Rational> = w
        .iter()
        .map(|&x| rational::round_to_denominator(x, 1 << 24))
        .collect();
    let pos: Rational = grid.iter().filter(|x| x.is_positive()).cloned().sum();
    let neg: Rational = grid.iter().filter(|x| x.is_negative()).map(|x| -x).sum();
    if pos.is_zero() || neg.is_zero() {
        return None;
    }
    let half = rational::frac(1, 2);
    let scaled = grid.iter().map(|x| {
        if x.is_positive() {
            x * &half / &pos
        } else {
            x * &half / &neg
        }
    });
    Some(Weighting::from_pairs(scaled.enumerate()))
}

/// Orthonormal basis of the sum-zero subspace (Helmert vectors), as columns.
fn helmert(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n - 1);
    for k in 1..n {
        let s = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = 1.0 / s;
        }
        q[(k, k - 1)] = -(k as f64) / s;
    }
    q
}

/// Upper bound on the largest eigenvalue of a symmetric matrix from a
/// floating-point decomposition plus residual and orthogonality slack.
fn certified_max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let lam = DMatrix::from_diagonal(&eig.eigenvalues);
    let residual = (m * v - v * &lam).norm();
    let ortho = (v.transpose() * v - DMatrix::identity(n, n)).norm();
    let mnorm = m.norm();
    let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let slack = residual + 2.0 * ortho * mnorm + 64.0 * (n as f64 + 1.0) * f64::EPSILON * (mnorm + 1.0);
    top + slack * 1.01
}

fn spectral_upper(d: &[Vec<f64>]) -> Option<Rational> {
    let n = d.len();
    let dm = DMatrix::from_fn(n, n, |i, j| d[i][j]);
    let q = helmert(n);
    let restricted = q.transpose() * &dm * &q;
    let sym = (&restricted + restricted.transpose()) * 0.5;
    let lambda = certified_max_eigenvalue(&sym);
    // gamma = w^T D w / 2 with 1/n <= |w|^2 <= 1/2 on the feasible set.
    let bound = if lambda >= 0.0 {
        lambda / 4.0
    } else {
        lambda / (2.0 * n as f64)
    };
    let padded = bound + bound.abs() * 1e-12 + 1e-300;
    rational::from_f64(padded)
}

/// Coordinates whose Euclidean distances are the square roots of `m`'s.
pub fn sqrt_embedding(m: &FiniteMetric) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    if !is_negative_type(m)?.holds() {
        return Err(Error::NotNegativeType);
    }
    if n == 1 {
        return Ok(vec![Vec::new()]);
    }
    let (others, gram) = gram_matrix(m, n - 1);
    let k = others.len();
    let g = DMatrix::from_fn(k, k, |i, j| rational::to_f64(&gram[i][j]));
    let eig = SymmetricEigen::new(g);
    let mut coords = vec![vec![0.0; k]; n];
    for (row, coord) in coords.iter_mut().enumerate().take(k) {
        for c in 0..k {
            coord[c] = eig.eigenvectors[(row, c)] * eig.eigenvalues[c].max(0.0).sqrt();
        }
    }
    Ok(coords)
}

/// Eigenvalues of the distance matrix above `1e-9` times the spectral radius.
pub fn positive_eigenvalue_count(m: &FiniteMetric) -> usize {
    let n = m.len();
    if n == 0 {
        return 0;
    }
    let dm = DMatrix::from_fn(n, n, |i, j| rational::to_f64(m.d(i, j)));
    let eig = SymmetricEigen::new(dm);
    let radius = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tau = 1e-9 * radius;
    eig.eigenvalues.iter().filter(|&&x| x > tau).count()
}

/// Outcome of checking the implications l1 => negative type => one positive eigenvalue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub points: usize,
    /// `None` when the cut LP was skipped for size.
    pub l1_embeddable: Option<bool>,
    pub negative_type: bool,
    pub positive_eigenvalues: Option<usize>,
    pub violations: Vec<String>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_chain(m: &FiniteMetric) -> Result<ChainReport> {
    check_chain_with_bound(m, crate::l1cut::DEFAULT_MAX_POINTS)
}

pub fn check_chain_with_bound(m: &FiniteMetric, max_l1_points: usize) -> Result<ChainReport> {
    let l1_embeddable = if m.len() <= max_l1_points {
        Some(crate::l1cut::is_l1_embeddable_with_bound(m, max_l1_points)?.is_embeddable())
    } else {
        None
    };
    check_chain_with_l1(m, l1_embeddable)
}

/// Chain check reusing an l1 verdict computed elsewhere.
pub fn check_chain_with_l1(m: &FiniteMetric, l1_embeddable: Option<bool>) -> Result<ChainReport> {
    let n = m.len();
    let negative_type = if n == 0 { true } else { is_negative_type(m)?.holds() };
    let all_zero = m.dist.iter().flatten().all(|d| d.is_zero());
    let positive_eigenvalues = (n >= 2).then(|| positive_eigenvalue_count(m));
    let mut violations = Vec::new();
    if l1_embeddable == Some(true) && !negative_type {
        violations.push("l1-embeddable but not of negative type".to_string());
    }
    if negative_type && !all_zero {
        if let Some(c) = positive_eigenvalues {
            if c != 1 {
                violations.push(format!(
                    "negative type but distance matrix has {c} positive eigenvalues"
                ));
            }
        }
    }
    Ok(ChainReport {
        points: n,
        l1_embeddable,
        negative_type,
        positive_eigenvalues,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_named, make_theta, FamilySpec};
    use crate::graph::distance_matrix;
    use crate::rational::{frac, int};
    use crate::witness::{construct_witness, omega_from_witness};

    fn two_point(d: i64) -> FiniteMetric {
        FiniteMetric::from_matrix(vec![vec![int(0), int(d)], vec![int(d), int(0)]]).unwrap()
    }

    fn vertex_metric(spec: FamilySpec) -> FiniteMetric {
        let g = make_named(&spec).unwrap();
        distance_matrix(&g, &g.vertex_points()).unwrap()
    }

    fn witness_metric() -> (FiniteMetric, Weighting) {
        let w = construct_witness(&make_theta(&int(1), &int(1), &int(1)).unwrap()).unwrap();
        omega_from_witness(&w)
    }

    #[test]
    fn gamma_examples() {
        let m = two_point(1);
        assert_eq!(gamma(&m, &Weighting::from_pairs([(0, int(3))])).unwrap(), int(0));
        let w = Weighting::from_dense(&[frac(1, 2), frac(-1, 2)]);
        assert_eq!(gamma(&m, &w).unwrap(), frac(-1, 4));
        let (wm, omega) = witness_metric();
        assert_eq!(gamma(&wm, &omega).unwrap(), frac(1, 432));
        assert!(gamma(&m, &Weighting::from_pairs([(5, int(1))])).is_err());
    }

    #[test]
    fn small_metrics_are_negative_type() {
        let one = FiniteMetric::from_matrix(vec![vec![int(0)]]).unwrap();
        assert!(is_negative_type(&one).unwrap().holds());
        assert!(is_negative_type(&two_point(7)).unwrap().holds());
        let c4 = vertex_metric(FamilySpec::Cycle { n: 4 });
        let verdict = is_negative_type(&c4).unwrap();
        match &verdict {
            NegTypeVerdict::NegativeType { basepoint, elimination } => {
                assert!(verify_elimination(&c4, *basepoint, elimination));
            }
            other => panic!("expected negative type, got {other:?}"),
        }
    }

    #[test]
    fn witness_metric_is_refuted() {
        let (m, _) = witness_metric();
        match is_negative_type(&m).unwrap() {
            NegTypeVerdict::NotNegativeType { weighting, gamma: g, .. } => {
                assert!(g.is_positive());
                assert_eq!(weighting.sum(), &int(0));
                assert_eq!(weighting.abs_sum(), &int(1));
                assert_eq!(gamma(&m, &weighting).unwrap(), g);
            }
            other => panic!("expected refutation, got {other:?}"),
        }
    }

    #[test]
    fn zero_diagonal_pivot_is_refuted() {
        // K_{1,3} plus ... : the star with three leaves at distance 2 apart
        // is l1; a 2x2 Gram block [[0, b], [b, 0]] needs coincident-at-base points.
        let m = FiniteMetric::from_matrix(vec![
            vec![int(0), int(1), int(1), int(1), int(1)],
            vec![int(1), int(0), int(2), int(2), int(2)],
            vec![int(1), int(2), int(0), int(2), int(2)],
            vec![int(1), int(2), int(2), int(0), int(2)],
            vec![int(1), int(2), int(2), int(2), int(0)],
        ])
        .unwrap();
        assert!(is_negative_type(&m).unwrap().holds());
        // K_{2,3} vertex metric is not of negative type.
        let k23 = vertex_metric(FamilySpec::CompleteBipartite { a: 2, b: 3 });
        let v = is_negative_type(&k23).unwrap();
        assert!(!v.holds());
    }

    #[test]
    fn basepoint_invariance() {
        for spec in [
            FamilySpec::CompleteBipartite { a: 2, b: 3 },
            FamilySpec::Cycle { n: 5 },
            FamilySpec::Complete { n: 4 },
        ] {
            let m = vertex_metric(spec);
            let verdicts: Vec<bool> = (0..m.len())
                .map(|b| is_negative_type_at(&m, b).unwrap().holds())
                .collect();
            assert!(verdicts.iter().all(|&v| v == verdicts[0]));
        }
    }

    #[test]
    fn bracket_two_points() {
        let b = gap_bracket(&two_point(1), 8, 100, 1).unwrap();
        assert_eq!(b.lower, frac(-1, 4));
        assert!(b.upper >= frac(-1, 4));
        assert!(b.upper < frac(-1, 5));
    }

    #[test]
    fn bracket_with_witness_seed() {
        let (m, omega) = witness_metric();
        let b = gap_bracket_seeded(&m, &SearchConfig::default(), &[omega]).unwrap();
        assert!(b.lower >= frac(1, 432));
        assert_eq!(gamma(&m, &b.weighting).unwrap(), b.lower);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn bracket_rejects_single_point() {
        let one = FiniteMetric::from_matrix(vec![vec![int(0)]]).unwrap();
        assert!(gap_bracket(&one, 1, 1, 0).is_err());
    }

    #[test]
    fn embedding_examples() {
        let c = sqrt_embedding(&two_point(4)).unwrap();
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        assert!((dist(&c[0], &c[1]) - 2.0).abs() < 1e-9);
        let k3 = vertex_metric(FamilySpec::Complete { n: 3 });
        let c = sqrt_embedding(&k3).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!((dist(&c[i], &c[j]) - 1.0).abs() < 1e-9);
            }
        }
        let (w, _) = witness_metric();
        assert_eq!(sqrt_embedding(&w), Err(Error::NotNegativeType));
    }

    #[test]
    fn eigenvalue_counts() {
        assert_eq!(positive_eigenvalue_count(&two_point(1)), 1);
        assert_eq!(positive_eigenvalue_count(&vertex_metric(FamilySpec::Complete { n: 3 })), 1);
        assert_eq!(positive_eigenvalue_count(&vertex_metric(FamilySpec::Complete { n: 4 })), 1);
    }

    #[test]
    fn chain_examples() {
        let one = FiniteMetric::from_matrix(vec![vec![int(0)]]).unwrap();
        assert!(check_chain(&one).unwrap().passed());
        let (w, _) = witness_metric();
        let r = check_chain(&w).unwrap();
        assert!(!r.negative_type);
        assert_eq!(r.l1_embeddable, Some(false));
        assert!(r.passed());
    }
}
