//! Exact l1-embeddability of finite metrics through cut-cone membership.
//!
//! The LP `{lambda >= 0 : sum_S lambda_S d_S = d}` has one row per unordered
//! pair and one column per canonical cut. It is solved by a revised Phase I
//! simplex over exact integers (fraction-free basis inverse). The entering
//! column has the largest normalised reduced cost, falling back to the least
//! index when only near-zero candidates remain; ratio ties are broken
//! lexicographically. Pricing runs through a floating-point filter whose
//! error bound is checked before any column is skipped, so the decision
//! itself is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::make_named;
use crate::families::FamilySpec;
use crate::graph::{distance_matrix, subdivide, FiniteMetric, MetricGraph, Point};
use crate::rational::{self, Rational};

/// Largest metric accepted by [`is_l1_embeddable`].
pub const DEFAULT_MAX_POINTS: usize = 14;

/// One side of a bipartition of `0..n`, stored in the form containing `0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cut {
    pub n: usize,
    pub members: Vec<usize>,
}

impl Cut {
    /// Validates canonical form: sorted, distinct, in range, contains `0`,
    /// and misses at least one point.
    pub fn new(n: usize, members: Vec<usize>) -> Result<Self> {
        let ok = members.first() == Some(&0)
            && members.windows(2).all(|w| w[0] < w[1])
            && members.last().is_some_and(|&x| x < n)
            && members.len() < n;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "non-canonical cut {members:?} over {n} points"
            )));
        }
        Ok(Cut { n, members })
    }

    /// Canonical representative of the bipartition `{s, complement}`.
    pub fn canonical(n: usize, s: &[usize]) -> Result<Self> {
        let mut inside = vec![false; n];
        for &x in s {
            if x >= n {
                return Err(Error::InvalidParameter(format!("cut member {x} out of range")));
            }
            inside[x] = true;
        }
        let flip = !inside.first().copied().unwrap_or(false);
        let members: Vec<usize> = (0..n).filter(|&i| inside[i] != flip).collect();
        Self::new(n, members)
    }

    /// Cut `{0} ∪ {i + 1 : bit i of mask}`.
    fn from_mask(n: usize, mask: u64) -> Self {
        let mut members = vec![0];
        members.extend((1..n).filter(|i| mask >> (i - 1) & 1 == 1));
        Cut { n, members }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn separates(&self, i: usize, j: usize) -> bool {
        self.contains(i) != self.contains(j)
    }
}

/// The 0/1 semimetric of a cut.
pub fn cut_metric(n: usize, s: &Cut) -> Result<Vec<Vec<Rational>>> {
    let s = Cut::new(n, s.members.clone())?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if s.separates(i, j) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedCut {
    pub cut: Vec<usize>,
    #[serde(with = "crate::rational::serde_text")]
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutDecomposition {
    pub points: usize,
    pub cuts: Vec<WeightedCut>,
}

impl CutDecomposition {
    /// Builds and checks `sum weight * d_S = m` exactly.
    pub fn new(m: &FiniteMetric, cuts: Vec<(Cut, Rational)>) -> Result<Self> {
        let dec = CutDecomposition {
            points: m.len(),
            cuts: cuts
                .into_iter()
                .map(|(c, w)| WeightedCut {
                    cut: c.members,
                    weight: w,
                })
                .collect(),
        };
        dec.check(m)?;
        Ok(dec)
    }

    pub fn check(&self, m: &FiniteMetric) -> Result<()> {
        let n = m.len();
        if self.points != n {
            return Err(Error::Precondition("decomposition size mismatch".into()));
        }
        let total = self.sum_matrix()?;
        for (i, row) in total.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v != m.d(i, j) {
                    return Err(Error::Internal(format!(
                        "cut sum {} differs from distance {} at ({i},{j})",
                        rational::format(v),
                        rational::format(m.d(i, j))
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn verify(&self, m: &FiniteMetric) -> bool {
        self.check(m).is_ok()
    }

    /// `sum weight * d_S` as a matrix. Rejects nonpositive weights.
    pub fn sum_matrix(&self) -> Result<Vec<Vec<Rational>>> {
        let n = self.points;
        let mut total = vec![vec![Rational::zero(); n]; n];
        for wc in &self.cuts {
            if !wc.weight.is_positive() {
                return Err(Error::Precondition("cut weights must be positive".into()));
            }
            let c = Cut::new(n, wc.cut.clone())?;
            for i in 0..n {
                for j in 0..n {
                    if c.separates(i, j) {
                        total[i][j] += &wc.weight;
                    }
                }
            }
        }
        Ok(total)
    }
}

/// Pair weights `f` (indexed by [`pair_index`]) with `<f, d_S> <= 0` for every
/// cut and `<f, d> > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub points: usize,
    #[serde(with = "crate::rational::serde_text_vec")]
    pub pair_weights: Vec<Rational>,
    #[serde(with = "crate::rational::serde_text")]
    pub value: Rational,
}

impl FarkasCertificate {
    pub fn verify(&self, m: &FiniteMetric) -> bool {
        let n = m.len();
        if self.points != n || self.pair_weights.len() != n * n.saturating_sub(1) / 2 || n > 62 {
            return false;
        }
        let mut value = Rational::zero();
        for (i, j) in pairs(n) {
            value += &self.pair_weights[pair_index(n, i, j)] * m.d(i, j);
        }
        if value != self.value || !value.is_positive() {
            return false;
        }
        let pricer = Pricer::new(n, &self.pair_weights);
        !pricer.any_positive(cut_count(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum L1Verdict {
    Embeddable { decomposition: CutDecomposition },
    NotEmbeddable { certificate: FarkasCertificate },
}

impl L1Verdict {
    pub fn is_embeddable(&self) -> bool {
        matches!(self, L1Verdict::Embeddable { .. })
    }

    pub fn verify(&self, m: &FiniteMetric) -> bool {
        match self {
            L1Verdict::Embeddable { decomposition } => decomposition.verify(m),
            L1Verdict::NotEmbeddable { certificate } => certificate.verify(m),
        }
    }
}

/// Index of the unordered pair `{i, j}` (`i != j`) in row-major upper order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

fn cut_count(n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        (1u64 << (n - 1)) - 1
    }
}

pub fn is_l1_embeddable(m: &FiniteMetric) -> Result<L1Verdict> {
    is_l1_embeddable_with_bound(m, DEFAULT_MAX_POINTS)
}

pub fn is_l1_embeddable_with_bound(m: &FiniteMetric, max_points: usize) -> Result<L1Verdict> {
    let n = m.len();
    if n > max_points || n > 30 {
        return Err(Error::SizeBound(format!(
            "{n} points exceeds the cut LP bound of {}",
            max_points.min(30)
        )));
    }
    m.validate()?;
    Simplex::new(m).solve()
}

/// Exact sign of `<y, A_mask>` with a float prefilter.
struct Pricer {
    n: usize,
    index: Vec<Vec<usize>>,
    scaled: Vec<BigInt>,
    approx: Vec<f64>,
    filter: bool,
    /// Pair values as a dense `i128` matrix when every entry is small
    /// enough for overflow-free sums.
    small: Option<Vec<Vec<i128>>>,
}

impl Pricer {
    fn new(n: usize, y: &[Rational]) -> Self {
        let lcm = y
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled: Vec<BigInt> = y
            .iter()
            .map(|v| v.numer() * (&lcm / v.denom()))
            .collect();
        Self::from_integers(n, scaled)
    }

    /// Pricing for `y` proportional (with a positive factor) to `scaled`.
    fn from_integers(n: usize, scaled: Vec<BigInt>) -> Self {
        let approx: Vec<f64> = scaled
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect();
        let filter = approx
            .iter()
            .all(|x| x.is_finite() && (*x == 0.0 || x.abs() > 1e-280));
        let index = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0 } else { pair_index(n, i, j) }).collect())
            .collect();
        let limit = BigInt::one() << 100;
        let small = scaled.iter().all(|v| v.abs() < limit).then(|| {
            let mut m = vec![vec![0i128; n]; n];
            for (i, j) in pairs(n) {
                let v = scaled[pair_index(n, i, j)].to_i128().unwrap();
                m[i][j] = v;
                m[j][i] = v;
            }
            m
        });
        Pricer {
            n,
            index,
            scaled,
            approx,
            filter,
            small,
        }
    }

    /// Visits every canonical cut in Gray-code order with the exact value
    /// `<y, d_S>` and `|S|`. Requires the small representation.
    fn walk(&self, y: &[Vec<i128>], mut visit: impl FnMut(u64, i128, usize)) {
        let n = self.n;
        if n < 2 {
            return;
        }
        let full = (1u64 << (n - 1)) - 1;
        let mut inside = vec![false; n];
        inside[0] = true;
        let mut size = 1;
        let mut s: i128 = (1..n).map(|k| y[0][k]).sum();
        let mut mask = 0u64;
        visit(mask, s, size);
        for step in 1..=full {
            let bit = step.trailing_zeros() as usize;
            let p = bit + 1;
            let mut across: i128 = 0;
            let mut within: i128 = 0;
            for k in 0..n {
                if k == p {
                    continue;
                }
                if inside[k] {
                    within += y[p][k];
                } else {
                    across += y[p][k];
                }
            }
            if inside[p] {
                s += within - across;
                size -= 1;
            } else {
                s += across - within;
                size += 1;
            }
            inside[p] = !inside[p];
            mask ^= 1 << bit;
            if mask != full {
                visit(mask, s, size);
            }
        }
    }

    /// Whether some cut has `<y, d_S> > 0`.
    fn any_positive(&self, cuts: u64) -> bool {
        if let Some(y) = &self.small {
            let mut found = false;
            self.walk(y, |_, s, _| found |= s > 0);
            return found;
        }
        (0..cuts).any(|mask| self.positive(mask))
    }

    fn inside(&self, mask: u64) -> [bool; 64] {
        let mut inside = [false; 64];
        inside[0] = true;
        for (i, slot) in inside.iter_mut().enumerate().take(self.n).skip(1) {
            *slot = mask >> (i - 1) & 1 == 1;
        }
        inside
    }

    /// Float estimate of `<y, d_S>` and the sum of absolute terms.
    fn approx(&self, mask: u64) -> (f64, f64, usize) {
        let inside = self.inside(mask);
        let (mut s, mut a, mut k) = (0.0, 0.0, 0);
        for i in (0..self.n).filter(|&i| inside[i]) {
            for j in (0..self.n).filter(|&j| !inside[j]) {
                let v = self.approx[self.index[i][j]];
                s += v;
                a += v.abs();
                k += 1;
            }
        }
        (s, a, k)
    }

    fn exact_positive(&self, mask: u64) -> bool {
        let inside = self.inside(mask);
        let mut s = BigInt::zero();
        for i in (0..self.n).filter(|&i| inside[i]) {
            for j in (0..self.n).filter(|&j| !inside[j]) {
                s += &self.scaled[self.index[i][j]];
            }
        }
        s.is_positive()
    }

    /// Sign decided by the float estimate when it clears the rounding
    /// bound, `None` when an exact evaluation is needed.
    fn certain(&self, s: f64, a: f64) -> Option<bool> {
        if !self.filter {
            return None;
        }
        if a == 0.0 {
            return Some(false);
        }
        let tol = 1e-9 * a;
        if s > tol {
            Some(true)
        } else if s < -tol {
            Some(false)
        } else {
            None
        }
    }

    /// Whether `<y, d_S> > 0` for the cut encoded by `mask`.
    fn positive(&self, mask: u64) -> bool {
        let (s, a, _) = self.approx(mask);
        self.certain(s, a).unwrap_or_else(|| self.exact_positive(mask))
    }

    /// Column with the largest normalised estimate among those certainly
    /// improving; otherwise the least-index exactly improving column.
    fn entering(&self, cuts: u64) -> Option<u64> {
        if let Some(y) = &self.small {
            let n = self.n;
            let mut best: Option<(f64, u64)> = None;
            self.walk(y, |mask, s, size| {
                if s > 0 {
                    let score = s as f64 / ((size * (n - size)) as f64).sqrt();
                    if best.is_none_or(|(b, m)| score > b || (score == b && mask < m)) {
                        best = Some((score, mask));
                    }
                }
            });
            return best.map(|(_, mask)| mask);
        }
        let mut best: Option<(f64, u64)> = None;
        let mut unsure = Vec::new();
        for mask in 0..cuts {
            let (s, a, k) = self.approx(mask);
            match self.certain(s, a) {
                Some(true) => {
                    let score = s / (k as f64).sqrt();
                    if best.is_none_or(|(b, _)| score > b) {
                        best = Some((score, mask));
                    }
                }
                Some(false) => {}
                None => unsure.push(mask),
            }
        }
        if let Some((_, mask)) = best {
            return Some(mask);
        }
        unsure.into_iter().find(|&mask| self.exact_positive(mask))
    }
}

/// Phase I of the revised simplex. Variable ids: `0..rows` are
/// artificials, `rows + mask` is the cut `mask`. The basis inverse is kept
/// fraction-free as `inv / det` with integer `inv`, and the basic values as
/// `x / det` for the right-hand side scaled by `scale`.
struct Simplex<'a> {
    metric: &'a FiniteMetric,
    n: usize,
    rows: usize,
    basis: Vec<usize>,
    inv: Vec<Vec<BigInt>>,
    x: Vec<BigInt>,
    det: BigInt,
    scale: BigInt,
}

impl<'a> Simplex<'a> {
    fn new(metric: &'a FiniteMetric) -> Self {
        let n = metric.len();
        let rows = n * n.saturating_sub(1) / 2;
        let mut inv = vec![vec![BigInt::zero(); rows]; rows];
        for (r, row) in inv.iter_mut().enumerate() {
            row[r] = BigInt::one();
        }
        let rhs: Vec<&Rational> = pairs(n).map(|(i, j)| metric.d(i, j)).collect();
        let scale = rhs.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let x = rhs
            .iter()
            .map(|v| v.numer() * (&scale / v.denom()))
            .collect();
        Simplex {
            metric,
            n,
            rows,
            basis: (0..rows).collect(),
            inv,
            x,
            det: BigInt::one(),
            scale,
        }
    }

    fn column(&self, mask: u64) -> Vec<usize> {
        let c = Cut::from_mask(self.n, mask);
        pairs(self.n)
            .filter(|&(i, j)| c.separates(i, j))
            .map(|(i, j)| pair_index(self.n, i, j))
            .collect()
    }

    /// Phase I duals times `det`.
    fn duals(&self) -> Vec<BigInt> {
        let mut y = vec![BigInt::zero(); self.rows];
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.rows {
                for (k, v) in self.inv[r].iter().enumerate() {
                    if !v.is_zero() {
                        y[k] += v;
                    }
                }
            }
        }
        y
    }

    fn solve(mut self) -> Result<L1Verdict> {
        let cuts = cut_count(self.n);
        loop {
            let infeasible = self
                .basis
                .iter()
                .zip(&self.x)
                .any(|(&v, x)| v < self.rows && !x.is_zero());
            if !infeasible {
                return self.decomposition();
            }
            let y = self.duals();
            let pricer = Pricer::from_integers(self.n, y.clone());
            let ent = pricer.entering(cuts);
            let Some(mask) = ent else {
                return self.certificate(y);
            };
            let col = self.column(mask);
            let w: Vec<BigInt> = self
                .inv
                .iter()
                .map(|row| col.iter().map(|&k| &row[k]).sum())
                .collect();
            let mut leave: Option<usize> = None;
            for r in 0..self.rows {
                if !w[r].is_positive() {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(q) => {
                        let lhs = &self.x[r] * &w[q];
                        let rhs = &self.x[q] * &w[r];
                        lhs < rhs || (lhs == rhs && self.lex_less(r, q, &w))
                    }
                };
                if better {
                    leave = Some(r);
                }
            }
            let pr = leave.ok_or_else(|| Error::Internal("unbounded phase I".into()))?;
            self.pivot(pr, &w, self.rows + mask as usize)?;
        }
    }

    /// Lexicographic comparison of rows `r` and `q` of the inverse divided
    /// by their pivot-column entries; breaks ratio ties without cycling.
    fn lex_less(&self, r: usize, q: usize, w: &[BigInt]) -> bool {
        for k in 0..self.rows {
            let a = &self.inv[r][k] * &w[q];
            let b = &self.inv[q][k] * &w[r];
            if a != b {
                return a < b;
            }
        }
        false
    }

    fn pivot(&mut self, pr: usize, w: &[BigInt], var: usize) -> Result<()> {
        let p = w[pr].clone();
        let prow = self.inv[pr].clone();
        let px = self.x[pr].clone();
        let exact = |num: BigInt, det: &BigInt| -> Result<BigInt> {
            let (q, rem) = num.div_rem(det);
            if rem.is_zero() {
                Ok(q)
            } else {
                Err(Error::Internal("inexact fraction-free pivot".into()))
            }
        };
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let wr = &w[r];
            for (k, pv) in prow.iter().enumerate() {
                let cur = &self.inv[r][k];
                if cur.is_zero() && (wr.is_zero() || pv.is_zero()) {
                    continue;
                }
                let num = cur * &p - wr * pv;
                self.inv[r][k] = exact(num, &self.det)?;
            }
            let num = &self.x[r] * &p - wr * &px;
            self.x[r] = exact(num, &self.det)?;
        }
        self.det = p;
        self.basis[pr] = var;
        Ok(())
    }

    fn certificate(&self, y: Vec<BigInt>) -> Result<L1Verdict> {
        let pair_weights: Vec<Rational> = y
            .into_iter()
            .map(|v| Rational::new(v, self.det.clone()))
            .collect();
        let value = pairs(self.n)
            .map(|(i, j)| &pair_weights[pair_index(self.n, i, j)] * self.metric.d(i, j))
            .sum();
        let certificate = FarkasCertificate {
            points: self.n,
            pair_weights,
            value,
        };
        if !certificate.verify(self.metric) {
            return Err(Error::Internal("Farkas certificate failed verification".into()));
        }
        Ok(L1Verdict::NotEmbeddable { certificate })
    }

    fn decomposition(&self) -> Result<L1Verdict> {
        let denom = &self.det * &self.scale;
        let mut cuts: Vec<(Cut, Rational)> = self
            .basis
            .iter()
            .zip(&self.x)
            .filter(|(&v, x)| v >= self.rows && x.is_positive())
            .map(|(&v, x)| {
                (
                    Cut::from_mask(self.n, (v - self.rows) as u64),
                    Rational::new(x.clone(), denom.clone()),
                )
            })
            .collect();
        cuts.sort();
        let decomposition = CutDecomposition::new(self.metric, cuts)?;
        Ok(L1Verdict::Embeddable { decomposition })
    }
}

/// Coordinates with one dimension per cut: point `x` gets the cut's weight
/// in that dimension if it lies in the cut, else `0`.
pub fn l1_coordinates(dec: &CutDecomposition) -> Vec<Vec<Rational>> {
    (0..dec.points)
        .map(|x| {
            dec.cuts
                .iter()
                .map(|wc| {
                    if wc.cut.binary_search(&x).is_ok() {
                        wc.weight.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn l1_distance(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// The 2-subdivision of unit K4 together with its twelve-cut decomposition
/// `d = sum_{i != j} d_{S_ij} / 2`, where `S_ij` holds `x_i` and the
/// subdivision vertices within distance 2 of `x_i` that are not adjacent to
/// `x_j`.
pub fn k4_explicit_decomposition() -> Result<(MetricGraph, CutDecomposition)> {
    let k4 = make_named(&FamilySpec::Complete { n: 4 })?;
    let g = subdivide(&k4, 2)?;
    let points: Vec<Point> = g.vertex_points();
    let m = distance_matrix(&g, &points)?;
    let branch: Vec<usize> = (0..4)
        .map(|i| m.index_of(&Point::vertex(format!("v{i}"))).unwrap())
        .collect();
    let n = m.len();
    let two = rational::int(2);
    let one = Rational::one();
    let mut cuts = Vec::with_capacity(12);
    let mut total = vec![vec![Rational::zero(); n]; n];
    for &xi in &branch {
        for &xj in &branch {
            if xi == xj {
                continue;
            }
            let s: Vec<usize> = (0..n)
                .filter(|&w| {
                    w == xi
                        || (!branch.contains(&w) && *m.d(xi, w) <= two && *m.d(w, xj) != one)
                })
                .collect();
            if s.len() != 6 {
                return Err(Error::Internal(format!("S has {} vertices, expected 6", s.len())));
            }
            let cut = Cut::canonical(n, &s)?;
            for a in 0..n {
                for b in 0..n {
                    if cut.separates(a, b) {
                        total[a][b] += &one;
                    }
                }
            }
            cuts.push((cut, rational::frac(1, 2)));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if total[a][b] != m.d(a, b) * &two {
                return Err(Error::Internal(format!("cut sum fails at ({a},{b})")));
            }
        }
    }
    let dec = CutDecomposition::new(&m, cuts)?;
    Ok((g, dec))
}
