//! Affine iterated function systems on an interval: attractors, branch
//! points, the ψ isometry between weighted and uniform inner products,
//! word fixed points and Hutchinson convergence.

use std::fmt::{Debug, Write as _};

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::markov::{AffineMap, MapSpec, MarkovModel, ModelView, SpaceSpec};

/// Two map values closer than this are treated as equal.
pub const MAP_TOLERANCE: f64 = 1e-9;
/// Attractor points closer than this are merged.
pub const DEDUP_TOLERANCE: f64 = 1e-7;
/// Largest attractor sample produced before generation stops refining.
pub const MAX_SAMPLE_POINTS: usize = 1 << 22;

fn c<F: Float>(x: f64) -> F {
    F::from(x).expect("float conversion")
}

fn eval<F: Float>(m: &AffineMap<F>, x: F) -> F {
    m.slope * x + m.intercept
}

/// `N ≥ 2` affine contractions of `[lower, upper]` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem<F> {
    maps: Vec<AffineMap<F>>,
    weights: Vec<F>,
    lower: F,
    upper: F,
}

impl<F: Float + Debug> IfsSystem<F> {
    /// `weights = None` gives uniform weights.
    pub fn new(maps: Vec<AffineMap<F>>, weights: Option<Vec<F>>, lower: F, upper: F) -> Result<Self> {
        let n = maps.len();
        if n < 2 {
            return Err(Error::Validation(format!("an IFS needs at least 2 maps, got {n}")));
        }
        if !(lower < upper) {
            return Err(Error::Validation("interval needs lower < upper".into()));
        }
        let weights = weights.unwrap_or_else(|| vec![F::one() / c(n as f64); n]);
        if weights.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: weights.len(),
            });
        }
        let tol: F = c(MAP_TOLERANCE);
        if let Some(i) = weights.iter().position(|w| !(*w > F::zero())) {
            return Err(Error::Validation(format!("weight {i} is not strictly positive")));
        }
        let total = weights.iter().fold(F::zero(), |a, &w| a + w);
        if (total - F::one()).abs() > tol {
            return Err(Error::Validation(format!("weights sum to {total:?}, expected 1")));
        }
        for (i, m) in maps.iter().enumerate() {
            if !(m.slope.abs() < F::one()) {
                return Err(Error::Validation(format!("map {i} has |slope| ≥ 1 and is not a contraction")));
            }
            if m.slope.is_zero() {
                return Err(Error::Validation(format!("map {i} is constant, hence not injective")));
            }
            for x in [lower, upper] {
                let y = eval(m, x);
                if y < lower - tol || y > upper + tol {
                    return Err(Error::Validation(format!("map {i} does not send the interval into itself")));
                }
            }
        }
        Ok(IfsSystem {
            maps,
            weights,
            lower,
            upper,
        })
    }

    /// Affine map system on an interval grid.
    pub fn from_model(model: &MarkovModel<F>) -> Result<Self>
    where
        F: crate::scalar::Scalar,
    {
        let ModelView::MapSystem { space, maps, weights } = model.view() else {
            return Err(Error::Precondition(format!("{} model is not a map system", model.kind_name())));
        };
        let SpaceSpec::IntervalGrid { lower, upper, .. } = space else {
            return Err(Error::Precondition("IFS maps need an interval_grid space".into()));
        };
        let affine = maps
            .iter()
            .map(|m| match m {
                MapSpec::Affine(a) => Ok(a.clone()),
                MapSpec::Table(_) => Err(Error::Precondition("IFS maps must be affine".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        IfsSystem::new(affine, Some(weights.to_vec()), *lower, *upper)
    }

    pub fn maps(&self) -> &[AffineMap<F>] {
        &self.maps
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn interval(&self) -> (F, F) {
        (self.lower, self.upper)
    }

    pub fn diameter(&self) -> F {
        self.upper - self.lower
    }

    /// `max |slope|`.
    pub fn contraction_factor(&self) -> F {
        self.maps.iter().fold(F::zero(), |m, a| m.max(a.slope.abs()))
    }

    pub fn apply(&self, i: usize, x: F) -> F {
        eval(&self.maps[i], x)
    }

    /// The same maps with other weights.
    pub fn with_weights(&self, weights: Vec<F>) -> Result<Self> {
        IfsSystem::new(self.maps.clone(), Some(weights), self.lower, self.upper)
    }

    /// Image interval `f_i([lower, upper])`.
    pub fn image(&self, i: usize) -> (F, F) {
        let a = self.apply(i, self.lower);
        let b = self.apply(i, self.upper);
        (a.min(b), a.max(b))
    }

    /// Whether `∪ f_i([lower, upper])` covers the whole interval.
    pub fn covers_interval(&self) -> bool {
        let tol = c(MAP_TOLERANCE);
        let mut images: Vec<(F, F)> = (0..self.len()).map(|i| self.image(i)).collect();
        images.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let mut reach = self.lower;
        for (a, b) in images {
            if a > reach + tol {
                return false;
            }
            reach = reach.max(b);
        }
        reach >= self.upper - tol
    }

    /// Hutchinson map `F(A) = ∪ f_i(A)`, sorted and deduplicated.
    pub fn hutchinson(&self, points: &[F]) -> Vec<F> {
        let mut out: Vec<F> = Vec::with_capacity(points.len() * self.len());
        for m in &self.maps {
            out.extend(points.iter().map(|&x| eval(m, x)));
        }
        sort_dedup(out, c(DEDUP_TOLERANCE))
    }

    /// `F^depth({lower, upper})`.
    pub fn attractor(&self, depth: usize) -> AttractorSample<F> {
        let mut points = vec![self.lower, self.upper];
        let mut reached = 0;
        for _ in 0..depth {
            if points.len() * self.len() > MAX_SAMPLE_POINTS {
                break;
            }
            points = self.hutchinson(&points);
            reached += 1;
        }
        let tolerance = self.contraction_factor().powi(reached as i32) * self.diameter() + c(DEDUP_TOLERANCE);
        AttractorSample {
            points,
            depth: reached,
            tolerance,
        }
    }

    /// `d_H(sample, F(sample))`.
    pub fn invariance_residual(&self, sample: &AttractorSample<F>) -> F {
        hausdorff_distance(&sample.points, &self.hutchinson(&sample.points))
    }

    /// `e(x, y) = #{i : f_i(y) = x}`; a domain error when `(x, y)` lies on no cograph.
    pub fn branch_index(&self, x: F, y: F, tol: F) -> Result<usize> {
        let e = self.maps.iter().filter(|m| (eval(m, y) - x).abs() <= tol).count();
        if e == 0 {
            return Err(Error::Domain(format!("({x:?}, {y:?}) is not in the support")));
        }
        Ok(e)
    }

    /// Points `x = f_i(y) = f_j(y)` with `i ≠ j` over the grid of `y` values.
    pub fn branch_points(&self, grid: &[F], tol: F) -> Vec<F> {
        let mut out = Vec::new();
        for &y in grid {
            for i in 0..self.len() {
                for j in i + 1..self.len() {
                    let (a, b) = (self.apply(i, y), self.apply(j, y));
                    if (a - b).abs() <= tol {
                        out.push(a);
                    }
                }
            }
        }
        sort_dedup(out, c(DEDUP_TOLERANCE))
    }

    /// `y` values in the interval where two distinct maps agree.
    fn coincidences(&self) -> Vec<F> {
        let mut ys = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let (p, q) = (&self.maps[i], &self.maps[j]);
                if p.slope != q.slope {
                    let y = (q.intercept - p.intercept) / (p.slope - q.slope);
                    if y >= self.lower && y <= self.upper {
                        ys.push(y);
                    }
                }
            }
        }
        ys
    }

    /// Largest `|⟨ψξ, ψη⟩_p(y) − ⟨ξ, η⟩_u(y)|` over random piecewise-polynomial
    /// `ξ, η` and sampled `y`, where `⟨ξ, η⟩_p(y) = Σ p_i ξ(f_i y, y) η(f_i y, y)`,
    /// the uniform product uses `p_i = 1/N`, and
    /// `ψξ(x, y) = √e(x,y) / (√N · √(Σ_{i: f_i y = x} p_i)) · ξ(x, y)`.
    pub fn check_isometry(&self, weights: &[F], samples: usize, trials: usize, seed: u64) -> Result<F> {
        let weighted = self.with_weights(weights.to_vec())?;
        let n: F = c(self.len() as f64);
        let tol: F = c(MAP_TOLERANCE);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ys: Vec<F> = vec![self.lower, self.upper];
        ys.extend(self.coincidences());
        let span = self.diameter().to_f64().expect("finite");
        let lo = self.lower.to_f64().expect("finite");
        ys.extend((0..samples).map(|_| c::<F>(lo + span * rng.random::<f64>())));

        let mut worst = F::zero();
        for _ in 0..trials.max(1) {
            let xi = PiecewisePoly::random(&mut rng, self.lower, self.upper);
            let eta = PiecewisePoly::random(&mut rng, self.lower, self.upper);
            for &y in &ys {
                let xs: Vec<F> = (0..self.len()).map(|i| self.apply(i, y)).collect();
                let psi = |x: F| -> F {
                    let mass = xs
                        .iter()
                        .zip(&weighted.weights)
                        .filter(|(xj, _)| (**xj - x).abs() <= tol)
                        .fold(F::zero(), |a, (_, &p)| a + p);
                    let e = xs.iter().filter(|xj| (**xj - x).abs() <= tol).count();
                    c::<F>(e as f64).sqrt() / (n.sqrt() * mass.sqrt())
                };
                let mut lhs = F::zero();
                let mut rhs = F::zero();
                for (i, &x) in xs.iter().enumerate() {
                    let s = psi(x);
                    let (a, b) = (xi.eval(x, y), eta.eval(x, y));
                    lhs = lhs + weighted.weights[i] * (s * a) * (s * b);
                    rhs = rhs + a * b / n;
                }
                worst = worst.max((lhs - rhs).abs());
            }
        }
        Ok(worst)
    }

    /// Slope and intercept of `f_{w₁} ∘ … ∘ f_{w_k}`.
    pub fn compose_word(&self, word: &[usize]) -> Result<(F, F)> {
        if word.is_empty() {
            return Err(Error::Domain("empty word".into()));
        }
        let mut a = F::one();
        let mut b = F::zero();
        for &letter in word.iter().rev() {
            let m = self
                .maps
                .get(letter)
                .ok_or_else(|| Error::Domain(format!("letter {letter} out of range 0..{}", self.len())))?;
            a = m.slope * a;
            b = m.slope * b + m.intercept;
        }
        Ok((a, b))
    }

    /// The fixed point of `f_w`, solving `x = a·x + b`.
    pub fn word_fixed_point(&self, word: &[usize]) -> Result<F> {
        let (a, b) = self.compose_word(word)?;
        Ok(b / (F::one() - a))
    }

    /// The fixed point of `f_w` by Banach iteration from the interval midpoint.
    pub fn word_fixed_point_iterated(&self, word: &[usize]) -> Result<F> {
        let (a, b) = self.compose_word(word)?;
        let mut x = (self.lower + self.upper) / c(2.0);
        for _ in 0..10_000 {
            let next = a * x + b;
            let done = (next - x).abs() <= F::epsilon();
            x = next;
            if done {
                break;
            }
        }
        Ok(x)
    }

    /// `|f_w(x) − x|`.
    pub fn word_residual(&self, word: &[usize], x: F) -> Result<F> {
        let (a, b) = self.compose_word(word)?;
        Ok((a * x + b - x).abs())
    }

    /// Distinct fixed points of all words of length ≤ `maxlen`.
    pub fn condition_l_certificate(&self, maxlen: usize, grid: usize) -> Result<LCertificate<F>> {
        if maxlen == 0 {
            return Err(Error::Domain("maxlen must be at least 1".into()));
        }
        let n = self.len();
        let mut points: Vec<F> = Vec::new();
        let mut counts = Vec::with_capacity(maxlen);
        let mut bound: u64 = 0;
        let mut word = Vec::with_capacity(maxlen);
        for k in 1..=maxlen {
            bound += (n as u64).pow(k as u32);
            word.clear();
            word.resize(k, 0);
            loop {
                points.push(self.word_fixed_point(&word)?);
                // odometer increment
                let mut pos = k;
                while pos > 0 {
                    pos -= 1;
                    word[pos] += 1;
                    if word[pos] < n {
                        break;
                    }
                    word[pos] = 0;
                }
                if word.iter().all(|&l| l == 0) {
                    break;
                }
            }
            points = sort_dedup(std::mem::take(&mut points), c(DEDUP_TOLERANCE));
            counts.push(points.len());
        }
        let total = points.len();
        Ok(LCertificate {
            counts,
            bound,
            grid_points: grid,
            points,
            holds: (total as u64) <= bound,
        })
    }

    /// `d_H(F^n(K₀), attractor)` for `n = 1..=n_max`.
    pub fn hereditary_triviality_check(
        &self,
        k0: &[F],
        n_max: usize,
        attractor: &AttractorSample<F>,
    ) -> Result<HutchinsonTrace<F>> {
        if k0.is_empty() {
            return Err(Error::Domain("K0 must be nonempty".into()));
        }
        let tol: F = c(MAP_TOLERANCE);
        if k0.iter().any(|&x| x < self.lower - tol || x > self.upper + tol) {
            return Err(Error::Domain("K0 must lie in the interval".into()));
        }
        let mut set = sort_dedup(k0.to_vec(), c(DEDUP_TOLERANCE));
        let initial = hausdorff_distance(&set, &attractor.points);
        let cf = self.contraction_factor();
        let mut distances = Vec::with_capacity(n_max);
        let mut bounds = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            set = self.hutchinson(&set);
            distances.push(hausdorff_distance(&set, &attractor.points));
            bounds.push(cf.powi(n as i32) * initial + attractor.tolerance);
        }
        Ok(HutchinsonTrace {
            initial,
            distances,
            bounds,
            tolerance: attractor.tolerance,
        })
    }

    /// Overlap structure of the images `f_i([lower, upper])`.
    pub fn classify(&self, grid: usize) -> IfsClass {
        let tol: F = c(MAP_TOLERANCE);
        let step = self.diameter() / c((grid.max(2) - 1) as f64);
        let mut overlapping = false;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let (a0, a1) = self.image(i);
                let (b0, b1) = self.image(j);
                let lo = a0.max(b0);
                let hi = a1.min(b1);
                if lo > hi + tol {
                    continue;
                }
                overlapping = true;
                // sample the overlap on the grid plus its endpoints
                let mut xs = vec![lo, hi];
                let mut k = ((lo - self.lower) / step).ceil().to_usize().unwrap_or(0);
                loop {
                    let x = self.lower + step * c(k as f64);
                    if x > hi {
                        break;
                    }
                    xs.push(x);
                    k += 1;
                }
                let (p, q) = (&self.maps[i], &self.maps[j]);
                let branch = if p.slope == q.slope {
                    if (p.intercept - q.intercept).abs() <= tol {
                        None // identical maps: every overlap point is a branch point
                    } else {
                        return IfsClass::General;
                    }
                } else {
                    let y = (q.intercept - p.intercept) / (p.slope - q.slope);
                    if y < self.lower - tol || y > self.upper + tol {
                        return IfsClass::General;
                    }
                    Some(eval(p, y))
                };
                if let Some(x0) = branch {
                    if xs.iter().any(|&x| (x - x0).abs() > tol) {
                        return IfsClass::General;
                    }
                }
            }
        }
        if overlapping {
            IfsClass::BranchOverlapOnly
        } else {
            IfsClass::TotallyDisconnected
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfsClass {
    TotallyDisconnected,
    BranchOverlapOnly,
    General,
}

impl IfsClass {
    pub fn name(&self) -> &'static str {
        match self {
            IfsClass::TotallyDisconnected => "TotallyDisconnected",
            IfsClass::BranchOverlapOnly => "BranchOverlapOnly",
            IfsClass::General => "General",
        }
    }
}

/// Finite approximation of the attractor.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorSample<F> {
    /// Sorted, deduplicated.
    pub points: Vec<F>,
    pub depth: usize,
    /// Bound on the Hausdorff distance to the true attractor.
    pub tolerance: F,
}

impl<F: Float + Debug> AttractorSample<F> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x\n");
        for p in &self.points {
            let _ = writeln!(s, "{}", p.to_f64().expect("finite"));
        }
        s
    }
}

/// Word fixed points as evidence for condition (L).
#[derive(Debug, Clone, PartialEq)]
pub struct LCertificate<F> {
    /// Distinct fixed points of words of length ≤ k, for k = 1..=maxlen.
    pub counts: Vec<usize>,
    /// `Σ_{k ≤ maxlen} N^k`.
    pub bound: u64,
    pub grid_points: usize,
    pub points: Vec<F>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HutchinsonTrace<F> {
    /// `d_H(K₀, attractor)`.
    pub initial: F,
    pub distances: Vec<F>,
    /// `c^n · d₀ + tolerance`.
    pub bounds: Vec<F>,
    pub tolerance: F,
}

impl<F: Float> HutchinsonTrace<F> {
    pub fn within_bounds(&self) -> bool {
        self.distances.iter().zip(&self.bounds).all(|(d, b)| d <= b)
    }
}

/// Sort and merge points closer than `tol`.
pub fn sort_dedup<F: Float>(mut pts: Vec<F>, tol: F) -> Vec<F> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    let mut out: Vec<F> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|&l| p - l > tol) {
            out.push(p);
        }
    }
    out
}

fn nearest_gap<F: Float>(sorted: &[F], x: F) -> F {
    let i = sorted.partition_point(|&p| p < x);
    let mut best = F::infinity();
    if i < sorted.len() {
        best = best.min((sorted[i] - x).abs());
    }
    if i > 0 {
        best = best.min((x - sorted[i - 1]).abs());
    }
    best
}

/// Hausdorff distance between two sorted point sets.
pub fn hausdorff_distance<F: Float>(a: &[F], b: &[F]) -> F {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { F::zero() } else { F::infinity() };
    }
    let one = a.iter().fold(F::zero(), |m, &x| m.max(nearest_gap(b, x)));
    b.iter().fold(one, |m, &x| m.max(nearest_gap(a, x)))
}

/// `Σ c_{ab} x^a y^b` with coefficients chosen per piece of a partition in `x`.
struct PiecewisePoly<F> {
    breaks: Vec<F>,
    coeffs: Vec<[[F; 3]; 3]>,
}

impl<F: Float> PiecewisePoly<F> {
    fn random(rng: &mut ChaCha8Rng, lower: F, upper: F) -> Self {
        let pieces = rng.random_range(1..=4);
        let span = (upper - lower).to_f64().expect("finite");
        let lo = lower.to_f64().expect("finite");
        let mut breaks: Vec<F> = (1..pieces).map(|_| c(lo + span * rng.random::<f64>())).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let coeffs = (0..pieces)
            .map(|_| {
                let mut m = [[F::zero(); 3]; 3];
                for row in &mut m {
                    for v in row.iter_mut() {
                        *v = c(rng.random_range(-1.0..1.0));
                    }
                }
                m
            })
            .collect();
        PiecewisePoly { breaks, coeffs }
    }

    fn eval(&self, x: F, y: F) -> F {
        let piece = self.breaks.partition_point(|&b| b <= x);
        let m = &self.coeffs[piece];
        let mut total = F::zero();
        let mut xa = F::one();
        for row in m {
            let mut yb = F::one();
            for &v in row {
                total = total + v * xa * yb;
                yb = yb * y;
            }
            xa = xa * x;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine(a: f64, b: f64) -> AffineMap<f64> {
        AffineMap { slope: a, intercept: b }
    }

    pub fn cantor() -> IfsSystem<f64> {
        IfsSystem::new(vec![affine(1.0 / 3.0, 0.0), affine(1.0 / 3.0, 2.0 / 3.0)], None, 0.0, 1.0).unwrap()
    }

    pub fn tent() -> IfsSystem<f64> {
        IfsSystem::new(vec![affine(0.5, 0.0), affine(-0.5, 1.0)], None, 0.0, 1.0).unwrap()
    }

    fn halves() -> IfsSystem<f64> {
        IfsSystem::new(vec![affine(0.5, 0.0), affine(0.5, 0.5)], None, 0.0, 1.0).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert!(IfsSystem::new(vec![affine(0.5, 0.0)], None, 0.0, 1.0).is_err());
        assert!(IfsSystem::new(vec![affine(1.0, 0.0), affine(0.5, 0.0)], None, 0.0, 1.0).is_err());
        assert!(IfsSystem::new(vec![affine(0.5, 0.8), affine(0.5, 0.0)], None, 0.0, 1.0).is_err());
        assert!(cantor().with_weights(vec![0.5, 0.6]).is_err());
        assert!(!cantor().covers_interval());
        assert!(tent().covers_interval());
    }

    #[test]
    fn attractor_examples() {
        let s = cantor().attractor(3);
        assert_eq!(s.points.len(), 16);
        assert_eq!(s.points[0], 0.0);
        assert!((s.points[15] - 1.0).abs() < 1e-12);
        // eight level-3 intervals, each contributing its two endpoints
        for pair in s.points.chunks(2) {
            assert!((pair[1] - pair[0] - 1.0 / 27.0).abs() < 1e-12);
        }

        for depth in 1..8 {
            let h = halves();
            let s = h.attractor(depth);
            assert!(h.invariance_residual(&s) <= 2f64.powi(1 - depth as i32));
            assert!(hausdorff_distance(&s.points, &[0.0, 0.5, 1.0]) <= 0.5);
        }
        let t = tent().attractor(10);
        assert_eq!(t.points[0], 0.0);
        assert!((t.points.last().unwrap() - 1.0).abs() < 1e-12);
        let gaps = t.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!(gaps <= 2f64.powi(-9));
    }

    #[test]
    fn branch_examples() {
        let t = tent();
        assert_eq!(t.branch_index(0.5, 1.0, 1e-9).unwrap(), 2);
        assert_eq!(t.branch_index(0.25, 0.5, 1e-9).unwrap(), 1);
        assert!(matches!(t.branch_index(0.3, 0.5, 1e-9), Err(Error::Domain(_))));
        let grid: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        assert_eq!(t.branch_points(&grid, 1e-9), vec![0.5]);
        assert!(cantor().branch_points(&grid, 1e-9).is_empty());
    }

    #[test]
    fn isometry_examples() {
        assert!(tent().check_isometry(&[0.3, 0.7], 0, 5, 1).unwrap() <= 1e-12);
        assert!(tent().check_isometry(&[0.5, 0.5], 50, 5, 2).unwrap() <= 1e-12);
        assert!(cantor().check_isometry(&[0.25, 0.75], 100, 5, 3).unwrap() <= 1e-12);
    }

    #[test]
    fn word_fixed_point_examples() {
        let c = cantor();
        assert!((c.word_fixed_point(&[0, 1]).unwrap() - 0.25).abs() < 1e-15);
        assert!((tent().word_fixed_point(&[1]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.word_fixed_point(&[1, 1, 1]).unwrap() - 1.0).abs() < 1e-15);
        assert!(c.word_fixed_point(&[]).is_err());
        assert!(c.word_fixed_point(&[2]).is_err());
    }

    #[test]
    fn certificate_examples() {
        let t = tent().condition_l_certificate(8, 101).unwrap();
        assert!(t.holds && t.bound == 510 && *t.counts.last().unwrap() <= 510);
        let c = cantor().condition_l_certificate(1, 101).unwrap();
        assert_eq!(c.points.len(), 2);
        assert!(c.points[0].abs() < 1e-15 && (c.points[1] - 1.0).abs() < 1e-15);
        let other = tent().condition_l_certificate(8, 1001).unwrap();
        assert_eq!(other.counts, t.counts);
    }

    #[test]
    fn hutchinson_examples() {
        let c = cantor();
        let a = c.attractor(14);
        let trace = c.hereditary_triviality_check(&[0.0], 10, &a).unwrap();
        assert!((trace.initial - 1.0).abs() < 1e-12);
        for (n, d) in trace.distances.iter().enumerate() {
            assert!(*d <= 3f64.powi(-(n as i32 + 1)) + a.tolerance);
        }
        let same = c.hereditary_triviality_check(&a.points, 3, &a).unwrap();
        assert!(same.distances.iter().all(|d| *d <= a.tolerance));

        let t = tent();
        let ta = t.attractor(14);
        let tr = t.hereditary_triviality_check(&[0.5], 8, &ta).unwrap();
        for (n, d) in tr.distances.iter().enumerate() {
            assert!(*d <= 0.5 * 2f64.powi(-(n as i32 + 1)) + ta.tolerance);
        }
        assert!(c.hereditary_triviality_check(&[], 3, &a).is_err());
        assert!(c.hereditary_triviality_check(&[2.0], 3, &a).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(cantor().classify(101), IfsClass::TotallyDisconnected);
        assert_eq!(tent().classify(101), IfsClass::BranchOverlapOnly);
        let g = IfsSystem::new(vec![affine(0.5, 0.0), affine(0.5, 0.25)], None, 0.0, 1.0).unwrap();
        assert_eq!(g.classify(101), IfsClass::General);
    }

    #[test]
    fn generic_over_f32() {
        let t = IfsSystem::<f32>::new(
            vec![AffineMap { slope: 0.5, intercept: 0.0 }, AffineMap { slope: -0.5, intercept: 1.0 }],
            None,
            0.0,
            1.0,
        )
        .unwrap();
        assert!((t.word_fixed_point(&[1]).unwrap() - 2.0 / 3.0).abs() < 1e-6);
    }
}
