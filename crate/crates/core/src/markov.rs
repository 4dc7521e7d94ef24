//! Markov operators as computable kernel models.
//!
//! A kernel stores `p({x}, y)` for every pair of states. Following the
//! graph-algebra convention the matrix is *column* stochastic: for each
//! target state `y` the column `p(·, y)` is a probability vector, and
//! `(Pf)(y) = Σ_x f(x) p({x}, y)`.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// A set of state (vertex) indices.
pub type VertexSet = FixedBitSet;

/// Build a [`VertexSet`] of capacity `n` from indices.
pub fn vertex_set(n: usize, members: impl IntoIterator<Item = usize>) -> VertexSet {
    let mut set = FixedBitSet::with_capacity(n);
    for i in members {
        set.grow(i + 1);
        set.insert(i);
    }
    set
}

/// Whether loop base points are read as isolated points (a genuinely finite
/// space) or as samples of an interval whose interior matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteriorMode {
    Discrete,
    Continuum,
}

/// State space of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec<S> {
    FiniteSet {
        labels: Vec<String>,
    },
    /// `points` equally spaced values on `[lower, upper]`, endpoints included.
    IntervalGrid {
        lower: S,
        upper: S,
        points: usize,
        interior_mode: InteriorMode,
    },
}

impl<S: Scalar> SpaceSpec<S> {
    pub fn finite(labels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        SpaceSpec::FiniteSet {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn grid(lower: S, upper: S, points: usize, interior_mode: InteriorMode) -> Self {
        SpaceSpec::IntervalGrid {
            lower,
            upper,
            points,
            interior_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::FiniteSet { labels } => {
                if labels.is_empty() {
                    return Err(Error::Validation("finite set has no labels".into()));
                }
                let unique: BTreeSet<&String> = labels.iter().collect();
                if unique.len() != labels.len() {
                    return Err(Error::Validation("duplicate state labels".into()));
                }
                Ok(())
            }
            SpaceSpec::IntervalGrid {
                lower,
                upper,
                points,
                ..
            } => {
                if *points == 0 {
                    return Err(Error::Validation("grid needs at least one point".into()));
                }
                if !(lower < upper) {
                    return Err(Error::Validation("grid lower bound must be below upper".into()));
                }
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SpaceSpec::FiniteSet { labels } => labels.len(),
            SpaceSpec::IntervalGrid { points, .. } => *points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interior_mode(&self) -> InteriorMode {
        match self {
            SpaceSpec::FiniteSet { .. } => InteriorMode::Discrete,
            SpaceSpec::IntervalGrid { interior_mode, .. } => *interior_mode,
        }
    }

    fn step(&self) -> Option<S> {
        match self {
            SpaceSpec::IntervalGrid {
                lower,
                upper,
                points,
                ..
            } if *points > 1 => Some((upper.clone() - lower.clone()) / S::from_usize(points - 1)),
            _ => None,
        }
    }

    /// Grid coordinates, `None` for finite sets.
    pub fn grid_values(&self) -> Option<Vec<S>> {
        match self {
            SpaceSpec::FiniteSet { .. } => None,
            SpaceSpec::IntervalGrid {
                lower,
                upper,
                points,
                ..
            } => {
                let values = match self.step() {
                    None => vec![lower.clone()],
                    Some(step) => (0..*points)
                        .map(|k| {
                            if k + 1 == *points {
                                upper.clone()
                            } else {
                                lower.clone() + step.clone() * S::from_usize(k)
                            }
                        })
                        .collect(),
                };
                Some(values)
            }
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            SpaceSpec::FiniteSet { labels } => labels.clone(),
            SpaceSpec::IntervalGrid { .. } => self
                .grid_values()
                .unwrap_or_default()
                .iter()
                .map(Scalar::label)
                .collect(),
        }
    }

    /// Nearest grid index of `value`, ties toward the lower point.
    pub fn snap(&self, value: &S) -> Option<usize> {
        match self {
            SpaceSpec::FiniteSet { .. } => None,
            SpaceSpec::IntervalGrid { lower, points, .. } => match self.step() {
                None => Some(0),
                Some(step) => {
                    let t = (value.clone() - lower.clone()) / step;
                    let k = t.round_half_down().clamp(0, *points as i64 - 1);
                    Some(k as usize)
                }
            },
        }
    }

    /// Same space with a different number of grid points.
    pub fn with_points(&self, n: usize) -> Self {
        match self {
            SpaceSpec::IntervalGrid {
                lower,
                upper,
                interior_mode,
                ..
            } => SpaceSpec::IntervalGrid {
                lower: lower.clone(),
                upper: upper.clone(),
                points: n,
                interior_mode: *interior_mode,
            },
            other => other.clone(),
        }
    }

    fn contains_value(&self, v: &S) -> bool {
        match self {
            SpaceSpec::IntervalGrid { lower, upper, .. } => {
                let tol = S::tolerance();
                *v >= lower.clone() - tol.clone() && *v <= upper.clone() + tol
            }
            SpaceSpec::FiniteSet { .. } => false,
        }
    }

    fn map_scalar<T: Scalar>(&self, f: &impl Fn(&S) -> T) -> SpaceSpec<T> {
        match self {
            SpaceSpec::FiniteSet { labels } => SpaceSpec::FiniteSet {
                labels: labels.clone(),
            },
            SpaceSpec::IntervalGrid {
                lower,
                upper,
                points,
                interior_mode,
            } => SpaceSpec::IntervalGrid {
                lower: f(lower),
                upper: f(upper),
                points: *points,
                interior_mode: *interior_mode,
            },
        }
    }
}

/// `x ↦ slope·x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<S> {
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> AffineMap<S> {
    pub fn new(slope: S, intercept: S) -> Self {
        AffineMap { slope, intercept }
    }

    pub fn eval(&self, x: &S) -> S {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }
}

/// A map of the state space into itself.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec<S> {
    Affine(AffineMap<S>),
    /// Total function on a finite set: state `i` goes to `table[i]`.
    Table(Vec<usize>),
}

/// Column-stochastic kernel stored by columns; only positive entries are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<S> {
    n: usize,
    // columns[y] = [(x, p({x}, y))], sorted by x
    columns: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> Kernel<S> {
    /// From a row-major matrix `rows[x][y] = p({x}, y)`.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Validation("kernel has no states".into()));
        }
        let mut columns = vec![Vec::new(); n];
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "kernel row {} has {} entries, expected {}",
                    x,
                    row.len(),
                    n
                )));
            }
            for (y, v) in row.into_iter().enumerate() {
                if v < S::zero() - S::tolerance() {
                    return Err(Error::Validation(format!("negative entry at row {x}, column {y}")));
                }
                if v.is_positive_tol() {
                    columns[y].push((x, v));
                }
            }
        }
        let k = Kernel { n, columns };
        k.check_stochastic()?;
        Ok(k)
    }

    /// From explicit columns `columns[y] = [(x, weight)]`. Entries with equal `x` are summed.
    pub fn from_columns(n: usize, columns: Vec<Vec<(usize, S)>>) -> Result<Self> {
        if columns.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: columns.len(),
            });
        }
        let mut merged = Vec::with_capacity(n);
        for mut col in columns {
            col.sort_by_key(|(x, _)| *x);
            let mut out: Vec<(usize, S)> = Vec::with_capacity(col.len());
            for (x, w) in col {
                if x >= n {
                    return Err(Error::Domain(format!("state index {x} out of range")));
                }
                match out.last_mut() {
                    Some((px, pw)) if *px == x => *pw = pw.clone() + w,
                    _ => out.push((x, w)),
                }
            }
            out.retain(|(_, w)| w.is_positive_tol());
            merged.push(out);
        }
        let k = Kernel { n, columns: merged };
        k.check_stochastic()?;
        Ok(k)
    }

    fn check_stochastic(&self) -> Result<()> {
        for (y, col) in self.columns.iter().enumerate() {
            let sum = col.iter().fold(S::zero(), |acc, (_, w)| acc + w.clone());
            if !sum.approx_eq(&S::one()) {
                return Err(Error::Validation(format!(
                    "column {} sums to {}, expected 1",
                    y,
                    sum.label()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `p({x}, y)`.
    pub fn entry(&self, x: usize, y: usize) -> S {
        self.columns[y]
            .binary_search_by_key(&x, |(i, _)| *i)
            .map(|pos| self.columns[y][pos].1.clone())
            .unwrap_or_else(|_| S::zero())
    }

    /// Positive entries of column `y`.
    pub fn column(&self, y: usize) -> &[(usize, S)] {
        &self.columns[y]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        let mut rows = vec![vec![S::zero(); self.n]; self.n];
        for (y, col) in self.columns.iter().enumerate() {
            for (x, w) in col {
                rows[*x][y] = w.clone();
            }
        }
        rows
    }

    pub fn is_column_stochastic(&self) -> bool {
        self.check_stochastic().is_ok()
    }

    /// Kernel of `P ∘ Q` where `self` is `P`'s kernel: `(pq)[x][y] = Σ_z p[x][z] q[z][y]`.
    pub fn compose(&self, other: &Kernel<S>) -> Kernel<S> {
        let n = self.n;
        let mut columns = Vec::with_capacity(n);
        let mut acc: Vec<Option<S>> = vec![None; n];
        for y in 0..n {
            let mut touched = Vec::new();
            for (z, qzy) in &other.columns[y] {
                for (x, pxz) in &self.columns[*z] {
                    let term = pxz.clone() * qzy.clone();
                    match &mut acc[*x] {
                        Some(v) => *v = v.clone() + term,
                        slot @ None => {
                            *slot = Some(term);
                            touched.push(*x);
                        }
                    }
                }
            }
            touched.sort_unstable();
            let col: Vec<(usize, S)> = touched
                .into_iter()
                .filter_map(|x| acc[x].take().map(|v| (x, v)))
                .filter(|(_, v)| v.is_positive_tol())
                .collect();
            columns.push(col);
        }
        Kernel { n, columns }
    }

    /// Kernel of `P^m`; `m = 0` gives the identity.
    pub fn power(&self, m: usize) -> Kernel<S> {
        let mut result = Kernel::identity(self.n);
        for _ in 0..m {
            result = result.compose(self);
        }
        result
    }

    pub fn identity(n: usize) -> Kernel<S> {
        Kernel {
            n,
            columns: (0..n).map(|y| vec![(y, S::one())]).collect(),
        }
    }

    /// `(Pf)(y) = Σ_x f(x) p({x}, y)`.
    pub fn apply(&self, f: &[S]) -> Result<Vec<S>> {
        if f.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: f.len(),
            });
        }
        Ok(self
            .columns
            .iter()
            .map(|col| {
                col.iter()
                    .fold(S::zero(), |acc, (x, w)| acc + f[*x].clone() * w.clone())
            })
            .collect())
    }

    /// `{(x, y) : p({x}, y) > 0}`.
    pub fn support(&self) -> BTreeSet<(usize, usize)> {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(y, col)| col.iter().map(move |(x, _)| (*x, y)))
            .collect()
    }

    fn check_subset(&self, set: &VertexSet) -> Result<()> {
        match set.ones().find(|&i| i >= self.n) {
            Some(i) => Err(Error::Domain(format!("state index {i} is not a state"))),
            None => Ok(()),
        }
    }

    /// `p(B, y) = 1` for every `y ∈ B`.
    pub fn is_absorbing(&self, set: &VertexSet) -> Result<bool> {
        self.check_subset(set)?;
        Ok(set.ones().all(|y| {
            let mass = self.columns[y]
                .iter()
                .filter(|(x, _)| set.contains(*x))
                .fold(S::zero(), |acc, (_, w)| acc + w.clone());
            mass.approx_eq(&S::one())
        }))
    }

    /// Sources of edges whose range lies in `set`: `s(r⁻¹(B))`.
    pub fn predecessors_of(&self, set: &VertexSet) -> VertexSet {
        let mut out = FixedBitSet::with_capacity(self.n);
        for y in set.ones().filter(|&y| y < self.n) {
            for (x, _) in &self.columns[y] {
                out.insert(*x);
            }
        }
        out
    }

    /// Discrete strong absorption: `B = s(r⁻¹(B))`.
    pub fn is_strongly_absorbing(&self, set: &VertexSet) -> Result<bool> {
        self.check_subset(set)?;
        let pred = self.predecessors_of(set);
        Ok(pred.ones().eq(set.ones()))
    }

    /// Kernel restricted to `K × K`, with rows and columns renumbered in increasing order.
    pub fn restrict(&self, keep: &VertexSet) -> Result<Kernel<S>> {
        self.check_subset(keep)?;
        let members: Vec<usize> = keep.ones().collect();
        if members.is_empty() {
            return Err(Error::Domain("cannot restrict to the empty set".into()));
        }
        if !self.is_absorbing(keep)? {
            return Err(Error::Precondition(
                "restriction requires an absorbing set (P restricts to C(K) iff K is absorbing)"
                    .into(),
            ));
        }
        let mut index = vec![usize::MAX; self.n];
        for (new, &old) in members.iter().enumerate() {
            index[old] = new;
        }
        let columns = members
            .iter()
            .map(|&y| {
                self.columns[y]
                    .iter()
                    .filter(|(x, _)| keep.contains(*x))
                    .map(|(x, w)| (index[*x], w.clone()))
                    .collect()
            })
            .collect();
        Kernel::from_columns(members.len(), columns)
    }

    pub fn transpose_rows(rows: Vec<Vec<S>>) -> Vec<Vec<S>> {
        let n = rows.len();
        (0..n)
            .map(|j| rows.iter().map(|r| r.get(j).cloned().unwrap_or_else(S::zero)).collect())
            .collect()
    }

    pub fn map_scalar<T: Scalar>(&self, f: &impl Fn(&S) -> T) -> Kernel<T> {
        Kernel {
            n: self.n,
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().map(|(x, w)| (*x, f(w))).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ModelKind<S> {
    FiniteKernel {
        states: Vec<String>,
        kernel: Kernel<S>,
    },
    MapSystem {
        space: SpaceSpec<S>,
        maps: Vec<MapSpec<S>>,
        weights: Vec<S>,
    },
    Uniform {
        space: SpaceSpec<S>,
    },
}

/// A finite or grid-discretized Markov operator.
///
/// Every constructor validates the unitality and positivity invariants, so a
/// `MarkovModel` value is always a valid Markov operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel<S> {
    kind: ModelKind<S>,
}

/// Borrowed view of a model's variant.
#[derive(Debug, Clone, Copy)]
pub enum ModelView<'a, S> {
    FiniteKernel {
        states: &'a [String],
        kernel: &'a Kernel<S>,
    },
    MapSystem {
        space: &'a SpaceSpec<S>,
        maps: &'a [MapSpec<S>],
        weights: &'a [S],
    },
    Uniform {
        space: &'a SpaceSpec<S>,
    },
}

impl<S: Scalar> MarkovModel<S> {
    pub fn finite_kernel(states: Vec<String>, kernel: Kernel<S>) -> Result<Self> {
        SpaceSpec::<S>::finite(states.clone()).validate()?;
        if states.len() != kernel.len() {
            return Err(Error::Dimension {
                expected: states.len(),
                got: kernel.len(),
            });
        }
        Ok(MarkovModel {
            kind: ModelKind::FiniteKernel { states, kernel },
        })
    }

    /// Convenience constructor with labels `x1..xn` from a row-major matrix.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let states = (1..=rows.len()).map(|i| format!("x{i}")).collect();
        Self::finite_kernel(states, Kernel::from_rows(rows)?)
    }

    /// `weights = None` means uniform weights `1/N`.
    pub fn map_system(space: SpaceSpec<S>, maps: Vec<MapSpec<S>>, weights: Option<Vec<S>>) -> Result<Self> {
        space.validate()?;
        if maps.is_empty() {
            return Err(Error::Validation("map system needs at least one map".into()));
        }
        let weights = match weights {
            Some(w) => w,
            None => vec![S::one() / S::from_usize(maps.len()); maps.len()],
        };
        if weights.len() != maps.len() {
            return Err(Error::Validation(format!(
                "{} weights for {} maps",
                weights.len(),
                maps.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive_tol()) {
            return Err(Error::Validation(format!("weight {i} is not strictly positive")));
        }
        let total = weights.iter().fold(S::zero(), |a, w| a + w.clone());
        if !total.approx_eq(&S::one()) {
            return Err(Error::Validation(format!("weights sum to {total:?}, expected 1")));
        }
        let n = space.len();
        for (i, map) in maps.iter().enumerate() {
            match (map, &space) {
                (MapSpec::Table(t), SpaceSpec::FiniteSet { .. }) => {
                    if t.len() != n || t.iter().any(|&j| j >= n) {
                        return Err(Error::Validation(format!("map {i} is not a total function on the states")));
                    }
                }
                (MapSpec::Affine(a), SpaceSpec::IntervalGrid { lower, upper, .. }) => {
                    if !space.contains_value(&a.eval(lower)) || !space.contains_value(&a.eval(upper)) {
                        return Err(Error::Validation(format!("map {i} does not send the interval into itself")));
                    }
                }
                (MapSpec::Table(_), _) => {
                    return Err(Error::Validation(format!("map {i}: tables need a finite_set space")));
                }
                (MapSpec::Affine(_), _) => {
                    return Err(Error::Validation(format!("map {i}: affine maps need an interval_grid space")));
                }
            }
        }
        Ok(MarkovModel {
            kind: ModelKind::MapSystem { space, maps, weights },
        })
    }

    pub fn uniform(space: SpaceSpec<S>) -> Result<Self> {
        space.validate()?;
        Ok(MarkovModel {
            kind: ModelKind::Uniform { space },
        })
    }

    pub fn view(&self) -> ModelView<'_, S> {
        match &self.kind {
            ModelKind::FiniteKernel { states, kernel } => ModelView::FiniteKernel { states, kernel },
            ModelKind::MapSystem { space, maps, weights } => ModelView::MapSystem { space, maps, weights },
            ModelKind::Uniform { space } => ModelView::Uniform { space },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::FiniteKernel { .. } => "finite_kernel",
            ModelKind::MapSystem { .. } => "map_system",
            ModelKind::Uniform { .. } => "uniform",
        }
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            ModelKind::FiniteKernel { states, .. } => states.len(),
            ModelKind::MapSystem { space, .. } | ModelKind::Uniform { space } => space.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn states(&self) -> Vec<String> {
        match &self.kind {
            ModelKind::FiniteKernel { states, .. } => states.clone(),
            ModelKind::MapSystem { space, .. } | ModelKind::Uniform { space } => space.labels(),
        }
    }

    pub fn space(&self) -> Option<&SpaceSpec<S>> {
        match &self.kind {
            ModelKind::FiniteKernel { .. } => None,
            ModelKind::MapSystem { space, .. } | ModelKind::Uniform { space } => Some(space),
        }
    }

    pub fn grid_values(&self) -> Option<Vec<S>> {
        self.space().and_then(SpaceSpec::grid_values)
    }

    pub fn interior_mode(&self) -> InteriorMode {
        self.space()
            .map(SpaceSpec::interior_mode)
            .unwrap_or(InteriorMode::Discrete)
    }

    /// Same model on a grid with `n` points; `None` unless the model lives on an interval grid.
    pub fn with_grid_points(&self, n: usize) -> Option<Self> {
        match &self.kind {
            ModelKind::MapSystem {
                space: space @ SpaceSpec::IntervalGrid { .. },
                maps,
                weights,
            } => Some(MarkovModel {
                kind: ModelKind::MapSystem {
                    space: space.with_points(n),
                    maps: maps.clone(),
                    weights: weights.clone(),
                },
            }),
            ModelKind::Uniform {
                space: space @ SpaceSpec::IntervalGrid { .. },
            } => Some(MarkovModel {
                kind: ModelKind::Uniform {
                    space: space.with_points(n),
                },
            }),
            _ => None,
        }
    }

    /// Index of the state image `f_i(y)` for every map and grid state `y`.
    fn map_images(space: &SpaceSpec<S>, map: &MapSpec<S>) -> Vec<usize> {
        match map {
            MapSpec::Table(t) => t.clone(),
            MapSpec::Affine(a) => space
                .grid_values()
                .unwrap_or_default()
                .iter()
                .map(|y| space.snap(&a.eval(y)).unwrap_or(0))
                .collect(),
        }
    }

    /// The finite kernel this model induces (exact copy for `FiniteKernel`,
    /// snapped cographs for map systems, constant `1/n` for uniform kernels).
    pub fn kernel(&self) -> Kernel<S> {
        match &self.kind {
            ModelKind::FiniteKernel { kernel, .. } => kernel.clone(),
            ModelKind::MapSystem { space, maps, weights } => {
                let n = space.len();
                let mut columns: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
                for (map, w) in maps.iter().zip(weights) {
                    for (y, x) in Self::map_images(space, map).into_iter().enumerate() {
                        columns[y].push((x, w.clone()));
                    }
                }
                Kernel::from_columns(n, columns).expect("map system weights are validated")
            }
            ModelKind::Uniform { space } => {
                let n = space.len();
                let w = S::one() / S::from_usize(n);
                Kernel {
                    n,
                    columns: (0..n)
                        .map(|_| (0..n).map(|x| (x, w.clone())).collect())
                        .collect(),
                }
            }
        }
    }

    pub fn apply(&self, f: &[S]) -> Result<Vec<S>> {
        if let ModelKind::Uniform { space } = &self.kind {
            if f.len() != space.len() {
                return Err(Error::Dimension {
                    expected: space.len(),
                    got: f.len(),
                });
            }
            let mean = f.iter().fold(S::zero(), |a, v| a + v.clone()) / S::from_usize(f.len());
            return Ok(vec![mean; f.len()]);
        }
        self.kernel().apply(f)
    }

    /// `P^n f`; `n = 0` returns `f`.
    pub fn power_apply(&self, f: &[S], n: usize) -> Result<Vec<S>> {
        if f.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: f.len(),
            });
        }
        let kernel = self.kernel();
        let mut out = f.to_vec();
        for _ in 0..n {
            out = kernel.apply(&out)?;
        }
        Ok(out)
    }

    /// Support of `P` as index pairs `(x, y)` with `p({x}, y) > 0`.
    pub fn support(&self) -> BTreeSet<(usize, usize)> {
        match &self.kind {
            ModelKind::MapSystem { space, maps, .. } => maps
                .iter()
                .flat_map(|m| {
                    Self::map_images(space, m)
                        .into_iter()
                        .enumerate()
                        .map(|(y, x)| (x, y))
                })
                .collect(),
            _ => self.kernel().support(),
        }
    }

    pub fn is_absorbing(&self, set: &VertexSet) -> Result<bool> {
        self.kernel().is_absorbing(set)
    }

    pub fn is_strongly_absorbing(&self, set: &VertexSet) -> Result<bool> {
        self.kernel().is_strongly_absorbing(set)
    }

    /// The operator restricted to an absorbing set `K`, as a finite kernel model.
    pub fn restrict(&self, keep: &VertexSet) -> Result<MarkovModel<S>> {
        let kernel = self.kernel().restrict(keep)?;
        let labels = self.states();
        let states = keep.ones().map(|i| labels[i].clone()).collect();
        MarkovModel::finite_kernel(states, kernel)
    }

    /// State indices for the given labels.
    pub fn subset_from_labels<L: AsRef<str>>(&self, labels: &[L]) -> Result<VertexSet> {
        let states = self.states();
        let mut set = FixedBitSet::with_capacity(states.len());
        for l in labels {
            let i = states
                .iter()
                .position(|s| s == l.as_ref())
                .ok_or_else(|| Error::Domain(format!("unknown state label {:?}", l.as_ref())))?;
            set.insert(i);
        }
        Ok(set)
    }

    /// Grid index of a coordinate value (exact match within tolerance).
    pub fn grid_index(&self, value: &S) -> Option<usize> {
        let space = self.space()?;
        let i = space.snap(value)?;
        let values = space.grid_values()?;
        values[i].approx_eq(value).then_some(i)
    }

    /// Convert every number in the model to another scalar type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MarkovModel<T> {
        let kind = match &self.kind {
            ModelKind::FiniteKernel { states, kernel } => ModelKind::FiniteKernel {
                states: states.clone(),
                kernel: kernel.map_scalar(&f),
            },
            ModelKind::MapSystem { space, maps, weights } => ModelKind::MapSystem {
                space: space.map_scalar(&f),
                maps: maps
                    .iter()
                    .map(|m| match m {
                        MapSpec::Affine(a) => MapSpec::Affine(AffineMap::new(f(&a.slope), f(&a.intercept))),
                        MapSpec::Table(t) => MapSpec::Table(t.clone()),
                    })
                    .collect(),
                weights: weights.iter().map(&f).collect(),
            },
            ModelKind::Uniform { space } => ModelKind::Uniform {
                space: space.map_scalar(&f),
            },
        };
        MarkovModel { kind }
    }
}

impl MarkovModel<Rational> {
    pub fn to_f64(&self) -> MarkovModel<f64> {
        self.map_scalar(Scalar::to_f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn q(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    fn chain() -> MarkovModel<Rational> {
        MarkovModel::from_rows(vec![vec![q(1, 1), q(1, 2)], vec![q(0, 1), q(1, 2)]]).unwrap()
    }

    fn three_cycle() -> MarkovModel<Rational> {
        // p(·, y) = δ_{τ⁻¹(y)} for τ = (0 → 1 → 2 → 0)
        let o = q(0, 1);
        let l = q(1, 1);
        MarkovModel::from_rows(vec![
            vec![o.clone(), l.clone(), o.clone()],
            vec![o.clone(), o.clone(), l.clone()],
            vec![l, o.clone(), o],
        ])
        .unwrap()
    }

    fn reflection(points: usize) -> MarkovModel<f64> {
        MarkovModel::map_system(
            SpaceSpec::grid(0.0, 1.0, points, InteriorMode::Continuum),
            vec![
                MapSpec::Affine(AffineMap::new(1.0, 0.0)),
                MapSpec::Affine(AffineMap::new(-1.0, 1.0)),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        let p = chain();
        assert_eq!(p.apply(&[q(0, 1), q(1, 1)]).unwrap(), vec![q(0, 1), q(1, 2)]);

        let id = MarkovModel::map_system(
            SpaceSpec::grid(0.0, 1.0, 5, InteriorMode::Discrete),
            vec![MapSpec::Affine(AffineMap::new(1.0, 0.0))],
            None,
        )
        .unwrap();
        let f = vec![0.3, -1.0, 2.0, 5.5, 0.0];
        assert_eq!(id.apply(&f).unwrap(), f);

        let u = MarkovModel::<Rational>::uniform(SpaceSpec::finite(["a", "b", "c", "d"])).unwrap();
        let f = vec![q(1, 1), q(2, 1), q(3, 1), q(6, 1)];
        assert_eq!(u.apply(&f).unwrap(), vec![q(3, 1); 4]);
        // Kernel path agrees with the averaging shortcut.
        assert_eq!(u.kernel().apply(&f).unwrap(), vec![q(3, 1); 4]);
    }

    #[test]
    fn apply_dimension_error() {
        let err = chain().apply(&[q(1, 1)]).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 2, got: 1 });
    }

    #[test]
    fn power_apply_examples() {
        let p = chain();
        assert_eq!(
            p.power_apply(&[q(1, 1), q(0, 1)], 2).unwrap(),
            vec![q(1, 1), q(3, 4)]
        );
        let c = three_cycle();
        let f = vec![q(1, 1), q(5, 1), q(-2, 1)];
        assert_eq!(c.power_apply(&f, 3).unwrap(), f);
        assert_eq!(c.power_apply(&f, 0).unwrap(), f);
        assert_ne!(c.power_apply(&f, 1).unwrap(), f);

        let u = MarkovModel::<Rational>::uniform(SpaceSpec::finite(["a", "b", "c"])).unwrap();
        let f = vec![q(1, 1), q(0, 1), q(7, 2)];
        let once = u.power_apply(&f, 1).unwrap();
        for n in 2..5 {
            assert_eq!(u.power_apply(&f, n).unwrap(), once);
        }
    }

    #[test]
    fn support_examples() {
        let s: Vec<_> = chain().support().into_iter().collect();
        assert_eq!(s, vec![(0, 0), (0, 1), (1, 1)]);

        let m = MarkovModel::map_system(
            SpaceSpec::grid(q(0, 1), q(1, 1), 3, InteriorMode::Discrete),
            vec![
                MapSpec::Affine(AffineMap::new(q(1, 1), q(0, 1))),
                MapSpec::Affine(AffineMap::new(q(-1, 1), q(1, 1))),
            ],
            None,
        )
        .unwrap();
        // grid {0, 1/2, 1} → indices 0, 1, 2
        let expected: BTreeSet<(usize, usize)> = [(0, 0), (2, 0), (1, 1), (2, 2), (0, 2)].into_iter().collect();
        assert_eq!(m.support(), expected);
        assert_eq!(m.kernel().support(), expected);

        let u = MarkovModel::<Rational>::uniform(SpaceSpec::finite(["a", "b"])).unwrap();
        assert_eq!(u.support().len(), 4);
    }

    #[test]
    fn support_ignores_weights() {
        let space = SpaceSpec::grid(0.0, 1.0, 21, InteriorMode::Continuum);
        let maps = vec![
            MapSpec::Affine(AffineMap::new(0.5, 0.0)),
            MapSpec::Affine(AffineMap::new(-0.5, 1.0)),
        ];
        let a = MarkovModel::map_system(space.clone(), maps.clone(), Some(vec![0.3, 0.7])).unwrap();
        let b = MarkovModel::map_system(space, maps, Some(vec![0.9, 0.1])).unwrap();
        assert_eq!(a.support(), b.support());
        assert_eq!(a.kernel().support(), b.kernel().support());
    }

    #[test]
    fn absorbing_examples() {
        let p = chain();
        assert!(p.is_absorbing(&vertex_set(2, [0])).unwrap());
        assert!(!p.is_absorbing(&vertex_set(2, [1])).unwrap());
        assert!(p.is_absorbing(&vertex_set(2, [0, 1])).unwrap());
        assert!(p.is_absorbing(&vertex_set(5, [0])).is_ok());
        assert!(matches!(p.is_absorbing(&vertex_set(3, [2])), Err(Error::Domain(_))));

        let r = reflection(11);
        let pair = vertex_set(11, [3, 7]);
        assert!(r.is_absorbing(&pair).unwrap());
        assert!(r.is_strongly_absorbing(&pair).unwrap());
        assert!(!r.is_absorbing(&vertex_set(11, [3])).unwrap());
    }

    #[test]
    fn strongly_absorbing_examples() {
        let u = MarkovModel::<Rational>::uniform(SpaceSpec::finite(["a", "b", "c"])).unwrap();
        for mask in 1..7u32 {
            let set = vertex_set(3, (0..3).filter(|i| mask & (1 << i) != 0));
            assert!(!u.is_strongly_absorbing(&set).unwrap());
        }
        assert!(u.is_strongly_absorbing(&vertex_set(3, 0..3)).unwrap());
        assert!(chain().is_strongly_absorbing(&vertex_set(2, [0])).unwrap());
        let mid = reflection(11);
        assert!(mid.is_strongly_absorbing(&vertex_set(11, [5])).unwrap());
    }

    #[test]
    fn restrict_examples() {
        let p = chain();
        let r = p.restrict(&vertex_set(2, [0])).unwrap();
        assert_eq!(r.kernel().to_rows(), vec![vec![q(1, 1)]]);
        assert_eq!(r.states(), vec!["x1".to_string()]);
        assert_eq!(p.restrict(&vertex_set(2, [0, 1])).unwrap(), p);

        let u = MarkovModel::<Rational>::uniform(SpaceSpec::finite(["a", "b", "c"])).unwrap();
        assert!(matches!(u.restrict(&vertex_set(3, [0, 1])), Err(Error::Precondition(_))));
        assert!(matches!(p.restrict(&FixedBitSet::with_capacity(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn validation_rejects_bad_kernels() {
        let bad = Kernel::from_rows(vec![vec![q(9, 10), q(1, 2)], vec![q(0, 1), q(1, 2)]]);
        match bad {
            Err(Error::Validation(msg)) => assert!(msg.contains("column 0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Kernel::from_rows(vec![vec![q(-1, 1), q(1, 1)], vec![q(2, 1), q(0, 1)]]).is_err());
        assert!(MarkovModel::map_system(
            SpaceSpec::grid(0.0, 1.0, 3, InteriorMode::Discrete),
            vec![MapSpec::Affine(AffineMap::new(2.0, 0.0))],
            None
        )
        .is_err());
        assert!(MarkovModel::map_system(
            SpaceSpec::grid(0.0, 1.0, 3, InteriorMode::Discrete),
            vec![MapSpec::Affine(AffineMap::new(1.0, 0.0))],
            Some(vec![0.5])
        )
        .is_err());
    }

    #[test]
    fn grid_snapping_ties_go_down() {
        // grid {0, 1/2, 1}; x ↦ x/2 sends 1/2 to 1/4, exactly between 0 and 1/2
        let m = MarkovModel::map_system(
            SpaceSpec::grid(q(0, 1), q(1, 1), 3, InteriorMode::Discrete),
            vec![MapSpec::Affine(AffineMap::new(q(1, 2), q(0, 1)))],
            None,
        )
        .unwrap();
        assert_eq!(m.kernel().entry(0, 1), q(1, 1));
        assert_eq!(m.kernel().entry(1, 2), q(1, 1));
    }

    #[test]
    fn grid_labels_are_clean() {
        let r = reflection(11);
        let states = r.states();
        assert_eq!(states[3], "0.3");
        assert_eq!(states[10], "1");
        assert_eq!(r.grid_index(&0.7), Some(7));
        assert_eq!(r.grid_index(&0.75), None);
    }
}
