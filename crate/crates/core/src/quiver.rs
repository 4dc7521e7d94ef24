//! Finite topological quivers `(E⁰, E¹, r, s, λ)`: paths, loops, vertex
//! classification, condition (L) and cut-downs.

use std::collections::VecDeque;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::markov::{InteriorMode, Kernel, MarkovModel, VertexSet};
use crate::scalar::{format_significant, Scalar};

/// An edge `e` with `s(e) = source`, `r(e) = range` and weight `λ_{r(e)}({e})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<S> {
    pub label: String,
    pub source: usize,
    pub range: usize,
    pub weight: S,
}

/// A finite quiver. Parallel edges are allowed; every edge weight is positive
/// and the weights of `r⁻¹(v)` sum to 1 for each vertex `v` that has incoming edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Quiver<S> {
    vertices: Vec<String>,
    edges: Vec<Edge<S>>,
    interior_mode: InteriorMode,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl<S: Scalar> Quiver<S> {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge<S>>, interior_mode: InteriorMode) -> Result<Self> {
        let n = vertices.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.source >= n || e.range >= n {
                return Err(Error::Domain(format!("edge {} references a missing vertex", e.label)));
            }
            if !e.weight.is_positive_tol() {
                return Err(Error::Validation(format!("edge {} has non-positive weight", e.label)));
            }
            out_edges[e.source].push(i);
            in_edges[e.range].push(i);
        }
        for (v, incoming) in in_edges.iter().enumerate() {
            if incoming.is_empty() {
                continue;
            }
            let total = incoming
                .iter()
                .fold(S::zero(), |acc, &i| acc + edges[i].weight.clone());
            if !total.approx_eq(&S::one()) {
                return Err(Error::Validation(format!(
                    "weights of edges into {} sum to {:?}, expected 1",
                    vertices[v], total
                )));
            }
        }
        Ok(Quiver {
            vertices,
            edges,
            interior_mode,
            out_edges,
            in_edges,
        })
    }

    /// Quiver on `n` vertices `v0..` with the given `(source, range)` edges and
    /// uniform weights over each `r⁻¹(v)`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut indegree = vec![0usize; n];
        for &(_, r) in pairs {
            if r >= n {
                return Err(Error::Domain(format!("vertex {r} out of range")));
            }
            indegree[r] += 1;
        }
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(i, &(s, r))| Edge {
                label: format!("e{i}"),
                source: s,
                range: r,
                weight: S::one() / S::from_usize(indegree[r]),
            })
            .collect();
        Quiver::new((0..n).map(|i| format!("v{i}")).collect(), edges, InteriorMode::Discrete)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn interior_mode(&self) -> InteriorMode {
        self.interior_mode
    }

    /// Edge indices of `s⁻¹(v)`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    /// Edge indices of `r⁻¹(v)`.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_edges[v].len()
    }

    /// Vertices outside `r(E¹)`.
    pub fn sources(&self) -> VertexSet {
        self.collect_vertices(|v| self.in_edges[v].is_empty())
    }

    /// Vertices outside `s(E¹)`.
    pub fn sinks(&self) -> VertexSet {
        self.collect_vertices(|v| self.out_edges[v].is_empty())
    }

    pub fn has_sinks(&self) -> bool {
        self.out_edges.iter().any(Vec::is_empty)
    }

    pub fn has_sources(&self) -> bool {
        self.in_edges.iter().any(Vec::is_empty)
    }

    fn collect_vertices(&self, pred: impl Fn(usize) -> bool) -> VertexSet {
        let mut set = FixedBitSet::with_capacity(self.vertex_count());
        for v in (0..self.vertex_count()).filter(|&v| pred(v)) {
            set.insert(v);
        }
        set
    }

    /// `A[v][w]` = number of edges from `v` to `w`.
    pub fn adjacency_counts(&self) -> Vec<Vec<u32>> {
        let n = self.vertex_count();
        let mut a = vec![vec![0u32; n]; n];
        for e in &self.edges {
            a[e.source][e.range] += 1;
        }
        a
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges[v].iter().map(move |&e| self.edges[e].range)
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == label)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Quiver<T> {
        Quiver {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    label: e.label.clone(),
                    source: e.source,
                    range: e.range,
                    weight: f(&e.weight),
                })
                .collect(),
            interior_mode: self.interior_mode,
            out_edges: self.out_edges.clone(),
            in_edges: self.in_edges.clone(),
        }
    }

    /// Same vertex labels and the same edge list (weights compared within tolerance);
    /// the interior mode is ignored.
    pub fn same_structure(&self, other: &Quiver<S>) -> bool {
        self.vertices == other.vertices
            && self.edges.len() == other.edges.len()
            && self.edges.iter().zip(&other.edges).all(|(a, b)| {
                a.label == b.label && a.source == b.source && a.range == b.range && a.weight.approx_eq(&b.weight)
            })
    }

    /// The Markov operator with `p({x}, y)` = weight of the edge `x → y`.
    /// Needs at least one edge into every vertex and no parallel edges.
    pub fn to_markov_model(&self) -> Result<MarkovModel<S>> {
        let n = self.vertex_count();
        let mut columns: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
        for e in &self.edges {
            if columns[e.range].iter().any(|(x, _)| *x == e.source) {
                return Err(Error::Precondition(format!(
                    "parallel edges {} -> {} have no kernel representation",
                    self.vertices[e.source], self.vertices[e.range]
                )));
            }
            columns[e.range].push((e.source, e.weight.clone()));
        }
        if let Some(v) = self.sources().ones().next() {
            return Err(Error::Precondition(format!(
                "vertex {} receives no edges, so its column cannot be a probability vector",
                self.vertices[v]
            )));
        }
        MarkovModel::finite_kernel(self.vertices.clone(), Kernel::from_columns(n, columns)?)
    }

    /// DOT rendering; edge labels carry the weight to 6 significant digits.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", dot_id(name));
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", i, escape(v));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\"];",
                e.source,
                e.range,
                format_significant(e.weight.to_f64(), 6)
            );
        }
        out.push_str("}\n");
        out
    }
}

fn dot_id(name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if clean.is_empty() {
        "quiver".into()
    } else {
        clean
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// `E(P)`: vertices are the states, edges the support of `P`, and the edge
/// `(x, y)` carries weight `p({x}, y)`.
pub fn build_quiver<S: Scalar>(model: &MarkovModel<S>) -> Quiver<S> {
    let kernel = model.kernel();
    let states = model.states();
    let mut edges = Vec::new();
    for (x, y) in kernel.support() {
        edges.push(Edge {
            label: format!("({},{})", states[x], states[y]),
            source: x,
            range: y,
            weight: kernel.entry(x, y),
        });
    }
    Quiver::new(states, edges, model.interior_mode()).expect("kernel columns are probability vectors")
}

/// Sinks, finite emitters, regular vertices and infinite emitters.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexClassification {
    pub sinks: VertexSet,
    pub finite_emitters: VertexSet,
    pub regular: VertexSet,
    pub infinite_emitters: VertexSet,
}

/// On a finite quiver every vertex is a finite emitter, so `regular = E⁰ ∖ sinks`.
pub fn classify_vertices<S: Scalar>(q: &Quiver<S>) -> VertexClassification {
    let n = q.vertex_count();
    let sinks = q.sinks();
    let mut finite_emitters = FixedBitSet::with_capacity(n);
    finite_emitters.insert_range(..);
    let mut regular = finite_emitters.clone();
    regular.difference_with(&sinks);
    VertexClassification {
        sinks,
        finite_emitters,
        regular,
        infinite_emitters: FixedBitSet::with_capacity(n),
    }
}

/// A path `α₁…α_n` with `r(α_i) = s(α_{i+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    edges: Vec<usize>,
    source: usize,
    range: usize,
}

impl Path {
    pub fn new<S: Scalar>(q: &Quiver<S>, edges: Vec<usize>) -> Result<Path> {
        let first = *edges
            .first()
            .ok_or_else(|| Error::Domain("a path needs at least one edge".into()))?;
        if edges.iter().any(|&e| e >= q.edge_count()) {
            return Err(Error::Domain("path references a missing edge".into()));
        }
        for w in edges.windows(2) {
            if q.edges[w[0]].range != q.edges[w[1]].source {
                return Err(Error::Domain(format!(
                    "edges {} and {} are not composable",
                    q.edges[w[0]].label, q.edges[w[1]].label
                )));
            }
        }
        let last = *edges.last().unwrap_or(&first);
        Ok(Path {
            source: q.edges[first].source,
            range: q.edges[last].range,
            edges,
        })
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn is_loop(&self) -> bool {
        self.source == self.range
    }

    /// `s(α₁), s(α₂), …, s(α_n)`.
    pub fn base_vertices<S: Scalar>(&self, q: &Quiver<S>) -> Vec<usize> {
        self.edges.iter().map(|&e| q.edges[e].source).collect()
    }

    pub fn vertex_labels<S: Scalar>(&self, q: &Quiver<S>) -> Vec<String> {
        self.base_vertices(q)
            .into_iter()
            .map(|v| q.vertices[v].clone())
            .collect()
    }
}

/// Is there a path of length exactly `n` from `v` to `w`?
pub fn reachable<S: Scalar>(q: &Quiver<S>, v: usize, w: usize, n: usize) -> bool {
    let size = q.vertex_count();
    if v >= size || w >= size || n == 0 {
        return false;
    }
    let mut frontier = FixedBitSet::with_capacity(size);
    frontier.insert(v);
    for _ in 0..n {
        let mut next = FixedBitSet::with_capacity(size);
        for u in frontier.ones() {
            for t in q.successors(u) {
                next.insert(t);
            }
        }
        if next.is_clear() {
            return false;
        }
        frontier = next;
    }
    frontier.contains(w)
}

/// All paths of length exactly `n` from `v` to `w`.
pub fn enumerate_paths<S: Scalar>(q: &Quiver<S>, v: usize, w: usize, n: usize) -> Vec<Path> {
    fn walk<S: Scalar>(q: &Quiver<S>, at: usize, w: usize, left: usize, stack: &mut Vec<usize>, out: &mut Vec<Path>) {
        if left == 0 {
            if at == w {
                out.push(Path {
                    edges: stack.clone(),
                    source: q.edges[stack[0]].source,
                    range: w,
                });
            }
            return;
        }
        for &e in q.out_edges(at) {
            stack.push(e);
            walk(q, q.edges[e].range, w, left - 1, stack, out);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 || v >= q.vertex_count() || w >= q.vertex_count() {
        return out;
    }
    walk(q, v, w, n, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Simple cycles of length ≤ `maxlen` none of whose vertices has a second outgoing edge.
///
/// Such a cycle runs entirely through vertices of out-degree one, so it is a
/// cycle of the partial successor function on those vertices.
pub fn no_exit_cycles<S: Scalar>(q: &Quiver<S>, maxlen: usize) -> Vec<Path> {
    let n = q.vertex_count();
    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut state = vec![0u8; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut v = start;
        loop {
            if state[v] == 1 {
                let pos = walk.iter().position(|&u| u == v).unwrap_or(0);
                let cycle = &walk[pos..];
                if cycle.len() <= maxlen {
                    let edges = cycle.iter().map(|&u| q.out_edges(u)[0]).collect();
                    cycles.push(Path {
                        edges,
                        source: v,
                        range: v,
                    });
                }
                break;
            }
            if state[v] == 2 || q.out_degree(v) != 1 {
                break;
            }
            state[v] = 1;
            walk.push(v);
            v = q.edges[q.out_edges(v)[0]].range;
        }
        for u in walk {
            state[u] = 2;
        }
    }
    cycles
}

/// Base points of loops with no exit, over simple cycles of length ≤ `maxlen`.
pub fn loops_without_exit<S: Scalar>(q: &Quiver<S>, maxlen: usize) -> VertexSet {
    let mut set = FixedBitSet::with_capacity(q.vertex_count());
    for c in no_exit_cycles(q, maxlen) {
        for v in c.base_vertices(q) {
            set.insert(v);
        }
    }
    set
}

/// Base-point count at one grid size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefinementLevel {
    pub grid_points: usize,
    pub base_points: usize,
}

/// Outcome of the condition (L) test.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionL {
    Holds,
    /// A loop with no exit; on continuum grids, the counts that grew with refinement.
    Fails {
        witness: Path,
        witness_labels: Vec<String>,
        levels: Vec<RefinementLevel>,
    },
    /// Continuum heuristic: the no-exit base-point count stayed bounded across grid refinements.
    CertifiedAtRefinements { levels: Vec<RefinementLevel> },
}

impl ConditionL {
    pub fn name(&self) -> &'static str {
        match self {
            ConditionL::Holds => "Holds",
            ConditionL::Fails { .. } => "Fails",
            ConditionL::CertifiedAtRefinements { .. } => "CertifiedAtRefinements",
        }
    }

    /// `Holds` or `CertifiedAtRefinements`.
    pub fn is_satisfied(&self) -> bool {
        !matches!(self, ConditionL::Fails { .. })
    }

    pub fn levels(&self) -> &[RefinementLevel] {
        match self {
            ConditionL::Holds => &[],
            ConditionL::Fails { levels, .. } | ConditionL::CertifiedAtRefinements { levels } => levels,
        }
    }
}

/// Condition (L) for a quiver read as a discrete space.
pub fn condition_l<S: Scalar>(q: &Quiver<S>) -> ConditionL {
    match no_exit_cycles(q, q.vertex_count()).into_iter().next() {
        None => ConditionL::Holds,
        Some(witness) => ConditionL::Fails {
            witness_labels: witness.vertex_labels(q),
            witness,
            levels: Vec::new(),
        },
    }
}

/// Grid sizes used for a refinement sequence starting at `points`: each level has 10× the spacing count.
pub fn refinement_grids(points: usize, levels: usize) -> Vec<usize> {
    let intervals = points.saturating_sub(1).max(1);
    (0..levels.max(1))
        .map(|k| intervals * 10usize.pow(k as u32) + 1)
        .collect()
}

/// Condition (L) for a model. Discrete models use [`condition_l`]; continuum
/// grids are evaluated at `levels` refinements (at least 3) and certified when
/// the no-exit base-point count does not grow.
pub fn condition_l_for_model<S: Scalar>(model: &MarkovModel<S>, levels: usize) -> ConditionL {
    let base = build_quiver(model);
    if model.interior_mode() == InteriorMode::Discrete {
        return condition_l(&base);
    }
    let grids = refinement_grids(model.len(), levels.max(3));
    let mut counts = Vec::new();
    let mut finest = None;
    for &g in &grids {
        let refined = model.with_grid_points(g).unwrap_or_else(|| model.clone());
        let q = build_quiver(&refined);
        let count = loops_without_exit(&q, q.vertex_count()).count_ones(..);
        counts.push(RefinementLevel {
            grid_points: g,
            base_points: count,
        });
        finest = Some(q);
    }
    let first = counts[0].base_points;
    let max = counts.iter().map(|l| l.base_points).max().unwrap_or(0);
    if max == 0 {
        ConditionL::Holds
    } else if max <= first {
        ConditionL::CertifiedAtRefinements { levels: counts }
    } else {
        let q = finest.unwrap_or(base);
        let witness = no_exit_cycles(&q, q.vertex_count())
            .into_iter()
            .next()
            .expect("a positive count has a cycle");
        ConditionL::Fails {
            witness_labels: witness.vertex_labels(&q),
            witness,
            levels: counts,
        }
    }
}

/// Every edge leaving `U` stays in `U`.
pub fn is_hereditary<S: Scalar>(q: &Quiver<S>, set: &VertexSet) -> bool {
    q.edges
        .iter()
        .all(|e| !set.contains(e.source) || set.contains(e.range))
}

/// `E_U = (E⁰ ∖ U, E¹ ∖ r⁻¹(U))` for a hereditary `U`.
pub fn cut_down<S: Scalar>(q: &Quiver<S>, set: &VertexSet) -> Result<Quiver<S>> {
    if !is_hereditary(q, set) {
        return Err(Error::Precondition("cut-down requires a hereditary vertex set".into()));
    }
    let mut index = vec![usize::MAX; q.vertex_count()];
    let mut vertices = Vec::new();
    for v in 0..q.vertex_count() {
        if !set.contains(v) {
            index[v] = vertices.len();
            vertices.push(q.vertices[v].clone());
        }
    }
    let edges = q
        .edges
        .iter()
        .filter(|e| !set.contains(e.range))
        .map(|e| Edge {
            label: e.label.clone(),
            source: index[e.source],
            range: index[e.range],
            weight: e.weight.clone(),
        })
        .collect();
    Quiver::new(vertices, edges, q.interior_mode)
}

/// Vertex/edge/weight-preserving isomorphism test (labels are ignored).
///
/// Vertices are sorted by a degree/weight signature refined once by neighbour
/// signatures; ties are resolved by backtracking, trying same-label candidates first.
pub fn isomorphic<S: Scalar>(a: &Quiver<S>, b: &Quiver<S>) -> bool {
    let n = a.vertex_count();
    if n != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let sig_a = signatures(a);
    let sig_b = signatures(b);
    let mut sa = sig_a.clone();
    let mut sb = sig_b.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return false;
    }
    // Assignment order: BFS over the undirected structure so neighbours are placed early.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let nbrs = a.out_edges[v]
                .iter()
                .map(|&e| a.edges[e].range)
                .chain(a.in_edges[v].iter().map(|&e| a.edges[e].source));
            for u in nbrs {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    backtrack(a, b, &sig_a, &sig_b, &order, 0, &mut map, &mut used)
}

type Signature = (usize, usize, Vec<i64>, Vec<i64>, Vec<(usize, usize)>);

fn weight_key<S: Scalar>(w: &S) -> i64 {
    (w.to_f64() * 1e6).round() as i64
}

fn signatures<S: Scalar>(q: &Quiver<S>) -> Vec<Signature> {
    let n = q.vertex_count();
    let base: Vec<(usize, usize)> = (0..n).map(|v| (q.out_edges[v].len(), q.in_edges[v].len())).collect();
    (0..n)
        .map(|v| {
            let mut outw: Vec<i64> = q.out_edges[v].iter().map(|&e| weight_key(&q.edges[e].weight)).collect();
            let mut inw: Vec<i64> = q.in_edges[v].iter().map(|&e| weight_key(&q.edges[e].weight)).collect();
            let mut nbr: Vec<(usize, usize)> = q.successors(v).map(|u| base[u]).collect();
            outw.sort_unstable();
            inw.sort_unstable();
            nbr.sort_unstable();
            (base[v].0, base[v].1, outw, inw, nbr)
        })
        .collect()
}

fn edges_between<S: Scalar>(q: &Quiver<S>, v: usize, w: usize) -> Vec<S> {
    let mut ws: Vec<S> = q.out_edges[v]
        .iter()
        .map(|&e| &q.edges[e])
        .filter(|e| e.range == w)
        .map(|e| e.weight.clone())
        .collect();
    ws.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ws
}

fn same_weights<S: Scalar>(x: &[S], y: &[S]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.approx_eq(q))
}

#[allow(clippy::too_many_arguments)]
fn backtrack<S: Scalar>(
    a: &Quiver<S>,
    b: &Quiver<S>,
    sig_a: &[Signature],
    sig_b: &[Signature],
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&v) = order.get(depth) else {
        return true;
    };
    let mut candidates: Vec<usize> = (0..b.vertex_count())
        .filter(|&u| !used[u] && sig_b[u] == sig_a[v])
        .collect();
    candidates.sort_by_key(|&u| b.vertices[u] != a.vertices[v]);
    for u in candidates {
        let consistent = order[..depth].iter().chain(std::iter::once(&v)).all(|&w| {
            let wu = if w == v { u } else { map[w] };
            same_weights(&edges_between(a, v, w), &edges_between(b, u, wu))
                && same_weights(&edges_between(a, w, v), &edges_between(b, wu, u))
        });
        if !consistent {
            continue;
        }
        map[v] = u;
        used[u] = true;
        if backtrack(a, b, sig_a, sig_b, order, depth + 1, map, used) {
            return true;
        }
        map[v] = usize::MAX;
        used[u] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{vertex_set, AffineMap, Kernel, MapSpec, SpaceSpec};
    use crate::scalar::{ratio, Rational};

    fn chain() -> MarkovModel<Rational> {
        MarkovModel::from_rows(vec![vec![ratio(1, 1), ratio(1, 2)], vec![ratio(0, 1), ratio(1, 2)]]).unwrap()
    }

    fn cycle3() -> MarkovModel<Rational> {
        let cols = vec![vec![(2, ratio(1, 1))], vec![(0, ratio(1, 1))], vec![(1, ratio(1, 1))]];
        MarkovModel::finite_kernel(
            vec!["v1".into(), "v2".into(), "v3".into()],
            Kernel::from_columns(3, cols).unwrap(),
        )
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

    fn tent(points: usize) -> MarkovModel<f64> {
        MarkovModel::map_system(
            SpaceSpec::grid(0.0, 1.0, points, InteriorMode::Continuum),
            vec![
                MapSpec::Affine(AffineMap::new(0.5, 0.0)),
                MapSpec::Affine(AffineMap::new(-0.5, 1.0)),
            ],
            None,
        )
        .unwrap()
    }

    fn uniform(n: usize) -> MarkovModel<Rational> {
        MarkovModel::uniform(SpaceSpec::finite((0..n).map(|i| format!("u{i}")))).unwrap()
    }

    #[test]
    fn build_examples() {
        let q = build_quiver(&chain());
        assert_eq!(q.vertex_count(), 2);
        let w: Vec<Rational> = q.edges().iter().map(|e| e.weight.clone()).collect();
        assert_eq!(w, vec![ratio(1, 1), ratio(1, 2), ratio(1, 2)]);

        let c = build_quiver(&cycle3());
        assert_eq!(c.edge_count(), 3);
        assert!(c.edges().iter().all(|e| e.weight == ratio(1, 1)));

        let u = build_quiver(&uniform(4));
        assert_eq!(u.edge_count(), 16);
        assert!(u.edges().iter().all(|e| e.weight == ratio(1, 4)));
    }

    #[test]
    fn no_sources_and_weight_sums() {
        for q in [build_quiver(&chain()), build_quiver(&cycle3()), build_quiver(&uniform(3))] {
            assert!(!q.has_sources());
        }
        let t = build_quiver(&tent(21));
        assert!(!t.has_sources());
        for v in 0..t.vertex_count() {
            let s: f64 = t.in_edges(v).iter().map(|&e| t.edges()[e].weight).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classification_examples() {
        let c = classify_vertices(&build_quiver(&cycle3()));
        assert!(c.sinks.is_clear());
        assert_eq!(c.regular.count_ones(..), 3);
        assert!(c.infinite_emitters.is_clear());

        let m = MarkovModel::from_rows(vec![vec![ratio(0, 1), ratio(0, 1)], vec![ratio(1, 1), ratio(1, 1)]]).unwrap();
        let c = classify_vertices(&build_quiver(&m));
        assert_eq!(c.sinks.ones().collect::<Vec<_>>(), vec![0]);
        assert_eq!(c.regular.ones().collect::<Vec<_>>(), vec![1]);

        let c = classify_vertices(&build_quiver(&tent(41)));
        assert!(c.sinks.is_clear());
    }

    #[test]
    fn reachability_examples() {
        let q = build_quiver(&chain());
        assert!(reachable(&q, 0, 1, 2));
        assert!(!reachable(&q, 1, 0, 3));
        assert_eq!(enumerate_paths(&q, 0, 1, 2).len(), 2);

        let c = build_quiver(&cycle3());
        assert!(reachable(&c, 0, 0, 3));
        assert!(!reachable(&c, 0, 0, 2));
        let loops = enumerate_paths(&c, 0, 0, 3);
        assert_eq!(loops.len(), 1);
        assert!(loops[0].is_loop());
    }

    #[test]
    fn path_validation() {
        let c = build_quiver(&cycle3());
        // edges sorted by (source, range): 0→1, 1→2, 2→0
        assert!(Path::new(&c, vec![0, 1, 2]).unwrap().is_loop());
        assert!(Path::new(&c, vec![0, 2]).is_err());
        assert!(Path::new(&c, vec![]).is_err());
    }

    #[test]
    fn loops_without_exit_examples() {
        let single = Quiver::<Rational>::from_pairs(1, &[(0, 0)]).unwrap();
        assert_eq!(loops_without_exit(&single, 1).ones().collect::<Vec<_>>(), vec![0]);

        let r = build_quiver(&reflection(11));
        let base: Vec<_> = loops_without_exit(&r, 11).ones().collect();
        assert_eq!(base, vec![5]);
        assert_eq!(r.vertices()[5], "0.5");

        assert!(loops_without_exit(&build_quiver(&uniform(3)), 3).is_clear());

        let c = build_quiver(&cycle3());
        assert!(loops_without_exit(&c, 2).is_clear());
        assert_eq!(loops_without_exit(&c, 3).count_ones(..), 3);
    }

    #[test]
    fn condition_l_examples() {
        match condition_l(&build_quiver(&cycle3())) {
            ConditionL::Fails { witness, .. } => assert_eq!(witness.len(), 3),
            other => panic!("expected failure, got {other:?}"),
        }
        assert_eq!(condition_l(&build_quiver(&uniform(4))), ConditionL::Holds);

        match condition_l_for_model(&reflection(11), 3) {
            ConditionL::CertifiedAtRefinements { levels } => {
                let grids: Vec<_> = levels.iter().map(|l| l.grid_points).collect();
                assert_eq!(grids, vec![11, 101, 1001]);
                assert!(levels.iter().all(|l| l.base_points == 1));
            }
            other => panic!("expected certificate, got {other:?}"),
        }

        // identity map: every grid point is an exitless loop, count grows with the grid
        let id = MarkovModel::map_system(
            SpaceSpec::grid(0.0, 1.0, 5, InteriorMode::Continuum),
            vec![MapSpec::Affine(AffineMap::new(1.0, 0.0))],
            None,
        )
        .unwrap();
        assert!(matches!(condition_l_for_model(&id, 3), ConditionL::Fails { .. }));
    }

    #[test]
    fn refinement_grid_sizes() {
        assert_eq!(refinement_grids(11, 3), vec![11, 101, 1001]);
        assert_eq!(refinement_grids(3, 2), vec![3, 21]);
    }

    #[test]
    fn cut_down_examples() {
        let q = build_quiver(&chain());
        let cut = cut_down(&q, &vertex_set(2, [1])).unwrap();
        assert_eq!(cut.vertices(), &["x1".to_string()]);
        assert_eq!(cut.edge_count(), 1);
        assert_eq!(cut.edges()[0].source, 0);

        assert_eq!(cut_down(&q, &FixedBitSet::with_capacity(2)).unwrap(), q);
        assert!(matches!(cut_down(&q, &vertex_set(2, [0])), Err(Error::Precondition(_))));

        let r = reflection(11);
        let rq = build_quiver(&r);
        let mut u = FixedBitSet::with_capacity(11);
        u.insert_range(..);
        u.set(3, false);
        u.set(7, false);
        let cut = cut_down(&rq, &u).unwrap();
        assert_eq!(cut.vertex_count(), 2);
        assert_eq!(cut.edge_count(), 4);
        let k = vertex_set(11, [3, 7]);
        assert!(cut.same_structure(&build_quiver(&r.restrict(&k).unwrap())));
    }

    #[test]
    fn isomorphism_detects_relabeling() {
        let a = Quiver::<Rational>::from_pairs(3, &[(0, 1), (1, 2), (2, 0), (0, 0)]).unwrap();
        let b = Quiver::<Rational>::from_pairs(3, &[(2, 0), (0, 1), (1, 2), (1, 1)]).unwrap();
        assert!(isomorphic(&a, &b));
        let c = Quiver::<Rational>::from_pairs(3, &[(0, 1), (1, 2), (2, 0), (0, 1)]).unwrap();
        assert!(!isomorphic(&a, &c));
    }

    #[test]
    fn dot_export_is_deterministic() {
        let dot = build_quiver(&chain()).to_dot("chain");
        assert_eq!(
            dot,
            "digraph chain {\n  n0 [label=\"x1\"];\n  n1 [label=\"x2\"];\n  n0 -> n0 [label=\"1\"];\n  n0 -> n1 [label=\"0.5\"];\n  n1 -> n1 [label=\"0.5\"];\n}\n"
        );
    }
}
