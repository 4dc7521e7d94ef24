//! Hereditary and saturated vertex sets, strongly absorbing sets, and the
//! simplicity decision.

use std::collections::{HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::markov::{InteriorMode, Kernel, MarkovModel, VertexSet};
use crate::quiver::{build_quiver, condition_l_for_model, is_hereditary, refinement_grids, ConditionL, Path, Quiver};
use crate::scalar::Scalar;

/// Vertex limit for closure-generated lattice enumeration.
pub const LATTICE_LIMIT: usize = 20;
/// Vertex limit for brute-force enumeration over all subsets.
pub const BRUTE_FORCE_LIMIT: usize = 15;
/// Witness lists are truncated to this many sets.
pub const WITNESS_LIMIT: usize = 16;
/// Refinement levels used for continuum condition (L) unless overridden.
pub const DEFAULT_REFINEMENTS: usize = 3;

/// Flags of a vertex subset `U` and of its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetReport {
    pub members: Vec<usize>,
    pub labels: Vec<String>,
    pub hereditary: bool,
    pub saturated: bool,
    pub absorbing: bool,
    pub strongly_absorbing: bool,
    pub complement_absorbing: bool,
    pub complement_strongly_absorbing: bool,
}

/// Every regular `x` with `r(s⁻¹(x)) ⊆ U` lies in `U`.
pub fn is_saturated<S: Scalar>(q: &Quiver<S>, set: &VertexSet) -> bool {
    (0..q.vertex_count())
        .filter(|&x| !set.contains(x) && q.out_degree(x) > 0)
        .all(|x| !q.successors(x).all(|w| set.contains(w)))
}

fn complement(n: usize, set: &VertexSet) -> VertexSet {
    let mut c = FixedBitSet::with_capacity(n);
    c.insert_range(..);
    for i in set.ones().filter(|&i| i < n) {
        c.set(i, false);
    }
    c
}

pub fn classify_subset<S: Scalar>(q: &Quiver<S>, kernel: &Kernel<S>, set: &VertexSet) -> Result<SubsetReport> {
    let n = q.vertex_count();
    if kernel.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: kernel.len(),
        });
    }
    let mut set = set.clone();
    set.grow(n);
    let comp = complement(n, &set);
    Ok(SubsetReport {
        members: set.ones().collect(),
        labels: set.ones().map(|i| q.vertices()[i].clone()).collect(),
        hereditary: is_hereditary(q, &set),
        saturated: is_saturated(q, &set),
        absorbing: kernel.is_absorbing(&set)?,
        strongly_absorbing: kernel.is_strongly_absorbing(&set)?,
        complement_absorbing: kernel.is_absorbing(&comp)?,
        complement_strongly_absorbing: kernel.is_strongly_absorbing(&comp)?,
    })
}

/// Smallest saturated hereditary set containing `seed`.
pub fn saturated_hereditary_closure<S: Scalar>(q: &Quiver<S>, seed: &VertexSet) -> VertexSet {
    let n = q.vertex_count();
    let mut set = FixedBitSet::with_capacity(n);
    // remaining[x] = out-edges of x whose range is not yet in the set
    let mut remaining: Vec<usize> = (0..n).map(|x| q.out_degree(x)).collect();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for v in seed.ones().filter(|&v| v < n) {
        if !set.put(v) {
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &e in q.in_edges(v) {
            let x = q.edges()[e].source;
            remaining[x] -= 1;
            if remaining[x] == 0 && !set.put(x) {
                queue.push_back(x);
            }
        }
        for w in q.successors(v).collect::<Vec<_>>() {
            if !set.put(w) {
                queue.push_back(w);
            }
        }
    }
    set
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Grow the lattice by closures of one-vertex extensions (≤ 20 vertices).
    Closure,
    /// Check every subset (≤ 15 vertices).
    BruteForce,
}

struct MaskGraph {
    n: usize,
    succ: Vec<u64>,
}

impl MaskGraph {
    fn new<S: Scalar>(q: &Quiver<S>) -> Self {
        let n = q.vertex_count();
        let succ = (0..n)
            .map(|v| q.successors(v).fold(0u64, |m, w| m | (1 << w)))
            .collect();
        MaskGraph { n, succ }
    }

    fn closure(&self, mut mask: u64) -> u64 {
        loop {
            let mut next = mask;
            for v in 0..self.n {
                if next & (1 << v) != 0 {
                    next |= self.succ[v];
                } else if self.succ[v] != 0 && self.succ[v] & !next == 0 {
                    next |= 1 << v;
                }
            }
            if next == mask {
                return mask;
            }
            mask = next;
        }
    }
}

fn mask_to_set(n: usize, mask: u64) -> VertexSet {
    let mut set = FixedBitSet::with_capacity(n);
    for i in (0..n).filter(|i| mask & (1 << i) != 0) {
        set.insert(i);
    }
    set
}

fn sort_sets(sets: &mut [VertexSet]) {
    sets.sort_by(|a, b| {
        a.count_ones(..)
            .cmp(&b.count_ones(..))
            .then_with(|| a.ones().cmp(b.ones()))
    });
}

/// All saturated hereditary subsets, sorted by size then members.
pub fn enumerate_saturated_hereditary<S: Scalar>(q: &Quiver<S>, mode: EnumerationMode) -> Result<Vec<VertexSet>> {
    let n = q.vertex_count();
    let limit = match mode {
        EnumerationMode::Closure => LATTICE_LIMIT,
        EnumerationMode::BruteForce => BRUTE_FORCE_LIMIT,
    };
    if n > limit {
        return Err(Error::Capacity {
            what: "vertex count",
            got: n,
            limit,
        });
    }
    let mut sets: Vec<VertexSet> = match mode {
        EnumerationMode::Closure => {
            let g = MaskGraph::new(q);
            let bottom = g.closure(0);
            let mut seen: HashSet<u64> = HashSet::from([bottom]);
            let mut queue = VecDeque::from([bottom]);
            while let Some(m) = queue.pop_front() {
                for v in (0..n).filter(|v| m & (1 << v) == 0) {
                    let c = g.closure(m | (1 << v));
                    if seen.insert(c) {
                        queue.push_back(c);
                    }
                }
            }
            seen.into_iter().map(|m| mask_to_set(n, m)).collect()
        }
        EnumerationMode::BruteForce => (0..(1u64 << n))
            .map(|m| mask_to_set(n, m))
            .filter(|s| is_hereditary(q, s) && is_saturated(q, s))
            .collect(),
    };
    sort_sets(&mut sets);
    Ok(sets)
}

/// Minimal nonempty saturated hereditary sets: the minimal closures of single vertices.
pub fn minimal_saturated_hereditary<S: Scalar>(q: &Quiver<S>) -> Vec<VertexSet> {
    let n = q.vertex_count();
    let mut closures: Vec<VertexSet> = Vec::new();
    for v in 0..n {
        let c = saturated_hereditary_closure(q, &crate::markov::vertex_set(n, [v]));
        if !closures.contains(&c) {
            closures.push(c);
        }
    }
    let mut minimal: Vec<VertexSet> = closures
        .iter()
        .filter(|c| !closures.iter().any(|d| d != *c && d.is_subset(c)))
        .cloned()
        .collect();
    sort_sets(&mut minimal);
    minimal
}

/// Strongly connected components of the support digraph.
fn sccs<S: Scalar>(q: &Quiver<S>) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(q.vertex_count(), q.edge_count());
    let nodes: Vec<_> = (0..q.vertex_count()).map(|_| g.add_node(())).collect();
    for e in q.edges() {
        g.add_edge(nodes[e.source], nodes[e.range], ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    comps
}

/// Vertices with a path into `targets` (including `targets`).
fn ancestors<S: Scalar>(q: &Quiver<S>, targets: &[usize]) -> VertexSet {
    let mut set = FixedBitSet::with_capacity(q.vertex_count());
    let mut queue: VecDeque<usize> = targets.iter().copied().collect();
    for &t in targets {
        set.insert(t);
    }
    while let Some(v) = queue.pop_front() {
        for &e in q.in_edges(v) {
            let x = q.edges()[e].source;
            if !set.put(x) {
                queue.push_back(x);
            }
        }
    }
    set
}

/// Minimal nonempty sets `B` with `B = s(r⁻¹(B))`.
///
/// Such a set is closed under predecessors and every member has a successor
/// inside it, so it contains a cycle; the minimal ones are the ancestor sets
/// of cyclic components that no other cyclic component reaches.
pub fn minimal_strongly_absorbing<S: Scalar>(q: &Quiver<S>) -> Vec<VertexSet> {
    let comps = sccs(q);
    let cyclic: Vec<&Vec<usize>> = comps
        .iter()
        .filter(|c| c.len() > 1 || q.successors(c[0]).any(|w| w == c[0]))
        .collect();
    let mut out = Vec::new();
    for c in &cyclic {
        let anc = ancestors(q, c);
        let upstream = cyclic.iter().any(|d| d[0] != c[0] && anc.contains(d[0]));
        if !upstream {
            out.push(anc);
        }
    }
    sort_sets(&mut out);
    out
}

/// All strongly absorbing sets (including `∅`), as unions of the minimal ones.
pub fn enumerate_strongly_absorbing<S: Scalar>(q: &Quiver<S>) -> Result<Vec<VertexSet>> {
    let n = q.vertex_count();
    if n > LATTICE_LIMIT {
        return Err(Error::Capacity {
            what: "vertex count",
            got: n,
            limit: LATTICE_LIMIT,
        });
    }
    // Every strongly absorbing set is a union of ancestor sets of cyclic components.
    let comps = sccs(q);
    let generators: Vec<u64> = comps
        .iter()
        .filter(|c| c.len() > 1 || q.successors(c[0]).any(|w| w == c[0]))
        .map(|c| ancestors(q, c).ones().fold(0u64, |m, i| m | (1 << i)))
        .collect();
    let mut seen: HashSet<u64> = HashSet::from([0]);
    let mut queue = VecDeque::from([0u64]);
    while let Some(m) = queue.pop_front() {
        for g in &generators {
            let u = m | g;
            if seen.insert(u) {
                queue.push_back(u);
            }
        }
    }
    let mut sets: Vec<VertexSet> = seen.into_iter().map(|m| mask_to_set(n, m)).collect();
    sort_sets(&mut sets);
    Ok(sets)
}

/// Communicating classes of the support digraph (`x → y` iff `p({x}, y) > 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunicatingClasses {
    pub classes: Vec<Vec<usize>>,
    pub irreducible: bool,
}

pub fn communicating_classes<S: Scalar>(model: &MarkovModel<S>) -> CommunicatingClasses {
    quiver_classes(&build_quiver(model))
}

/// Strongly connected components of a quiver, ordered by smallest member.
pub fn quiver_classes<S: Scalar>(q: &Quiver<S>) -> CommunicatingClasses {
    let classes = sccs(q);
    CommunicatingClasses {
        irreducible: classes.len() == 1,
        classes,
    }
}

/// A family of nontrivial vertex sets: exact counts plus a truncated listing.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFamily {
    /// Number of nontrivial members (`∅` and `E⁰` excluded); `None` when the
    /// lattice was too large to enumerate.
    pub total: Option<u64>,
    /// Number of minimal nonempty proper members.
    pub minimal_count: usize,
    /// At most [`WITNESS_LIMIT`] minimal members.
    pub listed: Vec<SubsetReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    NoExitCycle { path: Path, labels: Vec<String> },
    Subset(SubsetReport),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Simple,
    NotSimple(Witness),
    Inconclusive(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Simple => "Simple",
            Verdict::NotSimple(_) => "NotSimple",
            Verdict::Inconclusive(_) => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicityReport {
    pub vertices: Vec<String>,
    pub condition_l: ConditionL,
    pub saturated_hereditary: SetFamily,
    pub strongly_absorbing: SetFamily,
    pub classes: CommunicatingClasses,
    pub verdict: Verdict,
    /// Set when continuum heuristics were used.
    pub approximation: Option<String>,
    pub notes: Vec<String>,
}

fn is_proper(n: usize, s: &VertexSet) -> bool {
    let c = s.count_ones(..);
    c > 0 && c < n
}

/// Simplicity of the quiver algebra of `model`: condition (L) together with
/// triviality of the saturated hereditary lattice.
pub fn decide_simplicity<S: Scalar>(model: &MarkovModel<S>, refinements: usize) -> Result<SimplicityReport> {
    let q = build_quiver(model);
    let kernel = model.kernel();
    let n = q.vertex_count();
    let cond = condition_l_for_model(model, refinements);

    let report = |s: &VertexSet| classify_subset(&q, &kernel, s);

    let min_sh: Vec<VertexSet> = minimal_saturated_hereditary(&q)
        .into_iter()
        .filter(|s| is_proper(n, s))
        .collect();
    let sh_total = if n <= LATTICE_LIMIT {
        let all = enumerate_saturated_hereditary(&q, EnumerationMode::Closure)?;
        Some(all.iter().filter(|s| is_proper(n, s)).count() as u64)
    } else {
        None
    };
    let saturated_hereditary = SetFamily {
        total: sh_total,
        minimal_count: min_sh.len(),
        listed: min_sh.iter().take(WITNESS_LIMIT).map(report).collect::<Result<_>>()?,
    };

    let min_sa: Vec<VertexSet> = minimal_strongly_absorbing(&q)
        .into_iter()
        .filter(|s| is_proper(n, s))
        .collect();
    let sa_total = if n <= LATTICE_LIMIT {
        let all = enumerate_strongly_absorbing(&q)?;
        Some(all.iter().filter(|s| is_proper(n, s)).count() as u64)
    } else {
        None
    };
    let strongly_absorbing = SetFamily {
        total: sa_total,
        minimal_count: min_sa.len(),
        listed: min_sa.iter().take(WITNESS_LIMIT).map(report).collect::<Result<_>>()?,
    };

    let continuum = model.interior_mode() == InteriorMode::Continuum;
    let verdict = match &cond {
        ConditionL::Fails {
            witness,
            witness_labels,
            levels,
        } => {
            if continuum && density_shrinks(levels) {
                Verdict::Inconclusive(
                    "exitless base points grow with the grid but their density shrinks; empty interior cannot be decided"
                        .into(),
                )
            } else {
                Verdict::NotSimple(Witness::NoExitCycle {
                    path: witness.clone(),
                    labels: witness_labels.clone(),
                })
            }
        }
        _ => match min_sh.first() {
            Some(s) => Verdict::NotSimple(Witness::Subset(report(s)?)),
            None => Verdict::Simple,
        },
    };

    let mut notes = Vec::new();
    if matches!(model.view(), crate::markov::ModelView::Uniform { .. }) {
        notes.push(
            "finite uniform kernel: every vertex is regular; the infinite-emitter behaviour of the continuum uniform kernel is not modeled"
                .to_string(),
        );
    }
    if q.has_sinks() {
        notes.push(
            "quiver has sinks: sinks never belong to strongly absorbing sets, so complements of saturated hereditary sets need not be strongly absorbing"
                .to_string(),
        );
    }
    let approximation = continuum.then(|| {
        let grids: Vec<String> = refinement_grids(n, refinements.max(DEFAULT_REFINEMENTS))
            .iter()
            .map(|g| g.to_string())
            .collect();
        format!(
            "interval discretized on {} grid points (map images snapped to the nearest point, ties down); condition (L) judged from exitless base-point counts at grids [{}], a certificate rather than a proof",
            n,
            grids.join(", ")
        )
    });

    Ok(SimplicityReport {
        vertices: q.vertices().to_vec(),
        condition_l: cond,
        saturated_hereditary,
        strongly_absorbing,
        classes: communicating_classes(model),
        verdict,
        approximation,
        notes,
    })
}

fn density_shrinks(levels: &[crate::quiver::RefinementLevel]) -> bool {
    match (levels.first(), levels.last()) {
        (Some(a), Some(b)) if a.base_points > 0 => {
            let da = a.base_points as f64 / a.grid_points as f64;
            let db = b.base_points as f64 / b.grid_points as f64;
            db < 0.5 * da
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{vertex_set, AffineMap, MapSpec, SpaceSpec};
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

    fn uniform(n: usize) -> MarkovModel<Rational> {
        MarkovModel::uniform(SpaceSpec::finite((0..n).map(|i| format!("u{i}")))).unwrap()
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

    fn members(sets: &[VertexSet]) -> Vec<Vec<usize>> {
        sets.iter().map(|s| s.ones().collect()).collect()
    }

    #[test]
    fn classify_subset_examples() {
        let p = chain();
        let q = build_quiver(&p);
        let k = p.kernel();
        let r = classify_subset(&q, &k, &vertex_set(2, [1])).unwrap();
        assert!(r.hereditary && r.saturated);
        assert!(r.complement_strongly_absorbing && r.complement_absorbing);

        for s in [FixedBitSet::with_capacity(2), vertex_set(2, [0, 1])] {
            let r = classify_subset(&q, &k, &s).unwrap();
            assert!(r.hereditary && r.saturated);
        }

        let m = reflection(11);
        let q = build_quiver(&m);
        let mut u = FixedBitSet::with_capacity(11);
        u.insert_range(..);
        u.set(3, false);
        u.set(7, false);
        let r = classify_subset(&q, &m.kernel(), &u).unwrap();
        assert!(r.hereditary && r.saturated && r.complement_strongly_absorbing);
    }

    #[test]
    fn closure_examples() {
        let c = build_quiver(&cycle3());
        assert_eq!(saturated_hereditary_closure(&c, &vertex_set(3, [0])).count_ones(..), 3);
        assert!(saturated_hereditary_closure(&c, &FixedBitSet::with_capacity(3)).is_clear());
        let q = build_quiver(&chain());
        assert_eq!(
            saturated_hereditary_closure(&q, &vertex_set(2, [1])).ones().collect::<Vec<_>>(),
            vec![1]
        );
    }

    #[test]
    fn enumeration_examples() {
        for mode in [EnumerationMode::Closure, EnumerationMode::BruteForce] {
            let u = enumerate_saturated_hereditary(&build_quiver(&uniform(4)), mode).unwrap();
            assert_eq!(members(&u), vec![vec![], vec![0, 1, 2, 3]]);
            let c = enumerate_saturated_hereditary(&build_quiver(&chain()), mode).unwrap();
            assert_eq!(members(&c), vec![vec![], vec![1], vec![0, 1]]);
            let t = enumerate_saturated_hereditary(&build_quiver(&cycle3()), mode).unwrap();
            assert_eq!(members(&t), vec![vec![], vec![0, 1, 2]]);
        }
        let big = Quiver::<Rational>::from_pairs(21, &[]).unwrap();
        assert!(matches!(
            enumerate_saturated_hereditary(&big, EnumerationMode::Closure),
            Err(Error::Capacity { limit: 20, .. })
        ));
        let mid = Quiver::<Rational>::from_pairs(16, &[]).unwrap();
        assert!(enumerate_saturated_hereditary(&mid, EnumerationMode::BruteForce).is_err());
    }

    #[test]
    fn simplicity_examples() {
        for n in 2..6 {
            assert_eq!(decide_simplicity(&uniform(n), 3).unwrap().verdict, Verdict::Simple);
        }
        let r = decide_simplicity(&reflection(11), 3).unwrap();
        assert!(matches!(r.verdict, Verdict::NotSimple(Witness::Subset(_))));
        assert_eq!(r.strongly_absorbing.minimal_count, 6);
        assert!(r.strongly_absorbing.listed.iter().any(|s| s.labels == ["0.3", "0.7"]));
        assert!(r.approximation.is_some());

        let c = decide_simplicity(&cycle3(), 3).unwrap();
        assert!(matches!(c.verdict, Verdict::NotSimple(Witness::NoExitCycle { .. })));
    }

    #[test]
    fn communicating_class_examples() {
        let c = communicating_classes(&cycle3());
        assert!(c.irreducible);
        let p = communicating_classes(&chain());
        assert_eq!(p.classes, vec![vec![0], vec![1]]);
        assert!(!p.irreducible);
        assert!(communicating_classes(&uniform(4)).irreducible);
    }

    #[test]
    fn strongly_absorbing_enumeration_matches_definition() {
        let q = build_quiver(&reflection(7));
        let k = reflection(7).kernel();
        let listed = enumerate_strongly_absorbing(&q).unwrap();
        let brute: Vec<VertexSet> = (0..(1u64 << 7))
            .map(|m| mask_to_set(7, m))
            .filter(|s| k.is_strongly_absorbing(s).unwrap())
            .collect();
        let mut brute = brute;
        sort_sets(&mut brute);
        assert_eq!(listed, brute);
    }
}
