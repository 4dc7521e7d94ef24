//! Seeded random instances, brute-force oracles and the acceptance suite.
//!
//! Every oracle here works straight from the definitions on dense boolean
//! support matrices, independently of the graph algorithms it checks.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dual::{dual_quiver, k_theory_finite_graph, verify_dual_realization};
use crate::ifs::IfsSystem;
use crate::markov::{vertex_set, AffineMap, InteriorMode, Kernel, MapSpec, MarkovModel, SpaceSpec};
use crate::quiver::{build_quiver, reachable, ConditionL, Edge, Quiver};
use crate::scalar::{Rational, Scalar};
use crate::structure::{classify_subset, decide_simplicity, Verdict};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {} ({:.2}s{}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.limit.map(|l| format!(" / limit {}s", l.as_secs())).unwrap_or_default(),
            self.detail
        )
    }
}

pub const CRITERIA: [(usize, &str); 10] = [
    (1, "three-state patterns agree with the brute-force oracle"),
    (2, "saturated hereditary sets are complements of strongly absorbing sets"),
    (3, "reflection system on grids 11/101/1001"),
    (4, "uniform kernels on 2..8 states are simple"),
    (5, "dual quivers share K-theory and realize as Markov quivers"),
    (6, "psi isometry between weighted and uniform inner products"),
    (7, "path reachability equals positivity of support powers"),
    (8, "absorbing sets stay absorbing under kernel powers"),
    (9, "Hutchinson iterates converge to the Cantor attractor"),
    (10, "word fixed points: closed form against iteration"),
];

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, seed)).collect()
}

/// Run criterion `id` (1..=10); `None` for unknown ids.
pub fn run_criterion_checked(id: usize, seed: u64) -> Option<CriterionResult> {
    let &(_, name) = CRITERIA.iter().find(|(i, _)| *i == id)?;
    let start = Instant::now();
    // time limits in seconds; 0 means none
    let ((ok, detail), limit_secs) = match id {
        1 => (criterion_three_state(), 10),
        2 => (criterion_correspondence(seed), 30),
        3 => (criterion_reflection(), 60),
        4 => (criterion_uniform(), 0),
        5 => (criterion_dual(seed), 30),
        6 => (criterion_isometry(seed), 5),
        7 => (criterion_paths(seed), 0),
        8 => (criterion_absorbing_powers(seed), 0),
        9 => (criterion_hutchinson(), 5),
        10 => (criterion_word_fixed_points(), 0),
        _ => return None,
    };
    let limit = (limit_secs > 0).then(|| Duration::from_secs(limit_secs));
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    Some(CriterionResult {
        id,
        name,
        passed: ok && in_time,
        detail: if in_time {
            detail
        } else {
            format!("{detail}; exceeded time limit")
        },
        elapsed,
        limit,
    })
}

pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    run_criterion_checked(id, seed).unwrap_or_else(|| panic!("no acceptance criterion {id}"))
}

// ---------------------------------------------------------------------------
// generators

/// Kernel with the given support (`support[x][y]`), uniform over each column.
pub fn kernel_from_pattern(support: &[Vec<bool>]) -> MarkovModel<Rational> {
    let n = support.len();
    let columns = (0..n)
        .map(|y| {
            let rows: Vec<usize> = (0..n).filter(|&x| support[x][y]).collect();
            let w = Rational::new(1.into(), rows.len().into());
            rows.into_iter().map(|x| (x, w.clone())).collect()
        })
        .collect();
    MarkovModel::finite_kernel(
        (1..=n).map(|i| format!("x{i}")).collect(),
        Kernel::from_columns(n, columns).expect("columns are nonempty"),
    )
    .expect("valid kernel")
}

/// Random support with nonempty columns (and rows when `sink_free`), random
/// exact weights.
pub fn random_kernel(rng: &mut ChaCha8Rng, n: usize, sink_free: bool) -> MarkovModel<Rational> {
    let density = rng.random_range(0.15..0.7);
    let mut support = vec![vec![false; n]; n];
    for y in 0..n {
        for row in support.iter_mut() {
            row[y] = rng.random_bool(density);
        }
        if (0..n).all(|x| !support[x][y]) {
            support[rng.random_range(0..n)][y] = true;
        }
    }
    if sink_free {
        for row in support.iter_mut() {
            if row.iter().all(|&b| !b) {
                row[rng.random_range(0..n)] = true;
            }
        }
    }
    let columns = (0..n)
        .map(|y| {
            let rows: Vec<(usize, u32)> = (0..n)
                .filter(|&x| support[x][y])
                .map(|x| (x, rng.random_range(1..=6)))
                .collect();
            let total: u32 = rows.iter().map(|r| r.1).sum();
            rows.into_iter()
                .map(|(x, w)| (x, Rational::new(w.into(), total.into())))
                .collect()
        })
        .collect();
    MarkovModel::finite_kernel(
        (1..=n).map(|i| format!("x{i}")).collect(),
        Kernel::from_columns(n, columns).expect("valid columns"),
    )
    .expect("valid kernel")
}

/// Random multigraph on `n` vertices, each vertex with out-degree ≥ 1 (and
/// in-degree ≥ 1 when `source_free`), at most `max_parallel` parallel edges,
/// random exact weights.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, max_parallel: u32, source_free: bool) -> Quiver<Rational> {
    let mut mult = vec![vec![0u32; n]; n];
    for row in mult.iter_mut() {
        for m in row.iter_mut() {
            if rng.random_bool(0.35) {
                *m = rng.random_range(1..=max_parallel);
            }
        }
    }
    for v in 0..n {
        if mult[v].iter().all(|&m| m == 0) {
            mult[v][rng.random_range(0..n)] = 1;
        }
        if source_free && (0..n).all(|u| mult[u][v] == 0) {
            mult[rng.random_range(0..n)][v] = 1;
        }
    }
    let mut ends = Vec::new();
    for (v, row) in mult.iter().enumerate() {
        for (w, &m) in row.iter().enumerate() {
            ends.extend(std::iter::repeat_n((v, w), m as usize));
        }
    }
    let raw: Vec<u32> = ends.iter().map(|_| rng.random_range(1..=5)).collect();
    let mut totals = vec![0u32; n];
    for (i, &(_, w)) in ends.iter().enumerate() {
        totals[w] += raw[i];
    }
    let edges = ends
        .iter()
        .enumerate()
        .map(|(i, &(v, w))| Edge {
            label: format!("e{i}"),
            source: v,
            range: w,
            weight: Rational::new(raw[i].into(), totals[w].into()),
        })
        .collect();
    Quiver::new((0..n).map(|i| format!("v{i}")).collect(), edges, InteriorMode::Discrete).expect("valid quiver")
}

pub fn reflection_model(points: usize) -> MarkovModel<f64> {
    MarkovModel::map_system(
        SpaceSpec::grid(0.0, 1.0, points, InteriorMode::Continuum),
        vec![
            MapSpec::Affine(AffineMap::new(1.0, 0.0)),
            MapSpec::Affine(AffineMap::new(-1.0, 1.0)),
        ],
        None,
    )
    .expect("valid reflection model")
}

pub fn tent_ifs() -> IfsSystem<f64> {
    IfsSystem::new(
        vec![AffineMap::new(0.5, 0.0), AffineMap::new(-0.5, 1.0)],
        None,
        0.0,
        1.0,
    )
    .expect("valid tent system")
}

pub fn cantor_ifs() -> IfsSystem<f64> {
    IfsSystem::new(
        vec![AffineMap::new(1.0 / 3.0, 0.0), AffineMap::new(1.0 / 3.0, 2.0 / 3.0)],
        None,
        0.0,
        1.0,
    )
    .expect("valid Cantor system")
}

// ---------------------------------------------------------------------------
// oracles on dense support matrices, bit masks for subsets

fn support_matrix<S: Scalar>(k: &Kernel<S>) -> Vec<Vec<bool>> {
    let n = k.len();
    (0..n)
        .map(|x| (0..n).map(|y| k.entry(x, y).is_positive_tol()).collect())
        .collect()
}

fn oracle_hereditary(a: &[Vec<bool>], u: u32) -> bool {
    let n = a.len();
    (0..n).all(|x| u & (1 << x) == 0 || (0..n).all(|y| !a[x][y] || u & (1 << y) != 0))
}

fn oracle_saturated(a: &[Vec<bool>], u: u32) -> bool {
    let n = a.len();
    (0..n).all(|x| {
        let regular = a[x].iter().any(|&b| b);
        let into_u = (0..n).all(|y| !a[x][y] || u & (1 << y) != 0);
        u & (1 << x) != 0 || !regular || !into_u
    })
}

/// `B = {x : some y ∈ B with x → y}`.
fn oracle_strongly_absorbing(a: &[Vec<bool>], b: u32) -> bool {
    let n = a.len();
    (0..n).all(|x| {
        let pred = (0..n).any(|y| b & (1 << y) != 0 && a[x][y]);
        (b & (1 << x) != 0) == pred
    })
}

/// `p(B, y) = 1` for every `y ∈ B`, exactly.
fn oracle_absorbing(k: &Kernel<Rational>, b: u32) -> bool {
    let n = k.len();
    (0..n).filter(|y| b & (1 << y) != 0).all(|y| {
        let mass = (0..n)
            .filter(|x| b & (1 << x) != 0)
            .fold(Rational::zero(), |acc, x| acc + k.entry(x, y));
        mass.is_one()
    })
}

/// A cycle all of whose vertices have out-degree one, by enumerating simple cycles.
fn oracle_has_exitless_cycle(a: &[Vec<bool>]) -> bool {
    let n = a.len();
    let outdeg: Vec<usize> = a.iter().map(|r| r.iter().filter(|&&b| b).count()).collect();
    fn search(a: &[Vec<bool>], outdeg: &[usize], start: usize, v: usize, seen: &mut Vec<bool>) -> bool {
        if outdeg[v] != 1 {
            return false;
        }
        for w in 0..a.len() {
            if !a[v][w] {
                continue;
            }
            if w == start {
                return true;
            }
            if w > start && !seen[w] {
                seen[w] = true;
                if search(a, outdeg, start, w, seen) {
                    return true;
                }
                seen[w] = false;
            }
        }
        false
    }
    (0..n).any(|s| {
        let mut seen = vec![false; n];
        seen[s] = true;
        search(a, &outdeg, s, s, &mut seen)
    })
}

fn oracle_verdict(a: &[Vec<bool>]) -> &'static str {
    let n = a.len();
    let full = (1u32 << n) - 1;
    if oracle_has_exitless_cycle(a) {
        return "NotSimple";
    }
    let nontrivial = (1..full).any(|u| oracle_hereditary(a, u) && oracle_saturated(a, u));
    if nontrivial {
        "NotSimple"
    } else {
        "Simple"
    }
}

// ---------------------------------------------------------------------------
// criteria; each returns (passed, detail)

fn criterion_three_state() -> (bool, String) {
    let mut agree = 0;
    let mut total = 0;
    let mut first_bad = None;
    // each column is a nonempty subset of the three rows: 7³ patterns
    for code in 0..343u32 {
        let cols = [code % 7 + 1, (code / 7) % 7 + 1, code / 49 + 1];
        let support: Vec<Vec<bool>> = (0..3)
            .map(|x| (0..3).map(|y| cols[y] & (1 << x) != 0).collect())
            .collect();
        let model = kernel_from_pattern(&support);
        total += 1;
        let ours = match decide_simplicity(&model, 3) {
            Ok(r) => r.verdict.name(),
            Err(_) => "error",
        };
        if ours == oracle_verdict(&support) {
            agree += 1;
        } else if first_bad.is_none() {
            first_bad = Some(code);
        }
    }
    let detail = match first_bad {
        None => format!("{agree}/{total} patterns agree"),
        Some(c) => format!("{agree}/{total} patterns agree; first disagreement at pattern {c}"),
    };
    (agree == total && total == 343, detail)
}

fn criterion_correspondence(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0u64;
    let mut failures = 0u64;
    for _ in 0..500 {
        let n = rng.random_range(1..=5);
        let model = random_kernel(&mut rng, n, true);
        let k = model.kernel();
        let q = build_quiver(&model);
        let a = support_matrix(&k);
        let full = (1u32 << n) - 1;
        for u in 0..=full {
            let set = vertex_set(n, (0..n).filter(|i| u & (1 << i) != 0));
            let report = classify_subset(&q, &k, &set).expect("dimensions match");
            let oracle_lhs = oracle_hereditary(&a, u) && oracle_saturated(&a, u);
            let oracle_rhs = oracle_strongly_absorbing(&a, full & !u);
            let ours_lhs = report.hereditary && report.saturated;
            checked += 1;
            if oracle_lhs != oracle_rhs || ours_lhs != oracle_lhs || report.complement_strongly_absorbing != oracle_rhs {
                failures += 1;
            }
        }
    }
    (
        failures == 0,
        format!("{checked} subsets of 500 sink-free models, {failures} mismatches"),
    )
}

fn criterion_reflection() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [11usize, 101, 1001] {
        let report = match decide_simplicity(&reflection_model(n), 3) {
            Ok(r) => r,
            Err(e) => return (false, format!("grid {n}: {e}")),
        };
        let certified = matches!(report.condition_l, ConditionL::CertifiedAtRefinements { .. });
        let counts: Vec<usize> = report.condition_l.levels().iter().map(|l| l.base_points).collect();
        let ones = !counts.is_empty() && counts.iter().all(|&c| c == 1);
        let minimal = report.strongly_absorbing.minimal_count;
        let pairs_ok = report.strongly_absorbing.listed.iter().all(|s| {
            let labels: Vec<f64> = s.labels.iter().map(|l| l.parse().unwrap_or(f64::NAN)).collect();
            match labels.as_slice() {
                [h] => (h - 0.5).abs() < 1e-9,
                [a, b] => (a + b - 1.0).abs() < 1e-9,
                _ => false,
            }
        });
        let not_simple = matches!(report.verdict, Verdict::NotSimple(_));
        let good = certified && ones && minimal == n.div_ceil(2) && pairs_ok && not_simple;
        ok &= good;
        parts.push(format!(
            "grid {n}: {} counts {:?}, {} minimal sets, {}",
            report.condition_l.name(),
            counts,
            minimal,
            report.verdict.name()
        ));
    }
    (ok, parts.join("; "))
}

fn criterion_uniform() -> (bool, String) {
    let verdicts: Vec<&str> = (2..=8)
        .map(|n| {
            let model = MarkovModel::<Rational>::uniform(SpaceSpec::finite((0..n).map(|i| format!("u{i}"))))
                .expect("valid space");
            decide_simplicity(&model, 3).map(|r| r.verdict.name()).unwrap_or("error")
        })
        .collect();
    (
        verdicts.iter().all(|&v| v == "Simple"),
        format!("verdicts for n = 2..8: {}", verdicts.join(", ")),
    )
}

fn criterion_dual(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0005);
    let mut k_equal = 0;
    let mut realized = 0;
    let mut realizable = 0;
    let mut preserved = true;
    for i in 0..200 {
        let n = rng.random_range(2..=6);
        // half the instances are also source-free, so they have a realization
        let g = random_graph(&mut rng, n, 3, i % 2 == 0);
        let d = dual_quiver(&g).quiver;
        preserved &= !d.has_sinks() && (g.has_sources() || !d.has_sources());
        if let (Ok(a), Ok(b)) = (k_theory_finite_graph(&g), k_theory_finite_graph(&d)) {
            if a == b {
                k_equal += 1;
            }
        }
        if !g.has_sources() {
            realizable += 1;
            if verify_dual_realization(&g).unwrap_or(false) {
                realized += 1;
            }
        }
    }
    (
        k_equal == 200 && realized == realizable && preserved,
        format!(
            "K-theory equal on {k_equal}/200 graphs; realization holds on {realized}/{realizable} source-free graphs"
        ),
    )
}

fn criterion_isometry(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0006);
    let mut worst = 0.0f64;
    for system in [tent_ifs(), cantor_ifs()] {
        for t in 0..10 {
            let p: f64 = rng.random_range(0.05..0.95);
            match system.check_isometry(&[p, 1.0 - p], 100, 3, seed.wrapping_add(t)) {
                Ok(d) => worst = worst.max(d),
                Err(e) => return (false, e.to_string()),
            }
        }
    }
    (worst <= 1e-9, format!("max deviation {worst:.3e} (bound 1e-9)"))
}

/// Boolean matrix power of the support pattern.
fn pattern_power(a: &[Vec<bool>], m: usize) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut p: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    for _ in 0..m {
        p = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|k| p[i][k] && a[k][j])).collect())
            .collect();
    }
    p
}

fn criterion_paths(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0007);
    let mut checked = 0;
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let model = random_kernel(&mut rng, n, false);
        let k = model.kernel();
        let q = build_quiver(&model);
        let a = support_matrix(&k);
        for len in 1..=6 {
            let pat = pattern_power(&a, len);
            let kp = k.power(len);
            for v in 0..n {
                for w in 0..n {
                    checked += 1;
                    let path = reachable(&q, v, w, len);
                    if path != pat[v][w] || path != kp.entry(v, w).is_positive_tol() {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    (mismatches == 0, format!("{checked} (v, w, n) triples, {mismatches} mismatches"))
}

fn criterion_absorbing_powers(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0008);
    let mut absorbing = 0;
    let mut failures = 0;
    let mut agree = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let k = random_kernel(&mut rng, n, false).kernel();
        let powers: Vec<Kernel<Rational>> = (2..=5).map(|m| k.power(m)).collect();
        for b in 1u32..(1 << n) {
            let set = vertex_set(n, (0..n).filter(|i| b & (1 << i) != 0));
            let ours = k.is_absorbing(&set).expect("in range");
            agree &= ours == oracle_absorbing(&k, b);
            if ours {
                absorbing += 1;
                if !powers.iter().all(|p| oracle_absorbing(p, b)) {
                    failures += 1;
                }
            }
        }
    }
    (
        failures == 0 && agree,
        format!("{absorbing} absorbing sets, {failures} lost absorption under powers 2..5"),
    )
}

fn criterion_hutchinson() -> (bool, String) {
    let cantor = cantor_ifs();
    let sample = cantor.attractor(14);
    let trace = match cantor.hereditary_triviality_check(&[0.0], 10, &sample) {
        Ok(t) => t,
        Err(e) => return (false, e.to_string()),
    };
    let ok = trace
        .distances
        .iter()
        .enumerate()
        .all(|(i, d)| *d <= 3f64.powi(-(i as i32 + 1)) + sample.tolerance);
    let last = trace.distances.last().copied().unwrap_or(f64::NAN);
    (
        ok,
        format!(
            "d_1 = {:.3e}, d_10 = {last:.3e}, sampling tolerance {:.3e}",
            trace.distances[0], sample.tolerance
        ),
    )
}

fn criterion_word_fixed_points() -> (bool, String) {
    let mut worst_residual = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut words = 0;
    for system in [tent_ifs(), cantor_ifs()] {
        for len in 1..=8u32 {
            for code in 0..(1usize << len) {
                let word: Vec<usize> = (0..len).map(|i| (code >> i) & 1).collect();
                let x = system.word_fixed_point(&word).expect("valid word");
                let it = system.word_fixed_point_iterated(&word).expect("valid word");
                worst_residual = worst_residual.max(system.word_residual(&word, x).expect("valid word"));
                worst_gap = worst_gap.max((x - it).abs());
                words += 1;
            }
        }
    }
    (
        worst_residual <= 1e-12 && worst_gap <= 1e-10,
        format!("{words} words, max residual {worst_residual:.3e}, max closed-form/iteration gap {worst_gap:.3e}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_on_small_cases() {
        let cycle = vec![vec![false, true], vec![true, false]];
        assert!(oracle_has_exitless_cycle(&cycle));
        assert_eq!(oracle_verdict(&cycle), "NotSimple");
        let full = vec![vec![true; 2]; 2];
        assert_eq!(oracle_verdict(&full), "Simple");
        assert!(oracle_strongly_absorbing(&full, 0b11));
        assert!(!oracle_strongly_absorbing(&full, 0b01));
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_kernel(&mut ChaCha8Rng::seed_from_u64(7), 5, true);
        let b = random_kernel(&mut ChaCha8Rng::seed_from_u64(7), 5, true);
        assert_eq!(a, b);
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(3), 4, 3, true);
        assert!(!g.has_sinks() && !g.has_sources());
    }

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion_checked(11, 1).is_none());
    }
}
