//! Text and JSON reports for each command.
//!
//! JSON objects use stable snake_case keys; `serde_json` orders them
//! alphabetically, so identical inputs give byte-identical output.

use std::fmt::Write as _;

use mql_core::dual::{dual_quiver, k_theory_finite_graph, verify_dual_realization, KTheoryInvariant};
use mql_core::ifs::{IfsSystem, MAP_TOLERANCE};
use mql_core::quiver::{classify_vertices, condition_l, condition_l_for_model, ConditionL};
use mql_core::selftest::CriterionResult;
use mql_core::structure::{
    communicating_classes, quiver_classes, CommunicatingClasses, SetFamily, SimplicityReport, SubsetReport, Verdict,
    Witness,
};
use mql_core::{build_quiver, InteriorMode, MarkovModel, Quiver, Result, Scalar, VertexSet};
use serde_json::{json, Value};

/// A finished report plus files to write next to it.
pub struct Report {
    pub json: Value,
    pub text: String,
    pub artifacts: Vec<Artifact>,
}

pub struct Artifact {
    pub name: String,
    pub contents: String,
    pub kind: ArtifactKind,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Dot,
    Csv,
}

fn labels(set: &VertexSet, vertices: &[String]) -> Vec<String> {
    set.ones().map(|i| vertices[i].clone()).collect()
}

fn brace(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn condition_json(c: &ConditionL) -> Value {
    let witness = match c {
        ConditionL::Fails { witness_labels, .. } => json!(witness_labels),
        _ => Value::Null,
    };
    json!({
        "verdict": c.name(),
        "satisfied": c.is_satisfied(),
        "levels": c.levels().iter().map(|l| json!({
            "grid_points": l.grid_points,
            "base_points": l.base_points,
        })).collect::<Vec<_>>(),
        "witness": witness,
    })
}

fn condition_text(out: &mut String, c: &ConditionL) {
    let _ = writeln!(out, "condition (L): {}", c.name());
    for l in c.levels() {
        let _ = writeln!(
            out,
            "  grid {:>8}: {} base point(s) of loops without exit",
            l.grid_points, l.base_points
        );
    }
    if let ConditionL::Fails { witness_labels, .. } = c {
        let _ = writeln!(out, "  loop without exit through {}", witness_labels.join(" -> "));
    }
}

fn classes_json(c: &CommunicatingClasses, vertices: &[String]) -> Value {
    json!(c
        .classes
        .iter()
        .map(|cl| cl.iter().map(|&i| vertices[i].clone()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn classes_text(out: &mut String, c: &CommunicatingClasses, vertices: &[String]) {
    let _ = writeln!(
        out,
        "communicating classes: {} ({})",
        c.classes.len(),
        if c.irreducible { "irreducible" } else { "reducible" }
    );
    for cl in c.classes.iter().take(16) {
        let names: Vec<String> = cl.iter().map(|&i| vertices[i].clone()).collect();
        let _ = writeln!(out, "  {}", brace(&names));
    }
    if c.classes.len() > 16 {
        let _ = writeln!(out, "  ... {} more", c.classes.len() - 16);
    }
}

fn quiver_json<S: Scalar>(q: &Quiver<S>) -> Value {
    let vertices = q.vertices();
    json!({
        "vertices": q.vertex_count(),
        "edges": q.edge_count(),
        "sinks": labels(&q.sinks(), vertices),
        "sources": labels(&q.sources(), vertices),
    })
}

fn model_json<S: Scalar>(m: &MarkovModel<S>) -> Value {
    json!({
        "kind": m.kind_name(),
        "states": m.len(),
        "interior_mode": match m.interior_mode() {
            InteriorMode::Discrete => "discrete",
            InteriorMode::Continuum => "continuum",
        },
    })
}

fn dot_artifact<S: Scalar>(name: &str, q: &Quiver<S>) -> Artifact {
    Artifact {
        name: format!("{name}.dot"),
        contents: q.to_dot(name),
        kind: ArtifactKind::Dot,
    }
}

/// Quiver summary, vertex classification and condition (L).
pub fn analyze<S: Scalar>(model: Option<&MarkovModel<S>>, q: &Quiver<S>, refinements: usize) -> Report {
    let (cond, classes) = match model {
        Some(m) => (condition_l_for_model(m, refinements), communicating_classes(m)),
        None => (condition_l(q), quiver_classes(q)),
    };
    let vertices = q.vertices();
    let cls = classify_vertices(q);
    let continuum = q.interior_mode() == InteriorMode::Continuum;
    let approximation = continuum.then(|| {
        format!(
            "interval discretized on {} grid points; condition (L) judged from base-point counts over grid refinements, a certificate rather than a proof",
            q.vertex_count()
        )
    });
    let json = json!({
        "command": "analyze",
        "model": model.map(model_json).unwrap_or_else(|| json!({"kind": "quiver", "states": q.vertex_count(), "interior_mode": "discrete"})),
        "quiver": quiver_json(q),
        "classification": {
            "sinks": labels(&cls.sinks, vertices),
            "finite_emitters": labels(&cls.finite_emitters, vertices),
            "regular": labels(&cls.regular, vertices),
            "infinite_emitters": labels(&cls.infinite_emitters, vertices),
        },
        "condition_l": condition_json(&cond),
        "classes": classes_json(&classes, vertices),
        "irreducible": classes.irreducible,
        "approximation": approximation,
    });

    let mut text = String::new();
    let kind = model.map(|m| m.kind_name()).unwrap_or("quiver");
    let _ = writeln!(text, "model: {kind}, {} states", q.vertex_count());
    let _ = writeln!(
        text,
        "quiver: {} vertices, {} edges, {} sinks, {} sources",
        q.vertex_count(),
        q.edge_count(),
        cls.sinks.count_ones(..),
        q.sources().count_ones(..)
    );
    let _ = writeln!(
        text,
        "vertex classes: {} sinks, {} finite emitters, {} regular, {} infinite emitters",
        cls.sinks.count_ones(..),
        cls.finite_emitters.count_ones(..),
        cls.regular.count_ones(..),
        cls.infinite_emitters.count_ones(..)
    );
    condition_text(&mut text, &cond);
    classes_text(&mut text, &classes, vertices);
    if let Some(a) = json["approximation"].as_str() {
        let _ = writeln!(text, "approximation: {a}");
    }
    Report {
        json,
        text,
        artifacts: vec![dot_artifact("quiver", q)],
    }
}

fn subset_json(s: &SubsetReport) -> Value {
    json!({
        "members": s.labels,
        "hereditary": s.hereditary,
        "saturated": s.saturated,
        "absorbing": s.absorbing,
        "strongly_absorbing": s.strongly_absorbing,
        "complement_absorbing": s.complement_absorbing,
        "complement_strongly_absorbing": s.complement_strongly_absorbing,
    })
}

fn family_json(f: &SetFamily) -> Value {
    json!({
        "total": f.total,
        "minimal_count": f.minimal_count,
        "listed": f.listed.iter().map(subset_json).collect::<Vec<_>>(),
    })
}

fn family_text(out: &mut String, title: &str, f: &SetFamily) {
    let total = f.total.map(|t| t.to_string()).unwrap_or_else(|| "not enumerated".into());
    let _ = writeln!(
        out,
        "{title}: {} minimal, {total} nontrivial in total, {} listed",
        f.minimal_count,
        f.listed.len()
    );
    for s in &f.listed {
        let _ = writeln!(out, "  {}", brace(&s.labels));
    }
}

pub fn simplicity<S: Scalar>(model: &MarkovModel<S>, r: &SimplicityReport) -> Report {
    let witnesses: Vec<Value> = match &r.verdict {
        Verdict::NotSimple(Witness::NoExitCycle { labels, .. }) => {
            vec![json!({"type": "loop_without_exit", "members": labels})]
        }
        Verdict::NotSimple(Witness::Subset(s)) => {
            let mut w = subset_json(s);
            w["type"] = json!("saturated_hereditary");
            vec![w]
        }
        _ => Vec::new(),
    };
    let reason = match &r.verdict {
        Verdict::Inconclusive(why) => json!(why),
        _ => Value::Null,
    };
    let json = json!({
        "command": "simplicity",
        "model": model_json(model),
        "verdict": r.verdict.name(),
        "reason": reason,
        "witnesses": witnesses,
        "condition_l": condition_json(&r.condition_l),
        "saturated_hereditary": family_json(&r.saturated_hereditary),
        "strongly_absorbing": family_json(&r.strongly_absorbing),
        "classes": classes_json(&r.classes, &r.vertices),
        "irreducible": r.classes.irreducible,
        "approximation": r.approximation,
        "notes": r.notes,
    });

    let mut text = String::new();
    let _ = writeln!(text, "model: {}, {} states", model.kind_name(), model.len());
    let _ = writeln!(text, "verdict: {}", r.verdict.name());
    match &r.verdict {
        Verdict::NotSimple(Witness::NoExitCycle { labels, .. }) => {
            let _ = writeln!(text, "witness: loop without exit through {}", labels.join(" -> "));
        }
        Verdict::NotSimple(Witness::Subset(s)) => {
            let _ = writeln!(
                text,
                "witness: saturated hereditary set {} (complement strongly absorbing: {})",
                brace(&s.labels),
                if s.complement_strongly_absorbing { "yes" } else { "no" }
            );
        }
        Verdict::Inconclusive(why) => {
            let _ = writeln!(text, "reason: {why}");
        }
        Verdict::Simple => {}
    }
    condition_text(&mut text, &r.condition_l);
    family_text(&mut text, "saturated hereditary sets", &r.saturated_hereditary);
    family_text(&mut text, "strongly absorbing sets", &r.strongly_absorbing);
    classes_text(&mut text, &r.classes, &r.vertices);
    if let Some(a) = &r.approximation {
        let _ = writeln!(text, "approximation: {a}");
    }
    for n in &r.notes {
        let _ = writeln!(text, "note: {n}");
    }
    Report {
        json,
        text,
        artifacts: vec![dot_artifact("quiver", &build_quiver(model))],
    }
}

fn k_json(k: &std::result::Result<KTheoryInvariant, String>) -> Value {
    match k {
        Ok(k) => json!({
            "free_rank_k0": k.free_rank_k0,
            "torsion_k0": k.torsion_k0.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "rank_k1": k.rank_k1,
            "display": k.to_string(),
        }),
        Err(e) => json!({ "error": e }),
    }
}

/// Dual quiver, realization check and K-theory of both sides.
pub fn dual<S: Scalar>(q: &Quiver<S>) -> Report {
    let d = dual_quiver(q).quiver;
    let realization: Result<bool> = verify_dual_realization(q);
    let k_base = k_theory_finite_graph(q).map_err(|e| e.to_string());
    let k_dual = k_theory_finite_graph(&d).map_err(|e| e.to_string());
    let equal = match (&k_base, &k_dual) {
        (Ok(a), Ok(b)) => Some(a == b),
        _ => None,
    };
    let dv = d.vertices();
    let json = json!({
        "command": "dual",
        "base": quiver_json(q),
        "dual": {
            "vertices": d.vertex_count(),
            "edges": d.edge_count(),
            "sinks": labels(&d.sinks(), dv),
            "sources": labels(&d.sources(), dv),
            "edge_list": d.edges().iter().map(|e| json!({
                "label": e.label,
                "source": dv[e.source],
                "range": dv[e.range],
                "weight": e.weight.label(),
            })).collect::<Vec<_>>(),
        },
        "realization": match &realization {
            Ok(b) => json!({ "holds": b, "error": null }),
            Err(e) => json!({ "holds": null, "error": e.to_string() }),
        },
        "k_theory": {
            "base": k_json(&k_base),
            "dual": k_json(&k_dual),
            "equal": equal,
        },
    });

    let mut text = String::new();
    let _ = writeln!(text, "base quiver: {} vertices, {} edges", q.vertex_count(), q.edge_count());
    let _ = writeln!(text, "dual quiver: {} vertices, {} edges", d.vertex_count(), d.edge_count());
    let _ = match &realization {
        Ok(b) => writeln!(
            text,
            "realization by a Markov operator: {}",
            if *b { "holds" } else { "fails" }
        ),
        Err(e) => writeln!(text, "realization by a Markov operator: not applicable ({e})"),
    };
    for (side, k) in [("base", &k_base), ("dual", &k_dual)] {
        let _ = match k {
            Ok(k) => writeln!(text, "K-theory ({side}): {k}"),
            Err(e) => writeln!(text, "K-theory ({side}): not applicable ({e})"),
        };
    }
    if let Some(eq) = equal {
        let _ = writeln!(text, "K-theory equal: {}", if eq { "yes" } else { "no" });
    }
    Report {
        json,
        text,
        artifacts: vec![dot_artifact("quiver", q), dot_artifact("dual", &d)],
    }
}

pub struct IfsOptions {
    pub depth: usize,
    pub maxlen: usize,
    pub grid: usize,
    pub seed: u64,
}

/// Attractor, branch points, ψ isometry, word fixed points and Hutchinson convergence.
pub fn ifs(system: &IfsSystem<f64>, opts: &IfsOptions) -> Result<Report> {
    let (lower, upper) = system.interval();
    let sample = system.attractor(opts.depth);
    let residual = system.invariance_residual(&sample);
    let grid: Vec<f64> = (0..opts.grid)
        .map(|i| lower + (upper - lower) * i as f64 / (opts.grid - 1) as f64)
        .collect();
    let branch = system.branch_points(&grid, MAP_TOLERANCE);
    let class = system.classify(opts.grid);
    let deviation = system.check_isometry(system.weights(), 100, 10, opts.seed)?;
    let cert = system.condition_l_certificate(opts.maxlen, opts.grid)?;
    let trace = system.hereditary_triviality_check(&[lower], 10, &sample)?;

    let json = json!({
        "command": "ifs",
        "maps": system.len(),
        "weights": system.weights(),
        "interval": [lower, upper],
        "contraction_factor": system.contraction_factor(),
        "covers_interval": system.covers_interval(),
        "class": class.name(),
        "attractor": {
            "depth": sample.depth,
            "points": sample.points.len(),
            "tolerance": sample.tolerance,
            "invariance_residual": residual,
        },
        "branch_points": branch,
        "isometry": {
            "max_deviation": deviation,
            "bound": 1e-9,
            "seed": opts.seed,
            "within_bound": deviation <= 1e-9,
        },
        "certificate": {
            "maxlen": opts.maxlen,
            "counts": cert.counts,
            "bound": cert.bound,
            "verdict": if cert.holds { "Holds" } else { "Fails" },
            "note": "fixed points of words are finitely many per length; evidence for empty interior, not a proof",
        },
        "hutchinson": {
            "k0": [lower],
            "initial": trace.initial,
            "distances": trace.distances,
            "bounds": trace.bounds,
            "tolerance": trace.tolerance,
            "within_bounds": trace.within_bounds(),
        },
    });

    let mut text = String::new();
    let _ = writeln!(
        text,
        "IFS: {} affine maps on [{lower}, {upper}], contraction factor {}",
        system.len(),
        system.contraction_factor()
    );
    let _ = writeln!(text, "class: {}", class.name());
    let _ = writeln!(
        text,
        "attractor: depth {}, {} points, tolerance {:.3e}, invariance residual {:.3e}",
        sample.depth,
        sample.points.len(),
        sample.tolerance,
        residual
    );
    let shown: Vec<String> = branch.iter().take(16).map(|x| x.to_string()).collect();
    let _ = writeln!(text, "branch points: {} {}", branch.len(), brace(&shown));
    let _ = writeln!(text, "psi isometry: max deviation {deviation:.3e} (bound 1e-9)");
    let _ = writeln!(
        text,
        "condition (L) certificate: {} (distinct word fixed points {:?}, bound {})",
        if cert.holds { "Holds" } else { "Fails" },
        cert.counts,
        cert.bound
    );
    let _ = writeln!(text, "Hutchinson convergence from K0 = {{{lower}}}:");
    for (n, (d, b)) in trace.distances.iter().zip(&trace.bounds).enumerate() {
        let _ = writeln!(text, "  n = {:>2}: d_H = {d:.3e} <= {b:.3e}", n + 1);
    }

    let mut cert_csv = String::from("length,distinct_fixed_points,bound\n");
    let mut bound = 0u64;
    for (k, c) in cert.counts.iter().enumerate() {
        bound += (system.len() as u64).pow(k as u32 + 1);
        let _ = writeln!(cert_csv, "{},{c},{bound}", k + 1);
    }
    let mut hutch_csv = String::from("n,distance,bound\n");
    for (n, (d, b)) in trace.distances.iter().zip(&trace.bounds).enumerate() {
        let _ = writeln!(hutch_csv, "{},{d},{b}", n + 1);
    }
    Ok(Report {
        json,
        text,
        artifacts: vec![
            Artifact {
                name: "attractor.csv".into(),
                contents: sample.to_csv(),
                kind: ArtifactKind::Csv,
            },
            Artifact {
                name: "certificate.csv".into(),
                contents: cert_csv,
                kind: ArtifactKind::Csv,
            },
            Artifact {
                name: "hutchinson.csv".into(),
                contents: hutch_csv,
                kind: ArtifactKind::Csv,
            },
        ],
    })
}

pub fn selftest(results: &[CriterionResult], seed: u64) -> Report {
    let passed = results.iter().filter(|r| r.passed).count();
    let json = json!({
        "command": "selftest",
        "seed": seed,
        "passed": passed,
        "failed": results.len() - passed,
        "criteria": results.iter().map(|r| json!({
            "id": r.id,
            "name": r.name,
            "passed": r.passed,
            "detail": r.detail,
        })).collect::<Vec<_>>(),
    });
    let mut text = String::new();
    for r in results {
        let _ = writeln!(text, "{r}");
    }
    let _ = writeln!(text, "{passed}/{} criteria passed", results.len());
    Report {
        json,
        text,
        artifacts: Vec::new(),
    }
}
