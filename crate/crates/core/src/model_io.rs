//! JSON model files.
//!
//! ```json
//! {"kind": "finite_kernel", "states": ["a", "b"], "matrix": [["1", "1/2"], ["0", "1/2"]]}
//! {"kind": "map_system",
//!  "space": {"type": "interval_grid", "lower": "0", "upper": "1", "points": 101, "interior_mode": "continuum"},
//!  "maps": [{"slope": "1/2", "intercept": "0"}, {"slope": "-1/2", "intercept": "1"}],
//!  "weights": ["1/2", "1/2"]}
//! {"kind": "uniform", "space": {"type": "finite_set", "labels": ["a", "b", "c"]}}
//! {"kind": "quiver", "vertices": ["v"], "edges": [{"source": "v", "range": "v", "weight": "1/2", "id": "a"}]}
//! ```
//!
//! Matrices are row-major with `matrix[x][y] = p({x}, y)`, so columns sum
//! to 1. Numbers may be JSON numbers or strings holding fractions or
//! decimals; both are read exactly.

use std::fmt;
use std::path::Path as FsPath;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::markov::{AffineMap, InteriorMode, Kernel, MapSpec, MarkovModel, ModelView, SpaceSpec};
use crate::quiver::{Edge, Quiver};
use crate::scalar::{parse_rational, Rational};

/// An exact number in a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct Number(pub Rational);

impl Serialize for Number {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct NumberVisitor;

        impl Visitor<'_> for NumberVisitor {
            type Value = Number;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a string such as \"1/2\" or \"0.25\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Number, E> {
                parse_rational(v)
                    .map(Number)
                    .ok_or_else(|| E::custom(format!("invalid number {v:?}")))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Number, E> {
                Ok(Number(Rational::from_integer(v.into())))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Number, E> {
                Ok(Number(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Number, E> {
                // shortest round-trip decimal, read exactly
                self.visit_str(&v.to_string())
            }
        }

        d.deserialize_any(NumberVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceType {
    FiniteSet,
    IntervalGrid,
}

/// `{"type": "finite_set", "labels": [...]}` or
/// `{"type": "interval_grid", "lower", "upper", "points", "interior_mode"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    #[serde(rename = "type")]
    pub kind: SpaceType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_mode: Option<InteriorModeFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorModeFile {
    Discrete,
    Continuum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MapFile {
    Affine { slope: Number, intercept: Number },
    Table { table: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub source: String,
    pub range: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteKernelFile {
    #[serde(default, skip_serializing)]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<String>>,
    pub matrix: Vec<Vec<Number>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSystemFile {
    #[serde(default, skip_serializing)]
    kind: Option<String>,
    pub space: SpaceFile,
    pub maps: Vec<MapFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Number>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformFile {
    #[serde(default, skip_serializing)]
    kind: Option<String>,
    pub space: SpaceFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiverFile {
    #[serde(default, skip_serializing)]
    kind: Option<String>,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeFile>,
}

/// On-disk model document, discriminated by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    FiniteKernel(FiniteKernelFile),
    MapSystem(MapSystemFile),
    Uniform(UniformFile),
    Quiver(QuiverFile),
}

/// A loaded model: a Markov operator or a bare quiver.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedModel {
    Markov(MarkovModel<Rational>),
    Quiver(Quiver<Rational>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Read `matrix` as row-stochastic (`matrix[y][x] = p({x}, y)`).
    pub transpose: bool,
}

/// Parse a model document; schema errors carry the field path and line.
pub fn parse_model_str(text: &str, opts: ParseOptions) -> Result<ParsedModel> {
    #[derive(Deserialize)]
    struct Probe {
        kind: String,
    }
    let probe: Probe = read(text)?;
    let file = match probe.kind.as_str() {
        "finite_kernel" => ModelFile::FiniteKernel(read(text)?),
        "map_system" => ModelFile::MapSystem(read(text)?),
        "uniform" => ModelFile::Uniform(read(text)?),
        "quiver" => ModelFile::Quiver(read(text)?),
        other => {
            return Err(Error::Parse(format!(
                "field `kind`: unknown model kind {other:?}, expected finite_kernel, map_system, uniform or quiver"
            )))
        }
    };
    from_file(file, opts)
}

fn read<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        // serde_json appends "at line L column C"
        let path = e.path().to_string();
        Error::Parse(format!("field `{path}`: {}", e.into_inner()))
    })
}

pub fn parse_model(path: &FsPath, opts: ParseOptions) -> Result<ParsedModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_model_str(&text, opts)
}

fn space_from(space: SpaceFile) -> Result<SpaceSpec<Rational>> {
    let missing = |f: &str| Error::Parse(format!("field `space.{f}` is required for {:?} spaces", space.kind));
    let stray = |f: &str| Error::Parse(format!("field `space.{f}` is not allowed for {:?} spaces", space.kind));
    match space.kind {
        SpaceType::FiniteSet => {
            for (name, present) in [
                ("lower", space.lower.is_some()),
                ("upper", space.upper.is_some()),
                ("points", space.points.is_some()),
                ("interior_mode", space.interior_mode.is_some()),
            ] {
                if present {
                    return Err(stray(name));
                }
            }
            Ok(SpaceSpec::FiniteSet {
                labels: space.labels.clone().ok_or_else(|| missing("labels"))?,
            })
        }
        SpaceType::IntervalGrid => {
            if space.labels.is_some() {
                return Err(stray("labels"));
            }
            Ok(SpaceSpec::IntervalGrid {
                lower: space.lower.clone().ok_or_else(|| missing("lower"))?.0,
                upper: space.upper.clone().ok_or_else(|| missing("upper"))?.0,
                points: space.points.ok_or_else(|| missing("points"))?,
                interior_mode: match space.interior_mode {
                    Some(InteriorModeFile::Discrete) => InteriorMode::Discrete,
                    Some(InteriorModeFile::Continuum) | None => InteriorMode::Continuum,
                },
            })
        }
    }
}

fn space_to(space: &SpaceSpec<Rational>) -> SpaceFile {
    match space {
        SpaceSpec::FiniteSet { labels } => SpaceFile {
            kind: SpaceType::FiniteSet,
            labels: Some(labels.clone()),
            lower: None,
            upper: None,
            points: None,
            interior_mode: None,
        },
        SpaceSpec::IntervalGrid {
            lower,
            upper,
            points,
            interior_mode,
        } => SpaceFile {
            kind: SpaceType::IntervalGrid,
            labels: None,
            lower: Some(Number(lower.clone())),
            upper: Some(Number(upper.clone())),
            points: Some(*points),
            interior_mode: Some(match interior_mode {
                InteriorMode::Discrete => InteriorModeFile::Discrete,
                InteriorMode::Continuum => InteriorModeFile::Continuum,
            }),
        },
    }
}

fn index_of(labels: &[String], label: &str, what: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::Validation(format!("{what} refers to unknown label {label:?}")))
}

pub fn from_file(file: ModelFile, opts: ParseOptions) -> Result<ParsedModel> {
    match file {
        ModelFile::FiniteKernel(FiniteKernelFile { states, matrix, .. }) => {
            let n = matrix.len();
            if let Some(i) = matrix.iter().position(|r| r.len() != n) {
                return Err(Error::Validation(format!(
                    "matrix row {i} has {} entries, expected {n}",
                    matrix[i].len()
                )));
            }
            let mut rows: Vec<Vec<Rational>> = matrix
                .into_iter()
                .map(|r| r.into_iter().map(|x| x.0).collect())
                .collect();
            if opts.transpose {
                rows = Kernel::transpose_rows(rows);
            }
            let kernel = Kernel::from_rows(rows)?;
            let states = states.unwrap_or_else(|| (1..=n).map(|i| format!("x{i}")).collect());
            if states.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: states.len(),
                });
            }
            Ok(ParsedModel::Markov(MarkovModel::finite_kernel(states, kernel)?))
        }
        ModelFile::MapSystem(MapSystemFile { space, maps, weights, .. }) => {
            let space = space_from(space)?;
            let labels = space.labels();
            let maps = maps
                .into_iter()
                .enumerate()
                .map(|(i, m)| match m {
                    MapFile::Affine { slope, intercept } => Ok(MapSpec::Affine(AffineMap::new(slope.0, intercept.0))),
                    MapFile::Table { table } => table
                        .iter()
                        .map(|l| index_of(&labels, l, &format!("map {i}")))
                        .collect::<Result<Vec<_>>>()
                        .map(MapSpec::Table),
                })
                .collect::<Result<Vec<_>>>()?;
            let weights = weights.map(|w| w.into_iter().map(|x| x.0).collect());
            Ok(ParsedModel::Markov(MarkovModel::map_system(space, maps, weights)?))
        }
        ModelFile::Uniform(UniformFile { space, .. }) => Ok(ParsedModel::Markov(MarkovModel::uniform(space_from(space)?)?)),
        ModelFile::Quiver(QuiverFile { vertices, edges, .. }) => {
            let n = vertices.len();
            let mut indegree = vec![0usize; n];
            let mut ends = Vec::with_capacity(edges.len());
            for (i, e) in edges.iter().enumerate() {
                let s = index_of(&vertices, &e.source, &format!("edge {i} source"))?;
                let r = index_of(&vertices, &e.range, &format!("edge {i} range"))?;
                indegree[r] += 1;
                ends.push((s, r));
            }
            let edges = edges
                .into_iter()
                .zip(ends)
                .enumerate()
                .map(|(i, (e, (s, r)))| Edge {
                    label: e.id.unwrap_or_else(|| format!("e{i}")),
                    source: s,
                    range: r,
                    weight: e
                        .weight
                        .map(|w| w.0)
                        .unwrap_or_else(|| Rational::new(1.into(), indegree[r].into())),
                })
                .collect();
            Ok(ParsedModel::Quiver(Quiver::new(vertices, edges, InteriorMode::Discrete)?))
        }
    }
}

/// Canonical document for a model; parsing it back gives an equal model.
pub fn to_file(model: &ParsedModel) -> ModelFile {
    match model {
        ParsedModel::Markov(m) => match m.view() {
            ModelView::FiniteKernel { states, kernel } => ModelFile::FiniteKernel(FiniteKernelFile {
                kind: None,
                states: Some(states.to_vec()),
                matrix: kernel
                    .to_rows()
                    .into_iter()
                    .map(|r| r.into_iter().map(Number).collect())
                    .collect(),
            }),
            ModelView::MapSystem { space, maps, weights } => {
                let labels = space.labels();
                ModelFile::MapSystem(MapSystemFile {
                    kind: None,
                    space: space_to(space),
                    maps: maps
                        .iter()
                        .map(|m| match m {
                            MapSpec::Affine(a) => MapFile::Affine {
                                slope: Number(a.slope.clone()),
                                intercept: Number(a.intercept.clone()),
                            },
                            MapSpec::Table(t) => MapFile::Table {
                                table: t.iter().map(|&j| labels[j].clone()).collect(),
                            },
                        })
                        .collect(),
                    weights: Some(weights.iter().cloned().map(Number).collect()),
                })
            }
            ModelView::Uniform { space } => ModelFile::Uniform(UniformFile {
                kind: None,
                space: space_to(space),
            }),
        },
        ParsedModel::Quiver(q) => ModelFile::Quiver(QuiverFile {
            kind: None,
            vertices: q.vertices().to_vec(),
            edges: q
                .edges()
                .iter()
                .map(|e| EdgeFile {
                    source: q.vertices()[e.source].clone(),
                    range: q.vertices()[e.range].clone(),
                    weight: Some(Number(e.weight.clone())),
                    id: Some(e.label.clone()),
                })
                .collect(),
        }),
    }
}

pub fn model_to_string(model: &ParsedModel) -> String {
    serde_json::to_string_pretty(&to_file(model)).expect("model documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    const CHAIN: &str = r#"{"kind": "finite_kernel", "states": ["a", "b"], "matrix": [["1", "1/2"], ["0", "1/2"]]}"#;
    const TENT: &str = r#"{
        "kind": "map_system",
        "space": {"type": "interval_grid", "lower": 0, "upper": 1, "points": 101},
        "maps": [{"slope": "1/2", "intercept": 0}, {"slope": -0.5, "intercept": "1"}]
    }"#;

    fn markov(p: ParsedModel) -> MarkovModel<Rational> {
        match p {
            ParsedModel::Markov(m) => m,
            ParsedModel::Quiver(_) => panic!("expected a Markov model"),
        }
    }

    #[test]
    fn parses_examples() {
        let m = markov(parse_model_str(CHAIN, ParseOptions::default()).unwrap());
        assert_eq!(m.len(), 2);
        assert_eq!(m.kernel().entry(0, 1), ratio(1, 2));

        let t = markov(parse_model_str(TENT, ParseOptions::default()).unwrap());
        let ModelView::MapSystem { maps, weights, .. } = t.view() else { panic!() };
        assert_eq!(maps.len(), 2);
        assert_eq!(weights, [ratio(1, 2), ratio(1, 2)]);
        assert_eq!(t.interior_mode(), InteriorMode::Continuum);

        let table = r#"{"kind": "map_system", "space": {"type": "finite_set", "labels": ["a","b","c"]},
                        "maps": [{"table": ["b","c","a"]}]}"#;
        assert_eq!(markov(parse_model_str(table, ParseOptions::default()).unwrap()).len(), 3);

        let q = r#"{"kind": "quiver", "vertices": ["v"], "edges": [{"source": "v", "range": "v"}, {"source": "v", "range": "v"}]}"#;
        let ParsedModel::Quiver(q) = parse_model_str(q, ParseOptions::default()).unwrap() else { panic!() };
        assert_eq!(q.edges()[1].weight, ratio(1, 2));
    }

    #[test]
    fn reports_errors() {
        let bad = r#"{"kind": "finite_kernel", "matrix": [["1", "1/2"], ["0", "0.4"]]}"#;
        let err = parse_model_str(bad, ParseOptions::default()).unwrap_err();
        assert!(matches!(&err, Error::Validation(m) if m.contains("column 1")), "{err}");

        let typo = "{\"kind\": \"finite_kernel\",\n \"matrix\": [[\"1\"]], \"sates\": []}";
        let err = parse_model_str(typo, ParseOptions::default()).unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.contains("line 2") && m.contains("sates")), "{err}");

        let num = r#"{"kind": "finite_kernel", "matrix": [["one"]]}"#;
        let err = parse_model_str(num, ParseOptions::default()).unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.contains("matrix[0][0]")), "{err}");

        let kind = r#"{"kind": "banana"}"#;
        assert!(matches!(parse_model_str(kind, ParseOptions::default()), Err(Error::Parse(_))));
    }

    #[test]
    fn transpose_reads_row_stochastic() {
        let rows = r#"{"kind": "finite_kernel", "matrix": [["1", "0"], ["1/2", "1/2"]]}"#;
        let m = markov(parse_model_str(rows, ParseOptions { transpose: true }).unwrap());
        let c = markov(parse_model_str(CHAIN, ParseOptions::default()).unwrap());
        assert_eq!(m.kernel(), c.kernel());
    }

    #[test]
    fn round_trip() {
        for text in [CHAIN, TENT] {
            let a = parse_model_str(text, ParseOptions::default()).unwrap();
            let b = parse_model_str(&model_to_string(&a), ParseOptions::default()).unwrap();
            assert_eq!(a, b);
        }
    }
}
