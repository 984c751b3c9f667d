//! Datum, presentation and candidate files.
//!
//! All three are JSON with rationals as strings (`"1/2"`, `"-3"`); bare
//! integers are accepted on input. Serialization is canonical: rationals are
//! gcd-reduced, bases are in reduced row echelon form and vertex ids are
//! `v0, v1, …` in vertex order.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Deserialize;

use crate::datum::{HblDatum, NamedMap};
use crate::flow::{GraphDecomposition, WeightFunction};
use crate::linalg::{Matrix, Subspace};
use crate::presentation::Presentation;
use crate::rational::{format_rational, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}

#[derive(Deserialize)]
struct Q(#[serde(with = "serde_str")] Rational);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatumFile {
    dim: usize,
    maps: Vec<MapFile>,
    exponents: Vec<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    name: String,
    rows: Vec<Vec<Q>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresentationFile {
    vertices: Vec<VertexFile>,
    edges: Vec<EdgeFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexFile {
    id: String,
    basis: Vec<Vec<Q>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    from: String,
    to: String,
    theta: Vec<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidatesFile {
    candidates: Vec<VertexFile>,
}

fn syntax(e: serde_json::Error) -> IoError {
    IoError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    }
}

/// 1-based line of the `n`-th occurrence (0-based) of the object key `key`.
fn key_line(text: &str, key: &str, n: usize) -> usize {
    let needle = format!("\"{key}\"");
    let mut seen = 0;
    let mut from = 0;
    while let Some(pos) = text[from..].find(&needle) {
        let at = from + pos;
        from = at + needle.len();
        if text[from..].trim_start().starts_with(':') {
            if seen == n {
                return text[..at].matches('\n').count() + 1;
            }
            seen += 1;
        }
    }
    1
}

fn unwrap_rows(rows: Vec<Vec<Q>>) -> Vec<Vec<Rational>> {
    rows.into_iter().map(|r| r.into_iter().map(|q| q.0).collect()).collect()
}

pub fn parse_datum(text: &str) -> Result<HblDatum, IoError> {
    let file: DatumFile = serde_json::from_str(text).map_err(syntax)?;
    let mut maps = Vec::with_capacity(file.maps.len());
    for (i, m) in file.maps.into_iter().enumerate() {
        let line = key_line(text, "name", i);
        let rows = unwrap_rows(m.rows);
        if let Some(r) = rows.iter().position(|r| r.len() != file.dim) {
            return Err(IoError::Semantic {
                line,
                message: format!(
                    "map {:?}: row {} has {} entries, expected dim = {}",
                    m.name,
                    r + 1,
                    rows[r].len(),
                    file.dim
                ),
            });
        }
        let matrix = Matrix::from_rows(file.dim, rows).map_err(|e| IoError::Semantic {
            line,
            message: format!("map {:?}: {e}", m.name),
        })?;
        maps.push(NamedMap { name: m.name, matrix });
    }
    let exponents = file.exponents.into_iter().map(|q| q.0).collect();
    HblDatum::new(file.dim, maps, exponents).map_err(|e| IoError::Semantic {
        line: key_line(text, "exponents", 0),
        message: e.to_string(),
    })
}

fn rational_list(v: &[Rational]) -> String {
    let items: Vec<String> = v.iter().map(|q| format!("\"{}\"", format_rational(q))).collect();
    format!("[{}]", items.join(", "))
}

fn matrix_rows(rows: impl IntoIterator<Item = Vec<Rational>>) -> String {
    let items: Vec<String> = rows.into_iter().map(|r| rational_list(&r)).collect();
    format!("[{}]", items.join(", "))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

pub fn serialize_datum(d: &HblDatum) -> String {
    let mut out = format!("{{\n  \"dim\": {},\n  \"maps\": [\n", d.dim());
    for (i, m) in d.maps().iter().enumerate() {
        let sep = if i + 1 < d.len() { "," } else { "" };
        writeln!(
            out,
            "    {{\"name\": {}, \"rows\": {}}}{sep}",
            json_string(&m.name),
            matrix_rows(m.matrix.row_vecs())
        )
        .unwrap();
    }
    writeln!(out, "  ],\n  \"exponents\": {}\n}}", rational_list(d.exponents())).unwrap();
    out
}

fn subspace_from_rows(ambient: usize, rows: Vec<Vec<Rational>>, what: &str, line: usize) -> Result<Subspace, IoError> {
    let count = rows.len();
    if let Some(r) = rows.iter().position(|r| r.len() != ambient) {
        return Err(IoError::Semantic {
            line,
            message: format!("{what}: basis row {} has {} entries, expected {ambient}", r + 1, rows[r].len()),
        });
    }
    let s = Subspace::from_vectors(ambient, rows).map_err(|e| IoError::Semantic {
        line,
        message: format!("{what}: {e}"),
    })?;
    if s.dim() != count {
        return Err(IoError::Semantic {
            line,
            message: format!("{what}: basis rows are linearly dependent"),
        });
    }
    Ok(s)
}

/// Reads a presentation; the ambient dimension is the width of the basis rows.
pub fn parse_presentation(text: &str) -> Result<Presentation, IoError> {
    let file: PresentationFile = serde_json::from_str(text).map_err(syntax)?;
    let ambient = file
        .vertices
        .iter()
        .find_map(|v| v.basis.first().map(Vec::len))
        .ok_or_else(|| IoError::Semantic {
            line: key_line(text, "vertices", 0),
            message: "no vertex has a nonempty basis, so the full space is missing".into(),
        })?;
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (k, v) in file.vertices.into_iter().enumerate() {
        let line = key_line(text, "id", k);
        if ids.insert(v.id.clone(), k).is_some() {
            return Err(IoError::Semantic {
                line,
                message: format!("duplicate vertex id {:?}", v.id),
            });
        }
        vertices.push(subspace_from_rows(ambient, unwrap_rows(v.basis), &format!("vertex {:?}", v.id), line)?);
    }
    let width = file.edges.first().map_or(0, |e| e.theta.len());
    let mut edges = Vec::with_capacity(file.edges.len());
    let mut rows = Vec::with_capacity(file.edges.len());
    for (k, e) in file.edges.into_iter().enumerate() {
        let line = key_line(text, "from", k);
        let lookup = |id: &str| {
            ids.get(id).copied().ok_or_else(|| IoError::Semantic {
                line,
                message: format!("edge {} references undefined vertex id {id:?}", k + 1),
            })
        };
        let (a, b) = (lookup(&e.from)?, lookup(&e.to)?);
        if e.theta.len() != width {
            return Err(IoError::Semantic {
                line,
                message: format!("edge {}: theta has {} entries, expected {width}", k + 1, e.theta.len()),
            });
        }
        edges.push((a, b));
        rows.push(e.theta.into_iter().map(|q| q.0).collect());
    }
    let theta = WeightFunction::new(width, rows).map_err(|e| IoError::Semantic {
        line: key_line(text, "edges", 0),
        message: e.to_string(),
    })?;
    Presentation::new(GraphDecomposition::new(ambient, vertices, edges), theta).map_err(|e| IoError::Semantic {
        line: 1,
        message: e.to_string(),
    })
}

/// Writes the presentation as given; call [`Presentation::canonical`] first for canonical output.
pub fn serialize_presentation(p: &Presentation) -> String {
    let mut out = String::from("{\n  \"vertices\": [\n");
    let n = p.graph.vertices.len();
    for (i, v) in p.graph.vertices.iter().enumerate() {
        let sep = if i + 1 < n { "," } else { "" };
        writeln!(out, "    {{\"id\": \"v{i}\", \"basis\": {}}}{sep}", matrix_rows(v.basis().row_vecs())).unwrap();
    }
    out.push_str("  ],\n  \"edges\": [\n");
    let m = p.graph.edges.len();
    for (k, &(a, b)) in p.graph.edges.iter().enumerate() {
        let sep = if k + 1 < m { "," } else { "" };
        writeln!(
            out,
            "    {{\"from\": \"v{a}\", \"to\": \"v{b}\", \"theta\": {}}}{sep}",
            rational_list(&p.theta.values()[k])
        )
        .unwrap();
    }
    out.push_str("  ]\n}\n");
    out
}

/// Named candidate subspaces of `ℝ^ambient`.
pub fn parse_candidates(text: &str, ambient: usize) -> Result<Vec<(String, Subspace)>, IoError> {
    let file: CandidatesFile = serde_json::from_str(text).map_err(syntax)?;
    file.candidates
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let line = key_line(text, "id", k);
            let s = subspace_from_rows(ambient, unwrap_rows(c.basis), &format!("candidate {:?}", c.id), line)?;
            Ok((c.id, s))
        })
        .collect()
}

pub fn serialize_candidates(candidates: &[(String, Subspace)]) -> String {
    let mut out = String::from("{\n  \"candidates\": [\n");
    for (i, (id, s)) in candidates.iter().enumerate() {
        let sep = if i + 1 < candidates.len() { "," } else { "" };
        writeln!(out, "    {{\"id\": {}, \"basis\": {}}}{sep}", json_string(id), matrix_rows(s.basis().row_vecs())).unwrap();
    }
    out.push_str("  ]\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    #[test]
    fn datum_round_trip() {
        let d = fixtures::r6_datum();
        let text = serialize_datum(&d);
        let back = parse_datum(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(serialize_datum(&back), text);
    }

    #[test]
    fn rationals_are_reduced() {
        let text = r#"{"dim": 1, "maps": [{"name": "p", "rows": [["2/2"]]}], "exponents": ["2/4"]}"#;
        let d = parse_datum(text).unwrap();
        assert_eq!(d.exponents(), &[ratio(1, 2)]);
        assert!(serialize_datum(&d).contains("\"1/2\""));
    }

    #[test]
    fn presentation_round_trip() {
        let p = fixtures::r6_presentation().canonical();
        let text = serialize_presentation(&p);
        let back = parse_presentation(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(serialize_presentation(&back), text);
    }

    #[test]
    fn undefined_vertex_is_named_with_line() {
        let text = "{\n  \"vertices\": [\n    {\"id\": \"a\", \"basis\": []},\n    {\"id\": \"b\", \"basis\": [[\"1\"]]}\n  ],\n  \"edges\": [\n    {\"from\": \"a\", \"to\": \"b\", \"theta\": [\"1\"]},\n    {\"from\": \"a\", \"to\": \"zz\", \"theta\": [\"1\"]}\n  ]\n}\n";
        let err = parse_presentation(text).unwrap_err();
        assert_eq!(
            err,
            IoError::Semantic {
                line: 8,
                message: "edge 2 references undefined vertex id \"zz\"".into()
            }
        );
    }

    #[test]
    fn malformed_rational_has_position() {
        let text = "{\"dim\": 1,\n \"maps\": [{\"name\": \"p\", \"rows\": [[\"1/0\"]]}],\n \"exponents\": [\"1\"]}";
        match parse_datum(text).unwrap_err() {
            IoError::Syntax { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("zero denominator"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_and_width_errors() {
        let text = "{\"dim\": 2,\n \"maps\": [{\"name\": \"p\", \"rows\": [[\"1\", \"0\"], [\"1\"]]}],\n \"exponents\": [\"1\"]}";
        assert!(matches!(parse_datum(text), Err(IoError::Semantic { line: 2, .. })));
        let text = "{\"vertices\": [{\"id\": \"a\", \"basis\": []}, {\"id\": \"b\", \"basis\": [[\"1\"]]}],\n \"edges\": [{\"from\": \"a\", \"to\": \"b\", \"theta\": [\"1\"]},\n {\"from\": \"a\", \"to\": \"b\", \"theta\": [\"1\", \"2\"]}]}";
        let err = parse_presentation(text).unwrap_err();
        assert!(matches!(err, IoError::Semantic { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn candidates_round_trip() {
        let c: Vec<(String, Subspace)> = fixtures::r6_line_candidates()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("L{}", i + 1), s))
            .collect();
        let text = serialize_candidates(&c);
        assert_eq!(parse_candidates(&text, 6).unwrap(), c);
    }
}
