use crate::error::{Error, Result};
use crate::fgh::{FieldTag, VertexField};
use crate::geometry::{Circle, ExtComplex};
use crate::lattice::LatticePoint;
use crate::patterns::{verify_pattern, Assembly, CirclePattern, GeneratedPattern, PatternKind, VerificationReport};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub kind: Option<PatternKind>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub n: usize,
    /// Number of rotated sector copies; 1 for a plain sector.
    pub copies: usize,
}

/// One field value. Infinite values are stored as `re = im = 0` with `infinite` set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub k: i64,
    pub l: i64,
    pub m: i64,
    pub field: FieldTag,
    pub re: f64,
    pub im: f64,
    pub infinite: bool,
    #[serde(default)]
    pub copy: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleRecord {
    /// The hexagon center on the lattice.
    pub k: i64,
    pub l: i64,
    pub field: FieldTag,
    pub sublattice: u8,
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
    #[serde(default)]
    pub copy: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDocument {
    pub schema_version: u64,
    pub metadata: Metadata,
    pub vertices: Vec<VertexRecord>,
    pub circles: Vec<CircleRecord>,
    pub report: Option<VerificationReport>,
}

impl Default for PatternDocument {
    fn default() -> Self {
        PatternDocument { schema_version: SCHEMA_VERSION, metadata: Metadata::default(), vertices: vec![], circles: vec![], report: None }
    }
}

impl PatternDocument {
    fn push_field(&mut self, field: &VertexField, copy: usize) {
        for p in field.points() {
            let z = field.get(p).expect("listed point");
            let (re, im, infinite) = match z {
                ExtComplex::Finite(c) => (c.re, c.im, false),
                ExtComplex::Infinity => (0.0, 0.0, true),
            };
            self.vertices.push(VertexRecord { k: p.k, l: p.l, m: p.m(), field: field.tag, re, im, infinite, copy });
        }
    }

    /// Lines (circles through infinity) are not stored.
    fn push_circles(&mut self, pattern: &CirclePattern, copy: usize) {
        for (p, c) in &pattern.circles {
            if let Circle::Proper { center, radius } = c {
                self.circles.push(CircleRecord {
                    k: p.k,
                    l: p.l,
                    field: pattern.tag,
                    sublattice: pattern.sublattice,
                    center_re: center.re,
                    center_im: center.im,
                    radius: *radius,
                    copy,
                });
            }
        }
    }

    fn metadata_of(g: &GeneratedPattern, copies: usize) -> Metadata {
        Metadata {
            kind: Some(g.kind),
            alpha: Some(g.alpha),
            beta: Some(g.beta),
            gamma: Some(g.gamma),
            theta: Some(g.theta),
            n: g.n,
            copies,
        }
    }

    /// The selected fields of a generated pattern with their circles and a fresh report.
    pub fn from_generated(g: &GeneratedPattern, tags: &[FieldTag]) -> Self {
        let mut doc = PatternDocument { metadata: Self::metadata_of(g, 1), ..Default::default() };
        for &t in tags {
            doc.push_field(g.field(t), 0);
            doc.push_circles(g.pattern(t), 0);
        }
        let fields: Vec<&VertexField> = tags.iter().map(|t| g.field(*t)).collect();
        doc.report = Some(verify_pattern(&fields, false));
        doc
    }

    /// Rotated copies of each assembled field; the report covers the unrotated sectors.
    pub fn from_assemblies(g: &GeneratedPattern, assemblies: &[Assembly]) -> Self {
        let copies = assemblies.iter().map(|a| a.copies.len()).max().unwrap_or(1);
        let mut doc = PatternDocument { metadata: Self::metadata_of(g, copies), ..Default::default() };
        for asm in assemblies {
            let base = g.field(asm.tag);
            for (i, c) in asm.copies.iter().enumerate() {
                doc.push_field(&base.affine(c.rotation, Complex64::new(0.0, 0.0)), i);
                doc.push_circles(&c.pattern, i);
            }
        }
        let fields: Vec<&VertexField> = assemblies.iter().map(|a| g.field(a.tag)).collect();
        doc.report = Some(verify_pattern(&fields, false));
        doc
    }

    /// Every `(field, copy)` pair present, with its values.
    pub fn fields(&self) -> BTreeMap<(FieldTag, usize), VertexField> {
        let mut out: BTreeMap<(FieldTag, usize), VertexField> = BTreeMap::new();
        for r in &self.vertices {
            let f = out.entry((r.field, r.copy)).or_insert_with(|| VertexField::new(r.field));
            let p = crate::lattice::canonicalize(r.k, r.l, r.m);
            if r.infinite {
                f.set(p, ExtComplex::Infinity);
            } else {
                f.set(p, Complex64::new(r.re, r.im));
            }
        }
        out
    }

    /// Largest distance of a stored vertex from a stored circle it should lie on.
    pub fn stored_circle_deviation(&self) -> f64 {
        let fields = self.fields();
        let mut worst: f64 = 0.0;
        for c in &self.circles {
            let Some(f) = fields.get(&(c.field, c.copy)) else { continue };
            let circle = Circle::Proper { center: Complex64::new(c.center_re, c.center_im), radius: c.radius };
            for q in crate::lattice::hex_star(LatticePoint::new(c.k, c.l)).vertices {
                if let Some(z) = f.finite(q) {
                    worst = worst.max(circle.distance(z.into()) / c.radius.max(1.0));
                }
            }
        }
        worst
    }
}

pub fn save_json(doc: &PatternDocument) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(doc).expect("documents serialize");
    out.push(b'\n');
    out
}

fn parse_error(path: String, message: String) -> Error {
    Error::Parse { path: if path.is_empty() { ".".into() } else { path }, message }
}

pub fn load_json(bytes: &[u8]) -> Result<PatternDocument> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| parse_error(String::new(), e.to_string()))?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(SCHEMA_VERSION) => {}
        Some(found) => return Err(Error::SchemaVersionMismatch { found, expected: SCHEMA_VERSION }),
        None => return Err(parse_error("schema_version".into(), "missing or not an unsigned integer".into())),
    }
    serde_path_to_error::deserialize(value).map_err(|e| parse_error(e.path().to_string(), e.inner().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::generate_zalpha;

    #[test]
    fn empty_round_trip() {
        let doc = PatternDocument::default();
        let back = load_json(&save_json(&doc)).unwrap();
        assert_eq!(doc, back);
    }

    #[test]
    fn generated_round_trip() {
        let g = generate_zalpha(0.4, 8).unwrap();
        let doc = PatternDocument::from_generated(&g, &[FieldTag::U, FieldTag::V, FieldTag::W]);
        let bytes = save_json(&doc);
        let back = load_json(&bytes).unwrap();
        assert_eq!(doc, back);
        assert_eq!(bytes, save_json(&back));
        assert!(back.stored_circle_deviation() < 1e-12);
    }

    #[test]
    fn bad_key_is_named() {
        let g = generate_zalpha(0.3, 3).unwrap();
        let doc = PatternDocument::from_generated(&g, &[FieldTag::U]);
        let mut v: serde_json::Value = serde_json::from_slice(&save_json(&doc)).unwrap();
        v["vertices"][2]["re"] = serde_json::Value::String("oops".into());
        match load_json(v.to_string().as_bytes()) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "vertices[2].re"),
            other => panic!("{other:?}"),
        }
        v["schema_version"] = 7.into();
        assert!(matches!(load_json(v.to_string().as_bytes()), Err(Error::SchemaVersionMismatch { found: 7, .. })));
    }
}
