//! File formats: distance matrices (CSV or JSON), point clouds (JSON),
//! cochain literals (JSON) and pretty-printed reports.
//!
//! * CSV distance matrix: square table of numbers; an optional first row of
//!   labels; blank lines and lines starting with `#` are skipped.
//! * JSON distance matrix: `{"points": [ids], "dist": [[...]]}` with optional
//!   `basepoint`, `unbounded_model`, `truncation_radius` and `coords`. When
//!   `coords` is present, distances are recomputed from it.
//! * JSON point cloud: a bare list of coordinate vectors.
//! * Cochain literal: `{"degree": n, "ring": "q", "entries": [[[0, 1], "1/2"], ...]}`;
//!   values may be JSON numbers or strings.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cochains::{RawCochain, Tuple};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointId, SpaceOptions};
use crate::ring::{Coeff, Ring};

/// Flags applied to a space after loading.
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub strict_metric: bool,
    pub basepoint: Option<PointId>,
    /// Marks the space as a truncation of an unbounded space at this radius.
    pub truncation_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub points: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<PointId>,
    #[serde(default)]
    pub unbounded_model: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
}

fn label_of(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl SpaceFile {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        Self {
            points: space.labels().iter().map(|l| Value::String(l.clone())).collect(),
            dist: space.all_coords().is_none().then(|| space.distance_table()),
            coords: space.all_coords().map(<[Vec<f64>]>::to_vec),
            basepoint: space.basepoint(),
            unbounded_model: space.is_unbounded_model(),
            truncation_radius: space.truncation_radius(),
        }
    }

    pub fn into_space(self, opts: &LoadOptions) -> Result<FiniteMetricSpace> {
        let labels: Vec<String> = self.points.iter().map(label_of).collect();
        let labels = (!labels.is_empty()).then_some(labels);
        let space = match (self.coords, self.dist) {
            (Some(c), _) => FiniteMetricSpace::from_points(c, labels)?,
            (None, Some(d)) => FiniteMetricSpace::from_distance_matrix(
                &d,
                SpaceOptions { strict_metric: opts.strict_metric, labels, ..Default::default() },
            )?,
            (None, None) => return Err(Error::Parse("space file needs `dist` or `coords`".into())),
        };
        let basepoint = opts.basepoint.or(self.basepoint);
        let truncation = opts.truncation_radius.or(if self.unbounded_model { self.truncation_radius } else { None });
        apply_flags(space, basepoint, truncation, self.unbounded_model && opts.truncation_radius.is_none())
    }
}

fn apply_flags(
    mut space: FiniteMetricSpace,
    basepoint: Option<PointId>,
    truncation: Option<f64>,
    unbounded: bool,
) -> Result<FiniteMetricSpace> {
    if let Some(b) = basepoint {
        space = space.with_basepoint(b)?;
    }
    if let Some(t) = truncation {
        space = space.into_unbounded_model(t)?;
    } else if unbounded {
        return Err(Error::Parse("unbounded model without a truncation radius".into()));
    }
    Ok(space)
}

/// Parses a CSV distance matrix, returning optional header labels and rows.
pub fn parse_distance_csv(text: &str) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => header = Some(rec.iter().map(str::to_string).collect()),
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", i + 1))),
        }
    }
    Ok((header, rows))
}

pub fn space_from_csv(text: &str, opts: &LoadOptions) -> Result<FiniteMetricSpace> {
    let (labels, rows) = parse_distance_csv(text)?;
    let space = FiniteMetricSpace::from_distance_matrix(
        &rows,
        SpaceOptions { strict_metric: opts.strict_metric, labels, ..Default::default() },
    )?;
    apply_flags(space, opts.basepoint, opts.truncation_radius, false)
}

/// A JSON space: a bare list of coordinates, or a [`SpaceFile`] object.
pub fn space_from_json(text: &str, opts: &LoadOptions) -> Result<FiniteMetricSpace> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match v {
        Value::Array(_) => {
            let coords: Vec<Vec<f64>> = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
            apply_flags(FiniteMetricSpace::from_points(coords, None)?, opts.basepoint, opts.truncation_radius, false)
        }
        Value::Object(_) => {
            let f: SpaceFile = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
            f.into_space(opts)
        }
        _ => Err(Error::Parse("expected a JSON array or object".into())),
    }
}

/// Loads a space, choosing the format by extension (`.csv` or `.json`).
pub fn read_space(path: &Path, opts: &LoadOptions) -> Result<FiniteMetricSpace> {
    let text = read_text(path)?;
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("csv") => space_from_csv(&text, opts),
        Some("json") => space_from_json(&text, opts),
        _ => Err(Error::Parse(format!("{}: expected a .csv or .json file", path.display()))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CochainFile {
    pub degree: usize,
    pub ring: Ring,
    pub entries: Vec<(Tuple, Value)>,
}

impl CochainFile {
    pub fn from_cochain<F: Coeff>(c: &RawCochain<F>) -> Self {
        Self {
            degree: c.degree(),
            ring: F::RING,
            entries: c
                .iter()
                .map(|(t, v)| {
                    let s = v.to_repr();
                    let val = s.parse::<i64>().map(Value::from).unwrap_or(Value::String(s));
                    (t.clone(), val)
                })
                .collect(),
        }
    }

    /// Converts to a cochain over `F` on a space with `universe` points. The
    /// declared ring must be `F`'s ring.
    pub fn to_cochain<F: Coeff>(&self, universe: usize) -> Result<RawCochain<F>> {
        if self.ring != F::RING {
            return Err(Error::RingMismatch { expected: F::RING, found: self.ring });
        }
        let entries = self
            .entries
            .iter()
            .map(|(t, v)| {
                let s = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    other => return Err(Error::Parse(format!("bad cochain value {other}"))),
                };
                let c = F::parse_repr(&s).ok_or_else(|| Error::Parse(format!("`{s}` is not in {}", F::RING)))?;
                Ok((t.clone(), c))
            })
            .collect::<Result<Vec<_>>>()?;
        RawCochain::from_entries(self.degree, universe, entries)
    }
}

pub fn parse_cochain_file(text: &str) -> Result<CochainFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::generate_grid;
    use crate::ring::Gf2;
    use num_rational::BigRational;

    #[test]
    fn csv_with_and_without_header() {
        let plain = "0,1,2\n1,0,1\n2,1,0\n";
        let s = space_from_csv(plain, &LoadOptions::default()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dist(0, 2), 2.0);
        let labeled = "# a path\na, b, c\n0,1,2\n1,0,1\n2,1,0\n";
        let s = space_from_csv(labeled, &LoadOptions { basepoint: Some(1), ..Default::default() }).unwrap();
        assert_eq!(s.label(2), "c");
        assert_eq!(s.basepoint(), Some(1));
        assert!(matches!(space_from_csv("0,1\n1,0,3\n", &LoadOptions::default()), Err(Error::NotSquare { .. })));
        assert!(matches!(space_from_csv("0,1\nx,0\n", &LoadOptions::default()), Err(Error::Parse(_))));
    }

    #[test]
    fn json_formats() {
        let dm = r#"{"points": [0, 1, "c"], "dist": [[0,1,1],[1,0,1],[1,1,0]]}"#;
        let s = space_from_json(dm, &LoadOptions::default()).unwrap();
        assert_eq!(s.labels(), &["0", "1", "c"]);
        let cloud = "[[0,0],[1,0],[1,1],[0,1]]";
        let s = space_from_json(cloud, &LoadOptions::default()).unwrap();
        assert!((s.dist(0, 2) - 2f64.sqrt()).abs() < 1e-12);
        assert!(space_from_json("3", &LoadOptions::default()).is_err());
    }

    #[test]
    fn space_round_trip_keeps_flags() {
        let g = generate_grid(1, 3.0, 1.0).unwrap();
        let text = to_json(&SpaceFile::from_space(&g)).unwrap();
        let back = space_from_json(&text, &LoadOptions::default()).unwrap();
        assert_eq!(back.distance_table(), g.distance_table());
        assert_eq!(back.basepoint(), g.basepoint());
        assert_eq!(back.truncation_radius(), g.truncation_radius());
        assert!(back.is_unbounded_model());
    }

    #[test]
    fn cochain_round_trip_and_ring_check() {
        let text = r#"{"degree": 1, "ring": "q", "entries": [[[0, 1], "1/2"], [[1, 2], -3]]}"#;
        let f = parse_cochain_file(text).unwrap();
        let c: RawCochain<BigRational> = f.to_cochain(3).unwrap();
        assert_eq!(c.nnz(), 2);
        assert_eq!(CochainFile::from_cochain(&c), f);
        assert!(matches!(f.to_cochain::<Gf2>(3), Err(Error::RingMismatch { .. })));
        assert!(matches!(f.to_cochain::<BigRational>(2), Err(Error::PointOutOfRange(2))));
    }
}
