//! CSV dataset ingestion and path export in long CSV and versioned JSON.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly and does not depend on locale.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::{
    collapse, Dataset, Method, Parametrization, PathEvent, PiecewiseLinearPath,
    StandardizedDesign,
};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn parse_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn parse_field(field: &str, line: u64, column: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("column {column}: cannot parse {field:?} as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("column {column}: non-finite value {field:?}"),
        });
    }
    Ok(v)
}

/// Read a numeric dataset. The header row is optional: a first row with any
/// non-numeric field is taken as column names. The response is the last
/// column unless `response_col` (0-based) says otherwise.
pub fn read_dataset<R: Read>(reader: R, response_col: Option<usize>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(parse_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if i == 0 {
            width = rec.len();
            if rec.iter().any(|f| f.parse::<f64>().is_err()) {
                names = Some(rec.iter().map(str::to_string).collect());
                continue;
            }
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| parse_field(f, line, j))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::Dimension("dataset has no data rows".into()));
    }
    if width < 2 {
        return Err(Error::Dimension(
            "need at least one predictor column and a response column".into(),
        ));
    }
    let yc = response_col.unwrap_or(width - 1);
    if yc >= width {
        return Err(Error::Config(format!(
            "response column {yc} out of range for {width} columns"
        )));
    }

    let n = rows.len();
    let p = width - 1;
    let mut x = Array2::zeros((n, p));
    let mut y = Array1::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let mut k = 0;
        for (j, &v) in row.iter().enumerate() {
            if j == yc {
                y[i] = v;
            } else {
                x[[i, k]] = v;
                k += 1;
            }
        }
    }
    let data = Dataset::new(x, y)?;
    match names {
        Some(mut names) => {
            names.remove(yc);
            data.with_feature_names(names)
        }
        None => Ok(data),
    }
}

pub fn read_dataset_file(path: &Path, response_col: Option<usize>) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?), response_col)
}

/// Write predictors followed by the response, with a header row.
pub fn write_dataset<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let names: Vec<String> = match &data.feature_names {
        Some(names) => names.clone(),
        None => (0..data.p()).map(|j| format!("x{j}")).collect(),
    };
    writeln!(w, "{},y", names.join(","))?;
    for (row, y) in data.x.rows().into_iter().zip(data.y.iter()) {
        for v in row {
            write!(w, "{v:.16e},")?;
        }
        writeln!(w, "{y:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Coordinate system for an exported path.
#[derive(Debug, Clone, Copy)]
pub enum Coordinates<'a> {
    /// Raw `2p` expanded coefficients on the standardized scale.
    Expanded,
    /// Collapsed `p` coefficients rescaled to the original predictors, with
    /// an intercept per vertex.
    OriginalScale(&'a StandardizedDesign),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CoordinateKind {
    Expanded,
    CollapsedOriginalScale,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathDocument {
    schema_version: u32,
    method: Method,
    parametrization: Parametrization,
    coordinates: CoordinateKind,
    p: usize,
    breakpoints: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    segment_active_sets: Vec<Vec<usize>>,
    #[serde(default)]
    events: Vec<PathEvent>,
    #[serde(default)]
    max_correlations: Vec<f64>,
    #[serde(default)]
    truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intercepts: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature_names: Option<Vec<String>>,
}

fn rescaled(path: &PiecewiseLinearPath, design: &StandardizedDesign) -> (Vec<Vec<f64>>, Vec<f64>) {
    path.vertices
        .iter()
        .map(|v| {
            let (b0, coefs) = design.to_original_scale(collapse(v).view());
            (coefs.to_vec(), b0)
        })
        .unzip()
}

pub fn write_path_json<W: Write>(
    writer: W,
    path: &PiecewiseLinearPath,
    coords: Coordinates,
) -> Result<()> {
    let (coordinates, vertices, intercepts, feature_names) = match coords {
        Coordinates::Expanded => (CoordinateKind::Expanded, path.vertices.clone(), None, None),
        Coordinates::OriginalScale(design) => {
            let (vertices, intercepts) = rescaled(path, design);
            (
                CoordinateKind::CollapsedOriginalScale,
                vertices,
                Some(intercepts),
                design.feature_names().map(<[String]>::to_vec),
            )
        }
    };
    let doc = PathDocument {
        schema_version: SCHEMA_VERSION,
        method: path.method,
        parametrization: path.parametrization,
        coordinates,
        p: path.p,
        breakpoints: path.breakpoints.clone(),
        vertices,
        segment_active_sets: path.segment_active_sets.clone(),
        events: path.events.clone(),
        max_correlations: path.max_correlations.clone(),
        truncated: path.truncated,
        intercepts,
        feature_names,
    };
    let mut w = BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Re-import a path written in expanded coordinates.
pub fn read_path_json<R: Read>(reader: R) -> Result<PiecewiseLinearPath> {
    let doc: PathDocument = serde_json::from_reader(reader)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Domain(format!(
            "unsupported path schema version {}",
            doc.schema_version
        )));
    }
    if doc.coordinates != CoordinateKind::Expanded {
        return Err(Error::Domain(
            "only paths exported in expanded coordinates can be re-imported".into(),
        ));
    }
    let path = PiecewiseLinearPath {
        method: doc.method,
        parametrization: doc.parametrization,
        p: doc.p,
        breakpoints: doc.breakpoints,
        vertices: doc.vertices,
        segment_active_sets: doc.segment_active_sets,
        events: doc.events,
        max_correlations: doc.max_correlations,
        truncated: doc.truncated,
    };
    check_shape(&path)?;
    Ok(path)
}

fn check_shape(path: &PiecewiseLinearPath) -> Result<()> {
    if path.vertices.len() != path.breakpoints.len() || path.vertices.is_empty() {
        return Err(Error::Dimension(format!(
            "{} vertices for {} breakpoints",
            path.vertices.len(),
            path.breakpoints.len()
        )));
    }
    if let Some(v) = path.vertices.iter().find(|v| v.len() != 2 * path.p) {
        return Err(Error::Dimension(format!(
            "vertex of length {} in a path with p = {}",
            v.len(),
            path.p
        )));
    }
    if path.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("breakpoints are not increasing".into()));
    }
    Ok(())
}

/// Long-format CSV: one `breakpoint,coordinate,value` row per vertex entry.
/// A leading `#` line carries the method, parametrization and `p`.
pub fn write_path_csv<W: Write>(
    writer: W,
    path: &PiecewiseLinearPath,
    coords: Coordinates,
) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let param = serde_json::to_value(path.parametrization)?;
    let method = serde_json::to_value(path.method)?;
    let param = param.as_str().unwrap_or_default();
    let method = method.as_str().unwrap_or_default();
    match coords {
        Coordinates::Expanded => {
            writeln!(
                w,
                "# method={method} parametrization={param} p={} coordinates=expanded",
                path.p
            )?;
            writeln!(w, "breakpoint,coordinate,value")?;
            for (ell, v) in path.breakpoints.iter().zip(&path.vertices) {
                for (j, b) in v.iter().enumerate() {
                    writeln!(w, "{ell:.16e},{j},{b:.16e}")?;
                }
            }
        }
        Coordinates::OriginalScale(design) => {
            writeln!(
                w,
                "# method={method} parametrization={param} p={} coordinates=collapsed_original_scale",
                path.p
            )?;
            writeln!(w, "breakpoint,coordinate,value")?;
            let (vertices, intercepts) = rescaled(path, design);
            for ((ell, v), b0) in path.breakpoints.iter().zip(&vertices).zip(&intercepts) {
                writeln!(w, "{ell:.16e},intercept,{b0:.16e}")?;
                for (j, b) in v.iter().enumerate() {
                    writeln!(w, "{ell:.16e},{j},{b:.16e}")?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Default)]
struct CsvMeta {
    method: Option<Method>,
    parametrization: Option<Parametrization>,
    p: Option<usize>,
    expanded: bool,
}

fn parse_meta(line: &str) -> Result<CsvMeta> {
    let mut meta = CsvMeta {
        expanded: true,
        ..CsvMeta::default()
    };
    for token in line.trim_start_matches('#').split_whitespace() {
        let Some((key, value)) = token.split_once('=') else {
            continue;
        };
        let quoted = serde_json::Value::String(value.to_string());
        match key {
            "method" => meta.method = serde_json::from_value(quoted).ok(),
            "parametrization" => meta.parametrization = serde_json::from_value(quoted).ok(),
            "p" => meta.p = value.parse().ok(),
            "coordinates" => meta.expanded = value == "expanded",
            _ => {}
        }
    }
    if !meta.expanded {
        return Err(Error::Domain(
            "only paths exported in expanded coordinates can be re-imported".into(),
        ));
    }
    Ok(meta)
}

/// Re-import an expanded long-format CSV path. Without the metadata line the
/// method is `Unknown`, the parametrization defaults to the L1 norm and `p`
/// is inferred from the coordinate count. Segment active sets are rebuilt
/// from the coordinates that change between vertices.
pub fn read_path_csv<R: Read>(reader: R) -> Result<PiecewiseLinearPath> {
    let mut text = String::new();
    BufReader::new(reader).read_to_string(&mut text)?;
    let meta = match text.lines().next() {
        Some(first) if first.starts_with('#') => parse_meta(first)?,
        _ => CsvMeta::default(),
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut breakpoints: Vec<f64> = Vec::new();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(parse_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        if &rec[0] == "breakpoint" {
            continue;
        }
        let ell = parse_field(&rec[0], line, 0)?;
        let coord: usize = rec[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("coordinate {:?} is not an expanded index", &rec[1]),
        })?;
        let value = parse_field(&rec[2], line, 2)?;
        if breakpoints.last() != Some(&ell) {
            breakpoints.push(ell);
            vertices.push(Vec::new());
        }
        let vertex = vertices.last_mut().expect("vertex pushed above");
        if coord != vertex.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected coordinate {}, found {coord}", vertex.len()),
            });
        }
        vertex.push(value);
    }
    let width = vertices.first().map_or(0, Vec::len);
    let p = meta.p.unwrap_or(width / 2);
    let segment_active_sets = vertices
        .windows(2)
        .map(|w| (0..w[0].len()).filter(|&j| w[1][j] != w[0][j]).collect())
        .collect();
    let path = PiecewiseLinearPath {
        method: meta.method.unwrap_or(Method::Unknown),
        parametrization: meta.parametrization.unwrap_or(Parametrization::L1Norm),
        p,
        breakpoints,
        vertices,
        segment_active_sets,
        events: Vec::new(),
        max_correlations: Vec::new(),
        truncated: false,
    };
    check_shape(&path)?;
    Ok(path)
}

/// Pick the format from the file extension: `.json` or anything else as CSV.
pub fn write_path_file(path: &PiecewiseLinearPath, out: &Path, coords: Coordinates) -> Result<()> {
    let file = File::create(out)?;
    if is_json(out) {
        write_path_json(file, path, coords)
    } else {
        write_path_csv(file, path, coords)
    }
}

pub fn read_path_file(input: &Path) -> Result<PiecewiseLinearPath> {
    let file = File::open(input)?;
    if is_json(input) {
        read_path_json(BufReader::new(file))
    } else {
        read_path_csv(file)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_detected() {
        let with = "a,b,y\n1,2,3\n4,5,7\n";
        let without = "1,2,3\n4,5,7\n";
        let d1 = read_dataset(with.as_bytes(), None).unwrap();
        let d2 = read_dataset(without.as_bytes(), None).unwrap();
        assert_eq!(d1.x, d2.x);
        assert_eq!(d1.y.to_vec(), vec![3.0, 7.0]);
        assert_eq!(d1.feature_names.as_deref(), Some(&["a".to_string(), "b".to_string()][..]));
    }

    #[test]
    fn response_column_override() {
        let d = read_dataset("y,a\n3,1\n7,2\n".as_bytes(), Some(0)).unwrap();
        assert_eq!(d.y.to_vec(), vec![3.0, 7.0]);
        assert_eq!(d.x.column(0).to_vec(), vec![1.0, 2.0]);
    }

    #[test]
    fn bad_field_reports_line() {
        let err = read_dataset("a,y\n1,2\n3,oops\n".as_bytes(), None).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = read_dataset("1,2\n3,4\n5\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }
}
