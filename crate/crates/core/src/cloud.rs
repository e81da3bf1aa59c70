//! Finite point samples standing in for compact sets, and labelled datasets.
//!
//! Clouds are read and written as CSV (one point per row, no header required)
//! or JSON (an array of arrays).

use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<DVector<f64>>,
}

impl PointCloud {
    /// Builds a non-empty cloud; every point must have length `dim`.
    pub fn new(dim: usize, points: Vec<DVector<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyData);
        }
        Self::with_points(dim, points)
    }

    /// An explicitly empty cloud of the given dimension.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            points: Vec::new(),
        }
    }

    fn with_points(dim: usize, points: Vec<DVector<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::pre("point dimension must be positive"));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        if points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::pre("point coordinates must be finite"));
        }
        Ok(Self { dim, points })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyData)?;
        let dim = first.as_ref().len();
        let points = rows
            .iter()
            .map(|r| DVector::from_column_slice(r.as_ref()))
            .collect();
        Self::new(dim, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DVector<f64>> {
        self.points.iter()
    }

    pub fn push(&mut self, point: DVector<f64>) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        self.points.push(point);
        Ok(())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.as_slice().to_vec()).collect()
    }

    pub fn centroid(&self) -> Option<DVector<f64>> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self
            .points
            .iter()
            .fold(DVector::zeros(self.dim), |acc, p| acc + p);
        Some(sum / self.points.len() as f64)
    }

    /// Largest distance from the centroid; zero for a single point.
    pub fn radius(&self) -> f64 {
        match self.centroid() {
            Some(c) => self
                .points
                .iter()
                .map(|p| (p - &c).norm())
                .fold(0.0, f64::max),
            None => 0.0,
        }
    }

    pub fn union(&self, other: &PointCloud) -> Result<PointCloud> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Ok(PointCloud {
            dim: self.dim,
            points,
        })
    }

    /// Applies `f` to every point. The output dimension is taken from the
    /// first image.
    pub fn map<F>(&self, mut f: F) -> Result<PointCloud>
    where
        F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    {
        let images = self.points.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        let dim = images.first().map_or(self.dim, |p| p.len());
        Self::with_points(dim, images)
    }

    /// Minimum pairwise Euclidean distance, `None` for fewer than two points.
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        let n = self.points.len();
        if n < 2 {
            return None;
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min((&self.points[i] - &self.points[j]).norm());
            }
        }
        Some(best)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let rows = parse_csv_rows(text)?;
        Self::from_rows(&rows)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            push_csv_row(&mut out, p.iter().copied());
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        if let Some(first) = rows.first() {
            if let Some((i, row)) = rows
                .iter()
                .enumerate()
                .find(|(_, r)| r.len() != first.len())
            {
                return Err(Error::parse(
                    format!("point {i}"),
                    format!("has {} coordinates, expected {}", row.len(), first.len()),
                ));
            }
        }
        Self::from_rows(&rows)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_rows()).expect("finite floats serialize")
    }

    /// Reads a cloud; files ending in `.json` are parsed as JSON, anything
    /// else as CSV.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if is_json(path) {
            Self::from_json_str(&text)
        } else {
            Self::from_csv_str(&text)
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = if is_json(path) {
            self.to_json_string()
        } else {
            self.to_csv_string()
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a DVector<f64>;
    type IntoIter = std::slice::Iter<'a, DVector<f64>>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Sample points with real-valued targets.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: PointCloud,
    targets: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(points: PointCloud, targets: Vec<f64>) -> Result<Self> {
        if points.len() != targets.len() {
            return Err(Error::pre(format!(
                "{} points but {} targets",
                points.len(),
                targets.len()
            )));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::pre("targets must be finite"));
        }
        Ok(Self { points, targets })
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DVector<f64>, f64)> {
        self.points.iter().zip(self.targets.iter().copied())
    }

    /// Distinct target values in ascending order.
    pub fn classes(&self) -> Vec<f64> {
        let mut values = self.targets.clone();
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }

    /// Points grouped by target value, in the order of [`Self::classes`].
    pub fn split_by_class(&self) -> Vec<(f64, PointCloud)> {
        self.classes()
            .into_iter()
            .map(|value| {
                let pts = self
                    .iter()
                    .filter(|(_, t)| *t == value)
                    .map(|(p, _)| p.clone())
                    .collect();
                (
                    value,
                    PointCloud {
                        dim: self.dim(),
                        points: pts,
                    },
                )
            })
            .collect()
    }

    /// CSV with one sample per row: coordinates followed by the target.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let rows = parse_csv_rows(text)?;
        let width = rows.first().ok_or(Error::EmptyData)?.len();
        if width < 2 {
            return Err(Error::parse(
                "line 1",
                "dataset rows need at least one coordinate and a target",
            ));
        }
        let targets = rows.iter().map(|r| r[width - 1]).collect();
        let coords: Vec<&[f64]> = rows.iter().map(|r| &r[..width - 1]).collect();
        Self::new(PointCloud::from_rows(&coords)?, targets)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim())
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("target".to_string()))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (p, t) in self.iter() {
            push_csv_row(&mut out, p.iter().copied().chain(std::iter::once(t)));
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Reads one value per row (or a single row of values).
pub fn read_values_csv(text: &str) -> Result<Vec<f64>> {
    let rows = parse_csv_rows(text)?;
    if rows.len() == 1 {
        return Ok(rows.into_iter().next().unwrap_or_default());
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() == 1 {
                Ok(r[0])
            } else {
                Err(Error::parse(
                    format!("row {}", i + 1),
                    format!("expected one value, found {}", r.len()),
                ))
            }
        })
        .collect()
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub(crate) fn push_csv_row(out: &mut String, values: impl Iterator<Item = f64>) {
    let row: Vec<String> = values.map(|v| format!("{v:?}")).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Parses numeric CSV rows. A non-numeric first row is treated as a header
/// and skipped; `#` starts a comment line.
fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(col, f)| f.parse::<f64>().map_err(|_| col))
            .collect();
        match parsed {
            Ok(values) => {
                if let Some(col) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::parse(
                        format!("line {line}, column {}", col + 1),
                        "value is not finite",
                    ));
                }
                match width {
                    None => width = Some(values.len()),
                    Some(w) if w != values.len() => {
                        return Err(Error::parse(
                            format!("line {line}"),
                            format!("expected {w} fields, found {}", values.len()),
                        ))
                    }
                    _ => {}
                }
                rows.push(values);
            }
            // header
            Err(_) if index == 0 => {}
            Err(col) => {
                return Err(Error::parse(
                    format!("line {line}, column {}", col + 1),
                    format!("`{}` is not a number", &record[col]),
                ))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(rows)
}
