//! Point-cloud datasets: construction, min-max normalization, seeded
//! train/validation splits, and CSV ingestion/export.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// A set of N points in D dimensions with one scalar value per point.
///
/// Coordinates are stored flat, row-major (`dim` entries per point).
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    points: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl RawDataset {
    /// Build a dataset from flat row-major coordinates.
    pub fn from_flat(points: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if points.len() != values.len() * dim {
            return Err(Error::LengthMismatch {
                points: points.len() / dim,
                values: values.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::TooFewPoints { min: 1, got: 0 });
        }
        for (i, v) in points.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i / dim });
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(RawDataset { points, values, dim })
    }

    /// Build a dataset from a list of coordinate vectors.
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(flat, values, dim.max(1))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// All coordinates, flat row-major.
    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    fn subset(&self, indices: &[usize]) -> RawDataset {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        let mut values = Vec::with_capacity(indices.len());
        for &i in indices {
            points.extend_from_slice(self.point(i));
            values.push(self.values[i]);
        }
        RawDataset { points, values, dim: self.dim }
    }
}

/// Affine min-max maps: inputs per dimension to [0,1], values to [-1,1].
///
/// Degenerate axes (max == min) map to the target midpoint (0.5 for
/// coordinates, 0 for values) and denormalize back to the stored constant.
/// An all-zero value column keeps the identity map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub in_min: Vec<f64>,
    pub in_max: Vec<f64>,
    pub out_min: f64,
    pub out_max: f64,
}

impl NormalizationTransform {
    /// Transform that leaves everything unchanged.
    pub fn identity(dim: usize) -> Self {
        NormalizationTransform {
            in_min: vec![0.0; dim],
            in_max: vec![1.0; dim],
            out_min: -1.0,
            out_max: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.in_min.len()
    }

    pub fn normalize_point(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(self.in_min.iter().zip(&self.in_max))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    (x - lo) / (hi - lo)
                } else {
                    0.5
                }
            })
            .collect()
    }

    pub fn denormalize_point(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(self.in_min.iter().zip(&self.in_max))
            .map(|(&x, (&lo, &hi))| if hi > lo { lo + x * (hi - lo) } else { lo })
            .collect()
    }

    pub fn normalize_value(&self, v: f64) -> f64 {
        let (lo, hi) = (self.out_min, self.out_max);
        if hi > lo {
            2.0 * (v - lo) / (hi - lo) - 1.0
        } else if lo == 0.0 {
            v
        } else {
            0.0
        }
    }

    pub fn denormalize_value(&self, v: f64) -> f64 {
        let (lo, hi) = (self.out_min, self.out_max);
        if hi > lo {
            lo + (v + 1.0) * (hi - lo) / 2.0
        } else if lo == 0.0 {
            v
        } else {
            lo
        }
    }
}

/// Min-max normalize a dataset: coordinates to [0,1] per dimension, values
/// to [-1,1]. Returns the transform for inverse mapping of predictions.
pub fn normalize(raw: &RawDataset) -> (RawDataset, NormalizationTransform) {
    let dim = raw.dim();
    let mut in_min = vec![f64::INFINITY; dim];
    let mut in_max = vec![f64::NEG_INFINITY; dim];
    for p in raw.iter_points() {
        for (d, &x) in p.iter().enumerate() {
            in_min[d] = in_min[d].min(x);
            in_max[d] = in_max[d].max(x);
        }
    }
    let out_min = raw.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let out_max = raw.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let transform = NormalizationTransform { in_min, in_max, out_min, out_max };

    let mut points = Vec::with_capacity(raw.points_flat().len());
    for p in raw.iter_points() {
        points.extend_from_slice(&transform.normalize_point(p));
    }
    let values = raw.values().iter().map(|&v| transform.normalize_value(v)).collect();
    (RawDataset { points, values, dim }, transform)
}

/// A normalized dataset partitioned into train and validation subsets.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: RawDataset,
    pub validation: RawDataset,
    pub transform: NormalizationTransform,
    pub seed: u64,
}

/// Deterministic random partition: `floor(N * ratio)` points go to train,
/// the remainder to validation.
pub fn split(data: &RawDataset, ratio: f64, seed: u64) -> Result<SplitDataset> {
    split_with_transform(data, NormalizationTransform::identity(data.dim()), ratio, seed)
}

/// `split` with an explicit transform carried along (used after `normalize`).
pub fn split_with_transform(
    data: &RawDataset,
    transform: NormalizationTransform,
    ratio: f64,
    seed: u64,
) -> Result<SplitDataset> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    let n = data.len();
    if n < 5 {
        return Err(Error::TooFewPoints { min: 5, got: n });
    }
    let n_train = (n as f64 * ratio).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::EmptySplit { n, ratio });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train = data.subset(&indices[..n_train]);
    let validation = data.subset(&indices[n_train..]);
    Ok(SplitDataset { train, validation, transform, seed })
}

/// Normalize jointly, then split. The standard preprocessing pipeline.
pub fn normalize_and_split(raw: &RawDataset, ratio: f64, seed: u64) -> Result<SplitDataset> {
    let (norm, transform) = normalize(raw);
    split_with_transform(&norm, transform, ratio, seed)
}

fn expected_header(dim: usize) -> String {
    let mut h = String::new();
    for d in 0..dim {
        let _ = write!(h, "x{d},");
    }
    h.push_str("phi");
    h
}

/// Load a dataset from CSV with header `x0,...,x{D-1},phi`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<RawDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_csv_str(&text)
}

pub(crate) fn load_csv_str(text: &str) -> Result<RawDataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Csv {
        line: 1,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    let dim = cols.len().saturating_sub(1);
    if dim == 0 || header.trim_end() != expected_header(dim) {
        return Err(Error::Csv {
            line: 1,
            msg: format!("expected header 'x0,...,x{{D-1}},phi', got '{}'", header.trim_end()),
        });
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Csv {
                line: line_no,
                msg: format!("expected {} fields, got {}", dim + 1, fields.len()),
            });
        }
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f.trim().parse().map_err(|_| Error::Csv {
                line: line_no,
                msg: format!("non-numeric cell '{f}' in column {c}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line: line_no,
                    msg: format!("non-finite cell '{f}' in column {c}"),
                });
            }
            if c < dim {
                points.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if values.len() < 2 {
        return Err(Error::TooFewPoints { min: 2, got: values.len() });
    }
    RawDataset::from_flat(points, values, dim)
}

/// Write a dataset as CSV. Floats are printed in shortest round-trip form,
/// so save → load is exact.
pub fn save_csv(data: &RawDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&expected_header(data.dim()));
    out.push('\n');
    for (p, v) in data.iter_points().zip(data.values()) {
        for x in p {
            let _ = write!(out, "{x},");
        }
        let _ = writeln!(out, "{v}");
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
