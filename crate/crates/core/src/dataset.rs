//! Delimited time-series ingestion, normalization, windowing, and
//! dataset diagnostics.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field separator for [`load_delimited`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    /// Comma if the first data line contains one, otherwise whitespace.
    Auto,
    Comma,
    Whitespace,
    Tab,
}

/// Which column holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    Last,
    Index(usize),
}

/// A raw multichannel recording: one row per timestep, one integer label
/// per row. Temporal order is the file order.
#[derive(Debug, Clone)]
pub struct RawSeries {
    /// Row-major [n x d].
    pub features: Vec<f64>,
    pub labels: Vec<i64>,
    pub n: usize,
    pub d: usize,
    pub feature_names: Option<Vec<String>>,
}

impl RawSeries {
    pub fn new(features: Vec<f64>, labels: Vec<i64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::data("dataset needs at least one feature"));
        }
        if labels.is_empty() {
            return Err(Error::data("dataset needs at least one row"));
        }
        if features.len() != labels.len() * d {
            return Err(Error::data(format!(
                "feature buffer has {} values, expected {} rows x {} features",
                features.len(),
                labels.len(),
                d
            )));
        }
        if labels.iter().any(|&l| l < 0) {
            return Err(Error::data("labels must be non-negative integers"));
        }
        let n = labels.len();
        Ok(RawSeries { features, labels, n, d, feature_names: None })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    /// First `rows` timesteps (used to restrict fitting statistics to the
    /// training portion).
    pub fn head(&self, rows: usize) -> RawSeries {
        let rows = rows.min(self.n);
        RawSeries {
            features: self.features[..rows * self.d].to_vec(),
            labels: self.labels[..rows].to_vec(),
            n: rows,
            d: self.d,
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Labeled fixed-length windows ready for training: [m x s x d] with one
/// class index per window.
#[derive(Debug, Clone)]
pub struct WindowedDataset {
    /// Row-major [m x s x d].
    pub sequences: Vec<f64>,
    pub labels: Vec<usize>,
    pub m: usize,
    pub s: usize,
    pub d: usize,
    pub class_count: usize,
}

impl WindowedDataset {
    pub fn window(&self, i: usize) -> &[f64] {
        let w = self.s * self.d;
        &self.sequences[i * w..(i + 1) * w]
    }
}

/// Per-feature (min, max) recorded by [`normalize_minmax`]; allows the
/// inverse map and reuse on held-out data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    /// Fit per-feature min/max on `rows x d` data.
    pub fn fit(features: &[f64], d: usize) -> NormStats {
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in features.chunks_exact(d) {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        NormStats { min, max }
    }

    /// x <- (x - min) / (max - min), clamped to [0,1] so data outside the
    /// fitted range (held-out rows) still satisfies the box constraint.
    /// Constant features map to 0.
    pub fn apply(&self, features: &mut [f64], d: usize) {
        for row in features.chunks_exact_mut(d) {
            for (j, v) in row.iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range > 0.0 {
                    ((*v - self.min[j]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                };
            }
        }
    }

    /// Inverse of [`NormStats::apply`] for values inside the fitted range.
    pub fn invert(&self, features: &mut [f64], d: usize) {
        for row in features.chunks_exact_mut(d) {
            for (j, v) in row.iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range > 0.0 { *v * range + self.min[j] } else { self.min[j] };
            }
        }
    }
}

/// Read a delimited recording: d real feature columns plus one integer
/// label column per row. Rows whose label is in `drop_labels` are removed.
pub fn load_delimited(
    path: &Path,
    delimiter: Delimiter,
    label_column: LabelColumn,
    drop_labels: &BTreeSet<i64>,
    has_header: bool,
) -> Result<RawSeries> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);

    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    let mut width: Option<usize> = None;
    let mut resolved = delimiter;
    let mut names: Option<Vec<String>> = None;

    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if resolved == Delimiter::Auto {
            resolved = if trimmed.contains(',') { Delimiter::Comma } else { Delimiter::Whitespace };
        }
        let fields: Vec<&str> = match resolved {
            Delimiter::Comma => trimmed.split(',').map(str::trim).collect(),
            Delimiter::Tab => trimmed.split('\t').map(str::trim).collect(),
            Delimiter::Whitespace | Delimiter::Auto => trimmed.split_whitespace().collect(),
        };
        if has_header && width.is_none() && names.is_none() {
            names = Some(fields.iter().map(|s| s.to_string()).collect());
            continue;
        }
        match width {
            None => {
                if fields.len() < 2 {
                    return Err(Error::data(format!(
                        "line {}: need at least one feature column and one label column",
                        line_no + 1
                    )));
                }
                width = Some(fields.len());
            }
            Some(w) if w != fields.len() => {
                return Err(Error::data(format!(
                    "line {}: expected {} columns, found {}",
                    line_no + 1,
                    w,
                    fields.len()
                )));
            }
            _ => {}
        }
        let w = width.unwrap();
        let label_idx = match label_column {
            LabelColumn::Last => w - 1,
            LabelColumn::Index(i) => {
                if i >= w {
                    return Err(Error::config(format!(
                        "label column {i} out of range for {w} columns"
                    )));
                }
                i
            }
        };
        let label = parse_label(fields[label_idx]).map_err(|msg| {
            Error::data(format!("line {}: {msg}", line_no + 1))
        })?;
        if drop_labels.contains(&label) {
            continue;
        }
        for (i, field) in fields.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                Error::data(format!("line {}: unparseable value {:?}", line_no + 1, field))
            })?;
            features.push(v);
        }
        labels.push(label);
    }

    let w = width.ok_or_else(|| Error::data("empty dataset file"))?;
    if labels.is_empty() {
        return Err(Error::data("empty dataset: every row was dropped"));
    }
    let mut series = RawSeries::new(features, labels, w - 1)?;
    if let Some(mut names) = names {
        let label_idx = match label_column {
            LabelColumn::Last => names.len().saturating_sub(1),
            LabelColumn::Index(i) => i,
        };
        if label_idx < names.len() {
            names.remove(label_idx);
        }
        series.feature_names = Some(names);
    }
    Ok(series)
}

fn parse_label(field: &str) -> std::result::Result<i64, String> {
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    // Tolerate float-formatted integer labels ("3.0").
    if let Ok(v) = field.parse::<f64>() {
        if v.fract() == 0.0 && v.is_finite() {
            return Ok(v as i64);
        }
    }
    Err(format!("label {field:?} does not parse as an integer"))
}

/// Min-max normalize every feature to [0,1] in place, returning the fitted
/// statistics. Emits a warning for constant (informationless) features.
pub fn normalize_minmax(raw: &mut RawSeries) -> NormStats {
    let stats = NormStats::fit(&raw.features, raw.d);
    for j in 0..raw.d {
        if stats.max[j] <= stats.min[j] {
            log::warn!("feature {j} is constant; normalizing to 0.0");
        }
    }
    stats.apply(&mut raw.features, raw.d);
    stats
}

/// Slice a series into fixed-length windows. Window label is the majority
/// label within the window; ties fall back to the final timestep's label.
pub fn window(raw: &RawSeries, s: usize, stride: usize) -> Result<WindowedDataset> {
    if stride == 0 {
        return Err(Error::config("stride must be at least 1"));
    }
    if s == 0 {
        return Err(Error::config("sequence length must be at least 1"));
    }
    if raw.n < s {
        return Err(Error::config(format!(
            "{} rows is shorter than the sequence length {s}",
            raw.n
        )));
    }
    let m = (raw.n - s) / stride + 1;
    let mut sequences = Vec::with_capacity(m * s * raw.d);
    let mut window_labels = Vec::with_capacity(m);
    let max_label = *raw.labels.iter().max().unwrap() as usize;
    let mut counts = vec![0usize; max_label + 1];
    for w in 0..m {
        let start = w * stride;
        sequences.extend_from_slice(&raw.features[start * raw.d..(start + s) * raw.d]);
        counts.iter_mut().for_each(|c| *c = 0);
        for &l in &raw.labels[start..start + s] {
            counts[l as usize] += 1;
        }
        let best = counts.iter().max().copied().unwrap();
        let winners: Vec<usize> =
            counts.iter().enumerate().filter(|(_, c)| **c == best).map(|(l, _)| l).collect();
        let label = if winners.len() == 1 {
            winners[0]
        } else {
            raw.labels[start + s - 1] as usize
        };
        window_labels.push(label);
    }

    // Remap raw label values onto dense class indices [0, N).
    let distinct: BTreeSet<usize> = window_labels.iter().copied().collect();
    let index_of: std::collections::BTreeMap<usize, usize> =
        distinct.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let labels: Vec<usize> = window_labels.iter().map(|l| index_of[l]).collect();

    Ok(WindowedDataset {
        sequences,
        labels,
        m,
        s,
        d: raw.d,
        class_count: distinct.len(),
    })
}

/// Contiguous temporal split: the first ceil(m * train_fraction) windows
/// train, the remainder test. No shuffling across time.
pub fn split(ds: &WindowedDataset, train_fraction: f64) -> Result<(WindowedDataset, WindowedDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::config(format!(
            "train fraction must be in (0,1), got {train_fraction}"
        )));
    }
    let n_train = ((ds.m as f64) * train_fraction).ceil() as usize;
    if n_train == 0 || n_train >= ds.m {
        return Err(Error::config(format!(
            "split of {} windows at fraction {train_fraction} leaves an empty side",
            ds.m
        )));
    }
    let w = ds.s * ds.d;
    let train = WindowedDataset {
        sequences: ds.sequences[..n_train * w].to_vec(),
        labels: ds.labels[..n_train].to_vec(),
        m: n_train,
        s: ds.s,
        d: ds.d,
        class_count: ds.class_count,
    };
    let test = WindowedDataset {
        sequences: ds.sequences[n_train * w..].to_vec(),
        labels: ds.labels[n_train..].to_vec(),
        m: ds.m - n_train,
        s: ds.s,
        d: ds.d,
        class_count: ds.class_count,
    };
    Ok((train, test))
}

/// Mean absolute off-diagonal Pearson correlation between features.
/// Constant features contribute 0 with a warning.
pub fn pearson_avg(raw: &RawSeries) -> Result<f64> {
    if raw.d < 2 {
        return Err(Error::config("pearson_avg needs at least two features"));
    }
    let n = raw.n as f64;
    let d = raw.d;
    let mut mean = vec![0.0; d];
    for row in raw.features.chunks_exact(d) {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = vec![0.0; d * d];
    for row in raw.features.chunks_exact(d) {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov[i * d + j] += di * (row[j] - mean[j]);
            }
        }
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..d {
        let vi = cov[i * d + i];
        if vi <= 0.0 {
            log::warn!("feature {i} is constant; correlations treated as 0");
        }
        for j in (i + 1)..d {
            let vj = cov[j * d + j];
            let r = if vi > 0.0 && vj > 0.0 {
                cov[i * d + j] / (vi.sqrt() * vj.sqrt())
            } else {
                0.0
            };
            total += r.abs();
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Per-feature variances sorted descending, with the cumulative share of
/// total variance and the originating feature index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceSummary {
    /// (feature index, variance) sorted by variance descending.
    pub sorted: Vec<(usize, f64)>,
    /// Cumulative fraction of total variance, same order.
    pub cumulative_ratio: Vec<f64>,
}

/// Population variances per feature, sorted descending with cumulative
/// ratios. Ties sort by feature index for determinism.
pub fn feature_variance_summary(features: &[f64], d: usize) -> VarianceSummary {
    let variances = feature_variances(features, d);
    let mut sorted: Vec<(usize, f64)> = variances.into_iter().enumerate().collect();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let total: f64 = sorted.iter().map(|(_, v)| v).sum();
    let mut acc = 0.0;
    let cumulative_ratio = sorted
        .iter()
        .map(|(_, v)| {
            acc += v;
            if total > 0.0 { acc / total } else { 1.0 }
        })
        .collect();
    VarianceSummary { sorted, cumulative_ratio }
}

/// Population variance of each feature column.
pub fn feature_variances(features: &[f64], d: usize) -> Vec<f64> {
    let n = (features.len() / d) as f64;
    let mut mean = vec![0.0; d];
    for row in features.chunks_exact(d) {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for row in features.chunks_exact(d) {
        for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
            let dv = v - m;
            *s += dv * dv;
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    var
}

/// Majority label per disjoint span of `c` rows, ties to the span's last
/// label; mirrors window labeling so candle rows keep sensible labels.
pub fn aggregate_labels(labels: &[i64], c: usize) -> Vec<i64> {
    labels
        .chunks_exact(c)
        .map(|chunk| {
            let mut counts: std::collections::BTreeMap<i64, usize> = Default::default();
            for &l in chunk {
                *counts.entry(l).or_insert(0) += 1;
            }
            let best = counts.values().max().copied().unwrap();
            let winners: Vec<i64> =
                counts.iter().filter(|(_, c)| **c == best).map(|(l, _)| *l).collect();
            if winners.len() == 1 { winners[0] } else { chunk[chunk.len() - 1] }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_three_rows() {
        let f = write_temp("0.1 0.2 1\n0.3 0.4 1\n0.5 0.6 2\n");
        let raw = load_delimited(
            f.path(),
            Delimiter::Auto,
            LabelColumn::Last,
            &BTreeSet::new(),
            false,
        )
        .unwrap();
        assert_eq!(raw.n, 3);
        assert_eq!(raw.d, 2);
        assert_eq!(raw.labels, vec![1, 1, 2]);
        assert_eq!(raw.row(2), &[0.5, 0.6]);
    }

    #[test]
    fn load_detects_comma_delimiter() {
        let f = write_temp("0.1,0.2,1\n0.3,0.4,2\n");
        let raw = load_delimited(
            f.path(),
            Delimiter::Auto,
            LabelColumn::Last,
            &BTreeSet::new(),
            false,
        )
        .unwrap();
        assert_eq!(raw.d, 2);
        assert_eq!(raw.labels, vec![1, 2]);
    }

    #[test]
    fn ragged_rows_report_line_number() {
        let f = write_temp("1 2 0\n1 2 3 0\n");
        let err = load_delimited(
            f.path(),
            Delimiter::Auto,
            LabelColumn::Last,
            &BTreeSet::new(),
            false,
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn unparseable_value_reports_line_number() {
        let f = write_temp("1 2 0\n1 oops 0\n");
        let err = load_delimited(
            f.path(),
            Delimiter::Auto,
            LabelColumn::Last,
            &BTreeSet::new(),
            false,
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn dropping_every_label_is_an_error() {
        let f = write_temp("1 2 0\n3 4 0\n");
        let drops: BTreeSet<i64> = [0].into();
        let err = load_delimited(f.path(), Delimiter::Auto, LabelColumn::Last, &drops, false)
            .unwrap_err();
        assert!(err.to_string().contains("empty dataset"), "{err}");
    }

    #[test]
    fn normalize_basic_column() {
        let mut raw = RawSeries::new(vec![2.0, 4.0, 6.0], vec![1, 1, 1], 1).unwrap();
        let stats = normalize_minmax(&mut raw);
        assert_eq!(raw.features, vec![0.0, 0.5, 1.0]);
        assert_eq!(stats.min, vec![2.0]);
        assert_eq!(stats.max, vec![6.0]);
    }

    #[test]
    fn normalize_identity_on_unit_range() {
        let mut raw = RawSeries::new(vec![0.0, 1.0, 0.25], vec![1, 1, 1], 1).unwrap();
        normalize_minmax(&mut raw);
        assert_eq!(raw.features, vec![0.0, 1.0, 0.25]);
    }

    #[test]
    fn normalize_constant_feature_maps_to_zero() {
        let mut raw = RawSeries::new(vec![3.0, 3.0], vec![1, 1], 1).unwrap();
        normalize_minmax(&mut raw);
        assert_eq!(raw.features, vec![0.0, 0.0]);
    }

    #[test]
    fn normalize_round_trips() {
        let vals = vec![2.0, -1.5, 7.25, 0.0, 3.125, 9.0];
        let mut raw = RawSeries::new(vals.clone(), vec![1; 3], 2).unwrap();
        let stats = normalize_minmax(&mut raw);
        let mut back = raw.features.clone();
        stats.invert(&mut back, 2);
        for (a, b) in back.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn window_counts_without_overlap() {
        let raw = RawSeries::new((0..10).map(|v| v as f64).collect(), vec![1; 10], 1).unwrap();
        let ds = window(&raw, 5, 5).unwrap();
        assert_eq!(ds.m, 2);
        assert_eq!(ds.window(0), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ds.window(1), &[5.0, 6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn window_single_label_series() {
        let raw = RawSeries::new(vec![0.0; 12], vec![4; 12], 1).unwrap();
        let ds = window(&raw, 4, 2).unwrap();
        assert!(ds.labels.iter().all(|&l| l == 0)); // remapped to class 0
        assert_eq!(ds.class_count, 1);
    }

    #[test]
    fn window_majority_and_tie_break() {
        // Two windows of 4 at stride 1 over labels [1,1,2,2,1]: both tie
        // {1,2}, so both take their final timestep's label (2 then 1).
        let raw = RawSeries::new(vec![0.0; 5], vec![1, 1, 2, 2, 1], 1).unwrap();
        let ds = window(&raw, 4, 1).unwrap();
        assert_eq!(ds.class_count, 2);
        assert_eq!(ds.labels, vec![1, 0]); // raw labels [2, 1] remapped densely

        // Clear majority wins even when the final timestep disagrees.
        let raw = RawSeries::new(vec![0.0; 4], vec![2, 2, 2, 1], 1).unwrap();
        let ds = window(&raw, 4, 1).unwrap();
        assert_eq!(ds.class_count, 1);
        assert_eq!(ds.labels, vec![0]);
    }

    #[test]
    fn window_too_short_errors() {
        let raw = RawSeries::new(vec![0.0; 3], vec![1; 3], 1).unwrap();
        assert!(window(&raw, 5, 1).is_err());
    }

    #[test]
    fn split_85_15() {
        let raw = RawSeries::new(vec![0.0; 109], vec![1; 109], 1).unwrap();
        let ds = window(&raw, 10, 1).unwrap();
        assert_eq!(ds.m, 100);
        let (train, test) = split(&ds, 0.85).unwrap();
        assert_eq!(train.m, 85);
        assert_eq!(test.m, 15);
    }

    #[test]
    fn split_is_a_partition() {
        let n = 57;
        let raw =
            RawSeries::new((0..n).map(|v| v as f64).collect(), vec![1; n], 1).unwrap();
        let ds = window(&raw, 3, 2).unwrap();
        let (train, test) = split(&ds, 0.7).unwrap();
        assert_eq!(train.m + test.m, ds.m);
        let mut joined = train.sequences.clone();
        joined.extend_from_slice(&test.sequences);
        assert_eq!(joined, ds.sequences);
    }

    #[test]
    fn pearson_identical_features_is_one() {
        let mut features = Vec::new();
        for i in 0..50 {
            let v = (i as f64 * 0.7).sin();
            features.push(v);
            features.push(v);
        }
        let raw = RawSeries::new(features, vec![1; 50], 2).unwrap();
        let r = pearson_avg(&raw).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_independent_features_near_zero() {
        // Deterministic LCG sampling; 10k rows of two independent streams.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 10_000;
        let mut features = Vec::with_capacity(2 * n);
        for _ in 0..n {
            features.push(next());
            features.push(next());
        }
        let raw = RawSeries::new(features, vec![1; n], 2).unwrap();
        let r = pearson_avg(&raw).unwrap();
        assert!(r < 0.05, "expected near-zero correlation, got {r}");
    }

    #[test]
    fn pearson_invariant_to_positive_affine_rescale() {
        let mut features = Vec::new();
        for i in 0..200 {
            let t = i as f64 * 0.1;
            features.push(t.sin());
            features.push(t.cos() + 0.3 * t.sin());
        }
        let raw = RawSeries::new(features.clone(), vec![1; 200], 2).unwrap();
        let r1 = pearson_avg(&raw).unwrap();
        for row in features.chunks_exact_mut(2) {
            row[0] = 5.0 * row[0] + 20.0;
            row[1] = 0.01 * row[1] - 3.0;
        }
        let raw2 = RawSeries::new(features, vec![1; 200], 2).unwrap();
        let r2 = pearson_avg(&raw2).unwrap();
        assert!((r1 - r2).abs() < 1e-12);
    }

    #[test]
    fn variance_summary_ratios() {
        // Two features with variances 3 and 1 (population).
        // var([0,2,4]...) scaled: use [-a, 0, a] => var = 2a^2/3.
        let a3 = (4.5f64).sqrt(); // var 3
        let a1 = (1.5f64).sqrt(); // var 1
        let features = vec![-a3, -a1, 0.0, 0.0, a3, a1];
        let summary = feature_variance_summary(&features, 2);
        assert_eq!(summary.sorted[0].0, 0);
        assert!((summary.sorted[0].1 - 3.0).abs() < 1e-12);
        assert!((summary.cumulative_ratio[0] - 0.75).abs() < 1e-12);
        assert!((summary.cumulative_ratio[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_labels_majority_and_tie() {
        let labels = vec![1, 1, 2, 2, 3, 3, 3, 4];
        let agg = aggregate_labels(&labels, 4);
        assert_eq!(agg, vec![2, 3]); // tie -> last of chunk; majority 3
    }

    #[test]
    fn windowing_preserves_values_property() {
        // Windows are exact slices of the raw series.
        let n = 40;
        let d = 3;
        let features: Vec<f64> = (0..n * d).map(|v| (v as f64).sqrt()).collect();
        let raw = RawSeries::new(features, vec![1; n], d).unwrap();
        let ds = window(&raw, 7, 3).unwrap();
        for w in 0..ds.m {
            let start = w * 3;
            assert_eq!(ds.window(w), &raw.features[start * d..(start + 7) * d]);
        }
    }
}
