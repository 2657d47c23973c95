//! Per-second CAN trace parsing and storage.
//!
//! The external trace format is CSV: the first line holds feature names, every
//! following line one second of telemetry at 1 Hz (row index = seconds from
//! trip start). An empty cell is a missing value and stays distinguishable
//! from `0.0` all the way through the pipeline.

use std::fmt;

#[derive(Debug)]
pub enum DatasetError {
    /// Malformed CSV structure or cell content, with a 1-based line number.
    Parse { line: usize, message: String },
    /// Feature-name schema disagreement between traces.
    Schema(String),
    /// Trace-level invariant violation.
    Invalid(String),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Self::Schema(s) => write!(f, "schema error: {s}"),
            Self::Invalid(s) => write!(f, "invalid trace: {s}"),
        }
    }
}

impl std::error::Error for DatasetError {}

/// One trip's multivariate telemetry, one row per second.
///
/// Immutable after construction; all invariants (rectangular sample matrix,
/// unique non-empty feature names, at least one row) are checked in [`CanTrace::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct CanTrace {
    trace_id: String,
    driver_label: Option<String>,
    sample_rate_hz: u32,
    feature_names: Vec<String>,
    samples: Vec<Vec<Option<f64>>>,
}

impl CanTrace {
    pub fn new(
        trace_id: impl Into<String>,
        driver_label: Option<String>,
        feature_names: Vec<String>,
        samples: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, DatasetError> {
        validate_feature_names(&feature_names)?;
        if samples.is_empty() {
            return Err(DatasetError::Invalid("trace must contain at least one row".into()));
        }
        for (i, row) in samples.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(DatasetError::Invalid(format!(
                    "row {} has {} values, expected {}",
                    i,
                    row.len(),
                    feature_names.len()
                )));
            }
            if let Some(v) = row.iter().flatten().find(|v| !v.is_finite()) {
                return Err(DatasetError::Invalid(format!("non-finite value {v} in row {i}")));
            }
        }
        Ok(Self {
            trace_id: trace_id.into(),
            driver_label,
            sample_rate_hz: 1,
            feature_names,
            samples,
        })
    }

    pub fn trace_id(&self) -> &str {
        &self.trace_id
    }

    pub fn driver_label(&self) -> Option<&str> {
        self.driver_label.as_deref()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn duration_seconds(&self) -> usize {
        self.samples.len()
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.samples
    }

    /// Cell value at (second, feature index); `None` is a missing measurement.
    pub fn value(&self, second: usize, feature: usize) -> Option<f64> {
        self.samples[second][feature]
    }

    /// Iterator over one feature's column, in time order.
    pub fn column(&self, feature: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        self.samples.iter().map(move |row| row[feature])
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }
}

/// A corpus of traces sharing one feature schema.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    feature_names: Vec<String>,
    traces: Vec<CanTrace>,
}

impl TraceSet {
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn traces(&self) -> &[CanTrace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }
}

fn validate_feature_names(names: &[String]) -> Result<(), DatasetError> {
    if names.is_empty() {
        return Err(DatasetError::Invalid("feature list is empty".into()));
    }
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(DatasetError::Invalid(format!("feature {i} has an empty name")));
        }
        if names[..i].contains(name) {
            return Err(DatasetError::Invalid(format!("duplicate feature name {name:?}")));
        }
    }
    Ok(())
}

/// Parses a trace CSV. Header row = feature names; empty cells become missing
/// values; column order is preserved.
pub fn parse_trace(
    csv_text: &str,
    trace_id: impl Into<String>,
    driver_label: Option<String>,
) -> Result<CanTrace, DatasetError> {
    let mut lines = csv_text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DatasetError::Parse {
        line: 1,
        message: "empty input".into(),
    })?;
    let feature_names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    validate_feature_names(&feature_names).map_err(|e| DatasetError::Parse {
        line: 1,
        message: e.to_string(),
    })?;

    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != feature_names.len() {
            return Err(DatasetError::Parse {
                line: line_no,
                message: format!(
                    "expected {} columns, found {}",
                    feature_names.len(),
                    cells.len()
                ),
            });
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                row.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| DatasetError::Parse {
                    line: line_no,
                    message: format!("non-numeric value {cell:?} in column {:?}", feature_names[col]),
                })?;
                if !v.is_finite() {
                    return Err(DatasetError::Parse {
                        line: line_no,
                        message: format!("non-finite value {cell:?} in column {:?}", feature_names[col]),
                    });
                }
                row.push(Some(v));
            }
        }
        samples.push(row);
    }
    if samples.is_empty() {
        return Err(DatasetError::Parse {
            line: 1,
            message: "no data rows after header".into(),
        });
    }
    CanTrace::new(trace_id, driver_label, feature_names, samples)
}

/// Writes a trace back to the CSV form accepted by [`parse_trace`].
/// Values print in shortest round-trip decimal form; missing cells are empty.
pub fn serialize_trace(trace: &CanTrace) -> String {
    let mut out = String::new();
    out.push_str(&trace.feature_names().join(","));
    out.push('\n');
    for row in trace.rows() {
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            if let Some(v) = cell {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Combines traces into a [`TraceSet`], requiring identical feature names in
/// identical order. Input order is preserved.
pub fn merge_traces(traces: Vec<CanTrace>) -> Result<TraceSet, DatasetError> {
    let first = traces.first().ok_or_else(|| {
        DatasetError::Invalid("cannot merge an empty trace list".into())
    })?;
    let feature_names = first.feature_names().to_vec();
    for trace in &traces[1..] {
        if trace.feature_names() != feature_names.as_slice() {
            let differing: Vec<String> = feature_names
                .iter()
                .zip(trace.feature_names())
                .filter(|(a, b)| a != b)
                .map(|(a, b)| format!("{a:?} vs {b:?}"))
                .chain(if trace.feature_count() != feature_names.len() {
                    vec![format!(
                        "column count {} vs {}",
                        feature_names.len(),
                        trace.feature_count()
                    )]
                } else {
                    vec![]
                })
                .collect();
            return Err(DatasetError::Schema(format!(
                "trace {:?} disagrees with {:?} on: {}",
                trace.trace_id(),
                first.trace_id(),
                differing.join(", ")
            )));
        }
    }
    Ok(TraceSet { feature_names, traces })
}

/// Per-feature summary statistics over one trace.
///
/// `mean`/`std`/`min`/`max` are `None` when the feature has no non-null
/// values. `std` is the population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats {
    pub name: String,
    pub count: usize,
    pub null_count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

pub fn trace_stats(trace: &CanTrace) -> Vec<FeatureStats> {
    (0..trace.feature_count())
        .map(|c| {
            let values: Vec<f64> = trace.column(c).flatten().collect();
            let null_count = trace.duration_seconds() - values.len();
            let (mean, std, min, max) = if values.is_empty() {
                (None, None, None, None)
            } else {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (Some(mean), Some(var.sqrt()), Some(min), Some(max))
            };
            FeatureStats {
                name: trace.feature_names()[c].clone(),
                count: values.len(),
                null_count,
                mean,
                std,
                min,
                max,
            }
        })
        .collect()
}
