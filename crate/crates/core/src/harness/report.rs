use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CSV_HEADER: &str = "method,config_learn,config_eval,corruption,metric,value,relative_score";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub config_learn: usize,
    pub config_eval: usize,
    pub corruption: String,
    pub metric: String,
    pub value: f64,
    /// Percentage against the uncorrupted baseline; only on corruption rows.
    pub relative_score: Option<f64>,
}

/// A cell that failed (for example a degenerate fit); the run carries on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellError {
    pub method: String,
    pub config_learn: usize,
    pub config_eval: usize,
    pub corruption: String,
    pub error: String,
}

/// Shape of the model fitted for a cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellInfo {
    pub method: String,
    pub config_learn: usize,
    pub config_eval: usize,
    pub corruption: String,
    pub input_dim: usize,
    pub output_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub frames: usize,
    pub dataset_id: String,
    /// UTC seconds; left empty unless the caller asks for it so that reruns
    /// stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
    #[serde(default)]
    pub cells: Vec<CellInfo>,
    #[serde(default)]
    pub errors: Vec<CellError>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl EvaluationReport {
    pub fn new(metadata: ReportMetadata) -> Self {
        EvaluationReport {
            metadata,
            rows: Vec::new(),
            cells: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: EvaluationReport) {
        self.rows.extend(other.rows);
        self.cells.extend(other.cells);
        self.errors.extend(other.errors);
    }

    /// Rows matching a method, corruption tag and metric name.
    pub fn select<'a>(&'a self, method: &'a str, corruption: &'a str, metric: &'a str) -> impl Iterator<Item = &'a ReportRow> {
        self.rows
            .iter()
            .filter(move |r| r.method == method && r.corruption == corruption && r.metric == metric)
    }

    pub fn value(&self, method: &str, corruption: &str, metric: &str) -> Option<f64> {
        self.select(method, corruption, metric).next().map(|r| r.value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv_field(&r.method),
                r.config_learn,
                r.config_eval,
                csv_field(&r.corruption),
                csv_field(&r.metric),
                num(r.value),
                r.relative_score.map(num).unwrap_or_default()
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Wide table: one line per (method, configuration, corruption), one
    /// column per metric in first-seen order. With `relative`, cells hold
    /// relative scores instead of raw values.
    pub fn pivot_csv(&self, relative: bool) -> String {
        let mut metrics: Vec<&str> = Vec::new();
        let mut keys: Vec<(&str, usize, usize, &str)> = Vec::new();
        for r in &self.rows {
            if !metrics.contains(&r.metric.as_str()) {
                metrics.push(&r.metric);
            }
            let key = (r.method.as_str(), r.config_learn, r.config_eval, r.corruption.as_str());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let mut out = String::from("method,config_learn,config_eval,corruption");
        for m in &metrics {
            out.push(',');
            out.push_str(&csv_field(m));
        }
        out.push('\n');
        for key in keys {
            let _ = write!(
                out,
                "{},{},{},{}",
                csv_field(key.0),
                key.1,
                key.2,
                csv_field(key.3)
            );
            for m in &metrics {
                let cell = self
                    .rows
                    .iter()
                    .find(|r| (r.method.as_str(), r.config_learn, r.config_eval, r.corruption.as_str()) == key && r.metric == *m)
                    .and_then(|r| if relative { r.relative_score } else { Some(r.value) });
                out.push(',');
                out.push_str(&cell.map(num).unwrap_or_default());
            }
            out.push('\n');
        }
        out
    }

    /// Writes `<stem>.csv` and its JSON mirror `<stem>.json` next to it.
    /// `path` may carry any extension; it is replaced.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path.with_extension("csv"), self.to_csv())?;
        std::fs::write(path.with_extension("json"), self.to_json()?)?;
        Ok(())
    }

    /// Writes the wide table next to the report as `<stem>.<suffix>.csv`.
    pub fn write_pivot(&self, path: impl AsRef<Path>, suffix: &str, relative: bool) -> Result<()> {
        let path = path.as_ref();
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        std::fs::write(path.with_file_name(format!("{stem}.{suffix}.csv")), self.pivot_csv(relative))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(metric: &str, value: f64, rel: Option<f64>) -> ReportRow {
        ReportRow {
            method: "mmc".into(),
            config_learn: 9,
            config_eval: 55,
            corruption: "subst:25".into(),
            metric: metric.into(),
            value,
            relative_score: rel,
        }
    }

    fn report() -> EvaluationReport {
        let mut r = EvaluationReport::new(ReportMetadata {
            seed: 1,
            frames: 32,
            dataset_id: "abc".into(),
            timestamp: None,
        });
        r.rows.push(row("dbi", 0.5, Some(80.0)));
        r.rows.push(row("roc", 0.875, None));
        r
    }

    #[test]
    fn csv_layout() {
        let csv = report().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "mmc,9,55,subst:25,dbi,0.5,80");
        assert_eq!(lines[2], "mmc,9,55,subst:25,roc,0.875,");
    }

    #[test]
    fn json_mirror_roundtrips() {
        let r = report();
        assert_eq!(EvaluationReport::from_json(&r.to_json().unwrap()).unwrap(), r);
        assert!(!r.to_json().unwrap().contains("timestamp"));
    }

    #[test]
    fn pivot_has_metric_columns() {
        let p = report().pivot_csv(false);
        assert_eq!(
            p,
            "method,config_learn,config_eval,corruption,dbi,roc\nmmc,9,55,subst:25,0.5,0.875\n"
        );
        assert!(report().pivot_csv(true).ends_with("80,\n"));
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
