use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::ClassId;
use crate::error::{Error, Result};

use super::{CurvePoint, DistanceKind, LambdaScore};

/// One evaluated method or route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub name: String,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_class: BTreeMap<ClassId, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<CurvePoint>>,
}

impl EvalRow {
    pub fn new(name: impl Into<String>) -> Self {
        EvalRow {
            name: name.into(),
            metrics: BTreeMap::new(),
            per_class: BTreeMap::new(),
            curve: None,
        }
    }

    pub fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_owned(), value);
        self
    }

    pub fn per_class(mut self, per_class: BTreeMap<ClassId, f64>) -> Self {
        self.per_class = per_class;
        self
    }

    pub fn curve(mut self, curve: Vec<CurvePoint>) -> Self {
        self.curve = Some(curve);
        self
    }
}

/// Settings the numbers were produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub command: String,
    pub distance: DistanceKind,
    pub direction: String,
    pub lambda: f64,
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_scores: Option<Vec<LambdaScore>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ReportConfig,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn new(config: ReportConfig, rows: Vec<EvalRow>) -> Result<Self> {
        let report = EvalReport { config, rows };
        report.validate()?;
        Ok(report)
    }

    /// Every metric and per-class value must be a fraction.
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        for row in &self.rows {
            for (name, &v) in &row.metrics {
                if !ok(v) {
                    return Err(Error::data(format!("{}: metric {name} = {v} outside [0, 1]", row.name)));
                }
            }
            if let Some((c, v)) = row.per_class.iter().find(|(_, &v)| !ok(v)) {
                return Err(Error::data(format!("{}: class {c} accuracy {v} outside [0, 1]", row.name)));
            }
        }
        Ok(())
    }

    pub fn row(&self, name: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text rendering of the same content.
    pub fn render_text(&self) -> String {
        let metric_names: BTreeSet<&str> = self
            .rows
            .iter()
            .flat_map(|r| r.metrics.keys().map(String::as_str))
            .collect();
        let header: Vec<String> = std::iter::once("method".to_owned())
            .chain(metric_names.iter().map(|s| s.to_string()))
            .collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                std::iter::once(r.name.clone())
                    .chain(metric_names.iter().map(|m| {
                        r.metrics.get(*m).map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
                    }))
                    .collect()
            })
            .collect();

        let c = &self.config;
        let mut out = format!(
            "{}  distance={}  direction={}  lambda={}  normalize={}",
            c.command, c.distance, c.direction, c.lambda, c.normalize
        );
        if let Some(seed) = c.seed {
            let _ = write!(out, "  seed={seed}");
        }
        out.push_str("\n\n");
        out.push_str(&table(&header, &body));

        let classes: BTreeSet<&ClassId> = self.rows.iter().flat_map(|r| r.per_class.keys()).collect();
        if !classes.is_empty() {
            let with_classes: Vec<&EvalRow> = self.rows.iter().filter(|r| !r.per_class.is_empty()).collect();
            let header: Vec<String> = std::iter::once("class".to_owned())
                .chain(with_classes.iter().map(|r| r.name.clone()))
                .collect();
            let body: Vec<Vec<String>> = classes
                .iter()
                .map(|c| {
                    std::iter::once(c.to_string())
                        .chain(with_classes.iter().map(|r| {
                            r.per_class.get(*c).map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
                        }))
                        .collect()
                })
                .collect();
            out.push_str("\nper-class accuracy\n");
            out.push_str(&table(&header, &body));
        }

        if let Some(scores) = &c.lambda_scores {
            out.push_str("\ncross-validation\n");
            let body: Vec<Vec<String>> = scores
                .iter()
                .map(|s| {
                    vec![
                        s.lambda.to_string(),
                        s.accuracy.map_or_else(|| "failed".to_owned(), |a| format!("{a:.4}")),
                    ]
                })
                .collect();
            out.push_str(&table(&["lambda".to_owned(), "accuracy".to_owned()], &body));
        }
        out
    }
}

fn table(header: &[String], body: &[Vec<String>]) -> String {
    let width = |s: &str| s.chars().count();
    let mut widths: Vec<usize> = header.iter().map(|h| width(h)).collect();
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(width(cell));
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = " ".repeat(w - width(c));
                if i == 0 { format!("{c}{pad}") } else { format!("{pad}{c}") }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header);
    for row in body {
        line(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ReportConfig {
        ReportConfig {
            command: "zsl-eval".into(),
            distance: DistanceKind::Cosine,
            direction: "both".into(),
            lambda: 0.2,
            normalize: false,
            seed: Some(1),
            lambda_scores: None,
        }
    }

    #[test]
    fn out_of_range_metrics_are_rejected() {
        let bad = EvalRow::new("x").metric("accuracy", 1.5);
        assert!(EvalReport::new(config(), vec![bad]).is_err());
        let nan = EvalRow::new("x").metric("accuracy", f64::NAN);
        assert!(EvalReport::new(config(), vec![nan]).is_err());
    }

    #[test]
    fn text_table_is_aligned() {
        let pc: BTreeMap<ClassId, f64> = [("a".into(), 1.0), ("b".into(), 0.5)].into_iter().collect();
        let report = EvalReport::new(
            config(),
            vec![
                EvalRow::new("SAE (W)").metric("accuracy", 0.75).per_class(pc.clone()),
                EvalRow::new("SAE (Wᵀ)").metric("accuracy", 0.5).per_class(pc),
            ],
        )
        .unwrap();
        let text = report.render_text();
        assert!(text.contains("SAE (W)     0.7500"), "{text}");
        assert!(text.contains("SAE (Wᵀ)    0.5000"), "{text}");
        let back: EvalReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }
}
