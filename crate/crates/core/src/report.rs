//! Text, JSON and CSV renderings of an [`AnalysisReport`].
//!
//! JSON keys are emitted in a fixed order. Probabilities are rounded to four
//! decimals and millimetre values to three; pass/fail is decided on the
//! unrounded rate before rounding.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{AnalysisReport, ElementPrediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format {other:?} (expected text, json or csv)")),
        }
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "node_id",
    "node_name",
    "width_px",
    "height_px",
    "width_mm",
    "height_mm",
    "success_rate",
    "passed",
];

fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

fn rate(value: f64) -> f64 {
    round_to(value, 4)
}

fn mm(value: f64) -> f64 {
    round_to(value, 3)
}

/// Rate as a percentage with two decimals, e.g. `99.70%`.
pub fn percent(rate: f64) -> String {
    format!("{:.2}%", rate * 100.0)
}

#[derive(Debug, Serialize)]
pub struct ElementJson<'a> {
    pub node_id: &'a str,
    pub node_name: &'a str,
    pub width_px: f64,
    pub height_px: f64,
    pub width_mm: f64,
    pub height_mm: f64,
    pub sigma_x_mm: f64,
    pub sigma_y_mm: f64,
    pub success_rate: f64,
    pub passed: bool,
}

impl<'a> From<&'a ElementPrediction> for ElementJson<'a> {
    fn from(e: &'a ElementPrediction) -> Self {
        Self {
            node_id: &e.node_id,
            node_name: &e.node_name,
            width_px: e.width_px,
            height_px: e.height_px,
            width_mm: mm(e.width_mm),
            height_mm: mm(e.height_mm),
            sigma_x_mm: mm(e.sigma_x_mm),
            sigma_y_mm: mm(e.sigma_y_mm),
            success_rate: rate(e.success_rate),
            passed: e.passed,
        }
    }
}

/// Serializable view of a report; shared by the CLI and the HTTP service.
#[derive(Debug, Serialize)]
pub struct ReportJson<'a> {
    pub document_name: &'a str,
    pub device_id: &'a str,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<&'a str>,
    pub worst: Option<&'a str>,
    pub all_passed: bool,
    pub elements: Vec<ElementJson<'a>>,
}

impl<'a> From<&'a AnalysisReport> for ReportJson<'a> {
    fn from(r: &'a AnalysisReport) -> Self {
        Self {
            document_name: &r.document_name,
            device_id: &r.device_id,
            threshold: r.threshold,
            generated_at: r.generated_at.as_deref(),
            worst: r.worst.as_deref(),
            all_passed: r.all_passed(),
            elements: r.elements.iter().map(ElementJson::from).collect(),
        }
    }
}

pub fn render_report(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Json => render_json(report),
        ReportFormat::Csv => render_csv(report),
    }
}

pub fn render_json(report: &AnalysisReport) -> String {
    let mut out = serde_json::to_string_pretty(&ReportJson::from(report)).expect("report serializes");
    out.push('\n');
    out
}

pub fn render_csv(report: &AnalysisReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for e in &report.elements {
        writer
            .write_record([
                e.node_id.clone(),
                e.node_name.clone(),
                e.width_px.to_string(),
                e.height_px.to_string(),
                mm(e.width_mm).to_string(),
                mm(e.height_mm).to_string(),
                rate(e.success_rate).to_string(),
                e.passed.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn size_pair(w: f64, h: f64, decimals: usize) -> String {
    format!("{w:.decimals$} x {h:.decimals$}")
}

pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Document:  {}", report.document_name);
    let _ = writeln!(out, "Device:    {}", report.device_id);
    let _ = writeln!(out, "Threshold: {}", percent(report.threshold));
    if let Some(at) = &report.generated_at {
        let _ = writeln!(out, "Generated: {at}");
    }
    out.push('\n');

    let header = ["NODE", "NAME", "SIZE (px)", "SIZE (mm)", "RATE", "RESULT"];
    let rows: Vec<[String; 6]> = report
        .elements
        .iter()
        .map(|e| {
            [
                e.node_id.clone(),
                e.node_name.clone(),
                size_pair(e.width_px, e.height_px, 2),
                size_pair(e.width_mm, e.height_mm, 3),
                percent(e.success_rate),
                if e.passed { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut line = |cells: &[&str]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            // Numeric columns are right-aligned.
            if (2..5).contains(&i) {
                let _ = write!(s, "{cell:>w$}  ");
            } else {
                let _ = write!(s, "{cell:<w$}  ");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&header);
    for row in &rows {
        line(&row.each_ref().map(String::as_str));
    }

    out.push('\n');
    let failed = report.failures().count();
    let _ = write!(
        out,
        "{} element{} scored, {} below threshold",
        report.elements.len(),
        if report.elements.len() == 1 { "" } else { "s" },
        failed
    );
    if let Some(w) = report.worst_element() {
        let _ = write!(out, "; worst: {} ({})", w.node_id, percent(w.success_rate));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn element(id: &str, rate: f64, passed: bool) -> ElementPrediction {
        ElementPrediction {
            node_id: id.into(),
            node_name: format!("{id}, named"),
            width_px: 120.0,
            height_px: 44.0,
            width_mm: 19.878_260_869_565_22,
            height_mm: 7.288_695_652_173_913,
            sigma_x_mm: 2.6,
            sigma_y_mm: 1.2,
            success_rate: rate,
            passed,
        }
    }

    fn report(elements: Vec<ElementPrediction>) -> AnalysisReport {
        AnalysisReport {
            document_name: "Doc".into(),
            device_id: "iphone-16".into(),
            threshold: 0.95,
            worst: elements.first().map(|e| e.node_id.clone()),
            elements,
            generated_at: None,
        }
    }

    #[test]
    fn empty_report_renders_in_every_format() {
        let r = report(vec![]);
        assert_eq!(render_csv(&r).lines().count(), 1);
        let json: serde_json::Value = serde_json::from_str(&render_json(&r)).unwrap();
        assert_eq!(json["elements"].as_array().unwrap().len(), 0);
        assert!(json["worst"].is_null());
        assert!(render_text(&r).contains("0 elements scored"));
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let r = report(vec![element("a", 0.91, false), element("b", 0.99, true)]);
        let csv = render_csv(&r);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "node_id,node_name,width_px,height_px,width_mm,height_mm,success_rate,passed");
        assert_eq!(lines[1], "a,\"a, named\",120,44,19.878,7.289,0.91,false");
    }

    #[test]
    fn json_rounds_and_orders_keys() {
        let r = report(vec![element("a", 0.996_977_454_564_899, true)]);
        let json = render_json(&r);
        assert!(json.contains("\"success_rate\": 0.997"), "{json}");
        assert!(json.contains("\"width_mm\": 19.878"));
        let keys = ["document_name", "device_id", "threshold", "worst", "all_passed", "elements"];
        let positions: Vec<_> = keys.iter().map(|k| json.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(!json.contains("generated_at"));
    }

    #[test]
    fn timestamp_only_when_present() {
        let mut r = report(vec![]);
        r.generated_at = Some("2026-01-01T00:00:00Z".into());
        assert!(render_json(&r).contains("\"generated_at\": \"2026-01-01T00:00:00Z\""));
        assert!(render_text(&r).contains("Generated: 2026-01-01T00:00:00Z"));
    }

    #[test]
    fn text_shows_percentages() {
        let r = report(vec![element("a", 0.996_977_454_564_899, true), element("b", 0.5, false)]);
        let text = render_text(&r);
        assert!(text.contains("99.70%"));
        assert!(text.contains("50.00%"));
        assert!(text.contains("FAIL"));
        assert!(text.contains("2 elements scored, 1 below threshold; worst: a (99.70%)"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let r = report(vec![element("a", 0.8, false), element("b", 0.99, true)]);
        for format in [ReportFormat::Text, ReportFormat::Json, ReportFormat::Csv] {
            assert_eq!(render_report(&r, format), render_report(&r.clone(), format));
        }
    }

    #[test]
    fn format_names() {
        assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("yaml".parse::<ReportFormat>().is_err());
    }
}
