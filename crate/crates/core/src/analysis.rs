//! Scoring a layout document on a device.
//!
//! This is the one place where sizes are converted and the model applied;
//! the CLI and the HTTP service both go through [`analyze`].

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::device::{ConversionError, DeviceProfile, DeviceRegistry};
use crate::layout::{bounding_rect_mm, select_elements, ElementSelection, LayoutDocument, LayoutError, LayoutNode};
use crate::model::{success_rate, ModelCoefficients};

pub const DEFAULT_THRESHOLD: f64 = 0.95;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown device \"{id}\"; known devices: {}", known.join(", "))]
    UnknownDevice { id: String, known: Vec<String> },
    #[error("no device given and the document has no default_device")]
    NoDevice,
    #[error("threshold must be a probability in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementPrediction {
    pub node_id: String,
    pub node_name: String,
    pub width_px: f64,
    pub height_px: f64,
    pub width_mm: f64,
    pub height_mm: f64,
    pub sigma_x_mm: f64,
    pub sigma_y_mm: f64,
    pub success_rate: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub document_name: String,
    pub device_id: String,
    pub threshold: f64,
    pub elements: Vec<ElementPrediction>,
    /// Node with the lowest success rate; the first one wins ties.
    pub worst: Option<String>,
    /// RFC 3339, UTC. `None` for reproducible output.
    pub generated_at: Option<String>,
}

impl AnalysisReport {
    pub fn all_passed(&self) -> bool {
        self.elements.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ElementPrediction> {
        self.elements.iter().filter(|e| !e.passed)
    }

    pub fn worst_element(&self) -> Option<&ElementPrediction> {
        let id = self.worst.as_deref()?;
        self.elements.iter().find(|e| e.node_id == id)
    }

    pub fn stamped(mut self, at: DateTime<Utc>) -> Self {
        self.generated_at = Some(at.to_rfc3339_opts(SecondsFormat::Secs, true));
        self
    }

    pub fn stamped_now(self) -> Self {
        self.stamped(Utc::now())
    }
}

/// Picks the device: an explicit id wins over the document's default.
pub fn resolve_device<'r>(
    registry: &'r DeviceRegistry,
    requested: Option<&str>,
    doc: &LayoutDocument,
) -> Result<&'r DeviceProfile, AnalysisError> {
    let id = requested
        .or(doc.default_device.as_deref())
        .ok_or(AnalysisError::NoDevice)?;
    lookup_device(registry, id)
}

pub fn lookup_device<'r>(registry: &'r DeviceRegistry, id: &str) -> Result<&'r DeviceProfile, AnalysisError> {
    registry.get(id).ok_or_else(|| AnalysisError::UnknownDevice {
        id: id.to_string(),
        known: registry.ids().into_iter().map(String::from).collect(),
    })
}

pub fn score_node(
    node: &LayoutNode,
    profile: &DeviceProfile,
    threshold: f64,
    coeffs: &ModelCoefficients,
) -> Result<ElementPrediction, ConversionError> {
    let size = bounding_rect_mm(node, profile)?;
    let prediction = success_rate(size, coeffs);
    Ok(ElementPrediction {
        node_id: node.id.clone(),
        node_name: node.name.clone(),
        width_px: node.frame.width,
        height_px: node.frame.height,
        width_mm: size.width_mm(),
        height_mm: size.height_mm(),
        sigma_x_mm: prediction.sigma_x_mm,
        sigma_y_mm: prediction.sigma_y_mm,
        success_rate: prediction.success_rate,
        passed: prediction.success_rate >= threshold,
    })
}

/// Scores every selected element of `doc` on `profile`. The report carries
/// no timestamp; see [`AnalysisReport::stamped`].
pub fn analyze(
    doc: &LayoutDocument,
    profile: &DeviceProfile,
    threshold: f64,
    selection: &ElementSelection,
    coeffs: &ModelCoefficients,
) -> Result<AnalysisReport, AnalysisError> {
    if !(threshold.is_finite() && (0.0..=1.0).contains(&threshold)) {
        return Err(AnalysisError::InvalidThreshold(threshold));
    }
    let elements = select_elements(doc, selection)?
        .into_iter()
        .map(|node| score_node(node, profile, threshold, coeffs))
        .collect::<Result<Vec<_>, _>>()?;

    let worst = elements
        .iter()
        .fold(None::<&ElementPrediction>, |worst, e| match worst {
            Some(w) if w.success_rate <= e.success_rate => Some(w),
            _ => Some(e),
        })
        .map(|e| e.node_id.clone());

    Ok(AnalysisReport {
        document_name: doc.name.clone(),
        device_id: profile.id.clone(),
        threshold,
        elements,
        worst,
        generated_at: None,
    })
}

/// Nodes whose frame leaves the device's logical screen. Reported as
/// warnings only.
pub fn out_of_bounds<'a>(doc: &'a LayoutDocument, profile: &DeviceProfile) -> Vec<&'a LayoutNode> {
    let (w, h) = (f64::from(profile.logical_width), f64::from(profile.logical_height));
    doc.nodes()
        .filter(|n| {
            let f = &n.frame;
            f.x < 0.0 || f.y < 0.0 || f.x + f.width > w || f.y + f.height > h
        })
        .collect()
}
