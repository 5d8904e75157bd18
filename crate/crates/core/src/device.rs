//! Device profiles and logical-pixel to millimetre conversion.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const MM_PER_INCH: f64 = 25.4;

static BUILTIN_DEVICES: &str = include_str!("../data/devices.json");

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("{source_name}: registry must contain at least one device")]
    Empty { source_name: String },
    #[error("{source_name}:{line}:{column}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{source_name}:{line}: duplicate device id \"{id}\"")]
    DuplicateId { source_name: String, id: String, line: usize },
    #[error("{source_name}:{line}: device \"{id}\": {reason}")]
    InvalidEntry {
        source_name: String,
        id: String,
        line: usize,
        reason: String,
    },
    #[error("cannot read {path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{quantity} must be finite and non-negative, got {value}")]
pub struct ConversionError {
    pub quantity: &'static str,
    pub value: f64,
}

/// Physical characteristics of one display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProfile {
    pub id: String,
    pub display_name: String,
    /// Physical pixels per inch.
    pub ppi: f64,
    /// Physical pixels per logical pixel.
    pub scale_factor: u8,
    pub logical_width: u32,
    pub logical_height: u32,
}

impl DeviceProfile {
    fn validate(&self) -> Result<(), String> {
        let id_ok = !self.id.is_empty()
            && !self.id.starts_with('-')
            && !self.id.ends_with('-')
            && self
                .id
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-');
        if !id_ok {
            return Err("id must be lowercase letters, digits and single hyphens".into());
        }
        if !(self.ppi.is_finite() && self.ppi > 0.0) {
            return Err(format!("ppi must be positive, got {}", self.ppi));
        }
        if !(1..=4).contains(&self.scale_factor) {
            return Err(format!("scale_factor must be 1, 2, 3 or 4, got {}", self.scale_factor));
        }
        if self.logical_width == 0 || self.logical_height == 0 {
            return Err("logical resolution must be positive".into());
        }
        Ok(())
    }

    /// Millimetres per logical pixel on this display.
    pub fn mm_per_px(&self) -> f64 {
        f64::from(self.scale_factor) * MM_PER_INCH / self.ppi
    }

    pub fn px_to_mm(&self, logical_px: f64) -> Result<f64, ConversionError> {
        px_to_mm(logical_px, self)
    }

    pub fn mm_to_px(&self, mm: f64) -> Result<f64, ConversionError> {
        mm_to_px(mm, self)
    }
}

fn check(quantity: &'static str, value: f64) -> Result<f64, ConversionError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ConversionError { quantity, value })
    }
}

/// `logical_px × scale_factor × 25.4 ÷ ppi`
pub fn px_to_mm(logical_px: f64, profile: &DeviceProfile) -> Result<f64, ConversionError> {
    let px = check("logical px", logical_px)?;
    Ok(px * f64::from(profile.scale_factor) * MM_PER_INCH / profile.ppi)
}

pub fn mm_to_px(mm: f64, profile: &DeviceProfile) -> Result<f64, ConversionError> {
    let mm = check("mm", mm)?;
    Ok(mm * profile.ppi / (MM_PER_INCH * f64::from(profile.scale_factor)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistrySource {
    BuiltIn,
    File(PathBuf),
}

impl fmt::Display for RegistrySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistrySource::BuiltIn => f.write_str("built-in"),
            RegistrySource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Immutable, ordered set of device profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRegistry {
    profiles: Vec<DeviceProfile>,
    source: RegistrySource,
}

impl DeviceRegistry {
    /// The shipped iPhone table.
    pub fn builtin() -> Self {
        Self::from_slice(BUILTIN_DEVICES.as_bytes(), RegistrySource::BuiltIn)
            .expect("built-in device table is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|err| RegistryError::Io {
            path: path.to_path_buf(),
            err,
        })?;
        Self::from_slice(&bytes, RegistrySource::File(path.to_path_buf()))
    }

    /// Parses a registry file: a JSON array of device objects.
    pub fn from_slice(bytes: &[u8], source: RegistrySource) -> Result<Self, RegistryError> {
        let source_name = source.to_string();
        let text = std::str::from_utf8(bytes).map_err(|e| RegistryError::Malformed {
            source_name: source_name.clone(),
            line: 1,
            column: 1,
            message: format!("not valid UTF-8: {e}"),
        })?;
        if text.trim().is_empty() {
            return Err(RegistryError::Empty { source_name });
        }
        let profiles: Vec<DeviceProfile> =
            serde_json::from_str(text).map_err(|e| RegistryError::Malformed {
                source_name: source_name.clone(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        if profiles.is_empty() {
            return Err(RegistryError::Empty { source_name });
        }

        let lines = element_lines(text);
        let line_of = |i: usize| lines.get(i).copied().unwrap_or(1);
        let mut seen = HashSet::new();
        for (i, profile) in profiles.iter().enumerate() {
            if let Err(reason) = profile.validate() {
                return Err(RegistryError::InvalidEntry {
                    source_name,
                    id: profile.id.clone(),
                    line: line_of(i),
                    reason,
                });
            }
            if !seen.insert(profile.id.as_str()) {
                return Err(RegistryError::DuplicateId {
                    source_name,
                    id: profile.id.clone(),
                    line: line_of(i),
                });
            }
        }
        Ok(Self { profiles, source })
    }

    pub fn get(&self, id: &str) -> Option<&DeviceProfile> {
        self.profiles.iter().find(|p| p.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DeviceProfile> {
        self.profiles.iter()
    }

    pub fn profiles(&self) -> &[DeviceProfile] {
        &self.profiles
    }

    pub fn ids(&self) -> Vec<&str> {
        self.profiles.iter().map(|p| p.id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn source(&self) -> &RegistrySource {
        &self.source
    }
}

/// 1-based line numbers at which each element of a top-level JSON array
/// starts. Only meaningful for text that already parsed.
fn element_lines(text: &str) -> Vec<usize> {
    let mut lines = Vec::new();
    let mut line = 1;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    let mut expecting_element = false;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
        }
        if in_string {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        if depth == 1 && expecting_element && !c.is_whitespace() && c != ']' {
            lines.push(line);
            expecting_element = false;
        }
        match c {
            '"' => in_string = true,
            '[' | '{' => {
                depth += 1;
                if depth == 1 {
                    expecting_element = true;
                }
            }
            ']' | '}' => depth = depth.saturating_sub(1),
            ',' if depth == 1 => expecting_element = true,
            _ => {}
        }
    }
    lines
}
