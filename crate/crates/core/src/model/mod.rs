//! Dual Gaussian tap success-rate model.
//!
//! Tap endpoints are modelled as independent centred Gaussians on each axis
//! whose variance grows linearly with the squared target size:
//!
//! ```text
//! σx = sqrt(a_x · W² + b_x)        σy = sqrt(a_y · H² + b_y)
//! success = erf(W / (2√2 · σx)) · erf(H / (2√2 · σy))
//! ```
//!
//! with `W`, `H` in millimetres. Everything here is a pure function.

mod erf;
mod inverse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use erf::{erf, SATURATION as ERF_SATURATION};
pub use inverse::{min_square_size_for_rate, min_width_for_rate, SEARCH_TOLERANCE_MM, SEARCH_UPPER_MM};

use erf::erf_finite;

const TWO_SQRT_2: f64 = 2.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} must be finite and non-negative, got {value}")]
    Domain { quantity: &'static str, value: f64 },
    #[error("invalid model coefficients: {0}")]
    InvalidCoefficients(&'static str),
    #[error("success rate {target} is unattainable; the model cannot exceed {ceiling:.6}")]
    UnattainableRate { target: f64, ceiling: f64 },
}

fn check_length(quantity: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ModelError::Domain { quantity, value })
    }
}

/// Fitted constants of the per-axis variance model, `σ² = a · size² + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCoefficients {
    a_x: f64,
    b_x: f64,
    a_y: f64,
    b_y: f64,
}

impl Default for ModelCoefficients {
    fn default() -> Self {
        Self {
            a_x: 0.0149,
            b_x: 0.9414,
            a_y: 0.0091,
            b_y: 1.0949,
        }
    }
}

impl ModelCoefficients {
    /// Slopes may be zero (constant spread); intercepts must be positive so
    /// that σ never vanishes.
    pub fn new(a_x: f64, b_x: f64, a_y: f64, b_y: f64) -> Result<Self, ModelError> {
        for a in [a_x, a_y] {
            if !(a.is_finite() && a >= 0.0) {
                return Err(ModelError::InvalidCoefficients("slopes must be finite and >= 0"));
            }
        }
        for b in [b_x, b_y] {
            if !(b.is_finite() && b > 0.0) {
                return Err(ModelError::InvalidCoefficients("intercepts must be finite and > 0"));
            }
        }
        Ok(Self { a_x, b_x, a_y, b_y })
    }

    pub fn a_x(&self) -> f64 {
        self.a_x
    }

    pub fn b_x(&self) -> f64 {
        self.b_x
    }

    pub fn a_y(&self) -> f64 {
        self.a_y
    }

    pub fn b_y(&self) -> f64 {
        self.b_y
    }

    /// Limit of the x factor as the width grows without bound.
    pub fn x_ceiling(&self) -> f64 {
        axis_ceiling(self.a_x)
    }

    /// Limit of the y factor as the height grows without bound.
    pub fn y_ceiling(&self) -> f64 {
        axis_ceiling(self.a_y)
    }

    /// Supremum of the success rate. Strictly below 1 whenever both slopes
    /// are positive, because σ keeps growing with the target.
    pub fn ceiling(&self) -> f64 {
        self.x_ceiling() * self.y_ceiling()
    }
}

fn axis_ceiling(slope: f64) -> f64 {
    if slope == 0.0 {
        1.0
    } else {
        erf_finite(1.0 / (TWO_SQRT_2 * slope.sqrt()))
    }
}

/// Element size in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalSize {
    width_mm: f64,
    height_mm: f64,
}

impl PhysicalSize {
    pub fn new(width_mm: f64, height_mm: f64) -> Result<Self, ModelError> {
        Ok(Self {
            width_mm: check_length("width_mm", width_mm)?,
            height_mm: check_length("height_mm", height_mm)?,
        })
    }

    pub fn square(side_mm: f64) -> Result<Self, ModelError> {
        Self::new(side_mm, side_mm)
    }

    pub fn width_mm(&self) -> f64 {
        self.width_mm
    }

    pub fn height_mm(&self) -> f64 {
        self.height_mm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub sigma_x_mm: f64,
    pub sigma_y_mm: f64,
    pub success_rate: f64,
}

/// Standard deviation of tap endpoints along x for a target `width_mm` wide.
pub fn sigma_x(width_mm: f64, coeffs: &ModelCoefficients) -> Result<f64, ModelError> {
    let w = check_length("width_mm", width_mm)?;
    Ok(axis_sigma(w, coeffs.a_x, coeffs.b_x))
}

/// Standard deviation of tap endpoints along y for a target `height_mm` tall.
pub fn sigma_y(height_mm: f64, coeffs: &ModelCoefficients) -> Result<f64, ModelError> {
    let h = check_length("height_mm", height_mm)?;
    Ok(axis_sigma(h, coeffs.a_y, coeffs.b_y))
}

fn axis_sigma(size: f64, slope: f64, intercept: f64) -> f64 {
    (slope * size * size + intercept).sqrt()
}

/// Probability that a tap aimed at the centre lands inside the given extent
/// on one axis.
fn axis_hit(size: f64, sigma: f64) -> f64 {
    erf_finite(size / (TWO_SQRT_2 * sigma))
}

/// Predicted tap success rate for a rectangle of the given size.
///
/// A zero width or height yields a rate of exactly 0.
pub fn success_rate(size: PhysicalSize, coeffs: &ModelCoefficients) -> Prediction {
    let sx = axis_sigma(size.width_mm, coeffs.a_x, coeffs.b_x);
    let sy = axis_sigma(size.height_mm, coeffs.a_y, coeffs.b_y);
    Prediction {
        sigma_x_mm: sx,
        sigma_y_mm: sy,
        success_rate: axis_hit(size.width_mm, sx) * axis_hit(size.height_mm, sy),
    }
}

/// Convenience wrapper validating raw millimetre values first.
pub fn predict_mm(width_mm: f64, height_mm: f64, coeffs: &ModelCoefficients) -> Result<Prediction, ModelError> {
    Ok(success_rate(PhysicalSize::new(width_mm, height_mm)?, coeffs))
}
