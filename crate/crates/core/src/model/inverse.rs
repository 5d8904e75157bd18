//! Inverse sizing: the smallest target that reaches a requested success rate.
//!
//! The success rate is strictly increasing in each dimension, so a plain
//! bisection on a fixed bracket is enough.

use super::{axis_hit, axis_sigma, success_rate, ModelCoefficients, ModelError, PhysicalSize};

/// Upper end of the search bracket, in millimetres.
pub const SEARCH_UPPER_MM: f64 = 1000.0;

/// Width of the final bracket, in millimetres.
pub const SEARCH_TOLERANCE_MM: f64 = 1e-6;

/// Returns the smallest `s` in `[0, SEARCH_UPPER_MM]` with `rate(s) >= target`,
/// to within `SEARCH_TOLERANCE_MM`. `rate` must be non-decreasing with
/// `rate(0) < target <= rate(SEARCH_UPPER_MM)`.
fn bisect_increasing(rate: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, SEARCH_UPPER_MM);
    while hi - lo > SEARCH_TOLERANCE_MM {
        let mid = 0.5 * (lo + hi);
        if rate(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn check_target(target_rate: f64, ceiling: f64, bracket_max: f64) -> Result<(), ModelError> {
    if !target_rate.is_finite() || target_rate <= 0.0 || target_rate >= ceiling {
        return Err(ModelError::UnattainableRate { target: target_rate, ceiling });
    }
    // Rates between the bracket maximum and the asymptote would need targets
    // larger than any screen.
    if target_rate > bracket_max {
        return Err(ModelError::UnattainableRate {
            target: target_rate,
            ceiling: bracket_max,
        });
    }
    Ok(())
}

/// Smallest square side (mm) whose predicted success rate reaches `target_rate`.
pub fn min_square_size_for_rate(target_rate: f64, coeffs: &ModelCoefficients) -> Result<f64, ModelError> {
    let rate = |s: f64| success_rate(PhysicalSize { width_mm: s, height_mm: s }, coeffs).success_rate;
    check_target(target_rate, coeffs.ceiling(), rate(SEARCH_UPPER_MM))?;
    Ok(bisect_increasing(rate, target_rate))
}

/// Smallest width (mm) reaching `target_rate` for an element of fixed height.
pub fn min_width_for_rate(
    target_rate: f64,
    height_mm: f64,
    coeffs: &ModelCoefficients,
) -> Result<f64, ModelError> {
    if !(height_mm.is_finite() && height_mm > 0.0) {
        return Err(ModelError::Domain {
            quantity: "height_mm",
            value: height_mm,
        });
    }
    let y_factor = axis_hit(height_mm, axis_sigma(height_mm, coeffs.a_y, coeffs.b_y));
    let rate = |w: f64| {
        success_rate(
            PhysicalSize {
                width_mm: w,
                height_mm,
            },
            coeffs,
        )
        .success_rate
    };
    check_target(target_rate, coeffs.x_ceiling() * y_factor, rate(SEARCH_UPPER_MM))?;
    Ok(bisect_increasing(rate, target_rate))
}
