//! Reference computations for tests.
//!
//! Nothing in here shares code with `tappy-core`: the error function is an
//! alternating Maclaurin series in 320-bit fixed point, the success rate is
//! estimated by sampling Gaussian tap endpoints, and inverse sizing is a plain
//! bisection over the series route.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::rngs::SmallRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

const FRAC_BITS: u32 = 320;

const PI_DIGITS: &str =
    "31415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253";

/// Published fitted constants, restated here rather than imported.
pub const A_X: f64 = 0.0149;
pub const B_X: f64 = 0.9414;
pub const A_Y: f64 = 0.0091;
pub const B_Y: f64 = 1.0949;

fn to_fixed(x: f64) -> BigInt {
    assert!(x.is_finite());
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.abs().to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, exp) = if exp == 0 {
        (bits & ((1 << 52) - 1), -1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
    };
    let shift = exp + FRAC_BITS as i64;
    let mag = if shift >= 0 {
        BigInt::from(mantissa) << shift as usize
    } else {
        BigInt::from(mantissa) >> (-shift) as usize
    };
    if x < 0.0 {
        -mag
    } else {
        mag
    }
}

fn from_fixed(v: &BigInt) -> f64 {
    // Keep 64 significant bits before handing to f64.
    let bits = v.bits() as i64;
    let drop = (bits - 64).max(0);
    let top = (v >> drop as usize).to_f64().unwrap();
    top * 2f64.powi((drop - FRAC_BITS as i64) as i32)
}

fn sqrt_pi_fixed() -> BigInt {
    let digits: BigInt = PI_DIGITS.parse().unwrap();
    let denom = BigInt::from(10u32).pow((PI_DIGITS.len() - 1) as u32);
    let pi = (digits << FRAC_BITS) / denom;
    (pi << FRAC_BITS).sqrt()
}

/// erf(x) from the alternating Maclaurin series
/// 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1)), summed with at least
/// `min_terms` terms and until the remaining terms vanish at 320-bit precision.
pub fn series_erf_terms(x: f64, min_terms: usize) -> f64 {
    let xf = to_fixed(x);
    let x2 = (&xf * &xf) >> FRAC_BITS;
    let mut power = xf.clone();
    let mut sum = xf;
    let mut n: u64 = 0;
    loop {
        n += 1;
        power = (&power * &x2) >> FRAC_BITS;
        power /= BigInt::from(n);
        let term = &power / BigInt::from(2 * n + 1);
        if n % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        if n as usize >= min_terms && (n as f64) > x * x && term.abs().is_zero() {
            break;
        }
    }
    let scaled = (sum << (FRAC_BITS + 1)) / sqrt_pi_fixed();
    from_fixed(&scaled)
}

/// Series erf run to convergence (never fewer than 40 terms).
pub fn series_erf(x: f64) -> f64 {
    series_erf_terms(x, 40)
}

pub fn sigma(a: f64, b: f64, size: f64) -> f64 {
    (a * size * size + b).sqrt()
}

/// Success rate of a W x H mm rectangle through the series route.
pub fn series_success_rate(w: f64, h: f64, coeffs: (f64, f64, f64, f64)) -> f64 {
    let (ax, bx, ay, by) = coeffs;
    let sx = sigma(ax, bx, w);
    let sy = sigma(ay, by, h);
    let k = 2.0 * 2f64.sqrt();
    series_erf(w / (k * sx)) * series_erf(h / (k * sy))
}

pub fn default_coeffs() -> (f64, f64, f64, f64) {
    (A_X, B_X, A_Y, B_Y)
}

/// Model asymptote through the series route.
pub fn series_ceiling(coeffs: (f64, f64, f64, f64)) -> f64 {
    let (ax, _, ay, _) = coeffs;
    let k = 2.0 * 2f64.sqrt();
    let fx = if ax == 0.0 { 1.0 } else { series_erf(1.0 / (k * ax.sqrt())) };
    let fy = if ay == 0.0 { 1.0 } else { series_erf(1.0 / (k * ay.sqrt())) };
    fx * fy
}

/// Smallest x in [lo, hi] with f(x) >= target, bracketed to `tol`.
pub fn bisect_up(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    assert!(f(lo) < target && f(hi) >= target, "target not bracketed");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Monte-Carlo estimate of the success rate for every (W, H) pair in
/// `widths x heights`, from `samples` independent endpoint pairs. Tap
/// endpoints are drawn from centred Gaussians with per-axis sigma from the
/// published fit; a hit is |x| < W/2 and |y| < H/2. All grid cells share the
/// same stream of standard-normal draws, scaled per cell.
///
/// Returns `rates[i][j]` for `widths[i]`, `heights[j]`.
pub fn monte_carlo_rates(
    widths: &[f64],
    heights: &[f64],
    coeffs: (f64, f64, f64, f64),
    samples: u64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let (ax, bx, ay, by) = coeffs;
    // In units of the standard normal: |z| < W / (2 sigma).
    let half_x: Vec<f64> = widths.iter().map(|&w| w / (2.0 * sigma(ax, bx, w))).collect();
    let half_y: Vec<f64> = heights.iter().map(|&h| h / (2.0 * sigma(ay, by, h))).collect();
    let chunks = 256u64;
    let per_chunk = samples / chunks;
    let remainder = samples % chunks;

    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = SmallRng::seed_from_u64(seed ^ (chunk.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let n = per_chunk + u64::from(chunk < remainder);
            let mut hits = vec![0u64; widths.len() * heights.len()];
            let mut in_x = vec![false; widths.len()];
            for _ in 0..n {
                let zx: f64 = StandardNormal.sample(&mut rng);
                let zy: f64 = StandardNormal.sample(&mut rng);
                let (ax_abs, ay_abs) = (zx.abs(), zy.abs());
                for (flag, &hx) in in_x.iter_mut().zip(&half_x) {
                    *flag = ax_abs < hx;
                }
                for (j, &hy) in half_y.iter().enumerate() {
                    if ay_abs < hy {
                        for (i, &flag) in in_x.iter().enumerate() {
                            hits[i * heights.len() + j] += u64::from(flag);
                        }
                    }
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; widths.len() * heights.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    (0..widths.len())
        .map(|i| {
            (0..heights.len())
                .map(|j| counts[i * heights.len() + j] as f64 / samples as f64)
                .collect()
        })
        .collect()
}
