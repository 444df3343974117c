//! 3-dB bandwidth of a binned impulse response.
//!
//! The magnitude response is scanned on a zero-padded FFT grid; the first
//! grid point at or below `1/√2` of the DC value brackets the crossing, which
//! is then refined by bisection on the exact discrete-time Fourier transform.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::raytrace::ImpulseResponse;

/// Minimum zero-padding factor applied before the FFT scan.
pub const PADDING_FACTOR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth {
    pub hz: f64,
    /// No crossing below the scan limit; `hz` is the limit itself.
    pub limited: bool,
}

/// `|H(f)|` of the binned response, with bin `n` at delay `n · bin_width`.
pub fn magnitude_at(ir: &ImpulseResponse, f: f64) -> f64 {
    let w = -2.0 * PI * f * ir.bin_width;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &b) in ir.bins.iter().enumerate() {
        if b != 0.0 {
            let (s, c) = (w * n as f64).sin_cos();
            re += b * c;
            im += b * s;
        }
    }
    re.hypot(im)
}

/// Smallest frequency where `|H(f)|/|H(0)| <= 1/√2`, scanning up to
/// `min(scan_limit, Nyquist)`.
pub fn bandwidth_3db(ir: &ImpulseResponse, scan_limit: f64) -> Result<Bandwidth> {
    let h0: f64 = ir.dc_gain();
    if !(h0 > 0.0) {
        return Err(Error::ZeroResponse);
    }
    if !(scan_limit > 0.0) {
        return Err(Error::domain(format!("scan limit must be positive, got {scan_limit}")));
    }
    let nyquist = 0.5 / ir.bin_width;
    let limit = scan_limit.min(nyquist);
    let threshold = FRAC_1_SQRT_2 * h0;

    let n = (ir.bins.len().max(1) * PADDING_FACTOR).next_power_of_two();
    let mut buf: Vec<Complex64> = ir
        .bins
        .iter()
        .map(|&b| Complex64::new(b, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);

    let df = 1.0 / (n as f64 * ir.bin_width);
    let last = ((limit / df).floor() as usize).min(n / 2);
    let Some(k) = (1..=last).find(|&k| buf[k].norm() <= threshold) else {
        // The grid may step past a crossing just below the limit.
        if magnitude_at(ir, limit) <= threshold {
            return Ok(Bandwidth { hz: refine(ir, threshold, last as f64 * df, limit), limited: false });
        }
        return Ok(Bandwidth { hz: limit, limited: true });
    };
    Ok(Bandwidth { hz: refine(ir, threshold, (k - 1) as f64 * df, k as f64 * df), limited: false })
}

/// Bisection for the crossing inside `[lo, hi]`, where `|H(lo)| > threshold >= |H(hi)|`.
fn refine(ir: &ImpulseResponse, threshold: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if magnitude_at(ir, mid) <= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
