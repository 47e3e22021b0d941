//! Discrete Hilbert transform and instantaneous amplitude, phase and
//! frequency of an analytic signal.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Hilbert transform by the analytic-signal method: drop negative
/// frequencies, double positive ones, invert and keep the imaginary part.
pub fn hilbert_transform(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    });
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);

    // bins 1..ceil(n/2) doubled, DC and (even n) Nyquist kept, the rest zeroed
    let half = n / 2;
    let doubled_end = if n % 2 == 0 { half } else { half + 1 };
    for v in &mut buf[1..doubled_end] {
        *v *= 2.0;
    }
    for v in &mut buf[half + 1..] {
        *v = Complex64::new(0.0, 0.0);
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.im * scale).collect()
}

/// Analytic signal of one IMF with its instantaneous attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSeries {
    pub real_part: Vec<f64>,
    pub imag_part: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Unwrapped phase in radians.
    pub phase: Vec<f64>,
    /// Instantaneous frequency in Hz, clamped to `[0, fs/2]`.
    pub frequency: Vec<f64>,
}

/// Removes 2π jumps between consecutive phase samples.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut offset = 0.0;
    let mut prev = match wrapped.first() {
        Some(&p) => p,
        None => return out,
    };
    out.push(prev);
    for &p in &wrapped[1..] {
        let d = p - prev;
        if d > PI {
            offset -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
        } else if d < -PI {
            offset += 2.0 * PI * ((-d + PI) / (2.0 * PI)).floor();
        }
        prev = p;
        out.push(p + offset);
    }
    out
}

/// Amplitude, unwrapped phase and frequency of `imf` sampled at `fs` Hz.
/// Frequency is the central difference of the phase (one-sided at the ends).
pub fn instantaneous_attributes(imf: &[f64], sampling_frequency: f64) -> AnalyticSeries {
    let imag = hilbert_transform(imf);
    let amplitude: Vec<f64> = imf.iter().zip(&imag).map(|(r, i)| r.hypot(*i)).collect();
    let wrapped: Vec<f64> = imf.iter().zip(&imag).map(|(r, i)| i.atan2(*r)).collect();
    let phase = unwrap_phase(&wrapped);
    let n = phase.len();
    let to_hz = sampling_frequency / (2.0 * PI);
    let nyquist = sampling_frequency / 2.0;
    let frequency = (0..n)
        .map(|t| {
            let d = if n < 2 {
                0.0
            } else if t == 0 {
                phase[1] - phase[0]
            } else if t == n - 1 {
                phase[n - 1] - phase[n - 2]
            } else {
                0.5 * (phase[t + 1] - phase[t - 1])
            };
            (d * to_hz).clamp(0.0, nyquist)
        })
        .collect();
    AnalyticSeries {
        real_part: imf.to_vec(),
        imag_part: imag,
        amplitude,
        phase,
        frequency,
    }
}
