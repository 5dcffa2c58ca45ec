use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::C64;

/// Zero-padding factor applied on top of the next power of two.
const PAD: usize = 16;

/// Angular frequency of the dominant Fourier peak of a uniformly sampled
/// record.
///
/// The mean is removed and a Hann window applied before a zero-padded FFT;
/// the peak bin is refined by a parabola through the log-magnitudes of its
/// neighbours.
pub fn dominant_angular_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 8 || times.len() != n {
        return Err(Error::Metric(format!("need at least 8 uniform samples, got {n}")));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::Metric("samples are not uniformly spaced".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let len = n.next_power_of_two() * PAD;
    let mut buf: Vec<C64> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            C64::from((v - mean) * w)
        })
        .collect();
    buf.resize(len, C64::from(0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|z| z.norm()).collect();
    let (k, &peak) = mag
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    if !(peak > 0.0) {
        return Err(Error::Metric("record has no oscillating component".into()));
    }
    let mut shift = 0.0;
    if k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1].max(1e-300).ln(), peak.ln(), mag[k + 1].max(1e-300).ln());
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            shift = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }
    Ok(2.0 * std::f64::consts::PI * (k as f64 + shift) / (len as f64 * dt))
}
