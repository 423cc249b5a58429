use crate::error::{Error, Result};
use crate::ingest::CaseSeries;

/// Centered Gaussian-kernel rolling mean. The kernel spans `window` days
/// (odd) and is renormalized over the days available at either end.
pub fn smooth_cases(series: &CaseSeries, window: usize, sigma: f64) -> Result<CaseSeries> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::Invalid(format!(
            "smoothing window must be odd and ≥ 1, got {window}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::Invalid(format!(
            "smoothing sigma must be > 0, got {sigma}"
        )));
    }
    if series.len() < window {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            window,
        });
    }
    let half = (window / 2) as isize;
    let kernel: Vec<f64> = (-half..=half)
        .map(|j| (-((j * j) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let xs = &series.cases.values;
    let n = xs.len() as isize;
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (k, w) in kernel.iter().enumerate() {
                let j = i + k as isize - half;
                if (0..n).contains(&j) {
                    acc += w * xs[j as usize];
                    wsum += w;
                }
            }
            (acc / wsum).max(0.0)
        })
        .collect();
    let mut out = series.clone();
    out.cases.values = smoothed;
    Ok(out)
}
