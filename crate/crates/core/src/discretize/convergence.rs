//! Observed convergence order from a sequence of refinements.

use crate::error::{Result, SpectraError};

/// Observed order `p` in `|σ(h) − σ*| ≈ C h^p`.
///
/// `pairs` are `(h, σ(h))` with strictly decreasing `h`. The limit `σ*` is
/// the Richardson extrapolant of the two finest levels, using the order
/// implied by the three finest; `p` is then the least-squares slope of
/// `log|σ(h) − σ*|` against `log h` over the remaining levels.
pub fn convergence_order(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(SpectraError::InsufficientData);
    }
    if pairs.iter().any(|(h, s)| !(h.is_finite() && *h > 0.0 && s.is_finite())) {
        return Err(SpectraError::InsufficientData);
    }
    if pairs.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(SpectraError::InsufficientData);
    }
    let k = pairs.len();
    let [(h1, s1), (h2, s2), (h3, s3)] = [pairs[k - 3], pairs[k - 2], pairs[k - 1]];
    let (d12, d23) = (s2 - s1, s3 - s2);
    if d12 == 0.0 || d23 == 0.0 || d12.signum() != d23.signum() {
        return Err(SpectraError::InsufficientData);
    }
    // for non-geometric grids solve (d12/d23) = (h1^p − h2^p)/(h2^p − h3^p) by
    // a few fixed-point steps started from the geometric-ratio guess
    let ratio = d12 / d23;
    let mut p = ratio.ln() / (h1 / h2).ln();
    for _ in 0..50 {
        let f = (h1.powf(p) - h2.powf(p)) / (h2.powf(p) - h3.powf(p));
        if !f.is_finite() || f <= 0.0 {
            break;
        }
        let next = p + (ratio.ln() - f.ln()) / (h2 / h3).ln();
        if (next - p).abs() < 1e-14 {
            break;
        }
        p = next;
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(SpectraError::InsufficientData);
    }
    let limit = s3 + (s3 - s2) / ((h2 / h3).powf(p) - 1.0);

    let pts: Vec<(f64, f64)> =
        pairs[..k - 1].iter().map(|&(h, s)| (h.ln(), (s - limit).abs())).filter(|(_, e)| *e > 0.0).map(|(x, e)| (x, e.ln())).collect();
    if pts.len() < 2 {
        return Err(SpectraError::InsufficientData);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SpectraError::InsufficientData);
    }
    Ok(sxy / sxx)
}
