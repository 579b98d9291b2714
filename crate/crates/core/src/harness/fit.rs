//! Trend classification for sweep data.

use crate::error::{Result, SpectraError};

/// Coefficient of determination a model must reach to be accepted.
pub const QUALITY_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FittedModel {
    /// `σ ≈ c · scale^p`.
    PowerLaw {
        c: f64,
        p: f64,
    },
    /// `σ ≈ intercept + slope · scale` as the scale shrinks. With four or
    /// more rows the coefficients come from a fit that also carries a
    /// `scale²` term, so curvature at the coarse end does not bias them.
    Linear {
        slope: f64,
        intercept: f64,
    },
    Constant {
        c: f64,
    },
    /// `|σ|` grows without a clean power law; `sign` is the sign of `σ`.
    Diverging {
        sign: f64,
    },
}

impl FittedModel {
    /// Sign of the limit as the scale shrinks, when the trend blows up.
    pub fn divergence(&self) -> Option<f64> {
        match *self {
            FittedModel::PowerLaw { c, p } if p < 0.0 => Some(c.signum()),
            FittedModel::Diverging { sign } => Some(sign),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FittedModel::PowerLaw { .. } => "power-law",
            FittedModel::Linear { .. } => "linear",
            FittedModel::Constant { .. } => "constant",
            FittedModel::Diverging { .. } => "diverging",
        }
    }
}

impl std::fmt::Display for FittedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            FittedModel::PowerLaw { c, p } => write!(f, "PowerLaw(C = {c:.6e}, p = {p:.6})"),
            FittedModel::Linear { slope, intercept } => write!(f, "Linear(slope = {slope:.6e}, intercept = {intercept:.6e})"),
            FittedModel::Constant { c } => write!(f, "Constant({c:.12e})"),
            FittedModel::Diverging { sign } => write!(f, "Diverging({})", if sign < 0.0 { "-" } else { "+" }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub model: FittedModel,
    /// R² of the accepted model (1 for constants).
    pub quality: f64,
}

/// Least-squares line `y ≈ a + b x`, returning `(a, b, R²)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (a, b, r2)
}

/// Weighted fit `y ≈ a + b x + c x²` minimizing relative residuals
/// `Σ ((y − fit) / x)²`, returning `(a, b)`. Solved by Gram–Schmidt on the
/// normalized design columns, which stay well conditioned on grids
/// spanning several decades.
pub fn limit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    if xs.len() < 4 {
        let (a, b, _) = least_squares(xs, ys);
        return (a, b);
    }
    let mut cols: Vec<Vec<f64>> = vec![xs.iter().map(|x| 1.0 / x).collect(), vec![1.0; xs.len()], xs.to_vec()];
    let rhs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y / x).collect();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut r = [[0.0; 3]; 3];
    for j in 0..3 {
        for i in 0..j {
            r[i][j] = dot(&cols[i], &cols[j]);
            let (qi, qj) = (cols[i].clone(), &mut cols[j]);
            qj.iter_mut().zip(&qi).for_each(|(v, q)| *v -= r[i][j] * q);
        }
        r[j][j] = dot(&cols[j], &cols[j]).sqrt();
        let norm = r[j][j];
        cols[j].iter_mut().for_each(|v| *v /= norm);
    }
    let qb: Vec<f64> = cols.iter().map(|q| dot(q, &rhs)).collect();
    let mut coef = [0.0; 3];
    for i in (0..3).rev() {
        coef[i] = (qb[i] - (i + 1..3).map(|j| r[i][j] * coef[j]).sum::<f64>()) / r[i][i];
    }
    (coef[0], coef[1])
}

/// Classify `(scale, σ)` rows, tried in the order Constant, Linear,
/// PowerLaw; data matching none of them well is reported as Diverging when
/// `|σ|` grows monotonically as the scale shrinks, and otherwise as the
/// better of the two fitted models.
pub fn fit_rate(rows: &[(f64, f64)]) -> Result<Fit> {
    let rows: Vec<(f64, f64)> = rows.iter().copied().filter(|(s, v)| s.is_finite() && *s > 0.0 && v.is_finite()).collect();
    if rows.len() < 3 {
        return Err(SpectraError::FitFailure(format!("{} usable rows, need at least 3", rows.len())));
    }
    let sig: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mean = sig.iter().sum::<f64>() / sig.len() as f64;
    let (lo, hi) = sig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo <= 1e-8 * (1.0 + mean.abs()) {
        return Ok(Fit { model: FittedModel::Constant { c: mean }, quality: 1.0 });
    }

    let scales: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (_, _, r2_lin) = least_squares(&scales, &sig);
    let (intercept, slope) = limit_line(&scales, &sig);
    let linear = Fit { model: FittedModel::Linear { slope, intercept }, quality: r2_lin };
    if r2_lin >= QUALITY_THRESHOLD {
        return Ok(linear);
    }

    let same_sign = sig.iter().all(|&v| v > 0.0) || sig.iter().all(|&v| v < 0.0);
    let power = same_sign.then(|| {
        let lx: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
        let ly: Vec<f64> = sig.iter().map(|v| v.abs().ln()).collect();
        let (a, p, r2) = least_squares(&lx, &ly);
        Fit { model: FittedModel::PowerLaw { c: a.exp() * sig[0].signum(), p }, quality: r2 }
    });
    if let Some(fit) = power {
        if fit.quality >= QUALITY_THRESHOLD {
            return Ok(fit);
        }
    }

    let mut ordered = rows.clone();
    ordered.sort_by(|a, b| b.0.total_cmp(&a.0));
    let growing = ordered.windows(2).all(|w| w[1].1.abs() > w[0].1.abs());
    let tail = ordered[ordered.len() - 1].1;
    let tail_sign_stable = ordered[ordered.len() - 2].1.signum() == tail.signum();
    if growing && tail_sign_stable && tail.abs() > 10.0 * ordered[0].1.abs() {
        let quality = power.map_or(r2_lin, |p| p.quality);
        return Ok(Fit { model: FittedModel::Diverging { sign: tail.signum() }, quality });
    }
    Ok(match power {
        Some(p) if p.quality > r2_lin => p,
        _ => linear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(start: f64, factor: f64, count: usize) -> Vec<f64> {
        (0..count).map(|k| start * factor.powi(k as i32)).collect()
    }

    #[test]
    fn noiseless_power_law() {
        let rows: Vec<(f64, f64)> = grid(1.0, 0.5, 11).into_iter().map(|l| (l, PI * PI / (l * l))).collect();
        let fit = fit_rate(&rows).unwrap();
        let FittedModel::PowerLaw { c, p } = fit.model else { panic!("{:?}", fit.model) };
        assert!((c - PI * PI).abs() < 1e-9 && (p + 2.0).abs() < 1e-12);
        assert!((fit.quality - 1.0).abs() < 1e-12);
        assert_eq!(fit.model.divergence(), Some(1.0));
    }

    #[test]
    fn constant_rows() {
        let rows: Vec<(f64, f64)> = grid(1.0, 0.5, 8).into_iter().map(|l| (l, -9.0)).collect();
        assert_eq!(fit_rate(&rows).unwrap().model, FittedModel::Constant { c: -9.0 });
    }

    #[test]
    fn linear_with_curvature() {
        let rows: Vec<(f64, f64)> = grid(1e-1, 0.1f64.powf(1.0 / 3.0), 10).into_iter().map(|r| (r, 2.0 * r + r * r)).collect();
        let FittedModel::Linear { slope, intercept } = fit_rate(&rows).unwrap().model else { panic!() };
        assert!((slope - 2.0).abs() < 0.01 && intercept.abs() < 1e-9, "{slope} {intercept}");
    }

    #[test]
    fn limit_line_is_exact_on_quadratics() {
        let xs = grid(1e-1, 0.1, 5);
        let ys: Vec<f64> = xs.iter().map(|x| 3e-7 - 1.5 * x + 4.0 * x * x).collect();
        let (a, b) = limit_line(&xs, &ys);
        assert!((a - 3e-7).abs() < 1e-15 && (b + 1.5).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn negative_power_law_diverges_downwards() {
        let rows: Vec<(f64, f64)> = grid(1.0, 0.5, 9).into_iter().map(|a| (a, -4.0 / a - 0.7)).collect();
        assert_eq!(fit_rate(&rows).unwrap().model.divergence(), Some(-1.0));
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(fit_rate(&[(1.0, 1.0), (0.5, 2.0)]), Err(SpectraError::FitFailure(_))));
        assert!(matches!(fit_rate(&[(1.0, 1.0), (0.5, f64::NAN), (0.2, 3.0)]), Err(SpectraError::FitFailure(_))));
    }
}
