//! The model family linking dataset complexity/size to replication:
//! an exponential decay over intrinsic dimensionality, an exponential
//! growth linking ID to dataset size, their composition, and its inverse.
//!
//! The decay curve `a^(b*mu1 - c)` has only two data-determined degrees
//! of freedom, the log-linear slope and intercept `B = b*ln(a)`,
//! `C = -c*ln(a)`. Fits are reported in a canonical (a, b, c) with
//! c fixed at 100 so parameters are comparable across runs; evaluation
//! always goes through (B, C).

use serde::Serialize;

use crate::error::{Error, Result};

const MAX_ITERS: usize = 200;
const REL_TOL: f64 = 1e-10;

/// Parameters of the complexity-to-replication decay curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Log-linear slope `b * ln(a)`; negative for decaying curves.
    #[serde(rename = "B")]
    pub log_slope: f64,
    /// Log-linear intercept `-c * ln(a)`.
    #[serde(rename = "C")]
    pub log_intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl DecayFit {
    /// Build a fit from explicit curve parameters (no data attached).
    pub fn from_abc(a: f64, b: f64, c: f64) -> Self {
        let ln_a = a.ln();
        Self {
            a,
            b,
            c,
            log_slope: b * ln_a,
            log_intercept: -c * ln_a,
            r_squared: 1.0,
            n_points: 0,
        }
    }

    fn from_log_linear(log_slope: f64, log_intercept: f64) -> Result<Self> {
        // canonical decomposition with c fixed at 100
        if log_intercept == 0.0 {
            return Err(Error::DegenerateFit(
                "log-space intercept is zero; canonical (a, b, c) undefined".into(),
            ));
        }
        let c = 100.0;
        let ln_a = -log_intercept / c;
        Ok(Self {
            a: ln_a.exp(),
            b: log_slope / ln_a,
            c,
            log_slope,
            log_intercept,
            r_squared: f64::NAN,
            n_points: 0,
        })
    }
}

/// Parameters of the ID-to-size growth curve `size = s * exp(beta * mu1)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthFit {
    pub s: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl GrowthFit {
    pub fn from_params(s: f64, beta: f64) -> Self {
        Self { s, beta, r_squared: 1.0, n_points: 0 }
    }

    /// Predicted dataset size at complexity `mu1`.
    pub fn eval(&self, mu1: f64) -> f64 {
        self.s * (self.beta * mu1).exp()
    }
}

/// Decay and growth fits composed into a size-to-replication model.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CompositeModel {
    pub decay: DecayFit,
    pub growth: GrowthFit,
}

/// Replication percentage at complexity `mu1`: `a^(b*mu1 - c)`.
pub fn eval_f1(fit: &DecayFit, mu1: f64) -> f64 {
    (fit.log_slope * mu1 + fit.log_intercept).exp()
}

/// Replication percentage at dataset size: `a^((b/beta)*ln(size/s) - c)`.
pub fn eval_f2(model: &CompositeModel, size: f64) -> Result<f64> {
    if !(size > 0.0) {
        return Err(Error::InvalidInput(format!("size must be > 0, got {size}")));
    }
    if model.growth.beta == 0.0 {
        return Err(Error::DegenerateFit("growth rate beta is zero; g is not invertible".into()));
    }
    let mu1 = (size / model.growth.s).ln() / model.growth.beta;
    Ok(eval_f1(&model.decay, mu1))
}

/// Dataset size achieving the given replication percentage:
/// `s * exp((beta/b) * (log_a(percent) + c))`.
pub fn invert_f2(model: &CompositeModel, percent: f64) -> Result<f64> {
    if !(percent > 0.0) {
        return Err(Error::InvalidInput(format!(
            "percent must be > 0 (log undefined), got {percent}"
        )));
    }
    let d = &model.decay;
    if d.log_slope == 0.0 || model.growth.beta == 0.0 {
        return Err(Error::DegenerateFit("flat decay or growth curve is not invertible".into()));
    }
    let mu1 = (percent.ln() - d.log_intercept) / d.log_slope;
    Ok(model.growth.eval(mu1))
}

/// Coefficient of determination `1 - SS_res / SS_tot`; may be negative
/// for fits worse than the mean.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() || observed.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need equal lengths >= 2, got {} and {}",
            observed.len(),
            predicted.len()
        )));
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|o| (o - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateFit("all observed values equal; SS_tot is zero".into()));
    }
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn distinct_count(xs: &[f64]) -> usize {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

/// Fit the decay curve to (mu1, percentage) points by damped iterative
/// least squares in original space, initialized from log-linear OLS over
/// the positive-percentage points.
pub fn fit_f1(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    let ps: Vec<f64> = points.iter().map(|&(_, p)| p).collect();
    if distinct_count(&xs) < 2 {
        return Err(Error::DegenerateFit("need at least 2 distinct mu1 values".into()));
    }
    if ps.iter().all(|&p| p == ps[0]) {
        return Err(Error::DegenerateFit("all percentages equal; slope is zero".into()));
    }

    // log-space initialization over positive points
    let pos: Vec<(f64, f64)> = points.iter().filter(|&&(_, p)| p > 0.0).copied().collect();
    let pos_x: Vec<f64> = pos.iter().map(|&(x, _)| x).collect();
    if distinct_count(&pos_x) < 2 {
        return Err(Error::DegenerateFit(
            "need at least 2 positive-percentage points with distinct mu1 to initialize".into(),
        ));
    }
    let pos_logp: Vec<f64> = pos.iter().map(|&(_, p)| p.ln()).collect();
    let (mut slope, mut intercept) = ols(&pos_x, &pos_logp);

    // Gauss-Newton with step halving on the original-space residuals
    let sse = |b: f64, c: f64| -> f64 {
        points
            .iter()
            .map(|&(x, p)| ((b * x + c).exp() - p).powi(2))
            .sum()
    };
    let mut current = sse(slope, intercept);
    for _ in 0..MAX_ITERS {
        let mut jtj = [0.0f64; 3]; // upper triangle of 2x2
        let mut jtr = [0.0f64; 2];
        for &(x, p) in points {
            let m = (slope * x + intercept).exp();
            let r = m - p;
            let jb = x * m;
            let jc = m;
            jtj[0] += jb * jb;
            jtj[1] += jb * jc;
            jtj[2] += jc * jc;
            jtr[0] += jb * r;
            jtr[1] += jc * r;
        }
        let det = jtj[0] * jtj[2] - jtj[1] * jtj[1];
        if det.abs() < 1e-300 {
            break;
        }
        let mut db = -(jtj[2] * jtr[0] - jtj[1] * jtr[1]) / det;
        let mut dc = -(jtj[0] * jtr[1] - jtj[1] * jtr[0]) / det;

        let mut accepted = false;
        for _ in 0..40 {
            let next = sse(slope + db, intercept + dc);
            if next <= current {
                slope += db;
                intercept += dc;
                current = next;
                accepted = true;
                break;
            }
            db *= 0.5;
            dc *= 0.5;
        }
        if !accepted {
            break;
        }
        let rel = (db.abs() / slope.abs().max(1e-300))
            .max(dc.abs() / intercept.abs().max(1e-300));
        if rel < REL_TOL {
            break;
        }
    }

    let mut fit = DecayFit::from_log_linear(slope, intercept)?;
    let predicted: Vec<f64> = xs.iter().map(|&x| eval_f1(&fit, x)).collect();
    fit.r_squared = r_squared(&ps, &predicted)?;
    fit.n_points = points.len();
    Ok(fit)
}

/// Fit the growth curve to (mu1, size) points by OLS on log size.
/// R^2 is computed in log-size space.
pub fn fit_g(points: &[(f64, f64)]) -> Result<GrowthFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(_, bad)) = points.iter().find(|&&(_, size)| !(size > 0.0)) {
        return Err(Error::InvalidInput(format!("sizes must be > 0, got {bad}")));
    }
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    if distinct_count(&xs) < 2 {
        return Err(Error::DegenerateFit("need at least 2 distinct mu1 values".into()));
    }
    let log_sizes: Vec<f64> = points.iter().map(|&(_, size)| size.ln()).collect();
    let (beta, ln_s) = ols(&xs, &log_sizes);
    let predicted: Vec<f64> = xs.iter().map(|&x| ln_s + beta * x).collect();
    let r2 = if log_sizes.iter().all(|&y| y == log_sizes[0]) {
        1.0 // exact interpolation of a constant
    } else {
        r_squared(&log_sizes, &predicted)?
    };
    Ok(GrowthFit { s: ln_s.exp(), beta, r_squared: r2, n_points: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_f1_exponent_zero_is_one() {
        let fit = DecayFit::from_abc(0.96, 62.93, 100.0);
        let v = eval_f1(&fit, 100.0 / 62.93);
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn eval_f1_at_zero_complexity() {
        // a = 0.96, c = 100, mu1 = 0: 0.96^-100 ~ 59.3
        let fit = DecayFit::from_abc(0.96, 17.0, 100.0);
        let v = eval_f1(&fit, 0.0);
        assert!((v - 0.96f64.powi(-100)).abs() < 1e-9);
        assert!((v - 59.3).abs() < 0.2, "{v}");
    }

    #[test]
    fn equal_log_linear_params_give_equal_curves() {
        // two (a, b, c) decompositions of the same (B, C)
        let f1 = DecayFit::from_abc(0.96, 50.0, 100.0);
        let ln_a2 = 2.0 * 0.96f64.ln();
        let f2 = DecayFit::from_abc(ln_a2.exp(), 25.0, 50.0);
        for mu in [0.0, 5.0, 17.3, 40.0] {
            let u = eval_f1(&f1, mu);
            let v = eval_f1(&f2, mu);
            assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }

    #[test]
    fn fit_f1_recovers_noiseless_curve() {
        let (b_true, c_true) = (-0.5f64, 4.0f64);
        let points: Vec<(f64, f64)> = [2.0, 3.5, 5.0, 6.0, 7.5]
            .iter()
            .map(|&x| (x, (b_true * x + c_true).exp()))
            .collect();
        let fit = fit_f1(&points).unwrap();
        assert!((fit.log_slope - b_true).abs() < 1e-6 * b_true.abs());
        assert!((fit.log_intercept - c_true).abs() < 1e-6 * c_true);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert_eq!(fit.c, 100.0);
        // canonical (a, b, c) reproduces (B, C)
        assert!((fit.b * fit.a.ln() - fit.log_slope).abs() < 1e-12);
        assert!((-fit.c * fit.a.ln() - fit.log_intercept).abs() < 1e-12);
    }

    #[test]
    fn fit_f1_rejects_degenerate_inputs() {
        assert!(fit_f1(&[(1.0, 5.0)]).is_err());
        assert!(fit_f1(&[(1.0, 5.0), (1.0, 6.0)]).is_err());
        assert!(fit_f1(&[(1.0, 5.0), (2.0, 5.0), (3.0, 5.0)]).is_err());
    }

    #[test]
    fn fit_g_on_flower_table() {
        let points = [
            (22.02, 1000.0),
            (24.70, 2000.0),
            (27.41, 4000.0),
            (28.99, 6000.0),
            (30.34, 8189.0),
        ];
        let fit = fit_g(&points).unwrap();
        assert!((fit.beta - 0.254).abs() < 0.02, "beta = {}", fit.beta);
        assert!(fit.r_squared >= 0.995, "r2 = {}", fit.r_squared);
    }

    #[test]
    fn fit_g_two_points_interpolates() {
        let fit = fit_g(&[(1.0, 10.0), (3.0, 1000.0)]).unwrap();
        assert!((fit.eval(1.0) - 10.0).abs() < 1e-9);
        assert!((fit.eval(3.0) - 1000.0).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_g_rejects_nonpositive_size() {
        assert!(fit_g(&[(1.0, 0.0), (2.0, 10.0)]).is_err());
    }

    #[test]
    fn f2_composition_matches_f1() {
        let model = CompositeModel {
            decay: DecayFit::from_abc(0.97, 60.0, 100.0),
            growth: GrowthFit::from_params(3.2, 0.25),
        };
        for mu1 in [5.0, 12.0, 20.0, 31.0] {
            let via_f1 = eval_f1(&model.decay, mu1);
            let via_f2 = eval_f2(&model, model.growth.eval(mu1)).unwrap();
            assert!((via_f1 - via_f2).abs() <= 1e-9 * via_f1.abs());
        }
        // size = s makes the log term vanish: a^-c
        let at_s = eval_f2(&model, model.growth.s).unwrap();
        assert!((at_s - 0.97f64.powi(-100)).abs() < 1e-9 * at_s);
    }

    #[test]
    fn f2_monotone_decreasing() {
        let model = CompositeModel {
            decay: DecayFit::from_abc(0.96, 50.0, 100.0),
            growth: GrowthFit::from_params(2.0, 0.3),
        };
        let mut last = f64::INFINITY;
        let mut size = 10.0;
        while size <= 1e6 {
            let v = eval_f2(&model, size).unwrap();
            assert!(v < last);
            last = v;
            size *= 3.0;
        }
    }

    #[test]
    fn invert_f2_round_trip() {
        let model = CompositeModel {
            decay: DecayFit::from_abc(0.97, 80.0, 100.0),
            growth: GrowthFit::from_params(1.5, 0.22),
        };
        for n in [1e2, 1e4, 1e6] {
            let p = eval_f2(&model, n).unwrap();
            let back = invert_f2(&model, p).unwrap();
            assert!((back - n).abs() <= 1e-6 * n, "{back} vs {n}");
        }
        // percent = a^-c maps back to size = s
        let p = 0.97f64.powi(-100);
        let size = invert_f2(&model, p).unwrap();
        assert!((size - model.growth.s).abs() < 1e-9 * model.growth.s);
        assert!(invert_f2(&model, 0.0).is_err());
        assert!(eval_f2(&model, 0.0).is_err());
    }

    #[test]
    fn r_squared_cases() {
        let obs = [1.0, 2.0, 3.0];
        assert_eq!(r_squared(&obs, &obs).unwrap(), 1.0);
        assert_eq!(r_squared(&obs, &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        // observed {0,1}, predicted {1,0}: 1 - 2/0.5 = -3
        assert_eq!(r_squared(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), -3.0);
        assert!(r_squared(&[1.0, 1.0], &[0.0, 2.0]).is_err());
        assert!(r_squared(&[1.0], &[1.0]).is_err());
    }
}
