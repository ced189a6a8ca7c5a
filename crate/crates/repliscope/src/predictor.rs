//! Shared-parameter pooling, one-shot / two-shot estimation of the
//! combo-specific scaling, and the leave-one-combination-out
//! cross-validation harness.

use serde::Serialize;

use crate::decay_models::{self, CompositeModel, DecayFit};
use crate::error::{Error, Result};
use crate::replication::ReplicationPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMode {
    OneShot,
    TwoShot,
    Full,
}

impl PredictionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PredictionMode::OneShot => "one_shot",
            PredictionMode::TwoShot => "two_shot",
            PredictionMode::Full => "full",
        }
    }
}

/// Measurements for one GAN-dataset combination: one point per subset
/// level, sorted by dataset size ascending.
#[derive(Clone, Debug)]
pub struct ComboRecord {
    pub name: String,
    pub points: Vec<ReplicationPoint>,
}

impl ComboRecord {
    pub fn new(name: String, mut points: Vec<ReplicationPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput(format!("combo {name} has no points")));
        }
        points.sort_by(|a, b| a.mu2.cmp(&b.mu2));
        if points.windows(2).any(|w| w[0].mu2 == w[1].mu2) {
            return Err(Error::InvalidInput(format!(
                "combo {name} has duplicate subset sizes"
            )));
        }
        Ok(Self { name, points })
    }

    fn f1_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.mu1, p.percentage)).collect()
    }

    fn g_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.mu1, p.mu2 as f64)).collect()
    }
}

/// Per-fold result of the cross-validation harness.
#[derive(Clone, Debug, Serialize)]
pub struct PredictionReport {
    pub held_out: String,
    pub mode: PredictionMode,
    pub predicted_fit: DecayFit,
    pub r_squared: f64,
    /// Median absolute error of replication predicted from ID, in
    /// percentage points.
    pub mae_f1: f64,
    /// Median absolute error of replication predicted from size, in
    /// percentage points.
    pub mae_f2: f64,
    /// Median absolute error of size predicted from replication, in
    /// samples.
    pub mae_f2_inv: f64,
}

/// Arithmetic means of the decay base and translation across fits.
pub fn pool_shared_params(fits: &[DecayFit]) -> Result<(f64, f64)> {
    if fits.is_empty() {
        return Err(Error::InvalidInput("cannot pool an empty fit list".into()));
    }
    let n = fits.len() as f64;
    let a_bar = fits.iter().map(|f| f.a).sum::<f64>() / n;
    let c_bar = fits.iter().map(|f| f.c).sum::<f64>() / n;
    Ok((a_bar, c_bar))
}

/// Closed-form scaling from one measurement:
/// `b = (log_a(percentage) + c) / mu1`, the unique b with
/// `a^(b*mu1 - c) = percentage`.
pub fn one_shot_b(a: f64, c: f64, point: (f64, f64)) -> Result<f64> {
    let (mu1, pct) = point;
    check_shared(a)?;
    if !(pct > 0.0) {
        return Err(Error::InvalidInput(format!(
            "percentage must be > 0 to take its log, got {pct}"
        )));
    }
    if mu1 == 0.0 {
        return Err(Error::InvalidInput("mu1 must be nonzero".into()));
    }
    Ok((pct.ln() / a.ln() + c) / mu1)
}

/// Least-squares slope through the origin in `(mu1, log_a(p) + c)` space
/// over two measurements.
pub fn two_shot_b(a: f64, c: f64, p1: (f64, f64), p2: (f64, f64)) -> Result<f64> {
    check_shared(a)?;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(mu1, pct) in [&p1, &p2] {
        if !(pct > 0.0) {
            return Err(Error::InvalidInput(format!(
                "percentage must be > 0 to take its log, got {pct}"
            )));
        }
        let y = pct.ln() / a.ln() + c;
        sxy += mu1 * y;
        sxx += mu1 * mu1;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("mu1 values must be nonzero".into()));
    }
    Ok(sxy / sxx)
}

fn check_shared(a: f64) -> Result<()> {
    if !(a > 0.0) || a == 1.0 {
        return Err(Error::InvalidInput(format!(
            "shared decay base must be positive and != 1, got {a}"
        )));
    }
    Ok(())
}

/// Median of `|predicted_i - observed_i|`; even counts average the two
/// middle values.
pub fn median_abs_error(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != observed.len() {
        return Err(Error::InvalidInput(format!(
            "need equal nonzero lengths, got {} and {}",
            predicted.len(),
            observed.len()
        )));
    }
    let mut errs: Vec<f64> = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o).abs())
        .collect();
    errs.sort_by(f64::total_cmp);
    let n = errs.len();
    Ok(if n % 2 == 1 {
        errs[n / 2]
    } else {
        (errs[n / 2 - 1] + errs[n / 2]) / 2.0
    })
}

/// Leave-one-combination-out cross-validation. For each held-out combo,
/// the remaining combos are fitted in full and their (a, c) pooled; the
/// held-out scaling is then estimated from its smallest level(s) (or its
/// own full fit for [`PredictionMode::Full`]) and evaluated at all its
/// levels.
pub fn loocv(combos: &[ComboRecord], mode: PredictionMode) -> Result<Vec<PredictionReport>> {
    if combos.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "cross-validation needs at least 2 combos, got {}",
            combos.len()
        )));
    }
    combos.iter().map(|held| run_fold(combos, held, mode)).collect()
}

fn run_fold(
    combos: &[ComboRecord],
    held: &ComboRecord,
    mode: PredictionMode,
) -> Result<PredictionReport> {
    let predicted_fit = match mode {
        PredictionMode::Full => decay_models::fit_f1(&held.f1_points())?,
        PredictionMode::OneShot | PredictionMode::TwoShot => {
            let others: Vec<DecayFit> = combos
                .iter()
                .filter(|c| c.name != held.name)
                .map(|c| decay_models::fit_f1(&c.f1_points()))
                .collect::<Result<_>>()?;
            let (a_bar, c_bar) = pool_shared_params(&others)?;

            // smallest levels with measurable replication
            let usable: Vec<(f64, f64)> = held
                .points
                .iter()
                .filter(|p| p.percentage > 0.0)
                .map(|p| (p.mu1, p.percentage))
                .collect();
            let b = match mode {
                PredictionMode::OneShot => {
                    let p = usable.first().ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "combo {} has no level with positive replication",
                            held.name
                        ))
                    })?;
                    one_shot_b(a_bar, c_bar, *p)?
                }
                _ => {
                    if usable.len() < 2 {
                        return Err(Error::InvalidInput(format!(
                            "combo {} needs 2 positive-replication levels for two-shot, has {}",
                            held.name,
                            usable.len()
                        )));
                    }
                    two_shot_b(a_bar, c_bar, usable[0], usable[1])?
                }
            };
            DecayFit::from_abc(a_bar, b, c_bar)
        }
    };

    let observed: Vec<f64> = held.points.iter().map(|p| p.percentage).collect();
    let from_id: Vec<f64> = held
        .points
        .iter()
        .map(|p| decay_models::eval_f1(&predicted_fit, p.mu1))
        .collect();
    let r2 = decay_models::r_squared(&observed, &from_id)?;
    let mae_f1 = median_abs_error(&from_id, &observed)?;

    // size-based predictions use a growth fit on the held-out combo's own
    // (ID, size) pairs, which need no replication measurements
    let growth = decay_models::fit_g(&held.g_points())?;
    let model = CompositeModel { decay: predicted_fit, growth };

    let from_size: Vec<f64> = held
        .points
        .iter()
        .map(|p| decay_models::eval_f2(&model, p.mu2 as f64))
        .collect::<Result<_>>()?;
    let mae_f2 = median_abs_error(&from_size, &observed)?;

    // size from replication is only defined at positive percentages
    let mut sizes_pred = Vec::new();
    let mut sizes_obs = Vec::new();
    for p in &held.points {
        if p.percentage > 0.0 {
            sizes_pred.push(invert_checked(&model, p.percentage)?);
            sizes_obs.push(p.mu2 as f64);
        }
    }
    let mae_f2_inv = median_abs_error(&sizes_pred, &sizes_obs)?;

    Ok(PredictionReport {
        held_out: held.name.clone(),
        mode,
        predicted_fit,
        r_squared: r2,
        mae_f1,
        mae_f2,
        mae_f2_inv,
    })
}

fn invert_checked(model: &CompositeModel, pct: f64) -> Result<f64> {
    decay_models::invert_f2(model, pct)
}
