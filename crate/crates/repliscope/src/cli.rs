//! Command implementations behind the `repliscope` binary: preprocessing,
//! ID estimation, replication measurement, model fitting, prediction, and
//! the cross-validation harness. Kept in the library so integration tests
//! can drive commands directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decay_models::{self, CompositeModel, DecayFit, GrowthFit};
use crate::error::Error;
use crate::intrinsic_dim::{estimate_id, IdConfig};
use crate::predictor::{self, ComboRecord, PredictionMode};
use crate::replication::{self, ReplicationPoint};
use crate::vecstore::{
    downscale_rows, load_image_dir, read_vds, write_vds, PreprocessConfig, SpaceTag,
    VectorDataset,
};

/// Command failure classes, mapped onto process exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2: inconsistent or invalid flags/arguments.
    Usage(String),
    /// Exit code 1: a computation or i/o failure.
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

pub type CliResult = Result<(), CliError>;

// ---------------------------------------------------------------------------
// Experiment manifest
// ---------------------------------------------------------------------------

fn default_alpha() -> f64 {
    8000.0
}
fn default_resolution() -> usize {
    128
}
fn default_id_resolution() -> usize {
    32
}
fn default_k1() -> usize {
    10
}
fn default_k2() -> usize {
    20
}

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestLevel {
    pub size: usize,
    pub training_path: String,
    pub generated_path: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestCombo {
    pub name: String,
    pub levels: Vec<ManifestLevel>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExperimentManifest {
    pub combos: Vec<ManifestCombo>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_id_resolution")]
    pub id_resolution: usize,
    #[serde(default = "default_k1")]
    pub k1: usize,
    #[serde(default = "default_k2")]
    pub k2: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentManifest {
    /// Parse a manifest file; relative level paths are resolved against
    /// the manifest's directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Manifest(format!("cannot read {}: {e}", path.display())))?;
        let manifest: ExperimentManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Manifest(format!("invalid manifest {}: {e}", path.display())))?;
        manifest.validate()?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((manifest, base))
    }

    fn validate(&self) -> Result<(), Error> {
        let mut names: Vec<&str> = self.combos.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.combos.len() {
            return Err(Error::Manifest("combo names must be unique".into()));
        }
        for combo in &self.combos {
            let sizes: Vec<usize> = combo.levels.iter().map(|l| l.size).collect();
            if sizes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Manifest(format!(
                    "combo {}: level sizes must be strictly increasing",
                    combo.name
                )));
            }
        }
        if self.k1 < 2 || self.k1 > self.k2 {
            return Err(Error::Manifest(format!(
                "require 2 <= k1 <= k2, got k1={} k2={}",
                self.k1, self.k2
            )));
        }
        Ok(())
    }

    fn id_config(&self) -> IdConfig {
        IdConfig { k1: self.k1, k2: self.k2, ..Default::default() }
    }
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

/// Format with 6 significant digits, the CSV-wide convention.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let rounded = if mag > 5 {
        let factor = 10f64.powi(mag - 5);
        (x / factor).round() * factor
    } else {
        x
    };
    let decimals = (5 - mag).clamp(0, 17) as usize;
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    s
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Fit parameters serialized to JSON, one record per model.
#[derive(Serialize)]
struct FitRecord {
    model: &'static str,
    combo: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    log_slope: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    log_intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    r_squared: f64,
    n_points: usize,
}

impl FitRecord {
    fn f1(combo: &str, fit: &DecayFit) -> Self {
        Self {
            model: "f1",
            combo: combo.into(),
            a: Some(fit.a),
            b: Some(fit.b),
            c: Some(fit.c),
            log_slope: Some(fit.log_slope),
            log_intercept: Some(fit.log_intercept),
            s: None,
            beta: None,
            r_squared: fit.r_squared,
            n_points: fit.n_points,
        }
    }

    fn g(combo: &str, fit: &GrowthFit) -> Self {
        Self {
            model: "g",
            combo: combo.into(),
            a: None,
            b: None,
            c: None,
            log_slope: None,
            log_intercept: None,
            s: Some(fit.s),
            beta: Some(fit.beta),
            r_squared: fit.r_squared,
            n_points: fit.n_points,
        }
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

pub fn cmd_preprocess(
    in_dir: &Path,
    out_vds: &Path,
    resolution: usize,
    zscore: bool,
) -> CliResult {
    let cfg = PreprocessConfig {
        target_resolution: resolution,
        id_resolution: resolution.min(32),
        zscore,
    };
    let (ds, skipped) = load_image_dir(in_dir, &cfg)?;
    for rel in &skipped {
        eprintln!("warning: skipped undecodable file {rel}");
    }
    if let Some(parent) = out_vds.parent() {
        std::fs::create_dir_all(parent).map_err(Error::from)?;
    }
    write_vds(&ds, out_vds)?;
    println!(
        "count={} dim={} skipped={} -> {}",
        ds.count(),
        ds.dim(),
        skipped.len(),
        out_vds.display()
    );
    Ok(())
}

/// Infer the channel count of a square pixel dataset, if its dimension
/// factors as `resolution^2 * c` with c in {1, 3}.
fn pixel_channels(dim: usize, resolution: usize) -> Option<usize> {
    let px = resolution * resolution;
    if px == 0 || dim % px != 0 {
        return None;
    }
    match dim / px {
        c @ (1 | 3) => Some(c),
        _ => None,
    }
}

fn id_input(
    ds: &VectorDataset<f32>,
    resolution: usize,
    id_resolution: usize,
    full_res: bool,
) -> Result<VectorDataset<f32>, Error> {
    if full_res || id_resolution >= resolution {
        return Ok(ds.clone());
    }
    match pixel_channels(ds.dim(), resolution) {
        Some(c) => downscale_rows(ds, resolution, id_resolution, c),
        None => Ok(ds.clone()), // not square pixel data; use native vectors
    }
}

pub fn cmd_id(
    vds: &Path,
    k1: usize,
    k2: usize,
    full_res: bool,
    resolution: usize,
    id_resolution: usize,
    per_point_csv: Option<&Path>,
) -> CliResult {
    if k1 < 2 || k1 > k2 {
        return Err(CliError::Usage(format!(
            "require 2 <= k1 <= k2, got k1={k1} k2={k2}"
        )));
    }
    let ds = read_vds(vds)?;
    let input = id_input(&ds, resolution, id_resolution, full_res)?;
    let cfg = IdConfig { k1, k2, ..Default::default() };
    let est = estimate_id(&input, &cfg)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "id={} n_used={} k1={} k2={} dim={}",
        est.value,
        est.n_used,
        k1,
        k2,
        input.dim()
    );
    if let Some(path) = per_point_csv {
        let mut csv = String::from("point_id,m_hat_mean\n");
        for (i, m) in est.per_point.iter().enumerate() {
            let _ = writeln!(csv, "{},{}", input.id_of(i), fmt_sig(*m));
        }
        write_text(path, &csv)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReplicationSummary {
    alpha: f64,
    n_generated: usize,
    percentage: f64,
}

pub fn cmd_replication(
    training_vds: &Path,
    generated_vds: &Path,
    alpha: Option<f64>,
    sweep: Option<&[f64]>,
    out_dir: &Path,
) -> CliResult {
    let training = read_vds(training_vds)?;
    let generated = read_vds(generated_vds)?;

    let alpha = match alpha {
        Some(a) => a,
        None => {
            // the default threshold is calibrated for raw 128x128x3 pixels
            if training.space_tag() == SpaceTag::PixelRaw0255 && training.dim() == 128 * 128 * 3 {
                default_alpha()
            } else {
                return Err(CliError::Usage(format!(
                    "no default alpha for space_tag {:?} at dim {}; pass --alpha explicitly \
                     (the 8000 default applies only to raw 0-255 pixels at 128x128x3)",
                    training.space_tag(),
                    training.dim()
                )));
            }
        }
    };

    if let Some(alphas) = sweep {
        if alphas.windows(2).any(|w| w[0] >= w[1]) || alphas.first().is_some_and(|&a| a < 0.0) {
            return Err(CliError::Usage(
                "--sweep thresholds must be non-negative and strictly ascending".into(),
            ));
        }
    }
    if generated.count() < 1024 {
        eprintln!(
            "warning: only {} generated samples (1024 recommended for a stable estimate)",
            generated.count()
        );
    }

    let report = replication::replication_percentage(&generated, &training, alpha)?;

    std::fs::create_dir_all(out_dir).map_err(Error::from)?;
    let summary = ReplicationSummary {
        alpha: report.alpha,
        n_generated: report.n_generated,
        percentage: report.percentage,
    };
    write_text(
        &out_dir.join("replication_summary.json"),
        &serde_json::to_string_pretty(&summary).map_err(Error::from)?,
    )?;

    let mut csv = String::from("generated_id,nearest_training_id,min_distance,is_replication\n");
    for s in &report.per_sample {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            s.generated_id,
            s.nearest_training_id,
            fmt_sig(s.min_distance),
            s.is_replication
        );
    }
    write_text(&out_dir.join("replication_samples.csv"), &csv)?;

    if let Some(alphas) = sweep {
        let sweep = replication::alpha_sweep(&generated, &training, alphas)?;
        let mut csv = String::from("alpha,percentage\n");
        for (a, p) in &sweep.points {
            let _ = writeln!(csv, "{},{}", fmt_sig(*a), fmt_sig(*p));
        }
        write_text(&out_dir.join("alpha_sweep.csv"), &csv)?;
    }

    println!(
        "alpha={} n_generated={} percentage={}",
        report.alpha, report.n_generated, report.percentage
    );
    Ok(())
}

/// Load every level of a combo and compute its scatter points.
fn combo_points(
    manifest: &ExperimentManifest,
    base: &Path,
    combo: &ManifestCombo,
) -> Result<Vec<ReplicationPoint>, Error> {
    let cfg = manifest.id_config();
    let mut points = Vec::with_capacity(combo.levels.len());
    for level in &combo.levels {
        let training = read_vds(&resolve(base, &level.training_path))
            .map_err(|e| annotate_path(e, &level.training_path))?;
        let generated = read_vds(&resolve(base, &level.generated_path))
            .map_err(|e| annotate_path(e, &level.generated_path))?;
        if training.count() != level.size {
            eprintln!(
                "warning: combo {} level {}: training set has {} rows",
                combo.name,
                level.size,
                training.count()
            );
        }
        let id_ds = id_input(&training, manifest.resolution, manifest.id_resolution, false)?;
        let id = estimate_id(&id_ds, &cfg)?;
        let report =
            replication::replication_percentage(&generated, &training, manifest.alpha)?;
        points.push(ReplicationPoint {
            mu1: id.value,
            mu2: training.count(),
            percentage: report.percentage,
        });
    }
    Ok(points)
}

fn annotate_path(e: Error, path: &str) -> Error {
    match e {
        Error::Io(io) => Error::Manifest(format!("cannot read {path}: {io}")),
        other => other,
    }
}

pub fn cmd_analyze(manifest_path: &Path, out_dir: &Path) -> CliResult {
    let (manifest, base) = ExperimentManifest::load(manifest_path)?;
    std::fs::create_dir_all(out_dir).map_err(Error::from)?;

    let mut points_csv = String::from("combo,level_size,mu1,mu2,replication_pct\n");
    let mut fits = Vec::new();
    let mut curve_files = Vec::new();

    for combo in &manifest.combos {
        let points = combo_points(&manifest, &base, combo)?;
        for (level, p) in combo.levels.iter().zip(&points) {
            let _ = writeln!(
                points_csv,
                "{},{},{},{},{}",
                combo.name,
                level.size,
                fmt_sig(p.mu1),
                p.mu2,
                fmt_sig(p.percentage)
            );
        }
        if points.len() < 2 {
            eprintln!(
                "warning: combo {} has {} level(s); need 2 to fit, skipping",
                combo.name,
                points.len()
            );
            continue;
        }

        let f1_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.mu1, p.percentage)).collect();
        let g_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.mu1, p.mu2 as f64)).collect();
        let decay = decay_models::fit_f1(&f1_pts)?;
        let growth = decay_models::fit_g(&g_pts)?;
        fits.push(FitRecord::f1(&combo.name, &decay));
        fits.push(FitRecord::g(&combo.name, &growth));

        let model = CompositeModel { decay, growth };
        let tag = sanitize(&combo.name);

        let mu_lo = f1_pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let mu_hi = f1_pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let mut f1_csv = String::from("x,y\n");
        for i in 0..=100 {
            let mu = mu_lo + (mu_hi - mu_lo) * i as f64 / 100.0;
            let _ = writeln!(f1_csv, "{},{}", fmt_sig(mu), fmt_sig(decay_models::eval_f1(&decay, mu)));
        }
        let f1_path = out_dir.join(format!("curve_f1_{tag}.csv"));
        write_text(&f1_path, &f1_csv)?;
        curve_files.push(f1_path);

        let size_lo = points.first().unwrap().mu2 as f64;
        let size_hi = points.last().unwrap().mu2 as f64;
        let mut f2_csv = String::from("x,y\n");
        for i in 0..=100 {
            // log-spaced sampling over the observed size range
            let size = size_lo * (size_hi / size_lo).powf(i as f64 / 100.0);
            let _ = writeln!(f2_csv, "{},{}", fmt_sig(size), fmt_sig(decay_models::eval_f2(&model, size)?));
        }
        let f2_path = out_dir.join(format!("curve_f2_{tag}.csv"));
        write_text(&f2_path, &f2_csv)?;
        curve_files.push(f2_path);
    }

    write_text(&out_dir.join("points.csv"), &points_csv)?;
    write_text(
        &out_dir.join("fits.json"),
        &serde_json::to_string_pretty(&fits).map_err(Error::from)?,
    )?;
    println!(
        "analyzed {} combo(s): points.csv, fits.json, {} curve file(s) in {}",
        manifest.combos.len(),
        curve_files.len(),
        out_dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct PredictOutput {
    a: f64,
    b: f64,
    c: f64,
    point_mu1: f64,
    point_percentage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_percentage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_size: Option<f64>,
}

pub struct PredictArgs {
    pub shared_a: f64,
    pub shared_c: f64,
    /// One (mu1, percentage) measurement used to pin down b.
    pub point: (f64, f64),
    /// Predict replication at this dataset size (needs growth params).
    pub pct_for_size: Option<f64>,
    /// Predict the minimal size keeping replication at this percentage.
    pub size_for_pct: Option<f64>,
    /// Predict replication at this complexity.
    pub pct_for_id: Option<f64>,
    pub growth: Option<(f64, f64)>, // (s, beta)
}

pub fn cmd_predict(args: &PredictArgs, out_dir: &Path) -> CliResult {
    if args.pct_for_size.is_some() && args.size_for_pct.is_some() {
        return Err(CliError::Usage(
            "--pct-for-size and --size-for-pct are mutually exclusive".into(),
        ));
    }
    if !(args.shared_a > 0.0 && args.shared_a < 1.0) {
        return Err(CliError::Usage(format!(
            "--shared-a must lie in (0, 1), got {}",
            args.shared_a
        )));
    }
    let b = predictor::one_shot_b(args.shared_a, args.shared_c, args.point)?;
    let decay = DecayFit::from_abc(args.shared_a, b, args.shared_c);

    let growth = args.growth.map(|(s, beta)| GrowthFit::from_params(s, beta));
    let need_growth = args.pct_for_size.is_some() || args.size_for_pct.is_some();
    if need_growth && growth.is_none() {
        return Err(CliError::Usage(
            "size queries need growth parameters: pass --growth-s and --growth-beta".into(),
        ));
    }

    let mut predicted_percentage = None;
    let mut predicted_size = None;
    if let Some(mu1) = args.pct_for_id {
        predicted_percentage = Some(decay_models::eval_f1(&decay, mu1));
    }
    if let Some(size) = args.pct_for_size {
        let model = CompositeModel { decay, growth: growth.unwrap() };
        predicted_percentage = Some(decay_models::eval_f2(&model, size)?);
    }
    if let Some(pct) = args.size_for_pct {
        let model = CompositeModel { decay, growth: growth.unwrap() };
        predicted_size = Some(decay_models::invert_f2(&model, pct)?);
    }

    let out = PredictOutput {
        a: args.shared_a,
        b,
        c: args.shared_c,
        point_mu1: args.point.0,
        point_percentage: args.point.1,
        predicted_percentage,
        predicted_size,
    };
    std::fs::create_dir_all(out_dir).map_err(Error::from)?;
    write_text(
        &out_dir.join("predict.json"),
        &serde_json::to_string_pretty(&out).map_err(Error::from)?,
    )?;
    print!("b={}", out.b);
    if let Some(p) = out.predicted_percentage {
        print!(" predicted_percentage={p}");
    }
    if let Some(s) = out.predicted_size {
        print!(" predicted_size={s}");
    }
    println!();
    Ok(())
}

pub fn cmd_loocv(manifest_path: &Path, mode: PredictionMode, out_dir: &Path) -> CliResult {
    let (manifest, base) = ExperimentManifest::load(manifest_path)?;
    let combos: Vec<ComboRecord> = manifest
        .combos
        .iter()
        .map(|c| {
            let points = combo_points(&manifest, &base, c)?;
            ComboRecord::new(c.name.clone(), points)
        })
        .collect::<Result<_, Error>>()?;

    let reports = predictor::loocv(&combos, mode)?;

    let mut csv = String::from("combo,mode,r_squared,mae_f1_pct,mae_f2_pct,mae_f2inv_samples\n");
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.held_out,
            r.mode.as_str(),
            fmt_sig(r.r_squared),
            fmt_sig(r.mae_f1),
            fmt_sig(r.mae_f2),
            fmt_sig(r.mae_f2_inv)
        );
    }
    let median = |f: fn(&predictor::PredictionReport) -> f64| {
        let mut v: Vec<f64> = reports.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    };
    let _ = writeln!(
        csv,
        "median,{},{},{},{},{}",
        mode.as_str(),
        fmt_sig(median(|r| r.r_squared)),
        fmt_sig(median(|r| r.mae_f1)),
        fmt_sig(median(|r| r.mae_f2)),
        fmt_sig(median(|r| r.mae_f2_inv))
    );

    std::fs::create_dir_all(out_dir).map_err(Error::from)?;
    write_text(&out_dir.join("loocv.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}
