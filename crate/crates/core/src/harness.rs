//! Seeded Monte-Carlo experiments and report emission.
//!
//! Every sample draws its unitaries from seeds derived from
//! `(root_seed, point, sample, site)` counters and results are reduced in
//! sample order, so output files are byte-identical for any worker count.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, MagicError, Result};
use crate::magic::{magic_report, phase_corrected_fourth_moment, MagicReport};
use crate::pauli::SiteClass;
use crate::rmps::{sample_rmps, sub_seed};
use crate::transfer::{analytic_moment_sum_variant, per_string_expectation_variant};
use crate::weingarten::{consistency_probe, ConsistencyProbe, WgVariant};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "RMPS_MAGIC_WORKERS";
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_SAMPLES: usize = 100;
/// `|z|` above this fails a cross-validation point.
pub const Z_LIMIT: f64 = 3.0;
/// Largest `n` accepted for cross-validation.
pub const CROSSVAL_MAX_N: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fig1,
    Crossval,
    Bounds,
    WeingartenCheck,
    AppendixPolys,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(rename = "B_list", alias = "b_list")]
    pub b_list: Vec<usize>,
    /// Inclusive `[n_min, n_max]`.
    pub n_range: (usize, usize),
    pub samples_per_point: usize,
    pub root_seed: u64,
    /// `None` defers to the environment, then to the rayon default.
    pub worker_count: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub mode: Mode,
    /// `β` of the tail fraction reported with each fig1 record.
    pub tail_beta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: 2,
            b_list: vec![2, 4, 8],
            n_range: (2, 8),
            samples_per_point: DEFAULT_SAMPLES,
            root_seed: DEFAULT_SEED,
            worker_count: None,
            output_path: None,
            mode: Mode::Fig1,
            tail_beta: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| MagicError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MagicError::Config(m));
        if self.d < 2 {
            return bad(format!("d = {} < 2", self.d));
        }
        if self.b_list.is_empty() {
            return bad("B list is empty".into());
        }
        if let Some(b) = self.b_list.iter().find(|&&b| b < 2) {
            return bad(format!("bond dimension {b} < 2"));
        }
        let (lo, hi) = self.n_range;
        if lo < 2 || hi > 12 || lo > hi {
            return bad(format!("n range {lo}..{hi} must lie within 2..12"));
        }
        if self.samples_per_point == 0 {
            return bad("samples per point must be at least 1".into());
        }
        if self.worker_count == Some(0) {
            return bad("worker count must be at least 1".into());
        }
        if !self.tail_beta.is_finite() {
            return bad("tail beta must be finite".into());
        }
        Ok(())
    }

    fn ns(&self) -> std::ops::RangeInclusive<usize> {
        self.n_range.0..=self.n_range.1
    }
}

/// Worker count from `--workers`, else the environment, else automatic.
pub fn resolve_workers(explicit: Option<usize>) -> Result<Option<usize>> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .map(Some)
            .ok_or_else(|| MagicError::Config(format!("{WORKERS_ENV}={v} is not a positive integer"))),
        _ => Ok(None),
    }
}

/// Runs `f` on a dedicated pool when a worker count is given.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match resolve_workers(workers)? {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| MagicError::Config(format!("thread pool: {e}")))?
            .install(f),
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

/// Seed of one `(n, B)` point; sample counters are applied on top of it.
fn point_seed(root: u64, n: usize, b: usize) -> u64 {
    sub_seed(root, n as u64, b as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub samples: usize,
    pub failed_samples: usize,
    pub seed: u64,
    pub mean_magic: f64,
    pub stderr_magic: f64,
    pub log_d_mean_magic: f64,
    /// Delta-method standard error of `log_d_mean_magic`.
    pub stderr_log_d_mean_magic: f64,
    pub mean_moment_sum: f64,
    /// Haar average of the moment sum for unnormalized states; absent
    /// outside the analytic domain `2 ≤ d, B ≤ 12`.
    pub analytic_moment_sum: Option<f64>,
    pub mean_raw_norm_sq: f64,
    pub empirical_tail_fraction: f64,
    /// `min(M − d^{n/2}/√Σ|⟨P⟩|⁴)` over the samples.
    pub min_bound_margin: f64,
    pub bound_violations: usize,
}

/// Per-sample values kept for tail checks and inspection.
#[derive(Clone, Debug, Serialize)]
pub struct SampleSeries {
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub magic: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig1Output {
    pub records: Vec<ExperimentRecord>,
    /// `(B, fit of log_d mean M against n)`.
    pub fits: Vec<(usize, SlopeFit)>,
    pub series: Vec<SampleSeries>,
}

impl Fig1Output {
    pub fn states_checked(&self) -> usize {
        self.records.iter().map(|r| r.samples - r.failed_samples).sum()
    }

    pub fn bound_violations(&self) -> usize {
        self.records.iter().map(|r| r.bound_violations).sum()
    }

    /// Linearity per `B`, the per-state inequality, and at `d = 2` the
    /// `B = 2` slope window and the `0.1·n` lower bound.
    pub fn acceptance(&self) -> Vec<AcceptanceCheck> {
        let mut out = vec![AcceptanceCheck {
            name: "per-state inequality".into(),
            passed: self.bound_violations() == 0,
            detail: format!("{} violations over {} states", self.bound_violations(), self.states_checked()),
        }];
        for (b, fit) in &self.fits {
            out.push(AcceptanceCheck {
                name: format!("linearity B={b}"),
                passed: fit.r_squared >= 0.98,
                detail: format!("r² = {:.5}, slope = {:.4}", fit.r_squared, fit.slope),
            });
        }
        let qubit_b2: Vec<&ExperimentRecord> = self.records.iter().filter(|r| r.d == 2 && r.b == 2).collect();
        if qubit_b2.is_empty() {
            return out;
        }
        if let Some((_, fit)) = self.fits.iter().find(|(b, _)| *b == 2) {
            out.push(AcceptanceCheck {
                name: "B=2 slope in [0.40, 0.52]".into(),
                passed: (0.40..=0.52).contains(&fit.slope),
                detail: format!("slope = {:.4}", fit.slope),
            });
        }
        let failing: Vec<usize> = qubit_b2
            .iter()
            .filter(|r| r.log_d_mean_magic < 0.1 * r.n as f64 - 3.0 * r.stderr_log_d_mean_magic)
            .map(|r| r.n)
            .collect();
        out.push(AcceptanceCheck {
            name: "log2 mean M >= 0.1 n".into(),
            passed: failing.is_empty(),
            detail: if failing.is_empty() { "all n".into() } else { format!("fails at n = {failing:?}") },
        });
        out
    }
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return domain(format!("slope fit needs at least 3 points, got {}", points.len()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(MagicError::Degenerate("all abscissae are equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(SlopeFit { slope, intercept, r_squared })
}

/// Collects per-sample results; fails if more than 1% of samples fail.
fn gather<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, usize)> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut first_err = None;
    let mut failed = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                first_err.get_or_insert((i, e));
            }
        }
    }
    if failed * 100 > total || ok.is_empty() {
        let (index, source) = first_err.expect("at least one failure");
        return Err(MagicError::Sample { index, source: Box::new(source) });
    }
    Ok((ok, failed))
}

fn analytic_in_domain(d: usize, b: usize, n: usize) -> Option<f64> {
    if !(2..=12).contains(&d) || !(2..=12).contains(&b) {
        return None;
    }
    analytic_moment_sum_variant(d as u64, b as u64, n, WgVariant::GramInverse).ok().map(|r| r.value)
}

/// The scaling experiment: mean L1 magic of normalized RMPSs per `(n, B)`.
pub fn run_fig1(config: &ExperimentConfig) -> Result<Fig1Output> {
    config.validate()?;
    with_workers(config.worker_count, || fig1_inner(config))
}

fn fig1_inner(config: &ExperimentConfig) -> Result<Fig1Output> {
    let d = config.d;
    let ln_d = (d as f64).ln();
    let mut records = Vec::new();
    let mut series = Vec::new();
    for &b in &config.b_list {
        for n in config.ns() {
            let seed = point_seed(config.root_seed, n, b);
            let results: Vec<Result<(MagicReport, f64)>> = (0..config.samples_per_point as u64)
                .into_par_iter()
                .map(|s| {
                    let st = sample_rmps(n, d, b, seed, s, true)?;
                    Ok((magic_report(&st.statevector, d)?, st.raw_norm * st.raw_norm))
                })
                .collect();
            let (ok, failed) = gather(results)?;
            let magic: Vec<f64> = ok.iter().map(|(r, _)| r.magic_l1).collect();
            let (mean, se) = mean_stderr(&magic);
            let moments: Vec<f64> = ok.iter().map(|(r, _)| r.fourth_moment_sum).collect();
            let norms: Vec<f64> = ok.iter().map(|(_, x)| *x).collect();
            let margins = ok.iter().map(|(r, _)| r.magic_l1 - r.lower_bound);
            let threshold = config.tail_beta * n as f64;
            records.push(ExperimentRecord {
                n,
                d,
                b,
                samples: config.samples_per_point,
                failed_samples: failed,
                seed,
                mean_magic: mean,
                stderr_magic: se,
                log_d_mean_magic: mean.ln() / ln_d,
                stderr_log_d_mean_magic: se / (mean * ln_d),
                mean_moment_sum: mean_stderr(&moments).0,
                analytic_moment_sum: analytic_in_domain(d, b, n),
                mean_raw_norm_sq: mean_stderr(&norms).0,
                empirical_tail_fraction: ok.iter().filter(|(r, _)| r.log_d_magic >= threshold).count() as f64
                    / ok.len() as f64,
                min_bound_margin: margins.fold(f64::INFINITY, f64::min),
                bound_violations: ok.iter().filter(|(r, _)| !r.bound_holds()).count(),
            });
            series.push(SampleSeries { n, b, magic });
        }
    }
    let mut fits = Vec::new();
    for &b in &config.b_list {
        let pts: Vec<(f64, f64)> =
            records.iter().filter(|r| r.b == b).map(|r| (r.n as f64, r.log_d_mean_magic)).collect();
        if pts.len() >= 3 {
            fits.push((b, fit_slope(&pts)?));
        }
    }
    Ok(Fig1Output { records, fits, series })
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRecord {
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub beta: f64,
    pub threshold_base: f64,
    pub fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub records: Vec<TailRecord>,
    /// `(B, fraction non-decreasing in n)`; reported, not asserted.
    pub monotone: Vec<(usize, bool)>,
}

/// Fraction of samples with `log_base M ≥ β·n` for each `(n, B)`.
pub fn tail_fractions(output: &Fig1Output, beta: f64, threshold_base: f64) -> Result<TailReport> {
    if threshold_base.is_nan() || threshold_base <= 1.0 {
        return domain(format!("threshold base must exceed 1, got {threshold_base}"));
    }
    let ln_base = threshold_base.ln();
    let records: Vec<TailRecord> = output
        .series
        .iter()
        .map(|s| TailRecord {
            n: s.n,
            b: s.b,
            beta,
            threshold_base,
            fraction: s.magic.iter().filter(|m| m.ln() / ln_base >= beta * s.n as f64).count() as f64
                / s.magic.len() as f64,
        })
        .collect();
    let mut bs: Vec<usize> = records.iter().map(|r| r.b).collect();
    bs.dedup();
    let monotone = bs
        .into_iter()
        .map(|b| {
            let f: Vec<f64> = records.iter().filter(|r| r.b == b).map(|r| r.fraction).collect();
            (b, f.windows(2).all(|w| w[1] >= w[0]))
        })
        .collect();
    Ok(TailReport { records, monotone })
}

/// Runs the fig1 sampling and reports tail fractions.
pub fn run_tail_check(config: &ExperimentConfig, beta: f64, threshold_base: f64) -> Result<TailReport> {
    tail_fractions(&run_fig1(config)?, beta, threshold_base)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossvalRecord {
    pub d: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Monte-Carlo mean of the phase-corrected fourth-moment sum.
    pub mean: f64,
    pub stderr: f64,
    pub analytic: f64,
    pub z: f64,
    /// Same comparison with blocks built from the printed closed-form table.
    pub analytic_printed_table: f64,
    pub z_printed_table: f64,
    /// The all-identity string alone: `‖ψ‖⁸` against `tr[Gⁿ]`.
    pub identity_mean: f64,
    pub identity_stderr: f64,
    pub identity_analytic: f64,
    pub identity_z: f64,
    pub passed: bool,
}

fn z_score(mean: f64, se: f64, target: f64) -> f64 {
    if se > 0.0 {
        (mean - target) / se
    } else if mean == target {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Monte-Carlo check of a single `(d, B, n)` point with unnormalized states.
pub fn crossval_point(
    d: usize,
    b: usize,
    n: usize,
    samples: usize,
    root_seed: u64,
) -> Result<CrossvalRecord> {
    if !(2..=CROSSVAL_MAX_N).contains(&n) {
        return domain(format!("cross-validation needs 2 ≤ n ≤ {CROSSVAL_MAX_N}, got {n}"));
    }
    if samples < 2 {
        return domain("cross-validation needs at least 2 samples");
    }
    let (du, bu) = (d as u64, b as u64);
    let analytic = analytic_moment_sum_variant(du, bu, n, WgVariant::GramInverse)?.value;
    let analytic_table = analytic_moment_sum_variant(du, bu, n, WgVariant::PrintedTable)?.value;
    let ident = vec![SiteClass::Identity; n];
    let identity_analytic = per_string_expectation_variant(du, bu, &ident, WgVariant::GramInverse)?;
    let seed = point_seed(root_seed, n, b) ^ (d as u64).rotate_left(32);
    let results: Vec<Result<(f64, f64)>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let st = sample_rmps(n, d, b, seed, s, false)?;
            Ok((phase_corrected_fourth_moment(&st.statevector, d)?, st.raw_norm.powi(8)))
        })
        .collect();
    let (ok, _) = gather(results)?;
    let stat: Vec<f64> = ok.iter().map(|p| p.0).collect();
    let norms: Vec<f64> = ok.iter().map(|p| p.1).collect();
    let (mean, stderr) = mean_stderr(&stat);
    let (identity_mean, identity_stderr) = mean_stderr(&norms);
    let z = z_score(mean, stderr, analytic);
    let identity_z = z_score(identity_mean, identity_stderr, identity_analytic);
    Ok(CrossvalRecord {
        d,
        b,
        n,
        samples,
        seed,
        mean,
        stderr,
        analytic,
        z,
        analytic_printed_table: analytic_table,
        z_printed_table: z_score(mean, stderr, analytic_table),
        identity_mean,
        identity_stderr,
        identity_analytic,
        identity_z,
        passed: z.abs() <= Z_LIMIT && identity_z.abs() <= Z_LIMIT,
    })
}

/// Cross-validation over every `(B, n)` in the config.
pub fn run_crossval(config: &ExperimentConfig) -> Result<Vec<CrossvalRecord>> {
    config.validate()?;
    if config.n_range.1 > CROSSVAL_MAX_N {
        return Err(MagicError::Config(format!("cross-validation supports n ≤ {CROSSVAL_MAX_N}")));
    }
    with_workers(config.worker_count, || {
        let mut out = Vec::new();
        for &b in &config.b_list {
            for n in config.ns() {
                out.push(crossval_point(config.d, b, n, config.samples_per_point, config.root_seed)?);
            }
        }
        Ok(out)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WgCheckRecord {
    pub q: u64,
    pub inverse_exact: bool,
    pub class_function: bool,
    pub symmetric: bool,
    /// Printed closed-form table equals the Gram inverse on every class.
    pub printed_table_agrees: bool,
    /// Printed numerators over `q²(q²−1)(q²−4)(q²−9)` agree on every class.
    pub alternate_denominator_agrees: bool,
}

impl From<&ConsistencyProbe> for WgCheckRecord {
    fn from(p: &ConsistencyProbe) -> Self {
        WgCheckRecord {
            q: p.q,
            inverse_exact: p.inverse_exact,
            class_function: p.class_function,
            symmetric: p.symmetric,
            printed_table_agrees: p.table_agrees(),
            alternate_denominator_agrees: p.classes.iter().all(|c| c.agrees_with_alternate_denominator),
        }
    }
}

/// Exact Weingarten checks for each `q` in `lo..=hi`.
pub fn run_wg_check(lo: u64, hi: u64) -> Result<Vec<WgCheckRecord>> {
    if lo > hi {
        return domain(format!("empty q range {lo}..{hi}"));
    }
    let probes: Vec<Result<ConsistencyProbe>> = (lo..=hi).into_par_iter().map(consistency_probe).collect();
    probes.into_iter().map(|p| p.map(|p| WgCheckRecord::from(&p))).collect()
}

/// CSV with a header row derived from the record's fields.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
