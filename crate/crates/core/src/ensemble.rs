//! Monte Carlo campaigns over independent trajectories.
//!
//! Trajectory `k` always draws its noise from stream `k` of the master seed,
//! and per-trajectory results are folded into the running means strictly in
//! index order, so a summary does not depend on the worker count or on the
//! order in which trajectories finish.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{control_signal, fidelity_x, Controller};
use crate::error::{Error, Result};
use crate::linalg4::{Cplx, Mat4};
use crate::metrics::{
    bures_to_bell, bures_to_bell_set, classify_limit, default_window, fit_sample_exponent, lyapunov_fb,
    lyapunov_fb_linear, lyapunov_qsr, Classification, ExponentFit, ScalarSeries, CLASSIFY_TOL,
};
use crate::model::{bell, operators, BellLabel, DensityMatrix, ModelParams, OperatorSet};
use crate::sde::{simulate, RngStream, SdeConfig};

const CHUNK: usize = 128;

/// Initial state of a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Bell(BellLabel),
    MaximallyMixed,
    /// `diag(0.2, 0.3, 0.1, 0.4)`.
    Fig1Diagonal,
    /// 16 row-major `(re, im)` entries.
    Matrix(Vec<(f64, f64)>),
}

impl InitialState {
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            InitialState::Bell(l) => Ok(bell(*l).projector),
            InitialState::MaximallyMixed => Ok(DensityMatrix::maximally_mixed()),
            InitialState::Fig1Diagonal => DensityMatrix::diag([0.2, 0.3, 0.1, 0.4]),
            InitialState::Matrix(entries) => {
                if entries.len() != 16 {
                    return Err(Error::DimensionMismatch {
                        expected: 16,
                        got: entries.len(),
                    });
                }
                DensityMatrix::new(Mat4::from_fn(|i, j| {
                    let (re, im) = entries[4 * i + j];
                    Cplx::new(re, im)
                }))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub n_traj: usize,
    pub model: ModelParams,
    pub controller: Controller,
    pub sde: SdeConfig,
    pub rho0: InitialState,
    /// Output directory; `None` keeps everything in memory.
    pub outputs: Option<PathBuf>,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub classify_tol: f64,
    /// Number of leading trajectories whose series are kept and written.
    pub save_trajectories: usize,
    /// Per-trajectory and ensemble fit window; defaults to `[0.2 T, 0.8 T]`.
    pub fit_window: Option<(f64, f64)>,
}

impl CampaignConfig {
    pub fn new(model: ModelParams, controller: Controller, sde: SdeConfig, rho0: InitialState, n_traj: usize) -> Self {
        CampaignConfig {
            n_traj,
            model,
            controller,
            sde,
            rho0,
            outputs: None,
            workers: 0,
            classify_tol: CLASSIFY_TOL,
            save_trajectories: 0,
            fit_window: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::InvalidParameter {
                key: "n_traj",
                reason: "must be at least 1".into(),
            });
        }
        self.model.validate()?;
        self.controller.validate()?;
        self.sde.validate()?;
        self.rho0.to_density()?;
        self.controller.check_compatible(&operators(&self.model))?;
        if !(self.classify_tol > 0.0) {
            return Err(Error::InvalidParameter {
                key: "classify_tol",
                reason: "must be positive".into(),
            });
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo < hi && lo >= 0.0 && hi <= self.sde.t_final) {
                return Err(Error::InvalidParameter {
                    key: "fit_window",
                    reason: "must satisfy 0 <= t_lo < t_hi <= t_final".into(),
                });
            }
        }
        Ok(())
    }

    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or_else(|| default_window(self.sde.t_final))
    }

    pub fn reference_kind(&self) -> ReferenceKind {
        match self.controller {
            Controller::Zero => ReferenceKind::Qsr,
            _ => ReferenceKind::Feedback,
        }
    }

    /// Logged time grid shared by every trajectory.
    pub fn time_grid(&self) -> Vec<f64> {
        let (n_full, rest) = self.sde.step_plan();
        let n_total = n_full + usize::from(rest.is_some());
        let mut t = vec![0.0];
        for n in 0..n_total {
            let last = n + 1 == n_total;
            if last {
                t.push(self.sde.t_final);
            } else if (n + 1) % self.sde.log_stride == 0 {
                t.push((n + 1) as f64 * self.sde.dt);
            }
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// `4√3 d_B(ρ₀, Ē) e^{−C̄t}`
    Qsr,
    /// `√2 d_B(ρ₀, ρ̄) e^{−C̄t}`
    Feedback,
}

pub fn reference_curve(
    rho0: &DensityMatrix,
    params: &ModelParams,
    kind: ReferenceKind,
    times: &[f64],
) -> Result<ScalarSeries> {
    let c_bar = params.c_bar();
    let amplitude = match kind {
        ReferenceKind::Qsr => 4.0 * 3f64.sqrt() * bures_to_bell_set(rho0.matrix()).0,
        ReferenceKind::Feedback => 2f64.sqrt() * bures_to_bell(rho0.matrix(), params.target),
    };
    ScalarSeries::new(
        times.to_vec(),
        times.iter().map(|t| amplitude * (-c_bar * t).exp()).collect(),
    )
}

/// Per-trajectory scalar series on the shared time grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectorySeries {
    pub index: usize,
    /// Distance to the target (feedback) or to the Bell set (`u ≡ 0`).
    pub distance: Vec<f64>,
    pub lyapunov: Vec<f64>,
    /// Fidelity to the model's target.
    pub fidelity: Vec<f64>,
    /// First control component.
    pub control: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOutcome {
    pub index: usize,
    pub failed: bool,
    pub error: Option<String>,
    pub final_distance: f64,
    pub final_class: Classification,
    /// Fitted slope of `log distance` over the campaign window.
    pub slope: Option<f64>,
    pub clipped_mass_per_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_traj: usize,
    pub mean_bures: ScalarSeries,
    pub mean_v: ScalarSeries,
    pub reference: ScalarSeries,
    /// Fraction of all trajectories classified to each Bell state.
    pub frequencies: BTreeMap<BellLabel, f64>,
    pub counts: BTreeMap<BellLabel, usize>,
    pub unconverged: usize,
    /// Fit of `log E[V]` over the campaign window.
    pub exponent: Option<ExponentFit>,
    /// Fit of `log E[d_B]` over the campaign window.
    pub exponent_bures: Option<ExponentFit>,
    /// `−C̄`.
    pub reference_exponent: f64,
    pub n_failed: usize,
    pub outcomes: Vec<TrajectoryOutcome>,
    #[serde(skip)]
    pub saved: Vec<TrajectorySeries>,
}

impl EnsembleSummary {
    pub fn frequency(&self, label: BellLabel) -> f64 {
        self.frequencies.get(&label).copied().unwrap_or(0.0)
    }

    /// Slopes of the trajectories that produced one.
    pub fn slopes(&self) -> Vec<f64> {
        self.outcomes.iter().filter_map(|o| o.slope).collect()
    }

    pub fn mean_slope(&self) -> Option<f64> {
        let s = self.slopes();
        (!s.is_empty()).then(|| s.iter().sum::<f64>() / s.len() as f64)
    }

    pub fn mean_clipped_mass_per_step(&self) -> f64 {
        let ok: Vec<_> = self.outcomes.iter().filter(|o| !o.failed).collect();
        if ok.is_empty() {
            return 0.0;
        }
        ok.iter().map(|o| o.clipped_mass_per_step).sum::<f64>() / ok.len() as f64
    }
}

struct Observables<'a> {
    ctl: &'a Controller,
    ops: &'a OperatorSet,
    target: BellLabel,
}

impl Observables<'_> {
    fn distance(&self, m: &Mat4) -> f64 {
        match self.ctl {
            Controller::Zero => bures_to_bell_set(m).0,
            _ => bures_to_bell(m, self.target),
        }
    }

    fn lyapunov(&self, m: &Mat4) -> f64 {
        match self.ctl {
            Controller::Zero => lyapunov_qsr(m),
            Controller::TwoChannel { .. } => lyapunov_fb(m, self.target),
            Controller::OneChannel { .. } => lyapunov_fb_linear(m, self.target),
        }
    }
}

struct TrajectoryResult {
    index: usize,
    series: TrajectorySeries,
    outcome: TrajectoryOutcome,
}

fn run_one(
    cfg: &CampaignConfig,
    rho0: &DensityMatrix,
    ops: &OperatorSet,
    times: &[f64],
    index: usize,
) -> TrajectoryResult {
    let obs = Observables {
        ctl: &cfg.controller,
        ops,
        target: cfg.model.target,
    };
    let mut series = TrajectorySeries {
        index,
        ..Default::default()
    };
    let mut last = *rho0;
    let mut stream = RngStream::new(cfg.sde.seed, index as u64);
    let res = simulate(
        rho0,
        &cfg.controller,
        ops,
        &cfg.model,
        &cfg.sde,
        &mut stream,
        |_| {},
        |_, rho| {
            let m = rho.matrix();
            series.distance.push(obs.distance(m));
            series.lyapunov.push(obs.lyapunov(m));
            series.fidelity.push(fidelity_x(m, obs.target));
            series.control.push(
                control_signal(m, obs.ctl, obs.ops)
                    .map(|u| u.first())
                    .unwrap_or(f64::NAN),
            );
            last = *rho;
        },
    );
    let outcome = match res {
        Ok(stats) => {
            let slope = ScalarSeries::new(times.to_vec(), series.distance.clone())
                .and_then(|s| fit_sample_exponent(&s, cfg.window()))
                .ok()
                .map(|f| f.slope);
            TrajectoryOutcome {
                index,
                failed: false,
                error: None,
                final_distance: *series.distance.last().unwrap_or(&f64::NAN),
                final_class: classify_limit(last.matrix(), cfg.classify_tol),
                slope,
                clipped_mass_per_step: stats.clipped_mass / stats.steps.max(1) as f64,
            }
        }
        Err(e) => TrajectoryOutcome {
            index,
            failed: true,
            error: Some(e.to_string()),
            final_distance: f64::NAN,
            final_class: Classification::Unconverged,
            slope: None,
            clipped_mass_per_step: f64::NAN,
        },
    };
    TrajectoryResult { index, series, outcome }
}

/// Running sums, folded in trajectory-index order.
struct Accumulator {
    sum_distance: Vec<f64>,
    sum_lyapunov: Vec<f64>,
    n_ok: usize,
    outcomes: Vec<TrajectoryOutcome>,
    saved: Vec<TrajectorySeries>,
    save_limit: usize,
}

impl Accumulator {
    fn new(n_times: usize, save_limit: usize) -> Self {
        Accumulator {
            sum_distance: vec![0.0; n_times],
            sum_lyapunov: vec![0.0; n_times],
            n_ok: 0,
            outcomes: Vec::new(),
            saved: Vec::new(),
            save_limit,
        }
    }

    fn absorb(&mut self, mut chunk: Vec<TrajectoryResult>) {
        chunk.sort_by_key(|r| r.index);
        for r in chunk {
            if !r.outcome.failed {
                for (acc, v) in self.sum_distance.iter_mut().zip(&r.series.distance) {
                    *acc += v;
                }
                for (acc, v) in self.sum_lyapunov.iter_mut().zip(&r.series.lyapunov) {
                    *acc += v;
                }
                self.n_ok += 1;
            }
            if r.index < self.save_limit {
                self.saved.push(r.series);
            }
            self.outcomes.push(r.outcome);
        }
    }
}

/// Runs `cfg.n_traj` independent trajectories and aggregates them.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let rho0 = cfg.rho0.to_density()?;
    let ops = operators(&cfg.model);
    let times = cfg.time_grid();

    let mut acc = Accumulator::new(times.len(), cfg.save_trajectories);
    let mut drive = || {
        let mut start = 0;
        while start < cfg.n_traj {
            let end = (start + CHUNK).min(cfg.n_traj);
            let chunk: Vec<TrajectoryResult> = (start..end)
                .into_par_iter()
                .map(|i| run_one(cfg, &rho0, &ops, &times, i))
                .collect();
            acc.absorb(chunk);
            start = end;
        }
    };
    if cfg.workers == 0 {
        drive();
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(drive);
    }
    summarize(cfg, &rho0, &times, acc)
}

fn summarize(cfg: &CampaignConfig, rho0: &DensityMatrix, times: &[f64], acc: Accumulator) -> Result<EnsembleSummary> {
    let n_failed = acc.outcomes.iter().filter(|o| o.failed).count();
    if n_failed * 100 > cfg.n_traj || acc.n_ok == 0 {
        return Err(Error::CampaignFailed {
            failed: n_failed,
            total: cfg.n_traj,
        });
    }
    let n = acc.n_ok as f64;
    let mean_bures = ScalarSeries::new(times.to_vec(), acc.sum_distance.iter().map(|s| s / n).collect())?;
    let mean_v = ScalarSeries::new(times.to_vec(), acc.sum_lyapunov.iter().map(|s| s / n).collect())?;
    let reference = reference_curve(rho0, &cfg.model, cfg.reference_kind(), times)?;

    let mut counts: BTreeMap<BellLabel, usize> = BellLabel::ALL.iter().map(|&l| (l, 0)).collect();
    let mut unconverged = 0;
    for o in &acc.outcomes {
        match o.final_class {
            Classification::Bell(l) => *counts.entry(l).or_default() += 1,
            Classification::Unconverged => unconverged += 1,
        }
    }
    let frequencies = counts
        .iter()
        .map(|(&l, &c)| (l, c as f64 / cfg.n_traj as f64))
        .collect();

    let window = cfg.window();
    Ok(EnsembleSummary {
        n_traj: cfg.n_traj,
        exponent: fit_sample_exponent(&mean_v, window).ok(),
        exponent_bures: fit_sample_exponent(&mean_bures, window).ok(),
        mean_bures,
        mean_v,
        reference,
        frequencies,
        counts,
        unconverged,
        reference_exponent: -cfg.model.c_bar(),
        n_failed,
        outcomes: acc.outcomes,
        saved: acc.saved,
    })
}

/// Formats with 12 significant digits.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub const SERIES_HEADER: &str = "t,mean_bures,mean_V,reference";
pub const TRAJECTORY_HEADER: &str = "t,d_B,V,X,u";

#[derive(Serialize)]
struct SummaryFile<'a> {
    config: &'a CampaignConfig,
    frequencies: &'a BTreeMap<BellLabel, f64>,
    counts: &'a BTreeMap<BellLabel, usize>,
    unconverged: usize,
    exponent: &'a Option<ExponentFit>,
    exponent_bures: &'a Option<ExponentFit>,
    reference_exponent: f64,
    mean_trajectory_slope: Option<f64>,
    mean_clipped_mass_per_step: f64,
    n_traj: usize,
    n_failed: usize,
}

/// Writes `summary.json`, `series.csv` and one `trajectory_NNNNN.csv` per
/// saved trajectory into `dir`.
pub fn write_outputs(summary: &EnsembleSummary, cfg: &CampaignConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = SummaryFile {
        config: cfg,
        frequencies: &summary.frequencies,
        counts: &summary.counts,
        unconverged: summary.unconverged,
        exponent: &summary.exponent,
        exponent_bures: &summary.exponent_bures,
        reference_exponent: summary.reference_exponent,
        mean_trajectory_slope: summary.mean_slope(),
        mean_clipped_mass_per_step: summary.mean_clipped_mass_per_step(),
        n_traj: summary.n_traj,
        n_failed: summary.n_failed,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&file)? + "\n")?;

    let mut csv = String::from(SERIES_HEADER);
    csv.push('\n');
    for i in 0..summary.mean_bures.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_sig12(summary.mean_bures.times[i]),
            fmt_sig12(summary.mean_bures.values[i]),
            fmt_sig12(summary.mean_v.values[i]),
            fmt_sig12(summary.reference.values[i])
        );
    }
    fs::write(dir.join("series.csv"), csv)?;

    for s in &summary.saved {
        let mut csv = String::from(TRAJECTORY_HEADER);
        csv.push('\n');
        for (i, t) in summary.mean_bures.times.iter().enumerate().take(s.distance.len()) {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_sig12(*t),
                fmt_sig12(s.distance[i]),
                fmt_sig12(s.lyapunov[i]),
                fmt_sig12(s.fidelity[i]),
                fmt_sig12(s.control[i])
            );
        }
        fs::write(dir.join(format!("trajectory_{:05}.csv", s.index)), csv)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn small_qsr(n: usize, t_final: f64) -> CampaignConfig {
        let sde = SdeConfig {
            t_final,
            ..Default::default()
        };
        CampaignConfig::new(
            ModelParams::two_channel_default(BellLabel::PsiPlus),
            Controller::Zero,
            sde,
            InitialState::Fig1Diagonal,
            n,
        )
    }

    #[test]
    fn equilibrium_campaign_stays_put() {
        let mut cfg = small_qsr(20, 1.0);
        cfg.rho0 = InitialState::Bell(BellLabel::PsiPlus);
        let s = run_campaign(&cfg).unwrap();
        assert_eq!(s.frequency(BellLabel::PsiPlus), 1.0);
        assert_eq!(s.counts[&BellLabel::PsiPlus], 20);
        assert!(s.mean_bures.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_trajectory_campaign_is_deterministic() {
        let cfg = small_qsr(1, 0.5);
        let a = run_campaign(&cfg).unwrap();
        let b = run_campaign(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn means_are_arithmetic_means_of_trajectories() {
        let mut cfg = small_qsr(10, 1.0);
        cfg.save_trajectories = 10;
        let s = run_campaign(&cfg).unwrap();
        assert_eq!(s.saved.len(), 10);
        for (i, m) in s.mean_bures.values.iter().enumerate() {
            let manual: f64 = s.saved.iter().map(|t| t.distance[i]).sum::<f64>() / 10.0;
            assert!((m - manual).abs() <= 1e-15);
            let manual_v: f64 = s.saved.iter().map(|t| t.lyapunov[i]).sum::<f64>() / 10.0;
            assert!((s.mean_v.values[i] - manual_v).abs() <= 1e-15);
        }
        let counted: usize = s.counts.values().sum::<usize>() + s.unconverged;
        assert_eq!(counted, 10);
        for (l, f) in &s.frequencies {
            let c = f * 10.0;
            assert_eq!(c, c.round());
            assert_eq!(c as usize, s.counts[l]);
        }
        assert!(s.frequencies.values().sum::<f64>() <= 1.0);
    }

    #[test]
    fn summary_is_independent_of_completion_order_and_workers() {
        let cfg = small_qsr(12, 0.5);
        let rho0 = cfg.rho0.to_density().unwrap();
        let ops = operators(&cfg.model);
        let times = cfg.time_grid();
        let results = || -> Vec<TrajectoryResult> { (0..12).map(|i| run_one(&cfg, &rho0, &ops, &times, i)).collect() };

        let mut ordered = Accumulator::new(times.len(), 0);
        ordered.absorb(results());
        let mut shuffled = Accumulator::new(times.len(), 0);
        let mut rs = results();
        rs.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        shuffled.absorb(rs);
        let a = summarize(&cfg, &rho0, &times, ordered).unwrap();
        let b = summarize(&cfg, &rho0, &times, shuffled).unwrap();
        assert_eq!(a, b);

        let mut threaded = cfg.clone();
        threaded.workers = 3;
        assert_eq!(run_campaign(&threaded).unwrap(), a);
    }

    #[test]
    fn reference_curve_examples() {
        let p = ModelParams::two_channel_default(BellLabel::PsiPlus);
        let rho0 = DensityMatrix::diag([0.2, 0.3, 0.1, 0.4]).unwrap();
        let d0 = bures_to_bell_set(rho0.matrix()).0;
        assert!((p.c_bar() - 0.3).abs() < 1e-15);
        let half = std::f64::consts::LN_2 / 0.3;
        assert!((half - 2.31).abs() < 0.01);
        let r = reference_curve(&rho0, &p, ReferenceKind::Qsr, &[0.0, half, 2.0 * half]).unwrap();
        assert!((r.values[0] - 4.0 * 3f64.sqrt() * d0).abs() < 1e-15);
        assert!((r.values[1] - r.values[0] / 2.0).abs() < 1e-12);
        assert!((r.values[2] - r.values[0] / 4.0).abs() < 1e-12);

        let orth = bell(BellLabel::PhiMinus).projector;
        let r = reference_curve(&orth, &p, ReferenceKind::Feedback, &[0.0]).unwrap();
        assert!((r.values[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn time_grid_matches_logged_samples() {
        let mut cfg = small_qsr(1, 0.5);
        cfg.save_trajectories = 1;
        let s = run_campaign(&cfg).unwrap();
        assert_eq!(cfg.time_grid().len(), 51);
        assert_eq!(s.saved[0].distance.len(), 51);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small_qsr(0, 1.0);
        assert!(cfg.validate().is_err());
        cfg.n_traj = 5;
        cfg.controller = Controller::one_channel_default(BellLabel::PsiPlus);
        assert!(matches!(cfg.validate(), Err(Error::ConfigMismatch(_))));
        let mut cfg = small_qsr(5, 1.0);
        // Unit trace but one negative eigenvalue.
        let mut entries = vec![(0.0, 0.0); 16];
        for (i, d) in [0.5, 0.5, 0.5, -0.5].into_iter().enumerate() {
            entries[5 * i] = (d, 0.0);
        }
        cfg.rho0 = InitialState::Matrix(entries);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn outputs_have_fixed_schema() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_qsr(3, 0.2);
        cfg.save_trajectories = 2;
        let s = run_campaign(&cfg).unwrap();
        write_outputs(&s, &cfg, dir.path()).unwrap();
        let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
        let mut lines = series.lines();
        assert_eq!(lines.next(), Some(SERIES_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 4);
        assert_eq!(row[0], "0.00000000000e0");
        assert_eq!(series.lines().count(), 1 + cfg.time_grid().len());
        let traj = fs::read_to_string(dir.path().join("trajectory_00001.csv")).unwrap();
        assert_eq!(traj.lines().next(), Some(TRAJECTORY_HEADER));
        assert!(!dir.path().join("trajectory_00002.csv").exists());
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(json["n_traj"], 3);
        assert!(json["frequencies"]["psi+"].is_number());
        assert_eq!(json["config"]["controller"]["kind"], "zero");
    }
}
