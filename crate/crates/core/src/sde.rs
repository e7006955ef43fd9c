//! Time integration of the stochastic master equation (Euler–Maruyama with
//! a physicality projection after every step) and of the deterministic
//! support equation (classical RK4 with piecewise-constant inputs).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{control_signal, Controller};
use crate::error::{Error, Result};
use crate::linalg4::{herm_eig, Mat4};
use crate::model::{
    diffusion_gk, drift_f0, drift_fk, l_x, l_z, support_fhat, BellLabel, DensityMatrix, ModelParams, OperatorSet,
};

/// Clipped eigenvalue mass beyond which a standalone projection is a failure.
pub const MAX_CLIPPED_MASS: f64 = 1e-3;
/// Per-step limit used by the integrator. A single Euler–Maruyama step from
/// a pure state with `|u| = 10` already overshoots by ~1.3e-3 at `dt = 1e-3`.
pub const STEP_MAX_CLIPPED_MASS: f64 = 1e-2;
/// Largest input asymmetry the projection accepts.
pub const PROJECTION_ASYMMETRY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EulerMaruyama,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Positivity margin: states whose LDL* pivots all exceed this skip the
    /// eigendecomposition in the projection.
    pub projection_tol: f64,
    pub seed: u64,
    /// Clipped eigenvalue mass per step beyond which the step fails.
    pub max_clipped_mass: f64,
    /// Each increment is the sum of this many draws of variance
    /// `dt / noise_substeps`, so `(dt, m)` and `(dt / m, 1)` follow the same
    /// Brownian path.
    pub noise_substeps: usize,
    /// Store every `log_stride`-th state (plus the first and last).
    pub log_stride: usize,
}

impl Default for SdeConfig {
    fn default() -> Self {
        SdeConfig {
            dt: 1e-3,
            t_final: 10.0,
            scheme: Scheme::EulerMaruyama,
            projection_tol: 1e-10,
            seed: 42,
            max_clipped_mass: STEP_MAX_CLIPPED_MASS,
            noise_substeps: 1,
            log_stride: 10,
        }
    }
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key, reason: &str| {
            Err(Error::InvalidParameter {
                key,
                reason: reason.to_string(),
            })
        };
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return bad("dt", "must lie in (0, 1e-2]");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("t_final", "must be positive");
        }
        if !(1e-12..=1e-6).contains(&self.projection_tol) {
            return bad("projection_tol", "must lie in [1e-12, 1e-6]");
        }
        if !(self.max_clipped_mass > 0.0 && self.max_clipped_mass < 0.5) {
            return bad("max_clipped_mass", "must lie in (0, 0.5)");
        }
        if self.noise_substeps == 0 {
            return bad("noise_substeps", "must be at least 1");
        }
        if self.log_stride == 0 {
            return bad("log_stride", "must be at least 1");
        }
        Ok(())
    }

    /// Step sizes: `floor(t_final / dt)` full steps and, if needed, one
    /// shorter final step.
    pub fn step_plan(&self) -> (usize, Option<f64>) {
        step_plan(self.dt, self.t_final)
    }
}

fn step_plan(dt: f64, t_final: f64) -> (usize, Option<f64>) {
    let n = (t_final / dt + 1e-9).floor() as usize;
    let rest = t_final - n as f64 * dt;
    if rest > 1e-9 * dt {
        (n, Some(rest))
    } else {
        (n, None)
    }
}

/// Counter-based Wiener increments.
///
/// Trajectory `k` under master seed `s` reads ChaCha8 stream `k` of key
/// `s`. Every step consumes exactly four 32-bit words (one Box–Muller
/// pair), so the normal draw for `(step, channel)` lives at a fixed word
/// offset regardless of how many channels are active or which thread runs
/// the trajectory.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
    step: u64,
}

const WORDS_PER_STEP: u128 = 4;

impl RngStream {
    pub fn new(master_seed: u64, trajectory: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trajectory);
        RngStream { rng, step: 0 }
    }

    pub fn seek(&mut self, step: u64) {
        self.rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        self.step = step;
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Two independent standard normals for the current step; advances.
    pub fn next_normals(&mut self) -> [f64; 2] {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        self.step += 1;
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        [r * c, r * s]
    }

    /// Increments `dW_k ~ N(0, dt)` for the current step; advances.
    pub fn next_increments(&mut self, dt: f64) -> [f64; 2] {
        let sd = dt.sqrt();
        self.next_normals().map(|z| z * sd)
    }

    /// Sum of `substeps` consecutive increments over `dt / substeps`.
    pub fn next_increments_refined(&mut self, dt: f64, substeps: usize) -> [f64; 2] {
        if substeps == 1 {
            return self.next_increments(dt);
        }
        let h = dt / substeps as f64;
        let mut acc = [0.0; 2];
        for _ in 0..substeps {
            let d = self.next_increments(h);
            acc[0] += d[0];
            acc[1] += d[1];
        }
        acc
    }
}

/// Result of [`project_to_physical`].
#[derive(Clone, Copy, Debug)]
pub struct Projection {
    pub state: DensityMatrix,
    /// Sum of the magnitudes of the clipped negative eigenvalues.
    pub clipped_mass: f64,
}

/// Maps a nearly-Hermitian matrix back onto the set of density matrices:
/// Hermitize, clip negative eigenvalues to zero, renormalize the trace.
pub fn project_to_physical(m: &Mat4, tol: f64) -> Result<Projection> {
    project_to_physical_with_limit(m, tol, MAX_CLIPPED_MASS)
}

/// As [`project_to_physical`] with an explicit clipped-mass limit.
pub fn project_to_physical_with_limit(m: &Mat4, tol: f64, max_clipped_mass: f64) -> Result<Projection> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let asym = m.asymmetry();
    if asym > PROJECTION_ASYMMETRY_TOL {
        return Err(Error::NonHermitianInput { asymmetry: asym });
    }
    let h = m.hermitian_part();
    let trace = h.trace().re;
    if trace < 0.5 {
        return Err(Error::ProjectionFailure {
            clipped_mass: 0.0,
            trace,
        });
    }
    if h.min_ldl_pivot(tol) > tol {
        return Ok(Projection {
            state: DensityMatrix::new_unchecked(h.scale(1.0 / trace)),
            clipped_mass: 0.0,
        });
    }
    let eig = herm_eig(&h)?;
    let clipped_mass: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    if clipped_mass > max_clipped_mass {
        return Err(Error::ProjectionFailure { clipped_mass, trace });
    }
    let kept: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let out = eig.reconstruct_with(|l| l.max(0.0) / kept).hermitian_part();
    Ok(Projection {
        state: DensityMatrix::new_unchecked(out),
        clipped_mass,
    })
}

/// Total SME drift `F₀(ρ) + Σ_k F_k(ρ)` with the feedback evaluated at `rho`.
pub fn sme_drift(rho: &Mat4, ctl: &Controller, ops: &OperatorSet) -> Result<Mat4> {
    let u = control_signal(rho, ctl, ops)?;
    let mut drift = drift_f0(rho, u.as_slice(), ops)?;
    for lk in &ops.l[..ops.n_channels] {
        drift += drift_fk(rho, lk);
    }
    Ok(drift)
}

/// Unprojected Euler–Maruyama update
/// `ρ + [F₀ + Σ F_k] dt + Σ √η_k G_k dW_k`.
pub fn em_update(
    rho: &Mat4,
    ctl: &Controller,
    ops: &OperatorSet,
    params: &ModelParams,
    dt: f64,
    dw: &[f64],
) -> Result<Mat4> {
    if dw.len() != ops.n_channels {
        return Err(Error::DimensionMismatch {
            expected: ops.n_channels,
            got: dw.len(),
        });
    }
    let drift = sme_drift(rho, ctl, ops)?;
    let mut next = *rho;
    next.axpy(dt, &drift);
    for (k, (lk, w)) in ops.l.iter().zip(dw).enumerate() {
        if *w != 0.0 {
            next.axpy(params.eta(k).sqrt() * w, &diffusion_gk(rho, lk));
        }
    }
    if !next.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(next)
}

/// One projected Euler–Maruyama step of size `dt`; only the projection
/// settings of `cfg` are used.
pub fn em_step(
    rho: &DensityMatrix,
    ctl: &Controller,
    ops: &OperatorSet,
    params: &ModelParams,
    dt: f64,
    dw: &[f64],
    cfg: &SdeConfig,
) -> Result<Projection> {
    let raw = em_update(rho.matrix(), ctl, ops, params, dt, dw)?;
    project_to_physical_with_limit(&raw, cfg.projection_tol, cfg.max_clipped_mass)
}

#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// `noise_path[k][n]` is the increment of channel `k` at step `n`.
    pub noise_path: Vec<Vec<f64>>,
    /// Sum of clipped eigenvalue mass over all steps.
    pub clipped_mass: f64,
    pub steps: usize,
}

/// Per-run statistics of [`simulate`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub clipped_mass: f64,
}

/// Integrates one SME trajectory, calling `on_sample(t, ρ_t)` at `t = 0`,
/// every `cfg.log_stride` steps, and at `t_final`. Increments are read
/// from `stream` in step order.
pub fn simulate(
    rho0: &DensityMatrix,
    ctl: &Controller,
    ops: &OperatorSet,
    params: &ModelParams,
    cfg: &SdeConfig,
    stream: &mut RngStream,
    mut on_step: impl FnMut(&[f64]),
    mut on_sample: impl FnMut(f64, &DensityMatrix),
) -> Result<RunStats> {
    ctl.check_compatible(ops)?;
    let (n_full, rest) = cfg.step_plan();
    let n_total = n_full + usize::from(rest.is_some());
    let nc = ops.n_channels;
    let mut rho = *rho0;
    let mut stats = RunStats::default();
    on_sample(0.0, &rho);
    for n in 0..n_total {
        let h = if n < n_full { cfg.dt } else { rest.unwrap_or(cfg.dt) };
        let dw = stream.next_increments_refined(h, cfg.noise_substeps);
        on_step(&dw[..nc]);
        let proj = em_step(&rho, ctl, ops, params, h, &dw[..nc], cfg).map_err(|e| Error::StepFailed {
            time: n as f64 * cfg.dt,
            source: Box::new(e),
        })?;
        rho = proj.state;
        stats.steps += 1;
        stats.clipped_mass += proj.clipped_mass;
        let last = n + 1 == n_total;
        if last || (n + 1) % cfg.log_stride == 0 {
            let t = if last { cfg.t_final } else { (n + 1) as f64 * cfg.dt };
            on_sample(t, &rho);
        }
    }
    Ok(stats)
}

/// Integrates one trajectory and keeps the logged states and the full
/// noise path.
pub fn integrate_trajectory(
    rho0: &DensityMatrix,
    ctl: &Controller,
    ops: &OperatorSet,
    params: &ModelParams,
    cfg: &SdeConfig,
    mut stream: RngStream,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let mut rec = TrajectoryRecord {
        noise_path: vec![Vec::new(); ops.n_channels],
        ..Default::default()
    };
    let noise = &mut rec.noise_path;
    let (times, states) = (&mut rec.times, &mut rec.states);
    let stats = simulate(
        rho0,
        ctl,
        ops,
        params,
        cfg,
        &mut stream,
        |dw| {
            for (k, w) in dw.iter().enumerate() {
                noise[k].push(*w);
            }
        },
        |t, rho| {
            times.push(t);
            states.push(*rho);
        },
    )?;
    rec.clipped_mass = stats.clipped_mass;
    rec.steps = stats.steps;
    Ok(rec)
}

/// Per-channel input `v(t)` of the support equation. Implementations are
/// sampled once at the start of each step and held for its duration, so
/// every input is piecewise constant on the step grid.
pub trait SupportInput {
    fn value(&mut self, t: f64, rho: &DensityMatrix) -> [f64; 2];
}

/// `v ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoInput;

impl SupportInput for NoInput {
    fn value(&mut self, _t: f64, _rho: &DensityMatrix) -> [f64; 2] {
        [0.0; 2]
    }
}

/// Explicit piecewise-constant input: `values[i]` on `[breaks[i], breaks[i+1])`.
#[derive(Clone, Debug)]
pub struct PiecewiseConstant {
    pub breaks: Vec<f64>,
    pub values: Vec<[f64; 2]>,
}

impl SupportInput for PiecewiseConstant {
    fn value(&mut self, t: f64, _rho: &DensityMatrix) -> [f64; 2] {
        let idx = self.breaks.partition_point(|&b| b <= t).saturating_sub(1);
        self.values.get(idx).copied().unwrap_or([0.0; 2])
    }
}

/// Steering input `v_j = K P_j(ρ) / X(ρ)` with `P₁ = λ̄_z − Tr(L_z ρ)`,
/// `P₂ = λ̄_x − Tr(L_x ρ)`, clipped to `±cap`.
#[derive(Clone, Copy, Debug)]
pub struct SteeringInput {
    pub target: BellLabel,
    pub gain: f64,
    pub cap: f64,
}

impl SteeringInput {
    pub fn new(target: BellLabel, gain: f64) -> Self {
        SteeringInput { target, gain, cap: 1e3 }
    }
}

impl SupportInput for SteeringInput {
    fn value(&mut self, _t: f64, rho: &DensityMatrix) -> [f64; 2] {
        let m = rho.matrix();
        let x = crate::control::fidelity_x(m, self.target);
        let p1 = self.target.lambda_z() - l_z().trace_product(m).re;
        let p2 = self.target.lambda_x() - l_x().trace_product(m).re;
        let cap = self.cap;
        [p1, p2].map(|p| {
            let v = if x > 0.0 { self.gain * p / x } else { cap * p.signum() };
            v.clamp(-cap, cap)
        })
    }
}

/// Vector field of the support equation,
/// `F₀(ρ) + Σ_j F̂_j(ρ) + Σ_j √η_j G_j(ρ) v_j`.
pub fn support_field(
    rho: &Mat4,
    v: &[f64; 2],
    ctl: &Controller,
    ops: &OperatorSet,
    params: &ModelParams,
) -> Result<Mat4> {
    let u = control_signal(rho, ctl, ops)?;
    let mut out = drift_f0(rho, u.as_slice(), ops)?;
    for k in 0..ops.n_channels {
        out += support_fhat(rho, k, ops, params)?;
        out.axpy(params.eta(k).sqrt() * v[k], &diffusion_gk(rho, &ops.l[k]));
    }
    Ok(out)
}

/// RK4 integration of the support equation with a projection after each
/// step. Logs every `log_stride` steps plus the final state.
#[allow(clippy::too_many_arguments)]
pub fn integrate_support_ode(
    rho0: &DensityMatrix,
    input: &mut dyn SupportInput,
    ctl: &Controller,
    ops: &OperatorSet,
    params: &ModelParams,
    dt: f64,
    t_final: f64,
    log_stride: usize,
) -> Result<TrajectoryRecord> {
    ctl.check_compatible(ops)?;
    if !(dt > 0.0 && t_final > 0.0 && log_stride > 0) {
        return Err(Error::InvalidParameter {
            key: "dt",
            reason: "dt, t_final and log_stride must be positive".into(),
        });
    }
    let (n_full, rest) = step_plan(dt, t_final);
    let n_total = n_full + usize::from(rest.is_some());
    let mut rec = TrajectoryRecord::default();
    let mut rho = *rho0;
    rec.times.push(0.0);
    rec.states.push(rho);
    for n in 0..n_total {
        let h = if n < n_full { dt } else { rest.unwrap_or(dt) };
        let t = n as f64 * dt;
        let v = input.value(t, &rho);
        let step = || -> Result<Projection> {
            let f = |m: &Mat4| support_field(m, &v, ctl, ops, params);
            let y = rho.matrix();
            let k1 = f(y)?;
            let k2 = f(&(*y + k1.scale(0.5 * h)))?;
            let k3 = f(&(*y + k2.scale(0.5 * h)))?;
            let k4 = f(&(*y + k3.scale(h)))?;
            let mut next = *y;
            next.axpy(h / 6.0, &k1);
            next.axpy(h / 3.0, &k2);
            next.axpy(h / 3.0, &k3);
            next.axpy(h / 6.0, &k4);
            if !next.is_finite() {
                return Err(Error::NonFinite);
            }
            project_to_physical(&next, 1e-10)
        };
        let proj = step().map_err(|e| Error::StepFailed {
            time: t,
            source: Box::new(e),
        })?;
        rho = proj.state;
        rec.clipped_mass += proj.clipped_mass;
        rec.steps += 1;
        let last = n + 1 == n_total;
        if last || (n + 1) % log_stride == 0 {
            rec.times.push(if last { t_final } else { (n + 1) as f64 * dt });
            rec.states.push(rho);
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bell, operators};
    use crate::sampling::random_density;

    fn fig1() -> (ModelParams, OperatorSet) {
        let p = ModelParams::two_channel_default(BellLabel::PsiPlus);
        (p, operators(&p))
    }

    #[test]
    fn equilibrium_is_fixed_by_em_step() {
        let (p, ops) = fig1();
        let target = bell(BellLabel::PsiPlus).projector;
        let next = em_step(
            &target,
            &Controller::Zero,
            &ops,
            &p,
            1e-3,
            &[0.0, 0.0],
            &SdeConfig::default(),
        )
        .unwrap();
        assert!((*next.state.matrix() - *target.matrix()).max_abs() <= 1e-14);
        let ctl = Controller::two_channel_default(BellLabel::PsiPlus);
        let next = em_step(&target, &ctl, &ops, &p, 1e-3, &[0.3, -0.2], &SdeConfig::default()).unwrap();
        assert!((*next.state.matrix() - *target.matrix()).max_abs() <= 1e-14);
    }

    #[test]
    fn zero_step_is_identity() {
        let (p, ops) = fig1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(&mut rng);
        let ctl = Controller::two_channel_default(BellLabel::PsiPlus);
        let next = em_step(&rho, &ctl, &ops, &p, 0.0, &[0.0, 0.0], &SdeConfig::default()).unwrap();
        assert!((*next.state.matrix() - *rho.matrix()).max_abs() <= 1e-14);
    }

    #[test]
    fn raw_update_preserves_trace() {
        let (p, ops) = fig1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let ctl = Controller::two_channel_default(BellLabel::PsiPlus);
        let mut stream = RngStream::new(0, 0);
        for _ in 0..1000 {
            let rho = random_density(&mut rng);
            let dw = stream.next_increments(1e-3);
            let raw = em_update(rho.matrix(), &ctl, &ops, &p, 1e-3, &dw).unwrap();
            assert!((raw.trace().re - 1.0).abs() <= 1e-12);
            assert!(raw.asymmetry() <= 1e-14);
        }
        assert!(matches!(
            em_update(&Mat4::identity(), &ctl, &ops, &p, 1e-3, &[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let rho = random_density(&mut rng);
            let p = project_to_physical(rho.matrix(), 1e-10).unwrap();
            assert!((*p.state.matrix() - *rho.matrix()).max_abs() <= 1e-14);
            assert_eq!(p.clipped_mass, 0.0);
        }
        for label in BellLabel::ALL {
            let b = bell(label).projector;
            let p = project_to_physical(b.matrix(), 1e-10).unwrap();
            assert!((*p.state.matrix() - *b.matrix()).max_abs() <= 1e-14);
        }

        // Clip -0.1, renormalize by 1.1.
        let m = Mat4::diag_real([0.5, 0.6, -0.1, 0.0]);
        let p = project_to_physical_with_limit(&m, 1e-10, 0.2).unwrap();
        let want = Mat4::diag_real([5.0 / 11.0, 6.0 / 11.0, 0.0, 0.0]);
        assert!((*p.state.matrix() - want).max_abs() <= 1e-14);
        assert!((p.clipped_mass - 0.1).abs() < 1e-15);
        // The same input exceeds the default clipping budget.
        assert!(matches!(
            project_to_physical(&m, 1e-10),
            Err(Error::ProjectionFailure { .. })
        ));

        let mut skew = Mat4::diag_real([0.25; 4]);
        skew.0[0][1] = crate::linalg4::Cplx::new(1e-3, 0.0);
        assert!(matches!(
            project_to_physical(&skew, 1e-10),
            Err(Error::NonHermitianInput { .. })
        ));
        assert!(matches!(
            project_to_physical(&Mat4::diag_real([0.1; 4]), 1e-10),
            Err(Error::ProjectionFailure { .. })
        ));
    }

    #[test]
    fn stream_is_counter_addressable() {
        let mut seq = RngStream::new(7, 3);
        let draws: Vec<[f64; 2]> = (0..50).map(|_| seq.next_normals()).collect();
        for step in [0u64, 17, 49, 5] {
            let mut s = RngStream::new(7, 3);
            s.seek(step);
            assert_eq!(s.next_normals(), draws[step as usize]);
        }
        let mut other = RngStream::new(7, 4);
        assert_ne!(other.next_normals(), draws[0]);
    }

    #[test]
    fn refined_increments_share_the_fine_path() {
        let mut fine = RngStream::new(9, 2);
        let mut coarse = RngStream::new(9, 2);
        for _ in 0..100 {
            let a = fine.next_increments(5e-4);
            let b = fine.next_increments(5e-4);
            let c = coarse.next_increments_refined(1e-3, 2);
            for k in 0..2 {
                assert!((a[k] + b[k] - c[k]).abs() < 1e-15);
            }
        }
        assert_eq!(fine.step(), coarse.step());
    }

    #[test]
    fn increments_have_variance_dt() {
        let mut s = RngStream::new(1, 0);
        let n = 200_000;
        let dt = 1e-3;
        let (mut m, mut v, mut c) = ([0.0; 2], [0.0; 2], 0.0);
        for _ in 0..n {
            let w = s.next_increments(dt);
            for k in 0..2 {
                m[k] += w[k];
                v[k] += w[k] * w[k];
            }
            c += w[0] * w[1];
        }
        for k in 0..2 {
            assert!((m[k] / n as f64).abs() < 4.0 * (dt / n as f64).sqrt());
            assert!((v[k] / n as f64 / dt - 1.0).abs() < 0.02);
        }
        assert!((c / n as f64 / dt).abs() < 0.02);
    }

    #[test]
    fn equilibrium_trajectory_is_constant() {
        let (p, ops) = fig1();
        let target = bell(BellLabel::PsiPlus).projector;
        let cfg = SdeConfig {
            t_final: 1.0,
            ..Default::default()
        };
        let rec = integrate_trajectory(&target, &Controller::Zero, &ops, &p, &cfg, RngStream::new(1, 0)).unwrap();
        assert_eq!(rec.times.len(), 101);
        assert_eq!(rec.noise_path.len(), 2);
        assert_eq!(rec.noise_path[0].len(), 1000);
        for s in &rec.states {
            assert!((*s.matrix() - *target.matrix()).max_abs() <= 1e-14);
        }
    }

    #[test]
    fn trajectories_are_reproducible() {
        let (p, ops) = fig1();
        let rho0 = DensityMatrix::diag([0.2, 0.3, 0.1, 0.4]).unwrap();
        let cfg = SdeConfig {
            t_final: 0.5,
            ..Default::default()
        };
        let a = integrate_trajectory(&rho0, &Controller::Zero, &ops, &p, &cfg, RngStream::new(9, 2)).unwrap();
        let b = integrate_trajectory(&rho0, &Controller::Zero, &ops, &p, &cfg, RngStream::new(9, 2)).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.noise_path, b.noise_path);
        let c = integrate_trajectory(&rho0, &Controller::Zero, &ops, &p, &cfg, RngStream::new(9, 3)).unwrap();
        assert_ne!(a.states.last(), c.states.last());
    }

    #[test]
    fn uneven_horizon_gets_a_short_final_step() {
        let (p, ops) = fig1();
        let rho0 = DensityMatrix::maximally_mixed();
        let cfg = SdeConfig {
            dt: 1e-2,
            t_final: 0.105,
            log_stride: 5,
            ..Default::default()
        };
        let rec = integrate_trajectory(&rho0, &Controller::Zero, &ops, &p, &cfg, RngStream::new(1, 0)).unwrap();
        assert_eq!(rec.steps, 11);
        assert_eq!(*rec.times.last().unwrap(), 0.105);
        assert!(rec.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_validation() {
        assert!(SdeConfig::default().validate().is_ok());
        for cfg in [
            SdeConfig {
                dt: -1.0,
                ..Default::default()
            },
            SdeConfig {
                dt: 0.1,
                ..Default::default()
            },
            SdeConfig {
                t_final: 0.0,
                ..Default::default()
            },
            SdeConfig {
                projection_tol: 1e-3,
                ..Default::default()
            },
            SdeConfig {
                log_stride: 0,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn support_ode_keeps_equilibrium_and_trace() {
        let (p, ops) = fig1();
        let target = bell(BellLabel::PsiPlus).projector;
        let rec = integrate_support_ode(&target, &mut NoInput, &Controller::Zero, &ops, &p, 1e-2, 2.0, 10).unwrap();
        for s in &rec.states {
            assert!((*s.matrix() - *target.matrix()).max_abs() <= 1e-13);
        }

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho0 = random_density(&mut rng);
        let mut input = PiecewiseConstant {
            breaks: vec![0.0, 0.5, 1.0],
            values: vec![[1.0, -2.0], [0.0, 3.0], [-1.0, 0.5]],
        };
        let ctl = Controller::two_channel_default(BellLabel::PsiPlus);
        for k in 0..200 {
            let m = *rho0.matrix();
            let f = support_field(&m, &[k as f64 * 0.1, -1.0], &ctl, &ops, &p).unwrap();
            assert!(f.trace().norm() < 1e-13);
        }
        let rec = integrate_support_ode(&rho0, &mut input, &ctl, &ops, &p, 1e-3, 1.5, 100).unwrap();
        for s in &rec.states {
            let raw_trace = s.matrix().trace().re;
            assert!((raw_trace - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn piecewise_input_lookup() {
        let mut input = PiecewiseConstant {
            breaks: vec![0.0, 1.0],
            values: vec![[1.0, 1.0], [2.0, 2.0]],
        };
        let rho = DensityMatrix::maximally_mixed();
        assert_eq!(input.value(0.5, &rho), [1.0, 1.0]);
        assert_eq!(input.value(1.0, &rho), [2.0, 2.0]);
        assert_eq!(input.value(7.0, &rho), [2.0, 2.0]);
    }

    #[test]
    fn steering_input_is_capped() {
        let mut v = SteeringInput::new(BellLabel::PsiPlus, 5.0);
        let orth = bell(BellLabel::PhiMinus).projector;
        let out = v.value(0.0, &orth);
        assert!(out.iter().all(|x| x.abs() <= 1e3));
        let mixed = DensityMatrix::maximally_mixed();
        // P₁ = P₂ = 1, X = 1/4.
        let out = v.value(0.0, &mixed);
        assert!(out.iter().all(|x| (x - 20.0).abs() < 1e-12));
    }
}
