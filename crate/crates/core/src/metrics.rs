//! Scalar diagnostics: Bures distances, the Λ/Γ/Δ coordinates, Lyapunov
//! functions, a finite-difference infinitesimal generator, noise gains,
//! sample-exponent fits and hitting times.

use serde::{Deserialize, Serialize};

use crate::control::Controller;
use crate::error::{Error, Result};
use crate::linalg4::{psd_sqrt, Mat4, Vec4};
use crate::model::{bell, diffusion_gk, BellLabel, DensityMatrix, ModelParams, OperatorSet};
use crate::sde::sme_drift;

/// Default finite-difference step for [`generator_apply`] and [`noise_gain`].
pub const FD_STEP: f64 = 1e-5;
/// Default classification radius in Bures distance.
pub const CLASSIFY_TOL: f64 = 0.05;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalarSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScalarSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::MalformedSeries("times and values differ in length"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedSeries("times must be strictly increasing"));
        }
        Ok(ScalarSeries { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

/// Least-squares fit of `log(value) ≈ intercept + slope · t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub n_points: usize,
}

/// `√(2 − 2 Tr √(√ρ_b ρ_a √ρ_b))`.
pub fn bures_distance(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<f64> {
    let sb = psd_sqrt(rho_b.matrix())?;
    let inner = sb.matmul(rho_a.matrix()).matmul(&sb).hermitian_part();
    let root_fidelity = psd_sqrt(&inner)?.trace().re.clamp(0.0, 1.0);
    Ok((2.0 - 2.0 * root_fidelity).max(0.0).sqrt())
}

/// Closed form for a pure second argument `ξξ*`:
/// `√(2 − 2√F)` with `F = ⟨ξ|ρ|ξ⟩`, rewritten as `√(2(1 − F)/(1 + √F))`
/// to keep precision near `F = 1`.
pub fn bures_to_pure(rho: &Mat4, xi: &Vec4) -> f64 {
    let f = rho.quadratic_form(xi).re.clamp(0.0, 1.0);
    pure_distance_from_gap(1.0 - f, f)
}

fn pure_distance_from_gap(gap: f64, fidelity: f64) -> f64 {
    let gap = gap.max(0.0);
    (2.0 * gap / (1.0 + fidelity.clamp(0.0, 1.0).sqrt())).sqrt()
}

/// Fidelities `⟨β|ρ|β⟩` to the four Bell states, in [`BellLabel::ALL`] order.
pub fn bell_fidelities(rho: &Mat4) -> [f64; 4] {
    let a = 0.5 * (rho.re(0, 0) + rho.re(3, 3));
    let b = rho.re(0, 3);
    let c = 0.5 * (rho.re(1, 1) + rho.re(2, 2));
    let d = rho.re(1, 2);
    [a + b, a - b, c + d, c - d]
}

/// Bures distance to a Bell state. `1 − F` is accumulated from the other
/// three Bell fidelities, which is exact for unit-trace input and avoids
/// cancellation near the target.
pub fn bures_to_bell(rho: &Mat4, label: BellLabel) -> f64 {
    let f = bell_fidelities(rho);
    let i = label.index();
    let gap: f64 = (0..4).filter(|&j| j != i).map(|j| f[j].max(0.0)).sum();
    pure_distance_from_gap(gap, f[i])
}

/// `min_{β ∈ Ē} d_B(ρ, β)` and the minimizing Bell state.
pub fn bures_to_bell_set(rho: &Mat4) -> (f64, BellLabel) {
    BellLabel::ALL
        .iter()
        .map(|&l| (bures_to_bell(rho, l), l))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("four Bell states")
}

/// `min_{σ ∈ set} d_B(ρ, σ)` via the general formula.
pub fn bures_to_set(rho: &DensityMatrix, set: &[DensityMatrix]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidParameter {
            key: "set",
            reason: "must be non-empty".into(),
        });
    }
    let mut best = f64::INFINITY;
    for s in set {
        best = best.min(bures_distance(rho, s)?);
    }
    Ok(best)
}

/// The four Bell projectors.
pub fn bell_set() -> Vec<DensityMatrix> {
    BellLabel::ALL.iter().map(|&l| bell(l).projector).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coordinates {
    /// `ρ₁₁ + ρ₄₄`
    pub lambda1: f64,
    /// `ρ₂₂ + ρ₃₃`
    pub lambda2: f64,
    /// `2 Re ρ₂₃ + 2 Re ρ₁₄`
    pub gamma: f64,
    /// `Λ₁ Re ρ₂₃ − Λ₂ Re ρ₁₄`
    pub delta: f64,
}

pub fn coordinates(rho: &Mat4) -> Coordinates {
    let lambda1 = rho.re(0, 0) + rho.re(3, 3);
    let lambda2 = rho.re(1, 1) + rho.re(2, 2);
    Coordinates {
        lambda1,
        lambda2,
        gamma: 2.0 * rho.re(1, 2) + 2.0 * rho.re(0, 3),
        delta: lambda1 * rho.re(1, 2) - lambda2 * rho.re(0, 3),
    }
}

/// `V(ρ) = √(Λ₁Λ₂ + 1 − Γ²)`, zero exactly on the Bell states.
///
/// Accepts any Hermitian matrix so it can be probed off the state space by
/// finite differences.
pub fn lyapunov_qsr(rho: &Mat4) -> f64 {
    let c = coordinates(rho);
    (c.lambda1 * c.lambda2 + 1.0 - c.gamma * c.gamma).max(0.0).sqrt()
}

/// `V(ρ) = √(1 − X(ρ))`.
pub fn lyapunov_fb(rho: &Mat4, target: BellLabel) -> f64 {
    (1.0 - crate::control::fidelity_x(rho, target)).max(0.0).sqrt()
}

/// `V(ρ) = 1 − X(ρ)`, used for the one-channel design.
pub fn lyapunov_fb_linear(rho: &Mat4, target: BellLabel) -> f64 {
    1.0 - crate::control::fidelity_x(rho, target)
}

fn directional(v: &dyn Fn(&Mat4) -> f64, rho: &Mat4, dir: &Mat4, h: f64) -> (f64, f64) {
    let plus = v(&(*rho + dir.scale(h)));
    let minus = v(&(*rho - dir.scale(h)));
    let mid = v(rho);
    ((plus - minus) / (2.0 * h), (plus - 2.0 * mid + minus) / (h * h))
}

/// Finite-difference infinitesimal generator
/// `ℒV(ρ) = DV(ρ)[drift] + ½ Σ_k η_k D²V(ρ)[G_k, G_k]`
/// with central differences of step `h`.
pub fn generator_apply(
    v: &dyn Fn(&Mat4) -> f64,
    rho: &Mat4,
    ctl: &Controller,
    ops: &OperatorSet,
    params: &ModelParams,
    h: f64,
) -> Result<f64> {
    let drift = sme_drift(rho, ctl, ops)?;
    let (mut out, _) = directional(v, rho, &drift, h);
    for k in 0..ops.n_channels {
        let g = diffusion_gk(rho, &ops.l[k]);
        let (_, second) = directional(v, rho, &g, h);
        out += 0.5 * params.eta(k) * second;
    }
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// `g_j(ρ) = √η_j DV(ρ)[G_j(ρ)] / V(ρ)`; `channel` is zero-based.
pub fn noise_gain(
    v: &dyn Fn(&Mat4) -> f64,
    rho: &Mat4,
    ops: &OperatorSet,
    params: &ModelParams,
    channel: usize,
    h: f64,
) -> Result<f64> {
    if channel >= ops.n_channels {
        return Err(Error::DimensionMismatch {
            expected: ops.n_channels,
            got: channel + 1,
        });
    }
    let value = v(rho);
    if value <= 1e-12 {
        return Err(Error::DivisionByZero { value });
    }
    let g = diffusion_gk(rho, &ops.l[channel]);
    let (d, _) = directional(v, rho, &g, h);
    let out = params.eta(channel).sqrt() * d / value;
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// Default fit window `[0.2 T, 0.8 T]`.
pub fn default_window(t_final: f64) -> (f64, f64) {
    (0.2 * t_final, 0.8 * t_final)
}

/// Least-squares slope of `log(values)` against time over `window`
/// (inclusive).
pub fn fit_sample_exponent(series: &ScalarSeries, window: (f64, f64)) -> Result<ExponentFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::MalformedSeries("window must satisfy t_lo < t_hi"));
    }
    let slack = 1e-9 * hi.abs().max(1.0);
    let mut pts = Vec::new();
    for (t, y) in series.iter() {
        if t < lo - slack || t > hi + slack {
            continue;
        }
        if !(y > 0.0) {
            return Err(Error::NonPositiveValue { time: t, value: y });
        }
        pts.push((t, y.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::MalformedSeries("fewer than two points inside window"));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sty * sty / (stt * syy)).clamp(0.0, 1.0)
    };
    Ok(ExponentFit {
        slope,
        intercept,
        window,
        r_squared,
        n_points: pts.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Bell(BellLabel),
    Unconverged,
}

/// Nearest Bell state if it lies within `tol` in Bures distance.
pub fn classify_limit(rho: &Mat4, tol: f64) -> Classification {
    let (d, label) = bures_to_bell_set(rho);
    if d < tol {
        Classification::Bell(label)
    } else {
        Classification::Unconverged
    }
}

/// First sampled time with value strictly below `r`.
pub fn first_hit_time(series: &ScalarSeries, r: f64) -> Option<f64> {
    series.iter().find(|&(_, y)| y < r).map(|(t, _)| t)
}
