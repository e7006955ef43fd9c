//! Pointwise sampling suites for the Lyapunov inequalities, the sandwich
//! bounds, the feedback condition and the martingale structure of Λ₂ and Γ.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::control::{fidelity_x, theta_u, Controller};
use crate::error::{Error, Result};
use crate::linalg4::Mat4;
use crate::metrics::{
    bures_to_bell, bures_to_bell_set, coordinates, generator_apply, lyapunov_fb, lyapunov_qsr, FD_STEP,
};
use crate::model::{bell, diffusion_gk, operators, BellLabel, ModelParams};
use crate::sampling::{mix, random_density};
use crate::sde::sme_drift;

/// `ℒV + C̄V` may exceed zero by at most this much (finite-difference error).
pub const QSR_LYAPUNOV_TOL: f64 = 1e-3;
pub const SANDWICH_C1: f64 = 0.408_248_290_463_863; // 1/√6
pub const SANDWICH_C2: f64 = 2.828_427_124_746_19; // 2√2
pub const SANDWICH_TOL: f64 = 1e-9;
pub const DRIFT_TOL: f64 = 1e-12;
pub const DIFFUSION_TOL: f64 = 1e-10;
/// `|Θ/d²|` at `s = 1e-4` relative to `s = 1e-1`.
pub const COND_U2_FACTOR: f64 = 1e-2;
pub const COND_U2_DIRECTIONS: usize = 100;
/// Slack on `ℒV/V ≤ −C̄/2` near the target.
pub const LOCAL_RATE_SLACK: f64 = 0.05;
pub const LOCAL_RADIUS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    QsrLyapunov,
    BuresSandwich,
    FeedbackTheta,
    MartingaleDrift,
    FeedbackRate,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::QsrLyapunov,
        Suite::BuresSandwich,
        Suite::FeedbackTheta,
        Suite::MartingaleDrift,
        Suite::FeedbackRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::QsrLyapunov => "qsr-lyapunov",
            Suite::BuresSandwich => "bures-sandwich",
            Suite::FeedbackTheta => "feedback-theta",
            Suite::MartingaleDrift => "martingale-drift",
            Suite::FeedbackRate => "feedback-rate",
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Suite::QsrLyapunov | Suite::MartingaleDrift | Suite::FeedbackRate => 10_000,
            Suite::BuresSandwich | Suite::FeedbackTheta => 100_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                key: "suite",
                reason: format!("unknown suite `{s}`"),
            })
    }
}

/// One named statistic and the bound it is held to (if any).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub name: &'static str,
    pub value: f64,
    pub bound: Option<f64>,
}

impl Measurement {
    fn bounded(name: &'static str, value: f64, bound: f64) -> Self {
        Measurement {
            name,
            value,
            bound: Some(bound),
        }
    }

    fn info(name: &'static str, value: f64) -> Self {
        Measurement {
            name,
            value,
            bound: None,
        }
    }

    /// `value − bound`; non-positive means the bound holds.
    pub fn margin(&self) -> Option<f64> {
        self.bound.map(|b| self.value - b)
    }

    pub fn holds(&self) -> bool {
        self.margin().is_none_or(|m| m <= 0.0) && self.value.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub suite: Suite,
    pub samples: usize,
    pub seed: u64,
    pub measurements: Vec<Measurement>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.measurements.iter().all(Measurement::holds)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] samples={} seed={}",
            self.suite,
            if self.passed() { "ok" } else { "VIOLATED" },
            self.samples,
            self.seed
        )?;
        for m in &self.measurements {
            match m.bound {
                Some(b) => write!(
                    f,
                    "; {}={:.6e} (bound {:.1e}, margin {:.3e})",
                    m.name,
                    m.value,
                    b,
                    m.value - b
                )?,
                None => write!(f, "; {}={:.6e}", m.name, m.value)?,
            }
        }
        Ok(())
    }
}

pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<CheckReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            key: "samples",
            reason: "must be at least 1".into(),
        });
    }
    let measurements = match suite {
        Suite::QsrLyapunov => qsr_lyapunov(samples, seed)?,
        Suite::BuresSandwich => bures_sandwich(samples, seed),
        Suite::FeedbackTheta => feedback_theta(samples, seed)?,
        Suite::MartingaleDrift => martingale_drift(samples, seed)?,
        Suite::FeedbackRate => feedback_rate(samples, seed)?,
    };
    Ok(CheckReport {
        suite,
        samples,
        seed,
        measurements,
    })
}

/// `fig1_qsr` model parameters.
fn qsr_model() -> ModelParams {
    ModelParams::two_channel_default(BellLabel::PsiPlus)
}

/// `max (ℒV + C̄V)` over random interior states with `u ≡ 0`.
pub fn qsr_lyapunov(samples: usize, seed: u64) -> Result<Vec<Measurement>> {
    let p = qsr_model();
    let ops = operators(&p);
    let c_bar = p.c_bar();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let rho = random_density(&mut rng);
        let m = rho.matrix();
        let lv = generator_apply(&lyapunov_qsr, m, &Controller::Zero, &ops, &p, FD_STEP)?;
        worst = worst.max(lv + c_bar * lyapunov_qsr(m));
    }
    Ok(vec![Measurement::bounded("max_LV_plus_CV", worst, QSR_LYAPUNOV_TOL)])
}

/// `C₁ d_B(ρ, Ē) ≤ V(ρ) ≤ C₂ d_B(ρ, Ē)`.
pub fn bures_sandwich(samples: usize, seed: u64) -> Vec<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..samples {
        let rho = random_density(&mut rng);
        let m = rho.matrix();
        let d = bures_to_bell_set(m).0;
        let v = lyapunov_qsr(m);
        worst = worst.max(SANDWICH_C1 * d - v).max(v - SANDWICH_C2 * d);
        if d > 0.0 {
            lo = lo.min(v / d);
            hi = hi.max(v / d);
        }
    }
    vec![
        Measurement::bounded("max_violation", worst, SANDWICH_TOL),
        Measurement::info("min_V_over_d", lo),
        Measurement::info("max_V_over_d", hi),
    ]
}

/// Empirical `sup |Θᵤ|/(1 − X)` and the vanishing of `Θᵤ/d_B²` towards
/// the target along straight paths `(1 − s)ρ̄ + sσ`.
pub fn feedback_theta(samples: usize, seed: u64) -> Result<Vec<Measurement>> {
    let target = BellLabel::PsiPlus;
    let p = ModelParams::two_channel_default(target);
    let ops = operators(&p);
    let ctl = Controller::two_channel_default(target);
    let rho_bar = bell(target).projector;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sup = 0.0f64;
    for i in 0..samples {
        let sigma = random_density(&mut rng);
        // Half the samples concentrate near the target, where 1 − X is small.
        let rho = if i % 2 == 0 {
            sigma
        } else {
            let s = 10f64.powf(-6.0 * rng.random::<f64>());
            mix(&rho_bar, &sigma, s)
        };
        let m = rho.matrix();
        let gap = 1.0 - fidelity_x(m, target);
        if gap <= 0.0 {
            continue;
        }
        sup = sup.max(theta_u(m, &ctl, &ops)?.abs() / gap);
    }

    let mut worst_ratio = 0.0f64;
    for _ in 0..COND_U2_DIRECTIONS {
        let sigma = random_density(&mut rng);
        let at = |s: f64| -> Result<f64> {
            let rho = mix(&rho_bar, &sigma, s);
            let d = bures_to_bell(rho.matrix(), target);
            Ok(theta_u(rho.matrix(), &ctl, &ops)? / (d * d))
        };
        let near = at(1e-4)?;
        let far = at(1e-1)?;
        worst_ratio = worst_ratio.max(if far == 0.0 { f64::INFINITY } else { (near / far).abs() });
    }
    Ok(vec![
        Measurement::info("sup_theta_over_gap", sup),
        Measurement::bounded("max_cond_u2_ratio", worst_ratio, COND_U2_FACTOR),
    ])
}

fn lambda2(m: &Mat4) -> f64 {
    m.re(1, 1) + m.re(2, 2)
}

fn gamma(m: &Mat4) -> f64 {
    2.0 * m.re(1, 2) + 2.0 * m.re(0, 3)
}

/// With `u ≡ 0`, Λ₂ and Γ have no drift, the `dW₁` coefficient of Λ₂ is
/// `−4√(η₁M₁) Λ₁Λ₂` and the `dW₂` coefficient of Γ is `2√(η₂M₂)(1 − Γ²)`.
pub fn martingale_drift(samples: usize, seed: u64) -> Result<Vec<Measurement>> {
    let p = qsr_model();
    let ops = operators(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut drift_l2, mut drift_g, mut diff_l2, mut diff_g) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let rho = random_density(&mut rng);
        let m = rho.matrix();
        let drift = sme_drift(m, &Controller::Zero, &ops)?;
        drift_l2 = drift_l2.max(lambda2(&drift).abs());
        drift_g = drift_g.max(gamma(&drift).abs());

        let c = coordinates(m);
        let g1 = diffusion_gk(m, &ops.l[0]);
        let want = -4.0 * (p.eta1 * p.m1).sqrt() * c.lambda1 * c.lambda2;
        diff_l2 = diff_l2.max((p.eta1.sqrt() * lambda2(&g1) - want).abs());
        let g2 = diffusion_gk(m, &ops.l[1]);
        let want = 2.0 * (p.eta2 * p.m2).sqrt() * (1.0 - c.gamma * c.gamma);
        diff_g = diff_g.max((p.eta2.sqrt() * gamma(&g2) - want).abs());
    }
    Ok(vec![
        Measurement::bounded("max_drift_lambda2", drift_l2, DRIFT_TOL),
        Measurement::bounded("max_drift_gamma", drift_g, DRIFT_TOL),
        Measurement::bounded("max_diffusion_error_lambda2", diff_l2, DIFFUSION_TOL),
        Measurement::bounded("max_diffusion_error_gamma", diff_g, DIFFUSION_TOL),
    ])
}

/// `max ℒV/V` for the two-channel law over states with `d_B(ρ, ρ̄) < 0.1`,
/// bounded by `−C̄/2 + 0.05`.
pub fn feedback_rate(samples: usize, seed: u64) -> Result<Vec<Measurement>> {
    let target = BellLabel::PsiPlus;
    let p = ModelParams::two_channel_default(target);
    let ops = operators(&p);
    let ctl = Controller::two_channel_default(target);
    let rho_bar = bell(target).projector;
    let v = |m: &Mat4| lyapunov_fb(m, target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut used = 0;
    while used < samples {
        let sigma = random_density(&mut rng);
        let s = 10f64.powf(-4.0 - 2.0 * rng.random::<f64>());
        let rho = mix(&rho_bar, &sigma, s);
        let m = rho.matrix();
        if bures_to_bell(m, target) >= LOCAL_RADIUS {
            continue;
        }
        // Drift and diffusion are O(s) here and V is a function of the linear
        // 1 − X, so the relative truncation error is O(h²) while a small h
        // drowns the second difference in roundoff.
        let h = 1e-3;
        let lv = generator_apply(&v, m, &ctl, &ops, &p, h)?;
        worst = worst.max(lv / v(m));
        used += 1;
    }
    Ok(vec![Measurement::bounded(
        "max_LV_over_V",
        worst,
        -p.c_bar() / 2.0 + LOCAL_RATE_SLACK,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_samples() {
        for suite in Suite::ALL {
            let r = run_suite(suite, 500, 11).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert!(run_suite(Suite::BuresSandwich, 0, 1).is_err());
    }

    #[test]
    fn sandwich_constants() {
        assert!((SANDWICH_C1 - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((SANDWICH_C2 - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn report_flags_violations() {
        let r = CheckReport {
            suite: Suite::QsrLyapunov,
            samples: 1,
            seed: 0,
            measurements: vec![Measurement::bounded("x", 2e-3, QSR_LYAPUNOV_TOL)],
        };
        assert!(!r.passed());
        assert!(r.to_string().contains("VIOLATED"));
        assert!(!Measurement::info("nan", f64::NAN).holds());
    }
}
