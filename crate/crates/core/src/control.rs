//! Feedback laws and their diagnostic quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg4::{Mat4, Vec4};
use crate::model::{bell, BellLabel, OperatorSet};

/// A feedback law `u(ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Controller {
    /// `u ≡ 0`.
    Zero,
    /// `u(ρ) = α (1 − X(ρ))^β − γ Tr(i[H₁, ρ] ρ̄)`.
    TwoChannel {
        target: BellLabel,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    /// `u₁ = γ₁ − Tr(i[H₁,ρ]ρ̄)`, `u₂ = f(X(ρ)) (γ₂ − Tr(i[H₂,ρ]ρ̄))`.
    OneChannel {
        target: BellLabel,
        gamma1: f64,
        gamma2: f64,
        epsilon: f64,
    },
}

/// `γ₂ / γ₁` for the one-channel law: the sign for which the target is an
/// eigenvector of `γ₁H₁ + γ₂H₂`, so that the constant parts of the control
/// leave it fixed. `+1` for Ψ₊ and Φ₋, `−1` for Ψ₋ and Φ₊.
pub fn one_channel_gamma_ratio(target: BellLabel) -> f64 {
    if target.is_psi() {
        target.sign()
    } else {
        -target.sign()
    }
}

impl Controller {
    /// `α = 10, β = 12, γ = 1`.
    pub fn two_channel_default(target: BellLabel) -> Self {
        Controller::TwoChannel {
            target,
            alpha: 10.0,
            beta: 12.0,
            gamma: 1.0,
        }
    }

    /// `γ₁ = 4`, `γ₂ = 4·`[`one_channel_gamma_ratio`]`(target)`, `ε = 0.15`.
    pub fn one_channel_default(target: BellLabel) -> Self {
        Controller::OneChannel {
            target,
            gamma1: 4.0,
            gamma2: 4.0 * one_channel_gamma_ratio(target),
            epsilon: 0.15,
        }
    }

    pub fn target(&self) -> Option<BellLabel> {
        match *self {
            Controller::Zero => None,
            Controller::TwoChannel { target, .. } | Controller::OneChannel { target, .. } => Some(target),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Controller::Zero => "zero",
            Controller::TwoChannel { .. } => "two_channel",
            Controller::OneChannel { .. } => "one_channel",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key, reason: &str| {
            Err(Error::InvalidParameter {
                key,
                reason: reason.to_string(),
            })
        };
        match *self {
            Controller::Zero => Ok(()),
            Controller::TwoChannel { alpha, beta, gamma, .. } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad("alpha", "must be positive");
                }
                if !(beta > 1.0 && beta.is_finite()) {
                    return bad("beta", "must exceed 1");
                }
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return bad("gamma", "must be positive");
                }
                Ok(())
            }
            Controller::OneChannel {
                target,
                gamma1,
                gamma2,
                epsilon,
            } => {
                if !(epsilon > 0.0 && epsilon < 0.5) {
                    return bad("epsilon", "must lie in (0, 1/2)");
                }
                if !(gamma1.is_finite() && gamma1 != 0.0) {
                    return bad("gamma1", "must be finite and non-zero");
                }
                let ratio = one_channel_gamma_ratio(target);
                if gamma2 != ratio * gamma1 {
                    return bad(
                        "gamma2",
                        &format!(
                            "must equal {}gamma1 for target {target}, otherwise the target is not an equilibrium",
                            if ratio > 0.0 { "+" } else { "-" }
                        ),
                    );
                }
                Ok(())
            }
        }
    }

    /// Checks that the law fits the operator set it will drive.
    pub fn check_compatible(&self, ops: &OperatorSet) -> Result<()> {
        match *self {
            Controller::Zero => Ok(()),
            Controller::TwoChannel { target, .. } if ops.n_channels == 2 && target == ops.target => Ok(()),
            Controller::OneChannel { target, .. } if ops.n_channels == 1 && target == ops.target => Ok(()),
            _ => Err(Error::ConfigMismatch(format!(
                "{} controller (target {:?}) with a {}-channel model targeting {}",
                self.kind_name(),
                self.target().map(|t| t.as_str()),
                ops.n_channels,
                ops.target
            ))),
        }
    }
}

/// Control values `u_j`, one per control Hamiltonian in use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlVector {
    values: [f64; 2],
    len: usize,
}

impl ControlVector {
    pub fn zeros(len: usize) -> Self {
        ControlVector { values: [0.0; 2], len }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.len]
    }

    /// First component, or zero for an empty vector.
    pub fn first(&self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.values[0]
        }
    }
}

/// `X(ρ) = Tr(ρ ρ̄) = ⟨ξ|ρ|ξ⟩` for `ρ̄ = ξξ*`.
pub fn fidelity_x(rho: &Mat4, target: BellLabel) -> f64 {
    rho.quadratic_form(&bell(target).vector).re
}

/// `Tr(i[H, ρ] ξξ*)`, evaluated as `−2 Im ⟨ξ|Hρ|ξ⟩` so the result is real
/// by construction.
pub fn tr_i_commutator(h: &Mat4, rho: &Mat4, xi: &Vec4) -> f64 {
    let hxi = h.apply(xi);
    let rxi = rho.apply(xi);
    let z: num_complex::Complex64 = hxi.iter().zip(rxi.iter()).map(|(a, b)| a.conj() * b).sum();
    -2.0 * z.im
}

/// Smoothing gate of the one-channel law: 0 below `ε`, 1 above `1 − ε`,
/// a half sine wave in between.
pub fn smoothing_f(x: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainViolation {
            value: x,
            domain: "[0, 1]",
        });
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::DomainViolation {
            value: epsilon,
            domain: "epsilon in (0, 1/2)",
        });
    }
    Ok(if x < epsilon {
        0.0
    } else if x <= 1.0 - epsilon {
        0.5 * (std::f64::consts::PI * (x - 0.5) / (1.0 - 2.0 * epsilon)).sin() + 0.5
    } else {
        1.0
    })
}

/// Evaluates the feedback law at `rho`.
pub fn control_signal(rho: &Mat4, ctl: &Controller, ops: &OperatorSet) -> Result<ControlVector> {
    ctl.check_compatible(ops)?;
    let mut out = ControlVector::zeros(ops.n_controls);
    match *ctl {
        Controller::Zero => {}
        Controller::TwoChannel {
            target,
            alpha,
            beta,
            gamma,
        } => {
            let xi = bell(target).vector;
            let x = rho.quadratic_form(&xi).re;
            let gap = (1.0 - x).max(0.0);
            out.values[0] = alpha * gap.powf(beta) - gamma * tr_i_commutator(&ops.controls[0], rho, &xi);
        }
        Controller::OneChannel {
            target,
            gamma1,
            gamma2,
            epsilon,
        } => {
            let xi = bell(target).vector;
            let x = rho.quadratic_form(&xi).re.clamp(0.0, 1.0);
            out.values[0] = gamma1 - tr_i_commutator(&ops.controls[0], rho, &xi);
            let gate = smoothing_f(x, epsilon)?;
            out.values[1] = if gate == 0.0 {
                0.0
            } else {
                gate * (gamma2 - tr_i_commutator(&ops.controls[1], rho, &xi))
            };
        }
    }
    Ok(out)
}

/// `Θ_u(ρ) = u(ρ) Tr(i[H₁, ρ] ρ̄)` for the two-channel law.
pub fn theta_u(rho: &Mat4, ctl: &Controller, ops: &OperatorSet) -> Result<f64> {
    let Controller::TwoChannel { target, .. } = *ctl else {
        return Err(Error::ConfigMismatch(format!(
            "theta_u needs a two_channel controller, got {}",
            ctl.kind_name()
        )));
    };
    let u = control_signal(rho, ctl, ops)?.first();
    Ok(u * tr_i_commutator(&ops.controls[0], rho, &bell(target).vector))
}
