//! The five reference experiments as named presets.

use std::fmt;
use std::str::FromStr;

use crate::control::Controller;
use crate::ensemble::{CampaignConfig, InitialState};
use crate::error::{Error, Result};
use crate::model::{BellLabel, ModelParams};
use crate::sde::SdeConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioPreset {
    /// `u ≡ 0` from `diag(0.2, 0.3, 0.1, 0.4)`.
    Fig1Qsr,
    /// Two-channel feedback towards Ψ₊ from Φ₋.
    Fig2Stab2PsiPlus,
    /// Two-channel feedback towards Φ₋ from Ψ₊.
    Fig3Stab2PhiMinus,
    /// One-channel feedback towards Ψ₊ from Φ₋.
    Fig4Stab1PsiPlus,
    /// One-channel feedback towards Φ₋ from Ψ₊.
    Fig5Stab1PhiMinus,
}

impl ScenarioPreset {
    pub const ALL: [ScenarioPreset; 5] = [
        ScenarioPreset::Fig1Qsr,
        ScenarioPreset::Fig2Stab2PsiPlus,
        ScenarioPreset::Fig3Stab2PhiMinus,
        ScenarioPreset::Fig4Stab1PsiPlus,
        ScenarioPreset::Fig5Stab1PhiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioPreset::Fig1Qsr => "fig1_qsr",
            ScenarioPreset::Fig2Stab2PsiPlus => "fig2_stab2_psi+",
            ScenarioPreset::Fig3Stab2PhiMinus => "fig3_stab2_phi-",
            ScenarioPreset::Fig4Stab1PsiPlus => "fig4_stab1_psi+",
            ScenarioPreset::Fig5Stab1PhiMinus => "fig5_stab1_phi-",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioPreset::Fig1Qsr => "state reduction, u = 0, two channels, rho0 = diag(0.2,0.3,0.1,0.4)",
            ScenarioPreset::Fig2Stab2PsiPlus => "two-channel feedback to psi+ from phi-, alpha=10 beta=12 gamma=1",
            ScenarioPreset::Fig3Stab2PhiMinus => "two-channel feedback to phi- from psi+, alpha=10 beta=12 gamma=1",
            ScenarioPreset::Fig4Stab1PsiPlus => "one-channel feedback to psi+ from phi-, eps=0.15 gamma1=gamma2=4",
            ScenarioPreset::Fig5Stab1PhiMinus => "one-channel feedback to phi- from psi+, eps=0.15 gamma1=gamma2=4",
        }
    }

    pub fn config(self) -> CampaignConfig {
        let (model, controller, rho0, n_traj, t_final) = match self {
            ScenarioPreset::Fig1Qsr => (
                ModelParams::two_channel_default(BellLabel::PsiPlus),
                Controller::Zero,
                InitialState::Fig1Diagonal,
                1000,
                10.0,
            ),
            ScenarioPreset::Fig2Stab2PsiPlus => two_channel(BellLabel::PsiPlus, BellLabel::PhiMinus),
            ScenarioPreset::Fig3Stab2PhiMinus => two_channel(BellLabel::PhiMinus, BellLabel::PsiPlus),
            ScenarioPreset::Fig4Stab1PsiPlus => one_channel(BellLabel::PsiPlus, BellLabel::PhiMinus),
            ScenarioPreset::Fig5Stab1PhiMinus => one_channel(BellLabel::PhiMinus, BellLabel::PsiPlus),
        };
        let sde = SdeConfig {
            t_final,
            ..Default::default()
        };
        CampaignConfig::new(model, controller, sde, rho0, n_traj)
    }
}

fn two_channel(target: BellLabel, start: BellLabel) -> (ModelParams, Controller, InitialState, usize, f64) {
    (
        ModelParams::two_channel_default(target),
        Controller::two_channel_default(target),
        InitialState::Bell(start),
        500,
        10.0,
    )
}

fn one_channel(target: BellLabel, start: BellLabel) -> (ModelParams, Controller, InitialState, usize, f64) {
    (
        ModelParams::one_channel_default(target),
        Controller::one_channel_default(target),
        InitialState::Bell(start),
        500,
        30.0,
    )
}

impl fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioPreset {
    type Err = Error;

    /// Accepts the canonical names; `−` (U+2212) is read as `-`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('\u{2212}', "-");
        ScenarioPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                key: "preset",
                reason: format!("unknown preset `{s}`"),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reference_parameters() {
        let c = ScenarioPreset::Fig1Qsr.config();
        assert_eq!(c.controller, Controller::Zero);
        assert_eq!(c.rho0, InitialState::Fig1Diagonal);
        assert_eq!((c.model.omega, c.model.eta1, c.model.m1), (0.3, 0.3, 1.0));
        assert_eq!((c.model.eta2, c.model.m2, c.model.n_channels), (0.4, 0.9, 2));

        let c = ScenarioPreset::Fig2Stab2PsiPlus.config();
        assert_eq!(c.model.target, BellLabel::PsiPlus);
        assert_eq!(c.rho0, InitialState::Bell(BellLabel::PhiMinus));
        assert_eq!(
            c.controller,
            Controller::TwoChannel {
                target: BellLabel::PsiPlus,
                alpha: 10.0,
                beta: 12.0,
                gamma: 1.0
            }
        );

        for (p, target) in [
            (ScenarioPreset::Fig4Stab1PsiPlus, BellLabel::PsiPlus),
            (ScenarioPreset::Fig5Stab1PhiMinus, BellLabel::PhiMinus),
        ] {
            let c = p.config();
            assert_eq!(c.model.n_channels, 1);
            assert_eq!(c.model.target, target);
            assert_eq!(
                c.controller,
                Controller::OneChannel {
                    target,
                    gamma1: 4.0,
                    gamma2: 4.0,
                    epsilon: 0.15
                }
            );
            assert_eq!(c.sde.t_final, 30.0);
        }
    }

    #[test]
    fn all_presets_validate_and_parse() {
        for p in ScenarioPreset::ALL {
            p.config().validate().unwrap();
            assert_eq!(p.name().parse::<ScenarioPreset>().unwrap(), p);
        }
        assert_eq!(
            "fig3_stab2_phi\u{2212}".parse::<ScenarioPreset>().unwrap(),
            ScenarioPreset::Fig3Stab2PhiMinus
        );
        assert!("fig6".parse::<ScenarioPreset>().is_err());
    }
}
