//! Two-qubit model: Pauli/Bell constructions, measurement and control
//! operators, and the drift/diffusion maps of the stochastic master equation
//!
//! ```text
//! dρ = F0(ρ) dt + Σ_k F_k(ρ) dt + Σ_k √η_k G_k(ρ) dW_k
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg4::{commutator, herm_eig, kron, Cplx, Mat2, Mat4, Vec4, I, ONE, ZERO};

/// Tolerance used when validating density-matrix invariants.
pub const STATE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> Mat2 {
    match axis {
        Axis::X => Mat2::new([[ZERO, ONE], [ONE, ZERO]]),
        Axis::Y => Mat2::new([[ZERO, -I], [I, ZERO]]),
        Axis::Z => Mat2::new([[ONE, ZERO], [ZERO, -ONE]]),
    }
}

/// `σ_z ⊗ σ_z`.
pub fn l_z() -> Mat4 {
    kron(&pauli(Axis::Z), &pauli(Axis::Z))
}

/// `σ_x ⊗ σ_x`.
pub fn l_x() -> Mat4 {
    kron(&pauli(Axis::X), &pauli(Axis::X))
}

/// Control Hamiltonian shared by both feedback designs:
/// `σ_z ⊗ σ_y − 3 (𝟙 ⊗ σ_y)`.
pub fn h1() -> Mat4 {
    kron(&pauli(Axis::Z), &pauli(Axis::Y)) - kron(&Mat2::identity(), &pauli(Axis::Y)).scale(3.0)
}

/// Second one-channel control Hamiltonian for Ψ± targets:
/// `−σ_y ⊗ σ_z − 3 (σ_y ⊗ 𝟙)`.
pub fn pi1() -> Mat4 {
    -kron(&pauli(Axis::Y), &pauli(Axis::Z)) - kron(&pauli(Axis::Y), &Mat2::identity()).scale(3.0)
}

/// Second one-channel control Hamiltonian for Φ± targets:
/// `σ_y ⊗ σ_z − 3 (σ_y ⊗ 𝟙)`.
pub fn pi2() -> Mat4 {
    kron(&pauli(Axis::Y), &pauli(Axis::Z)) - kron(&pauli(Axis::Y), &Mat2::identity()).scale(3.0)
}

/// A validated two-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all to [`STATE_TOL`]).
    pub fn new(m: Mat4) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let asym = m.asymmetry();
        if asym > STATE_TOL {
            return Err(Error::InvalidState(format!("asymmetry {asym:e}")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = herm_eig(&m)?.eigenvalues[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {min:e}")));
        }
        Ok(DensityMatrix(m.hermitian_part()))
    }

    /// Skips validation. The caller guarantees the invariants, e.g. the
    /// output of a physicality projection.
    pub fn new_unchecked(m: Mat4) -> Self {
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::diag_real([0.25; 4]))
    }

    pub fn diag(d: [f64; 4]) -> Result<Self> {
        DensityMatrix::new(Mat4::diag_real(d))
    }

    pub fn pure(v: &Vec4) -> Result<Self> {
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("vector norm² {norm}")));
        }
        Ok(DensityMatrix(Mat4::outer(v)))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_inner(self) -> Mat4 {
        self.0
    }
}

impl AsRef<Mat4> for DensityMatrix {
    fn as_ref(&self) -> &Mat4 {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// True for Ψ±, which live in the `Λ₂ = 0` face.
    pub fn is_psi(self) -> bool {
        matches!(self, BellLabel::PsiPlus | BellLabel::PsiMinus)
    }

    /// `+1` for Ψ₊/Φ₊, `−1` for Ψ₋/Φ₋.
    pub fn sign(self) -> f64 {
        match self {
            BellLabel::PsiPlus | BellLabel::PhiPlus => 1.0,
            BellLabel::PsiMinus | BellLabel::PhiMinus => -1.0,
        }
    }

    /// Eigenvalue of `L_z` on this Bell state.
    pub fn lambda_z(self) -> f64 {
        if self.is_psi() {
            1.0
        } else {
            -1.0
        }
    }

    /// Eigenvalue of `L_x` on this Bell state.
    pub fn lambda_x(self) -> f64 {
        self.sign()
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BellLabel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psi+" | "psi_plus" => Ok(BellLabel::PsiPlus),
            "psi-" | "psi_minus" => Ok(BellLabel::PsiMinus),
            "phi+" | "phi_plus" => Ok(BellLabel::PhiPlus),
            "phi-" | "phi_minus" => Ok(BellLabel::PhiMinus),
            other => Err(format!("unknown Bell state `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellState {
    pub label: BellLabel,
    pub vector: Vec4,
    pub projector: DensityMatrix,
}

pub fn bell(label: BellLabel) -> BellState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = label.sign() * h;
    let c = |x: f64| Cplx::new(x, 0.0);
    let vector = if label.is_psi() {
        [c(h), ZERO, ZERO, c(s)]
    } else {
        [ZERO, c(h), c(s), ZERO]
    };
    BellState {
        label,
        vector,
        projector: DensityMatrix(Mat4::outer(&vector)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_channels: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub m1: f64,
    pub m2: f64,
    pub omega: f64,
    pub target: BellLabel,
}

impl ModelParams {
    /// Two-channel parameters used throughout the simulations section:
    /// `ω = 0.3, η₁ = 0.3, M₁ = 1, η₂ = 0.4, M₂ = 0.9`.
    pub fn two_channel_default(target: BellLabel) -> Self {
        ModelParams {
            n_channels: 2,
            eta1: 0.3,
            eta2: 0.4,
            m1: 1.0,
            m2: 0.9,
            omega: 0.3,
            target,
        }
    }

    pub fn one_channel_default(target: BellLabel) -> Self {
        ModelParams {
            n_channels: 1,
            ..Self::two_channel_default(target)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key, reason: &str| {
            Err(Error::InvalidParameter {
                key,
                reason: reason.to_string(),
            })
        };
        if self.n_channels != 1 && self.n_channels != 2 {
            return bad("n_channels", "must be 1 or 2");
        }
        if !(self.eta1 > 0.0 && self.eta1 <= 1.0) {
            return bad("eta1", "must lie in (0, 1]");
        }
        if !(self.m1 > 0.0 && self.m1.is_finite()) {
            return bad("m1", "must be positive");
        }
        if self.n_channels == 2 {
            if !(self.eta2 > 0.0 && self.eta2 <= 1.0) {
                return bad("eta2", "must lie in (0, 1]");
            }
            if !(self.m2 > 0.0 && self.m2.is_finite()) {
                return bad("m2", "must be positive");
            }
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return bad("omega", "must be non-negative");
        }
        Ok(())
    }

    pub fn eta(&self, channel: usize) -> f64 {
        if channel == 0 {
            self.eta1
        } else {
            self.eta2
        }
    }

    /// `min_k η_k M_k` over the active channels.
    pub fn c_bar(&self) -> f64 {
        if self.n_channels == 1 {
            self.eta1 * self.m1
        } else {
            (self.eta1 * self.m1).min(self.eta2 * self.m2)
        }
    }
}

/// Operators fixed by a [`ModelParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorSet {
    pub n_channels: usize,
    /// `L₁ = √M₁ L_z`, `L₂ = √M₂ L_x` (zero when absent).
    pub l: [Mat4; 2],
    pub h0: Mat4,
    /// `H₁` and, for the one-channel design, `H₂ ∈ {Π₁, Π₂}`.
    pub controls: [Mat4; 2],
    pub n_controls: usize,
    pub target: BellLabel,
}

pub fn operators(params: &ModelParams) -> OperatorSet {
    let l1 = l_z().scale(params.m1.sqrt());
    let (l2, n_controls, h2) = if params.n_channels == 2 {
        (l_x().scale(params.m2.sqrt()), 1, Mat4::zeros())
    } else {
        let h2 = if params.target.is_psi() { pi1() } else { pi2() };
        (Mat4::zeros(), 2, h2)
    };
    OperatorSet {
        n_channels: params.n_channels,
        l: [l1, l2],
        h0: l_z().scale(params.omega),
        controls: [h1(), h2],
        n_controls,
        target: params.target,
    }
}

impl OperatorSet {
    pub fn l1(&self) -> &Mat4 {
        &self.l[0]
    }

    pub fn l2(&self) -> Option<&Mat4> {
        (self.n_channels == 2).then_some(&self.l[1])
    }
}

/// `−i[H₀, ρ] − i Σ_j u_j [H_j, ρ]`.
pub fn drift_f0(rho: &Mat4, u: &[f64], ops: &OperatorSet) -> Result<Mat4> {
    if u.len() != ops.n_controls {
        return Err(Error::DimensionMismatch {
            expected: ops.n_controls,
            got: u.len(),
        });
    }
    let mut h = ops.h0;
    for (uj, hj) in u.iter().zip(ops.controls.iter()) {
        h.axpy(*uj, hj);
    }
    Ok(commutator(&h, rho).scale_c(-I))
}

/// `L ρ L − L²ρ/2 − ρL²/2`.
pub fn drift_fk(rho: &Mat4, lk: &Mat4) -> Mat4 {
    let l2 = lk.matmul(lk);
    let mut out = lk.matmul(rho).matmul(lk);
    out.axpy(-0.5, &l2.matmul(rho));
    out.axpy(-0.5, &rho.matmul(&l2));
    out
}

/// `L ρ + ρ L − 2 Tr(Lρ) ρ`.
pub fn diffusion_gk(rho: &Mat4, lk: &Mat4) -> Mat4 {
    let t = lk.trace_product(rho).re;
    let mut out = lk.matmul(rho) + rho.matmul(lk);
    out.axpy(-2.0 * t, rho);
    out
}

/// Drift correction `F̂_k` of the deterministic support equation:
/// `(1 − η_k)(L_k ρ L_k − L_k² ρ) + 2 η_k Tr(L_k ρ) G_k(ρ)`.
///
/// `channel` is zero-based. Because `L_k² ∝ 𝟙`, the first term equals
/// `(1 − η_k) F_k(ρ)`.
pub fn support_fhat(rho: &Mat4, channel: usize, ops: &OperatorSet, params: &ModelParams) -> Result<Mat4> {
    if channel >= ops.n_channels {
        return Err(Error::DimensionMismatch {
            expected: ops.n_channels,
            got: channel + 1,
        });
    }
    let lk = &ops.l[channel];
    let eta = params.eta(channel);
    let t = lk.trace_product(rho).re;
    let mut out = drift_fk(rho, lk).scale(1.0 - eta);
    out.axpy(2.0 * eta * t, &diffusion_gk(rho, lk));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fig1() -> ModelParams {
        ModelParams::two_channel_default(BellLabel::PsiPlus)
    }

    #[test]
    fn pauli_matrices() {
        let c = |re, im| Cplx::new(re, im);
        assert_eq!(pauli(Axis::Z).0, [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]);
        assert_eq!(pauli(Axis::X).0, [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]);
        assert_eq!(pauli(Axis::Y).0, [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]]);
    }

    #[test]
    fn bell_vectors() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = bell(BellLabel::PsiPlus).vector;
        assert_eq!(v.map(|x| x.re), [h, 0.0, 0.0, h]);
        let v = bell(BellLabel::PhiMinus).vector;
        assert_eq!(v.map(|x| x.re), [0.0, h, -h, 0.0]);
        let lv = l_z().apply(&bell(BellLabel::PsiPlus).vector);
        assert_eq!(lv, bell(BellLabel::PsiPlus).vector);
    }

    #[test]
    fn bell_states_are_common_eigenstates() {
        for label in BellLabel::ALL {
            let b = bell(label);
            let norm: f64 = b.vector.iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-15);
            for (op, lam) in [(l_z(), label.lambda_z()), (l_x(), label.lambda_x())] {
                let w = op.apply(&b.vector);
                for i in 0..4 {
                    assert!((w[i] - b.vector[i] * lam).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn operator_set_matches_parameters() {
        let mut p = fig1();
        p.m1 = 1.0;
        let ops = operators(&p);
        assert_eq!(ops.l[0], Mat4::diag_real([1.0, -1.0, -1.0, 1.0]));
        let anti = Mat4::from_fn(|i, j| {
            if i + j == 3 {
                Cplx::new(0.9f64.sqrt(), 0.0)
            } else {
                ZERO
            }
        });
        assert!((ops.l[1] - anti).max_abs() < 1e-15);
        assert!((ops.h0 - Mat4::diag_real([0.3, -0.3, -0.3, 0.3])).max_abs() < 1e-15);
        assert_eq!(ops.n_controls, 1);
        for m in [ops.l[0], ops.l[1], ops.h0, ops.controls[0], pi1(), pi2()] {
            assert_eq!(m.asymmetry(), 0.0);
        }

        let one = operators(&ModelParams::one_channel_default(BellLabel::PsiMinus));
        assert_eq!(one.n_controls, 2);
        assert_eq!(one.controls[1], pi1());
        assert!(one.l2().is_none());
        let one = operators(&ModelParams::one_channel_default(BellLabel::PhiMinus));
        assert_eq!(one.controls[1], pi2());
    }

    #[test]
    fn params_validation() {
        assert!(fig1().validate().is_ok());
        for f in [
            |p: &mut ModelParams| p.eta1 = 0.0,
            |p: &mut ModelParams| p.eta2 = 1.5,
            |p: &mut ModelParams| p.m1 = -1.0,
            |p: &mut ModelParams| p.omega = -0.1,
            |p: &mut ModelParams| p.n_channels = 3,
        ] {
            let mut p = fig1();
            f(&mut p);
            assert!(p.validate().is_err());
        }
        // eta2/M2 are ignored for a single channel.
        let mut p = ModelParams::one_channel_default(BellLabel::PsiPlus);
        p.eta2 = 0.0;
        assert!(p.validate().is_ok());
        assert_eq!(fig1().c_bar(), 0.3);
    }

    #[test]
    fn f0_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = *random_density(&mut rng).matrix();
        let mut p = fig1();
        p.omega = 0.0;
        let ops = operators(&p);
        assert_eq!(drift_f0(&rho, &[0.0], &ops).unwrap().max_abs(), 0.0);

        let ops = operators(&fig1());
        let target = *bell(BellLabel::PsiPlus).projector.matrix();
        assert!(drift_f0(&target, &[0.0], &ops).unwrap().max_abs() < 1e-15);

        let f = drift_f0(&rho, &[0.7], &ops).unwrap();
        assert!(f.trace().norm() < 1e-14);
        assert!(f.asymmetry() < 1e-14);
        assert!(matches!(
            drift_f0(&rho, &[0.1, 0.2], &ops),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn fk_and_gk_examples() {
        let ops = operators(&fig1());
        let target = *bell(BellLabel::PsiPlus).projector.matrix();
        let mixed = *DensityMatrix::maximally_mixed().matrix();
        assert!(drift_fk(&target, &ops.l[0]).max_abs() < 1e-15);
        assert!(diffusion_gk(&target, &ops.l[0]).max_abs() < 1e-15);
        for l in &ops.l {
            assert!(drift_fk(&mixed, l).max_abs() < 1e-15);
        }
        let g = diffusion_gk(&mixed, &l_z());
        assert!((g - l_z().scale(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn fhat_examples() {
        let mut p = fig1();
        p.eta1 = 1.0;
        p.m1 = 1.0;
        let ops = operators(&p);
        let target = *bell(BellLabel::PsiPlus).projector.matrix();
        assert!(support_fhat(&target, 0, &ops, &p).unwrap().max_abs() < 1e-15);
        let mixed = *DensityMatrix::maximally_mixed().matrix();
        assert!(support_fhat(&mixed, 0, &ops, &p).unwrap().max_abs() < 1e-15);
        assert!(support_fhat(&mixed, 2, &ops, &p).is_err());

        // Direct trace computation over random samples, with M_k != 1.
        let p = fig1();
        let ops = operators(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let rho = *random_density(&mut rng).matrix();
            for k in 0..2 {
                let f = support_fhat(&rho, k, &ops, &p).unwrap();
                let tr: Cplx = (0..4).map(|i| f.0[i][i]).sum();
                assert!(tr.norm() < 1e-14);
                assert!(f.asymmetry() < 1e-14);
            }
        }
    }

    #[test]
    fn bell_projectors_are_equilibria() {
        let p = fig1();
        let ops = operators(&p);
        for label in BellLabel::ALL {
            let rho = *bell(label).projector.matrix();
            let total = drift_f0(&rho, &[0.0], &ops).unwrap() + drift_fk(&rho, &ops.l[0]) + drift_fk(&rho, &ops.l[1]);
            assert!(total.max_abs() <= 1e-12);
            for l in &ops.l {
                assert!(diffusion_gk(&rho, l).max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn maps_preserve_hermiticity_and_trace() {
        let p = fig1();
        let ops = operators(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..10_000 {
            let rho = *random_density(&mut rng).matrix();
            let u = [(i as f64).sin() * 5.0];
            let maps = [
                drift_f0(&rho, &u, &ops).unwrap(),
                drift_fk(&rho, &ops.l[0]),
                drift_fk(&rho, &ops.l[1]),
                diffusion_gk(&rho, &ops.l[0]),
                diffusion_gk(&rho, &ops.l[1]),
            ];
            for m in maps {
                assert!(m.asymmetry() <= 1e-13);
                assert!(m.trace().norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diag([0.2, 0.3, 0.1, 0.4]).is_ok());
        assert!(DensityMatrix::diag([0.2, 0.3, 0.1, 0.5]).is_err());
        assert!(DensityMatrix::diag([0.6, 0.3, -0.1, 0.2]).is_err());
        let mut m = Mat4::diag_real([0.25; 4]);
        m.0[0][1] = Cplx::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
    }
}
