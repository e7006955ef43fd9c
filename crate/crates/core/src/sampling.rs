//! Random operators for property checks and sampling suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg4::{Cplx, Mat4};
use crate::model::DensityMatrix;

/// 4x4 matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
    Mat4::from_fn(|_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cplx::new(re, im)
    })
}

/// `G G* / Tr(G G*)` for a complex Gaussian `G`; full rank almost surely.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let g = random_matrix(rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new_unchecked(m.scale(1.0 / tr).hermitian_part())
}

/// Convex mixture `(1 − s) a + s b`.
pub fn mix(a: &DensityMatrix, b: &DensityMatrix, s: f64) -> DensityMatrix {
    let mut m = a.matrix().scale(1.0 - s);
    m.axpy(s, b.matrix());
    DensityMatrix::new_unchecked(m)
}
