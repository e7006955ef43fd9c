//! Fixed-size complex linear algebra for two-qubit operators.
//!
//! Everything here is value-semantic: `Mat2` and `Mat4` are plain arrays
//! wrapped in newtypes so that the hot integration loop never allocates.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Cplx = Complex64;

/// A complex 4-vector (ket) in the computational basis |00>, |01>, |10>, |11>.
pub type Vec4 = [Cplx; 4];

pub const ZERO: Cplx = Cplx::new(0.0, 0.0);
pub const ONE: Cplx = Cplx::new(1.0, 0.0);
pub const I: Cplx = Cplx::new(0.0, 1.0);

/// Asymmetry accepted (and silently repaired) before eigendecomposition.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues below `-PSD_TOL` make a matrix "not PSD" for `psd_sqrt`.
pub const PSD_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Cplx; 2]; 2]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[Cplx; 4]; 4]);

impl Mat2 {
    pub const fn new(entries: [[Cplx; 2]; 2]) -> Self {
        Mat2(entries)
    }

    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

/// Kronecker product: `result[2i+k][2j+l] = a[i][j] * b[k][l]`.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    out
}

/// `ab - ba`.
pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a.matmul(b) - b.matmul(a)
}

impl Default for Mat4 {
    fn default() -> Self {
        Mat4::zeros()
    }
}

impl Mat4 {
    pub const fn new(entries: [[Cplx; 4]; 4]) -> Self {
        Mat4(entries)
    }

    pub const fn zeros() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Mat4::diag_real([1.0; 4])
    }

    pub fn diag_real(d: [f64; 4]) -> Self {
        let mut out = Mat4::zeros();
        for (i, v) in d.into_iter().enumerate() {
            out.0[i][i] = Cplx::new(v, 0.0);
        }
        out
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Cplx) -> Self {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = f(i, j);
            }
        }
        out
    }

    /// Outer product `v v*`.
    pub fn outer(v: &Vec4) -> Self {
        Mat4::from_fn(|i, j| v[i] * v[j].conj())
    }

    pub fn matmul(&self, rhs: &Mat4) -> Mat4 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                let aik = a[i][k];
                if aik == ZERO {
                    continue;
                }
                for j in 0..4 {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
        Mat4(out)
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        let mut out = [ZERO; 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(a, x)| a * x).sum();
        }
        out
    }

    /// `<v, A v>`.
    pub fn quadratic_form(&self, v: &Vec4) -> Cplx {
        let av = self.apply(v);
        v.iter().zip(av.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn adjoint(&self) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn trace(&self) -> Cplx {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// `Tr(self * rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Mat4) -> Cplx {
        let mut acc = ZERO;
        for i in 0..4 {
            for k in 0..4 {
                acc += self.0[i][k] * rhs.0[k][i];
            }
        }
        acc
    }

    /// Real part of entry `(i, j)`, zero-based.
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.0[i][j].re
    }

    pub fn scale(&self, s: f64) -> Mat4 {
        let mut out = *self;
        out.scale_mut(s);
        out
    }

    pub fn scale_mut(&mut self, s: f64) {
        for row in self.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
    }

    pub fn scale_c(&self, s: Cplx) -> Mat4 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    /// `self += s * rhs`.
    pub fn axpy(&mut self, s: f64, rhs: &Mat4) {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += rhs.0[i][j] * s;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in i..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A*) / 2`, with an exactly real diagonal.
    pub fn hermitian_part(&self) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            out.0[i][i] = Cplx::new(self.0[i][i].re, 0.0);
            for j in (i + 1)..4 {
                let v = (self.0[i][j] + self.0[j][i].conj()) * 0.5;
                out.0[i][j] = v;
                out.0[j][i] = v.conj();
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Smallest pivot of an LDL* factorization without pivoting, stopping
    /// early once a pivot drops to `floor` or below. A Hermitian matrix
    /// whose returned value exceeds `floor > 0` is positive definite.
    pub fn min_ldl_pivot(&self, floor: f64) -> f64 {
        let mut a = self.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..4 {
            let d = a[k][k].re;
            min_pivot = min_pivot.min(d);
            if d <= floor {
                return d;
            }
            for i in (k + 1)..4 {
                let l = a[i][k] / d;
                for j in (k + 1)..=i {
                    let upd = l * a[k][j];
                    a[i][j] -= upd;
                }
            }
            for i in (k + 1)..4 {
                for j in (i + 1)..4 {
                    a[i][j] = a[j][i].conj();
                }
            }
        }
        min_pivot
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = Cplx;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx {
        &mut self.0[i][j]
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(mut self, rhs: Mat4) -> Mat4 {
        self += rhs;
        self
    }
}

impl AddAssign for Mat4 {
    fn add_assign(&mut self, rhs: Mat4) {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(mut self, rhs: Mat4) -> Mat4 {
        self -= rhs;
        self
    }
}

impl SubAssign for Mat4 {
    fn sub_assign(&mut self, rhs: Mat4) {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale(-1.0)
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        self.matmul(&rhs)
    }
}

impl Mul<f64> for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: f64) -> Mat4 {
        self.scale(rhs)
    }
}

/// Spectral decomposition of a Hermitian 4x4 matrix.
#[derive(Clone, Copy, Debug)]
pub struct EigDecomp4 {
    /// Ascending.
    pub eigenvalues: [f64; 4],
    /// `eigenvectors[i]` pairs with `eigenvalues[i]`.
    pub eigenvectors: [Vec4; 4],
}

impl EigDecomp4 {
    /// `sum_i f(lambda_i) v_i v_i*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Mat4 {
        let mut out = Mat4::zeros();
        for (lam, v) in self.eigenvalues.iter().zip(self.eigenvectors.iter()) {
            let w = f(*lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..4 {
                let vi = v[i] * w;
                for j in 0..4 {
                    out.0[i][j] += vi * v[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Mat4 {
        self.reconstruct_with(|x| x)
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Inputs within [`HERMITIAN_TOL`] of Hermitian are symmetrized first.
pub fn herm_eig(a: &Mat4) -> Result<EigDecomp4> {
    let asym = a.asymmetry();
    if asym.is_nan() || asym > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { asymmetry: asym });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut m = a.hermitian_part().0;
    let mut v = Mat4::identity().0;
    let scale = a.frobenius().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * m[i][j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = m[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Phase out a_pq, then a real symmetric rotation.
                let phase = apq / r;
                let tau = (m[q][q].re - m[p][p].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let jpp = Cplx::new(c, 0.0);
                let jpq = Cplx::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                for row in m.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = akp * jpp + akq * jqp;
                    row[q] = akp * jpq + akq * jqq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (m[p][k], m[q][k]);
                    m[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
                    m[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                m[p][q] = ZERO;
                m[q][p] = ZERO;
                m[p][p].im = 0.0;
                m[q][q].im = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = vkp * jpp + vkq * jqp;
                    row[q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&x, &y| m[x][x].re.total_cmp(&m[y][y].re));
    let mut eigenvalues = [0.0; 4];
    let mut eigenvectors = [[ZERO; 4]; 4];
    for (slot, &col) in order.iter().enumerate() {
        eigenvalues[slot] = m[col][col].re;
        for row in 0..4 {
            eigenvectors[slot][row] = v[row][col];
        }
    }
    Ok(EigDecomp4 {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// `[-PSD_TOL, 0)` are treated as zero.
pub fn psd_sqrt(a: &Mat4) -> Result<Mat4> {
    let eig = herm_eig(a)?;
    let min = eig.eigenvalues[0];
    if min < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}
