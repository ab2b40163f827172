//! Dense operators on the boson or composite Hilbert space.
//!
//! Every operator the model needs is real in the `|m⟩ ⊗ |q⟩_z` basis except
//! `Ŝ_y` and `σ̂_y`, so storage is a real part plus an optional imaginary part.
//! Real operators stay on the real BLAS path.

use ndarray::{linalg, Array1, Array2, ArrayView2, Axis, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Absolute Hermiticity tolerance, scaled by `max(1, max|M|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    re: Array2<f64>,
    im: Option<Array2<f64>>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Real operator; the Hermitian flag is computed from the entries.
    pub fn from_real(re: Array2<f64>) -> Result<Self> {
        Self::new(re, None)
    }

    pub fn from_parts(re: Array2<f64>, im: Array2<f64>) -> Result<Self> {
        if im.dim() != re.dim() {
            return Err(Error::Dimension { expected: re.nrows(), found: im.nrows() });
        }
        Self::new(re, Some(im))
    }

    fn new(re: Array2<f64>, im: Option<Array2<f64>>) -> Result<Self> {
        let (r, c) = re.dim();
        if r != c {
            return Err(Error::Dimension { expected: r, found: c });
        }
        let mut op = OperatorMatrix { re, im, hermitian: false };
        op.hermitian = op.hermiticity_defect() <= HERMITIAN_TOL * op.max_abs().max(1.0);
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix { re: Array2::eye(dim), im: None, hermitian: true }
    }

    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix { re: Array2::zeros((dim, dim)), im: None, hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn re(&self) -> ArrayView2<'_, f64> {
        self.re.view()
    }

    pub fn im(&self) -> Option<ArrayView2<'_, f64>> {
        self.im.as_ref().map(|m| m.view())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let im = self.im.as_ref().map_or(0.0, |m| m[(i, j)]);
        C64::new(self.re[(i, j)], im)
    }

    /// max |M − M†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let t = self.re.t();
        let mut defect = Zip::from(&self.re).and(&t).fold(0.0f64, |acc, &a, &b| acc.max((a - b).abs()));
        if let Some(im) = &self.im {
            let t = im.t();
            defect = Zip::from(im).and(&t).fold(defect, |acc, &a, &b| acc.max((a + b).abs()));
        }
        defect
    }

    pub fn max_abs(&self) -> f64 {
        match &self.im {
            None => self.re.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Some(im) => Zip::from(&self.re)
                .and(im)
                .fold(0.0f64, |m, &a, &b| m.max(a.hypot(b))),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let mut s: f64 = self.re.iter().map(|x| x * x).sum();
        if let Some(im) = &self.im {
            s += im.iter().map(|x| x * x).sum::<f64>();
        }
        s.sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        OperatorMatrix {
            re: &self.re * factor,
            im: self.im.as_ref().map(|m| m * factor),
            hermitian: self.hermitian,
        }
    }

    /// Multiply by `i`.
    pub fn times_i(&self) -> Self {
        let re = match &self.im {
            Some(im) => -im,
            None => Array2::zeros(self.re.dim()),
        };
        let op = OperatorMatrix { re, im: Some(self.re.clone()), hermitian: false };
        op.recheck()
    }

    fn recheck(mut self) -> Self {
        if let Some(im) = &self.im {
            if im.iter().all(|&x| x == 0.0) {
                self.im = None;
            }
        }
        self.hermitian = self.hermiticity_defect() <= HERMITIAN_TOL * self.max_abs().max(1.0);
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(a + b),
        };
        Ok(OperatorMatrix { re: &self.re + &other.re, im, hermitian: false }.recheck())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let (re, im) = match (&self.im, &other.im) {
            (None, None) => (self.re.dot(&other.re), None),
            (Some(a_im), None) => (self.re.dot(&other.re), Some(a_im.dot(&other.re))),
            (None, Some(b_im)) => (self.re.dot(&other.re), Some(self.re.dot(b_im))),
            (Some(a_im), Some(b_im)) => (
                self.re.dot(&other.re) - a_im.dot(b_im),
                Some(self.re.dot(b_im) + a_im.dot(&other.re)),
            ),
        };
        Ok(OperatorMatrix { re, im, hermitian: false }.recheck())
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Kronecker product `self ⊗ other`; `self` indexes the slow (outer) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let re_re = linalg::kron(&self.re, &other.re);
        let (re, im) = match (&self.im, &other.im) {
            (None, None) => (re_re, None),
            (Some(a), None) => (re_re, Some(linalg::kron(a, &other.re))),
            (None, Some(b)) => (re_re, Some(linalg::kron(&self.re, b))),
            (Some(a), Some(b)) => (
                re_re - linalg::kron(a, b),
                Some(linalg::kron(&self.re, b) + linalg::kron(a, &other.re)),
            ),
        };
        OperatorMatrix { re, im, hermitian: false }.recheck()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            re: self.re.t().to_owned(),
            im: self.im.as_ref().map(|m| -&m.t()),
            hermitian: self.hermitian,
        }
    }

    /// `M x` for a complex vector.
    pub fn apply(&self, x: &Array1<C64>) -> Result<Array1<C64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: x.len() });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Array1<C64>) -> Array1<C64> {
        let xr = x.mapv(|z| z.re);
        let xi = x.mapv(|z| z.im);
        let mut yr = self.re.dot(&xr);
        let mut yi = self.re.dot(&xi);
        if let Some(im) = &self.im {
            yr -= &im.dot(&xi);
            yi += &im.dot(&xr);
        }
        Zip::from(&yr).and(&yi).map_collect(|&r, &i| C64::new(r, i))
    }

    /// ⟨x|M|x⟩
    pub fn expectation(&self, x: &Array1<C64>) -> Result<C64> {
        let y = self.apply(x)?;
        Ok(x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Dense complex copy, used by reference (oracle-grade) paths only.
    pub fn to_complex(&self) -> Array2<C64> {
        match &self.im {
            None => self.re.mapv(|x| C64::new(x, 0.0)),
            Some(im) => Zip::from(&self.re).and(im).map_collect(|&r, &i| C64::new(r, i)),
        }
    }

    /// `Vᵀ M V` for a real orthogonal `V`: matrix elements in the columns of `V`.
    pub fn conjugate_by(&self, v: ArrayView2<'_, f64>) -> Result<Self> {
        if v.nrows() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: v.nrows() });
        }
        let vt = v.t();
        let re = vt.dot(&left_mul(&self.re, v));
        let im = self.im.as_ref().map(|m| vt.dot(&left_mul(m, v)));
        Ok(OperatorMatrix { re, im, hermitian: self.hermitian })
    }

    /// Diagonal entries (real part).
    pub fn diagonal(&self) -> Array1<f64> {
        self.re.diag().to_owned()
    }

    pub fn row_sums_abs(&self) -> Array1<f64> {
        self.re.map_axis(Axis(1), |r| r.iter().map(|x| x.abs()).sum())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// `M V`, row by row over the nonzeros of `M` when it is sparse (a few entries per row).
fn left_mul(m: &Array2<f64>, v: ArrayView2<'_, f64>) -> Array2<f64> {
    let nnz = m.iter().filter(|&&x| x != 0.0).count();
    if nnz > 4 * m.nrows() {
        return m.dot(&v);
    }
    let mut out = Array2::zeros((m.nrows(), v.ncols()));
    for ((i, j), &x) in m.indexed_iter() {
        if x != 0.0 {
            out.row_mut(i).scaled_add(x, &v.row(j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pauli_products() {
        let x = OperatorMatrix::from_real(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let y = OperatorMatrix::from_parts(array![[0.0, 0.0], [0.0, 0.0]], array![[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let z = OperatorMatrix::from_real(array![[1.0, 0.0], [0.0, -1.0]]).unwrap();
        assert!(x.is_hermitian() && y.is_hermitian() && z.is_hermitian());
        // [σx, σy] = 2iσz
        let c = x.commutator(&y).unwrap();
        let expect = z.scale(2.0).times_i();
        assert!(c.sub(&expect).unwrap().max_abs() < 1e-15);
        assert!(!c.is_hermitian());
    }

    #[test]
    fn kron_orders_outer_factor_first() {
        let a = OperatorMatrix::from_real(array![[1.0, 0.0], [0.0, 2.0]]).unwrap();
        let b = OperatorMatrix::from_real(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k.get(2, 3).re, 2.0);
        assert_eq!(k.get(0, 1).re, 1.0);
        assert_eq!(k.get(0, 2).re, 0.0);
    }

    #[test]
    fn rejects_non_square_and_flags_non_hermitian() {
        assert!(OperatorMatrix::from_real(Array2::zeros((2, 3))).is_err());
        let m = OperatorMatrix::from_real(array![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(!m.is_hermitian());
        assert_eq!(m.hermiticity_defect(), 1.0);
    }

    #[test]
    fn apply_matches_dense_complex() {
        let y = OperatorMatrix::from_parts(array![[1.0, 2.0], [2.0, 3.0]], array![[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let x = array![C64::new(0.3, -0.2), C64::new(-1.1, 0.5)];
        let got = y.apply(&x).unwrap();
        let dense = y.to_complex().dot(&x);
        for (a, b) in got.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(y.apply(&array![C64::new(1.0, 0.0)]).is_err());
    }
}
