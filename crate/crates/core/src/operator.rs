// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex operators: Hermitian observables, density matrices and
//! spectral calculus.
//!
//! Every operator is stored as a dense `nalgebra::DMatrix<Complex64>`.
//! [`Hermitian`] and [`DensityMatrix`] are validated newtypes; once built
//! they are immutable, so they can be shared freely across threads.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// `[a, b] = ab - ba`
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `{a, b} = ab + ba`
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// `tr(ab)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn square_dim(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Empty);
    }
    Ok(m.nrows())
}

pub(crate) fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Validated square complex matrix: nonzero dimension, finite entries.
pub fn check_operator(m: &CMatrix) -> Result<usize> {
    let dim = square_dim(m)?;
    check_finite(m)?;
    Ok(dim)
}

pub(crate) fn same_dim(context: &'static str, expected: usize, m: &CMatrix) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::dim(context, expected, m.nrows().max(m.ncols())));
    }
    Ok(())
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A square Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Accepts `m` if `max|M - M^dag| <= 1e-12 * max(1, max|M|)`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_operator(&m)?;
        let defect = hermiticity_defect(&m);
        if defect > tolerance::HERMITICITY * max_abs(&m).max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self(m))
    }

    /// Wraps without validation; callers guarantee Hermiticity.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0)));
        Self(CMatrix::from_diagonal(&v))
    }

    /// Builds from row-major `(re, im)` pairs and validates.
    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        Self::new(matrix_from_pairs(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn square(&self) -> Self {
        hermitize_unchecked(&self.0 * &self.0)
    }

    /// `|| A ||_F`
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &rhs.0)
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &Hermitian {
    type Output = Hermitian;
    fn mul(self, rhs: f64) -> Hermitian {
        self.scale(rhs)
    }
}

pub(crate) fn hermitize_unchecked(m: CMatrix) -> Hermitian {
    let adj = m.adjoint();
    Hermitian((m + adj).map(|z| z * 0.5))
}

/// `(M + M^dag) / 2`.
pub fn hermitize(m: &CMatrix) -> Result<Hermitian> {
    check_operator(m)?;
    Ok(hermitize_unchecked(m.clone()))
}

/// Row-major `(re, im)` pairs to a matrix. Rows must all have equal length.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::dim("matrix row", cols, bad.len()));
    }
    let m = CMatrix::from_fn(n, cols, |i, j| c(rows[i][j][0], rows[i][j][1]));
    check_operator(&m)?;
    Ok(m)
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Eigen-decomposition `M = U diag(lambda) U^dag`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(f(lambda)) U^dag`
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }

    /// `|| U^dag U - I ||_F`
    pub fn unitarity_defect(&self) -> f64 {
        let u = &self.eigenvectors;
        (u.adjoint() * u - identity(self.dim())).norm()
    }
}

pub fn spectral_decompose(h: &Hermitian) -> Result<SpectralDecomposition> {
    let dim = h.dim();
    let max_iter = 1000 * dim.max(4);
    let eig =
        SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, max_iter).ok_or(Error::Convergence {
            dim,
            norm: h.norm(),
        })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

pub fn eigenvalues(h: &Hermitian) -> Result<Vec<f64>> {
    Ok(spectral_decompose(h)?.eigenvalues)
}

/// `U diag(f(lambda)) U^dag` for a real function of the spectrum.
pub fn matrix_function(h: &Hermitian, f: impl Fn(f64) -> f64) -> Result<Hermitian> {
    let spec = spectral_decompose(h)?;
    let mut bad = None;
    let m = spec.map(|x| {
        let y = f(x);
        if !y.is_finite() {
            bad.get_or_insert(x);
        }
        y
    });
    if let Some(x) = bad {
        return Err(Error::Domain(format!(
            "function is undefined at eigenvalue {x:e}"
        )));
    }
    Ok(hermitize_unchecked(m))
}

/// Clips eigenvalues in `[-floor, 0)` to zero; anything lower is an error.
pub fn clip_spectrum(eigenvalues: &[f64], floor: f64) -> Result<Vec<f64>> {
    eigenvalues
        .iter()
        .map(|&x| {
            if x >= 0.0 {
                Ok(x)
            } else if x >= -floor {
                Ok(0.0)
            } else {
                Err(Error::NegativeEigenvalue { value: x, floor })
            }
        })
        .collect()
}

/// Diagnostics against the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityDiagnostics {
    pub square: bool,
    pub hermiticity_defect: f64,
    pub trace: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub hermitian_ok: bool,
    pub trace_ok: bool,
    pub psd_ok: bool,
}

impl DensityDiagnostics {
    pub fn passed(&self) -> bool {
        self.square && self.hermitian_ok && self.trace_ok && self.psd_ok
    }
}

pub fn validate_density(m: &CMatrix) -> DensityDiagnostics {
    validate_density_with(m, tolerance::STRUCTURAL)
}

/// As [`validate_density`] with a custom trace / PSD tolerance.
pub fn validate_density_with(m: &CMatrix, tol: f64) -> DensityDiagnostics {
    if m.nrows() != m.ncols() || m.nrows() == 0 || check_finite(m).is_err() {
        return DensityDiagnostics {
            square: m.nrows() == m.ncols() && m.nrows() > 0,
            hermiticity_defect: f64::NAN,
            trace: f64::NAN,
            trace_defect: f64::NAN,
            min_eigenvalue: f64::NAN,
            hermitian_ok: false,
            trace_ok: false,
            psd_ok: false,
        };
    }
    let defect = hermiticity_defect(m);
    let hermitian_ok = defect <= tolerance::HERMITICITY * max_abs(m).max(1.0);
    let tr = m.trace();
    let trace_defect = (tr - c(1.0, 0.0)).norm();
    let min_eigenvalue = spectral_decompose(&hermitize_unchecked(m.clone()))
        .map(|s| s.eigenvalues[0])
        .unwrap_or(f64::NAN);
    DensityDiagnostics {
        square: true,
        hermiticity_defect: defect,
        trace: tr.re,
        trace_defect,
        min_eigenvalue,
        hermitian_ok,
        trace_ok: trace_defect <= tol,
        psd_ok: min_eigenvalue >= -tol,
    }
}

/// Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Hermitian);

impl DensityMatrix {
    /// Validates at the structural tolerance.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, tolerance::STRUCTURAL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        check_operator(&m)?;
        let d = validate_density_with(&m, tol);
        if !d.hermitian_ok {
            return Err(Error::NotHermitian {
                defect: d.hermiticity_defect,
            });
        }
        if !d.trace_ok {
            return Err(Error::InvalidState(format!(
                "trace {} differs from 1 by {:e}",
                d.trace, d.trace_defect
            )));
        }
        if !d.psd_ok {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {:e} is negative",
                d.min_eigenvalue
            )));
        }
        Ok(Self(hermitize_unchecked(m)))
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self(Hermitian(m))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(Hermitian(identity(dim).map(|z| z / dim as f64)))
    }

    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::Empty);
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > tolerance::UNIT_NORM.max(1e-10) {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(Self(hermitize_unchecked(psi * psi.adjoint())))
    }

    /// Basis state `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::dim("basis index", dim, k));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0, 0.0);
        Ok(Self(Hermitian(m)))
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(Hermitian::from_real_diagonal(probabilities).into_inner())
    }

    /// Clips negative eigenvalues to zero and renormalizes the trace.
    /// Returns the projected state and the most negative eigenvalue seen.
    pub fn project(m: &CMatrix) -> Result<(Self, f64)> {
        let h = hermitize(m)?;
        let spec = spectral_decompose(&h)?;
        let min = spec.eigenvalues[0];
        let clipped = spec.map(|x| x.max(0.0));
        let tr = clipped.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(
                "projection left no positive weight".into(),
            ));
        }
        Ok((Self(hermitize_unchecked(clipped.map(|z| z / tr))), min))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0 .0
    }

    pub fn as_hermitian(&self) -> &Hermitian {
        &self.0
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        eigenvalues(&self.0)
    }
}

/// `Re tr(Q rho)`.
pub fn expectation(rho: &DensityMatrix, q: &Hermitian) -> Result<f64> {
    same_dim("expectation", rho.dim(), q.matrix())?;
    let value = trace_product(q.matrix(), rho.matrix());
    debug_assert!(value.im.abs() <= tolerance::STRUCTURAL * value.re.abs().max(1.0));
    Ok(value.re)
}

/// Pauli matrices and a few fixed qubit operators.
pub mod pauli {
    use super::{c, CMatrix, Hermitian};

    pub fn x() -> Hermitian {
        Hermitian::new_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ))
    }

    pub fn y() -> Hermitian {
        Hermitian::new_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        ))
    }

    pub fn z() -> Hermitian {
        Hermitian::from_real_diagonal(&[1.0, -1.0])
    }

    /// `|0><1|`
    pub fn lowering() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &CMatrix, b: &CMatrix, tol: f64) {
        let d = (a - b).norm();
        assert!(d <= tol, "matrices differ by {d:e}\n{a}\n{b}");
    }

    #[test]
    fn hermitize_examples() {
        let id = identity(2);
        assert_eq!(hermitize(&id).unwrap().matrix(), &id);

        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let h = hermitize(&m).unwrap();
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0.5, 0.), c(0.5, 0.), c(0., 0.)]);
        assert_eq!(h.matrix(), &expected);
    }

    #[test]
    fn hermitize_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(hermitize(&m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let m = pauli::lowering();
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn spectral_examples() {
        let z = spectral_decompose(&pauli::z()).unwrap();
        assert_eq!(z.eigenvalues, vec![-1.0, 1.0]);

        let id = spectral_decompose(&Hermitian::identity(3)).unwrap();
        for v in id.eigenvalues {
            assert!((v - 1.0).abs() < 1e-14);
        }

        // det(sigma_x - l I) = l^2 - 1
        let x = spectral_decompose(&pauli::x()).unwrap();
        assert!((x.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((x.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert_close(&x.reconstruct(), pauli::x().matrix(), 1e-14);
        assert!(x.unitarity_defect() < 1e-14);
    }

    #[test]
    fn expectation_examples() {
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(expectation(&mixed, &pauli::z()).unwrap(), 0.0);
        let zero = DensityMatrix::basis(2, 0).unwrap();
        assert_eq!(expectation(&zero, &pauli::z()).unwrap(), 1.0);
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert!((expectation(&rho, &pauli::z()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            expectation(&rho, &pauli::z()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn matrix_function_examples() {
        let x = pauli::x();
        assert_close(
            matrix_function(&x, |v| v).unwrap().matrix(),
            x.matrix(),
            1e-10,
        );
        assert_close(
            matrix_function(&x, |v| v * v).unwrap().matrix(),
            &identity(2),
            1e-14,
        );
        let d = Hermitian::from_real_diagonal(&[4.0, 9.0]);
        assert_close(
            matrix_function(&d, f64::sqrt).unwrap().matrix(),
            Hermitian::from_real_diagonal(&[2.0, 3.0]).matrix(),
            1e-14,
        );
    }

    #[test]
    fn matrix_function_domain_error() {
        let d = Hermitian::from_real_diagonal(&[-1.0, 1.0]);
        assert!(matches!(
            matrix_function(&d, f64::ln),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn validate_density_examples() {
        let ok = validate_density(DensityMatrix::maximally_mixed(2).matrix());
        assert!(ok.passed());
        assert!((ok.min_eigenvalue - 0.5).abs() < 1e-15);

        let neg = validate_density(Hermitian::from_real_diagonal(&[1.5, -0.5]).matrix());
        assert!(!neg.psd_ok && neg.trace_ok);
        assert!((neg.min_eigenvalue + 0.5).abs() < 1e-15);

        let heavy = validate_density(Hermitian::from_real_diagonal(&[0.6, 0.6]).matrix());
        assert!(!heavy.trace_ok && heavy.psd_ok);
        assert!((heavy.trace - 1.2).abs() < 1e-15);

        assert!(!validate_density(&CMatrix::zeros(2, 3)).passed());
    }

    #[test]
    fn clipping_policy() {
        assert_eq!(
            clip_spectrum(&[-5e-11, 0.5], 1e-10).unwrap(),
            vec![0.0, 0.5]
        );
        assert!(matches!(
            clip_spectrum(&[-1e-9, 1.0], 1e-10),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn project_restores_positivity() {
        let m = Hermitian::from_real_diagonal(&[1.02, -0.02]).into_inner();
        let (rho, min) = DensityMatrix::project(&m).unwrap();
        assert!((min + 0.02).abs() < 1e-15);
        assert!(validate_density(rho.matrix()).passed());
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }
}
