//! Analytic loss functions with exact gradients.
//!
//! A landscape supplies the potential-energy term of the dynamics. Every
//! shipped landscape is a quadratic `½ wᵀAw` with symmetric positive
//! semi-definite curvature `A`; the identity case is the one used by the
//! reference experiments.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest eigenvalue accepted for a curvature matrix.
pub const PSD_TOLERANCE: f64 = -1e-12;

/// A differentiable scalar field on `R^dim`.
///
/// `value` and `gradient` assume `w.len() == dim()`; the public operations in
/// [`crate::dynamics`] check this before calling them.
pub trait LossLandscape: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, w: &DVector<f64>) -> f64;
    fn gradient(&self, w: &DVector<f64>) -> DVector<f64>;
    /// Short identifier, as accepted by [`from_name`].
    fn name(&self) -> String;
}

#[derive(Clone, Debug, PartialEq)]
enum Curvature {
    Identity(usize),
    Matrix(DMatrix<f64>),
}

/// `L(w) = ½ wᵀAw` with `A` symmetric PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticLandscape {
    curvature: Curvature,
}

impl QuadraticLandscape {
    /// Curvature matrix `A` (materialized for the identity case).
    pub fn matrix(&self) -> DMatrix<f64> {
        match &self.curvature {
            Curvature::Identity(n) => DMatrix::identity(*n, *n),
            Curvature::Matrix(a) => a.clone(),
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.curvature, Curvature::Identity(_))
    }
}

/// `L(w) = ½‖w‖²` on `R^dim`.
pub fn quadratic_isotropic(dim: usize) -> Result<QuadraticLandscape> {
    if dim == 0 {
        return Err(Error::invalid("landscape dimension must be at least 1"));
    }
    Ok(QuadraticLandscape {
        curvature: Curvature::Identity(dim),
    })
}

/// `L(w) = ½ wᵀAw` for an exactly symmetric PSD matrix `A`.
///
/// Symmetry is checked with zero tolerance, so callers holding a nearly
/// symmetric matrix must symmetrize it first.
pub fn quadratic_general(matrix: DMatrix<f64>) -> Result<QuadraticLandscape> {
    let (rows, cols) = matrix.shape();
    if rows == 0 || rows != cols {
        return Err(Error::invalid(format!(
            "curvature must be a non-empty square matrix, got {rows}x{cols}"
        )));
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("curvature has non-finite entries"));
    }
    if matrix != matrix.transpose() {
        return Err(Error::invalid("curvature matrix is not symmetric"));
    }
    let min_eig = SymmetricEigen::new(matrix.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < PSD_TOLERANCE {
        return Err(Error::invalid(format!(
            "curvature is not positive semi-definite (smallest eigenvalue {min_eig:e})"
        )));
    }
    Ok(QuadraticLandscape {
        curvature: Curvature::Matrix(matrix),
    })
}

/// Diagonal curvature `diag(d)`.
pub fn quadratic_diagonal(diag: &[f64]) -> Result<QuadraticLandscape> {
    quadratic_general(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
}

/// Parse a landscape name: `iso1d`, `iso2d`, `iso:<n>` or `diag:<d1,d2,...>`.
pub fn from_name(name: &str) -> Result<QuadraticLandscape> {
    let name = name.trim();
    match name {
        "iso1d" => quadratic_isotropic(1),
        "iso2d" => quadratic_isotropic(2),
        _ => {
            if let Some(n) = name.strip_prefix("iso:") {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad dimension in landscape `{name}`")))?;
                quadratic_isotropic(n)
            } else if let Some(list) = name.strip_prefix("diag:") {
                let diag = list
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::invalid(format!("bad diagonal in landscape `{name}`")))?;
                quadratic_diagonal(&diag)
            } else {
                Err(Error::invalid(format!("unknown landscape `{name}`")))
            }
        }
    }
}

impl LossLandscape for QuadraticLandscape {
    fn dim(&self) -> usize {
        match &self.curvature {
            Curvature::Identity(n) => *n,
            Curvature::Matrix(a) => a.nrows(),
        }
    }

    fn value(&self, w: &DVector<f64>) -> f64 {
        match &self.curvature {
            Curvature::Identity(_) => 0.5 * w.dot(w),
            Curvature::Matrix(a) => 0.5 * w.dot(&(a * w)),
        }
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        match &self.curvature {
            Curvature::Identity(_) => w.clone(),
            Curvature::Matrix(a) => a * w,
        }
    }

    fn name(&self) -> String {
        match &self.curvature {
            Curvature::Identity(1) => "iso1d".into(),
            Curvature::Identity(2) => "iso2d".into(),
            Curvature::Identity(n) => format!("iso:{n}"),
            Curvature::Matrix(a) if is_diagonal(a) => {
                let d: Vec<String> = a.diagonal().iter().map(|x| x.to_string()).collect();
                format!("diag:{}", d.join(","))
            }
            Curvature::Matrix(a) => format!("quadratic:{}x{}", a.nrows(), a.ncols()),
        }
    }
}

fn is_diagonal(a: &DMatrix<f64>) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] == 0.0))
}

/// Largest coordinate-wise discrepancy between the analytic gradient and a
/// central finite difference of `value`, relative to `max(1, |analytic|)`.
pub fn check_gradient(landscape: &dyn LossLandscape, w: &DVector<f64>, fd_step: f64) -> Result<f64> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    if w.len() != landscape.dim() {
        return Err(Error::invalid(format!(
            "point has dimension {}, landscape has {}",
            w.len(),
            landscape.dim()
        )));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("point has non-finite components"));
    }

    let analytic = landscape.gradient(w);
    let mut worst: f64 = 0.0;
    let mut probe = w.clone();
    for i in 0..w.len() {
        probe[i] = w[i] + fd_step;
        let plus = landscape.value(&probe);
        probe[i] = w[i] - fd_step;
        let minus = landscape.value(&probe);
        probe[i] = w[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "loss is not finite near coordinate {i}"
            )));
        }
        let fd = (plus - minus) / (2.0 * fd_step);
        let err = (analytic[i] - fd).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
