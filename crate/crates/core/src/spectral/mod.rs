//! Spectrum of the KS operator, Riesz projection and Laurent data of the resolvent,
//! power convergence and near-pole asymptotics.

pub mod asymptotics;
pub mod laurent;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::ksop::KSMatrix;
use crate::numeric::poly::{aberth, conjugate_symmetrize, real_eigenvalues, relative_residual};
use crate::numeric::{cplx, vec_norm, xf_join, xf_split, CMatrix, Real, Xf, XfParts, C64};

pub use asymptotics::{
    coefficient_asymptotics, leading_asymptotics, ray_limit, AsymptoticsProbe, CoefficientReport, PacmanParams,
    RaySample,
};
pub use laurent::{nilpotent_and_pole, power_convergence, riesz_projection, Defects, LaurentData, PowerConvergence};

/// Relative modulus gap below which the two leading eigenvalues are a tie.
pub const TIE_TOL: f64 = 1e-9;
/// Relative distance within which eigenvalues are treated as one spectral point.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Relative distance to an eigenvalue below which the resolvent is refused.
pub const RESOLVENT_TOL: f64 = 1e-12;

/// A finite matrix realization of the operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    Companion(KSMatrix),
    Dense(CMatrix<f64>),
}

impl Operator {
    pub fn dense_real(rows: &[Vec<f64>]) -> Self {
        Operator::Dense(CMatrix::from_real_rows(rows))
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Companion(k) => k.dim(),
            Operator::Dense(a) => a.dim(),
        }
    }

    pub fn to_dense<T: Real>(&self) -> CMatrix<T> {
        match self {
            Operator::Companion(k) => k.to_dense(),
            Operator::Dense(a) => CMatrix::from_c64(a),
        }
    }

    /// K A.
    pub fn mul_left<T: Real>(&self, a: &CMatrix<T>) -> CMatrix<T> {
        match self {
            Operator::Companion(k) => k.mul_left(a),
            Operator::Dense(d) => CMatrix::<T>::from_c64(d).matmul(a),
        }
    }

    /// A K.
    pub fn mul_right<T: Real>(&self, a: &CMatrix<T>) -> CMatrix<T> {
        match self {
            Operator::Companion(k) => k.mul_right(a),
            Operator::Dense(d) => a.matmul(&CMatrix::from_c64(d)),
        }
    }

    pub fn apply<T: Real>(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        match self {
            Operator::Companion(k) => k.apply(v),
            Operator::Dense(d) => CMatrix::<T>::from_c64(d).matvec(v),
        }
    }

    /// (K - lambda)^{-1} as a dense matrix.
    pub fn resolvent_matrix<T: Real>(&self, lambda: Complex<T>) -> Option<CMatrix<T>> {
        match self {
            Operator::Companion(k) => {
                let m = k.dim();
                let mut r = CMatrix::zeros(m);
                let mut e = vec![Complex::<T>::zero(); m];
                for j in 0..m {
                    e[j] = Complex::new(T::one(), T::zero());
                    let col = k.solve_shifted(lambda, &e)?;
                    e[j] = Complex::zero();
                    for i in 0..m {
                        r[(i, j)] = col[i];
                    }
                }
                Some(r)
            }
            Operator::Dense(d) => Some(CMatrix::<T>::from_c64(d).shift(lambda).lu()?.inverse()),
        }
    }

    pub fn solve_shifted<T: Real>(&self, lambda: Complex<T>, b: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
        match self {
            Operator::Companion(k) => k.solve_shifted(lambda, b),
            Operator::Dense(d) => Some(CMatrix::<T>::from_c64(d).shift(lambda).lu()?.solve(b)),
        }
    }

    pub fn norm1(&self) -> f64 {
        match self {
            Operator::Companion(k) => k.norm1(),
            Operator::Dense(d) => d.norm1(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Eigenvalues ordered by decreasing modulus.
    pub eigenvalues: Vec<C64>,
    /// Unpolished eigenvalues of the balanced matrix, same order.
    pub raw_eigenvalues: Vec<C64>,
    pub lambda_c: C64,
    /// lambda_c as unevaluated sums (re hi, re lo, im hi, im lo).
    pub lambda_c_parts: [XfParts; 2],
    /// Eigenvalue of largest modulus outside the lambda_c cluster.
    pub lambda_2: Option<C64>,
    /// |lambda_2| / |lambda_c|.
    pub margin: f64,
    pub spectral_radius: f64,
    /// Number of computed eigenvalues in the lambda_c cluster.
    pub multiplicity: usize,
    /// Another spectral point shares the leading modulus.
    pub tie: bool,
    /// Relative characteristic-polynomial residual of each eigenvalue (companion only).
    pub residuals: Vec<f64>,
}

impl SpectralReport {
    pub fn lambda_c_t<T: Real>(&self) -> Complex<T> {
        let [re, im] = self.lambda_c_parts;
        Complex::new(T::of_xf(xf_join(re)), T::of_xf(xf_join(im)))
    }

    /// Indices of eigenvalues in the lambda_c cluster.
    pub fn cluster(&self) -> Vec<usize> {
        let lc = self.lambda_c;
        let tol = CLUSTER_TOL * lc.norm().max(f64::MIN_POSITIVE);
        (0..self.eigenvalues.len()).filter(|&i| (self.eigenvalues[i] - lc).norm() <= tol).collect()
    }

    /// Distance from lambda_c to the nearest eigenvalue outside its cluster.
    pub fn isolation(&self) -> Option<f64> {
        let cl = self.cluster();
        (0..self.eigenvalues.len())
            .filter(|i| !cl.contains(i))
            .map(|i| (self.eigenvalues[i] - self.lambda_c).norm())
            .min_by(f64::total_cmp)
    }
}

fn complex_eigenvalues(a: &CMatrix<f64>) -> Option<Vec<C64>> {
    let n = a.dim();
    if n == 0 {
        return Some(vec![]);
    }
    let real = (0..n).all(|i| (0..n).all(|j| a[(i, j)].im == 0.0));
    if real {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)].re).collect()).collect();
        return real_eigenvalues(&rows);
    }
    let m = DMatrix::from_fn(n, n, |i, j| a[(i, j)]);
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)?;
    schur.eigenvalues().map(|v| v.iter().copied().collect())
}

/// Ascending coefficients of lambda^M + sum_m c_m lambda^{M-m}.
fn characteristic_coeffs<T: Real>(k: &KSMatrix) -> Vec<T> {
    let row = k.row_t::<T>();
    let m = k.dim();
    let mut c = vec![T::zero(); m + 1];
    c[m] = T::one();
    for (j, r) in row.iter().enumerate() {
        c[m - 1 - j] = -r.re;
    }
    c
}

/// Eigenvalues of the companion matrix: Schur on the activity-scaled, balanced matrix,
/// then simultaneous polishing on the characteristic polynomial.
fn companion_eigenvalues(k: &KSMatrix) -> Result<(Vec<C64>, Vec<Complex<Xf>>, Vec<f64>)> {
    let s = if k.scale > 0.0 && k.scale.is_finite() { k.scale } else { 1.0 };
    let row = k.row_f64();
    let m = k.dim();
    let mut rows = k.rows_f64();
    let mut sp = 1.0;
    for j in 0..m {
        sp *= s;
        rows[0][j] = row[j] * sp;
    }
    let raw: Vec<C64> = real_eigenvalues(&rows)
        .ok_or_else(|| KsError::Degenerate(format!("Schur iteration failed for the {m}x{m} KS matrix")))?
        .into_iter()
        .map(|mu| mu / s)
        .collect();
    let c64 = characteristic_coeffs::<f64>(k);
    let (mid, _) = aberth(&c64, &raw, 500);
    let mid: Vec<C64> = mid
        .iter()
        .zip(&raw)
        .map(|(a, b)| if a.re.is_finite() && a.im.is_finite() { *a } else { *b })
        .collect();
    let cx = characteristic_coeffs::<Xf>(k);
    let (mut ext, _) = aberth(&cx, &mid, 100);
    conjugate_symmetrize(&mut ext, 1e-30);
    let residuals = ext
        .iter()
        .map(|l| relative_residual(&cx, *l))
        .collect();
    Ok((raw, ext, residuals))
}

fn order_by_modulus(v: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let key = |w: &C64| (w.im == 0.0 && w.re < 0.0, w.im);
    idx.sort_by(|&a, &b| {
        let (ma, mb) = (v[a].norm(), v[b].norm());
        if (ma - mb).abs() <= TIE_TOL * ma.max(mb) {
            let (ka, kb) = (key(&v[a]), key(&v[b]));
            kb.0.cmp(&ka.0).then(ka.1.total_cmp(&kb.1))
        } else {
            mb.total_cmp(&ma)
        }
    });
    idx
}

pub fn spectrum(op: &Operator) -> Result<SpectralReport> {
    let (raw, ext, residuals) = match op {
        Operator::Companion(k) => companion_eigenvalues(k)?,
        Operator::Dense(a) => {
            let ev = complex_eigenvalues(a)
                .ok_or_else(|| KsError::Degenerate("Schur iteration failed for dense operator".into()))?;
            let ext = ev.iter().map(|l| cplx::<Xf>(*l)).collect();
            let n = ev.len();
            (ev, ext, vec![0.0; n])
        }
    };
    if raw.is_empty() {
        return Err(KsError::InvalidParameter("operator has dimension zero".into()));
    }
    let polished: Vec<C64> = ext.iter().map(|l| Complex::new(l.re.to_f(), l.im.to_f())).collect();
    let order = order_by_modulus(&polished);
    let eigenvalues: Vec<C64> = order.iter().map(|&i| polished[i]).collect();
    let raw_eigenvalues: Vec<C64> = order.iter().map(|&i| raw[i]).collect();
    let residuals: Vec<f64> = order.iter().map(|&i| residuals[i]).collect();
    let lc_ext = ext[order[0]];
    let lambda_c = eigenvalues[0];
    let mut report = SpectralReport {
        spectral_radius: lambda_c.norm(),
        eigenvalues,
        raw_eigenvalues,
        lambda_c,
        lambda_c_parts: [xf_split(lc_ext.re), xf_split(lc_ext.im)],
        lambda_2: None,
        margin: 0.0,
        multiplicity: 1,
        tie: false,
        residuals,
    };
    let cluster = report.cluster();
    report.multiplicity = cluster.len();
    report.lambda_2 = (0..report.eigenvalues.len()).find(|i| !cluster.contains(i)).map(|i| report.eigenvalues[i]);
    if let Some(l2) = report.lambda_2 {
        report.margin = if lambda_c.norm() > 0.0 { l2.norm() / lambda_c.norm() } else { 0.0 };
        report.tie = (lambda_c.norm() - l2.norm()).abs() <= TIE_TOL * lambda_c.norm();
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventResult {
    pub x: Vec<C64>,
    /// ||(K - lambda) x - v|| / ||v||.
    pub residual: f64,
}

/// Solves (K - lambda) x = v.
pub fn resolvent_apply(op: &Operator, lambda: C64, v: &[C64]) -> Result<ResolventResult> {
    if v.len() != op.dim() {
        return Err(KsError::InvalidParameter(format!("vector length {} differs from dimension {}", v.len(), op.dim())));
    }
    let ev = spectrum(op)?.eigenvalues;
    if let Some(closest) = ev.iter().copied().min_by(|a, b| (a - lambda).norm().total_cmp(&(b - lambda).norm())) {
        if (closest - lambda).norm() <= RESOLVENT_TOL * closest.norm().max(1.0) {
            return Err(KsError::NearEigenvalue { lambda, closest });
        }
    }
    let x = op
        .solve_shifted(lambda, v)
        .ok_or(KsError::NearEigenvalue { lambda, closest: lambda })?;
    let kx = op.apply(&x);
    let r: Vec<C64> = kx.iter().zip(&x).zip(v).map(|((a, b), c)| a - lambda * b - c).collect();
    let residual = vec_norm(&r) / vec_norm(v).max(f64::MIN_POSITIVE);
    Ok(ResolventResult { x, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusCheck {
    pub spectral_radius: f64,
    pub xi: f64,
    pub xi_inverse: f64,
    /// r <= 1 / xi.
    pub holds: bool,
}

/// Records r(K) against 1 / xi; reported, never asserted.
pub fn spectral_radius_check(report: &SpectralReport, xi: f64) -> RadiusCheck {
    let xi_inverse = 1.0 / xi;
    RadiusCheck { spectral_radius: report.spectral_radius, xi, xi_inverse, holds: report.spectral_radius <= xi_inverse }
}
