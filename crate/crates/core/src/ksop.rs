//! The Kirkwood-Salsburg operator: exact companion realization on coefficient space
//! and the function-space operator used to check the KS equations.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configint::quadrature::{integrate, Integrand};
use crate::configint::{build_table, exact_anchored_f64, exact_available, SpatialBox, Strategy};
use crate::error::{KsError, Result};
use crate::numeric::poly::real_eigenvalues;
use crate::numeric::{cabs, xf_join, CMatrix, Real, XfParts, C64};
use crate::partition::{correlation, NumeratorTruncation, PartitionPolynomial};
use crate::potential::{distance, Configuration, Family, PairPotential};

/// Companion matrix with first row (-c_1, ..., -c_M) and ones on the subdiagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSMatrix {
    #[serde(rename = "M")]
    pub m_max: usize,
    /// Entries -c_m as hi + lo pairs.
    pub first_row: Vec<XfParts>,
    pub scale: f64,
    pub fingerprint: String,
    /// Largest relative value of lambda^M Xi(1/lambda) at the f64 eigenvalues.
    pub char_residual: f64,
}

pub fn build_ks_matrix(poly: &PartitionPolynomial) -> Result<KSMatrix> {
    if poly.m_max == 0 {
        return Err(KsError::InvalidParameter("KS matrix needs M >= 1".into()));
    }
    let first_row = poly.coeffs[1..].iter().map(|c| c.map(|x| -x)).collect();
    let mut k = KSMatrix {
        m_max: poly.m_max,
        first_row,
        scale: poly.scale,
        fingerprint: poly.fingerprint.clone(),
        char_residual: 0.0,
    };
    k.char_residual = k.characteristic_check();
    Ok(k)
}

impl KSMatrix {
    pub fn dim(&self) -> usize {
        self.m_max
    }

    pub fn row_t<T: Real>(&self) -> Vec<Complex<T>> {
        self.first_row.iter().map(|r| Complex::new(T::of_xf(xf_join(*r)), T::zero())).collect()
    }

    pub fn row_f64(&self) -> Vec<f64> {
        self.first_row.iter().map(|r| r[0] + r[1] + r[2]).collect()
    }

    pub fn to_dense<T: Real>(&self) -> CMatrix<T> {
        let row = self.row_t::<T>();
        CMatrix::from_fn(self.m_max, |i, j| {
            if i == 0 {
                row[j]
            } else if j + 1 == i {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::zero()
            }
        })
    }

    pub fn rows_f64(&self) -> Vec<Vec<f64>> {
        let row = self.row_f64();
        (0..self.m_max)
            .map(|i| {
                (0..self.m_max)
                    .map(|j| if i == 0 { row[j] } else if j + 1 == i { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// K v.
    pub fn apply<T: Real>(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let row = self.row_t::<T>();
        let mut out = Vec::with_capacity(v.len());
        out.push(row.iter().zip(v).fold(Complex::zero(), |acc, (r, x)| acc + *r * *x));
        out.extend_from_slice(&v[..v.len() - 1]);
        out
    }

    /// u^T K.
    pub fn apply_left<T: Real>(&self, u: &[Complex<T>]) -> Vec<Complex<T>> {
        let row = self.row_t::<T>();
        let m = u.len();
        (0..m).map(|j| u[0] * row[j] + if j + 1 < m { u[j + 1] } else { Complex::zero() }).collect()
    }

    /// K A for a dense A in O(M^2).
    pub fn mul_left<T: Real>(&self, a: &CMatrix<T>) -> CMatrix<T> {
        let m = self.m_max;
        let row = self.row_t::<T>();
        let mut top = vec![Complex::<T>::zero(); m];
        for k in 0..m {
            if row[k].is_zero() {
                continue;
            }
            for (j, t) in top.iter_mut().enumerate() {
                *t = *t + row[k] * a[(k, j)];
            }
        }
        CMatrix::from_fn(m, |i, j| if i == 0 { top[j] } else { a[(i - 1, j)] })
    }

    /// A K for a dense A in O(M^2).
    pub fn mul_right<T: Real>(&self, a: &CMatrix<T>) -> CMatrix<T> {
        let m = self.m_max;
        let row = self.row_t::<T>();
        CMatrix::from_fn(m, |i, j| a[(i, 0)] * row[j] + if j + 1 < m { a[(i, j + 1)] } else { Complex::zero() })
    }

    /// Solves (K - lambda) x = b by substitution along the shift chain; `None` at an eigenvalue.
    pub fn solve_shifted<T: Real>(&self, lambda: Complex<T>, b: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
        let m = self.m_max;
        let row = self.row_t::<T>();
        let mut p = vec![Complex::<T>::zero(); m];
        let mut q = vec![Complex::<T>::zero(); m];
        if cabs(lambda) >= 1.0 {
            // x_0 = t, x_i = (x_{i-1} - b_i) / lambda
            let inv = Complex::new(T::one(), T::zero()) / lambda;
            q[0] = Complex::new(T::one(), T::zero());
            for i in 1..m {
                p[i] = (p[i - 1] - b[i]) * inv;
                q[i] = q[i - 1] * inv;
            }
        } else {
            // x_{M-1} = t, x_{i-1} = b_i + lambda x_i
            q[m - 1] = Complex::new(T::one(), T::zero());
            for i in (1..m).rev() {
                p[i - 1] = b[i] + lambda * p[i];
                q[i - 1] = lambda * q[i];
            }
        }
        let mut num = b[0] + lambda * p[0];
        let mut den = -(lambda * q[0]);
        for j in 0..m {
            num = num - row[j] * p[j];
            den = den + row[j] * q[j];
        }
        if den.is_zero() || !cabs(den).is_finite() {
            return None;
        }
        let t = num / den;
        Some((0..m).map(|j| p[j] + q[j] * t).collect())
    }

    /// lambda^M + sum_m c_m lambda^{M-m} = lambda^M Xi(1/lambda).
    pub fn characteristic<T: Real>(&self, lambda: Complex<T>) -> (Complex<T>, f64) {
        let row = self.row_t::<T>();
        let mut v = Complex::new(T::one(), T::zero());
        let mut s = 1.0;
        let r = cabs(lambda);
        for c in &row {
            v = v * lambda - *c;
            s = s * r + cabs(*c);
        }
        (v, s)
    }

    fn characteristic_check(&self) -> f64 {
        match real_eigenvalues(&self.rows_f64()) {
            Some(ev) => ev
                .iter()
                .map(|l| {
                    let (v, s) = self.characteristic::<f64>(*l);
                    if s > 0.0 { v.norm() / s } else { 0.0 }
                })
                .fold(0.0, f64::max),
            None => f64::NAN,
        }
    }

    pub fn norm1(&self) -> f64 {
        let row = self.row_f64();
        (0..self.m_max).map(|j| row[j].abs() + if j + 1 < self.m_max { 1.0 } else { 0.0 }).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Truncated coefficient sequence a_1..a_M with the weight xi of the D_xi norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub entries: Vec<C64>,
    pub xi: f64,
}

impl CoefficientVector {
    /// a_m = z^m.
    pub fn geometric(z: C64, m_max: usize, xi: f64) -> Self {
        CoefficientVector { entries: (1..=m_max).map(|m| z.powu(m as u32)).collect(), xi }
    }
}

/// Uniform probe grid with `g` cell centres per axis over the box, for `n` points.
fn probe_grid(bx: &SpatialBox, n: usize) -> Vec<Configuration> {
    let nu = bx.dimension();
    let dims = n * nu;
    if dims == 0 {
        return vec![Configuration::empty(nu)];
    }
    let g = grid_points(dims);
    let total = g.pow(dims as u32);
    (0..total)
        .map(|mut idx| {
            let mut coords = Vec::with_capacity(dims);
            for d in 0..dims {
                let i = idx % g;
                idx /= g;
                coords.push((i as f64 + 0.5) * bx.extents[d % nu] / g as f64);
            }
            Configuration::new(nu, coords)
        })
        .collect()
}

/// min(64, floor(4096^{1/dims})) points per axis.
pub fn grid_points(dims: usize) -> usize {
    let mut g = (4096f64.powf(1.0 / dims as f64) + 1e-9).floor() as usize;
    while g.pow(dims as u32) > 4096 {
        g -= 1;
    }
    g.clamp(1, 64)
}

/// sup_{m <= M} |a_m| xi^{-m} times the probe-grid sup of e^{-beta U((x)_m)}.
pub fn dxi_norm(a: &CoefficientVector, p: &PairPotential, bx: &SpatialBox, m_max: usize) -> Result<f64> {
    if !(a.xi > 0.0) {
        return Err(KsError::InvalidParameter(format!("xi must be positive, got {}", a.xi)));
    }
    let positive = p.is_positive();
    let mut sup = 0.0f64;
    for (i, am) in a.entries.iter().take(m_max).enumerate() {
        let m = i + 1;
        let weight = if positive {
            1.0
        } else {
            probe_grid(bx, m).iter().map(|c| p.boltzmann_weight(c)).fold(0.0, f64::max)
        };
        sup = sup.max(am.norm() * a.xi.powi(-(m as i32)) * weight);
    }
    Ok(sup)
}

fn check_anchor(p: &PairPotential, bx: &SpatialBox, anchor: &Configuration) -> Result<()> {
    if anchor.dimension != bx.dimension() || p.dimension != bx.dimension() {
        return Err(KsError::InvalidParameter("anchor, potential and box dimensions differ".into()));
    }
    if anchor.is_empty() {
        return Err(KsError::InvalidParameter("anchor must hold at least one point".into()));
    }
    if !bx.contains_all(anchor) {
        return Err(KsError::InvalidParameter("anchor lies outside the box".into()));
    }
    Ok(())
}

/// (K phi)(x)_n truncated at M total particles, with its quadrature error.
///
/// For n = 1 the m = 0 term is absent; the constant 1 belongs to the caller.
pub fn apply_ks_function(
    p: &PairPotential,
    bx: &SpatialBox,
    phi: &(dyn Fn(&Configuration) -> C64 + Sync),
    anchor: &Configuration,
    m_max: usize,
    s: &Strategy,
) -> Result<(C64, f64)> {
    check_anchor(p, bx, anchor)?;
    let n = anchor.len();
    let nu = bx.dimension();
    let x1 = anchor.point(0).to_vec();
    let rest = Configuration::new(nu, anchor.coords[nu..].to_vec());
    let w = p.boltzmann_weight(anchor) / p.boltzmann_weight(&rest).max(f64::MIN_POSITIVE);
    if w == 0.0 || p.boltzmann_weight(&rest) == 0.0 {
        return Ok((C64::zero(), 0.0));
    }
    let mut total = C64::zero();
    let mut err = 0.0;
    if n >= 2 {
        total += phi(&rest);
    }
    let top = m_max.saturating_sub(n);
    let interacting = !matches!(p.family, Family::Ideal);
    for m in 1..=top {
        if !interacting {
            break;
        }
        let feasible = AtomicUsize::new(0);
        let step = |pts: &[f64]| {
            let k = pts.len() / nu - 1;
            let y = &pts[k * nu..];
            let f = p.mayer_f(distance(&x1, y));
            if f == 0.0 {
                return 0.0;
            }
            for i in 0..rest.len() {
                if p.boltzmann(distance(y, rest.point(i))) == 0.0 {
                    return 0.0;
                }
            }
            for j in 0..k {
                if p.boltzmann(distance(y, &pts[j * nu..(j + 1) * nu])) == 0.0 {
                    return 0.0;
                }
            }
            f
        };
        let config = |pts: &[f64]| {
            let mut c = rest.coords.clone();
            c.extend_from_slice(pts);
            Configuration::new(nu, c)
        };
        let tail_re = |pts: &[f64]| {
            feasible.fetch_add(1, Ordering::Relaxed);
            phi(&config(pts)).re
        };
        let fixed: Vec<f64> = if nu == 1 { anchor.coords.clone() } else { Vec::new() };
        let f_re = Integrand { m, step: &step, tail: &tail_re, fixed: &fixed, reach: m.max(1) };
        let (re, e_re) = integrate(p, bx, &f_re, s.order, s.dim_cap)?;
        if feasible.load(Ordering::Relaxed) == 0 {
            break;
        }
        let tail_im = |pts: &[f64]| phi(&config(pts)).im;
        let f_im = Integrand { m, step: &step, tail: &tail_im, fixed: &fixed, reach: m.max(1) };
        let (im, e_im) = if phi(anchor).im == 0.0 && phi(&rest).im == 0.0 {
            (0.0, 0.0)
        } else {
            integrate(p, bx, &f_im, s.order, s.dim_cap)?
        };
        let fact: f64 = (1..=m).map(|k| k as f64).product();
        total += C64::new(re, im) / fact;
        err += (e_re + e_im) / fact;
    }
    Ok((total * w, err * w))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResidual {
    pub n: usize,
    pub anchors: usize,
    pub residual: f64,
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSResidualReport {
    pub z: C64,
    #[serde(rename = "M")]
    pub m_max: usize,
    pub levels: Vec<LevelResidual>,
    pub sup_residual: f64,
    pub sup_error_bound: f64,
}

/// Residual of (I - zK) rho = z alpha for the finite-volume correlation functions,
/// sup over a probe grid of anchors for each level n = 1..n_max.
pub fn ks_residual(
    p: &PairPotential,
    bx: &SpatialBox,
    z: C64,
    m_max: usize,
    n_max: usize,
    s: &Strategy,
) -> Result<KSResidualReport> {
    if n_max == 0 {
        return Err(KsError::InvalidParameter("n_max must be at least 1".into()));
    }
    let table = build_table(p, bx, m_max, s, None)?;
    let poly = PartitionPolynomial::assemble(&table, None);
    let centre = Configuration::new(bx.dimension(), bx.extents.iter().map(|e| 0.5 * e).collect());
    // surfaces NearPole before the sweep
    correlation(p, bx, &poly, z, &centre, NumeratorTruncation::Uniform, s)?;
    let xi = poly.evaluate(z).value;
    let closed_form = s.prefer.is_none() && exact_available(p, bx);
    let rho = |x: &Configuration| -> Result<(C64, f64)> {
        if closed_form {
            if !bx.contains_all(x) {
                return Ok((C64::zero(), 0.0));
            }
            let a = exact_anchored_f64(p, bx, x, m_max).unwrap_or_default();
            let mut fact = 1.0;
            let mut num = C64::zero();
            let mut zm = C64::new(1.0, 0.0);
            for (m, am) in a.iter().enumerate() {
                if m > 0 {
                    fact *= m as f64;
                    zm *= z;
                }
                num += zm * (am / fact);
            }
            return Ok((z.powu(x.len() as u32) * num / xi, 0.0));
        }
        let c = correlation(p, bx, &poly, z, x, NumeratorTruncation::Uniform, s)?;
        Ok((c.value, c.error))
    };
    let phi = |x: &Configuration| rho(x).map(|v| v.0).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let mut levels = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let anchors: Vec<Configuration> =
            probe_grid(bx, n).into_iter().filter(|a| p.boltzmann_weight(a) != 0.0).collect();
        let per: Vec<(f64, f64)> = anchors
            .par_iter()
            .map(|a| -> Result<(f64, f64)> {
                let (lhs, lhs_err) = rho(a)?;
                let (k, k_err) = apply_ks_function(p, bx, &phi, a, m_max, s)?;
                let alpha = if n == 1 { C64::new(1.0, 0.0) } else { C64::zero() };
                let r = (lhs - z * (alpha + k)).norm();
                Ok((r, lhs_err + z.norm() * k_err))
            })
            .collect::<Result<_>>()?;
        let residual = per.iter().map(|r| r.0).fold(0.0, f64::max);
        let error_bound = per.iter().map(|r| r.1).fold(0.0, f64::max);
        levels.push(LevelResidual { n, anchors: anchors.len(), residual, error_bound });
    }
    let sup_residual = levels.iter().map(|l| l.residual).fold(0.0, f64::max);
    let sup_error_bound = levels.iter().map(|l| l.error_bound).fold(0.0, f64::max);
    Ok(KSResidualReport { z, m_max, levels, sup_residual, sup_error_bound })
}
