use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{zeros, PartitionPolynomial};
use crate::configint::{anchored_all, exact_anchored_f64, SpatialBox, Strategy};
use crate::error::{KsError, Result};
use crate::numeric::{cplx, cplx_f, Xf, C64};
use crate::potential::{Configuration, PairPotential};

pub const NEAR_POLE_TOL: f64 = 1e-10;

/// Which numerator terms are kept at truncation M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NumeratorTruncation {
    /// m <= M - n: at most M particles in total.
    #[default]
    TotalParticles,
    /// m <= M at every level.
    Uniform,
}

impl NumeratorTruncation {
    pub fn k_max(self, m_max: usize, n: usize) -> Option<usize> {
        match self {
            NumeratorTruncation::TotalParticles => m_max.checked_sub(n),
            NumeratorTruncation::Uniform => Some(m_max),
        }
    }
}

/// N(z) = sum_m A_m z^m / m! where A_m is the anchored integral over m free points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationNumerator {
    pub n: usize,
    pub anchor: Configuration,
    pub inside: bool,
    /// A_m / m!.
    pub coeffs: Vec<f64>,
    pub errors: Vec<f64>,
}

impl CorrelationNumerator {
    pub fn evaluate(&self, z: C64) -> (C64, f64) {
        let mut v = C64::new(0.0, 0.0);
        let mut e = 0.0;
        let r = z.norm();
        for (c, err) in self.coeffs.iter().zip(&self.errors).rev() {
            v = v * z + c;
            e = e * r + err;
        }
        (v, e)
    }
}

pub fn correlation_numerator(
    p: &PairPotential,
    bx: &SpatialBox,
    anchor: &Configuration,
    k_max: Option<usize>,
    s: &Strategy,
) -> Result<CorrelationNumerator> {
    if anchor.dimension != bx.dimension() {
        return Err(KsError::InvalidParameter(format!(
            "anchor dimension {} differs from box dimension {}",
            anchor.dimension,
            bx.dimension()
        )));
    }
    let inside = bx.contains_all(anchor);
    let n = anchor.len();
    let Some(k) = k_max.filter(|_| inside) else {
        return Ok(CorrelationNumerator { n, anchor: anchor.clone(), inside, coeffs: vec![], errors: vec![] });
    };
    let exact = if s.prefer.is_none() { exact_anchored_f64(p, bx, anchor, k) } else { None };
    let (vals, errs): (Vec<f64>, Vec<f64>) = match exact {
        Some(v) => (v.clone(), vec![0.0; v.len()]),
        None => anchored_all(p, bx, anchor, k, s)?.iter().map(|a| (a.value_f64(), a.error)).unzip(),
    };
    let mut fact = 1.0;
    let mut coeffs = Vec::with_capacity(vals.len());
    let mut errors = Vec::with_capacity(vals.len());
    for (m, (v, e)) in vals.iter().zip(&errs).enumerate() {
        if m > 0 {
            fact *= m as f64;
        }
        coeffs.push(v / fact);
        errors.push(e / fact);
    }
    Ok(CorrelationNumerator { n, anchor: anchor.clone(), inside, coeffs, errors })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub n: usize,
    pub anchor: Configuration,
    pub z: C64,
    pub value: C64,
    #[serde(rename = "M")]
    pub m_max: usize,
    pub error: f64,
}

/// rho(z; x_1..x_n) = chi(x) z^n N(z) / Xi(z).
pub fn correlation(
    p: &PairPotential,
    bx: &SpatialBox,
    poly: &PartitionPolynomial,
    z: C64,
    anchor: &Configuration,
    truncation: NumeratorTruncation,
    s: &Strategy,
) -> Result<CorrelationValue> {
    let n = anchor.len();
    let num = correlation_numerator(p, bx, anchor, truncation.k_max(poly.m_max, n), s)?;
    let zero = CorrelationValue {
        n,
        anchor: anchor.clone(),
        z,
        value: C64::new(0.0, 0.0),
        m_max: poly.m_max,
        error: 0.0,
    };
    if !num.inside {
        return Ok(zero);
    }
    let ev = poly.evaluate(z);
    if ev.value.norm() <= NEAR_POLE_TOL * ev.scale {
        let zc = zeros(poly)
            .ok()
            .and_then(|zs| {
                zs.zeros
                    .iter()
                    .map(|w| w.z)
                    .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
            })
            .unwrap_or(z);
        return Err(KsError::NearPole { z, zc });
    }
    if num.coeffs.is_empty() {
        return Ok(zero);
    }
    let (nv, ne) = num.evaluate(z);
    let zn = z.powu(n as u32);
    let value = zn * nv / ev.value;
    let r = z.norm();
    let xi_err: f64 = poly.coeff_errors.iter().rev().fold(0.0, |acc, e| acc * r + e);
    let xi_abs = ev.value.norm();
    let error = zn.norm() * ne / xi_abs + value.norm() * xi_err / xi_abs;
    Ok(CorrelationValue { value, error, ..zero })
}

/// z Xi'(z) / Xi(z), the integral of rho_1 over the box.
pub fn mean_particle_number(poly: &PartitionPolynomial, z: C64) -> C64 {
    let (v, d, _) = poly.evaluate_t::<Xf>(cplx(z));
    let zz: Complex<Xf> = cplx(z);
    cplx_f(zz * d / v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configint::{build_table, IntegralTable};
    use crate::numeric::factorial_f64;

    #[test]
    fn ideal_one_point() {
        let bx = SpatialBox::interval(1.0);
        let m = 6;
        let poly = PartitionPolynomial::assemble(&IntegralTable::ideal(&bx, m), None);
        let p = PairPotential::ideal();
        let z = C64::new(0.7, 0.0);
        let a = Configuration::line(&[0.3]);
        let rho = correlation(&p, &bx, &poly, z, &a, NumeratorTruncation::TotalParticles, &Strategy::default()).unwrap();
        let xi = |k: usize| (0..=k).map(|j| 0.7f64.powi(j as i32) / factorial_f64(j)).sum::<f64>();
        let expect = 0.7 * xi(m - 1) / xi(m);
        assert!((rho.value.re - expect).abs() < 1e-15);
        let uni = correlation(&p, &bx, &poly, z, &a, NumeratorTruncation::Uniform, &Strategy::default()).unwrap();
        assert!((uni.value.re - 0.7).abs() < 1e-15);
        let out = Configuration::line(&[1.5]);
        let r = correlation(&p, &bx, &poly, z, &out, NumeratorTruncation::TotalParticles, &Strategy::default()).unwrap();
        assert_eq!(r.value, C64::new(0.0, 0.0));
    }

    #[test]
    fn near_pole_reports_zero() {
        let bx = SpatialBox::interval(1.0);
        let poly = PartitionPolynomial::from_coeffs(&[1.0, 1.0]);
        let a = Configuration::line(&[0.5]);
        let err = correlation(
            &PairPotential::ideal(),
            &bx,
            &poly,
            C64::new(-1.0, 0.0),
            &a,
            NumeratorTruncation::Uniform,
            &Strategy::default(),
        )
        .unwrap_err();
        match err {
            KsError::NearPole { zc, .. } => assert!((zc + 1.0).norm() < 1e-14),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn tonks_sum_rule() {
        let p = PairPotential::hard_core(1.0);
        let bx = SpatialBox::interval(5.0);
        let t = build_table(&p, &bx, 6, &Strategy::default(), None).unwrap();
        let poly = PartitionPolynomial::assemble(&t, None);
        let z = C64::new(0.2, 0.0);
        let rule = crate::configint::quadrature::gauss_rule(16);
        let mut total = 0.0;
        for panel in 0..10 {
            let (lo, hi) = (panel as f64 * 0.5, (panel + 1) as f64 * 0.5);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let xx = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                let a = Configuration::line(&[xx]);
                let r = correlation(&p, &bx, &poly, z, &a, NumeratorTruncation::TotalParticles, &Strategy::default())
                    .unwrap();
                total += 0.5 * (hi - lo) * w * r.value.re;
            }
        }
        let expect = mean_particle_number(&poly, z).re;
        assert!((total - expect).abs() < 1e-12 * expect, "{total} vs {expect}");
    }
}
