//! Truncated grand partition function, its zeros, correlation functions and Taylor data.

pub mod correlation;
pub mod taylor;
pub mod zeros;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::configint::IntegralTable;
use crate::numeric::{cplx, cplx_f, xf, xf_join, xf_split, Real, Xf, XfParts, C64};
use crate::numeric::poly::horner;

pub use correlation::{
    correlation, correlation_numerator, mean_particle_number, CorrelationNumerator, CorrelationValue, NumeratorTruncation,
};
pub use taylor::{series_divide, taylor_coefficients, taylor_coefficients_xf};
pub use zeros::{smallest_zero, zeros, SimplicityCertificate, ZeroInfo, ZeroSet};

/// Xi(z) = 1 + sum_{m=1}^{M} c_m z^m with c_m = Z_m / m!.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionPolynomial {
    #[serde(rename = "M")]
    pub m_max: usize,
    #[serde(with = "crate::numeric::logmag::vec")]
    pub log_coeffs: Vec<f64>,
    pub signs: Vec<i8>,
    /// c_m as unevaluated sums hi + lo.
    pub coeffs: Vec<XfParts>,
    pub fingerprint: String,
    /// Activity scale s: zeros are located in w = z / s.
    pub scale: f64,
    /// Zeros beyond the retained degree are absent, not truncated away.
    pub exact: bool,
    /// Absolute error bounds of c_m inherited from the table.
    #[serde(default)]
    pub coeff_errors: Vec<f64>,
}

/// Value of Xi and Xi' at a point with the magnitude scale sum |c_m| |z|^m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: C64,
    pub derivative: C64,
    pub scale: f64,
}

impl PartitionPolynomial {
    /// Builds c_m = Z_m / m! from a table; `scale` defaults to M / Z_1.
    pub fn assemble(table: &IntegralTable, scale: Option<f64>) -> Self {
        let m_max = table.m_max;
        let mut fact = xf(1.0);
        let coeffs: Vec<Xf> = (0..=m_max)
            .map(|m| {
                if m > 0 {
                    fact *= xf(m as f64);
                }
                if m == 0 {
                    xf(1.0)
                } else {
                    table.z_xf(m) / fact
                }
            })
            .collect();
        let z1 = if m_max >= 1 { table.z(1) } else { 0.0 };
        let s = scale.unwrap_or(if z1 > 0.0 { m_max as f64 / z1 } else { 1.0 });
        let exact = table.entries.last().is_some_and(|e| e.sign == 0);
        let mut p = Self::from_xf(&coeffs, &table.fingerprint, s);
        p.exact = exact;
        let mut f = 1.0;
        p.coeff_errors = table
            .entries
            .iter()
            .map(|e| {
                if e.m > 0 {
                    f *= e.m as f64;
                }
                e.error / f
            })
            .collect();
        p
    }

    /// Fixture constructor from ascending coefficients; `coeffs[0]` must be 1.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty() && coeffs[0] == 1.0, "c_0 must be 1");
        let c: Vec<Xf> = coeffs.iter().map(|x| xf(*x)).collect();
        let mut p = Self::from_xf(&c, "fixture", 1.0);
        p.exact = true;
        p
    }

    pub fn from_xf(coeffs: &[Xf], fingerprint: &str, scale: f64) -> Self {
        let vals: Vec<f64> = coeffs.iter().map(|c| c.to_f()).collect();
        PartitionPolynomial {
            m_max: coeffs.len() - 1,
            log_coeffs: vals.iter().map(|v| if *v == 0.0 { f64::NEG_INFINITY } else { v.abs().ln() }).collect(),
            signs: vals.iter().map(|v| if *v > 0.0 { 1 } else if *v < 0.0 { -1 } else { 0 }).collect(),
            coeffs: coeffs.iter().map(|c| xf_split(*c)).collect(),
            fingerprint: fingerprint.to_string(),
            scale,
            exact: false,
            coeff_errors: vec![0.0; coeffs.len()],
        }
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c[0] + c[1] + c[2]).collect()
    }

    pub fn coeffs_t<T: Real>(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| T::of_xf(xf_join(*c))).collect()
    }

    /// Index of the highest nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.signs.iter().rposition(|s| *s != 0).unwrap_or(0)
    }

    /// Partial sum Xi_K (coefficients 0..=K).
    pub fn truncated(&self, k: usize) -> Self {
        let mut p = self.clone();
        let keep = k.min(self.m_max) + 1;
        p.m_max = keep - 1;
        p.log_coeffs.truncate(keep);
        p.signs.truncate(keep);
        p.coeffs.truncate(keep);
        p.coeff_errors.truncate(keep);
        p.exact = p.exact || self.degree() < keep;
        p
    }

    pub fn evaluate(&self, z: C64) -> Evaluation {
        let (v, d, s) = self.evaluate_t::<Xf>(cplx(z));
        Evaluation { value: cplx_f(v), derivative: cplx_f(d), scale: s }
    }

    pub fn evaluate_t<T: Real>(&self, z: Complex<T>) -> (Complex<T>, Complex<T>, f64) {
        horner(&self.coeffs_t::<T>(), z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configint::{build_table, SpatialBox, Strategy};
    use crate::potential::PairPotential;

    #[test]
    fn tonks_coefficients() {
        let t = build_table(&PairPotential::hard_core(1.0), &SpatialBox::interval(5.0), 6, &Strategy::default(), None)
            .unwrap();
        let p = PartitionPolynomial::assemble(&t, None);
        let expect = [1.0, 5.0, 8.0, 4.5, 2.0 / 3.0, 1.0 / 120.0, 0.0];
        for (a, b) in p.coeffs_f64().iter().zip(expect) {
            assert!((a - b).abs() <= 1e-15 * b);
        }
        assert_eq!(p.degree(), 5);
        assert!(p.exact);
        assert!((p.scale - 6.0 / 5.0).abs() < 1e-15);
        for k in 1..40 {
            let z = k as f64 * 0.05;
            assert!(p.evaluate(C64::new(z, 0.0)).value.re > 0.0);
        }
        assert_eq!(p.evaluate(C64::new(0.0, 0.0)).derivative.re, 5.0);
    }

    #[test]
    fn ideal_coefficients_and_empty_table() {
        let t = IntegralTable::ideal(&SpatialBox::interval(1.0), 3);
        let p = PartitionPolynomial::assemble(&t, None);
        let c = p.coeffs_f64();
        assert_eq!(c[0], 1.0);
        assert_eq!(c[1], 1.0);
        assert_eq!(c[2], 0.5);
        assert!((c[3] - 1.0 / 6.0).abs() < 1e-17);
        assert_eq!(p.evaluate(C64::new(0.0, 0.0)).value.re, 1.0);
        let p0 = PartitionPolynomial::assemble(&t.truncated(0), None);
        assert_eq!(p0.coeffs_f64(), vec![1.0]);
        assert_eq!(p0.degree(), 0);
    }
}
