use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::numeric::{xf, xf_join, xf_split, Real, Xf, XfParts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Z,
    Rho,
}

/// Truncated power series sum_k c_k v^k, c_k held at 40 digits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub variable: Variable,
    pub coeffs: Vec<XfParts>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub n: usize,
    pub coefficient: f64,
    pub sign: i8,
    #[serde(with = "crate::numeric::logmag")]
    pub log_magnitude: f64,
}

impl PowerSeries {
    pub fn from_xf(c: &[Xf], variable: Variable) -> Self {
        PowerSeries { variable, coeffs: c.iter().map(|x| xf_split(*x)).collect() }
    }

    pub fn from_f64(c: &[f64], variable: Variable) -> Self {
        PowerSeries { variable, coeffs: c.iter().map(|x| [*x, 0.0, 0.0]).collect() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn xf(&self, k: usize) -> Xf {
        self.coeffs.get(k).map(|c| xf_join(*c)).unwrap_or_else(Xf::zero)
    }

    pub fn xf_values(&self) -> Vec<Xf> {
        self.coeffs.iter().map(|c| xf_join(*c)).collect()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.coeffs.get(k).map_or(0.0, |c| c[0] + c[1] + c[2])
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }

    pub fn sign(&self, k: usize) -> i8 {
        let v = self.value(k);
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn log_magnitude(&self, k: usize) -> f64 {
        let x = self.xf(k).abs();
        if x.is_zero() {
            f64::NEG_INFINITY
        } else {
            x.ln().to_f()
        }
    }

    pub fn rows(&self) -> Vec<CoefficientRow> {
        (0..self.len())
            .map(|n| CoefficientRow {
                n,
                coefficient: self.value(n),
                sign: self.sign(n),
                log_magnitude: self.log_magnitude(n),
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,coefficient,sign,log_magnitude\n");
        for r in self.rows() {
            s.push_str(&format!("{},{:.17e},{},{:.17e}\n", r.n, r.coefficient, r.sign, r.log_magnitude));
        }
        s
    }

    pub fn truncated(&self, n: usize) -> Self {
        PowerSeries { variable: self.variable, coeffs: self.coeffs.iter().take(n).copied().collect() }
    }
}

/// First n coefficients of a b.
pub fn mul(a: &[Xf], b: &[Xf], n: usize) -> Vec<Xf> {
    (0..n)
        .map(|k| {
            let mut acc = Xf::zero();
            for i in 0..=k.min(a.len().saturating_sub(1)) {
                if let Some(bj) = b.get(k - i) {
                    acc += a[i] * *bj;
                }
            }
            acc
        })
        .collect()
}

/// First n coefficients of 1 / a.
pub fn reciprocal(a: &[Xf], n: usize) -> Result<Vec<Xf>> {
    if a.first().is_none_or(|c| c.is_zero()) {
        return Err(KsError::Insufficient("series has no constant term to invert".into()));
    }
    let mut r: Vec<Xf> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = if k == 0 { Xf::one() } else { Xf::zero() };
        for j in 1..=k.min(a.len() - 1) {
            acc -= a[j] * r[k - j];
        }
        r.push(acc / a[0]);
    }
    Ok(r)
}

/// log of a series with a_0 = 1, from a (log a)' = a'.
pub fn log(a: &[Xf], n: usize) -> Result<Vec<Xf>> {
    log_with_error(a, n).map(|(l, _)| l)
}

/// Series logarithm with a running forward bound on the rounding error of each coefficient.
pub fn log_with_error(a: &[Xf], n: usize) -> Result<(Vec<Xf>, Vec<f64>)> {
    if a.first() != Some(&Xf::one()) {
        return Err(KsError::InvalidParameter("series logarithm needs constant term 1".into()));
    }
    let u = Xf::unit_roundoff();
    let get = |k: usize| a.get(k).copied().unwrap_or_else(Xf::zero);
    let mag: Vec<f64> = (0..n).map(|k| get(k).abs().to_f()).collect();
    let mut l = vec![Xf::zero(); n];
    let mut err = vec![0.0; n];
    for k in 1..n {
        let kx = xf(k as f64);
        let mut acc = kx * get(k);
        let mut size = k as f64 * mag[k];
        let mut carried = 0.0;
        for j in 1..k {
            let t = xf(j as f64) * l[j] * get(k - j);
            size += t.abs().to_f();
            carried += j as f64 * err[j] * mag[k - j];
            acc -= t;
        }
        l[k] = acc / kx;
        err[k] = (u * (k + 2) as f64 * size + carried) / k as f64;
    }
    Ok((l, err))
}

/// exp of a series with l_0 = 0, from e' = l' e.
pub fn exp(l: &[Xf], n: usize) -> Vec<Xf> {
    let get = |k: usize| l.get(k).copied().unwrap_or_else(Xf::zero);
    let mut e = vec![Xf::zero(); n];
    if n == 0 {
        return e;
    }
    e[0] = Xf::one();
    for k in 1..n {
        let mut acc = Xf::zero();
        for j in 1..=k {
            acc += xf(j as f64) * get(j) * e[k - j];
        }
        e[k] = acc / xf(k as f64);
    }
    e
}

/// Compositional inverse of f(w) = sum_{k>=1} f_k w^k by Lagrange inversion:
/// g_n = (1/n) [w^{n-1}] (w / f(w))^n.
pub fn revert(f: &[Xf], n: usize) -> Result<Vec<Xf>> {
    if f.len() < 2 || f[1].is_zero() {
        return Err(KsError::Insufficient("series reversion needs a nonzero linear term".into()));
    }
    let shifted: Vec<Xf> = f[1..].to_vec();
    let phi = reciprocal(&shifted, n)?;
    let mut g = vec![Xf::zero(); n];
    let mut power = vec![Xf::one()];
    for k in 1..n {
        power = mul(&power, &phi, n);
        g[k] = power[k - 1] / xf(k as f64);
    }
    Ok(g)
}

/// a(b(v)) truncated to n terms; b_0 must vanish.
pub fn compose(a: &[Xf], b: &[Xf], n: usize) -> Vec<Xf> {
    let mut out = vec![Xf::zero(); n];
    let mut power: Vec<Xf> = vec![Xf::one()];
    for (k, ak) in a.iter().enumerate() {
        if k >= n {
            break;
        }
        for (o, p) in out.iter_mut().zip(&power) {
            *o += *ak * *p;
        }
        power = mul(&power, b, n);
    }
    out
}
