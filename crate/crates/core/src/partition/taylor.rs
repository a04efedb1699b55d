use super::PartitionPolynomial;
use crate::numeric::{xf, Real, Xf};

/// First `k + 1` coefficients of num / den; `den[0]` must be nonzero.
pub fn series_divide<T: Real>(num: &[T], den: &[T], k: usize) -> Vec<T> {
    assert!(!den.is_empty() && !den[0].is_zero(), "series denominator has zero constant term");
    let mut q: Vec<T> = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut acc = num.get(i).copied().unwrap_or_else(T::zero);
        for j in 1..=i.min(den.len() - 1) {
            acc = acc - den[j] * q[i - j];
        }
        q.push(acc / den[0]);
    }
    q
}

/// Coefficients 0..=k of rho_n / z = z^{n-1} N(z) / Xi(z), where `numerator`
/// holds the coefficients of N. Computed at 40 digits.
pub fn taylor_coefficients_xf(numerator: &[f64], n: usize, poly: &PartitionPolynomial, k: usize) -> Vec<Xf> {
    let shift = n.saturating_sub(1);
    let mut num = vec![xf(0.0); shift];
    num.extend(numerator.iter().map(|c| xf(*c)));
    series_divide(&num, &poly.coeffs_t::<Xf>(), k)
}

pub fn taylor_coefficients(numerator: &[f64], n: usize, poly: &PartitionPolynomial, k: usize) -> Vec<f64> {
    taylor_coefficients_xf(numerator, n, poly, k).into_iter().map(|c| c.to_f()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series() {
        let p = PartitionPolynomial::from_coeffs(&[1.0, 1.0]);
        let c = taylor_coefficients(&[1.0], 1, &p, 10);
        for (k, ck) in c.iter().enumerate() {
            assert_eq!(*ck, if k % 2 == 0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn ideal_leading_coefficient() {
        let p = PartitionPolynomial::from_coeffs(&[1.0, 1.0, 0.5, 1.0 / 6.0]);
        let c = taylor_coefficients(&[1.0, 1.0, 0.5], 1, &p, 3);
        assert_eq!(c[0], 1.0);
        assert!(c[1].abs() < 1e-16 && c[2].abs() < 1e-16);
        assert!((c[3] + 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn f64_and_extended_agree() {
        let num = [1.0, 0.25, -0.5];
        let den = [1.0, 2.0, 0.75];
        let a = series_divide(&num, &den, 12);
        let b = series_divide(&num.map(xf), &den.map(xf), 12);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y.to_f()).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}
