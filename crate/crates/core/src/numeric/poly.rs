use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, Schur};
use num_complex::Complex;
use num_traits::{One, Zero};

use super::scalar::{cabs, cdiv, cmul, Real, C64};

/// Value, derivative and the magnitude scale `sum |c_k| |z|^k` of a real polynomial
/// with ascending coefficients.
pub fn horner<T: Real>(coeffs: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>, f64) {
    let mut p = Complex::<T>::zero();
    let mut dp = Complex::<T>::zero();
    let mut scale = 0.0;
    let az = cabs(z);
    for c in coeffs.iter().rev() {
        dp = cmul(dp, z) + p;
        p = cmul(p, z) + Complex::new(*c, T::zero());
        scale = scale * az + c.to_f().abs();
    }
    (p, dp, scale)
}

fn modulus<T: Real>(w: Complex<T>) -> T {
    let (a, b) = (w.re.abs().max(w.im.abs()), w.re.abs().min(w.im.abs()));
    if a.is_zero() { a } else { a * (T::one() + (b / a) * (b / a)).sqrt() }
}

/// Value, derivative and magnitude sum of `cs` at `w`, all kept in `T`.
fn eval_t<T: Real>(cs: impl DoubleEndedIterator<Item = T>, w: Complex<T>) -> (Complex<T>, Complex<T>, T) {
    let aw = modulus(w);
    let mut p = Complex::<T>::zero();
    let mut dp = Complex::<T>::zero();
    let mut mag = T::zero();
    for c in cs.rev() {
        dp = cmul(dp, w) + p;
        p = cmul(p, w) + Complex::new(c, T::zero());
        mag = mag.mul_or_zero(aw) + c.abs();
    }
    (p, dp, mag)
}

/// Newton correction p(z) / p'(z) and the relative residual |p(z)| / sum |c_k| |z|^k.
/// For |z| > 1 both come from the reversed polynomial q at w = 1/z, where
/// p / p' = z q / (n q - w q'), so no power of z is ever formed.
pub fn newton_correction<T: Real>(coeffs: &[T], z: Complex<T>) -> (Complex<T>, f64) {
    let (p, num, den, mag) = if modulus(z) > T::one() {
        let w = cdiv(Complex::<T>::one(), z);
        let (q, dq, mag) = eval_t(coeffs.iter().rev().copied(), w);
        let n = T::of((coeffs.len() - 1) as f64);
        (q, z * q, q * n - w * dq, mag)
    } else {
        let (p, dp, mag) = eval_t(coeffs.iter().copied(), z);
        (p, p, dp, mag)
    };
    let rel = if mag.is_zero() { 0.0 } else { (modulus(p) / mag).to_f() };
    let step = if p.is_zero() { p } else { cdiv(num, den) };
    (step, rel)
}

/// |p(z)| / sum |c_k| |z|^k evaluated in `T`, through the reversed polynomial when |z| > 1.
pub fn relative_residual<T: Real>(coeffs: &[T], z: Complex<T>) -> f64 {
    newton_correction(coeffs, z).1
}

/// Eigenvalues of a real square matrix after Parlett-Reinsch balancing.
pub fn real_eigenvalues(rows: &[Vec<f64>]) -> Option<Vec<C64>> {
    let n = rows.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    if m.iter().any(|x| !x.is_finite()) {
        return None;
    }
    balance_parlett_reinsch(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

/// Companion matrix of a monic polynomial `x^n + a_{n-1} x^{n-1} + ... + a_0`,
/// given ascending `a_0..a_{n-1}`.
pub fn monic_companion(lower: &[f64]) -> Vec<Vec<f64>> {
    let n = lower.len();
    let mut rows = vec![vec![0.0; n]; n];
    for j in 0..n {
        rows[0][j] = -lower[n - 1 - j];
    }
    for i in 1..n {
        rows[i][i - 1] = 1.0;
    }
    rows
}

/// Aberth-Ehrlich simultaneous refinement of all roots of `coeffs`.
/// Returns the refined roots and whether every correction fell below roundoff.
pub fn aberth<T: Real>(coeffs: &[T], init: &[C64], max_iter: usize) -> (Vec<Complex<T>>, bool) {
    let mut z: Vec<Complex<T>> =
        init.iter().map(|w| Complex::new(T::of(w.re), T::of(w.im))).collect();
    let n = z.len();
    let tol = 64.0 * T::unit_roundoff();
    let mut done = vec![false; n];
    let mut prev = vec![f64::INFINITY; n];
    for _ in 0..max_iter {
        if done.iter().all(|d| *d) {
            return (z, true);
        }
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, rel) = newton_correction(coeffs, z[i]);
            if rel == 0.0 {
                done[i] = true;
                continue;
            }
            let floor = rel <= 4.0 * coeffs.len() as f64 * T::unit_roundoff();
            let mut sum = Complex::<T>::zero();
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if !d.is_zero() {
                        sum = sum + cdiv(Complex::<T>::one(), d);
                    }
                }
            }
            let denom = Complex::<T>::one() - ratio * sum;
            let step = if denom.is_zero() { ratio } else { cdiv(ratio, denom) };
            if !(cabs(step).is_finite()) {
                continue;
            }
            z[i] = z[i] - step;
            let size = cabs(step);
            let scale = cabs(z[i]).max(f64::MIN_POSITIVE);
            // stalled steps only count once the residual sits at the rounding floor
            if size <= tol * scale || (floor && size <= 1e-6 * scale && size > 0.5 * prev[i]) {
                done[i] = true;
            }
            prev[i] = size;
        }
    }
    let ok = done.iter().all(|d| *d);
    (z, ok)
}

/// Newton refinement of a single root.
pub fn newton<T: Real>(coeffs: &[T], z0: Complex<T>, max_iter: usize) -> Complex<T> {
    let mut z = z0;
    let tol = 16.0 * T::unit_roundoff();
    for _ in 0..max_iter {
        let (step, _) = newton_correction(coeffs, z);
        if !cabs(step).is_finite() {
            break;
        }
        z = z - step;
        if cabs(step) <= tol * cabs(z) {
            break;
        }
    }
    z
}

/// Makes a root list of a real polynomial closed under conjugation.
pub fn conjugate_symmetrize<T: Real>(roots: &mut [Complex<T>], rel_tol: f64) {
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let zi = roots[i];
        let mag = cabs(zi).max(f64::MIN_POSITIVE);
        if zi.im.to_f().abs() <= rel_tol * mag {
            roots[i].im = T::zero();
            used[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .map(|j| (j, cabs(roots[j] - zi.conj())))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        used[i] = true;
        if let Some((j, d)) = partner {
            if d <= 1e3 * rel_tol * mag {
                let avg = (zi + roots[j].conj()) / T::of(2.0);
                roots[i] = avg;
                roots[j] = avg.conj();
                used[j] = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::scalar::{xf, Xf};

    #[test]
    fn horner_value_and_derivative() {
        let c = [1.0, 2.0, 1.0];
        let (p, dp, s) = horner(&c, Complex::new(2.0, 0.0));
        assert_eq!(p.re, 9.0);
        assert_eq!(dp.re, 6.0);
        assert_eq!(s, 9.0);
    }

    #[test]
    fn companion_eigenvalues_match_roots() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let ev = real_eigenvalues(&monic_companion(&[-6.0, 11.0, -6.0])).unwrap();
        let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn aberth_in_extended() {
        let c: Vec<Xf> = [-6.0, 11.0, -6.0, 1.0].iter().map(|x| xf(*x)).collect();
        let init = [C64::new(0.9, 0.1), C64::new(2.2, -0.1), C64::new(3.3, 0.05)];
        let (mut r, ok) = aberth(&c, &init, 100);
        assert!(ok);
        conjugate_symmetrize(&mut r, 1e-30);
        let mut re: Vec<f64> = r.iter().map(|z| z.re.to_f()).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        for z in &r {
            let (p, _, s) = horner(&c, *z);
            assert!(cabs(p) <= 1e-36 * s);
        }
    }

    #[test]
    fn symmetrize_pairs_conjugates() {
        let mut r = vec![C64::new(1.0, 1.0 + 1e-14), C64::new(1.0, -1.0), C64::new(2.0, 1e-20)];
        conjugate_symmetrize(&mut r, 1e-15);
        assert_eq!(r[0], r[1].conj());
        assert_eq!(r[2].im, 0.0);
    }
}
