use std::fmt::Debug;

use num_bigfloat::BigFloat;
use num_complex::Complex;
use num_traits::{Float, FloatConst};
use serde::{Deserialize, Serialize};

/// Extended scalar (40 significant decimal digits).
pub type Xf = BigFloat;

pub type C64 = Complex<f64>;

const XF_FLOOR: f64 = 1e-100;

/// Real scalar usable by the generic linear algebra and polynomial code.
pub trait Real: Float + FloatConst + Debug + Send + Sync + 'static {
    const NAME: &'static str;
    /// Unit roundoff of the type.
    fn unit_roundoff() -> f64;
    fn of(x: f64) -> Self;
    fn of_xf(x: Xf) -> Self;
    fn to_f(self) -> f64;
    fn to_xf(self) -> Xf;
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
    /// Product, or zero where the result would leave the exponent range from below.
    fn mul_or_zero(self, o: Self) -> Self {
        self * o
    }
    /// Quotient, or zero where the result would leave the exponent range from below.
    fn div_or_zero(self, o: Self) -> Self {
        self / o
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    fn unit_roundoff() -> f64 {
        f64::EPSILON / 2.0
    }
    fn of(x: f64) -> Self {
        x
    }
    fn of_xf(x: Xf) -> Self {
        x.to_f64()
    }
    fn to_f(self) -> f64 {
        self
    }
    fn to_xf(self) -> Xf {
        BigFloat::from_f64(self)
    }
}

impl Real for BigFloat {
    const NAME: &'static str = "bigfloat-40";
    fn unit_roundoff() -> f64 {
        1e-39
    }
    fn of(x: f64) -> Self {
        BigFloat::from_f64(x)
    }
    fn of_xf(x: Xf) -> Self {
        x
    }
    fn to_f(self) -> f64 {
        self.to_f64()
    }
    fn to_xf(self) -> Xf {
        self
    }
    // results near the bottom of the exponent range panic inside num-bigfloat
    fn mul_or_zero(self, o: Self) -> Self {
        if (self.to_f64() * o.to_f64()).abs() < XF_FLOOR { BigFloat::new() } else { self * o }
    }
    fn div_or_zero(self, o: Self) -> Self {
        if (self.to_f64() / o.to_f64()).abs() < XF_FLOOR { BigFloat::new() } else { self / o }
    }
}

/// Arithmetic tier used for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Pick from a condition estimate.
    #[default]
    Auto,
    Double,
    Extended,
}

impl Precision {
    /// Tier needed to resolve a quantity whose error grows like `eps * kappa^2`.
    pub fn for_condition(kappa: f64) -> Precision {
        if kappa <= 1e2 {
            Precision::Double
        } else {
            Precision::Extended
        }
    }

    /// Whether the tier resolves such a quantity to `tol`.
    pub fn resolves(self, kappa: f64, tol: f64) -> bool {
        let eps = match self {
            Precision::Double => f64::unit_roundoff(),
            _ => Xf::unit_roundoff(),
        };
        eps * kappa * kappa <= tol
    }
}

pub fn xf(x: f64) -> Xf {
    BigFloat::from_f64(x)
}

/// Splits an extended value into an unevaluated f64 sum (hi, lo).
/// Three doubles carry a little over 48 significant digits, enough to round-trip `Xf`.
pub type XfParts = [f64; 3];

pub fn xf_split(x: Xf) -> XfParts {
    let hi = x.to_f64();
    if !hi.is_finite() {
        return [hi, 0.0, 0.0];
    }
    let r = x - xf(hi);
    let mid = r.to_f64();
    [hi, mid, (r - xf(mid)).to_f64()]
}

pub fn xf_join(v: XfParts) -> Xf {
    xf(v[0]) + xf(v[1]) + xf(v[2])
}

pub fn cplx<T: Real>(c: C64) -> Complex<T> {
    Complex::new(T::of(c.re), T::of(c.im))
}

pub fn cplx_f<T: Real>(c: Complex<T>) -> C64 {
    Complex::new(c.re.to_f(), c.im.to_f())
}

/// Modulus in f64, robust for types whose own `hypot` is slow.
pub fn cabs<T: Real>(c: Complex<T>) -> f64 {
    c.re.to_f().hypot(c.im.to_f())
}

/// Smith's complex division; never squares the divisor, and a component
/// negligible against the other is flushed so tiny exponents stay in range.
pub fn cdiv<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let (br, bi) = (b.re.abs(), b.im.abs());
    let flush = T::of(1e-60);
    let (re, im) = (if br < bi * flush { T::zero() } else { b.re }, if bi < br * flush { T::zero() } else { b.im });
    let (m, q) = (T::mul_or_zero, T::div_or_zero);
    if im.is_zero() {
        return Complex::new(q(a.re, re), q(a.im, re));
    }
    if re.is_zero() {
        return Complex::new(q(a.im, im), -q(a.re, im));
    }
    if br >= bi {
        let r = q(im, re);
        let d = re + m(im, r);
        Complex::new(q(a.re + m(a.im, r), d), q(a.im - m(a.re, r), d))
    } else {
        let r = q(re, im);
        let d = m(re, r) + im;
        Complex::new(q(m(a.re, r) + a.im, d), q(m(a.im, r) - a.re, d))
    }
}

/// Complex product built from `mul_or_zero`.
pub fn cmul<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let m = T::mul_or_zero;
    Complex::new(m(a.re, b.re) - m(a.im, b.im), m(a.re, b.im) + m(a.im, b.re))
}

pub fn factorial_f64(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}
