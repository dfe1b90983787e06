//! Exact scalar fields: arbitrary-precision rationals and Gaussian rationals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (maintained by `num_rational`).
pub type Rat = num_rational::BigRational;

/// Shorthand for an integer rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for `num/den`.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"num"` or `"num/den"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::BadRational(s.to_string());
    let mut parts = s.splitn(2, '/');
    let num: BigInt = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    match parts.next() {
        None => Ok(Rat::from_integer(num)),
        Some(d) => {
            let den: BigInt = d.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Renders a rational as `num` or `num/den` (the CLI wire format).
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64` to an exact rational; used only at the float boundary.
pub fn rat_to_f64(r: &Rat) -> f64 {
    // Split into integer part and remainder so huge numerators keep precision.
    let (q, rem) = (r.numer() / r.denom(), r.numer() % r.denom());
    let mut out = bigint_to_f64(&q);
    let mut num = rem;
    let mut den = r.denom().clone();
    // Scale the proper fraction into f64 range.
    while num.abs().bits() > 512 || den.bits() > 512 {
        num >>= 64;
        den >>= 64;
        if den.is_zero() {
            return out;
        }
    }
    out += bigint_to_f64(&num) / bigint_to_f64(&den);
    out
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    b.to_f64().unwrap_or(f64::NAN)
}

/// Abstraction over the exact scalars the jet/operator machinery runs on.
///
/// Borrowing method signatures keep `BigInt` reallocation out of the hot
/// loops; both [`Rat`] and [`GaussianRational`] implement it.
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn neg(&self) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_rat(r: &Rat) -> Self;
}

impl Scalar for Rat {
    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
}

/// Rational plus imaginary-rational scalar `re + im * i`.
///
/// Carries the literal imaginary unit of the quantized operator algebra;
/// purely classical quantities keep `im = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: Rat,
    pub im: Rat,
}

impl GaussianRational {
    pub fn new(re: Rat, im: Rat) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rat) -> Self {
        Self {
            re,
            im: <Rat as Zero>::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self {
            re: <Rat as Zero>::zero(),
            im: <Rat as One>::one(),
        }
    }

    pub fn is_real(&self) -> bool {
        Zero::is_zero(&self.im)
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Extracts the real part, failing if an imaginary residue remains.
    pub fn expect_real(&self) -> Result<Rat> {
        if self.is_real() {
            Ok(self.re.clone())
        } else {
            Err(Error::Incompatible(format!("nonreal scalar {self}")))
        }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.im) {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{} + {}*i", self.re, self.im)
        }
    }
}

impl Scalar for GaussianRational {
    fn zero() -> Self {
        Self::real(<Rat as Zero>::zero())
    }
    fn one() -> Self {
        Self::real(<Rat as One>::one())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn neg(&self) -> Self {
        Self {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn add(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return None;
        }
        let n = self.norm_sq();
        Some(Self {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }
    fn from_rat(r: &Rat) -> Self {
        Self::real(r.clone())
    }
}

macro_rules! gauss_binop {
    ($trait:ident, $method:ident, $scalar_method:ident) => {
        impl $trait for GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: GaussianRational) -> GaussianRational {
                Scalar::$scalar_method(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a GaussianRational> for &'a GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: &'a GaussianRational) -> GaussianRational {
                Scalar::$scalar_method(self, rhs)
            }
        }
    };
}

gauss_binop!(Add, add, add);
gauss_binop!(Sub, sub, sub);
gauss_binop!(Mul, mul, mul);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        Scalar::neg(&self)
    }
}

impl Div for GaussianRational {
    type Output = GaussianRational;
    fn div(self, rhs: GaussianRational) -> GaussianRational {
        let inv = Scalar::inv(&rhs).expect("division by zero GaussianRational");
        Scalar::mul(&self, &inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        for s in ["3", "-7/2", "22/7", "0"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(rat_to_string(&r), s);
        }
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn gaussian_field_ops() {
        let z = GaussianRational::new(ratio(1, 2), rat(3));
        let w = GaussianRational::new(rat(-2), ratio(1, 3));
        let prod = Scalar::mul(&z, &w);
        // (1/2 + 3i)(-2 + i/3) = -1 - i/2... recompute: re = -1 - 1 = -2, im = 1/6 - 6
        assert_eq!(prod.re, rat(-2));
        assert_eq!(prod.im, ratio(1, 6) - rat(6));
        let back = Scalar::mul(&prod, &Scalar::inv(&w).unwrap());
        assert_eq!(back, z);
        assert!(Scalar::inv(&GaussianRational::zero()).is_none());
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussianRational::i();
        assert_eq!(Scalar::mul(&i, &i), Scalar::neg(&GaussianRational::one()));
    }

    #[test]
    fn rat_to_f64_handles_plain_values() {
        assert_eq!(rat_to_f64(&ratio(1, 4)), 0.25);
        assert_eq!(rat_to_f64(&rat(-3)), -3.0);
    }
}
