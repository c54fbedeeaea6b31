//! Exact rational and complex-rational scalars, plus the rational times used
//! for suspension coordinates.

use alloc::string::String;
use core::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};

/// Rational numbers used for times and parameters.
pub type Rat = Ratio<i64>;

/// Exact complex-rational scalar.
pub type Scalar = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

pub fn big(r: &Rat) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn real(r: &Rat) -> Scalar {
    Complex::new(big(r), BigRational::zero())
}

pub fn int(n: i64) -> Scalar {
    Complex::new(
        BigRational::from_integer(BigInt::from(n)),
        BigRational::zero(),
    )
}

pub fn one() -> Scalar {
    int(1)
}

pub fn zero() -> Scalar {
    int(0)
}

pub fn to_c64(x: &Scalar) -> Complex64 {
    Complex64::new(
        x.re.to_f64().unwrap_or(f64::NAN),
        x.im.to_f64().unwrap_or(f64::NAN),
    )
}

pub fn abs_f64(x: &Scalar) -> f64 {
    let c = to_c64(x);
    libm::hypot(c.re, c.im)
}

pub fn floor(r: &Rat) -> i64 {
    r.floor().to_integer()
}

pub fn ceil(r: &Rat) -> i64 {
    r.ceil().to_integer()
}

pub fn frac(r: &Rat) -> Rat {
    r - r.floor()
}

/// `p/q` rendering with sign on the numerator; integers print bare.
pub struct RatDisplay<'a>(pub &'a Rat);

impl fmt::Display for RatDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn scalar_string(x: &Scalar) -> String {
    use alloc::format;
    let show = |r: &BigRational| {
        if r.is_integer() {
            format!("{}", r.numer())
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    };
    if x.im.is_zero() {
        show(&x.re)
    } else {
        format!("{}+{}i", show(&x.re), show(&x.im))
    }
}
