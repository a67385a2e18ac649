//! Gaussian rationals. Every finite `f64` is a dyadic rational, so map
//! coefficients convert losslessly and symbolic identities can be checked
//! without rounding.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type GaussRat = Complex<BigRational>;

pub fn rat_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

pub fn gauss_from_c64(z: Complex64) -> Result<GaussRat> {
    Ok(Complex::new(rat_from_f64(z.re)?, rat_from_f64(z.im)?))
}

pub fn gauss_to_c64(z: &GaussRat) -> Complex64 {
    Complex64::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

pub fn gauss_int(n: i64) -> GaussRat {
    Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubles_convert_exactly() {
        for &x in &[0.1, -3.75, 1e-300, 123456789.123] {
            let r = rat_from_f64(x).unwrap();
            assert_eq!(r.to_f64().unwrap(), x);
        }
        assert!(rat_from_f64(f64::INFINITY).is_err());
    }
}
