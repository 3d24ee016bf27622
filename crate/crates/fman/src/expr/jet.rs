use nalgebra::{DMatrix, DVector};

use super::Func;
use crate::error::{FmanError, Result};

/// Divisors smaller than this are treated as zero (domain error, never inf).
const MIN_DIVISOR: f64 = 1e-300;

pub(super) fn check_divisor(v: f64) -> Result<()> {
    if v.abs() < MIN_DIVISOR || !v.is_finite() {
        Err(FmanError::Domain(format!("division by {v}")))
    } else {
        Ok(())
    }
}

pub(super) fn check_positive(v: f64, what: &str) -> Result<()> {
    if v <= 0.0 || !v.is_finite() {
        Err(FmanError::Domain(format!(
            "{what} of non-positive value {v}"
        )))
    } else {
        Ok(())
    }
}

/// Order-2 jet: value, gradient and symmetric Hessian with respect to the
/// chart coordinates. Symmetry holds by construction; every rule below only
/// ever adds symmetric terms.
#[derive(Clone, Debug)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            gradient: DVector::zeros(dim),
            hessian: DMatrix::zeros(dim, dim),
        }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut gradient = DVector::zeros(dim);
        gradient[index] = 1.0;
        Jet2 {
            value,
            gradient,
            hessian: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub(super) fn check_finite(&self) -> Result<()> {
        if !self.value.is_finite()
            || self.gradient.iter().any(|v| !v.is_finite())
            || self.hessian.iter().any(|v| !v.is_finite())
        {
            return Err(FmanError::Domain("non-finite derivative".into()));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            gradient: &self.gradient + &rhs.gradient,
            hessian: &self.hessian + &rhs.hessian,
        }
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            gradient: &self.gradient - &rhs.gradient,
            hessian: &self.hessian - &rhs.hessian,
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            gradient: -&self.gradient,
            hessian: -&self.hessian,
        }
    }

    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        let cross = &self.gradient * rhs.gradient.transpose();
        let hessian =
            &self.hessian * rhs.value + &rhs.hessian * self.value + &cross + cross.transpose();
        Jet2 {
            value: self.value * rhs.value,
            gradient: &self.gradient * rhs.value + &rhs.gradient * self.value,
            hessian,
        }
    }

    pub fn div(&self, rhs: &Jet2) -> Result<Jet2> {
        check_divisor(rhs.value)?;
        Ok(self.mul(&rhs.recip()?))
    }

    fn recip(&self) -> Result<Jet2> {
        check_divisor(self.value)?;
        let inv = 1.0 / self.value;
        // d(1/v) = -v'/v^2, d2(1/v) = -v''/v^2 + 2 v' v'^T / v^3
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn powi(&self, k: i32) -> Result<Jet2> {
        if k < 0 {
            check_divisor(self.value)?;
        }
        let v = self.value;
        let kf = f64::from(k);
        match k {
            0 => Ok(Jet2::constant(1.0, self.dim())),
            1 => Ok(self.clone()),
            _ => self.chain(
                v.powi(k),
                kf * v.powi(k - 1),
                kf * (kf - 1.0) * v.powi(k - 2),
            ),
        }
    }

    pub fn powf(&self, r: f64) -> Result<Jet2> {
        check_positive(self.value, "pow with real exponent")?;
        let v = self.value;
        self.chain(
            v.powf(r),
            r * v.powf(r - 1.0),
            r * (r - 1.0) * v.powf(r - 2.0),
        )
    }

    pub fn apply(&self, func: Func) -> Result<Jet2> {
        let v = self.value;
        let (f0, f1, f2) = match func {
            Func::Exp => {
                let e = v.exp();
                (e, e, e)
            }
            Func::Log => {
                check_positive(v, "log")?;
                (v.ln(), 1.0 / v, -1.0 / (v * v))
            }
            Func::Sin => (v.sin(), v.cos(), -v.sin()),
            Func::Cos => (v.cos(), -v.sin(), -v.cos()),
            Func::Tan => {
                let t = v.tan();
                let sec2 = 1.0 + t * t;
                (t, sec2, 2.0 * t * sec2)
            }
            Func::Sinh => (v.sinh(), v.cosh(), v.sinh()),
            Func::Cosh => (v.cosh(), v.sinh(), v.cosh()),
            Func::Sqrt => {
                check_positive(v, "sqrt")?;
                let s = v.sqrt();
                (s, 0.5 / s, -0.25 / (v * s))
            }
        };
        self.chain(f0, f1, f2)
    }

    /// Univariate chain rule: for u = phi(v),
    /// grad u = phi'(v) grad v and
    /// hess u = phi'(v) hess v + phi''(v) grad v grad v^T.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Result<Jet2> {
        if !f0.is_finite() {
            return Err(FmanError::Domain("non-finite intermediate value".into()));
        }
        let outer = &self.gradient * self.gradient.transpose();
        Ok(Jet2 {
            value: f0,
            gradient: &self.gradient * f1,
            hessian: &self.hessian * f1 + outer * f2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessian_is_symmetric_for_products() {
        let x = Jet2::variable(0.7, 0, 2);
        let y = Jet2::variable(-0.3, 1, 2);
        let j = x.mul(&y).apply(Func::Exp).unwrap().mul(&x.add(&y));
        let h = &j.hessian;
        for i in 0..2 {
            for k in 0..2 {
                assert!((h[(i, k)] - h[(k, i)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tiny_divisor_rejected() {
        let x = Jet2::constant(1e-301, 1);
        let y = Jet2::constant(1.0, 1);
        assert!(y.div(&x).is_err());
    }
}
