//! Exact scalar rings: rationals, polynomials on ℝⁿ, trigonometric
//! polynomials on the 2-torus.

mod fourier;
mod poly;
mod rational;

use std::fmt::Debug;

pub use fourier::{FourierPoly, Gauss};
pub use poly::{Monomial, Poly};
pub use rational::Rational;

/// The coefficient ring of forms and multivectors.
///
/// `nvars` is the number of coordinates the scalar depends on; derivatives
/// are taken with respect to coordinate indices below it.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero(nvars: usize) -> Self;
    fn constant(nvars: usize, c: Rational) -> Self;
    fn nvars(&self) -> usize;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Rational) -> Self;
    fn diff(&self, var: usize) -> Self;

    fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::ONE)
    }

    fn zero_like(&self) -> Self {
        Self::zero(self.nvars())
    }
}

impl Scalar for Poly {
    fn zero(nvars: usize) -> Self {
        Poly::zero(nvars)
    }
    fn constant(nvars: usize, c: Rational) -> Self {
        Poly::constant(nvars, c)
    }
    fn nvars(&self) -> usize {
        Poly::nvars(self)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Rational) -> Self {
        Poly::scale(self, c)
    }
    fn diff(&self, var: usize) -> Self {
        Poly::diff(self, var)
    }
}

impl Scalar for FourierPoly {
    fn zero(_nvars: usize) -> Self {
        FourierPoly::zero()
    }
    fn constant(_nvars: usize, c: Rational) -> Self {
        FourierPoly::constant(c)
    }
    fn nvars(&self) -> usize {
        2
    }
    fn is_zero(&self) -> bool {
        FourierPoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Rational) -> Self {
        FourierPoly::scale(self, c)
    }
    fn diff(&self, var: usize) -> Self {
        FourierPoly::diff(self, var)
    }
}
