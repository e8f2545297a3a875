//! Real trigonometric polynomials on T² in the complex exponential basis.
//!
//! A term `(a, b) ↦ c` stands for `c·exp(i(aθ₁ + bθ₂))`. Reality is kept as
//! an invariant: the coefficient at `(-a, -b)` is the conjugate of the one at
//! `(a, b)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::rational::Rational;
use crate::error::{Error, Result};

/// A Gaussian rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Gauss {
    pub re: Rational,
    pub im: Rational,
}

impl Gauss {
    pub fn new(re: Rational, im: Rational) -> Self {
        Gauss { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Gauss {
            re,
            im: Rational::ZERO,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gauss {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn add(&self, o: &Gauss) -> Gauss {
        Gauss {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn mul(&self, o: &Gauss) -> Gauss {
        Gauss {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn scale(&self, c: &Rational) -> Gauss {
        Gauss {
            re: &self.re * c,
            im: &self.im * c,
        }
    }

    pub fn neg(&self) -> Gauss {
        Gauss {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FourierPoly {
    terms: BTreeMap<(i64, i64), Gauss>,
}

fn half() -> Rational {
    Rational::new(1, 2).expect("nonzero denominator")
}

impl FourierPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((0, 0), Gauss::real(c));
        }
        FourierPoly { terms }
    }

    /// `c·cos(aθ₁ + bθ₂)`.
    pub fn cos(a: i64, b: i64, c: Rational) -> Self {
        if (a, b) == (0, 0) {
            return Self::constant(c);
        }
        let h = Gauss::real(&c * &half());
        Self::from_map([((a, b), h.clone()), ((-a, -b), h)].into_iter().collect())
    }

    /// `c·sin(aθ₁ + bθ₂)`.
    pub fn sin(a: i64, b: i64, c: Rational) -> Self {
        if (a, b) == (0, 0) {
            return Self::zero();
        }
        // sin t = (e^{it} - e^{-it}) / 2i
        let h = &c * &half();
        Self::from_map(
            [
                ((a, b), Gauss::new(Rational::ZERO, -&h)),
                ((-a, -b), Gauss::new(Rational::ZERO, h)),
            ]
            .into_iter()
            .collect(),
        )
    }

    /// Builds from explicit terms, combining duplicates and enforcing reality.
    pub fn from_terms(terms: impl IntoIterator<Item = ((i64, i64), Gauss)>) -> Result<Self> {
        let mut map: BTreeMap<(i64, i64), Gauss> = BTreeMap::new();
        for (f, c) in terms {
            let slot = map.entry(f).or_default();
            *slot = slot.add(&c);
        }
        let p = Self::from_map(map);
        for (&(a, b), c) in &p.terms {
            let partner = p.terms.get(&(-a, -b));
            if partner != Some(&c.conj()) {
                return Err(Error::RealityViolated((a, b)));
            }
        }
        Ok(p)
    }

    fn from_map(mut terms: BTreeMap<(i64, i64), Gauss>) -> Self {
        terms.retain(|_, c| !c.is_zero());
        FourierPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &Gauss)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: i64, b: i64) -> Gauss {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn max_frequency(&self) -> i64 {
        self.terms
            .keys()
            .map(|&(a, b)| a.abs().max(b.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        FourierPoly {
            terms: self.terms.iter().map(|(&f, g)| (f, g.scale(c))).collect(),
        }
    }

    /// Derivative in θ₁ (`angle = 0`) or θ₂ (`angle = 1`).
    pub fn diff(&self, angle: usize) -> Self {
        assert!(angle < 2, "angle index {angle} out of range");
        let terms = self
            .terms
            .iter()
            .map(|(&(a, b), g)| {
                let k = Rational::from_int(if angle == 0 { a } else { b });
                // (re + i im)(i k) = -k im + i k re
                ((a, b), Gauss::new(-&(&g.im * &k), &g.re * &k))
            })
            .collect();
        Self::from_map(terms)
    }

    /// Average over θ₁ with the normalized circle measure.
    pub fn integrate_first(&self) -> Self {
        FourierPoly {
            terms: self
                .terms
                .iter()
                .filter(|(&(a, _), _)| a == 0)
                .map(|(&f, g)| (f, g.clone()))
                .collect(),
        }
    }

    pub fn is_independent_of_first(&self) -> bool {
        self.terms.keys().all(|&(a, _)| a == 0)
    }

    /// Floating-point value at `(θ₁, θ₂)`, for numeric spot checks.
    pub fn eval_f64(&self, t1: f64, t2: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), g)| {
                let ph = a as f64 * t1 + b as f64 * t2;
                g.re.to_f64() * ph.cos() - g.im.to_f64() * ph.sin()
            })
            .sum()
    }

    fn merge(&self, other: &Self, sign: i64) -> Self {
        let mut terms = self.terms.clone();
        for (&f, g) in &other.terms {
            let g = if sign < 0 { g.neg() } else { g.clone() };
            let slot = terms.entry(f).or_default();
            *slot = slot.add(&g);
        }
        Self::from_map(terms)
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (&(a, b), g) in &self.terms {
            // Print each conjugate pair once as a cos/sin combination.
            if (a, b) < (0, 0) {
                continue;
            }
            let phase = match (a, b) {
                (0, 0) => String::new(),
                _ => format!("({}θ1{:+}θ2)", a, b),
            };
            if (a, b) == (0, 0) {
                parts.push(format!("{:?}", g.re));
                continue;
            }
            let two = Rational::from_int(2);
            let cre = &g.re * &two;
            let cim = -&(&g.im * &two);
            if !cre.is_zero() {
                parts.push(format!("{cre:?}*cos{phase}"));
            }
            if !cim.is_zero() {
                parts.push(format!("{cim:?}*sin{phase}"));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for FourierPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl<'a> Add<&'a FourierPoly> for &'a FourierPoly {
    type Output = FourierPoly;
    fn add(self, rhs: &FourierPoly) -> FourierPoly {
        self.merge(rhs, 1)
    }
}

impl<'a> Sub<&'a FourierPoly> for &'a FourierPoly {
    type Output = FourierPoly;
    fn sub(self, rhs: &FourierPoly) -> FourierPoly {
        self.merge(rhs, -1)
    }
}

impl<'a> Mul<&'a FourierPoly> for &'a FourierPoly {
    type Output = FourierPoly;
    fn mul(self, rhs: &FourierPoly) -> FourierPoly {
        let mut terms: BTreeMap<(i64, i64), Gauss> = BTreeMap::new();
        for (&(a1, b1), g1) in &self.terms {
            for (&(a2, b2), g2) in &rhs.terms {
                let slot = terms.entry((a1 + a2, b1 + b2)).or_default();
                *slot = slot.add(&g1.mul(g2));
            }
        }
        FourierPoly::from_map(terms)
    }
}

impl Neg for &FourierPoly {
    type Output = FourierPoly;
    fn neg(self) -> FourierPoly {
        FourierPoly {
            terms: self.terms.iter().map(|(&f, g)| (f, g.neg())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    const ANGLES: [(f64, f64); 4] = [(0.3, 1.1), (2.0, -0.7), (-1.4, 0.05), (5.5, 3.3)];

    #[test]
    fn cos_squared_product_to_sum() {
        let c = FourierPoly::cos(1, 0, r(1));
        let sq = &c * &c;
        let expected = &FourierPoly::constant(half()) + &FourierPoly::cos(2, 0, half());
        assert_eq!(sq, expected);
        for (t1, t2) in ANGLES {
            assert!((sq.eval_f64(t1, t2) - t1.cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let s = FourierPoly::sin(1, 0, r(1));
        assert_eq!(s.diff(0), FourierPoly::cos(1, 0, r(1)));
        assert!(s.diff(1).is_zero());
        assert!(FourierPoly::constant(r(5)).diff(0).is_zero());
        for (t1, t2) in ANGLES {
            assert!((s.diff(0).eval_f64(t1, t2) - t1.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn integrate_first_examples() {
        let c = FourierPoly::cos(1, 0, r(1));
        assert!(c.integrate_first().is_zero());
        // Midpoint quadrature is exact for trigonometric polynomials of low order.
        let m = 64;
        let avg: f64 = (0..m)
            .map(|k| c.eval_f64(2.0 * PI * (k as f64 + 0.5) / m as f64, 0.4))
            .sum::<f64>()
            / m as f64;
        assert!(avg.abs() < 1e-12);
        let one = FourierPoly::constant(r(1));
        assert_eq!(one.integrate_first(), one);
        let p = &(&FourierPoly::constant(r(2)) + &c) + &FourierPoly::cos(0, 1, r(3));
        let expected = &FourierPoly::constant(r(2)) + &FourierPoly::cos(0, 1, r(3));
        assert_eq!(p.integrate_first(), expected);
    }

    #[test]
    fn reality_is_checked() {
        let bad = FourierPoly::from_terms([((1, 0), Gauss::real(r(1)))]);
        assert_eq!(bad, Err(Error::RealityViolated((1, 0))));
        let good = FourierPoly::from_terms([
            ((1, 2), Gauss::new(r(1), r(3))),
            ((-1, -2), Gauss::new(r(1), r(-3))),
        ]);
        assert!(good.is_ok());
    }

    #[test]
    fn sin_matches_numeric() {
        let s = FourierPoly::sin(2, -1, r(3));
        for (t1, t2) in ANGLES {
            assert!((s.eval_f64(t1, t2) - 3.0 * (2.0 * t1 - t2).sin()).abs() < 1e-12);
        }
    }
}
