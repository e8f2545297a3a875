//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept in a vector sorted ascending in graded lexicographic order
//! with no zero coefficients, so structural equality is mathematical
//! equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use smallvec::SmallVec;

use super::rational::Rational;
use crate::error::{Error, Result};

/// A monomial as a sparse list of `(variable, exponent)` pairs, sorted by
/// variable, exponents strictly positive.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[(u16, u16); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(i: usize) -> Self {
        let mut v = SmallVec::new();
        v.push((i as u16, 1));
        Monomial(v)
    }

    pub fn from_dense(exps: &[u32]) -> Self {
        Monomial(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i as u16, e as u16))
                .collect(),
        )
    }

    pub fn to_dense(&self, nvars: usize) -> Vec<u32> {
        let mut out = vec![0; nvars];
        for &(v, e) in &self.0 {
            out[v as usize] = e as u32;
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e as u32).sum()
    }

    pub fn exp(&self, var: usize) -> u32 {
        self.0
            .iter()
            .find(|&&(v, _)| v as usize == var)
            .map_or(0, |&(_, e)| e as u32)
    }

    /// Total degree in the variables `lo..hi`.
    pub fn degree_in(&self, lo: usize, hi: usize) -> u32 {
        self.0
            .iter()
            .filter(|&&(v, _)| (lo..hi).contains(&(v as usize)))
            .map(|&(_, e)| e as u32)
            .sum()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&(v, _)| v as usize)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(v, e)| (v as usize, e as u32))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Divides out one power of `var`, returning the old exponent.
    fn lower(&self, var: usize) -> Option<(u32, Monomial)> {
        let pos = self.0.iter().position(|&(v, _)| v as usize == var)?;
        let e = self.0[pos].1;
        let mut out = self.0.clone();
        if e == 1 {
            out.remove(pos);
        } else {
            out[pos].1 -= 1;
        }
        Some((e as u32, Monomial(out)))
    }

    /// Restriction to the variables `lo..hi` and the complementary part.
    pub fn split(&self, lo: usize, hi: usize) -> (Monomial, Monomial) {
        let (inside, outside): (SmallVec<_>, SmallVec<_>) = self
            .0
            .iter()
            .copied()
            .partition(|&(v, _)| (lo..hi).contains(&(v as usize)));
        (Monomial(inside), Monomial(outside))
    }

    /// Renders with variable names supplied by `name`.
    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        self.0
            .iter()
            .map(|&(v, e)| {
                if e == 1 {
                    name(v as usize)
                } else {
                    format!("{}^{}", name(v as usize), e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    // a has a positive exponent where b has none
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl Ord for Monomial {
    /// Graded lexicographic, `x0 > x1 > ...`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        write!(f, "{}", self.render(&|v| format!("x{v}")))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(Monomial, Rational)>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::ONE)
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::term(nvars, Monomial::one(), c)
    }

    pub fn int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, Rational::from_int(c))
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range for {nvars}");
        Self::term(nvars, Monomial::var(i), Rational::ONE)
    }

    pub fn term(nvars: usize, m: Monomial, c: Rational) -> Self {
        debug_assert!(m.max_var().is_none_or(|v| v < nvars));
        if c.is_zero() {
            return Self::zero(nvars);
        }
        Poly {
            nvars,
            terms: vec![(m, c)],
        }
    }

    /// Builds a polynomial from dense exponent vectors, combining duplicates.
    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self> {
        let mut raw = Vec::new();
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::NvarsMismatch {
                    left: nvars,
                    right: exps.len(),
                });
            }
            if exps.iter().any(|&e| e > u16::MAX as u32) {
                return Err(Error::Parse(format!("exponent too large in {exps:?}")));
            }
            raw.push((Monomial::from_dense(&exps), c));
        }
        Ok(Self::from_unsorted(nvars, raw))
    }

    fn from_unsorted(nvars: usize, mut raw: Vec<(Monomial, Rational)>) -> Self {
        raw.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<(Monomial, Rational)> = Vec::with_capacity(raw.len());
        for (m, c) in raw {
            match terms.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += &c,
                _ => terms.push((m, c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        Poly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().map(|(m, c)| (m, c))
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        match self.terms.first() {
            Some((m, c)) if m.is_one() => c.clone(),
            _ => Rational::ZERO,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.last().map(|(m, _)| m.degree())
    }

    pub fn check_nvars(&self, other: &Poly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_nvars(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.check_nvars(other)?;
        Ok(self.merge(other, false))
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for (m, c) in &b[j..] {
            let c = if negate { -c } else { c.clone() };
            out.push((m.clone(), c));
        }
        Poly {
            nvars: self.nvars.max(other.nvars),
            terms: out,
        }
    }

    fn mul_unchecked(&self, other: &Poly) -> Poly {
        let nvars = self.nvars.max(other.nvars);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(nvars);
        }
        // grlex is a monomial order: multiplying by one term keeps the order.
        if other.terms.len() == 1 {
            return self.mul_term(&other.terms[0].0, &other.terms[0].1);
        }
        if self.terms.len() == 1 {
            return other.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                raw.push((ma.mul(mb), ca * cb));
            }
        }
        Self::from_unsorted(nvars, raw)
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(tm, tc)| (tm.mul(m), tc * c))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        if c.is_one() {
            return self.clone();
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, tc)| (m.clone(), tc * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Poly {
        self.scale(&Rational::from_int(c))
    }

    /// Formal partial derivative in `var`.
    pub fn try_diff(&self, var: usize) -> Result<Poly> {
        if var >= self.nvars {
            return Err(Error::VarOutOfRange {
                index: var,
                nvars: self.nvars,
            });
        }
        Ok(self.diff(var))
    }

    /// Panicking variant of [`Poly::try_diff`] for internal use.
    pub fn diff(&self, var: usize) -> Poly {
        debug_assert!(var < self.nvars);
        // Every surviving term was divisible by x_var, so dividing keeps order.
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                m.lower(var)
                    .map(|(e, lm)| (lm, c * &Rational::from_int(e as i64)))
            })
            .collect();
        Poly {
            nvars: self.nvars,
            terms,
        }
    }

    /// Bit `i` set when `x_i` occurs; variables past 63 are not tracked.
    pub fn var_mask(&self) -> u64 {
        let mut mask = 0u64;
        for (m, _) in &self.terms {
            for (v, _) in m.vars() {
                if v < 64 {
                    mask |= 1 << v;
                }
            }
        }
        mask
    }

    /// Same polynomial viewed in a larger variable set (new variables appended).
    pub fn embed(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        Poly {
            nvars,
            terms: self.terms.clone(),
        }
    }

    /// Drops to fewer variables; fails if a dropped variable occurs.
    pub fn restrict(&self, nvars: usize) -> Result<Poly> {
        for (m, _) in &self.terms {
            if let Some(v) = m.max_var() {
                if v >= nvars {
                    return Err(Error::VarOutOfRange { index: v, nvars });
                }
            }
        }
        Ok(Poly {
            nvars,
            terms: self.terms.clone(),
        })
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::ZERO;
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.vars() {
                for _ in 0..e {
                    t = &t * &point[v];
                }
            }
            acc += &t;
        }
        acc
    }

    /// Largest total degree in the variables `lo..hi` over all terms.
    pub fn max_degree_in(&self, lo: usize, hi: usize) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree_in(lo, hi))
            .max()
            .unwrap_or(0)
    }

    /// First term whose degree in `lo..hi` is not `deg`.
    pub fn term_off_degree(&self, lo: usize, hi: usize, deg: u32) -> Option<Poly> {
        self.terms
            .iter()
            .find(|(m, _)| m.degree_in(lo, hi) != deg)
            .map(|(m, c)| Poly::term(self.nvars, m.clone(), c.clone()))
    }

    /// Coefficient of `x_var` in a polynomial homogeneous of degree one in
    /// the variables `lo..hi` (`lo <= var < hi`); the result is free of them.
    pub fn linear_coeff(&self, var: usize, lo: usize, hi: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exp(var) == 1 && m.degree_in(lo, hi) == 1)
            .map(|(m, c)| (m.lower(var).expect("exp checked").1, c.clone()))
            .collect();
        Poly {
            nvars: self.nvars,
            terms,
        }
    }

    /// The part of the polynomial free of the variables `lo..hi`.
    pub fn free_part(&self, lo: usize, hi: usize) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree_in(lo, hi) == 0)
                .cloned()
                .collect(),
        }
    }

    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c } else { c.clone() };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let cs = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                abs.to_string()
            };
            if m.is_one() {
                out.push_str(&cs);
            } else if abs.is_one() {
                out.push_str(&m.render(name));
            } else {
                out.push_str(&cs);
                out.push('*');
                out.push_str(&m.render(name));
            }
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|v| format!("x{v}")))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, rhs.nvars);
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        self.merge(rhs, false)
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, rhs.nvars);
        if rhs.is_zero() {
            return self.clone();
        }
        self.merge(rhs, true)
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, rhs.nvars);
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        if rhs.is_zero() {
            return;
        }
        *self = &*self + rhs;
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        if rhs.is_zero() {
            return;
        }
        *self = &*self - rhs;
    }
}
