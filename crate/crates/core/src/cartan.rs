//! Exterior calculus on a coordinate patch.
//!
//! Forms and multivectors share one container: a map from strictly increasing
//! index sets (stored as `u64` bitmasks) to scalar coefficients. The pairing
//! of `dx_I` with `∂_J` is `δ_IJ` (determinant convention, no `k!`).

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

pub const MAX_VARS: usize = 64;

/// Marks covariant (`Form`) or contravariant (`Multivector`) containers.
pub trait Kind: Clone + Copy + PartialEq + Eq + fmt::Debug + Send + Sync + 'static {
    const NAME: &'static str;
    const BASIS: &'static str;
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Co;
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Contra;

impl Kind for Co {
    const NAME: &'static str = "form";
    const BASIS: &'static str = "d";
}

impl Kind for Contra {
    const NAME: &'static str = "multivector";
    const BASIS: &'static str = "∂";
}

#[derive(Clone)]
pub struct Graded<S, K> {
    nvars: usize,
    degree: usize,
    terms: BTreeMap<u64, S>,
    kind: PhantomData<K>,
}

/// Zero elements compare equal whatever their stored degree, matching `add`,
/// which treats zero as degree-agnostic (`ι_X` of a function is a zero
/// "degree 0" element, not an error).
impl<S: PartialEq, K> PartialEq for Graded<S, K> {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars
            && self.terms == other.terms
            && (self.degree == other.degree || self.terms.is_empty())
    }
}

pub type Form<S> = Graded<S, Co>;
pub type Multivector<S> = Graded<S, Contra>;

pub fn mask_of(idx: &[usize]) -> Result<u64> {
    let mut mask = 0u64;
    for w in idx.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::IndicesNotIncreasing(idx.to_vec()));
        }
    }
    for &i in idx {
        if i >= MAX_VARS {
            return Err(Error::TooManyVars(i + 1));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

pub fn indices_of(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[inline]
fn below(i: usize) -> u64 {
    (1u64 << i) - 1
}

/// Sign of `dx_I ∧ dx_J` relative to `dx_{I∪J}`; `None` if they overlap.
#[inline]
pub fn wedge_sign(i: u64, j: u64) -> Option<bool> {
    if i & j != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut m = j;
    while m != 0 {
        let b = m.trailing_zeros();
        inversions += (i >> b).count_ones();
        m &= m - 1;
    }
    Some(inversions % 2 == 1)
}

/// All `k`-subsets of `0..n` as masks, ordered lexicographically by index tuple.
pub fn subsets(n: usize, k: usize) -> Vec<u64> {
    fn rec(start: usize, n: usize, k: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..=n.saturating_sub(k) {
            rec(i + 1, n, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, 0, &mut out);
    }
    out
}

impl<S: Scalar, K: Kind> Graded<S, K> {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} coordinates");
        Graded {
            nvars,
            degree,
            terms: BTreeMap::new(),
            kind: PhantomData,
        }
    }

    /// Degree-0 element with coefficient `f`.
    pub fn scalar(nvars: usize, f: S) -> Self {
        let mut out = Self::zero(nvars, 0);
        out.add_term(0, f);
        out
    }

    /// `f·dx_I` (or `f·∂_I`) for a strictly increasing `idx`.
    pub fn monomial(nvars: usize, idx: &[usize], f: S) -> Result<Self> {
        let mask = mask_of(idx)?;
        if let Some(&last) = idx.last() {
            if last >= nvars {
                return Err(Error::VarOutOfRange {
                    index: last,
                    nvars,
                });
            }
        }
        let mut out = Self::zero(nvars, idx.len());
        out.add_term(mask, f);
        Ok(out)
    }

    /// The coordinate basis element with unit coefficient.
    pub fn basis(nvars: usize, idx: &[usize]) -> Self {
        Self::monomial(nvars, idx, S::one(nvars)).expect("valid basis index")
    }

    pub fn from_mask(nvars: usize, mask: u64, f: S) -> Self {
        let mut out = Self::zero(nvars, mask.count_ones() as usize);
        out.add_term(mask, f);
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &S)> {
        self.terms.iter().map(|(&m, s)| (m, s))
    }

    /// Terms ordered lexicographically by index tuple.
    pub fn sorted_terms(&self) -> Vec<(Vec<usize>, &S)> {
        let mut v: Vec<_> = self.terms.iter().map(|(&m, s)| (indices_of(m), s)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn coeff(&self, mask: u64) -> S {
        self.terms
            .get(&mask)
            .cloned()
            .unwrap_or_else(|| S::zero(self.nvars))
    }

    pub fn coeff_ref(&self, mask: u64) -> Option<&S> {
        self.terms.get(&mask)
    }

    /// Coefficient of `∂_i` or `dx_i` in a degree-1 element.
    pub fn component(&self, i: usize) -> S {
        debug_assert_eq!(self.degree, 1);
        self.coeff(1 << i)
    }

    pub fn add_term(&mut self, mask: u64, f: S) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        if f.is_zero() {
            return;
        }
        match self.terms.entry(mask) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(f);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&f);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn add_signed(&mut self, mask: u64, f: S, negative: bool) {
        self.add_term(mask, if negative { f.neg() } else { f });
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars, other.nvars);
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        assert_eq!(self.degree, other.degree, "adding elements of different degree");
        let mut out = self.clone();
        for (&m, f) in &other.terms {
            out.add_term(m, f.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Graded {
            nvars: self.nvars,
            degree: self.degree,
            terms: self.terms.iter().map(|(&m, f)| (m, f.neg())).collect(),
            kind: PhantomData,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.nvars, self.degree);
        for (&m, f) in &self.terms {
            out.add_term(m, f.scale(c));
        }
        out
    }

    /// Pointwise product with a function.
    pub fn mul_scalar(&self, g: &S) -> Self {
        let mut out = Self::zero(self.nvars, self.degree);
        for (&m, f) in &self.terms {
            out.add_term(m, f.mul(g));
        }
        out
    }

    /// Applies `op` to every coefficient.
    pub fn map_coeffs(&self, op: impl Fn(&S) -> S) -> Self {
        let mut out = Self::zero(self.nvars, self.degree);
        for (&m, f) in &self.terms {
            out.add_term(m, op(f));
        }
        out
    }

    /// Graded-antisymmetric product.
    pub fn wedge(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars, self.degree + other.degree);
        for (&i, f) in &self.terms {
            for (&j, g) in &other.terms {
                if let Some(neg) = wedge_sign(i, j) {
                    out.add_signed(i | j, f.mul(g), neg);
                }
            }
        }
        out
    }

    pub fn try_wedge(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(self.wedge(other))
    }

    /// Contraction with the dual basis element of index `i` (`ι_{∂_i}` on
    /// forms, `ι_{dx_i}` on multivectors).
    pub fn contract_basis(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        let bit = 1u64 << i;
        for (&m, f) in &self.terms {
            if m & bit != 0 {
                let neg = (m & below(i)).count_ones() % 2 == 1;
                out.add_signed(m ^ bit, f.clone(), neg);
            }
        }
        out
    }

    /// Contraction with a degree-1 element of the opposite kind.
    pub fn contract<L: Kind>(&self, x: &Graded<S, L>) -> Self {
        debug_assert_eq!(x.degree, 1);
        let mut out = Self::zero(self.nvars, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        for (&m, f) in &self.terms {
            let mut rest = m;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if let Some(xi) = x.terms.get(&(1u64 << i)) {
                    let neg = (m & below(i)).count_ones() % 2 == 1;
                    out.add_signed(m ^ (1 << i), xi.mul(f), neg);
                }
            }
        }
        out
    }

    /// Full contraction with an element of the opposite kind and equal degree.
    pub fn pair<L: Kind>(&self, other: &Graded<S, L>) -> S {
        let mut acc = S::zero(self.nvars);
        if self.degree != other.degree {
            return acc;
        }
        for (m, f) in &self.terms {
            if let Some(g) = other.terms.get(m) {
                acc = acc.add(&f.mul(g));
            }
        }
        acc
    }

    /// `ι_{X_k}⋯ι_{X_1}` applied to `self` for `T = X_1∧⋯∧X_k`, extended
    /// linearly in `T`.
    pub fn multi_contract<L: Kind>(&self, t: &Graded<S, L>) -> Result<Self> {
        if t.degree > self.degree {
            return Err(Error::DegreeUnderflow {
                inner: t.degree,
                outer: self.degree,
            });
        }
        let mut out = Self::zero(self.nvars, self.degree - t.degree);
        for (&mask, tc) in &t.terms {
            let mut cur = self.clone();
            for i in indices_of(mask) {
                cur = cur.contract_basis(i);
                if cur.is_zero() {
                    break;
                }
            }
            out = out.add(&cur.mul_scalar(tc));
        }
        Ok(out)
    }

    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String
    where
        S: fmt::Debug,
    {
        if self.is_zero() {
            return "0".into();
        }
        self.sorted_terms()
            .into_iter()
            .map(|(idx, f)| {
                let basis = idx
                    .iter()
                    .map(|&i| format!("{}{}", K::BASIS, name(i)))
                    .collect::<Vec<_>>()
                    .join("∧");
                if basis.is_empty() {
                    format!("({f:?})")
                } else {
                    format!("({f:?}) {basis}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl<S: Scalar> Form<S> {
    /// 1-form from its components.
    pub fn covector(nvars: usize, comps: Vec<S>) -> Self {
        let mut out = Self::zero(nvars, 1);
        for (i, c) in comps.into_iter().enumerate() {
            out.add_term(1 << i, c);
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Form<S> {
        let mut out = Form::zero(self.nvars, self.degree + 1);
        for (&m, f) in &self.terms {
            for i in 0..self.nvars {
                if m & (1 << i) != 0 {
                    continue;
                }
                let df = f.diff(i);
                if df.is_zero() {
                    continue;
                }
                let neg = (m & below(i)).count_ones() % 2 == 1;
                out.add_signed(m | (1 << i), df, neg);
            }
        }
        out
    }

    /// `ι_X` for a vector field `X`.
    pub fn interior(&self, x: &Multivector<S>) -> Form<S> {
        self.contract(x)
    }

    /// Cartan formula `ι_X d + d ι_X`.
    pub fn lie_derivative(&self, x: &Multivector<S>) -> Form<S> {
        self.d().interior(x).add(&self.interior(x).d())
    }

    /// Evaluation on vector fields, `a(X_1, …, X_k)`.
    pub fn eval_on(&self, xs: &[Multivector<S>]) -> S {
        let mut cur = self.clone();
        for x in xs {
            cur = cur.interior(x);
        }
        cur.coeff(0)
    }

    /// `a ⌐ T = ι_{dx_{i_m}}⋯ι_{dx_{i_1}} T`, so that `⟨a⌐T, b⟩ = ⟨T, a∧b⟩`.
    pub fn contract_into(&self, t: &Multivector<S>) -> Result<Multivector<S>> {
        t.multi_contract(self)
    }

    /// Pullback along a coordinate inclusion that keeps indices and appends
    /// variables; `lift` maps the coefficients.
    pub fn embed_with(&self, nvars: usize, lift: impl Fn(&S) -> S) -> Form<S> {
        let mut out = Form::zero(nvars, self.degree);
        for (&m, f) in &self.terms {
            out.add_term(m, lift(f));
        }
        out
    }
}

impl<S: Scalar> Multivector<S> {
    /// Vector field from its components.
    pub fn vector(nvars: usize, comps: Vec<S>) -> Self {
        let mut out = Self::zero(nvars, 1);
        for (i, c) in comps.into_iter().enumerate() {
            out.add_term(1 << i, c);
        }
        out
    }

    /// `X(f) = Σ X^i ∂_i f`.
    pub fn apply(&self, f: &S) -> S {
        debug_assert_eq!(self.degree, 1);
        let mut acc = f.zero_like();
        for (&m, xi) in &self.terms {
            let i = m.trailing_zeros() as usize;
            if i < self.nvars {
                acc = acc.add(&xi.mul(&f.diff(i)));
            }
        }
        acc
    }

    /// Lie bracket of vector fields.
    pub fn lie_bracket(&self, y: &Self) -> Self {
        let mut out = Self::zero(self.nvars, 1);
        for j in 0..self.nvars {
            let mut c = S::zero(self.nvars);
            if let Some(yj) = y.coeff_ref(1 << j) {
                c = self.apply(yj);
            }
            if let Some(xj) = self.coeff_ref(1 << j) {
                c = c.sub(&y.apply(xj));
            }
            out.add_term(1 << j, c);
        }
        out
    }

    /// Lie derivative of a multivector, `L_X T`.
    pub fn lie_derivative(&self, t: &Self) -> Self {
        let x = self;
        let mut out = Self::zero(t.nvars, t.degree);
        for (&m, f) in &t.terms {
            out.add_term(m, x.apply(f));
            // [X, ∂_i] = -Σ_k ∂_i(X^k) ∂_k replaces each factor in turn.
            for i in indices_of(m) {
                let rest = m ^ (1 << i);
                for (&km, xk) in &x.terms {
                    let k = km.trailing_zeros() as usize;
                    if rest & km != 0 {
                        continue;
                    }
                    let c = xk.diff(i);
                    if c.is_zero() {
                        continue;
                    }
                    let (lo, hi) = if i < k { (i, k) } else { (k, i) };
                    let between = rest & below(hi) & !below(lo + 1);
                    let neg = between.count_ones() % 2 == 0;
                    out.add_signed(rest | km, f.mul(&c), neg);
                }
            }
        }
        out
    }
}

impl<S: Scalar, K: Kind> fmt::Debug for Graded<S, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|i| format!("x{i}")))
    }
}

/// An `E*`-valued form: `r` components of common degree in the dual frame.
#[derive(Clone, PartialEq)]
pub struct VectorValuedForm<S> {
    nvars: usize,
    degree: usize,
    components: Vec<Form<S>>,
}

impl<S: Scalar> VectorValuedForm<S> {
    pub fn new(nvars: usize, degree: usize, components: Vec<Form<S>>) -> Result<Self> {
        for c in &components {
            if c.nvars() != nvars {
                return Err(Error::NvarsMismatch {
                    left: nvars,
                    right: c.nvars(),
                });
            }
            if c.degree() != degree && !c.is_zero() {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: c.degree(),
                });
            }
        }
        let components = components
            .into_iter()
            .map(|c| if c.is_zero() { Form::zero(nvars, degree) } else { c })
            .collect();
        Ok(VectorValuedForm {
            nvars,
            degree,
            components,
        })
    }

    pub fn zero(nvars: usize, degree: usize, rank: usize) -> Self {
        VectorValuedForm {
            nvars,
            degree,
            components: vec![Form::zero(nvars, degree); rank],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Form<S>] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &Form<S> {
        &self.components[a]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn map(&self, degree: usize, op: impl Fn(&Form<S>) -> Form<S>) -> Self {
        VectorValuedForm {
            nvars: self.nvars,
            degree,
            components: self.components.iter().map(op).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorValuedForm {
            nvars: self.nvars,
            degree: self.degree,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(self.degree, |c| c.neg())
    }

    /// `ι_X` on every component.
    pub fn interior(&self, x: &Multivector<S>) -> Self {
        self.map(self.degree.saturating_sub(1), |c| c.interior(x))
    }

    /// Degree-0 case: the components as scalars.
    pub fn scalars(&self) -> Vec<S> {
        self.components.iter().map(|c| c.coeff(0)).collect()
    }
}

impl<S: Scalar> fmt::Debug for VectorValuedForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.components).finish()
    }
}
