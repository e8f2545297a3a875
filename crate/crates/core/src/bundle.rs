//! The trivial bundle `E = ℝⁿ × ℝ^r`, sections of `TM ⊕ E*` and `E ⊕ T*M`,
//! derivations, and the dual derivation of an arbitrary bracket.
//!
//! All fibre data lives in the constant frame. Structured fibre models (sums
//! of exterior powers, the E7 model) fix how the flat `r` components are read
//! as differential forms: each model is a list of *pieces*, every piece a
//! form of some degree occupying a contiguous run of components in
//! lexicographic subset order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cartan::{indices_of, subsets, Form, Multivector};
use crate::error::{Error, Result};
use crate::scalar::{Poly, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberModel {
    /// `r` unstructured directions, read as `r` copies of `∧⁰`.
    Generic,
    /// `∧^{k₁}TM ⊕ ⋯ ⊕ ∧^{k_l}TM`.
    Wedge(Vec<usize>),
    /// `∧²TM ⊕ ∧⁵TM ⊕ (∧⁷TM ⊗ TM)`, dual to `∧²T* ⊕ ∧⁵T* ⊕ (∧⁷T* ⊗ T*)`.
    E7,
}

impl fmt::Display for FiberModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberModel::Generic => write!(f, "generic"),
            FiberModel::Wedge(ks) => write!(f, "wedge{ks:?}"),
            FiberModel::E7 => write!(f, "e7"),
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// One form-valued piece of the fibre: its degree and first flat index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Piece {
    pub degree: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleContext {
    n: usize,
    r: usize,
    fiber: FiberModel,
    pieces: Vec<Piece>,
    /// For each flat index, `(piece, subset mask)`.
    index: Vec<(usize, u64)>,
}

impl BundleContext {
    pub fn new(n: usize, r: usize, fiber: FiberModel) -> Result<Self> {
        if n == 0 {
            return Err(Error::ContextMismatch("base dimension must be at least 1".into()));
        }
        if n + r > crate::cartan::MAX_VARS {
            return Err(Error::TooManyVars(n + r));
        }
        let degrees: Vec<usize> = match &fiber {
            FiberModel::Generic => vec![0; r],
            FiberModel::Wedge(ks) => ks.clone(),
            FiberModel::E7 => {
                let mut d = vec![2, 5];
                d.extend(std::iter::repeat_n(7, n));
                d
            }
        };
        let mut pieces = Vec::with_capacity(degrees.len());
        let mut index = Vec::new();
        for (p, &k) in degrees.iter().enumerate() {
            pieces.push(Piece {
                degree: k,
                offset: index.len(),
            });
            for m in subsets(n, k) {
                index.push((p, m));
            }
        }
        if index.len() != r {
            return Err(Error::ContextMismatch(format!(
                "fiber model {fiber} over n = {n} has rank {}, not r = {r}",
                index.len()
            )));
        }
        if r == 0 {
            return Err(Error::ContextMismatch("fiber rank must be at least 1".into()));
        }
        Ok(BundleContext {
            n,
            r,
            fiber,
            pieces,
            index,
        })
    }

    /// Context whose rank is induced by the fibre model.
    pub fn with_model(n: usize, fiber: FiberModel) -> Result<Self> {
        let r = match &fiber {
            FiberModel::Generic => {
                return Err(Error::ContextMismatch("generic fiber needs an explicit rank".into()))
            }
            FiberModel::Wedge(ks) => ks.iter().map(|&k| binomial(n, k)).sum(),
            FiberModel::E7 => binomial(n, 2) + binomial(n, 5) + n * binomial(n, 7),
        };
        Self::new(n, r, fiber)
    }

    pub fn generic(n: usize, r: usize) -> Self {
        Self::new(n, r, FiberModel::Generic).expect("valid generic context")
    }

    /// `E = TM`, so `TM ⊕ E* = TM ⊕ T*M`.
    pub fn tangent(n: usize) -> Self {
        Self::with_model(n, FiberModel::Wedge(vec![1])).expect("valid tangent context")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn fiber(&self) -> &FiberModel {
        &self.fiber
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `(piece, subset mask)` of flat index `a`.
    pub fn locate(&self, a: usize) -> (usize, u64) {
        self.index[a]
    }

    /// Flat index of `mask` inside piece `p`.
    pub fn flat_index(&self, p: usize, mask: u64) -> usize {
        let piece = self.pieces[p];
        let end = self
            .pieces
            .get(p + 1)
            .map_or(self.r, |q| q.offset);
        (piece.offset..end)
            .find(|&a| self.index[a].1 == mask)
            .expect("mask belongs to piece")
    }

    pub fn check_same(&self, other: &BundleContext) -> Result<()> {
        if self != other {
            return Err(Error::ContextMismatch(format!(
                "(n={}, r={}, {}) vs (n={}, r={}, {})",
                self.n, self.r, self.fiber, other.n, other.r, other.fiber
            )));
        }
        Ok(())
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.n)
    }

    /// The flat `E*` components read as forms, one per piece.
    pub fn to_forms(&self, eps: &[Poly]) -> Vec<Form<Poly>> {
        let mut out: Vec<Form<Poly>> = self
            .pieces
            .iter()
            .map(|p| Form::zero(self.n, p.degree))
            .collect();
        for (a, c) in eps.iter().enumerate() {
            let (p, m) = self.index[a];
            out[p].add_term(m, c.clone());
        }
        out
    }

    pub fn from_forms(&self, forms: &[Form<Poly>]) -> Vec<Poly> {
        let mut out = vec![self.zero(); self.r];
        for (a, slot) in out.iter_mut().enumerate() {
            let (p, m) = self.index[a];
            *slot = forms[p].coeff(m);
        }
        out
    }

    /// The flat `E` components read as multivectors, one per piece.
    pub fn to_multivectors(&self, e: &[Poly]) -> Vec<Multivector<Poly>> {
        let mut out: Vec<Multivector<Poly>> = self
            .pieces
            .iter()
            .map(|p| Multivector::zero(self.n, p.degree))
            .collect();
        for (a, c) in e.iter().enumerate() {
            let (p, m) = self.index[a];
            out[p].add_term(m, c.clone());
        }
        out
    }

    pub fn from_multivectors(&self, mvs: &[Multivector<Poly>]) -> Vec<Poly> {
        let mut out = vec![self.zero(); self.r];
        for (a, slot) in out.iter_mut().enumerate() {
            let (p, m) = self.index[a];
            *slot = mvs[p].coeff(m);
        }
        out
    }

    /// Human-readable label of frame element `a`, e.g. `dx0∧dx2` or `[3]`.
    pub fn label(&self, a: usize) -> String {
        let (p, m) = self.index[a];
        let idx = indices_of(m);
        let body = if idx.is_empty() {
            "1".to_string()
        } else {
            idx.iter().map(|i| format!("dx{i}")).collect::<Vec<_>>().join("∧")
        };
        if self.pieces.len() > 1 {
            format!("[{p}]{body}")
        } else {
            body
        }
    }

    pub fn section(&self, x: Vec<Poly>, eps: Vec<Poly>) -> Result<AnchoredSection> {
        AnchoredSection::new(self, x, eps)
    }
}

/// `ν = (X, ε) ∈ Γ(TM ⊕ E*)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AnchoredSection {
    pub x: Vec<Poly>,
    pub eps: Vec<Poly>,
}

fn check_polys(ctx: &BundleContext, what: &str, v: &[Poly], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::ContextMismatch(format!(
            "{what} has {} components, expected {len}",
            v.len()
        )));
    }
    for p in v {
        if p.nvars() != ctx.n {
            return Err(Error::NvarsMismatch {
                left: ctx.n,
                right: p.nvars(),
            });
        }
    }
    Ok(())
}

impl AnchoredSection {
    pub fn new(ctx: &BundleContext, x: Vec<Poly>, eps: Vec<Poly>) -> Result<Self> {
        check_polys(ctx, "X", &x, ctx.n)?;
        check_polys(ctx, "eps", &eps, ctx.r)?;
        Ok(AnchoredSection { x, eps })
    }

    pub fn zero(ctx: &BundleContext) -> Self {
        AnchoredSection {
            x: vec![ctx.zero(); ctx.n],
            eps: vec![ctx.zero(); ctx.r],
        }
    }

    /// `(∂_i, 0)`.
    pub fn coordinate_field(ctx: &BundleContext, i: usize) -> Self {
        let mut s = Self::zero(ctx);
        s.x[i] = Poly::one(ctx.n);
        s
    }

    /// `(0, ε^a)`.
    pub fn coframe(ctx: &BundleContext, a: usize) -> Self {
        let mut s = Self::zero(ctx);
        s.eps[a] = Poly::one(ctx.n);
        s
    }

    /// The `n + r` constant frame sections.
    pub fn frame(ctx: &BundleContext) -> Vec<Self> {
        (0..ctx.n)
            .map(|i| Self::coordinate_field(ctx, i))
            .chain((0..ctx.r).map(|a| Self::coframe(ctx, a)))
            .collect()
    }

    pub fn check(&self, ctx: &BundleContext) -> Result<()> {
        check_polys(ctx, "X", &self.x, ctx.n)?;
        check_polys(ctx, "eps", &self.eps, ctx.r)
    }

    pub fn vector_field(&self) -> Multivector<Poly> {
        let n = self.x.first().map_or(0, |p| p.nvars());
        Multivector::vector(n, self.x.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().chain(&self.eps).all(|p| p.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        AnchoredSection {
            x: zip_polys(&self.x, &o.x, |a, b| a + b),
            eps: zip_polys(&self.eps, &o.eps, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        AnchoredSection {
            x: zip_polys(&self.x, &o.x, |a, b| a - b),
            eps: zip_polys(&self.eps, &o.eps, |a, b| a - b),
        }
    }

    pub fn neg(&self) -> Self {
        AnchoredSection {
            x: self.x.iter().map(|p| -p).collect(),
            eps: self.eps.iter().map(|p| -p).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        AnchoredSection {
            x: self.x.iter().map(|p| p.scale(c)).collect(),
            eps: self.eps.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn mul_fn(&self, f: &Poly) -> Self {
        AnchoredSection {
            x: self.x.iter().map(|p| p * f).collect(),
            eps: self.eps.iter().map(|p| p * f).collect(),
        }
    }

    /// Largest coefficient degree over all components.
    pub fn degree(&self) -> u32 {
        self.x
            .iter()
            .chain(&self.eps)
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn render(&self, ctx: &BundleContext) -> String {
        render_parts(
            ctx,
            self.x.iter().enumerate().map(|(i, p)| (format!("∂x{i}"), p)),
            self.eps.iter().enumerate().map(|(a, p)| (ctx.label(a), p)),
        )
    }
}

fn render_parts<'a>(
    _ctx: &BundleContext,
    first: impl Iterator<Item = (String, &'a Poly)>,
    second: impl Iterator<Item = (String, &'a Poly)>,
) -> String {
    let name = |v: usize| format!("x{v}");
    let join = |it: &mut dyn Iterator<Item = (String, &'a Poly)>| {
        let parts: Vec<String> = it
            .filter(|(_, p)| !p.is_zero())
            .map(|(l, p)| format!("({}) {l}", p.render(&name)))
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    };
    let mut first = first;
    let mut second = second;
    format!("({}; {})", join(&mut first), join(&mut second))
}

impl fmt::Debug for AnchoredSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(X: {:?}; eps: {:?})", self.x, self.eps)
    }
}

fn zip_polys(a: &[Poly], b: &[Poly], op: impl Fn(&Poly, &Poly) -> Poly) -> Vec<Poly> {
    a.iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// `τ = (e, θ) ∈ Γ(E ⊕ T*M)`, stored flat: `e` in the frame of `E`, `θ` by
/// its `dx_i` components.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CoSection {
    pub e: Vec<Poly>,
    pub theta: Vec<Poly>,
}

impl CoSection {
    pub fn new(ctx: &BundleContext, e: Vec<Poly>, theta: Vec<Poly>) -> Result<Self> {
        check_polys(ctx, "e", &e, ctx.r)?;
        check_polys(ctx, "theta", &theta, ctx.n)?;
        Ok(CoSection { e, theta })
    }

    pub fn zero(ctx: &BundleContext) -> Self {
        CoSection {
            e: vec![ctx.zero(); ctx.r],
            theta: vec![ctx.zero(); ctx.n],
        }
    }

    /// `(e_a, 0)`.
    pub fn frame_e(ctx: &BundleContext, a: usize) -> Self {
        let mut s = Self::zero(ctx);
        s.e[a] = Poly::one(ctx.n);
        s
    }

    /// `(0, dx_i)`.
    pub fn frame_theta(ctx: &BundleContext, i: usize) -> Self {
        let mut s = Self::zero(ctx);
        s.theta[i] = Poly::one(ctx.n);
        s
    }

    pub fn theta_form(&self) -> Form<Poly> {
        let n = self.theta.len();
        let mut f = Form::zero(n, 1);
        for (i, c) in self.theta.iter().enumerate() {
            f.add_term(1 << i, c.clone());
        }
        f
    }

    pub fn from_theta_form(ctx: &BundleContext, e: Vec<Poly>, theta: &Form<Poly>) -> Self {
        CoSection {
            e,
            theta: (0..ctx.n).map(|i| theta.coeff(1 << i)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().chain(&self.theta).all(|p| p.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        CoSection {
            e: zip_polys(&self.e, &o.e, |a, b| a + b),
            theta: zip_polys(&self.theta, &o.theta, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CoSection {
            e: zip_polys(&self.e, &o.e, |a, b| a - b),
            theta: zip_polys(&self.theta, &o.theta, |a, b| a - b),
        }
    }

    pub fn mul_fn(&self, f: &Poly) -> Self {
        CoSection {
            e: self.e.iter().map(|p| p * f).collect(),
            theta: self.theta.iter().map(|p| p * f).collect(),
        }
    }

    pub fn render(&self, ctx: &BundleContext) -> String {
        render_parts(
            ctx,
            self.e.iter().enumerate().map(|(a, p)| (format!("e{a}"), p)),
            self.theta.iter().enumerate().map(|(i, p)| (format!("dx{i}"), p)),
        )
    }
}

impl fmt::Debug for CoSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(e: {:?}; theta: {:?})", self.e, self.theta)
    }
}

/// `⟨ν, τ⟩ = ⟨ε, e⟩ + θ(X)`.
pub fn pairing(nu: &AnchoredSection, tau: &CoSection) -> Poly {
    let mut acc = Poly::zero(nvars_of(nu, tau));
    for (a, b) in nu.eps.iter().zip(&tau.e) {
        if !a.is_zero() && !b.is_zero() {
            acc += &(a * b);
        }
    }
    for (a, b) in nu.x.iter().zip(&tau.theta) {
        if !a.is_zero() && !b.is_zero() {
            acc += &(a * b);
        }
    }
    acc
}

pub fn try_pairing(ctx: &BundleContext, nu: &AnchoredSection, tau: &CoSection) -> Result<Poly> {
    nu.check(ctx)?;
    check_polys(ctx, "e", &tau.e, ctx.r)?;
    check_polys(ctx, "theta", &tau.theta, ctx.n)?;
    Ok(pairing(nu, tau))
}

fn nvars_of(nu: &AnchoredSection, tau: &CoSection) -> usize {
    nu.x
        .first()
        .or(nu.eps.first())
        .or(tau.e.first())
        .map_or(0, |p| p.nvars())
}

/// `X(f)` for a vector field given by components.
pub fn apply_field(x: &[Poly], f: &Poly) -> Poly {
    let mut acc = Poly::zero(f.nvars());
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        let df = f.diff(i);
        if !df.is_zero() {
            acc += &(xi * &df);
        }
    }
    acc
}

/// A derivation of `Γ(E)`: `D(e)^a = X(e^a) + Σ_b A_ab e^b`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub symbol: Vec<Poly>,
    pub matrix: Vec<Vec<Poly>>,
}

impl Derivation {
    pub fn new(symbol: Vec<Poly>, matrix: Vec<Vec<Poly>>) -> Self {
        Derivation { symbol, matrix }
    }

    pub fn zero(ctx: &BundleContext) -> Self {
        Derivation {
            symbol: vec![ctx.zero(); ctx.n],
            matrix: vec![vec![ctx.zero(); ctx.r]; ctx.r],
        }
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_zero(&self) -> bool {
        self.symbol.iter().all(|p| p.is_zero()) && self.matrix.iter().flatten().all(|p| p.is_zero())
    }

    pub fn apply(&self, e: &[Poly]) -> Vec<Poly> {
        (0..self.rank())
            .map(|a| {
                let mut acc = apply_field(&self.symbol, &e[a]);
                for (b, eb) in e.iter().enumerate() {
                    let m = &self.matrix[a][b];
                    if !m.is_zero() && !eb.is_zero() {
                        acc += &(m * eb);
                    }
                }
                acc
            })
            .collect()
    }

    /// `[D₁, D₂]`: symbol `[X₁, X₂]`, matrix `X₁(A₂) − X₂(A₁) + [A₁, A₂]`.
    pub fn commutator(&self, other: &Derivation) -> Derivation {
        let n = self.symbol.len();
        let r = self.rank();
        let x1 = Multivector::vector(n, self.symbol.clone());
        let x2 = Multivector::vector(n, other.symbol.clone());
        let br = x1.lie_bracket(&x2);
        let symbol = (0..n).map(|i| br.component(i)).collect();
        let prod = |p: &Vec<Vec<Poly>>, q: &Vec<Vec<Poly>>, a: usize, b: usize| {
            let mut acc = Poly::zero(n);
            for c in 0..r {
                if !p[a][c].is_zero() && !q[c][b].is_zero() {
                    acc += &(&p[a][c] * &q[c][b]);
                }
            }
            acc
        };
        let matrix = (0..r)
            .map(|a| {
                (0..r)
                    .map(|b| {
                        let mut m = &apply_field(&self.symbol, &other.matrix[a][b])
                            - &apply_field(&other.symbol, &self.matrix[a][b]);
                        m += &prod(&self.matrix, &other.matrix, a, b);
                        m -= &prod(&other.matrix, &self.matrix, a, b);
                        m
                    })
                    .collect()
            })
            .collect();
        Derivation { symbol, matrix }
    }

    /// The dual derivation on `Γ(E*)`: same symbol, matrix `−Aᵀ`.
    pub fn dual(&self) -> Derivation {
        let r = self.rank();
        Derivation {
            symbol: self.symbol.clone(),
            matrix: (0..r)
                .map(|a| (0..r).map(|b| -&self.matrix[b][a]).collect())
                .collect(),
        }
    }

    pub fn add(&self, o: &Derivation) -> Derivation {
        Derivation {
            symbol: zip_polys(&self.symbol, &o.symbol, |a, b| a + b),
            matrix: self
                .matrix
                .iter()
                .zip(&o.matrix)
                .map(|(ra, rb)| zip_polys(ra, rb, |a, b| a + b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Derivation) -> Derivation {
        self.add(&o.scale(&Rational::from_int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Derivation {
        Derivation {
            symbol: self.symbol.iter().map(|p| p.scale(c)).collect(),
            matrix: self
                .matrix
                .iter()
                .map(|row| row.iter().map(|p| p.scale(c)).collect())
                .collect(),
        }
    }
}

/// `𝒟_ν` as a first-order operator on flat co-sections
/// `[θ_0, …, θ_{n−1}, e^0, …, e^{r−1}]`:
/// `(𝒟_ν τ)_p = X(τ_p) + Σ_q K[p][q] τ_q`.
///
/// `K` is assembled from the `n + r` brackets of `ν` with the constant frame
/// and stored by sparse columns.
#[derive(Clone, PartialEq, Debug)]
pub struct DualOperator {
    pub n: usize,
    pub r: usize,
    pub x: Vec<Poly>,
    /// `cols[q]` lists `(p, K[p][q])` for the nonzero entries, `p` ascending.
    pub cols: Vec<Vec<(usize, Poly)>>,
}

impl DualOperator {
    /// Builds from the brackets `⟦ν, b_p⟧` for `b_p` running over the frame
    /// in order `(∂_0, 0), …, (0, ε^0), …`.
    pub fn from_brackets(x: Vec<Poly>, brackets: &[AnchoredSection], n: usize, r: usize) -> Self {
        // ⟨b_p, 𝒟τ⟩ = X⟨b_p, τ⟩ − ⟨⟦ν, b_p⟧, τ⟩, so K[p][q] = −⟦ν, b_p⟧_q.
        let mut cols = vec![Vec::new(); n + r];
        for (p, br) in brackets.iter().enumerate() {
            for (q, v) in br.x.iter().chain(&br.eps).enumerate() {
                if !v.is_zero() {
                    cols[q].push((p, -v));
                }
            }
        }
        DualOperator { n, r, x, cols }
    }

    pub fn zero(ctx: &BundleContext) -> Self {
        DualOperator {
            n: ctx.n,
            r: ctx.r,
            x: vec![ctx.zero(); ctx.n],
            cols: vec![Vec::new(); ctx.n + ctx.r],
        }
    }

    fn nvars(&self) -> usize {
        self.x.first().map_or(0, |p| p.nvars())
    }

    pub fn apply_flat(&self, tau: &[Poly]) -> Vec<Poly> {
        let mut out: Vec<Poly> = tau.iter().map(|t| apply_field(&self.x, t)).collect();
        for (q, col) in self.cols.iter().enumerate() {
            if tau[q].is_zero() {
                continue;
            }
            for (p, kpq) in col {
                out[*p] += &(kpq * &tau[q]);
            }
        }
        out
    }

    pub fn apply(&self, tau: &CoSection) -> CoSection {
        unflatten(self.apply_flat(&flatten(tau)), self.n)
    }

    /// `𝒟_ν` applied to the constant frame element `q`, as a flat vector.
    pub fn column(&self, q: usize) -> Vec<Poly> {
        let mut out = vec![Poly::zero(self.nvars()); self.n + self.r];
        for (p, v) in &self.cols[q] {
            out[*p] = v.clone();
        }
        out
    }

    pub fn entry(&self, p: usize, q: usize) -> Poly {
        self.cols[q]
            .iter()
            .find(|(j, _)| *j == p)
            .map_or_else(|| Poly::zero(self.nvars()), |(_, v)| v.clone())
    }

    /// `self + c·other`; the operator is additive in `ν`.
    pub fn add_scaled(&mut self, c: &Rational, other: &DualOperator) {
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a += &b.scale(c);
        }
        for (mine, theirs) in self.cols.iter_mut().zip(&other.cols) {
            if theirs.is_empty() {
                continue;
            }
            let mut merged: std::collections::BTreeMap<usize, Poly> = mine.drain(..).collect();
            for (p, v) in theirs {
                let slot = merged.entry(*p).or_insert_with(|| Poly::zero(v.nvars()));
                *slot += &v.scale(c);
            }
            *mine = merged.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        }
    }

    /// `δ_ν = pr_E ∘ 𝒟_ν ∘ ι_E`.
    pub fn delta(&self) -> Derivation {
        let (n, r) = (self.n, self.r);
        Derivation {
            symbol: self.x.clone(),
            matrix: (0..r)
                .map(|a| (0..r).map(|b| self.entry(n + a, n + b)).collect())
                .collect(),
        }
    }

    /// `pr_{T*M} ∘ 𝒟_ν ∘ ι_E` as `φ[b][i]`, the `dx_i` part of `𝒟_ν(e_b, 0)`.
    pub fn phi(&self) -> Vec<Vec<Poly>> {
        let (n, r) = (self.n, self.r);
        (0..r)
            .map(|b| (0..n).map(|i| self.entry(i, n + b)).collect())
            .collect()
    }
}

impl DualOperator {
    /// The same operator as a derivation of the rank `n + r` bundle in flat
    /// order, so that commutators can reuse [`Derivation::commutator`].
    pub fn to_derivation(&self) -> Derivation {
        let size = self.n + self.r;
        let mut matrix = vec![vec![Poly::zero(self.nvars()); size]; size];
        for (q, col) in self.cols.iter().enumerate() {
            for (p, v) in col {
                matrix[*p][q] = v.clone();
            }
        }
        Derivation::new(self.x.clone(), matrix)
    }

    pub fn from_derivation(d: &Derivation, n: usize, r: usize) -> Self {
        let cols = (0..n + r)
            .map(|q| {
                (0..n + r)
                    .filter(|&p| !d.matrix[p][q].is_zero())
                    .map(|p| (p, d.matrix[p][q].clone()))
                    .collect()
            })
            .collect();
        DualOperator {
            n,
            r,
            x: d.symbol.clone(),
            cols,
        }
    }

    /// `[𝒟₁, 𝒟₂]`.
    pub fn commutator(&self, other: &DualOperator) -> DualOperator {
        let c = self.to_derivation().commutator(&other.to_derivation());
        DualOperator::from_derivation(&c, self.n, self.r)
    }

    /// `𝒟*ν`, the dual derivation on `TM ⊕ E*`:
    /// `⟨𝒟*ν, τ⟩ = X⟨ν, τ⟩ − ⟨ν, 𝒟τ⟩`.
    pub fn dual_apply(&self, nu: &AnchoredSection) -> AnchoredSection {
        let d = self.to_derivation().dual();
        let flat: Vec<Poly> = nu.x.iter().chain(&nu.eps).cloned().collect();
        let mut out = d.apply(&flat);
        let eps = out.split_off(self.n);
        AnchoredSection { x: out, eps }
    }
}

pub fn flatten(tau: &CoSection) -> Vec<Poly> {
    tau.theta.iter().chain(&tau.e).cloned().collect()
}

pub fn unflatten(mut v: Vec<Poly>, n: usize) -> CoSection {
    let e = v.split_off(n);
    CoSection { e, theta: v }
}

/// Anything that can bracket two sections of `TM ⊕ E*` over a context.
pub trait Bracket: Sync {
    fn context(&self) -> &BundleContext;
    fn eval(&self, a: &AnchoredSection, b: &AnchoredSection) -> AnchoredSection;

    /// The dual operator `𝒟_ν` from the `n + r` frame brackets.
    fn dual_operator(&self, nu: &AnchoredSection) -> DualOperator {
        let ctx = self.context();
        let brackets: Vec<AnchoredSection> = AnchoredSection::frame(ctx)
            .iter()
            .map(|b| self.eval(nu, b))
            .collect();
        DualOperator::from_brackets(nu.x.clone(), &brackets, ctx.n, ctx.r)
    }

    /// `𝒟_ν τ`, defined by `⟨ν′, 𝒟_ν τ⟩ = X⟨ν′, τ⟩ − ⟨⟦ν, ν′⟧, τ⟩`.
    fn dual_derivation(&self, nu: &AnchoredSection, tau: &CoSection) -> CoSection {
        self.dual_operator(nu).apply(tau)
    }

    fn delta(&self, nu: &AnchoredSection) -> Derivation {
        self.dual_operator(nu).delta()
    }
}
