//! Calculus on the total space of `E → ℝⁿ`.
//!
//! Coordinates on `E` are `x_0 … x_{n−1}` followed by the fibre coordinates
//! `u_0 … u_{r−1}` (variable `n + a`), so the 1-form basis is `dx` then `du`.
//! Linearity is a syntactic test on the degree in the `u` variables.

use std::fmt;

use crate::bundle::{apply_field, BundleContext, CoSection, Derivation, DualOperator};
use crate::cartan::{indices_of, Form, Multivector, VectorValuedForm};
use crate::error::{Error, Result};
use crate::scalar::Poly;

/// A section `(V, A)` of `TE ⊕ T*E`.
#[derive(Clone, PartialEq)]
pub struct GeneralizedSection {
    pub v: Multivector<Poly>,
    pub a: Form<Poly>,
}

impl fmt::Debug for GeneralizedSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralizedSection")
            .field("v", &self.v)
            .field("a", &self.a)
            .finish()
    }
}

impl GeneralizedSection {
    pub fn new(v: Multivector<Poly>, a: Form<Poly>) -> Self {
        GeneralizedSection { v, a }
    }

    pub fn zero(nvars: usize) -> Self {
        GeneralizedSection {
            v: Multivector::zero(nvars, 1),
            a: Form::zero(nvars, 1),
        }
    }

    pub fn nvars(&self) -> usize {
        self.v.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero() && self.a.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        GeneralizedSection {
            v: self.v.add(&o.v),
            a: self.a.add(&o.a),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        GeneralizedSection {
            v: self.v.sub(&o.v),
            a: self.a.sub(&o.a),
        }
    }

    pub fn neg(&self) -> Self {
        GeneralizedSection {
            v: self.v.neg(),
            a: self.a.neg(),
        }
    }

    pub fn mul_fn(&self, f: &Poly) -> Self {
        GeneralizedSection {
            v: self.v.mul_scalar(f),
            a: self.a.mul_scalar(f),
        }
    }

    pub fn render(&self, ctx: &BundleContext) -> String {
        fn side<K: crate::cartan::Kind>(g: &crate::cartan::Graded<Poly, K>, ctx: &BundleContext) -> String {
            if g.is_zero() {
                return "0".into();
            }
            let name = |i: usize| total_var_name(ctx, i);
            g.sorted_terms()
                .into_iter()
                .map(|(idx, f)| format!("({}) {}{}", f.render(&name), K::BASIS, name(idx[0])))
                .collect::<Vec<_>>()
                .join(" + ")
        }
        format!("({}; {})", side(&self.v, ctx), side(&self.a, ctx))
    }
}

/// `x0, x1, …` for base coordinates and `u0, u1, …` for fibre coordinates.
pub fn total_var_name(ctx: &BundleContext, i: usize) -> String {
    if i < ctx.n() {
        format!("x{i}")
    } else {
        format!("u{}", i - ctx.n())
    }
}

pub fn total_vars(ctx: &BundleContext) -> usize {
    ctx.n() + ctx.r()
}

/// The fibre coordinate `u_a` as a function on `E`.
pub fn fiber_coordinate(ctx: &BundleContext, a: usize) -> Poly {
    Poly::var(total_vars(ctx), ctx.n() + a)
}

/// `q*f`.
pub fn pullback(ctx: &BundleContext, f: &Poly) -> Poly {
    f.embed(total_vars(ctx))
}

/// `q*ω` for a base form.
pub fn pullback_form(ctx: &BundleContext, w: &Form<Poly>) -> Form<Poly> {
    w.embed_with(total_vars(ctx), |f| pullback(ctx, f))
}

/// Reads a `u`-free function on `E` as a function on the base.
pub fn to_base(ctx: &BundleContext, f: &Poly) -> Result<Poly> {
    f.restrict(ctx.n())
}

/// `ℓ_ε = Σ ε_a u_a`.
pub fn ell(ctx: &BundleContext, eps: &[Poly]) -> Poly {
    let mut acc = Poly::zero(total_vars(ctx));
    for (a, e) in eps.iter().enumerate() {
        if !e.is_zero() {
            acc += &(&pullback(ctx, e) * &fiber_coordinate(ctx, a));
        }
    }
    acc
}

pub fn d_ell(ctx: &BundleContext, eps: &[Poly]) -> Form<Poly> {
    Form::scalar(total_vars(ctx), ell(ctx, eps)).d()
}

/// `φ̃ = Σ φ[a][i] u_a dx_i` for `φ ∈ Hom(E, T*M)` given as `φ[a][i]`.
pub fn core_linear(ctx: &BundleContext, phi: &[Vec<Poly>]) -> Form<Poly> {
    let big = total_vars(ctx);
    let mut out = Form::zero(big, 1);
    for (a, row) in phi.iter().enumerate() {
        let u = fiber_coordinate(ctx, a);
        for (i, f) in row.iter().enumerate() {
            if !f.is_zero() {
                out.add_term(1 << i, &pullback(ctx, f) * &u);
            }
        }
    }
    out
}

/// `Λ_ω = Σ_a u_a q*ω_a`.
pub fn lambda(ctx: &BundleContext, w: &VectorValuedForm<Poly>) -> Form<Poly> {
    let big = total_vars(ctx);
    let mut out = Form::zero(big, w.degree());
    for (a, comp) in w.components().iter().enumerate() {
        if !comp.is_zero() {
            out = out.add(&pullback_form(ctx, comp).mul_scalar(&fiber_coordinate(ctx, a)));
        }
    }
    out
}

/// `D̂ = Σ X^i ∂_{x_i} − Σ_{a,b} A_ab u_b ∂_{u_a}`, the linear vector field of a
/// derivation of `Γ(E)`; it satisfies `D̂(ℓ_ε) = ℓ_{D*ε}`.
pub fn linear_vf(ctx: &BundleContext, d: &Derivation) -> Multivector<Poly> {
    let n = ctx.n();
    let big = total_vars(ctx);
    let mut comps: Vec<Poly> = d.symbol.iter().map(|f| pullback(ctx, f)).collect();
    for row in &d.matrix {
        let mut acc = Poly::zero(big);
        for (b, m) in row.iter().enumerate() {
            if !m.is_zero() {
                acc -= &(&pullback(ctx, m) * &fiber_coordinate(ctx, b));
            }
        }
        comps.push(acc);
    }
    debug_assert_eq!(comps.len(), n + ctx.r());
    Multivector::vector(big, comps)
}

/// `(e, θ)↑ = (Σ e^a ∂_{u_a}, q*θ)`.
pub fn vertical_lift(ctx: &BundleContext, tau: &CoSection) -> GeneralizedSection {
    let big = total_vars(ctx);
    let mut comps = vec![Poly::zero(big); ctx.n()];
    comps.extend(tau.e.iter().map(|e| pullback(ctx, e)));
    GeneralizedSection {
        v: Multivector::vector(big, comps),
        a: pullback_form(ctx, &tau.theta_form()),
    }
}

/// The standard Courant–Dorfman bracket on `TE ⊕ T*E`, in components:
/// `V = [V₁, V₂]`,
/// `A_j = V₁(A₂_j) + Σ_i A₂_i ∂_j V₁^i − V₂(A₁_j) + Σ_i V₂^i ∂_j A₁_i`.
pub fn courant_dorfman_total(c1: &GeneralizedSection, c2: &GeneralizedSection) -> GeneralizedSection {
    let big = c1.nvars();
    let (v1, v2) = (Sparse::of(&c1.v), Sparse::of(&c2.v));
    let (a1, a2) = (Sparse::of(&c1.a), Sparse::of(&c2.a));
    let mut v = vec![Poly::zero(big); big];
    for (k, out) in v.iter_mut().enumerate() {
        v1.apply_into(&v2.comps[k], out, 1);
        v2.apply_into(&v1.comps[k], out, -1);
    }
    let mut a = vec![Poly::zero(big); big];
    for (j, out) in a.iter_mut().enumerate() {
        v1.apply_into(&a2.comps[j], out, 1);
        v2.apply_into(&a1.comps[j], out, -1);
    }
    // Σ_i A₂_i dV₁^i + Σ_i V₂^i dA₁_i
    for (outer, inner) in [(&a2, &v1), (&v2, &a1)] {
        for &i in &outer.nonzero {
            let g = &inner.comps[i];
            let mask = g.var_mask();
            for (j, out) in a.iter_mut().enumerate() {
                if mask >> j & 1 == 1 {
                    *out += &(&outer.comps[i] * &g.diff(j));
                }
            }
        }
    }
    GeneralizedSection {
        v: Multivector::vector(big, v),
        a: Form::covector(big, a),
    }
}

/// Components of a degree-1 element with the nonzero ones listed.
struct Sparse {
    comps: Vec<Poly>,
    nonzero: Vec<usize>,
}

impl Sparse {
    fn of<K: crate::cartan::Kind>(g: &crate::cartan::Graded<Poly, K>) -> Self {
        let comps: Vec<Poly> = (0..g.nvars()).map(|i| g.coeff(1 << i)).collect();
        let nonzero = (0..comps.len()).filter(|&i| !comps[i].is_zero()).collect();
        Sparse { comps, nonzero }
    }

    /// `out += sign · V(f)`.
    fn apply_into(&self, f: &Poly, out: &mut Poly, sign: i64) {
        if f.is_zero() {
            return;
        }
        let mask = f.var_mask();
        for &i in &self.nonzero {
            if mask >> i & 1 == 1 {
                let t = &self.comps[i] * &f.diff(i);
                if sign > 0 {
                    *out += &t;
                } else {
                    *out -= &t;
                }
            }
        }
    }
}

/// The bracket twisted by a 3-form: `+ (0, ι_{V₂}ι_{V₁}H)`.
pub fn courant_dorfman_twisted(
    c1: &GeneralizedSection,
    c2: &GeneralizedSection,
    h: &Form<Poly>,
) -> GeneralizedSection {
    let mut out = courant_dorfman_total(c1, c2);
    if !h.is_zero() {
        out.a = out.a.add(&h.interior(&c1.v).interior(&c2.v));
    }
    out
}

/// `⟨χ₁, χ₂⟩ = A₁(V₂) + A₂(V₁)`.
pub fn pairing_total(c1: &GeneralizedSection, c2: &GeneralizedSection) -> Poly {
    &c1.a.interior(&c2.v).coeff(0) + &c2.a.interior(&c1.v).coeff(0)
}

/// `(V, A) ↦ (V, A + ι_V B)`.
pub fn b_transform(b: &Form<Poly>, chi: &GeneralizedSection) -> GeneralizedSection {
    GeneralizedSection {
        v: chi.v.clone(),
        a: chi.a.add(&b.interior(&chi.v)),
    }
}

/// `(X, ε)` of a section: the base part of `V` and the `du` part of `A`,
/// both at `u = 0`.
pub fn phi_e(ctx: &BundleContext, chi: &GeneralizedSection) -> crate::bundle::AnchoredSection {
    let (n, r) = (ctx.n(), ctx.r());
    let big = n + r;
    let at_zero = |f: Poly| {
        to_base(ctx, &f.free_part(n, big)).expect("u-free part restricts to the base")
    };
    crate::bundle::AnchoredSection {
        x: (0..n).map(|i| at_zero(chi.v.component(i))).collect(),
        eps: (0..r).map(|a| at_zero(chi.a.component(n + a))).collect(),
    }
}

fn render_term(ctx: &BundleContext, f: &Poly, basis: String) -> String {
    let name = |i: usize| total_var_name(ctx, i);
    format!("{} {basis}", f.render(&name))
}

fn check_u_degree(ctx: &BundleContext, f: &Poly, deg: u32, basis: String, form: bool) -> Result<()> {
    let (n, big) = (ctx.n(), total_vars(ctx));
    match f.term_off_degree(n, big, deg) {
        None => Ok(()),
        Some(t) => {
            let witness = render_term(ctx, &t, basis);
            Err(if form {
                Error::NotLinearForm { witness }
            } else {
                Error::NotLinear { witness }
            })
        }
    }
}

/// `(d_χ, ε, φ_χ)` with `χ = (D̂_{d_χ}, dℓ_ε − φ̃_χ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSectionDecomp {
    pub d: Derivation,
    pub eps: Vec<Poly>,
    /// `φ[a][i]`, the `dx_i` component of `φ_χ(e_a)`.
    pub phi: Vec<Vec<Poly>>,
}

impl LinearSectionDecomp {
    pub fn reconstruct(&self, ctx: &BundleContext) -> GeneralizedSection {
        GeneralizedSection {
            v: linear_vf(ctx, &self.d),
            a: d_ell(ctx, &self.eps).sub(&core_linear(ctx, &self.phi)),
        }
    }
}

/// Linear sections: `V^{x_i}` free of `u`, `V^{u_a}` and the `dx` part of `A`
/// homogeneous of degree one in `u`, the `du` part of `A` free of `u`.
pub fn check_linear(ctx: &BundleContext, chi: &GeneralizedSection) -> Result<()> {
    let (n, r) = (ctx.n(), ctx.r());
    let name = |i: usize| total_var_name(ctx, i);
    if chi.nvars() != n + r || chi.a.nvars() != n + r {
        return Err(Error::NvarsMismatch {
            left: chi.nvars(),
            right: n + r,
        });
    }
    for i in 0..n + r {
        let deg = u32::from(i >= n);
        check_u_degree(ctx, &chi.v.component(i), deg, format!("∂{}", name(i)), false)?;
        check_u_degree(ctx, &chi.a.component(i), 1 - deg, format!("d{}", name(i)), false)?;
    }
    Ok(())
}

pub fn is_linear(ctx: &BundleContext, chi: &GeneralizedSection) -> bool {
    check_linear(ctx, chi).is_ok()
}

/// Core sections: `V` vertical and `u`-free, `A` a pulled-back base form.
pub fn is_core(ctx: &BundleContext, chi: &GeneralizedSection) -> bool {
    let (n, r) = (ctx.n(), ctx.r());
    (0..n + r).all(|i| {
        let v = chi.v.component(i);
        let a = chi.a.component(i);
        if i < n {
            v.is_zero() && a.max_degree_in(n, n + r) == 0
        } else {
            v.max_degree_in(n, n + r) == 0 && a.is_zero()
        }
    })
}

/// 1-forms `Σ f_{a,i} u_a dx_i` with `u`-free `f`: the core-linear forms `φ̃`.
pub fn is_core_linear(ctx: &BundleContext, a: &Form<Poly>) -> bool {
    let (n, big) = (ctx.n(), total_vars(ctx));
    (0..big).all(|i| {
        let c = a.component(i);
        if i < n {
            c.term_off_degree(n, big, 1).is_none()
        } else {
            c.is_zero()
        }
    })
}

pub fn decompose_linear(ctx: &BundleContext, chi: &GeneralizedSection) -> Result<LinearSectionDecomp> {
    check_linear(ctx, chi)?;
    let (n, r) = (ctx.n(), ctx.r());
    let big = n + r;
    let base = |f: &Poly| to_base(ctx, f).expect("linearity leaves base coefficients u-free");
    let symbol: Vec<Poly> = (0..n).map(|i| base(&chi.v.component(i))).collect();
    let matrix: Vec<Vec<Poly>> = (0..r)
        .map(|a| {
            let va = chi.v.component(n + a);
            (0..r).map(|b| -&base(&va.linear_coeff(n + b, n, big))).collect()
        })
        .collect();
    let eps: Vec<Poly> = (0..r).map(|a| base(&chi.a.component(n + a))).collect();
    let phi = (0..r)
        .map(|a| {
            (0..n)
                .map(|i| {
                    let ai = base(&chi.a.component(i).linear_coeff(n + a, n, big));
                    &eps[a].diff(i) - &ai
                })
                .collect()
        })
        .collect();
    Ok(LinearSectionDecomp {
        d: Derivation::new(symbol, matrix),
        eps,
        phi,
    })
}

/// `χ_{ε,D} = (D̂_{pr_E D ι_E}, dℓ_ε − (pr_{T*M} D ι_E)~)`.
pub fn chi_of(ctx: &BundleContext, eps: &[Poly], op: &DualOperator) -> GeneralizedSection {
    GeneralizedSection {
        v: linear_vf(ctx, &op.delta()),
        a: d_ell(ctx, eps).sub(&core_linear(ctx, &op.phi())),
    }
}

/// The derivation `D_χ` of `E ⊕ T*M`: `D_χ(e, 0) = (d_χ e, φ_χ(e))` and
/// `D_χ(0, θ) = (0, L_X θ)`.
pub fn chi_operator(ctx: &BundleContext, dec: &LinearSectionDecomp) -> DualOperator {
    let (n, r) = (ctx.n(), ctx.r());
    let x = &dec.d.symbol;
    let mut cols: Vec<Vec<(usize, Poly)>> = Vec::with_capacity(n + r);
    for i in 0..n {
        // L_X dx_i = Σ_j ∂_j X^i dx_j
        cols.push(
            (0..n)
                .map(|j| (j, x[i].diff(j)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        );
    }
    for b in 0..r {
        let mut col: Vec<(usize, Poly)> = (0..n)
            .map(|i| (i, dec.phi[b][i].clone()))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        col.extend(
            (0..r)
                .map(|a| (n + a, dec.d.matrix[a][b].clone()))
                .filter(|(_, v)| !v.is_zero()),
        );
        cols.push(col);
    }
    DualOperator {
        n,
        r,
        x: x.clone(),
        cols,
    }
}

/// The core-linear section `φ̃` of `φ ∈ Hom(E, E ⊕ T*M)`, given by the flat
/// images `cols[b] = φ(e_b)` (`θ` entries first, then `e`).
pub fn core_section(ctx: &BundleContext, cols: &[Vec<Poly>]) -> GeneralizedSection {
    let (n, r) = (ctx.n(), ctx.r());
    let big = n + r;
    let mut v = vec![Poly::zero(big); big];
    let mut a = vec![Poly::zero(big); big];
    for (b, img) in cols.iter().enumerate() {
        let u = fiber_coordinate(ctx, b);
        for (p, f) in img.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let term = &pullback(ctx, f) * &u;
            if p < n {
                a[p] += &term;
            } else {
                v[p] += &term;
            }
        }
    }
    GeneralizedSection {
        v: Multivector::vector(big, v),
        a: Form::covector(big, a),
    }
}

/// The derivation induced on `Ω¹(M, E*)` by a derivation `D` of `E` over `X`:
/// `(Dω)(Y) = D*(ω(Y)) − ω[X, Y]`. Forms are given as `ω[a][i]`.
pub fn derive_form(d: &Derivation, omega: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let r = omega.len();
    let x = &d.symbol;
    let n = x.len();
    (0..r)
        .map(|a| {
            (0..n)
                .map(|i| {
                    let mut acc = apply_field(x, &omega[a][i]);
                    for b in 0..r {
                        if !d.matrix[b][a].is_zero() && !omega[b][i].is_zero() {
                            acc -= &(&d.matrix[b][a] * &omega[b][i]);
                        }
                    }
                    for j in 0..n {
                        let c = x[j].diff(i);
                        if !c.is_zero() && !omega[a][j].is_zero() {
                            acc += &(&c * &omega[a][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `ω[a][i]` for an `E*`-valued 1-form.
pub fn form_array(w: &VectorValuedForm<Poly>) -> Vec<Vec<Poly>> {
    debug_assert_eq!(w.degree(), 1);
    let n = w.nvars();
    w.components()
        .iter()
        .map(|c| (0..n).map(|i| c.coeff(1 << i)).collect())
        .collect()
}

/// `H = dΛ_μ + Λ_ω` with `μ` of degree `k − 1` and `ω` of degree `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearKFormDecomp {
    pub mu: VectorValuedForm<Poly>,
    pub omega: VectorValuedForm<Poly>,
}

impl LinearKFormDecomp {
    pub fn reconstruct(&self, ctx: &BundleContext) -> Form<Poly> {
        lambda(ctx, &self.mu).d().add(&lambda(ctx, &self.omega))
    }
}

/// Linear `k`-forms: `dx`-only terms homogeneous of degree one in `u`, terms
/// with a single `du` free of `u`, nothing with two or more `du`.
pub fn check_linear_form(ctx: &BundleContext, h: &Form<Poly>) -> Result<()> {
    let (n, big) = (ctx.n(), total_vars(ctx));
    if h.nvars() != big {
        return Err(Error::NvarsMismatch {
            left: h.nvars(),
            right: big,
        });
    }
    let u_mask = ((1u64 << big) - 1) & !((1u64 << n) - 1);
    for (m, f) in h.terms() {
        let basis = indices_of(m)
            .into_iter()
            .map(|i| format!("d{}", total_var_name(ctx, i)))
            .collect::<Vec<_>>()
            .join("∧");
        match (m & u_mask).count_ones() {
            0 => check_u_degree(ctx, f, 1, basis, true)?,
            1 => check_u_degree(ctx, f, 0, basis, true)?,
            _ => {
                return Err(Error::NotLinearForm {
                    witness: render_term(ctx, f, basis),
                })
            }
        }
    }
    Ok(())
}

pub fn decompose_linear_kform(ctx: &BundleContext, h: &Form<Poly>) -> Result<LinearKFormDecomp> {
    check_linear_form(ctx, h)?;
    let (n, r) = (ctx.n(), ctx.r());
    let big = n + r;
    let k = h.degree();
    let base = |f: &Poly| to_base(ctx, f).expect("linearity leaves coefficients u-free");
    let base_form = |w: &Form<Poly>| {
        let mut out = Form::zero(n, w.degree());
        for (m, f) in w.terms() {
            out.add_term(m, base(f));
        }
        out
    };
    let mu = if k == 0 {
        VectorValuedForm::zero(n, 0, r)
    } else {
        // dΛ_μ = Σ du_a ∧ μ_a + u_a dμ_a, so ι_{∂u_a} picks out μ_a.
        let comps = (0..r).map(|a| base_form(&h.contract_basis(n + a))).collect();
        VectorValuedForm::new(n, k - 1, comps)?
    };
    let rest = h.sub(&lambda(ctx, &mu).d());
    let comps = (0..r)
        .map(|a| {
            let mut w = Form::zero(n, k);
            for (m, f) in rest.terms() {
                w.add_term(m, base(&f.linear_coeff(n + a, n, big)));
            }
            w
        })
        .collect();
    let omega = VectorValuedForm::new(n, k, comps)?;
    Ok(LinearKFormDecomp { mu, omega })
}

/// A linear form is closed exactly when its `ω` part vanishes.
pub fn is_closed_linear(ctx: &BundleContext, h: &Form<Poly>) -> Result<bool> {
    Ok(decompose_linear_kform(ctx, h)?.omega.is_zero())
}
