//! Random linear data and the identities shared by the property suites and
//! the acceptance run. Each identity returns `true` when it holds exactly.

#![allow(dead_code)]

use courant_core::brackets::BracketSpec;
use courant_core::bundle::Bracket;
use courant_core::bundle::{pairing, AnchoredSection, BundleContext, CoSection, Derivation};
use courant_core::cartan::{Form, Multivector, VectorValuedForm};
use courant_core::lift::{
    omni_bracket, omni_pairing, twist_core_residual, twist_lift_residual, OmniSection,
};
use courant_core::sampling::{random_cosection, random_poly, random_section, random_vvf, trial_rng};
use courant_core::scalar::Poly;
use courant_core::total_space::{
    chi_of, chi_operator, core_linear, core_section, courant_dorfman_total, d_ell, decompose_linear,
    derive_form, ell, form_array, is_closed_linear, lambda, linear_vf, pairing_total, pullback,
    pullback_form, vertical_lift, LinearSectionDecomp,
};
use rand::Rng;

pub fn random_derivation(rng: &mut impl Rng, ctx: &BundleContext, deg: u32) -> Derivation {
    let (n, r) = (ctx.n(), ctx.r());
    Derivation::new(
        (0..n).map(|_| random_poly(rng, n, deg)).collect(),
        (0..r).map(|_| (0..r).map(|_| random_poly(rng, n, deg)).collect()).collect(),
    )
}

pub fn random_hom(rng: &mut impl Rng, rows: usize, cols: usize, n: usize, deg: u32) -> Vec<Vec<Poly>> {
    (0..rows).map(|_| (0..cols).map(|_| random_poly(rng, n, deg)).collect()).collect()
}

pub fn random_linear(rng: &mut impl Rng, ctx: &BundleContext, deg: u32) -> LinearSectionDecomp {
    LinearSectionDecomp {
        d: random_derivation(rng, ctx, deg),
        eps: (0..ctx.r()).map(|_| random_poly(rng, ctx.n(), deg)).collect(),
        phi: random_hom(rng, ctx.r(), ctx.n(), ctx.n(), deg),
    }
}

/// Contexts with `n ≤ 3`, `r ≤ 3`, cycled by trial.
pub fn small_context(trial: u64) -> BundleContext {
    let shapes = [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (1, 3)];
    let (n, r) = shapes[trial as usize % shapes.len()];
    BundleContext::generic(n, r)
}

fn e_only(ctx: &BundleContext, e: Vec<Poly>) -> CoSection {
    CoSection {
        e,
        theta: vec![ctx.zero(); ctx.n()],
    }
}

fn contract(e: &[Poly], phi: &[Vec<Poly>], n: usize) -> Form<Poly> {
    let mut comps = vec![Poly::zero(n); n];
    for (a, ea) in e.iter().enumerate() {
        for (i, c) in comps.iter_mut().enumerate() {
            *c += &(ea * &phi[a][i]);
        }
    }
    Form::covector(n, comps)
}

/// `φ(Y)` for `φ[a][i]`, as a section of `E*`.
fn hom_on(phi: &[Vec<Poly>], y: &[Poly]) -> Vec<Poly> {
    phi.iter()
        .map(|row| {
            let mut acc = Poly::zero(y.first().map_or(0, |p| p.nvars()));
            for (f, yi) in row.iter().zip(y) {
                acc += &(f * yi);
            }
            acc
        })
        .collect()
}

fn sub(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// The four identities for `θ_χ = dℓ_ε − φ̃_χ`.
pub fn technical_one(seed: u64, trial: u64) -> [bool; 4] {
    let ctx = small_context(trial);
    let n = ctx.n();
    let mut rng = trial_rng(seed, trial);
    let chi = random_linear(&mut rng, &ctx, 2);
    let other = random_linear(&mut rng, &ctx, 2);
    let dd = random_derivation(&mut rng, &ctx, 2);
    let e: Vec<Poly> = (0..ctx.r()).map(|_| random_poly(&mut rng, n, 2)).collect();
    let theta = d_ell(&ctx, &chi.eps).sub(&core_linear(&ctx, &chi.phi));
    let up = vertical_lift(&ctx, &e_only(&ctx, e.clone())).v;
    let eps_e = pairing(&AnchoredSection { x: vec![ctx.zero(); n], eps: chi.eps.clone() }, &e_only(&ctx, e.clone()));

    let one = theta.interior(&up).coeff(0) == pullback(&ctx, &eps_e);
    let two = theta.interior(&linear_vf(&ctx, &dd)).coeff(0)
        == ell(&ctx, &sub(&dd.dual().apply(&chi.eps), &hom_on(&chi.phi, &dd.symbol)));
    let three = theta.lie_derivative(&up)
        == pullback_form(&ctx, &Form::scalar(n, eps_e).d().sub(&contract(&e, &chi.phi, n)));
    let four = theta.lie_derivative(&linear_vf(&ctx, &other.d))
        == d_ell(&ctx, &other.d.dual().apply(&chi.eps)).sub(&core_linear(&ctx, &derive_form(&other.d, &chi.phi)));
    [one, two, three, four]
}

/// `⟦χ, τ↑⟧ = (D_χ τ)↑`, `⟨χ, τ↑⟩ = q*⟨(X,ε), τ⟩`, `pr_{TE} χ = D̂_{d_χ}`.
pub fn prop_1_chi(seed: u64, trial: u64) -> [bool; 3] {
    let ctx = small_context(trial);
    let mut rng = trial_rng(seed, trial);
    let dec = random_linear(&mut rng, &ctx, 2);
    let tau = random_cosection(&mut rng, &ctx, 2);
    let chi = dec.reconstruct(&ctx);
    let op = chi_operator(&ctx, &dec);
    let up = vertical_lift(&ctx, &tau);
    let base = AnchoredSection { x: dec.d.symbol.clone(), eps: dec.eps.clone() };
    [
        courant_dorfman_total(&chi, &up) == vertical_lift(&ctx, &op.apply(&tau)),
        pairing_total(&chi, &up) == pullback(&ctx, &pairing(&base, &tau)),
        chi.v == linear_vf(&ctx, &dec.d),
    ]
}

/// The bracket and pairing of two linear sections through `D_χ`.
pub fn prop_2_chi(seed: u64, trial: u64) -> [bool; 2] {
    let ctx = small_context(trial);
    let mut rng = trial_rng(seed, trial);
    let (d1, d2) = (random_linear(&mut rng, &ctx, 2), random_linear(&mut rng, &ctx, 2));
    let (c1, c2) = (d1.reconstruct(&ctx), d2.reconstruct(&ctx));
    let (o1, o2) = (chi_operator(&ctx, &d1), chi_operator(&ctx, &d2));
    let nu1 = AnchoredSection { x: d1.d.symbol.clone(), eps: d1.eps.clone() };
    let nu2 = AnchoredSection { x: d2.d.symbol.clone(), eps: d2.eps.clone() };
    let eps = o1.dual_apply(&nu2).eps;
    let bracket = chi_of(&ctx, &eps, &o1.commutator(&o2));
    let sym: Vec<Poly> = o1
        .dual_apply(&nu2)
        .eps
        .iter()
        .zip(&o2.dual_apply(&nu1).eps)
        .map(|(a, b)| a + b)
        .collect();
    [
        courant_dorfman_total(&c1, &c2) == bracket,
        pairing_total(&c1, &c2) == ell(&ctx, &sym),
    ]
}

/// `⟦χ, φ̃⟧ = (D_χ φ)~` for `φ ∈ Hom(E, E ⊕ T*M)`.
pub fn new_lemma(seed: u64, trial: u64) -> bool {
    let ctx = small_context(trial);
    let (n, r) = (ctx.n(), ctx.r());
    let mut rng = trial_rng(seed, trial);
    let dec = random_linear(&mut rng, &ctx, 2);
    let phi = random_hom(&mut rng, r, n + r, n, 2);
    let op = chi_operator(&ctx, &dec);
    let derived: Vec<Vec<Poly>> = (0..r)
        .map(|b| {
            let mut img = op.apply_flat(&phi[b]);
            for a in 0..r {
                let m = &dec.d.matrix[a][b];
                if m.is_zero() {
                    continue;
                }
                for (o, p) in img.iter_mut().zip(&phi[a]) {
                    *o -= &(m * p);
                }
            }
            img
        })
        .collect();
    courant_dorfman_total(&dec.reconstruct(&ctx), &core_section(&ctx, &phi)) == core_section(&ctx, &derived)
}

fn iota_array(mu: &VectorValuedForm<Poly>, x: &[Poly]) -> Vec<Vec<Poly>> {
    let n = x.len();
    form_array(&mu.interior(&Multivector::vector(n, x.to_vec())))
}

/// The contractions of `dΛ_μ` with linear and core vector fields.
pub fn inner_identities(seed: u64, trial: u64) -> [bool; 2] {
    let ctx = small_context(trial);
    let (n, r) = (ctx.n(), ctx.r());
    let mut rng = trial_rng(seed, trial);
    let mu = random_vvf(&mut rng, n, 2, r, 2);
    let (d1, d2) = (random_derivation(&mut rng, &ctx, 2), random_derivation(&mut rng, &ctx, 2));
    let e: Vec<Poly> = (0..r).map(|_| random_poly(&mut rng, n, 2)).collect();
    let h = lambda(&ctx, &mu).d();
    let (v1, v2) = (linear_vf(&ctx, &d1), linear_vf(&ctx, &d2));

    let x1 = Multivector::vector(n, d1.symbol.clone());
    let x2 = Multivector::vector(n, d2.symbol.clone());
    let mu12: Vec<Poly> = mu.interior(&x1).interior(&x2).scalars();
    let bracket: Vec<Poly> = (0..n).map(|i| x1.lie_bracket(&x2).component(i)).collect();
    let rhs1 = d_ell(&ctx, &mu12)
        .add(&core_linear(&ctx, &derive_form(&d1, &iota_array(&mu, &d2.symbol))))
        .sub(&core_linear(&ctx, &derive_form(&d2, &iota_array(&mu, &d1.symbol))))
        .sub(&core_linear(&ctx, &iota_array(&mu, &bracket)));
    let inner1 = h.interior(&v1).interior(&v2) == rhs1;

    let up = vertical_lift(&ctx, &e_only(&ctx, e.clone())).v;
    let rhs2 = pullback_form(&ctx, &contract(&e, &iota_array(&mu, &d1.symbol), n)).neg();
    let inner2 = h.interior(&v1).interior(&up) == rhs2;
    [inner1, inner2]
}

/// `ι_{D̂} dΛ_β = −dℓ_{β(X)} + (Dβ)~`.
pub fn inner_product_linear(seed: u64, trial: u64) -> bool {
    let ctx = small_context(trial);
    let (n, r) = (ctx.n(), ctx.r());
    let mut rng = trial_rng(seed, trial);
    let beta = random_vvf(&mut rng, n, 1, r, 2);
    let d = random_derivation(&mut rng, &ctx, 2);
    let arr = form_array(&beta);
    let lhs = lambda(&ctx, &beta).d().interior(&linear_vf(&ctx, &d));
    let rhs = d_ell(&ctx, &hom_on(&arr, &d.symbol)).neg().add(&core_linear(&ctx, &derive_form(&d, &arr)));
    lhs == rhs
}

/// `d(dΛ_μ + Λ_ω) = 0` exactly when `ω = 0`. Returns `(closed, ω == 0)`.
pub fn closed_linear(seed: u64, trial: u64) -> (bool, bool) {
    let ctx = small_context(trial);
    let (n, r) = (ctx.n(), ctx.r());
    let mut rng = trial_rng(seed, trial);
    let k = if n > 1 { 2 } else { 1 };
    let mu = random_vvf(&mut rng, n, k - 1, r, 2);
    let omega = if trial % 2 == 0 {
        VectorValuedForm::zero(n, k, r)
    } else {
        random_vvf(&mut rng, n, k, r, 2)
    };
    let h = lambda(&ctx, &mu).d().add(&lambda(&ctx, &omega));
    let closed = h.d().is_zero();
    assert_eq!(is_closed_linear(&ctx, &h).unwrap(), closed);
    (closed, omega.is_zero())
}

/// The decomposition of the total bracket equals the Omni-Lie bracket of
/// the decompositions, and likewise for the pairing.
pub fn omni_consistency(seed: u64, trial: u64) -> [bool; 2] {
    let ctx = small_context(trial);
    let mut rng = trial_rng(seed, trial);
    let (d1, d2) = (random_linear(&mut rng, &ctx, 2), random_linear(&mut rng, &ctx, 2));
    let (c1, c2) = (d1.reconstruct(&ctx), d2.reconstruct(&ctx));
    let (s1, s2) = (OmniSection::from_linear(&d1), OmniSection::from_linear(&d2));
    let total = decompose_linear(&ctx, &courant_dorfman_total(&c1, &c2)).expect("bracket of linear sections is linear");
    [
        OmniSection::from_linear(&total) == omni_bracket(&s1, &s2).unwrap(),
        pairing_total(&c1, &c2) == ell(&ctx, &omni_pairing(&s1, &s2).unwrap()),
    ]
}

/// Twisted-lift identities that hold for every `μ`.
pub fn twist_unconditional(br: &BracketSpec, seed: u64, trial: u64) -> [bool; 2] {
    let ctx = br.context();
    let mut rng = trial_rng(seed, trial);
    let mu = random_vvf(&mut rng, ctx.n(), 2, ctx.r(), 1);
    let nu1 = random_section(&mut rng, ctx, 2);
    let nu2 = random_section(&mut rng, ctx, 2);
    let tau = random_cosection(&mut rng, ctx, 2);
    [
        twist_lift_residual(br, &mu, &nu1, &nu2).unwrap().is_zero(),
        twist_core_residual(br, &mu, &nu1, &tau).unwrap().is_zero(),
    ]
}
