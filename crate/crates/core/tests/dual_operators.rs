//! The dual operator `𝒟` from the bracket, against closed-form expressions.

use courant_core::brackets::{BracketKind, BracketSpec};
use courant_core::bundle::{AnchoredSection, Bracket, BundleContext, CoSection};
use courant_core::cartan::{Form, Multivector};
use courant_core::sampling::{random_cosection, random_section, trial_rng};
use courant_core::scalar::{Poly, Rational};

fn spec(name: &str, n: usize) -> BracketSpec {
    BracketSpec::standard(BracketKind::parse(name).unwrap(), n).unwrap()
}

fn cosection(ctx: &BundleContext, e: &[Multivector<Poly>], theta: &Form<Poly>) -> CoSection {
    CoSection::from_theta_form(ctx, ctx.from_multivectors(e), theta)
}

/// `𝒟_{(X,α)}(T,θ) = (L_X T, L_X θ + (−1)^k dα(T,·))`.
fn forms_closed_form(ctx: &BundleContext, k: usize, nu: &AnchoredSection, tau: &CoSection) -> CoSection {
    let x = nu.vector_field();
    let alpha = &ctx.to_forms(&nu.eps)[0];
    let t = &ctx.to_multivectors(&tau.e)[0];
    let theta = tau
        .theta_form()
        .lie_derivative(&x)
        .add(&alpha.d().multi_contract(t).unwrap().scale(&Rational::sign(k)));
    cosection(ctx, &[x.lie_derivative(t)], &theta)
}

#[test]
fn forms_dual_matches_closed_form() {
    for (k, n) in [(1, 2), (1, 3), (2, 3), (3, 4)] {
        let br = spec(&format!("forms:{k}"), n);
        let ctx = br.context().clone();
        for t in 0..25 {
            let mut rng = trial_rng(11, t);
            let nu = random_section(&mut rng, &ctx, 2);
            let tau = random_cosection(&mut rng, &ctx, 2);
            assert_eq!(
                br.dual_derivation(&nu, &tau),
                forms_closed_form(&ctx, k, &nu, &tau),
                "k = {k}, n = {n}, trial {t}"
            );
        }
    }
}

#[test]
fn courant_dorfman_dual_is_lie_derivative_pair() {
    // 𝒟_{(X,θ)}(Y, η) = (L_X Y, L_X η − dθ(Y,·)) for k = 1.
    let br = spec("courant-dorfman", 3);
    let ctx = br.context().clone();
    let mut rng = trial_rng(5, 0);
    let nu = random_section(&mut rng, &ctx, 2);
    let tau = random_cosection(&mut rng, &ctx, 2);
    assert_eq!(br.dual_derivation(&nu, &tau), forms_closed_form(&ctx, 1, &nu, &tau));
}

#[test]
fn mixed_printed_term_matches() {
    // 𝒟_{(0;α_k,0,0)}(0,0,T;0) = (−1)^{(k−1)j+1} (0, T⌐dα_k, 0; 0).
    for (k, j, n) in [(1, 1, 3), (1, 2, 4), (2, 1, 4), (0, 1, 2)] {
        let br = spec(&format!("mixed:{k},{j}"), n);
        let ctx = br.context().clone();
        for t in 0..10 {
            let mut rng = trial_rng(3, t);
            let mut nu = random_section(&mut rng, &ctx, 2);
            let alpha = ctx.to_forms(&nu.eps)[0].clone();
            nu = AnchoredSection {
                x: vec![ctx.zero(); n],
                eps: ctx.from_forms(&[alpha.clone(), Form::zero(n, j), Form::zero(n, k + j + 1)]),
            };
            let full = random_cosection(&mut rng, &ctx, 2);
            let top = ctx.to_multivectors(&full.e)[2].clone();
            let tau = cosection(
                &ctx,
                &[Multivector::zero(n, k), Multivector::zero(n, j), top.clone()],
                &Form::zero(n, 1),
            );
            let sign = Rational::sign((k as i64 - 1).rem_euclid(2) as usize * j + 1);
            let printed = cosection(
                &ctx,
                &[
                    Multivector::zero(n, k),
                    alpha.d().contract_into(&top).unwrap().scale(&sign),
                    Multivector::zero(n, k + j + 1),
                ],
                &Form::zero(n, 1),
            );
            assert_eq!(br.dual_derivation(&nu, &tau), printed, "mixed:{k},{j} trial {t}");
        }
    }
}

/// The E7 dual operator as printed when `corrected` is false. With
/// `corrected`, the two `T_7` contraction terms change sign and the third
/// slot becomes the tensor Lie derivative of `T_7 ⊗ Z`.
fn e7_closed_form(ctx: &BundleContext, nu: &AnchoredSection, tau: &CoSection, corrected: bool) -> CoSection {
    let n = ctx.n();
    let x = nu.vector_field();
    let a = ctx.to_forms(&nu.eps);
    let t = ctx.to_multivectors(&tau.e);
    let (da2, da5) = (a[0].d(), a[1].d());
    let s = Rational::sign(corrected as usize);
    let mut e2 = x.lie_derivative(&t[0]).sub(&da2.contract_into(&t[1]).unwrap());
    let mut e5 = x.lie_derivative(&t[1]);
    for i in 0..n {
        let z = Multivector::basis(n, &[i]);
        e2 = e2.add(&da5.interior(&z).contract_into(&t[2 + i]).unwrap().scale(&s));
        e5 = e5.sub(&da2.interior(&z).contract_into(&t[2 + i]).unwrap().scale(&s));
    }
    let mut e7: Vec<Multivector<Poly>> = (0..n)
        .map(|j| {
            if !corrected {
                return Multivector::zero(n, n);
            }
            // (L_X τ)^j = L_X T^j − Σ_i ∂_i(X^j) T^i
            let mut acc = x.lie_derivative(&t[2 + j]);
            for i in 0..n {
                let c = x.component(j).diff(i);
                if !c.is_zero() {
                    acc = acc.sub(&t[2 + i].mul_scalar(&c));
                }
            }
            acc
        })
        .collect();
    let theta = tau
        .theta_form()
        .lie_derivative(&x)
        .add(&da2.multi_contract(&t[0]).unwrap())
        .sub(&da5.multi_contract(&t[1]).unwrap());
    let mut pieces = vec![e2, e5];
    pieces.append(&mut e7);
    cosection(ctx, &pieces, &theta)
}

fn e7_samples() -> (BracketSpec, Vec<(AnchoredSection, CoSection)>) {
    let br = spec("e7", 7);
    let ctx = br.context().clone();
    let samples = (0..6)
        .map(|t| {
            let mut rng = trial_rng(21, t);
            (random_section(&mut rng, &ctx, 1), random_cosection(&mut rng, &ctx, 1))
        })
        .collect();
    (br, samples)
}

#[test]
fn e7_corrected_dual_matches_generic() {
    let (br, samples) = e7_samples();
    for (nu, tau) in &samples {
        assert_eq!(br.dual_derivation(nu, tau), e7_closed_form(br.context(), nu, tau, true));
    }
}

#[test]
fn e7_printed_dual_matches_without_top_piece() {
    let (br, samples) = e7_samples();
    let ctx = br.context();
    for (nu, tau) in &samples {
        let mut t = ctx.to_multivectors(&tau.e);
        for p in t.iter_mut().skip(2) {
            *p = Multivector::zero(7, 7);
        }
        let tau = cosection(ctx, &t, &tau.theta_form());
        assert_eq!(br.dual_derivation(nu, &tau), e7_closed_form(ctx, nu, &tau, false));
    }
}

#[test]
fn e7_printed_dual_differs_on_top_piece() {
    // X = 0, α₅ = x0 dx1∧…∧dx5, τ = ∂-volume ⊗ ∂_0: only the T_7⌐ι_Z dα₅ term
    // contributes, and its printed sign is opposite to the generic one.
    let br = spec("e7", 7);
    let ctx = br.context().clone();
    let alpha5 = Form::monomial(7, &[1, 2, 3, 4, 5], Poly::var(7, 0)).unwrap();
    let nu = AnchoredSection {
        x: vec![ctx.zero(); 7],
        eps: ctx.from_forms(&[
            Form::zero(7, 2),
            alpha5,
            Form::zero(7, 7),
            Form::zero(7, 7),
            Form::zero(7, 7),
            Form::zero(7, 7),
            Form::zero(7, 7),
            Form::zero(7, 7),
            Form::zero(7, 7),
        ]),
    };
    let mut t: Vec<Multivector<Poly>> = vec![Multivector::zero(7, 2), Multivector::zero(7, 5)];
    t.extend((0..7).map(|i| {
        if i == 0 {
            Multivector::basis(7, &[0, 1, 2, 3, 4, 5, 6])
        } else {
            Multivector::zero(7, 7)
        }
    }));
    let tau = cosection(&ctx, &t, &Form::zero(7, 1));
    let generic = br.dual_derivation(&nu, &tau);
    assert!(!generic.is_zero());
    assert_ne!(generic, e7_closed_form(&ctx, &nu, &tau, false));
    assert_eq!(generic, e7_closed_form(&ctx, &nu, &tau, true));
}

#[test]
fn e7_printed_dual_third_slot_misses_lie_derivative() {
    // X = ∂_0 scaled by x0 acting on T_7 ⊗ ∂_0: the printed 0 in the third
    // slot drops L_X(T_7 ⊗ Z).
    let br = spec("e7", 7);
    let ctx = br.context().clone();
    let mut nu = AnchoredSection::zero(&ctx);
    nu.x[0] = Poly::var(7, 0);
    let mut t: Vec<Multivector<Poly>> = vec![Multivector::zero(7, 2), Multivector::zero(7, 5)];
    t.extend((0..7).map(|i| {
        if i == 0 {
            Multivector::basis(7, &[0, 1, 2, 3, 4, 5, 6])
        } else {
            Multivector::zero(7, 7)
        }
    }));
    let tau = cosection(&ctx, &t, &Form::zero(7, 1));
    let generic = br.dual_derivation(&nu, &tau);
    assert_ne!(generic, e7_closed_form(&ctx, &nu, &tau, false));
    assert_eq!(generic, e7_closed_form(&ctx, &nu, &tau, true));
}
