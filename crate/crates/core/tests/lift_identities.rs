//! Identities of linear sections, linear forms and the lift on `E`.

mod common;

use courant_core::brackets::{embed_scalar_form, BracketKind, BracketSpec};
use courant_core::bundle::{pairing, AnchoredSection, Bracket, BundleContext, CoSection};
use courant_core::cartan::{Form, Multivector};
use courant_core::lift::{build_lift, check_natural, check_twist, linvert_is_core, twist_core};
use courant_core::sampling::{random_section, random_vvf, trial_rng, SamplePlan};
use courant_core::scalar::Poly;
use courant_core::total_space::{decompose_linear, is_linear};
use proptest::prelude::*;

fn cases() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn theta_chi_contractions(seed in any::<u64>(), trial in 0u64..64) {
        prop_assert_eq!(common::technical_one(seed, trial), [true; 4]);
    }

    #[test]
    fn linear_section_against_core(seed in any::<u64>(), trial in 0u64..64) {
        prop_assert_eq!(common::prop_1_chi(seed, trial), [true; 3]);
    }

    #[test]
    fn two_linear_sections(seed in any::<u64>(), trial in 0u64..64) {
        prop_assert_eq!(common::prop_2_chi(seed, trial), [true; 2]);
    }

    #[test]
    fn linear_against_core_linear(seed in any::<u64>(), trial in 0u64..64) {
        prop_assert!(common::new_lemma(seed, trial));
    }

    #[test]
    fn contractions_of_exact_linear_three_form(seed in any::<u64>(), trial in 0u64..64) {
        prop_assert_eq!(common::inner_identities(seed, trial), [true; 2]);
    }

    #[test]
    fn contraction_of_exact_linear_two_form(seed in any::<u64>(), trial in 0u64..64) {
        prop_assert!(common::inner_product_linear(seed, trial));
    }

    #[test]
    fn linear_form_closed_iff_exact(seed in any::<u64>(), trial in 0u64..64) {
        let (closed, exact) = common::closed_linear(seed, trial);
        prop_assert_eq!(closed, exact);
    }

    #[test]
    fn omni_lie_matches_total_space(seed in any::<u64>(), trial in 0u64..64) {
        prop_assert_eq!(common::omni_consistency(seed, trial), [true; 2]);
    }

    #[test]
    fn lifts_are_linear(seed in any::<u64>(), trial in 0u64..16, n in 1usize..4) {
        let br = BracketSpec::standard(BracketKind::CourantDorfman, n).unwrap();
        let ctx = br.context();
        let nu = random_section(&mut trial_rng(seed, trial), ctx, 2);
        let xi = build_lift(&br, &nu);
        prop_assert!(is_linear(ctx, &xi));
        let dec = decompose_linear(ctx, &xi).unwrap();
        prop_assert_eq!(dec.d.symbol, nu.x);
        prop_assert_eq!(dec.eps, nu.eps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn twisted_lift_for_any_mu(seed in any::<u64>(), trial in 0u64..16, n in 2usize..4) {
        let br = BracketSpec::standard(BracketKind::CourantDorfman, n).unwrap();
        prop_assert_eq!(common::twist_unconditional(&br, seed, trial), [true; 2]);
    }

    #[test]
    fn twisted_lift_for_forms(seed in any::<u64>(), trial in 0u64..16) {
        let br = BracketSpec::standard(BracketKind::Forms(2), 3).unwrap();
        prop_assert_eq!(common::twist_unconditional(&br, seed, trial), [true; 2]);
    }
}

#[test]
fn linvert_diagnostic_separates_zero_phi() {
    let br = BracketSpec::standard(BracketKind::CourantDorfman, 2).unwrap();
    let ctx: &BundleContext = br.context();
    let (n, r) = (ctx.n(), ctx.r());
    let zero = vec![vec![ctx.zero(); n + r]; r];
    for t in 0..6 {
        let mut rng = trial_rng(41, t);
        let beta = random_vvf(&mut rng, n, 1, r, 1);
        let phi = common::random_hom(&mut rng, r, n + r, n, 1);
        let samples: Vec<_> = (0..8).map(|_| random_section(&mut rng, ctx, 1)).collect();
        assert!(samples.iter().all(|nu| linvert_is_core(&br, &beta, &zero, nu)));
        if phi.iter().flatten().any(|p| !p.is_zero()) {
            assert!(samples.iter().any(|nu| !linvert_is_core(&br, &beta, &phi, nu)), "trial {t}");
        }
    }
}

fn catalog() -> Vec<BracketSpec> {
    [("courant-dorfman", 3), ("forms:2", 3), ("mixed:1,1", 3), ("lie-only", 2), ("forms:0", 2)]
        .into_iter()
        .map(|(name, n)| BracketSpec::standard(BracketKind::parse(name).unwrap(), n).unwrap())
        .collect()
}

#[test]
fn bracket_recovered_from_dual_operator() {
    // ⟨⟦ν, ν′⟧, τ⟩ = X⟨ν′, τ⟩ − ⟨ν′, 𝒟_ν τ⟩ on the constant frame
    for br in catalog() {
        let ctx = br.context();
        for t in 0..10 {
            let mut rng = trial_rng(17, t);
            let nu = random_section(&mut rng, ctx, 2);
            let nu2 = random_section(&mut rng, ctx, 2);
            let op = br.dual_operator(&nu);
            let x = Multivector::vector(ctx.n(), nu.x.clone());
            let coeff = |tau: &CoSection| &x.apply(&pairing(&nu2, tau)) - &pairing(&nu2, &op.apply(tau));
            let rebuilt = AnchoredSection {
                x: (0..ctx.n()).map(|i| coeff(&CoSection::frame_theta(ctx, i))).collect(),
                eps: (0..ctx.r()).map(|a| coeff(&CoSection::frame_e(ctx, a))).collect(),
            };
            assert_eq!(rebuilt, br.eval(&nu, &nu2), "{} trial {t}", br.name());
        }
    }
}

#[test]
fn lift_of_vector_field_has_no_fibre_differentials() {
    for br in catalog() {
        let ctx = br.context();
        let n = ctx.n();
        for t in 0..10 {
            let mut nu = random_section(&mut trial_rng(19, t), ctx, 2);
            nu.eps = vec![ctx.zero(); ctx.r()];
            let xi = build_lift(&br, &nu);
            assert!(xi.a.terms().all(|(m, _)| m < 1 << n), "{} trial {t}", br.name());
        }
    }
}

#[test]
fn twisting_form_gives_natural_twisted_bracket() {
    let br = BracketSpec::standard(BracketKind::CourantDorfman, 3).unwrap();
    let ctx = br.context();
    let plan = SamplePlan::random_only(5, 30, 2);
    let h = Form::monomial(3, &[0, 1, 2], Poly::var(3, 0)).unwrap();
    let mu = embed_scalar_form(ctx, &h, 2).unwrap();
    assert!(check_twist(&br, &mu, &plan).unwrap().all_pass());
    let twisted = br.twist(&mu).unwrap();
    assert!(check_natural(&twisted, &plan).all_pass());
    for t in 0..10 {
        let nu = random_section(&mut trial_rng(23, t), ctx, 2);
        assert_eq!(build_lift(&twisted, &nu), build_lift(&br, &nu).add(&twist_core(ctx, &mu, &nu)));
    }
}
