//! The lift `Ξ` of a bracket to linear sections of `TE ⊕ T*E`, and checkers
//! for the identities it satisfies.
//!
//! `Ξ(X, ε) = (D̂_{δ_ν}, dℓ_ε − (pr_{T*M} 𝒟_ν ι_E)~)` is computed from the
//! dual operator, so it is additive in `ν` but not `C^∞(M)`-linear.

mod omni;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::{json, Value};
use std::collections::BTreeMap;

pub use omni::{omni_anchor_pairing, omni_bracket, omni_lie_derivative, omni_pairing, OmniSection};

use crate::brackets::diagnostics::{
    check_jacobi_random, generator_pass, Coverage, OperatorCache, GENERATOR_COVERAGE,
};
use crate::brackets::BracketSpec;
use crate::bundle::{pairing, AnchoredSection, Bracket, BundleContext, CoSection};
use crate::cartan::{Form, VectorValuedForm};
use crate::error::{Error, Result};
use crate::json::{cosection_to_json, generalized_to_json, poly_to_json, section_to_json};
use crate::report::Verdict;
use crate::sampling::{find_first, map_indexed, random_cosection, random_section, sub_rng, SamplePlan};
use crate::scalar::Poly;
use crate::total_space::{
    b_transform, chi_of, core_linear, courant_dorfman_total, courant_dorfman_twisted, ell,
    form_array, lambda, linear_vf, pairing_total, pullback, vertical_lift, GeneralizedSection,
};

const SALT_NATURAL: u64 = 11;
const SALT_MAIN2: u64 = 12;
const SALT_TWIST: u64 = 13;
const SALT_SYMMETRY: u64 = 14;
const SALT_SYMMETRY_BASE: u64 = 15;

/// `Ξ(ν)` for the bracket `br`.
pub fn build_lift<B: Bracket + ?Sized>(br: &B, nu: &AnchoredSection) -> GeneralizedSection {
    chi_of(br.context(), &nu.eps, &br.dual_operator(nu))
}

/// `(ι_X μ)~` for an `E*`-valued 2-form `μ`.
pub fn twist_core(ctx: &BundleContext, mu: &VectorValuedForm<Poly>, nu: &AnchoredSection) -> GeneralizedSection {
    let big = crate::total_space::total_vars(ctx);
    let mut out = GeneralizedSection::zero(big);
    if !mu.is_zero() {
        out.a = core_linear(ctx, &form_array(&mu.interior(&nu.vector_field())));
    }
    out
}

/// The exact difference reported by a checker.
#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    Total(GeneralizedSection),
    Base(AnchoredSection),
    Function(Poly),
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Total(g) => g.is_zero(),
            Residual::Base(s) => s.is_zero(),
            Residual::Function(f) => f.is_zero(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Residual::Total(g) => json!({"kind": "total", "value": generalized_to_json(g)}),
            Residual::Base(s) => json!({"kind": "base", "value": section_to_json(s)}),
            Residual::Function(f) => json!({"kind": "function", "value": poly_to_json(f)}),
        }
    }
}

impl Serialize for Residual {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Verdict of a lift-level checker. `holds` is true exactly when `residual`
/// is zero; the other checks are reported alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftReport {
    pub holds: bool,
    pub residual: Residual,
    pub witness: Option<Value>,
    pub coverage: Coverage,
    pub checks: BTreeMap<String, Verdict>,
}

impl LiftReport {
    fn new(found: Option<(Value, Residual)>, zero: Residual, coverage: Coverage) -> Self {
        let (witness, residual) = match found {
            Some((w, r)) => (Some(w), r),
            None => (None, zero),
        };
        LiftReport {
            holds: residual.is_zero(),
            residual,
            witness,
            coverage,
            checks: BTreeMap::new(),
        }
    }

    /// All reported checks pass as well.
    pub fn all_pass(&self) -> bool {
        self.holds && self.checks.values().all(Verdict::holds)
    }
}

impl Serialize for LiftReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("holds", &self.holds)?;
        m.serialize_entry("residual", &self.residual)?;
        if let Some(w) = &self.witness {
            m.serialize_entry("witness", w)?;
        }
        m.serialize_entry("coverage", &self.coverage)?;
        if !self.checks.is_empty() {
            m.serialize_entry("checks", &self.checks)?;
        }
        m.end()
    }
}

fn coverage(plan: &SamplePlan, generator_pairs: u64) -> Coverage {
    Coverage {
        random_trials: plan.trials,
        max_degree: plan.max_degree,
        generator_pairs,
        generator_status: (generator_pairs > 0).then_some(GENERATOR_COVERAGE),
    }
}

/// A section together with its lift.
struct Lifted {
    nu: AnchoredSection,
    xi: GeneralizedSection,
}

type PairResidual<'a> = dyn Fn(&Lifted, &Lifted) -> GeneralizedSection + Sync + 'a;
type Lifter<'a> = dyn Fn(&AnchoredSection) -> GeneralizedSection + Sync + 'a;

/// First failing pair: random pairs, then every ordered pair of generators.
fn search_pairs(
    ctx: &BundleContext,
    plan: &SamplePlan,
    salt: u64,
    lift: &Lifter<'_>,
    gens: Option<&[Lifted]>,
    residual: &PairResidual<'_>,
) -> (Option<(Value, Residual)>, u64) {
    let draw = |t: u64| {
        let mut rng = sub_rng(plan.seed, t, salt);
        let a = random_section(&mut rng, ctx, plan.max_degree);
        let b = random_section(&mut rng, ctx, plan.max_degree);
        let (xa, xb) = (lift(&a), lift(&b));
        (Lifted { nu: a, xi: xa }, Lifted { nu: b, xi: xb })
    };
    let random = find_first(plan.trials as usize, |t| {
        let (a, b) = draw(t as u64);
        let res = residual(&a, &b);
        (!res.is_zero()).then(|| (pair_witness(&a.nu, &b.nu, json!({"trial": t})), Residual::Total(res)))
    });
    if let Some((_, hit)) = random {
        return (Some(hit), 0);
    }
    let Some(gens) = gens else {
        return (None, 0);
    };
    let len = gens.len();
    let hit = find_first(len * len, |k| {
        let (a, b) = (&gens[k / len], &gens[k % len]);
        let res = residual(a, b);
        (!res.is_zero()).then(|| {
            (
                pair_witness(&a.nu, &b.nu, json!({"generator_pair": [k / len, k % len]})),
                Residual::Total(res),
            )
        })
    });
    (hit.map(|(_, h)| h), (len * len) as u64)
}

fn pair_witness(a: &AnchoredSection, b: &AnchoredSection, origin: Value) -> Value {
    let mut w = json!({"nu1": section_to_json(a), "nu2": section_to_json(b)});
    for (k, v) in origin.as_object().into_iter().flatten() {
        w[k] = v.clone();
    }
    w
}

/// Generator sections with their lifts from a shared operator cache.
fn lifted_generators<B: Bracket + ?Sized>(cache: &OperatorCache<'_, B>, ctx: &BundleContext) -> Vec<Lifted> {
    let gens = cache.generators();
    map_indexed(gens.len(), |i| {
        let nu = gens[i].section(ctx);
        let xi = chi_of(ctx, &nu.eps, cache.op(i));
        Lifted { nu, xi }
    })
}

/// `⟦Ξν₁, Ξν₂⟧ − Ξ⟦ν₁, ν₂⟧`.
pub fn natural_residual<B: Bracket + ?Sized>(
    br: &B,
    nu1: &AnchoredSection,
    nu2: &AnchoredSection,
) -> GeneralizedSection {
    let lhs = courant_dorfman_total(&build_lift(br, nu1), &build_lift(br, nu2));
    lhs.sub(&build_lift(br, &br.eval(nu1, nu2)))
}

/// Naturality of the lift on random pairs and, when the plan asks for it,
/// on every ordered pair of monomial generators of degree ≤ 1.
pub fn check_natural<B: Bracket + ?Sized>(br: &B, plan: &SamplePlan) -> LiftReport {
    let ctx = br.context();
    let big = crate::total_space::total_vars(ctx);
    let cache = plan.exhaustive.then(|| OperatorCache::new(br, 1));
    let gens = cache.as_ref().map(|c| lifted_generators(c, ctx));
    let lift = |nu: &AnchoredSection| match &cache {
        Some(c) => chi_of(ctx, &nu.eps, &c.assemble(nu)),
        None => build_lift(br, nu),
    };
    let residual = |a: &Lifted, b: &Lifted| {
        courant_dorfman_total(&a.xi, &b.xi).sub(&lift(&br.eval(&a.nu, &b.nu)))
    };
    let (found, pairs) = search_pairs(ctx, plan, SALT_NATURAL, &lift, gens.as_deref(), &residual);
    LiftReport::new(found, Residual::Total(GeneralizedSection::zero(big)), coverage(plan, pairs))
}

/// The three groups of identities relating `Ξ` to the pairing, the anchor
/// and the core sections, on random samples.
pub fn check_main2<B: Bracket + ?Sized>(br: &B, plan: &SamplePlan) -> LiftReport {
    let ctx = br.context();
    let (n, r) = (ctx.n(), ctx.r());
    let big = crate::total_space::total_vars(ctx);
    let items = [
        "pairing_lifts",
        "pairing_core",
        "anchor_lift",
        "anchor_core",
        "core_bracket",
    ];
    let outcomes: Vec<Option<(usize, Value, Residual)>> = items
        .iter()
        .enumerate()
        .map(|(item, _)| {
            find_first(plan.trials as usize, |t| {
                let mut rng = sub_rng(plan.seed, t as u64, SALT_MAIN2);
                let nu1 = random_section(&mut rng, ctx, plan.max_degree);
                let nu2 = random_section(&mut rng, ctx, plan.max_degree);
                let tau = random_cosection(&mut rng, ctx, plan.max_degree);
                let xi1 = build_lift(br, &nu1);
                let res = match item {
                    0 => {
                        let sym = br.eval(&nu1, &nu2).add(&br.eval(&nu2, &nu1));
                        let xi2 = build_lift(br, &nu2);
                        Residual::Function(&pairing_total(&xi1, &xi2) - &ell(ctx, &sym.eps))
                    }
                    1 => Residual::Function(
                        &pairing_total(&xi1, &vertical_lift(ctx, &tau)) - &pullback(ctx, &pairing(&nu1, &tau)),
                    ),
                    2 => {
                        // δ_ν from 𝒟_ν applied to the fibre frame, independently of Ξ.
                        let mut delta = crate::bundle::Derivation::zero(ctx);
                        delta.symbol = nu1.x.clone();
                        for b in 0..r {
                            let col = br.dual_derivation(&nu1, &CoSection::frame_e(ctx, b));
                            for a in 0..r {
                                delta.matrix[a][b] = col.e[a].clone();
                            }
                        }
                        let mut g = GeneralizedSection::zero(big);
                        g.v = xi1.v.sub(&linear_vf(ctx, &delta));
                        Residual::Total(g)
                    }
                    3 => {
                        let e_only = CoSection {
                            e: tau.e.clone(),
                            theta: vec![ctx.zero(); n],
                        };
                        let mut g = GeneralizedSection::zero(big);
                        g.v = vertical_lift(ctx, &tau).v.sub(&vertical_lift(ctx, &e_only).v);
                        Residual::Total(g)
                    }
                    _ => Residual::Total(
                        courant_dorfman_total(&xi1, &vertical_lift(ctx, &tau))
                            .sub(&vertical_lift(ctx, &br.dual_derivation(&nu1, &tau))),
                    ),
                };
                (!res.is_zero()).then(|| {
                    let w = json!({
                        "nu1": section_to_json(&nu1),
                        "nu2": section_to_json(&nu2),
                        "tau": cosection_to_json(&tau),
                        "trial": t,
                        "item": items[item],
                    });
                    (w, res)
                })
            })
            .map(|(t, (w, res))| (t, w, res))
        })
        .collect();
    let first = outcomes
        .iter()
        .flatten()
        .min_by_key(|(t, _, _)| *t)
        .map(|(_, w, res)| (w.clone(), res.clone()));
    let mut report = LiftReport::new(first, Residual::Total(GeneralizedSection::zero(big)), coverage(plan, 0));
    for (name, out) in items.iter().zip(&outcomes) {
        report.checks.insert(
            (*name).to_string(),
            Verdict::from_option(out.as_ref().map(|(_, w, _)| w.clone())),
        );
    }
    report
}

/// `dΛ_μ`, the linear closed 3-form on `E` of an `E*`-valued 2-form.
pub fn twist_form(ctx: &BundleContext, mu: &VectorValuedForm<Poly>) -> Form<Poly> {
    lambda(ctx, mu).d()
}

/// `⟦Ξν₁, Ξν₂⟧_{dΛ_μ} − Ξ⟦ν₁, ν₂⟧_μ` with `Ξ` the lift of `br`.
pub fn twist_residual(
    br: &BracketSpec,
    mu: &VectorValuedForm<Poly>,
    nu1: &AnchoredSection,
    nu2: &AnchoredSection,
) -> Result<GeneralizedSection> {
    let twisted = br.twist(mu)?;
    let h = twist_form(br.context(), mu);
    let lhs = courant_dorfman_twisted(&build_lift(br, nu1), &build_lift(br, nu2), &h);
    Ok(lhs.sub(&build_lift(br, &twisted.eval(nu1, nu2))))
}

/// `⟦Ξ^μν₁, Ξ^μν₂⟧_{−dΛ_μ} − Ξ^μ⟦ν₁, ν₂⟧`, where `Ξ^μ` lifts the twisted
/// bracket and the inner bracket is untwisted. Zero for every `μ`.
pub fn twist_lift_residual(
    br: &BracketSpec,
    mu: &VectorValuedForm<Poly>,
    nu1: &AnchoredSection,
    nu2: &AnchoredSection,
) -> Result<GeneralizedSection> {
    let twisted = br.twist(mu)?;
    let h = twist_form(br.context(), mu).neg();
    let lhs = courant_dorfman_twisted(&build_lift(&twisted, nu1), &build_lift(&twisted, nu2), &h);
    Ok(lhs.sub(&build_lift(&twisted, &br.eval(nu1, nu2))))
}

/// `⟦Ξν, τ↑⟧_{dΛ_μ} − (𝒟^μ_ν τ)↑`. Zero for every `μ`.
pub fn twist_core_residual(
    br: &BracketSpec,
    mu: &VectorValuedForm<Poly>,
    nu: &AnchoredSection,
    tau: &CoSection,
) -> Result<GeneralizedSection> {
    let twisted = br.twist(mu)?;
    let ctx = br.context();
    let h = twist_form(ctx, mu);
    let lhs = courant_dorfman_twisted(&build_lift(br, nu), &vertical_lift(ctx, tau), &h);
    Ok(lhs.sub(&vertical_lift(ctx, &twisted.dual_derivation(nu, tau))))
}

fn require_dorfman(br: &BracketSpec, plan: &SamplePlan) -> Result<()> {
    match check_jacobi_random(br, plan) {
        Verdict::Pass => Ok(()),
        Verdict::Fail(w) => Err(Error::NotDorfman(w.to_string())),
    }
}

/// Whether `μ` twists `br`, decided through the lift: the twisted total
/// bracket must intertwine `Ξ` with the twisted base bracket. The Jacobiator
/// of the twisted bracket is checked alongside, and supplies the witness when
/// `μ` does not twist.
pub fn check_twist(br: &BracketSpec, mu: &VectorValuedForm<Poly>, plan: &SamplePlan) -> Result<LiftReport> {
    let quick = SamplePlan::random_only(plan.seed, plan.trials.min(20), plan.max_degree.min(1));
    require_dorfman(br, &quick)?;
    let twisted = br.twist(mu)?;
    let ctx = br.context();
    let big = crate::total_space::total_vars(ctx);
    let h = twist_form(ctx, mu);
    let cache = plan.exhaustive.then(|| OperatorCache::new(br, 1));
    let gens = cache.as_ref().map(|c| lifted_generators(c, ctx));
    let lift = |nu: &AnchoredSection| match &cache {
        Some(c) => chi_of(ctx, &nu.eps, &c.assemble(nu)),
        None => build_lift(br, nu),
    };
    let residual = |a: &Lifted, b: &Lifted| {
        courant_dorfman_twisted(&a.xi, &b.xi, &h).sub(&lift(&twisted.eval(&a.nu, &b.nu)))
    };
    let (found, pairs) = search_pairs(ctx, plan, SALT_TWIST, &lift, gens.as_deref(), &residual);
    let mut report = LiftReport::new(found, Residual::Total(GeneralizedSection::zero(big)), coverage(plan, pairs));

    let mut jacobi = check_jacobi_random(&twisted, plan);
    if jacobi.holds() && plan.exhaustive {
        jacobi = generator_pass(&twisted).jacobi;
    }
    let agree = jacobi.holds() == report.holds;
    report.checks.insert("twisted_jacobi".into(), jacobi);
    report.checks.insert(
        "agreement".into(),
        if agree {
            Verdict::Pass
        } else {
            Verdict::Fail(json!("the lift criterion and the Jacobiator disagree"))
        },
    );
    Ok(report)
}

/// `Φ_β(X, ε) = (X, ε + ι_X β)`.
pub fn phi_beta(beta: &VectorValuedForm<Poly>, nu: &AnchoredSection) -> AnchoredSection {
    let arr = form_array(beta);
    let mut out = nu.clone();
    for (a, row) in arr.iter().enumerate() {
        for (i, b) in row.iter().enumerate() {
            if !b.is_zero() && !nu.x[i].is_zero() {
                out.eps[a] += &(b * &nu.x[i]);
            }
        }
    }
    out
}

/// `B = −dΛ_β`.
pub fn symmetry_form(ctx: &BundleContext, beta: &VectorValuedForm<Poly>) -> Form<Poly> {
    lambda(ctx, beta).d().neg()
}

/// `Ξ(Φ_β ν) − Φ_B(Ξν)`, the core-linear section `φ̃_ν`.
pub fn symmetry_residual<B: Bracket + ?Sized>(
    br: &B,
    beta: &VectorValuedForm<Poly>,
    nu: &AnchoredSection,
) -> GeneralizedSection {
    let b = symmetry_form(br.context(), beta);
    build_lift(br, &phi_beta(beta, nu)).sub(&b_transform(&b, &build_lift(br, nu)))
}

/// `⟦Φ_β ν₁, Φ_β ν₂⟧ − Φ_β⟦ν₁, ν₂⟧`.
pub fn symmetry_base_defect<B: Bracket + ?Sized>(
    br: &B,
    beta: &VectorValuedForm<Poly>,
    nu1: &AnchoredSection,
    nu2: &AnchoredSection,
) -> AnchoredSection {
    let lhs = br.eval(&phi_beta(beta, nu1), &phi_beta(beta, nu2));
    lhs.sub(&phi_beta(beta, &br.eval(nu1, nu2)))
}

/// Whether `β` is a symmetry, decided by `Φ_{−dΛ_β} ∘ Ξ = Ξ ∘ Φ_β`. The
/// base-level identity is checked on its own samples and the two answers
/// compared.
pub fn check_symmetry(br: &BracketSpec, beta: &VectorValuedForm<Poly>, plan: &SamplePlan) -> Result<LiftReport> {
    let ctx = br.context();
    if beta.nvars() != ctx.n() || beta.rank() != ctx.r() || (beta.degree() != 1 && !beta.is_zero()) {
        return Err(Error::ContextMismatch(format!(
            "symmetry needs an E*-valued 1-form over n = {}, r = {}",
            ctx.n(),
            ctx.r()
        )));
    }
    let quick = SamplePlan::random_only(plan.seed, plan.trials.min(20), plan.max_degree.min(1));
    require_dorfman(br, &quick)?;
    let big = crate::total_space::total_vars(ctx);
    let b = symmetry_form(ctx, beta);
    let cache = plan.exhaustive.then(|| OperatorCache::new(br, 1));
    let lift = |nu: &AnchoredSection| match &cache {
        Some(c) => chi_of(ctx, &nu.eps, &c.assemble(nu)),
        None => build_lift(br, nu),
    };
    let unary = |nu: &AnchoredSection| lift(&phi_beta(beta, nu)).sub(&b_transform(&b, &lift(nu)));

    let random = find_first(plan.trials as usize, |t| {
        let mut rng = sub_rng(plan.seed, t as u64, SALT_SYMMETRY);
        let nu = random_section(&mut rng, ctx, plan.max_degree);
        let res = unary(&nu);
        (!res.is_zero()).then(|| (json!({"nu": section_to_json(&nu), "trial": t}), Residual::Total(res)))
    })
    .map(|(_, h)| h);
    let gens: Vec<AnchoredSection> = cache
        .as_ref()
        .map(|c| c.generators().iter().map(|g| g.section(ctx)).collect())
        .unwrap_or_default();
    let found = random.or_else(|| {
        find_first(gens.len(), |i| {
            let res = unary(&gens[i]);
            (!res.is_zero()).then(|| (json!({"nu": section_to_json(&gens[i]), "generator": i}), Residual::Total(res)))
        })
        .map(|(_, h)| h)
    });
    let pairs = (gens.len() * gens.len()) as u64;
    let mut report = LiftReport::new(found, Residual::Total(GeneralizedSection::zero(big)), coverage(plan, pairs));

    let base_random = find_first(plan.trials as usize, |t| {
        let mut rng = sub_rng(plan.seed, t as u64, SALT_SYMMETRY_BASE);
        let a = random_section(&mut rng, ctx, plan.max_degree);
        let c = random_section(&mut rng, ctx, plan.max_degree);
        let d = symmetry_base_defect(br, beta, &a, &c);
        (!d.is_zero()).then(|| pair_witness(&a, &c, json!({"trial": t, "defect": section_to_json(&d)})))
    })
    .map(|(_, w)| w);
    let len = gens.len();
    let base = base_random.or_else(|| {
        find_first(len * len, |k| {
            let (a, c) = (&gens[k / len], &gens[k % len]);
            let d = symmetry_base_defect(br, beta, a, c);
            (!d.is_zero()).then(|| {
                pair_witness(a, c, json!({"generator_pair": [k / len, k % len], "defect": section_to_json(&d)}))
            })
        })
        .map(|(_, w)| w)
    });
    let base = Verdict::from_option(base);
    let agree = base.holds() == report.holds;
    report.checks.insert("base_level".into(), base);
    report.checks.insert(
        "agreement".into(),
        if agree {
            Verdict::Pass
        } else {
            Verdict::Fail(json!("the lift-level and base-level criteria disagree"))
        },
    );
    Ok(report)
}

/// Whether `d⟨Φ_B(Ξν), φ̃⟩` is core-linear, for `φ ∈ Hom(E, E ⊕ T*M)` given
/// by the flat images of the fibre frame.
pub fn linvert_is_core<B: Bracket + ?Sized>(
    br: &B,
    beta: &VectorValuedForm<Poly>,
    phi: &[Vec<Poly>],
    nu: &AnchoredSection,
) -> bool {
    let ctx = br.context();
    let b = symmetry_form(ctx, beta);
    let chi = b_transform(&b, &build_lift(br, nu));
    let f = pairing_total(&chi, &crate::total_space::core_section(ctx, phi));
    crate::total_space::is_core_linear(ctx, &Form::scalar(f.nvars(), f).d())
}
