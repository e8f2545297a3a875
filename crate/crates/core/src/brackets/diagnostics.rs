//! Leibniz, anchor and Jacobi diagnostics for a bracket.
//!
//! Jacobi is checked two ways. Random triples give the Jacobiator directly.
//! The generator pass works with `R = [𝒟₁, 𝒟₂] − 𝒟_{⟦ν₁,ν₂⟧}`, which satisfies
//! `⟨ν₃, R τ⟩ = −⟨J(ν₁, ν₂, ν₃), τ⟩`. Once Leibniz and the anchor identity
//! hold, `R` is `C^∞`-linear in `τ`, so its columns on the constant frame
//! cover every third argument at once. The `E`-block of `R ∘ ι_E` is the
//! first condition `[δ₁, δ₂] = δ_{⟦ν₁,ν₂⟧}`, the `T*M`-block the second.

use std::collections::HashMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::jacobiator;
use crate::bundle::{apply_field, AnchoredSection, Bracket, DualOperator};
use crate::json::{poly_to_json, section_to_json};
use crate::report::Verdict;
use crate::sampling::{
    decompose_generators, find_first, generators_of_degree, map_indexed, random_poly,
    random_section, run_trials, sub_rng, Generator, SamplePlan,
};
use crate::scalar::Poly;

const SALT_LEIBNIZ: u64 = 1;
const SALT_ANCHOR: u64 = 2;
const SALT_JACOBI: u64 = 3;
const SALT_DIAG: u64 = 4;

/// Label for the generator pass in reports: it is evidence, not a proof.
pub const GENERATOR_COVERAGE: &str = "verified on generator set";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coverage {
    pub random_trials: u64,
    pub max_degree: u32,
    /// Ordered pairs of monomial generators of degree ≤ 1, each against the
    /// whole constant frame; 0 when the pass was skipped.
    pub generator_pairs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_status: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobiReport {
    pub leibniz2: Verdict,
    pub anchor: Verdict,
    pub jacobi: Verdict,
    pub diag1: Verdict,
    pub diag2: Verdict,
    pub coverage: Coverage,
}

impl JacobiReport {
    pub fn holds(&self) -> bool {
        self.leibniz2.holds()
            && self.anchor.holds()
            && self.jacobi.holds()
            && self.diag1.holds()
            && self.diag2.holds()
    }
}

/// `⟦ν₁, fν₂⟧ − f⟦ν₁,ν₂⟧ − X₁(f)ν₂`.
pub fn leibniz_defect<B: Bracket + ?Sized>(
    br: &B,
    a: &AnchoredSection,
    b: &AnchoredSection,
    f: &Poly,
) -> AnchoredSection {
    let lhs = br.eval(a, &b.mul_fn(f));
    let rhs = br.eval(a, b).mul_fn(f).add(&b.mul_fn(&apply_field(&a.x, f)));
    lhs.sub(&rhs)
}

/// `ρ⟦ν₁,ν₂⟧ − [X₁,X₂]`, as a section with zero fibre part.
pub fn anchor_defect<B: Bracket + ?Sized>(
    br: &B,
    a: &AnchoredSection,
    b: &AnchoredSection,
) -> AnchoredSection {
    let ctx = br.context();
    let bracket = br.eval(a, b);
    let lie = a.vector_field().lie_bracket(&b.vector_field());
    AnchoredSection {
        x: (0..ctx.n()).map(|i| &bracket.x[i] - &lie.component(i)).collect(),
        eps: vec![ctx.zero(); ctx.r()],
    }
}

pub fn check_leibniz2<B: Bracket + ?Sized>(br: &B, plan: &SamplePlan) -> Verdict {
    let ctx = br.context();
    let hit = find_first(plan.trials as usize, |t| {
        let mut rng = sub_rng(plan.seed, t as u64, SALT_LEIBNIZ);
        let a = random_section(&mut rng, ctx, plan.max_degree);
        let b = random_section(&mut rng, ctx, plan.max_degree);
        let f = random_poly(&mut rng, ctx.n(), plan.max_degree);
        let defect = leibniz_defect(br, &a, &b, &f);
        (!defect.is_zero()).then(|| {
            json!({
                "nu1": section_to_json(&a),
                "nu2": section_to_json(&b),
                "f": poly_to_json(&f),
                "defect": section_to_json(&defect),
            })
        })
    });
    Verdict::from_option(hit.map(|(t, w)| with_trial(w, t)))
}

pub fn check_anchor<B: Bracket + ?Sized>(br: &B, plan: &SamplePlan) -> Verdict {
    let ctx = br.context();
    let hit = find_first(plan.trials as usize, |t| {
        let mut rng = sub_rng(plan.seed, t as u64, SALT_ANCHOR);
        let a = random_section(&mut rng, ctx, plan.max_degree);
        let b = random_section(&mut rng, ctx, plan.max_degree);
        let defect = anchor_defect(br, &a, &b);
        (!defect.is_zero()).then(|| {
            json!({
                "nu1": section_to_json(&a),
                "nu2": section_to_json(&b),
                "defect": section_to_json(&defect),
            })
        })
    });
    Verdict::from_option(hit.map(|(t, w)| with_trial(w, t)))
}

fn with_trial(mut w: Value, t: usize) -> Value {
    w["trial"] = json!(t);
    w
}

/// A random triple, the same for a given `(seed, trial)`.
pub fn random_triple<B: Bracket + ?Sized>(
    br: &B,
    plan: &SamplePlan,
    trial: u64,
) -> [AnchoredSection; 3] {
    let ctx = br.context();
    let mut rng = sub_rng(plan.seed, trial, SALT_JACOBI);
    [
        random_section(&mut rng, ctx, plan.max_degree),
        random_section(&mut rng, ctx, plan.max_degree),
        random_section(&mut rng, ctx, plan.max_degree),
    ]
}

fn jacobi_witness(a: &AnchoredSection, b: &AnchoredSection, c: &AnchoredSection, j: &AnchoredSection) -> Value {
    json!({
        "nu1": section_to_json(a),
        "nu2": section_to_json(b),
        "nu3": section_to_json(c),
        "jacobiator": section_to_json(j),
    })
}

/// Jacobiator on `plan.trials` random triples; the first nonzero one is the
/// witness.
pub fn check_jacobi_random<B: Bracket + ?Sized>(br: &B, plan: &SamplePlan) -> Verdict {
    let hit = find_first(plan.trials as usize, |t| {
        let [a, b, c] = random_triple(br, plan, t as u64);
        let j = jacobiator(br, &a, &b, &c);
        (!j.is_zero()).then(|| jacobi_witness(&a, &b, &c, &j))
    });
    Verdict::from_option(hit.map(|(t, w)| with_trial(w, t)))
}

/// Column `c` of `[𝒟₁, 𝒟₂] − 𝒟_h` on the constant frame.
pub fn residual_column(d1: &DualOperator, d2: &DualOperator, dh: &DualOperator, c: usize) -> Vec<Poly> {
    let mut out = d1.apply_flat(&d2.column(c));
    let back = d2.apply_flat(&d1.column(c));
    for (o, b) in out.iter_mut().zip(&back) {
        if !b.is_zero() {
            *o -= b;
        }
    }
    for (p, v) in &dh.cols[c] {
        out[*p] -= v;
    }
    out
}

/// Which blocks of the residual are nonzero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResidualFlags {
    /// Any entry: the Jacobiator itself.
    pub any: bool,
    /// `E`-rows of the `E`-columns.
    pub diag1: bool,
    /// `T*M`-rows of the `E`-columns.
    pub diag2: bool,
}

fn flags_of(d1: &DualOperator, d2: &DualOperator, dh: &DualOperator) -> ResidualFlags {
    let n = d1.n;
    let mut f = ResidualFlags::default();
    for c in 0..n + d1.r {
        for (p, v) in residual_column(d1, d2, dh, c).iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            f.any = true;
            if c >= n {
                if p >= n {
                    f.diag1 = true;
                } else {
                    f.diag2 = true;
                }
            }
        }
        if f.diag1 && f.diag2 {
            break;
        }
    }
    f
}

/// First nonzero residual entry `(row, column, value)` in the requested block.
fn first_entry(
    d1: &DualOperator,
    d2: &DualOperator,
    dh: &DualOperator,
    want: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize, Poly)> {
    for c in 0..d1.n + d1.r {
        for (p, v) in residual_column(d1, d2, dh, c).into_iter().enumerate() {
            if !v.is_zero() && want(p, c) {
                return Some((p, c, v));
            }
        }
    }
    None
}

/// Dual operators of the monomial generators of degree ≤ `max_degree`, with
/// the `𝒟` of any section assembled from them by additivity.
pub struct OperatorCache<'a, B: Bracket + ?Sized> {
    br: &'a B,
    generators: Vec<Generator>,
    index: HashMap<Generator, usize>,
    ops: Vec<DualOperator>,
}

impl<'a, B: Bracket + ?Sized> OperatorCache<'a, B> {
    pub fn new(br: &'a B, max_degree: u32) -> Self {
        let ctx = br.context();
        let generators: Vec<Generator> = (0..=max_degree)
            .flat_map(|d| generators_of_degree(ctx, d))
            .collect();
        let ops = map_indexed(generators.len(), |i| br.dual_operator(&generators[i].section(ctx)));
        let index = generators.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        OperatorCache {
            br,
            generators,
            index,
            ops,
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn op(&self, i: usize) -> &DualOperator {
        &self.ops[i]
    }

    /// `𝒟_ν` by additivity over the generators of `ν`; generators outside
    /// the cache are computed on the spot.
    pub fn assemble(&self, nu: &AnchoredSection) -> DualOperator {
        let ctx = self.br.context();
        let mut acc = DualOperator::zero(ctx);
        for (g, c) in decompose_generators(nu) {
            match self.index.get(&g) {
                Some(&i) => acc.add_scaled(&c, &self.ops[i]),
                None => acc.add_scaled(&c, &self.br.dual_operator(&g.section(ctx))),
            }
        }
        acc
    }
}

/// Outcome of the generator pass.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorPass {
    pub pairs: u64,
    pub jacobi: Verdict,
    pub diag1: Verdict,
    pub diag2: Verdict,
}

fn frame_label(n: usize, p: usize) -> String {
    if p < n {
        format!("dx{p}")
    } else {
        format!("e{}", p - n)
    }
}

/// Runs the residual over every ordered pair of monomial generators of
/// degree ≤ 1.
pub fn generator_pass<B: Bracket + ?Sized>(br: &B) -> GeneratorPass {
    let ctx = br.context();
    let n = ctx.n();
    let cache = OperatorCache::new(br, 1);
    let gens = cache.generators();
    let len = gens.len();
    let pair = |k: usize| (k / len, k % len);
    let sections: Vec<AnchoredSection> = gens.iter().map(|g| g.section(ctx)).collect();
    let flags: Vec<ResidualFlags> = map_indexed(len * len, |k| {
        let (i, j) = pair(k);
        let h = br.eval(&sections[i], &sections[j]);
        flags_of(cache.op(i), cache.op(j), &cache.assemble(&h))
    });

    let witness = |k: usize, want: &dyn Fn(usize, usize) -> bool, diag: bool| -> Value {
        let (i, j) = pair(k);
        let (a, b) = (&sections[i], &sections[j]);
        let dh = cache.assemble(&br.eval(a, b));
        let (p, c, v) = first_entry(cache.op(i), cache.op(j), &dh, want).expect("flagged residual");
        let frame = AnchoredSection::frame(ctx);
        if diag {
            json!({
                "nu1": section_to_json(a),
                "nu2": section_to_json(b),
                "column": frame_label(n, c),
                "row": frame_label(n, p),
                "entry": poly_to_json(&v),
            })
        } else {
            // Row p of the residual is minus the c-component of J(ν₁, ν₂, b_p).
            let third = &frame[p];
            let j = jacobiator(br, a, b, third);
            jacobi_witness(a, b, third, &j)
        }
    };
    let first = |sel: fn(&ResidualFlags) -> bool| flags.iter().position(sel);
    GeneratorPass {
        pairs: (len * len) as u64,
        jacobi: Verdict::from_option(first(|f| f.any).map(|k| witness(k, &|_, _| true, false))),
        diag1: Verdict::from_option(
            first(|f| f.diag1).map(|k| witness(k, &|p, c| p >= n && c >= n, true)),
        ),
        diag2: Verdict::from_option(
            first(|f| f.diag2).map(|k| witness(k, &|p, c| p < n && c >= n, true)),
        ),
    }
}

/// Conditions (1) and (2) on random pairs.
pub fn check_conditions_random<B: Bracket + ?Sized>(br: &B, plan: &SamplePlan) -> (Verdict, Verdict) {
    let ctx = br.context();
    let n = ctx.n();
    let results = run_trials(plan.trials, |t| {
        let mut rng = sub_rng(plan.seed, t, SALT_DIAG);
        let a = random_section(&mut rng, ctx, plan.max_degree);
        let b = random_section(&mut rng, ctx, plan.max_degree);
        let (d1, d2) = (br.dual_operator(&a), br.dual_operator(&b));
        let dh = br.dual_operator(&br.eval(&a, &b));
        let mk = |want: &dyn Fn(usize, usize) -> bool| {
            first_entry(&d1, &d2, &dh, want).map(|(p, c, v)| {
                json!({
                    "nu1": section_to_json(&a),
                    "nu2": section_to_json(&b),
                    "column": frame_label(n, c),
                    "row": frame_label(n, p),
                    "entry": poly_to_json(&v),
                    "trial": t,
                })
            })
        };
        (mk(&|p, c| p >= n && c >= n), mk(&|p, c| p < n && c >= n))
    });
    let mut d1 = None;
    let mut d2 = None;
    for (x, y) in results {
        d1 = d1.or(x);
        d2 = d2.or(y);
    }
    (Verdict::from_option(d1), Verdict::from_option(d2))
}

/// The full diagnostic report.
pub fn jacobi_diagnostics<B: Bracket + ?Sized>(br: &B, plan: &SamplePlan) -> JacobiReport {
    let leibniz2 = check_leibniz2(br, plan);
    let anchor = check_anchor(br, plan);
    let jacobi = check_jacobi_random(br, plan);
    let (diag1, diag2) = check_conditions_random(br, plan);
    let mut coverage = Coverage {
        random_trials: plan.trials,
        max_degree: plan.max_degree,
        generator_pairs: 0,
        generator_status: None,
    };
    let (jacobi, diag1, diag2) = if plan.exhaustive {
        let pass = generator_pass(br);
        coverage.generator_pairs = pass.pairs;
        coverage.generator_status = Some(GENERATOR_COVERAGE);
        (jacobi.and(pass.jacobi), diag1.and(pass.diag1), diag2.and(pass.diag2))
    } else {
        (jacobi, diag1, diag2)
    };
    JacobiReport {
        leibniz2,
        anchor,
        jacobi,
        diag1,
        diag2,
        coverage,
    }
}
