//! A Leibniz algebroid on `T*T² ⊕ ∧²T*T²` with zero anchor whose bracket
//! integrates over the first circle factor, so it is not a differential
//! operator.
//!
//! Angles are `θ₁, θ₂` with coframe `η_x = dθ₁`, `η_y = dθ₂`. The circle
//! measure is normalized, so `∫ η = 1`.

use serde_json::{json, Value};

use crate::cartan::Form;
use crate::error::{Error, Result};
use crate::json::{fourier_from_json, fourier_to_json, graded_from_json, graded_to_json};
use crate::sampling::{random_fourier, sub_rng};
use crate::scalar::{FourierPoly, Rational};

const X: u64 = 0b01;
const Y: u64 = 0b10;
const XY: u64 = 0b11;

#[derive(Clone, Debug, PartialEq)]
pub struct TorusSection {
    pub alpha1: Form<FourierPoly>,
    pub alpha2: Form<FourierPoly>,
}

impl TorusSection {
    pub fn new(alpha1: Form<FourierPoly>, alpha2: Form<FourierPoly>) -> Result<Self> {
        if alpha1.nvars() != 2 || alpha1.degree() != 1 || alpha2.nvars() != 2 || alpha2.degree() != 2 {
            return Err(Error::ContextMismatch(format!(
                "torus sections are (1-form, 2-form) on T², got degrees ({}, {})",
                alpha1.degree(),
                alpha2.degree()
            )));
        }
        Ok(TorusSection { alpha1, alpha2 })
    }

    pub fn zero() -> Self {
        TorusSection {
            alpha1: Form::zero(2, 1),
            alpha2: Form::zero(2, 2),
        }
    }

    /// `(f η_x + g η_y, h η_x∧η_y)`.
    pub fn from_coeffs(f: FourierPoly, g: FourierPoly, h: FourierPoly) -> Self {
        let mut s = Self::zero();
        s.alpha1.add_term(X, f);
        s.alpha1.add_term(Y, g);
        s.alpha2.add_term(XY, h);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.alpha1.is_zero() && self.alpha2.is_zero()
    }

    pub fn sub(&self, o: &Self) -> Self {
        TorusSection {
            alpha1: self.alpha1.sub(&o.alpha1),
            alpha2: self.alpha2.sub(&o.alpha2),
        }
    }

    pub fn mul_fn(&self, f: &FourierPoly) -> Self {
        TorusSection {
            alpha1: self.alpha1.mul_scalar(f),
            alpha2: self.alpha2.mul_scalar(f),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha1": graded_to_json(&self.alpha1, &fourier_to_json),
            "alpha2": graded_to_json(&self.alpha2, &fourier_to_json),
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let field = |k: &str, deg: usize| -> Result<Form<FourierPoly>> {
            let p = format!("{path}.{k}");
            let raw = v.get(k).ok_or_else(|| Error::Parse(format!("{p}: missing")))?;
            let f: Form<FourierPoly> = graded_from_json(raw, 2, &p, &fourier_from_json)?;
            if f.degree() != deg {
                return Err(Error::Parse(format!("{p}: expected degree {deg}, got {}", f.degree())));
            }
            Ok(f)
        };
        TorusSection::new(field("alpha1", 1)?, field("alpha2", 2)?)
    }
}

/// `∫(f η_x + g η_y) = ∫f`, a function of `θ₂`.
pub fn integrate_one_form(a: &Form<FourierPoly>) -> FourierPoly {
    a.coeff(X).integrate_first()
}

/// `∫(h η_x∧η_y) = (∫h) η_y`.
pub fn integrate_two_form(a: &Form<FourierPoly>) -> Form<FourierPoly> {
    let mut out = Form::zero(2, 1);
    out.add_term(Y, a.coeff(XY).integrate_first());
    out
}

/// `⟦(α₁,α₂),(β₁,β₂)⟧ = (0, (∫α₁)β₂ + (∫α₂)∧β₁)`.
pub fn nonlocal_bracket(s1: &TorusSection, s2: &TorusSection) -> TorusSection {
    let first = s2.alpha2.mul_scalar(&integrate_one_form(&s1.alpha1));
    let second = integrate_two_form(&s1.alpha2).wedge(&s2.alpha1);
    TorusSection {
        alpha1: Form::zero(2, 1),
        alpha2: first.add(&second),
    }
}

/// `⟦s₁,⟦s₂,s₃⟧⟧ − ⟦⟦s₁,s₂⟧,s₃⟧ − ⟦s₂,⟦s₁,s₃⟧⟧`.
pub fn torus_jacobiator(s1: &TorusSection, s2: &TorusSection, s3: &TorusSection) -> TorusSection {
    let b = nonlocal_bracket;
    b(s1, &b(s2, s3)).sub(&b(&b(s1, s2), s3)).sub(&b(s2, &b(s1, s3)))
}

pub fn random_torus_section(seed: u64, trial: u64, salt: u64, max_freq: i64) -> TorusSection {
    let mut rng = sub_rng(seed, trial, salt);
    TorusSection::from_coeffs(
        random_fourier(&mut rng, max_freq),
        random_fourier(&mut rng, max_freq),
        random_fourier(&mut rng, max_freq),
    )
}

/// First seeded triple whose Jacobiator is nonzero, if any.
pub fn torus_jacobi_search(seed: u64, trials: u64, max_freq: i64) -> Option<(u64, [TorusSection; 3], TorusSection)> {
    crate::sampling::find_first(trials as usize, |t| {
        let t = t as u64;
        let s = [1, 2, 3].map(|salt| random_torus_section(seed, t, salt, max_freq));
        let j = torus_jacobiator(&s[0], &s[1], &s[2]);
        (!j.is_zero()).then_some((t, s, j))
    })
    .map(|(_, w)| w)
}

/// Exact value at `θ₁ = θ₂ = 0`, where every exponential is 1.
pub fn value_at_origin(p: &FourierPoly) -> Rational {
    p.terms().fold(Rational::ZERO, |acc, (_, g)| &acc + &g.re)
}

/// Largest `m ≤ cap` such that all partial derivatives of order `≤ m`
/// vanish at the origin, or `None` if `p(0) ≠ 0`.
pub fn vanishing_order(p: &FourierPoly, cap: usize) -> Option<usize> {
    let mut layer = vec![p.clone()];
    let mut order = None;
    for m in 0..=cap {
        if layer.iter().any(|q| !value_at_origin(q).is_zero()) {
            return order;
        }
        order = Some(m);
        layer = layer
            .iter()
            .flat_map(|q| [q.diff(0), q.diff(1)])
            .filter(|q| !q.is_zero())
            .collect();
        if layer.is_empty() {
            return Some(cap);
        }
    }
    order
}

/// Two first arguments whose coefficients agree to order `jet_order` at the
/// origin, yet whose brackets with `second` differ there.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalityWitness {
    pub first: TorusSection,
    pub other: TorusSection,
    pub second: TorusSection,
    pub jet_order: usize,
    pub values: (Rational, Rational),
}

impl LocalityWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "first": self.first.to_json(),
            "other": self.other.to_json(),
            "second": self.second.to_json(),
            "jet_order": self.jet_order,
            "point": [0, 0],
            "values": [self.values.0.to_string(), self.values.1.to_string()],
        })
    }
}

/// Searches `f = Π (1 − cos θ₁)` style candidates with frequency up to
/// `max_frequency` against the zero section, keeping the one with the
/// highest jet agreement.
pub fn is_local_witness(max_frequency: i64) -> Option<LocalityWitness> {
    let second = TorusSection::from_coeffs(FourierPoly::zero(), FourierPoly::zero(), FourierPoly::constant(Rational::ONE));
    let one_minus_cos = &FourierPoly::constant(Rational::ONE) - &FourierPoly::cos(1, 0, Rational::ONE);
    let cap = 2 * max_frequency.max(0) as usize + 1;
    let mut best: Option<LocalityWitness> = None;
    let mut f = FourierPoly::constant(Rational::ONE);
    for _ in 0..max_frequency.max(0) {
        f = &f * &one_minus_cos;
        let Some(order) = vanishing_order(&f, cap) else { continue };
        let first = TorusSection::from_coeffs(f.clone(), FourierPoly::zero(), FourierPoly::zero());
        let other = TorusSection::zero();
        let at = |s: &TorusSection| value_at_origin(&nonlocal_bracket(s, &second).alpha2.coeff(XY));
        let values = (at(&first), at(&other));
        if values.0 != values.1 && best.as_ref().is_none_or(|b| order > b.jet_order) {
            best = Some(LocalityWitness {
                first,
                other,
                second: second.clone(),
                jet_order: order,
                values,
            });
        }
    }
    best
}
