//! The Dorfman bracket catalog and twists.

pub mod diagnostics;

use std::fmt;

use crate::bundle::{AnchoredSection, Bracket, BundleContext, FiberModel};
use crate::cartan::{Form, Multivector, VectorValuedForm};
use crate::error::{Error, Result};
use crate::scalar::{Poly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketKind {
    /// `([X,Y], L_X η − ι_Y dθ)` on `TM ⊕ T*M`.
    CourantDorfman,
    /// `([X,Y], L_X β − ι_Y dα)` on `TM ⊕ ∧^k T*M`.
    Forms(usize),
    /// The forms bracket on `TM ⊕ ∧^k ⊕ ∧^j ⊕ ∧^{k+j+1}` plus the mixing terms
    /// `(−1)^{(k−1)j} dα_k ∧ β_j + (−1)^j dα_j ∧ β_k` in the last summand.
    Mixed(usize, usize),
    /// The exceptional bracket on `TM ⊕ ∧²T* ⊕ ∧⁵T* ⊕ (∧⁷T* ⊗ T*)`.
    E7,
    /// `([X,Y], L_X β)`.
    LieOnly,
}

impl fmt::Display for BracketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketKind::CourantDorfman => write!(f, "courant-dorfman"),
            BracketKind::Forms(k) => write!(f, "forms:{k}"),
            BracketKind::Mixed(k, j) => write!(f, "mixed:{k},{j}"),
            BracketKind::E7 => write!(f, "e7"),
            BracketKind::LieOnly => write!(f, "lie-only"),
        }
    }
}

impl BracketKind {
    pub fn parse(name: &str) -> Result<Self> {
        let bad = || Error::UnknownBracket(name.to_string());
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        match name {
            "courant-dorfman" => Ok(BracketKind::CourantDorfman),
            "e7" => Ok(BracketKind::E7),
            "lie-only" => Ok(BracketKind::LieOnly),
            _ => {
                if let Some(k) = name.strip_prefix("forms:") {
                    Ok(BracketKind::Forms(num(k)?))
                } else if let Some(kj) = name.strip_prefix("mixed:") {
                    let (k, j) = kj.split_once(',').ok_or_else(bad)?;
                    Ok(BracketKind::Mixed(num(k)?, num(j)?))
                } else {
                    Err(bad())
                }
            }
        }
    }

    /// The fibre model the bracket is written for.
    pub fn default_fiber(&self) -> FiberModel {
        match *self {
            BracketKind::CourantDorfman | BracketKind::LieOnly => FiberModel::Wedge(vec![1]),
            BracketKind::Forms(k) => FiberModel::Wedge(vec![k]),
            BracketKind::Mixed(k, j) => FiberModel::Wedge(vec![k, j, k + j + 1]),
            BracketKind::E7 => FiberModel::E7,
        }
    }

    pub fn default_context(&self, n: usize) -> Result<BundleContext> {
        BundleContext::with_model(n, self.default_fiber())
    }

    /// Split brackets have `⟦(X,0),(Y,0)⟧ = ([X,Y], 0)`.
    pub fn is_split(&self) -> bool {
        true
    }

    fn check_fiber(&self, ctx: &BundleContext) -> Result<()> {
        let fiber = ctx.fiber();
        let ok = match *self {
            BracketKind::LieOnly => true,
            BracketKind::Forms(0) => {
                matches!(fiber, FiberModel::Generic) || *fiber == FiberModel::Wedge(vec![0])
            }
            BracketKind::E7 => *fiber == FiberModel::E7,
            _ => *fiber == self.default_fiber(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleFiber {
                bracket: self.to_string(),
                reason: format!("needs fiber {}, found {fiber}", self.default_fiber()),
            })
        }
    }
}

/// A catalog bracket on a context, possibly twisted.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketSpec {
    kind: BracketKind,
    ctx: BundleContext,
    twists: Vec<VectorValuedForm<Poly>>,
}

/// Looks up a catalog bracket by name for a context.
pub fn catalog(name: &str, ctx: &BundleContext) -> Result<BracketSpec> {
    BracketSpec::new(BracketKind::parse(name)?, ctx.clone())
}

pub const CATALOG: [&str; 5] = ["courant-dorfman", "forms:k", "mixed:k,j", "e7", "lie-only"];

impl BracketSpec {
    pub fn new(kind: BracketKind, ctx: BundleContext) -> Result<Self> {
        kind.check_fiber(&ctx)?;
        Ok(BracketSpec {
            kind,
            ctx,
            twists: Vec::new(),
        })
    }

    /// The named bracket on its default fibre over `ℝⁿ`.
    pub fn standard(kind: BracketKind, n: usize) -> Result<Self> {
        Self::new(kind, kind.default_context(n)?)
    }

    pub fn kind(&self) -> BracketKind {
        self.kind
    }

    pub fn name(&self) -> String {
        if self.twists.is_empty() {
            self.kind.to_string()
        } else {
            format!("{}+twist", self.kind)
        }
    }

    pub fn twists(&self) -> &[VectorValuedForm<Poly>] {
        &self.twists
    }

    /// Sum of all twists applied so far.
    pub fn total_twist(&self) -> VectorValuedForm<Poly> {
        self.twists
            .iter()
            .fold(VectorValuedForm::zero(self.ctx.n(), 2, self.ctx.r()), |acc, m| acc.add(m))
    }

    /// `⟦ν₁, ν₂⟧_μ = ⟦ν₁, ν₂⟧ + (0, ι_{X₂}ι_{X₁}μ)`.
    pub fn twist(&self, mu: &VectorValuedForm<Poly>) -> Result<BracketSpec> {
        if mu.degree() != 2 && !mu.is_zero() {
            return Err(Error::DegreeMismatch {
                expected: 2,
                found: mu.degree(),
            });
        }
        if mu.nvars() != self.ctx.n() || mu.rank() != self.ctx.r() {
            return Err(Error::ContextMismatch(format!(
                "twist has {} variables and rank {}, context has n = {} and r = {}",
                mu.nvars(),
                mu.rank(),
                self.ctx.n(),
                self.ctx.r()
            )));
        }
        let mut out = self.clone();
        if !mu.is_zero() {
            out.twists.push(mu.clone());
        }
        Ok(out)
    }

    /// The untwisted catalog bracket.
    pub fn untwisted(&self) -> BracketSpec {
        BracketSpec {
            kind: self.kind,
            ctx: self.ctx.clone(),
            twists: Vec::new(),
        }
    }

    fn eval_untwisted(&self, a: &AnchoredSection, b: &AnchoredSection) -> AnchoredSection {
        let ctx = &self.ctx;
        let n = ctx.n();
        let x = a.vector_field();
        let y = b.vector_field();
        let xy = x.lie_bracket(&y);
        let alpha = ctx.to_forms(&a.eps);
        let beta = ctx.to_forms(&b.eps);
        let mut out = fiber_lie_derivative(ctx, &x, &beta);
        let minus_iy_d = |f: &Form<Poly>| f.d().interior(&y).neg();
        match self.kind {
            BracketKind::LieOnly => {}
            BracketKind::CourantDorfman | BracketKind::Forms(_) => {
                for (o, al) in out.iter_mut().zip(&alpha) {
                    *o = o.add(&minus_iy_d(al));
                }
            }
            BracketKind::Mixed(k, j) => {
                for (o, al) in out.iter_mut().zip(&alpha) {
                    *o = o.add(&minus_iy_d(al));
                }
                let sign = Rational::sign(((k as i64 - 1) * j as i64).rem_euclid(2) as usize);
                out[2] = out[2].add(&alpha[0].d().wedge(&beta[1]).scale(&sign));
                // Partner term; without it the Jacobiator of
                // ((0;α,0,0), (0;0,β,0), (Z;0,0,0)) is ±ι_Z dα ∧ dβ.
                let partner = Rational::sign(j);
                out[2] = out[2].add(&alpha[1].d().wedge(&beta[0]).scale(&partner));
            }
            BracketKind::E7 => {
                let (da2, da5) = (alpha[0].d(), alpha[1].d());
                out[0] = out[0].add(&minus_iy_d(&alpha[0]));
                out[1] = out[1].add(&minus_iy_d(&alpha[1])).add(&da2.wedge(&beta[0]));
                for i in 0..n {
                    let e = Multivector::basis(n, &[i]);
                    // (dα ⋄ β)(∂_i) = (ι_{∂_i} dα) ∧ β
                    let diamond = da5
                        .interior(&e)
                        .wedge(&beta[0])
                        .sub(&da2.interior(&e).wedge(&beta[1]));
                    out[2 + i] = out[2 + i].add(&diamond);
                }
            }
        }
        let eps = ctx.from_forms(&out);
        AnchoredSection {
            x: (0..n).map(|i| xy.component(i)).collect(),
            eps,
        }
    }
}

/// `L_X` on the `E*` pieces: forms use the Cartan Lie derivative, the
/// `∧⁷T* ⊗ T*` part of the E7 model the tensor one,
/// `(L_X v)_i = L_X v_i + Σ_j ∂_i(X^j) v_j`.
pub fn fiber_lie_derivative(
    ctx: &BundleContext,
    x: &Multivector<Poly>,
    pieces: &[Form<Poly>],
) -> Vec<Form<Poly>> {
    let mut out: Vec<Form<Poly>> = pieces.iter().map(|p| p.lie_derivative(x)).collect();
    if *ctx.fiber() == FiberModel::E7 {
        let n = ctx.n();
        for i in 0..n {
            for j in 0..n {
                let c = x.component(j).diff(i);
                if !c.is_zero() && !pieces[2 + j].is_zero() {
                    out[2 + i] = out[2 + i].add(&pieces[2 + j].mul_scalar(&c));
                }
            }
        }
    }
    out
}

impl Bracket for BracketSpec {
    fn context(&self) -> &BundleContext {
        &self.ctx
    }

    fn eval(&self, a: &AnchoredSection, b: &AnchoredSection) -> AnchoredSection {
        let mut out = self.eval_untwisted(a, b);
        if self.twists.is_empty() {
            return out;
        }
        let n = self.ctx.n();
        let x = a.vector_field();
        let y = b.vector_field();
        for mu in &self.twists {
            for (slot, comp) in out.eps.iter_mut().zip(mu.components()) {
                // ι_{X₂} ι_{X₁} μ
                let v = comp.interior(&x).interior(&y).coeff(0);
                if !v.is_zero() {
                    *slot += &v;
                }
            }
        }
        debug_assert!(out.x.iter().all(|p| p.nvars() == n));
        out
    }
}

impl BracketSpec {
    pub fn try_eval(&self, a: &AnchoredSection, b: &AnchoredSection) -> Result<AnchoredSection> {
        a.check(&self.ctx)?;
        b.check(&self.ctx)?;
        Ok(self.eval(a, b))
    }
}

/// `J = ⟦ν₁,⟦ν₂,ν₃⟧⟧ − ⟦⟦ν₁,ν₂⟧,ν₃⟧ − ⟦ν₂,⟦ν₁,ν₃⟧⟧`.
pub fn jacobiator<B: Bracket + ?Sized>(
    br: &B,
    a: &AnchoredSection,
    b: &AnchoredSection,
    c: &AnchoredSection,
) -> AnchoredSection {
    let t1 = br.eval(a, &br.eval(b, c));
    let t2 = br.eval(&br.eval(a, b), c);
    let t3 = br.eval(b, &br.eval(a, c));
    t1.sub(&t2).sub(&t3)
}

/// Reads a scalar `(m + k)`-form `ω` as an `E*`-valued `m`-form for
/// `E* = ∧^k T*M`, so that `ι_{X_m}⋯ι_{X_1}` of the result is
/// `ω(X_1, …, X_m, ·, …, ·)`.
///
/// Component `J = (j_1 < ⋯ < j_k)` is `(−1)^{mk} ι_{∂_{j_k}}⋯ι_{∂_{j_1}} ω`.
/// A 3-form `H` on `E = TM` becomes `μ_a = ι_{∂_a} H`; a 2-form `β` becomes
/// `β_a = −ι_{∂_a} β`, so that `ι_X` of it is `ι_X β`.
pub fn embed_scalar_form(
    ctx: &BundleContext,
    omega: &Form<Poly>,
    m: usize,
) -> Result<VectorValuedForm<Poly>> {
    let k = match ctx.fiber() {
        FiberModel::Wedge(ks) if ks.len() == 1 => ks[0],
        FiberModel::Generic => 0,
        other => {
            return Err(Error::IncompatibleFiber {
                bracket: "embedding".into(),
                reason: format!("scalar forms embed only into a single exterior power, not {other}"),
            })
        }
    };
    if omega.degree() != m + k && !omega.is_zero() {
        return Err(Error::DegreeMismatch {
            expected: m + k,
            found: omega.degree(),
        });
    }
    let sign = Rational::sign(m * k);
    let comps = (0..ctx.r())
        .map(|a| {
            let (_, mask) = ctx.locate(a);
            let mut cur = omega.clone();
            for j in crate::cartan::indices_of(mask) {
                cur = cur.contract_basis(j);
            }
            if cur.is_zero() {
                Form::zero(ctx.n(), m)
            } else {
                cur.scale(&sign)
            }
        })
        .collect();
    VectorValuedForm::new(ctx.n(), m, comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::Bracket;

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }

    fn sec(ctx: &BundleContext, xs: Vec<Poly>, eps: Vec<Poly>) -> AnchoredSection {
        AnchoredSection::new(ctx, xs, eps).unwrap()
    }

    #[test]
    fn parse_names() {
        assert_eq!(BracketKind::parse("forms:2").unwrap(), BracketKind::Forms(2));
        assert_eq!(BracketKind::parse("mixed:1,1").unwrap(), BracketKind::Mixed(1, 1));
        assert!(matches!(BracketKind::parse("nope"), Err(Error::UnknownBracket(_))));
        for k in [
            BracketKind::CourantDorfman,
            BracketKind::Forms(3),
            BracketKind::Mixed(2, 1),
            BracketKind::E7,
            BracketKind::LieOnly,
        ] {
            assert_eq!(BracketKind::parse(&k.to_string()).unwrap(), k);
        }
    }

    #[test]
    fn incompatible_fiber_rejected() {
        let ctx = BundleContext::tangent(3);
        assert!(matches!(
            catalog("forms:2", &ctx),
            Err(Error::IncompatibleFiber { .. })
        ));
        assert!(catalog("e7", &ctx).is_err());
    }

    #[test]
    fn courant_dorfman_example() {
        // ⟦(∂x, y dx), (∂y, 0)⟧ = (0, L_{∂x}0 − ι_{∂y} d(y dx)) = (0, −dx)
        let ctx = BundleContext::tangent(2);
        let cd = catalog("courant-dorfman", &ctx).unwrap();
        let z = ctx.zero();
        let a = sec(&ctx, vec![Poly::one(2), z.clone()], vec![x(2, 1), z.clone()]);
        let b = sec(&ctx, vec![z.clone(), Poly::one(2)], vec![z.clone(), z.clone()]);
        let expected = sec(&ctx, vec![z.clone(), z.clone()], vec![Poly::int(2, -1), z]);
        assert_eq!(cd.eval(&a, &b), expected);
    }

    #[test]
    fn forms_two_example() {
        // ⟦(0, x dy∧dz), (∂x, 0)⟧ = (0, −ι_{∂x}(dx∧dy∧dz)) = (0, −dy∧dz)
        let ctx = BundleContext::with_model(3, FiberModel::Wedge(vec![2])).unwrap();
        let br = catalog("forms:2", &ctx).unwrap();
        let z = ctx.zero();
        let yz = ctx.flat_index(0, 0b110);
        let mut eps = vec![z.clone(); 3];
        eps[yz] = x(3, 0);
        let a = sec(&ctx, vec![z.clone(); 3], eps);
        let b = AnchoredSection::coordinate_field(&ctx, 0);
        let mut out_eps = vec![z.clone(); 3];
        out_eps[yz] = Poly::int(3, -1);
        assert_eq!(br.eval(&a, &b), sec(&ctx, vec![z; 3], out_eps));
    }

    #[test]
    fn zero_first_slot() {
        let ctx = BundleContext::tangent(2);
        let nu = sec(&ctx, vec![x(2, 1), Poly::one(2)], vec![x(2, 0), x(2, 1)]);
        for name in ["courant-dorfman", "lie-only"] {
            let br = catalog(name, &ctx).unwrap();
            assert!(br.eval(&AnchoredSection::zero(&ctx), &nu).is_zero());
        }
    }

    fn h_twisted_r4() -> (BundleContext, BracketSpec) {
        let ctx = BundleContext::tangent(4);
        let h = Form::monomial(4, &[0, 1, 2], x(4, 3)).unwrap();
        let mu = embed_scalar_form(&ctx, &h, 2).unwrap();
        let br = catalog("courant-dorfman", &ctx).unwrap().twist(&mu).unwrap();
        (ctx, br)
    }

    #[test]
    fn h_twist_example() {
        let (ctx, br) = h_twisted_r4();
        let out = br.eval(
            &AnchoredSection::coordinate_field(&ctx, 1),
            &AnchoredSection::coordinate_field(&ctx, 2),
        );
        let mut eps = vec![ctx.zero(); 4];
        eps[0] = x(4, 3);
        assert_eq!(out, sec(&ctx, vec![ctx.zero(); 4], eps));
    }

    #[test]
    fn h_twist_jacobiator() {
        let (ctx, br) = h_twisted_r4();
        let f = |i| AnchoredSection::coordinate_field(&ctx, i);
        let j = jacobiator(&br, &f(0), &f(1), &f(2));
        let mut eps = vec![ctx.zero(); 4];
        eps[3] = Poly::int(4, -1);
        assert_eq!(j, sec(&ctx, vec![ctx.zero(); 4], eps));
    }

    #[test]
    fn twist_cancels() {
        let ctx = BundleContext::tangent(3);
        let cd = catalog("courant-dorfman", &ctx).unwrap();
        let h = Form::monomial(3, &[0, 1, 2], x(3, 1)).unwrap();
        let mu = embed_scalar_form(&ctx, &h, 2).unwrap();
        let twice = cd.twist(&mu).unwrap().twist(&mu.neg()).unwrap();
        let a = sec(&ctx, vec![x(3, 2), Poly::one(3), x(3, 0)], vec![x(3, 1), ctx.zero(), Poly::one(3)]);
        let b = sec(&ctx, vec![Poly::one(3), x(3, 0), ctx.zero()], vec![ctx.zero(), x(3, 2), x(3, 0)]);
        assert_eq!(twice.eval(&a, &b), cd.eval(&a, &b));
        assert_eq!(cd.twist(&VectorValuedForm::zero(3, 2, 3)).unwrap(), cd);
    }

    #[test]
    fn beta_embedding_matches_interior() {
        // Φ_β(∂x, 0) = (∂x, dy) for β = dx∧dy.
        let ctx = BundleContext::tangent(2);
        let beta = embed_scalar_form(&ctx, &Form::basis(2, &[0, 1]), 1).unwrap();
        let ix = beta.interior(&Multivector::basis(2, &[0])).scalars();
        assert_eq!(ix, vec![ctx.zero(), Poly::one(2)]);
    }

    #[test]
    fn mixed_term_present() {
        // ⟦(0; x dy, 0, 0), (0; 0, dz, 0)⟧ picks up dα∧β = dx∧dy∧dz.
        let ctx = BundleContext::with_model(3, FiberModel::Wedge(vec![1, 1, 3])).unwrap();
        let br = catalog("mixed:1,1", &ctx).unwrap();
        let z = ctx.zero();
        let mut ea = vec![z.clone(); 7];
        ea[1] = x(3, 0);
        let mut eb = vec![z.clone(); 7];
        eb[3 + 2] = Poly::one(3);
        let a = sec(&ctx, vec![z.clone(); 3], ea);
        let b = sec(&ctx, vec![z.clone(); 3], eb);
        let out = br.eval(&a, &b);
        let mut expected = vec![z.clone(); 7];
        expected[6] = Poly::one(3);
        assert_eq!(out, sec(&ctx, vec![z; 3], expected));
    }
}
