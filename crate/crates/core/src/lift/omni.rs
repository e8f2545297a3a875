//! The `E*`-valued bracket on `Der(E*) ⊕ J¹(E*)`.
//!
//! A jet `μ` is stored as `(ε, φ)` with `φ ∈ Hom(TM, E*)` as `φ[a][i]`, the
//! `a`-component of `φ(∂_i)`. Derivations of `E*` use the same layout as
//! derivations of `E`: `d(ε)_a = X(ε_a) + Σ_b M_ab ε_b`.

use crate::bundle::{apply_field, Derivation};
use crate::error::{Error, Result};
use crate::scalar::Poly;
use crate::total_space::LinearSectionDecomp;

#[derive(Clone, Debug, PartialEq)]
pub struct OmniSection {
    pub d: Derivation,
    pub eps: Vec<Poly>,
    pub phi: Vec<Vec<Poly>>,
}

impl OmniSection {
    /// The linear section `(D̂_{d_χ}, dℓ_ε − φ̃_χ)` goes to
    /// `(d_χ*, (ε, −φ_χ))`.
    pub fn from_linear(dec: &LinearSectionDecomp) -> Self {
        OmniSection {
            d: dec.d.dual(),
            eps: dec.eps.clone(),
            phi: dec.phi.iter().map(|row| row.iter().map(|p| -p).collect()).collect(),
        }
    }

    pub fn to_linear(&self) -> LinearSectionDecomp {
        LinearSectionDecomp {
            d: self.d.dual(),
            eps: self.eps.clone(),
            phi: self.phi.iter().map(|row| row.iter().map(|p| -p).collect()).collect(),
        }
    }

    fn dims(&self) -> (usize, usize) {
        (self.d.symbol.len(), self.d.rank())
    }
}

fn zip_sub(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `L_d(ε, φ) = (dε, (L_X ∘ φ* − φ* ∘ d*)*)`. In components the second
/// entry is `X(φ[a][j]) + Σ_i φ[a][i] ∂_j X^i + Σ_b M_ab φ[b][j]`.
pub fn omni_lie_derivative(d: &Derivation, eps: &[Poly], phi: &[Vec<Poly>]) -> (Vec<Poly>, Vec<Vec<Poly>>) {
    let x = &d.symbol;
    let n = x.len();
    let r = d.rank();
    let out_phi = (0..r)
        .map(|a| {
            (0..n)
                .map(|j| {
                    let mut acc = apply_field(x, &phi[a][j]);
                    for i in 0..n {
                        let c = x[i].diff(j);
                        if !c.is_zero() && !phi[a][i].is_zero() {
                            acc += &(&phi[a][i] * &c);
                        }
                    }
                    for b in 0..r {
                        if !d.matrix[a][b].is_zero() && !phi[b][j].is_zero() {
                            acc += &(&d.matrix[a][b] * &phi[b][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    (d.apply(eps), out_phi)
}

/// `⟨d, μ⟩ = d(ε) + φ(X)`.
pub fn omni_anchor_pairing(d: &Derivation, eps: &[Poly], phi: &[Vec<Poly>]) -> Vec<Poly> {
    let mut out = d.apply(eps);
    for (a, o) in out.iter_mut().enumerate() {
        for (i, xi) in d.symbol.iter().enumerate() {
            if !xi.is_zero() && !phi[a][i].is_zero() {
                *o += &(&phi[a][i] * xi);
            }
        }
    }
    out
}

fn check_dims(s1: &OmniSection, s2: &OmniSection) -> Result<()> {
    if s1.dims() != s2.dims() {
        return Err(Error::ContextMismatch(format!(
            "omni sections over (n, r) = {:?} and {:?}",
            s1.dims(),
            s2.dims()
        )));
    }
    Ok(())
}

/// `⟦(d₁,μ₁),(d₂,μ₂)⟧ = ([d₁,d₂], L_{d₁}μ₂ − L_{d₂}μ₁ + j¹⟨d₂,μ₁⟩)`, with
/// `j¹ε = (ε, 0)`.
pub fn omni_bracket(s1: &OmniSection, s2: &OmniSection) -> Result<OmniSection> {
    check_dims(s1, s2)?;
    let (e12, p12) = omni_lie_derivative(&s1.d, &s2.eps, &s2.phi);
    let (e21, p21) = omni_lie_derivative(&s2.d, &s1.eps, &s1.phi);
    let jet = omni_anchor_pairing(&s2.d, &s1.eps, &s1.phi);
    let eps = zip_sub(&e12, &e21).iter().zip(&jet).map(|(a, b)| a + b).collect();
    let phi = p12.iter().zip(&p21).map(|(a, b)| zip_sub(a, b)).collect();
    Ok(OmniSection {
        d: s1.d.commutator(&s2.d),
        eps,
        phi,
    })
}

/// The symmetric `E*`-valued pairing `⟨d₁, μ₂⟩ + ⟨d₂, μ₁⟩`.
pub fn omni_pairing(s1: &OmniSection, s2: &OmniSection) -> Result<Vec<Poly>> {
    check_dims(s1, s2)?;
    let a = omni_anchor_pairing(&s1.d, &s2.eps, &s2.phi);
    let b = omni_anchor_pairing(&s2.d, &s1.eps, &s1.phi);
    Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect())
}
