//! Seeded random inputs and the trial runner.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, trial)`, so
//! results do not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{AnchoredSection, BundleContext, CoSection};
use crate::cartan::{subsets, Form, Multivector, VectorValuedForm};
use crate::scalar::{FourierPoly, Monomial, Poly, Rational};

/// How a checker samples its inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub trials: u64,
    /// Coefficient degree bound for random sections.
    pub max_degree: u32,
    /// Also run the pass over all monomial generator sections of degree ≤ 1.
    pub exhaustive: bool,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 0,
            trials: 100,
            max_degree: 2,
            exhaustive: true,
        }
    }
}

impl SamplePlan {
    pub fn random_only(seed: u64, trials: u64, max_degree: u32) -> Self {
        SamplePlan {
            seed,
            trials,
            max_degree,
            exhaustive: false,
        }
    }
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Derives an independent stream for a sub-task of a trial.
pub fn sub_rng(seed: u64, trial: u64, salt: u64) -> ChaCha8Rng {
    trial_rng(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15), trial)
}

fn coeff(rng: &mut impl Rng) -> Rational {
    const CHOICES: [i64; 4] = [-2, -1, 1, 2];
    Rational::from_int(CHOICES[rng.random_range(0..4)])
}

pub fn random_monomial(rng: &mut impl Rng, nvars: usize, max_degree: u32) -> Monomial {
    let d = rng.random_range(0..=max_degree);
    let mut exps = vec![0u32; nvars];
    for _ in 0..d {
        exps[rng.random_range(0..nvars)] += 1;
    }
    Monomial::from_dense(&exps)
}

/// One to three terms, coefficients in `{−2, −1, 1, 2}`, degree ≤ `max_degree`.
/// Cancellation can make the result zero.
pub fn random_poly(rng: &mut impl Rng, nvars: usize, max_degree: u32) -> Poly {
    random_poly_in(rng, nvars, nvars, max_degree)
}

/// Like [`random_poly`] but only the first `active` variables occur.
pub fn random_poly_in(rng: &mut impl Rng, nvars: usize, active: usize, max_degree: u32) -> Poly {
    let nterms = rng.random_range(1..=3);
    let mut p = Poly::zero(nvars);
    for _ in 0..nterms {
        let m = random_monomial(rng, active, max_degree);
        p += &Poly::term(nvars, m, coeff(rng));
    }
    p
}

pub fn random_section(rng: &mut impl Rng, ctx: &BundleContext, max_degree: u32) -> AnchoredSection {
    let n = ctx.n();
    AnchoredSection {
        x: (0..n).map(|_| random_poly(rng, n, max_degree)).collect(),
        eps: (0..ctx.r()).map(|_| random_poly(rng, n, max_degree)).collect(),
    }
}

pub fn random_cosection(rng: &mut impl Rng, ctx: &BundleContext, max_degree: u32) -> CoSection {
    let n = ctx.n();
    CoSection {
        e: (0..ctx.r()).map(|_| random_poly(rng, n, max_degree)).collect(),
        theta: (0..n).map(|_| random_poly(rng, n, max_degree)).collect(),
    }
}

pub fn random_form(rng: &mut impl Rng, nvars: usize, degree: usize, max_degree: u32) -> Form<Poly> {
    let mut f = Form::zero(nvars, degree);
    for m in subsets(nvars, degree) {
        if rng.random_bool(0.6) {
            f.add_term(m, random_poly(rng, nvars, max_degree));
        }
    }
    f
}

pub fn random_vector_field(rng: &mut impl Rng, nvars: usize, max_degree: u32) -> Multivector<Poly> {
    Multivector::vector(nvars, (0..nvars).map(|_| random_poly(rng, nvars, max_degree)).collect())
}

pub fn random_vvf(
    rng: &mut impl Rng,
    nvars: usize,
    degree: usize,
    rank: usize,
    max_degree: u32,
) -> VectorValuedForm<Poly> {
    let comps = (0..rank).map(|_| random_form(rng, nvars, degree, max_degree)).collect();
    VectorValuedForm::new(nvars, degree, comps).expect("consistent random form")
}

/// A real trigonometric polynomial with frequencies bounded by `max_freq`.
pub fn random_fourier(rng: &mut impl Rng, max_freq: i64) -> FourierPoly {
    let nterms = rng.random_range(1..=3);
    let mut p = FourierPoly::zero();
    for _ in 0..nterms {
        let a = rng.random_range(-max_freq..=max_freq);
        let b = rng.random_range(-max_freq..=max_freq);
        let c = coeff(rng);
        let t = if rng.random_bool(0.5) {
            FourierPoly::cos(a, b, c)
        } else {
            FourierPoly::sin(a, b, c)
        };
        p = &p + &t;
    }
    p
}

/// All monomials in `nvars` variables of total degree exactly `d`.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(i: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i + 1 == exps.len() {
            exps[i] = left;
            out.push(Monomial::from_dense(exps));
            exps[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            exps[i] = e;
            rec(i + 1, left - e, exps, out);
        }
        exps[i] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Monomial::one());
        }
        return out;
    }
    rec(0, d, &mut vec![0; nvars], &mut out);
    out
}

/// A section with a single nonzero component, equal to a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    /// Component index in `[X_0, …, X_{n−1}, ε_0, …, ε_{r−1}]`.
    pub slot: usize,
    pub monomial: Monomial,
}

impl Generator {
    pub fn section(&self, ctx: &BundleContext) -> AnchoredSection {
        let n = ctx.n();
        let mut s = AnchoredSection::zero(ctx);
        let p = Poly::term(n, self.monomial.clone(), Rational::ONE);
        if self.slot < n {
            s.x[self.slot] = p;
        } else {
            s.eps[self.slot - n] = p;
        }
        s
    }

    pub fn degree(&self) -> u32 {
        self.monomial.degree()
    }
}

/// Monomial generator sections of coefficient degree exactly `d`.
pub fn generators_of_degree(ctx: &BundleContext, d: u32) -> Vec<Generator> {
    let mons = monomials_of_degree(ctx.n(), d);
    (0..ctx.n() + ctx.r())
        .flat_map(|slot| {
            mons.iter().map(move |m| Generator {
                slot,
                monomial: m.clone(),
            })
        })
        .collect()
}

/// Splits a section into scaled generators.
pub fn decompose_generators(s: &AnchoredSection) -> Vec<(Generator, Rational)> {
    let mut out = Vec::new();
    for (slot, p) in s.x.iter().chain(&s.eps).enumerate() {
        for (m, c) in p.terms() {
            out.push((
                Generator {
                    slot,
                    monomial: m.clone(),
                },
                c.clone(),
            ));
        }
    }
    out
}

/// Runs `f` on `0..trials`, in parallel when the `parallel` feature is on.
/// Results come back in trial order either way.
pub fn run_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    map_indexed(trials as usize, |i| f(i as u64))
}

/// Order-preserving map over `0..len`.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// The first index (in order) for which `f` returns `Some`, evaluated in
/// parallel when enabled.
pub fn find_first<T, F>(len: usize, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().find_map_first(|i| f(i).map(|t| (i, t)))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).find_map(|i| f(i).map(|t| (i, t)))
    }
}
