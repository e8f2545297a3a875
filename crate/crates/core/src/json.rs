//! JSON encodings. Decoding validates every invariant and names the path of
//! the offending value.

use serde_json::{json, Map, Value};

use crate::bundle::{AnchoredSection, BundleContext, CoSection, Derivation, FiberModel};
use crate::cartan::{Form, Graded, Kind, Multivector, VectorValuedForm};
use crate::error::{Error, Result};
use crate::scalar::{FourierPoly, Gauss, Poly, Rational, Scalar};
use crate::total_space::{GeneralizedSection, LinearKFormDecomp, LinearSectionDecomp};

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| err(path, format!("missing field \"{key}\"")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| err(path, "expected an integer"))
}

pub fn rational_from_json(v: &Value, path: &str) -> Result<Rational> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() => n.to_string(),
        _ => return Err(err(path, "expected an exact fraction string \"p/q\"")),
    };
    s.parse::<Rational>().map_err(|e| match e {
        Error::ZeroDenominator => err(path, "zero denominator"),
        other => err(path, other),
    })
}

pub fn poly_to_json(p: &Poly) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .rev()
        .map(|(m, c)| json!({"exps": m.to_dense(p.nvars()), "coeff": c.to_string()}))
        .collect();
    json!({"nvars": p.nvars(), "terms": terms})
}

pub fn poly_from_json(v: &Value, path: &str) -> Result<Poly> {
    let nvars = as_usize(field(v, "nvars", path)?, &format!("{path}.nvars"))?;
    let tpath = format!("{path}.terms");
    let mut terms = Vec::new();
    for (k, t) in as_array(field(v, "terms", path)?, &tpath)?.iter().enumerate() {
        let tp = format!("{tpath}[{k}]");
        let exps_path = format!("{tp}.exps");
        let exps: Vec<u32> = as_array(field(t, "exps", &tp)?, &exps_path)?
            .iter()
            .map(|e| as_usize(e, &exps_path).map(|x| x as u32))
            .collect::<Result<_>>()?;
        if exps.len() != nvars {
            return Err(err(
                &exps_path,
                format!("expected {nvars} exponents, found {}", exps.len()),
            ));
        }
        let c = rational_from_json(field(t, "coeff", &tp)?, &format!("{tp}.coeff"))?;
        terms.push((exps, c));
    }
    Poly::from_terms(nvars, terms).map_err(|e| err(path, e))
}

pub fn fourier_to_json(p: &FourierPoly) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(&(a, b), g)| json!({"freq": [a, b], "re": g.re.to_string(), "im": g.im.to_string()}))
        .collect();
    json!({"terms": terms})
}

pub fn fourier_from_json(v: &Value, path: &str) -> Result<FourierPoly> {
    let tpath = format!("{path}.terms");
    let mut terms = Vec::new();
    for (k, t) in as_array(field(v, "terms", path)?, &tpath)?.iter().enumerate() {
        let tp = format!("{tpath}[{k}]");
        let fp = format!("{tp}.freq");
        let freq = as_array(field(t, "freq", &tp)?, &fp)?;
        if freq.len() != 2 {
            return Err(err(&fp, "expected two frequencies"));
        }
        let a = as_i64(&freq[0], &fp)?;
        let b = as_i64(&freq[1], &fp)?;
        let re = rational_from_json(field(t, "re", &tp)?, &format!("{tp}.re"))?;
        let im = match t.get("im") {
            Some(x) => rational_from_json(x, &format!("{tp}.im"))?,
            None => Rational::ZERO,
        };
        terms.push(((a, b), Gauss::new(re, im)));
    }
    FourierPoly::from_terms(terms).map_err(|e| err(path, e))
}

pub fn graded_to_json<S: Scalar, K: Kind>(g: &Graded<S, K>, coeff: &dyn Fn(&S) -> Value) -> Value {
    let terms: Vec<Value> = g
        .sorted_terms()
        .into_iter()
        .map(|(idx, c)| json!({"idx": idx, "coeff": coeff(c)}))
        .collect();
    json!({"kind": K::NAME, "degree": g.degree(), "terms": terms})
}

pub fn graded_from_json<S: Scalar, K: Kind>(
    v: &Value,
    nvars: usize,
    path: &str,
    coeff: &dyn Fn(&Value, &str) -> Result<S>,
) -> Result<Graded<S, K>> {
    if let Some(kind) = v.get("kind") {
        if kind.as_str() != Some(K::NAME) {
            return Err(err(path, format!("expected kind \"{}\", found {kind}", K::NAME)));
        }
    }
    let degree = as_usize(field(v, "degree", path)?, &format!("{path}.degree"))?;
    let mut out = Graded::<S, K>::zero(nvars, degree);
    let tpath = format!("{path}.terms");
    for (k, t) in as_array(field(v, "terms", path)?, &tpath)?.iter().enumerate() {
        let tp = format!("{tpath}[{k}]");
        let ip = format!("{tp}.idx");
        let idx: Vec<usize> = as_array(field(t, "idx", &tp)?, &ip)?
            .iter()
            .map(|i| as_usize(i, &ip))
            .collect::<Result<_>>()?;
        if idx.len() != degree {
            return Err(err(&ip, format!("expected {degree} indices, found {}", idx.len())));
        }
        let c = coeff(field(t, "coeff", &tp)?, &format!("{tp}.coeff"))?;
        if c.nvars() != nvars {
            return Err(err(
                &format!("{tp}.coeff"),
                format!("coefficient has {} variables, expected {nvars}", c.nvars()),
            ));
        }
        let term = Graded::<S, K>::monomial(nvars, &idx, c).map_err(|e| err(&ip, e))?;
        out = out.add(&term);
    }
    Ok(out)
}

pub fn form_to_json<K: Kind>(g: &Graded<Poly, K>) -> Value {
    graded_to_json(g, &poly_to_json)
}

pub fn form_from_json(v: &Value, nvars: usize, path: &str) -> Result<Form<Poly>> {
    graded_from_json(v, nvars, path, &poly_from_json)
}

pub fn multivector_from_json(v: &Value, nvars: usize, path: &str) -> Result<Multivector<Poly>> {
    graded_from_json(v, nvars, path, &poly_from_json)
}

pub fn context_to_json(ctx: &BundleContext) -> Value {
    json!({"n": ctx.n(), "r": ctx.r(), "fiber_model": ctx.fiber()})
}

pub fn context_from_json(v: &Value, path: &str) -> Result<BundleContext> {
    let n = as_usize(field(v, "n", path)?, &format!("{path}.n"))?;
    let fiber: FiberModel = match v.get("fiber_model") {
        Some(f) => serde_json::from_value(f.clone())
            .map_err(|e| err(&format!("{path}.fiber_model"), e))?,
        None => FiberModel::Generic,
    };
    match v.get("r") {
        Some(r) => BundleContext::new(n, as_usize(r, &format!("{path}.r"))?, fiber),
        None => BundleContext::with_model(n, fiber),
    }
    .map_err(|e| err(path, e))
}

fn vector_from_json(v: &Value, n: usize, path: &str) -> Result<Vec<Poly>> {
    let x = multivector_from_json(v, n, path)?;
    if x.degree() != 1 && !x.is_zero() {
        return Err(err(path, "expected a vector field (degree 1)"));
    }
    Ok((0..n).map(|i| x.coeff(1 << i)).collect())
}

fn polys_from_json(v: &Value, len: usize, n: usize, path: &str) -> Result<Vec<Poly>> {
    let arr = as_array(v, path)?;
    if arr.len() != len {
        return Err(err(path, format!("expected {len} components, found {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(k, p)| {
            let pp = format!("{path}[{k}]");
            let q = poly_from_json(p, &pp)?;
            if q.nvars() != n {
                return Err(err(&pp, format!("expected {n} variables, found {}", q.nvars())));
            }
            Ok(q)
        })
        .collect()
}

pub fn section_to_json(s: &AnchoredSection) -> Value {
    let n = s.x.len();
    json!({
        "X": form_to_json(&Multivector::vector(n, s.x.clone())),
        "eps": s.eps.iter().map(poly_to_json).collect::<Vec<_>>(),
    })
}

pub fn section_from_json(ctx: &BundleContext, v: &Value, path: &str) -> Result<AnchoredSection> {
    let x = vector_from_json(field(v, "X", path)?, ctx.n(), &format!("{path}.X"))?;
    let eps = polys_from_json(field(v, "eps", path)?, ctx.r(), ctx.n(), &format!("{path}.eps"))?;
    Ok(AnchoredSection { x, eps })
}

pub fn cosection_to_json(s: &CoSection) -> Value {
    json!({
        "e": s.e.iter().map(poly_to_json).collect::<Vec<_>>(),
        "theta": form_to_json(&s.theta_form()),
    })
}

pub fn cosection_from_json(ctx: &BundleContext, v: &Value, path: &str) -> Result<CoSection> {
    let e = polys_from_json(field(v, "e", path)?, ctx.r(), ctx.n(), &format!("{path}.e"))?;
    let tp = format!("{path}.theta");
    let theta = form_from_json(field(v, "theta", path)?, ctx.n(), &tp)?;
    if theta.degree() != 1 && !theta.is_zero() {
        return Err(err(&tp, "expected a 1-form"));
    }
    Ok(CoSection::from_theta_form(ctx, e, &theta))
}

pub fn vvf_to_json(f: &VectorValuedForm<Poly>) -> Value {
    json!({
        "degree": f.degree(),
        "components": f.components().iter().map(form_to_json).collect::<Vec<_>>(),
    })
}

/// Reads an `E*`-valued form of degree `degree`, given either explicitly as
/// `{"components": [...]}` or as a scalar form `{"form": ...}` to be split
/// along the fibre (see [`crate::brackets::embed_scalar_form`]).
pub fn vvf_from_json(
    ctx: &BundleContext,
    v: &Value,
    degree: usize,
    path: &str,
) -> Result<VectorValuedForm<Poly>> {
    if let Some(f) = v.get("form") {
        let fp = format!("{path}.form");
        let form = form_from_json(f, ctx.n(), &fp)?;
        return crate::brackets::embed_scalar_form(ctx, &form, degree).map_err(|e| err(&fp, e));
    }
    let cp = format!("{path}.components");
    let comps = as_array(field(v, "components", path)?, &cp)?;
    if comps.len() != ctx.r() {
        return Err(err(&cp, format!("expected {} components, found {}", ctx.r(), comps.len())));
    }
    let forms: Vec<Form<Poly>> = comps
        .iter()
        .enumerate()
        .map(|(k, c)| form_from_json(c, ctx.n(), &format!("{cp}[{k}]")))
        .collect::<Result<_>>()?;
    for (k, f) in forms.iter().enumerate() {
        if f.degree() != degree && !f.is_zero() {
            return Err(err(
                &format!("{cp}[{k}]"),
                format!("expected degree {degree}, found {}", f.degree()),
            ));
        }
    }
    VectorValuedForm::new(ctx.n(), degree, forms).map_err(|e| err(path, e))
}

pub fn generalized_to_json(g: &GeneralizedSection) -> Value {
    json!({
        "total_vars": g.nvars(),
        "V": form_to_json(&g.v),
        "A": form_to_json(&g.a),
    })
}

pub fn generalized_from_json(v: &Value, path: &str) -> Result<GeneralizedSection> {
    let nvars = as_usize(field(v, "total_vars", path)?, &format!("{path}.total_vars"))?;
    let vp = format!("{path}.V");
    let vf = multivector_from_json(field(v, "V", path)?, nvars, &vp)?;
    if vf.degree() != 1 && !vf.is_zero() {
        return Err(err(&vp, "expected a vector field (degree 1)"));
    }
    let ap = format!("{path}.A");
    let a = form_from_json(field(v, "A", path)?, nvars, &ap)?;
    if a.degree() != 1 && !a.is_zero() {
        return Err(err(&ap, "expected a 1-form"));
    }
    let vf = if vf.is_zero() { Multivector::zero(nvars, 1) } else { vf };
    let a = if a.is_zero() { Form::zero(nvars, 1) } else { a };
    Ok(GeneralizedSection::new(vf, a))
}

/// Stable key order for byte-identical output.
pub fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<_> = m.into_iter().collect();
            keys.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, x) in keys {
                out.insert(k, sorted(x));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_linear_poly() {
        let v: Value = serde_json::from_str(r#"{"nvars":1,"terms":[{"exps":[1],"coeff":"1/1"}]}"#).unwrap();
        assert_eq!(poly_from_json(&v, "$").unwrap(), Poly::var(1, 0));
    }

    #[test]
    fn zero_denominator_reported() {
        let v: Value = serde_json::from_str(r#"{"nvars":1,"terms":[{"exps":[1],"coeff":"1/0"}]}"#).unwrap();
        let e = poly_from_json(&v, "$").unwrap_err().to_string();
        assert!(e.contains("zero denominator"), "{e}");
        assert!(e.contains("$.terms[0].coeff"), "{e}");
    }

    #[test]
    fn non_increasing_indices_reported() {
        let v: Value = serde_json::from_str(
            r#"{"degree":2,"terms":[{"idx":[2,1],"coeff":{"nvars":3,"terms":[{"exps":[0,0,0],"coeff":"1"}]}}]}"#,
        )
        .unwrap();
        let e = form_from_json(&v, 3, "$").unwrap_err().to_string();
        assert!(e.contains("indices not strictly increasing"), "{e}");
    }

    #[test]
    fn roundtrips() {
        let p = &(&Poly::var(2, 0) * &Poly::var(2, 1)) + &Poly::constant(2, Rational::new(-3, 4).unwrap());
        assert_eq!(poly_from_json(&poly_to_json(&p), "$").unwrap(), p);
        let f = Form::monomial(2, &[0, 1], p.clone()).unwrap();
        assert_eq!(form_from_json(&form_to_json(&f), 2, "$").unwrap(), f);
        let q = &FourierPoly::cos(1, 2, Rational::from_int(3)) + &FourierPoly::sin(0, 1, Rational::ONE);
        assert_eq!(fourier_from_json(&fourier_to_json(&q), "$").unwrap(), q);
        let ctx = BundleContext::tangent(2);
        assert_eq!(context_from_json(&context_to_json(&ctx), "$").unwrap(), ctx);
        let s = AnchoredSection::new(&ctx, vec![p.clone(), Poly::zero(2)], vec![Poly::one(2), p]).unwrap();
        assert_eq!(section_from_json(&ctx, &section_to_json(&s), "$").unwrap(), s);
    }
}

pub fn derivation_to_json(d: &Derivation) -> Value {
    json!({
        "symbol": d.symbol.iter().map(poly_to_json).collect::<Vec<_>>(),
        "matrix": d.matrix.iter().map(|row| row.iter().map(poly_to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// `(d, ε, φ)` with `φ[a][i]` the `dx_i`-coefficient paired with `u_a`.
pub fn linear_decomp_to_json(dec: &LinearSectionDecomp) -> Value {
    json!({
        "d": derivation_to_json(&dec.d),
        "eps": dec.eps.iter().map(poly_to_json).collect::<Vec<_>>(),
        "phi": dec.phi.iter().map(|row| row.iter().map(poly_to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn kform_decomp_to_json(dec: &LinearKFormDecomp) -> Value {
    json!({"mu": vvf_to_json(&dec.mu), "omega": vvf_to_json(&dec.omega)})
}
