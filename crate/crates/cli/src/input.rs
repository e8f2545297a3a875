//! Reading JSON inputs and resolving the bundle context from flags.

use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use courant_core::brackets::{BracketKind, BracketSpec};
use courant_core::bundle::{AnchoredSection, BundleContext, FiberModel};
use courant_core::cartan::{Form, VectorValuedForm};
use courant_core::json::{form_from_json, generalized_from_json, section_from_json, vvf_from_json};
use courant_core::scalar::Poly;
use courant_core::total_space::{total_vars, GeneralizedSection};

/// Reads a JSON document from a file, or from stdin when the path is `-`.
pub fn read_json(path: &Path) -> Result<Value> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

/// `generic`, `e7`, `wedge:1,2`, or the JSON encoding used in context files.
pub fn parse_fiber(s: &str) -> Result<FiberModel> {
    let s = s.trim();
    if s.starts_with('{') || s.starts_with('"') {
        return serde_json::from_str(s).with_context(|| format!("fiber model {s}"));
    }
    match s {
        "generic" => Ok(FiberModel::Generic),
        "e7" => Ok(FiberModel::E7),
        _ => {
            let Some(ks) = s.strip_prefix("wedge:") else {
                bail!("unknown fiber model {s:?}; expected generic, e7 or wedge:k1,k2,…");
            };
            let ks = ks
                .split(',')
                .map(|k| k.trim().parse::<usize>().with_context(|| format!("fiber degree {k:?}")))
                .collect::<Result<Vec<_>>>()?;
            Ok(FiberModel::Wedge(ks))
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ContextFlags {
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub fiber: Option<String>,
}

impl ContextFlags {
    fn n(&self) -> Result<usize> {
        self.n.context("--n is required")
    }

    /// The context for a bracket: its default fibre unless overridden.
    pub fn for_bracket(&self, kind: BracketKind) -> Result<BundleContext> {
        let n = self.n()?;
        if self.fiber.is_none() && self.r.is_none() {
            return Ok(kind.default_context(n)?);
        }
        self.standalone()
    }

    /// The context given by `--n`, `--r` and `--fiber-model` alone.
    pub fn standalone(&self) -> Result<BundleContext> {
        let n = self.n()?;
        let fiber = match &self.fiber {
            Some(f) => parse_fiber(f)?,
            None => FiberModel::Generic,
        };
        Ok(match self.r {
            Some(r) => BundleContext::new(n, r, fiber)?,
            None if fiber == FiberModel::Generic => bail!("--r is required for a generic fibre"),
            None => BundleContext::with_model(n, fiber)?,
        })
    }
}

pub fn bracket(name: &str, ctx_flags: &ContextFlags, twists: &[std::path::PathBuf]) -> Result<BracketSpec> {
    let kind = BracketKind::parse(name)?;
    let ctx = ctx_flags.for_bracket(kind)?;
    let mut br = BracketSpec::new(kind, ctx)?;
    for path in twists {
        let mu = vvf(&br, path, 2)?;
        br = br.twist(&mu)?;
    }
    Ok(br)
}

pub fn section(ctx: &BundleContext, path: &Path) -> Result<AnchoredSection> {
    Ok(section_from_json(ctx, &read_json(path)?, &label(path))?)
}

pub fn vvf(br: &BracketSpec, path: &Path, degree: usize) -> Result<VectorValuedForm<Poly>> {
    use courant_core::bundle::Bracket;
    Ok(vvf_from_json(br.context(), &read_json(path)?, degree, &label(path))?)
}

pub fn generalized(ctx: &BundleContext, path: &Path) -> Result<GeneralizedSection> {
    let g = generalized_from_json(&read_json(path)?, &label(path))?;
    let want = total_vars(ctx);
    if g.nvars() != want {
        bail!("{}: total_vars is {}, the context needs {want}", label(path), g.nvars());
    }
    Ok(g)
}

pub fn total_form(ctx: &BundleContext, path: &Path) -> Result<Form<Poly>> {
    Ok(form_from_json(&read_json(path)?, total_vars(ctx), &label(path))?)
}
