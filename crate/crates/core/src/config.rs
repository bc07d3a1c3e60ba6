//! JSON system descriptions.
//!
//! Indices and variable names are 1-based in the document. Expressions are
//! strings in the expression grammar; plain JSON numbers are accepted
//! wherever an expression is expected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebroid::{self, complete_structure, LieAlgebroid, SamplePlan};
use crate::error::{Error, Result};
use crate::expr::{Expr, VarKind};
use crate::jet::{JetFunction, JetPoint};
use crate::morphism::Morphism;
use crate::variational::Lagrangian;

/// Expression source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprSrc(pub String);

impl ExprSrc {
    pub fn parse(&self, at: &str) -> Result<Expr> {
        self.0.parse::<Expr>().map_err(|e| Error::Config(format!("{at}: {e} in \"{}\"", self.0)))
    }
}

impl From<&str> for ExprSrc {
    fn from(s: &str) -> Self {
        ExprSrc(s.to_string())
    }
}

impl From<&Expr> for ExprSrc {
    fn from(e: &Expr) -> Self {
        ExprSrc(e.to_string())
    }
}

impl fmt::Display for ExprSrc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for ExprSrc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ExprSrc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Text(s) => ExprSrc(s),
            Raw::Number(v) => ExprSrc(Expr::Num(v).to_string()),
        })
    }
}

/// Either a catalog name or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebroidRef {
    Catalog(String),
    Inline(AlgebroidSpec),
}

/// Sparse structure entry `[γ, α, β, expr]`; the `[γ, β, α]` entry is
/// completed by antisymmetry unless given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureEntry(pub usize, pub usize, pub usize, pub ExprSrc);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebroidSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub m: usize,
    /// `n × m`, row `i` column `α`.
    #[serde(default)]
    pub rho: Vec<Vec<ExprSrc>>,
    #[serde(rename = "C", default)]
    pub c: Vec<StructureEntry>,
}

impl AlgebroidSpec {
    /// Inline form of an algebroid: nonzero `C^γ_αβ` with `α < β`.
    pub fn from_algebroid(alg: &LieAlgebroid) -> AlgebroidSpec {
        let (n, m) = (alg.n(), alg.m());
        let rho = (0..n).map(|i| (0..m).map(|a| ExprSrc::from(alg.rho_expr(i, a))).collect()).collect();
        let mut c = Vec::new();
        for g in 0..m {
            for a in 0..m {
                for b in a + 1..m {
                    let e = alg.c_expr(g, a, b);
                    if !e.is_zero() {
                        c.push(StructureEntry(g + 1, a + 1, b + 1, e.into()));
                    }
                }
            }
        }
        AlgebroidSpec { name: Some(alg.name().to_string()), n, m, rho, c }
    }

    pub fn build(&self) -> Result<Arc<LieAlgebroid>> {
        let (n, m) = (self.n, self.m);
        if self.rho.len() != n || self.rho.iter().any(|r| r.len() != m) {
            return Err(Error::Config(format!("algebroid.rho must be {n}x{m}")));
        }
        let rho = self
            .rho
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(a, e)| e.parse(&format!("algebroid.rho[{}][{}]", i + 1, a + 1))).collect())
            .collect::<Result<Vec<Vec<Expr>>>>()?;
        let mut entries = Vec::with_capacity(self.c.len());
        for (idx, StructureEntry(g, a, b, e)) in self.c.iter().enumerate() {
            if [*g, *a, *b].iter().any(|&v| v == 0 || v > m) {
                return Err(Error::Config(format!("algebroid.C entry {}: indices ({g},{a},{b}) must lie in 1..={m}", idx + 1)));
            }
            entries.push((g - 1, a - 1, b - 1, e.parse(&format!("algebroid.C entry {}", idx + 1))?));
        }
        let c = complete_structure(m, &entries)?;
        LieAlgebroid::new(self.name.clone().unwrap_or_else(|| "custom".into()), n, m, rho, c)
    }
}

/// Bundled algebroids addressable by name: `so3`, `heisenberg`,
/// `heisenberg_group`, `heavy_top`, `tangent(N)`.
pub fn catalog_algebroid(name: &str) -> Result<Arc<LieAlgebroid>> {
    match name {
        "so3" => algebroid::so3(),
        "heisenberg" => algebroid::heisenberg_algebra(),
        "heisenberg_group" => algebroid::heisenberg_group(),
        "heavy_top" => algebroid::heavy_top(),
        _ => match name.strip_prefix("tangent(").and_then(|r| r.strip_suffix(')')).and_then(|d| d.parse().ok()) {
            Some(n) => algebroid::tangent(n),
            None => Err(Error::Config(format!("unknown catalog algebroid '{name}'"))),
        },
    }
}

impl AlgebroidRef {
    pub fn build(&self) -> Result<Arc<LieAlgebroid>> {
        match self {
            AlgebroidRef::Catalog(name) => catalog_algebroid(name),
            AlgebroidRef::Inline(spec) => spec.build(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSpec {
    pub k: usize,
    pub expr: ExprSrc,
}

/// `y[r-1]` holds level `r` for `r = 1..2k−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructSpec {
    /// Expected source base curve in `t`, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<ExprSrc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub target: AlgebroidRef,
    #[serde(default)]
    pub phi: Vec<ExprSrc>,
    #[serde(rename = "Phi")]
    pub big_phi: Vec<Vec<ExprSrc>>,
    /// Lagrangian on the target with the same order as the source one.
    pub target_lagrangian: ExprSrc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoetherSpec {
    pub eta: Vec<ExprSrc>,
    #[serde(rename = "F", default = "zero_expr")]
    pub f: ExprSrc,
}

fn zero_expr() -> ExprSrc {
    ExprSrc("0".into())
}

/// Sampling and tolerances. Every field has a default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSettings {
    pub samples: usize,
    pub seed: u64,
    pub sample_lo: f64,
    pub sample_hi: f64,
    pub structure_tol: f64,
    pub morphism_tol: f64,
    pub operator_tol: f64,
    pub symmetry_tol: f64,
    pub invariance_tol: f64,
    pub conservation_tol: f64,
    pub el_residual_tol: f64,
    pub reduction_tol: f64,
    pub reconstruction_tol: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            samples: 100,
            seed: 7,
            sample_lo: -1.0,
            sample_hi: 1.0,
            structure_tol: 1e-10,
            morphism_tol: 1e-10,
            operator_tol: 1e-9,
            symmetry_tol: 1e-9,
            invariance_tol: 1e-9,
            conservation_tol: 1e-7,
            el_residual_tol: 1e-6,
            reduction_tol: 1e-6,
            reconstruction_tol: 1e-8,
        }
    }
}

impl CheckSettings {
    pub fn plan(&self) -> SamplePlan {
        SamplePlan { count: self.samples, lo: self.sample_lo, hi: self.sample_hi, seed: self.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub name: String,
    pub algebroid: AlgebroidRef,
    pub lagrangian: LagrangianSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
    /// Functions on `E^{2k−1}` expected to stay constant along solutions.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, ExprSrc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noether: Option<NoetherSpec>,
    #[serde(default)]
    pub checks: CheckSettings,
}

pub struct LoadedMorphism {
    pub morphism: Arc<Morphism>,
    pub target_lagrangian: Arc<Lagrangian>,
    pub closed_form: Option<Vec<Expr>>,
    pub reconstruct: bool,
}

pub struct Noether {
    pub eta: Vec<JetFunction>,
    pub f: JetFunction,
}

/// A validated configuration with everything built.
pub struct System {
    pub doc: ConfigDocument,
    pub algebroid: Arc<LieAlgebroid>,
    pub lagrangian: Arc<Lagrangian>,
    pub state0: Option<Vec<f64>>,
    pub observables: Vec<(String, JetFunction)>,
    pub morphism: Option<LoadedMorphism>,
    pub noether: Option<Noether>,
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<ConfigDocument> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<ConfigDocument> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ConfigDocument::from_json(&text)
    }

    pub fn build(&self) -> Result<System> {
        let alg = self.algebroid.build()?;
        let (n, m, k) = (alg.n(), alg.m(), self.lagrangian.k);
        if k == 0 {
            return Err(Error::Config("lagrangian.k must be at least 1".into()));
        }
        let lag =
            Lagrangian::new(alg.clone(), k, self.lagrangian.expr.parse("lagrangian.expr")?).map_err(|e| Error::Config(format!("lagrangian.expr: {e}")))?;
        let state0 = match &self.initial {
            None => None,
            Some(init) => {
                if init.x.len() != n {
                    return Err(Error::Config(format!("initial.x has {} entries, base dimension is {n}", init.x.len())));
                }
                if init.y.len() != 2 * k - 1 || init.y.iter().any(|b| b.len() != m) {
                    return Err(Error::Config(format!("initial.y must hold {} blocks of length {m} (levels 1..{})", 2 * k - 1, 2 * k - 1)));
                }
                let p = JetPoint::from_blocks(&init.x, &init.y)?;
                Some(p.coords().to_vec())
            }
        };
        if let Some(run) = &self.run {
            if !(run.h > 0.0 && run.t1 > run.t0) {
                return Err(Error::Config(format!("run needs h > 0 and t1 > t0 (got t0={}, t1={}, h={})", run.t0, run.t1, run.h)));
            }
        }
        let mut observables = Vec::new();
        for (label, src) in &self.observables {
            let f = jet_function(src, n, m, 2 * k - 1, &format!("observables.{label}"))?;
            observables.push((label.clone(), f));
        }
        let morphism = self.morphism.as_ref().map(|spec| build_morphism(spec, &alg, k)).transpose()?;
        let noether = match &self.noether {
            None => None,
            Some(spec) => {
                if spec.eta.len() != m {
                    return Err(Error::Config(format!("noether.eta has {} entries, fiber dimension is {m}", spec.eta.len())));
                }
                let eta = spec.eta.iter().enumerate().map(|(a, e)| jet_function(e, n, m, 0, &format!("noether.eta[{}]", a + 1))).collect::<Result<Vec<_>>>()?;
                let f = jet_function(&spec.f, n, m, 2 * k - 1, "noether.F")?;
                Some(Noether { eta, f })
            }
        };
        Ok(System { doc: self.clone(), algebroid: alg, lagrangian: lag, state0, observables, morphism, noether })
    }
}

/// Parses a function on `E^max_order` with variables in range.
fn jet_function(src: &ExprSrc, n: usize, m: usize, max_order: usize, at: &str) -> Result<JetFunction> {
    let e = src.parse(at)?;
    for v in e.vars() {
        let ok = match v.kind {
            VarKind::X(i) => i < n,
            VarKind::Y { alpha, r } => alpha < m && r <= max_order,
            _ => false,
        };
        if !ok {
            return Err(Error::Config(format!("{at}: variable '{}' is not a coordinate of E^{max_order} (n={n}, m={m})", v.name)));
        }
    }
    JetFunction::from_expr(&e)
}

fn build_morphism(spec: &MorphismSpec, source: &Arc<LieAlgebroid>, k: usize) -> Result<LoadedMorphism> {
    let target = spec.target.build()?;
    let phi = spec.phi.iter().enumerate().map(|(i, e)| e.parse(&format!("morphism.phi[{}]", i + 1))).collect::<Result<Vec<_>>>()?;
    let big = spec
        .big_phi
        .iter()
        .enumerate()
        .map(|(a, row)| row.iter().enumerate().map(|(b, e)| e.parse(&format!("morphism.Phi[{}][{}]", a + 1, b + 1))).collect())
        .collect::<Result<Vec<Vec<Expr>>>>()?;
    let name = spec.name.clone().unwrap_or_else(|| format!("{}->{}", source.name(), target.name()));
    let mor = Morphism::new(name, source.clone(), target.clone(), phi, big).map_err(|e| Error::Config(format!("morphism: {e}")))?;
    let tl = Lagrangian::new(target, k, spec.target_lagrangian.parse("morphism.target_lagrangian")?)
        .map_err(|e| Error::Config(format!("morphism.target_lagrangian: {e}")))?;
    let closed_form = match spec.reconstruct.as_ref().and_then(|r| r.closed_form.as_ref()) {
        None => None,
        Some(c) => {
            if c.len() != source.n() {
                return Err(Error::Config(format!("morphism.reconstruct.closed_form needs {} entries", source.n())));
            }
            Some(c.iter().enumerate().map(|(i, e)| e.parse(&format!("morphism.reconstruct.closed_form[{}]", i + 1))).collect::<Result<Vec<_>>>()?)
        }
    };
    Ok(LoadedMorphism { morphism: mor, target_lagrangian: tl, closed_form, reconstruct: spec.reconstruct.is_some() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const RIGID: &str = r#"{
        "name": "rigid",
        "algebroid": {"n": 0, "m": 3, "C": [[3, 1, 2, 1], [1, 2, 3, "1"], [2, 3, 1, 1]]},
        "lagrangian": {"k": 1, "expr": "(y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2"},
        "initial": {"x": [], "y": [[1, 0.1, 0.2]]},
        "run": {"t0": 0, "t1": 1, "h": 0.01},
        "observables": {"energy": "(y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2"}
    }"#;

    #[test]
    fn inline_structure_is_completed() {
        let sys = ConfigDocument::from_json(RIGID).unwrap().build().unwrap();
        let c = sys.algebroid.c_at::<f64>(&[], &()).unwrap();
        assert_eq!(c[2][1][0], -1.0);
        assert_eq!(sys.state0.unwrap(), vec![1.0, 0.1, 0.2]);
        assert_eq!(sys.doc.checks, CheckSettings::default());
    }

    #[test]
    fn round_trips_through_json() {
        let doc = ConfigDocument::from_json(RIGID).unwrap();
        let again = ConfigDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn catalog_specs_rebuild_identically() {
        for name in ["so3", "heisenberg_group", "heavy_top", "tangent(3)"] {
            let a = catalog_algebroid(name).unwrap();
            let b = AlgebroidSpec::from_algebroid(&a).build().unwrap();
            let x = vec![0.3; a.n()];
            assert_eq!(a.rho_at::<f64>(&x, &()).unwrap(), b.rho_at::<f64>(&x, &()).unwrap());
            assert_eq!(a.c_at::<f64>(&x, &()).unwrap(), b.c_at::<f64>(&x, &()).unwrap());
        }
    }

    #[test]
    fn malformed_expression_reports_offset() {
        let bad = RIGID.replace("(y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2\"}", "y1_1 * * 2\"}");
        match ConfigDocument::from_json(&bad).unwrap().build() {
            Err(Error::Config(msg)) => assert!(msg.contains("lagrangian.expr") && msg.contains("byte 7"), "{msg}"),
            other => panic!("{:?}", other.err()),
        }
    }

    #[test]
    fn wrong_initial_blocks_are_rejected() {
        let bad = RIGID.replace("[[1, 0.1, 0.2]]", "[[1, 0.1]]");
        assert!(matches!(ConfigDocument::from_json(&bad).unwrap().build(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_and_names_are_rejected() {
        assert!(ConfigDocument::from_json(&RIGID.replace("\"run\"", "\"runn\"")).is_err());
        assert!(matches!(catalog_algebroid("so4"), Err(Error::Config(_))));
    }

    #[test]
    fn structure_indices_are_one_based() {
        let bad = RIGID.replace("[3, 1, 2, 1]", "[0, 1, 2, 1]");
        assert!(matches!(ConfigDocument::from_json(&bad).unwrap().build(), Err(Error::Config(_))));
    }
}
