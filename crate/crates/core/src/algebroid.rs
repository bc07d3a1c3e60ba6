//! Lie algebroids given in a local basis: anchor `ρ^i_α(x)` and structure
//! functions `C^γ_αβ(x)` with `[e_α, e_β] = C^γ_αβ e_γ`.
//!
//! Indices are 0-based in the Rust API. Expressions use the 1-based names
//! `x1..xn`.

use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var, VarKind};
use crate::forms::OneForm;
use crate::jet::{Coord, JetFunction};
use crate::num::{Perturbed, Scalar};

/// Binds `x<i>` to a slice; every other name is unbound.
pub(crate) struct XEnv<'a, S: Scalar> {
    pub shape: S::Shape,
    pub x: &'a [S],
}

impl<S: Scalar> Env<S> for XEnv<'_, S> {
    fn shape(&self) -> S::Shape {
        self.shape.clone()
    }

    fn lookup(&self, var: &Var) -> Option<S> {
        match var.kind {
            VarKind::X(i) => self.x.get(i).cloned(),
            _ => None,
        }
    }
}

pub struct LieAlgebroid {
    name: String,
    n: usize,
    m: usize,
    rho: Vec<Vec<Expr>>,
    c: Vec<Vec<Vec<Expr>>>,
    rho_fn: Vec<Vec<JetFunction>>,
    c_fn: Vec<Vec<Vec<JetFunction>>>,
    /// `cy[α][γ] = C^α_βγ y^β_1`.
    cy: Vec<Vec<JetFunction>>,
    /// `theta[s][α] = d_T^s (C^α_βγ y^β_1 𝒳^γ)`, grown on demand.
    pub(crate) theta: Mutex<Vec<Vec<OneForm>>>,
}

impl fmt::Debug for LieAlgebroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieAlgebroid").field("name", &self.name).field("n", &self.n).field("m", &self.m).finish()
    }
}

impl LieAlgebroid {
    /// `rho` is `n × m`, `c` is indexed `[γ][α][β]`. Expressions may only
    /// mention `x1..xn`.
    pub fn new(name: impl Into<String>, n: usize, m: usize, rho: Vec<Vec<Expr>>, c: Vec<Vec<Vec<Expr>>>) -> Result<Arc<Self>> {
        if m == 0 {
            return Err(Error::Dimension("fiber rank must be positive".into()));
        }
        if rho.len() != n || rho.iter().any(|row| row.len() != m) {
            return Err(Error::Dimension(format!("anchor must be {n}x{m}")));
        }
        if c.len() != m || c.iter().any(|a| a.len() != m || a.iter().any(|b| b.len() != m)) {
            return Err(Error::Dimension(format!("structure functions must be {m}x{m}x{m}")));
        }
        let check = |e: &Expr| -> Result<()> {
            for v in e.vars() {
                match v.kind {
                    VarKind::X(i) if i < n => {}
                    _ => return Err(Error::Config(format!("'{}' is not a base coordinate of an n={n} algebroid", v.name))),
                }
            }
            Ok(())
        };
        rho.iter().flatten().try_for_each(check)?;
        c.iter().flatten().flatten().try_for_each(check)?;

        let rho_fn: Vec<Vec<JetFunction>> = rho.iter().map(|row| row.iter().map(JetFunction::from_expr).collect::<Result<_>>()).collect::<Result<_>>()?;
        let c_fn: Vec<Vec<Vec<JetFunction>>> =
            c.iter().map(|a| a.iter().map(|b| b.iter().map(JetFunction::from_expr).collect::<Result<_>>()).collect::<Result<_>>()).collect::<Result<_>>()?;
        let cy = (0..m)
            .map(|a| (0..m).map(|g| JetFunction::sum((0..m).map(|b| c_fn[a][b][g].mul(&JetFunction::coord(Coord::Y { alpha: b, r: 1 }))))).collect())
            .collect();
        Ok(Arc::new(LieAlgebroid { name: name.into(), n, m, rho, c, rho_fn, c_fn, cy, theta: Mutex::new(Vec::new()) }))
    }

    /// Parses every entry. Structure entries are `(γ, α, β, expr)`; the
    /// `(γ, β, α)` entry is filled with the negation unless given.
    pub fn from_strings(name: &str, n: usize, m: usize, rho: &[&[&str]], c: &[(usize, usize, usize, &str)]) -> Result<Arc<Self>> {
        let rho = rho.iter().map(|row| row.iter().map(|s| Ok(s.parse::<Expr>()?)).collect::<Result<_>>()).collect::<Result<_>>()?;
        let entries = c.iter().map(|&(g, a, b, s)| Ok((g, a, b, s.parse::<Expr>()?))).collect::<Result<Vec<_>>>()?;
        LieAlgebroid::new(name, n, m, rho, complete_structure(m, &entries)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rho_expr(&self, i: usize, alpha: usize) -> &Expr {
        &self.rho[i][alpha]
    }

    pub fn c_expr(&self, g: usize, a: usize, b: usize) -> &Expr {
        &self.c[g][a][b]
    }

    pub fn rho_fn(&self, i: usize, alpha: usize) -> &JetFunction {
        &self.rho_fn[i][alpha]
    }

    pub fn c_fn(&self, g: usize, a: usize, b: usize) -> &JetFunction {
        &self.c_fn[g][a][b]
    }

    /// `C^α_βγ y^β_1`.
    pub fn c_y1(&self, alpha: usize, gamma: usize) -> &JetFunction {
        &self.cy[alpha][gamma]
    }

    /// `ρ(x)` as an `n × m` array over any scalar kind.
    pub fn rho_at<S: Scalar>(&self, x: &[S], shape: &S::Shape) -> Result<Vec<Vec<S>>> {
        let env = XEnv { shape: shape.clone(), x };
        self.rho.iter().map(|row| row.iter().map(|e| Ok(e.eval(&env)?)).collect()).collect()
    }

    /// `C(x)` as `[γ][α][β]` over any scalar kind.
    pub fn c_at<S: Scalar>(&self, x: &[S], shape: &S::Shape) -> Result<Vec<Vec<Vec<S>>>> {
        let env = XEnv { shape: shape.clone(), x };
        self.c.iter().map(|a| a.iter().map(|b| b.iter().map(|e| Ok(e.eval(&env)?)).collect()).collect()).collect()
    }

    /// True when no structure function depends on `x`.
    pub fn has_constant_structure(&self) -> bool {
        self.c.iter().flatten().flatten().all(|e| e.free_vars().is_empty())
    }
}

/// Dense `[γ][α][β]` tensor from sparse entries, completing antisymmetry.
pub fn complete_structure(m: usize, entries: &[(usize, usize, usize, Expr)]) -> Result<Vec<Vec<Vec<Expr>>>> {
    let mut c = vec![vec![vec![Expr::Num(0.0); m]; m]; m];
    let mut given = vec![vec![vec![false; m]; m]; m];
    for (g, a, b, e) in entries {
        if *g >= m || *a >= m || *b >= m {
            return Err(Error::Dimension(format!("structure index ({g},{a},{b}) out of range for m={m}")));
        }
        c[*g][*a][*b] = e.clone();
        given[*g][*a][*b] = true;
    }
    for (g, a, b, e) in entries {
        if !given[*g][*b][*a] {
            c[*g][*b][*a] = match e {
                Expr::Num(v) => Expr::Num(-v),
                other => Expr::Neg(Box::new(other.clone())),
            };
        }
    }
    Ok(c)
}

/// Sampling box and count for randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePlan {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan { count: 100, lo: -1.0, hi: 1.0, seed: 7 }
    }
}

impl SamplePlan {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn draw(&self, rng: &mut impl Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(self.lo..=self.hi)).collect()
    }
}

/// Worst residual of one identity over the samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub identity: String,
    pub max_residual: f64,
    /// Human-readable location of the worst residual.
    pub worst_at: String,
    pub passed: bool,
}

impl IdentityResidual {
    pub fn new(identity: &str) -> Self {
        IdentityResidual { identity: identity.to_string(), max_residual: 0.0, worst_at: String::new(), passed: true }
    }

    pub fn record(&mut self, residual: f64, at: impl FnOnce() -> String) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual.abs() };
        if r > self.max_residual || (r.is_infinite() && self.worst_at.is_empty()) {
            self.max_residual = r;
            self.worst_at = at();
        }
    }

    pub fn finish(&mut self, tol: f64) {
        self.passed = self.max_residual <= tol;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub algebroid: String,
    pub samples: usize,
    pub tolerance: f64,
    pub antisymmetry: IdentityResidual,
    pub compatibility: IdentityResidual,
    pub jacobi: IdentityResidual,
    pub passed: bool,
}

/// Partials `∂_l` of all anchor and structure entries at `x`.
#[allow(clippy::type_complexity)]
fn structure_partials(alg: &LieAlgebroid, x: &[f64]) -> Result<(Vec<Vec<Vec<f64>>>, Vec<Vec<Vec<Vec<f64>>>>)> {
    let mut drho = Vec::with_capacity(alg.n);
    let mut dc = Vec::with_capacity(alg.n);
    for l in 0..alg.n {
        let xs: Vec<Perturbed> = x.iter().enumerate().map(|(i, &v)| if i == l { Perturbed::seed(v) } else { Perturbed::lift(v) }).collect();
        let r = alg.rho_at(&xs, &())?;
        let c = alg.c_at(&xs, &())?;
        drho.push(r.into_iter().map(|row| row.into_iter().map(|p| p.delta).collect()).collect());
        dc.push(c.into_iter().map(|a| a.into_iter().map(|b| b.into_iter().map(|p| p.delta).collect()).collect()).collect());
    }
    Ok((drho, dc))
}

/// Antisymmetry, anchor compatibility and Jacobi residuals at seeded
/// sample points of the base.
pub fn check_structure(alg: &LieAlgebroid, plan: &SamplePlan, tol: f64) -> Result<StructureReport> {
    let (n, m) = (alg.n, alg.m);
    let mut rng = plan.rng();
    let mut anti = IdentityResidual::new("antisymmetry");
    let mut comp = IdentityResidual::new("anchor compatibility");
    let mut jac = IdentityResidual::new("jacobi");
    let count = plan.count.max(1);
    for _ in 0..count {
        let x = plan.draw(&mut rng, n);
        let r = alg.rho_at(&x, &())?;
        let c = alg.c_at(&x, &())?;
        let (drho, dc) = structure_partials(alg, &x)?;
        for g in 0..m {
            for a in 0..m {
                for b in 0..m {
                    anti.record(c[g][a][b] + c[g][b][a], || format!("C^{}_{}{} at x={x:?}", g + 1, a + 1, b + 1));
                }
            }
        }
        for i in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let mut v = 0.0;
                    for l in 0..n {
                        v += r[l][a] * drho[l][i][b] - r[l][b] * drho[l][i][a];
                    }
                    for g in 0..m {
                        v -= r[i][g] * c[g][a][b];
                    }
                    comp.record(v, || format!("i={}, α={}, β={} at x={x:?}", i + 1, a + 1, b + 1));
                }
            }
        }
        let term = |nu: usize, a: usize, b: usize, g: usize| -> f64 {
            let mut v = 0.0;
            for l in 0..n {
                v += r[l][a] * dc[l][nu][b][g];
            }
            for mu in 0..m {
                v += c[nu][a][mu] * c[mu][b][g];
            }
            v
        };
        for nu in 0..m {
            for a in 0..m {
                for b in 0..m {
                    for g in 0..m {
                        let v = term(nu, a, b, g) + term(nu, b, g, a) + term(nu, g, a, b);
                        jac.record(v, || format!("ν={}, (α,β,γ)=({},{},{}) at x={x:?}", nu + 1, a + 1, b + 1, g + 1));
                    }
                }
            }
        }
    }
    for r in [&mut anti, &mut comp, &mut jac] {
        r.finish(tol);
    }
    let passed = anti.passed && comp.passed && jac.passed;
    Ok(StructureReport { algebroid: alg.name.clone(), samples: count, tolerance: tol, antisymmetry: anti, compatibility: comp, jacobi: jac, passed })
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn zeros(r: usize, c: usize) -> Vec<Vec<Expr>> {
    vec![vec![num(0.0); c]; r]
}

fn constant_structure(m: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Vec<Vec<Vec<Expr>>>> {
    let e: Vec<_> = entries.iter().map(|&(g, a, b, v)| (g, a, b, num(v))).collect();
    complete_structure(m, &e)
}

/// `so(3)` entries `C^γ_αβ = ε_αβγ`.
pub fn so3_constants() -> Vec<(usize, usize, usize, f64)> {
    vec![(2, 0, 1, 1.0), (0, 1, 2, 1.0), (1, 2, 0, 1.0)]
}

/// Heisenberg entries: `[e_1, e_2] = e_3`.
pub fn heisenberg_constants() -> Vec<(usize, usize, usize, f64)> {
    vec![(2, 0, 1, 1.0)]
}

/// `TM` on `ℝ^n` in the coordinate basis.
pub fn tangent(n: usize) -> Result<Arc<LieAlgebroid>> {
    let mut rho = zeros(n, n);
    for (i, row) in rho.iter_mut().enumerate() {
        row[i] = num(1.0);
    }
    LieAlgebroid::new(format!("tangent({n})"), n, n, rho, constant_structure(n, &[])?)
}

/// `TM` in a moving frame whose vectors are the columns of `rho`; the
/// structure functions are supplied and checked by [`check_structure`].
pub fn quasi_velocity(name: &str, rho: Vec<Vec<Expr>>, c: &[(usize, usize, usize, Expr)]) -> Result<Arc<LieAlgebroid>> {
    let n = rho.len();
    LieAlgebroid::new(name, n, n, rho, complete_structure(n, c)?)
}

/// A Lie algebra as an algebroid over a point.
pub fn lie_algebra(name: &str, m: usize, constants: &[(usize, usize, usize, f64)]) -> Result<Arc<LieAlgebroid>> {
    LieAlgebroid::new(name, 0, m, Vec::new(), constant_structure(m, constants)?)
}

pub fn so3() -> Result<Arc<LieAlgebroid>> {
    lie_algebra("so(3)", 3, &so3_constants())
}

pub fn heisenberg_algebra() -> Result<Arc<LieAlgebroid>> {
    lie_algebra("heisenberg", 3, &heisenberg_constants())
}

/// Heisenberg group `ℝ^3` with the left-invariant frame
/// `∂x1`, `∂x2 + x1 ∂x3`, `∂x3`.
pub fn heisenberg_group() -> Result<Arc<LieAlgebroid>> {
    let rho = vec![vec![num(1.0), num(0.0), num(0.0)], vec![num(0.0), num(1.0), num(0.0)], vec![num(0.0), Expr::var("x1"), num(1.0)]];
    let c: Vec<_> = heisenberg_constants().into_iter().map(|(g, a, b, v)| (g, a, b, num(v))).collect();
    quasi_velocity("heisenberg-group", rho, &c)
}

/// Action algebroid `M × 𝔤` with constant structure and anchor given by
/// the infinitesimal action.
pub fn action(name: &str, rho: Vec<Vec<Expr>>, m: usize, constants: &[(usize, usize, usize, f64)]) -> Result<Arc<LieAlgebroid>> {
    let n = rho.len();
    LieAlgebroid::new(name, n, m, rho, constant_structure(m, constants)?)
}

/// `ℝ^3 × so(3)` with `ρ(Γ)Ω = Γ × Ω`.
pub fn heavy_top() -> Result<Arc<LieAlgebroid>> {
    let s = |t: &str| t.parse::<Expr>();
    let rho = vec![vec![s("0")?, s("-x3")?, s("x2")?], vec![s("x3")?, s("0")?, s("-x1")?], vec![s("-x2")?, s("x1")?, s("0")?]];
    action("heavy-top", rho, 3, &so3_constants())
}

/// `TM ⊕ 𝔤` over `ℝ^n`: tangent directions first, then the algebra.
pub fn atiyah_trivial(n: usize, m: usize, constants: &[(usize, usize, usize, f64)]) -> Result<Arc<LieAlgebroid>> {
    let mut rho = zeros(n, n + m);
    for (i, row) in rho.iter_mut().enumerate() {
        row[i] = num(1.0);
    }
    let shifted: Vec<_> = constants.iter().map(|&(g, a, b, v)| (g + n, a + n, b + n, v)).collect();
    LieAlgebroid::new(format!("atiyah-trivial({n},{m})"), n, n + m, rho, constant_structure(n + m, &shifted)?)
}
