//! Lie algebroid morphisms `(φ, Φ)` in coordinates, jet prolongation
//! `Φ^k`, reduction of Lagrangians and reconstruction of base curves.
//!
//! Conditions checked at sample points, with `x` in the source base:
//!
//! - admissibility: `ρ'^{i'}_{α'}(φ) Φ^{α'}_α = ∂_j φ^{i'} ρ^j_α`
//! - brackets: `Φ^{γ'}_γ C^γ_αβ − C'^{γ'}_{α'β'}(φ) Φ^{α'}_α Φ^{β'}_β
//!   − ρ^j_α ∂_j Φ^{γ'}_β + ρ^j_β ∂_j Φ^{γ'}_α = 0`
//!
//! See `docs/morphism-bracket.md` for the derivation of the second one.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebroid::{IdentityResidual, LieAlgebroid, SamplePlan, XEnv};
use crate::dynamics::{assemble_ode, integrate, AssembledOde, Trajectory};
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, VarKind};
use crate::jet::{Coord, Curve, JetFunction, JetPoint};
use crate::num::{factorial, Perturbed, Scalar, Taylor};
use crate::variational::{Lagrangian, SectionAlongCurve};

pub struct Morphism {
    name: String,
    source: Arc<LieAlgebroid>,
    target: Arc<LieAlgebroid>,
    phi: Vec<Expr>,
    big_phi: Vec<Vec<Expr>>,
}

impl std::fmt::Debug for Morphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Morphism").field("name", &self.name).field("source", &self.source.name()).field("target", &self.target.name()).finish()
    }
}

impl Morphism {
    /// `phi` has one entry per target base coordinate, `big_phi` is
    /// `m' × m`; all entries are expressions in the source `x`.
    pub fn new(name: impl Into<String>, source: Arc<LieAlgebroid>, target: Arc<LieAlgebroid>, phi: Vec<Expr>, big_phi: Vec<Vec<Expr>>) -> Result<Arc<Self>> {
        if phi.len() != target.n() {
            return Err(Error::Dimension(format!("base map has {} components, target base has {}", phi.len(), target.n())));
        }
        if big_phi.len() != target.m() || big_phi.iter().any(|r| r.len() != source.m()) {
            return Err(Error::Dimension(format!("fiber map must be {}x{}", target.m(), source.m())));
        }
        for e in phi.iter().chain(big_phi.iter().flatten()) {
            for v in e.vars() {
                if !matches!(v.kind, VarKind::X(i) if i < source.n()) {
                    return Err(Error::Config(format!("'{}' is not a source base coordinate", v.name)));
                }
            }
        }
        Ok(Arc::new(Morphism { name: name.into(), source, target, phi, big_phi }))
    }

    pub fn identity(alg: Arc<LieAlgebroid>) -> Arc<Self> {
        let phi = (0..alg.n()).map(|i| Expr::var(&format!("x{}", i + 1))).collect();
        let big = (0..alg.m()).map(|a| (0..alg.m()).map(|b| Expr::Num(if a == b { 1.0 } else { 0.0 })).collect()).collect();
        Morphism::new(format!("id({})", alg.name()), alg.clone(), alg, phi, big).expect("identity is well formed")
    }

    pub fn from_strings(name: &str, source: Arc<LieAlgebroid>, target: Arc<LieAlgebroid>, phi: &[&str], big_phi: &[&[&str]]) -> Result<Arc<Self>> {
        let phi = phi.iter().map(|s| Ok(s.parse()?)).collect::<Result<_>>()?;
        let big = big_phi.iter().map(|r| r.iter().map(|s| Ok(s.parse()?)).collect::<Result<_>>()).collect::<Result<_>>()?;
        Morphism::new(name, source, target, phi, big)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<LieAlgebroid> {
        &self.source
    }

    pub fn target(&self) -> &Arc<LieAlgebroid> {
        &self.target
    }

    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    pub fn big_phi(&self) -> &[Vec<Expr>] {
        &self.big_phi
    }

    fn eval_at<S: Scalar>(&self, x: &[S], shape: &S::Shape) -> Result<(Vec<S>, Vec<Vec<S>>)> {
        let env = XEnv { shape: shape.clone(), x };
        let p = self.phi.iter().map(|e| Ok(e.eval(&env)?)).collect::<Result<_>>()?;
        let b = self.big_phi.iter().map(|r| r.iter().map(|e| Ok(e.eval(&env)?)).collect::<Result<_>>()).collect::<Result<_>>()?;
        Ok((p, b))
    }

    /// Admissibility residuals `[i'][α]` at `x`.
    pub fn admissibility_residuals(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (n, m, n2, m2) = (self.source.n(), self.source.m(), self.target.n(), self.target.m());
        let (phi, big) = self.eval_at(x, &())?;
        let rho = self.source.rho_at(x, &())?;
        let rho2 = self.target.rho_at(&phi, &())?;
        let dphi = self.partials(x)?.0;
        Ok((0..n2)
            .map(|i| {
                (0..m)
                    .map(|a| {
                        let lhs: f64 = (0..m2).map(|b| rho2[i][b] * big[b][a]).sum();
                        let rhs: f64 = (0..n).map(|j| dphi[j][i] * rho[j][a]).sum();
                        lhs - rhs
                    })
                    .collect()
            })
            .collect())
    }

    /// `∂_j φ` and `∂_j Φ`, indexed `[j][...]`.
    #[allow(clippy::type_complexity)]
    fn partials(&self, x: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>)> {
        let mut dp = Vec::new();
        let mut db = Vec::new();
        for j in 0..x.len() {
            let xs: Vec<Perturbed> = x.iter().enumerate().map(|(i, &v)| if i == j { Perturbed::seed(v) } else { Perturbed::lift(v) }).collect();
            let (p, b) = self.eval_at(&xs, &())?;
            dp.push(p.into_iter().map(|v| v.delta).collect());
            db.push(b.into_iter().map(|r| r.into_iter().map(|v| v.delta).collect()).collect());
        }
        Ok((dp, db))
    }

    /// Bracket residuals `[γ'][α][β]` at `x`.
    pub fn bracket_residuals(&self, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        let (n, m, m2) = (self.source.n(), self.source.m(), self.target.m());
        let (phi, big) = self.eval_at(x, &())?;
        let rho = self.source.rho_at(x, &())?;
        let c = self.source.c_at(x, &())?;
        let c2 = self.target.c_at(&phi, &())?;
        let dbig = self.partials(x)?.1;
        let mut out = vec![vec![vec![0.0; m]; m]; m2];
        for g2 in 0..m2 {
            for a in 0..m {
                for b in 0..m {
                    let mut v: f64 = (0..m).map(|g| big[g2][g] * c[g][a][b]).sum();
                    for a2 in 0..m2 {
                        for b2 in 0..m2 {
                            v -= c2[g2][a2][b2] * big[a2][a] * big[b2][b];
                        }
                    }
                    for j in 0..n {
                        v -= rho[j][a] * dbig[j][g2][b] - rho[j][b] * dbig[j][g2][a];
                    }
                    out[g2][a][b] = v;
                }
            }
        }
        Ok(out)
    }

    /// `Φ^k`: pushes the jet of the curve through `p`.
    pub fn push_jet(&self, p: &JetPoint) -> Result<JetPoint> {
        let k = p.order();
        let curve = Curve::through(&self.source, p)?;
        let d = k - 1;
        let xs: Vec<Taylor> = curve.x().iter().map(|s| s.truncate(d)).collect();
        let (_, big) = self.eval_at(&xs, &(d, ()))?;
        let phi0 = self.eval_at(p.x(), &())?.0;
        let a = curve.y(1);
        let mut b = Vec::with_capacity(self.target.m());
        for row in &big {
            let mut acc = Taylor::constant(&(d, ()), 0.0);
            for (f, s) in row.iter().zip(a) {
                acc = acc.try_add(&f.try_mul(s)?)?;
            }
            b.push(acc);
        }
        let blocks: Vec<Vec<f64>> = (1..=k).map(|r| b.iter().map(|s| s.coeff(r - 1) * factorial(r - 1)).collect()).collect();
        let mut coords = phi0;
        blocks.iter().for_each(|bl| coords.extend_from_slice(bl));
        JetPoint::new(self.target.n(), self.target.m(), k, coords)
    }

    /// Target coordinates as functions on the source jet space.
    pub fn coordinate_functions(&self) -> Result<(Vec<JetFunction>, Vec<JetFunction>)> {
        let xs = self.phi.iter().map(JetFunction::from_expr).collect::<Result<Vec<_>>>()?;
        let y1 = self
            .big_phi
            .iter()
            .map(|row| {
                let terms = row
                    .iter()
                    .enumerate()
                    .map(|(a, e)| Ok(JetFunction::from_expr(e)?.mul(&JetFunction::coord(Coord::Y { alpha: a, r: 1 }))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(JetFunction::sum(terms))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((xs, y1))
    }

    /// `F ∘ Φ^k` for a function on the target jet space.
    pub fn pull_function(&self, f: &JetFunction) -> Result<JetFunction> {
        let (xs, y1) = self.coordinate_functions()?;
        Ok(f.pullback(&|c| match c {
            Coord::X(i) => xs[i].clone(),
            Coord::Y { alpha, r } => y1[alpha].dt_pow(r - 1),
        }))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MorphismReport {
    pub morphism: String,
    pub samples: usize,
    pub tolerance: f64,
    pub admissibility: IdentityResidual,
    pub bracket: IdentityResidual,
    pub passed: bool,
}

pub fn check_morphism(mor: &Morphism, plan: &SamplePlan, tol: f64) -> Result<MorphismReport> {
    let mut rng = plan.rng();
    let mut adm = IdentityResidual::new("admissibility ρ'∘Φ = Tφ∘ρ");
    let mut br = IdentityResidual::new("bracket Φ*∘d = d∘Φ*");
    let count = plan.count.max(1);
    for _ in 0..count {
        let x = plan.draw(&mut rng, mor.source.n());
        for (i, row) in mor.admissibility_residuals(&x)?.iter().enumerate() {
            for (a, v) in row.iter().enumerate() {
                adm.record(*v, || format!("i'={}, α={} at x={x:?}", i + 1, a + 1));
            }
        }
        for (g, t) in mor.bracket_residuals(&x)?.iter().enumerate() {
            for (a, row) in t.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    br.record(*v, || format!("γ'={}, (α,β)=({},{}) at x={x:?}", g + 1, a + 1, b + 1));
                }
            }
        }
    }
    adm.finish(tol);
    br.finish(tol);
    let passed = adm.passed && br.passed;
    Ok(MorphismReport { morphism: mor.name.clone(), samples: count, tolerance: tol, admissibility: adm, bracket: br, passed })
}

fn mul(a: &Expr, b: &Expr) -> Option<Expr> {
    if a.is_zero() || b.is_zero() {
        return None;
    }
    Some(match (a.constant_value(), b.constant_value()) {
        (Some(1.0), _) => b.clone(),
        (_, Some(1.0)) => a.clone(),
        _ => Expr::bin(BinOp::Mul, a.clone(), b.clone()),
    })
}

fn sum(terms: Vec<Expr>) -> Expr {
    terms.into_iter().reduce(|a, b| Expr::bin(BinOp::Add, a, b)).unwrap_or(Expr::Num(0.0))
}

/// `second ∘ first`.
pub fn compose(first: &Morphism, second: &Morphism) -> Result<Arc<Morphism>> {
    if !Arc::ptr_eq(&first.target, &second.source) {
        return Err(Error::Morphism(format!(
            "cannot compose: {} ends at {}, {} starts at {}",
            first.name,
            first.target.name(),
            second.name,
            second.source.name()
        )));
    }
    let sub = |e: &Expr| {
        e.substitute(&|v| match v.kind {
            VarKind::X(i) => first.phi.get(i).cloned(),
            _ => None,
        })
    };
    let phi = second.phi.iter().map(sub).collect();
    let (m0, m1) = (first.source.m(), first.target.m());
    let big =
        second.big_phi.iter().map(|row| (0..m0).map(|a| sum((0..m1).filter_map(|b| mul(&sub(&row[b]), &first.big_phi[b][a])).collect())).collect()).collect();
    Morphism::new(format!("{}∘{}", second.name, first.name), first.source.clone(), second.target.clone(), phi, big)
}

/// `L = L' ∘ Φ^k` on the source.
pub fn reduce_lagrangian(mor: &Morphism, target_lag: &Lagrangian) -> Result<Arc<Lagrangian>> {
    if !Arc::ptr_eq(target_lag.algebroid(), &mor.target) {
        return Err(Error::Morphism(format!("lagrangian lives on {}, morphism targets {}", target_lag.algebroid().name(), mor.target.name())));
    }
    let f = mor.pull_function(target_lag.function())?;
    Lagrangian::from_function(mor.source.clone(), target_lag.order(), f, format!("({})∘{}", target_lag.label(), mor.name))
}

/// Source and target solutions of a reduction, compared after pushing.
#[derive(Debug, Clone)]
pub struct ReductionComparison {
    pub source: Trajectory,
    pub pushed: Trajectory,
    pub target: Trajectory,
    pub max_discrepancy: f64,
}

/// Integrates `L'∘Φ^k` from `state0` and `L'` from the pushed initial
/// state, then compares on the shared grid.
pub fn compare_reduction(mor: &Morphism, target_lag: Arc<Lagrangian>, state0: &[f64], t0: f64, t1: f64, h: f64) -> Result<ReductionComparison> {
    let src_lag = reduce_lagrangian(mor, &target_lag)?;
    let k = target_lag.order();
    let (n, m) = (mor.source.n(), mor.source.m());
    let src_ode = assemble_ode(src_lag, state0)?;
    let source = integrate(&src_ode, state0, t0, t1, h)?;
    let push_state = |s: &[f64]| -> Result<Vec<f64>> { Ok(mor.push_jet(&JetPoint::new(n, m, 2 * k - 1, s.to_vec())?)?.coords().to_vec()) };
    let target0 = push_state(state0)?;
    let tgt_ode = assemble_ode(target_lag, &target0)?;
    let target = integrate(&tgt_ode, &target0, t0, t1, h)?;
    let mut pushed = target.clone();
    pushed.states = source.states.iter().map(|s| push_state(s)).collect::<Result<_>>()?;
    pushed.label = format!("pushed {}", source.label);
    let max_discrepancy = pushed.max_state_difference(&target)?;
    Ok(ReductionComparison { source, pushed, target, max_discrepancy })
}

#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
}

/// Integrates `ẋ = ρ(x) ξ(t)` from `x0` with RK4.
pub fn reconstruct(alg: &LieAlgebroid, xi: &SectionAlongCurve, x0: &[f64], t0: f64, t1: f64, h: f64) -> Result<Reconstruction> {
    if xi.dim() != alg.m() || x0.len() != alg.n() {
        return Err(Error::Dimension("reconstruction data does not match the algebroid".into()));
    }
    if !(h > 0.0) || !(t1 > t0) {
        return Err(Error::Config(format!("reconstruction needs h > 0 and t1 > t0 (h={h}, t0={t0}, t1={t1})")));
    }
    let steps = ((t1 - t0) / h).round().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let f = |t: f64, x: &[f64]| -> Result<Vec<f64>> {
        let rho = alg.rho_at(x, &())?;
        let v = xi.value(t)?;
        Ok(rho.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect())
    };
    let mut times = vec![t0];
    let mut xs = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &x)?;
        let k2 = f(t + h / 2.0, &axpy(&x, h / 2.0, &k1))?;
        let k3 = f(t + h / 2.0, &axpy(&x, h / 2.0, &k2))?;
        let k4 = f(t + h, &axpy(&x, h, &k3))?;
        for j in 0..x.len() {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t + h));
        }
        times.push(if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h });
        xs.push(x.clone());
    }
    Ok(Reconstruction { times, x: xs })
}

/// `a = Φ(x)^{-1} ξ`; needs a fiberwise-bijective morphism.
pub fn lift(mor: &Morphism, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let m = mor.source.m();
    if mor.target.m() != m {
        return Err(Error::Unsupported(format!("lifting needs a fiberwise bijection, fibers are {} and {}", m, mor.target.m())));
    }
    let big = mor.eval_at(x, &())?.1;
    let mat = DMatrix::from_fn(m, m, |i, j| big[i][j]);
    mat.lu()
        .solve(&DVector::from_column_slice(xi))
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Morphism(format!("fiber map is not invertible at x={x:?}")))
}

/// Reduced solution together with its reconstruction.
#[derive(Debug, Clone)]
pub struct LiftedSolution {
    pub reduced: Trajectory,
    /// Source base curve on the reduced grid.
    pub x: Vec<Vec<f64>>,
    /// `Φ(x)^{-1} ξ` on the reduced grid.
    pub a: Vec<Vec<f64>>,
}

/// Integrates the reduced equations from `reduced0` together with
/// `ẋ = ρ(x) Φ(x)^{-1} ξ` from `x0`, one RK4 step for both.
pub fn reconstruct_solution(mor: &Morphism, reduced: &AssembledOde, reduced0: &[f64], x0: &[f64], t0: f64, t1: f64, h: f64) -> Result<LiftedSolution> {
    if !Arc::ptr_eq(reduced.lagrangian().algebroid(), &mor.target) {
        return Err(Error::Morphism("reduced system does not live on the morphism target".into()));
    }
    if x0.len() != mor.source.n() {
        return Err(Error::Dimension(format!("x0 has {} entries, source base has {}", x0.len(), mor.source.n())));
    }
    let (n2, m2, n) = (mor.target.n(), mor.target.m(), mor.source.n());
    let tr = integrate(reduced, reduced0, t0, t1, h)?;
    let velocity = |x: &[f64], s: &[f64]| -> Result<Vec<f64>> {
        let a = lift(mor, x, &s[n2..n2 + m2])?;
        let rho = mor.source.rho_at(x, &())?;
        Ok(rho.iter().map(|row| row.iter().zip(&a).map(|(r, v)| r * v).sum()).collect())
    };
    let h = tr.step;
    let mut x = x0.to_vec();
    let mut xs = vec![x.clone()];
    for i in 0..tr.len() - 1 {
        let s = &tr.states[i];
        let (k1s, _) = reduced.rhs(s)?;
        let mid1: Vec<f64> = s.iter().zip(&k1s).map(|(a, b)| a + h / 2.0 * b).collect();
        let (k2s, _) = reduced.rhs(&mid1)?;
        let mid2: Vec<f64> = s.iter().zip(&k2s).map(|(a, b)| a + h / 2.0 * b).collect();
        let (k3s, _) = reduced.rhs(&mid2)?;
        let end: Vec<f64> = s.iter().zip(&k3s).map(|(a, b)| a + h * b).collect();
        let k1 = velocity(&x, s)?;
        let k2 = velocity(&axpy(&x, h / 2.0, &k1), &mid1)?;
        let k3 = velocity(&axpy(&x, h / 2.0, &k2), &mid2)?;
        let k4 = velocity(&axpy(&x, h, &k3), &end)?;
        for j in 0..n {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        xs.push(x.clone());
    }
    let a = xs.iter().zip(&tr.states).map(|(x, s)| lift(mor, x, &s[n2..n2 + m2])).collect::<Result<_>>()?;
    Ok(LiftedSolution { reduced: tr, x: xs, a })
}

fn axpy(a: &[f64], h: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + h * y).collect()
}

/// `tangent(3) → heisenberg-group`: identity base, `Φ = ρ^{-1}`.
pub fn heisenberg_frame(tangent3: Arc<LieAlgebroid>, group: Arc<LieAlgebroid>) -> Result<Arc<Morphism>> {
    Morphism::from_strings("left-trivialization", tangent3, group, &["x1", "x2", "x3"], &[&["1", "0", "0"], &["0", "1", "0"], &["0", "-x1", "1"]])
}

/// `heisenberg-group → heisenberg`: collapses the base, `Φ = I`.
pub fn heisenberg_quotient(group: Arc<LieAlgebroid>, algebra: Arc<LieAlgebroid>) -> Result<Arc<Morphism>> {
    Morphism::from_strings("quotient", group, algebra, &[], &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]])
}
