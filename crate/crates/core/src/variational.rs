//! Lagrangians on `E^k`: momenta, the Euler-Lagrange covector `δL`, the
//! Cartan form, variational vector fields, complete lifts and Noether
//! integrals.
//!
//! Momenta follow `p^{k-1} = ∂L/∂y_k`, `p^{r-1} = ∂L/∂y_r − d_T p^r`, with
//! `π = p^0`, and
//! `δL_α = ρ^i_α ∂L/∂x^i − (d_T π_α + π_γ C^γ_αβ y^β_1)`.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::algebroid::{IdentityResidual, LieAlgebroid, SamplePlan};
use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var, VarKind};
use crate::forms::{cartan_operator, differential, variational_operator, OneForm};
use crate::jet::{Coord, Curve, EvalCache, JetFunction, JetPoint};
use crate::num::{Scalar, Taylor};

pub struct Lagrangian {
    label: String,
    alg: Arc<LieAlgebroid>,
    k: usize,
    source: Option<Expr>,
    f: JetFunction,
    momenta: OnceLock<Vec<Vec<JetFunction>>>,
    el: OnceLock<Vec<JetFunction>>,
}

impl std::fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lagrangian")
            .field("label", &self.label)
            .field("algebroid", &self.alg.name())
            .field("k", &self.k)
            .field("source", &self.source.as_ref().map(ToString::to_string))
            .finish()
    }
}

impl Lagrangian {
    /// `expr` may use `x1..xn` and `yA_r` with `A <= m`, `r <= k`.
    pub fn new(alg: Arc<LieAlgebroid>, k: usize, expr: Expr) -> Result<Arc<Self>> {
        if k == 0 {
            return Err(Error::InvalidOrder(0));
        }
        for v in expr.vars() {
            let ok = match v.kind {
                VarKind::X(i) => i < alg.n(),
                VarKind::Y { alpha, r } => alpha < alg.m() && r <= k,
                _ => false,
            };
            if !ok {
                return Err(Error::Config(format!("'{}' is not a coordinate of E^{k} over {} (n={}, m={})", v.name, alg.name(), alg.n(), alg.m())));
            }
        }
        let f = JetFunction::from_expr(&expr)?;
        Ok(Arc::new(Lagrangian { label: expr.to_string(), alg, k, source: Some(expr), f, momenta: OnceLock::new(), el: OnceLock::new() }))
    }

    pub fn parse(alg: Arc<LieAlgebroid>, k: usize, src: &str) -> Result<Arc<Self>> {
        Lagrangian::new(alg, k, src.parse()?)
    }

    /// Wraps an already-built function, e.g. a pullback along a morphism.
    pub fn from_function(alg: Arc<LieAlgebroid>, k: usize, f: JetFunction, label: impl Into<String>) -> Result<Arc<Self>> {
        if k == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if f.order() > k {
            return Err(Error::InsufficientOrder { need: f.order(), have: k });
        }
        Ok(Arc::new(Lagrangian { label: label.into(), alg, k, source: None, f, momenta: OnceLock::new(), el: OnceLock::new() }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn algebroid(&self) -> &Arc<LieAlgebroid> {
        &self.alg
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn source(&self) -> Option<&Expr> {
        self.source.as_ref()
    }

    pub fn function(&self) -> &JetFunction {
        &self.f
    }

    /// `p[r][α]` for `r = 0..k`, built once.
    pub fn momenta(&self) -> &[Vec<JetFunction>] {
        self.momenta.get_or_init(|| {
            let (m, k) = (self.alg.m(), self.k);
            let mut p: Vec<Vec<JetFunction>> = vec![Vec::new(); k];
            p[k - 1] = (0..m).map(|a| self.f.partial(&self.alg, Coord::Y { alpha: a, r: k })).collect();
            for r in (1..k).rev() {
                p[r - 1] = (0..m).map(|a| self.f.partial(&self.alg, Coord::Y { alpha: a, r }).sub(&p[r][a].dt())).collect();
            }
            p
        })
    }

    /// `π_α = p^0_α`.
    pub fn pi(&self) -> &[JetFunction] {
        &self.momenta()[0]
    }

    /// `δL_α` as functions on `E^{2k}`.
    pub fn el_components(&self) -> &[JetFunction] {
        self.el.get_or_init(|| {
            let (alg, n, m) = (&self.alg, self.alg.n(), self.alg.m());
            let pi = self.pi();
            (0..m)
                .map(|a| {
                    let force = JetFunction::sum((0..n).map(|i| alg.rho_fn(i, a).mul(&self.f.partial(alg, Coord::X(i)))));
                    let coadj = JetFunction::sum((0..m).map(|g| pi[g].mul(&alg.c_y1(g, a).neg())));
                    force.sub(&pi[a].dt().add(&coadj))
                })
                .collect()
        })
    }

    fn check_point(&self, p: &JetPoint, need: usize) -> Result<()> {
        if p.order() < need {
            return Err(Error::InsufficientOrder { need, have: p.order() });
        }
        Ok(())
    }

    pub fn value(&self, p: &JetPoint) -> Result<f64> {
        self.check_point(p, self.k)?;
        self.f.eval(&self.alg, p)
    }

    /// `δL(P)` by the coordinate formula; `P` must have order `2k`.
    pub fn el_residual(&self, p: &JetPoint) -> Result<Vec<f64>> {
        self.check_point(p, 2 * self.k)?;
        let curve = Curve::through(&self.alg, p)?;
        let mut cache = EvalCache::new();
        self.el_components().iter().map(|f| Ok(*f.series(&curve, &mut cache)?.value())).collect()
    }

    /// `δL(P)` read from the `𝒳` row of `𝔼(dL)`.
    pub fn el_residual_via_forms(&self, p: &JetPoint) -> Result<Vec<f64>> {
        self.check_point(p, 2 * self.k)?;
        let e = variational_operator(&self.alg, &self.differential());
        Ok(e.eval(&self.alg, p)?.swap_remove(0))
    }

    pub fn differential(&self) -> OneForm {
        differential(&self.alg, &self.f, self.k)
    }

    /// `θ_L = π_α 𝒳^α + Σ_{r=1}^{k-1} p^r_α 𝒱^α_r`.
    pub fn cartan_form(&self) -> OneForm {
        OneForm::new(self.alg.m(), self.momenta().to_vec()).expect("momenta rows have length m")
    }

    /// `𝕊(dL)`, which must agree with [`Lagrangian::cartan_form`].
    pub fn cartan_form_via_forms(&self) -> OneForm {
        cartan_operator(&self.alg, &self.differential())
    }

    /// `π_α = Σ_{j=1}^{k} (−1)^{j−1} d_T^{j−1} ∂L/∂y^α_j`, without the
    /// recursion.
    pub fn pi_alternating(&self) -> Vec<JetFunction> {
        (0..self.alg.m())
            .map(|a| {
                JetFunction::sum((1..=self.k).map(|j| {
                    let s = if j % 2 == 1 { 1.0 } else { -1.0 };
                    self.f.partial(&self.alg, Coord::Y { alpha: a, r: j }).dt_pow(j - 1).scale(s)
                }))
            })
            .collect()
    }
}

/// A curve `σ(t)` in the fibers, given by `m` expressions in `t`.
#[derive(Debug, Clone)]
pub struct SectionAlongCurve {
    exprs: Vec<Expr>,
}

struct TimeEnv {
    t: Taylor,
}

impl Env<Taylor> for TimeEnv {
    fn shape(&self) -> (usize, ()) {
        self.t.shape()
    }

    fn lookup(&self, var: &Var) -> Option<Taylor> {
        (var.kind == VarKind::Time).then(|| self.t.clone())
    }
}

impl SectionAlongCurve {
    pub fn new(exprs: Vec<Expr>) -> Result<Self> {
        for e in &exprs {
            if let Some(v) = e.vars().into_iter().find(|v| v.kind != VarKind::Time) {
                return Err(Error::Config(format!("section components may only use 't', found '{}'", v.name)));
            }
        }
        Ok(SectionAlongCurve { exprs })
    }

    pub fn parse(src: &[&str]) -> Result<Self> {
        SectionAlongCurve::new(src.iter().map(|s| Ok(s.parse::<Expr>()?)).collect::<Result<_>>()?)
    }

    pub fn zero(m: usize) -> Self {
        SectionAlongCurve { exprs: vec![Expr::Num(0.0); m] }
    }

    /// `c_α ((t − t0)(t1 − t))^p`, vanishing to order `p − 1` at both ends.
    pub fn bump(t0: f64, t1: f64, p: u32, amplitudes: &[f64]) -> Self {
        let exprs = amplitudes.iter().map(|c| format!("{c:e} * ((t - ({t0:e})) * (({t1:e}) - t))^{p}").parse().expect("bump source parses")).collect();
        SectionAlongCurve { exprs }
    }

    pub fn dim(&self) -> usize {
        self.exprs.len()
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    /// `σ(t + s)` as series in `s` of the given degree.
    pub fn series(&self, t: f64, degree: usize) -> Result<Vec<Taylor>> {
        let env = TimeEnv { t: Taylor::variable(degree, t) };
        self.exprs.iter().map(|e| Ok(e.eval(&env)?)).collect()
    }

    pub fn value(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.series(t, 0)?.iter().map(|s| *s.value()).collect())
    }

    /// Checks `σ^{(j)}(t0) = σ^{(j)}(t1) = 0` for `j < k`.
    pub fn check_boundary(&self, t0: f64, t1: f64, k: usize, tol: f64) -> Result<()> {
        for t in [t0, t1] {
            for (a, s) in self.series(t, k.saturating_sub(1))?.iter().enumerate() {
                for j in 0..k {
                    let d = s.derivative_at_zero(j);
                    if d.abs() > tol {
                        return Err(Error::Boundary(format!("d^{j}σ^{}/dt^{j} = {d:e} at t = {t}", a + 1)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Components of `Ξ^k_a σ` at one time: `sigma` along `𝒳_α`, `w` the base
/// velocity `ρ σ`, and `v[r-1]` the `𝒱^r_α` components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalField {
    pub sigma: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

impl VariationalField {
    /// `⟨λ, Ξ⟩` given form values from [`OneForm::eval`].
    pub fn pair(&self, form_values: &[Vec<f64>]) -> f64 {
        let mut s: f64 = form_values[0].iter().zip(&self.sigma).map(|(a, b)| a * b).sum();
        for (row, v) in form_values.iter().skip(1).zip(&self.v) {
            s += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        }
        s
    }
}

/// `w = ρ σ`, `v_r = (d/dt)^{r−1}[σ̇ + C(x) a σ]` along the curve whose jet
/// at time `t` is `p` (order `k`).
pub fn variational_field(alg: &LieAlgebroid, p: &JetPoint, sigma: &SectionAlongCurve, t: f64) -> Result<VariationalField> {
    let (n, m, k) = (alg.n(), alg.m(), p.order());
    if sigma.dim() != m {
        return Err(Error::Dimension(format!("section has {} components, algebroid rank is {m}", sigma.dim())));
    }
    let curve = Curve::through(alg, p)?;
    let d = k - 1;
    let s = sigma.series(t, k)?;
    let shape = (d, ());
    let xs: Vec<Taylor> = curve.x().iter().map(|c| c.truncate(d)).collect();
    let c = alg.c_at(&xs, &shape)?;
    let a = curve.y(1);
    let mut inner = Vec::with_capacity(m);
    for g in 0..m {
        let mut acc = s[g].derivative();
        for b in 0..m {
            for e in 0..m {
                if c[g][b][e].coeffs().iter().any(|&v| v != 0.0) {
                    acc = acc.try_add(&c[g][b][e].try_mul(&a[b])?.try_mul(&s[e].truncate(d))?)?;
                }
            }
        }
        inner.push(acc);
    }
    let sigma0: Vec<f64> = s.iter().map(|v| *v.value()).collect();
    let rho = alg.rho_at(p.x(), &())?;
    let w = (0..n).map(|i| (0..m).map(|b| rho[i][b] * sigma0[b]).sum()).collect();
    let v = (1..=k).map(|r| inner.iter().map(|f| f.derivative_at_zero(r - 1)).collect()).collect();
    Ok(VariationalField { sigma: sigma0, w, v })
}

/// Components of the complete lift `η^k` of a section `η(x)` as functions:
/// level 0 is `η`, level `r` is `d_T^{r−1}[d_T η^α + C^α_βγ y^β_1 η^γ]`.
pub fn complete_lift(alg: &LieAlgebroid, eta: &[JetFunction], k: usize) -> Result<Vec<Vec<JetFunction>>> {
    let m = alg.m();
    if eta.len() != m {
        return Err(Error::Dimension(format!("section has {} components, algebroid rank is {m}", eta.len())));
    }
    let first: Vec<JetFunction> = (0..m).map(|a| eta[a].dt().add(&JetFunction::sum((0..m).map(|g| alg.c_y1(a, g).mul(&eta[g]))))).collect();
    let mut out = vec![eta.to_vec()];
    for r in 1..=k {
        out.push(first.iter().map(|f| f.dt_pow(r - 1)).collect());
    }
    Ok(out)
}

/// Evaluates [`complete_lift`] at `p`.
pub fn complete_lift_coeffs(alg: &LieAlgebroid, eta: &[Expr], p: &JetPoint) -> Result<Vec<Vec<f64>>> {
    let eta: Vec<JetFunction> = eta.iter().map(JetFunction::from_expr).collect::<Result<_>>()?;
    let lift = complete_lift(alg, &eta, p.order())?;
    let curve = Curve::through(alg, p)?;
    let mut cache = EvalCache::new();
    lift.iter().map(|row| row.iter().map(|f| Ok(*f.series(&curve, &mut cache)?.value())).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymmetryStatus {
    Verified,
    Warning,
}

/// `G = F − ⟨θ_L, η^{2k−1}⟩` with the outcome of the symmetry check
/// `⟨dL, η^k⟩ = d_T F`.
#[derive(Debug, Clone)]
pub struct NoetherIntegral {
    pub g: JetFunction,
    pub symmetry: IdentityResidual,
    pub status: SymmetryStatus,
}

pub fn noether_integral(lag: &Lagrangian, eta: &[JetFunction], f: &JetFunction, plan: &SamplePlan, tol: f64) -> Result<NoetherIntegral> {
    let alg = lag.algebroid();
    let k = lag.order();
    let lift_k = complete_lift(alg, eta, k)?;
    let lift_top = complete_lift(alg, eta, 2 * k - 1)?;
    let g = f.sub(&lag.cartan_form().pair(&lift_top));
    let defect = lag.differential().pair(&lift_k).sub(&f.dt());
    let mut symmetry = IdentityResidual::new("⟨dL, η^k⟩ = d_T F");
    let need = defect.order().max(1);
    let mut rng = plan.rng();
    for _ in 0..plan.count.max(1) {
        let p = JetPoint::new(alg.n(), alg.m(), need, plan.draw(&mut rng, JetPoint::dim(alg.n(), alg.m(), need)))?;
        let v = defect.eval(alg, &p)?;
        symmetry.record(v, || format!("{:?}", p.coords()));
    }
    symmetry.finish(tol);
    let status = if symmetry.passed { SymmetryStatus::Verified } else { SymmetryStatus::Warning };
    Ok(NoetherIntegral { g, symmetry, status })
}

/// `⟨δL, η⟩` as a function on `E^{2k}`.
pub fn el_pairing(lag: &Lagrangian, eta: &[JetFunction]) -> JetFunction {
    JetFunction::sum(lag.el_components().iter().zip(eta).map(|(a, b)| a.mul(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{heavy_top, heisenberg_group, so3, tangent};
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn first_order_momenta_are_fiber_gradients() {
        let alg = so3().unwrap();
        let l = Lagrangian::parse(alg.clone(), 1, "(1*y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2").unwrap();
        let p = JetPoint::from_blocks(&[], &[vec![0.5, -1.0, 2.0]]).unwrap();
        let pi: Vec<f64> = l.pi().iter().map(|f| f.eval(&alg, &p).unwrap()).collect();
        assert_eq!(pi, vec![0.5, -2.0, 6.0]);
    }

    #[test]
    fn second_order_spline_momenta() {
        let alg = tangent(1).unwrap();
        let l = Lagrangian::parse(alg.clone(), 2, "y1_2^2/2").unwrap();
        let p = JetPoint::from_blocks(&[0.1], &[vec![0.2], vec![0.3], vec![0.4]]).unwrap();
        let m = l.momenta();
        assert_eq!(m[1][0].eval(&alg, &p).unwrap(), 0.3);
        assert_eq!(m[0][0].eval(&alg, &p).unwrap(), -0.4);
    }

    #[test]
    fn free_particle_residual() {
        let alg = tangent(2).unwrap();
        let l = Lagrangian::parse(alg, 1, "(y1_1^2 + y2_1^2)/2").unwrap();
        let p = JetPoint::from_blocks(&[0.0, 0.0], &[vec![1.0, 1.0], vec![0.25, -0.5]]).unwrap();
        assert_eq!(l.el_residual(&p).unwrap(), vec![-0.25, 0.5]);
    }

    #[test]
    fn spline_residual_is_fourth_derivative() {
        let alg = tangent(2).unwrap();
        let l = Lagrangian::parse(alg, 2, "(y1_2^2 + y2_2^2)/2").unwrap();
        let p = JetPoint::from_blocks(&[0.0, 0.0], &[vec![1.0, 1.0], vec![0.0, 0.0], vec![2.0, 3.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(l.el_residual(&p).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn rigid_body_residual_is_euler_equation() {
        // δL = −(I Ω̇ − IΩ × Ω)
        let alg = so3().unwrap();
        let i = [1.0, 2.0, 3.0];
        let l = Lagrangian::parse(alg, 1, "(1*y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2").unwrap();
        let (w, dw) = ([0.3, -0.7, 1.1], [0.5, 0.2, -0.4]);
        let p = JetPoint::from_blocks(&[], &[w.to_vec(), dw.to_vec()]).unwrap();
        let iw = [i[0] * w[0], i[1] * w[1], i[2] * w[2]];
        let cross = [iw[1] * w[2] - iw[2] * w[1], iw[2] * w[0] - iw[0] * w[2], iw[0] * w[1] - iw[1] * w[0]];
        let expect: Vec<f64> = (0..3).map(|a| -(i[a] * dw[a] - cross[a])).collect();
        assert!(close(&l.el_residual(&p).unwrap(), &expect, 1e-14));
    }

    #[test]
    fn two_paths_agree_on_heavy_top() {
        let alg = heavy_top().unwrap();
        let l = Lagrangian::parse(alg, 1, "(y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2 - x3").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let p = JetPoint::random(&mut rng, 3, 3, 2, -1.0, 1.0);
            assert!(close(&l.el_residual(&p).unwrap(), &l.el_residual_via_forms(&p).unwrap(), 1e-12));
        }
    }

    #[test]
    fn recursion_matches_alternating_sum() {
        let alg = heisenberg_group().unwrap();
        let l = Lagrangian::parse(alg.clone(), 3, "y1_3^2 + x1*y2_2*y3_1 + sin(x2)*y1_1^2 + y3_3*y2_2").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = JetPoint::random(&mut rng, 3, 3, 5, -1.0, 1.0);
        for (a, b) in l.pi().iter().zip(l.pi_alternating()) {
            assert_relative_eq!(a.eval(&alg, &p).unwrap(), b.eval(&alg, &p).unwrap(), epsilon = 1e-11);
        }
    }

    #[test]
    fn cartan_form_of_the_spline() {
        let alg = tangent(1).unwrap();
        let l = Lagrangian::parse(alg.clone(), 2, "y1_2^2/2").unwrap();
        let p = JetPoint::from_blocks(&[0.1], &[vec![0.2], vec![0.3], vec![0.4]]).unwrap();
        assert_eq!(l.cartan_form().eval(&alg, &p).unwrap(), vec![vec![-0.4], vec![0.3]]);
        let diff = l.cartan_form().sub(&l.cartan_form_via_forms());
        assert!(diff.eval(&alg, &p).unwrap().iter().flatten().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn variational_field_on_tangent_is_derivatives_of_sigma() {
        let alg = tangent(1).unwrap();
        let p = JetPoint::from_blocks(&[0.0], &[vec![1.0], vec![2.0], vec![0.0]]).unwrap();
        let s = SectionAlongCurve::parse(&["t^3"]).unwrap();
        let v = variational_field(&alg, &p, &s, 2.0).unwrap();
        assert_eq!(v.sigma, vec![8.0]);
        assert_eq!(v.w, vec![8.0]);
        assert_eq!(v.v, vec![vec![12.0], vec![12.0], vec![6.0]]);
    }

    #[test]
    fn variational_field_on_so3() {
        // a ≡ ξ0, σ = t e1: v1 = e1 + [ξ0, 0] = e1, v2 = d/dt (ξ0 × t e1) = ξ0 × e1.
        let alg = so3().unwrap();
        let xi = [0.3, 0.5, -0.2];
        let p = JetPoint::from_blocks(&[], &[xi.to_vec(), vec![0.0; 3]]).unwrap();
        let s = SectionAlongCurve::parse(&["t", "0", "0"]).unwrap();
        let v = variational_field(&alg, &p, &s, 0.0).unwrap();
        assert_eq!(v.v[0], vec![1.0, 0.0, 0.0]);
        assert!(close(&v.v[1], &[0.0, xi[2], -xi[1]], 1e-15));
    }

    #[test]
    fn complete_lift_of_a_constant_generator_on_so3() {
        let alg = so3().unwrap();
        let p = JetPoint::from_blocks(&[], &[vec![0.3, 0.5, -0.2]]).unwrap();
        let c = complete_lift_coeffs(&alg, &["1".parse().unwrap(), Expr::Num(0.0), Expr::Num(0.0)], &p).unwrap();
        // v^α = C^α_β1 y^β_1: (0, y3, −y2)
        assert!(close(&c[1], &[0.0, -0.2, -0.5], 1e-15));
    }

    #[test]
    fn lift_agrees_with_variational_field_along_base_section() {
        // σ(t) = η(x(t)) on the Heisenberg group with η = (x2, 1, x1).
        let alg = heisenberg_group().unwrap();
        let eta: Vec<Expr> = ["x2", "1", "x1"].iter().map(|s| s.parse().unwrap()).collect();
        let p = JetPoint::from_blocks(&[0.2, 0.1, -0.3], &[vec![0.4, -0.6, 0.9], vec![0.7, 0.1, -0.2]]).unwrap();
        let lift = complete_lift_coeffs(&alg, &eta, &p).unwrap();
        // x(t) of the curve, to second order, gives σ(t) as a polynomial.
        let x = crate::jet::prolong_x(&alg, &p, 2).unwrap();
        let poly = |s: &Taylor| format!("{:e} + {:e}*t + {:e}*t^2", s.coeff(0), s.coeff(1), s.coeff(2));
        let sigma = SectionAlongCurve::parse(&[&poly(&x[1]), "1", &poly(&x[0])]).unwrap();
        let v = variational_field(&alg, &p, &sigma, 0.0).unwrap();
        for r in 0..2 {
            assert!(close(&lift[r + 1], &v.v[r], 1e-12), "level {}: {:?} vs {:?}", r + 1, lift[r + 1], v.v[r]);
        }
    }

    #[test]
    fn momentum_noether_integral_on_free_particle() {
        let alg = tangent(2).unwrap();
        let l = Lagrangian::parse(alg.clone(), 1, "(y1_1^2 + y2_1^2)/2").unwrap();
        let eta = [JetFunction::constant(1.0), JetFunction::zero()];
        let ni = noether_integral(&l, &eta, &JetFunction::zero(), &SamplePlan { count: 10, ..Default::default() }, 1e-10).unwrap();
        assert_eq!(ni.status, SymmetryStatus::Verified);
        let p = JetPoint::from_blocks(&[0.3, 0.1], &[vec![2.0, -1.0]]).unwrap();
        assert_eq!(ni.g.eval(&alg, &p).unwrap(), -2.0);
    }

    #[test]
    fn broken_symmetry_is_flagged() {
        let alg = tangent(1).unwrap();
        let l = Lagrangian::parse(alg, 1, "y1_1^2/2 - x1^2/2").unwrap();
        let ni = noether_integral(&l, &[JetFunction::constant(1.0)], &JetFunction::zero(), &SamplePlan::default(), 1e-10).unwrap();
        assert_eq!(ni.status, SymmetryStatus::Warning);
    }

    #[test]
    fn boundary_check() {
        let b = SectionAlongCurve::bump(0.0, 1.0, 3, &[1.0]);
        assert!(b.check_boundary(0.0, 1.0, 3, 1e-12).is_ok());
        assert!(b.check_boundary(0.0, 1.0, 4, 1e-12).is_err());
        assert!(SectionAlongCurve::parse(&["x1"]).is_err());
    }

    #[test]
    fn lagrangian_rejects_foreign_coordinates() {
        let alg = tangent(1).unwrap();
        assert!(Lagrangian::parse(alg.clone(), 1, "y1_2").is_err());
        assert!(Lagrangian::parse(alg, 1, "y2_1").is_err());
    }
}
