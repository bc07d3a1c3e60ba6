//! 1-forms on `E^k` in the dual basis `{𝒳^α, 𝒱^α_r}` and the operators
//! acting on them: `d_T`, the vertical endomorphism `S`, the family `𝔻_r`
//! with `𝔼 = 𝔻_0` and `𝕊 = 𝔻_1`, and the differential of a function.
//!
//! A form records its geometric order `k` (rows `0..=k`, row 0 holding the
//! `𝒳` coefficients) separately from [`OneForm::eval_order`], the jet order
//! its coefficients need.

use rand::Rng;
use serde::Serialize;

use crate::algebroid::{IdentityResidual, LieAlgebroid, SamplePlan};
use crate::error::{Error, Result};
use crate::jet::{Coord, Curve, EvalCache, JetFunction, JetPoint};
use crate::num::factorial;

#[derive(Clone, Debug)]
pub struct OneForm {
    m: usize,
    rows: Vec<Vec<JetFunction>>,
}

impl OneForm {
    /// `rows[r][α]` is the coefficient of `𝒱^α_r`, with `𝒱_0 = 𝒳`.
    pub fn new(m: usize, rows: Vec<Vec<JetFunction>>) -> Result<OneForm> {
        if rows.is_empty() || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension(format!("a 1-form needs at least one row of {m} coefficients")));
        }
        Ok(OneForm { m, rows })
    }

    pub fn zero(m: usize, k: usize) -> OneForm {
        OneForm { m, rows: vec![vec![JetFunction::zero(); m]; k + 1] }
    }

    /// `f 𝒱^α_r` on `E^k`.
    pub fn basis(m: usize, k: usize, r: usize, alpha: usize, f: JetFunction) -> OneForm {
        let mut z = OneForm::zero(m, k.max(r));
        z.rows[r][alpha] = f;
        z
    }

    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[Vec<JetFunction>] {
        &self.rows
    }

    pub fn coeff(&self, r: usize, alpha: usize) -> &JetFunction {
        &self.rows[r][alpha]
    }

    /// Smallest jet order at which every coefficient can be evaluated.
    pub fn eval_order(&self) -> usize {
        self.rows.iter().flatten().map(JetFunction::order).max().unwrap_or(0)
    }

    /// Pullback to `E^k` for `k >= self.order()`.
    pub fn padded(&self, k: usize) -> OneForm {
        let mut rows = self.rows.clone();
        rows.resize(k.max(self.order()) + 1, vec![JetFunction::zero(); self.m]);
        OneForm { m: self.m, rows }
    }

    fn zip(&self, o: &OneForm, f: impl Fn(&JetFunction, &JetFunction) -> JetFunction) -> OneForm {
        let k = self.order().max(o.order());
        let (a, b) = (self.padded(k), o.padded(k));
        let rows = a.rows.iter().zip(&b.rows).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| f(x, y)).collect()).collect();
        OneForm { m: self.m, rows }
    }

    pub fn add(&self, o: &OneForm) -> OneForm {
        self.zip(o, JetFunction::add)
    }

    pub fn sub(&self, o: &OneForm) -> OneForm {
        self.zip(o, JetFunction::sub)
    }

    pub fn scale(&self, c: f64) -> OneForm {
        self.map(|f| f.scale(c))
    }

    pub fn mul_fn(&self, g: &JetFunction) -> OneForm {
        self.map(|f| f.mul(g))
    }

    fn map(&self, f: impl Fn(&JetFunction) -> JetFunction) -> OneForm {
        OneForm { m: self.m, rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    /// Coefficient values at `p`, one row per basis level.
    pub fn eval(&self, alg: &LieAlgebroid, p: &JetPoint) -> Result<Vec<Vec<f64>>> {
        let curve = Curve::through(alg, p)?;
        self.eval_on(&curve, &mut EvalCache::new())
    }

    pub fn eval_on(&self, curve: &Curve, cache: &mut EvalCache) -> Result<Vec<Vec<f64>>> {
        self.rows.iter().map(|r| r.iter().map(|f| Ok(*f.series(curve, cache)?.value())).collect()).collect()
    }

    /// `⟨λ, Z⟩` where `z[0]` holds the `𝒳_α` components of `Z` and `z[r]`
    /// its `𝒱^r_α` components. Missing levels count as zero.
    pub fn pair(&self, z: &[Vec<JetFunction>]) -> JetFunction {
        JetFunction::sum(self.rows.iter().zip(z).flat_map(|(lr, zr)| lr.iter().zip(zr).map(|(a, b)| a.mul(b)).collect::<Vec<_>>()))
    }
}

/// `θ^α = C^α_βγ y^β_1 𝒳^γ`, the correction in `d_T 𝒳^α`.
fn theta0(alg: &LieAlgebroid) -> Vec<OneForm> {
    let m = alg.m();
    (0..m).map(|a| OneForm { m, rows: vec![(0..m).map(|g| alg.c_y1(a, g).clone()).collect()] }).collect()
}

/// `d_T^s θ^α` for every `α`, cached on the algebroid.
pub fn theta(alg: &LieAlgebroid, s: usize) -> Vec<OneForm> {
    let mut cache = alg.theta.lock().unwrap_or_else(|e| e.into_inner());
    if cache.is_empty() {
        cache.push(theta0(alg));
    }
    while cache.len() <= s {
        let next = cache.last().unwrap().iter().map(|f| form_dt(alg, f)).collect();
        cache.push(next);
    }
    cache[s].clone()
}

/// `d_T` on forms, `E^k → E^{k+1}`: Leibniz on coefficients with
/// `d_T 𝒳^α = 𝒱^α_1 − C^α_βγ y^β_1 𝒳^γ` and `d_T 𝒱^α_r = 𝒱^α_{r+1}`.
pub fn form_dt(alg: &LieAlgebroid, l: &OneForm) -> OneForm {
    let (m, k) = (l.m, l.order());
    let mut rows = Vec::with_capacity(k + 2);
    rows.push(
        (0..m)
            .map(|g| {
                let corr = JetFunction::sum((0..m).map(|a| l.rows[0][a].mul(alg.c_y1(a, g))));
                l.rows[0][g].dt().sub(&corr)
            })
            .collect(),
    );
    for r in 1..=k + 1 {
        rows.push(
            (0..m)
                .map(|a| {
                    let d = if r <= k { l.rows[r][a].dt() } else { JetFunction::zero() };
                    d.add(&l.rows[r - 1][a])
                })
                .collect(),
        );
    }
    OneForm { m, rows }
}

pub fn form_dt_pow(alg: &LieAlgebroid, l: &OneForm, s: usize) -> OneForm {
    (0..s).fold(l.clone(), |f, _| form_dt(alg, &f))
}

/// The vertical endomorphism:
/// `S(𝒳^α) = 0`, `S(𝒱^α_1) = 𝒳^α`,
/// `S(𝒱^α_r) = r 𝒱^α_{r−1} − d_T^{r−2}(C^α_βγ y^β_1 𝒳^γ)` for `r >= 2`.
pub fn vertical(alg: &LieAlgebroid, l: &OneForm) -> OneForm {
    let (m, k) = (l.m, l.order());
    let mut out = OneForm::zero(m, k);
    for r in 1..=k {
        for a in 0..m {
            out.rows[r - 1][a] = l.rows[r][a].scale(r as f64);
        }
    }
    for r in 2..=k {
        let th = theta(alg, r - 2);
        for (a, t) in th.iter().enumerate() {
            if !l.rows[r][a].is_zero() {
                out = out.sub(&t.mul_fn(&l.rows[r][a]).padded(k));
            }
        }
    }
    out
}

pub fn vertical_pow(alg: &LieAlgebroid, l: &OneForm, p: usize) -> OneForm {
    (0..p).fold(l.clone(), |f, _| vertical(alg, &f))
}

/// `𝔻_r(λ) = Σ_{j=r}^{k} (−1)^{j+r}/j! d_T^{j−r}(S^j λ)` on `E^{2k−r}`.
pub fn operator_d(alg: &LieAlgebroid, l: &OneForm, r: usize) -> Result<OneForm> {
    let k = l.order();
    if r > k {
        return Err(Error::InvalidOrder(r));
    }
    let mut acc = OneForm::zero(l.m, 2 * k - r);
    let mut sj = vertical_pow(alg, l, r);
    for j in r..=k {
        let sign = if (j + r).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc = acc.add(&form_dt_pow(alg, &sj, j - r).scale(sign / factorial(j)));
        sj = vertical(alg, &sj);
    }
    Ok(acc.padded(2 * k - r))
}

/// `𝔼 = 𝔻_0`.
pub fn variational_operator(alg: &LieAlgebroid, l: &OneForm) -> OneForm {
    operator_d(alg, l, 0).expect("r = 0 is always in range")
}

/// `𝕊 = 𝔻_1`; for `k = 0` the result is zero.
pub fn cartan_operator(alg: &LieAlgebroid, l: &OneForm) -> OneForm {
    if l.order() == 0 {
        return OneForm::zero(l.m, 0);
    }
    operator_d(alg, l, 1).expect("r = 1 is in range for k >= 1")
}

/// `dF = ρ^i_α ∂F/∂x^i 𝒳^α + ∂F/∂y^α_r 𝒱^α_r` on `E^k`, `k >= F.order()`.
pub fn differential(alg: &LieAlgebroid, f: &JetFunction, k: usize) -> OneForm {
    let (n, m) = (alg.n(), alg.m());
    let k = k.max(f.order());
    let dx: Vec<JetFunction> = (0..n).map(|i| f.partial(alg, Coord::X(i))).collect();
    let mut rows = vec![(0..m).map(|a| JetFunction::sum((0..n).map(|i| alg.rho_fn(i, a).mul(&dx[i])))).collect::<Vec<_>>()];
    for r in 1..=k {
        rows.push((0..m).map(|a| f.partial(alg, Coord::Y { alpha: a, r })).collect());
    }
    OneForm { m, rows }
}

/// Random polynomial in the coordinates of `E^k` with a single `cos` term
/// in the base so the anchor's `x`-dependence is exercised.
pub fn random_polynomial(rng: &mut impl Rng, n: usize, m: usize, k: usize, terms: usize) -> JetFunction {
    let coords = Coord::all(n, m, k);
    let mut src = format!("{:.3}", rng.gen_range(-1.0..1.0));
    for _ in 0..if coords.is_empty() { 0 } else { terms } {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let deg = rng.gen_range(1..=2);
        let mono: Vec<String> = (0..deg).map(|_| coords[rng.gen_range(0..coords.len())].to_string()).collect();
        src.push_str(&format!(" + {c:.3}*{}", mono.join("*")));
    }
    if n > 0 {
        src.push_str(&format!(" + {:.3}*cos(x{})", rng.gen_range(-1.0..1.0), rng.gen_range(1..=n)));
    }
    JetFunction::parse(&src).expect("generated source parses")
}

pub fn random_form(rng: &mut impl Rng, n: usize, m: usize, k: usize) -> OneForm {
    let rows = (0..=k).map(|_| (0..m).map(|_| random_polynomial(rng, n, m, k, 3)).collect()).collect();
    OneForm { m, rows }
}

/// Residuals of the operator identities for one algebroid and order.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorSuiteReport {
    pub algebroid: String,
    pub order: usize,
    pub samples: usize,
    pub tolerance: f64,
    pub identities: Vec<IdentityResidual>,
    pub passed: bool,
}

/// Forms whose values must vanish, plus the row from which to look.
struct Check {
    name: String,
    form: OneForm,
    from_row: usize,
}

/// Runs every operator identity on random polynomial forms of order `k`:
/// commutator `[S, d_T] = 1`, nilpotency, the `𝔻_r` recursions, the
/// `𝔼`/`𝕊` relation, `𝕊∘d_T = 1`, `𝔼∘d_T = 0` and the semibasic shape of
/// `𝔼(dL)` and `𝕊(dL)`.
pub fn operator_suite(alg: &LieAlgebroid, k: usize, plan: &SamplePlan, tol: f64) -> Result<OperatorSuiteReport> {
    if k == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let (n, m) = (alg.n(), alg.m());
    let mut rng = plan.rng();
    let lam = random_form(&mut rng, n, m, k);
    let mu = random_form(&mut rng, n, m, k - 1);
    let lag = random_polynomial(&mut rng, n, m, k, 6);

    let mut checks = Vec::new();
    let mut push = |name: String, form: OneForm, from_row: usize| checks.push(Check { name, form, from_row });

    let dl = form_dt(alg, &lam);
    let comm = vertical(alg, &dl).sub(&form_dt(alg, &vertical(alg, &lam))).sub(&lam);
    push("S∘d_T − d_T∘S = id".into(), comm, 0);
    push(format!("S^{} = 0", k + 1), vertical_pow(alg, &lam, k + 1), 0);
    let ds: Vec<OneForm> = (0..=k).map(|r| operator_d(alg, &lam, r)).collect::<Result<_>>()?;
    for r in 0..=k {
        let next = if r < k { ds[r + 1].scale(r as f64) } else { OneForm::zero(m, 0) };
        push(format!("S∘𝔻_{r} = {r}·𝔻_{}", r + 1), vertical(alg, &ds[r]).sub(&next), 0);
    }
    for r in 1..=k {
        let rhs = vertical_pow(alg, &lam, r - 1).scale(1.0 / factorial(r - 1)).sub(&form_dt(alg, &ds[r]));
        push(format!("𝔻_{} = S^{}/{}! − d_T∘𝔻_{r}", r - 1, r - 1, r - 1), ds[r - 1].sub(&rhs), 0);
    }
    let e = &ds[0];
    push("𝔼 = id − d_T∘𝕊".into(), e.sub(&lam).add(&form_dt(alg, &ds[1])), 0);
    push("𝕊∘d_T = id".into(), cartan_operator(alg, &dl).sub(&lam), 0);
    push("𝔼∘d_T = 0".into(), variational_operator(alg, &form_dt(alg, &mu)), 0);
    let dlag = differential(alg, &lag, k);
    push("𝔼(dL) is semibasic".into(), variational_operator(alg, &dlag), 1);
    push("𝕊(dL) vanishes above level k−1".into(), cartan_operator(alg, &dlag), k);

    let need = checks.iter().map(|c| c.form.eval_order()).max().unwrap_or(1).max(1);
    let mut residuals: Vec<IdentityResidual> = checks.iter().map(|c| IdentityResidual::new(&c.name)).collect();
    let mut prng = plan.rng();
    for _ in 0..plan.count.max(1) {
        let p = JetPoint::new(n, m, need, plan.draw(&mut prng, JetPoint::dim(n, m, need)))?;
        let curve = Curve::through(alg, &p)?;
        let mut cache = EvalCache::new();
        for (c, res) in checks.iter().zip(residuals.iter_mut()) {
            let vals = c.form.eval_on(&curve, &mut cache)?;
            let worst = vals.iter().skip(c.from_row).flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            res.record(worst, || format!("{:?}", p.coords()));
        }
    }
    residuals.iter_mut().for_each(|r| r.finish(tol));
    let passed = residuals.iter().all(|r| r.passed);
    Ok(OperatorSuiteReport { algebroid: alg.name().to_string(), order: k, samples: plan.count.max(1), tolerance: tol, identities: residuals, passed })
}
