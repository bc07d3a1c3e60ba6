//! Euler-Lagrange equations as an explicit ODE, fixed-step RK4, and
//! checks along the resulting trajectories.
//!
//! State layout is `(x, y_1, ..., y_{2k-1})`. The top block `y_{2k}` is
//! solved from `W y_{2k} = −R(0)`, where `R` is `δL` as a function of the
//! top block with everything else frozen and `W = ∂R/∂y_{2k}`. Only the
//! leading term `(−1)^k d_T^k ∂L/∂y_k` of `δL` reaches `y_{2k}`, so `W` is
//! the signed Hessian of `L` in `y_k`. Affineness of `R`, and with it this
//! `W`, is checked once at assembly against a random probe.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::algebroid::SamplePlan;
use crate::error::{Error, Result};
use crate::jet::{Coord, JetFunction, JetPoint, PointEvaluator};
use crate::variational::{variational_field, Lagrangian, SectionAlongCurve};

/// Reciprocal condition number below which `W` counts as singular.
pub const RCOND_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Regularity {
    pub rcond: f64,
    pub affine_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct AssembledOde {
    lag: Arc<Lagrangian>,
    n: usize,
    m: usize,
    k: usize,
    forcing: Option<Vec<f64>>,
    /// Upper triangle, `[α][β − α]`, of `∂δL_α/∂y^β_{2k} = (−1)^k ∂²L/∂y^α_k ∂y^β_k`.
    top_jacobian: Vec<Vec<JetFunction>>,
    pub regularity: Regularity,
}

fn rcond(w: &DMatrix<f64>) -> f64 {
    let sv = w.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

impl AssembledOde {
    /// Checks regularity at `state0` and affineness of `δL` in the top block
    /// at a random second top value.
    pub fn assemble(lag: Arc<Lagrangian>, state0: &[f64]) -> Result<AssembledOde> {
        let alg = lag.algebroid().clone();
        let (n, m, k) = (alg.n(), alg.m(), lag.order());
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let top_jacobian = (0..m)
            .map(|a| {
                let pa = lag.function().partial(&alg, Coord::Y { alpha: a, r: k });
                (a..m).map(|b| pa.partial(&alg, Coord::Y { alpha: b, r: k }).scale(sign)).collect()
            })
            .collect();
        let mut ode = AssembledOde { lag, n, m, k, forcing: None, top_jacobian, regularity: Regularity { rcond: 0.0, affine_deviation: 0.0 } };
        ode.check_state(state0)?;
        let (r0, w, rc) = ode.linearize(state0)?;
        let mut rng = SamplePlan::default().rng();
        let probe: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rp = ode.residual_with_top(state0, &probe)?;
        let pred = &r0 + &w * DVector::from_vec(probe);
        let dev = (DVector::from_vec(rp) - pred).amax();
        let scale = 1.0 + r0.amax() + w.amax();
        if dev > 1e-9 * scale {
            return Err(Error::NotAffine(dev));
        }
        ode.regularity = Regularity { rcond: rc, affine_deviation: dev };
        Ok(ode)
    }

    /// Adds a constant vector to the solved top block, giving a trajectory
    /// that is not a solution.
    pub fn with_top_forcing(mut self, f: Vec<f64>) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn lagrangian(&self) -> &Arc<Lagrangian> {
        &self.lag
    }

    pub fn state_dim(&self) -> usize {
        self.n + (2 * self.k - 1) * self.m
    }

    pub fn order(&self) -> usize {
        self.k
    }

    fn check_state(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.state_dim() {
            return Err(Error::Dimension(format!("state has {} entries, expected {}", s.len(), self.state_dim())));
        }
        Ok(())
    }

    /// Order-`2k` jet from a state and a top block.
    pub fn jet(&self, state: &[f64], top: &[f64]) -> Result<JetPoint> {
        let mut c = state.to_vec();
        c.extend_from_slice(top);
        JetPoint::new(self.n, self.m, 2 * self.k, c)
    }

    fn residual_with_top(&self, state: &[f64], top: &[f64]) -> Result<Vec<f64>> {
        self.lag.el_residual(&self.jet(state, top)?)
    }

    /// `R(0)` and `W` from one evaluation on the curve with zero top block.
    fn linearize(&self, state: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>, f64)> {
        let m = self.m;
        let alg = self.lag.algebroid();
        let jet = self.jet(state, &vec![0.0; m])?;
        let r0 = DVector::from_vec(self.lag.el_residual(&jet)?);
        let mut ev = PointEvaluator::new(alg, &jet.truncate(self.k)?)?;
        let mut w = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let v = ev.eval(&self.top_jacobian[a][b - a])?;
                w[(a, b)] = v;
                w[(b, a)] = v;
            }
        }
        let rc = rcond(&w);
        if !(rc >= RCOND_THRESHOLD) {
            return Err(Error::Singular { rcond: rc, threshold: RCOND_THRESHOLD, state: state.to_vec(), time: None });
        }
        Ok((r0, w, rc))
    }

    /// `y_{2k}` solving `δL = 0` at `state`, plus any forcing.
    pub fn top(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check_state(state)?;
        let (r0, w, _) = self.linearize(state)?;
        let sol = w.lu().solve(&(-r0)).ok_or_else(|| Error::Singular { rcond: 0.0, threshold: RCOND_THRESHOLD, state: state.to_vec(), time: None })?;
        let mut top: Vec<f64> = sol.iter().copied().collect();
        if let Some(f) = &self.forcing {
            top.iter_mut().zip(f).for_each(|(t, f)| *t += f);
        }
        Ok(top)
    }

    /// Returns the state derivative and the top block used for it.
    pub fn rhs(&self, state: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (n, m) = (self.n, self.m);
        let top = self.top(state)?;
        let alg = self.lag.algebroid();
        let rho = alg.rho_at(&state[..n], &())?;
        let mut d = Vec::with_capacity(state.len());
        for row in rho.iter().take(n) {
            d.push(row.iter().zip(&state[n..n + m]).map(|(a, b)| a * b).sum());
        }
        d.extend_from_slice(&state[n + m..]);
        d.extend_from_slice(&top);
        Ok((d, top))
    }
}

pub fn assemble_ode(lag: Arc<Lagrangian>, state0: &[f64]) -> Result<AssembledOde> {
    AssembledOde::assemble(lag, state0)
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub label: String,
    pub method: String,
    pub step: f64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `y_{2k}` at each grid point.
    pub tops: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Order-`2k` jet at grid point `i`.
    pub fn jet(&self, i: usize) -> Result<JetPoint> {
        let mut c = self.states[i].clone();
        c.extend_from_slice(&self.tops[i]);
        JetPoint::new(self.n, self.m, 2 * self.k, c)
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectories have at least one point")
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((1..=self.n).map(|i| format!("x{i}")));
        for r in 1..2 * self.k {
            h.extend((1..=self.m).map(|a| format!("y{a}_{r}")));
        }
        h
    }

    /// One row per grid point, shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = self.column_names().join(",");
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:?}"));
            for v in s {
                out.push_str(&format!(",{v:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    /// Largest component-wise difference of the states on a shared grid.
    pub fn max_state_difference(&self, other: &Trajectory) -> Result<f64> {
        if self.len() != other.len() || self.states[0].len() != other.states[0].len() {
            return Err(Error::Dimension("trajectories have different shapes".into()));
        }
        Ok(self.states.iter().zip(&other.states).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max))
    }
}

fn axpy(a: &[f64], h: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + h * y).collect()
}

/// Classical RK4 with `N = round((t1 − t0)/h)` equal steps.
pub fn integrate(ode: &AssembledOde, state0: &[f64], t0: f64, t1: f64, h: f64) -> Result<Trajectory> {
    if !(h > 0.0) || !(t1 > t0) {
        return Err(Error::Config(format!("integration needs h > 0 and t1 > t0 (h={h}, t0={t0}, t1={t1})")));
    }
    ode.check_state(state0)?;
    let steps = ((t1 - t0) / h).round().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut tops = Vec::with_capacity(steps + 1);
    let mut s = state0.to_vec();
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let (k1, top) = ode.rhs(&s).map_err(|e| e.at_time(t))?;
        let (k2, _) = ode.rhs(&axpy(&s, h / 2.0, &k1)).map_err(|e| e.at_time(t + h / 2.0))?;
        let (k3, _) = ode.rhs(&axpy(&s, h / 2.0, &k2)).map_err(|e| e.at_time(t + h / 2.0))?;
        let (k4, _) = ode.rhs(&axpy(&s, h, &k3)).map_err(|e| e.at_time(t + h))?;
        times.push(t);
        states.push(s.clone());
        tops.push(top);
        for j in 0..s.len() {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t + h));
        }
    }
    let (_, top) = ode.rhs(&s).map_err(|e| e.at_time(t1))?;
    times.push(t1);
    states.push(s);
    tops.push(top);
    Ok(Trajectory { label: ode.lag.label().to_string(), method: "rk4".into(), step: h, n: ode.n, m: ode.m, k: ode.k, times, states, tops })
}

/// `(y_h − y_{h/2}) / (y_{h/2} − y_{h/4})` on the final state, max norm.
/// Close to 16 for a fourth-order method; NaN when both differences vanish.
pub fn step_halving_ratio(ode: &AssembledOde, state0: &[f64], t0: f64, t1: f64, h: f64) -> Result<f64> {
    let a = integrate(ode, state0, t0, t1, h)?;
    let b = integrate(ode, state0, t0, t1, h / 2.0)?;
    let c = integrate(ode, state0, t0, t1, h / 4.0)?;
    let diff = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(diff(a.last_state(), b.last_state()) / diff(b.last_state(), c.last_state()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Drift {
    pub label: String,
    pub initial: f64,
    pub max_drift: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConservationReport {
    pub rows: Vec<Drift>,
    pub passed: bool,
}

pub fn conservation_report(lag: &Lagrangian, traj: &Trajectory, observables: &[(String, JetFunction)], tol: f64) -> Result<ConservationReport> {
    let alg = lag.algebroid();
    let mut init = vec![0.0; observables.len()];
    let mut drift = vec![0.0f64; observables.len()];
    for i in 0..traj.len() {
        let mut ev = PointEvaluator::new(alg, &traj.jet(i)?)?;
        for (j, (_, f)) in observables.iter().enumerate() {
            let v = ev.eval(f)?;
            if i == 0 {
                init[j] = v;
            }
            drift[j] = drift[j].max((v - init[j]).abs());
        }
    }
    let rows: Vec<Drift> = observables
        .iter()
        .zip(init.iter().zip(&drift))
        .map(|((label, _), (&initial, &max_drift))| Drift { label: label.clone(), initial, max_drift, tolerance: tol, passed: max_drift <= tol })
        .collect();
    let passed = rows.iter().all(|r| r.passed);
    Ok(ConservationReport { rows, passed })
}

/// Largest `|δL|` at the stored order-`2k` jets.
pub fn el_residual_along(lag: &Lagrangian, traj: &Trajectory) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..traj.len() {
        for v in lag.el_residual(&traj.jet(i)?)? {
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

/// The first variation of the action along a trajectory in the direction
/// of `σ`, by two quadratures on the grid: `∫⟨dL(a^k), Ξ^k_a σ⟩ dt` and
/// `∫⟨δL(a^{2k}), σ⟩ dt`. The two agree when `σ` vanishes with its first
/// `k − 1` derivatives at both ends.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ActionGradient {
    pub first_variation: f64,
    pub el_pairing: f64,
}

pub fn discrete_action_gradient(lag: &Lagrangian, traj: &Trajectory, sigma: &SectionAlongCurve) -> Result<ActionGradient> {
    let alg = lag.algebroid();
    let k = lag.order();
    let (t0, t1) = (traj.times[0], *traj.times.last().expect("nonempty"));
    sigma.check_boundary(t0, t1, k, 1e-10)?;
    let dl = lag.differential();
    let mut fv = Vec::with_capacity(traj.len());
    let mut el = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let t = traj.times[i];
        let jet = traj.jet(i)?;
        let low = jet.truncate(k)?;
        let xi = variational_field(alg, &low, sigma, t)?;
        fv.push(xi.pair(&dl.eval(alg, &low)?));
        let s = sigma.value(t)?;
        el.push(lag.el_residual(&jet)?.iter().zip(&s).map(|(a, b)| a * b).sum());
    }
    let trap = |v: &[f64]| -> f64 { v.windows(2).zip(traj.times.windows(2)).map(|(f, t)| 0.5 * (t[1] - t[0]) * (f[0] + f[1])).sum() };
    Ok(ActionGradient { first_variation: trap(&fv), el_pairing: trap(&el) })
}
