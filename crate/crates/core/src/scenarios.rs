//! Bundled end-to-end systems. Each one is a [`ConfigDocument`] plus an
//! independent reference: a closed form or a separately coded integrator.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebroid::{self, so3_constants, LieAlgebroid};
use crate::config::{
    AlgebroidRef, AlgebroidSpec, CheckSettings, ConfigDocument, ExprSrc, InitialSpec, LagrangianSpec, MorphismSpec, NoetherSpec, RunSpec, System,
};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::jet::JetPoint;
use crate::morphism::compare_reduction;
use crate::report::{simulate, RunReport, Verdict};

pub const SCENARIOS: [&str; 7] = ["cubic_spline", "rigid_body", "nhp_cubic", "heavy_top", "lp_trivial", "hamel_quasi", "holonomic"];

pub const INERTIA: [f64; 3] = [1.0, 2.0, 3.0];
pub const CHI: [f64; 3] = [0.0, 0.0, 1.0];
pub const MGL: f64 = 1.0;
/// Frozen leaf parameter of the holonomic scenario; the oscillator
/// frequency is its square root.
pub const LEAF_W: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Reference {
    /// `x(t)` cubic from the initial jet.
    CubicPolynomial,
    /// `IΩ̇ = IΩ × Ω`.
    EulerRigidBody,
    /// Residual `y_4 + y_1 × y_3` at the computed jets.
    RiemannianCubic,
    /// `IΩ̇ = IΩ × Ω + mgl Γ × χ`, `Γ̇ = Γ × Ω`.
    HeavyTop,
    /// Straight line on the base, constant algebra velocity.
    Decoupled,
    /// Same system integrated in the coordinate frame and mapped over.
    CoordinateFrame,
    /// Harmonic oscillator `q̈ = −w q` with `w` frozen.
    LeafOscillator,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: ConfigDocument,
    pub reference: Reference,
    pub reference_tol: f64,
}

fn e(s: &str) -> ExprSrc {
    ExprSrc(s.to_string())
}

fn inline(alg: std::sync::Arc<LieAlgebroid>) -> AlgebroidRef {
    AlgebroidRef::Inline(AlgebroidSpec::from_algebroid(&alg))
}

fn observables(items: &[(&str, &str)]) -> BTreeMap<String, ExprSrc> {
    items.iter().map(|(k, v)| (k.to_string(), e(v))).collect()
}

fn doc(name: &str, alg: AlgebroidRef, k: usize, lag: &str, x: Vec<f64>, y: Vec<Vec<f64>>, run: RunSpec) -> ConfigDocument {
    ConfigDocument {
        name: name.into(),
        algebroid: alg,
        lagrangian: LagrangianSpec { k, expr: e(lag) },
        initial: Some(InitialSpec { x, y }),
        run: Some(run),
        observables: BTreeMap::new(),
        morphism: None,
        noether: None,
        checks: CheckSettings::default(),
    }
}

const RIGID_L: &str = "(1*y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2";

/// Quasi-velocity frame `∂1`, `exp(x1) ∂2` on `ℝ²`.
pub fn hamel_algebroid() -> Result<std::sync::Arc<LieAlgebroid>> {
    let rho = vec![vec![e("1").parse("")?, e("0").parse("")?], vec![e("0").parse("")?, e("exp(x1)").parse("")?]];
    algebroid::quasi_velocity("hamel-frame", rho, &[(1, 0, 1, e("1").parse("")?)])
}

/// Frame `∂1`, `x1 ∂1 + ∂2` tangent to the leaves `x3 = w` of `ℝ³`.
pub fn leaf_algebroid() -> Result<std::sync::Arc<LieAlgebroid>> {
    let p = |s: &str| e(s).parse("");
    let rho = vec![vec![p("1")?, p("x1")?], vec![p("0")?, p("1")?], vec![p("0")?, p("0")?]];
    let c = crate::algebroid::complete_structure(2, &[(0, 0, 1, p("1")?)])?;
    LieAlgebroid::new("leaf-frame", 3, 2, rho, c)
}

pub fn scenario(name: &str) -> Result<Scenario> {
    let std_run = |t1: f64| RunSpec { t0: 0.0, t1, h: 1e-3 };
    Ok(match name {
        "cubic_spline" => {
            let mut d = doc(
                "cubic_spline",
                AlgebroidRef::Catalog("tangent(2)".into()),
                2,
                "(y1_2^2 + y2_2^2)/2",
                vec![0.1, -0.2],
                vec![vec![1.0, 0.5], vec![-0.3, 0.8], vec![0.6, -1.2]],
                std_run(1.0),
            );
            d.observables = observables(&[("energy", "(y1_2^2 + y2_2^2)/2 - y1_1*y1_3 - y2_1*y2_3")]);
            d.noether = Some(NoetherSpec { eta: vec![e("1"), e("0")], f: e("0") });
            Scenario { name: "cubic_spline", summary: "x'''' = 0 on the plane", config: d, reference: Reference::CubicPolynomial, reference_tol: 1e-8 }
        }
        "rigid_body" => {
            let mut d = doc("rigid_body", AlgebroidRef::Catalog("so3".into()), 1, RIGID_L, vec![], vec![vec![1.0, 0.3, -0.5]], std_run(10.0));
            d.observables = observables(&[("energy", RIGID_L), ("casimir", "(1*y1_1)^2 + (2*y2_1)^2 + (3*y3_1)^2")]);
            Scenario { name: "rigid_body", summary: "free rigid body, I = diag(1,2,3)", config: d, reference: Reference::EulerRigidBody, reference_tol: 1e-6 }
        }
        "nhp_cubic" => {
            let mut d = doc(
                "nhp_cubic",
                AlgebroidRef::Catalog("so3".into()),
                2,
                "(y1_2^2 + y2_2^2 + y3_2^2)/2",
                vec![],
                vec![vec![0.4, -0.3, 0.5], vec![0.2, 0.1, -0.4], vec![-0.3, 0.5, 0.2]],
                std_run(2.0),
            );
            d.observables =
                observables(&[("casimir", "y1_3^2 + y2_3^2 + y3_3^2"), ("energy", "(y1_2^2 + y2_2^2 + y3_2^2)/2 - y1_1*y1_3 - y2_1*y2_3 - y3_1*y3_3")]);
            Scenario { name: "nhp_cubic", summary: "Riemannian cubics on so(3)", config: d, reference: Reference::RiemannianCubic, reference_tol: 1e-8 }
        }
        "heavy_top" => {
            let lag = "(1*y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2 - 1*(0*x1 + 0*x2 + 1*x3)";
            let mut d = doc("heavy_top", inline(algebroid::heavy_top()?), 1, lag, vec![0.0, 0.6, 0.8], vec![vec![0.5, -0.4, 0.9]], std_run(10.0));
            d.observables = observables(&[
                ("gamma_norm", "x1^2 + x2^2 + x3^2"),
                ("energy", "(1*y1_1^2 + 2*y2_1^2 + 3*y3_1^2)/2 + x3"),
                ("casimir", "1*x1*y1_1 + 2*x2*y2_1 + 3*x3*y3_1"),
            ]);
            Scenario { name: "heavy_top", summary: "heavy top with advected gravity direction", config: d, reference: Reference::HeavyTop, reference_tol: 1e-6 }
        }
        "lp_trivial" => {
            let alg = algebroid::atiyah_trivial(2, 3, &so3_constants())?;
            let lag = "(y1_1^2 + y2_1^2)/2 + (y3_1^2 + y4_1^2 + y5_1^2)/2";
            let mut d = doc("lp_trivial", inline(alg), 1, lag, vec![0.3, -0.1], vec![vec![0.7, -0.2, 0.4, 0.1, -0.6]], std_run(5.0));
            d.observables = observables(&[("energy", lag)]);
            d.noether = Some(NoetherSpec { eta: vec![e("1"), e("0"), e("0"), e("0"), e("0")], f: e("0") });
            Scenario { name: "lp_trivial", summary: "trivial Atiyah algebroid T(R^2) + so(3)", config: d, reference: Reference::Decoupled, reference_tol: 1e-9 }
        }
        "hamel_quasi" => {
            let lag = "(y1_1^2 + y2_1^2)/2";
            let mut d = doc("hamel_quasi", inline(hamel_algebroid()?), 1, lag, vec![0.2, -0.4], vec![vec![0.6, 0.8]], std_run(3.0));
            d.observables = observables(&[("energy", lag)]);
            d.morphism = Some(MorphismSpec {
                name: Some("frame-to-coordinates".into()),
                target: AlgebroidRef::Catalog("tangent(2)".into()),
                phi: vec![e("x1"), e("x2")],
                big_phi: vec![vec![e("1"), e("0")], vec![e("0"), e("exp(x1)")]],
                target_lagrangian: e("(y1_1^2 + exp(-2*x1)*y2_1^2)/2"),
                reconstruct: None,
            });
            Scenario {
                name: "hamel_quasi",
                summary: "Hamel equations in the frame d1, exp(x1) d2",
                config: d,
                reference: Reference::CoordinateFrame,
                reference_tol: 1e-8,
            }
        }
        "holonomic" => {
            let lag = "((y1_1 + x1*y2_1)^2 + y2_1^2)/2 - x3*(x1^2 + x2^2)/2";
            let mut d = doc("holonomic", inline(leaf_algebroid()?), 1, lag, vec![1.0, 0.5, LEAF_W], vec![vec![0.5, -0.3]], std_run(5.0));
            d.observables = observables(&[("energy", "((y1_1 + x1*y2_1)^2 + y2_1^2)/2 + x3*(x1^2 + x2^2)/2"), ("leaf", "x3")]);
            Scenario {
                name: "holonomic",
                summary: "oscillator on the leaves x3 = w of an adapted frame",
                config: d,
                reference: Reference::LeafOscillator,
                reference_tol: 1e-8,
            }
        }
        other => return Err(Error::Config(format!("unknown scenario '{other}'; known: {}", SCENARIOS.join(", ")))),
    })
}

/// Fixed-step RK4 for the reference integrators, on the grid used by
/// [`crate::dynamics::integrate`].
fn rk4(f: impl Fn(&[f64]) -> Vec<f64>, y0: &[f64], run: &RunSpec) -> Vec<Vec<f64>> {
    let steps = ((run.t1 - run.t0) / run.h).round().max(1.0) as usize;
    let h = (run.t1 - run.t0) / steps as f64;
    let add = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let mut y = y0.to_vec();
    let mut out = vec![y.clone()];
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, h / 2.0, &k1));
        let k3 = f(&add(&y, h / 2.0, &k2));
        let k4 = f(&add(&y, h, &k3));
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(y.clone());
    }
    out
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn max_diff<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(Ω̇)` of the free or heavy top; `gamma` is `None` for the free body.
fn euler_rhs(omega: &[f64], gamma: Option<&[f64]>) -> Vec<f64> {
    let m: Vec<f64> = omega.iter().zip(INERTIA).map(|(w, i)| w * i).collect();
    let mut t = cross(&m, omega);
    if let Some(g) = gamma {
        let f = cross(g, &CHI);
        for j in 0..3 {
            t[j] += MGL * f[j];
        }
    }
    (0..3).map(|j| t[j] / INERTIA[j]).collect()
}

/// Largest deviation of `traj` from the scenario's reference.
pub fn reference_error(sc: &Scenario, sys: &System, traj: &Trajectory) -> Result<f64> {
    let run = sys.doc.run.expect("bundled scenarios have a run section");
    let s0 = &traj.states[0];
    Ok(match sc.reference {
        Reference::CubicPolynomial => {
            let n = traj.n;
            let mut worst = 0.0f64;
            for (t, s) in traj.times.iter().zip(&traj.states) {
                for i in 0..n {
                    let (x, v, a, j) = (s0[i], s0[n + i], s0[2 * n + i], s0[3 * n + i]);
                    let exact = x + v * t + a * t * t / 2.0 + j * t * t * t / 6.0;
                    worst = worst.max((s[i] - exact).abs());
                }
            }
            worst
        }
        Reference::EulerRigidBody => {
            let r = rk4(|w| euler_rhs(w, None), s0, &run);
            r.iter().zip(&traj.states).map(|(a, b)| max_diff(a.iter(), b.iter())).fold(0.0, f64::max)
        }
        Reference::RiemannianCubic => {
            let mut worst = 0.0f64;
            for i in 0..traj.len() {
                let p = traj.jet(i)?;
                let c = cross(p.y(1), p.y(3));
                for j in 0..3 {
                    worst = worst.max((p.y(4)[j] + c[j]).abs());
                }
            }
            worst
        }
        Reference::HeavyTop => {
            let r = rk4(
                |s| {
                    let (g, w) = (&s[..3], &s[3..]);
                    let mut d = cross(g, w).to_vec();
                    d.extend(euler_rhs(w, Some(g)));
                    d
                },
                s0,
                &run,
            );
            r.iter().zip(&traj.states).map(|(a, b)| max_diff(a.iter(), b.iter())).fold(0.0, f64::max)
        }
        Reference::Decoupled => {
            let n = traj.n;
            let mut worst = 0.0f64;
            for (t, s) in traj.times.iter().zip(&traj.states) {
                for i in 0..n {
                    worst = worst.max((s[i] - (s0[i] + s0[n + i] * t)).abs());
                }
                worst = worst.max(max_diff(s[n..].iter(), s0[n..].iter()));
            }
            worst
        }
        Reference::CoordinateFrame => {
            let lm = sys.morphism.as_ref().ok_or_else(|| Error::Config("coordinate-frame reference needs the morphism section".into()))?;
            compare_reduction(&lm.morphism, lm.target_lagrangian.clone(), s0, run.t0, run.t1, run.h)?.max_discrepancy
        }
        Reference::LeafOscillator => {
            let w = s0[2];
            let om = w.sqrt();
            let q0 = [s0[0], s0[1]];
            let qd = [s0[3] + s0[0] * s0[4], s0[4]];
            let mut worst = 0.0f64;
            for (t, s) in traj.times.iter().zip(&traj.states) {
                for i in 0..2 {
                    let exact = q0[i] * (om * t).cos() + qd[i] / om * (om * t).sin();
                    worst = worst.max((s[i] - exact).abs());
                }
                worst = worst.max((s[2] - w).abs());
            }
            worst
        }
    })
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: RunReport,
    pub trajectory: Trajectory,
}

impl Scenario {
    pub fn system(&self) -> Result<System> {
        self.config.build()
    }

    /// Simulation report plus the reference comparison.
    pub fn run(&self, settings: &CheckSettings) -> Result<ScenarioOutcome> {
        let sys = self.system()?;
        let (mut report, trajectory) = simulate(&sys, settings)?;
        report.command = "scenario".into();
        let v = Verdict::new(format!("reference: {:?}", self.reference), reference_error(self, &sys, &trajectory)?, self.reference_tol);
        report.push(v.clone());
        report.reference = Some(v);
        Ok(ScenarioOutcome { report, trajectory })
    }
}

/// Jet of order `2k` at the start of a scenario run.
pub fn initial_jet(sys: &System) -> Result<JetPoint> {
    let s0 = sys.state0.clone().ok_or_else(|| Error::Config("no initial section".into()))?;
    let ode = crate::dynamics::assemble_ode(sys.lagrangian.clone(), &s0)?;
    let top = ode.top(&s0)?;
    ode.jet(&s0, &top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{check_structure, SamplePlan};

    #[test]
    fn every_scenario_builds_and_round_trips() {
        for name in SCENARIOS {
            let sc = scenario(name).unwrap();
            let json = sc.config.to_json();
            let back = ConfigDocument::from_json(&json).unwrap();
            assert_eq!(back, sc.config, "{name}");
            let sys = back.build().unwrap();
            assert!(check_structure(&sys.algebroid, &SamplePlan::default(), 1e-10).unwrap().passed, "{name}");
        }
    }

    #[test]
    fn unknown_name_is_a_config_error() {
        assert!(matches!(scenario("double_pendulum"), Err(Error::Config(_))));
    }

    #[test]
    fn reference_integrator_conserves_energy() {
        let run = RunSpec { t0: 0.0, t1: 1.0, h: 1e-3 };
        let r = rk4(|w| euler_rhs(w, None), &[1.0, 0.3, -0.5], &run);
        let en = |w: &[f64]| w.iter().zip(INERTIA).map(|(a, i)| i * a * a).sum::<f64>();
        assert!((en(&r[0]) - en(r.last().unwrap())).abs() < 1e-12);
        assert_eq!(r.len(), 1001);
    }
}
