//! Command logic behind the CLI: checks, simulation, reduction and the
//! operator suite, each producing a [`RunReport`].

use serde::Serialize;

use crate::algebroid::{check_structure, IdentityResidual, StructureReport};
use crate::config::{CheckSettings, System};
use crate::dynamics::{assemble_ode, conservation_report, el_residual_along, integrate, ConservationReport, Regularity, Trajectory};
use crate::error::{Error, Result};
use crate::expr::SliceEnv;
use crate::forms::{operator_suite, OperatorSuiteReport};
use crate::jet::JetPoint;
use crate::morphism::{check_morphism, compare_reduction, reconstruct_solution, MorphismReport};
use crate::variational::{noether_integral, SymmetryStatus};

/// One numeric residual against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn new(check: impl Into<String>, residual: f64, tolerance: f64) -> Verdict {
        Verdict { check: check.into(), residual, tolerance, passed: residual <= tolerance }
    }

    fn from_identity(prefix: &str, r: &IdentityResidual, tol: f64) -> Verdict {
        Verdict { check: format!("{prefix}: {}", r.identity), residual: r.max_residual, tolerance: tol, passed: r.passed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NoetherSummary {
    pub symmetry: IdentityResidual,
    pub status: SymmetryStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionSummary {
    pub morphism: String,
    pub steps: usize,
    pub invariance: IdentityResidual,
    pub discrepancy: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionSummary {
    pub round_trip: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub system: String,
    pub settings: CheckSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<OperatorSuiteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noether: Option<NoetherSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservation: Option<ConservationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub el_residual: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Verdict>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: &str, system: &str, settings: CheckSettings) -> RunReport {
        RunReport {
            command: command.into(),
            system: system.into(),
            settings,
            structure: None,
            morphism: None,
            operators: Vec::new(),
            noether: None,
            regularity: None,
            conservation: None,
            el_residual: None,
            reduction: None,
            reconstruction: None,
            reference: None,
            verdicts: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, v: Verdict) {
        self.passed &= v.passed;
        self.verdicts.push(v);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width verdict table.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.command, self.system);
        for v in &self.verdicts {
            out.push_str(&format!("  {}  {:<60} {:>12.3e}  (tol {:.1e})\n", if v.passed { "PASS" } else { "FAIL" }, v.check, v.residual, v.tolerance));
        }
        if let Some(r) = &self.regularity {
            out.push_str(&format!("  regularity: rcond {:.3e}, affine deviation {:.3e}\n", r.rcond, r.affine_deviation));
        }
        if let Some(c) = &self.conservation {
            for d in &c.rows {
                out.push_str(&format!("  conserved {:<20} initial {:>+.12e}  drift {:.3e}\n", d.label, d.initial, d.max_drift));
            }
        }
        out.push_str(if self.passed { "result: pass\n" } else { "result: FAIL\n" });
        out
    }
}

fn structure_verdicts(report: &mut RunReport, s: &StructureReport, tol: f64) {
    for r in [&s.antisymmetry, &s.compatibility, &s.jacobi] {
        report.push(Verdict::from_identity("structure", r, tol));
    }
}

fn morphism_verdicts(report: &mut RunReport, m: &MorphismReport, tol: f64) {
    for r in [&m.admissibility, &m.bracket] {
        report.push(Verdict::from_identity("morphism", r, tol));
    }
}

/// `|L − L'∘Φ^k|` at sample jets.
fn invariance(sys: &System, settings: &CheckSettings) -> Result<Option<IdentityResidual>> {
    let Some(lm) = &sys.morphism else { return Ok(None) };
    let alg = &sys.algebroid;
    let k = sys.lagrangian.order();
    let plan = settings.plan();
    let mut rng = plan.rng();
    let mut res = IdentityResidual::new("L = L'∘Φ");
    for _ in 0..plan.count.max(1) {
        let p = JetPoint::new(alg.n(), alg.m(), k, plan.draw(&mut rng, JetPoint::dim(alg.n(), alg.m(), k)))?;
        let here = sys.lagrangian.value(&p)?;
        let there = lm.target_lagrangian.value(&lm.morphism.push_jet(&p)?)?;
        res.record(here - there, || format!("{:?}", p.coords()));
    }
    res.finish(settings.invariance_tol);
    Ok(Some(res))
}

/// Structure, morphism, operator identities at the Lagrangian's order,
/// symmetry of the Noether data and regularity at the initial state.
pub fn check(sys: &System, settings: &CheckSettings) -> Result<RunReport> {
    let plan = settings.plan();
    let mut report = RunReport::new("check", &sys.doc.name, *settings);
    let s = check_structure(&sys.algebroid, &plan, settings.structure_tol)?;
    structure_verdicts(&mut report, &s, settings.structure_tol);
    report.structure = Some(s);
    if let Some(lm) = &sys.morphism {
        let m = check_morphism(&lm.morphism, &plan, settings.morphism_tol)?;
        morphism_verdicts(&mut report, &m, settings.morphism_tol);
        report.morphism = Some(m);
        let t = check_structure(lm.morphism.target(), &plan, settings.structure_tol)?;
        for r in [&t.antisymmetry, &t.compatibility, &t.jacobi] {
            report.push(Verdict::from_identity("target structure", r, settings.structure_tol));
        }
        if let Some(inv) = invariance(sys, settings)? {
            report.push(Verdict::from_identity("reduction", &inv, settings.invariance_tol));
        }
    }
    let ops = operator_suite(&sys.algebroid, sys.lagrangian.order(), &plan, settings.operator_tol)?;
    for r in &ops.identities {
        report.push(Verdict::from_identity(&format!("operators k={}", ops.order), r, settings.operator_tol));
    }
    report.operators.push(ops);
    if let Some(nd) = &sys.noether {
        let ni = noether_integral(&sys.lagrangian, &nd.eta, &nd.f, &plan, settings.symmetry_tol)?;
        report.push(Verdict::from_identity("noether", &ni.symmetry, settings.symmetry_tol));
        report.noether = Some(NoetherSummary { symmetry: ni.symmetry, status: ni.status });
    }
    if let Some(s0) = &sys.state0 {
        match assemble_ode(sys.lagrangian.clone(), s0) {
            Ok(ode) => {
                report.push(Verdict::new("regularity: 1/rcond at initial state", 1.0 / ode.regularity.rcond, 1.0 / crate::dynamics::RCOND_THRESHOLD));
                report.regularity = Some(ode.regularity);
            }
            Err(Error::Singular { rcond, threshold, .. }) => {
                report.push(Verdict::new("regularity: 1/rcond at initial state", 1.0 / rcond, 1.0 / threshold));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

fn need_run(sys: &System) -> Result<(Vec<f64>, crate::config::RunSpec)> {
    let s0 = sys.state0.clone().ok_or_else(|| Error::Config("an initial section is required".into()))?;
    let run = sys.doc.run.ok_or_else(|| Error::Config("a run section is required".into()))?;
    Ok((s0, run))
}

/// Integrates, then reports the EL residual along the trajectory and the
/// drift of every observable, including the Noether integral if given.
pub fn simulate(sys: &System, settings: &CheckSettings) -> Result<(RunReport, Trajectory)> {
    let (s0, run) = need_run(sys)?;
    let mut report = RunReport::new("simulate", &sys.doc.name, *settings);
    let ode = assemble_ode(sys.lagrangian.clone(), &s0)?;
    report.regularity = Some(ode.regularity.clone());
    let traj = integrate(&ode, &s0, run.t0, run.t1, run.h)?;
    let el = Verdict::new("max |δL| along trajectory", el_residual_along(&sys.lagrangian, &traj)?, settings.el_residual_tol);
    report.push(el.clone());
    report.el_residual = Some(el);
    let mut observables = sys.observables.clone();
    if let Some(nd) = &sys.noether {
        let ni = noether_integral(&sys.lagrangian, &nd.eta, &nd.f, &settings.plan(), settings.symmetry_tol)?;
        if ni.status == SymmetryStatus::Verified {
            observables.push(("noether".into(), ni.g));
        }
        report.noether = Some(NoetherSummary { symmetry: ni.symmetry, status: ni.status });
    }
    if !observables.is_empty() {
        let c = conservation_report(&sys.lagrangian, &traj, &observables, settings.conservation_tol)?;
        for d in &c.rows {
            report.push(Verdict::new(format!("drift of {}", d.label), d.max_drift, d.tolerance));
        }
        report.conservation = Some(c);
    }
    Ok((report, traj))
}

/// Checks the morphism, integrates both systems and compares; with a
/// `reconstruct` section, also rebuilds the source curve from the reduced
/// solution.
pub fn reduce(sys: &System, settings: &CheckSettings) -> Result<RunReport> {
    let lm = sys.morphism.as_ref().ok_or_else(|| Error::Config("a morphism section is required".into()))?;
    let (s0, run) = need_run(sys)?;
    let plan = settings.plan();
    let mut report = RunReport::new("reduce", &sys.doc.name, *settings);
    let m = check_morphism(&lm.morphism, &plan, settings.morphism_tol)?;
    morphism_verdicts(&mut report, &m, settings.morphism_tol);
    let ok = m.passed;
    report.morphism = Some(m);
    if !ok {
        return Ok(report);
    }
    let inv = invariance(sys, settings)?.expect("morphism present");
    report.push(Verdict::from_identity("reduction", &inv, settings.invariance_tol));
    let cmp = compare_reduction(&lm.morphism, lm.target_lagrangian.clone(), &s0, run.t0, run.t1, run.h)?;
    let disc = Verdict::new("pushed source vs target trajectory", cmp.max_discrepancy, settings.reduction_tol);
    report.push(disc.clone());
    report.reduction = Some(ReductionSummary { morphism: lm.morphism.name().into(), steps: cmp.target.len() - 1, invariance: inv, discrepancy: disc });
    if lm.reconstruct {
        let n = sys.algebroid.n();
        let target0 = cmp.target.states[0].clone();
        let ode = assemble_ode(lm.target_lagrangian.clone(), &target0)?;
        let rec = reconstruct_solution(&lm.morphism, &ode, &target0, &s0[..n], run.t0, run.t1, run.h)?;
        let m_src = sys.algebroid.m();
        let mut err = 0.0f64;
        for ((x, a), s) in rec.x.iter().zip(&rec.a).zip(&cmp.source.states) {
            for (u, v) in x.iter().chain(a).zip(s[..n].iter().chain(&s[n..n + m_src])) {
                err = err.max((u - v).abs());
            }
        }
        let round_trip = Verdict::new("reconstructed vs source (x, y_1)", err, settings.reduction_tol);
        report.push(round_trip.clone());
        let closed_form = match &lm.closed_form {
            None => None,
            Some(exprs) => {
                let mut worst = 0.0f64;
                for (t, x) in rec.reduced.times.iter().zip(&rec.x) {
                    let pairs = [("t", *t)];
                    let env = SliceEnv::new((), &pairs);
                    for (e, v) in exprs.iter().zip(x) {
                        worst = worst.max((e.eval(&env)? - v).abs());
                    }
                }
                let v = Verdict::new("reconstructed base vs closed form", worst, settings.reconstruction_tol);
                report.push(v.clone());
                Some(v)
            }
        };
        report.reconstruction = Some(ReconstructionSummary { round_trip, closed_form });
    }
    Ok(report)
}

/// Operator identity suite on the system's algebroid for `k = 1..=max_order`.
pub fn operators(sys: &System, settings: &CheckSettings, max_order: usize) -> Result<RunReport> {
    let mut report = RunReport::new("operators", &sys.doc.name, *settings);
    operators_on(&mut report, &sys.algebroid, settings, max_order)?;
    Ok(report)
}

pub fn operators_on(report: &mut RunReport, alg: &crate::algebroid::LieAlgebroid, settings: &CheckSettings, max_order: usize) -> Result<()> {
    for k in 1..=max_order {
        let r = operator_suite(alg, k, &settings.plan(), settings.operator_tol)?;
        for id in &r.identities {
            report.push(Verdict::from_identity(&format!("{} k={k}", r.algebroid), id, settings.operator_tol));
        }
        report.operators.push(r);
    }
    Ok(())
}
