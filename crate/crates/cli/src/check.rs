//! `check`: recomputes the invariants of a design file.

use std::io::Write;
use std::path::Path;

use gdtraj::gd::{self, GammaSpec};
use gdtraj::heavyball::{self, augmented_closed_loop, augmented_matrix};
use gdtraj::linalg::{inverse_spd, min_sym_eigenvalue, spectral_radius};
use gdtraj::lqr::{self, LqrWeights};
use gdtraj::sdp::check_solution;
use gdtraj::{Matrix, SystemModel};

use crate::files::{read_json, DesignFile, GdEntry, HbEntry, LqrEntry, ProblemFile};
use crate::{emit, CliError};

struct Row {
    name: String,
    value: f64,
    limit: &'static str,
    pass: bool,
}

#[derive(Default)]
struct Report {
    rows: Vec<Row>,
    notes: Vec<String>,
}

impl Report {
    fn at_most(&mut self, name: &str, value: f64, limit: f64, label: &'static str) {
        self.push(name, value, label, value <= limit);
    }

    fn at_least(&mut self, name: &str, value: f64, limit: f64, label: &'static str) {
        self.push(name, value, label, value >= limit);
    }

    fn push(&mut self, name: &str, value: f64, limit: &'static str, pass: bool) {
        self.rows.push(Row {
            name: name.to_string(),
            value,
            limit,
            pass,
        });
    }

    fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(5).max(5);
        let mut s = format!("{:<width$}  {:>12}  {:<10}  status\n", "check", "value", "limit");
        for r in &self.rows {
            let pad = width - r.name.chars().count();
            s.push_str(&format!(
                "{}{}  {:>12.4e}  {:<10}  {}\n",
                r.name,
                " ".repeat(pad),
                r.value,
                r.limit,
                if r.pass { "ok" } else { "FAIL" }
            ));
        }
        for n in &self.notes {
            s.push_str(n);
            s.push('\n');
        }
        s
    }

    fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

pub(crate) fn check(design_path: &Path, problem_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let design: DesignFile = read_json(design_path)?;
    let problem: ProblemFile = read_json(problem_path)?;
    let system = &problem.system;
    let mut report = Report::default();
    let title = match &design {
        DesignFile::Gd(entry) => {
            check_gd(system, entry, &mut report)?;
            "gd"
        }
        DesignFile::HeavyBall(entry) => {
            check_hb(system, entry, &mut report)?;
            "heavy-ball"
        }
        DesignFile::Lqr(entry) => {
            check_lqr(system, entry, &mut report)?;
            "lqr"
        }
    };
    let failures = report.failures();
    emit(out, &format!("{title} design {}\n{}", design_path.display(), report.render()))?;
    if failures > 0 {
        return Err(CliError::CheckFailed(format!(
            "{failures} of {} checks failed",
            report.rows.len()
        )));
    }
    Ok(())
}

fn value_matrices(p: &Matrix, y: Option<&Matrix>, report: &mut Report) -> Result<Matrix, CliError> {
    let p_min = min_sym_eigenvalue(p);
    report.push("P positive definite", p_min, "> 0", p_min > 0.0 && p.asymmetry() <= p.default_sym_tol());
    if p_min <= 0.0 {
        return Err(CliError::CheckFailed("P is not positive definite".into()));
    }
    match y {
        Some(y) => {
            let n = p.rows();
            report.at_most("Y P = I", (&(y * p) - &Matrix::identity(n)).max_abs(), 1e-8, "<= 1e-8");
            Ok(y.clone())
        }
        None => Ok(inverse_spd(p)?),
    }
}

fn check_gd(system: &SystemModel, e: &GdEntry, report: &mut Report) -> Result<(), CliError> {
    let n = system.states();
    let y = value_matrices(&e.p, e.y.as_ref(), report)?;
    let f = e.f.clone().unwrap_or_else(|| &e.k * &y);
    if e.gamma.shape() != (n, n) || e.k.shape() != (system.inputs(), n) || y.shape() != (n, n) {
        return Err(CliError::Usage("design dimensions do not match the system".into()));
    }
    let eq = &(&(system.a() * &y) + &(system.b() * &f)) - &(&y - &e.gamma.scale(2.0));
    report.at_most("A Y + B F = Y - 2 Gamma", eq.max_abs(), 1e-7, "<= 1e-7");
    let acl = system.closed_loop(&e.k)?;
    let step = &Matrix::identity(n) - &(&e.gamma * &e.p).scale(2.0);
    report.at_most("A + B K = I - 2 Gamma P", (&acl - &step).max_abs(), 1e-6, "<= 1e-6");

    let (lmi, layout) = gd::synthesis_problem(system, e.lambda, &GammaSpec::free(), false);
    let solution = check_solution(&lmi, &layout.encode(&y, &f, &e.gamma))?;
    for block in &solution.blocks {
        report.at_least(&format!("LMI block {}", block.name), block.min_eigenvalue, 0.0, ">= 0");
    }
    let rho = spectral_radius(&acl)?;
    report.push("spectral radius of A + B K", rho, "< 1", rho < 1.0);

    if let Ok(c) = gd::collinearity(system, &e.k, &e.p) {
        report.notes.push(format!(
            "collinearity: (I - (A + B K)) / P entrywise ratios {:?}, mean {:.6}, relative spread {:.3e} ({})",
            c.ratios.iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>(),
            c.mean_ratio,
            c.relative_spread,
            if c.relative_spread <= 1e-2 { "collinear" } else { "not collinear" }
        ));
        if let Some(g) = scalar_value(&e.gamma) {
            if c.relative_spread <= 1e-2 {
                let factor = c.implied_gamma / g;
                if (factor - 1.0).abs() > 1e-2 {
                    report.notes.push(format!(
                        "scale-inconsistent: Gamma = {g} I, but I - (A + B K) = 2 gamma' P with gamma' = {:.6} \
                         (factor {factor:.2}); P and K are consistent with gamma'",
                        c.implied_gamma
                    ));
                } else {
                    report.notes.push(format!("scale-consistent: Gamma = {g} I matches gamma' = {:.6}", c.implied_gamma));
                }
            }
        }
    }
    Ok(())
}

/// γ when `m = γ I`.
fn scalar_value(m: &Matrix) -> Option<f64> {
    let g = m[(0, 0)];
    let scaled = &Matrix::identity(m.rows()).scale(g) - m;
    (scaled.max_abs() <= 1e-12 * g.abs().max(1e-300)).then_some(g)
}

fn check_hb(system: &SystemModel, e: &HbEntry, report: &mut Report) -> Result<(), CliError> {
    let n = system.states();
    let y = value_matrices(&e.p, e.y.as_ref(), report)?;
    let f1 = e.f1.clone().unwrap_or_else(|| &e.k1 * &y);
    let f2 = e.f2.clone().unwrap_or_else(|| &e.k2 * &y);
    let w = e.w.clone().unwrap_or_else(|| &e.delta * &y);
    if e.gamma.shape() != (n, n) || e.delta.shape() != (n, n) || e.k1.shape() != (system.inputs(), n) {
        return Err(CliError::Usage("design dimensions do not match the system".into()));
    }
    let m = &(&(&y - &e.gamma.scale(2.0)) + &w) - &(&(system.a() * &y) + &(system.b() * &f1));
    report.at_most("A Y + B F1 = Y - 2 Gamma + W", m.max_abs(), 1e-7, "<= 1e-7");
    report.at_most("B F2 + W = 0", (&(system.b() * &f2) + &w).max_abs(), 1e-7, "<= 1e-7");
    let aug = augmented_closed_loop(system, &e.k1, &e.k2)?;
    let grad = augmented_matrix(&e.gamma, &e.p, &e.delta)?;
    report.at_most("augmented forms agree", (&aug - &grad).max_abs(), 1e-6, "<= 1e-6");
    let c = heavyball::check_hb_contractivity_weighted(&y, &e.gamma, &w, e.lambda, e.delay_weight)?;
    report.at_least("augmented LMI", c.lmi_margin, -1e-10, ">= -1e-10");
    report.at_least("direct contraction of V-bar", c.direct_margin, -1e-10, ">= -1e-10");
    let rho = spectral_radius(&aug)?;
    if e.lambda < 1.0 {
        report.push("augmented spectral radius", rho, "< 1", rho < 1.0);
    } else {
        report.push("augmented spectral radius", rho, "<= 1", rho <= 1.0);
    }
    report.notes.push(format!("delay weight mu = {}, lambda = {}", e.delay_weight, e.lambda));
    Ok(())
}

fn check_lqr(system: &SystemModel, e: &LqrEntry, report: &mut Report) -> Result<(), CliError> {
    let n = system.states();
    let weights = LqrWeights::new(e.q.clone(), e.r.clone())?;
    value_matrices(&e.p, None, report)?;
    let residual = lqr::riccati_residual(system, &weights, &e.p, &e.k)?;
    report.at_most("Riccati residual / |P|", residual / e.p.max_abs(), 1e-8, "<= 1e-8");
    let k = lqr::lqr_gain(system, &e.p, weights.r())?;
    report.at_most("K_bar = optimal gain of P_bar", (&k - &e.k).max_abs(), 1e-8, "<= 1e-8");
    let acl = system.closed_loop(&e.k)?;
    let back = &Matrix::identity(n) - &(&e.gamma * &e.p).scale(2.0);
    report.at_most("I - 2 Gamma_bar P_bar = A + B K_bar", (&back - &acl).max_abs(), 1e-9, "<= 1e-9");
    let rho = spectral_radius(&acl)?;
    report.push("spectral radius of A + B K_bar", rho, "< 1", rho < 1.0);
    if let (Some(x0), Some(cost)) = (&e.x0, e.cost) {
        let j = lqr::closed_loop_cost(system, &e.k, &weights, x0)?;
        report.at_most("cost = x0' P_bar x0 (relative)", (j - cost).abs() / j.abs().max(1e-300), 1e-8, "<= 1e-8");
    }
    Ok(())
}
