//! `synth`, `lqr` and `hb`.

use std::io::Write;
use std::path::Path;

use gdtraj::gd::{self, GammaSpec};
use gdtraj::heavyball::{self, HbOptions, DEFAULT_HB_LAMBDA};
use gdtraj::linalg::spectral_radius;
use gdtraj::lqr::{self, LqrWeights};
use gdtraj::{Error, SystemModel};

use crate::args::Shaping;
use crate::files::{
    read_json, read_matrix, to_json, write_text, DesignFile, GdEntry, HbEntry, LqrEntry, ModeName,
    ProblemFile, Provenance,
};
use crate::{emit, fmt_matrix, CliError};

pub(crate) fn check_lambda(lambda: f64) -> Result<(), CliError> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("λ = {lambda} is outside (0, 1]")))
    }
}

fn require_stabilizable(system: &SystemModel) -> Result<(), CliError> {
    if system.is_stabilizable() {
        Ok(())
    } else {
        Err(CliError::Infeasible("(A, B) is not stabilizable".into()))
    }
}

fn resolve(problem: &ProblemFile, shaping: &Shaping, default_lambda: f64) -> Result<(f64, GammaSpec), CliError> {
    let lambda = shaping.lambda.or(problem.spec.lambda).unwrap_or(default_lambda);
    check_lambda(lambda)?;
    let mut gamma = problem.spec.gamma.clone();
    if let Some(path) = &shaping.gamma_bound {
        gamma.bound = Some(read_matrix(path)?);
        gamma.mode = ModeName::Bounded;
    }
    if let Some(path) = &shaping.gamma_value {
        gamma.value = Some(read_matrix(path)?);
        gamma.mode = ModeName::Fixed;
    }
    if let Some(mode) = shaping.gamma_mode {
        gamma.mode = mode;
    }
    let spec = gamma.to_spec()?;
    spec.validate(problem.system.states())?;
    Ok((lambda, spec))
}

pub(crate) fn synth(problem_path: &Path, output: &Path, shaping: &Shaping, out: &mut dyn Write) -> Result<(), CliError> {
    let problem: ProblemFile = read_json(problem_path)?;
    let (lambda, spec) = resolve(&problem, shaping, 1.0)?;
    let system = &problem.system;
    require_stabilizable(system)?;
    let design = gd::synthesize_gd(system, lambda, &spec)?;
    let rho = design.spectral_radius_with(system)?;
    let provenance = Provenance::new()
        .margin("lmi", design.margin)
        .margin("stability", 1.0 - rho)
        .residual("equality", design.equality_residual(system))
        .residual("closed-loop", design.closed_loop_residual(system)?);
    write_text(output, &to_json(&DesignFile::Gd(GdEntry::from_design(&design, provenance))))?;
    emit(
        out,
        &format!(
            "gd design: K = {}, spectral radius {rho:.6}, margin {:.3e}\nwrote {}\n",
            fmt_matrix(&design.k),
            design.margin,
            output.display()
        ),
    )
}

pub(crate) fn lqr(problem_path: &Path, output: &Path, x0: Option<Vec<f64>>, out: &mut dyn Write) -> Result<(), CliError> {
    let problem: ProblemFile = read_json(problem_path)?;
    let system = &problem.system;
    let weights: LqrWeights = problem
        .lqr
        .clone()
        .ok_or_else(|| CliError::Usage(format!("{}: missing `lqr` weights", problem_path.display())))?;
    let x0 = x0.or_else(|| problem.sim.as_ref().and_then(|s| s.x0.clone()));
    if let Some(x) = &x0 {
        if x.len() != system.states() {
            return Err(CliError::Usage(format!("x0 must have length {}", system.states())));
        }
    }
    require_stabilizable(system)?;
    let design = lqr::design_lqr(system, &weights)?;
    let acl = system.closed_loop(&design.k)?;
    let n = system.states();
    let back = &gdtraj::Matrix::identity(n) - &(&design.gamma * &design.p).scale(2.0);
    let provenance = Provenance::new()
        .margin("stability", 1.0 - spectral_radius(&acl)?)
        .residual("riccati", design.residual)
        .residual("gamma-bar", (&back - &acl).max_abs());
    let entry = LqrEntry::from_design(&design, x0, provenance);
    let mut summary = format!(
        "lqr design: K_bar = {}, P_bar = {}, {} iterations\n",
        fmt_matrix(&design.k),
        fmt_matrix(&design.p),
        design.iterations
    );
    if let Some(cost) = entry.cost {
        summary.push_str(&format!("optimal cost from x0: {cost:.6}\n"));
    }
    write_text(output, &to_json(&DesignFile::Lqr(entry)))?;
    summary.push_str(&format!("wrote {}\n", output.display()));
    emit(out, &summary)
}

pub(crate) fn hb(
    problem_path: &Path,
    output: &Path,
    shaping: &Shaping,
    delay_weight: Option<f64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let problem: ProblemFile = read_json(problem_path)?;
    let (lambda, spec) = resolve(&problem, shaping, DEFAULT_HB_LAMBDA)?;
    let mu = delay_weight.or(problem.spec.delay_weight).unwrap_or(1.0);
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(CliError::Usage(format!("delay weight {mu} must be positive")));
    }
    let system = &problem.system;
    require_stabilizable(system)?;
    let options = HbOptions {
        delay_weight: mu,
        ..HbOptions::default()
    };
    let design = match heavyball::synthesize_hb_with(system, lambda, &spec, options) {
        Ok(d) => d,
        Err(e @ Error::Infeasible { .. }) if mu >= lambda => {
            return Err(CliError::Infeasible(format!(
                "{e}\nhint: with delay weight μ = {mu} ≥ λ = {lambda} the augmented value cannot contract \
                 (its delayed term alone does not shrink); pass --delay-weight below λ, e.g. 0.5"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let rho = design.spectral_radius(system)?;
    let provenance = Provenance::new()
        .margin("lmi", design.margin)
        .margin("stability", 1.0 - rho)
        .residual("momentum-step", design.momentum_step_residual(system))
        .residual("momentum", design.momentum_residual(system))
        .residual("augmented", design.augmented_residual(system)?);
    write_text(output, &to_json(&DesignFile::HeavyBall(HbEntry::from_design(&design, provenance))))?;
    emit(
        out,
        &format!(
            "heavy-ball design: K1 = {}, K2 = {}, augmented spectral radius {rho:.6}, margin {:.3e}\nwrote {}\n",
            fmt_matrix(&design.k1),
            fmt_matrix(&design.k2),
            design.margin,
            output.display()
        ),
    )
}
