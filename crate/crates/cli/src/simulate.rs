//! `sim` and `compare`.

use std::io::Write;
use std::path::{Path, PathBuf};

use gdtraj::gd::check_contractivity;
use gdtraj::heavyball::{augmented_closed_loop, check_hb_contractivity_weighted};
use gdtraj::linalg::{inverse_spd, spectral_radius};
use gdtraj::lqr::{closed_loop_cost, lyapunov_sum, LqrWeights};
use gdtraj::sim::{descent_angles, level_sets, level_sets_csv, level_sets_slice, simulate, Policy};
use gdtraj::{Matrix, SystemModel};

use crate::files::{read_json, to_json, write_text, DesignFile, ProblemFile};
use crate::{emit, CliError};

const DEFAULT_STEPS: usize = 50;
const LEVEL_RESOLUTION: usize = 256;

pub(crate) struct SimArgs {
    pub steps: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub angles: bool,
    pub levels: Option<Vec<f64>>,
}

impl DesignFile {
    fn policy(&self) -> Policy {
        match self {
            DesignFile::Gd(e) => Policy::Static { k: e.k.clone() },
            DesignFile::Lqr(e) => Policy::Static { k: e.k.clone() },
            DesignFile::HeavyBall(e) => Policy::TwoStep {
                k1: e.k1.clone(),
                k2: e.k2.clone(),
            },
        }
    }

    fn value_matrix(&self) -> &Matrix {
        match self {
            DesignFile::Gd(e) => &e.p,
            DesignFile::Lqr(e) => &e.p,
            DesignFile::HeavyBall(e) => &e.p,
        }
    }
}

fn initial_state(flag: Option<Vec<f64>>, problem: &ProblemFile) -> Result<Vec<f64>, CliError> {
    let x0 = flag
        .or_else(|| problem.sim.as_ref().and_then(|s| s.x0.clone()))
        .ok_or_else(|| CliError::Usage("no initial state: pass --x0 or set sim.x0".into()))?;
    if x0.len() != problem.system.states() {
        return Err(CliError::Usage(format!("x0 must have length {}", problem.system.states())));
    }
    Ok(x0)
}

fn step_count(flag: Option<usize>, problem: &ProblemFile) -> Result<usize, CliError> {
    let steps = flag
        .or_else(|| problem.sim.as_ref().and_then(|s| s.steps))
        .unwrap_or(DEFAULT_STEPS);
    if steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    Ok(steps)
}

/// `traj.csv` → `traj.levels.csv`.
fn levels_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.levels.csv"))
}

pub(crate) fn sim(
    design_path: &Path,
    problem_path: &Path,
    output: &Path,
    args: SimArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let design: DesignFile = read_json(design_path)?;
    let problem: ProblemFile = read_json(problem_path)?;
    let x0 = initial_state(args.x0, &problem)?;
    let steps = step_count(args.steps, &problem)?;
    let p = design.value_matrix();
    let traj = simulate(&problem.system, &design.policy(), &x0, steps, Some(p))?;
    let json = output.extension().is_some_and(|e| e == "json");
    let text = if json {
        to_json(&traj)
    } else {
        let angles = if args.angles { Some(descent_angles(&traj, p)?) } else { None };
        traj.to_csv(angles.as_deref())
    };
    write_text(output, &text)?;
    let last = traj.states.last().expect("at least one state");
    let mut summary = format!(
        "simulated {steps} steps from {x0:?}; final state {last:?}\nwrote {}\n",
        output.display()
    );

    let levels = args.levels.or_else(|| problem.sim.as_ref().and_then(|s| s.levels.clone()));
    if let Some(levels) = levels {
        let curves = if p.rows() == 2 {
            level_sets(p, &levels, LEVEL_RESOLUTION)?
        } else {
            level_sets_slice(p, (0, 1), &levels, LEVEL_RESOLUTION)?
        };
        let path = levels_path(output);
        write_text(&path, &level_sets_csv(&levels, &curves))?;
        summary.push_str(&format!("wrote {}\n", path.display()));
    }
    emit(out, &summary)
}

struct Metrics {
    cost: f64,
    rho: f64,
    margin: f64,
    max_angle: f64,
}

fn metrics(
    system: &SystemModel,
    design: &DesignFile,
    weights: &LqrWeights,
    x0: &[f64],
    steps: usize,
) -> Result<Metrics, CliError> {
    let (cost, rho, margin) = match design {
        DesignFile::Gd(e) => {
            let y = match &e.y {
                Some(y) => y.clone(),
                None => inverse_spd(&e.p)?,
            };
            (
                closed_loop_cost(system, &e.k, weights, x0)?,
                spectral_radius(&system.closed_loop(&e.k)?)?,
                check_contractivity(&y, &e.gamma, e.lambda)?.margin,
            )
        }
        DesignFile::Lqr(e) => (
            closed_loop_cost(system, &e.k, weights, x0)?,
            spectral_radius(&system.closed_loop(&e.k)?)?,
            check_contractivity(&inverse_spd(&e.p)?, &e.gamma, 1.0)?.margin,
        ),
        DesignFile::HeavyBall(e) => {
            let aug = augmented_closed_loop(system, &e.k1, &e.k2)?;
            let rho = spectral_radius(&aug)?;
            if rho >= 1.0 {
                return Err(CliError::Usage(format!("two-step loop is not stable (spectral radius {rho:.6})")));
            }
            let n = system.states();
            let mut state_weight = Matrix::zeros(2 * n, 2 * n);
            state_weight.set_block(0, 0, weights.q());
            let gains = e.k1.hstack(&e.k2);
            let stage = &state_weight + &(&(&gains.transpose() * weights.r()) * &gains);
            let s = lyapunov_sum(&aug, &stage)?;
            let start: Vec<f64> = x0.iter().chain(x0).copied().collect();
            let y = match &e.y {
                Some(y) => y.clone(),
                None => inverse_spd(&e.p)?,
            };
            let w = e.w.clone().unwrap_or_else(|| &e.delta * &y);
            let margin = check_hb_contractivity_weighted(&y, &e.gamma, &w, e.lambda, e.delay_weight)?.lmi_margin;
            (s.quad_form(&start), rho, margin)
        }
    };
    let traj = simulate(system, &design.policy(), x0, steps, None)?;
    let max_angle = descent_angles(&traj, design.value_matrix())?
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    Ok(Metrics {
        cost,
        rho,
        margin,
        max_angle,
    })
}

fn num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

pub(crate) fn compare(
    first: &Path,
    second: &Path,
    problem_path: &Path,
    steps: Option<usize>,
    x0: Option<Vec<f64>>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let a: DesignFile = read_json(first)?;
    let b: DesignFile = read_json(second)?;
    let problem: ProblemFile = read_json(problem_path)?;
    let weights = problem
        .lqr
        .clone()
        .ok_or_else(|| CliError::Usage(format!("{}: missing `lqr` weights", problem_path.display())))?;
    let x0 = initial_state(x0, &problem)?;
    let steps = step_count(steps, &problem)?;
    let ma = metrics(&problem.system, &a, &weights, &x0, steps)?;
    let mb = metrics(&problem.system, &b, &weights, &x0, steps)?;
    let rows = [
        ("cost J", ma.cost, mb.cost),
        ("spectral radius", ma.rho, mb.rho),
        ("LMI margin", ma.margin, mb.margin),
        ("max descent angle", ma.max_angle, mb.max_angle),
    ];
    let mut s = format!(
        "first: {}\nsecond: {}\n{:<18}  {:>16}  {:>16}  {:>16}\n",
        first.display(),
        second.display(),
        "metric",
        "first",
        "second",
        "delta"
    );
    for (name, x, y) in rows {
        s.push_str(&format!("{name:<18}  {:>16}  {:>16}  {:>16}\n", num(x), num(y), num(y - x)));
    }
    emit(out, &s)
}
