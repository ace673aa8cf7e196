//! Runs a configured sweep. Each `(x, seed)` cell draws its own channel from
//! the trial seed, so cells are independent and can run in any order; rows are
//! sorted before output.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use ris_secrecy::channel::generate_channels;
use ris_secrecy::cpdm::solve_cpdm;
use ris_secrecy::pgm::{default_init, random_init, solve};
use ris_secrecy::ris::project_theta;
use ris_secrecy::rng::{stream, trial_seed, Purpose};
use ris_secrecy::secrecy::secrecy_rate;
use ris_secrecy::{
    ChannelSet, CpdmOptions, PgmOptions, RisParams, RisState, StepRule, SystemConfig, Termination,
};

use crate::config::{AdaptiveTag, ExperimentConfig, Family, Method, StepVariant};
use crate::table::{emit_csv, Missing, ResultTable};
use crate::{plot, BenchError};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    /// Deterministic metrics.
    pub results: ResultTable,
    /// Wall-clock seconds, median over the timing repeats.
    pub timings: ResultTable,
}

/// Everything a cell needs apart from the seed.
struct Plan {
    x: f64,
    system: SystemConfig,
    practical: RisParams,
    ideal: RisParams,
}

struct Cell<'a> {
    ch: ChannelSet,
    sys: SystemConfig,
    plan: &'a Plan,
    pgm: PgmOptions,
    cpdm: CpdmOptions,
}

struct Outcome {
    csec: f64,
    iterations: usize,
    evals: usize,
    converged: bool,
    trace: Vec<f64>,
}

#[derive(Default)]
struct CellRows {
    results: ResultTable,
    timings: ResultTable,
}

fn plan_for(cfg: &ExperimentConfig, x: f64) -> Result<Plan, BenchError> {
    let mut sys = cfg.system.clone();
    let mut r = cfg.ris.resistance;
    match cfg.family {
        Family::RateVsPower => sys.power_dbm = x,
        Family::RateVsR => r = x,
        Family::ConvergenceTrace => {}
        _ => sys.m = x as usize,
    }
    let practical = cfg.ris.params_at(r)?;
    let ideal = cfg.ris.params_at(0.0)?;
    Ok(Plan {
        x,
        system: sys.to_config(0),
        practical,
        ideal,
    })
}

/// Runs every cell of the sweep. Configuration errors abort the run; numeric
/// failures inside a cell are recorded as missing values.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    cfg.validate()?;
    let plans: Vec<Plan> = if cfg.family == Family::ConvergenceTrace {
        vec![plan_for(cfg, 0.0)?]
    } else {
        cfg.sweep.iter().map(|&x| plan_for(cfg, x)).collect::<Result<_, _>>()?
    };
    for p in &plans {
        cfg.pgm.validate(&p.practical)?;
        cfg.cpdm.validate(&p.practical)?;
        p.system.validate()?;
    }
    let jobs: Vec<(usize, u64)> = (0..plans.len())
        .flat_map(|i| (0..cfg.n_seeds as u64).map(move |s| (i, s)))
        .collect();
    let cells: Vec<CellRows> = jobs
        .par_iter()
        .map(|&(i, s)| run_cell(cfg, &plans[i], s))
        .collect::<Result<_, _>>()?;
    let mut out = RunOutput::default();
    for c in cells {
        out.results.rows.extend(c.results.rows);
        out.results.missing.extend(c.results.missing);
        out.timings.rows.extend(c.timings.rows);
    }
    out.results.finalize();
    out.timings.finalize();
    Ok(out)
}

fn run_cell(cfg: &ExperimentConfig, plan: &Plan, index: u64) -> Result<CellRows, BenchError> {
    let seed = trial_seed(cfg.master_seed, index);
    let sys = SystemConfig { seed, ..plan.system };
    let ch = generate_channels(&sys, &cfg.geometry, &cfg.path_loss)?;
    let cell = Cell {
        ch,
        sys,
        plan,
        pgm: cfg.pgm,
        cpdm: cfg.cpdm,
    };
    let family = cfg.family.name();
    let mut rows = CellRows::default();
    let record = |rows: &mut CellRows, label: &str, metrics: &[&str], out: &Result<Outcome, String>| match out {
        Ok(o) => {
            for &m in metrics {
                let v = match m {
                    "csec" => o.csec,
                    "outer_iterations" => o.iterations as f64,
                    "objective_evals" => o.evals as f64,
                    "converged" => o.converged as u8 as f64,
                    _ => unreachable!("unknown metric {m}"),
                };
                rows.results.push(family, plan.x, label, index, m, v);
            }
        }
        Err(reason) => {
            for &m in metrics {
                rows.results.push(family, plan.x, label, index, m, f64::NAN);
            }
            rows.results.missing.push(Missing {
                family: family.into(),
                x: plan.x,
                method: label.into(),
                seed: index,
                reason: reason.clone(),
            });
        }
    };

    match cfg.family {
        Family::RateVsPower | Family::RateVsM | Family::RateVsR | Family::CpdmVsM => {
            for &m in &cfg.methods {
                let out = cell.run(m, &cell.pgm);
                record(&mut rows, m.name(), &["csec"], &out);
            }
        }
        Family::RuntimeVsM | Family::CpdmRuntime => {
            for &m in &cfg.methods {
                let (out, wall) = timed(cfg.timing_repeats, || cell.run(m, &cell.pgm));
                record(&mut rows, m.name(), &["outer_iterations", "objective_evals"], &out);
                rows.timings.push(family, plan.x, m.name(), index, "wall_time_s", wall);
            }
        }
        Family::StepsizeCompare => {
            for v in &cfg.step_variants {
                let mut opts = cell.pgm;
                opts.step_rule = match *v {
                    StepVariant::Named(AdaptiveTag::Adaptive) => StepRule::Adaptive,
                    StepVariant::Fixed(s) => StepRule::Fixed { theta: s, precoder: s },
                };
                let label = v.label();
                let (out, wall) = timed(1, || cell.run(Method::PracticalPgm, &opts));
                record(&mut rows, &label, &["csec", "outer_iterations", "objective_evals", "converged"], &out);
                rows.timings.push(family, plan.x, &label, index, "wall_time_s", wall);
            }
        }
        Family::ConvergenceTrace => {
            for &m in &cfg.methods {
                let out = cell.trace(m);
                match &out {
                    Ok(o) => {
                        for &k in &cfg.sweep {
                            let v = o.trace[(k as usize).min(o.trace.len() - 1)];
                            rows.results.push(family, k, m.name(), index, "csec", v);
                        }
                    }
                    Err(reason) => {
                        for &k in &cfg.sweep {
                            rows.results.push(family, k, m.name(), index, "csec", f64::NAN);
                        }
                        rows.results.missing.push(Missing {
                            family: family.into(),
                            x: cfg.sweep[0],
                            method: m.name().into(),
                            seed: index,
                            reason: reason.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Runs `f` `repeats` times and returns the first result with the median
/// wall time.
fn timed<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut times = Vec::with_capacity(repeats);
    let mut first = None;
    for _ in 0..repeats {
        let t0 = Instant::now();
        let v = f();
        times.push(t0.elapsed().as_secs_f64());
        first.get_or_insert(v);
    }
    times.sort_by(f64::total_cmp);
    (first.expect("at least one repeat"), times[times.len() / 2])
}

impl Cell<'_> {
    fn run(&self, method: Method, pgm: &PgmOptions) -> Result<Outcome, String> {
        self.try_run(method, pgm).map_err(|e| e.to_string())
    }

    fn try_run(&self, method: Method, pgm: &PgmOptions) -> Result<Outcome, BenchError> {
        let (ch, sys, practical) = (&self.ch, &self.sys, &self.plan.practical);
        let from_pgm = |r: ris_secrecy::SolveReport, csec: f64| -> Result<Outcome, BenchError> {
            if let Some(f) = r.failure {
                return Err(BenchError::Numeric(f));
            }
            Ok(Outcome {
                csec,
                iterations: r.outer_iterations,
                evals: r.objective_evals,
                converged: r.termination == Termination::Converged,
                trace: r.objective_trace,
            })
        };
        match method {
            Method::PracticalPgm => {
                let r = solve(ch, practical, sys, pgm, None, None)?;
                let c = r.rates.reported();
                from_pgm(r, c)
            }
            Method::IdealPgm => {
                let r = solve(ch, &self.plan.ideal, sys, pgm, None, None)?;
                let theta = project_theta(&r.theta_opt, practical);
                let state = RisState::new(theta, practical)?;
                let c = secrecy_rate(ch, &state, &r.t_opt, sys)?.reported();
                from_pgm(r, c)
            }
            Method::RandomRis => {
                let theta = practical.uniform_phases(sys.m, &mut stream(sys.seed, Purpose::RandomRisTheta));
                let opts = PgmOptions { optimize_theta: false, ..*pgm };
                let r = solve(ch, practical, sys, &opts, None, Some(theta))?;
                let c = r.rates.reported();
                from_pgm(r, c)
            }
            Method::NoRis => {
                let opts = PgmOptions { optimize_theta: false, ..*pgm };
                let r = solve(&ch.without_ris(), practical, sys, &opts, None, None)?;
                let c = r.rates.reported();
                from_pgm(r, c)
            }
            Method::Cpdm => {
                let (_, theta) = default_init(ch, practical, sys)?;
                let r = solve_cpdm(ch, practical, sys, &self.cpdm, theta)?;
                if let Some(f) = r.failure {
                    return Err(BenchError::Numeric(f));
                }
                Ok(Outcome {
                    csec: r.rates.reported(),
                    iterations: r.iterations,
                    evals: r.objective_evals,
                    converged: r.termination == Termination::Converged,
                    trace: r.pdiff_trace,
                })
            }
        }
    }

    /// Joint ascent from a random start (`practical_pgm`) or from the CPDM
    /// solution reached from the same random phases (`cpdm`).
    fn trace(&self, method: Method) -> Result<Outcome, String> {
        let go = || -> Result<Outcome, BenchError> {
            let (ch, sys, practical) = (&self.ch, &self.sys, &self.plan.practical);
            let (t0, theta0) = random_init(ch, practical, sys)?;
            let (t0, theta0) = match method {
                Method::PracticalPgm => (t0, theta0),
                Method::Cpdm => {
                    let c = solve_cpdm(ch, practical, sys, &self.cpdm, theta0)?;
                    if let Some(f) = c.failure {
                        return Err(BenchError::Numeric(f));
                    }
                    (c.t_sub, c.theta_sub)
                }
                other => return Err(BenchError::Config(format!("{} has no trace", other.name()))),
            };
            let r = solve(ch, practical, sys, &self.pgm, Some(t0), Some(theta0))?;
            if let Some(f) = r.failure {
                return Err(BenchError::Numeric(f));
            }
            Ok(Outcome {
                csec: r.rates.reported(),
                iterations: r.outer_iterations,
                evals: r.objective_evals,
                converged: r.termination == Termination::Converged,
                trace: r.objective_trace,
            })
        };
        go().map_err(|e| e.to_string())
    }
}

/// Writes `results.csv`, `timings.csv`, `missing.csv`, the resolved config and
/// one SVG plot into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, out: &RunOutput, dir: &Path) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir)?;
    emit_csv(&out.results, &dir.join("results.csv"))?;
    emit_csv(&out.timings, &dir.join("timings.csv"))?;
    let f = std::fs::File::create(dir.join("missing.csv"))?;
    out.results.write_missing(std::io::BufWriter::new(f))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let (table, metric) = if cfg.family.is_runtime() {
        (&out.timings, "wall_time_s")
    } else {
        (&out.results, "csec")
    };
    let data = plot::PlotData::from_table(table, cfg.family, metric);
    plot::render_svg(&data, &dir.join(format!("{}.svg", cfg.family.name())))?;
    Ok(())
}
