//! The `solve` and `verify` subcommands.

use std::fs;
use std::time::Instant;

use kantian_core::continuum::{self, Candidate};
use kantian_core::finite::{
    build_special_case, extragradient_solve, fixed_point_solve, monotonicity_probe, quadratic,
    quadratic_hrkn_direct, quadratic_rkn_direct, Coarsening, SolverConfig, SpecialCase,
};
use kantian_core::model::{aggregate_statistic, FiniteGame, GameModel};
use kantian_core::oracle;
use kantian_core::scenarios::{self, FiniteScenario};
use kantian_core::{Error, RiskFactor};
use nalgebra::DVector;
use serde_json::json;

use crate::config::RunConfig;
use crate::svg::{self, Panel, Series};
use crate::table::{self, Row};

#[derive(Debug)]
pub enum Failure {
    /// Bad input; exit status 2.
    Usage(String),
    /// A solver or check did not meet its tolerance; exit status 3.
    Check(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::DimensionMismatch { .. } => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        tol: cfg.tol,
        max_outer: cfg.max_iter,
        ..SolverConfig::default()
    }
}

fn risk(cfg: &RunConfig) -> Result<RiskFactor> {
    Ok(RiskFactor::new(cfg.beta)?)
}

struct Table {
    rows: Vec<Row>,
    failures: Vec<String>,
}

impl Table {
    fn new() -> Self {
        Table {
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn push(&mut self, row: Row, converged: bool, tol: f64) {
        if !converged || !(row.residual <= tol) {
            self.failures.push(format!(
                "{} alpha={} at {}: residual {:.3e}",
                row.solver,
                table::fmt_g(row.alpha),
                table::fmt_g(row.type_or_x),
                row.residual
            ));
        }
        self.rows.push(row);
    }
}

fn profile_costs<M: GameModel>(game: &FiniteGame<M>, u: &[f64]) -> Result<Vec<f64>> {
    let ubar = aggregate_statistic(u, &game.space, &game.model)?;
    Ok((0..u.len())
        .map(|k| game.model.cost(u[k], ubar, k))
        .collect())
}

fn inf_norm(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn solve_symmetric(cfg: &RunConfig, out: &mut Table) -> Result<Vec<Panel>> {
    let scfg = solver_config(cfg);
    let name = scenarios::SYMMETRIC_FISHING;
    let mut curves: [Vec<(f64, f64, f64)>; 3] = Default::default();
    for &alpha in &cfg.alphas {
        let mut sc = scenarios::symmetric_fishing(alpha)?;
        sc.beta = risk(cfg)?;
        let (eq, report) = fixed_point_solve(&sc.game()?, &scfg)?;
        let u = eq.star[0];
        let row = |action: f64, solver, residual, iterations| Row {
            scenario: name.into(),
            alpha,
            type_or_x: 1.0,
            action,
            cost: scenarios::symmetric_cost(action),
            solver,
            residual,
            iterations,
        };
        out.push(
            row(
                u,
                "kantian_fixed_point",
                report.final_residual,
                report.iterations,
            ),
            report.converged,
            cfg.tol,
        );
        curves[0].push((alpha, u, scenarios::symmetric_cost(u)));

        let alt = scenarios::symmetric_reference(alpha).altruistic;
        out.push(row(alt, "altruistic_closed_form", 0.0, 0), true, cfg.tol);
        curves[1].push((alpha, alt, scenarios::symmetric_cost(alt)));

        let (measure, beta, weights) = build_special_case(&SpecialCase::Nash, &sc.space)?;
        let nash = FiniteGame::new(sc.space.clone(), sc.model.clone(), measure, weights, beta)?;
        let (eq, report) = fixed_point_solve(&nash, &scfg)?;
        let u = eq.star[0];
        out.push(
            row(
                u,
                "nash_fixed_point",
                report.final_residual,
                report.iterations,
            ),
            report.converged,
            cfg.tol,
        );
        curves[2].push((alpha, u, scenarios::symmetric_cost(u)));
    }
    let labels = ["kantian", "altruistic", "nash"];
    let series = |pick: fn(&(f64, f64, f64)) -> f64| -> Vec<Series> {
        curves
            .iter()
            .zip(labels)
            .map(|(c, label)| Series {
                label: label.into(),
                points: c.iter().map(|p| (p.0, pick(p))).collect(),
                dashed: label == "nash",
            })
            .collect()
    };
    Ok(vec![
        Panel {
            title: "Equilibrium action".into(),
            x_label: "alpha".into(),
            y_label: "u".into(),
            series: series(|p| p.1),
        },
        Panel {
            title: "Equilibrium cost".into(),
            x_label: "alpha".into(),
            y_label: "J".into(),
            series: series(|p| p.2),
        },
    ])
}

fn solve_four_type(cfg: &RunConfig, out: &mut Table) -> Result<Vec<Panel>> {
    let name = scenarios::FOUR_TYPE;
    let n = scenarios::FOUR_TYPE_MASSES.len();
    // (label, type, alpha, action, cost)
    let mut points: Vec<(&str, usize, f64, f64, f64)> = Vec::new();
    for &alpha in &cfg.alphas {
        let mut sc: FiniteScenario = scenarios::four_type_game(alpha)?;
        sc.beta = risk(cfg)?;
        let game = sc.game()?;
        let mut emit = |solver: &'static str,
                        label: &'static str,
                        u: &[f64],
                        residual: f64,
                        iterations,
                        ok: bool| {
            let costs = profile_costs(&game, u)?;
            let in_box = u.iter().all(|x| game.action_box().contains(*x));
            for k in 0..n {
                out.push(
                    Row {
                        scenario: name.into(),
                        alpha,
                        type_or_x: (k + 1) as f64,
                        action: u[k],
                        cost: costs[k],
                        solver,
                        residual,
                        iterations,
                    },
                    ok && in_box,
                    cfg.tol,
                );
                points.push((label, k, alpha, u[k], costs[k]));
            }
            Ok::<(), Failure>(())
        };
        if cfg.beta == 0.0 {
            let u = quadratic_rkn_direct(&sc.space, &sc.model, alpha)?;
            let (m, l) = quadratic::rkn_system(&sc.space, &sc.model, alpha)?;
            let res = inf_norm((m * DVector::from_column_slice(&u) - l).iter().copied());
            emit("rkn_direct", "r-KN", &u, res, 0, true)?;

            let h =
                quadratic_hrkn_direct(&sc.space, &sc.model, alpha, Coarsening::OwnEffortWeight)?;
            let (m, rhs, _) =
                quadratic::hrkn_system(&sc.space, &sc.model, alpha, Coarsening::OwnEffortWeight)?;
            let mut x: Vec<f64> = h.class_profiles.concat();
            x.extend_from_slice(&h.equilibrium);
            let res = inf_norm((m * DVector::from_vec(x) - rhs).iter().copied());
            emit("hrkn_direct", "h,r-KN", &h.equilibrium, res, 0, true)?;
        } else {
            let (eq, report) = fixed_point_solve(&game, &solver_config(cfg))?;
            emit(
                "rkn_fixed_point",
                "r-KN",
                &eq.star,
                report.final_residual,
                report.iterations,
                report.converged,
            )?;
        }
    }
    let mut labels: Vec<&str> = Vec::new();
    for p in &points {
        if !labels.contains(&p.0) {
            labels.push(p.0);
        }
    }
    let series = |value: fn(&(&str, usize, f64, f64, f64)) -> f64| -> Vec<Series> {
        labels
            .iter()
            .flat_map(|label| (0..n).map(move |k| (label, k)))
            .map(|(label, k)| Series {
                label: format!("{label} type {}", k + 1),
                points: points
                    .iter()
                    .filter(|p| p.0 == *label && p.1 == k)
                    .map(|p| (p.2, value(p)))
                    .collect(),
                dashed: *label != "r-KN",
            })
            .collect()
    };
    Ok(vec![
        Panel {
            title: "Action per type".into(),
            x_label: "alpha".into(),
            y_label: "u".into(),
            series: series(|p| p.3),
        },
        Panel {
            title: "Cost per type".into(),
            x_label: "alpha".into(),
            y_label: "J".into(),
            series: series(|p| p.4),
        },
    ])
}

fn continuum_scenario(cfg: &RunConfig, alpha: f64) -> Result<scenarios::ContinuumScenario> {
    Ok(match cfg.scenario.as_str() {
        scenarios::CONTINUUM_UNIFORM => scenarios::continuum_uniform(alpha, cfg.xi, cfg.grid_n)?,
        _ => scenarios::continuum_windowed(alpha, cfg.xi, cfg.grid_n)?,
    })
}

fn solve_continuum(cfg: &RunConfig, out: &mut Table) -> Result<Vec<Panel>> {
    let mut actions = Vec::new();
    let mut costs = Vec::new();
    for &alpha in &cfg.alphas {
        let sc = continuum_scenario(cfg, alpha)?;
        let sol = continuum::solve(&sc.lq)?;
        let residual = continuum::pontryagin_residual(&sc.lq, &Candidate::from(&sol))?;
        for (i, x) in sc.lq.grid().iter().enumerate() {
            out.push(
                Row {
                    scenario: sc.name.into(),
                    alpha,
                    type_or_x: *x,
                    action: sol.actions[i],
                    cost: sol.costs[i],
                    solver: "nystrom",
                    residual,
                    iterations: 0,
                },
                true,
                cfg.tol,
            );
        }
        let label = format!("alpha = {}", table::fmt_g(alpha));
        let grid = sc.lq.grid();
        let pts = |v: &[f64]| grid.iter().copied().zip(v.iter().copied()).collect();
        actions.push(Series {
            label: label.clone(),
            points: pts(&sol.actions),
            dashed: false,
        });
        costs.push(Series {
            label,
            points: pts(&sol.costs),
            dashed: false,
        });
    }
    Ok(vec![
        Panel {
            title: "Equilibrium action".into(),
            x_label: "x".into(),
            y_label: "u(x)".into(),
            series: actions,
        },
        Panel {
            title: "Equilibrium cost".into(),
            x_label: "x".into(),
            y_label: "J(x)".into(),
            series: costs,
        },
    ])
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| {
        Failure::Usage(format!(
            "cannot create output directory {}: {e}",
            cfg.out.display()
        ))
    })?;
    let probe = cfg.out.join(".write-test");
    fs::write(&probe, b"")
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| {
            Failure::Usage(format!(
                "output directory {} is not writable: {e}",
                cfg.out.display()
            ))
        })
}

pub fn solve(cfg: &RunConfig) -> Result<()> {
    prepare_out_dir(cfg)?;
    let started = Instant::now();
    let mut table = Table::new();
    let panels = match scenarios::kind_of(&cfg.scenario)? {
        scenarios::ScenarioKind::Continuum => solve_continuum(cfg, &mut table)?,
        _ if cfg.scenario == scenarios::SYMMETRIC_FISHING => solve_symmetric(cfg, &mut table)?,
        _ => solve_four_type(cfg, &mut table)?,
    };
    let elapsed = started.elapsed();

    let mut files = Vec::new();
    if cfg.formats.csv {
        fs::write(cfg.out.join("equilibrium.csv"), table::to_csv(&table.rows))?;
        files.push("equilibrium.csv".to_string());
    }
    if cfg.formats.svg {
        let file = format!("{}.svg", cfg.scenario);
        match svg::render(&panels) {
            Some(doc) => {
                fs::write(cfg.out.join(&file), doc)?;
                files.push(file);
            }
            None => eprintln!("warning: empty table, no plot written"),
        }
    }
    let scfg = solver_config(cfg);
    let meta = json!({
        "scenario": cfg.scenario,
        "alphas": cfg.alphas,
        "alpha_sweep": cfg.sweep.map(|s| s.to_string()),
        "beta": cfg.beta,
        "grid_n": cfg.grid_n,
        "xi": cfg.xi.id(),
        "seed": cfg.seed,
        "rows": table.rows.len(),
        "converged": table.failures.is_empty(),
        "failures": table.failures,
        "files": files,
        "solver": {
            "tol": scfg.tol,
            "max_outer": scfg.max_outer,
            "damping": scfg.damping,
            "inner_tol": scfg.inner_tol,
            "inner_max_iter": scfg.inner_max_iter,
            "eg_step": scfg.eg_step,
            "oracle_grid": scfg.oracle_grid,
        },
        "version": env!("CARGO_PKG_VERSION"),
        "elapsed_ms": elapsed.as_secs_f64() * 1e3,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Failure::Io(e.to_string()))?;
    fs::write(cfg.out.join("metadata.json"), text + "\n")?;
    println!("{} rows written to {}", table.rows.len(), cfg.out.display());

    if table.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} rows missed the tolerance: {}",
            table.failures.len(),
            table.failures.join("; ")
        )))
    }
}

struct Checks {
    failed: usize,
}

impl Checks {
    fn record(&mut self, alpha: f64, what: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        if !ok {
            self.failed += 1;
        }
        println!(
            "alpha={} {what}={:.3e} limit={:.0e} {}",
            table::fmt_g(alpha),
            value,
            limit,
            if ok { "ok" } else { "FAIL" }
        );
    }
}

pub fn verify(cfg: &RunConfig) -> Result<()> {
    let mut checks = Checks { failed: 0 };
    let scfg = solver_config(cfg);
    for &alpha in &cfg.alphas {
        match cfg.scenario.as_str() {
            scenarios::SYMMETRIC_FISHING => {
                let game = scenarios::symmetric_fishing(alpha)?.game()?;
                let (eq, _) = fixed_point_solve(&game, &scfg)?;
                let reference = scenarios::symmetric_reference(alpha).kantian;
                checks.record(
                    alpha,
                    "reference_deviation",
                    (eq.star[0] - reference).abs(),
                    1e-8,
                );
                let grid = oracle::brute_force_group_min(&game, 0, &eq.star, scfg.oracle_grid)?;
                checks.record(
                    alpha,
                    "oracle_deviation",
                    (grid[0] - eq.star[0]).abs(),
                    1e-4,
                );
            }
            scenarios::FOUR_TYPE => {
                let sc = scenarios::four_type_game(alpha)?;
                let game = sc.game()?;
                let direct = quadratic_rkn_direct(&sc.space, &sc.model, alpha)?;
                let (eq, _) = extragradient_solve(&game, &scfg)?;
                let dev = inf_norm(direct.iter().zip(&eq.star).map(|(a, b)| a - b));
                checks.record(alpha, "extragradient_deviation", dev, 1e-6);
                let probe = monotonicity_probe(&game, cfg.samples, cfg.seed)?;
                println!(
                    "alpha={} monotonicity_min={:.6e} certificate={}",
                    table::fmt_g(alpha),
                    probe.min_value,
                    probe.certificate
                );
            }
            _ => {
                let sc = continuum_scenario(cfg, alpha)?;
                let sol = continuum::solve(&sc.lq)?;
                let residual = continuum::pontryagin_residual(&sc.lq, &Candidate::from(&sol))?;
                checks.record(alpha, "pontryagin_residual", residual, 1e-5);
                match oracle::discretized_continuum_crosscheck(&sc.lq, cfg.n_types) {
                    Ok(dev) => checks.record(alpha, "crosscheck_deviation", dev, 1e-3),
                    Err(Error::Unsupported(why)) => {
                        println!("alpha={} crosscheck skipped: {why}", table::fmt_g(alpha))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    if checks.failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} checks failed", checks.failed)))
    }
}
