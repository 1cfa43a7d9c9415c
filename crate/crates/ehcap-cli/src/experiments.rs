//! The four experiment pipelines.
//!
//! Each pipeline turns a resolved config into an [`output::Table`]. Row
//! computations run concurrently but rows are emitted in sweep order, and a
//! failing row never aborts the sweep: its numeric cells stay empty, the
//! `note` column carries the reason, and the run's exit code reflects the
//! first failing row (budget refusals map to [`exit::BUDGET`], everything
//! else to [`exit::INVARIANT`]).

use std::f64::consts::LN_2;

use rayon::prelude::*;

use ehcap_core::capacity::{
    ascent_capacity, c_infinity, evaluate_policy, greedy_policy, AscentOptions,
};
use ehcap_core::infotheory::{quantized_amplitudes, BaOptions};
use ehcap_core::markov::build_transition;
use ehcap_core::shannonstrat::{
    bsir_capacity, enumerate_strategies, order_m_rate, OrderMOptions, StateChain, STRATEGY_BUDGET,
};
use ehcap_core::truncgauss::{estimate_rate, TgConfig};
use ehcap_core::{EnergyGrid, Error, HarvestModel};

use crate::config::{resolve, ExperimentConfig, HarvestSpec, Resolved};
use crate::exit;
use crate::output::{config_hash, Cell, Table};

/// Tolerance for the per-row ordering checks (greedy <= capacity <=
/// infinite-buffer) and the strategy-bound checks.
pub const ORDERING_TOL: f64 = 1e-4;

/// A finished run: the table plus the exit code derived from its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub table: Table,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowFailure {
    Budget,
    Invariant,
}

struct RowOutcome {
    cells: Vec<Cell>,
    failure: Option<RowFailure>,
}

fn classify(e: &Error) -> RowFailure {
    match e {
        Error::BudgetExceeded { .. } => RowFailure::Budget,
        _ => RowFailure::Invariant,
    }
}

fn exit_code_for(rows: &[RowOutcome]) -> i32 {
    for row in rows {
        match row.failure {
            Some(RowFailure::Budget) => return exit::BUDGET,
            Some(RowFailure::Invariant) => return exit::INVARIANT,
            None => {}
        }
    }
    exit::OK
}

fn finish(
    cfg: &ExperimentConfig,
    seeds: Vec<u64>,
    columns: Vec<&'static str>,
    rows: Vec<RowOutcome>,
) -> RunOutcome {
    let exit_code = exit_code_for(&rows);
    RunOutcome {
        table: Table {
            experiment: cfg.experiment.to_string(),
            seeds,
            config_sha256: config_hash(&cfg.scientific_keys()),
            columns,
            rows: rows.into_iter().map(|r| r.cells).collect(),
        },
        exit_code,
    }
}

/// Run the configured experiment. `Err` means the configuration itself was
/// unusable (exit code 4); row-level failures are reported inside the table.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, String> {
    match cfg.experiment {
        crate::config::ExperimentKind::CapacitySweep => run_capacity_sweep(cfg),
        crate::config::ExperimentKind::TgConvergence => run_tg_convergence(cfg),
        crate::config::ExperimentKind::GreedyCompare => run_greedy_compare(cfg),
        crate::config::ExperimentKind::NoBsir => run_no_bsir(cfg),
    }
}

/// Greedy rate, optimized capacity, and infinite-buffer reference for one
/// instance, with the ordering checked.
fn rates_for(
    harvest: &HarvestModel,
    r: &Resolved,
    cfg: &ExperimentConfig,
) -> Result<(f64, f64, f64), (RowFailure, String)> {
    let module = |e: Error| (classify(&e), e.to_string());
    let grid = EnergyGrid::new(r.quantum, r.gamma_q, harvest.ymax_q()).map_err(module)?;
    let ba = BaOptions::default();
    let c_inf = c_infinity(harvest, &r.channel);
    let greedy = greedy_policy(&grid, &r.channel, &ba).map_err(module)?;
    let greedy_report = evaluate_policy(&greedy, harvest, &grid, &r.channel).map_err(module)?;
    let opts = AscentOptions {
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..AscentOptions::default()
    };
    let capacity = ascent_capacity(harvest, &grid, &r.channel, &opts).map_err(module)?;
    let (rg, cg) = (greedy_report.value_nats, capacity.value_nats);
    if rg > cg + ORDERING_TOL {
        return Err((
            RowFailure::Invariant,
            format!("ordering violated: greedy rate {rg} exceeds capacity {cg}"),
        ));
    }
    if cg > c_inf + ORDERING_TOL {
        return Err((
            RowFailure::Invariant,
            format!("ordering violated: capacity {cg} exceeds infinite-buffer value {c_inf}"),
        ));
    }
    Ok((rg, cg, c_inf))
}

/// One row per maximum harvest from 0 up to the configured `ymax` (a single
/// row when the harvest is an explicit file, which fixes its own support).
fn run_capacity_sweep(cfg: &ExperimentConfig) -> Result<RunOutcome, String> {
    let r = resolve(cfg)?;
    let harvests: Vec<HarvestModel> = match &cfg.harvest {
        HarvestSpec::Pmf(_) => vec![r.harvest.clone()],
        HarvestSpec::Point => (0..=r.ymax_q)
            .map(|y| HarvestModel::point(r.quantum, y))
            .collect::<ehcap_core::Result<_>>()
            .map_err(|e| e.to_string())?,
        HarvestSpec::Uniform => (0..=r.ymax_q)
            .map(|y| HarvestModel::uniform(r.quantum, y))
            .collect::<ehcap_core::Result<_>>()
            .map_err(|e| e.to_string())?,
    };
    let rows: Vec<RowOutcome> = harvests
        .par_iter()
        .map(|harvest| {
            let mean = harvest.mean_energy();
            match rates_for(harvest, &r, cfg) {
                Ok((rg, cg, c_inf)) => RowOutcome {
                    cells: vec![
                        Cell::Num(mean),
                        Cell::Num(cg),
                        Cell::Num(cg / LN_2),
                        Cell::Num(rg),
                        Cell::Num(rg / LN_2),
                        Cell::Num(c_inf),
                        Cell::Num(c_inf / LN_2),
                        Cell::Text(String::new()),
                    ],
                    failure: None,
                },
                Err((failure, msg)) => RowOutcome {
                    cells: vec![
                        Cell::Num(mean),
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Text(msg),
                    ],
                    failure: Some(failure),
                },
            }
        })
        .collect();
    Ok(finish(
        cfg,
        vec![cfg.seed],
        vec![
            "mean_harvest",
            "c_gamma_nats",
            "c_gamma_bits",
            "r_greedy_nats",
            "r_greedy_bits",
            "c_infinity_nats",
            "c_infinity_bits",
            "note",
        ],
        rows,
    ))
}

/// Simulated truncated-Gaussian rates over the configured buffer sizes plus
/// the infinite-buffer reference row (`gamma = inf`, zero standard error).
fn run_tg_convergence(cfg: &ExperimentConfig) -> Result<RunOutcome, String> {
    let r = resolve(cfg)?;
    let mut template = TgConfig::for_harvest(&r.harvest, cfg.epsilon, cfg.gammas[0])
        .map_err(|e| e.to_string())?
        .with_samples(cfg.samples)
        .with_burn_in(cfg.burn_in)
        .with_seed(cfg.seed);
    template.replicas = cfg.replicas;
    let mean = r.harvest.mean_energy();
    let sigma2 = r.channel.sigma2();

    let tg_cells = |gamma: f64, nats: f64, se: f64| {
        vec![
            Cell::Num(gamma),
            Cell::Num(nats),
            Cell::Num(nats / LN_2),
            Cell::Num(se),
            Cell::Num(cfg.epsilon),
            Cell::Num(mean),
            Cell::Num(sigma2),
            Cell::Int(cfg.seed),
            Cell::Text(String::new()),
        ]
    };

    let mut rows: Vec<RowOutcome> = cfg
        .gammas
        .par_iter()
        .map(|&gamma| {
            match estimate_rate(&template.with_gamma(gamma), &r.harvest, &r.channel) {
                Ok(est) => RowOutcome {
                    cells: tg_cells(gamma, est.nats, est.std_error),
                    failure: None,
                },
                Err(e) => RowOutcome {
                    cells: vec![
                        Cell::Num(gamma),
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Num(cfg.epsilon),
                        Cell::Num(mean),
                        Cell::Num(sigma2),
                        Cell::Int(cfg.seed),
                        Cell::Text(e.to_string()),
                    ],
                    failure: Some(classify(&e)),
                },
            }
        })
        .collect();
    let c_inf = c_infinity(&r.harvest, &r.channel);
    rows.push(RowOutcome {
        cells: tg_cells(f64::INFINITY, c_inf, 0.0),
        failure: None,
    });

    let seeds = (cfg.seed..cfg.seed + cfg.replicas as u64).collect();
    Ok(finish(
        cfg,
        seeds,
        vec![
            "gamma",
            "rate_nats",
            "rate_bits",
            "std_error",
            "epsilon",
            "mean_harvest",
            "sigma2",
            "seed",
            "note",
        ],
        rows,
    ))
}

/// Single-instance comparison of the greedy baseline against the optimized
/// capacity.
fn run_greedy_compare(cfg: &ExperimentConfig) -> Result<RunOutcome, String> {
    let r = resolve(cfg)?;
    let mean = r.harvest.mean_energy();
    let row = match rates_for(&r.harvest, &r, cfg) {
        Ok((rg, cg, c_inf)) => RowOutcome {
            cells: vec![
                Cell::Num(cfg.gamma),
                Cell::Num(mean),
                Cell::Num(rg),
                Cell::Num(rg / LN_2),
                Cell::Num(cg),
                Cell::Num(cg / LN_2),
                Cell::Num(c_inf),
                Cell::Num(c_inf / LN_2),
                Cell::Num(cg - rg),
                Cell::Text(String::new()),
            ],
            failure: None,
        },
        Err((failure, msg)) => RowOutcome {
            cells: vec![
                Cell::Num(cfg.gamma),
                Cell::Num(mean),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Text(msg),
            ],
            failure: Some(failure),
        },
    };
    Ok(finish(
        cfg,
        vec![cfg.seed],
        vec![
            "gamma",
            "mean_harvest",
            "r_greedy_nats",
            "r_greedy_bits",
            "c_gamma_nats",
            "c_gamma_bits",
            "c_infinity_nats",
            "c_infinity_bits",
            "gap_nats",
            "note",
        ],
        vec![row],
    ))
}

/// Strategy-letter lower bounds on the chain the greedy policy induces, one
/// row per configured order, against the side-information reference.
fn run_no_bsir(cfg: &ExperimentConfig) -> Result<RunOutcome, String> {
    let r = resolve(cfg)?;
    let columns = vec![
        "m",
        "lower_bound_nats",
        "lower_bound_bits",
        "bsir_nats",
        "bsir_bits",
        "note",
    ];

    // Shared stage: the reference chain and alphabet. A failure here marks
    // every row rather than aborting the run.
    let shared = (|| -> ehcap_core::Result<(StateChain, Vec<f64>, f64)> {
        let grid = r.grid();
        let ba = BaOptions::default();
        let greedy = greedy_policy(&grid, &r.channel, &ba)?;
        let report = evaluate_policy(&greedy, &r.harvest, &grid, &r.channel)?;
        let p = build_transition(&report.policy, &r.harvest, &grid)?;
        let class = &report.per_class[report.chosen_class];
        let mut pi_full = vec![0.0; grid.state_count()];
        for (s, w) in class.states.iter().zip(&class.pi) {
            pi_full[*s] = *w;
        }
        let chain = StateChain::from_class(&p, &class.states, &pi_full, &grid)?;
        let peak_q = *class.states.last().expect("classes are non-empty") as u32;
        let amps = quantized_amplitudes(peak_q, r.quantum);
        let bsir = bsir_capacity(&chain, &amps, &r.channel, &ba)?;
        Ok((chain, amps, bsir))
    })();

    let rows: Vec<RowOutcome> = match &shared {
        Err(e) => cfg
            .orders
            .iter()
            .map(|&m| RowOutcome {
                cells: vec![
                    Cell::Int(m as u64),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Text(e.to_string()),
                ],
                failure: Some(classify(e)),
            })
            .collect(),
        Ok((chain, amps, bsir)) => cfg
            .orders
            .par_iter()
            .map(|&m| {
                let result = enumerate_strategies(chain, amps, m, STRATEGY_BUDGET).and_then(
                    |order| order_m_rate(&order, &r.channel, &OrderMOptions::default()),
                );
                match result {
                    Ok(rate) if rate.rate_nats > bsir + ORDERING_TOL => RowOutcome {
                        cells: vec![
                            Cell::Int(m as u64),
                            Cell::Num(rate.rate_nats),
                            Cell::Num(rate.rate_bits),
                            Cell::Num(*bsir),
                            Cell::Num(*bsir / LN_2),
                            Cell::Text(format!(
                                "bound violated: {} exceeds reference {bsir}",
                                rate.rate_nats
                            )),
                        ],
                        failure: Some(RowFailure::Invariant),
                    },
                    Ok(rate) => RowOutcome {
                        cells: vec![
                            Cell::Int(m as u64),
                            Cell::Num(rate.rate_nats),
                            Cell::Num(rate.rate_bits),
                            Cell::Num(*bsir),
                            Cell::Num(*bsir / LN_2),
                            Cell::Text(String::new()),
                        ],
                        failure: None,
                    },
                    Err(e) => {
                        let msg = match &e {
                            Error::BudgetExceeded { required, budget } => format!(
                                "skipped: {required} strategies exceed budget {budget}"
                            ),
                            other => other.to_string(),
                        };
                        RowOutcome {
                            cells: vec![
                                Cell::Int(m as u64),
                                Cell::Empty,
                                Cell::Empty,
                                Cell::Num(*bsir),
                                Cell::Num(*bsir / LN_2),
                                Cell::Text(msg),
                            ],
                            failure: Some(classify(&e)),
                        }
                    }
                }
            })
            .collect(),
    };
    Ok(finish(cfg, Vec::new(), columns, rows))
}
