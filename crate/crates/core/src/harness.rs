//! Monte Carlo driver.
//!
//! Each trial draws its own random stream from `(seed, sweep value, trial
//! index)`, builds the whole pipeline once, and hands the same admission
//! problem to every selected solver, so solver comparisons are paired.
//! Trials run in parallel; records are emitted in trial order so the output
//! does not depend on the thread count.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::admission::{solve, AdmissionProblem, AdmissionResult, Solver};
use crate::array::{compute_channels, make_scenario, steering_unchecked, ChannelSet, Scenario};
use crate::basis::{interference_basis, InterferenceBasis};
use crate::beamforming::{design_beamformers, BeamformerSet};
use crate::config::{ExperimentConfig, PointConfig};
use crate::estimation::{estimate_channels, ChannelEstimate};
use crate::{Error, Result};

/// Every intermediate product of one trial, before admission.
#[derive(Debug, Clone)]
pub struct PreparedTrial {
    pub scenario: Scenario,
    pub channels: ChannelSet,
    pub estimate: ChannelEstimate,
    pub bases: [InterferenceBasis; 2],
    pub beams: BeamformerSet,
    pub problem: AdmissionProblem,
}

/// Outcome of one solver on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub sweep_value: f64,
    pub solver: Solver,
    pub trial: usize,
    pub admitted: usize,
    pub total_power_mw: f64,
    pub est_interference_mw: [f64; 2],
    pub true_interference_mw: [f64; 2],
    pub rates: Vec<f64>,
    pub wall_time: Duration,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` at sweep point `value`.
pub fn trial_seed(master: u64, value: f64, index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ value.to_bits()) ^ index as u64)
}

/// Runs the pipeline up to the admission problem.
pub fn prepare_trial(point: &PointConfig, seed: u64) -> Result<PreparedTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geometry = &point.geometry;
    let scenario = make_scenario(geometry, &mut rng)?;
    let channels = compute_channels(&scenario, geometry.path_loss_exponent, &mut rng)?;
    let estimate = estimate_channels(&channels, &scenario, &mut rng, &point.estimation);
    let bases = [
        interference_basis(estimate.sp_phi_hat[0], scenario.bs_antennas)?,
        interference_basis(estimate.sp_phi_hat[1], scenario.bs_antennas)?,
    ];
    let beams = design_beamformers(&channels, &estimate, &bases, scenario.bs_antennas, scenario.ue_antennas)?;
    let problem = AdmissionProblem {
        gamma: beams.gamma.clone(),
        g: beams.g.clone(),
        alpha_hat_sq: estimate.sp_alpha_hat.map(|a| a * a),
        constraints: point.constraints,
        ue_phi: channels.ss.iter().map(|l| l.phi).collect(),
        pu_phi_hat: estimate.sp_phi_hat,
    };
    Ok(PreparedTrial {
        scenario,
        channels,
        estimate,
        bases,
        beams,
        problem,
    })
}

/// Interference actually received at each PU, using true angles and attenuations.
pub fn true_interference(result: &AdmissionResult, channels: &ChannelSet, beams: &BeamformerSet) -> [f64; 2] {
    std::array::from_fn(|j| {
        let link = &channels.sp[j];
        let sum: f64 = (0..beams.num_ues())
            .filter(|&k| result.selected[k])
            .map(|k| {
                let v = &beams.v[k];
                result.power[k] * steering_unchecked(v.len(), link.phi).dotc(v).norm_sqr()
            })
            .sum();
        link.alpha * link.alpha * sum
    })
}

/// One trial of every configured solver at one sweep point.
pub fn run_trial(config: &ExperimentConfig, sweep_value: f64, trial: usize) -> Result<Vec<TrialRecord>> {
    let point = config.point(sweep_value);
    let prepared = prepare_trial(&point, trial_seed(config.seed, sweep_value, trial))?;
    config
        .solvers
        .iter()
        .map(|&solver| {
            let start = Instant::now();
            let result = solve(solver, &prepared.problem, &config.solver_options)?;
            let wall_time = start.elapsed();
            Ok(TrialRecord {
                sweep_value,
                solver,
                trial,
                admitted: result.admitted,
                total_power_mw: result.total_power(),
                est_interference_mw: result.est_interference,
                true_interference_mw: true_interference(&result, &prepared.channels, &prepared.beams),
                rates: result.rates,
                wall_time,
            })
        })
        .collect()
}

/// Mean and standard error of the admitted count in one (solver, sweep value) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub sweep_value: f64,
    pub solver: Solver,
    pub trials: usize,
    pub mean_admitted: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

/// Per-cell statistics of a sweep, keyed by (sweep position, solver).
#[derive(Debug, Clone, Default)]
pub struct Summary {
    cells: BTreeMap<(usize, Solver), (f64, Accumulator)>,
}

impl Summary {
    fn add(&mut self, position: usize, record: &TrialRecord) {
        let (_, acc) = self
            .cells
            .entry((position, record.solver))
            .or_insert_with(|| (record.sweep_value, Accumulator::default()));
        let x = record.admitted as f64;
        acc.n += 1;
        acc.sum += x;
        acc.sum_sq += x * x;
    }

    /// Cells ordered by sweep position, then solver.
    pub fn cells(&self) -> Vec<CellSummary> {
        self.cells
            .iter()
            .map(|(&(_, solver), (value, acc))| {
                let n = acc.n as f64;
                let mean = acc.sum / n;
                let stderr = if acc.n > 1 {
                    let var = ((acc.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                } else {
                    0.0
                };
                CellSummary {
                    sweep_value: *value,
                    solver,
                    trials: acc.n,
                    mean_admitted: mean,
                    stderr,
                }
            })
            .collect()
    }

    pub fn mean(&self, sweep_value: f64, solver: Solver) -> Option<f64> {
        self.cells()
            .into_iter()
            .find(|c| c.sweep_value == sweep_value && c.solver == solver)
            .map(|c| c.mean_admitted)
    }
}

/// Runs every trial of every sweep point, streaming records to `sink` in order.
pub fn run_sweep<F>(config: &ExperimentConfig, mut sink: F) -> Result<Summary>
where
    F: FnMut(&TrialRecord) -> Result<()>,
{
    let pool = if config.threads == 0 {
        None
    } else {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| Error::config("runtime.threads", e.to_string()))?,
        )
    };
    let point_batches = |value: f64| -> Result<Vec<Vec<TrialRecord>>> {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| run_trial(config, value, trial))
            .collect()
    };
    let mut summary = Summary::default();
    for (position, &value) in config.sweep.values.iter().enumerate() {
        let batches = match &pool {
            Some(pool) => pool.install(|| point_batches(value))?,
            None => point_batches(value)?,
        };
        for record in batches.iter().flatten() {
            summary.add(position, record);
            sink(record)?;
        }
    }
    Ok(summary)
}

/// Runs a sweep and keeps all records in memory.
pub fn collect_sweep(config: &ExperimentConfig) -> Result<(Vec<TrialRecord>, Summary)> {
    let mut records = Vec::new();
    let summary = run_sweep(config, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok((records, summary))
}
