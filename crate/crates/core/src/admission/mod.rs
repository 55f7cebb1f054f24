//! Power allocation and admission control with beams held fixed.
//!
//! With the beams fixed, UE-k is described by its effective gain `Γ_k` and
//! its interference coefficients `g_{k,1}`, `g_{k,2}`. Three solvers pick the
//! set of served UEs:
//!
//! * [`equal_power_allocate`] splits `P⁰` evenly and drops the weakest UE
//!   until every survivor meets `R⁰`.
//! * [`equal_rate_allocate`] gives each UE exactly the power for `R⁰` and
//!   drops the most expensive UE until the budget holds.
//! * [`ilp_admit`] solves the 0-1 program exactly.
//!
//! Both heuristics finish with [`interference_control`]. All powers are in
//! linear milliwatts.

mod heuristics;
mod ilp;

pub use heuristics::{equal_power_allocate, equal_power_allocate_with, equal_rate_allocate, interference_control};
pub use ilp::{ilp_admit, ilp_admit_with, IlpOptions, IlpStrategy};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Slack used when certifying results.
pub const CERTIFY_TOLERANCE: f64 = 1e-9;

/// Budgets and requirements, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSet {
    /// Total transmit power budget `P⁰` (mW).
    pub total_power: f64,
    /// Interference threshold `I⁰` at each PU (mW).
    pub interference: f64,
    /// Minimum rate `R⁰` (bits/s/Hz).
    pub min_rate: f64,
    /// Noise power `σ_w²` (mW).
    pub noise: f64,
}

impl ConstraintSet {
    /// Builds the set from the dBm values used in experiment files.
    pub fn from_dbm(total_power_dbm: f64, interference_dbm: f64, min_rate: f64, noise_dbm: f64) -> Self {
        Self {
            total_power: crate::dbm_to_mw(total_power_dbm),
            interference: crate::dbm_to_mw(interference_dbm),
            min_rate,
            noise: crate::dbm_to_mw(noise_dbm),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("constraints.total_power_dbm", self.total_power),
            ("constraints.interference_dbm", self.interference),
            ("constraints.min_rate", self.min_rate),
            ("constraints.noise_dbm", self.noise),
        ];
        for (key, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    key,
                    format!("must be strictly positive and finite, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

/// Everything the selection step needs about one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionProblem {
    /// Effective gains `Γ_k`; zero marks an unservable UE.
    pub gamma: Vec<f64>,
    /// Interference coefficients `g[j][k]`.
    pub g: [Vec<f64>; 2],
    /// Squared estimated BS→PU attenuations.
    pub alpha_hat_sq: [f64; 2],
    pub constraints: ConstraintSet,
    /// UE angular sines seen from the BS, used to pick interference-control victims.
    pub ue_phi: Vec<f64>,
    /// Estimated PU angular sines seen from the BS.
    pub pu_phi_hat: [f64; 2],
}

impl AdmissionProblem {
    pub fn num_ues(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_ues();
        if self.g[0].len() != k || self.g[1].len() != k || self.ue_phi.len() != k {
            return Err(Error::domain("admission problem vectors disagree on K"));
        }
        let coefficients = self
            .gamma
            .iter()
            .chain(&self.g[0])
            .chain(&self.g[1])
            .chain(&self.alpha_hat_sq);
        if coefficients.clone().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::domain("admission coefficients must be finite and non-negative"));
        }
        self.constraints.validate()
    }

    /// Estimated interference at PU `j` for the given selection and powers.
    pub fn estimated_interference(&self, j: usize, selected: &[bool], power: &[f64]) -> f64 {
        let sum: f64 = (0..self.num_ues())
            .filter(|&k| selected[k])
            .map(|k| power[k] * self.g[j][k])
            .sum();
        self.alpha_hat_sq[j] * sum
    }
}

/// Power needed for UE with gain `gamma` to reach exactly `R⁰`; infinite when `gamma = 0`.
pub fn required_power(gamma: f64, constraints: &ConstraintSet) -> f64 {
    if gamma <= 0.0 {
        return f64::INFINITY;
    }
    constraints.noise * (2f64.powf(constraints.min_rate) - 1.0) / gamma
}

/// `log2(1 + P Γ / σ_w²)`.
pub fn achieved_rate(power: f64, gamma: f64, noise: f64) -> f64 {
    if power == 0.0 || gamma == 0.0 {
        return 0.0;
    }
    (power * gamma / noise).ln_1p() / std::f64::consts::LN_2
}

/// Selection and power allocation produced by a solver.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionResult {
    /// `s_k`.
    pub selected: Vec<bool>,
    /// `P_k` in mW, zero for unselected UEs.
    pub power: Vec<f64>,
    /// Achieved rates, zero for unselected UEs.
    pub rates: Vec<f64>,
    /// Estimated interference at each PU (left-hand side of the interference constraints).
    pub est_interference: [f64; 2],
    pub admitted: usize,
}

impl AdmissionResult {
    /// Assembles a result, zeroing the power of unselected UEs.
    pub fn new(problem: &AdmissionProblem, selected: Vec<bool>, mut power: Vec<f64>) -> Self {
        for (p, s) in power.iter_mut().zip(&selected) {
            if !*s {
                *p = 0.0;
            }
        }
        let noise = problem.constraints.noise;
        let rates = power
            .iter()
            .zip(&problem.gamma)
            .map(|(p, g)| achieved_rate(*p, *g, noise))
            .collect();
        let est_interference = [
            problem.estimated_interference(0, &selected, &power),
            problem.estimated_interference(1, &selected, &power),
        ];
        let admitted = selected.iter().filter(|s| **s).count();
        Self {
            selected,
            power,
            rates,
            est_interference,
            admitted,
        }
    }

    pub fn empty(problem: &AdmissionProblem) -> Self {
        let k = problem.num_ues();
        Self::new(problem, vec![false; k], vec![0.0; k])
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Checks every constraint of the selection problem.
    ///
    /// Rates get [`CERTIFY_TOLERANCE`] of slack; budgets get the same tolerance
    /// relative to their size (at least 1), since an exact split of a 1e10 mW
    /// budget is already off by an ulp of about 2e-6.
    pub fn certify(&self, problem: &AdmissionProblem) -> std::result::Result<(), String> {
        let c = &problem.constraints;
        for k in 0..problem.num_ues() {
            if !self.selected[k] && self.power[k] != 0.0 {
                return Err(format!("UE {k} unselected with power {}", self.power[k]));
            }
            if self.selected[k] && self.rates[k] < c.min_rate - CERTIFY_TOLERANCE {
                return Err(format!("UE {k} rate {} below {}", self.rates[k], c.min_rate));
            }
        }
        let slack = |bound: f64| CERTIFY_TOLERANCE * bound.abs().max(1.0);
        if self.total_power() > c.total_power + slack(c.total_power) {
            return Err(format!("total power {} exceeds {}", self.total_power(), c.total_power));
        }
        for (j, value) in self.est_interference.iter().enumerate() {
            if *value > c.interference + slack(c.interference) {
                return Err(format!("PU-{} interference {value} exceeds {}", j + 1, c.interference));
            }
        }
        if self.admitted != self.selected.iter().filter(|s| **s).count() {
            return Err("admitted count disagrees with selection".into());
        }
        Ok(())
    }
}

/// Which selection algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    EqualPower,
    EqualRate,
    Ilp,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::EqualPower, Solver::EqualRate, Solver::Ilp];

    pub fn name(self) -> &'static str {
        match self {
            Solver::EqualPower => "equal_power",
            Solver::EqualRate => "equal_rate",
            Solver::Ilp => "ilp",
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Knobs shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverOptions {
    /// Re-split `P⁰` among equal-power survivors after interference drops.
    pub redistribute_equal_power: bool,
    pub ilp: IlpOptions,
}

/// Runs `solver` on `problem`.
pub fn solve(solver: Solver, problem: &AdmissionProblem, options: &SolverOptions) -> Result<AdmissionResult> {
    match solver {
        Solver::EqualPower => Ok(equal_power_allocate_with(problem, options.redistribute_equal_power)),
        Solver::EqualRate => Ok(equal_rate_allocate(problem)),
        Solver::Ilp => ilp_admit_with(problem, &options.ilp),
    }
}
