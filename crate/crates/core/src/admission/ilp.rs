//! Exact 0-1 admission.
//!
//! With every UE's power pinned to the minimum that reaches `R⁰`, admission
//! becomes a 0-1 program with three knapsack rows (total power and the two
//! PU interference budgets) and a cardinality objective. Among maximum-count
//! selections the one with the least total power wins, then the one that
//! prefers lower UE indices (lexicographically largest `s`).
//!
//! Both strategies walk the same depth-first tree in index order, trying
//! `s_k = 1` before `s_k = 0`, and accumulate sums in index order, so they
//! return bit-identical results. The exhaustive walk only prunes subtrees
//! that are already infeasible; branch-and-bound also prunes on an upper
//! bound of the reachable count.

use super::{required_power, AdmissionProblem, AdmissionResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlpStrategy {
    /// Exhaustive up to `exhaustive_limit` UEs, branch-and-bound above.
    Auto,
    Exhaustive,
    BranchAndBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpOptions {
    pub strategy: IlpStrategy,
    /// Largest K solved by enumeration under [`IlpStrategy::Auto`].
    pub exhaustive_limit: usize,
    /// When false, K above `exhaustive_limit` is a capacity error.
    pub branch_and_bound: bool,
}

impl Default for IlpOptions {
    fn default() -> Self {
        Self {
            strategy: IlpStrategy::Auto,
            exhaustive_limit: 20,
            branch_and_bound: true,
        }
    }
}

/// Exact admission with default options.
pub fn ilp_admit(problem: &AdmissionProblem) -> Result<AdmissionResult> {
    ilp_admit_with(problem, &IlpOptions::default())
}

pub fn ilp_admit_with(problem: &AdmissionProblem, options: &IlpOptions) -> Result<AdmissionResult> {
    let k = problem.num_ues();
    let use_bound = match options.strategy {
        IlpStrategy::Exhaustive => false,
        IlpStrategy::BranchAndBound => true,
        IlpStrategy::Auto if k <= options.exhaustive_limit => false,
        IlpStrategy::Auto if options.branch_and_bound => true,
        IlpStrategy::Auto => {
            return Err(Error::Capacity {
                k,
                limit: options.exhaustive_limit,
            })
        }
    };
    let power: Vec<f64> = problem
        .gamma
        .iter()
        .map(|g| required_power(*g, &problem.constraints))
        .collect();
    let mut search = Search::new(problem, &power, use_bound);
    search.run();
    let selected = search.best_selection;
    Ok(AdmissionResult::new(problem, selected, power))
}

struct Search<'a> {
    problem: &'a AdmissionProblem,
    /// Per-UE weights on the three rows: power, P·g_1, P·g_2.
    weights: Vec<[f64; 3]>,
    /// Whether the UE can be selected on its own.
    usable: Vec<bool>,
    use_bound: bool,
    /// For each suffix start, the usable weights of that suffix sorted ascending per row.
    suffix_sorted: Vec<[Vec<f64>; 3]>,
    current: Vec<bool>,
    best_selection: Vec<bool>,
    best_count: usize,
    best_power: f64,
}

impl<'a> Search<'a> {
    fn new(problem: &'a AdmissionProblem, power: &[f64], use_bound: bool) -> Self {
        let k = problem.num_ues();
        let weights: Vec<[f64; 3]> = (0..k)
            .map(|i| {
                if power[i].is_finite() {
                    [power[i], power[i] * problem.g[0][i], power[i] * problem.g[1][i]]
                } else {
                    [f64::INFINITY; 3]
                }
            })
            .collect();
        let mut search = Self {
            problem,
            weights,
            usable: vec![false; k],
            use_bound,
            suffix_sorted: Vec::new(),
            current: vec![false; k],
            best_selection: vec![false; k],
            best_count: 0,
            best_power: 0.0,
        };
        search.usable = (0..k)
            .map(|i| search.weights[i][0].is_finite() && search.feasible(&[0.0; 3], i).is_some())
            .collect();
        if use_bound {
            search.suffix_sorted = (0..=k)
                .map(|start| {
                    std::array::from_fn(|row| {
                        let mut w: Vec<f64> = (start..k)
                            .filter(|&i| search.usable[i])
                            .map(|i| search.weights[i][row])
                            .collect();
                        w.sort_by(f64::total_cmp);
                        w
                    })
                })
                .collect();
        }
        search
    }

    /// Row sums after adding UE `i`, if every row stays within budget.
    fn feasible(&self, sums: &[f64; 3], i: usize) -> Option<[f64; 3]> {
        let w = &self.weights[i];
        let next = [sums[0] + w[0], sums[1] + w[1], sums[2] + w[2]];
        let c = &self.problem.constraints;
        let ok = next[0] <= c.total_power
            && self.problem.alpha_hat_sq[0] * next[1] <= c.interference
            && self.problem.alpha_hat_sq[1] * next[2] <= c.interference;
        ok.then_some(next)
    }

    /// Most UEs from `start..` that could still fit, row by row.
    fn count_bound(&self, start: usize, sums: &[f64; 3]) -> usize {
        let c = &self.problem.constraints;
        let budgets = [
            c.total_power - sums[0],
            c.interference / self.problem.alpha_hat_sq[0] - sums[1],
            c.interference / self.problem.alpha_hat_sq[1] - sums[2],
        ];
        (0..3)
            .map(|row| {
                let mut left = budgets[row];
                let mut n = 0;
                for w in &self.suffix_sorted[start][row] {
                    left -= w;
                    // relaxed by a hair so rounding never undercounts
                    if left < -1e-9 * budgets[row].abs().max(1.0) {
                        break;
                    }
                    n += 1;
                }
                n
            })
            .min()
            .unwrap_or(0)
    }

    fn run(&mut self) {
        let k = self.problem.num_ues();
        self.visit(0, 0, [0.0; 3]);
        debug_assert_eq!(self.best_selection.len(), k);
    }

    fn visit(&mut self, index: usize, count: usize, sums: [f64; 3]) {
        let k = self.problem.num_ues();
        if index == k {
            if count > self.best_count || (count == self.best_count && sums[0] < self.best_power) {
                self.best_count = count;
                self.best_power = sums[0];
                self.best_selection.copy_from_slice(&self.current);
            }
            return;
        }
        if self.use_bound {
            let reachable = count + self.count_bound(index, &sums);
            if reachable < self.best_count
                || (reachable == self.best_count && sums[0] >= self.best_power && self.best_count > 0)
            {
                return;
            }
        }
        if self.usable[index] {
            if let Some(next) = self.feasible(&sums, index) {
                self.current[index] = true;
                self.visit(index + 1, count + 1, next);
                self.current[index] = false;
            }
        }
        self.visit(index + 1, count, sums);
    }
}
