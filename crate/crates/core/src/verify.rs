//! Independent cross-checks of the numerical building blocks.
//!
//! Each check pairs a production routine with a second route to the same
//! answer: quadrature for the closed-form interference matrix, random
//! feasible beams for nullsteering optimality, and plain bitmask enumeration
//! for the exact admission solver. The `underlay oracle` command and the
//! acceptance tests both run them.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admission::{ilp_admit, required_power, AdmissionProblem, ConstraintSet};
use crate::basis::{interference_basis, interference_basis_quadrature};
use crate::beamforming::nullsteer;
use crate::C64;

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Best selection by enumerating every subset.
///
/// Maximizes the count, then minimizes total power, then prefers the
/// lexicographically largest selection vector. Sums run in index order.
pub fn exhaustive_admission(problem: &AdmissionProblem) -> Vec<bool> {
    let k = problem.num_ues();
    assert!(k < 31, "exhaustive oracle limited to small K");
    let c = &problem.constraints;
    let power: Vec<f64> = problem.gamma.iter().map(|g| required_power(*g, c)).collect();
    let mut best = vec![false; k];
    let mut best_count = 0;
    let mut best_power = 0.0;
    for mask in 0u32..(1 << k) {
        let selected: Vec<bool> = (0..k).map(|i| mask & (1 << (k - 1 - i)) != 0).collect();
        if (0..k).any(|i| selected[i] && !power[i].is_finite()) {
            continue;
        }
        let (mut total, mut i1, mut i2) = (0.0, 0.0, 0.0);
        for i in (0..k).filter(|&i| selected[i]) {
            total += power[i];
            i1 += power[i] * problem.g[0][i];
            i2 += power[i] * problem.g[1][i];
        }
        let feasible = total <= c.total_power
            && problem.alpha_hat_sq[0] * i1 <= c.interference
            && problem.alpha_hat_sq[1] * i2 <= c.interference;
        if !feasible {
            continue;
        }
        let count = selected.iter().filter(|s| **s).count();
        let better = count > best_count
            || (count == best_count && total < best_power)
            || (count == best_count && total == best_power && selected > best);
        if better {
            best = selected;
            best_count = count;
            best_power = total;
        }
    }
    best
}

/// Random admission instance whose constraints bind to varying degrees.
pub fn random_problem<R: Rng + ?Sized>(rng: &mut R, k: usize) -> AdmissionProblem {
    let gamma: Vec<f64> = (0..k)
        .map(|_| {
            if rng.random_bool(0.05) {
                0.0
            } else {
                10f64.powf(rng.random_range(-3.0..1.0))
            }
        })
        .collect();
    let g = [
        (0..k).map(|_| 10f64.powf(rng.random_range(-4.0..0.0))).collect(),
        (0..k).map(|_| 10f64.powf(rng.random_range(-4.0..0.0))).collect(),
    ];
    let constraints = ConstraintSet {
        total_power: 10f64.powf(rng.random_range(0.0..4.0)),
        interference: 10f64.powf(rng.random_range(-3.0..1.0)),
        min_rate: rng.random_range(0.5..3.0),
        noise: 1.0,
    };
    AdmissionProblem {
        gamma,
        g,
        alpha_hat_sq: [rng.random_range(0.01..1.0), rng.random_range(0.01..1.0)],
        constraints,
        ue_phi: (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
        pu_phi_hat: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
    }
}

fn random_complex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Random unit vector orthogonal to every null, by two passes of classical Gram-Schmidt.
pub fn random_feasible_unit<R: Rng + ?Sized>(rng: &mut R, nulls: &[DVector<C64>]) -> DVector<C64> {
    let dim = nulls.first().map(|n| n.len()).expect("at least one null");
    let mut ortho: Vec<DVector<C64>> = Vec::new();
    for n in nulls {
        let mut q = n.clone();
        for _ in 0..2 {
            for e in &ortho {
                q -= e * e.dotc(&q);
            }
        }
        let norm = q.norm();
        if norm > 1e-10 * n.norm() {
            ortho.push(q.unscale(norm));
        }
    }
    let mut x = random_complex(rng, dim);
    for _ in 0..2 {
        for e in &ortho {
            x -= e * e.dotc(&x);
        }
    }
    x.normalize()
}

/// Closed-form interference matrices against 64-node quadrature.
pub fn check_interference_basis<R: Rng + ?Sized>(rng: &mut R, cases: usize, sizes: &[usize]) -> OracleCheck {
    let mut worst_diff: f64 = 0.0;
    let mut worst_eig = f64::INFINITY;
    let mut diagonal_ok = true;
    let mut eig_ok = true;
    for _ in 0..cases {
        let m = sizes[rng.random_range(0..sizes.len())];
        let phi = rng.random_range(-1.0..1.0);
        let closed = interference_basis(phi, m).expect("valid size");
        let quad = interference_basis_quadrature(phi, m, 64).expect("valid size");
        let diff = closed
            .matrix
            .iter()
            .zip(quad.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst_diff = worst_diff.max(diff);
        diagonal_ok &= closed.matrix.diagonal().iter().all(|d| *d == C64::new(1.0, 0.0));
        let min_eig = closed.matrix.symmetric_eigenvalues().min();
        worst_eig = worst_eig.min(min_eig / m as f64);
        eig_ok &= min_eig >= -1e-10 * m as f64;
    }
    OracleCheck {
        name: "interference basis vs quadrature",
        passed: worst_diff <= 1e-10 && diagonal_ok && eig_ok,
        detail: format!(
            "{cases} cases, max entry diff {worst_diff:.3e}, unit diagonal {diagonal_ok}, min eigenvalue/M {worst_eig:.3e}"
        ),
    }
}

/// Nullsteering beam against random feasible unit vectors.
pub fn check_nullsteer_optimality<R: Rng + ?Sized>(rng: &mut R, instances: usize, samples: usize) -> OracleCheck {
    let mut violations = 0;
    let mut worst_null: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..instances {
        let dim = rng.random_range(4..=32);
        let count = rng.random_range(1..dim.min(12));
        let target = random_complex(rng, dim);
        let nulls: Vec<_> = (0..count).map(|_| random_complex(rng, dim)).collect();
        let w = match nullsteer(&target, &nulls) {
            Ok(w) => w,
            Err(_) => {
                violations += 1;
                continue;
            }
        };
        for n in &nulls {
            worst_null = worst_null.max(n.dotc(&w).norm() / n.norm());
        }
        let gain = target.dotc(&w).norm();
        for _ in 0..samples {
            let x = random_feasible_unit(rng, &nulls);
            let margin = gain - target.dotc(&x).norm();
            min_margin = min_margin.min(margin);
            if margin < -1e-9 {
                violations += 1;
            }
        }
    }
    OracleCheck {
        name: "nullsteer optimality",
        passed: violations == 0 && worst_null <= 1e-10,
        detail: format!(
            "{instances} instances x {samples} samples, violations {violations}, min margin {min_margin:.3e}, worst null {worst_null:.3e}"
        ),
    }
}

/// Exact admission against subset enumeration.
pub fn check_ilp_exhaustive<R: Rng + ?Sized>(rng: &mut R, instances: usize, max_k: usize) -> OracleCheck {
    let mut mismatches = 0;
    for _ in 0..instances {
        let k = rng.random_range(1..=max_k);
        let problem = random_problem(rng, k);
        let oracle = exhaustive_admission(&problem);
        let result = ilp_admit(&problem).expect("within limits");
        let oracle_count = oracle.iter().filter(|s| **s).count();
        if result.admitted != oracle_count || result.selected != oracle || result.certify(&problem).is_err() {
            mismatches += 1;
        }
    }
    OracleCheck {
        name: "ILP vs exhaustive search",
        passed: mismatches == 0,
        detail: format!("{instances} instances with K <= {max_k}, mismatches {mismatches}"),
    }
}

/// The full oracle suite at the sizes used for release checks.
pub fn run_oracle_suite(seed: u64) -> Vec<OracleCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        check_interference_basis(&mut rng, 50, &[8, 32, 128]),
        check_nullsteer_optimality(&mut rng, 100, 1000),
        check_ilp_exhaustive(&mut rng, 500, 12),
    ]
}
