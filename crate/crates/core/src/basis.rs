//! Interval-averaged interference matrices.
//!
//! When a PU angle is only known up to a grid cell, the power leaked towards
//! it is averaged over `[φ̂ - 1/M_b, φ̂ + 1/M_b]`:
//!
//! ```text
//! F(φ̂) = (M_b / 2) ∫ a(φ) a(φ)^H dφ
//! ```
//!
//! Integrating entry by entry gives a Hermitian Toeplitz matrix
//! `F[m][n] = exp(-jπ(m-n)φ̂) · sinc((m-n)/M_b)` with the normalized sinc.
//! [`interference_basis_quadrature`] evaluates the integral numerically and is
//! what the closed form is checked against.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::array::steering_unchecked;
use crate::{Error, Result, C64};

/// `F(φ̂)` for one primary user.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceBasis {
    pub matrix: DMatrix<C64>,
    pub phi_hat: f64,
    pub antennas: usize,
}

/// Normalized sinc, `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Closed-form `F(φ̂)` for an `antennas`-element array.
pub fn interference_basis(phi_hat: f64, antennas: usize) -> Result<InterferenceBasis> {
    if antennas < 2 {
        return Err(Error::domain("interference basis needs at least two antennas"));
    }
    let m = antennas as f64;
    // one value per non-negative lag; negative lags are conjugates
    let lags: Vec<C64> = (0..antennas)
        .map(|lag| {
            if lag == 0 {
                C64::new(1.0, 0.0)
            } else {
                let l = lag as f64;
                C64::from_polar(sinc(l / m), -PI * l * phi_hat)
            }
        })
        .collect();
    let matrix = DMatrix::from_fn(antennas, antennas, |r, c| {
        if r >= c {
            lags[r - c]
        } else {
            lags[c - r].conj()
        }
    });
    Ok(InterferenceBasis {
        matrix,
        phi_hat,
        antennas,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let n = nodes;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // p1 = P_n(z), p2 = P_{n-1}(z)
            let (mut p1, mut p2) = (1.0, 0.0);
            for k in 1..=n {
                let kf = k as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * kf - 1.0) * z * p2 - (kf - 1.0) * p3) / kf;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `F(φ̂)` by Gauss-Legendre integration of the steering-vector outer product.
///
/// Verification path only; use [`interference_basis`] in the pipeline.
pub fn interference_basis_quadrature(phi_hat: f64, antennas: usize, nodes: usize) -> Result<InterferenceBasis> {
    if antennas < 2 {
        return Err(Error::domain("interference basis needs at least two antennas"));
    }
    if nodes < 16 {
        return Err(Error::domain(format!(
            "quadrature needs at least 16 nodes, got {nodes}"
        )));
    }
    let half_width = 1.0 / antennas as f64;
    let (t, w) = gauss_legendre(nodes);
    let mut matrix = DMatrix::<C64>::zeros(antennas, antennas);
    for (ti, wi) in t.iter().zip(&w) {
        let a = steering_unchecked(antennas, phi_hat + ti * half_width);
        // (M/2) * half_width * w_i = w_i / 2
        matrix += (&a * a.adjoint()) * C64::new(wi / 2.0, 0.0);
    }
    Ok(InterferenceBasis {
        matrix,
        phi_hat,
        antennas,
    })
}

/// `v^H F v`, the interval-averaged power a unit-power beam `v` leaks towards the PU.
pub fn quadratic_form(basis: &InterferenceBasis, v: &DVector<C64>) -> Result<f64> {
    if v.len() != basis.antennas {
        return Err(Error::domain(format!(
            "beam has {} entries, basis is {}x{}",
            v.len(),
            basis.antennas,
            basis.antennas
        )));
    }
    let value = v.dotc(&(&basis.matrix * v));
    debug_assert!(
        value.im.abs() <= 1e-10 * v.norm_squared().max(f64::MIN_POSITIVE),
        "quadratic form has imaginary residue {}",
        value.im
    );
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_entry_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn random_vector(rng: &mut impl Rng, n: usize) -> DVector<C64> {
        DVector::from_fn(n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact up to degree 31
        let integral: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(30)).sum();
        assert!((integral - 2.0 / 31.0).abs() < 1e-14);
        let odd: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(7)).sum();
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn two_element_broadside() {
        let f = interference_basis(0.0, 2).unwrap();
        let q = interference_basis_quadrature(0.0, 2, 64).unwrap();
        let expected = 2.0 / PI;
        assert!((f.matrix[(0, 1)].re - expected).abs() < 1e-15);
        assert!((q.matrix[(0, 1)].re - expected).abs() < 1e-12);
        assert!((q.matrix[(1, 0)].re - std::f64::consts::FRAC_2_PI).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let f = interference_basis(0.25, 8).unwrap();
        let q = interference_basis_quadrature(0.25, 8, 64).unwrap();
        assert!(max_entry_diff(&f.matrix, &q.matrix) < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = [4usize, 8, 16, 32][rng.random_range(0..4)];
            let phi = rng.random_range(-1.0..1.0);
            let f = interference_basis(phi, m).unwrap();
            let q = interference_basis_quadrature(phi, m, 64).unwrap();
            assert!(max_entry_diff(&f.matrix, &q.matrix) < 1e-10, "phi {phi}, M {m}");
        }
    }

    #[test]
    fn quadrature_is_converged_and_hermitian() {
        let a = interference_basis_quadrature(-0.61, 16, 32).unwrap();
        let b = interference_basis_quadrature(-0.61, 16, 64).unwrap();
        assert!(max_entry_diff(&a.matrix, &b.matrix) < 1e-12);
        assert!(max_entry_diff(&a.matrix, &a.matrix.adjoint()) < 1e-14);
    }

    #[test]
    fn structure() {
        let f = interference_basis(0.3, 16).unwrap();
        assert!(f.matrix.diagonal().iter().all(|d| *d == C64::new(1.0, 0.0)));
        assert_eq!(f.matrix.trace(), C64::new(16.0, 0.0));
        assert_eq!(f.matrix, f.matrix.adjoint());
        for r in 1..16 {
            for c in 1..16 {
                assert_eq!(f.matrix[(r, c)], f.matrix[(r - 1, c - 1)]);
            }
        }
    }

    #[test]
    fn too_few_nodes_or_antennas() {
        assert!(interference_basis(0.0, 1).is_err());
        assert!(interference_basis_quadrature(0.0, 8, 8).is_err());
    }

    #[test]
    fn quadratic_form_basics() {
        let f = interference_basis(-0.2, 8).unwrap();
        assert_eq!(quadratic_form(&f, &DVector::zeros(8)).unwrap(), 0.0);
        for i in 0..8 {
            let mut e = DVector::zeros(8);
            e[i] = C64::new(1.0, 0.0);
            assert!((quadratic_form(&f, &e).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(matches!(quadratic_form(&f, &DVector::zeros(7)), Err(Error::Domain(_))));
    }

    #[test]
    fn quadratic_form_is_interval_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (m, phi_hat) = (8, 0.4);
        let f = interference_basis(phi_hat, m).unwrap();
        for _ in 0..5 {
            let v = random_vector(&mut rng, m);
            let exact = quadratic_form(&f, &v).unwrap();
            let samples = 10_000;
            let mc = (0..samples)
                .map(|_| {
                    let phi = phi_hat + rng.random_range(-1.0..1.0) / m as f64;
                    steering_unchecked(m, phi).dotc(&v).norm_sqr()
                })
                .sum::<f64>()
                / samples as f64;
            assert!((mc - exact).abs() < 0.01 * exact, "mc {mc} exact {exact}");
        }
    }
}
