//! Nullsteering transceiver beamformers.
//!
//! Each UE gets a receive beam that nulls the two (estimated) PU arrival
//! directions and a transmit beam at the base station that nulls the
//! estimated PU directions and every other UE. Both are the normalized
//! projection of the target steering vector onto the orthogonal complement
//! of the null span, which is the unit vector maximizing `|target^H w|` under
//! the null constraints.

use nalgebra::{DMatrix, DVector};

use crate::array::{channel_matrix, steering_unchecked, ChannelSet};
use crate::basis::{quadratic_form, InterferenceBasis};
use crate::estimation::ChannelEstimate;
use crate::{Error, Result, C64};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A target whose residual after projection is below this fraction of its norm is infeasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;

/// Orthonormal basis of the span of a set of null directions.
#[derive(Debug, Clone)]
pub struct NullSpace {
    basis: DMatrix<C64>,
}

impl NullSpace {
    /// Orthonormalizes `nulls`, dropping directions that are numerically dependent.
    pub fn new(dim: usize, nulls: &[DVector<C64>]) -> Result<Self> {
        if let Some(bad) = nulls.iter().find(|n| n.len() != dim) {
            return Err(Error::domain(format!(
                "null direction has {} entries, expected {dim}",
                bad.len()
            )));
        }
        if nulls.len() >= dim {
            return Err(Error::domain(format!(
                "{} nulls leave no degrees of freedom in dimension {dim}",
                nulls.len()
            )));
        }
        if nulls.is_empty() {
            return Ok(Self {
                basis: DMatrix::zeros(dim, 0),
            });
        }
        let a = DMatrix::from_columns(nulls);
        let svd = a.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let sigma_max = svd.singular_values.max();
        let keep: Vec<usize> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > RANK_TOLERANCE * sigma_max)
            .map(|(i, _)| i)
            .collect();
        let basis = DMatrix::from_fn(dim, keep.len(), |r, c| u[(r, keep[c])]);
        Ok(Self { basis })
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `(I - P) x`.
    pub fn reject(&self, x: &DVector<C64>) -> DVector<C64> {
        if self.rank() == 0 {
            return x.clone();
        }
        x - &self.basis * (self.basis.adjoint() * x)
    }

    /// The orthogonal projector `P` onto the null span.
    pub fn projector(&self) -> DMatrix<C64> {
        &self.basis * self.basis.adjoint()
    }
}

/// Unit vector along `(I - P) target`, where `P` projects onto `span(nulls)`.
pub fn nullsteer(target: &DVector<C64>, nulls: &[DVector<C64>]) -> Result<DVector<C64>> {
    let space = NullSpace::new(target.len(), nulls)?;
    let residual = space.reject(target);
    let norm = residual.norm();
    let threshold = FEASIBILITY_TOLERANCE * target.norm();
    if norm.is_nan() || norm < threshold || norm == 0.0 {
        return Err(Error::InfeasibleBeam {
            residual: norm,
            threshold,
        });
    }
    // a second pass removes the rounding left by the first when the target
    // lies close to the null span
    let refined = space.reject(&residual.unscale(norm));
    Ok(refined.normalize())
}

/// Receive beam of one UE: maximize the gain towards the BS while nulling both PUs.
pub fn rx_beamformer(ue_antennas: usize, bs_phi: f64, pu_phi_hat: [f64; 2]) -> Result<DVector<C64>> {
    let mut nulls = vec![steering_unchecked(ue_antennas, pu_phi_hat[0])];
    if pu_phi_hat[1] != pu_phi_hat[0] {
        nulls.push(steering_unchecked(ue_antennas, pu_phi_hat[1]));
    }
    nullsteer(&steering_unchecked(ue_antennas, bs_phi), &nulls)
}

/// Receive beams for every UE; an infeasible UE is reported as `Err`.
pub fn rx_beamformers(
    channels: &ChannelSet,
    estimates: &ChannelEstimate,
    ue_antennas: usize,
) -> Vec<Result<DVector<C64>>> {
    channels
        .ss
        .iter()
        .enumerate()
        .map(|(k, link)| {
            rx_beamformer(
                ue_antennas,
                link.phi,
                [estimates.ps_phi_hat[0][k], estimates.ps_phi_hat[1][k]],
            )
        })
        .collect()
}

/// Transmit beam for UE `k`, nulling every other UE in `ue_phi` and each of `pu_phi_hat`.
pub fn tx_beamformer(bs_antennas: usize, k: usize, ue_phi: &[f64], pu_phi_hat: &[f64]) -> Result<DVector<C64>> {
    let nulls: Vec<_> = pu_phi_hat
        .iter()
        .chain(ue_phi.iter().enumerate().filter(|(l, _)| *l != k).map(|(_, phi)| phi))
        .map(|phi| steering_unchecked(bs_antennas, *phi))
        .collect();
    nullsteer(&steering_unchecked(bs_antennas, ue_phi[k]), &nulls)
}

/// Transmit beams for every UE using the estimated PU angles and true UE angles.
pub fn tx_beamformers(
    channels: &ChannelSet,
    estimates: &ChannelEstimate,
    bs_antennas: usize,
) -> Vec<Result<DVector<C64>>> {
    let ue_phi: Vec<f64> = channels.ss.iter().map(|l| l.phi).collect();
    (0..ue_phi.len())
        .map(|k| tx_beamformer(bs_antennas, k, &ue_phi, &estimates.sp_phi_hat))
        .collect()
}

/// Beams and the scalar coefficients the admission step works with.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    /// Transmit beams, zero for unservable UEs.
    pub v: Vec<DVector<C64>>,
    /// Receive beams, zero for unservable UEs.
    pub u: Vec<DVector<C64>>,
    /// Effective gains `Γ_k = |u_k^H H_k v_k|²`.
    pub gamma: Vec<f64>,
    /// Interference coefficients `g[j][k] = v_k^H F_j v_k`.
    pub g: [Vec<f64>; 2],
}

impl BeamformerSet {
    pub fn num_ues(&self) -> usize {
        self.v.len()
    }

    pub fn is_servable(&self, k: usize) -> bool {
        self.gamma[k] > 0.0
    }
}

/// `|u^H H v|²` with the full channel matrix.
pub fn gain_bilinear(h: &DMatrix<C64>, u: &DVector<C64>, v: &DVector<C64>) -> f64 {
    u.dotc(&(h * v)).norm_sqr()
}

/// `α² |u^H a_u(φ)|² |a_b(φ)^H v|²`, the same gain through the rank-one factorization.
pub fn gain_factored(alpha: f64, phi: f64, u: &DVector<C64>, v: &DVector<C64>) -> f64 {
    let rx = steering_unchecked(u.len(), phi).dotc(u).norm_sqr();
    let tx = steering_unchecked(v.len(), phi).dotc(v).norm_sqr();
    alpha * alpha * rx * tx
}

/// Effective gains and interference coefficients for given beams.
///
/// Returns `(Γ, [g_1, g_2])`.
pub fn effective_gains(
    channels: &ChannelSet,
    v: &[DVector<C64>],
    u: &[DVector<C64>],
    bases: &[InterferenceBasis; 2],
) -> Result<(Vec<f64>, [Vec<f64>; 2])> {
    let mut gamma = Vec::with_capacity(v.len());
    for ((link, vk), uk) in channels.ss.iter().zip(v).zip(u) {
        let factored = gain_factored(link.alpha, link.phi, uk, vk);
        debug_assert!({
            let bilinear = gain_bilinear(&channel_matrix(link, uk.len(), vk.len()), uk, vk);
            // absolute floor at the scale of a fully aligned beam pair
            let scale = link.alpha * link.alpha * (uk.len() * vk.len()) as f64;
            (bilinear - factored).abs() <= 1e-9 * bilinear.max(factored) + 1e-12 * scale
        });
        gamma.push(factored);
    }
    let g1 = v
        .iter()
        .map(|vk| quadratic_form(&bases[0], vk))
        .collect::<Result<Vec<_>>>()?;
    let g2 = v
        .iter()
        .map(|vk| quadratic_form(&bases[1], vk))
        .collect::<Result<Vec<_>>>()?;
    // tiny negative round-off on deep nulls
    let clamp = |g: Vec<f64>| g.into_iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
    Ok((gamma, [clamp(g1), clamp(g2)]))
}

/// Steps 1 and 2 for every UE: receive beams, transmit beams, then gains.
///
/// A UE whose receive or transmit target falls inside its null span gets
/// zero beams and `Γ_k = 0`; the admission step drops it.
pub fn design_beamformers(
    channels: &ChannelSet,
    estimates: &ChannelEstimate,
    bases: &[InterferenceBasis; 2],
    bs_antennas: usize,
    ue_antennas: usize,
) -> Result<BeamformerSet> {
    let rx = rx_beamformers(channels, estimates, ue_antennas);
    let tx = tx_beamformers(channels, estimates, bs_antennas);
    let mut v = Vec::with_capacity(rx.len());
    let mut u = Vec::with_capacity(rx.len());
    for (rk, tk) in rx.into_iter().zip(tx) {
        match (rk, tk) {
            (Ok(uk), Ok(vk)) => {
                u.push(uk);
                v.push(vk);
            }
            (Err(Error::InfeasibleBeam { .. }), _) | (_, Err(Error::InfeasibleBeam { .. })) => {
                u.push(DVector::zeros(ue_antennas));
                v.push(DVector::zeros(bs_antennas));
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let (gamma, g) = effective_gains(channels, &v, &u, bases)?;
    Ok(BeamformerSet { v, u, gamma, g })
}
