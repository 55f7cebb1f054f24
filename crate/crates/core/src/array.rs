//! Network geometry, uniform linear array steering vectors and line-of-sight
//! channel synthesis.
//!
//! Every array is a half-wavelength uniform linear array laid along the
//! x-axis. The angular sine of a link is `Δx / d`, where `Δ` points from the
//! transmitting side (secondary BS or primary user) to the receiving side
//! (secondary UE or primary user) and `d = |Δ|`. A node straight up the
//! y-axis from the base station is therefore at broadside (`φ = 0`).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Planar node position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Primary-user coordinates used by the reference experiments.
pub const PRESET_PU_POSITIONS: [Position; 2] = [Position::new(20.0, 20.0), Position::new(-30.0, 30.0)];

/// Parameters needed to lay out one network realization.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    /// Side of the square deployment area centered on the base station (meters).
    pub side: f64,
    /// Number of secondary UEs, `K`.
    pub num_ues: usize,
    /// Base station antenna count, `M_b`.
    pub bs_antennas: usize,
    /// UE antenna count, `M_u`.
    pub ue_antennas: usize,
    /// Path-loss exponent `γ`; attenuation is `d^(-γ/2)`.
    pub path_loss_exponent: f64,
    pub pu_positions: [Position; 2],
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl GeometryConfig {
    /// 100 m square, `K = 10`, `M_b = 128`, `M_u = 4`, PUs at `[20, 20]` and `[-30, 30]`.
    pub fn reference() -> Self {
        Self {
            side: 100.0,
            num_ues: 10,
            bs_antennas: 128,
            ue_antennas: 4,
            path_loss_exponent: 2.0,
            pu_positions: PRESET_PU_POSITIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.side.is_finite() && self.side > 0.0) {
            return Err(Error::config("geometry.side", "must be a positive finite length"));
        }
        if self.num_ues == 0 {
            return Err(Error::config("geometry.num_ues", "at least one UE is required"));
        }
        if self.bs_antennas < self.num_ues + 2 {
            return Err(Error::config(
                "geometry.bs_antennas",
                format!(
                    "M_b = {} cannot null {} other UEs plus 2 PUs; need M_b >= K + 2",
                    self.bs_antennas,
                    self.num_ues - 1
                ),
            ));
        }
        if self.ue_antennas < 3 {
            return Err(Error::config(
                "geometry.ue_antennas",
                "M_u must be at least 3 to place two receive nulls",
            ));
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent > 0.0) {
            return Err(Error::config(
                "geometry.path_loss_exponent",
                "must be positive and finite",
            ));
        }
        for (j, pu) in self.pu_positions.iter().enumerate() {
            if !(pu.x.is_finite() && pu.y.is_finite()) {
                return Err(Error::config(
                    format!("geometry.pu{}", j + 1),
                    "coordinates must be finite",
                ));
            }
            if pu.x == 0.0 && pu.y == 0.0 {
                return Err(Error::config(
                    format!("geometry.pu{}", j + 1),
                    "primary user cannot sit on the base station",
                ));
            }
        }
        Ok(())
    }
}

/// Node placement for one trial. The base station is always at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bs: Position,
    pub pus: [Position; 2],
    pub ues: Vec<Position>,
    pub bs_antennas: usize,
    pub ue_antennas: usize,
}

impl Scenario {
    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }
}

/// Draws UE positions uniformly over the square and places BS and PUs.
pub fn make_scenario<R: Rng + ?Sized>(config: &GeometryConfig, rng: &mut R) -> Result<Scenario> {
    config.validate()?;
    let half = config.side / 2.0;
    let ues = (0..config.num_ues)
        .map(|_| Position::new(rng.random_range(-half..half), rng.random_range(-half..half)))
        .collect();
    Ok(Scenario {
        bs: Position::new(0.0, 0.0),
        pus: config.pu_positions,
        ues,
        bs_antennas: config.bs_antennas,
        ue_antennas: config.ue_antennas,
    })
}

/// `a_M(φ)`, entry `m` is `exp(-jπmφ)`.
pub fn steering_vector(antennas: usize, phi: f64) -> Result<DVector<C64>> {
    if antennas == 0 {
        return Err(Error::domain("steering vector needs at least one antenna"));
    }
    if !(-1.0..=1.0).contains(&phi) {
        return Err(Error::domain(format!("angular sine {phi} outside [-1, 1]")));
    }
    Ok(steering_unchecked(antennas, phi))
}

pub(crate) fn steering_unchecked(antennas: usize, phi: f64) -> DVector<C64> {
    DVector::from_iterator(
        antennas,
        (0..antennas).map(|m| C64::from_polar(1.0, -PI * m as f64 * phi)),
    )
}

/// Parameters of one reciprocal LOS link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Amplitude attenuation `α = d^(-γ/2)`.
    pub alpha: f64,
    /// Phase `ψ` in `[0, 2π)`.
    pub psi: f64,
    /// Angular sine `φ` in `[-1, 1]`.
    pub phi: f64,
    pub distance: f64,
}

impl LinkParams {
    /// Builds the link from `from` towards `to` with the given phase.
    pub fn between(from: &Position, to: &Position, gamma: f64, psi: f64) -> Result<Self> {
        let distance = from.distance_to(to);
        if distance.is_nan() || distance <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "nodes at ({}, {}) and ({}, {}) coincide",
                from.x, from.y, to.x, to.y
            )));
        }
        Ok(Self {
            alpha: distance.powf(-gamma / 2.0),
            psi,
            phi: angular_sine(to.x - from.x, distance),
            distance,
        })
    }

    /// Complex gain `β = α e^{jψ}`.
    pub fn beta(&self) -> C64 {
        C64::from_polar(self.alpha, self.psi)
    }
}

/// `Δx / d` clamped onto `[-1, 1]`.
fn angular_sine(dx: f64, distance: f64) -> f64 {
    if dx.abs() >= distance {
        dx.signum()
    } else {
        (dx / distance).clamp(-1.0, 1.0)
    }
}

/// True channel parameters of every link in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS to UE-k.
    pub ss: Vec<LinkParams>,
    /// BS to PU-j.
    pub sp: [LinkParams; 2],
    /// PU-j to UE-k, indexed `ps[j][k]`.
    pub ps: [Vec<LinkParams>; 2],
    pub gamma: f64,
}

/// Synthesizes every link of the scenario. Phases are drawn in the order
/// BS→UE, BS→PU, PU-1→UE, PU-2→UE.
pub fn compute_channels<R: Rng + ?Sized>(scenario: &Scenario, gamma: f64, rng: &mut R) -> Result<ChannelSet> {
    let mut draw_psi = || rng.random_range(0.0..2.0 * PI);
    let ss = scenario
        .ues
        .iter()
        .map(|ue| LinkParams::between(&scenario.bs, ue, gamma, draw_psi()))
        .collect::<Result<Vec<_>>>()?;
    let sp = [
        LinkParams::between(&scenario.bs, &scenario.pus[0], gamma, draw_psi())?,
        LinkParams::between(&scenario.bs, &scenario.pus[1], gamma, draw_psi())?,
    ];
    let mut ps_link = |pu: &Position| {
        scenario
            .ues
            .iter()
            .map(|ue| LinkParams::between(pu, ue, gamma, draw_psi()))
            .collect::<Result<Vec<_>>>()
    };
    let ps = [ps_link(&scenario.pus[0])?, ps_link(&scenario.pus[1])?];
    Ok(ChannelSet { ss, sp, ps, gamma })
}

/// Rank-one LOS channel `β a_rx(φ) a_tx(φ)^H` of size `rx_antennas × tx_antennas`.
pub fn channel_matrix(link: &LinkParams, rx_antennas: usize, tx_antennas: usize) -> DMatrix<C64> {
    let rx = steering_unchecked(rx_antennas, link.phi);
    let tx = steering_unchecked(tx_antennas, link.phi);
    (rx * tx.adjoint()) * link.beta()
}
