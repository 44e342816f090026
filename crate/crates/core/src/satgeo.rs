//! Satellite/UT geometry and the uplink link budget.
//!
//! Space angles are direction-cosine pairs `(ξx, ξy)` seen from the satellite;
//! they live on the disc of radius `sin(θ_max)`.

use rand::Rng;
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Result};

pub const BOLTZMANN: f64 = 1.38e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitParams {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
}

impl OrbitParams {
    pub fn new(earth_radius_km: f64, altitude_km: f64) -> Result<Self> {
        if !(altitude_km > 0.0) || !(earth_radius_km > 0.0) {
            return Err(Error::Parameter(format!(
                "orbit needs positive radius and altitude, got R_e={earth_radius_km} H={altitude_km}"
            )));
        }
        Ok(Self { earth_radius_km, altitude_km })
    }

    pub fn orbit_radius_km(&self) -> f64 {
        self.earth_radius_km + self.altitude_km
    }
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self { earth_radius_km: 6378.0, altitude_km: 1000.0 }
    }
}

/// Paired space angle `(ξx, ξy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpaceAngle {
    pub x: f64,
    pub y: f64,
}

impl SpaceAngle {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn radius_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtGeometry {
    pub space_angle: SpaceAngle,
    /// Nadir angle at the satellite, radians.
    pub nadir: f64,
    /// Elevation angle at the UT, radians.
    pub elevation: f64,
    pub slant_distance_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    pub noise_temp_k: f64,
    pub bandwidth_hz: f64,
    pub num_subcarriers: usize,
    pub sat_gain_dbi: f64,
    pub ut_gain_dbi: f64,
    pub iono_loss_db: f64,
    pub carrier_hz: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tx_power_w, self.noise_temp_k, self.bandwidth_hz, self.carrier_hz];
        if positive.iter().any(|v| !(*v > 0.0)) || self.num_subcarriers == 0 {
            return Err(Error::Parameter(format!("link budget quantities must be positive: {self:?}")));
        }
        Ok(())
    }
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_w: 1.0,
            noise_temp_k: 290.0,
            bandwidth_hz: 20e6,
            num_subcarriers: 512,
            sat_gain_dbi: 7.0,
            ut_gain_dbi: 0.0,
            iono_loss_db: 2.0,
            carrier_hz: 2e9,
        }
    }
}

/// Draws a space angle uniformly on the disc of radius `sin(theta_max)`.
///
/// Polar inverse-CDF sampling: two uniforms per draw, radius `sin(θ_max)·sqrt(u)`.
pub fn sample_space_angle<R: Rng + ?Sized>(rng: &mut R, theta_max: f64) -> Result<SpaceAngle> {
    if !(theta_max > 0.0 && theta_max < FRAC_PI_2) {
        return Err(Error::Domain(format!("theta_max must lie in (0, π/2), got {theta_max}")));
    }
    let u: f64 = rng.random();
    let phi = TAU * rng.random::<f64>();
    let r = theta_max.sin() * u.sqrt();
    Ok(SpaceAngle::new(r * phi.cos(), r * phi.sin()))
}

pub fn ut_geometry(xi: SpaceAngle, orbit: &OrbitParams) -> Result<UtGeometry> {
    let r2 = xi.radius_sqr();
    if !(r2 < 1.0) {
        return Err(Error::Domain(format!("space angle outside the unit disc: {xi:?}")));
    }
    let nadir = (1.0 - r2).sqrt().acos();
    let re = orbit.earth_radius_km;
    let h = orbit.altitude_km;
    let arg = orbit.orbit_radius_km() / re * nadir.sin();
    if arg > 1.0 {
        return Err(Error::BelowHorizon(arg));
    }
    let elevation = arg.acos();
    let se = elevation.sin();
    let slant = (re * re * se * se + h * h + 2.0 * h * re).sqrt() - re * se;
    Ok(UtGeometry { space_angle: xi, nadir, elevation, slant_distance_km: slant })
}

/// `σ² = k_B·T_n·B/N_c`.
pub fn noise_variance(lb: &LinkBudget) -> f64 {
    BOLTZMANN * lb.noise_temp_k * lb.bandwidth_hz / lb.num_subcarriers as f64
}

pub fn fspl_db(distance_km: f64, carrier_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * distance_km * 1e3 * carrier_hz / SPEED_OF_LIGHT).log10()
}

/// Large-scale gain from free-space loss, antenna gains, ionospheric loss and shadowing.
pub fn large_scale_beta(geom: &UtGeometry, lb: &LinkBudget, shadow_db: f64) -> f64 {
    let gain_db =
        lb.sat_gain_dbi + lb.ut_gain_dbi - fspl_db(geom.slant_distance_km, lb.carrier_hz) - lb.iono_loss_db - shadow_db;
    10f64.powf(gain_db / 10.0)
}
