//! Flat `key = value` scenario configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Sweep dimensions (`mu_d`,
//! `num_pilots`, `num_uts`, `allocation`, `estimator`) accept comma lists.
//! Unknown or repeated keys are errors.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::channel::{ArrayGeometry, OfdmGrid};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::pilots::GreedyOrder;
use crate::satgeo::{LinkBudget, OrbitParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AllocationKind {
    Greedy,
    Random,
}

impl AllocationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Greedy => "greedy",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for AllocationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AllocationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "greedy" => Ok(Self::Greedy),
            "random" => Ok(Self::Random),
            other => Err(Error::Config(format!("unknown allocation '{other}'"))),
        }
    }
}

fn order_str(o: GreedyOrder) -> &'static str {
    match o {
        GreedyOrder::Index => "index",
        GreedyOrder::DescendingBeta => "beta",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
    pub fc_ghz: f64,
    pub bandwidth_mhz: f64,
    pub noise_temp_k: f64,
    pub g_sat_dbi: f64,
    pub g_ut_dbi: f64,
    pub iono_loss_db: f64,
    pub shadow_sigma_db: f64,
    pub theta_max_deg: f64,

    pub mx: usize,
    pub my: usize,
    pub dx_lambda: f64,
    pub dy_lambda: f64,
    pub nc: usize,
    pub np: usize,
    pub rp: usize,
    pub ng: usize,
    pub delta_f_khz: f64,
    pub mu_d: Vec<usize>,
    /// Exponential PDP decay constant in base-grid taps (`1/(N_p Δf)` units).
    pub pdp_decay_taps: f64,
    pub q_per_tap: usize,

    pub num_pilots: Vec<usize>,
    pub zc_root: usize,
    pub allocation: Vec<AllocationKind>,
    pub greedy_order: GreedyOrder,

    pub estimator: Vec<EstimatorKind>,

    pub num_uts: Vec<usize>,
    pub p_dbw_min: f64,
    pub p_dbw_max: f64,
    pub p_dbw_step: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// Desk-scale scenario: 8×8 array, 48 UTs, 14 pilots, nominal physics and OFDM numerology.
    fn default() -> Self {
        Self {
            earth_radius_km: 6378.0,
            altitude_km: 1000.0,
            fc_ghz: 2.0,
            bandwidth_mhz: 20.0,
            noise_temp_k: 290.0,
            g_sat_dbi: 7.0,
            g_ut_dbi: 0.0,
            iono_loss_db: 2.0,
            shadow_sigma_db: 0.0,
            theta_max_deg: 30.0,
            mx: 8,
            my: 8,
            dx_lambda: 1.0,
            dy_lambda: 1.0,
            nc: 512,
            np: 128,
            rp: 0,
            ng: 36,
            delta_f_khz: 60.0,
            mu_d: vec![2],
            pdp_decay_taps: 2.0,
            q_per_tap: 1,
            num_pilots: vec![14],
            zc_root: 1,
            allocation: vec![AllocationKind::Greedy],
            greedy_order: GreedyOrder::Index,
            estimator: vec![EstimatorKind::Tsce, EstimatorKind::Mmse],
            num_uts: vec![48],
            p_dbw_min: 0.0,
            p_dbw_max: 20.0,
            p_dbw_step: 5.0,
            trials: 100,
            seed: 1,
        }
    }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value.split(',').map(|v| scalar(key, v)).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("'{key}' needs at least one value")));
    }
    Ok(items)
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ScenarioConfig {
    /// Full scale: 12×12 array and 500 UTs.
    pub fn full_scale() -> Self {
        Self { mx: 12, my: 12, num_uts: vec![500], ..Self::default() }
    }

    /// Parses a config file body on top of the desk-scale defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            cfg.set(key, value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "earth_radius_km" => self.earth_radius_km = scalar(key, v)?,
            "altitude_km" => self.altitude_km = scalar(key, v)?,
            "fc_ghz" => self.fc_ghz = scalar(key, v)?,
            "bandwidth_mhz" => self.bandwidth_mhz = scalar(key, v)?,
            "noise_temp_k" => self.noise_temp_k = scalar(key, v)?,
            "g_sat_dbi" => self.g_sat_dbi = scalar(key, v)?,
            "g_ut_dbi" => self.g_ut_dbi = scalar(key, v)?,
            "iono_loss_db" => self.iono_loss_db = scalar(key, v)?,
            "shadow_sigma_db" => self.shadow_sigma_db = scalar(key, v)?,
            "theta_max_deg" => self.theta_max_deg = scalar(key, v)?,
            "mx" => self.mx = scalar(key, v)?,
            "my" => self.my = scalar(key, v)?,
            "dx_lambda" => self.dx_lambda = scalar(key, v)?,
            "dy_lambda" => self.dy_lambda = scalar(key, v)?,
            "nc" => self.nc = scalar(key, v)?,
            "np" => self.np = scalar(key, v)?,
            "rp" => self.rp = scalar(key, v)?,
            "ng" => self.ng = scalar(key, v)?,
            "delta_f_khz" => self.delta_f_khz = scalar(key, v)?,
            "mu_d" => self.mu_d = list(key, v)?,
            "pdp_decay_taps" => self.pdp_decay_taps = scalar(key, v)?,
            "q_per_tap" => self.q_per_tap = scalar(key, v)?,
            "num_pilots" => self.num_pilots = list(key, v)?,
            "zc_root" => self.zc_root = scalar(key, v)?,
            "allocation" => self.allocation = list(key, v)?,
            "greedy_order" => {
                self.greedy_order = match v.trim() {
                    "index" => GreedyOrder::Index,
                    "beta" => GreedyOrder::DescendingBeta,
                    other => return Err(Error::Config(format!("unknown greedy_order '{other}'"))),
                }
            }
            "estimator" => self.estimator = list(key, v)?,
            "num_uts" => self.num_uts = list(key, v)?,
            "p_dbw_min" => self.p_dbw_min = scalar(key, v)?,
            "p_dbw_max" => self.p_dbw_max = scalar(key, v)?,
            "p_dbw_step" => self.p_dbw_step = scalar(key, v)?,
            "trials" => self.trials = scalar(key, v)?,
            "seed" => self.seed = scalar(key, v)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Serializes every key; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let pairs: Vec<(&str, String)> = vec![
            ("earth_radius_km", self.earth_radius_km.to_string()),
            ("altitude_km", self.altitude_km.to_string()),
            ("fc_ghz", self.fc_ghz.to_string()),
            ("bandwidth_mhz", self.bandwidth_mhz.to_string()),
            ("noise_temp_k", self.noise_temp_k.to_string()),
            ("g_sat_dbi", self.g_sat_dbi.to_string()),
            ("g_ut_dbi", self.g_ut_dbi.to_string()),
            ("iono_loss_db", self.iono_loss_db.to_string()),
            ("shadow_sigma_db", self.shadow_sigma_db.to_string()),
            ("theta_max_deg", self.theta_max_deg.to_string()),
            ("mx", self.mx.to_string()),
            ("my", self.my.to_string()),
            ("dx_lambda", self.dx_lambda.to_string()),
            ("dy_lambda", self.dy_lambda.to_string()),
            ("nc", self.nc.to_string()),
            ("np", self.np.to_string()),
            ("rp", self.rp.to_string()),
            ("ng", self.ng.to_string()),
            ("delta_f_khz", self.delta_f_khz.to_string()),
            ("mu_d", join(&self.mu_d)),
            ("pdp_decay_taps", self.pdp_decay_taps.to_string()),
            ("q_per_tap", self.q_per_tap.to_string()),
            ("num_pilots", join(&self.num_pilots)),
            ("zc_root", self.zc_root.to_string()),
            ("allocation", join(&self.allocation)),
            ("greedy_order", order_str(self.greedy_order).to_string()),
            ("estimator", join(&self.estimator)),
            ("num_uts", join(&self.num_uts)),
            ("p_dbw_min", self.p_dbw_min.to_string()),
            ("p_dbw_max", self.p_dbw_max.to_string()),
            ("p_dbw_step", self.p_dbw_step.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.link_budget().validate()?;
        self.orbit()?;
        if !(self.theta_max_deg > 0.0 && self.theta_max_deg < 90.0) {
            return Err(Error::Config("theta_max_deg must lie in (0, 90)".into()));
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return Err(Error::Config("shadow_sigma_db must be nonnegative".into()));
        }
        self.array()?;
        self.ofdm()?;
        if self.mu_d.contains(&0) || self.num_pilots.contains(&0) || self.num_uts.contains(&0) {
            return Err(Error::Config("mu_d, num_pilots and num_uts must be positive".into()));
        }
        if !(self.pdp_decay_taps > 0.0) || self.q_per_tap == 0 {
            return Err(Error::Config("pdp_decay_taps and q_per_tap must be positive".into()));
        }
        if self.estimator.is_empty() || self.allocation.is_empty() {
            return Err(Error::Config("at least one estimator and allocation required".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.p_dbw_max >= self.p_dbw_min) || !(self.p_dbw_step > 0.0 || self.p_dbw_max == self.p_dbw_min) {
            return Err(Error::Config("empty transmit-power range".into()));
        }
        Ok(())
    }

    /// Transmit powers in dBW, inclusive of both ends.
    pub fn p_grid(&self) -> Vec<f64> {
        if self.p_dbw_max == self.p_dbw_min || !(self.p_dbw_step > 0.0) {
            return vec![self.p_dbw_min];
        }
        let n = ((self.p_dbw_max - self.p_dbw_min) / self.p_dbw_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.p_dbw_min + i as f64 * self.p_dbw_step).collect()
    }

    pub fn link_budget(&self) -> LinkBudget {
        LinkBudget {
            tx_power_w: 1.0,
            noise_temp_k: self.noise_temp_k,
            bandwidth_hz: self.bandwidth_mhz * 1e6,
            num_subcarriers: self.nc,
            sat_gain_dbi: self.g_sat_dbi,
            ut_gain_dbi: self.g_ut_dbi,
            iono_loss_db: self.iono_loss_db,
            carrier_hz: self.fc_ghz * 1e9,
        }
    }

    pub fn orbit(&self) -> Result<OrbitParams> {
        OrbitParams::new(self.earth_radius_km, self.altitude_km)
    }

    pub fn array(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.mx, self.my, self.dx_lambda, self.dy_lambda)
    }

    pub fn ofdm(&self) -> Result<OfdmGrid> {
        OfdmGrid::new(self.nc, self.np, self.rp, self.ng, self.delta_f_khz * 1e3)
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max_deg.to_radians()
    }
}
