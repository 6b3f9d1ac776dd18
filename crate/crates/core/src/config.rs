//! Physical and algorithmic parameters of one network instance.

use crate::channel::{FadingParams, Geometry};
use crate::error::{Error, Result};
use crate::numerics::{
    DEFAULT_BISECT_TOL, DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL, DEFAULT_GOLDEN_REL_TOL,
};
use crate::Real;

/// `x` dBm in watts.
pub fn dbm_to_watts<T: Real>(x: T) -> T {
    T::lit(10.0).powf((x - T::lit(30.0)) / T::lit(10.0))
}

/// `x` dB as a linear ratio.
pub fn db_to_linear<T: Real>(x: T) -> T {
    T::lit(10.0).powf(x / T::lit(10.0))
}

/// Phase-shifter resolution of the reflecting elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseResolution {
    Continuous,
    /// `2^B` uniformly spaced levels.
    Bits(u8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances<T> {
    pub eigen: T,
    pub eigen_max_iter: usize,
    /// Golden-section tolerance as a fraction of the horizon.
    pub golden_rel: T,
    pub bisect: T,
    /// Relative objective change that stops the MM iteration.
    pub mm: T,
    pub mm_max_iter: usize,
    /// Relative slack allowed by the feasibility audit.
    pub audit: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            eigen: T::lit(DEFAULT_EIGEN_TOL),
            eigen_max_iter: DEFAULT_EIGEN_MAX_ITER,
            golden_rel: T::lit(DEFAULT_GOLDEN_REL_TOL),
            bisect: T::lit(DEFAULT_BISECT_TOL),
            mm: T::lit(1e-8),
            mm_max_iter: 500,
            // Single precision cannot resolve 1e-9 relative.
            audit: T::lit(1e-9).max(T::lit(64.0) * T::epsilon()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T> {
    /// Frame length `T` in seconds.
    pub horizon: T,
    /// Number of reflecting elements.
    pub n_r: usize,
    /// Number of sensors.
    pub k: usize,
    /// Energy station transmit power, watts.
    pub p0: T,
    /// Receiver noise power, watts.
    pub sigma_sq: T,
    /// Energy harvesting efficiency.
    pub eta: T,
    /// Circuit power per reflecting element, watts.
    pub p_c_irs: T,
    /// Circuit power per sensor, watts.
    pub p_ck: T,
    pub resolution: PhaseResolution,
    pub geometry: Geometry<T>,
    pub fading: FadingParams<T>,
    pub tol: Tolerances<T>,
    pub seed: u64,
}

impl<T: Real> SystemConfig<T> {
    /// Parameters of the reference deployment: 1 s frame, 30 elements, six
    /// sensors, 30 dBm source, -100 dBm noise, 80 % harvesting efficiency and
    /// 0.01 mW circuit power everywhere.
    pub fn reference() -> Self {
        let k = 6;
        Self {
            horizon: T::one(),
            n_r: 30,
            k,
            p0: dbm_to_watts(T::lit(30.0)),
            sigma_sq: dbm_to_watts(T::lit(-100.0)),
            eta: T::lit(0.8),
            p_c_irs: T::lit(1e-5),
            p_ck: T::lit(1e-5),
            resolution: PhaseResolution::Continuous,
            geometry: Geometry::reference(k),
            fading: FadingParams::default(),
            tol: Tolerances::default(),
            seed: 1,
        }
    }

    /// Changes the sensor count and regenerates the sensor layout.
    pub fn set_sensor_count(&mut self, k: usize) {
        self.k = k;
        self.geometry.place_sensors(k);
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("horizon", self.horizon),
            ("p0", self.p0),
            ("sigma_sq", self.sigma_sq),
            ("eta", self.eta),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.eta > T::one() {
            return Err(Error::InvalidInput(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        for (name, v) in [("p_c_irs", self.p_c_irs), ("p_ck", self.p_ck)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.n_r == 0 || self.k == 0 {
            return Err(Error::InvalidInput("n_r and k must be at least 1".into()));
        }
        if let PhaseResolution::Bits(b) = self.resolution {
            if !(1..=16).contains(&b) {
                return Err(Error::InvalidInput(format!(
                    "phase bits must be in 1..=16, got {b}"
                )));
            }
        }
        if self.geometry.sensor_positions.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "{} sensor positions for k = {}",
                self.geometry.sensor_positions.len(),
                self.k
            )));
        }
        self.geometry.validate()?;
        self.fading.validate()?;
        let t = &self.tol;
        if !(t.eigen > T::zero()
            && t.golden_rel > T::zero()
            && t.bisect > T::zero()
            && t.mm > T::zero())
        {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}
