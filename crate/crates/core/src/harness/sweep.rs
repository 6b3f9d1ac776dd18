//! Monte Carlo parameter sweeps.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::channel::{synth_channels, ChannelSet};
use crate::config::{dbm_to_watts, PhaseResolution, SystemConfig};
use crate::error::{Error, Result};
use crate::policy::{
    benchmark_no_irs, benchmark_random_phase, benchmark_upper_bound, solve, PolicySolution,
};

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepParam {
    /// Source power in dBm.
    P0Dbm,
    /// Number of reflecting elements.
    NR,
    /// x coordinate of the IRS in meters.
    XIrs,
    /// IRS circuit power per element, watts.
    PcIrs,
    /// Sensor circuit power, watts.
    Pck,
    /// Number of sensors.
    K,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] = [
        Self::P0Dbm,
        Self::NR,
        Self::XIrs,
        Self::PcIrs,
        Self::Pck,
        Self::K,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::P0Dbm => "p0_dbm",
            Self::NR => "n_r",
            Self::XIrs => "x_irs",
            Self::PcIrs => "p_c_irs",
            Self::Pck => "p_ck",
            Self::K => "k",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &SystemConfig<f64>, value: f64) -> Result<SystemConfig<f64>> {
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidInput(format!(
                    "{} must be a positive integer, got {v}",
                    self.name()
                )))
            }
        };
        let mut c = cfg.clone();
        match self {
            Self::P0Dbm => c.p0 = dbm_to_watts(value),
            Self::NR => c.n_r = count(value)?,
            Self::XIrs => c.geometry.irs_pos[0] = value,
            Self::PcIrs => c.p_c_irs = value,
            Self::Pck => c.p_ck = value,
            Self::K => c.set_sensor_count(count(value)?),
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep parameter {s:?}")))
    }
}

/// Policy evaluated in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Proposed policy with continuous phases.
    Lc,
    /// Proposed policy with 1-bit phases.
    LcB1,
    /// Proposed policy with 2-bit phases.
    LcB2,
    RandomPhase,
    NoIrs,
    UpperBound,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Self::Lc,
        Self::LcB1,
        Self::LcB2,
        Self::RandomPhase,
        Self::NoIrs,
        Self::UpperBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lc => "lc",
            Self::LcB1 => "lc-b1",
            Self::LcB2 => "lc-b2",
            Self::RandomPhase => "random-phase",
            Self::NoIrs => "no-irs",
            Self::UpperBound => "upper-bound",
        }
    }

    /// Runs the scheme on one realization. The special or circuit-power
    /// solver is picked by whether `cfg.p_ck` is zero; `seed` drives the
    /// random-phase draw.
    pub fn run(
        self,
        ch: &ChannelSet<f64>,
        cfg: &SystemConfig<f64>,
        seed: u64,
    ) -> Result<PolicySolution<f64>> {
        let with_bits = |r: PhaseResolution| {
            let mut c = cfg.clone();
            c.resolution = r;
            c
        };
        match self {
            Self::Lc => solve(ch, &with_bits(PhaseResolution::Continuous)),
            Self::LcB1 => solve(ch, &with_bits(PhaseResolution::Bits(1))),
            Self::LcB2 => solve(ch, &with_bits(PhaseResolution::Bits(2))),
            Self::RandomPhase => benchmark_random_phase(ch, cfg, seed),
            Self::NoIrs => benchmark_no_irs(ch, cfg),
            Self::UpperBound => benchmark_upper_bound(ch, cfg),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    /// Trial `i` uses channel seed `base_seed + i`.
    pub base_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("sweep needs at least one scheme".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("sweep needs at least one trial".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub param: SweepParam,
    pub value: f64,
    pub scheme: Scheme,
    pub trial: usize,
    pub seed: u64,
    pub throughput_nats: f64,
    pub throughput_bits: f64,
    pub t01: f64,
    pub t02: f64,
    pub tau_sum: f64,
    pub mm_iters: usize,
    pub elapsed_ms: f64,
    /// Solver failure, if any; numeric fields are NaN then.
    pub error: Option<String>,
}

impl ResultRecord {
    fn from_outcome(
        param: SweepParam,
        value: f64,
        scheme: Scheme,
        trial: usize,
        seed: u64,
        outcome: Result<PolicySolution<f64>>,
        elapsed_ms: f64,
    ) -> Self {
        let mut rec = Self {
            param,
            value,
            scheme,
            trial,
            seed,
            throughput_nats: f64::NAN,
            throughput_bits: f64::NAN,
            t01: f64::NAN,
            t02: f64::NAN,
            tau_sum: f64::NAN,
            mm_iters: 0,
            elapsed_ms,
            error: None,
        };
        match outcome {
            Ok(sol) => {
                rec.throughput_nats = sol.sum_throughput_nats;
                rec.throughput_bits = sol.throughput_bits();
                rec.t01 = sol.times.t01;
                rec.t02 = sol.times.t02;
                rec.tau_sum = sol.times.tau_sum();
                rec.mm_iters = sol.mm_iterations();
            }
            Err(e) => {
                log::warn!("{param} = {value}, {scheme}, trial {trial}: {e}");
                rec.error = Some(e.to_string());
            }
        }
        rec
    }
}

/// Runs every `(value, trial)` cell in parallel. All schemes of a cell see
/// the same channel realization. Records come back sorted by value, scheme
/// and trial; solver failures are recorded rather than aborting the sweep.
pub fn run_sweep(spec: &SweepSpec, cfg: &SystemConfig<f64>) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let configs = spec
        .values
        .iter()
        .map(|&v| spec.param.apply(cfg, v))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.trials).map(move |t| (v, t)))
        .collect();
    let mut records: Vec<ResultRecord> = cells
        .par_iter()
        .flat_map_iter(|&(vi, trial)| {
            let value = spec.values[vi];
            let c = &configs[vi];
            let seed = spec.base_seed.wrapping_add(trial as u64);
            let channels = synth_channels(c, seed);
            spec.schemes
                .iter()
                .map(|&scheme| {
                    let start = Instant::now();
                    let outcome = match &channels {
                        Ok(ch) => scheme.run(ch, c, seed),
                        Err(e) => Err(e.clone()),
                    };
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    ResultRecord::from_outcome(spec.param, value, scheme, trial, seed, outcome, ms)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    records.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.scheme.cmp(&b.scheme))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(records)
}

/// Mean throughput in nats per `(value, scheme)`, skipping failed records,
/// in the records' order.
pub fn mean_throughput(records: &[ResultRecord]) -> Vec<(f64, Scheme, f64)> {
    let mut out: Vec<(f64, Scheme, f64, usize)> = Vec::new();
    for r in records.iter().filter(|r| r.error.is_none()) {
        match out
            .iter_mut()
            .find(|(v, s, _, _)| *v == r.value && *s == r.scheme)
        {
            Some(e) => {
                e.2 += r.throughput_nats;
                e.3 += 1;
            }
            None => out.push((r.value, r.scheme, r.throughput_nats, 1)),
        }
    }
    out.into_iter()
        .map(|(v, s, sum, n)| (v, s, sum / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig<f64> {
        let mut c = SystemConfig::reference();
        c.n_r = 8;
        c.set_sensor_count(3);
        c
    }

    #[test]
    fn names_round_trip() {
        for p in SweepParam::ALL {
            assert_eq!(p.name().parse::<SweepParam>().unwrap(), p);
        }
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("bogus".parse::<Scheme>().is_err());
    }

    #[test]
    fn single_cell_gives_one_record() {
        let spec = SweepSpec {
            param: SweepParam::P0Dbm,
            values: vec![30.0],
            schemes: vec![Scheme::Lc],
            trials: 1,
            base_seed: 5,
        };
        let recs = run_sweep(&spec, &small()).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].error.is_none());
        assert!(recs[0].throughput_nats > 0.0);
    }

    #[test]
    fn records_are_canonically_ordered() {
        let spec = SweepSpec {
            param: SweepParam::K,
            values: vec![3.0, 1.0, 2.0],
            schemes: vec![Scheme::NoIrs, Scheme::Lc],
            trials: 3,
            base_seed: 0,
        };
        let recs = run_sweep(&spec, &small()).unwrap();
        assert_eq!(recs.len(), 18);
        let keys: Vec<_> = recs
            .iter()
            .map(|r| (r.value as usize, r.scheme, r.trial))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(SweepParam::NR.apply(&small(), 2.5).is_err());
        assert!(SweepParam::K.apply(&small(), 0.0).is_err());
        let spec = SweepSpec {
            param: SweepParam::P0Dbm,
            values: vec![],
            schemes: vec![Scheme::Lc],
            trials: 1,
            base_seed: 0,
        };
        assert!(run_sweep(&spec, &small()).is_err());
    }

    #[test]
    fn degenerate_geometry_is_rejected_up_front() {
        // An IRS on top of the energy station has a zero-length link.
        let mut cfg = small();
        cfg.geometry.irs_pos = [-2.0, 0.0, 0.0];
        let spec = SweepSpec {
            param: SweepParam::XIrs,
            values: vec![-10.0],
            schemes: vec![Scheme::Lc],
            trials: 1,
            base_seed: 0,
        };
        assert!(run_sweep(&spec, &cfg).is_err());
    }

    #[test]
    fn failed_runs_become_nan_records() {
        let err = Error::Infeasible("no energy".into());
        let r = ResultRecord::from_outcome(SweepParam::Pck, 1.0, Scheme::Lc, 0, 3, Err(err), 0.1);
        assert!(r.throughput_nats.is_nan() && r.t02.is_nan());
        assert!(r.error.unwrap().contains("no energy"));
    }
}
