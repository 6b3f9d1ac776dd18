//! TOML configuration files.
//!
//! Every key is optional and falls back to the reference deployment. Powers
//! of the source and the noise are given in dBm, circuit powers in watts.
//! Unknown keys are rejected.
//!
//! ```toml
//! horizon_s = 1.0
//! n_r = 30
//! k = 6
//! p0_dbm = 30
//! sigma_sq_dbm = -100
//! eta = 0.8
//! p_c_irs_w = 1e-5
//! p_ck_w = 1e-5
//! phase_bits = "continuous"   # or 1, 2, ...
//! es_pos = [-10, 0, 0]
//! ap_pos = [10, 0, 0]
//! irs_pos = [-2, 6, 0]
//! sensor_spacing_m = 1.0
//! rician_k1_db = 6
//! pathloss_a_db = -20
//! pathloss_exponent = 2.2
//! spacing_over_wavelength = 0.5
//! steering_uses_cos = false
//! seed = 1
//!
//! [tolerances]
//! eigen = 1e-10
//! mm = 1e-8
//! mm_max_iter = 500
//!
//! [sweep]
//! param = "p0_dbm"
//! values = [10, 20, 30, 40]
//! schemes = ["lc", "no-irs"]
//! trials = 200
//! ```

use std::path::Path;

use serde::Deserialize;

use super::sweep::{Scheme, SweepParam, SweepSpec};
use crate::config::{db_to_linear, dbm_to_watts, PhaseResolution, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    horizon_s: Option<f64>,
    n_r: Option<usize>,
    k: Option<usize>,
    p0_dbm: Option<f64>,
    sigma_sq_dbm: Option<f64>,
    eta: Option<f64>,
    p_c_irs_w: Option<f64>,
    p_ck_w: Option<f64>,
    phase_bits: Option<RawBits>,
    es_pos: Option<[f64; 3]>,
    ap_pos: Option<[f64; 3]>,
    irs_pos: Option<[f64; 3]>,
    sensor_spacing_m: Option<f64>,
    rician_k1_db: Option<f64>,
    pathloss_a_db: Option<f64>,
    pathloss_exponent: Option<f64>,
    spacing_over_wavelength: Option<f64>,
    steering_uses_cos: Option<bool>,
    seed: Option<u64>,
    tolerances: Option<RawTolerances>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawBits {
    Bits(u8),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    eigen: Option<f64>,
    eigen_max_iter: Option<usize>,
    golden_rel: Option<f64>,
    bisect: Option<f64>,
    mm: Option<f64>,
    mm_max_iter: Option<usize>,
    audit: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    param: String,
    values: Vec<f64>,
    schemes: Option<Vec<String>>,
    trials: Option<usize>,
    base_seed: Option<u64>,
}

/// Contents of a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub system: SystemConfig<f64>,
    pub sweep: Option<SweepSpec>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigFile> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut cfg = SystemConfig::<f64>::reference();

    if let Some(v) = raw.horizon_s {
        cfg.horizon = v;
    }
    if let Some(v) = raw.n_r {
        cfg.n_r = v;
    }
    if let Some(v) = raw.p0_dbm {
        cfg.p0 = dbm_to_watts(v);
    }
    if let Some(v) = raw.sigma_sq_dbm {
        cfg.sigma_sq = dbm_to_watts(v);
    }
    if let Some(v) = raw.eta {
        cfg.eta = v;
    }
    if let Some(v) = raw.p_c_irs_w {
        cfg.p_c_irs = v;
    }
    if let Some(v) = raw.p_ck_w {
        cfg.p_ck = v;
    }
    if let Some(b) = raw.phase_bits {
        cfg.resolution = match b {
            RawBits::Bits(0) => PhaseResolution::Continuous,
            RawBits::Bits(n) => PhaseResolution::Bits(n),
            RawBits::Word(w) if w == "continuous" => PhaseResolution::Continuous,
            RawBits::Word(w) => {
                return Err(Error::Config(format!(
                    "phase_bits must be an integer or \"continuous\", got {w:?}"
                )))
            }
        };
    }
    let geo = &mut cfg.geometry;
    if let Some(p) = raw.es_pos {
        geo.es_pos = p;
    }
    if let Some(p) = raw.ap_pos {
        geo.ap_pos = p;
    }
    if let Some(p) = raw.irs_pos {
        geo.irs_pos = p;
    }
    if let Some(d) = raw.sensor_spacing_m {
        geo.sensor_spacing = d;
    }
    cfg.set_sensor_count(raw.k.unwrap_or(cfg.k));

    let f = &mut cfg.fading;
    if let Some(v) = raw.rician_k1_db {
        f.rician_k1 = db_to_linear(v);
    }
    if let Some(v) = raw.pathloss_a_db {
        f.pathloss_a = db_to_linear(v);
    }
    match raw.pathloss_exponent {
        Some(v) => f.pathloss_exponent = v,
        None => log::info!(
            "pathloss_exponent not set; using the default {}",
            f.pathloss_exponent
        ),
    }
    if let Some(v) = raw.spacing_over_wavelength {
        f.spacing_over_wavelength = v;
    }
    if let Some(v) = raw.steering_uses_cos {
        f.steering_uses_cos = v;
    }
    if let Some(s) = raw.seed {
        cfg.seed = s;
    }
    if let Some(t) = raw.tolerances {
        let tol = &mut cfg.tol;
        tol.eigen = t.eigen.unwrap_or(tol.eigen);
        tol.eigen_max_iter = t.eigen_max_iter.unwrap_or(tol.eigen_max_iter);
        tol.golden_rel = t.golden_rel.unwrap_or(tol.golden_rel);
        tol.bisect = t.bisect.unwrap_or(tol.bisect);
        tol.mm = t.mm.unwrap_or(tol.mm);
        tol.mm_max_iter = t.mm_max_iter.unwrap_or(tol.mm_max_iter);
        tol.audit = t.audit.unwrap_or(tol.audit);
    }
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;

    let sweep = match raw.sweep {
        None => None,
        Some(s) => {
            let param: SweepParam = s.param.parse()?;
            let schemes = match s.schemes {
                Some(names) => names
                    .iter()
                    .map(|n| n.parse())
                    .collect::<Result<Vec<Scheme>>>()?,
                None => Scheme::ALL.to_vec(),
            };
            let spec = SweepSpec {
                param,
                values: s.values,
                schemes,
                trials: s.trials.unwrap_or(1),
                base_seed: s.base_seed.unwrap_or(cfg.seed),
            };
            spec.validate()?;
            Some(spec)
        }
    };
    Ok(ConfigFile { system: cfg, sweep })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference_deployment() {
        let f = parse_config("").unwrap();
        assert_eq!(f.system, SystemConfig::reference());
        assert!(f.sweep.is_none());
    }

    #[test]
    fn dbm_values_become_watts() {
        let f = parse_config("p0_dbm = 30\nsigma_sq_dbm = -100\n").unwrap();
        assert!((f.system.p0 - 1.0).abs() < 1e-15);
        assert!((f.system.sigma_sq - 1e-13).abs() < 1e-27);
    }

    #[test]
    fn missing_exponent_uses_default() {
        let f = parse_config("k = 3").unwrap();
        assert_eq!(f.system.fading.pathloss_exponent, 2.2);
        assert_eq!(f.system.geometry.sensor_positions.len(), 3);
    }

    #[test]
    fn rejects_unknown_keys_with_location() {
        let err = parse_config("n_r = 30\nbogus = 1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn phase_bits_forms() {
        assert_eq!(
            parse_config("phase_bits = 2").unwrap().system.resolution,
            PhaseResolution::Bits(2)
        );
        assert_eq!(
            parse_config("phase_bits = \"continuous\"")
                .unwrap()
                .system
                .resolution,
            PhaseResolution::Continuous
        );
        assert!(parse_config("phase_bits = \"many\"").is_err());
    }

    #[test]
    fn sweep_section() {
        let f = parse_config(
            "[sweep]\nparam = \"n_r\"\nvalues = [10, 20]\nschemes = [\"lc\", \"no-irs\"]\ntrials = 3\n",
        )
        .unwrap();
        let s = f.sweep.unwrap();
        assert_eq!(s.param, SweepParam::NR);
        assert_eq!(s.schemes, vec![Scheme::Lc, Scheme::NoIrs]);
        assert_eq!(s.trials, 3);
    }

    #[test]
    fn invalid_values_are_reported() {
        assert!(parse_config("eta = 2.0").is_err());
        assert!(parse_config("[sweep]\nparam = \"voltage\"\nvalues = [1]\n").is_err());
    }
}
