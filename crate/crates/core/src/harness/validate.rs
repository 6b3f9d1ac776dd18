//! Self-checks run by `irs-wpsn validate`: identities the solvers must
//! satisfy on seeded realizations of a configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sweep::Scheme;
use crate::allocation::{special_objective, t02_star_special};
use crate::channel::synth_channels;
use crate::config::SystemConfig;
use crate::numerics::{golden_section_max, lambert_w0};
use crate::phase::alignment_ratio;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

fn lambert_round_trip() -> Check {
    let mut worst = 0.0f64;
    for i in 0..=400 {
        let x = -0.36 + i as f64 * 0.25;
        match lambert_w0(x) {
            Ok(w) => worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    Check::new(
        "lambert-w round trip",
        worst <= 1e-13,
        format!("max rel residual {worst:.2e}"),
    )
}

fn t02_matches_search(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let c = 10f64.powf(rng.random_range(-2.0..3.0));
        let s = 10f64.powf(rng.random_range(-2.0..3.0));
        let tt = rng.random_range(0.1..1.0);
        let Ok(t) = t02_star_special(c, s, tt) else {
            worst = f64::INFINITY;
            continue;
        };
        let (_, best) = golden_section_max(|x| special_objective(x, c, s, tt), 0.0, tt, 1e-12);
        let mine = special_objective(t, c, s, tt);
        worst = worst.max((best - mine) / best.abs().max(1e-300));
    }
    Check::new(
        "closed-form t02 vs golden search",
        worst <= 1e-9,
        format!("max rel shortfall {worst:.2e}"),
    )
}

fn solver_checks(cfg: &SystemConfig<f64>, trials: usize) -> Vec<Check> {
    let mut failures = 0usize;
    let mut audit_worst = 0.0f64;
    let mut audit_failed = 0usize;
    let mut align_worst = 0.0f64;
    let mut mm_rise = 0.0f64;
    let mut order_bad = 0usize;
    let mut repro_bad = 0usize;
    let mut special = cfg.clone();
    special.p_ck = 0.0;
    for trial in 0..trials {
        let seed = cfg.seed.wrapping_add(trial as u64);
        let ch = match synth_channels(cfg, seed) {
            Ok(ch) => ch,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        if synth_channels(cfg, seed).ok().as_ref() != Some(&ch) {
            repro_bad += 1;
        }
        let mut lc_value = None;
        for scheme in [
            Scheme::Lc,
            Scheme::RandomPhase,
            Scheme::NoIrs,
            Scheme::UpperBound,
        ] {
            let sol = match scheme.run(&ch, cfg, seed) {
                Ok(s) => s,
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            audit_worst = audit_worst.max(sol.audit.worst_violation());
            if !sol.audit.passes() {
                audit_failed += 1;
            }
            match scheme {
                Scheme::Lc => {
                    lc_value = Some(sol.sum_throughput_nats);
                    if let Some(ph) = &sol.phases {
                        for (k, theta) in ph.wit.iter().enumerate() {
                            match alignment_ratio(&ch, theta, k) {
                                Ok(r) => {
                                    align_worst = align_worst.max(r.im.abs() / r.norm().max(1e-300))
                                }
                                Err(_) => align_worst = f64::INFINITY,
                            }
                        }
                    }
                    if let Some(tr) = &sol.mm {
                        for w in tr.objective_per_iteration.windows(2) {
                            mm_rise = mm_rise.max((w[1] - w[0]) / w[0].abs().max(1e-300));
                        }
                    }
                }
                Scheme::UpperBound => {
                    // Dominance only holds without sensor circuit power.
                    let lc = match lc_value {
                        Some(v) if cfg.p_ck == 0.0 => Ok(v),
                        _ => Scheme::Lc
                            .run(&ch, &special, seed)
                            .map(|s| s.sum_throughput_nats),
                    };
                    let ub = if cfg.p_ck == 0.0 {
                        Ok(sol.sum_throughput_nats)
                    } else {
                        Scheme::UpperBound
                            .run(&ch, &special, seed)
                            .map(|s| s.sum_throughput_nats)
                    };
                    match (lc, ub) {
                        (Ok(lc), Ok(ub)) if ub < lc * (1.0 - 1e-9) => order_bad += 1,
                        (Ok(_), Ok(_)) => {}
                        _ => failures += 1,
                    }
                }
                _ => {}
            }
        }
    }
    vec![
        Check::new(
            "solvers succeed",
            failures == 0,
            format!("{failures} failures in {trials} realizations"),
        ),
        Check::new(
            "feasibility audit",
            audit_failed == 0,
            format!("{audit_failed} failed audits, worst residual {audit_worst:.2e}"),
        ),
        Check::new(
            "uplink phases align with the direct link",
            align_worst <= 1e-9,
            format!("max |Im r| / |r| = {align_worst:.2e}"),
        ),
        Check::new(
            "MM objective non-increasing",
            mm_rise <= 1e-12,
            format!("largest relative rise {mm_rise:.2e}"),
        ),
        Check::new(
            "upper bound dominates without circuit power",
            order_bad == 0,
            format!("{order_bad} of {trials} realizations below the proposed policy"),
        ),
        Check::new(
            "channel synthesis reproducible",
            repro_bad == 0,
            format!("{repro_bad} mismatches"),
        ),
    ]
}

/// Runs every check on `trials` realizations seeded from `cfg.seed`.
pub fn run_validation(cfg: &SystemConfig<f64>, trials: usize) -> Vec<Check> {
    let mut out = vec![lambert_round_trip(), t02_matches_search(cfg.seed)];
    out.extend(solver_checks(cfg, trials.max(1)));
    out
}
