//! End-to-end transmission policies and the benchmark schemes.

use std::fmt;

use crate::allocation::{
    general_time_alloc, power_general, power_special, t01_star, t02_star_special, tau_special,
    GeneralCaseCoeffs, LinkGains, TimeAllocation,
};
use crate::channel::ChannelSet;
use crate::config::{PhaseResolution, SystemConfig};
use crate::error::{Error, Result};
use crate::phase::{
    charging_gain, random_phases, uplink_gain, wet_phase_mm, wit_phases, MMTrace, PhaseSchedule,
};
use crate::Real;

/// Stream ids for random-phase draws, disjoint from the channel streams.
const RANDOM_PHASE_STREAM: u64 = 6 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeTag {
    LcSpecial,
    LcGeneral,
    RandomPhase,
    NoIrs,
    UpperBound,
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeTag::LcSpecial => "lc-special",
            SchemeTag::LcGeneral => "lc-general",
            SchemeTag::RandomPhase => "random-phase",
            SchemeTag::NoIrs => "no-irs",
            SchemeTag::UpperBound => "upper-bound",
        })
    }
}

/// Constraint residuals of a policy, each written as left minus right side
/// of a `<=` constraint and scaled to be relative.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<T> {
    /// `(tau_k (P_k + P_ck) - E_k) / E_k` per sensor.
    pub energy: Vec<T>,
    /// `(N_R P_c (t02 + sum tau) - E_IRS) / E_IRS`; absent without an IRS.
    pub irs: Option<T>,
    /// `(t01 + t02 - tau0) / T` with the charging slot `tau0 = T - sum tau`.
    pub wet_split: T,
    /// `(t01 + t02 + sum tau - T) / T`.
    pub total_time: T,
    pub times_nonnegative: bool,
    pub powers_nonnegative: Vec<bool>,
    pub tol: T,
}

impl<T: Real> FeasibilityReport<T> {
    pub fn passes(&self) -> bool {
        let ok = |r: T| r <= self.tol;
        self.energy.iter().all(|&r| ok(r))
            && self.irs.is_none_or(ok)
            && ok(self.wet_split)
            && ok(self.total_time)
            && self.times_nonnegative
            && self.powers_nonnegative.iter().all(|&b| b)
    }

    /// Largest constraint violation, zero when every constraint holds.
    pub fn worst_violation(&self) -> T {
        self.energy
            .iter()
            .copied()
            .chain(self.irs)
            .chain([self.wet_split, self.total_time])
            .fold(T::zero(), T::max)
    }

    /// Largest relative gap in the energy constraints, i.e. how far the
    /// sensors are from spending exactly what they harvest.
    pub fn energy_gap(&self) -> T {
        self.energy.iter().map(|r| r.abs()).fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySolution<T> {
    pub scheme: SchemeTag,
    /// `None` when the network operates without the IRS.
    pub phases: Option<PhaseSchedule<T>>,
    pub times: TimeAllocation<T>,
    pub powers: Vec<T>,
    pub gains: LinkGains<T>,
    pub sum_throughput_nats: T,
    /// Multiplier of the time budget in the circuit-power solver.
    pub mu: Option<T>,
    pub mm: Option<MMTrace<T>>,
    pub audit: FeasibilityReport<T>,
}

impl<T: Real> PolicySolution<T> {
    pub fn throughput_bits(&self) -> T {
        self.sum_throughput_nats / T::LN_2()
    }

    pub fn mm_iterations(&self) -> usize {
        self.mm.as_ref().map_or(0, |t| t.iterations)
    }
}

/// `sum_k tau_k ln(1 + P_k c_k / sigma^2)` with the uplink gains recomputed
/// from the channels and the solution's phases.
pub fn sum_throughput<T: Real>(sol: &PolicySolution<T>, ch: &ChannelSet<T>, sigma_sq: T) -> T {
    (0..ch.k())
        .map(|k| {
            let c = match &sol.phases {
                Some(p) => uplink_gain(ch, &p.wit[k], k),
                None => ch.h_d[k].norm_sqr(),
            };
            rate(sol.times.tau[k], sol.powers[k], c, sigma_sq)
        })
        .sum()
}

fn rate<T: Real>(tau: T, power: T, c: T, sigma_sq: T) -> T {
    if tau > T::zero() {
        tau * (power * c / sigma_sq).ln_1p()
    } else {
        T::zero()
    }
}

/// Checks constraints (2), (3), (6d), (6e) and the sign constraints.
pub fn audit_feasibility<T: Real>(
    sol: &PolicySolution<T>,
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> FeasibilityReport<T> {
    let t = &sol.times;
    let horizon = cfg.horizon;
    let gd_sq: Vec<T> = ch.g_d.iter().map(|g| g.norm_sqr()).collect();
    let s: Vec<T> = match &sol.phases {
        Some(p) => (0..ch.k()).map(|k| charging_gain(ch, &p.wet, k)).collect(),
        None => gd_sq.clone(),
    };
    let p_ck = if matches!(sol.scheme, SchemeTag::LcSpecial) {
        T::zero()
    } else {
        cfg.p_ck
    };
    let tiny = T::min_positive_value();
    let energy = (0..ch.k())
        .map(|k| {
            let harvested = cfg.eta * cfg.p0 * (t.t01 * gd_sq[k] + t.t02 * s[k]);
            let spent = t.tau[k]
                * (sol.powers[k]
                    + if t.tau[k] > T::zero() {
                        p_ck
                    } else {
                        T::zero()
                    });
            (spent - harvested) / harvested.max(tiny)
        })
        .collect();
    let irs = sol.phases.as_ref().map(|_| {
        let p_c = if sol.scheme == SchemeTag::UpperBound {
            T::zero()
        } else {
            cfg.p_c_irs
        };
        let demand = T::count(cfg.n_r) * p_c * (t.t02 + t.tau_sum());
        let supply = t.t01 * cfg.eta * cfg.p0 * ch.g0.norm_sq();
        (demand - supply) / supply.max(T::count(cfg.n_r) * p_c * horizon).max(tiny)
    });
    let tau0 = horizon - t.tau_sum();
    FeasibilityReport {
        energy,
        irs,
        wet_split: (t.t01 + t.t02 - tau0) / horizon,
        total_time: (t.total() - horizon) / horizon,
        times_nonnegative: t.t01 >= T::zero()
            && t.t02 >= T::zero()
            && t.tau.iter().all(|&x| x >= T::zero()),
        powers_nonnegative: sol.powers.iter().map(|&p| p >= T::zero()).collect(),
        tol: cfg.tol.audit,
    }
}

/// WIT phases by alignment and WET phases by MM with weights `c~_k`.
pub fn optimal_phases<T: Real>(
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<(PhaseSchedule<T>, MMTrace<T>)> {
    let wit: Vec<_> = (0..ch.k()).map(|k| wit_phases(ch, k)).collect();
    let weights: Vec<T> = wit
        .iter()
        .enumerate()
        .map(|(k, p)| uplink_gain(ch, p, k) * cfg.eta * cfg.p0 / cfg.sigma_sq)
        .collect();
    let tol = &cfg.tol;
    let (wet, trace) = wet_phase_mm(
        ch,
        &weights,
        tol.mm,
        tol.mm_max_iter,
        tol.eigen,
        tol.eigen_max_iter,
    )?;
    Ok((PhaseSchedule { wet, wit }, trace))
}

fn gains_for<T: Real>(ch: &ChannelSet<T>, phases: Option<&PhaseSchedule<T>>) -> LinkGains<T> {
    let gd_sq: Vec<T> = ch.g_d.iter().map(|g| g.norm_sqr()).collect();
    match phases {
        Some(p) => LinkGains {
            c: (0..ch.k()).map(|k| uplink_gain(ch, &p.wit[k], k)).collect(),
            s: (0..ch.k()).map(|k| charging_gain(ch, &p.wet, k)).collect(),
            g0_norm_sq: ch.g0.norm_sq(),
            gd_sq,
        },
        None => LinkGains {
            c: ch.h_d.iter().map(|h| h.norm_sqr()).collect(),
            s: gd_sq.clone(),
            g0_norm_sq: T::zero(),
            gd_sq,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Case {
    Special,
    General,
}

struct Allocated<T> {
    times: TimeAllocation<T>,
    powers: Vec<T>,
    mu: Option<T>,
}

/// Time and power allocation for fixed gains and self-charging sub-slot.
fn allocate<T: Real>(
    gains: &LinkGains<T>,
    cfg: &SystemConfig<T>,
    t01: T,
    case: Case,
) -> Result<Allocated<T>> {
    let t_tilde = cfg.horizon - t01;
    if !(t_tilde > T::zero()) {
        return Err(Error::Infeasible(
            "the IRS needs the whole frame to power itself".into(),
        ));
    }
    match case {
        Case::Special => {
            let ct = gains.snr_weights(cfg.eta, cfg.p0, cfg.sigma_sq);
            let cb = gains.first_subslot_gain(t01);
            let c: T = ct.iter().zip(&cb).map(|(&a, &b)| a * b).sum();
            let s: T = ct.iter().zip(&gains.s).map(|(&a, &b)| a * b).sum();
            let t02 = t02_star_special(c, s, t_tilde)?;
            let tau = tau_special(t02, &gains.s, &ct, &cb, cfg.horizon, t01)?;
            let times = TimeAllocation { t01, t02, tau };
            let powers = power_special(gains, &times, cfg.eta, cfg.p0);
            Ok(Allocated {
                times,
                powers,
                mu: None,
            })
        }
        Case::General => {
            let coeffs =
                GeneralCaseCoeffs::from_gains(gains, t01, cfg.eta, cfg.p0, cfg.sigma_sq, cfg.p_ck);
            let sol = general_time_alloc(&coeffs, cfg.horizon, t01)?;
            let p = power_general(gains, &sol.times, cfg.eta, cfg.p0, cfg.p_ck);
            if p.deficit.iter().any(|&d| d) {
                log::warn!("circuit power exceeds harvested energy for some sensors");
            }
            Ok(Allocated {
                times: sol.times,
                powers: p.powers,
                mu: Some(sol.mu),
            })
        }
    }
}

fn finish<T: Real>(
    scheme: SchemeTag,
    phases: Option<PhaseSchedule<T>>,
    gains: LinkGains<T>,
    alloc: Allocated<T>,
    mm: Option<MMTrace<T>>,
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<PolicySolution<T>> {
    let throughput = (0..gains.k())
        .map(|k| {
            rate(
                alloc.times.tau[k],
                alloc.powers[k],
                gains.c[k],
                cfg.sigma_sq,
            )
        })
        .sum();
    let mut sol = PolicySolution {
        scheme,
        phases,
        times: alloc.times,
        powers: alloc.powers,
        gains,
        sum_throughput_nats: throughput,
        mu: alloc.mu,
        mm,
        audit: FeasibilityReport {
            energy: Vec::new(),
            irs: None,
            wet_split: T::zero(),
            total_time: T::zero(),
            times_nonnegative: true,
            powers_nonnegative: Vec::new(),
            tol: cfg.tol.audit,
        },
    };
    sol.audit = audit_feasibility(&sol, ch, cfg);
    if !sol.audit.passes() {
        return Err(Error::Infeasible(format!(
            "{scheme} solution violates its constraints by {:e}",
            sol.audit.worst_violation().as_f64()
        )));
    }
    Ok(sol)
}

fn apply_resolution<T: Real>(
    phases: PhaseSchedule<T>,
    resolution: PhaseResolution,
) -> PhaseSchedule<T> {
    match resolution {
        PhaseResolution::Continuous => phases,
        PhaseResolution::Bits(b) => phases.quantized(b),
    }
}

fn solve_with<T: Real>(
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
    case: Case,
) -> Result<PolicySolution<T>> {
    ch.validate()?;
    let (phases, trace) = optimal_phases(ch, cfg)?;
    let phases = apply_resolution(phases, cfg.resolution);
    let gains = gains_for(ch, Some(&phases));
    let t01 = t01_star(cfg, gains.g0_norm_sq);
    let alloc = allocate(&gains, cfg, t01, case)?;
    let tag = match case {
        Case::Special => SchemeTag::LcSpecial,
        Case::General => SchemeTag::LcGeneral,
    };
    finish(tag, Some(phases), gains, alloc, Some(trace), ch, cfg)
}

/// Proposed policy without sensor circuit power: aligned WIT phases, the
/// shortest IRS self-charging sub-slot, MM WET phases, the Lambert-W
/// reflected sub-slot and proportional uplink slots. With a finite phase
/// resolution the continuous phases are quantized and the times re-solved.
pub fn solve_special<T: Real>(
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<PolicySolution<T>> {
    if cfg.p_ck != T::zero() {
        return Err(Error::InvalidInput(
            "solve_special requires zero sensor circuit power".into(),
        ));
    }
    solve_with(ch, cfg, Case::Special)
}

/// Proposed policy with sensor circuit power, using the same phases as the
/// special case and the KKT allocation for the time split.
pub fn solve_general<T: Real>(
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<PolicySolution<T>> {
    solve_with(ch, cfg, Case::General)
}

/// [`solve_special`] when the sensors draw no circuit power, else [`solve_general`].
pub fn solve<T: Real>(ch: &ChannelSet<T>, cfg: &SystemConfig<T>) -> Result<PolicySolution<T>> {
    solve_with(ch, cfg, case_for(cfg))
}

fn case_for<T: Real>(cfg: &SystemConfig<T>) -> Case {
    if cfg.p_ck == T::zero() {
        Case::Special
    } else {
        Case::General
    }
}

/// IRS phases drawn uniformly at random; times and powers optimized.
pub fn benchmark_random_phase<T: Real>(
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
    seed: u64,
) -> Result<PolicySolution<T>> {
    ch.validate()?;
    let n = ch.n_r();
    let phases = PhaseSchedule {
        wet: random_phases(n, seed, RANDOM_PHASE_STREAM),
        wit: (0..ch.k())
            .map(|k| random_phases(n, seed, RANDOM_PHASE_STREAM + 1 + k as u64))
            .collect(),
    };
    let gains = gains_for(ch, Some(&phases));
    let t01 = t01_star(cfg, gains.g0_norm_sq);
    let alloc = allocate(&gains, cfg, t01, case_for(cfg))?;
    finish(
        SchemeTag::RandomPhase,
        Some(phases),
        gains,
        alloc,
        None,
        ch,
        cfg,
    )
}

/// Conventional harvest-then-transmit network without the surface: a single
/// charging slot over the direct links, then TDMA uplink over direct links.
/// A network whose direct links are all dead yields zero throughput.
pub fn benchmark_no_irs<T: Real>(
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<PolicySolution<T>> {
    ch.validate()?;
    let gains = gains_for(ch, None);
    let alloc = match allocate(&gains, cfg, T::zero(), case_for(cfg)) {
        Ok(a) => a,
        Err(Error::Degenerate(_)) | Err(Error::Infeasible(_)) => Allocated {
            times: TimeAllocation {
                t01: T::zero(),
                t02: cfg.horizon,
                tau: vec![T::zero(); ch.k()],
            },
            powers: vec![T::zero(); ch.k()],
            mu: None,
        },
        Err(e) => return Err(e),
    };
    finish(SchemeTag::NoIrs, None, gains, alloc, None, ch, cfg)
}

/// Proposed policy with an IRS that needs no circuit power (so no
/// self-charging sub-slot) and continuous phases.
pub fn benchmark_upper_bound<T: Real>(
    ch: &ChannelSet<T>,
    cfg: &SystemConfig<T>,
) -> Result<PolicySolution<T>> {
    let mut free = cfg.clone();
    free.p_c_irs = T::zero();
    free.resolution = PhaseResolution::Continuous;
    let mut sol = solve_with(ch, &free, case_for(cfg))?;
    sol.scheme = SchemeTag::UpperBound;
    sol.audit = audit_feasibility(&sol, ch, &free);
    Ok(sol)
}
