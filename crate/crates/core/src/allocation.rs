//! Time-slot and power allocation for fixed phases.
//!
//! Notation: `c_k` is sensor `k`'s uplink gain, `s_k` its charging gain in
//! the reflected sub-slot, `c~_k = c_k eta P0 / sigma^2`, and
//! `c-_k = t01 |g_d[k]|^2`. The frame after the IRS self-charging sub-slot
//! has length `T~ = T - t01`.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{bisect, lambert_w0};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeAllocation<T> {
    /// IRS self-charging sub-slot.
    pub t01: T,
    /// Reflected charging sub-slot.
    pub t02: T,
    /// Uplink slot of each sensor.
    pub tau: Vec<T>,
}

impl<T: Real> TimeAllocation<T> {
    pub fn tau_sum(&self) -> T {
        self.tau.iter().copied().sum()
    }

    pub fn total(&self) -> T {
        self.t01 + self.t02 + self.tau_sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains<T> {
    /// Uplink gain `|h_k Theta_k h_r + h_d[k]|^2`.
    pub c: Vec<T>,
    /// Reflected charging gain `|g0 Theta_0 g_r[k] + g_d[k]|^2`.
    pub s: Vec<T>,
    pub g0_norm_sq: T,
    /// Direct charging gain `|g_d[k]|^2`.
    pub gd_sq: Vec<T>,
}

impl<T: Real> LinkGains<T> {
    pub fn k(&self) -> usize {
        self.c.len()
    }

    /// Received SNR per unit of harvested energy, `c_k eta P0 / sigma^2`.
    pub fn snr_weights(&self, eta: T, p0: T, sigma_sq: T) -> Vec<T> {
        self.c.iter().map(|&c| c * eta * p0 / sigma_sq).collect()
    }

    /// `c-_k = t01 |g_d[k]|^2`.
    pub fn first_subslot_gain(&self, t01: T) -> Vec<T> {
        self.gd_sq.iter().map(|&g| t01 * g).collect()
    }

    /// Energy harvested by each sensor, `eta P0 (t01 |g_d|^2 + t02 s_k)`.
    pub fn harvested_energy(&self, times: &TimeAllocation<T>, eta: T, p0: T) -> Vec<T> {
        self.gd_sq
            .iter()
            .zip(&self.s)
            .map(|(&gd, &s)| eta * p0 * (times.t01 * gd + times.t02 * s))
            .collect()
    }
}

/// Coefficients of the circuit-power problem: `a_k = c-_k c~_k`,
/// `b_k = s_k c~_k`, `d_k = P_ck c_k / sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralCaseCoeffs<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub d: Vec<T>,
}

impl<T: Real> GeneralCaseCoeffs<T> {
    pub fn from_gains(gains: &LinkGains<T>, t01: T, eta: T, p0: T, sigma_sq: T, p_ck: T) -> Self {
        let ct = gains.snr_weights(eta, p0, sigma_sq);
        let cb = gains.first_subslot_gain(t01);
        Self {
            a: cb.iter().zip(&ct).map(|(&cb, &ct)| cb * ct).collect(),
            b: gains.s.iter().zip(&ct).map(|(&s, &ct)| s * ct).collect(),
            d: gains.c.iter().map(|&c| p_ck * c / sigma_sq).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let k = self.a.len();
        if k == 0 || self.b.len() != k || self.d.len() != k {
            return Err(Error::InvalidInput(
                "coefficient lists must be non-empty and equally long".into(),
            ));
        }
        if self
            .a
            .iter()
            .chain(&self.b)
            .chain(&self.d)
            .any(|v| !(*v >= T::zero()) || !v.is_finite())
        {
            return Err(Error::InvalidInput(
                "coefficients must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Shortest self-charging sub-slot that powers the IRS for the rest of the
/// frame: `N_R P_c T / (N_R P_c + eta P0 ||g0||^2)`.
pub fn t01_star<T: Real>(cfg: &SystemConfig<T>, g0_norm_sq: T) -> T {
    let demand = T::count(cfg.n_r) * cfg.p_c_irs;
    let denom = demand + cfg.eta * cfg.p0 * g0_norm_sq;
    if denom > T::zero() {
        demand * cfg.horizon / denom
    } else {
        T::zero()
    }
}

/// Optimal uplink slots for a given reflected sub-slot:
/// `tau_k = (T~ - t02) c~_k (c-_k + t02 s_k) / sum_j c~_j (c-_j + t02 s_j)`.
pub fn tau_special<T: Real>(
    t02: T,
    s: &[T],
    c_tilde: &[T],
    c_bar: &[T],
    horizon: T,
    t01: T,
) -> Result<Vec<T>> {
    let k = s.len();
    if c_tilde.len() != k || c_bar.len() != k {
        return Err(Error::InvalidInput("gain lists differ in length".into()));
    }
    let weights: Vec<T> = (0..k)
        .map(|i| c_tilde[i] * (c_bar[i] + t02 * s[i]))
        .collect();
    let total: T = weights.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::Degenerate(
            "no sensor can harvest and deliver energy".into(),
        ));
    }
    let remaining = (horizon - t01 - t02).max(T::zero());
    Ok(weights.iter().map(|&w| remaining * w / total).collect())
}

/// Sum throughput as a function of the reflected sub-slot when uplink
/// slots follow [`tau_special`]: `(T~ - t) ln(1 + (c + t s) / (T~ - t))`.
pub fn special_objective<T: Real>(t: T, c: T, s: T, t_tilde: T) -> T {
    let u = t_tilde - t;
    if u <= T::zero() {
        return T::zero();
    }
    u * ((c + t * s) / u).ln_1p()
}

/// Derivative of [`special_objective`] in `t`.
pub fn special_objective_slope<T: Real>(t: T, c: T, s: T, t_tilde: T) -> T {
    let y = (c + t * s) / (t_tilde - t);
    (s + y) / (T::one() + y) - y.ln_1p()
}

/// Maximizer of [`special_objective`] on `[0, T~)`.
///
/// Stationarity gives `X ln X - X = s - 1` for `X = 1 + (c + t s)/(T~ - t)`,
/// so `X = exp(W0((s - 1)/e) + 1)` and `t = ((X - 1) T~ - c) / (s + X - 1)`.
/// Negative values are clamped to the boundary `t = 0`.
pub fn t02_star_special<T: Real>(c: T, s: T, t_tilde: T) -> Result<T> {
    if !(t_tilde > T::zero()) || !(c >= T::zero()) || !(s >= T::zero()) {
        return Err(Error::InvalidInput(format!(
            "t02 needs T~ > 0 and c, s >= 0 (T~ = {t_tilde}, c = {c}, s = {s})"
        )));
    }
    if s == T::zero() {
        return Ok(T::zero());
    }
    let x = (lambert_w0((s - T::one()) / T::E())? + T::one()).exp();
    let t = ((x - T::one()) * t_tilde - c) / (s + x - T::one());
    Ok(t.max(T::zero()).min(t_tilde))
}

/// Powers that exhaust the harvested energy, `P_k = E_k / tau_k`; zero for
/// sensors without an uplink slot.
pub fn power_special<T: Real>(
    gains: &LinkGains<T>,
    times: &TimeAllocation<T>,
    eta: T,
    p0: T,
) -> Vec<T> {
    gains
        .harvested_energy(times, eta, p0)
        .into_iter()
        .zip(&times.tau)
        .map(|(e, &tau)| if tau > T::zero() { e / tau } else { T::zero() })
        .collect()
}

/// Transmit powers when each sensor's circuit draws `p_ck`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralPowers<T> {
    /// `max(E_k / tau_k - P_ck, 0)`.
    pub powers: Vec<T>,
    /// Set where the harvested energy does not cover the circuit.
    pub deficit: Vec<bool>,
}

pub fn power_general<T: Real>(
    gains: &LinkGains<T>,
    times: &TimeAllocation<T>,
    eta: T,
    p0: T,
    p_ck: T,
) -> GeneralPowers<T> {
    let mut deficit = Vec::with_capacity(gains.k());
    let powers = gains
        .harvested_energy(times, eta, p0)
        .into_iter()
        .zip(&times.tau)
        .map(|(e, &tau)| {
            if tau > T::zero() {
                let p = e / tau - p_ck;
                deficit.push(p < T::zero());
                p.max(T::zero())
            } else {
                deficit.push(false);
                T::zero()
            }
        })
        .collect();
    GeneralPowers { powers, deficit }
}

/// Time allocation of the circuit-power problem with its dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSolution<T> {
    pub times: TimeAllocation<T>,
    /// Multiplier of the total-time constraint.
    pub mu: T,
    /// Per-sensor `x_k = (a_k + t02 b_k) / tau_k`; zero for idle sensors.
    pub x: Vec<T>,
}

/// `phi_d(x) = ln(1 + x - d) - x / (1 + x - d)`, the marginal throughput of
/// uplink time; increasing for `x > 0` with `phi_d(d) = -d`.
fn marginal<T: Real>(x: T, d: T) -> T {
    let z = T::one() + x - d;
    z.ln() - x / z
}

/// Root in `x >= d` of `phi_d(x) = mu`, for `mu >= 0`.
fn solve_x<T: Real>(mu: T, d: T) -> Result<T> {
    let g = |x: T| marginal(x, d) - mu;
    let lo = d;
    if g(lo) >= T::zero() {
        return Ok(lo);
    }
    let mut width = T::one().max(d);
    while g(lo + width) < T::zero() {
        width = width * T::lit(2.0);
        if !width.is_finite() {
            return Err(Error::NoConvergence {
                what: "uplink stationarity bracket",
                iterations: 0,
                residual: mu.as_f64(),
            });
        }
    }
    bisect(g, lo, lo + width, T::zero(), T::zero())
}

/// Solves the circuit-power allocation for given `t01`.
///
/// KKT conditions with multiplier `mu` on the time budget `t02 + sum tau = T~`:
/// each active sensor satisfies `phi_{d_k}(x_k) = mu`, and an interior `t02`
/// requires `sum_k b_k / (1 + x_k - d_k) = mu`. The outer residual is
/// decreasing in `mu` with its root in `[0, sum b]`; each `x_k(mu)` is an
/// inner monotone root. If the resulting `t02` would be negative, `t02 = 0`
/// and `mu` is fixed by `sum a_k / x_k(mu) = T~` instead, unless the budget
/// is slack at `mu = 0`.
pub fn general_time_alloc<T: Real>(
    coeffs: &GeneralCaseCoeffs<T>,
    horizon: T,
    t01: T,
) -> Result<GeneralSolution<T>> {
    coeffs.validate()?;
    let t_tilde = horizon - t01;
    if !(t_tilde > T::zero()) {
        return Err(Error::Infeasible(
            "no time left after IRS self-charging".into(),
        ));
    }
    let k = coeffs.a.len();
    let active: Vec<bool> = (0..k)
        .map(|i| coeffs.a[i] + coeffs.b[i] > T::zero())
        .collect();
    if !active.iter().any(|&a| a) {
        return Err(Error::Infeasible("no sensor can harvest energy".into()));
    }
    let xs = |mu: T| -> Result<Vec<T>> {
        (0..k)
            .map(|i| {
                if active[i] {
                    solve_x(mu, coeffs.d[i])
                } else {
                    Ok(T::zero())
                }
            })
            .collect()
    };
    let sum_b: T = coeffs.b.iter().copied().sum();

    if sum_b > T::zero() {
        let outer = |mu: T| -> T {
            match xs(mu) {
                Ok(x) => {
                    (0..k)
                        .filter(|&i| active[i])
                        .map(|i| coeffs.b[i] / (T::one() + x[i] - coeffs.d[i]))
                        .sum::<T>()
                        - mu
                }
                Err(_) => T::nan(),
            }
        };
        // The root is at most sum b, but x_k(mu) grows like exp(mu), so the
        // bracket is grown by doubling instead of starting from sum b + 1.
        let cap = sum_b + T::one();
        let (mut lo, mut hi) = (T::zero(), T::one().min(cap));
        while hi < cap && outer(hi) > T::zero() {
            lo = hi;
            hi = (hi * T::lit(2.0)).min(cap);
        }
        let mu = bisect(outer, lo, hi, T::zero(), T::zero())?;
        let x = xs(mu)?;
        let (mut sa, mut sb) = (T::zero(), T::zero());
        for i in (0..k).filter(|&i| active[i]) {
            sa = sa + coeffs.a[i] / x[i];
            sb = sb + coeffs.b[i] / x[i];
        }
        let t02 = (t_tilde - sa) / (T::one() + sb);
        if t02 >= T::zero() {
            let tau = (0..k)
                .map(|i| {
                    if active[i] {
                        (coeffs.a[i] + t02 * coeffs.b[i]) / x[i]
                    } else {
                        T::zero()
                    }
                })
                .collect();
            return Ok(GeneralSolution {
                times: TimeAllocation { t01, t02, tau },
                mu,
                x,
            });
        }
    }

    // Boundary t02 = 0: only sensors with a direct harvest can transmit.
    let time_used = |x: &[T]| -> T {
        (0..k)
            .filter(|&i| coeffs.a[i] > T::zero())
            .map(|i| coeffs.a[i] / x[i])
            .sum()
    };
    if !coeffs.a.iter().any(|&a| a > T::zero()) {
        return Err(Error::Infeasible(
            "no energy can be harvested without reflection time".into(),
        ));
    }
    let x0 = xs(T::zero())?;
    let mu = if time_used(&x0) <= t_tilde {
        T::zero()
    } else {
        let mut hi = T::one();
        while time_used(&xs(hi)?) > t_tilde {
            hi = hi * T::lit(2.0);
        }
        let g = |mu: T| match xs(mu) {
            Ok(x) => time_used(&x) - t_tilde,
            Err(_) => T::nan(),
        };
        bisect(g, T::zero(), hi, T::zero(), T::zero())?
    };
    let x = xs(mu)?;
    let tau = (0..k)
        .map(|i| {
            if coeffs.a[i] > T::zero() {
                coeffs.a[i] / x[i]
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(GeneralSolution {
        times: TimeAllocation {
            t01,
            t02: T::zero(),
            tau,
        },
        mu,
        x,
    })
}

/// Stationarity residuals of a circuit-power allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals<T> {
    /// `sum b_k / (1 + x_k - d_k) - mu`; for `t02 = 0` only the positive
    /// part counts, since the multiplier of `t02 >= 0` absorbs the rest.
    pub reflect: T,
    /// `max_k |phi_{d_k}(x_k) - mu|` over sensors with an uplink slot.
    pub uplink: T,
}

/// Residuals recomputed from the returned times rather than from the
/// solver's internal `x_k`.
pub fn kkt_residuals<T: Real>(
    coeffs: &GeneralCaseCoeffs<T>,
    times: &TimeAllocation<T>,
    mu: T,
) -> KktResiduals<T> {
    let mut reflect = -mu;
    let mut uplink = T::zero();
    for i in 0..coeffs.a.len() {
        let tau = times.tau[i];
        if tau <= T::zero() {
            continue;
        }
        let x = (coeffs.a[i] + times.t02 * coeffs.b[i]) / tau;
        reflect = reflect + coeffs.b[i] / (T::one() + x - coeffs.d[i]);
        uplink = uplink.max((marginal(x, coeffs.d[i]) - mu).abs());
    }
    if times.t02 <= T::zero() {
        reflect = reflect.max(T::zero());
    }
    KktResiduals {
        reflect: reflect.abs(),
        uplink,
    }
}
