//! Reflection coefficients of the IRS.
//!
//! A phase vector `theta` is a row vector of unit-modulus entries; the
//! cascaded channel of a link through the surface is `theta . x` for the
//! element-wise channel product `x` (`a_k = g0 .* g_r[k]` while charging,
//! `b_k = h[k] .* h_r` while sensor `k` transmits).

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::{max_eigenpair, ComplexVector, HermitianMatrix};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Continuous,
    Quantized(u8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector<T> {
    theta: ComplexVector<T>,
    kind: PhaseKind,
}

/// Tolerance on `|theta[n]| = 1`: 1e-12, or a few ulps for `f32`.
pub fn unit_modulus_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::lit(16.0) * T::epsilon())
}

impl<T: Real> PhaseVector<T> {
    pub fn new(theta: ComplexVector<T>, kind: PhaseKind) -> Result<Self> {
        let tol = unit_modulus_tol::<T>();
        if let Some(n) = theta.iter().position(|z| (z.norm() - T::one()).abs() > tol) {
            return Err(Error::InvalidInput(format!(
                "phase entry {n} is not unit modulus"
            )));
        }
        Ok(Self { theta, kind })
    }

    pub fn from_angles(angles: &[T]) -> Result<Self> {
        Self::new(ComplexVector::from_angles(angles)?, PhaseKind::Continuous)
    }

    /// All-zero phases (no rotation).
    pub fn identity(n: usize) -> Self {
        Self {
            theta: ComplexVector::ones(n),
            kind: PhaseKind::Continuous,
        }
    }

    pub fn theta(&self) -> &ComplexVector<T> {
        &self.theta
    }

    pub fn kind(&self) -> PhaseKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Phase of each entry in `[0, 2 pi)`.
    pub fn angles(&self) -> Vec<T> {
        self.theta.iter().map(|z| wrap_angle(z.arg())).collect()
    }
}

/// Phases for the charging slot and for each sensor's uplink slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule<T> {
    pub wet: PhaseVector<T>,
    pub wit: Vec<PhaseVector<T>>,
}

impl<T: Real> PhaseSchedule<T> {
    pub fn quantized(&self, bits: u8) -> Self {
        Self {
            wet: quantize_phases(&self.wet, bits),
            wit: self.wit.iter().map(|p| quantize_phases(p, bits)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MMTrace<T> {
    /// Minimization-form objective `-sum_k w_k |theta a_k + g_d[k]|^2`, one
    /// entry for the start point and one per iteration.
    pub objective_per_iteration: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Majorization constant used for `lambda_max(Phi)`.
    pub lambda: T,
}

fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let w = a % two_pi;
    if w < T::zero() {
        w + two_pi
    } else {
        w
    }
}

/// `exp(j arg z)`, or 1 when `z = 0`.
fn unit_phase<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r > T::zero() {
        z / r
    } else {
        Complex::new(T::one(), T::zero())
    }
}

/// Cascaded uplink channel `b_k = h[k] .* h_r`.
pub fn uplink_cascade<T: Real>(ch: &ChannelSet<T>, k: usize) -> ComplexVector<T> {
    ch.h[k].hadamard(&ch.h_r)
}

/// Cascaded charging channel `a_k = g0 .* g_r[k]`.
pub fn charging_cascade<T: Real>(ch: &ChannelSet<T>, k: usize) -> ComplexVector<T> {
    ch.g0.hadamard(&ch.g_r[k])
}

/// Phases aligning every reflected path of sensor `k`'s uplink with its
/// direct path: `theta[n] = exp(j (arg h_d[k] - arg b_k[n]))`.
pub fn wit_phases<T: Real>(ch: &ChannelSet<T>, k: usize) -> PhaseVector<T> {
    let b = uplink_cascade(ch, k);
    let target = unit_phase(ch.h_d[k]);
    let theta = b.iter().map(|&bn| target * unit_phase(bn).conj()).collect();
    PhaseVector {
        theta: ComplexVector::new(theta).expect("unit phases are finite"),
        kind: PhaseKind::Continuous,
    }
}

/// Uplink channel power gain `c_k = |theta b_k + h_d[k]|^2`.
pub fn uplink_gain<T: Real>(ch: &ChannelSet<T>, theta: &PhaseVector<T>, k: usize) -> T {
    (theta.theta.dot(&uplink_cascade(ch, k)) + ch.h_d[k]).norm_sqr()
}

/// Charging channel power gain `s_k = |theta a_k + g_d[k]|^2`.
pub fn charging_gain<T: Real>(ch: &ChannelSet<T>, theta: &PhaseVector<T>, k: usize) -> T {
    (theta.theta.dot(&charging_cascade(ch, k)) + ch.g_d[k]).norm_sqr()
}

/// Weighted charging objective `sum_k w_k s_k` (to be maximized).
pub fn wet_objective<T: Real>(ch: &ChannelSet<T>, theta: &PhaseVector<T>, weights: &[T]) -> T {
    weights
        .iter()
        .enumerate()
        .map(|(k, &w)| w * charging_gain(ch, theta, k))
        .sum()
}

/// Ratio of reflected to direct uplink channel, `(theta . b_k) / h_d[k]`.
///
/// At the aligned phases this is the real number `omega_k = sum|b_k| / |h_d[k]|`.
pub fn alignment_ratio<T: Real>(
    ch: &ChannelSet<T>,
    theta: &PhaseVector<T>,
    k: usize,
) -> Result<Complex<T>> {
    let hd = ch.h_d[k];
    if hd.norm() < T::lit(1e-30) {
        return Err(Error::Degenerate(format!(
            "direct uplink of sensor {k} is zero"
        )));
    }
    Ok(theta.theta.dot(&uplink_cascade(ch, k)) / hd)
}

/// Maximizes `sum_k w_k |theta a_k + g_d[k]|^2` over unit-modulus `theta` by
/// majorization-minimization.
///
/// With `x = theta^H` the objective is `x^H Phi1 x + 2 Re(x^H gamma) + d1`,
/// `Phi1 = sum w_k a_k a_k^H`, `gamma = sum w_k conj(g_d[k]) a_k`. Each step
/// maximizes the linear minorizer built from `lambda >= lambda_max(-Phi1)`,
/// whose solution is `x = exp(j arg gamma_t)` with
/// `gamma_t = (lambda I + Phi1) x_m + gamma`, i.e. `theta = exp(-j arg gamma_t)`.
/// The start point aligns every element with `gamma`.
pub fn wet_phase_mm<T: Real>(
    ch: &ChannelSet<T>,
    weights: &[T],
    tol: T,
    max_iter: usize,
    eigen_tol: T,
    eigen_max_iter: usize,
) -> Result<(PhaseVector<T>, MMTrace<T>)> {
    let k = ch.k();
    if weights.len() != k {
        return Err(Error::InvalidInput(format!(
            "{} weights for {k} sensors",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidInput(
            "MM weights must be finite and non-negative".into(),
        ));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput("MM tolerance must be positive".into()));
    }
    let n = ch.n_r();
    let cascades: Vec<ComplexVector<T>> = (0..k).map(|i| charging_cascade(ch, i)).collect();

    let mut phi1 = HermitianMatrix::zeros(n);
    let mut gamma = vec![Complex::new(T::zero(), T::zero()); n];
    for ((a, &w), gd) in cascades.iter().zip(weights).zip(&ch.g_d) {
        if w == T::zero() {
            continue;
        }
        phi1.add_outer(w, a);
        for (g, an) in gamma.iter_mut().zip(a.iter()) {
            *g = *g + an * gd.conj() * w;
        }
    }

    let lambda = majorization_constant(&phi1, &cascades, weights, eigen_tol, eigen_max_iter);
    // Relative changes below a few ulps are rounding noise.
    let tol = tol.max(T::lit(64.0) * T::epsilon());

    let objective = |theta: &ComplexVector<T>| -> T {
        -cascades
            .iter()
            .zip(weights)
            .zip(&ch.g_d)
            .map(|((a, &w), gd)| w * (theta.dot(a) + gd).norm_sqr())
            .sum::<T>()
    };

    let mut theta = ComplexVector::new(gamma.iter().map(|g| unit_phase(*g).conj()).collect())?;
    let mut f = objective(&theta);
    let mut history = vec![f];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let x: Vec<Complex<T>> = theta.iter().map(|z| z.conj()).collect();
        let phi1_x = phi1.mul_vec(&x);
        let next: Vec<Complex<T>> = phi1_x
            .iter()
            .zip(&x)
            .zip(&gamma)
            .map(|((p, xn), g)| unit_phase(p + xn * lambda + g).conj())
            .collect();
        let candidate = ComplexVector::new(next)?;
        let f_next = objective(&candidate);
        theta = candidate;
        let change = (f - f_next).abs();
        let scale = f.abs().max(T::min_positive_value());
        f = f_next;
        history.push(f);
        if change <= tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        log::debug!("MM stopped after {iterations} iterations without meeting tolerance");
    }
    Ok((
        PhaseVector {
            theta,
            kind: PhaseKind::Continuous,
        },
        MMTrace {
            objective_per_iteration: history,
            iterations,
            converged,
            lambda,
        },
    ))
}

/// Upper bound on `lambda_max(-Phi1)`, which is never positive.
///
/// With fewer active cascades than elements `Phi1` is singular and the bound
/// is exactly zero. Otherwise the dominant eigenpair of `-Phi1` is computed
/// and padded by its residual; zero is the fallback if that fails.
fn majorization_constant<T: Real>(
    phi1: &HermitianMatrix<T>,
    cascades: &[ComplexVector<T>],
    weights: &[T],
    eigen_tol: T,
    eigen_max_iter: usize,
) -> T {
    let active = cascades
        .iter()
        .zip(weights)
        .filter(|(a, &w)| w > T::zero() && a.norm_sq() > T::zero())
        .count();
    if active < phi1.dim() {
        return T::zero();
    }
    match max_eigenpair(&phi1.neg(), eigen_tol, eigen_max_iter) {
        Ok(e) => (e.value + e.residual).min(T::zero()),
        Err(err) => {
            log::warn!(
                "eigen solve for the MM surrogate failed ({err}); using the trivial bound 0"
            );
            T::zero()
        }
    }
}

/// Maps each entry to the nearest of `2^bits` phases `2 pi l / 2^bits`.
/// Equidistant entries go to the lower level index.
pub fn quantize_phases<T: Real>(theta: &PhaseVector<T>, bits: u8) -> PhaseVector<T> {
    assert!(
        (1..=16).contains(&bits),
        "phase resolution must be 1..=16 bits"
    );
    let levels = 1usize << bits;
    let step = T::lit(2.0) * T::PI() / T::count(levels);
    let tie = T::lit(8.0) * T::epsilon();
    let half = T::lit(0.5);
    let entries = theta
        .angles()
        .into_iter()
        .map(|alpha| {
            let x = alpha / step;
            let lower = x.floor();
            let frac = x - lower;
            let lower = lower.to_usize().unwrap_or(0) % levels;
            let upper = (lower + 1) % levels;
            let l = if (frac - half).abs() <= tie {
                lower.min(upper)
            } else if frac > half {
                upper
            } else {
                lower
            };
            Complex::from_polar(T::one(), step * T::count(l))
        })
        .collect();
    PhaseVector {
        theta: ComplexVector::new(entries).expect("quantized phases are finite"),
        kind: PhaseKind::Quantized(bits),
    }
}

/// Independent uniform phases on `[0, 2 pi)` from a seeded stream.
pub fn random_phases<T: Real>(n: usize, seed: u64, stream: u64) -> PhaseVector<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let two_pi = 2.0 * std::f64::consts::PI;
    let angles: Vec<T> = (0..n)
        .map(|_| T::lit(rng.random::<f64>() * two_pi))
        .collect();
    PhaseVector::from_angles(&angles).expect("random phases are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::synth_channels;
    use crate::config::SystemConfig;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn v(entries: &[Complex<f64>]) -> ComplexVector<f64> {
        ComplexVector::new(entries.to_vec()).unwrap()
    }

    fn single(h: Complex<f64>, h_r: Complex<f64>, h_d: Complex<f64>) -> ChannelSet<f64> {
        ChannelSet {
            g0: v(&[c(1.0, 0.0)]),
            g_r: vec![v(&[c(1.0, 0.0)])],
            g_d: vec![c(1.0, 0.0)],
            h: vec![v(&[h])],
            h_r: v(&[h_r]),
            h_d: vec![h_d],
        }
    }

    fn small_channels(n_r: usize, k: usize, seed: u64) -> ChannelSet<f64> {
        let mut cfg = SystemConfig::<f64>::reference();
        cfg.n_r = n_r;
        cfg.set_sensor_count(k);
        synth_channels(&cfg, seed).unwrap()
    }

    #[test]
    fn wit_single_element_examples() {
        let ch = single(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        let t = wit_phases(&ch, 0);
        assert!((t.theta()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((uplink_gain(&ch, &t, 0).sqrt() - 2.0).abs() < 1e-15);

        // h_d = -1, b = j: rotate by pi - pi/2.
        let ch = single(c(0.0, 1.0), c(1.0, 0.0), c(-1.0, 0.0));
        let t = wit_phases(&ch, 0);
        assert!((t.theta()[0] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((uplink_gain(&ch, &t, 0).sqrt() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn wit_attains_triangle_bound() {
        let ch = small_channels(12, 4, 5);
        for k in 0..4 {
            let t = wit_phases(&ch, k);
            let bound = uplink_cascade(&ch, k).l1_norm() + ch.h_d[k].norm();
            assert!((uplink_gain(&ch, &t, k).sqrt() - bound).abs() <= 1e-12 * bound);
            let omega = alignment_ratio(&ch, &t, k).unwrap();
            assert!(omega.im.abs() <= 1e-10 * omega.norm());
            assert!(
                (omega.re - uplink_cascade(&ch, k).l1_norm() / ch.h_d[k].norm()).abs()
                    <= 1e-10 * omega.re
            );
        }
    }

    #[test]
    fn alignment_ratio_examples() {
        let ch = single(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        let w = alignment_ratio(&ch, &PhaseVector::identity(1), 0).unwrap();
        assert!((w - c(1.0, 0.0)).norm() < 1e-15);
        let dead = single(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(alignment_ratio(&dead, &PhaseVector::identity(1), 0).is_err());
    }

    #[test]
    fn zero_cascade_entries_get_zero_phase() {
        let mut ch = single(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        ch.h[0] = v(&[c(0.0, 0.0)]);
        let t = wit_phases(&ch, 0);
        // Target phase of h_d times unit phase of a zero cascade (1).
        assert!((t.theta()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantization_examples() {
        let p = PhaseVector::from_angles(&[0.1f64]).unwrap();
        assert!((quantize_phases(&p, 1).theta()[0] - c(1.0, 0.0)).norm() < 1e-15);

        let p = PhaseVector::from_angles(&[std::f64::consts::FRAC_PI_4]).unwrap();
        let q = quantize_phases(&p, 2);
        assert!((q.theta()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(q.kind(), PhaseKind::Quantized(2));

        for bits in 1..=5u8 {
            let l = 1usize << bits;
            let step = 2.0 * std::f64::consts::PI / l as f64;
            let angles: Vec<f64> = (0..l).map(|i| i as f64 * step).collect();
            let p = PhaseVector::from_angles(&angles).unwrap();
            let q = quantize_phases(&p, bits);
            for (a, b) in p.theta().iter().zip(q.theta().iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quantization_wraps_to_level_zero() {
        let p = PhaseVector::from_angles(&[-0.05f64, 2.0 * std::f64::consts::PI - 0.05]).unwrap();
        let q = quantize_phases(&p, 3);
        assert!(q.theta().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn mm_single_sensor_reaches_alignment() {
        let ch = small_channels(8, 1, 11);
        let (t, trace) = wet_phase_mm(&ch, &[2.0], 1e-8, 500, 1e-10, 100_000).unwrap();
        let a = charging_cascade(&ch, 0);
        let bound = (a.l1_norm() + ch.g_d[0].norm()).powi(2);
        assert!((charging_gain(&ch, &t, 0) - bound).abs() <= 1e-12 * bound);
        assert!(trace.converged);
    }

    #[test]
    fn mm_with_dead_cascades_stops_immediately() {
        let ch = small_channels(6, 3, 2).without_reflection();
        let w = [1.0, 2.0, 3.0];
        let (t, trace) = wet_phase_mm(&ch, &w, 1e-8, 500, 1e-10, 100_000).unwrap();
        assert!(trace.iterations <= 2);
        let want: f64 = w.iter().zip(&ch.g_d).map(|(w, g)| w * g.norm_sqr()).sum();
        assert!((wet_objective(&ch, &t, &w) - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn mm_is_monotone_and_beats_start() {
        for seed in 0..20 {
            let ch = small_channels(16, 4, seed);
            let w = [1.0, 0.5, 2.0, 0.1];
            let (_, trace) = wet_phase_mm(&ch, &w, 1e-10, 500, 1e-10, 100_000).unwrap();
            for pair in trace.objective_per_iteration.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs());
            }
        }
    }

    #[test]
    fn mm_full_rank_uses_eigen_bound() {
        // More sensors than elements, so Phi1 can be non-singular.
        let ch = small_channels(2, 5, 4);
        let w = [1.0, 1.0, 1.0, 1.0, 1.0];
        let (_, trace) = wet_phase_mm(&ch, &w, 1e-10, 500, 1e-10, 100_000).unwrap();
        assert!(trace.lambda < 0.0);
        for pair in trace.objective_per_iteration.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs());
        }
    }

    #[test]
    fn random_phases_are_reproducible() {
        let a = random_phases::<f64>(10, 3, 1);
        assert_eq!(a, random_phases::<f64>(10, 3, 1));
        assert_ne!(a, random_phases::<f64>(10, 3, 2));
        assert!(a
            .angles()
            .iter()
            .all(|&x| (0.0..2.0 * std::f64::consts::PI).contains(&x)));
    }

    #[test]
    fn rejects_non_unit_entries() {
        assert!(PhaseVector::new(v(&[c(2.0, 0.0)]), PhaseKind::Continuous).is_err());
    }
}
