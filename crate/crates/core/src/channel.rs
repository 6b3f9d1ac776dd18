//! Channel realizations for the reference 3D deployment.
//!
//! Links touching the reflecting surface (`g0`, `g_r[k]`, `h_r`) are Rician:
//! a LOS steering vector mixed with i.i.d. CN(0, 1) scattering, scaled by the
//! square root of the path loss. Direct links are Rayleigh.
//!
//! Every link draws from its own ChaCha8 stream keyed by `(seed, link id)`,
//! so a realization does not depend on the order links are generated in, and
//! growing `K` or `N_R` extends a realization instead of reshuffling it.

use std::io::{Read, Write};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{db_to_linear, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::ComplexVector;
use crate::Real;

pub type Point<T> = [T; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry<T> {
    pub es_pos: Point<T>,
    pub ap_pos: Point<T>,
    pub irs_pos: Point<T>,
    pub sensor_positions: Vec<Point<T>>,
    /// Spacing `d_I` between neighbouring sensors, meters.
    pub sensor_spacing: T,
}

impl<T: Real> Geometry<T> {
    /// ES at (-10, 0, 0), AP at (10, 0, 0), IRS at (-2, 6, 0), 1 m sensor spacing.
    pub fn reference(k: usize) -> Self {
        let p = |x: f64, y: f64| [T::lit(x), T::lit(y), T::zero()];
        let mut g = Self {
            es_pos: p(-10.0, 0.0),
            ap_pos: p(10.0, 0.0),
            irs_pos: p(-2.0, 6.0),
            sensor_positions: Vec::new(),
            sensor_spacing: T::one(),
        };
        g.place_sensors(k);
        g
    }

    /// Lays out `k` sensors on the z axis, alternating sides of the origin:
    /// sensor `l` (1-based) sits at `z = l d_I / 2` for odd `l` and
    /// `z = -(l - 1) d_I / 2` for even `l`.
    pub fn place_sensors(&mut self, k: usize) {
        let half = self.sensor_spacing / T::lit(2.0);
        self.sensor_positions = (1..=k)
            .map(|l| {
                let z = if l % 2 == 1 {
                    T::count(l) * half
                } else {
                    -T::count(l - 1) * half
                };
                [T::zero(), T::zero(), z]
            })
            .collect();
    }

    pub fn validate(&self) -> Result<()> {
        let mut links = vec![(self.es_pos, self.irs_pos), (self.irs_pos, self.ap_pos)];
        for &s in &self.sensor_positions {
            links.extend([(self.es_pos, s), (s, self.ap_pos), (self.irs_pos, s)]);
        }
        for (a, b) in links {
            let d = distance(&a, &b);
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "zero or non-finite link distance between {a:?} and {b:?}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FadingParams<T> {
    /// Rician factor `K1` as a linear ratio; infinity means pure LOS.
    pub rician_k1: T,
    /// Path loss at 1 m, linear.
    pub pathloss_a: T,
    pub pathloss_exponent: T,
    /// Element spacing over carrier wavelength.
    pub spacing_over_wavelength: T,
    /// Use `cos(phi)` in the steering exponent instead of `phi` itself.
    pub steering_uses_cos: bool,
}

impl<T: Real> Default for FadingParams<T> {
    /// `K1` = 6 dB, `A` = -20 dB, exponent 2.2, half-wavelength spacing.
    fn default() -> Self {
        Self {
            rician_k1: db_to_linear(T::lit(6.0)),
            pathloss_a: db_to_linear(T::lit(-20.0)),
            pathloss_exponent: T::lit(2.2),
            spacing_over_wavelength: T::lit(0.5),
            steering_uses_cos: false,
        }
    }
}

impl<T: Real> FadingParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rician_k1 >= T::zero()) {
            return Err(Error::InvalidInput("rician_k1 must be non-negative".into()));
        }
        if !(self.pathloss_a > T::zero()) || !(self.pathloss_exponent > T::zero()) {
            return Err(Error::InvalidInput(
                "path loss constant and exponent must be positive".into(),
            ));
        }
        if !(self.spacing_over_wavelength >= T::zero()) {
            return Err(Error::InvalidInput(
                "element spacing must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// One realization of every channel coefficient.
///
/// Vectors are indexed by reflecting element. `g_r[k]` is the IRS to sensor
/// `k` link used for charging and `h[k]` the sensor to IRS link used for
/// uplink data; by reciprocity `h[k]` is the transpose of `g_r[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    pub g0: ComplexVector<T>,
    pub g_r: Vec<ComplexVector<T>>,
    pub g_d: Vec<Complex<T>>,
    pub h: Vec<ComplexVector<T>>,
    pub h_r: ComplexVector<T>,
    pub h_d: Vec<Complex<T>>,
}

impl<T: Real> ChannelSet<T> {
    pub fn n_r(&self) -> usize {
        self.g0.len()
    }

    pub fn k(&self) -> usize {
        self.g_d.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n_r(), self.k());
        if k == 0 || self.g_r.len() != k || self.h.len() != k || self.h_d.len() != k {
            return Err(Error::InvalidInput(
                "per-sensor channel lists disagree on K".into(),
            ));
        }
        if self.h_r.len() != n || self.g_r.iter().chain(&self.h).any(|v| v.len() != n) {
            return Err(Error::InvalidInput(
                "reflecting channel vectors disagree on N_R".into(),
            ));
        }
        if self
            .g_d
            .iter()
            .chain(&self.h_d)
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput("direct channel is not finite".into()));
        }
        Ok(())
    }

    /// Copy with every link through the reflecting surface set to zero.
    pub fn without_reflection(&self) -> Self {
        let n = self.n_r();
        let zero = || ComplexVector::zeros(n);
        Self {
            g0: zero(),
            g_r: vec![zero(); self.k()],
            g_d: self.g_d.clone(),
            h: vec![zero(); self.k()],
            h_r: zero(),
            h_d: self.h_d.clone(),
        }
    }

    /// Writes the realization as CSV rows `link,index,re,im`.
    ///
    /// Link ids are `g0`, `h_r`, `g_r.k`, `h.k`, `g_d.k` and `h_d.k` with `k`
    /// zero-based; scalar links use index 0.
    pub fn write_table<W: Write>(&self, out: W) -> Result<()> {
        let mut rows: Vec<(String, usize, Complex<T>)> = Vec::new();
        let mut push_vec = |link: String, v: &ComplexVector<T>| {
            rows.extend(v.iter().enumerate().map(|(i, &z)| (link.clone(), i, z)));
        };
        push_vec("g0".into(), &self.g0);
        push_vec("h_r".into(), &self.h_r);
        for k in 0..self.k() {
            push_vec(format!("g_r.{k}"), &self.g_r[k]);
            push_vec(format!("h.{k}"), &self.h[k]);
        }
        for k in 0..self.k() {
            rows.push((format!("g_d.{k}"), 0, self.g_d[k]));
            rows.push((format!("h_d.{k}"), 0, self.h_d[k]));
        }

        let io = |e: csv::Error| Error::InvalidInput(format!("channel table: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["link", "index", "re", "im"]).map_err(io)?;
        for (link, i, z) in rows {
            w.write_record([
                link,
                i.to_string(),
                format!("{:.17e}", z.re.as_f64()),
                format!("{:.17e}", z.im.as_f64()),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses a table produced by [`ChannelSet::write_table`].
    pub fn read_table<R: Read>(input: R) -> Result<Self> {
        let mut rows = LinkRows::<T>::new();
        let mut r = csv::Reader::from_reader(input);
        for (line, rec) in r.records().enumerate() {
            let bad =
                |what: &str| Error::InvalidInput(format!("channel table row {}: {what}", line + 2));
            let rec = rec.map_err(|e| bad(&e.to_string()))?;
            if rec.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let index: usize = rec[1].parse().map_err(|_| bad("bad index"))?;
            let re: f64 = rec[2].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = rec[3].parse().map_err(|_| bad("bad imaginary part"))?;
            rows.entry(rec[0].to_string())
                .or_default()
                .insert(index, Complex::new(T::lit(re), T::lit(im)));
        }
        let g0 = take_vec(&mut rows, "g0")?;
        let h_r = take_vec(&mut rows, "h_r")?;
        let (mut g_r, mut h, mut g_d, mut h_d) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for k in 0.. {
            if !rows.contains_key(&format!("g_d.{k}")) {
                break;
            }
            g_r.push(take_vec(&mut rows, &format!("g_r.{k}"))?);
            h.push(take_vec(&mut rows, &format!("h.{k}"))?);
            g_d.push(take_vec(&mut rows, &format!("g_d.{k}"))?[0]);
            h_d.push(take_vec(&mut rows, &format!("h_d.{k}"))?[0]);
        }
        if let Some(extra) = rows.keys().next() {
            return Err(Error::InvalidInput(format!(
                "unexpected link {extra} in channel table"
            )));
        }
        let set = Self {
            g0,
            g_r,
            g_d,
            h,
            h_r,
            h_d,
        };
        set.validate()?;
        Ok(set)
    }
}

type LinkRows<T> =
    std::collections::BTreeMap<String, std::collections::BTreeMap<usize, Complex<T>>>;

fn take_vec<T: Real>(rows: &mut LinkRows<T>, link: &str) -> Result<ComplexVector<T>> {
    let entries = rows
        .remove(link)
        .ok_or_else(|| Error::InvalidInput(format!("channel table lacks link {link}")))?;
    if entries.keys().copied().ne(0..entries.len()) {
        return Err(Error::InvalidInput(format!(
            "link {link} has gaps in its indices"
        )));
    }
    ComplexVector::new(entries.into_values().collect())
}

pub fn distance<T: Real>(a: &Point<T>, b: &Point<T>) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<T>()
        .sqrt()
}

/// Large-scale gain `A d^-eps`.
pub fn path_loss<T: Real>(d: T, params: &FadingParams<T>) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::Domain {
            function: "path_loss",
            value: d.as_f64(),
        });
    }
    Ok(params.pathloss_a * d.powf(-params.pathloss_exponent))
}

/// Uniform linear array response with entries `exp(-j 2 pi (d/lambda) m phi)`.
pub fn los_steering<T: Real>(n_elements: usize, phi: T, spacing_ratio: T) -> ComplexVector<T> {
    let step = -T::lit(2.0) * T::PI() * spacing_ratio * phi;
    let angles: Vec<T> = (0..n_elements).map(|m| step * T::count(m)).collect();
    ComplexVector::from_angles(&angles).expect("steering vector is non-empty and finite")
}

/// Angle between the array axis and the direction towards `endpoint`,
/// `acos((x_end - x_irs) / d)`.
pub fn arrival_angle<T: Real>(irs: &Point<T>, endpoint: &Point<T>) -> T {
    let d = distance(irs, endpoint);
    ((endpoint[0] - irs[0]) / d)
        .max(-T::one())
        .min(T::one())
        .acos()
}

#[derive(Debug, Clone, Copy)]
enum Link {
    G0,
    HR,
    GR(usize),
    GD(usize),
    HD(usize),
}

impl Link {
    fn stream(self) -> u64 {
        match self {
            Link::G0 => 1,
            Link::HR => 2,
            Link::GR(k) => (3 << 32) | k as u64,
            Link::GD(k) => (4 << 32) | k as u64,
            Link::HD(k) => (5 << 32) | k as u64,
        }
    }
}

/// `n` i.i.d. CN(0, 1) samples from the stream of `link`.
fn cn_draws<T: Real>(seed: u64, link: Link, n: usize) -> Vec<Complex<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(link.stream());
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex::new(T::lit(re * scale), T::lit(im * scale))
        })
        .collect()
}

fn rician_link<T: Real>(
    cfg: &SystemConfig<T>,
    seed: u64,
    link: Link,
    endpoint: &Point<T>,
) -> Result<ComplexVector<T>> {
    let f = &cfg.fading;
    let irs = &cfg.geometry.irs_pos;
    let pl = path_loss(distance(irs, endpoint), f)?;
    let mut phi = arrival_angle(irs, endpoint);
    if f.steering_uses_cos {
        phi = phi.cos();
    }
    let (w_los, w_nlos) = if f.rician_k1.is_infinite() {
        (T::one(), T::zero())
    } else {
        let k1 = f.rician_k1;
        (
            (k1 / (k1 + T::one())).sqrt(),
            (T::one() / (k1 + T::one())).sqrt(),
        )
    };
    let los = los_steering(cfg.n_r, phi, f.spacing_over_wavelength);
    let nlos = cn_draws::<T>(seed, link, cfg.n_r);
    let amp = pl.sqrt();
    ComplexVector::new(
        los.iter()
            .zip(&nlos)
            .map(|(l, s)| (l * w_los + s * w_nlos) * amp)
            .collect(),
    )
}

fn rayleigh_link<T: Real>(
    cfg: &SystemConfig<T>,
    seed: u64,
    link: Link,
    a: &Point<T>,
    b: &Point<T>,
) -> Result<Complex<T>> {
    let pl = path_loss(distance(a, b), &cfg.fading)?;
    Ok(cn_draws::<T>(seed, link, 1)[0] * pl.sqrt())
}

/// Draws one channel realization for `cfg` from `seed`.
pub fn synth_channels<T: Real>(cfg: &SystemConfig<T>, seed: u64) -> Result<ChannelSet<T>> {
    cfg.validate()?;
    let geo = &cfg.geometry;
    let g0 = rician_link(cfg, seed, Link::G0, &geo.es_pos)?;
    let h_r = rician_link(cfg, seed, Link::HR, &geo.ap_pos)?;
    let mut g_r = Vec::with_capacity(cfg.k);
    let mut g_d = Vec::with_capacity(cfg.k);
    let mut h_d = Vec::with_capacity(cfg.k);
    for (k, s) in geo.sensor_positions.iter().enumerate() {
        g_r.push(rician_link(cfg, seed, Link::GR(k), s)?);
        g_d.push(rayleigh_link(cfg, seed, Link::GD(k), &geo.es_pos, s)?);
        h_d.push(rayleigh_link(cfg, seed, Link::HD(k), s, &geo.ap_pos)?);
    }
    let h = g_r.clone();
    Ok(ChannelSet {
        g0,
        g_r,
        g_d,
        h,
        h_r,
        h_d,
    })
}
