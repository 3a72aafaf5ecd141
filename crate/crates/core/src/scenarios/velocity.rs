//! Operational velocity from a weak position measurement followed, a time
//! `tau` later, by a strong one.
//!
//! A probe pointer of width `sigma_q` couples to the particle position through
//! `exp(i q x / hbar)`, so the probe momentum reads `x_weak = x + noise` with
//! noise of width `sigma_p = hbar / (2 sigma_q)`. The particle then evolves
//! freely for `tau` and its position `x_strong` is measured projectively.
//! Binning trials by `x_strong`, the average of `(x_strong - x_weak) / tau`
//! estimates the velocity field.
//!
//! The joint outcome distribution is computed exactly on the grids: for probe
//! momentum `p_k` the particle is left in `psi(x) phi~(p_k - x)`, which is then
//! evolved and squared. Trials sample this distribution; [`WisemanPlan::exact_field`]
//! evaluates the same conditional means without sampling.

use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;

use crate::fft::FftPlan;
use crate::jobs::{chunk_bounds, chunk_rng, chunks_for, ChunkedJob};
use crate::pointer::{gaussian_pointer, Grid, PointerState};
use crate::stats::{CompensatedSum, DiscreteSampler, Moments};
use crate::{Error, Result, C64};

/// Trials per Monte Carlo chunk.
pub const TRIALS_PER_CHUNK: u64 = 1 << 15;

pub const DEFAULT_BINS: usize = 21;
pub const DEFAULT_MIN_OCCUPANCY: u64 = 100;

/// Smallest probe grid.
const MIN_PROBE_POINTS: usize = 256;

/// Uniform bins over `mean +- 2 std` of a position density.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub min_occupancy: u64,
}

impl Binning {
    pub fn around(psi: &PointerState, count: usize, min_occupancy: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("at least one bin is required".into()));
        }
        let psi = psi.to_coordinate();
        let (mean, std) = (psi.mean(), psi.std_dev());
        Ok(Self { lo: mean - 2.0 * std, hi: mean + 2.0 * std, count, min_occupancy })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|b| self.lo + (b as f64 + 0.5) * self.width()).collect()
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.count - 1))
    }
}

/// Velocity per bin; `None` marks bins that are too sparsely populated (or,
/// for the guidance oracle, where the density is negligible).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VelocityField {
    pub bin_centers: Vec<f64>,
    pub velocities: Vec<Option<f64>>,
    pub stderr: Vec<Option<f64>>,
    /// Samples per bin (zero for fields computed without sampling).
    pub counts: Vec<u64>,
    pub tau: Option<f64>,
    pub sigma_q: Option<f64>,
}

impl VelocityField {
    /// Mean absolute difference to `other` over bins present in both and
    /// selected by `keep(center)`; `None` if no bin qualifies.
    pub fn mean_abs_deviation(&self, other: &VelocityField, keep: impl Fn(f64) -> bool) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for ((c, a), b) in self.bin_centers.iter().zip(&self.velocities).zip(&other.velocities) {
            if let (Some(a), Some(b), true) = (a, b, keep(*c)) {
                sum += (a - b).abs();
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WisemanConfig {
    pub mass: f64,
    pub tau: f64,
    pub sigma_q: f64,
    pub attempts: u64,
    pub bins: usize,
    pub min_occupancy: u64,
    pub seed: u64,
}

impl WisemanConfig {
    pub fn new(mass: f64, tau: f64, sigma_q: f64, attempts: u64, seed: u64) -> Self {
        Self { mass, tau, sigma_q, attempts, bins: DEFAULT_BINS, min_occupancy: DEFAULT_MIN_OCCUPANCY, seed }
    }
}

/// Probe grid for position coupling to a particle on `system`.
///
/// The probe momentum window must hold the whole particle box plus eight
/// readout widths, and the probe coordinate grid must resolve `sigma_q`.
pub fn probe_grid(system: &Grid, sigma_q: f64) -> Result<Grid> {
    if !(sigma_q > 0.0 && sigma_q.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("sigma_q = {sigma_q} must be positive")));
    }
    let hbar = system.hbar();
    let sigma_p = hbar / (2.0 * sigma_q);
    let dq = (sigma_q / 2.5).min(core::f64::consts::PI * hbar / (0.5 * system.length() + 8.0 * sigma_p));
    let needed = (16.0 * sigma_q / dq).ceil() as usize;
    let n = needed.max(MIN_PROBE_POINTS).next_power_of_two();
    Grid::new(n, n as f64 * dq, hbar)
}

/// Joint weak/strong outcome distribution, prepared for sampling.
#[derive(Debug, Clone)]
pub struct WisemanPlan {
    config: WisemanConfig,
    system: Grid,
    probe: Grid,
    binning: Binning,
    /// Probability of each probe momentum outcome.
    weak_sampler: DiscreteSampler,
    /// `|evolved column k|^2` per probe outcome, unnormalised (row `k`).
    columns: Vec<Vec<f64>>,
    strong_samplers: Vec<Option<DiscreteSampler>>,
}

impl WisemanPlan {
    pub fn new(psi: &PointerState, config: WisemanConfig) -> Result<Self> {
        if !(config.tau > 0.0 && config.tau.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("tau = {} must be positive", config.tau)));
        }
        if !(config.mass > 0.0 && config.mass.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("mass = {} must be positive", config.mass)));
        }
        let psi = psi.to_coordinate();
        let system = *psi.grid();
        let probe = probe_grid(&system, config.sigma_q)?;
        let binning = Binning::around(&psi, config.bins, config.min_occupancy)?;
        let hbar = system.hbar();

        let phi = gaussian_pointer(&probe, config.sigma_q)?;
        let probe_plan = FftPlan::new(probe.n());
        // kernel[j][k] = momentum amplitude at p_k of phi(q) exp(i q x_j / hbar)
        let ns = system.n();
        let np = probe.n();
        let mut m = alloc::vec![C64::new(0.0, 0.0); np * ns];
        let mut buf = alloc::vec![C64::new(0.0, 0.0); np];
        for j in 0..ns {
            let x = system.coordinate(j);
            let amp = psi.amplitudes()[j];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for (i, (b, f)) in buf.iter_mut().zip(phi.amplitudes()).enumerate() {
                *b = f * C64::from_polar(1.0, probe.coordinate(i) * x / hbar);
            }
            probe.forward(&probe_plan, &mut buf);
            for (k, b) in buf.iter().enumerate() {
                m[k * ns + j] = amp * b;
            }
        }

        let system_plan = FftPlan::new(ns);
        let dx = system.spacing();
        let dp = probe.momentum_spacing();
        let mut columns = Vec::with_capacity(np);
        let mut weights = Vec::with_capacity(np);
        let mut strong_samplers = Vec::with_capacity(np);
        for k in 0..np {
            let col = &mut m[k * ns..(k + 1) * ns];
            system.forward(&system_plan, col);
            for (i, a) in col.iter_mut().enumerate() {
                let p = system.momentum(i);
                *a *= C64::from_polar(1.0, -p * p * config.tau / (2.0 * config.mass * hbar));
            }
            system.inverse(&system_plan, col);
            let density: Vec<f64> = col.iter().map(|a| a.norm_sqr()).collect();
            let mut w = CompensatedSum::default();
            density.iter().for_each(|&d| w.add(d * dx * dp));
            weights.push(w.value());
            strong_samplers.push(DiscreteSampler::new(density.iter().copied()));
            columns.push(density);
        }
        let weak_sampler = DiscreteSampler::new(weights)
            .ok_or_else(|| Error::InvalidParameter("probe outcome distribution is empty".into()))?;
        Ok(Self { config, system, probe, binning, weak_sampler, columns, strong_samplers })
    }

    pub fn config(&self) -> &WisemanConfig {
        &self.config
    }

    pub fn binning(&self) -> &Binning {
        &self.binning
    }

    pub fn probe_grid(&self) -> &Grid {
        &self.probe
    }

    /// One trial: `(x_weak, x_strong)`.
    pub fn sample_trial<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let k = self.weak_sampler.sample(rng);
        let sampler = self.strong_samplers[k].as_ref().expect("sampled outcomes have positive weight");
        (self.probe.momentum(k), self.system.coordinate(sampler.sample(rng)))
    }

    /// Exact marginal density of `x_strong` on the particle grid (normalised
    /// as `sum * dx = 1`).
    pub fn strong_marginal(&self) -> Vec<f64> {
        let dp = self.probe.momentum_spacing();
        let mut out = alloc::vec![0.0; self.system.n()];
        for col in &self.columns {
            for (o, d) in out.iter_mut().zip(col) {
                *o += d * dp;
            }
        }
        out
    }

    /// Conditional mean of `(x_strong - x_weak) / tau` per bin, without sampling.
    ///
    /// Bins holding less than `1e-8` of the probability are absent.
    pub fn exact_field(&self) -> VelocityField {
        let nb = self.binning.count;
        let mut mass = alloc::vec![CompensatedSum::default(); nb];
        let mut moment = alloc::vec![CompensatedSum::default(); nb];
        let dx = self.system.spacing();
        let dp = self.probe.momentum_spacing();
        let bins: Vec<Option<usize>> =
            (0..self.system.n()).map(|j| self.binning.bin_of(self.system.coordinate(j))).collect();
        for (k, col) in self.columns.iter().enumerate() {
            let xw = self.probe.momentum(k);
            for (j, d) in col.iter().enumerate() {
                if let Some(b) = bins[j] {
                    let w = d * dx * dp;
                    mass[b].add(w);
                    moment[b].add(w * (self.system.coordinate(j) - xw));
                }
            }
        }
        let velocities = mass
            .iter()
            .zip(&moment)
            .map(|(m, s)| (m.value() > 1e-8).then(|| s.value() / m.value() / self.config.tau))
            .collect();
        VelocityField {
            bin_centers: self.binning.centers(),
            velocities,
            stderr: alloc::vec![None; nb],
            counts: alloc::vec![0; nb],
            tau: Some(self.config.tau),
            sigma_q: Some(self.config.sigma_q),
        }
    }
}

/// Per-bin velocity moments plus moments of every `x_strong` draw.
#[derive(Debug, Clone, Default)]
pub struct WisemanPartial {
    pub bins: Vec<Moments>,
    pub strong: Moments,
}

impl ChunkedJob for WisemanPlan {
    type Partial = WisemanPartial;
    type Output = VelocityField;

    fn chunk_count(&self) -> usize {
        chunks_for(self.config.attempts, TRIALS_PER_CHUNK)
    }

    fn run_chunk(&self, index: usize) -> WisemanPartial {
        let (start, end) = chunk_bounds(self.config.attempts, TRIALS_PER_CHUNK, index);
        let mut rng = chunk_rng(self.config.seed, index);
        let mut partial = WisemanPartial { bins: alloc::vec![Moments::default(); self.binning.count], ..Default::default() };
        for _ in start..end {
            let (xw, xs) = self.sample_trial(&mut rng);
            partial.strong.push(xs);
            if let Some(b) = self.binning.bin_of(xs) {
                partial.bins[b].push((xs - xw) / self.config.tau);
            }
        }
        partial
    }

    fn finish(&self, partials: Vec<WisemanPartial>) -> VelocityField {
        let nb = self.binning.count;
        let mut bins = alloc::vec![Moments::default(); nb];
        for p in &partials {
            for (acc, m) in bins.iter_mut().zip(&p.bins) {
                acc.merge(m);
            }
        }
        let occupied = |m: &Moments| m.count >= self.binning.min_occupancy.max(1);
        VelocityField {
            bin_centers: self.binning.centers(),
            velocities: bins.iter().map(|m| if occupied(m) { m.mean() } else { None }).collect(),
            stderr: bins.iter().map(|m| if occupied(m) { m.std_error() } else { None }).collect(),
            counts: bins.iter().map(|m| m.count).collect(),
            tau: Some(self.config.tau),
            sigma_q: Some(self.config.sigma_q),
        }
    }
}

/// `(hbar / m) Im(psi' / psi)` by central differences, interpolated to the bin centres.
///
/// Bins whose interpolated density is below `1e-8` of the peak are absent.
pub fn guidance_velocity_oracle(psi: &PointerState, mass: f64, binning: &Binning) -> Result<VelocityField> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("mass = {mass} must be positive")));
    }
    let psi = psi.to_coordinate();
    let grid = *psi.grid();
    let n = grid.n();
    let a = psi.amplitudes();
    let dx = grid.spacing();
    let density: Vec<f64> = a.iter().map(|x| x.norm_sqr()).collect();
    let peak = density.iter().copied().fold(0.0, f64::max);
    let velocity: Vec<f64> = (0..n)
        .map(|j| {
            let derivative = (a[(j + 1) % n] - a[(j + n - 1) % n]) / (2.0 * dx);
            if density[j] > 0.0 {
                grid.hbar() / mass * (a[j].conj() * derivative).im / density[j]
            } else {
                0.0
            }
        })
        .collect();
    let x0 = grid.coordinate(0);
    let centers = binning.centers();
    let velocities = centers
        .iter()
        .map(|&c| {
            let t = (c - x0) / dx;
            if !(t >= 0.0 && t < (n - 1) as f64) {
                return None;
            }
            let j = t as usize;
            let f = t - j as f64;
            let rho = density[j] * (1.0 - f) + density[j + 1] * f;
            (rho >= 1e-8 * peak).then(|| velocity[j] * (1.0 - f) + velocity[j + 1] * f)
        })
        .collect();
    let nb = centers.len();
    Ok(VelocityField {
        bin_centers: centers,
        velocities,
        stderr: alloc::vec![None; nb],
        counts: alloc::vec![0; nb],
        tau: None,
        sigma_q: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jobs::run_sequential;
    use crate::pointer::gaussian_packet;

    fn system() -> Grid {
        Grid::new(1024, 40.0, 1.0).unwrap()
    }

    #[test]
    fn oracle_on_carrier_gaussian_is_constant() {
        let psi = gaussian_packet(&system(), 1.0, 0.0, 1.0).unwrap();
        let binning = Binning::around(&psi, DEFAULT_BINS, DEFAULT_MIN_OCCUPANCY).unwrap();
        let field = guidance_velocity_oracle(&psi, 1.0, &binning).unwrap();
        for v in &field.velocities {
            assert!((v.unwrap() - 1.0).abs() < 1e-3);
        }
        let field = guidance_velocity_oracle(&psi, 2.0, &binning).unwrap();
        assert!((field.velocities[10].unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn oracle_on_real_state_is_zero() {
        let psi = gaussian_pointer(&system(), 1.0).unwrap();
        let binning = Binning::around(&psi, 11, 100).unwrap();
        let field = guidance_velocity_oracle(&psi, 1.0, &binning).unwrap();
        assert!(field.velocities.iter().all(|v| v.unwrap() == 0.0));
    }

    #[test]
    fn oracle_masks_nodes() {
        // odd state x exp(-x^2/4) has a node at the centre bin
        let psi = PointerState::from_coordinate_fn(system(), |x| C64::new(x * (-x * x / 4.0).exp(), 0.0)).unwrap();
        let binning = Binning { lo: -0.5, hi: 0.5, count: 1, min_occupancy: 1 };
        let field = guidance_velocity_oracle(&psi, 1.0, &binning).unwrap();
        // centre 0 is a grid point with zero density
        assert_eq!(field.velocities[0], None);
    }

    #[test]
    fn binning_edges() {
        let b = Binning { lo: -1.0, hi: 1.0, count: 4, min_occupancy: 1 };
        assert_eq!(b.bin_of(-1.0), Some(0));
        assert_eq!(b.bin_of(0.99), Some(3));
        assert_eq!(b.bin_of(1.0), None);
        assert_eq!(b.centers()[0], -0.75);
    }

    #[test]
    fn zero_attempts_leave_all_bins_absent() {
        let psi = gaussian_packet(&system(), 1.0, 0.0, 1.0).unwrap();
        let plan = WisemanPlan::new(&psi, WisemanConfig::new(1.0, 0.1, 0.2, 0, 1)).unwrap();
        let field = run_sequential(&plan);
        assert!(field.velocities.iter().all(Option::is_none));
    }

    #[test]
    fn invalid_parameters() {
        let psi = gaussian_packet(&system(), 1.0, 0.0, 1.0).unwrap();
        assert!(WisemanPlan::new(&psi, WisemanConfig::new(1.0, 0.0, 0.2, 10, 1)).is_err());
        assert!(WisemanPlan::new(&psi, WisemanConfig::new(0.0, 0.1, 0.2, 10, 1)).is_err());
    }

    #[test]
    fn coupling_leaves_position_marginal_nearly_unchanged() {
        let psi = gaussian_packet(&system(), 1.0, 0.0, 1.0).unwrap();
        let plan = WisemanPlan::new(&psi, WisemanConfig::new(1.0, 0.05, 0.05, 0, 1)).unwrap();
        let free = psi.free_evolve(0.05, 1.0).unwrap().density();
        let marginal = plan.strong_marginal();
        let dx = system().spacing();
        let tv: f64 = free.iter().zip(&marginal).map(|(a, b)| (a - b).abs() * dx).sum::<f64>() / 2.0;
        assert!(tv < 1e-3, "total variation {tv}");
        let total: f64 = marginal.iter().sum::<f64>() * dx;
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_packet_field_is_antisymmetric() {
        let psi = gaussian_packet(&system(), 1.0, 0.0, 0.0).unwrap();
        let plan = WisemanPlan::new(&psi, WisemanConfig::new(1.0, 0.1, 0.2, 200_000, 5)).unwrap();
        let exact = plan.exact_field();
        let mc = run_sequential(&plan);
        let nb = exact.bin_centers.len();
        for i in 0..nb / 2 {
            let j = nb - 1 - i;
            assert!((exact.bin_centers[i] + exact.bin_centers[j]).abs() < 1e-9);
            let (a, b) = (exact.velocities[i].unwrap(), exact.velocities[j].unwrap());
            assert!((a + b).abs() < 1e-6, "bins {i},{j}: {a} {b}");
            if let (Some(a), Some(b)) = (mc.velocities[i], mc.velocities[j]) {
                let se = mc.stderr[i].unwrap().hypot(mc.stderr[j].unwrap());
                assert!((a + b).abs() < 4.0 * se, "bins {i},{j}: {a} {b} (se {se})");
            }
        }
    }

    #[test]
    fn exact_field_approaches_oracle() {
        let psi = gaussian_packet(&system(), 1.0, 0.0, 1.0).unwrap();
        let binning = Binning::around(&psi, DEFAULT_BINS, DEFAULT_MIN_OCCUPANCY).unwrap();
        let oracle = guidance_velocity_oracle(&psi, 1.0, &binning).unwrap();
        let mut last = f64::INFINITY;
        for (tau, sigma_q) in [(0.1, 0.2), (0.05, 0.1), (0.025, 0.05)] {
            let plan = WisemanPlan::new(&psi, WisemanConfig::new(1.0, tau, sigma_q, 0, 1)).unwrap();
            let dev = plan.exact_field().mean_abs_deviation(&oracle, |_| true).unwrap();
            assert!(dev < last, "tau {tau}: {dev}");
            last = dev;
        }
        assert!(last < 0.02, "{last}");
    }
}
