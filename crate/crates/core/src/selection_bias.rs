//! Classical post-selection demonstrations.
//!
//! - Pendulums: a large ensemble of pendulums with uniformly random
//!   amplitude, frequency and phase contains members matching any chosen
//!   Fourier chord. Selecting them reconstructs the chord, although nothing
//!   in the full ensemble prefers it.
//! - Berkson's paradox: two independent binary traits become negatively
//!   correlated once only subjects with at least one trait are admitted.

use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;
use rand::Rng;

use crate::jobs::{chunk_bounds, chunk_rng, chunks_for, run_sequential, ChunkedJob};
use crate::stats::chi_square_uniform;
use crate::{Error, Result};

/// Pendulums per Monte Carlo chunk.
pub const PENDULUMS_PER_CHUNK: u64 = 1 << 16;

/// Samples per fundamental period for waveform comparison.
pub const WAVEFORM_SAMPLES: usize = 512;

/// Histogram bins per parameter for the marginal uniformity check.
pub const MARGINAL_BINS: usize = 20;

/// `amplitude * cos(frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pendulum {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Pendulum {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("amplitude {amplitude} must be >= 0")));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("frequency {frequency} must be > 0")));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("phase must be finite".into()));
        }
        Ok(Self { amplitude, frequency, phase: wrap_angle(phase) })
    }

    #[inline]
    pub fn displacement(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }
}

/// Angle reduced to `[0, 2 pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x % TAU;
    let r = if r < 0.0 { r + TAU } else { r };
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Chord to post-select for, with matching tolerances.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FourierTarget {
    pub components: Vec<Pendulum>,
    /// Relative tolerance on amplitude.
    pub amplitude_tol: f64,
    /// Relative tolerance on frequency.
    pub frequency_tol: f64,
    /// Absolute tolerance on phase, radians.
    pub phase_tol: f64,
}

impl FourierTarget {
    pub fn new(components: Vec<Pendulum>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("target needs at least one component".into()));
        }
        for (i, a) in components.iter().enumerate() {
            if components[i + 1..].iter().any(|b| b.frequency == a.frequency) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "duplicate target frequency {}",
                    a.frequency
                )));
            }
        }
        Ok(Self { components, amplitude_tol: 0.02, frequency_tol: 0.02, phase_tol: 0.1 })
    }

    /// Three-component chord used by default.
    pub fn default_chord() -> Self {
        Self::new(alloc::vec![
            Pendulum { amplitude: 1.0, frequency: 1.0, phase: 0.5 },
            Pendulum { amplitude: 0.6, frequency: 1.5, phase: 2.0 },
            Pendulum { amplitude: 0.4, frequency: 2.0, phase: 4.0 },
        ])
        .expect("distinct frequencies")
    }

    pub fn matches(&self, index: usize, p: &Pendulum) -> bool {
        let t = &self.components[index];
        (p.amplitude - t.amplitude).abs() <= self.amplitude_tol * t.amplitude
            && (p.frequency - t.frequency).abs() <= self.frequency_tol * t.frequency
            && angle_distance(p.phase, t.phase) <= self.phase_tol
    }

    /// Sample times over one period of the lowest target frequency.
    pub fn sample_times(&self) -> Vec<f64> {
        let lowest = self.components.iter().map(|c| c.frequency).fold(f64::INFINITY, f64::min);
        let period = TAU / lowest;
        (0..WAVEFORM_SAMPLES).map(|i| period * i as f64 / WAVEFORM_SAMPLES as f64).collect()
    }

    pub fn waveform(&self, times: &[f64]) -> Vec<f64> {
        superpose(&self.components, times)
    }
}

/// Sum of pendulum displacements at each time.
pub fn superpose(pendulums: &[Pendulum], times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| pendulums.iter().map(|p| p.displacement(t)).sum()).collect()
}

/// Uniform sampling ranges; phase is always uniform on `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PendulumRanges {
    pub amplitude: (f64, f64),
    pub frequency: (f64, f64),
}

impl Default for PendulumRanges {
    fn default() -> Self {
        Self { amplitude: (0.0, 1.1), frequency: (0.8, 2.2) }
    }
}

impl PendulumRanges {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Pendulum {
        let (a0, a1) = self.amplitude;
        let (f0, f1) = self.frequency;
        Pendulum {
            amplitude: a0 + (a1 - a0) * rng.random::<f64>(),
            frequency: f0 + (f1 - f0) * rng.random::<f64>(),
            phase: TAU * rng.random::<f64>(),
        }
    }

    fn bin(value: f64, (lo, hi): (f64, f64)) -> usize {
        (((value - lo) / (hi - lo) * MARGINAL_BINS as f64) as usize).min(MARGINAL_BINS - 1)
    }
}

/// Histograms of each parameter over the full ensemble.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Marginals {
    pub amplitude: Vec<u64>,
    pub frequency: Vec<u64>,
    pub phase: Vec<u64>,
}

impl Marginals {
    fn empty() -> Self {
        let z = alloc::vec![0; MARGINAL_BINS];
        Self { amplitude: z.clone(), frequency: z.clone(), phase: z }
    }

    fn merge(&mut self, other: &Marginals) {
        for (a, b) in [
            (&mut self.amplitude, &other.amplitude),
            (&mut self.frequency, &other.frequency),
            (&mut self.phase, &other.phase),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    /// Chi-square statistics against uniformity, `(amplitude, frequency, phase)`,
    /// each with `MARGINAL_BINS - 1` degrees of freedom.
    pub fn chi_square(&self) -> (f64, f64, f64) {
        (
            chi_square_uniform(&self.amplitude),
            chi_square_uniform(&self.frequency),
            chi_square_uniform(&self.phase),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PendulumOutcome {
    pub n: u64,
    /// Every pendulum matching some target component, in draw order.
    pub subensemble: Vec<Pendulum>,
    /// Nearest match per target component.
    pub representatives: Vec<Pendulum>,
    /// Relative L2 distance between reconstructed and target waveforms.
    pub reconstruction_error: f64,
    pub marginals: Marginals,
}

/// Candidate nearest to a target component, with its waveform distance.
#[derive(Debug, Clone, Copy)]
struct Best {
    distance: f64,
    pendulum: Pendulum,
}

#[derive(Debug, Clone)]
pub struct PendulumPartial {
    matched: Vec<Pendulum>,
    best: Vec<Option<Best>>,
    marginals: Marginals,
}

/// Chunked pendulum post-selection.
#[derive(Debug, Clone)]
pub struct PendulumPlan {
    n: u64,
    seed: u64,
    target: FourierTarget,
    ranges: PendulumRanges,
    times: Vec<f64>,
    target_waves: Vec<Vec<f64>>,
}

impl PendulumPlan {
    pub fn new(n: u64, target: FourierTarget, ranges: PendulumRanges, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if target.components.is_empty() {
            return Err(Error::InvalidParameter("target needs at least one component".into()));
        }
        let times = target.sample_times();
        let target_waves = target.components.iter().map(|c| superpose(&[*c], &times)).collect();
        Ok(Self { n, seed, target, ranges, times, target_waves })
    }

    fn distance(&self, index: usize, p: &Pendulum) -> f64 {
        self.target_waves[index]
            .iter()
            .zip(&self.times)
            .map(|(w, &t)| {
                let d = p.displacement(t) - w;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl ChunkedJob for PendulumPlan {
    type Partial = PendulumPartial;
    type Output = Result<PendulumOutcome>;

    fn chunk_count(&self) -> usize {
        chunks_for(self.n, PENDULUMS_PER_CHUNK)
    }

    fn run_chunk(&self, index: usize) -> PendulumPartial {
        let (start, end) = chunk_bounds(self.n, PENDULUMS_PER_CHUNK, index);
        let mut rng = chunk_rng(self.seed, index);
        let mut partial = PendulumPartial {
            matched: Vec::new(),
            best: alloc::vec![None; self.target.components.len()],
            marginals: Marginals::empty(),
        };
        for _ in start..end {
            let p = self.ranges.draw(&mut rng);
            partial.marginals.amplitude[PendulumRanges::bin(p.amplitude, self.ranges.amplitude)] += 1;
            partial.marginals.frequency[PendulumRanges::bin(p.frequency, self.ranges.frequency)] += 1;
            partial.marginals.phase[PendulumRanges::bin(p.phase, (0.0, TAU))] += 1;
            let mut any = false;
            for (i, best) in partial.best.iter_mut().enumerate() {
                if self.target.matches(i, &p) {
                    any = true;
                    let distance = self.distance(i, &p);
                    if best.map_or(true, |b| distance < b.distance) {
                        *best = Some(Best { distance, pendulum: p });
                    }
                }
            }
            if any {
                partial.matched.push(p);
            }
        }
        partial
    }

    fn finish(&self, partials: Vec<PendulumPartial>) -> Result<PendulumOutcome> {
        let mut marginals = Marginals::empty();
        let mut subensemble = Vec::new();
        let mut best: Vec<Option<Best>> = alloc::vec![None; self.target.components.len()];
        for p in &partials {
            marginals.merge(&p.marginals);
            subensemble.extend_from_slice(&p.matched);
            for (acc, b) in best.iter_mut().zip(&p.best) {
                if let Some(b) = b {
                    // strict comparison keeps the earliest chunk on ties
                    if acc.map_or(true, |a| b.distance < a.distance) {
                        *acc = Some(*b);
                    }
                }
            }
        }
        let representatives = best
            .iter()
            .enumerate()
            .map(|(index, b)| b.map(|b| b.pendulum).ok_or(Error::TargetUnmatched { index }))
            .collect::<Result<Vec<_>>>()?;
        let target = self.target.waveform(&self.times);
        let rebuilt = superpose(&representatives, &self.times);
        let num: f64 = target.iter().zip(&rebuilt).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = target.iter().map(|a| a * a).sum();
        Ok(PendulumOutcome {
            n: self.n,
            subensemble,
            representatives,
            reconstruction_error: (num / den).sqrt(),
            marginals,
        })
    }
}

/// Draws `n` pendulums, keeps those matching the target, and rebuilds the chord.
pub fn pendulum_postselect(n: u64, target: &FourierTarget, seed: u64) -> Result<PendulumOutcome> {
    run_sequential(&PendulumPlan::new(n, target.clone(), PendulumRanges::default(), seed)?)
}

/// Admission-rule parameters: base rates of the two independent traits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BerksonConfig {
    pub rate_a: f64,
    pub rate_b: f64,
}

/// Counts of the 2x2 table `[a][b]`.
pub type Table = [[u64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BerksonOutcome {
    pub n: u64,
    pub n_admitted: u64,
    pub r_unconditional: f64,
    pub r_conditional: f64,
    pub table: Table,
}

/// Pearson correlation of two binary variables from their 2x2 table.
pub fn phi_coefficient(t: &Table) -> Option<f64> {
    let [[n00, n01], [n10, n11]] = t.map(|r| r.map(|x| x as f64));
    let a1 = n10 + n11;
    let a0 = n00 + n01;
    let b1 = n01 + n11;
    let b0 = n00 + n10;
    let den = a1 * a0 * b1 * b0;
    (den > 0.0).then(|| (n11 * n00 - n10 * n01) / den.sqrt())
}

/// Closed-form correlation among admitted subjects for independent traits
/// with rates `a`, `b` and admission on `a OR b`.
pub fn berkson_conditional_correlation(a: f64, b: f64) -> f64 {
    let z = 1.0 - (1.0 - a) * (1.0 - b);
    let (pa, pb) = (a / z, b / z);
    let cov = a * b / z - pa * pb;
    cov / (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt()
}

#[derive(Debug, Clone)]
pub struct BerksonPlan {
    n: u64,
    seed: u64,
    config: BerksonConfig,
}

impl BerksonPlan {
    pub fn new(n: u64, config: BerksonConfig, seed: u64) -> Result<Self> {
        if n < 1000 {
            return Err(Error::InvalidParameter(alloc::format!("n = {n} must be at least 1000")));
        }
        for r in [config.rate_a, config.rate_b] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidParameter(alloc::format!("base rate {r} outside [0, 1]")));
            }
        }
        Ok(Self { n, seed, config })
    }
}

impl ChunkedJob for BerksonPlan {
    type Partial = Table;
    type Output = Result<BerksonOutcome>;

    fn chunk_count(&self) -> usize {
        chunks_for(self.n, PENDULUMS_PER_CHUNK)
    }

    fn run_chunk(&self, index: usize) -> Table {
        let (start, end) = chunk_bounds(self.n, PENDULUMS_PER_CHUNK, index);
        let mut rng = chunk_rng(self.seed, index);
        let mut table = [[0u64; 2]; 2];
        for _ in start..end {
            let a = rng.random::<f64>() < self.config.rate_a;
            let b = rng.random::<f64>() < self.config.rate_b;
            table[a as usize][b as usize] += 1;
        }
        table
    }

    fn finish(&self, partials: Vec<Table>) -> Result<BerksonOutcome> {
        let mut table = [[0u64; 2]; 2];
        for t in &partials {
            for i in 0..2 {
                for j in 0..2 {
                    table[i][j] += t[i][j];
                }
            }
        }
        let degenerate = |what: &str| Error::DegenerateSample(alloc::format!("a marginal is constant {what}"));
        let r_unconditional = phi_coefficient(&table).ok_or_else(|| degenerate("in the full sample"))?;
        let mut admitted = table;
        admitted[0][0] = 0;
        let r_conditional = phi_coefficient(&admitted).ok_or_else(|| degenerate("among admitted subjects"))?;
        Ok(BerksonOutcome {
            n: self.n,
            n_admitted: self.n - table[0][0],
            r_unconditional,
            r_conditional,
            table,
        })
    }
}

/// Correlation of two independent traits before and after admitting only
/// subjects with at least one of them.
pub fn berkson_demo(n: u64, config: BerksonConfig, seed: u64) -> Result<BerksonOutcome> {
    run_sequential(&BerksonPlan::new(n, config, seed)?)
}
