//! Discretised 1-D pointer wavefunctions on a periodic grid.
//!
//! Coordinates are `q_j = (j - n/2) dq` with `dq = L/n`; momenta are
//! `p_k = (k - n/2) dp` with `dp = 2 pi hbar / L`. The momentum amplitudes are
//! samples of the continuous transform
//! `phi(p) = (2 pi hbar)^{-1/2} sum_j psi_j e^{-i p q_j / hbar} dq`, so both
//! representations are normalised as `sum |.|^2 * spacing = 1` and the
//! transform pair is exactly unitary.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fft::FftPlan;
use crate::stats::DiscreteSampler;
use crate::{Error, Result, C64};

/// Tolerance on `sum |psi|^2 * spacing` for a valid pointer state.
pub const POINTER_NORM_TOL: f64 = 1e-10;

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    n: usize,
    length: f64,
    hbar: f64,
}

impl Grid {
    /// `n` must be a power of two and at least 64.
    pub fn new(n: usize, length: f64, hbar: f64) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(alloc::format!("n = {n} must be a power of two >= 64")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(alloc::format!("length = {length} must be positive")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("hbar = {hbar} must be positive")));
        }
        Ok(Self { n, length, hbar })
    }

    /// Grid for a Gaussian pointer of width `sigma_q` whose momentum profile
    /// may be displaced by up to `momentum_shift`.
    ///
    /// The box is `L = 2 sqrt(pi n) sigma_q`, which puts equally many standard
    /// deviations inside the coordinate and momentum windows; `n` starts at
    /// [`DEFAULT_POINTS`] and doubles until the momentum window covers
    /// `8 sigma_p + momentum_shift`.
    pub fn for_pointer(sigma_q: f64, hbar: f64, momentum_shift: f64) -> Result<Self> {
        if !(sigma_q > 0.0 && sigma_q.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("sigma_q = {sigma_q} must be positive")));
        }
        let sigma_p = hbar / (2.0 * sigma_q);
        let mut n = DEFAULT_POINTS;
        loop {
            let grid = Self::new(n, 2.0 * (PI * n as f64).sqrt() * sigma_q, hbar)?;
            if grid.max_momentum() >= 8.0 * sigma_p + momentum_shift.abs() || n >= 1 << 20 {
                return Ok(grid);
            }
            n *= 2;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `dq = L / n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// `dp = 2 pi hbar / L`.
    pub fn momentum_spacing(&self) -> f64 {
        2.0 * PI * self.hbar / self.length
    }

    pub fn max_momentum(&self) -> f64 {
        0.5 * self.n as f64 * self.momentum_spacing()
    }

    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * self.n as f64) * self.spacing()
    }

    #[inline]
    pub fn momentum(&self, k: usize) -> f64 {
        (k as f64 - 0.5 * self.n as f64) * self.momentum_spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coordinate(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.momentum(k)).collect()
    }

    fn plan(&self) -> FftPlan {
        FftPlan::new(self.n)
    }

    /// Coordinate amplitudes to momentum amplitudes, in place.
    pub(crate) fn forward(&self, plan: &FftPlan, data: &mut [C64]) {
        alternate_signs(data);
        plan.forward(data);
        let scale = self.spacing() / (2.0 * PI * self.hbar).sqrt();
        for (k, x) in data.iter_mut().enumerate() {
            *x *= if k % 2 == 0 { scale } else { -scale };
        }
    }

    /// Momentum amplitudes to coordinate amplitudes, in place.
    pub(crate) fn inverse(&self, plan: &FftPlan, data: &mut [C64]) {
        alternate_signs(data);
        plan.inverse(data);
        let scale = self.momentum_spacing() / (2.0 * PI * self.hbar).sqrt();
        for (j, x) in data.iter_mut().enumerate() {
            *x *= if j % 2 == 0 { scale } else { -scale };
        }
    }
}

// The centred index offsets contribute (-1)^j (-1)^k e^{-i pi n/2}; the last
// factor is 1 because n is a multiple of 4.
fn alternate_signs(data: &mut [C64]) {
    data.iter_mut().skip(1).step_by(2).for_each(|x| *x = -*x);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Representation {
    Coordinate,
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerState {
    grid: Grid,
    amplitudes: Vec<C64>,
    representation: Representation,
}

impl PointerState {
    /// Validates length and normalisation (`sum |a|^2 * spacing = 1` within 1e-10).
    pub fn new(grid: Grid, amplitudes: Vec<C64>, representation: Representation) -> Result<Self> {
        if amplitudes.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, found: amplitudes.len() });
        }
        let state = Self { grid, amplitudes, representation };
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > POINTER_NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(grid: Grid, amplitudes: Vec<C64>, representation: Representation) -> Result<Self> {
        if amplitudes.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, found: amplitudes.len() });
        }
        let mut state = Self { grid, amplitudes, representation };
        let norm_sqr = state.norm_sqr();
        if !(norm_sqr > 0.0 && norm_sqr.is_finite()) {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let scale = 1.0 / norm_sqr.sqrt();
        state.amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(state)
    }

    /// Samples `f(q_j)` on the coordinate grid and normalises.
    pub fn from_coordinate_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        let amplitudes = (0..grid.n).map(|j| f(grid.coordinate(j))).collect();
        Self::normalized(grid, amplitudes, Representation::Coordinate)
    }

    pub(crate) fn from_raw(grid: Grid, amplitudes: Vec<C64>, representation: Representation) -> Self {
        Self { grid, amplitudes, representation }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// Grid spacing of the active representation.
    pub fn spacing(&self) -> f64 {
        match self.representation {
            Representation::Coordinate => self.grid.spacing(),
            Representation::Momentum => self.grid.momentum_spacing(),
        }
    }

    /// Abscissa of point `i` in the active representation.
    #[inline]
    pub fn abscissa(&self, i: usize) -> f64 {
        match self.representation {
            Representation::Coordinate => self.grid.coordinate(i),
            Representation::Momentum => self.grid.momentum(i),
        }
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.grid.n).map(|i| self.abscissa(i)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.spacing()
    }

    /// Probability density `|psi|^2` at each grid point of the active representation.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `(abscissa, density)` pairs, ready for export.
    pub fn density_table(&self) -> Vec<(f64, f64)> {
        self.amplitudes.iter().enumerate().map(|(i, a)| (self.abscissa(i), a.norm_sqr())).collect()
    }

    /// Mean of the active variable.
    pub fn mean(&self) -> f64 {
        let h = self.spacing();
        self.amplitudes.iter().enumerate().map(|(i, a)| self.abscissa(i) * a.norm_sqr() * h).sum::<f64>()
            / self.norm_sqr()
    }

    /// Standard deviation of the active variable.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let h = self.spacing();
        let var = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let d = self.abscissa(i) - mean;
                d * d * a.norm_sqr() * h
            })
            .sum::<f64>()
            / self.norm_sqr();
        var.sqrt()
    }

    pub fn to_momentum(&self) -> PointerState {
        match self.representation {
            Representation::Momentum => self.clone(),
            Representation::Coordinate => {
                let mut data = self.amplitudes.clone();
                self.grid.forward(&self.grid.plan(), &mut data);
                Self::from_raw(self.grid, data, Representation::Momentum)
            }
        }
    }

    pub fn to_coordinate(&self) -> PointerState {
        match self.representation {
            Representation::Coordinate => self.clone(),
            Representation::Momentum => {
                let mut data = self.amplitudes.clone();
                self.grid.inverse(&self.grid.plan(), &mut data);
                Self::from_raw(self.grid, data, Representation::Coordinate)
            }
        }
    }

    /// Free-particle evolution for time `t` at mass `m`; the result keeps the
    /// representation of `self`.
    pub fn free_evolve(&self, t: f64, m: f64) -> Result<PointerState> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("mass {m} must be positive")));
        }
        let mut mom = self.to_momentum();
        let hbar = self.grid.hbar;
        for (k, a) in mom.amplitudes.iter_mut().enumerate() {
            let p = self.grid.momentum(k);
            *a *= C64::from_polar(1.0, -p * p * t / (2.0 * m * hbar));
        }
        Ok(match self.representation {
            Representation::Momentum => mom,
            Representation::Coordinate => mom.to_coordinate(),
        })
    }

    /// Inverse-CDF sampler over the grid points of the active representation.
    pub fn sampler(&self) -> PointerSampler {
        PointerSampler {
            sampler: DiscreteSampler::new(self.amplitudes.iter().map(|a| a.norm_sqr()))
                .expect("a normalised state has positive total weight"),
            abscissae: self.abscissae(),
        }
    }

    /// `count` i.i.d. readouts of the active variable; deterministic in `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let sampler = self.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| sampler.sample(&mut rng)).collect()
    }
}

/// Reusable readout sampler for one pointer distribution.
#[derive(Debug, Clone)]
pub struct PointerSampler {
    sampler: DiscreteSampler,
    abscissae: Vec<f64>,
}

impl PointerSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.abscissae[self.sampler.sample(rng)]
    }
}

/// Checks the Gaussian pointer preconditions: `4 sigma_q < L/2` and `sigma_q > 2 dq`.
pub fn check_pointer_width(grid: &Grid, sigma_q: f64) -> Result<()> {
    if !(sigma_q > 0.0 && sigma_q.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("sigma_q = {sigma_q} must be positive")));
    }
    if 4.0 * sigma_q >= 0.5 * grid.length {
        return Err(Error::GridTooSmall(alloc::format!(
            "4 sigma_q = {} does not fit in half the box L/2 = {}",
            4.0 * sigma_q,
            0.5 * grid.length
        )));
    }
    if sigma_q <= 2.0 * grid.spacing() {
        return Err(Error::GridTooCoarse(alloc::format!(
            "sigma_q = {sigma_q} is not resolved by spacing {}",
            grid.spacing()
        )));
    }
    Ok(())
}

/// Centred real Gaussian `psi(q) ~ exp(-q^2 / (4 sigma_q^2))` in the coordinate representation.
pub fn gaussian_pointer(grid: &Grid, sigma_q: f64) -> Result<PointerState> {
    gaussian_packet(grid, sigma_q, 0.0, 0.0)
}

/// Gaussian packet `exp(-(q - center)^2 / (4 sigma_q^2) + i k q)`, i.e. carrier momentum `hbar k`.
pub fn gaussian_packet(grid: &Grid, sigma_q: f64, center: f64, k: f64) -> Result<PointerState> {
    check_pointer_width(grid, sigma_q)?;
    let inv = 1.0 / (4.0 * sigma_q * sigma_q);
    PointerState::from_coordinate_fn(*grid, |q| {
        let d = q - center;
        C64::from_polar((-d * d * inv).exp(), k * q)
    })
}
