//! Weak measurement followed by post-selection.
//!
//! A Gaussian pointer with coordinate width `sigma_q` is coupled to a system
//! observable `A` through the unitary `exp(i q A / hbar)`, applied exactly via
//! the spectral decomposition of `A`. The system is then post-selected and the
//! pointer read out in momentum (centred near `Re A_w`) or coordinate
//! (centred near `-2 sigma_q^2 Im A_w / hbar`).

use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;
use rand::Rng;

use crate::jobs::{chunk_bounds, chunk_rng, chunks_for, run_sequential, ChunkedJob};
use crate::pointer::{gaussian_pointer, Grid, PointerSampler, PointerState, Representation};
use crate::qkernel::{inner, spectral_decompose, Operator, StateVector, MIN_BRANCH_PROBABILITY};
use crate::stats::Moments;
use crate::weakvalue::{weak_value, Method, WeakValueResult};
use crate::{Error, Result, C64};

/// Attempts per Monte Carlo chunk.
pub const ATTEMPTS_PER_CHUNK: u64 = 1 << 16;

/// Upper bound on the number of eigenvalue paths in [`multi_weak_values`].
pub const MAX_PATHS: usize = 4096;

/// System (finite-dimensional) times pointer (grid) amplitudes, indexed
/// `system * n + grid_point`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    sys_dim: usize,
    grid: Grid,
    amplitudes: Vec<C64>,
    representation: Representation,
}

impl JointState {
    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn norm_sqr(&self) -> f64 {
        let h = match self.representation {
            Representation::Coordinate => self.grid.spacing(),
            Representation::Momentum => self.grid.momentum_spacing(),
        };
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * h
    }

    /// Unnormalised pointer branch for system component `s`.
    pub fn branch(&self, s: usize) -> &[C64] {
        let n = self.grid.n();
        &self.amplitudes[s * n..(s + 1) * n]
    }

    /// Product state `sys (x) ps` without coupling.
    pub fn product(sys: &StateVector, ps: &PointerState) -> Self {
        let mut amplitudes = Vec::with_capacity(sys.dim() * ps.grid().n());
        for s in sys.coeffs() {
            amplitudes.extend(ps.amplitudes().iter().map(|a| s * a));
        }
        Self { sys_dim: sys.dim(), grid: *ps.grid(), amplitudes, representation: ps.representation() }
    }
}

/// Applies `exp(i q A / hbar)` to `sys (x) ps` exactly.
///
/// Each eigencomponent `P_a sys` picks up the phase `exp(i q_j a / hbar)` at
/// grid point `q_j`. The result is in the coordinate representation.
pub fn couple(sys: &StateVector, a: &Operator, ps: &PointerState) -> Result<JointState> {
    a.ensure_self_adjoint()?;
    a.ensure_dim(sys.dim())?;
    let pvm = spectral_decompose(a)?;
    let ps = ps.to_coordinate();
    let grid = *ps.grid();
    let n = grid.n();
    let dim = sys.dim();
    let components: Vec<(f64, Vec<C64>)> =
        pvm.iter().map(|(value, p)| (value, p.apply(sys.coeffs()))).collect();
    let mut amplitudes = alloc::vec![C64::new(0.0, 0.0); dim * n];
    for (j, psi) in ps.amplitudes().iter().enumerate() {
        let q = grid.coordinate(j);
        for (value, v) in &components {
            let phase = C64::from_polar(1.0, q * value / grid.hbar()) * psi;
            for s in 0..dim {
                amplitudes[s * n + j] += v[s] * phase;
            }
        }
    }
    Ok(JointState { sys_dim: dim, grid, amplitudes, representation: Representation::Coordinate })
}

/// Projects the system onto `post`; returns the renormalised pointer and the
/// success probability.
pub fn post_select(js: &JointState, post: &StateVector) -> Result<(PointerState, f64)> {
    if post.dim() != js.sys_dim {
        return Err(Error::DimensionMismatch { expected: js.sys_dim, found: post.dim() });
    }
    let n = js.grid.n();
    let mut pointer = alloc::vec![C64::new(0.0, 0.0); n];
    for (s, c) in post.coeffs().iter().enumerate() {
        let c = c.conj();
        for (out, a) in pointer.iter_mut().zip(js.branch(s)) {
            *out += c * a;
        }
    }
    let raw = PointerState::from_raw(js.grid, pointer, js.representation);
    let probability = raw.norm_sqr();
    if !(probability >= MIN_BRANCH_PROBABILITY) {
        return Err(Error::ZeroPostSelectionProbability { probability });
    }
    let state = PointerState::normalized(js.grid, raw.into_amplitudes(), js.representation)?;
    Ok((state, probability))
}

/// Which pointer variable is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Readout {
    /// Momentum; estimates `Re A_w`.
    P,
    /// Coordinate; estimates `Im A_w`.
    Q,
}

/// Exact post-selected pointer for one observable.
#[derive(Debug, Clone)]
pub struct PostSelected {
    pub pointer: PointerState,
    pub success_prob: f64,
    pub mean_p: f64,
    pub mean_q: f64,
}

/// Couples a fresh Gaussian pointer on `grid`, post-selects, and returns the
/// exact pointer state with its means.
pub fn exact_post_selected(
    a: &Operator,
    pre: &StateVector,
    post: &StateVector,
    grid: &Grid,
    sigma_q: f64,
) -> Result<PostSelected> {
    let ps = gaussian_pointer(grid, sigma_q)?;
    let js = couple(pre, a, &ps)?;
    let (pointer, success_prob) = post_select(&js, post)?;
    let mean_q = pointer.mean();
    let mean_p = pointer.to_momentum().mean();
    Ok(PostSelected { pointer, success_prob, mean_p, mean_q })
}

/// Default pointer grid for observable `a`: momentum window covers the
/// pointer spread plus the spectral radius.
pub fn default_grid(a: &Operator, sigma_q: f64, hbar: f64) -> Result<Grid> {
    let pvm = spectral_decompose(a)?;
    let radius = pvm.eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Grid::for_pointer(sigma_q, hbar, radius)
}

/// `|exact post-selected momentum mean - Re A_w|`, computed on the grid without sampling.
pub fn first_order_bias(
    a: &Operator,
    pre: &StateVector,
    post: &StateVector,
    sigma_q: f64,
    hbar: f64,
) -> Result<f64> {
    let grid = default_grid(a, sigma_q, hbar)?;
    let exact = exact_post_selected(a, pre, post, &grid, sigma_q)?;
    let w = weak_value(a, pre, post)?;
    Ok((exact.mean_p - w.value.re).abs())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolConfig {
    pub sigma_q: f64,
    pub hbar: f64,
    pub n_attempts: u64,
    pub seed: u64,
    pub readout: Readout,
    /// Pointer grid; `None` selects [`default_grid`].
    pub grid: Option<Grid>,
}

impl ProtocolConfig {
    pub fn new(sigma_q: f64, n_attempts: u64, seed: u64, readout: Readout) -> Self {
        Self { sigma_q, hbar: 1.0, n_attempts, seed, readout, grid: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolReport {
    pub exact_weak_value: C64,
    /// Monte Carlo estimate; only the component matching the readout is
    /// estimated (the other is zero with no standard error).
    pub estimate: WeakValueResult,
    pub success_prob: f64,
    pub n_attempts: u64,
    pub n_postselected: u64,
    /// Exact post-selected pointer means `(mean_p, mean_q)`.
    pub pointer_means: (f64, f64),
    /// First-order predictions `(Re A_w, -2 sigma_q^2 Im A_w / hbar)`.
    pub predicted_means: (f64, f64),
    pub readout: Readout,
    pub sigma_q: f64,
    pub sigma_p: f64,
    pub hbar: f64,
    /// Sample mean and standard error of the raw pointer readouts.
    pub sample_mean: f64,
    pub sample_stderr: f64,
}

impl ProtocolReport {
    /// Re from a momentum-readout run and Im from a coordinate-readout run.
    pub fn combine(p_run: &ProtocolReport, q_run: &ProtocolReport) -> WeakValueResult {
        WeakValueResult {
            value: C64::new(p_run.estimate.value.re, q_run.estimate.value.im),
            overlap: p_run.estimate.overlap,
            method: Method::MonteCarlo,
            stderr_re: p_run.estimate.stderr_re,
            stderr_im: q_run.estimate.stderr_im,
        }
    }
}

/// Monte Carlo protocol prepared for chunked execution.
///
/// Each attempt post-selects with probability `success_prob` and, on success,
/// draws one readout from the exact post-selected pointer distribution.
#[derive(Debug, Clone)]
pub struct ProtocolPlan {
    config: ProtocolConfig,
    exact: WeakValueResult,
    success_prob: f64,
    pointer_means: (f64, f64),
    readout_state: PointerState,
    sampler: PointerSampler,
}

impl ProtocolPlan {
    pub fn new(a: &Operator, pre: &StateVector, post: &StateVector, config: ProtocolConfig) -> Result<Self> {
        if config.n_attempts == 0 {
            return Err(Error::InvalidParameter("n_attempts must be at least 1".into()));
        }
        let exact = weak_value(a, pre, post)?;
        let grid = match config.grid {
            Some(g) => g,
            None => default_grid(a, config.sigma_q, config.hbar)?,
        };
        if (grid.hbar() - config.hbar).abs() > 0.0 {
            return Err(Error::InvalidParameter("grid hbar differs from protocol hbar".into()));
        }
        let post_selected = exact_post_selected(a, pre, post, &grid, config.sigma_q)?;
        let readout_state = match config.readout {
            Readout::P => post_selected.pointer.to_momentum(),
            Readout::Q => post_selected.pointer.clone(),
        };
        Ok(Self {
            exact,
            success_prob: post_selected.success_prob,
            pointer_means: (post_selected.mean_p, post_selected.mean_q),
            sampler: readout_state.sampler(),
            readout_state,
            config,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    pub fn exact_weak_value(&self) -> C64 {
        self.exact.value
    }

    /// Exact post-selected pointer in the readout representation.
    pub fn readout_state(&self) -> &PointerState {
        &self.readout_state
    }
}

impl ChunkedJob for ProtocolPlan {
    type Partial = Moments;
    type Output = Result<ProtocolReport>;

    fn chunk_count(&self) -> usize {
        chunks_for(self.config.n_attempts, ATTEMPTS_PER_CHUNK)
    }

    fn run_chunk(&self, index: usize) -> Moments {
        let (start, end) = chunk_bounds(self.config.n_attempts, ATTEMPTS_PER_CHUNK, index);
        let mut rng = chunk_rng(self.config.seed, index);
        let mut moments = Moments::default();
        for _ in start..end {
            if rng.random::<f64>() < self.success_prob {
                moments.push(self.sampler.sample(&mut rng));
            }
        }
        moments
    }

    fn finish(&self, partials: Vec<Moments>) -> Result<ProtocolReport> {
        let mut total = Moments::default();
        partials.iter().for_each(|m| total.merge(m));
        let (Some(mean), Some(stderr)) = (total.mean(), total.std_error()) else {
            return Err(Error::DegenerateSample(alloc::format!(
                "{} post-selected samples out of {} attempts",
                total.count,
                self.config.n_attempts
            )));
        };
        let ProtocolConfig { sigma_q, hbar, .. } = self.config;
        let im_scale = -hbar / (2.0 * sigma_q * sigma_q);
        let (value, stderr_re, stderr_im) = match self.config.readout {
            Readout::P => (C64::new(mean, 0.0), Some(stderr), None),
            Readout::Q => (C64::new(0.0, im_scale * mean), None, Some(im_scale.abs() * stderr)),
        };
        let w = self.exact.value;
        Ok(ProtocolReport {
            exact_weak_value: w,
            estimate: WeakValueResult {
                value,
                overlap: self.exact.overlap,
                method: Method::MonteCarlo,
                stderr_re,
                stderr_im,
            },
            success_prob: self.success_prob,
            n_attempts: self.config.n_attempts,
            n_postselected: total.count,
            pointer_means: self.pointer_means,
            predicted_means: (w.re, -2.0 * sigma_q * sigma_q * w.im / hbar),
            readout: self.config.readout,
            sigma_q,
            sigma_p: hbar / (2.0 * sigma_q),
            hbar,
            sample_mean: mean,
            sample_stderr: stderr,
        })
    }
}

/// Runs the Monte Carlo protocol on the current thread.
pub fn run_protocol(
    a: &Operator,
    pre: &StateVector,
    post: &StateVector,
    config: ProtocolConfig,
) -> Result<ProtocolReport> {
    run_sequential(&ProtocolPlan::new(a, pre, post, config)?)
}

/// Pointer matrix elements between the shifted branches
/// `chi_a = exp(i q a / hbar) phi` for every pair of eigenvalues.
struct BranchMatrices {
    overlap: Vec<C64>,
    q: Vec<C64>,
    p: Vec<C64>,
    m: usize,
}

impl BranchMatrices {
    fn new(eigenvalues: &[f64], grid: &Grid, sigma_q: f64) -> Result<Self> {
        let phi = gaussian_pointer(grid, sigma_q)?;
        let m = eigenvalues.len();
        let dq = grid.spacing();
        let dp = grid.momentum_spacing();
        let hbar = grid.hbar();
        let density = phi.density();
        let branches_p: Vec<PointerState> = eigenvalues
            .iter()
            .map(|&a| {
                let amps = phi
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(j, x)| x * C64::from_polar(1.0, grid.coordinate(j) * a / hbar))
                    .collect();
                PointerState::from_raw(*grid, amps, Representation::Coordinate).to_momentum()
            })
            .collect();
        let mut overlap = alloc::vec![C64::new(0.0, 0.0); m * m];
        let mut q = overlap.clone();
        let mut p = overlap.clone();
        for u in 0..m {
            for v in 0..m {
                let shift = (eigenvalues[v] - eigenvalues[u]) / hbar;
                let (mut o, mut qq) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for (j, d) in density.iter().enumerate() {
                    let x = grid.coordinate(j);
                    let term = C64::from_polar(d * dq, x * shift);
                    o += term;
                    qq += term * x;
                }
                overlap[u * m + v] = o;
                q[u * m + v] = qq;
                p[u * m + v] = branches_p[u]
                    .amplitudes()
                    .iter()
                    .zip(branches_p[v].amplitudes())
                    .enumerate()
                    .map(|(k, (x, y))| x.conj() * y * (grid.momentum(k) * dp))
                    .sum();
            }
        }
        Ok(Self { overlap, q, p, m })
    }
}

/// Couples one pointer per observable in sequence, post-selects once on
/// `post`, and reads every pointer's exact post-selected means.
///
/// The joint pointer state is expanded over eigenvalue paths
/// `(a_1, ..., a_K)` with amplitudes `<post| P_{a_K} ... P_{a_1} |pre>`, so the
/// cost is polynomial in the number of paths rather than exponential in grid
/// size. Each result carries `Re` from the momentum mean and `Im` from
/// `-hbar * mean_q / (2 sigma_q^2)`.
pub fn multi_weak_values(
    observables: &[Operator],
    pre: &StateVector,
    post: &StateVector,
    sigmas: &[f64],
    hbar: f64,
) -> Result<Vec<WeakValueResult>> {
    if observables.len() != sigmas.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "{} observables with {} pointer widths",
            observables.len(),
            sigmas.len()
        )));
    }
    if observables.is_empty() {
        return Ok(Vec::new());
    }
    let overlap = inner(post, pre)?;
    let mut pvms = Vec::with_capacity(observables.len());
    let mut matrices = Vec::with_capacity(observables.len());
    for (a, &sigma_q) in observables.iter().zip(sigmas) {
        a.ensure_self_adjoint()?;
        a.ensure_dim(pre.dim())?;
        let pvm = spectral_decompose(a)?;
        let grid = default_grid(a, sigma_q, hbar)?;
        matrices.push(BranchMatrices::new(pvm.eigenvalues(), &grid, sigma_q)?);
        pvms.push(pvm);
    }
    let path_count = pvms.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
    let path_count = match path_count {
        Some(c) if c <= MAX_PATHS => c,
        _ => {
            return Err(Error::InvalidParameter(alloc::format!(
                "more than {MAX_PATHS} eigenvalue paths"
            )))
        }
    };

    // path amplitudes, first observable varying slowest
    let mut paths: Vec<(Vec<usize>, Vec<C64>)> = alloc::vec![(Vec::new(), pre.coeffs().to_vec())];
    for pvm in &pvms {
        paths = paths
            .into_iter()
            .flat_map(|(idx, v)| {
                pvm.projectors().iter().enumerate().map(move |(i, p)| {
                    let mut idx = idx.clone();
                    idx.push(i);
                    (idx, p.apply(&v))
                })
            })
            .collect();
    }
    debug_assert_eq!(paths.len(), path_count);
    let amps: Vec<(Vec<usize>, C64)> = paths
        .into_iter()
        .map(|(idx, v)| (idx, post.coeffs().iter().zip(&v).map(|(b, k)| b.conj() * k).sum()))
        .filter(|(_, c): &(Vec<usize>, C64)| *c != C64::new(0.0, 0.0))
        .collect();

    let k = observables.len();
    let mut norm = C64::new(0.0, 0.0);
    let mut num_p = alloc::vec![C64::new(0.0, 0.0); k];
    let mut num_q = alloc::vec![C64::new(0.0, 0.0); k];
    for (u, cu) in &amps {
        for (v, cv) in &amps {
            let weight = cu.conj() * cv;
            let overlaps: Vec<C64> =
                (0..k).map(|b| matrices[b].overlap[u[b] * matrices[b].m + v[b]]).collect();
            norm += weight * overlaps.iter().product::<C64>();
            for alpha in 0..k {
                let mt = &matrices[alpha];
                let others: C64 =
                    overlaps.iter().enumerate().filter(|(b, _)| *b != alpha).map(|(_, o)| o).product();
                let cell = u[alpha] * mt.m + v[alpha];
                num_p[alpha] += weight * others * mt.p[cell];
                num_q[alpha] += weight * others * mt.q[cell];
            }
        }
    }
    if !(norm.re >= MIN_BRANCH_PROBABILITY) {
        return Err(Error::ZeroPostSelectionProbability { probability: norm.re.max(0.0) });
    }
    Ok((0..k)
        .map(|alpha| {
            let sigma_q = sigmas[alpha];
            let mean_p = num_p[alpha].re / norm.re;
            let mean_q = num_q[alpha].re / norm.re;
            let im = -hbar * mean_q / (2.0 * sigma_q * sigma_q);
            WeakValueResult::exact(C64::new(mean_p, im), overlap, Method::PointerMean)
        })
        .collect())
}
