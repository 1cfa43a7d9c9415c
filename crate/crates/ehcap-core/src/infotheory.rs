//! Mutual information over the AWGN channel and input optimisation.
//!
//! Inputs are finite amplitude distributions under a peak-energy constraint
//! `x^2 <= peak_energy`. Output densities are Gaussian mixtures; their
//! entropy is integrated by composite trapezoid on a uniform grid clipped
//! `tail_sigmas` noise deviations beyond the extreme amplitudes. For the
//! smooth, exponentially decaying integrands in play the trapezoid rule
//! converges spectrally, so the default step of `sigma/50` leaves errors far
//! below the stopping tolerances used elsewhere in the crate.
//!
//! Capacity over a fixed amplitude grid is computed by Blahut–Arimoto. The
//! returned `gap_nats` is the classic certificate `max_i D_i - I(p)`: an
//! upper bound on how far the iterate is from the capacity of the
//! node-discretised channel, valid for every iterate.

use serde::{Deserialize, Serialize};

use crate::ehmodel::PMF_TOL;
use crate::{ChannelModel, Error, Result};

/// Default integration step, as a fraction of the noise deviation.
pub const DEFAULT_STEP_FRACTION: f64 = 1.0 / 50.0;
/// Default truncation of the output grid beyond the extreme amplitudes, in
/// noise deviations. The Gaussian mass beyond 8 sigma is ~6e-16.
pub const DEFAULT_TAIL_SIGMAS: f64 = 8.0;
/// Default number of grid points per side for [`optimize_input`] (65 total).
pub const DEFAULT_POINTS_PER_SIDE: usize = 32;

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// Standard normal survival function `1 - Phi(t)`, accurate in the tail.
pub fn normal_sf(t: f64) -> f64 {
    0.5 * libm::erfc(t / std::f64::consts::SQRT_2)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    m + s.ln()
}

/// Discrete amplitude distribution under a peak-energy constraint.
///
/// Amplitudes are kept sorted and strictly increasing; probabilities may be
/// zero but must sum to one. Every amplitude, massed or not, must satisfy
/// `x^2 <= peak_energy + 1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    amplitudes: Vec<f64>,
    probs: Vec<f64>,
    peak_energy: f64,
}

impl InputDistribution {
    pub fn new(amplitudes: Vec<f64>, probs: Vec<f64>, peak_energy: f64) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() != probs.len() {
            return Err(Error::InvalidParameter(format!(
                "input distribution needs matching non-empty lists, got {} amplitudes and {} probabilities",
                amplitudes.len(),
                probs.len()
            )));
        }
        if !(peak_energy.is_finite() && peak_energy >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "peak energy must be finite and non-negative, got {peak_energy}"
            )));
        }
        let mut pairs: Vec<(f64, f64)> = amplitudes.into_iter().zip(probs).collect();
        if pairs.iter().any(|(x, p)| !x.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "amplitudes and probabilities must be finite".into(),
            ));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate amplitude {}",
                    w[0].0
                )));
            }
        }
        let mut total = 0.0;
        for &(x, p) in &pairs {
            if p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative probability {p} at amplitude {x}"
                )));
            }
            if x * x > peak_energy + 1e-12 {
                return Err(Error::PeakViolation {
                    state_q: 0,
                    amplitude: x,
                    energy: x * x,
                    peak: peak_energy,
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidParameter(format!(
                "input probabilities sum to {total}, expected 1 within {PMF_TOL:e}"
            )));
        }
        let (amplitudes, probs) = pairs.into_iter().unzip();
        Ok(Self {
            amplitudes,
            probs,
            peak_energy,
        })
    }

    /// All mass on a single amplitude.
    pub fn point_mass(amplitude: f64, peak_energy: f64) -> Result<Self> {
        Self::new(vec![amplitude], vec![1.0], peak_energy)
    }

    /// Silence: all mass on zero.
    pub fn zero() -> Self {
        Self::point_mass(0.0, 0.0).expect("zero input is always valid")
    }

    /// Equal mass on `+-sqrt(peak_energy)`; collapses to silence at zero peak.
    pub fn antipodal(peak_energy: f64) -> Result<Self> {
        if peak_energy == 0.0 {
            return Self::point_mass(0.0, 0.0);
        }
        let a = peak_energy.sqrt();
        Self::new(vec![-a, a], vec![0.5, 0.5], peak_energy)
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn peak_energy(&self) -> f64 {
        self.peak_energy
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Average transmitted energy `E[X^2]`.
    pub fn mean_power(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| x * x * p)
            .sum()
    }

    /// Convex mixture `(1-lambda) self + lambda other` on the merged
    /// amplitude support. Amplitudes are matched by exact equality, which is
    /// what callers constructing both inputs from the same energy grid get.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "mixture weight must lie in [0, 1], got {lambda}"
            )));
        }
        let mut amps = Vec::new();
        let mut probs = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let take_self = j >= other.len()
                || (i < self.len() && self.amplitudes[i] <= other.amplitudes[j]);
            let take_other = i >= self.len()
                || (j < other.len() && other.amplitudes[j] <= self.amplitudes[i]);
            let mut mass = 0.0;
            let x = if take_self {
                self.amplitudes[i]
            } else {
                other.amplitudes[j]
            };
            if take_self {
                mass += (1.0 - lambda) * self.probs[i];
                i += 1;
            }
            if take_other {
                mass += lambda * other.probs[j];
                j += 1;
            }
            amps.push(x);
            probs.push(mass);
        }
        Self::new(amps, probs, self.peak_energy.max(other.peak_energy))
    }
}

/// Output-integration grid actually used for a mutual-information value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Uniform node spacing.
    pub step: f64,
    /// Lower and upper ends of the integration window.
    pub lo: f64,
    pub hi: f64,
    /// Number of nodes.
    pub nodes: usize,
}

/// Mutual information in nats and bits together with the grid that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiResult {
    pub nats: f64,
    pub bits: f64,
    pub quadrature: QuadratureSpec,
}

/// Tunable quadrature parameters; the defaults satisfy every tolerance used
/// by the rest of the crate.
#[derive(Debug, Clone, Copy)]
pub struct MiOptions {
    /// Node spacing as a fraction of the noise deviation.
    pub step_fraction: f64,
    /// Grid extent beyond the extreme amplitudes, in noise deviations.
    pub tail_sigmas: f64,
}

impl Default for MiOptions {
    fn default() -> Self {
        Self {
            step_fraction: DEFAULT_STEP_FRACTION,
            tail_sigmas: DEFAULT_TAIL_SIGMAS,
        }
    }
}

pub(crate) struct OutputGrid {
    pub(crate) nodes: Vec<f64>,
    /// Trapezoid weights including the step (halved at the ends).
    pub(crate) weights: Vec<f64>,
    spec: QuadratureSpec,
}

pub(crate) fn output_grid(
    amplitudes: &[f64],
    channel: &ChannelModel,
    opts: &MiOptions,
) -> Result<OutputGrid> {
    if !(opts.step_fraction > 0.0 && opts.tail_sigmas > 0.0) {
        return Err(Error::InvalidParameter(
            "quadrature step fraction and tail must be positive".into(),
        ));
    }
    let sigma = channel.sigma();
    let lo = amplitudes.first().unwrap() - opts.tail_sigmas * sigma;
    let hi = amplitudes.last().unwrap() + opts.tail_sigmas * sigma;
    let requested = sigma * opts.step_fraction;
    let n = (((hi - lo) / requested).ceil() as usize).max(1) + 1;
    let step = (hi - lo) / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|k| lo + k as f64 * step).collect();
    let mut weights = vec![step; n];
    weights[0] = 0.5 * step;
    weights[n - 1] = 0.5 * step;
    Ok(OutputGrid {
        nodes,
        weights,
        spec: QuadratureSpec {
            step,
            lo,
            hi,
            nodes: n,
        },
    })
}

/// Differential entropy of the output mixture on the given grid, in nats.
fn output_entropy(input: &InputDistribution, channel: &ChannelModel, grid: &OutputGrid) -> f64 {
    let sigma = channel.sigma();
    let log_norm = -(sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
    let mut terms = Vec::with_capacity(input.len());
    let mut h = 0.0;
    for (w, wt) in grid.nodes.iter().zip(&grid.weights) {
        terms.clear();
        for (x, p) in input.amplitudes().iter().zip(input.probs()) {
            if *p > 0.0 {
                let z = (w - x) / sigma;
                terms.push(p.ln() + log_norm - 0.5 * z * z);
            }
        }
        let logf = log_sum_exp(&terms);
        if logf > f64::NEG_INFINITY {
            h -= wt * logf.exp() * logf;
        }
    }
    h
}

/// Mutual information `I(X; X + N)` for `N ~ Normal(0, sigma2)`, using the
/// default quadrature.
pub fn mutual_information(input: &InputDistribution, channel: &ChannelModel) -> Result<MiResult> {
    mutual_information_with(input, channel, &MiOptions::default())
}

/// Mutual information with explicit quadrature control.
pub fn mutual_information_with(
    input: &InputDistribution,
    channel: &ChannelModel,
    opts: &MiOptions,
) -> Result<MiResult> {
    let grid = output_grid(input.amplitudes(), channel, opts)?;
    let h = output_entropy(input, channel, &grid);
    let noise_entropy = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * channel.sigma2()).ln();
    let raw = h - noise_entropy;
    if !raw.is_finite() {
        return Err(Error::Quadrature(format!(
            "mutual information evaluated to {raw}"
        )));
    }
    // A pure point mass yields exactly zero information; quadrature dust of
    // order 1e-15 may land slightly negative and is clamped away.
    let nats = raw.max(0.0);
    Ok(MiResult {
        nats,
        bits: nats / std::f64::consts::LN_2,
        quadrature: grid.spec,
    })
}

/// Controls for the Blahut–Arimoto solver.
#[derive(Debug, Clone)]
pub struct BaOptions {
    /// Stop once `max_i D_i - I(p) <= tol` (nats).
    pub tol: f64,
    pub max_iters: usize,
    /// Record the value of every iterate (for monotonicity checks).
    pub record_trace: bool,
    pub quadrature: MiOptions,
}

impl Default for BaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 200_000,
            record_trace: false,
            quadrature: MiOptions::default(),
        }
    }
}

/// Result of a Blahut–Arimoto run.
#[derive(Debug, Clone)]
pub struct BaOutcome {
    pub probs: Vec<f64>,
    /// Information rate of the final iterate on the discretised channel.
    pub rate_nats: f64,
    /// Certificate `max_i D_i - I(p)`: the capacity of the discretised
    /// channel lies within `gap_nats` above `rate_nats`.
    pub gap_nats: f64,
    pub iterations: usize,
    pub trace: Option<Vec<f64>>,
}

/// Blahut–Arimoto on an explicit likelihood table.
///
/// `lik[i][k]` is the conditional output density of input `i` at node `k`
/// and `weights[k]` the quadrature weight of node `k`, so the discretised
/// channel has output measure `weights`. If `mirror` is given, iterates are
/// averaged with their mirror image each round; for a symmetric channel this
/// cannot decrease the objective (it is concave in the input law) and keeps
/// the iterate exactly symmetric.
pub(crate) fn ba_on_table(
    lik: &[Vec<f64>],
    weights: &[f64],
    mirror: Option<&[usize]>,
    opts: &BaOptions,
) -> Result<BaOutcome> {
    let n = lik.len();
    assert!(n > 0, "likelihood table must be non-empty");
    let k = weights.len();
    // -h(W|X=i) on the grid, the self-information part of D_i.
    let self_terms: Vec<f64> = lik
        .iter()
        .map(|row| {
            row.iter()
                .zip(weights)
                .filter(|(l, _)| **l > 0.0)
                .map(|(l, wt)| wt * l * l.ln())
                .sum()
        })
        .collect();

    let mut p = vec![1.0 / n as f64; n];
    let mut q = vec![0.0; k];
    let mut d = vec![0.0; n];
    let mut trace = opts.record_trace.then(Vec::new);

    for iter in 1..=opts.max_iters {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (pi, row) in p.iter().zip(lik) {
            if *pi > 0.0 {
                for (qk, l) in q.iter_mut().zip(row) {
                    *qk += pi * l;
                }
            }
        }
        let ln_q: Vec<f64> = q.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
        for i in 0..n {
            let cross: f64 = lik[i]
                .iter()
                .zip(weights)
                .zip(&ln_q)
                .map(|((l, wt), lq)| wt * l * lq)
                .sum();
            d[i] = self_terms[i] - cross;
        }
        let rate: f64 = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
        let gap = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - rate;
        if let Some(t) = trace.as_mut() {
            t.push(rate);
        }
        if gap <= opts.tol {
            return Ok(BaOutcome {
                probs: p,
                rate_nats: rate,
                gap_nats: gap,
                iterations: iter,
                trace,
            });
        }
        // Multiplicative update in log space to dodge overflow, then an
        // optional symmetrisation that can only improve a concave objective.
        let logs: Vec<f64> = p
            .iter()
            .zip(&d)
            .map(|(pi, di)| if *pi > 0.0 { pi.ln() + di } else { f64::NEG_INFINITY })
            .collect();
        let norm = log_sum_exp(&logs);
        for (pi, lg) in p.iter_mut().zip(&logs) {
            *pi = (lg - norm).exp();
        }
        if let Some(mir) = mirror {
            let snapshot = p.clone();
            for (i, pi) in p.iter_mut().enumerate() {
                *pi = 0.5 * (snapshot[i] + snapshot[mir[i]]);
            }
        }
    }

    // Report the certificate of the last full evaluation.
    let rate: f64 = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
    let gap = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - rate;
    Err(Error::NonConvergence {
        what: "Blahut-Arimoto",
        iterations: opts.max_iters,
        residual: gap,
    })
}

fn mirror_map(amplitudes: &[f64]) -> Option<Vec<usize>> {
    let n = amplitudes.len();
    let scale = amplitudes.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let symmetric = (0..n).all(|i| (amplitudes[i] + amplitudes[n - 1 - i]).abs() <= 1e-12 * scale);
    symmetric.then(|| (0..n).map(|i| n - 1 - i).collect())
}

pub(crate) fn likelihood_table(
    amplitudes: &[f64],
    channel: &ChannelModel,
    grid: &OutputGrid,
) -> Vec<Vec<f64>> {
    let sigma = channel.sigma();
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    amplitudes
        .iter()
        .map(|x| {
            grid.nodes
                .iter()
                .map(|w| {
                    let z = (w - x) / sigma;
                    norm * (-0.5 * z * z).exp()
                })
                .collect()
        })
        .collect()
}

/// Capacity-achieving distribution over a fixed amplitude set.
pub fn optimize_input_on(
    amplitudes: &[f64],
    peak_energy: f64,
    channel: &ChannelModel,
    opts: &BaOptions,
) -> Result<(InputDistribution, BaOutcome)> {
    if amplitudes.is_empty() {
        return Err(Error::InvalidParameter(
            "amplitude grid must be non-empty".into(),
        ));
    }
    let mut sorted = amplitudes.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() == 1 {
        let input = InputDistribution::new(sorted, vec![1.0], peak_energy)?;
        return Ok((
            input,
            BaOutcome {
                probs: vec![1.0],
                rate_nats: 0.0,
                gap_nats: 0.0,
                iterations: 0,
                trace: opts.record_trace.then(Vec::new),
            },
        ));
    }
    let grid = output_grid(&sorted, channel, &opts.quadrature)?;
    let lik = likelihood_table(&sorted, channel, &grid);
    let mirror = mirror_map(&sorted);
    let outcome = ba_on_table(&lik, &grid.weights, mirror.as_deref(), opts)?;
    let input = InputDistribution::new(sorted, outcome.probs.clone(), peak_energy)?;
    Ok((input, outcome))
}

/// Evenly energy-spaced symmetric grid `{0, +-sqrt(j s / g)}` for
/// `j = 1..=g`; `2 g + 1` points.
pub fn continuous_amplitudes(peak_energy: f64, points_per_side: usize) -> Vec<f64> {
    if peak_energy == 0.0 || points_per_side == 0 {
        return vec![0.0];
    }
    let g = points_per_side;
    let mut amps = Vec::with_capacity(2 * g + 1);
    for j in (1..=g).rev() {
        amps.push(-(peak_energy * j as f64 / g as f64).sqrt());
    }
    amps.push(0.0);
    for j in 1..=g {
        amps.push((peak_energy * j as f64 / g as f64).sqrt());
    }
    amps
}

/// Buffer-aligned symmetric grid `{0, +-sqrt(j quantum)}` for
/// `j = 1..=peak_q`.
pub fn quantized_amplitudes(peak_q: u32, quantum: f64) -> Vec<f64> {
    let mut amps = Vec::with_capacity(2 * peak_q as usize + 1);
    for j in (1..=peak_q).rev() {
        amps.push(-((j as f64) * quantum).sqrt());
    }
    amps.push(0.0);
    for j in 1..=peak_q {
        amps.push(((j as f64) * quantum).sqrt());
    }
    amps
}

/// Peak-constrained capacity search on the default continuous grid of
/// [`DEFAULT_POINTS_PER_SIDE`] points per side (65 total).
pub fn optimize_input(
    peak_energy: f64,
    channel: &ChannelModel,
) -> Result<(InputDistribution, BaOutcome)> {
    let amps = continuous_amplitudes(peak_energy, DEFAULT_POINTS_PER_SIDE);
    optimize_input_on(&amps, peak_energy, channel, &BaOptions::default())
}

/// Capacity search over the buffer-aligned grid for a peak of `peak_q`
/// quanta.
pub fn optimize_input_quantized(
    peak_q: u32,
    quantum: f64,
    channel: &ChannelModel,
    opts: &BaOptions,
) -> Result<(InputDistribution, BaOutcome)> {
    let amps = quantized_amplitudes(peak_q, quantum);
    optimize_input_on(&amps, peak_q as f64 * quantum, channel, opts)
}

/// Projected-gradient ascent over the same objective, used as an
/// independent cross-check of the Blahut–Arimoto route. Plain Euclidean
/// projection onto the simplex; fixed step size.
pub fn pg_optimize_on(
    amplitudes: &[f64],
    peak_energy: f64,
    channel: &ChannelModel,
    iters: usize,
    step: f64,
) -> Result<(InputDistribution, f64)> {
    let mut sorted = amplitudes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let grid = output_grid(&sorted, channel, &MiOptions::default())?;
    let lik = likelihood_table(&sorted, channel, &grid);
    let n = sorted.len();
    let self_terms: Vec<f64> = lik
        .iter()
        .map(|row| {
            row.iter()
                .zip(&grid.weights)
                .filter(|(l, _)| **l > 0.0)
                .map(|(l, wt)| wt * l * l.ln())
                .sum()
        })
        .collect();
    let mut p = vec![1.0 / n as f64; n];
    let mut rate = 0.0;
    for _ in 0..iters {
        let mut q = vec![0.0; grid.nodes.len()];
        for (pi, row) in p.iter().zip(&lik) {
            for (qk, l) in q.iter_mut().zip(row) {
                *qk += pi * l;
            }
        }
        let ln_q: Vec<f64> = q.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let cross: f64 = lik[i]
                    .iter()
                    .zip(&grid.weights)
                    .zip(&ln_q)
                    .map(|((l, wt), lq)| wt * l * lq)
                    .sum();
                self_terms[i] - cross
            })
            .collect();
        rate = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
        // I(p) has gradient D_i - 1 up to an additive constant that the
        // projection absorbs.
        for (pi, di) in p.iter_mut().zip(&d) {
            *pi += step * di;
        }
        project_to_simplex(&mut p);
    }
    let input = InputDistribution::new(sorted, p, peak_energy)?;
    Ok((input, rate))
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        acc += u;
        let t = (acc - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
    let total: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
}

/// Truncated Gaussian input: a zero-mean Gaussian of variance `power`
/// clipped to `+-sqrt(peak_energy)`, with the clipped tails folded onto the
/// boundary atoms. The interior density is binned into `bins` equal-width
/// atoms at the bin midpoints.
pub fn truncated_gaussian_input(
    peak_energy: f64,
    power: f64,
    bins: usize,
) -> Result<InputDistribution> {
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "truncated Gaussian needs positive finite power, got {power}"
        )));
    }
    if !(peak_energy.is_finite() && peak_energy >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "peak energy must be finite and non-negative, got {peak_energy}"
        )));
    }
    if peak_energy == 0.0 {
        return Ok(InputDistribution::zero());
    }
    if bins == 0 {
        return Err(Error::InvalidParameter(
            "truncated Gaussian needs at least one interior bin".into(),
        ));
    }
    let r = peak_energy.sqrt();
    let sd = power.sqrt();
    let atom = normal_sf(r / sd);
    let mut amps = Vec::with_capacity(bins + 2);
    let mut probs = Vec::with_capacity(bins + 2);
    amps.push(-r);
    probs.push(atom);
    // CDF evaluated once per edge so interior masses telescope exactly to
    // 1 - 2 atom masses.
    let edges: Vec<f64> = (0..=bins)
        .map(|k| -r + 2.0 * r * k as f64 / bins as f64)
        .collect();
    let cdf: Vec<f64> = edges.iter().map(|e| normal_cdf(e / sd)).collect();
    for k in 0..bins {
        amps.push(0.5 * (edges[k] + edges[k + 1]));
        probs.push(cdf[k + 1] - cdf[k]);
    }
    amps.push(r);
    probs.push(atom);
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    InputDistribution::new(amps, probs, peak_energy)
}
