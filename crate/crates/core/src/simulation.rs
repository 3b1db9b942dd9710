//! Time integration of the forced oscillator and burst classification.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    slow_terms_unchecked, time_terms_unchecked, BeamFoundationParams, SlowFastCoefficients,
    SlowPhase,
};
use crate::ode::DormandPrince;

const PI4: f64 = PI * PI * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FastState {
    pub z1: f64,
    pub z2: f64,
}

impl FastState {
    pub fn new(z1: f64, z2: f64) -> Self {
        Self { z1, z2 }
    }
}

/// Right side of the state-space oscillator for given coefficients.
pub fn fast_rhs(state: FastState, c: &SlowFastCoefficients, gamma: f64, xi: f64) -> FastState {
    let FastState { z1, z2 } = state;
    FastState {
        z1: z2,
        z2: c.forcing - xi * z2 - c.stiffness * z1 + c.quadratic * z1 * z1
            - 0.75 * gamma * z1 * z1 * z1,
    }
}

/// Right side with the coefficients evaluated directly in time.
pub fn rhs_time(t: f64, state: FastState, params: &BeamFoundationParams) -> Result<FastState> {
    params.validate()?;
    let c = time_terms_unchecked(t, params).combined();
    Ok(fast_rhs(state, &c, params.gamma, params.xi))
}

/// Right side with the coefficients evaluated at a slow phase.
pub fn rhs_slow(p: SlowPhase, state: FastState, params: &BeamFoundationParams) -> Result<FastState> {
    params.validate()?;
    let c = slow_terms_unchecked(p, params).combined();
    Ok(fast_rhs(state, &c, params.gamma, params.xi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Output sampling interval for dense output.
    pub sample_dt: f64,
    pub max_steps: usize,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        let dp = DormandPrince::default();
        Self {
            abs_tol: dp.abs_tol,
            rel_tol: dp.rel_tol,
            initial_step: dp.initial_step,
            max_step: f64::INFINITY,
            sample_dt: 0.05,
            max_steps: dp.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryMeta {
    pub params: BeamFoundationParams,
    pub settings: SimulationSettings,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: FastState,
    /// `cos(omega t)`.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn max_abs_z1(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.state.z1.abs()))
    }
}

/// Integrates the time-periodic oscillator over `t_span`.
pub fn integrate(
    params: &BeamFoundationParams,
    ic: FastState,
    t_span: (f64, f64),
    settings: &SimulationSettings,
) -> Result<Trajectory> {
    params.validate()?;
    let (t0, t1) = t_span;
    let solver = DormandPrince {
        abs_tol: settings.abs_tol,
        rel_tol: settings.rel_tol,
        initial_step: settings.initial_step,
        max_step: settings.max_step,
        max_steps: settings.max_steps,
        ..DormandPrince::default()
    };
    let p = *params;
    let system = move |t: f64, y: &[f64; 2]| {
        let c = time_terms_unchecked(t, &p).combined();
        let r = fast_rhs(FastState::new(y[0], y[1]), &c, p.gamma, p.xi);
        [r.z1, r.z2]
    };
    let sol = solver.integrate(&system, t0, [ic.z1, ic.z2], t1, Some(settings.sample_dt))?;
    let samples = sol
        .t
        .iter()
        .zip(&sol.y)
        .map(|(&t, y)| Sample {
            t,
            state: FastState::new(y[0], y[1]),
            d: (params.omega * t).cos(),
        })
        .collect();
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            params: *params,
            settings: *settings,
            accepted_steps: sol.accepted,
            rejected_steps: sol.rejected,
        },
    })
}

/// Largest discrepancies between the time-domain and slow-phase right sides.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RhsDeviation {
    /// Over both state components.
    pub rhs: f64,
    pub forcing: f64,
    pub stiffness: f64,
    pub quadratic: f64,
}

impl RhsDeviation {
    pub fn max(&self) -> f64 {
        self.rhs.max(self.forcing).max(self.stiffness).max(self.quadratic)
    }
}

/// Compares the two right sides at `n_samples` random `(t, z1, z2)` over one
/// slow period, using the true branch `s = sign(sin omega t)`.
pub fn rhs_equivalence_check(
    params: &BeamFoundationParams,
    n_samples: usize,
    seed: u64,
) -> Result<RhsDeviation> {
    params.validate()?;
    let p = *params;
    rhs_equivalence_check_with(params, n_samples, seed, move |phase| {
        slow_terms_unchecked(phase, &p).combined()
    })
}

/// As [`rhs_equivalence_check`] with a caller-supplied slow-phase evaluator.
pub fn rhs_equivalence_check_with<C>(
    params: &BeamFoundationParams,
    n_samples: usize,
    seed: u64,
    slow: C,
) -> Result<RhsDeviation>
where
    C: Fn(SlowPhase) -> SlowFastCoefficients,
{
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = 2.0 * PI / params.omega;
    let mut dev = RhsDeviation::default();
    for _ in 0..n_samples {
        let t = rng.random_range(0.0..period);
        let state = FastState::new(rng.random_range(-2.0..2.0), rng.random_range(-5.0..5.0));
        let ct = time_terms_unchecked(t, params).combined();
        let cs = slow(SlowPhase::from_angle(params.omega * t));
        let a = fast_rhs(state, &ct, params.gamma, params.xi);
        let b = fast_rhs(state, &cs, params.gamma, params.xi);
        dev.rhs = dev.rhs.max((a.z1 - b.z1).abs()).max((a.z2 - b.z2).abs());
        dev.forcing = dev.forcing.max((ct.forcing - cs.forcing).abs());
        dev.stiffness = dev.stiffness.max((ct.stiffness - cs.stiffness).abs());
        dev.quadratic = dev.quadratic.max((ct.quadratic - cs.quadratic).abs());
    }
    Ok(dev)
}

/// `(cos(omega t), z1)` for every sample.
pub fn transformed_portrait(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.samples.iter().map(|s| (s.d, s.state.z1)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurstPhase {
    Quiescent,
    Spiking,
}

impl BurstPhase {
    pub fn name(self) -> &'static str {
        match self {
            BurstPhase::Quiescent => "quiescent",
            BurstPhase::Spiking => "spiking",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstEpisode {
    pub t_start: f64,
    pub t_end: f64,
    pub phase: BurstPhase,
    /// Mean of `z1` over the episode.
    pub center: f64,
    /// Half the largest windowed peak-to-peak swing inside the episode.
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurstReport {
    pub episodes: Vec<BurstEpisode>,
    pub transition_count: usize,
    pub window: f64,
    pub amp_threshold: f64,
}

/// Five linearised fast periods, `5 * 2 pi / sqrt(pi^4 + sigma)`.
pub fn default_burst_window(params: &BeamFoundationParams) -> f64 {
    let stiffness = PI4 + params.sigma;
    if stiffness > 0.0 {
        5.0 * 2.0 * PI / stiffness.sqrt()
    } else {
        5.0 * 2.0 * PI
    }
}

/// Ten percent of the peak-to-peak range of `z1`.
pub fn default_amp_threshold(traj: &Trajectory) -> f64 {
    let (lo, hi) = traj.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.state.z1), hi.max(s.state.z1))
    });
    if lo.is_finite() {
        0.1 * (hi - lo)
    } else {
        0.0
    }
}

/// Splits the trajectory into consecutive windows, marks each as spiking when
/// its peak-to-peak swing of `z1` exceeds `amp_threshold`, and merges runs of
/// equal phase into episodes.
pub fn classify_bursts(traj: &Trajectory, window: f64, amp_threshold: f64) -> Result<BurstReport> {
    let samples = &traj.samples;
    if samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidInput("burst window must be positive".into()));
    }
    if !(amp_threshold >= 0.0 && amp_threshold.is_finite()) {
        return Err(Error::InvalidInput("amplitude threshold must be non-negative".into()));
    }
    let t0 = samples[0].t;
    let span = traj.span();
    if samples.len() > 1 && window >= span {
        return Err(Error::InvalidInput(format!(
            "burst window {window} is not shorter than the trajectory span {span}"
        )));
    }

    struct Tile {
        t_start: f64,
        t_end: f64,
        phase: BurstPhase,
        sum: f64,
        count: usize,
        swing: f64,
    }

    let mut tiles: Vec<Tile> = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        let tile_of = |t: f64| ((t - t0) / window).floor();
        let k = tile_of(samples[i].t);
        let mut j = i;
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        while j < samples.len() && (j == i || tile_of(samples[j].t) <= k) {
            let z = samples[j].state.z1;
            lo = lo.min(z);
            hi = hi.max(z);
            sum += z;
            j += 1;
        }
        let t_end = samples.get(j).map_or(samples[j - 1].t, |s| s.t);
        let swing = hi - lo;
        tiles.push(Tile {
            t_start: samples[i].t,
            t_end,
            phase: if swing > amp_threshold {
                BurstPhase::Spiking
            } else {
                BurstPhase::Quiescent
            },
            sum,
            count: j - i,
            swing,
        });
        i = j;
    }

    let mut merged: Vec<Tile> = Vec::new();
    for tile in tiles {
        match merged.last_mut() {
            Some(last) if last.phase == tile.phase => {
                last.t_end = tile.t_end;
                last.sum += tile.sum;
                last.count += tile.count;
                last.swing = last.swing.max(tile.swing);
            }
            _ => merged.push(tile),
        }
    }

    let episodes: Vec<BurstEpisode> = merged
        .into_iter()
        .map(|m| BurstEpisode {
            t_start: m.t_start,
            t_end: m.t_end,
            phase: m.phase,
            center: m.sum / m.count as f64,
            peak: 0.5 * m.swing,
        })
        .collect();
    Ok(BurstReport {
        transition_count: episodes.len().saturating_sub(1),
        episodes,
        window,
        amp_threshold,
    })
}
