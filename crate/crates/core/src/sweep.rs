//! Time-dependent optical-dipole-force sweeps.
//!
//! A tightly focused laser pins the impurity with a harmonic potential of
//! dimensionless strength `beta(t) = omega_s(t) / omega_x0`, which lowers
//! the effective mass ratio
//!
//! ```text
//! mu_eff = (beta^2 + 1/mu^2)^(-1/2)
//! ```
//!
//! and can drive a heavy impurity through the critical point. The sweep is
//! evaluated on a time grid: the spectrum at each step is aligned to the
//! previous one by maximal eigenvector overlap, mode-vector velocities come
//! from finite differences, and the frame-rotation couplings
//!
//! ```text
//! R_kq = sum_j db_j^k/dt db_j^q/dt      S_kq = sum_j b_j^k db_j^q/dt
//! ```
//!
//! quantify how non-adiabatic the schedule is. The couplings are diagnostic
//! only; no population transfer is propagated.
//!
//! All times are in units of `1/omega_x0`. With the default square-root
//! schedule `omega_s = omega_s0 sqrt(t)` the pinning term `beta^2` grows
//! linearly in time, which is what makes a level-crossing estimate of the
//! non-adiabatic transitions applicable: one moving level crosses a ladder
//! of stationary ones. The estimate is evaluated as
//!
//! ```text
//! max_t d(beta^2)/dt  <=  (min gap)^2 * T
//! ```
//!
//! with every factor dimensionless in the units above.

use nalgebra::DMatrix;

use crate::crystal::{solve_equilibrium, TrapConfig};
use crate::error::{Error, Result};
use crate::modes::{build_matrix, diagonalize, ModeSpectrum};
use crate::phonons::{observables, PhononObservables};

/// Conventional reading of "coupling much smaller than gap": a factor of
/// ten.
pub const DEFAULT_ADIABATIC_THRESHOLD: f64 = 0.1;

/// Alignment overlaps below this indicate an unresolved crossing.
const MIN_ALIGNMENT_OVERLAP: f64 = 0.5;

/// Effective mass ratio under a dipole force of strength `beta`; equals `mu`
/// exactly at `beta = 0` and decreases strictly with `beta`.
pub fn effective_mass_ratio(mu: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return mu;
    }
    1.0 / (beta * beta + 1.0 / (mu * mu)).sqrt()
}

/// Dipole strength at which `mu_eff` crosses 1, located by bisection on
/// `effective_mass_ratio - 1` over `[0, beta_max]`. `None` when the crossing
/// is not bracketed.
pub fn transition_beta(mu: f64, beta_max: f64) -> Option<f64> {
    let f = |beta: f64| effective_mass_ratio(mu, beta) - 1.0;
    let (mut lo, mut hi) = (0.0, beta_max);
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Shape of `omega_s(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleLaw {
    /// `omega_s = omega_s0 sqrt(t)`: the pinning term grows linearly in time.
    SqrtTime,
    /// `omega_s = omega_s0 t`.
    Linear,
    /// `omega_s = omega_s0` at all times.
    Constant,
}

/// Time course of the dipole-force strength.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSchedule {
    /// Sweep-rate amplitude; for [`ScheduleLaw::SqrtTime`] its square is the
    /// constant growth rate of `beta^2` per unit time.
    pub omega_s0: f64,
    /// Total sweep time in units of `1/omega_x0`.
    pub duration: f64,
    /// Number of grid points (at least 2).
    pub steps: usize,
    pub law: ScheduleLaw,
}

impl SweepSchedule {
    pub fn new(omega_s0: f64, duration: f64, steps: usize, law: ScheduleLaw) -> Result<Self> {
        let schedule = SweepSchedule { omega_s0, duration, steps, law };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Square-root schedule that reaches `omega_s_peak` at `duration`.
    pub fn from_peak(omega_s_peak: f64, duration: f64, steps: usize) -> Result<Self> {
        if !(omega_s_peak >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "peak dipole strength must be non-negative, got {omega_s_peak}"
            )));
        }
        Self::new(omega_s_peak / duration.sqrt(), duration, steps, ScheduleLaw::SqrtTime)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_s0 >= 0.0) || !self.omega_s0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sweep amplitude must be non-negative, got {}",
                self.omega_s0
            )));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sweep duration must be positive, got {}",
                self.duration
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 steps, got {}", self.steps)));
        }
        Ok(())
    }

    /// `omega_s(t) / omega_x0` at dimensionless time `t`.
    pub fn omega_s(&self, t: f64) -> f64 {
        match self.law {
            ScheduleLaw::SqrtTime => self.omega_s0 * t.max(0.0).sqrt(),
            ScheduleLaw::Linear => self.omega_s0 * t,
            ScheduleLaw::Constant => self.omega_s0,
        }
    }

    /// Largest growth rate of `beta^2` on the grid; the left-hand side of
    /// the level-crossing estimate.
    pub fn max_pinning_rate(&self) -> f64 {
        match self.law {
            ScheduleLaw::SqrtTime => self.omega_s0 * self.omega_s0,
            // d(beta^2)/dt = 2 omega_s0^2 t, largest at the end.
            ScheduleLaw::Linear => 2.0 * self.omega_s0 * self.omega_s0 * self.duration,
            ScheduleLaw::Constant => 0.0,
        }
    }
}

/// Everything evaluated along one sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub times: Vec<f64>,
    /// Instantaneous spectra, continuity-aligned: signs (and order, should a
    /// true crossing occur) follow the previous step, overriding the static
    /// sign convention.
    pub spectra: Vec<ModeSpectrum>,
    pub mu_eff: Vec<f64>,
    /// Signed frame-rotation couplings `S_kq` per time step; antisymmetric
    /// up to finite-difference error.
    pub s_coupling: Vec<DMatrix<f64>>,
    /// Signed velocity-velocity couplings `R_kq` per time step; symmetric by
    /// construction.
    pub r_coupling: Vec<DMatrix<f64>>,
    /// Per-time ratio of the smallest mode gap to the largest `|S_kq|`.
    pub adiabatic_margin: Vec<f64>,
    /// Dipole strength at which `mu_eff` crosses 1, when the sweep brackets
    /// it.
    pub transition_omega_s: Option<f64>,
}

/// Adiabaticity diagnostics for a completed sweep.
#[derive(Debug, Clone)]
pub struct AdiabaticReport {
    /// Largest `|S_kq| / |omega_k - omega_q|` over all times and mode pairs.
    pub worst_ratio: f64,
    pub worst_time: f64,
    pub worst_pair: (usize, usize),
    /// Smallest mode gap anywhere on the sweep.
    pub min_gap: f64,
    /// Largest growth rate of `beta^2` (left side of the crossing estimate).
    pub sweep_rate_sq: f64,
    /// Right side of the crossing estimate, `min_gap^2 * duration`.
    pub gap_sq_duration: f64,
    /// Whether `sweep_rate_sq <= gap_sq_duration`.
    pub crossing_estimate_ok: bool,
    pub threshold: f64,
    /// Strict verdict: `worst_ratio <= threshold`.
    pub pass: bool,
}

impl AdiabaticReport {
    pub fn summary(&self) -> String {
        format!(
            "worst |S|/gap {:.3e} at t={:.3e} (modes {}:{}), min gap {:.3e}, \
             rate {:.3e} vs gap^2*T {:.3e} ({}), verdict {}",
            self.worst_ratio,
            self.worst_time,
            self.worst_pair.0 + 1,
            self.worst_pair.1 + 1,
            self.min_gap,
            self.sweep_rate_sq,
            self.gap_sq_duration,
            if self.crossing_estimate_ok { "ok" } else { "violated" },
            if self.pass { "pass" } else { "fail" },
        )
    }
}

/// Runs a sweep for a heavy impurity (`mass_ratio > 1`, no static dipole
/// force) and collects spectra, couplings and margins on the time grid.
pub fn run_sweep(config: &TrapConfig, schedule: &SweepSchedule) -> Result<SweepResult> {
    config.validate()?;
    schedule.validate()?;
    if config.mass_ratio <= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "sweeps need a heavy impurity (mass ratio > 1), got {}; \
             the dipole force can only reduce the effective mass",
            config.mass_ratio
        )));
    }
    if config.dipole_beta != 0.0 {
        return Err(Error::InvalidConfig(
            "the schedule supplies the dipole strength; set dipole_beta = 0".into(),
        ));
    }

    let positions = solve_equilibrium(config.n_ions)?;
    let n = config.n_ions;
    let steps = schedule.steps;
    let dt = schedule.duration / (steps - 1) as f64;

    let mut times = Vec::with_capacity(steps);
    let mut spectra: Vec<ModeSpectrum> = Vec::with_capacity(steps);
    let mut mu_eff = Vec::with_capacity(steps);

    for i in 0..steps {
        let t = i as f64 * dt;
        let beta = schedule.omega_s(t);
        let cfg = config.with_dipole_beta(beta);
        let mut spectrum = diagonalize(&build_matrix(&cfg, &positions)?)?;
        if let Some(prev) = spectra.last() {
            align_to(prev, &mut spectrum, i)?;
        }
        times.push(t);
        mu_eff.push(effective_mass_ratio(config.mass_ratio, beta));
        spectra.push(spectrum);
    }

    // Mode-vector velocities: central differences inside, one-sided at the
    // ends.
    let mut velocities: Vec<DMatrix<f64>> = Vec::with_capacity(steps);
    for i in 0..steps {
        let v = if i == 0 {
            (spectra[1].vectors() - spectra[0].vectors()) / dt
        } else if i == steps - 1 {
            (spectra[steps - 1].vectors() - spectra[steps - 2].vectors()) / dt
        } else {
            (spectra[i + 1].vectors() - spectra[i - 1].vectors()) / (2.0 * dt)
        };
        velocities.push(v);
    }

    let mut s_coupling = Vec::with_capacity(steps);
    let mut r_coupling = Vec::with_capacity(steps);
    let mut adiabatic_margin = Vec::with_capacity(steps);
    for i in 0..steps {
        let b = spectra[i].vectors();
        let s = b.transpose() * &velocities[i];
        let r = velocities[i].transpose() * &velocities[i];

        let mut max_s = 0.0_f64;
        let mut min_gap = f64::INFINITY;
        for k in 0..n {
            for q in 0..n {
                if k == q {
                    continue;
                }
                max_s = max_s.max(s[(k, q)].abs());
                let gap = (spectra[i].freqs()[k] - spectra[i].freqs()[q]).abs();
                min_gap = min_gap.min(gap);
            }
        }
        adiabatic_margin.push(min_gap / max_s.max(1e-300));
        s_coupling.push(s);
        r_coupling.push(r);
    }

    let beta_end = schedule.omega_s(schedule.duration);
    let transition_omega_s = transition_beta(config.mass_ratio, beta_end);

    Ok(SweepResult {
        times,
        spectra,
        mu_eff,
        s_coupling,
        r_coupling,
        adiabatic_margin,
        transition_omega_s,
    })
}

/// Reorders and re-signs `current` so each column continues the branch it
/// followed in `previous` (greedy maximal-overlap matching).
fn align_to(previous: &ModeSpectrum, current: &mut ModeSpectrum, step: usize) -> Result<()> {
    let n = previous.n();
    let overlap = previous.vectors().transpose() * current.vectors();

    // Greedy assignment on |overlap|, largest first.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for k in 0..n {
        for c in 0..n {
            candidates.push((overlap[(k, c)].abs(), k, c));
        }
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for &(_, k, c) in &candidates {
        if assignment[k] == usize::MAX && !used[c] {
            assignment[k] = c;
            used[c] = true;
        }
    }

    let mut worst = f64::INFINITY;
    for k in 0..n {
        worst = worst.min(overlap[(k, assignment[k])].abs());
    }
    if worst < MIN_ALIGNMENT_OVERLAP {
        return Err(Error::AlignmentFailure { step, overlap: worst });
    }

    let mut lambdas = Vec::with_capacity(n);
    let mut freqs = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for k in 0..n {
        let c = assignment[k];
        lambdas.push(current.lambdas[c]);
        freqs.push(current.freqs[c]);
        let sign = if overlap[(k, c)] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(k, &(sign * current.vectors.column(c)));
    }
    current.lambdas = lambdas;
    current.freqs = freqs;
    current.vectors = vectors;
    Ok(())
}

/// Adiabaticity report with the default verdict threshold.
pub fn adiabatic_check(result: &SweepResult, schedule: &SweepSchedule) -> AdiabaticReport {
    adiabatic_check_with_threshold(result, schedule, DEFAULT_ADIABATIC_THRESHOLD)
}

pub fn adiabatic_check_with_threshold(
    result: &SweepResult,
    schedule: &SweepSchedule,
    threshold: f64,
) -> AdiabaticReport {
    let n = result.spectra.first().map_or(0, |s| s.n());
    let mut worst_ratio = 0.0_f64;
    let mut worst_time = 0.0;
    let mut worst_pair = (0, 0);
    let mut min_gap = f64::INFINITY;

    for (i, s) in result.s_coupling.iter().enumerate() {
        let freqs = result.spectra[i].freqs();
        for k in 0..n {
            for q in 0..n {
                if k == q {
                    continue;
                }
                let gap = (freqs[k] - freqs[q]).abs();
                min_gap = min_gap.min(gap);
                let ratio = s[(k, q)].abs() / gap.max(1e-300);
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                    worst_time = result.times[i];
                    worst_pair = (k, q);
                }
            }
        }
    }

    let sweep_rate_sq = schedule.max_pinning_rate();
    let gap_sq_duration = min_gap * min_gap * schedule.duration;
    AdiabaticReport {
        worst_ratio,
        worst_time,
        worst_pair,
        min_gap,
        sweep_rate_sq,
        gap_sq_duration,
        crossing_estimate_ok: sweep_rate_sq <= gap_sq_duration,
        threshold,
        pass: worst_ratio <= threshold,
    }
}

/// Sweep plus per-time local-phonon observables.
#[derive(Debug, Clone)]
pub struct SweepObservables {
    pub sweep: SweepResult,
    /// Observables at each grid time, with the mode occupations held fixed
    /// at the prepared state (adiabatic following).
    pub per_time: Vec<PhononObservables>,
    /// Carried as an annotation: a failing verdict does not abort the
    /// evaluation.
    pub adiabatic: AdiabaticReport,
}

/// Evaluates the prepared state's observables against the instantaneous
/// spectrum at every grid time. Under adiabatic following the impurity mean
/// drops from about `n` to about 0 as `mu_eff` crosses 1.
pub fn observables_along_sweep(
    config: &TrapConfig,
    schedule: &SweepSchedule,
) -> Result<SweepObservables> {
    let sweep = run_sweep(config, schedule)?;
    let adiabatic = adiabatic_check(&sweep, schedule);
    let mut per_time = Vec::with_capacity(sweep.times.len());
    for (i, spectrum) in sweep.spectra.iter().enumerate() {
        let cfg = config.with_dipole_beta(schedule.omega_s(sweep.times[i]));
        per_time.push(observables(spectrum, &cfg)?);
    }
    Ok(SweepObservables { sweep, per_time, adiabatic })
}
