//! Local-phonon observables and phase classification.
//!
//! A "local phonon" is a quantum of one ion's transverse oscillation in its
//! own harmonic frame, as opposed to a quantum of a collective mode. Site
//! number operators are quadratic forms in the mode quadratures, so every
//! expectation value in a product state of mode Fock levels reduces to
//! second and fourth moments of those levels.
//!
//! With `nu_k = omega_k / omega_x0` and `b` the mode matrix, each host site
//! carries the dimensionless quadrature coefficients
//!
//! ```text
//! x_j = sum_k (b_j^k / sqrt(nu_k))   q_k
//! p_j = sum_k (b_j^k * sqrt(nu_k))   pi_k
//! ```
//!
//! The impurity site is special twice over: the mode transformation scales
//! its position by `1/sqrt(mu)` and momentum by `sqrt(mu)`, and its local
//! reference frequency is the mass-scaled `omega_x0 / mu`, whose stiffness
//! `M * omega_x0(M)` equals the host value `m * omega_x0`. The two effects
//! together put a factor `1/sqrt(mu)` on the impurity's position
//! coefficients and `sqrt(mu)` on its momentum coefficients, and nothing
//! else. The Fock-space oracle ([`crate::oracle`]) pins this bookkeeping
//! down; it is not visible in the degenerate-limit closed forms.
//!
//! Writing `n_j = (x_j^2 + p_j^2)/2 - 1/2` and normal-ordering yields, per
//! site, a pair of symmetric coefficient matrices
//!
//! ```text
//! P_j^{kq} = (f_j^k f_j^q - g_j^k g_j^q) / 4    (a a and a+ a+ terms)
//! Q_j^{kq} = (f_j^k f_j^q + g_j^k g_j^q) / 4    (a+ a terms)
//! ```
//!
//! and the mode occupations `m_k` of the prepared state give
//!
//! ```text
//! <n_j>        = 2 Q_j^{NN} m_N + tr Q_j - 1/2
//! Cov(n_i,n_j) = sum_k  P_i^{kk} P_j^{kk} [(m_k+1)(m_k+2) + m_k(m_k-1)]
//!              + 2 sum_{k!=q} P_i^{kq} P_j^{kq} [(m_k+1)(m_q+1) + m_k m_q]
//!              + 4 sum_{k!=q} Q_i^{kq} Q_j^{kq} m_k (m_q+1)
//! ```
//!
//! where the `k != q` sums run over ordered pairs.

use nalgebra::DMatrix;

use crate::crystal::TrapConfig;
use crate::error::{Error, Result};
use crate::modes::ModeSpectrum;
use crate::sweep::effective_mass_ratio;

/// Half-width of the critical band around unit effective mass ratio.
pub const PHASE_BAND: f64 = 1e-6;

/// Quantum phase of the transverse local phonons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Effective mass ratio above 1: lowest-mode phonons are condensed at
    /// the impurity; variances and correlations vanish everywhere.
    Condensed,
    /// Effective mass ratio below 1: the impurity freezes out and phonons
    /// redistribute over the host ions with nonzero variance and negative
    /// cross-correlations.
    Conducting,
    /// Within [`PHASE_BAND`] of the critical point.
    Critical,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Condensed => write!(f, "condensed"),
            Phase::Conducting => write!(f, "conducting"),
            Phase::Critical => write!(f, "critical"),
        }
    }
}

/// Occupation of each collective mode, ordered as in [`ModeSpectrum`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhononState {
    occupations: Vec<usize>,
}

impl PhononState {
    pub fn new(occupations: Vec<usize>) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::InvalidConfig("empty occupation vector".into()));
        }
        Ok(PhononState { occupations })
    }

    /// The standard prepared state: `n` phonons in the lowest-lying mode,
    /// every other mode in its ground state.
    pub fn ll_fock(n_modes: usize, n: usize) -> Self {
        let mut occupations = vec![0; n_modes];
        occupations[n_modes - 1] = n;
        PhononState { occupations }
    }

    pub fn occupations(&self) -> &[usize] {
        &self.occupations
    }
}

/// Per-site mean and spread of the local phonon number, the site-site
/// correlation matrix, and the phase label of the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononObservables {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub correlation: DMatrix<f64>,
    pub phase_label: Phase,
}

/// Mean local phonon number per site for the state `|00...n>`.
pub fn mean_occupation(spectrum: &ModeSpectrum, config: &TrapConfig) -> Result<Vec<f64>> {
    let state = PhononState::ll_fock(spectrum.n(), config.ll_phonons);
    mean_for_state(spectrum, config, &state)
}

/// Standard deviation of the local phonon number per site for `|00...n>`.
pub fn variance(spectrum: &ModeSpectrum, config: &TrapConfig) -> Result<Vec<f64>> {
    Ok(observables(spectrum, config)?.variance)
}

/// Full site-site correlation matrix `C_ij = <n_i n_j> - <n_i><n_j>`.
pub fn correlation(spectrum: &ModeSpectrum, config: &TrapConfig) -> Result<DMatrix<f64>> {
    Ok(observables(spectrum, config)?.correlation)
}

/// Phase of the configuration from its effective mass ratio; the dipole
/// force only ever lowers it.
pub fn classify_phase(config: &TrapConfig) -> Phase {
    let mu_eff = effective_mass_ratio(config.mass_ratio, config.dipole_beta);
    if mu_eff > 1.0 + PHASE_BAND {
        Phase::Condensed
    } else if mu_eff < 1.0 - PHASE_BAND {
        Phase::Conducting
    } else {
        Phase::Critical
    }
}

/// All observables for the standard state `|00...n>`.
pub fn observables(spectrum: &ModeSpectrum, config: &TrapConfig) -> Result<PhononObservables> {
    let state = PhononState::ll_fock(spectrum.n(), config.ll_phonons);
    observables_for_state(spectrum, config, &state)
}

/// All observables for an arbitrary product of mode Fock levels.
pub fn observables_for_state(
    spectrum: &ModeSpectrum,
    config: &TrapConfig,
    state: &PhononState,
) -> Result<PhononObservables> {
    let n = spectrum.n();
    if state.occupations.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: state.occupations.len() });
    }
    let (f, g) = local_quadratures(spectrum, config)?;
    let m: Vec<f64> = state.occupations.iter().map(|&v| v as f64).collect();

    let mean = mean_from_coeffs(&f, &g, &m);
    for (j, &value) in mean.iter().enumerate() {
        if value < -1e-10 {
            return Err(Error::InternalConsistency(format!(
                "negative mean occupation {value:.3e} at site {}",
                j + 1
            )));
        }
    }

    let mut correlation = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            correlation[(i, j)] = covariance(&f, &g, &m, i, j);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let skew = (correlation[(i, j)] - correlation[(j, i)]).abs();
            if skew > 1e-10 {
                return Err(Error::InternalConsistency(format!(
                    "correlation asymmetry {skew:.3e} at ({i}, {j})"
                )));
            }
        }
    }

    let mut variance = Vec::with_capacity(n);
    for j in 0..n {
        let var = correlation[(j, j)];
        if var < -1e-10 {
            return Err(Error::InternalConsistency(format!(
                "negative variance {var:.3e} at site {}",
                j + 1
            )));
        }
        variance.push(var.max(0.0).sqrt());
    }

    Ok(PhononObservables { mean, variance, correlation, phase_label: classify_phase(config) })
}

fn mean_for_state(
    spectrum: &ModeSpectrum,
    config: &TrapConfig,
    state: &PhononState,
) -> Result<Vec<f64>> {
    let (f, g) = local_quadratures(spectrum, config)?;
    let m: Vec<f64> = state.occupations.iter().map(|&v| v as f64).collect();
    let mean = mean_from_coeffs(&f, &g, &m);
    for (j, &value) in mean.iter().enumerate() {
        if value < -1e-10 {
            return Err(Error::InternalConsistency(format!(
                "negative mean occupation {value:.3e} at site {}",
                j + 1
            )));
        }
    }
    Ok(mean)
}

/// Position (`f`) and momentum (`g`) coefficient matrices, sites in rows and
/// modes in columns. The impurity row carries the mass-ratio factors.
fn local_quadratures(
    spectrum: &ModeSpectrum,
    config: &TrapConfig,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    config.validate()?;
    let n = spectrum.n();
    if n != config.n_ions {
        return Err(Error::DimensionMismatch { expected: config.n_ions, actual: n });
    }
    let jm = config.impurity_index();
    let sqrt_mu = config.mass_ratio.sqrt();
    let b = spectrum.vectors();

    let mut f = DMatrix::zeros(n, n);
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        let (xs, ps) = if j == jm { (1.0 / sqrt_mu, sqrt_mu) } else { (1.0, 1.0) };
        for k in 0..n {
            let root_nu = spectrum.freqs()[k].sqrt();
            f[(j, k)] = xs * b[(j, k)] / root_nu;
            g[(j, k)] = ps * b[(j, k)] * root_nu;
        }
    }
    Ok((f, g))
}

fn mean_from_coeffs(f: &DMatrix<f64>, g: &DMatrix<f64>, m: &[f64]) -> Vec<f64> {
    let n = m.len();
    (0..n)
        .map(|j| {
            let mut value = -0.5;
            for k in 0..n {
                let q_kk = (f[(j, k)] * f[(j, k)] + g[(j, k)] * g[(j, k)]) / 4.0;
                value += q_kk * (2.0 * m[k] + 1.0);
            }
            value
        })
        .collect()
}

fn covariance(f: &DMatrix<f64>, g: &DMatrix<f64>, m: &[f64], i: usize, j: usize) -> f64 {
    let n = m.len();
    let p = |s: usize, k: usize, q: usize| (f[(s, k)] * f[(s, q)] - g[(s, k)] * g[(s, q)]) / 4.0;
    let q_ = |s: usize, k: usize, q: usize| (f[(s, k)] * f[(s, q)] + g[(s, k)] * g[(s, q)]) / 4.0;

    let mut cov = 0.0;
    for k in 0..n {
        let mk = m[k];
        cov += p(i, k, k) * p(j, k, k) * ((mk + 1.0) * (mk + 2.0) + mk * (mk - 1.0));
        for q in 0..n {
            if q == k {
                continue;
            }
            let mq = m[q];
            let pp = p(i, k, q) * p(j, k, q);
            cov += 2.0 * pp * ((mk + 1.0) * (mq + 1.0) + mk * mq);
            cov += 4.0 * q_(i, k, q) * q_(j, k, q) * mk * (mq + 1.0);
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::spectrum_for;
    use crate::crystal::TrapConfig;

    fn config(n: usize, jm: usize, mu: f64, alpha: f64, phonons: usize) -> TrapConfig {
        TrapConfig::new(n, jm, mu, alpha, 0.0, phonons).unwrap()
    }

    #[test]
    fn degenerate_limit_mean_follows_ll_weight() {
        let cfg = config(7, 3, 1.0, 0.01, 3);
        let s = spectrum_for(&cfg).unwrap();
        let mean = mean_occupation(&s, &cfg).unwrap();
        let mut total = 0.0;
        for j in 0..7 {
            let expect = 3.0 * s.amplitude(j, s.ll_index()).powi(2);
            assert!((mean[j] - expect).abs() < 1e-3, "site {j}: {} vs {expect}", mean[j]);
            total += mean[j];
        }
        assert!((total - 3.0).abs() < 1e-2);
    }

    #[test]
    fn condensed_phase_localizes_all_phonons() {
        let cfg = config(15, 8, 43.0 / 40.0, 0.01, 2);
        let s = spectrum_for(&cfg).unwrap();
        let mean = mean_occupation(&s, &cfg).unwrap();
        assert!((mean[7] - 2.0).abs() < 0.05, "impurity mean {}", mean[7]);
        for (j, &v) in mean.iter().enumerate() {
            if j != 7 {
                assert!(v < 0.05, "site {j} mean {v}");
            }
        }
    }

    #[test]
    fn conducting_phase_spreads_phonons() {
        let cfg = config(15, 8, 40.0 / 43.0, 0.01, 2);
        let s = spectrum_for(&cfg).unwrap();
        let mean = mean_occupation(&s, &cfg).unwrap();
        assert!(mean[7] < 0.05, "impurity mean {}", mean[7]);
        for (j, &v) in mean.iter().enumerate() {
            if j != 7 {
                let expect = 2.0 * s.amplitude(j, s.ll_index()).powi(2);
                assert!((v - expect).abs() < 2e-2, "site {j}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn degenerate_limit_variance_closed_form() {
        let cfg = config(6, 2, 1.0, 0.01, 2);
        let s = spectrum_for(&cfg).unwrap();
        let var = variance(&s, &cfg).unwrap();
        for j in 0..6 {
            let w = s.amplitude(j, s.ll_index()).powi(2);
            let expect = (2.0 * w - 2.0 * w * w).max(0.0).sqrt();
            assert!((var[j] - expect).abs() < 2e-2, "site {j}: {} vs {expect}", var[j]);
        }
    }

    #[test]
    fn condensed_phase_variance_vanishes() {
        for mu in [2.0, 3.0] {
            let cfg = config(8, 4, mu, 0.01, 2);
            let s = spectrum_for(&cfg).unwrap();
            for (j, &v) in variance(&s, &cfg).unwrap().iter().enumerate() {
                assert!(v <= 2e-2, "mu={mu}, site {j}, variance {v}");
            }
        }
    }

    #[test]
    fn conducting_phase_variance_closed_form() {
        let cfg = config(15, 8, 40.0 / 43.0, 0.01, 2);
        let s = spectrum_for(&cfg).unwrap();
        let var = variance(&s, &cfg).unwrap();
        assert!(var[7] <= 2e-2, "impurity variance {}", var[7]);
        for j in 0..15 {
            if j == 7 {
                continue;
            }
            let w = s.amplitude(j, s.ll_index()).powi(2);
            let expect = (2.0 * w - 2.0 * w * w).max(0.0).sqrt();
            assert!((var[j] - expect).abs() < 2e-2, "site {j}: {} vs {expect}", var[j]);
        }
    }

    #[test]
    fn correlations_vanish_without_ll_phonons() {
        let cfg = config(5, 2, 40.0 / 43.0, 0.05, 0);
        let s = spectrum_for(&cfg).unwrap();
        let c = correlation(&s, &cfg).unwrap();
        // No phonons in the LL slot: the conducting-limit formula gives zero
        // and the exact off-diagonals carry only vacuum-squeezing corrections.
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(c[(i, j)].abs() < 1e-4, "C[{i},{j}] = {}", c[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn condensed_phase_correlations_vanish() {
        let cfg = config(6, 2, 2.0, 0.01, 3);
        let s = spectrum_for(&cfg).unwrap();
        let c = correlation(&s, &cfg).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(c[(i, j)].abs() <= 2e-2, "C[{i},{j}] = {}", c[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn degenerate_limit_correlations_closed_form() {
        let cfg = config(5, 3, 1.0, 0.01, 2);
        let s = spectrum_for(&cfg).unwrap();
        let c = correlation(&s, &cfg).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i == j {
                    continue;
                }
                let expect =
                    -2.0 * (s.amplitude(i, s.ll_index()) * s.amplitude(j, s.ll_index())).powi(2);
                assert!((c[(i, j)] - expect).abs() < 2e-2, "C[{i},{j}] {} vs {expect}", c[(i, j)]);
            }
        }
    }

    #[test]
    fn phase_labels() {
        assert_eq!(classify_phase(&config(6, 2, 43.0 / 40.0, 0.1, 2)), Phase::Condensed);
        assert_eq!(classify_phase(&config(6, 2, 40.0 / 43.0, 0.1, 2)), Phase::Conducting);
        assert_eq!(classify_phase(&config(6, 2, 1.0, 0.1, 2)), Phase::Critical);
        // The dipole force lowers the effective ratio below critical.
        let pinned = config(6, 2, 43.0 / 40.0, 0.1, 2).with_dipole_beta(0.6);
        assert_eq!(classify_phase(&pinned), Phase::Conducting);
    }

    #[test]
    fn sum_rule_lower_bound() {
        for (mu, alpha, n_ph) in [(0.7, 0.2, 1), (1.3, 0.25, 2), (2.0, 0.05, 3)] {
            let cfg = config(6, 3, mu, alpha, n_ph);
            let s = spectrum_for(&cfg).unwrap();
            let total: f64 = mean_occupation(&s, &cfg).unwrap().iter().sum();
            assert!(total >= n_ph as f64 - 1e-9, "sum {total} below n={n_ph}");
        }
    }

    #[test]
    fn zero_point_consistency() {
        let cfg = config(6, 2, 1.0, 0.001, 0);
        let s = spectrum_for(&cfg).unwrap();
        for (j, &v) in mean_occupation(&s, &cfg).unwrap().iter().enumerate() {
            assert!(v.abs() < 1e-3, "site {j} mean {v}");
        }
    }

    #[test]
    fn impurity_mean_monotone_in_mass_ratio() {
        let mut last = -1.0;
        for step in 0..=30 {
            let mu = 0.5 + 1.5 * step as f64 / 30.0;
            let cfg = config(7, 4, mu, 0.01, 2);
            let s = spectrum_for(&cfg).unwrap();
            let mean = mean_occupation(&s, &cfg).unwrap()[3];
            assert!(mean >= last - 1e-9, "mean {mean} dropped below {last} at mu={mu}");
            last = mean;
        }
    }

    #[test]
    fn mirror_covariance() {
        // The chain is symmetric under reflection, so moving the impurity to
        // the mirror site mirrors every observable vector.
        let left = config(9, 3, 1.4, 0.08, 2);
        let right = config(9, 7, 1.4, 0.08, 2);
        let obs_l = observables(&spectrum_for(&left).unwrap(), &left).unwrap();
        let obs_r = observables(&spectrum_for(&right).unwrap(), &right).unwrap();
        for j in 0..9 {
            assert!((obs_l.mean[j] - obs_r.mean[8 - j]).abs() < 1e-10);
            assert!((obs_l.variance[j] - obs_r.variance[8 - j]).abs() < 1e-10);
        }
        for i in 0..9 {
            for j in 0..9 {
                assert!(
                    (obs_l.correlation[(i, j)] - obs_r.correlation[(8 - i, 8 - j)]).abs() < 1e-10
                );
            }
        }
    }

    #[test]
    fn correlation_diagonal_is_variance_squared() {
        let cfg = config(6, 2, 1.2, 0.15, 2);
        let obs = observables(&spectrum_for(&cfg).unwrap(), &cfg).unwrap();
        for j in 0..6 {
            assert!((obs.correlation[(j, j)] - obs.variance[j] * obs.variance[j]).abs() < 1e-10);
            assert!(obs.mean[j] >= -1e-10);
        }
    }

    #[test]
    fn state_length_checked() {
        let cfg = config(4, 2, 1.2, 0.1, 1);
        let s = spectrum_for(&cfg).unwrap();
        let bad = PhononState::new(vec![0, 0, 1]).unwrap();
        assert!(matches!(
            observables_for_state(&s, &cfg, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
