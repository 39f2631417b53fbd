//! Brute-force reference for the local-phonon observables.
//!
//! Builds every site's position and momentum operator directly from the
//! ladder operators of the collective modes in a truncated Fock space,
//! forms the local number operators verbatim, and takes expectation values
//! in the prepared state. No quadratic-form bookkeeping is shared with
//! [`crate::phonons`]; agreement between the two paths is what validates
//! the closed-form route, impurity mass factors included.
//!
//! Operators act matrix-free on state vectors: a basis state is an
//! occupation tuple, stored at the lexicographic index with mode 0 (the
//! COM mode) as the most significant digit. Applying a site operator needs
//! one ladder shift per mode, so expectation values cost O(modes * dim).
//!
//! Because the prepared state is a finite Fock product and each number
//! operator moves occupations by at most two quanta, any cutoff at least
//! two above the prepared level gives exact expectation values; the
//! convergence scan demonstrates that rather than hunting a plateau.

use nalgebra::DVector;

use crate::crystal::TrapConfig;
use crate::error::{Error, Result};
use crate::modes::ModeSpectrum;
use crate::phonons::{classify_phase, PhononObservables};

/// Largest mode count the oracle accepts; dimensions explode beyond it.
pub const MAX_ORACLE_MODES: usize = 4;

/// Observable shifts above this between successive cutoffs count as
/// non-convergence.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

/// Truncated product Fock space: `n_modes` modes, each holding up to
/// `cutoff` quanta, enumerated lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_modes: usize,
    cutoff: usize,
}

impl FockBasis {
    pub fn new(n_modes: usize, cutoff: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > MAX_ORACLE_MODES {
            return Err(Error::FockDimensionGuard { n_modes, max: MAX_ORACLE_MODES });
        }
        if cutoff == 0 {
            return Err(Error::InvalidConfig("cutoff must be positive".into()));
        }
        Ok(FockBasis { n_modes, cutoff })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1).pow(self.n_modes as u32)
    }

    /// Stride of mode `k`: mode 0 is the most significant digit.
    fn stride(&self, k: usize) -> usize {
        (self.cutoff + 1).pow((self.n_modes - 1 - k) as u32)
    }

    fn digit(&self, index: usize, k: usize) -> usize {
        (index / self.stride(k)) % (self.cutoff + 1)
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                actual: occupations.len(),
            });
        }
        let mut index = 0;
        for (k, &d) in occupations.iter().enumerate() {
            if d > self.cutoff {
                return Err(Error::InvalidConfig(format!(
                    "occupation {d} exceeds cutoff {}",
                    self.cutoff
                )));
            }
            index += d * self.stride(k);
        }
        Ok(index)
    }

    pub fn occupations_of(&self, index: usize) -> Vec<usize> {
        (0..self.n_modes).map(|k| self.digit(index, k)).collect()
    }

    /// All occupation tuples in enumeration order.
    pub fn states(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.dim()).map(|i| self.occupations_of(i))
    }

    /// `out += coeff * (a_k v)`.
    fn add_lower(&self, k: usize, coeff: f64, v: &DVector<f64>, out: &mut DVector<f64>) {
        let stride = self.stride(k);
        for idx in 0..self.dim() {
            let d = self.digit(idx, k);
            if d >= 1 {
                out[idx - stride] += coeff * (d as f64).sqrt() * v[idx];
            }
        }
    }

    /// `out += coeff * (a_k^+ v)`.
    fn add_raise(&self, k: usize, coeff: f64, v: &DVector<f64>, out: &mut DVector<f64>) {
        let stride = self.stride(k);
        for idx in 0..self.dim() {
            let d = self.digit(idx, k);
            if d + 1 <= self.cutoff {
                out[idx + stride] += coeff * ((d + 1) as f64).sqrt() * v[idx];
            }
        }
    }
}

/// One site's operators as actions on state vectors. `position` applies
/// `x_j`; `momentum_real` applies `w_j` where `p_j = i w_j`, so `p_j^2`
/// contributes `-w_j^2`.
struct SiteOperators<'a> {
    basis: &'a FockBasis,
    /// Per mode, the coefficient of `(a_k + a_k^+)` in `x_j`.
    x_coeffs: Vec<f64>,
    /// Per mode, the coefficient of `(a_k^+ - a_k)` in `w_j`.
    w_coeffs: Vec<f64>,
}

impl<'a> SiteOperators<'a> {
    /// Builds `x_j` and `p_j` for site `j` from the mode expansion: the mode
    /// quadratures carry zero-point widths `1/sqrt(2 nu_k)` and
    /// `sqrt(nu_k/2)`, and the impurity site scales position by
    /// `1/sqrt(mu)` and momentum by `sqrt(mu)`.
    fn new(basis: &'a FockBasis, spectrum: &ModeSpectrum, config: &TrapConfig, j: usize) -> Self {
        let n = spectrum.n();
        let sqrt_mu = config.mass_ratio.sqrt();
        let (xs, ps) = if j == config.impurity_index() { (1.0 / sqrt_mu, sqrt_mu) } else { (1.0, 1.0) };
        let mut x_coeffs = Vec::with_capacity(n);
        let mut w_coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let nu = spectrum.freqs()[k];
            let b = spectrum.amplitude(j, k);
            x_coeffs.push(xs * b / (2.0 * nu).sqrt());
            w_coeffs.push(ps * b * (nu / 2.0).sqrt());
        }
        SiteOperators { basis, x_coeffs, w_coeffs }
    }

    fn position(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.basis.dim());
        for (k, &c) in self.x_coeffs.iter().enumerate() {
            if c != 0.0 {
                self.basis.add_lower(k, c, v, &mut out);
                self.basis.add_raise(k, c, v, &mut out);
            }
        }
        out
    }

    fn momentum_real(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.basis.dim());
        for (k, &c) in self.w_coeffs.iter().enumerate() {
            if c != 0.0 {
                self.basis.add_raise(k, c, v, &mut out);
                self.basis.add_lower(k, -c, v, &mut out);
            }
        }
        out
    }

    /// `n_j v = (x_j^2 v - w_j^2 v) / 2 - v / 2`.
    fn number(&self, v: &DVector<f64>) -> DVector<f64> {
        let xv = self.position(&self.position(v));
        let wv = self.momentum_real(&self.momentum_real(v));
        (xv - wv - v) / 2.0
    }
}

/// Exact observables of `|00...n>` in the truncated space. Evaluates at
/// `cutoff` and `cutoff + 2` and refuses to answer if they disagree.
pub fn exact_observables(
    config: &TrapConfig,
    spectrum: &ModeSpectrum,
    cutoff: usize,
) -> Result<PhononObservables> {
    config.validate()?;
    if config.n_ions > MAX_ORACLE_MODES {
        return Err(Error::FockDimensionGuard { n_modes: config.n_ions, max: MAX_ORACLE_MODES });
    }
    if spectrum.n() != config.n_ions {
        return Err(Error::DimensionMismatch { expected: config.n_ions, actual: spectrum.n() });
    }
    if cutoff < config.ll_phonons + 4 {
        return Err(Error::InvalidConfig(format!(
            "cutoff {cutoff} below prepared level {} + 4",
            config.ll_phonons
        )));
    }

    let coarse = observables_at_cutoff(config, spectrum, cutoff)?;
    let fine = observables_at_cutoff(config, spectrum, cutoff + 2)?;
    let delta = observable_delta(&coarse, &fine);
    if delta > CONVERGENCE_TOLERANCE {
        return Err(Error::CutoffNotConverged { cutoff, delta });
    }
    Ok(fine)
}

/// Observables per cutoff with the shift from the previous row; evidence
/// that the chosen cutoff is converged.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub cutoff: usize,
    pub observables: PhononObservables,
    /// Largest change in any observable against the previous row.
    pub max_delta: Option<f64>,
}

pub fn convergence_scan(
    config: &TrapConfig,
    spectrum: &ModeSpectrum,
    cutoffs: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cutoffs.len());
    for &cutoff in cutoffs {
        if cutoff < config.ll_phonons + 4 {
            return Err(Error::InvalidConfig(format!(
                "cutoff {cutoff} below prepared level {} + 4",
                config.ll_phonons
            )));
        }
        let observables = observables_at_cutoff(config, spectrum, cutoff)?;
        let max_delta = rows.last().map(|prev| observable_delta(&prev.observables, &observables));
        rows.push(ConvergenceRow { cutoff, observables, max_delta });
    }
    Ok(rows)
}

fn observables_at_cutoff(
    config: &TrapConfig,
    spectrum: &ModeSpectrum,
    cutoff: usize,
) -> Result<PhononObservables> {
    let n = config.n_ions;
    let basis = FockBasis::new(n, cutoff)?;
    let dim = basis.dim();

    let mut occupations = vec![0; n];
    occupations[spectrum.ll_index()] = config.ll_phonons;
    let mut state = DVector::zeros(dim);
    state[basis.index_of(&occupations)?] = 1.0;

    // One n_j |state> per site; every moment is then an inner product.
    let mut number_applied = Vec::with_capacity(n);
    for j in 0..n {
        let ops = SiteOperators::new(&basis, spectrum, config, j);
        number_applied.push(ops.number(&state));
    }

    let mean: Vec<f64> = number_applied.iter().map(|nv| state.dot(nv)).collect();
    let mut correlation = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            correlation[(i, j)] = number_applied[i].dot(&number_applied[j]) - mean[i] * mean[j];
        }
    }
    let mut variance = Vec::with_capacity(n);
    for j in 0..n {
        let var = correlation[(j, j)];
        if var < -1e-10 {
            return Err(Error::InternalConsistency(format!(
                "negative variance {var:.3e} at site {} in the Fock oracle",
                j + 1
            )));
        }
        variance.push(var.max(0.0).sqrt());
    }

    Ok(PhononObservables { mean, variance, correlation, phase_label: classify_phase(config) })
}

fn observable_delta(a: &PhononObservables, b: &PhononObservables) -> f64 {
    let mut delta = 0.0_f64;
    for (x, y) in a.mean.iter().zip(&b.mean) {
        delta = delta.max((x - y).abs());
    }
    for (x, y) in a.variance.iter().zip(&b.variance) {
        delta = delta.max((x - y).abs());
    }
    delta.max((&a.correlation - &b.correlation).amax())
}
