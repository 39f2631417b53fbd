//! Transverse normal modes of the doped chain.
//!
//! The harmonic expansion of trap plus Coulomb energy around the equilibrium
//! chain gives a real symmetric matrix whose eigenvalues `lambda_k` fix the
//! mode frequencies through `omega_k / omega_x0 = sqrt(lambda_k)`. With the
//! mass-scaled coordinates used throughout, the entries are
//!
//! ```text
//! B_jj   = 1 - a^2/2 - a^2 S_j                      (host site)
//! B_jj   = 1/mu^2 - a^2/(2 mu) - (a^2/mu) S_j + beta^2   (impurity site)
//! B_ij   = a^2 / |u_i - u_j|^3                      (host-host)
//! B_ij   = a^2 / (sqrt(mu) |u_i - u_j|^3)           (host-impurity)
//! ```
//!
//! with `a = alpha`, `S_j = sum_{p != j} |u_j - u_p|^-3`, and `beta^2` the
//! optical-dipole pinning term on the impurity diagonal.
//!
//! Modes are sorted by descending eigenvalue, so index 0 is the
//! center-of-mass-like (COM) mode and index `n-1` the lowest-lying (LL) mode.

use nalgebra::DMatrix;

use crate::crystal::{EquilibriumPositions, TrapConfig};
use crate::error::{Error, Result};

/// Default finite-difference step for [`cusp_metric`]; balances truncation
/// against cancellation for eigenvalues accurate to ~1e-10.
pub const DEFAULT_CUSP_STEP: f64 = 1e-3;

/// Real symmetric transverse mode matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatrix {
    b: DMatrix<f64>,
}

impl ModeMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.b.trace()
    }
}

/// Labeled, sign-fixed eigendecomposition of a [`ModeMatrix`].
///
/// `vectors` holds one orthonormal eigenvector per column, ordered with the
/// eigenvalues. The static sign convention makes the largest-magnitude entry
/// of each column positive; sweeps override it to keep vectors continuous in
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    pub(crate) lambdas: Vec<f64>,
    pub(crate) freqs: Vec<f64>,
    pub(crate) vectors: DMatrix<f64>,
    pub(crate) com_index: usize,
    pub(crate) ll_index: usize,
}

impl ModeSpectrum {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Eigenvalues, descending.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Mode frequencies over the bare transverse frequency, `sqrt(lambda_k)`.
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Eigenvector matrix; column `k` belongs to `lambdas()[k]`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Amplitude of mode `k` at site `j` (both 0-based).
    pub fn amplitude(&self, j: usize, k: usize) -> f64 {
        self.vectors[(j, k)]
    }

    /// Index of the highest-frequency (center-of-mass) mode: 0.
    pub fn com_index(&self) -> usize {
        self.com_index
    }

    /// Index of the lowest-lying mode: `n - 1`.
    pub fn ll_index(&self) -> usize {
        self.ll_index
    }
}

/// Builds the mode matrix for a solved chain, including the dipole term when
/// `config.dipole_beta > 0`. With `mass_ratio = 1` and no dipole force the
/// impurity row is indistinguishable from any other.
pub fn build_matrix(config: &TrapConfig, positions: &EquilibriumPositions) -> Result<ModeMatrix> {
    config.validate()?;
    if positions.len() != config.n_ions {
        return Err(Error::DimensionMismatch {
            expected: config.n_ions,
            actual: positions.len(),
        });
    }

    let n = config.n_ions;
    let u = positions.positions();
    let jm = config.impurity_index();
    let a2 = config.alpha * config.alpha;
    let mu = config.mass_ratio;
    let sqrt_mu = mu.sqrt();

    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = a2 / (u[i] - u[j]).abs().powi(3);
            if i == jm || j == jm {
                v /= sqrt_mu;
            }
            // Stored once, mirrored verbatim: exact symmetry.
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    for j in 0..n {
        let coulomb: f64 = (0..n)
            .filter(|&p| p != j)
            .map(|p| 1.0 / (u[j] - u[p]).abs().powi(3))
            .sum();
        b[(j, j)] = if j == jm {
            1.0 / (mu * mu) - a2 / (2.0 * mu) - a2 * coulomb / mu
                + config.dipole_beta * config.dipole_beta
        } else {
            1.0 - a2 / 2.0 - a2 * coulomb
        };
    }
    Ok(ModeMatrix { b })
}

/// Dense symmetric eigendecomposition with deterministic ordering and signs.
///
/// Sorting is a stable descending sort on the eigenvalue with the solver
/// index as tie-break, so exact degeneracies keep a reproducible order.
pub fn diagonalize(matrix: &ModeMatrix) -> Result<ModeSpectrum> {
    if matrix.b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteMatrix);
    }
    let n = matrix.n();
    let eig = nalgebra::SymmetricEigen::new(matrix.b.clone());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut lambdas = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        if lambda <= 0.0 {
            return Err(Error::UnstableCrystal { lambda });
        }
        lambdas.push(lambda);
        vectors.set_column(k, &eig.eigenvectors.column(src));
        fix_column_sign(&mut vectors, k);
    }
    let freqs = lambdas.iter().map(|l| l.sqrt()).collect();

    Ok(ModeSpectrum { lambdas, freqs, vectors, com_index: 0, ll_index: n - 1 })
}

/// Make the largest-magnitude entry of column `k` positive (lowest index
/// wins a tie). Stable under tiny perturbations of near-zero entries, which
/// sweep finite differences rely on.
fn fix_column_sign(vectors: &mut DMatrix<f64>, k: usize) {
    let col = vectors.column(k);
    let mut lead = 0;
    let mut best = -1.0;
    for (j, &v) in col.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            lead = j;
        }
    }
    if vectors[(lead, k)] < 0.0 {
        let mut col = vectors.column_mut(k);
        col.neg_mut();
    }
}

/// Convenience: solve the chain, build the matrix, diagonalize.
pub fn spectrum_for(config: &TrapConfig) -> Result<ModeSpectrum> {
    let positions = crate::crystal::solve_equilibrium(config.n_ions)?;
    diagonalize(&build_matrix(config, &positions)?)
}

/// Decoupled-site limit of the spectrum for `alpha -> 0`, in units of the
/// bare transverse frequency and in descending order: every mode sits at
/// `omega_x` except the impurity mode at `omega_x / mu`, which is the COM
/// mode for `mu < 1` and the LL mode for `mu > 1`.
pub fn asymptotic_freqs(config: &TrapConfig) -> Vec<f64> {
    let wx = config.omega_x_ratio();
    let mu = config.mass_ratio;
    let n = config.n_ions;
    let mut freqs = vec![wx; n];
    if mu > 1.0 {
        freqs[n - 1] = wx / mu;
    } else if mu < 1.0 {
        freqs[0] = wx / mu;
    }
    freqs
}

/// Jump of the one-sided derivative of the extreme mode frequencies across
/// the critical mass ratio, from finite differences at `mu = 1 +- du`.
///
/// Uses `config` for everything except `mass_ratio`. The jump is evaluated
/// for the COM and LL branches and the larger is returned; it grows towards
/// `omega_x / omega_x0` (about 1) as `alpha` shrinks and the avoided
/// crossing closes.
pub fn cusp_metric(config: &TrapConfig, du: f64) -> Result<f64> {
    if !(du > 0.0 && du < 0.5) {
        return Err(Error::InvalidConfig(format!("cusp step must be in (0, 0.5), got {du}")));
    }
    let positions = crate::crystal::solve_equilibrium(config.n_ions)?;
    let freqs_at = |mu: f64| -> Result<Vec<f64>> {
        let cfg = config.with_mass_ratio(mu);
        let spectrum = diagonalize(&build_matrix(&cfg, &positions)?)?;
        Ok(spectrum.freqs.clone())
    };

    let below = freqs_at(1.0 - du)?;
    let center = freqs_at(1.0)?;
    let above = freqs_at(1.0 + du)?;

    let n = config.n_ions;
    let jump = |k: usize| {
        let left = (center[k] - below[k]) / du;
        let right = (above[k] - center[k]) / du;
        (right - left).abs()
    };
    Ok(jump(0).max(jump(n - 1)))
}
