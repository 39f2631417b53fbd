//! Crystal configuration and axial equilibrium positions.
//!
//! All quantities are dimensionless. Axial positions are measured in the
//! natural Coulomb length scale of the trap, so the static chain is the
//! stationary point of
//!
//! ```text
//! V(u) = sum_i u_i^2 / 2 + sum_{i<j} 1 / |u_i - u_j|
//! ```
//!
//! which is independent of the ion masses. The impurity enters only through
//! the transverse mode matrix (see [`crate::modes`]).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Max-norm force residual accepted for a converged chain.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-12;

const MAX_ITERATIONS: usize = 200;

/// Dimensionless description of the doped crystal.
///
/// `impurity_site` is 1-based: site 1 is the leftmost ion. `mass_ratio` is
/// the impurity-to-host mass ratio, `alpha` the ratio of axial to transverse
/// trapping frequency (a linear chain needs `alpha` well below 1), and
/// `dipole_beta` the strength of an optical-dipole pinning potential on the
/// impurity in units of the transverse frequency (0 = no dipole force).
/// `ll_phonons` is the number of phonons prepared in the lowest-lying mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapConfig {
    pub n_ions: usize,
    pub impurity_site: usize,
    pub mass_ratio: f64,
    pub alpha: f64,
    pub dipole_beta: f64,
    pub ll_phonons: usize,
}

impl TrapConfig {
    pub fn new(
        n_ions: usize,
        impurity_site: usize,
        mass_ratio: f64,
        alpha: f64,
        dipole_beta: f64,
        ll_phonons: usize,
    ) -> Result<Self> {
        let config = TrapConfig { n_ions, impurity_site, mass_ratio, alpha, dipole_beta, ll_phonons };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 ions, got {}",
                self.n_ions
            )));
        }
        if self.impurity_site < 1 || self.impurity_site > self.n_ions {
            return Err(Error::InvalidConfig(format!(
                "impurity site {} outside 1..={}",
                self.impurity_site, self.n_ions
            )));
        }
        if !(self.mass_ratio > 0.0) || !self.mass_ratio.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "mass ratio must be positive, got {}",
                self.mass_ratio
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1) for a linear chain, got {}",
                self.alpha
            )));
        }
        if !(self.dipole_beta >= 0.0) || !self.dipole_beta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "dipole beta must be non-negative, got {}",
                self.dipole_beta
            )));
        }
        Ok(())
    }

    /// Transverse frequency of a host ion over the bare trap frequency,
    /// `omega_x / omega_x0 = sqrt(1 - alpha^2 / 2)`.
    pub fn omega_x_ratio(&self) -> f64 {
        (1.0 - self.alpha * self.alpha / 2.0).sqrt()
    }

    /// 0-based index of the impurity site.
    pub fn impurity_index(&self) -> usize {
        self.impurity_site - 1
    }

    pub fn with_dipole_beta(&self, dipole_beta: f64) -> Self {
        TrapConfig { dipole_beta, ..self.clone() }
    }

    pub fn with_mass_ratio(&self, mass_ratio: f64) -> Self {
        TrapConfig { mass_ratio, ..self.clone() }
    }
}

/// Sorted, antisymmetric equilibrium positions of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPositions {
    u: Vec<f64>,
}

impl EquilibriumPositions {
    pub fn positions(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Max-norm of the axial force at each ion; zero at equilibrium.
pub fn force_residual(positions: &[f64]) -> f64 {
    gradient(&DVector::from_column_slice(positions)).amax()
}

/// Solves the force-balance equations of the chain with a damped Newton
/// iteration. Deterministic: a given `n_ions` always produces bit-identical
/// output.
pub fn solve_equilibrium(n_ions: usize) -> Result<EquilibriumPositions> {
    if n_ions < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 ions, got {n_ions}"
        )));
    }

    // Equispaced seed with an empirically adequate spread; Newton diverges
    // from poor seeds on the Coulomb chain.
    let n = n_ions as f64;
    let spread = 2.0 * n.powf(-0.44);
    let mut u = DVector::from_fn(n_ions, |i, _| (i as f64 + 1.0 - 0.5 * (n + 1.0)) * spread);

    let mut grad = gradient(&u);
    let mut residual = grad.amax();
    let mut iterations = 0;

    while residual > EQUILIBRIUM_TOLERANCE / 10.0 && iterations < MAX_ITERATIONS {
        iterations += 1;
        let step = hessian(&u)
            .lu()
            .solve(&(-&grad))
            .ok_or(Error::EquilibriumNonConvergence { residual, iterations })?;

        // Halve the step until the residual actually drops and the chain
        // stays ordered.
        let mut damping = 1.0;
        let mut accepted = false;
        while damping > 1e-14 {
            let trial = &u + damping * &step;
            if strictly_increasing(&trial) {
                let trial_grad = gradient(&trial);
                let trial_residual = trial_grad.amax();
                if trial_residual < residual {
                    u = trial;
                    grad = trial_grad;
                    residual = trial_residual;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !accepted {
            // Line search stalled; acceptable only if already converged.
            break;
        }
    }

    if residual > EQUILIBRIUM_TOLERANCE {
        return Err(Error::EquilibriumNonConvergence { residual, iterations });
    }

    // The exact solution is antisymmetric; enforce it.
    let mut out = vec![0.0; n_ions];
    for i in 0..n_ions {
        out[i] = 0.5 * (u[i] - u[n_ions - 1 - i]);
    }

    let final_residual = force_residual(&out);
    if final_residual > EQUILIBRIUM_TOLERANCE {
        return Err(Error::EquilibriumNonConvergence { residual: final_residual, iterations });
    }
    Ok(EquilibriumPositions { u: out })
}

fn strictly_increasing(u: &DVector<f64>) -> bool {
    u.as_slice().windows(2).all(|w| w[0] < w[1])
}

/// Gradient of V: g_i = u_i - sum_{p<i} (u_i-u_p)^-2 + sum_{p>i} (u_p-u_i)^-2.
fn gradient(u: &DVector<f64>) -> DVector<f64> {
    let n = u.len();
    let mut g = u.clone();
    for i in 0..n {
        for p in 0..n {
            if p == i {
                continue;
            }
            let d = u[i] - u[p];
            g[i] -= d.signum() / (d * d);
        }
    }
    g
}

/// Hessian of V: diag 1 + 2 sum |d|^-3, off-diagonal -2 |d|^-3. Strictly
/// diagonally dominant, hence positive definite near any ordered chain.
fn hessian(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for p in 0..n {
            if p == i {
                continue;
            }
            let w = 2.0 / (u[i] - u[p]).abs().powi(3);
            diag += w;
            h[(i, p)] = -w;
        }
        h[(i, i)] = diag;
    }
    h
}
