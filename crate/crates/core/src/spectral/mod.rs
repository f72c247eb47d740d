//! Eigenbasis of the 1-D Dirichlet operator `A u = -(a u')'`, the resonant
//! splitting of `X` and `E = X^alpha x X`, and semigroup decay constants.

mod decay;
mod decomposition;
pub mod tridiag;

pub use decay::{
    backward_minus_action, decay_constants, decay_time_grid, forward_plus_action, DecayConstants,
};
pub use decomposition::{
    block_projector_norm, center_block, decompose, projection_norms, ModeClass, ProjectionNorms,
    ResonanceDecomposition, DEFAULT_SNAP_TOL,
};

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use tridiag::SymTridiagonal;

/// Diffusion coefficient `a(x)` of the elliptic operator.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// Piecewise-linear interpolation of `(x, a)` nodes, constant beyond the ends.
    Table(Vec<(f64, f64)>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant(a) => *a,
            Coefficient::Table(nodes) => interpolate(nodes, x),
            Coefficient::Function(f) => f(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(a) => write!(f, "Constant({a})"),
            Coefficient::Table(t) => write!(f, "Table({} nodes)", t.len()),
            Coefficient::Function(_) => write!(f, "Function(..)"),
        }
    }
}

fn interpolate(nodes: &[(f64, f64)], x: f64) -> f64 {
    match nodes {
        [] => f64::NAN,
        [(_, a)] => *a,
        _ => {
            if x <= nodes[0].0 {
                return nodes[0].1;
            }
            for w in nodes.windows(2) {
                let ((x0, a0), (x1, a1)) = (w[0], w[1]);
                if x <= x1 {
                    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 1.0 };
                    return a0 + t * (a1 - a0);
                }
            }
            nodes[nodes.len() - 1].1
        }
    }
}

/// `-(a u')'` on `(0, length)` with Dirichlet conditions, sampled on
/// `n_grid` equally spaced nodes including both endpoints.
#[derive(Debug, Clone)]
pub struct EllipticOperator1D {
    pub length: f64,
    pub coefficient: Coefficient,
    pub n_grid: usize,
    /// Ellipticity constant: `a(x) >= c0` is required on the grid.
    pub c0: f64,
}

impl EllipticOperator1D {
    pub const MIN_GRID: usize = 16;

    pub fn new(length: f64, coefficient: Coefficient, n_grid: usize) -> Self {
        EllipticOperator1D {
            length,
            coefficient,
            n_grid,
            c0: 1e-12,
        }
    }

    pub fn laplacian(length: f64, n_grid: usize) -> Self {
        Self::new(length, Coefficient::Constant(1.0), n_grid)
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n_grid - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidOperator(format!(
                "interval length must be positive, got {}",
                self.length
            )));
        }
        if self.n_grid < Self::MIN_GRID {
            return Err(Error::InvalidOperator(format!(
                "n_grid must be at least {}, got {}",
                Self::MIN_GRID,
                self.n_grid
            )));
        }
        if !(self.c0 > 0.0) {
            return Err(Error::InvalidOperator(format!(
                "ellipticity constant c0 must be positive, got {}",
                self.c0
            )));
        }
        let h = self.spacing();
        // nodes and cell midpoints
        for j in 0..(2 * self.n_grid - 1) {
            let x = 0.5 * h * j as f64;
            let a = self.coefficient.eval(x);
            if !(a >= self.c0) {
                return Err(Error::Ellipticity {
                    x,
                    value: a,
                    c0: self.c0,
                });
            }
        }
        Ok(())
    }

    /// Second-order central differences on the interior nodes.
    pub fn matrix(&self) -> SymTridiagonal {
        let h = self.spacing();
        let n = self.n_grid - 2;
        let inv_h2 = 1.0 / (h * h);
        let a_mid: Vec<f64> = (0..self.n_grid - 1)
            .map(|j| self.coefficient.eval((j as f64 + 0.5) * h))
            .collect();
        let diag = (0..n).map(|j| (a_mid[j] + a_mid[j + 1]) * inv_h2).collect();
        let off = (0..n.saturating_sub(1))
            .map(|j| -a_mid[j + 1] * inv_h2)
            .collect();
        SymTridiagonal::new(diag, off)
    }
}

/// Lowest Dirichlet eigenpairs on the grid together with the trapezoidal
/// quadrature that makes them orthonormal in `L^2(0, length)`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    length: f64,
    grid: Vec<f64>,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// One grid function per mode, zero at both endpoints.
    eigenvectors: Vec<Vec<f64>>,
}

/// The `n_modes` lowest eigenpairs of the finite-difference operator.
pub fn build_basis(op: &EllipticOperator1D, n_modes: usize) -> Result<SpectralBasis> {
    op.validate()?;
    if n_modes == 0 || n_modes > op.n_grid - 2 {
        return Err(Error::InvalidArgument(format!(
            "n_modes must lie in 1..={}, got {n_modes}",
            op.n_grid - 2
        )));
    }
    let t = op.matrix();
    let h = op.spacing();
    let n_grid = op.n_grid;
    let grid: Vec<f64> = (0..n_grid).map(|j| j as f64 * h).collect();
    let mut weights = vec![h; n_grid];
    weights[0] = 0.5 * h;
    weights[n_grid - 1] = 0.5 * h;

    let mut eigenvalues = Vec::with_capacity(n_modes);
    let mut eigenvectors = Vec::with_capacity(n_modes);
    let inv_sqrt_h = 1.0 / h.sqrt();
    for i in 0..n_modes {
        let mu = t.eigenvalue(i);
        let v = t.eigenvector(mu, i + 1)?;
        let mut e = Vec::with_capacity(n_grid);
        e.push(0.0);
        e.extend(v.iter().map(|a| a * inv_sqrt_h));
        e.push(0.0);
        eigenvalues.push(mu);
        eigenvectors.push(e);
    }
    for w in eigenvalues.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Consistency(format!(
                "eigenvalues not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mut basis = SpectralBasis {
        length: op.length,
        grid,
        weights,
        eigenvalues,
        eigenvectors,
    };
    basis.orthonormalize();
    basis.normalize_signs();
    Ok(basis)
}

impl SpectralBasis {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_grid(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    /// Grid values of the `i`-th (0-based) eigenfunction.
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i]
    }

    /// Discrete `L^2` inner product of two grid functions.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Integral of a grid function.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, a)| w * a).sum()
    }

    /// Grid values of `sum_i coeffs[i] e_i`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_grid()];
        for (c, e) in coeffs.iter().zip(&self.eigenvectors) {
            if *c != 0.0 {
                u.iter_mut().zip(e).for_each(|(a, b)| *a += c * b);
            }
        }
        u
    }

    /// Mode coefficients `<u, e_i>` for every retained mode.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        self.eigenvectors
            .iter()
            .map(|e| self.inner(values, e))
            .collect()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.n_modes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                let g = self.inner(&self.eigenvectors[i], &self.eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// `(sum_i mu_i^{2 alpha} x_i^2)^{1/2}`.
    pub fn fractional_norm(&self, x: &[f64], alpha: f64) -> f64 {
        fractional_norm(x, alpha, self)
    }

    fn orthonormalize(&mut self) {
        for i in 0..self.eigenvectors.len() {
            for j in 0..i {
                let p = self.inner(&self.eigenvectors[i], &self.eigenvectors[j]);
                let (head, tail) = self.eigenvectors.split_at_mut(i);
                tail[0]
                    .iter_mut()
                    .zip(&head[j])
                    .for_each(|(a, b)| *a -= p * b);
            }
            let n = self
                .inner(&self.eigenvectors[i], &self.eigenvectors[i])
                .sqrt();
            self.eigenvectors[i].iter_mut().for_each(|a| *a /= n);
        }
    }

    /// Every eigenfunction is made to start upwards: its value at the first
    /// interior node is positive (so `e_1(l/2) > 0`).
    fn normalize_signs(&mut self) {
        for e in &mut self.eigenvectors {
            let lead = e.iter().copied().find(|a| a.abs() > 1e-14).unwrap_or(1.0);
            if lead < 0.0 {
                e.iter_mut().for_each(|a| *a = -*a);
            }
        }
    }

    /// CSV dump: `i,mu_i,e_0,...` with one row per mode (1-based `i`).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "i,mu_i")?;
        for j in 0..self.n_grid() {
            write!(out, ",e_{j}")?;
        }
        writeln!(out)?;
        for (i, (mu, e)) in self.eigenvalues.iter().zip(&self.eigenvectors).enumerate() {
            write!(out, "{},{}", i + 1, fmt_f64(*mu))?;
            for v in e {
                write!(out, ",{}", fmt_f64(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// `(sum_i mu_i^{2 alpha} x_i^2)^{1/2}` over the retained modes.
pub fn fractional_norm(x: &[f64], alpha: f64, basis: &SpectralBasis) -> f64 {
    x.iter()
        .zip(basis.eigenvalues())
        .map(|(c, mu)| mu.powf(2.0 * alpha) * c * c)
        .sum::<f64>()
        .sqrt()
}

/// 17 significant digits, locale independent.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
