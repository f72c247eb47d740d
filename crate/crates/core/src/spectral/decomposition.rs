use serde::Serialize;

use super::SpectralBasis;
use crate::error::{Error, Result};
use crate::linalg::{joint_block_bound, Mat2};

/// Relative tolerance used to snap `lambda` onto the discrete eigenvalue.
pub const DEFAULT_SNAP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeClass {
    Minus,
    Kernel,
    Plus,
}

/// Splitting of the retained modes around the resonant eigenvalue together
/// with the per-mode blocks `B_i = [[0, -1], [mu_i - lambda, c mu_i]]` of the
/// phase-space operator (the flow is `w' = -B w + (0, F)` mode by mode).
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceDecomposition {
    pub lambda: f64,
    /// 1-based index of the resonant eigenvalue; for an off-resonance
    /// splitting it counts the eigenvalues below `lambda`.
    pub k: usize,
    pub c: f64,
    pub alpha: f64,
    pub mu: Vec<f64>,
    pub classes: Vec<ModeClass>,
    pub kernel_modes: Vec<usize>,
    pub minus_modes: Vec<usize>,
    pub plus_modes: Vec<usize>,
    /// `d[l] = sum_{i <= l} dim ker(mu_i I - A)`, with `d[0] = 0`.
    pub d: Vec<usize>,
    pub blocks: Vec<Mat2>,
}

/// Resonant splitting at the eigenvalue within `tol` (relative) of `lambda`.
pub fn decompose(
    basis: &SpectralBasis,
    lambda: f64,
    c: f64,
    tol: f64,
) -> Result<ResonanceDecomposition> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "damping c must be positive, got {c}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "snap tolerance must be positive, got {tol}"
        )));
    }
    let mu = basis.eigenvalues();
    let hits: Vec<usize> = (0..mu.len())
        .filter(|&i| (lambda - mu[i]).abs() <= tol * mu[i])
        .collect();
    match hits.as_slice() {
        [] => {
            let nearest = (0..mu.len())
                .min_by(|&a, &b| (lambda - mu[a]).abs().total_cmp(&(lambda - mu[b]).abs()))
                .unwrap_or(0);
            Err(Error::NonResonant {
                lambda,
                nearest_index: nearest + 1,
                nearest: mu[nearest],
            })
        }
        [i] => {
            let snapped = mu[*i];
            let d = ResonanceDecomposition::build(mu, snapped, c, Some(*i));
            d.check_invariants()?;
            Ok(d)
        }
        [a, b, ..] => Err(Error::AmbiguousResonance {
            lambda,
            first: a + 1,
            second: b + 1,
        }),
    }
}

/// `A_0 = [[0, -1], [0, c lambda]]`, the phase-space operator on `E_0`.
pub fn center_block(decomp: &ResonanceDecomposition) -> Mat2 {
    Mat2::new(0.0, -1.0, 0.0, decomp.c * decomp.lambda)
}

impl ResonanceDecomposition {
    fn build(mu: &[f64], lambda: f64, c: f64, kernel: Option<usize>) -> Self {
        let classes: Vec<ModeClass> = (0..mu.len())
            .map(|i| {
                if Some(i) == kernel {
                    ModeClass::Kernel
                } else if mu[i] < lambda {
                    ModeClass::Minus
                } else {
                    ModeClass::Plus
                }
            })
            .collect();
        let pick = |cls: ModeClass| -> Vec<usize> {
            (0..mu.len()).filter(|&i| classes[i] == cls).collect()
        };
        // cumulative multiplicities over distinct eigenvalue levels
        let mut d = vec![0usize];
        let mut i = 0;
        while i < mu.len() {
            let mut j = i + 1;
            while j < mu.len() && mu[j] == mu[i] {
                j += 1;
            }
            d.push(d.last().copied().unwrap_or(0) + (j - i));
            i = j;
        }
        let k = match kernel {
            Some(i) => i + 1,
            None => mu.iter().filter(|&&m| m < lambda).count(),
        };
        let blocks = mu
            .iter()
            .map(|&m| Mat2::new(0.0, -1.0, m - lambda, c * m))
            .collect();
        ResonanceDecomposition {
            lambda,
            k,
            c,
            alpha: 0.5,
            mu: mu.to_vec(),
            kernel_modes: pick(ModeClass::Kernel),
            minus_modes: pick(ModeClass::Minus),
            plus_modes: pick(ModeClass::Plus),
            classes,
            d,
            blocks,
        }
    }

    /// Splitting for a `lambda` that is not an eigenvalue (empty kernel).
    /// Only meaningful for linear reference runs, not for index computations.
    pub fn off_resonance(basis: &SpectralBasis, lambda: f64, c: f64) -> Result<Self> {
        if basis.eigenvalues().contains(&lambda) {
            return Err(Error::InvalidArgument(
                "lambda coincides with an eigenvalue; use `decompose`".into(),
            ));
        }
        Ok(Self::build(basis.eigenvalues(), lambda, c, None))
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn n_modes(&self) -> usize {
        self.mu.len()
    }

    pub fn is_resonant(&self) -> bool {
        !self.kernel_modes.is_empty()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_modes.len()
    }

    /// Modes outside the kernel (`X_- + X_+`).
    pub fn complement_modes(&self) -> Vec<usize> {
        (0..self.n_modes())
            .filter(|&i| self.classes[i] != ModeClass::Kernel)
            .collect()
    }

    pub fn d_k(&self) -> usize {
        self.d[self.k.min(self.d.len() - 1)]
    }

    pub fn d_k_minus_1(&self) -> usize {
        self.d[self.k.saturating_sub(1).min(self.d.len() - 1)]
    }

    /// Number of mode-block eigenvalues with negative real part, i.e. `dim E_-`.
    pub fn dim_e_minus(&self) -> usize {
        self.blocks
            .iter()
            .zip(&self.classes)
            .filter(|(_, c)| **c != ModeClass::Kernel)
            .map(|(b, _)| b.eigenvalues().iter().filter(|z| z.re < 0.0).count())
            .sum()
    }

    /// `a = ((c lambda)^2 + 1)^{-1/2}`.
    pub fn chart_scale(&self) -> f64 {
        let cl = self.c * self.lambda;
        1.0 / (cl * cl + 1.0).sqrt()
    }

    /// `mu_i^alpha`, the weight of mode `i` in `||.||_alpha`.
    pub fn weight(&self, i: usize) -> f64 {
        self.mu[i].powf(self.alpha)
    }

    pub fn fractional_norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, c)| (self.weight(i) * c).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `||(x, y)||_E = ||x||_alpha + ||y||`.
    pub fn e_norm(&self, x: &[f64], y: &[f64]) -> f64 {
        self.fractional_norm(x) + y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||Q(x, y)||_E`: the E-norm with the kernel modes masked out.
    pub fn q_norm(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut xs = 0.0;
        let mut ys = 0.0;
        for i in 0..self.n_modes() {
            if self.classes[i] != ModeClass::Kernel {
                xs += (self.weight(i) * x[i]).powi(2);
                ys += y[i] * y[i];
            }
        }
        xs.sqrt() + ys.sqrt()
    }

    /// Eigenvalues `(xi_-, xi_+)` of a minus-mode block (real, opposite signs).
    pub fn minus_block_eigenvalues(&self, i: usize) -> (f64, f64) {
        let e = self.blocks[i].eigenvalues();
        (e[0].re, e[1].re)
    }

    /// Spectral projector of block `i` onto its `E_+` part.
    pub fn projector_plus(&self, i: usize) -> Mat2 {
        match self.classes[i] {
            ModeClass::Plus => Mat2::IDENTITY,
            ModeClass::Kernel => Mat2::ZERO,
            ModeClass::Minus => {
                let (lo, hi) = self.minus_block_eigenvalues(i);
                self.blocks[i]
                    .sub(&Mat2::IDENTITY.scale(lo))
                    .scale(1.0 / (hi - lo))
            }
        }
    }

    /// Spectral projector of block `i` onto its `E_-` part.
    pub fn projector_minus(&self, i: usize) -> Mat2 {
        match self.classes[i] {
            ModeClass::Minus => Mat2::IDENTITY.sub(&self.projector_plus(i)),
            _ => Mat2::ZERO,
        }
    }

    /// Projector of block `i` onto `E_0` (the identity on kernel modes).
    pub fn projector_center(&self, i: usize) -> Mat2 {
        match self.classes[i] {
            ModeClass::Kernel => Mat2::IDENTITY,
            _ => Mat2::ZERO,
        }
    }

    /// Checks the sign dichotomy of the mode blocks and `dim E_- = d_{k-1}`.
    pub fn check_invariants(&self) -> Result<()> {
        for i in 0..self.n_modes() {
            let ev = self.blocks[i].eigenvalues();
            match self.classes[i] {
                ModeClass::Plus => {
                    if !(ev[0].re > 0.0 && ev[1].re > 0.0) {
                        return Err(Error::Consistency(format!(
                            "plus mode {} has eigenvalue with Re <= 0: {ev:?}",
                            i + 1
                        )));
                    }
                }
                ModeClass::Minus => {
                    if !(ev[0].im == 0.0 && ev[0].re < 0.0 && ev[1].re > 0.0) {
                        return Err(Error::Consistency(format!(
                            "minus mode {} does not have exactly one negative eigenvalue: {ev:?}",
                            i + 1
                        )));
                    }
                }
                ModeClass::Kernel => {
                    if self.blocks[i].det() != 0.0 {
                        return Err(Error::Consistency(format!(
                            "kernel mode {} block is not singular",
                            i + 1
                        )));
                    }
                }
            }
        }
        if self.is_resonant() && self.dim_e_minus() != self.d_k_minus_1() {
            return Err(Error::Consistency(format!(
                "dim E_- = {} but d_(k-1) = {}",
                self.dim_e_minus(),
                self.d_k_minus_1()
            )));
        }
        Ok(())
    }
}

/// Operator norm of a block projector in the weighted block norm `|x| w + |y|`.
pub fn block_projector_norm(projector: &Mat2, weight: f64) -> f64 {
    projector.weighted_l1_norm(weight)
}

/// Norms of the projections onto the components of the splitting, on `X`
/// (orthogonal, so 1 for a nonzero range) and on `E` with `||x||_alpha + ||y||`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProjectionNorms {
    pub p_x: f64,
    pub q_plus_x: f64,
    pub q_minus_x: f64,
    pub p_e: f64,
    pub q_plus_e: f64,
    pub q_minus_e: f64,
}

pub fn projection_norms(decomp: &ResonanceDecomposition) -> ProjectionNorms {
    let unit = |nonempty: bool| if nonempty { 1.0 } else { 0.0 };
    let n = decomp.n_modes();
    let q_plus_e = joint_block_bound((0..n).map(|i| (decomp.projector_plus(i), decomp.weight(i))));
    let q_minus_e =
        joint_block_bound((0..n).map(|i| (decomp.projector_minus(i), decomp.weight(i))));
    ProjectionNorms {
        p_x: unit(!decomp.kernel_modes.is_empty()),
        q_plus_x: unit(!decomp.plus_modes.is_empty()),
        q_minus_x: unit(!decomp.minus_modes.is_empty()),
        p_e: unit(!decomp.kernel_modes.is_empty()),
        q_plus_e,
        q_minus_e,
    }
}
