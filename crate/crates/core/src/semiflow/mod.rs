//! Nemitskii operator, homotopy field, exponential integrator, kernel chart
//! and divergence probe.

mod chart;
mod integrator;
mod nonlinearity;
mod probe;

pub use chart::{kernel_coordinates, state_from_kernel_coords, KernelCoords};
pub use integrator::{integrate, step, Integrator, SampleRecord, Trajectory, TRAJECTORY_HEADER};
pub use nonlinearity::{
    audit, Arctan, AuditReport, ConstantForcing, FnNonlinearity, Nonlinearity, NonlinearityContext,
    NonlinearityRegistry, RationalDecay, Zero,
};
pub use probe::{divergence_probe, ProbeReport};

use serde::{Deserialize, Serialize};

use crate::spectral::{ModeClass, ResonanceDecomposition, SpectralBasis};

/// A point `(x, y)` of `E = X^alpha x X` in mode coordinates: `x` holds the
/// coefficients of the position `u`, `y` those of the velocity `u_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateE {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl StateE {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "position and velocity lengths differ");
        StateE { x, y }
    }

    pub fn zeros(n: usize) -> Self {
        StateE {
            x: vec![0.0; n],
            y: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn e_norm(&self, decomp: &ResonanceDecomposition) -> f64 {
        decomp.e_norm(&self.x, &self.y)
    }

    /// `||Q w||_E`, the E-norm of the non-kernel part.
    pub fn q_norm(&self, decomp: &ResonanceDecomposition) -> f64 {
        decomp.q_norm(&self.x, &self.y)
    }

    /// `L^2` norms of position and velocity.
    pub fn h_norms(&self) -> (f64, f64) {
        (l2(&self.x), l2(&self.y))
    }

    pub fn axpy(&mut self, a: f64, other: &StateE) {
        self.x
            .iter_mut()
            .zip(&other.x)
            .for_each(|(p, q)| *p += a * q);
        self.y
            .iter_mut()
            .zip(&other.y)
            .for_each(|(p, q)| *p += a * q);
    }

    pub fn sub(&self, other: &StateE) -> StateE {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d
    }

    /// Splits into the kernel part and the complement (`P w`, `Q w`).
    pub fn split(&self, decomp: &ResonanceDecomposition) -> (StateE, StateE) {
        let mut p = StateE::zeros(self.len());
        let mut q = StateE::zeros(self.len());
        for i in 0..self.len() {
            let target = if decomp.classes[i] == ModeClass::Kernel {
                &mut p
            } else {
                &mut q
            };
            target.x[i] = self.x[i];
            target.y[i] = self.y[i];
        }
        (p, q)
    }
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `F_i(x) = <f(., u(.)), e_i>` with `u = sum_i x_i e_i`.
pub fn nemitskii(basis: &SpectralBasis, f: &dyn Nonlinearity, x: &[f64]) -> Vec<f64> {
    let u = basis.synthesize(x);
    let values: Vec<f64> = basis
        .grid()
        .iter()
        .zip(&u)
        .map(|(&g, &s)| f.eval(g, s))
        .collect();
    basis.project(&values)
}

/// `G(s, x) = P F(s Q x + P x) + s Q F(s Q x + P x)`.
pub fn homotopy_field(
    decomp: &ResonanceDecomposition,
    basis: &SpectralBasis,
    f: &dyn Nonlinearity,
    s: f64,
    x: &[f64],
) -> Vec<f64> {
    let kernel = |i: usize| decomp.classes[i] == ModeClass::Kernel;
    let arg: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| if kernel(i) { v } else { s * v })
        .collect();
    let mut g = nemitskii(basis, f, &arg);
    for (i, v) in g.iter_mut().enumerate() {
        if !kernel(i) {
            *v *= s;
        }
    }
    g
}
