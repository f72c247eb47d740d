use serde::Serialize;

use super::{l2, StateE};
use crate::spectral::ResonanceDecomposition;

/// Coordinates on `E_0`: `w1 = a (c lambda x0 + y0)`, `w2 = y0`, one entry
/// per kernel mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCoords {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

impl KernelCoords {
    pub fn w1_norm(&self) -> f64 {
        l2(&self.w1)
    }

    pub fn w2_norm(&self) -> f64 {
        l2(&self.w2)
    }
}

pub fn kernel_coordinates(decomp: &ResonanceDecomposition, state: &StateE) -> KernelCoords {
    let a = decomp.chart_scale();
    let cl = decomp.c * decomp.lambda;
    let w1 = decomp
        .kernel_modes
        .iter()
        .map(|&i| a * (cl * state.x[i] + state.y[i]))
        .collect();
    let w2 = decomp.kernel_modes.iter().map(|&i| state.y[i]).collect();
    KernelCoords { w1, w2 }
}

/// Inverse chart: the point of `E_0` with the given coordinates.
pub fn state_from_kernel_coords(decomp: &ResonanceDecomposition, coords: &KernelCoords) -> StateE {
    let a = decomp.chart_scale();
    let cl = decomp.c * decomp.lambda;
    let mut s = StateE::zeros(decomp.n_modes());
    for (j, &i) in decomp.kernel_modes.iter().enumerate() {
        let y = coords.w2[j];
        s.y[i] = y;
        s.x[i] = (coords.w1[j] / a - y) / cl;
    }
    s
}
