use serde::Serialize;

use super::decomposition::{ModeClass, ResonanceDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{joint_block_bound, Mat2};

const DELTA_MARGIN: f64 = 0.05;
const M_INFLATION: f64 = 1.05;
const HORIZON: f64 = 50.0;
const POINTS_PER_DECADE: f64 = 32.0;

/// Constants of the exponential dichotomy `||S(t) z|| <= M e^{-delta t} ||z||`
/// on `E_+` (forward) and on `E_-` (backward).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub m: f64,
    pub delta: f64,
}

/// `t = 0` followed by a geometric grid from `1e-3 / fastest` to `50 / delta`.
pub fn decay_time_grid(delta: f64, fastest: f64) -> Vec<f64> {
    let t_min = 1e-3 / fastest.max(delta);
    let t_max = HORIZON / delta;
    let decades = (t_max / t_min).log10().max(0.0);
    let n = ((decades * POINTS_PER_DECADE).ceil() as usize).max(2);
    let mut grid = Vec::with_capacity(n + 1);
    grid.push(0.0);
    for j in 0..n {
        let r = j as f64 / (n - 1) as f64;
        grid.push(t_min * (t_max / t_min).powf(r));
    }
    grid
}

/// Action of the forward semigroup on the `E_+` part of block `i`.
pub fn forward_plus_action(decomp: &ResonanceDecomposition, i: usize, t: f64) -> Mat2 {
    match decomp.classes[i] {
        ModeClass::Plus => decomp.blocks[i].scale(-t).exp(),
        ModeClass::Minus => {
            let (_, hi) = decomp.minus_block_eigenvalues(i);
            Mat2::IDENTITY.scale((-hi * t).exp())
        }
        ModeClass::Kernel => Mat2::ZERO,
    }
}

/// Action of the backward semigroup `S(-t)` on the `E_-` part of block `i`.
pub fn backward_minus_action(decomp: &ResonanceDecomposition, i: usize, t: f64) -> Mat2 {
    match decomp.classes[i] {
        ModeClass::Minus => {
            let (lo, _) = decomp.minus_block_eigenvalues(i);
            Mat2::IDENTITY.scale((lo * t).exp())
        }
        _ => Mat2::ZERO,
    }
}

/// Real parts of the eigenvalues that govern the hyperbolic part, as
/// positive rates.
fn hyperbolic_rates(decomp: &ResonanceDecomposition) -> Vec<f64> {
    let mut rates = Vec::new();
    for i in 0..decomp.n_modes() {
        match decomp.classes[i] {
            ModeClass::Plus => {
                for z in decomp.blocks[i].eigenvalues() {
                    rates.push(z.re);
                }
            }
            ModeClass::Minus => {
                let (lo, hi) = decomp.minus_block_eigenvalues(i);
                rates.push(-lo);
                rates.push(hi);
            }
            ModeClass::Kernel => {}
        }
    }
    rates
}

pub fn decay_constants(decomp: &ResonanceDecomposition) -> Result<DecayConstants> {
    let rates = hyperbolic_rates(decomp);
    if rates.is_empty() {
        return Err(Error::InvalidArgument(
            "no hyperbolic modes retained".into(),
        ));
    }
    let scale = decomp.mu.iter().fold(1.0f64, |a, &m| a.max(decomp.c * m));
    let gap = rates.iter().copied().fold(f64::INFINITY, f64::min);
    if !(gap > 1e-12 * scale) {
        return Err(Error::Consistency(format!(
            "hyperbolic spectrum touches the imaginary axis (min rate {gap:e}); a kernel mode leaked"
        )));
    }
    let fastest = rates.iter().copied().fold(0.0, f64::max);
    let delta = (1.0 - DELTA_MARGIN) * gap;
    let n = decomp.n_modes();
    let mut sup = 1.0f64;
    for t in decay_time_grid(delta, fastest) {
        let plus = joint_block_bound(
            (0..n).map(|i| (forward_plus_action(decomp, i, t), decomp.weight(i))),
        );
        let minus = joint_block_bound(
            (0..n).map(|i| (backward_minus_action(decomp, i, t), decomp.weight(i))),
        );
        sup = sup.max((delta * t).exp() * plus.max(minus));
    }
    if !sup.is_finite() {
        return Err(Error::Consistency("decay bound is not finite".into()));
    }
    Ok(DecayConstants {
        m: M_INFLATION * sup,
        delta,
    })
}
