use std::ops::ControlFlow;

use serde::Serialize;

use super::{l2, ConstantForcing, Integrator, StateE};
use crate::error::{Error, Result};
use crate::spectral::{ModeClass, ResonanceDecomposition, SpectralBasis};

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub slope: f64,
    pub intercept: f64,
    /// `||y0||_H^2`, the growth rate predicted for the functional.
    pub expected_slope: f64,
    pub relative_error: f64,
    pub samples_fitted: usize,
    pub final_phi: f64,
    /// Linear growth was observed, so no orbit of this field stays bounded.
    pub unbounded: bool,
}

fn least_squares(ts: &[f64], vs: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let vm = vs.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, v) in ts.iter().zip(vs) {
        num += (t - tm) * (v - vm);
        den += (t - tm) * (t - tm);
    }
    let slope = num / den;
    (slope, vm - slope * tm)
}

/// Integrates with the constant field `F = y0` (mode coefficients, supported
/// on the kernel) and fits the growth of
/// `Phi(t) = <u0(t), c lambda y0> + <v0(t), y0>` over the second half of
/// `[0, T]`.
pub fn divergence_probe(
    decomp: &ResonanceDecomposition,
    basis: &SpectralBasis,
    y0: &[f64],
    state0: &StateE,
    t_end: f64,
    dt: f64,
) -> Result<ProbeReport> {
    if y0.len() != decomp.n_modes() || state0.len() != decomp.n_modes() {
        return Err(Error::InvalidArgument(
            "y0 and state0 must have one entry per mode".into(),
        ));
    }
    let norm = l2(y0);
    if norm == 0.0 {
        return Err(Error::InvalidArgument("y0 must be nonzero".into()));
    }
    let off_kernel = (0..y0.len())
        .filter(|&i| decomp.classes[i] != ModeClass::Kernel)
        .map(|i| y0[i] * y0[i])
        .sum::<f64>()
        .sqrt();
    if off_kernel > 1e-12 * norm {
        return Err(Error::InvalidArgument(format!(
            "y0 is not in the kernel span (off-kernel norm {off_kernel:e})"
        )));
    }
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(Error::InvalidArgument("T and dt must be positive".into()));
    }
    let forcing = ConstantForcing::from_coefficients(basis, y0);
    let n_steps = (t_end / dt - 1e-9).ceil().max(2.0) as usize;
    let integ = Integrator::new(decomp, basis, &forcing, 1.0, t_end / n_steps as f64)?;
    let cl = decomp.c * decomp.lambda;
    let phi = |z: &StateE| -> f64 {
        decomp
            .kernel_modes
            .iter()
            .map(|&i| (cl * z.x[i] + z.y[i]) * y0[i])
            .sum()
    };
    let every = (n_steps / 400).max(1);
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    integ.run(state0.clone(), n_steps, every, |_, t, z| {
        if t >= 0.5 * t_end {
            ts.push(t);
            vs.push(phi(z));
        }
        ControlFlow::Continue(())
    })?;
    if ts.len() < 2 {
        return Err(Error::InvalidArgument(
            "time window too short for a slope fit".into(),
        ));
    }
    let (slope, intercept) = least_squares(&ts, &vs);
    let expected = norm * norm;
    let relative_error = (slope - expected).abs() / expected;
    Ok(ProbeReport {
        slope,
        intercept,
        expected_slope: expected,
        relative_error,
        samples_fitted: ts.len(),
        final_phi: *vs.last().unwrap_or(&0.0),
        unbounded: slope > 0.0 && relative_error < 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_basis, decompose, EllipticOperator1D};

    #[test]
    fn unit_forcing_gives_unit_slope() {
        let b = build_basis(&EllipticOperator1D::laplacian(1.0, 128), 5).unwrap();
        let d = decompose(&b, b.eigenvalue(0), 1.0, 1e-8).unwrap();
        let mut y0 = vec![0.0; 5];
        y0[0] = 1.0;
        let mut z = StateE::zeros(5);
        z.x[2] = 0.3;
        let rep = divergence_probe(&d, &b, &y0, &z, 10.0, 0.01).unwrap();
        assert!(rep.relative_error < 1e-4, "{rep:?}");
        assert!(rep.unbounded);
        y0[0] = 2.0;
        let rep = divergence_probe(&d, &b, &y0, &z, 10.0, 0.01).unwrap();
        assert!((rep.slope - 4.0).abs() < 4e-4);
    }

    #[test]
    fn rejects_zero_and_off_kernel_forcing() {
        let b = build_basis(&EllipticOperator1D::laplacian(1.0, 64), 3).unwrap();
        let d = decompose(&b, b.eigenvalue(0), 1.0, 1e-8).unwrap();
        let z = StateE::zeros(3);
        assert!(divergence_probe(&d, &b, &[0.0; 3], &z, 1.0, 0.1).is_err());
        assert!(divergence_probe(&d, &b, &[1.0, 0.5, 0.0], &z, 1.0, 0.1).is_err());
    }
}
