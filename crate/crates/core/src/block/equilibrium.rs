use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::IsolatingBlock;
use crate::error::{Error, Result};
use crate::semiflow::{nemitskii, Nonlinearity, StateE};
use crate::spectral::{ResonanceDecomposition, SpectralBasis};

const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub e_norm: f64,
    pub in_block: Option<bool>,
    /// Eigenvalues `(re, im)` of the linearized phase-space operator
    /// `A - DF`; the flow is `w' = -(A - DF) w`.
    pub spectrum: Vec<(f64, f64)>,
    /// Number of eigenvalues with negative real part.
    pub unstable_dim: usize,
}

impl Equilibrium {
    pub fn state(&self) -> StateE {
        StateE::new(self.x.clone(), vec![0.0; self.x.len()])
    }
}

fn residual(
    d: &ResonanceDecomposition,
    b: &SpectralBasis,
    f: &dyn Nonlinearity,
    x: &[f64],
) -> Vec<f64> {
    let fx = nemitskii(b, f, x);
    (0..x.len())
        .map(|i| (d.mu[i] - d.lambda) * x[i] - fx[i])
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Central-difference Jacobian of the Nemitskii map.
fn nemitskii_jacobian(b: &SpectralBasis, f: &dyn Nonlinearity, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (nemitskii(b, f, &xp), nemitskii(b, f, &xm));
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// `[[0, -I], [diag(mu - lambda) - DF(x), diag(c mu)]]` at the position `x`.
pub fn linearization(
    d: &ResonanceDecomposition,
    b: &SpectralBasis,
    f: &dyn Nonlinearity,
    x: &[f64],
) -> DMatrix<f64> {
    let n = x.len();
    let df = nemitskii_jacobian(b, f, x);
    let mut l = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        l[(i, n + i)] = -1.0;
        l[(n + i, n + i)] = d.c * d.mu[i];
        for j in 0..n {
            let diag = if i == j { d.mu[i] - d.lambda } else { 0.0 };
            l[(n + i, j)] = diag - df[(i, j)];
        }
    }
    l
}

/// Damped Newton on `(mu_i - lambda) x_i - F_i(x) = 0`.
pub fn equilibrium_solve(
    d: &ResonanceDecomposition,
    b: &SpectralBasis,
    f: &dyn Nonlinearity,
    x0: &[f64],
    tol: f64,
    block: Option<&IsolatingBlock>,
) -> Result<Equilibrium> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    if x0.len() != d.n_modes() {
        return Err(Error::InvalidArgument(
            "initial guess has the wrong length".into(),
        ));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residual(d, b, f, &x);
    let mut rn = norm(&r);
    let mut iterations = 0;
    while rn > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NewtonFailed {
                iterations,
                residual: rn,
            });
        }
        iterations += 1;
        let mut jac = -nemitskii_jacobian(b, f, &x);
        for i in 0..n {
            jac[(i, i)] += d.mu[i] - d.lambda;
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs).ok_or(Error::NewtonFailed {
            iterations,
            residual: rn,
        })?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let rt = residual(d, b, f, &trial);
            let tn = norm(&rt);
            if tn < (1.0 - 1e-4 * t) * rn || t < 1e-10 {
                x = trial;
                r = rt;
                rn = tn;
                break;
            }
            t *= 0.5;
        }
    }
    let lin = linearization(d, b, f, &x);
    let mut spectrum: Vec<(f64, f64)> = lin
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    spectrum.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let unstable_dim = spectrum.iter().filter(|z| z.0 < 0.0).count();
    let state = StateE::new(x.clone(), vec![0.0; n]);
    Ok(Equilibrium {
        e_norm: state.e_norm(d),
        in_block: block.map(|blk| blk.contains(d, &state) && !on_boundary(blk, d, &state)),
        x,
        residual: rn,
        iterations,
        spectrum,
        unstable_dim,
    })
}

fn on_boundary(blk: &IsolatingBlock, d: &ResonanceDecomposition, z: &StateE) -> bool {
    !matches!(
        super::classify_boundary(blk, d, z),
        super::BoundaryClass::Interior
    ) || z.q_norm(d) >= blk.n1_radius()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiflow::{Arctan, Zero};
    use crate::spectral::{build_basis, decompose, EllipticOperator1D};

    #[test]
    fn zero_field_has_origin() {
        let b = build_basis(&EllipticOperator1D::laplacian(1.0, 100), 4).unwrap();
        let d = decompose(&b, b.eigenvalue(0), 1.0, 1e-8).unwrap();
        let eq = equilibrium_solve(&d, &b, &Zero, &[0.0; 4], 1e-10, None).unwrap();
        assert_eq!(eq.residual, 0.0);
        assert!(eq.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn arctan_origin_has_one_unstable_direction() {
        let b = build_basis(&EllipticOperator1D::laplacian(1.0, 200), 5).unwrap();
        let d = decompose(&b, b.eigenvalue(0), 1.0, 1e-8).unwrap();
        let eq = equilibrium_solve(
            &d,
            &b,
            &Arctan { sign: 1.0 },
            &[0.8, 0.2, 0.0, 0.0, 0.0],
            1e-10,
            None,
        )
        .unwrap();
        assert!(eq.residual < 1e-10);
        assert!(eq.x.iter().all(|v| v.abs() < 1e-8));
        assert_eq!(eq.unstable_dim, 1);
    }
}
