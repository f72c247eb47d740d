use std::ops::ControlFlow;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{linearization, IsolatingBlock};
use crate::error::{Error, Result};
use crate::resonance::Verdict;
use crate::semiflow::{Integrator, Nonlinearity, StateE};
use crate::spectral::{ResonanceDecomposition, SpectralBasis};

#[derive(Debug, Clone, Serialize)]
pub struct ClauseCheck {
    pub family: &'static str,
    pub clause: &'static str,
    pub applies: bool,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectReport {
    pub lambda: f64,
    pub nu: f64,
    pub lambda_plus_nu: f64,
    /// Number of distinct eigenvalues below `lambda + nu`.
    pub level: usize,
    pub resonant_at_zero: bool,
    pub beyond_retained_spectrum: bool,
    /// Exponent `b_l` of the index of `{0}`.
    pub zero_index_exponent: Option<usize>,
    pub clauses: Vec<ClauseCheck>,
    pub matched: Vec<String>,
    pub conclusion: String,
}

/// Walks the clause table of the connecting-orbit criteria. `ll` and `sr`
/// are the verdicts of the Landesman-Lazer and strong-resonance checks (if
/// they were run).
pub fn connecting_orbit_criteria(
    decomp: &ResonanceDecomposition,
    f: &dyn Nonlinearity,
    ll: Option<Verdict>,
    sr: Option<Verdict>,
    tol: f64,
) -> Result<ConnectReport> {
    let nu = f.nu().ok_or_else(|| Error::MissingAsymptotics {
        name: f.name().to_string(),
        what: "the derivative nu = D_s f(x, 0)",
    })?;
    let mut levels: Vec<f64> = decomp.mu.clone();
    levels.dedup();
    let target = decomp.lambda + nu;
    let resonant_at_zero = levels.iter().any(|&m| (target - m).abs() <= tol * m);
    let level = levels.iter().filter(|&&m| m < target).count();
    let beyond = level == levels.len();
    let k = decomp.k;
    let mut report = ConnectReport {
        lambda: decomp.lambda,
        nu,
        lambda_plus_nu: target,
        level,
        resonant_at_zero,
        beyond_retained_spectrum: beyond,
        zero_index_exponent: None,
        clauses: Vec::new(),
        matched: Vec::new(),
        conclusion: String::new(),
    };
    if resonant_at_zero {
        report.conclusion = "resonant at zero: criteria inapplicable".into();
        return Ok(report);
    }
    if beyond {
        report.conclusion =
            "lambda + nu lies above the retained spectrum: criteria inapplicable at this resolution"
                .into();
        return Ok(report);
    }
    report.zero_index_exponent = Some(if level == 0 { 0 } else { decomp.d[level] });

    for (family, verdict) in [("LL", ll), ("SR", sr)] {
        let first = verdict.filter(|v| v.is_conclusive()).map(|v| v.is_first());
        let held = |want_first: bool| -> std::result::Result<(), String> {
            match first {
                Some(f) if f == want_first => Ok(()),
                Some(_) => Err(format!("{family} verdict has the opposite sign")),
                None => Err(format!("{family} not established")),
            }
        };
        // (i): first condition, lambda_l < lambda + nu < lambda_(l+1), lambda_l != lambda
        let c1 = held(true).and_then(|_| {
            if level == 0 {
                Err("lambda + nu lies below lambda_1".into())
            } else if level == k {
                Err(format!("lambda_{level} equals lambda"))
            } else {
                Ok(format!(
                    "lambda_{level} < lambda + nu < lambda_{}",
                    level + 1
                ))
            }
        });
        // (ii): first condition, lambda + nu < lambda_1
        let c2 = held(true).and_then(|_| {
            if level == 0 {
                Ok("lambda + nu < lambda_1".to_string())
            } else {
                Err("lambda + nu exceeds lambda_1".into())
            }
        });
        // (iii): second condition, lambda_(l-1) < lambda + nu < lambda_l, lambda != lambda_l, l >= 2
        let upper = level + 1;
        let c3 = held(false).and_then(|_| {
            if level == 0 {
                Err("lambda + nu lies below lambda_1".into())
            } else if upper == k {
                Err(format!("lambda equals lambda_{upper}"))
            } else {
                Ok(format!("lambda_{level} < lambda + nu < lambda_{upper}"))
            }
        });
        // (iv): second condition, lambda + nu < lambda_1, lambda != lambda_1
        let c4 = held(false).and_then(|_| {
            if level != 0 {
                Err("lambda + nu exceeds lambda_1".into())
            } else if k == 1 {
                Err("lambda equals lambda_1".into())
            } else {
                Ok("lambda + nu < lambda_1 and lambda != lambda_1".to_string())
            }
        });
        for (clause, outcome) in [("i", c1), ("ii", c2), ("iii", c3), ("iv", c4)] {
            let applies = outcome.is_ok();
            if applies {
                report.matched.push(format!("{family}({clause})"));
            }
            report.clauses.push(ClauseCheck {
                family,
                clause,
                applies,
                reason: outcome.unwrap_or_else(|e| e),
            });
        }
    }
    report.conclusion = if report.matched.is_empty() {
        "no clause applies".into()
    } else {
        "a nonzero orbit inside the maximal bounded invariant set tends to 0 at one end".into()
    };
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeOutcome {
    pub direction_sign: f64,
    pub eigenvalue: f64,
    pub final_e_norm: f64,
    pub stayed_in_block: bool,
    /// Ended away from 0 and inside the block, with a small velocity.
    pub nonzero_stayer: bool,
}

/// Launches trajectories from `+-eps v` where `v` spans the unstable
/// eigenspace of the linearization at 0 (one per real unstable eigenvalue).
#[allow(clippy::too_many_arguments)]
pub fn connect_probe(
    decomp: &ResonanceDecomposition,
    basis: &SpectralBasis,
    f: &dyn Nonlinearity,
    block: &IsolatingBlock,
    eps: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<ProbeOutcome>> {
    let n = decomp.n_modes();
    let lin = linearization(decomp, basis, f, &vec![0.0; n]);
    let mut outcomes = Vec::new();
    let n_steps = (t_end / dt).ceil().max(1.0) as usize;
    let integ = Integrator::new(decomp, basis, f, 1.0, t_end / n_steps as f64)?;
    for z in lin.complex_eigenvalues().iter() {
        if !(z.re < 0.0 && z.im.abs() < 1e-12) {
            continue;
        }
        let v = null_vector(&lin, z.re);
        let mut dir = StateE::new(v[..n].to_vec(), v[n..].to_vec());
        let scale = eps / dir.e_norm(decomp);
        dir.x
            .iter_mut()
            .chain(dir.y.iter_mut())
            .for_each(|a| *a *= scale);
        for sign in [1.0, -1.0] {
            let mut start = StateE::zeros(n);
            start.axpy(sign, &dir);
            let mut stayed = true;
            let (last, _) = integ.run(start, n_steps, 1, |_, _, st| {
                if block.contains(decomp, st) {
                    ControlFlow::Continue(())
                } else {
                    stayed = false;
                    ControlFlow::Break(())
                }
            })?;
            let e = last.e_norm(decomp);
            let speed = last.h_norms().1;
            outcomes.push(ProbeOutcome {
                direction_sign: sign,
                eigenvalue: z.re,
                final_e_norm: e,
                stayed_in_block: stayed,
                nonzero_stayer: stayed && e > 10.0 * eps && speed < 1e-3 * e.max(1.0),
            });
        }
    }
    Ok(outcomes)
}

fn null_vector(m: &DMatrix<f64>, shift: f64) -> Vec<f64> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * shift;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    vt.row(idx).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiflow::{Arctan, FnNonlinearity};
    use crate::spectral::{build_basis, decompose, EllipticOperator1D};

    fn decomp_at(k: usize) -> ResonanceDecomposition {
        let b = build_basis(&EllipticOperator1D::laplacian(1.0, 300), 6).unwrap();
        decompose(&b, b.eigenvalue(k - 1), 1.0, 1e-8).unwrap()
    }

    fn with_nu(nu: f64) -> FnNonlinearity {
        FnNonlinearity::new("probe", 1.0, nu.abs(), move |_, s| (nu * s).atan()).with_nu(nu)
    }

    #[test]
    fn arctan_at_first_eigenvalue_matches_no_clause() {
        let d = decomp_at(1);
        let rep =
            connecting_orbit_criteria(&d, &Arctan { sign: 1.0 }, Some(Verdict::LL1), None, 1e-8)
                .unwrap();
        assert_eq!(rep.level, 1);
        assert!(rep.matched.is_empty(), "{:?}", rep.matched);
        assert_eq!(rep.zero_index_exponent, Some(1));
    }

    #[test]
    fn below_first_eigenvalue_with_first_condition_is_clause_ii() {
        let d = decomp_at(2);
        let nu = -(d.lambda - d.mu[0]) - 5.0;
        let rep =
            connecting_orbit_criteria(&d, &with_nu(nu), Some(Verdict::LL1), None, 1e-8).unwrap();
        assert_eq!(rep.matched, vec!["LL(ii)".to_string()]);
        assert_eq!(rep.zero_index_exponent, Some(0));
        let rep =
            connecting_orbit_criteria(&d, &with_nu(nu), None, Some(Verdict::SR2), 1e-8).unwrap();
        assert_eq!(rep.matched, vec!["SR(iv)".to_string()]);
    }

    #[test]
    fn exact_eigenvalue_is_resonant_at_zero() {
        let d = decomp_at(1);
        let nu = d.mu[1] - d.lambda;
        let rep =
            connecting_orbit_criteria(&d, &with_nu(nu), Some(Verdict::LL1), None, 1e-8).unwrap();
        assert!(rep.resonant_at_zero);
        assert!(rep.matched.is_empty());
    }

    #[test]
    fn second_condition_between_levels() {
        let d = decomp_at(1);
        let nu = 0.5 * (d.mu[1] + d.mu[2]) - d.lambda;
        let rep =
            connecting_orbit_criteria(&d, &with_nu(nu), Some(Verdict::LL2), None, 1e-8).unwrap();
        assert_eq!(rep.matched, vec!["LL(iii)".to_string()]);
        let rep =
            connecting_orbit_criteria(&d, &with_nu(nu), Some(Verdict::LL1), None, 1e-8).unwrap();
        assert_eq!(rep.matched, vec!["LL(i)".to_string()]);
    }

    #[test]
    fn missing_nu_is_an_error() {
        let d = decomp_at(1);
        let f = FnNonlinearity::new("plain", 1.0, 1.0, |_, s| s.atan());
        assert!(connecting_orbit_criteria(&d, &f, None, None, 1e-8).is_err());
    }
}
