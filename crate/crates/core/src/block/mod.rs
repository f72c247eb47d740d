//! Isolating block, boundary verification, index report, orbit census,
//! equilibria and connecting-orbit criteria.

mod census;
mod connect;
mod equilibrium;
mod verify;

pub use census::{detect_bounded_orbits, Census, CensusEntry, CensusOptions, CENSUS_HEADER};
pub use connect::{
    connect_probe, connecting_orbit_criteria, ClauseCheck, ConnectReport, ProbeOutcome,
};
pub use equilibrium::{equilibrium_solve, linearization, Equilibrium};
pub use verify::{verify_block, StratumReport, VerificationReport, VerifyOptions};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::resonance::{check_g, ConditionReport, Verdict};
use crate::semiflow::{kernel_coordinates, Nonlinearity, StateE};
use crate::spectral::{projection_norms, DecayConstants, ResonanceDecomposition, SpectralBasis};

/// Relative tolerance for deciding that a point lies on a face of the box.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Factor in `R2 = 1.1 m1 / (c lambda)`.
pub const R2_FACTOR: f64 = 1.1;

/// Which sign the kernel field has at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockType {
    G1,
    G2,
}

impl BlockType {
    pub fn from_verdict(v: Verdict) -> Result<Self> {
        match v {
            Verdict::G1 | Verdict::LL1 | Verdict::SR1 => Ok(BlockType::G1),
            Verdict::G2 | Verdict::LL2 | Verdict::SR2 => Ok(BlockType::G2),
            Verdict::Inconclusive => Err(Error::Inconclusive(
                "no condition certified; the block type is undetermined".into(),
            )),
        }
    }

    pub fn verdict(self) -> Verdict {
        match self {
            BlockType::G1 => Verdict::G1,
            BlockType::G2 => Verdict::G2,
        }
    }
}

/// `N = N1 + N2` with `N1` the ball of radius `R1 + ball_offset` in
/// `E_- + E_+` and `N2` the box `|w1| <= R4, |w2| <= R2` in the kernel chart.
#[derive(Debug, Clone, Serialize)]
pub struct IsolatingBlock {
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "R3")]
    pub r3: f64,
    #[serde(rename = "R4")]
    pub r4: f64,
    pub a: f64,
    pub m: f64,
    pub m0: f64,
    pub m1: f64,
    pub rho: f64,
    pub which: BlockType,
    pub ball_offset: f64,
    pub c_lambda: f64,
    #[serde(rename = "M")]
    pub decay_m: f64,
    pub delta: f64,
    pub q_plus_norm: f64,
    pub q_minus_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiiCheck {
    pub r2_inequality: bool,
    pub r4_identity: bool,
    pub r1_bound: bool,
}

impl RadiiCheck {
    pub fn all(&self) -> bool {
        self.r2_inequality && self.r4_identity && self.r1_bound
    }
}

impl IsolatingBlock {
    /// Builds a block from `R3`, `rho` and the type, filling every derived
    /// constant from the decomposition and the bound `m` of `f`.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        decomp: &ResonanceDecomposition,
        decay: &DecayConstants,
        m: f64,
        length: f64,
        r3: f64,
        rho: f64,
        which: BlockType,
        ball_offset: f64,
    ) -> Self {
        let norms = projection_norms(decomp);
        let c_lambda = decomp.c * decomp.lambda;
        let a = decomp.chart_scale();
        let m1 = m * length.sqrt();
        let m0 = 2.0 * m * length.sqrt();
        let r1 = m0 * decay.m * (norms.q_plus_e + norms.q_minus_e) / decay.delta;
        let r2 = R2_FACTOR * m1 / c_lambda;
        let r4 = a * c_lambda * r3 + a * r2;
        IsolatingBlock {
            r1,
            r2,
            r3,
            r4,
            a,
            m,
            m0,
            m1,
            rho,
            which,
            ball_offset,
            c_lambda,
            decay_m: decay.m,
            delta: decay.delta,
            q_plus_norm: norms.q_plus_e,
            q_minus_norm: norms.q_minus_e,
        }
    }

    /// Radius of `N1`.
    pub fn n1_radius(&self) -> f64 {
        self.r1 + self.ball_offset
    }

    pub fn check_radii(&self) -> RadiiCheck {
        RadiiCheck {
            r2_inequality: -self.c_lambda * self.r2 * self.r2 + self.m1 * self.r2 < 0.0,
            r4_identity: self.r4 == self.a * self.c_lambda * self.r3 + self.a * self.r2,
            r1_bound: self.r1
                >= self.m0 * self.decay_m * (self.q_plus_norm + self.q_minus_norm) / self.delta,
        }
    }

    /// Whether `state` lies in `N` (faces included up to the boundary tolerance).
    pub fn contains(&self, decomp: &ResonanceDecomposition, state: &StateE) -> bool {
        let w = kernel_coordinates(decomp, state);
        let slack = 1.0 + BOUNDARY_TOL;
        state.q_norm(decomp) <= self.n1_radius() * slack
            && w.w1_norm() <= self.r4 * slack
            && w.w2_norm() <= self.r2 * slack
    }
}

/// Derives `R1 .. R4` and re-certifies the geometric condition on the balls
/// `B1 = R1 + ball_offset` (alpha-norm) and `B2 = R2 / (c lambda)`.
#[allow(clippy::too_many_arguments)]
pub fn derive_radii(
    decomp: &ResonanceDecomposition,
    decay: &DecayConstants,
    f: &dyn Nonlinearity,
    g_report: &ConditionReport,
    basis: &SpectralBasis,
    r_grid: &[f64],
    n_samples: usize,
    seed: u64,
    ball_offset: f64,
) -> Result<(IsolatingBlock, ConditionReport)> {
    let which = BlockType::from_verdict(g_report.verdict)?;
    if !(ball_offset >= 0.0) {
        return Err(Error::InvalidArgument(
            "ball offset must be nonnegative".into(),
        ));
    }
    let provisional = IsolatingBlock::assemble(
        decomp,
        decay,
        f.bound(),
        basis.length(),
        0.0,
        0.0,
        which,
        ball_offset,
    );
    if !(provisional.r2 > 0.0) {
        return Err(Error::NotCertified(
            "f vanishes identically; no block radii".into(),
        ));
    }
    let rerun = check_g(
        basis,
        decomp,
        f,
        provisional.n1_radius(),
        provisional.r2 / provisional.c_lambda,
        r_grid,
        n_samples,
        seed,
    )?;
    let certified = matches!(
        (rerun.verdict, which),
        (Verdict::G1, BlockType::G1) | (Verdict::G2, BlockType::G2)
    );
    if !certified {
        return Err(Error::NotCertified(format!(
            "R3 not certified on the R grid (re-run verdict {}, expected {:?})",
            rerun.verdict.as_str(),
            which
        )));
    }
    let r3 = rerun.r3.expect("certified report carries R3");
    let block = IsolatingBlock::assemble(
        decomp,
        decay,
        f.bound(),
        basis.length(),
        r3,
        rerun.rho,
        which,
        ball_offset,
    );
    Ok((block, rerun))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryClass {
    Egress,
    Ingress,
    Bounce,
    Interior,
    Exterior,
}

/// Stratum of the kernel box containing the kernel part of `state`.
pub fn classify_boundary(
    block: &IsolatingBlock,
    decomp: &ResonanceDecomposition,
    state: &StateE,
) -> BoundaryClass {
    let w = kernel_coordinates(decomp, state);
    classify_norms(block, w.w1_norm(), w.w2_norm())
}

pub(crate) fn classify_norms(block: &IsolatingBlock, w1: f64, w2: f64) -> BoundaryClass {
    let on = |v: f64, r: f64| (v - r).abs() <= BOUNDARY_TOL * r;
    let beyond = |v: f64, r: f64| v > r * (1.0 + BOUNDARY_TOL);
    if beyond(w1, block.r4) || beyond(w2, block.r2) {
        return BoundaryClass::Exterior;
    }
    match (on(w1, block.r4), on(w2, block.r2)) {
        (true, true) => BoundaryClass::Bounce,
        (true, false) => BoundaryClass::Egress,
        (false, true) => BoundaryClass::Ingress,
        (false, false) => BoundaryClass::Interior,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub exponent: usize,
    pub formula: String,
    pub display: String,
    pub condition_used: Verdict,
    pub nonempty: bool,
    pub k: usize,
    pub kernel_dim: usize,
    pub dim_e_minus: usize,
    pub d_table: Vec<usize>,
}

/// Suspension exponent of the index of the maximal bounded invariant set:
/// `d_k` under G1, `d_(k-1)` under G2.
pub fn conley_index(decomp: &ResonanceDecomposition, which: BlockType) -> Result<IndexReport> {
    if !decomp.is_resonant() {
        return Err(Error::InvalidArgument(
            "index report needs a resonant decomposition".into(),
        ));
    }
    let kdim = decomp.kernel_dim();
    let exponent = decomp.d_k_minus_1() + if which == BlockType::G1 { kdim } else { 0 };
    // the product of Sigma^{dim E_-} with the kernel-box index
    let assembled = decomp.dim_e_minus() + if which == BlockType::G1 { kdim } else { 0 };
    let expected = match which {
        BlockType::G1 => decomp.d_k(),
        BlockType::G2 => decomp.d_k_minus_1(),
    };
    if exponent != assembled || exponent != expected {
        return Err(Error::Consistency(format!(
            "index exponent bookkeeping disagrees: {exponent} / {assembled} / {expected}"
        )));
    }
    let formula = match which {
        BlockType::G1 => "Sigma^{d_k}",
        BlockType::G2 => "Sigma^{d_(k-1)}",
    };
    Ok(IndexReport {
        exponent,
        formula: formula.to_string(),
        display: format!("Sigma^{exponent}"),
        condition_used: which.verdict(),
        nonempty: true,
        k: decomp.k,
        kernel_dim: kdim,
        dim_e_minus: decomp.dim_e_minus(),
        d_table: decomp.d.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_basis, decay_constants, decompose, EllipticOperator1D};
    use std::f64::consts::PI;

    fn decomp_at(k: usize) -> ResonanceDecomposition {
        let b = build_basis(&EllipticOperator1D::laplacian(1.0, 200), 6).unwrap();
        decompose(&b, b.eigenvalue(k - 1), 1.0, 1e-8).unwrap()
    }

    #[test]
    fn index_exponents() {
        assert_eq!(
            conley_index(&decomp_at(1), BlockType::G1).unwrap().exponent,
            1
        );
        assert_eq!(
            conley_index(&decomp_at(1), BlockType::G2).unwrap().exponent,
            0
        );
        assert_eq!(
            conley_index(&decomp_at(3), BlockType::G2).unwrap().exponent,
            2
        );
        assert_eq!(
            conley_index(&decomp_at(3), BlockType::G1).unwrap().exponent,
            3
        );
        assert!(conley_index(&decomp_at(1), BlockType::G2).unwrap().nonempty);
    }

    #[test]
    fn assembled_constants_for_arctan() {
        let d = decomp_at(1);
        let dc = decay_constants(&d).unwrap();
        let blk = IsolatingBlock::assemble(&d, &dc, PI / 2.0, 1.0, 5.0, 0.1, BlockType::G1, 1.0);
        assert!((blk.m1 - PI / 2.0).abs() < 1e-15);
        assert!((blk.m0 - PI).abs() < 1e-15);
        let analytic_r2 = 1.1 * (PI / 2.0) / d.lambda;
        assert!((blk.r2 - analytic_r2).abs() < 1e-12);
        assert!((blk.a - 1.0 / (d.lambda * d.lambda + 1.0).sqrt()).abs() < 1e-15);
        assert!(blk.check_radii().all());
    }

    #[test]
    fn boundary_strata() {
        let d = decomp_at(1);
        let dc = decay_constants(&d).unwrap();
        let blk = IsolatingBlock::assemble(&d, &dc, 1.0, 1.0, 5.0, 0.1, BlockType::G1, 1.0);
        assert_eq!(classify_norms(&blk, blk.r4, 0.0), BoundaryClass::Egress);
        assert_eq!(classify_norms(&blk, 0.0, blk.r2), BoundaryClass::Ingress);
        assert_eq!(classify_norms(&blk, blk.r4, blk.r2), BoundaryClass::Bounce);
        assert_eq!(
            classify_norms(&blk, 0.5 * blk.r4, 0.5 * blk.r2),
            BoundaryClass::Interior
        );
        assert_eq!(
            classify_norms(&blk, 2.0 * blk.r4, 0.0),
            BoundaryClass::Exterior
        );
    }
}
