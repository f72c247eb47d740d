use rayon::prelude::*;
use serde::Serialize;

use super::{BlockType, BoundaryClass, IsolatingBlock};
use crate::error::{Error, Result};
use crate::sampling;
use crate::semiflow::{homotopy_field, state_from_kernel_coords, KernelCoords, Nonlinearity};
use crate::spectral::{ModeClass, ResonanceDecomposition, SpectralBasis};

const INTERIOR_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub n_per_stratum: usize,
    /// Homotopy parameter of the field being tested.
    pub s: f64,
    /// Step of the short forward/backward integrations; defaults to
    /// `1e-4 / (c lambda)`.
    pub dt: Option<f64>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_per_stratum: 1000,
            s: 0.0,
            dt: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumReport {
    pub stratum: BoundaryClass,
    pub samples: usize,
    pub sign_violations: usize,
    pub flow_violations: usize,
    /// Smallest signed slack of the sign tests on this stratum.
    pub min_margin: f64,
    pub forward: &'static str,
    pub backward: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub s: f64,
    pub seed: u64,
    pub dt: f64,
    pub strata: Vec<StratumReport>,
    pub sign_violations: usize,
    pub flow_violations: usize,
    pub valid: bool,
}

impl VerificationReport {
    pub fn into_result(self) -> Result<Self> {
        if self.valid {
            Ok(self)
        } else {
            Err(Error::NotCertified(format!(
                "block has {} sign and {} flow violations at s = {}",
                self.sign_violations, self.flow_violations, self.s
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Motion {
    Out,
    In,
    Tangent,
}

impl Motion {
    fn as_str(self) -> &'static str {
        match self {
            Motion::Out => "out",
            Motion::In => "in",
            Motion::Tangent => "tangent",
        }
    }
}

struct Sample {
    q_position: Vec<f64>,
    w: KernelCoords,
}

struct Evaluation {
    sign_ok: bool,
    margin: f64,
    forward: Motion,
    backward: Motion,
}

/// Expected (forward, backward) motion on each stratum.
fn expected(which: BlockType, stratum: BoundaryClass) -> (Motion, Motion) {
    match (which, stratum) {
        (BlockType::G2, _) => (Motion::In, Motion::Out),
        (BlockType::G1, BoundaryClass::Egress) => (Motion::Out, Motion::In),
        (BlockType::G1, BoundaryClass::Ingress) => (Motion::In, Motion::Out),
        (BlockType::G1, _) => (Motion::Out, Motion::Out),
    }
}

struct KernelField<'a> {
    block: &'a IsolatingBlock,
    decomp: &'a ResonanceDecomposition,
    basis: &'a SpectralBasis,
    f: &'a dyn Nonlinearity,
    s: f64,
}

impl KernelField<'_> {
    /// `P G(s, Q x + P x)` restricted to the kernel modes, with `P x` given
    /// in chart coordinates.
    fn kernel_force(&self, q_position: &[f64], w: &KernelCoords) -> Vec<f64> {
        let p = state_from_kernel_coords(self.decomp, w);
        let x: Vec<f64> = q_position.iter().zip(&p.x).map(|(q, p)| q + p).collect();
        let g = homotopy_field(self.decomp, self.basis, self.f, self.s, &x);
        self.decomp.kernel_modes.iter().map(|&i| g[i]).collect()
    }

    /// Chart form of the kernel equations: `w1' = a PF`, `w2' = -c lambda w2 + PF`.
    fn rhs(&self, q: &[f64], w: &KernelCoords) -> KernelCoords {
        let pf = self.kernel_force(q, w);
        KernelCoords {
            w1: pf.iter().map(|v| self.block.a * v).collect(),
            w2: pf
                .iter()
                .zip(&w.w2)
                .map(|(v, y)| -self.block.c_lambda * y + v)
                .collect(),
        }
    }

    fn rk4(&self, q: &[f64], w: &KernelCoords, h: f64) -> KernelCoords {
        let shift = |base: &KernelCoords, k: &KernelCoords, c: f64| KernelCoords {
            w1: base.w1.iter().zip(&k.w1).map(|(a, b)| a + c * b).collect(),
            w2: base.w2.iter().zip(&k.w2).map(|(a, b)| a + c * b).collect(),
        };
        let k1 = self.rhs(q, w);
        let k2 = self.rhs(q, &shift(w, &k1, h / 2.0));
        let k3 = self.rhs(q, &shift(w, &k2, h / 2.0));
        let k4 = self.rhs(q, &shift(w, &k3, h));
        let mut out = w.clone();
        for (k, c) in [
            (&k1, h / 6.0),
            (&k2, h / 3.0),
            (&k3, h / 3.0),
            (&k4, h / 6.0),
        ] {
            out = shift(&out, k, c);
        }
        out
    }

    fn motion(&self, w: &KernelCoords) -> Motion {
        let (n1, n2) = (w.w1_norm(), w.w2_norm());
        if n1 > self.block.r4 || n2 > self.block.r2 {
            Motion::Out
        } else if n1 < self.block.r4 && n2 < self.block.r2 {
            Motion::In
        } else {
            Motion::Tangent
        }
    }

    fn evaluate(&self, stratum: BoundaryClass, smp: &Sample, h: f64) -> Evaluation {
        let pf = self.kernel_force(&smp.q_position, &smp.w);
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let sign = match self.block.which {
            BlockType::G1 => 1.0,
            BlockType::G2 => -1.0,
        };
        // d/dt |w1|^2 / 2 = a^2 <PF, c lambda u + v>
        let w1_slack = sign * self.block.a * dot(&pf, &smp.w.w1);
        // d/dt |w2|^2 / 2 = -c lambda |w2|^2 + <PF, v>, required negative
        let w2_slack = self.block.c_lambda * dot(&smp.w.w2, &smp.w.w2) - dot(&pf, &smp.w.w2);
        let margin = match stratum {
            BoundaryClass::Egress => w1_slack,
            BoundaryClass::Ingress => w2_slack,
            _ => w1_slack.min(w2_slack),
        };
        Evaluation {
            sign_ok: margin > 0.0,
            margin,
            forward: self.motion(&self.rk4(&smp.q_position, &smp.w, h)),
            backward: self.motion(&self.rk4(&smp.q_position, &smp.w, -h)),
        }
    }
}

fn draw(
    block: &IsolatingBlock,
    decomp: &ResonanceDecomposition,
    stratum: BoundaryClass,
    n: usize,
    seed: u64,
) -> Vec<Sample> {
    let kdim = decomp.kernel_dim();
    let complement: Vec<usize> = (0..decomp.n_modes())
        .filter(|&i| decomp.classes[i] != ModeClass::Kernel)
        .collect();
    let mut rng = sampling::rng(seed);
    let sphere = |rng: &mut sampling::SeededRng, r: f64| -> Vec<f64> {
        sampling::unit_sphere(rng, kdim)
            .into_iter()
            .map(|v| v * r)
            .collect()
    };
    (0..n)
        .map(|_| {
            let (w1, w2) = match stratum {
                BoundaryClass::Egress => (
                    sphere(&mut rng, block.r4),
                    sampling::interior_ball(&mut rng, kdim, block.r2, INTERIOR_MARGIN),
                ),
                BoundaryClass::Ingress => (
                    sampling::interior_ball(&mut rng, kdim, block.r4, INTERIOR_MARGIN),
                    sphere(&mut rng, block.r2),
                ),
                _ => (sphere(&mut rng, block.r4), sphere(&mut rng, block.r2)),
            };
            let scaled = sampling::uniform_ball(&mut rng, complement.len(), block.n1_radius());
            let mut q_position = vec![0.0; decomp.n_modes()];
            for (v, &i) in scaled.iter().zip(&complement) {
                q_position[i] = v / decomp.weight(i);
            }
            Sample {
                q_position,
                w: KernelCoords { w1, w2 },
            }
        })
        .collect()
}

/// Samples the three boundary strata of the kernel box and checks the sign
/// of `d/dt |w1|^2` and `d/dt |w2|^2` there, plus the direction of short
/// forward and backward integrations of the kernel equations with the
/// complement part frozen.
pub fn verify_block(
    block: &IsolatingBlock,
    decomp: &ResonanceDecomposition,
    basis: &SpectralBasis,
    f: &dyn Nonlinearity,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if opts.n_per_stratum == 0 {
        return Err(Error::InvalidArgument(
            "need at least one sample per stratum".into(),
        ));
    }
    if !(0.0..=1.0).contains(&opts.s) {
        return Err(Error::InvalidArgument(format!(
            "s must lie in [0, 1], got {}",
            opts.s
        )));
    }
    if decomp.kernel_dim() == 0 || !(block.r2 > 0.0 && block.r4 > 0.0) {
        return Err(Error::InvalidArgument(
            "block has an empty kernel box".into(),
        ));
    }
    let h = opts.dt.unwrap_or(1e-4 / block.c_lambda);
    let field = KernelField {
        block,
        decomp,
        basis,
        f,
        s: opts.s,
    };
    let strata = [
        BoundaryClass::Egress,
        BoundaryClass::Ingress,
        BoundaryClass::Bounce,
    ];
    let mut reports = Vec::new();
    for (j, &stratum) in strata.iter().enumerate() {
        let samples = draw(
            block,
            decomp,
            stratum,
            opts.n_per_stratum,
            opts.seed.wrapping_add(j as u64),
        );
        let evals: Vec<Evaluation> = samples
            .par_iter()
            .map(|smp| field.evaluate(stratum, smp, h))
            .collect();
        let (fw, bw) = expected(block.which, stratum);
        reports.push(StratumReport {
            stratum,
            samples: evals.len(),
            sign_violations: evals.iter().filter(|e| !e.sign_ok).count(),
            flow_violations: evals
                .iter()
                .filter(|e| e.forward != fw || e.backward != bw)
                .count(),
            min_margin: evals.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min),
            forward: fw.as_str(),
            backward: bw.as_str(),
        });
    }
    let sign_violations = reports.iter().map(|r| r.sign_violations).sum();
    let flow_violations = reports.iter().map(|r| r.flow_violations).sum();
    Ok(VerificationReport {
        s: opts.s,
        seed: opts.seed,
        dt: h,
        strata: reports,
        sign_violations,
        flow_violations,
        valid: sign_violations == 0 && flow_violations == 0,
    })
}
