//! Landesman-Lazer, strong-resonance and geometric condition checks.

mod checks;

pub use checks::{check_g, check_ll, check_sr, default_r_grid, SR_S_MAX, SR_S_MIN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiflow::Nonlinearity;
use crate::spectral::{ResonanceDecomposition, SpectralBasis};

/// Safety factor applied to observed margins.
pub const RHO_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    G1,
    G2,
    LL1,
    LL2,
    SR1,
    SR2,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn is_conclusive(self) -> bool {
        self != Verdict::Inconclusive
    }

    /// True for the "positive" family (G1, LL1, SR1).
    pub fn is_first(self) -> bool {
        matches!(self, Verdict::G1 | Verdict::LL1 | Verdict::SR1)
    }

    pub fn flipped(self) -> Verdict {
        match self {
            Verdict::G1 => Verdict::G2,
            Verdict::G2 => Verdict::G1,
            Verdict::LL1 => Verdict::LL2,
            Verdict::LL2 => Verdict::LL1,
            Verdict::SR1 => Verdict::SR2,
            Verdict::SR2 => Verdict::SR1,
            Verdict::Inconclusive => Verdict::Inconclusive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::G1 => "G1",
            Verdict::G2 => "G2",
            Verdict::LL1 => "LL1",
            Verdict::LL2 => "LL2",
            Verdict::SR1 => "SR1",
            Verdict::SR2 => "SR2",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// The sample that attains the smallest margin. Coefficient vectors are in
/// mode coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub sample_index: usize,
    pub radius: Option<f64>,
    pub x_hat: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub verdict: Verdict,
    pub margin: f64,
    #[serde(rename = "R3")]
    pub r3: Option<f64>,
    pub rho: f64,
    pub samples_used: usize,
    pub seed: Option<u64>,
    /// `I` for the LL check, the integral of `f_inf` for the SR check.
    pub integral: Option<f64>,
    /// Worst value of `f(x, s) s` over the sampled grid (SR check).
    pub minorant: Option<f64>,
    pub worst_case: Option<WorstCase>,
    /// Certificates are obtained by sampling, not by enclosure.
    pub rigorous: bool,
}

impl ConditionReport {
    pub(crate) fn new(condition: &str, verdict: Verdict) -> Self {
        ConditionReport {
            condition: condition.to_string(),
            verdict,
            margin: 0.0,
            r3: None,
            rho: 0.0,
            samples_used: 0,
            seed: None,
            integral: None,
            minorant: None,
            worst_case: None,
            rigorous: false,
        }
    }
}

/// Inputs shared by all checks.
pub struct CheckContext<'a> {
    pub basis: &'a SpectralBasis,
    pub decomp: &'a ResonanceDecomposition,
    pub f: &'a dyn Nonlinearity,
    pub b1_radius: f64,
    pub b2_radius: f64,
    pub r_grid: &'a [f64],
    pub n_samples: usize,
    pub n_sphere: usize,
    pub seed: u64,
}

pub trait ConditionCheck: Send + Sync {
    fn name(&self) -> &str;
    /// Whether `f` carries the data the check needs.
    fn applicable(&self, f: &dyn Nonlinearity) -> bool;
    fn run(&self, ctx: &CheckContext<'_>) -> Result<ConditionReport>;
}

struct LandesmanLazer;
struct StrongResonance;
struct Geometric;

impl ConditionCheck for LandesmanLazer {
    fn name(&self) -> &str {
        "LL"
    }
    fn applicable(&self, f: &dyn Nonlinearity) -> bool {
        f.f_plus(0.0).is_some() && f.f_minus(0.0).is_some()
    }
    fn run(&self, ctx: &CheckContext<'_>) -> Result<ConditionReport> {
        check_ll(ctx.basis, ctx.decomp, ctx.f, ctx.n_sphere)
    }
}

impl ConditionCheck for StrongResonance {
    fn name(&self) -> &str {
        "SR"
    }
    fn applicable(&self, f: &dyn Nonlinearity) -> bool {
        f.f_infinity(0.0).is_some()
    }
    fn run(&self, ctx: &CheckContext<'_>) -> Result<ConditionReport> {
        check_sr(ctx.basis, ctx.f)
    }
}

impl ConditionCheck for Geometric {
    fn name(&self) -> &str {
        "G"
    }
    fn applicable(&self, _f: &dyn Nonlinearity) -> bool {
        true
    }
    fn run(&self, ctx: &CheckContext<'_>) -> Result<ConditionReport> {
        check_g(
            ctx.basis,
            ctx.decomp,
            ctx.f,
            ctx.b1_radius,
            ctx.b2_radius,
            ctx.r_grid,
            ctx.n_samples,
            ctx.seed,
        )
    }
}

/// Ordered collection of condition checks.
pub struct CheckRegistry {
    checks: Vec<Box<dyn ConditionCheck>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl CheckRegistry {
    pub fn with_builtins() -> Self {
        CheckRegistry {
            checks: vec![
                Box::new(LandesmanLazer),
                Box::new(StrongResonance),
                Box::new(Geometric),
            ],
        }
    }

    pub fn register(&mut self, check: Box<dyn ConditionCheck>) {
        self.checks.retain(|c| c.name() != check.name());
        self.checks.push(check);
    }

    pub fn names(&self) -> Vec<&str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn ConditionCheck> {
        self.checks
            .iter()
            .find(|c| c.name() == name)
            .map(|c| c.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "condition check",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    /// Runs every applicable check in registration order.
    pub fn run_applicable(&self, ctx: &CheckContext<'_>) -> Result<Vec<ConditionReport>> {
        self.checks
            .iter()
            .filter(|c| c.applicable(ctx.f))
            .map(|c| c.run(ctx))
            .collect()
    }
}
