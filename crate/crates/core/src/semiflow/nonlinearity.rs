use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling;
use crate::spectral::SpectralBasis;

/// A bounded, globally Lipschitz nonlinearity `f(x, s)`.
///
/// Asymptotic data are optional: `f_plus`/`f_minus` are the pointwise
/// limits as `s -> +-inf`, `f_infinity` the limit of `f(x, s) s`, and `nu`
/// the derivative `D_s f(x, 0)` (constant in `x`).
pub trait Nonlinearity: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn eval(&self, x: f64, s: f64) -> f64;
    /// `m` with `|f| <= m`.
    fn bound(&self) -> f64;
    fn lipschitz(&self) -> f64;
    fn f_plus(&self, _x: f64) -> Option<f64> {
        None
    }
    fn f_minus(&self, _x: f64) -> Option<f64> {
        None
    }
    fn f_infinity(&self, _x: f64) -> Option<f64> {
        None
    }
    fn nu(&self) -> Option<f64> {
        None
    }
}

/// `sign * arctan(s)`.
#[derive(Debug, Clone)]
pub struct Arctan {
    pub sign: f64,
}

impl Nonlinearity for Arctan {
    fn name(&self) -> &str {
        if self.sign > 0.0 {
            "arctan"
        } else {
            "neg_arctan"
        }
    }
    fn eval(&self, _x: f64, s: f64) -> f64 {
        self.sign * s.atan()
    }
    fn bound(&self) -> f64 {
        FRAC_PI_2
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
    fn f_plus(&self, _x: f64) -> Option<f64> {
        Some(self.sign * FRAC_PI_2)
    }
    fn f_minus(&self, _x: f64) -> Option<f64> {
        Some(-self.sign * FRAC_PI_2)
    }
    fn nu(&self) -> Option<f64> {
        Some(self.sign)
    }
}

/// `sign * s / (1 + s^2)`, which vanishes at infinity with `f(s) s -> sign`.
#[derive(Debug, Clone)]
pub struct RationalDecay {
    pub sign: f64,
}

impl Nonlinearity for RationalDecay {
    fn name(&self) -> &str {
        if self.sign > 0.0 {
            "rational_sr"
        } else {
            "neg_rational_sr"
        }
    }
    fn eval(&self, _x: f64, s: f64) -> f64 {
        self.sign * s / (1.0 + s * s)
    }
    fn bound(&self) -> f64 {
        0.5
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
    fn f_plus(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
    fn f_minus(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
    fn f_infinity(&self, _x: f64) -> Option<f64> {
        Some(self.sign)
    }
    fn nu(&self) -> Option<f64> {
        Some(self.sign)
    }
}

/// `f(x, s) = y0(x)`, independent of `s`. The profile is tabulated on a
/// grid and interpolated linearly.
#[derive(Debug, Clone)]
pub struct ConstantForcing {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl ConstantForcing {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "forcing profile needs matching grid and values".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "forcing grid must be increasing".into(),
            ));
        }
        Ok(ConstantForcing { grid, values })
    }

    /// `y0 = sum_i coeffs[i] e_i` sampled on the basis grid.
    pub fn from_coefficients(basis: &SpectralBasis, coeffs: &[f64]) -> Self {
        ConstantForcing {
            grid: basis.grid().to_vec(),
            values: basis.synthesize(coeffs),
        }
    }

    fn profile(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g[0] {
            return self.values[0];
        }
        if x >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let j = g.partition_point(|&p| p <= x) - 1;
        let t = (x - g[j]) / (g[j + 1] - g[j]);
        self.values[j] * (1.0 - t) + self.values[j + 1] * t
    }
}

impl Nonlinearity for ConstantForcing {
    fn name(&self) -> &str {
        "const_kernel"
    }
    fn eval(&self, x: f64, _s: f64) -> f64 {
        self.profile(x)
    }
    fn bound(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
    fn f_plus(&self, x: f64) -> Option<f64> {
        Some(self.profile(x))
    }
    fn f_minus(&self, x: f64) -> Option<f64> {
        Some(self.profile(x))
    }
}

#[derive(Debug, Clone)]
pub struct Zero;

impl Nonlinearity for Zero {
    fn name(&self) -> &str {
        "zero"
    }
    fn eval(&self, _x: f64, _s: f64) -> f64 {
        0.0
    }
    fn bound(&self) -> f64 {
        0.0
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
    fn f_plus(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
    fn f_minus(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
    fn f_infinity(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
    fn nu(&self) -> Option<f64> {
        Some(0.0)
    }
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nonlinearity assembled from closures.
#[derive(Clone)]
pub struct FnNonlinearity {
    name: String,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    bound: f64,
    lipschitz: f64,
    f_plus: Option<Profile>,
    f_minus: Option<Profile>,
    f_infinity: Option<Profile>,
    nu: Option<f64>,
}

impl FnNonlinearity {
    pub fn new(
        name: impl Into<String>,
        bound: f64,
        lipschitz: f64,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FnNonlinearity {
            name: name.into(),
            f: Arc::new(f),
            bound,
            lipschitz,
            f_plus: None,
            f_minus: None,
            f_infinity: None,
            nu: None,
        }
    }

    pub fn with_limits(
        mut self,
        f_plus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_minus: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.f_plus = Some(Arc::new(f_plus));
        self.f_minus = Some(Arc::new(f_minus));
        self
    }

    pub fn with_f_infinity(mut self, f_inf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f_infinity = Some(Arc::new(f_inf));
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = Some(nu);
        self
    }
}

impl fmt::Debug for FnNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnNonlinearity")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .field("lipschitz", &self.lipschitz)
            .field("nu", &self.nu)
            .finish_non_exhaustive()
    }
}

impl Nonlinearity for FnNonlinearity {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval(&self, x: f64, s: f64) -> f64 {
        (self.f)(x, s)
    }
    fn bound(&self) -> f64 {
        self.bound
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    fn f_plus(&self, x: f64) -> Option<f64> {
        self.f_plus.as_ref().map(|g| g(x))
    }
    fn f_minus(&self, x: f64) -> Option<f64> {
        self.f_minus.as_ref().map(|g| g(x))
    }
    fn f_infinity(&self, x: f64) -> Option<f64> {
        self.f_infinity.as_ref().map(|g| g(x))
    }
    fn nu(&self) -> Option<f64> {
        self.nu
    }
}

/// Data some built-ins need at construction time.
pub struct NonlinearityContext<'a> {
    pub basis: &'a SpectralBasis,
    /// 0-based mode carrying the constant forcing `y0 = amplitude e_mode`.
    pub forcing_mode: usize,
    pub forcing_amplitude: f64,
}

type Factory = Box<dyn Fn(&NonlinearityContext<'_>) -> Arc<dyn Nonlinearity> + Send + Sync>;

/// Name-keyed table of nonlinearity constructors.
pub struct NonlinearityRegistry {
    entries: BTreeMap<String, Factory>,
}

impl Default for NonlinearityRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl NonlinearityRegistry {
    pub fn empty() -> Self {
        NonlinearityRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("arctan", |_| Arc::new(Arctan { sign: 1.0 }));
        r.register("neg_arctan", |_| Arc::new(Arctan { sign: -1.0 }));
        r.register("rational_sr", |_| Arc::new(RationalDecay { sign: 1.0 }));
        r.register("neg_rational_sr", |_| {
            Arc::new(RationalDecay { sign: -1.0 })
        });
        r.register("const_kernel", |ctx| {
            let mut coeffs = vec![0.0; ctx.basis.n_modes()];
            let mode = ctx.forcing_mode.min(coeffs.len() - 1);
            coeffs[mode] = ctx.forcing_amplitude;
            Arc::new(ConstantForcing::from_coefficients(ctx.basis, &coeffs))
        });
        r.register("zero", |_| Arc::new(Zero));
        r
    }

    pub fn register(
        &mut self,
        name: &str,
        factory: impl Fn(&NonlinearityContext<'_>) -> Arc<dyn Nonlinearity> + Send + Sync + 'static,
    ) {
        self.entries.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn create(
        &self,
        name: &str,
        ctx: &NonlinearityContext<'_>,
    ) -> Result<Arc<dyn Nonlinearity>> {
        match self.entries.get(name) {
            Some(factory) => Ok(factory(ctx)),
            None => Err(Error::UnknownStrategy {
                kind: "nonlinearity",
                name: name.to_string(),
                known: self.names().join(", "),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub max_abs: f64,
    pub max_slope: f64,
    pub max_abs_at_zero: f64,
    pub bound_ok: bool,
    pub lipschitz_ok: bool,
    pub zero_ok: bool,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.bound_ok && self.lipschitz_ok && self.zero_ok
    }
}

/// Samples the declared bound, Lipschitz constant and `f(x, 0) = 0` (when
/// `nu` is declared) at random points of `[0, l] x R`.
pub fn audit(f: &dyn Nonlinearity, length: f64, n_samples: usize, seed: u64) -> AuditReport {
    let mut rng = sampling::rng(seed);
    let draw_s = |rng: &mut sampling::SeededRng| {
        let mag = 10f64.powf(rng.random_range(-3.0..6.0));
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    };
    let (mut max_abs, mut max_slope, mut max_zero) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n_samples {
        let x = rng.random_range(0.0..=length);
        let s1 = draw_s(&mut rng);
        let s2 = s1 + rng.random_range(-1.0..1.0);
        let (v1, v2) = (f.eval(x, s1), f.eval(x, s2));
        max_abs = max_abs.max(v1.abs()).max(v2.abs());
        if s1 != s2 {
            max_slope = max_slope.max((v1 - v2).abs() / (s1 - s2).abs());
        }
        max_zero = max_zero.max(f.eval(x, 0.0).abs());
    }
    let tol = 1e-12;
    AuditReport {
        samples: n_samples,
        max_abs,
        max_slope,
        max_abs_at_zero: max_zero,
        bound_ok: max_abs <= f.bound() + tol,
        lipschitz_ok: max_slope <= f.lipschitz() * (1.0 + 1e-9) + tol,
        zero_ok: f.nu().is_none() || max_zero <= tol,
    }
}
