//! Run configuration, read from a TOML file with five sections.
//!
//! Every key has a default, so an empty file (or no file) is a valid run:
//! `a = 1` on `(0, 1)`, `lambda = mu_1`, `c = 1`, arctan forcing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorConfig,
    pub nonlinearity: NonlinearityConfig,
    pub dynamics: DynamicsConfig,
    pub checks: ChecksConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    pub length: f64,
    /// Constant diffusion coefficient, used when no table is given.
    pub coefficient: f64,
    /// Inline `[[x, a], ...]` nodes, interpolated linearly.
    pub coefficient_table: Option<Vec<[f64; 2]>>,
    /// Two-column `x,a` file; relative paths resolve against the config file.
    pub coefficient_file: Option<PathBuf>,
    pub n_grid: usize,
    pub n_modes: usize,
    /// Ellipticity constant: the coefficient must satisfy `a >= c0`.
    pub c0: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            length: 1.0,
            coefficient: 1.0,
            coefficient_table: None,
            coefficient_file: None,
            n_grid: 256,
            n_modes: 8,
            c0: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub name: String,
    /// 1-based mode of the constant forcing; defaults to `k`.
    pub forcing_mode: Option<usize>,
    pub forcing_amplitude: f64,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        NonlinearityConfig {
            name: "arctan".into(),
            forcing_mode: None,
            forcing_amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    /// `lambda = mu_k`, 1-based.
    pub k: usize,
    pub c: f64,
    pub alpha: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Homotopy parameter used by `simulate`.
    pub s: f64,
    pub snap_tol: f64,
    pub n_trajectories: usize,
    /// Initial positions and velocities are drawn in mode balls of this radius.
    pub initial_radius: f64,
    pub sample_every: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            k: 1,
            c: 1.0,
            alpha: 0.5,
            dt: 0.01,
            t_end: 10.0,
            s: 1.0,
            snap_tol: 1e-8,
            n_trajectories: 4,
            initial_radius: 1.0,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub seed: u64,
    /// Samples per radius for the geometric check.
    pub n_samples: usize,
    /// Kernel directions for the Landesman-Lazer integral (1-D kernels use 2).
    pub n_sphere: usize,
    pub n_per_stratum: usize,
    /// Explicit radius grid; overrides `r_min`, `r_max`, `r_points`.
    pub r_grid: Option<Vec<f64>>,
    pub r_min: f64,
    pub r_max: f64,
    pub r_points: usize,
    /// Added to `R1` for the ball `B1`.
    pub ball_offset: f64,
    pub homotopy: Vec<f64>,
    pub census: bool,
    pub census_initial: usize,
    /// Census horizon; defaults to `50 / delta`.
    #[serde(rename = "census_T")]
    pub census_t_end: Option<f64>,
    pub census_dt: f64,
    pub newton_tol: f64,
    /// Initial Newton guess, one value per mode or a single value for all.
    pub newton_guess: Vec<f64>,
    pub probe_norms: Vec<f64>,
    pub probe_seeds: usize,
    #[serde(rename = "probe_T")]
    pub probe_t_end: f64,
    pub connect_probe: bool,
    pub connect_eps: f64,
    #[serde(rename = "connect_T")]
    pub connect_t_end: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            seed: 0,
            n_samples: 2000,
            n_sphere: 2,
            n_per_stratum: 1000,
            r_grid: None,
            r_min: 1.0,
            r_max: 1e3,
            r_points: 16,
            ball_offset: 1.0,
            homotopy: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            census: true,
            census_initial: 32,
            census_t_end: None,
            census_dt: 0.01,
            newton_tol: 1e-10,
            newton_guess: vec![0.5],
            probe_norms: vec![1.0, 2.0],
            probe_seeds: 10,
            probe_t_end: 10.0,
            connect_probe: false,
            connect_eps: 1e-3,
            connect_t_end: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            format: Format::Json,
        }
    }
}

fn invalid(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Reads and validates `path`; file references resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid("--config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(file) = &cfg.operator.coefficient_file {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.operator.coefficient_file = Some(base.join(file));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let op = &self.operator;
        if !(op.length > 0.0 && op.length.is_finite()) {
            return Err(invalid("operator.length", "must be positive"));
        }
        if !(op.coefficient > 0.0) {
            return Err(invalid("operator.coefficient", "must be positive"));
        }
        if op.coefficient_table.is_some() && op.coefficient_file.is_some() {
            return Err(invalid(
                "operator.coefficient_table",
                "give a table or a file, not both",
            ));
        }
        if let Some(t) = &op.coefficient_table {
            check_table(t, "operator.coefficient_table")?;
        }
        if let Some(file) = &op.coefficient_file {
            if !file.is_file() {
                return Err(invalid(
                    "operator.coefficient_file",
                    format!("{} does not exist", file.display()),
                ));
            }
        }
        if op.n_grid < 16 {
            return Err(invalid("operator.n_grid", "must be at least 16"));
        }
        if op.n_modes == 0 || op.n_modes > op.n_grid - 2 {
            return Err(invalid("operator.n_modes", "must lie in 1..=n_grid-2"));
        }
        if !(op.c0 > 0.0) {
            return Err(invalid("operator.c0", "must be positive"));
        }
        let nl = &self.nonlinearity;
        if let Some(m) = nl.forcing_mode {
            if m == 0 || m > op.n_modes {
                return Err(invalid(
                    "nonlinearity.forcing_mode",
                    "must lie in 1..=n_modes",
                ));
            }
        }
        if !nl.forcing_amplitude.is_finite() {
            return Err(invalid("nonlinearity.forcing_amplitude", "must be finite"));
        }
        let dy = &self.dynamics;
        if dy.k == 0 || dy.k > op.n_modes {
            return Err(invalid("dynamics.k", "must lie in 1..=n_modes"));
        }
        if !(dy.c > 0.0) {
            return Err(invalid("dynamics.c", "must be positive"));
        }
        if !(dy.alpha > 0.0 && dy.alpha < 1.0) {
            return Err(invalid("dynamics.alpha", "must lie in (0, 1)"));
        }
        if !(dy.dt > 0.0) {
            return Err(invalid("dynamics.dt", "must be positive"));
        }
        if !(dy.t_end > 0.0) {
            return Err(invalid("dynamics.T", "must be positive"));
        }
        if !(0.0..=1.0).contains(&dy.s) {
            return Err(invalid("dynamics.s", "must lie in [0, 1]"));
        }
        if !(dy.snap_tol > 0.0) {
            return Err(invalid("dynamics.snap_tol", "must be positive"));
        }
        if !(dy.initial_radius >= 0.0) {
            return Err(invalid("dynamics.initial_radius", "must be nonnegative"));
        }
        if dy.sample_every == 0 {
            return Err(invalid("dynamics.sample_every", "must be at least 1"));
        }
        let ch = &self.checks;
        if ch.n_samples == 0 {
            return Err(invalid("checks.n_samples", "must be at least 1"));
        }
        if ch.n_sphere == 0 {
            return Err(invalid("checks.n_sphere", "must be at least 1"));
        }
        if ch.n_per_stratum == 0 {
            return Err(invalid("checks.n_per_stratum", "must be at least 1"));
        }
        match &ch.r_grid {
            Some(g) => {
                if g.is_empty() || g.iter().any(|r| !(*r > 0.0)) {
                    return Err(invalid(
                        "checks.r_grid",
                        "must be a nonempty list of positive radii",
                    ));
                }
                if g.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("checks.r_grid", "must be strictly increasing"));
                }
            }
            None => {
                if !(ch.r_min > 0.0 && ch.r_max > ch.r_min) {
                    return Err(invalid("checks.r_max", "need 0 < r_min < r_max"));
                }
                if ch.r_points < 2 {
                    return Err(invalid("checks.r_points", "must be at least 2"));
                }
            }
        }
        if !(ch.ball_offset >= 0.0) {
            return Err(invalid("checks.ball_offset", "must be nonnegative"));
        }
        if ch.homotopy.is_empty() || ch.homotopy.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(invalid(
                "checks.homotopy",
                "must be a nonempty list in [0, 1]",
            ));
        }
        if let Some(t) = ch.census_t_end {
            if !(t > 0.0) {
                return Err(invalid("checks.census_T", "must be positive"));
            }
        }
        if !(ch.census_dt > 0.0) {
            return Err(invalid("checks.census_dt", "must be positive"));
        }
        if !(ch.newton_tol > 0.0) {
            return Err(invalid("checks.newton_tol", "must be positive"));
        }
        if !(ch.newton_guess.len() == 1 || ch.newton_guess.len() == op.n_modes) {
            return Err(invalid(
                "checks.newton_guess",
                "needs one value or one per mode",
            ));
        }
        if ch.probe_norms.is_empty() || ch.probe_norms.iter().any(|n| !(*n > 0.0)) {
            return Err(invalid(
                "checks.probe_norms",
                "must be a nonempty list of positive norms",
            ));
        }
        if ch.probe_seeds == 0 {
            return Err(invalid("checks.probe_seeds", "must be at least 1"));
        }
        if !(ch.probe_t_end > 0.0) {
            return Err(invalid("checks.probe_T", "must be positive"));
        }
        if !(ch.connect_eps > 0.0) {
            return Err(invalid("checks.connect_eps", "must be positive"));
        }
        if !(ch.connect_t_end > 0.0) {
            return Err(invalid("checks.connect_T", "must be positive"));
        }
        Ok(())
    }

    /// Radius grid of the geometric check.
    pub fn r_grid(&self) -> Vec<f64> {
        let ch = &self.checks;
        if let Some(g) = &ch.r_grid {
            return g.clone();
        }
        let n = ch.r_points;
        let (lo, hi) = (ch.r_min.ln(), ch.r_max.ln());
        (0..n)
            .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    /// Nodes of the tabulated coefficient, if any.
    pub fn coefficient_nodes(&self) -> Result<Option<Vec<(f64, f64)>>, CliError> {
        let op = &self.operator;
        if let Some(t) = &op.coefficient_table {
            return Ok(Some(t.iter().map(|p| (p[0], p[1])).collect()));
        }
        let Some(file) = &op.coefficient_file else {
            return Ok(None);
        };
        let key = "operator.coefficient_file";
        let text = fs::read_to_string(file)
            .map_err(|e| invalid(key, format!("{}: {e}", file.display())))?;
        let mut nodes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: Option<Vec<f64>> = line.split(',').map(|v| v.trim().parse().ok()).collect();
            match parsed.as_deref() {
                Some([x, a]) => nodes.push([*x, *a]),
                // tolerate a header row
                None if nodes.is_empty() && i == 0 => continue,
                _ => return Err(invalid(key, format!("line {}: expected `x,a`", i + 1))),
            }
        }
        check_table(&nodes, key)?;
        Ok(Some(nodes.into_iter().map(|p| (p[0], p[1])).collect()))
    }
}

fn check_table(t: &[[f64; 2]], key: &str) -> Result<(), CliError> {
    if t.is_empty() {
        return Err(invalid(key, "needs at least one node"));
    }
    if t.iter().any(|p| !(p[1] > 0.0) || !p[0].is_finite()) {
        return Err(invalid(key, "coefficient values must be positive"));
    }
    if t.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(invalid(key, "x nodes must be strictly increasing"));
    }
    Ok(())
}
