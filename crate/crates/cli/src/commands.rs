//! The eight subcommands. Each returns an [`Outcome`]: the text printed to
//! stdout, the files to write and the exit status. Nothing here touches the
//! file system, which keeps the commands easy to compare byte for byte.

use std::fmt::Write as _;
use std::sync::Arc;

use dampwave_core::block::{
    conley_index, connect_probe, connecting_orbit_criteria, derive_radii, detect_bounded_orbits,
    equilibrium_solve, verify_block, BlockType, CensusOptions, ConnectReport, Equilibrium,
    IndexReport, IsolatingBlock, ProbeOutcome, RadiiCheck, VerificationReport, VerifyOptions,
};
use dampwave_core::resonance::{check_g, CheckContext, CheckRegistry, ConditionReport};
use dampwave_core::sampling;
use dampwave_core::semiflow::{
    divergence_probe, integrate, Nonlinearity, NonlinearityContext, NonlinearityRegistry,
    SampleRecord, StateE,
};
use dampwave_core::spectral::{
    build_basis, decay_constants, decompose, Coefficient, DecayConstants, EllipticOperator1D,
    ModeClass, ResonanceDecomposition, SpectralBasis,
};
use dampwave_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, EXIT_INCONCLUSIVE, EXIT_NUMERICAL, EXIT_OK};
use crate::output::Artifact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Eigenpairs, resonant splitting and decay constants.
    Basis,
    /// Landesman-Lazer, strong-resonance and geometric checks.
    Check,
    /// Isolating block radii and boundary verification.
    Block,
    /// Conley index of the maximal bounded invariant set.
    Index,
    /// Batch of trajectories from seeded initial states.
    Simulate,
    /// Growth rate under a constant kernel forcing.
    ProbeDivergence,
    /// Damped Newton for a stationary solution.
    Equilibrium,
    /// Connecting-orbit criteria for the zero solution.
    Connect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    NumericalFailure,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => EXIT_OK,
            Status::NumericalFailure => EXIT_NUMERICAL,
            Status::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: String,
    pub artifacts: Vec<Artifact>,
    pub status: Status,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cmd {
        Command::Basis => cmd_basis(cfg),
        Command::Check => cmd_check(cfg),
        Command::Block => cmd_block(cfg),
        Command::Index => cmd_index(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::ProbeDivergence => cmd_probe_divergence(cfg),
        Command::Equilibrium => cmd_equilibrium(cfg),
        Command::Connect => cmd_connect(cfg),
    }
}

/// Basis, splitting and nonlinearity shared by all commands.
pub struct Problem {
    pub basis: SpectralBasis,
    pub decomp: ResonanceDecomposition,
    pub decay: DecayConstants,
    pub f: Arc<dyn Nonlinearity>,
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let op = &cfg.operator;
        let coefficient = match cfg.coefficient_nodes()? {
            Some(nodes) => Coefficient::Table(nodes),
            None => Coefficient::Constant(op.coefficient),
        };
        let operator = EllipticOperator1D::new(op.length, coefficient, op.n_grid).with_c0(op.c0);
        let basis = build_basis(&operator, op.n_modes)?;
        let dy = &cfg.dynamics;
        let lambda = basis.eigenvalue(dy.k - 1);
        let decomp = decompose(&basis, lambda, dy.c, dy.snap_tol)?.with_alpha(dy.alpha)?;
        let decay = decay_constants(&decomp)?;
        let ctx = NonlinearityContext {
            basis: &basis,
            forcing_mode: cfg.nonlinearity.forcing_mode.unwrap_or(dy.k) - 1,
            forcing_amplitude: cfg.nonlinearity.forcing_amplitude,
        };
        let f = NonlinearityRegistry::with_builtins()
            .create(&cfg.nonlinearity.name, &ctx)
            .map_err(|e| CliError::Config {
                key: "nonlinearity.name".into(),
                msg: e.to_string(),
            })?;
        Ok(Problem {
            basis,
            decomp,
            decay,
            f,
        })
    }

    /// Balls `B1 = R1 + offset` and `B2 = R2 / (c lambda)` of the geometric check.
    /// A vanishing field gives `R2 = 0`; the ball is then kept degenerate but
    /// positive so the check runs and reports the field as inconclusive.
    pub fn balls(&self, cfg: &RunConfig) -> (f64, f64) {
        let pre = IsolatingBlock::assemble(
            &self.decomp,
            &self.decay,
            self.f.bound(),
            self.basis.length(),
            0.0,
            0.0,
            BlockType::G1,
            cfg.checks.ball_offset,
        );
        (
            pre.n1_radius().max(1e-12),
            (pre.r2 / pre.c_lambda).max(1e-12),
        )
    }

    pub fn check_g(&self, cfg: &RunConfig) -> Result<ConditionReport, CliError> {
        let (b1, b2) = self.balls(cfg);
        Ok(check_g(
            &self.basis,
            &self.decomp,
            self.f.as_ref(),
            b1,
            b2,
            &cfg.r_grid(),
            cfg.checks.n_samples,
            cfg.checks.seed,
        )?)
    }

    /// Runs the geometric check and derives the block from its verdict.
    pub fn block(
        &self,
        cfg: &RunConfig,
    ) -> Result<(IsolatingBlock, ConditionReport, ConditionReport), CliError> {
        let g = self.check_g(cfg)?;
        let (blk, certified) = derive_radii(
            &self.decomp,
            &self.decay,
            self.f.as_ref(),
            &g,
            &self.basis,
            &cfg.r_grid(),
            cfg.checks.n_samples,
            cfg.checks.seed,
            cfg.checks.ball_offset,
        )?;
        Ok((blk, g, certified))
    }

    pub fn newton_guess(&self, cfg: &RunConfig) -> Vec<f64> {
        let g = &cfg.checks.newton_guess;
        if g.len() == 1 {
            vec![g[0]; self.decomp.n_modes()]
        } else {
            g.clone()
        }
    }

    /// Initial state `j` of a seeded batch, drawn in mode balls of `radius`.
    pub fn initial_state(&self, seed: u64, j: usize, radius: f64) -> StateE {
        let mut rng = sampling::rng(seed.wrapping_add(j as u64));
        let n = self.decomp.n_modes();
        let x = sampling::uniform_ball(&mut rng, n, radius);
        let y = sampling::uniform_ball(&mut rng, n, radius);
        StateE::new(x, y)
    }
}

fn one_based(modes: &[usize]) -> Vec<usize> {
    modes.iter().map(|i| i + 1).collect()
}

fn format_set(modes: &[usize]) -> String {
    let v: Vec<String> = modes.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

#[derive(Debug, Serialize)]
struct BasisSummary {
    length: f64,
    n_grid: usize,
    n_modes: usize,
    k: usize,
    lambda: f64,
    c: f64,
    alpha: f64,
    mu: Vec<f64>,
    classes: Vec<ModeClass>,
    d: Vec<usize>,
    minus_modes: Vec<usize>,
    kernel_modes: Vec<usize>,
    plus_modes: Vec<usize>,
    dim_e_minus: usize,
    chart_scale: f64,
    #[serde(rename = "M")]
    decay_m: f64,
    delta: f64,
    gram_deviation: f64,
}

pub fn cmd_basis(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let d = &p.decomp;
    let summary = BasisSummary {
        length: p.basis.length(),
        n_grid: p.basis.n_grid(),
        n_modes: d.n_modes(),
        k: d.k,
        lambda: d.lambda,
        c: d.c,
        alpha: d.alpha,
        mu: d.mu.clone(),
        classes: d.classes.clone(),
        d: d.d.clone(),
        minus_modes: one_based(&d.minus_modes),
        kernel_modes: one_based(&d.kernel_modes),
        plus_modes: one_based(&d.plus_modes),
        dim_e_minus: d.dim_e_minus(),
        chart_scale: d.chart_scale(),
        decay_m: p.decay.m,
        delta: p.decay.delta,
        gram_deviation: p.basis.gram_deviation(),
    };
    let mut text = String::new();
    for (i, (mu, class)) in d.mu.iter().zip(&d.classes).enumerate() {
        let class = match class {
            ModeClass::Minus => "minus",
            ModeClass::Kernel => "kernel",
            ModeClass::Plus => "plus",
        };
        writeln!(text, "mu_{} = {mu:.6}  {class}", i + 1).unwrap();
    }
    for (l, dl) in d.d.iter().enumerate() {
        writeln!(text, "d_{l} = {dl}").unwrap();
    }
    writeln!(
        text,
        "partition: minus = {}, kernel = {}, plus = {}",
        format_set(&d.minus_modes),
        format_set(&d.kernel_modes),
        format_set(&d.plus_modes)
    )
    .unwrap();
    writeln!(text, "M = {:.6}, delta = {:.6}", p.decay.m, p.decay.delta).unwrap();
    writeln!(text, "dim E_- = {}", d.dim_e_minus()).unwrap();
    let mut csv = Vec::new();
    p.basis.write_csv(&mut csv)?;
    Ok(Outcome {
        summary: text,
        artifacts: vec![
            Artifact::new("basis.csv", csv),
            Artifact::report("spectrum", &summary, cfg.output.format),
        ],
        status: Status::Success,
    })
}

fn report_line(r: &ConditionReport) -> String {
    let mut s = format!(
        "{}: {} (margin {:.6e}",
        r.condition,
        r.verdict.as_str(),
        r.margin
    );
    if let Some(r3) = r.r3 {
        write!(s, ", R3 = {r3:.6}, rho = {:.6e}", r.rho).unwrap();
    }
    if let Some(i) = r.integral {
        write!(s, ", integral = {i:.10}").unwrap();
    }
    s.push(')');
    s
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let (b1, b2) = p.balls(cfg);
    let grid = cfg.r_grid();
    let ctx = CheckContext {
        basis: &p.basis,
        decomp: &p.decomp,
        f: p.f.as_ref(),
        b1_radius: b1,
        b2_radius: b2,
        r_grid: &grid,
        n_samples: cfg.checks.n_samples,
        n_sphere: cfg.checks.n_sphere,
        seed: cfg.checks.seed,
    };
    let reports = CheckRegistry::with_builtins().run_applicable(&ctx)?;
    let mut text = String::new();
    for r in &reports {
        writeln!(text, "{}", report_line(r)).unwrap();
    }
    // one certified condition is enough to fix the block type
    let status = if !reports.iter().any(|r| r.verdict.is_conclusive()) {
        Status::Inconclusive
    } else {
        Status::Success
    };
    Ok(Outcome {
        summary: text,
        artifacts: vec![Artifact::report("conditions", &reports, cfg.output.format)],
        status,
    })
}

#[derive(Debug, Serialize)]
struct CensusSummary {
    n_seeds: usize,
    n_stayers: usize,
    n_exited: usize,
    max_q_norm_stayers: f64,
    stayer_bound_holds: bool,
    #[serde(rename = "T")]
    t_end: f64,
    equilibrium_seeded: bool,
}

#[derive(Debug, Serialize)]
struct BlockReport {
    block: IsolatingBlock,
    radii_check: RadiiCheck,
    g_initial: ConditionReport,
    g_certified: ConditionReport,
    verification: Vec<VerificationReport>,
    census: Option<CensusSummary>,
    valid: bool,
}

pub fn cmd_block(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let (blk, g, certified) = p.block(cfg)?;
    let f = p.f.as_ref();
    let ch = &cfg.checks;
    let mut verification = Vec::with_capacity(ch.homotopy.len());
    for (j, &s) in ch.homotopy.iter().enumerate() {
        let opts = VerifyOptions {
            n_per_stratum: ch.n_per_stratum,
            s,
            dt: None,
            seed: ch.seed.wrapping_add(16 * j as u64),
        };
        verification.push(verify_block(&blk, &p.decomp, &p.basis, f, &opts)?);
    }
    let radii_check = blk.check_radii();
    let mut artifacts = Vec::new();
    let census = if ch.census {
        // seed the census with the equilibrium when Newton finds one inside N
        let eq = equilibrium_solve(
            &p.decomp,
            &p.basis,
            f,
            &p.newton_guess(cfg),
            ch.newton_tol,
            Some(&blk),
        )
        .ok()
        .filter(|e| e.in_block == Some(true));
        let t_end = ch.census_t_end.unwrap_or(50.0 / p.decay.delta);
        let opts = CensusOptions {
            n_initial: ch.census_initial,
            t_end,
            dt: ch.census_dt,
            seed: ch.seed,
            s: 1.0,
            extra_seeds: eq.iter().map(Equilibrium::state).collect(),
        };
        let census = detect_bounded_orbits(&blk, &p.decomp, &p.basis, f, &opts)?;
        let mut csv = Vec::new();
        census.write_csv(&mut csv)?;
        artifacts.push(Artifact::new("census.csv", csv));
        Some(CensusSummary {
            n_seeds: census.entries.len(),
            n_stayers: census.n_stayers,
            n_exited: census.n_exited,
            max_q_norm_stayers: census.max_q_norm_stayers,
            stayer_bound_holds: census.stayer_bound_holds,
            t_end,
            equilibrium_seeded: eq.is_some(),
        })
    } else {
        None
    };
    let valid = radii_check.all()
        && verification.iter().all(|v| v.valid)
        && census.as_ref().is_none_or(|c| c.stayer_bound_holds);
    let mut text = String::new();
    writeln!(text, "{}", report_line(&g)).unwrap();
    writeln!(text, "block type: {:?}", blk.which).unwrap();
    writeln!(
        text,
        "R1 = {:.6}, R2 = {:.6}, R3 = {:.6}, R4 = {:.6}",
        blk.r1, blk.r2, blk.r3, blk.r4
    )
    .unwrap();
    writeln!(text, "radii invariants hold: {}", radii_check.all()).unwrap();
    for v in &verification {
        writeln!(
            text,
            "s = {}: {} sign violations, {} flow violations",
            v.s, v.sign_violations, v.flow_violations
        )
        .unwrap();
    }
    if let Some(c) = &census {
        writeln!(
            text,
            "census: {} of {} seeds stayed, stayer bound holds: {}",
            c.n_stayers, c.n_seeds, c.stayer_bound_holds
        )
        .unwrap();
    }
    writeln!(text, "block valid: {valid}").unwrap();
    let report = BlockReport {
        block: blk,
        radii_check,
        g_initial: g,
        g_certified: certified,
        verification,
        census,
        valid,
    };
    artifacts.insert(0, Artifact::report("block", &report, cfg.output.format));
    Ok(Outcome {
        summary: text,
        artifacts,
        status: if valid {
            Status::Success
        } else {
            Status::NumericalFailure
        },
    })
}

#[derive(Debug, Serialize)]
struct IndexOutput {
    index: IndexReport,
    geometric: ConditionReport,
}

pub fn cmd_index(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let g = p.check_g(cfg)?;
    let which = BlockType::from_verdict(g.verdict)?;
    let index = conley_index(&p.decomp, which)?;
    let mut text = String::new();
    writeln!(text, "{}", report_line(&g)).unwrap();
    writeln!(text, "index: {} = {}", index.formula, index.display).unwrap();
    writeln!(text, "K_infty nonempty: {}", index.nonempty).unwrap();
    let out = IndexOutput {
        index,
        geometric: g,
    };
    Ok(Outcome {
        summary: text,
        artifacts: vec![Artifact::report("index", &out, cfg.output.format)],
        status: Status::Success,
    })
}

#[derive(Debug, Serialize)]
struct TrajectoryOutput {
    seed_index: usize,
    s: f64,
    dt: f64,
    samples: Vec<SampleRecord>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let dy = &cfg.dynamics;
    let runs: Vec<_> = (0..dy.n_trajectories)
        .into_par_iter()
        .map(|j| {
            let z0 = p.initial_state(cfg.checks.seed, j, dy.initial_radius);
            integrate(
                &p.decomp,
                &p.basis,
                p.f.as_ref(),
                z0,
                dy.s,
                dy.t_end,
                dy.dt,
                dy.sample_every,
            )
        })
        .collect::<Result<_, _>>()?;
    let mut text = String::new();
    let mut artifacts = Vec::new();
    for (j, traj) in runs.iter().enumerate() {
        let last = traj.samples.last().expect("trajectory has samples");
        writeln!(
            text,
            "trajectory {j}: t = {:.6}, |z|_E = {:.6e}, |Qz|_E = {:.6e}",
            last.t, last.e_norm, last.q_norm
        )
        .unwrap();
        if cfg.output.format == Format::Csv {
            let mut csv = Vec::new();
            traj.write_csv(&mut csv)?;
            artifacts.push(Artifact::new(format!("trajectory_{j:03}.csv"), csv));
        }
    }
    if cfg.output.format == Format::Json {
        let all: Vec<TrajectoryOutput> = runs
            .into_iter()
            .enumerate()
            .map(|(j, t)| TrajectoryOutput {
                seed_index: j,
                s: t.s,
                dt: t.dt,
                samples: t.samples,
            })
            .collect();
        artifacts.push(Artifact::report("trajectories", &all, Format::Json));
    }
    Ok(Outcome {
        summary: text,
        artifacts,
        status: Status::Success,
    })
}

#[derive(Debug, Serialize)]
struct ProbeRow {
    y0_norm: f64,
    seed_index: usize,
    slope: f64,
    expected_slope: f64,
    relative_error: f64,
    intercept: f64,
    samples_fitted: usize,
    unbounded: bool,
}

pub fn cmd_probe_divergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let ch = &cfg.checks;
    let mode = p.decomp.kernel_modes[0];
    let jobs: Vec<(f64, usize)> = ch
        .probe_norms
        .iter()
        .flat_map(|&n| (0..ch.probe_seeds).map(move |j| (n, j)))
        .collect();
    let rows: Vec<ProbeRow> = jobs
        .into_par_iter()
        .map(|(norm, j)| {
            let mut y0 = vec![0.0; p.decomp.n_modes()];
            y0[mode] = norm;
            let z0 = p.initial_state(ch.seed, j, cfg.dynamics.initial_radius);
            let r = divergence_probe(
                &p.decomp,
                &p.basis,
                &y0,
                &z0,
                ch.probe_t_end,
                cfg.dynamics.dt,
            )?;
            Ok(ProbeRow {
                y0_norm: norm,
                seed_index: j,
                slope: r.slope,
                expected_slope: r.expected_slope,
                relative_error: r.relative_error,
                intercept: r.intercept,
                samples_fitted: r.samples_fitted,
                unbounded: r.unbounded,
            })
        })
        .collect::<Result<_, CoreError>>()?;
    let mut text = String::new();
    for &norm in &ch.probe_norms {
        let group: Vec<&ProbeRow> = rows.iter().filter(|r| r.y0_norm == norm).collect();
        let mean = group.iter().map(|r| r.slope).sum::<f64>() / group.len() as f64;
        let worst = group.iter().map(|r| r.relative_error).fold(0.0, f64::max);
        writeln!(
            text,
            "|y0|_H = {norm}: mean slope {mean:.8} (expected {:.8}), worst relative error {worst:.3e}",
            norm * norm
        )
        .unwrap();
    }
    Ok(Outcome {
        summary: text,
        artifacts: vec![Artifact::report("probe", &rows, cfg.output.format)],
        status: Status::Success,
    })
}

#[derive(Debug, Serialize)]
struct EquilibriumOutput {
    equilibrium: Equilibrium,
    /// Residual of `-x*`; equal to the residual of `x*` for odd `f`.
    mirrored_residual: f64,
    block_available: bool,
}

pub fn cmd_equilibrium(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let f = p.f.as_ref();
    let blk = match p.block(cfg) {
        Ok((blk, _, _)) => Some(blk),
        // no block: report the equilibrium without the membership test
        Err(CliError::Core(CoreError::Inconclusive(_) | CoreError::NotCertified(_))) => None,
        Err(e) => return Err(e),
    };
    let tol = cfg.checks.newton_tol;
    let eq = equilibrium_solve(
        &p.decomp,
        &p.basis,
        f,
        &p.newton_guess(cfg),
        tol,
        blk.as_ref(),
    )?;
    let minus: Vec<f64> = eq.x.iter().map(|v| -v).collect();
    let mirrored = equilibrium_solve(&p.decomp, &p.basis, f, &minus, tol, None)?;
    let mut text = String::new();
    writeln!(
        text,
        "residual = {:.3e} after {} iterations",
        eq.residual, eq.iterations
    )
    .unwrap();
    writeln!(text, "|x*|_E = {:.6}", eq.e_norm).unwrap();
    match eq.in_block {
        Some(b) => writeln!(text, "in block: {b}").unwrap(),
        None => writeln!(text, "in block: unknown (no certified block)").unwrap(),
    }
    writeln!(text, "unstable dimension = {}", eq.unstable_dim).unwrap();
    writeln!(text, "residual at -x* = {:.3e}", mirrored.residual).unwrap();
    let out = EquilibriumOutput {
        mirrored_residual: mirrored.residual,
        block_available: blk.is_some(),
        equilibrium: eq,
    };
    Ok(Outcome {
        summary: text,
        artifacts: vec![Artifact::report("equilibrium", &out, cfg.output.format)],
        status: Status::Success,
    })
}

#[derive(Debug, Serialize)]
struct ConnectOutput {
    criteria: ConnectReport,
    landesman_lazer: Option<ConditionReport>,
    strong_resonance: Option<ConditionReport>,
    probe: Option<Vec<ProbeOutcome>>,
}

pub fn cmd_connect(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = Problem::build(cfg)?;
    let f = p.f.as_ref();
    let registry = CheckRegistry::with_builtins();
    let (b1, b2) = p.balls(cfg);
    let grid = cfg.r_grid();
    let ctx = CheckContext {
        basis: &p.basis,
        decomp: &p.decomp,
        f,
        b1_radius: b1,
        b2_radius: b2,
        r_grid: &grid,
        n_samples: cfg.checks.n_samples,
        n_sphere: cfg.checks.n_sphere,
        seed: cfg.checks.seed,
    };
    let run = |name: &str| -> Result<Option<ConditionReport>, CliError> {
        let check = registry.get(name)?;
        if check.applicable(f) {
            Ok(Some(check.run(&ctx)?))
        } else {
            Ok(None)
        }
    };
    let ll = run("LL")?;
    let sr = run("SR")?;
    let verdict = |r: &Option<ConditionReport>| r.as_ref().map(|r| r.verdict);
    let criteria = connecting_orbit_criteria(
        &p.decomp,
        f,
        verdict(&ll),
        verdict(&sr),
        cfg.dynamics.snap_tol,
    )?;
    let probe = if cfg.checks.connect_probe {
        let (blk, _, _) = p.block(cfg)?;
        Some(connect_probe(
            &p.decomp,
            &p.basis,
            f,
            &blk,
            cfg.checks.connect_eps,
            cfg.checks.connect_t_end,
            cfg.dynamics.dt,
        )?)
    } else {
        None
    };
    let mut text = String::new();
    for r in ll.iter().chain(sr.iter()) {
        writeln!(text, "{}", report_line(r)).unwrap();
    }
    writeln!(
        text,
        "lambda + nu = {:.6} (level {})",
        criteria.lambda_plus_nu, criteria.level
    )
    .unwrap();
    if criteria.matched.is_empty() {
        writeln!(text, "matched clauses: none").unwrap();
    } else {
        writeln!(text, "matched clauses: {}", criteria.matched.join(", ")).unwrap();
    }
    writeln!(text, "conclusion: {}", criteria.conclusion).unwrap();
    if let Some(outcomes) = &probe {
        let n = outcomes.iter().filter(|o| o.nonzero_stayer).count();
        writeln!(
            text,
            "probe: {n} of {} launches ended at a nonzero stayer",
            outcomes.len()
        )
        .unwrap();
    }
    let status = if ![&ll, &sr]
        .iter()
        .any(|r| r.as_ref().is_some_and(|r| r.verdict.is_conclusive()))
    {
        Status::Inconclusive
    } else {
        Status::Success
    };
    let out = ConnectOutput {
        criteria,
        landesman_lazer: ll,
        strong_resonance: sr,
        probe,
    };
    Ok(Outcome {
        summary: text,
        artifacts: vec![Artifact::report("connect", &out, cfg.output.format)],
        status,
    })
}
