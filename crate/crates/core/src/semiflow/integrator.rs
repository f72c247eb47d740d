use std::io::{self, Write};
use std::ops::ControlFlow;

use serde::Serialize;

use super::{homotopy_field, kernel_coordinates, Nonlinearity, StateE};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::spectral::{fmt_f64, ResonanceDecomposition, SpectralBasis};

pub const TRAJECTORY_HEADER: &str = "t,Enorm,Qnorm,w1_norm,w2_norm,phi_functional";

const MONITOR_EVERY: usize = 50;
const MONITOR_TOL: f64 = 1e-3;

/// Per-mode propagators `(exp(-B h), int_0^h exp(-B r) dr)`.
fn propagators(decomp: &ResonanceDecomposition, h: f64) -> Vec<(Mat2, Mat2)> {
    decomp
        .blocks
        .iter()
        .map(|b| b.scale(-1.0).exp_and_integral(h))
        .collect()
}

/// Exponential midpoint integrator for `w' = -B w + (0, G(s, x))`, mode by
/// mode, with the nonlinear term frozen at a midpoint predictor.
pub struct Integrator<'a> {
    decomp: &'a ResonanceDecomposition,
    basis: &'a SpectralBasis,
    f: &'a dyn Nonlinearity,
    s: f64,
    dt: f64,
    full: Vec<(Mat2, Mat2)>,
    half: Vec<(Mat2, Mat2)>,
    quarter: Vec<(Mat2, Mat2)>,
    monitor_every: usize,
}

impl<'a> Integrator<'a> {
    pub fn new(
        decomp: &'a ResonanceDecomposition,
        basis: &'a SpectralBasis,
        f: &'a dyn Nonlinearity,
        s: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!(
                "homotopy parameter must lie in [0, 1], got {s}"
            )));
        }
        if basis.n_modes() != decomp.n_modes() {
            return Err(Error::InvalidArgument(
                "basis and decomposition disagree on n_modes".into(),
            ));
        }
        Ok(Integrator {
            decomp,
            basis,
            f,
            s,
            dt,
            full: propagators(decomp, dt),
            half: propagators(decomp, dt / 2.0),
            quarter: propagators(decomp, dt / 4.0),
            monitor_every: MONITOR_EVERY,
        })
    }

    /// Runs the step-halving comparison every `every` steps (0 disables it).
    pub fn with_monitor(mut self, every: usize) -> Self {
        self.monitor_every = every;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn field(&self, x: &[f64]) -> Vec<f64> {
        homotopy_field(self.decomp, self.basis, self.f, self.s, x)
    }

    fn advance(&self, z: &StateE, outer: &[(Mat2, Mat2)], inner: &[(Mat2, Mat2)]) -> StateE {
        let propagate = |z: &StateE, g: &[f64], table: &[(Mat2, Mat2)]| {
            let mut out = StateE::zeros(z.len());
            for i in 0..z.len() {
                let (e, phi) = &table[i];
                let [x, y] = e.apply([z.x[i], z.y[i]]);
                out.x[i] = x + phi.a12 * g[i];
                out.y[i] = y + phi.a22 * g[i];
            }
            out
        };
        let g0 = self.field(&z.x);
        let mid = propagate(z, &g0, inner);
        let gm = self.field(&mid.x);
        propagate(z, &gm, outer)
    }

    fn plain_step(&self, z: &StateE) -> StateE {
        self.advance(z, &self.full, &self.half)
    }

    /// One step with the step-halving check.
    pub fn monitored_step(&self, z: &StateE, t: f64) -> Result<StateE> {
        let coarse = self.plain_step(z);
        let fine = {
            let h = self.advance(z, &self.half, &self.quarter);
            self.advance(&h, &self.half, &self.quarter)
        };
        let err = coarse.sub(&fine).e_norm(self.decomp);
        let scale = 1.0 + z.e_norm(self.decomp);
        if !err.is_finite() || err > MONITOR_TOL * scale || !coarse.is_finite() {
            return Err(Error::StepTooLarge { dt: self.dt, t });
        }
        Ok(coarse)
    }

    /// Advances `n_steps` steps. `observe(step, t, state)` is called at the
    /// start, every `sample_every` steps and at the end; returning `Break`
    /// stops the run. Returns the last state and its time.
    pub fn run<C>(
        &self,
        mut state: StateE,
        n_steps: usize,
        sample_every: usize,
        mut observe: C,
    ) -> Result<(StateE, f64)>
    where
        C: FnMut(usize, f64, &StateE) -> ControlFlow<()>,
    {
        let every = sample_every.max(1);
        if observe(0, 0.0, &state).is_break() {
            return Ok((state, 0.0));
        }
        for n in 1..=n_steps {
            let t_prev = (n - 1) as f64 * self.dt;
            state = if self.monitor_every > 0 && (n - 1) % self.monitor_every == 0 {
                self.monitored_step(&state, t_prev)?
            } else {
                self.plain_step(&state)
            };
            if !state.is_finite() {
                return Err(Error::StepTooLarge {
                    dt: self.dt,
                    t: t_prev,
                });
            }
            let t = n as f64 * self.dt;
            if (n % every == 0 || n == n_steps) && observe(n, t, &state).is_break() {
                return Ok((state, t));
            }
        }
        Ok((state, n_steps as f64 * self.dt))
    }
}

/// One monitored step of size `dt`.
pub fn step(
    decomp: &ResonanceDecomposition,
    basis: &SpectralBasis,
    f: &dyn Nonlinearity,
    state: &StateE,
    s: f64,
    dt: f64,
) -> Result<StateE> {
    Integrator::new(decomp, basis, f, s, dt)?.monitored_step(state, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub t: f64,
    pub e_norm: f64,
    pub q_norm: f64,
    pub w1_norm: f64,
    pub w2_norm: f64,
    /// `<u0, c lambda d> + <v0, d>` for the unit kernel direction `d = e_k`.
    pub phi: f64,
}

impl SampleRecord {
    pub fn of(decomp: &ResonanceDecomposition, t: f64, state: &StateE) -> Self {
        let w = kernel_coordinates(decomp, state);
        let cl = decomp.c * decomp.lambda;
        let phi = decomp
            .kernel_modes
            .first()
            .map(|&i| cl * state.x[i] + state.y[i])
            .unwrap_or(0.0);
        SampleRecord {
            t,
            e_norm: state.e_norm(decomp),
            q_norm: state.q_norm(decomp),
            w1_norm: w.w1_norm(),
            w2_norm: w.w2_norm(),
            phi,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub s: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateE>,
    pub samples: Vec<SampleRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &StateE {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for r in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(r.t),
                fmt_f64(r.e_norm),
                fmt_f64(r.q_norm),
                fmt_f64(r.w1_norm),
                fmt_f64(r.w2_norm),
                fmt_f64(r.phi)
            )?;
        }
        Ok(())
    }
}

/// Integrates over `[0, t_end]` with the largest step `<= dt` that divides
/// `t_end`, recording every `sample_every` steps.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    decomp: &ResonanceDecomposition,
    basis: &SpectralBasis,
    f: &dyn Nonlinearity,
    state: StateE,
    s: f64,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "T must be positive, got {t_end}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let n_steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / n_steps as f64;
    let integ = Integrator::new(decomp, basis, f, s, h)?;
    let mut traj = Trajectory {
        s,
        dt: h,
        times: Vec::new(),
        states: Vec::new(),
        samples: Vec::new(),
    };
    integ.run(state, n_steps, sample_every, |_, t, z| {
        traj.times.push(t);
        traj.states.push(z.clone());
        traj.samples.push(SampleRecord::of(decomp, t, z));
        ControlFlow::Continue(())
    })?;
    Ok(traj)
}
