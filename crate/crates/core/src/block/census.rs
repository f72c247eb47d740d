use std::io::{self, Write};
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use super::IsolatingBlock;
use crate::error::{Error, Result};
use crate::sampling;
use crate::semiflow::{state_from_kernel_coords, Integrator, KernelCoords, Nonlinearity, StateE};
use crate::spectral::{fmt_f64, ModeClass, ResonanceDecomposition, SpectralBasis};

pub const CENSUS_HEADER: &str = "seed_index,stayed,exit_time,final_Enorm";

#[derive(Debug, Clone)]
pub struct CensusOptions {
    pub n_initial: usize,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub s: f64,
    /// Seeds integrated after the random ones (for example an equilibrium).
    pub extra_seeds: Vec<StateE>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusEntry {
    pub seed_index: usize,
    pub stayed: bool,
    pub exit_time: Option<f64>,
    pub final_e_norm: f64,
    /// Largest `||Q w(t)||_E` observed while the orbit was in `N`.
    pub max_q_norm: f64,
    #[serde(skip)]
    pub final_state: StateE,
}

#[derive(Debug, Clone, Serialize)]
pub struct Census {
    pub entries: Vec<CensusEntry>,
    pub n_stayers: usize,
    pub n_exited: usize,
    pub max_q_norm_stayers: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    /// Every stayer satisfies `||Q w(t)||_E <= R1` at every sample.
    pub stayer_bound_holds: bool,
    pub t_end: f64,
    pub seed: u64,
}

impl Census {
    pub fn stayers(&self) -> impl Iterator<Item = &CensusEntry> {
        self.entries.iter().filter(|e| e.stayed)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CENSUS_HEADER}")?;
        for e in &self.entries {
            let exit = e.exit_time.map(fmt_f64).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                e.seed_index,
                e.stayed,
                exit,
                fmt_f64(e.final_e_norm)
            )?;
        }
        Ok(())
    }
}

/// Seeds in the interior of `N`: the complement part in the E-ball of
/// radius `R1 / M`, the kernel part uniformly in the chart box.
fn seeds(
    block: &IsolatingBlock,
    decomp: &ResonanceDecomposition,
    n: usize,
    seed: u64,
) -> Vec<StateE> {
    let complement: Vec<usize> = (0..decomp.n_modes())
        .filter(|&i| decomp.classes[i] != ModeClass::Kernel)
        .collect();
    let kdim = decomp.kernel_dim();
    let q_radius = 0.5 * block.r1 / block.decay_m;
    let mut rng = sampling::rng(seed);
    (0..n)
        .map(|_| {
            let xs = sampling::uniform_ball(&mut rng, complement.len(), q_radius);
            let ys = sampling::uniform_ball(&mut rng, complement.len(), q_radius);
            let w = KernelCoords {
                w1: sampling::interior_ball(&mut rng, kdim, block.r4, 1e-3),
                w2: sampling::interior_ball(&mut rng, kdim, block.r2, 1e-3),
            };
            let mut st = state_from_kernel_coords(decomp, &w);
            for (j, &i) in complement.iter().enumerate() {
                st.x[i] = xs[j] / decomp.weight(i);
                st.y[i] = ys[j];
            }
            st
        })
        .collect()
}

/// Integrates seeds from the interior of `N` over `[0, T]` and records which
/// of them stay in `N`. A finite-horizon stand-in for the maximal bounded
/// invariant set.
pub fn detect_bounded_orbits(
    block: &IsolatingBlock,
    decomp: &ResonanceDecomposition,
    basis: &SpectralBasis,
    f: &dyn Nonlinearity,
    opts: &CensusOptions,
) -> Result<Census> {
    if !(opts.t_end > 0.0 && opts.dt > 0.0) {
        return Err(Error::InvalidArgument("T and dt must be positive".into()));
    }
    let mut initial = seeds(block, decomp, opts.n_initial, opts.seed);
    initial.extend(opts.extra_seeds.iter().cloned());
    let n_steps = (opts.t_end / opts.dt - 1e-9).ceil().max(1.0) as usize;
    let h = opts.t_end / n_steps as f64;
    let integ = Integrator::new(decomp, basis, f, opts.s, h)?;
    let entries: Vec<CensusEntry> = initial
        .into_par_iter()
        .enumerate()
        .map(|(idx, z0)| -> Result<CensusEntry> {
            let mut max_q = 0.0f64;
            let mut exit_time = None;
            let (last, _) = integ.run(z0, n_steps, 1, |_, t, z| {
                if block.contains(decomp, z) {
                    max_q = max_q.max(z.q_norm(decomp));
                    ControlFlow::Continue(())
                } else {
                    exit_time = Some(t);
                    ControlFlow::Break(())
                }
            })?;
            Ok(CensusEntry {
                seed_index: idx,
                stayed: exit_time.is_none(),
                exit_time,
                final_e_norm: last.e_norm(decomp),
                max_q_norm: max_q,
                final_state: last,
            })
        })
        .collect::<Result<_>>()?;
    let n_stayers = entries.iter().filter(|e| e.stayed).count();
    let max_q_norm_stayers = entries
        .iter()
        .filter(|e| e.stayed)
        .map(|e| e.max_q_norm)
        .fold(0.0, f64::max);
    Ok(Census {
        n_exited: entries.len() - n_stayers,
        n_stayers,
        stayer_bound_holds: max_q_norm_stayers <= block.r1,
        max_q_norm_stayers,
        r1: block.r1,
        t_end: opts.t_end,
        seed: opts.seed,
        entries,
    })
}
