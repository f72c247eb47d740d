use rayon::prelude::*;

use super::{ConditionReport, Verdict, WorstCase, RHO_FACTOR};
use crate::error::{Error, Result};
use crate::sampling;
use crate::semiflow::{nemitskii, Nonlinearity};
use crate::spectral::{ModeClass, ResonanceDecomposition, SpectralBasis};

pub const SR_S_MIN: f64 = 1e-3;
pub const SR_S_MAX: f64 = 1e6;
const SR_POINTS: usize = 181;

/// 16 geometric radii spanning `[1, 1e3]`.
pub fn default_r_grid() -> Vec<f64> {
    (0..16).map(|j| 10f64.powf(3.0 * j as f64 / 15.0)).collect()
}

/// Unit kernel directions: `+-e_k` for a one-dimensional kernel, otherwise a
/// seeded sample of the unit sphere together with the antipodes.
fn kernel_directions(decomp: &ResonanceDecomposition, n_sphere: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = decomp.n_modes();
    let kdim = decomp.kernel_dim();
    let embed = |v: &[f64]| {
        let mut out = vec![0.0; n];
        for (j, &i) in decomp.kernel_modes.iter().enumerate() {
            out[i] = v[j];
        }
        out
    };
    if kdim == 1 {
        return vec![embed(&[1.0]), embed(&[-1.0])];
    }
    let mut rng = sampling::rng(seed);
    let mut dirs = Vec::new();
    for _ in 0..n_sphere.div_ceil(2).max(1) {
        let v = sampling::unit_sphere(&mut rng, kdim);
        let w: Vec<f64> = v.iter().map(|a| -a).collect();
        dirs.push(embed(&v));
        dirs.push(embed(&w));
    }
    dirs
}

/// `I(u) = int_{u>0} f_+ u + int_{u<0} f_- u` over unit kernel elements `u`.
pub fn check_ll(
    basis: &SpectralBasis,
    decomp: &ResonanceDecomposition,
    f: &dyn Nonlinearity,
    n_sphere: usize,
) -> Result<ConditionReport> {
    if decomp.kernel_dim() == 0 {
        return Err(Error::InvalidArgument(
            "LL check needs a nonzero kernel".into(),
        ));
    }
    let grid = basis.grid();
    let mut f_plus = Vec::with_capacity(grid.len());
    let mut f_minus = Vec::with_capacity(grid.len());
    for &x in grid {
        f_plus.push(f.f_plus(x).ok_or_else(|| missing(f, "the limit f_+"))?);
        f_minus.push(f.f_minus(x).ok_or_else(|| missing(f, "the limit f_-"))?);
    }
    let dirs = kernel_directions(decomp, n_sphere, 0);
    let values: Vec<f64> = dirs
        .iter()
        .map(|d| {
            let u = basis.synthesize(d);
            let integrand: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    if v > 0.0 {
                        f_plus[j] * v
                    } else if v < 0.0 {
                        f_minus[j] * v
                    } else {
                        0.0
                    }
                })
                .collect();
            basis.integrate(&integrand)
        })
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let verdict = if lo > 0.0 {
        Verdict::LL1
    } else if hi < 0.0 {
        Verdict::LL2
    } else {
        Verdict::Inconclusive
    };
    let (worst_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("at least two directions");
    let margin = values[worst_idx].abs();
    let mut rep = ConditionReport::new("LL", verdict);
    rep.margin = if verdict.is_conclusive() { margin } else { 0.0 };
    rep.rho = if verdict.is_conclusive() {
        RHO_FACTOR * margin
    } else {
        0.0
    };
    rep.samples_used = dirs.len();
    rep.integral = Some(values[worst_idx]);
    rep.worst_case = Some(WorstCase {
        sample_index: worst_idx,
        radius: None,
        x_hat: dirs[worst_idx].clone(),
        y: Vec::new(),
        z: Vec::new(),
        value: values[worst_idx],
    });
    Ok(rep)
}

/// Sign of `int f_inf` together with a sampled one-sided bound on `f(x, s) s`.
pub fn check_sr(basis: &SpectralBasis, f: &dyn Nonlinearity) -> Result<ConditionReport> {
    let grid = basis.grid();
    let mut f_inf = Vec::with_capacity(grid.len());
    for &x in grid {
        f_inf.push(
            f.f_infinity(x)
                .ok_or_else(|| missing(f, "the limit f_inf"))?,
        );
    }
    let integral = basis.integrate(&f_inf);
    let ratio = (SR_S_MAX / SR_S_MIN).ln();
    let s_grid: Vec<f64> = (0..SR_POINTS)
        .map(|j| SR_S_MIN * (ratio * j as f64 / (SR_POINTS - 1) as f64).exp())
        .flat_map(|s| [s, -s])
        .collect();
    let (mut inf, mut sup) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in grid {
        for &s in &s_grid {
            let v = f.eval(x, s) * s;
            inf = inf.min(v);
            sup = sup.max(v);
        }
    }
    let verdict = if integral > 0.0 && inf.is_finite() {
        Verdict::SR1
    } else if integral < 0.0 && sup.is_finite() {
        Verdict::SR2
    } else {
        Verdict::Inconclusive
    };
    let mut rep = ConditionReport::new("SR", verdict);
    if verdict.is_conclusive() {
        rep.margin = integral.abs();
        rep.rho = RHO_FACTOR * integral.abs();
    }
    rep.samples_used = grid.len() * s_grid.len();
    rep.integral = Some(integral);
    rep.minorant = Some(if verdict == Verdict::SR2 { sup } else { inf });
    Ok(rep)
}

struct GSample {
    x_hat: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

fn draw_g_samples(
    decomp: &ResonanceDecomposition,
    b1: f64,
    b2: f64,
    n_samples: usize,
    seed: u64,
) -> Vec<GSample> {
    let n = decomp.n_modes();
    let complement: Vec<usize> = (0..n)
        .filter(|&i| decomp.classes[i] != ModeClass::Kernel)
        .collect();
    let kdim = decomp.kernel_dim();
    let mut rng = sampling::rng(seed);
    (0..n_samples)
        .map(|j| {
            let mut x_hat = vec![0.0; n];
            let dir = if kdim == 1 {
                vec![if j % 2 == 0 { 1.0 } else { -1.0 }]
            } else {
                sampling::unit_sphere(&mut rng, kdim)
            };
            let scaled = sampling::uniform_ball(&mut rng, complement.len(), b1);
            let zk = sampling::uniform_ball(&mut rng, kdim, b2);
            let mut y = vec![0.0; n];
            for (v, &i) in scaled.iter().zip(&complement) {
                y[i] = v / decomp.weight(i);
            }
            let mut z = vec![0.0; n];
            for (j, &i) in decomp.kernel_modes.iter().enumerate() {
                x_hat[i] = dir[j];
                z[i] = zk[j];
            }
            GSample { x_hat, y, z }
        })
        .collect()
}

/// Sampled check of `<F(R x + y), R x + z> > rho` (G1) or `< -rho` (G2).
///
/// Draws `n_samples` triples: `x` on the unit sphere of the kernel, `y` in
/// the `alpha`-ball of radius `b1_radius` in the complement and `z` in the
/// `L^2` ball of radius `b2_radius` in the kernel. The certified radius `R3`
/// is the smallest grid radius from which the sign holds at every larger
/// grid radius, and `rho` is `0.9` times the smallest margin over that tail.
#[allow(clippy::too_many_arguments)]
pub fn check_g(
    basis: &SpectralBasis,
    decomp: &ResonanceDecomposition,
    f: &dyn Nonlinearity,
    b1_radius: f64,
    b2_radius: f64,
    r_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ConditionReport> {
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("R grid is empty".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "R grid must be positive and increasing".into(),
        ));
    }
    if decomp.kernel_dim() == 0 {
        return Err(Error::InvalidArgument(
            "G check needs a nonzero kernel".into(),
        ));
    }
    if !(b1_radius > 0.0 && b2_radius > 0.0) {
        return Err(Error::InvalidArgument("ball radii must be positive".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let samples = draw_g_samples(decomp, b1_radius, b2_radius, n_samples, seed);
    let kernel = &decomp.kernel_modes;
    // values[j][r]
    let values: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|smp| {
            r_grid
                .iter()
                .map(|&r| {
                    let arg: Vec<f64> = smp
                        .x_hat
                        .iter()
                        .zip(&smp.y)
                        .map(|(xh, y)| r * xh + y)
                        .collect();
                    let fv = nemitskii(basis, f, &arg);
                    kernel
                        .iter()
                        .map(|&i| fv[i] * (r * smp.x_hat[i] + smp.z[i]))
                        .sum()
                })
                .collect()
        })
        .collect();
    let nr = r_grid.len();
    let col_min: Vec<f64> = (0..nr)
        .map(|r| values.iter().map(|v| v[r]).fold(f64::INFINITY, f64::min))
        .collect();
    let col_max: Vec<f64> = (0..nr)
        .map(|r| {
            values
                .iter()
                .map(|v| v[r])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    // smallest index from which the sign condition holds on the whole tail
    let tail_start = |ok: &dyn Fn(usize) -> bool| -> Option<usize> {
        if !ok(nr - 1) {
            return None;
        }
        let mut start = nr - 1;
        while start > 0 && ok(start - 1) {
            start -= 1;
        }
        Some(start)
    };
    let g1 = tail_start(&|r| col_min[r] > 0.0);
    let g2 = tail_start(&|r| col_max[r] < 0.0);
    let (verdict, start, signed) = match (g1, g2) {
        (Some(s), _) => (Verdict::G1, s, 1.0),
        (None, Some(s)) => (Verdict::G2, s, -1.0),
        (None, None) => (Verdict::Inconclusive, 0, 1.0),
    };
    let mut rep = ConditionReport::new("G", verdict);
    rep.samples_used = n_samples * nr;
    rep.seed = Some(seed);
    // worst sample over the certified tail (the whole grid if inconclusive)
    let mut worst = (0usize, start, f64::INFINITY);
    for (j, v) in values.iter().enumerate() {
        for (r, &d) in v.iter().enumerate().skip(start) {
            if signed * d < worst.2 {
                worst = (j, r, signed * d);
            }
        }
    }
    if verdict.is_conclusive() {
        rep.r3 = Some(r_grid[start]);
        rep.margin = worst.2;
        rep.rho = RHO_FACTOR * worst.2;
    } else {
        rep.margin = worst.2.min(0.0);
    }
    let smp = &samples[worst.0];
    rep.worst_case = Some(WorstCase {
        sample_index: worst.0,
        radius: Some(r_grid[worst.1]),
        x_hat: smp.x_hat.clone(),
        y: smp.y.clone(),
        z: smp.z.clone(),
        value: values[worst.0][worst.1],
    });
    Ok(rep)
}

fn missing(f: &dyn Nonlinearity, what: &'static str) -> Error {
    Error::MissingAsymptotics {
        name: f.name().to_string(),
        what,
    }
}
