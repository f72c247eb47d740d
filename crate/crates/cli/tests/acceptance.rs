//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed. Oracles (analytic eigenvalues, dense matrix
//! exponentials, a Runge-Kutta reference) live here, not in the library.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::panic;
use std::process::Command as Process;
use std::time::Instant;

use dampwave_cli::{run, Command, Problem, RunConfig};
use dampwave_core::block::{
    detect_bounded_orbits, equilibrium_solve, verify_block, BlockType, CensusOptions, VerifyOptions,
};
use dampwave_core::resonance::{check_ll, check_sr, Verdict};
use dampwave_core::sampling;
use dampwave_core::semiflow::{
    divergence_probe, homotopy_field, integrate, kernel_coordinates, Arctan, ConstantForcing,
    Nonlinearity, RationalDecay, StateE,
};
use dampwave_core::spectral::{
    build_basis, decay_constants, decay_time_grid, decompose, EllipticOperator1D, ModeClass,
    ResonanceDecomposition, SpectralBasis,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn config(k: usize, name: &str) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.dynamics.k = k;
    cfg.nonlinearity.name = name.to_string();
    cfg
}

fn setup(
    n_grid: usize,
    n_modes: usize,
    k: usize,
    c: f64,
) -> (SpectralBasis, ResonanceDecomposition) {
    let b = build_basis(&EllipticOperator1D::laplacian(1.0, n_grid), n_modes).unwrap();
    let d = decompose(&b, b.eigenvalue(k - 1), c, 1e-8).unwrap();
    (b, d)
}

fn spectral_oracle() -> Outcome {
    let b = build_basis(&EllipticOperator1D::laplacian(1.0, 2000), 20).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let exact = ((i + 1) as f64 * PI).powi(2);
        worst = worst.max((b.eigenvalue(i) - exact).abs() / exact);
    }
    ensure(worst <= 1e-4, || {
        format!("worst relative eigenvalue error {worst:e}")
    })?;
    // trapezoidal Gram matrix from the nodal values
    let n = b.n_grid();
    let h = 1.0 / (n - 1) as f64;
    let w = |j: usize| if j == 0 || j == n - 1 { h / 2.0 } else { h };
    let mut gram: f64 = 0.0;
    for i in 0..20 {
        for k in 0..=i {
            let (u, v) = (b.eigenvector(i), b.eigenvector(k));
            let g: f64 = (0..n).map(|j| w(j) * u[j] * v[j]).sum();
            gram = gram.max((g - if i == k { 1.0 } else { 0.0 }).abs());
        }
    }
    ensure(gram <= 1e-10, || format!("Gram deviation {gram:e}"))?;
    Ok(format!(
        "max rel err {worst:.2e}, Gram deviation {gram:.2e}"
    ))
}

/// Roots of `z^2 - tr z + det` as `(re, im)` pairs.
fn block_roots(mu: f64, lambda: f64, c: f64) -> [(f64, f64); 2] {
    // B = [[0, -1], [mu - lambda, c mu]]
    let (tr, det) = (c * mu, mu - lambda);
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [((tr - s) / 2.0, 0.0), ((tr + s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt() / 2.0;
        [(tr / 2.0, -s), (tr / 2.0, s)]
    }
}

fn dichotomy() -> Outcome {
    let mut cases = 0;
    for k in 1..=3 {
        for c in [0.5, 1.0, 2.0] {
            let (_, d) = setup(256, 8, k, c);
            for i in 0..8 {
                let roots = block_roots(d.mu[i], d.lambda, c);
                let neg = roots.iter().filter(|r| r.0 < 0.0).count();
                let pos = roots.iter().filter(|r| r.0 > 0.0).count();
                match d.classes[i] {
                    ModeClass::Plus => ensure(pos == 2, || {
                        format!("k={k} c={c} mode {i}: plus block {roots:?}")
                    })?,
                    ModeClass::Minus => ensure(neg == 1, || {
                        format!("k={k} c={c} mode {i}: minus block {roots:?}")
                    })?,
                    ModeClass::Kernel => ensure(i == k - 1, || format!("k={k}: kernel mode {i}"))?,
                }
            }
            let want = k - 1;
            ensure(d.dim_e_minus() == want && d.d[k - 1] == want, || {
                format!(
                    "k={k} c={c}: dim E_- = {}, d_(k-1) = {}",
                    d.dim_e_minus(),
                    d.d[k - 1]
                )
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (k, c) cases"))
}

fn e_norm_pairs(d: &ResonanceDecomposition, modes: &[usize], v: &[f64]) -> f64 {
    let xs: f64 = modes
        .iter()
        .enumerate()
        .map(|(j, &i)| (d.mu[i].powf(d.alpha) * v[2 * j]).powi(2))
        .sum();
    let ys: f64 = (0..modes.len()).map(|j| v[2 * j + 1].powi(2)).sum();
    xs.sqrt() + ys.sqrt()
}

fn semigroup_decay() -> Outcome {
    let mut checked = 0usize;
    for k in [1, 2, 3] {
        let (_, d) = setup(256, 8, k, 1.0);
        let dc = decay_constants(&d).unwrap();
        let grid = decay_time_grid(dc.delta, d.c * d.mu[7]);
        let hyper: Vec<usize> = (0..8)
            .filter(|&i| d.classes[i] != ModeClass::Kernel)
            .collect();
        let mut rng = sampling::rng(100 + k as u64);
        let zs: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                hyper
                    .iter()
                    .flat_map(|&i| {
                        d.projector_plus(i)
                            .apply([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                    })
                    .collect()
            })
            .collect();
        let mut violations = 0;
        for &t in &grid {
            // dense exp(-tB) per plus block; on a minus block E_+ is the
            // eigenline of the larger root, which decays at that root
            let props: Vec<DMatrix<f64>> = hyper
                .iter()
                .map(|&i| {
                    let m = DMatrix::from_row_slice(
                        2,
                        2,
                        &[0.0, -1.0, d.mu[i] - d.lambda, d.c * d.mu[i]],
                    );
                    (m * -t).exp()
                })
                .collect();
            for z in &zs {
                let mut out = Vec::with_capacity(z.len());
                for (j, &i) in hyper.iter().enumerate() {
                    let v = [z[2 * j], z[2 * j + 1]];
                    if d.classes[i] == ModeClass::Plus {
                        let w = &props[j] * DVector::from_column_slice(&v);
                        out.extend([w[0], w[1]]);
                    } else {
                        let hi = block_roots(d.mu[i], d.lambda, d.c)[1].0;
                        out.extend(v.map(|a| a * (-hi * t).exp()));
                    }
                }
                let lhs = e_norm_pairs(&d, &hyper, &out);
                let rhs = dc.m * (-dc.delta * t).exp() * e_norm_pairs(&d, &hyper, z);
                if lhs > rhs * (1.0 + 1e-12) {
                    violations += 1;
                }
                checked += 1;
            }
        }
        ensure(
            grid.last().unwrap() >= &(50.0 / dc.delta * (1.0 - 1e-12)),
            || "t-grid too short".into(),
        )?;
        ensure(violations == 0, || {
            format!("k={k}: {violations} violations")
        })?;
    }
    Ok(format!("{checked} (z, t) pairs, 0 violations"))
}

/// Classical fourth-order Runge-Kutta on the first-order mode system.
#[allow(clippy::needless_range_loop)]
fn rk4(
    d: &ResonanceDecomposition,
    b: &SpectralBasis,
    f: &dyn Nonlinearity,
    z0: &StateE,
    t_end: f64,
    dt: f64,
) -> StateE {
    let rhs = |z: &StateE| -> StateE {
        let g = homotopy_field(d, b, f, 1.0, &z.x);
        let mut out = StateE::zeros(z.len());
        for i in 0..z.len() {
            out.x[i] = z.y[i];
            out.y[i] = -(d.mu[i] - d.lambda) * z.x[i] - d.c * d.mu[i] * z.y[i] + g[i];
        }
        out
    };
    let n = (t_end / dt).round() as usize;
    let h = t_end / n as f64;
    let mut z = z0.clone();
    for _ in 0..n {
        let k1 = rhs(&z);
        let mut t = z.clone();
        t.axpy(h / 2.0, &k1);
        let k2 = rhs(&t);
        let mut t = z.clone();
        t.axpy(h / 2.0, &k2);
        let k3 = rhs(&t);
        let mut t = z.clone();
        t.axpy(h, &k3);
        let k4 = rhs(&t);
        z.axpy(h / 6.0, &k1);
        z.axpy(h / 3.0, &k2);
        z.axpy(h / 3.0, &k3);
        z.axpy(h / 6.0, &k4);
    }
    z
}

fn integrator_convergence() -> Outcome {
    let (b, d) = setup(256, 8, 1, 1.0);
    let f = Arctan { sign: 1.0 };
    let mut z0 = StateE::zeros(8);
    z0.x[0] = 2.0;
    z0.x[1] = -0.5;
    z0.y[0] = 0.3;
    z0.y[2] = 1.0;
    let dts = [0.04, 0.02, 0.01, 0.005];
    let reference = rk4(&d, &b, &f, &z0, 1.0, dts[3] / 16.0);
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let traj = integrate(&d, &b, &f, z0.clone(), 1.0, 1.0, dt, usize::MAX).unwrap();
            traj.last().sub(&reference).e_norm(&d)
        })
        .collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    ensure(ratios.iter().all(|&r| r >= 3.5), || {
        format!("errors {errs:?}, ratios {ratios:?}")
    })?;
    Ok(format!(
        "ratios {}",
        ratios
            .iter()
            .map(|r| format!("{r:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    ))
}

fn divergence() -> Outcome {
    let (b, d) = setup(256, 8, 1, 1.0);
    let mut worst: f64 = 0.0;
    for norm in [1.0, 2.0] {
        let mut y0 = vec![0.0; 8];
        y0[0] = norm;
        for seed in 0..10u64 {
            let mut rng = sampling::rng(seed);
            let z0 = StateE::new(
                sampling::uniform_ball(&mut rng, 8, 1.0),
                sampling::uniform_ball(&mut rng, 8, 1.0),
            );
            let rep = divergence_probe(&d, &b, &y0, &z0, 10.0, 0.01).map_err(|e| e.to_string())?;
            let rel = (rep.slope - norm * norm).abs() / (norm * norm);
            ensure(rel < 1e-3, || {
                format!("|y0| = {norm}, seed {seed}: slope {}", rep.slope)
            })?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("20 runs, worst relative slope error {worst:.2e}"))
}

fn condition_checkers() -> Outcome {
    let (b, d) = setup(2000, 8, 1, 1.0);
    let ll = check_ll(&b, &d, &Arctan { sign: 1.0 }, 2).unwrap();
    let i = ll.integral.unwrap();
    ensure(
        ll.verdict == Verdict::LL1 && (i - SQRT_2).abs() < 1e-6,
        || format!("arctan: {:?}, I = {i}", ll.verdict),
    )?;
    let ll_neg = check_ll(&b, &d, &Arctan { sign: -1.0 }, 2).unwrap();
    ensure(ll_neg.verdict == Verdict::LL2, || {
        format!("-arctan: {:?}", ll_neg.verdict)
    })?;
    let sr = check_sr(&b, &RationalDecay { sign: 1.0 }).unwrap();
    let j = sr.integral.unwrap();
    ensure(
        sr.verdict == Verdict::SR1 && (j - 1.0).abs() < 1e-10,
        || format!("rational: {:?}, int = {j}", sr.verdict),
    )?;
    let sr_neg = check_sr(&b, &RationalDecay { sign: -1.0 }).unwrap();
    ensure(sr_neg.verdict == Verdict::SR2, || {
        format!("-rational: {:?}", sr_neg.verdict)
    })?;
    ensure(
        ll_neg.verdict == ll.verdict.flipped() && sr_neg.verdict == sr.verdict.flipped(),
        || "sign flip does not swap LL/SR verdicts".into(),
    )?;
    // geometric check through the front end, for all four fields
    let mut g = Vec::new();
    for name in ["arctan", "neg_arctan", "rational_sr", "neg_rational_sr"] {
        let cfg = config(1, name);
        let p = Problem::build(&cfg).unwrap();
        g.push(p.check_g(&cfg).unwrap().verdict);
    }
    ensure(g[0] == Verdict::G1 && g[1] == Verdict::G2, || {
        format!("G verdicts {g:?}")
    })?;
    ensure(g[1] == g[0].flipped() && g[3] == g[2].flipped(), || {
        format!("G sign flip {g:?}")
    })?;
    Ok(format!("I = {i:.9}, int f_inf = {j:.12}, G verdicts {g:?}"))
}

fn block_validity() -> Outcome {
    let cfg = config(1, "arctan");
    let p = Problem::build(&cfg).unwrap();
    let (blk, _, _) = p.block(&cfg).map_err(|e| e.to_string())?;
    let rc = blk.check_radii();
    ensure(rc.all(), || format!("radii invariants {rc:?}"))?;
    ensure(blk.which == BlockType::G1, || {
        format!("block type {:?}", blk.which)
    })?;
    let mut samples = 0;
    for (j, s) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
        let opts = VerifyOptions {
            n_per_stratum: 1000,
            s,
            dt: None,
            seed: 40 + 16 * j as u64,
        };
        let rep = verify_block(&blk, &p.decomp, &p.basis, p.f.as_ref(), &opts).unwrap();
        ensure(rep.sign_violations == 0 && rep.valid, || {
            format!(
                "s = {s}: {} sign, {} flow violations",
                rep.sign_violations, rep.flow_violations
            )
        })?;
        samples += rep.strata.iter().map(|st| st.samples).sum::<usize>();
    }
    Ok(format!(
        "R1 = {:.4}, R2 = {:.5}, R3 = {}, R4 = {:.4}; {samples} boundary samples, 0 violations",
        blk.r1, blk.r2, blk.r3, blk.r4
    ))
}

fn census_bound() -> Outcome {
    let cfg = config(1, "arctan");
    let p = Problem::build(&cfg).unwrap();
    let (blk, _, _) = p.block(&cfg).map_err(|e| e.to_string())?;
    let eq = equilibrium_solve(
        &p.decomp,
        &p.basis,
        p.f.as_ref(),
        &[0.5; 8],
        1e-10,
        Some(&blk),
    )
    .unwrap();
    let opts = CensusOptions {
        n_initial: 32,
        t_end: 50.0 / p.decay.delta,
        dt: 0.01,
        seed: 11,
        s: 1.0,
        extra_seeds: vec![eq.state()],
    };
    let census = detect_bounded_orbits(&blk, &p.decomp, &p.basis, p.f.as_ref(), &opts).unwrap();
    ensure(
        census.n_stayers >= 1 && census.entries.last().unwrap().stayed,
        || "equilibrium did not stay".into(),
    )?;
    for e in census.stayers() {
        ensure(e.max_q_norm <= blk.r1, || {
            format!("stayer {} reached |Qw| = {}", e.seed_index, e.max_q_norm)
        })?;
    }
    // F = y0 on the kernel: |w1| grows at rate a |y0|
    let mut y0 = vec![0.0; 8];
    y0[0] = 1.0;
    let forcing = ConstantForcing::from_coefficients(&p.basis, &y0);
    let t_end = 1.5 * 2.0 * blk.r4 / (blk.a * 1.0);
    let opts = CensusOptions {
        n_initial: 32,
        t_end,
        dt: 0.01,
        seed: 12,
        s: 1.0,
        extra_seeds: vec![StateE::zeros(8)],
    };
    let forced = detect_bounded_orbits(&blk, &p.decomp, &p.basis, &forcing, &opts).unwrap();
    ensure(forced.n_stayers == 0 && forced.n_exited == 33, || {
        format!("constant forcing: {} stayers", forced.n_stayers)
    })?;
    Ok(format!(
        "arctan: {} stayers, max |Qw| {:.2e} <= R1 = {:.3}; constant forcing: all 33 seeds exit by T = {t_end:.1}",
        census.n_stayers, census.max_q_norm_stayers, blk.r1
    ))
}

fn index_exponent(k: usize, name: &str) -> Result<usize, String> {
    let out = run(Command::Index, &config(k, name)).map_err(|e| e.to_string())?;
    ensure(out.summary.contains("K_infty nonempty: true"), || {
        "missing nonempty line".into()
    })?;
    let v: Value = serde_json::from_slice(&out.artifacts[0].bytes).unwrap();
    Ok(v["index"]["exponent"].as_u64().unwrap() as usize)
}

fn index_report() -> Outcome {
    let a1 = index_exponent(1, "arctan")?;
    let n1 = index_exponent(1, "neg_arctan")?;
    let a2 = index_exponent(2, "arctan")?;
    let n2 = index_exponent(2, "neg_arctan")?;
    ensure((a1, n1, a2) == (1, 0, 2), || {
        format!("exponents {a1}, {n1}, {a2}")
    })?;
    ensure(a1 - n1 == 1 && a2 - n2 == 1, || {
        format!("G1 - G2 differences {} and {}", a1 - n1, a2 - n2)
    })?;
    Ok(format!(
        "Sigma^{a1}, Sigma^{n1}, Sigma^{a2}; G1 - G2 = 1 at k = 1, 2"
    ))
}

fn equilibrium() -> Outcome {
    let cfg = config(1, "arctan");
    let p = Problem::build(&cfg).unwrap();
    let (blk, _, _) = p.block(&cfg).map_err(|e| e.to_string())?;
    let f = p.f.as_ref();
    let guess: Vec<f64> = (0..8).map(|i| 0.5 / (i + 1) as f64).collect();
    let eq = equilibrium_solve(&p.decomp, &p.basis, f, &guess, 1e-12, Some(&blk))
        .map_err(|e| e.to_string())?;
    ensure(eq.residual < 1e-8, || format!("residual {:e}", eq.residual))?;
    ensure(eq.in_block == Some(true), || "x* not in N".into())?;
    // strictly inside: kernel box and complement ball with room to spare
    let z = eq.state();
    let w = kernel_coordinates(&p.decomp, &z);
    ensure(
        w.w1_norm() < blk.r4 && w.w2_norm() < blk.r2 && z.q_norm(&p.decomp) < blk.n1_radius(),
        || "x* on the boundary of N".into(),
    )?;
    let neg: Vec<f64> = eq.x.iter().map(|v| -v).collect();
    let mirrored = equilibrium_solve(&p.decomp, &p.basis, f, &neg, 1e-12, None).unwrap();
    ensure(
        mirrored.residual < 1e-8 && (mirrored.residual - eq.residual).abs() <= 1e-12,
        || format!("residuals {:e} vs {:e}", eq.residual, mirrored.residual),
    )?;
    // odd symmetry of the iteration itself
    let minus_guess: Vec<f64> = guess.iter().map(|v| -v).collect();
    let from_minus = equilibrium_solve(&p.decomp, &p.basis, f, &minus_guess, 1e-12, None).unwrap();
    let gap =
        eq.x.iter()
            .zip(&from_minus.x)
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max);
    ensure(gap < 1e-10, || {
        format!("Newton from -x0 does not land on -x*: gap {gap:e}")
    })?;
    Ok(format!(
        "residual {:.1e}, |x*|_E = {:.1e}, residual at -x* {:.1e}, unstable dim {}",
        eq.residual, eq.e_norm, mirrored.residual, eq.unstable_dim
    ))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut outputs = Vec::new();
    for dir in &dirs {
        let mut files = Vec::new();
        for cmd in ["index", "block"] {
            let o = Process::new(env!("CARGO_BIN_EXE_dampwave"))
                .current_dir(dir.path())
                .args([cmd, "--seed", "7", "--out", "out"])
                .output()
                .unwrap();
            ensure(o.status.success(), || {
                format!("{cmd} exited with {:?}", o.status.code())
            })?;
            files.push((format!("{cmd} stdout"), o.stdout));
        }
        let mut names: Vec<_> = fs::read_dir(dir.path().join("out"))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        for n in names {
            let bytes = fs::read(dir.path().join("out").join(&n)).unwrap();
            files.push((n, bytes));
        }
        outputs.push(files);
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    ensure(outputs[0] == outputs[1], || {
        format!("outputs differ among {names:?}")
    })?;
    let total: usize = outputs[0].iter().map(|(_, b)| b.len()).sum();
    Ok(format!("{} outputs, {total} bytes identical", names.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("spectral oracle", spectral_oracle),
        ("decomposition dichotomy", dichotomy),
        ("semigroup decay", semigroup_decay),
        ("integrator convergence", integrator_convergence),
        ("divergence probe", divergence),
        ("condition checkers", condition_checkers),
        ("block validity", block_validity),
        ("census bound", census_bound),
        ("index report", index_report),
        ("equilibrium", equilibrium),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{secs:.1}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.1}s]", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
