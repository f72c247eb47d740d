use dampwave_core::resonance::{
    check_g, check_ll, check_sr, default_r_grid, CheckContext, CheckRegistry, Verdict,
};
use dampwave_core::semiflow::{Arctan, Nonlinearity, RationalDecay, Zero};
use dampwave_core::spectral::{
    build_basis, decompose, EllipticOperator1D, ResonanceDecomposition, SpectralBasis,
};
use proptest::prelude::*;

fn setup(n_grid: usize) -> (SpectralBasis, ResonanceDecomposition) {
    let b = build_basis(&EllipticOperator1D::laplacian(1.0, n_grid), 6).unwrap();
    let d = decompose(&b, b.eigenvalue(0), 1.0, 1e-8).unwrap();
    (b, d)
}

fn examples() -> Vec<Box<dyn Nonlinearity>> {
    vec![
        Box::new(Arctan { sign: 1.0 }),
        Box::new(Arctan { sign: -1.0 }),
        Box::new(RationalDecay { sign: 1.0 }),
        Box::new(RationalDecay { sign: -1.0 }),
    ]
}

#[test]
fn sign_flip_swaps_verdicts() {
    let (b, d) = setup(200);
    let grid = default_r_grid();
    for pair in examples().chunks(2) {
        let (f, g) = (pair[0].as_ref(), pair[1].as_ref());
        let ll = (
            check_ll(&b, &d, f, 2).unwrap(),
            check_ll(&b, &d, g, 2).unwrap(),
        );
        assert_eq!(ll.0.verdict.flipped(), ll.1.verdict);
        if f.f_infinity(0.0).is_some() {
            let sr = (check_sr(&b, f).unwrap(), check_sr(&b, g).unwrap());
            assert_eq!(sr.0.verdict.flipped(), sr.1.verdict);
            assert!(sr.0.verdict.is_conclusive());
        }
        let gv = (
            check_g(&b, &d, f, 2.0, 0.05, &grid, 100, 1).unwrap(),
            check_g(&b, &d, g, 2.0, 0.05, &grid, 100, 1).unwrap(),
        );
        assert_eq!(gv.0.verdict.flipped(), gv.1.verdict);
        assert!(gv.0.verdict.is_conclusive());
    }
}

#[test]
fn landesman_lazer_implies_geometric() {
    let (b, d) = setup(200);
    let grid = default_r_grid();
    for f in examples() {
        let ll = check_ll(&b, &d, f.as_ref(), 2).unwrap();
        if ll.verdict.is_conclusive() && ll.margin > 0.1 {
            let g = check_g(&b, &d, f.as_ref(), 3.0, 0.05, &grid, 200, 2).unwrap();
            let want = if ll.verdict == Verdict::LL1 {
                Verdict::G1
            } else {
                Verdict::G2
            };
            assert_eq!(g.verdict, want, "{}", f.name());
        }
    }
}

#[test]
fn registry_runs_applicable_checks() {
    let (b, d) = setup(100);
    let grid = default_r_grid();
    let reg = CheckRegistry::with_builtins();
    assert_eq!(reg.names(), vec!["LL", "SR", "G"]);
    let ctx = CheckContext {
        basis: &b,
        decomp: &d,
        f: &Arctan { sign: 1.0 },
        b1_radius: 1.0,
        b2_radius: 0.1,
        r_grid: &grid,
        n_samples: 32,
        n_sphere: 2,
        seed: 0,
    };
    let reports = reg.run_applicable(&ctx).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.condition.as_str()).collect();
    assert_eq!(names, vec!["LL", "G"]);
    assert!(reg.get("XY").is_err());
}

#[test]
fn zero_field_is_inconclusive_everywhere() {
    let (b, d) = setup(100);
    assert_eq!(
        check_ll(&b, &d, &Zero, 2).unwrap().verdict,
        Verdict::Inconclusive
    );
    assert_eq!(check_sr(&b, &Zero).unwrap().verdict, Verdict::Inconclusive);
    let g = check_g(&b, &d, &Zero, 1.0, 0.1, &default_r_grid(), 16, 0).unwrap();
    assert_eq!(g.verdict, Verdict::Inconclusive);
}

#[test]
fn report_round_trips_through_json() {
    let (b, d) = setup(100);
    let rep = check_g(
        &b,
        &d,
        &Arctan { sign: 1.0 },
        1.0,
        0.1,
        &default_r_grid(),
        16,
        4,
    )
    .unwrap();
    let text = serde_json::to_string(&rep).unwrap();
    assert!(text.contains("\"R3\""));
    let back: dampwave_core::resonance::ConditionReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certification_is_monotone_in_the_grid(seed in 0u64..1000, b1 in 0.5f64..4.0) {
        let (b, d) = setup(120);
        let grid = default_r_grid();
        let f = Arctan { sign: 1.0 };
        let rep = check_g(&b, &d, &f, b1, 0.05, &grid, 48, seed).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::G1);
        let r3 = rep.r3.unwrap();
        let tail: Vec<f64> = grid.iter().copied().filter(|&r| r >= r3).collect();
        let again = check_g(&b, &d, &f, b1, 0.05, &tail, 48, seed).unwrap();
        prop_assert_eq!(again.verdict, Verdict::G1);
        prop_assert!(again.margin >= rep.rho);
    }
}
