//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance is pinned here, not computed: these are the exit gates of
//! the artifact.

use std::time::Instant;

use admitlab_core::fem::{
    assemble_current, assemble_system, assemble_system_diagonal, solve_neumann,
    AdmittivityField, BoundaryCurrent, Regime,
};
use admitlab_core::geometry::{
    boundary_chart, generate_mesh, inclusion_mask, structured_rectangle, DomainKind,
};
use admitlab_core::oned::{
    non_uniqueness_problem, power_gap_1d, re_im_gap_formulas, Coefficient1d,
};
use admitlab_core::power::{
    bound_check_constant_with, bound_check_variable_with, compute_powers, identity_residuals,
    variable_bound_constants, CoefficientPair,
};
use admitlab_core::reflect::{reflect_even, DiagonalCoefficient};
use admitlab_core::rng::SplitMix64;
use admitlab_core::sizelab::{
    boundary_half_disc_cases, concentric_disc_cases, fit_size_law, quasi_one_d,
    run_inclusion_sweep, SweepGates, SweepRecord,
};
use admitlab_core::ucp::{
    doubling_ratio_analytic, frequency_of_current, frequency_profile_analytic, lps_scan,
    three_spheres_analytic, HarmonicMonomial,
};
use admitlab_core::C64;

fn pass(number: u32, name: &str) {
    println!("ACCEPTANCE {number:02} {name}: PASS");
}

fn two_mode_current(chart: &admitlab_core::geometry::BoundaryChart) -> BoundaryCurrent {
    BoundaryCurrent::from_modes(chart, &[(1, C64::new(1.0, 0.0)), (2, C64::new(0.7, 0.3))])
        .unwrap()
}

/// Criterion 1: all constant-pair identity residuals at resolution 32 stay
/// below 1e-9, within the runtime budget.
#[test]
fn acceptance_01_identity_exactness() {
    let start = Instant::now();
    let mesh = generate_mesh(DomainKind::UnitSquare, 32).unwrap();
    let chart = boundary_chart(&mesh).unwrap();
    let mask = inclusion_mask(&mesh, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.04);
    let background = AdmittivityField::constant(&mesh, C64::new(1.0, 0.0), 1.0 / 5f64.sqrt())
        .unwrap()
        .with_regime(Regime::ConstantPair);
    let perturbed = background
        .with_inclusion(&mesh, &mask, |_| C64::new(2.0, 1.0))
        .unwrap();
    let h = two_mode_current(&chart);
    let load = assemble_current(&mesh, &chart, &h).unwrap();
    let u0 = solve_neumann(&assemble_system(&mesh, &background).unwrap(), &load).unwrap();
    let u1 = solve_neumann(&assemble_system(&mesh, &perturbed).unwrap(), &load).unwrap();
    let pair = CoefficientPair::new(background, perturbed).unwrap();
    let ledger = identity_residuals(&mesh, &u0, &u1, &load, &pair, &mask).unwrap();
    for name in ["id1", "id2", "id3", "id4", "loc", "id1c", "id2c", "id3c", "id4c"] {
        let entry = ledger.residual(name).unwrap();
        assert!(entry.applicable, "{name} must be applicable");
        assert!(entry.residual <= 1e-9, "{name}: residual {}", entry.residual);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(1, "identity exactness (constant pair)");
}

/// Criterion 2: the real-background identities hold to 1e-9 for a Lipschitz
/// σ₀ and a fully complex inclusion.
#[test]
fn acceptance_02_real_background_identities() {
    let mesh = generate_mesh(DomainKind::UnitSquare, 32).unwrap();
    let chart = boundary_chart(&mesh).unwrap();
    let mask = inclusion_mask(&mesh, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.04);
    let background =
        AdmittivityField::from_fn(&mesh, |p| C64::new(1.0 + 0.3 * p[0], 0.0), 1.0 / 1.3)
            .unwrap()
            .with_regime(Regime::RealBackground)
            .with_lipschitz(0.3);
    let perturbed = background
        .with_inclusion(&mesh, &mask, |p| C64::new(2.0 + 0.3 * p[0], 0.5))
        .unwrap();
    let h = two_mode_current(&chart);
    let load = assemble_current(&mesh, &chart, &h).unwrap();
    let u0 = solve_neumann(&assemble_system(&mesh, &background).unwrap(), &load).unwrap();
    let u1 = solve_neumann(&assemble_system(&mesh, &perturbed).unwrap(), &load).unwrap();
    let pair = CoefficientPair::new(background, perturbed).unwrap();
    let ledger = identity_residuals(&mesh, &u0, &u1, &load, &pair, &mask).unwrap();
    for name in ["id1s", "id2s", "id3s"] {
        let entry = ledger.residual(name).unwrap();
        assert!(entry.applicable, "{name} must be applicable");
        assert!(entry.residual <= 1e-9, "{name}: residual {}", entry.residual);
    }
    pass(2, "real-background identities");
}

/// Criterion 3: the constant-pair chain with the formula constants at c₀ = 1
/// holds in all 20 sweep cases with 1e-9·scale slack only.
#[test]
fn acceptance_03_constant_bound_sweep() {
    let mesh = generate_mesh(DomainKind::UnitSquare, 32).unwrap();
    let chart = boundary_chart(&mesh).unwrap();
    let h = two_mode_current(&chart);
    let load = assemble_current(&mesh, &chart, &h).unwrap();
    let mut cases = 0;
    for (mu0, n_radii) in [(0.5, 7usize), (1.0, 7), (2.0, 6)] {
        // |γ₁ - γ₀| = μ₀ exactly, with a complex direction.
        let gamma1 = C64::new(1.0 + 0.8 * mu0, 0.6 * mu0);
        let c0_data = (1.0 / gamma1.norm()).min(1.0);
        let background = AdmittivityField::constant(&mesh, C64::new(1.0, 0.0), c0_data)
            .unwrap()
            .with_regime(Regime::ConstantPair);
        for i in 0..n_radii {
            let r = 0.05 + (0.30 - 0.05) * i as f64 / (n_radii - 1) as f64;
            let mask =
                inclusion_mask(&mesh, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < r * r);
            let perturbed = background
                .with_inclusion(&mesh, &mask, |_| gamma1)
                .unwrap();
            let u0 =
                solve_neumann(&assemble_system(&mesh, &background).unwrap(), &load).unwrap();
            let u1 =
                solve_neumann(&assemble_system(&mesh, &perturbed).unwrap(), &load).unwrap();
            let pair = CoefficientPair::new(background.clone(), perturbed).unwrap();
            let report = compute_powers(&mesh, &u0, &u1, &load, &pair, &mask).unwrap();
            let check = bound_check_constant_with(&report, 1.0, mu0).unwrap();
            assert!(
                check.holds,
                "μ₀ = {mu0}, r = {r}: {:.4e} ≤ {:.4e} ≤ {:.4e} failed",
                check.lower, check.mid, check.upper
            );
            cases += 1;
        }
    }
    assert_eq!(cases, 20);
    pass(3, "constant-pair bound chain, 20/20");
}

/// Criterion 4: the variable-coefficient chain with K₁ = c₀³/(2(2+c₀²)),
/// K₂ = 2(1/(μ₀c₀²)+1/μ₀+1/c₀) at c₀ = 1 (K₁ = 1/6) holds in 10
/// real-background cases.
#[test]
fn acceptance_04_variable_bound_sweep() {
    let (k1, _) = variable_bound_constants(1.0, 1.0);
    assert!((k1 - 1.0 / 6.0).abs() < 1e-15);
    let mesh = generate_mesh(DomainKind::UnitSquare, 32).unwrap();
    let chart = boundary_chart(&mesh).unwrap();
    let h = two_mode_current(&chart);
    let load = assemble_current(&mesh, &chart, &h).unwrap();
    let background =
        AdmittivityField::from_fn(&mesh, |p| C64::new(1.0 + 0.3 * p[0], 0.0), 1.0 / 1.3)
            .unwrap()
            .with_regime(Regime::RealBackground)
            .with_lipschitz(0.3);
    let u0 = solve_neumann(&assemble_system(&mesh, &background).unwrap(), &load).unwrap();
    for i in 0..10 {
        let r = 0.08 + 0.022 * i as f64;
        let cx = 0.35 + 0.03 * i as f64;
        let mask =
            inclusion_mask(&mesh, |p| (p[0] - cx).powi(2) + (p[1] - 0.5).powi(2) < r * r);
        // γ₁ = σ₀ + 1 + 0.5i: σ₁-σ₀ = 1 ≥ μ₀ = 1 (and |ε₁| = 0.5).
        let perturbed = background
            .with_inclusion(&mesh, &mask, |p| C64::new(2.0 + 0.3 * p[0], 0.5))
            .unwrap();
        let u1 = solve_neumann(&assemble_system(&mesh, &perturbed).unwrap(), &load).unwrap();
        let pair = CoefficientPair::new(background.clone(), perturbed).unwrap();
        assert!((pair.variable_mu0(&mask).unwrap() - 1.0).abs() < 1e-12);
        let report = compute_powers(&mesh, &u0, &u1, &load, &pair, &mask).unwrap();
        let check = bound_check_variable_with(&report, 1.0, 1.0).unwrap();
        assert!(check.holds, "case {i}: {check:?}");
    }
    pass(4, "variable bound chain with explicit constants, 10/10");
}

/// Criterion 5: the quasi-1D square configuration converges to the
/// closed-form gap at second order.
#[test]
fn acceptance_05_one_d_oracle_convergence() {
    let gamma0 = Coefficient1d::affine(C64::new(1.0, 0.0), C64::new(0.25, 0.0));
    let gamma1 = Coefficient1d::affine(C64::new(2.0, 0.5), C64::new(0.25, 0.0));
    let run = |res: u32| {
        quasi_one_d(res, &gamma0, &gamma1, 0.25, 0.5, C64::new(1.0, 0.0)).unwrap()
    };
    let coarse = run(64);
    let fine = run(128);
    assert!(
        fine.relative_error <= 0.01,
        "relative error at 128: {}",
        fine.relative_error
    );
    let err64 = (coarse.delta_w_fem - coarse.delta_w_closed_form).norm();
    let err128 = (fine.delta_w_fem - fine.delta_w_closed_form).norm();
    let ratio = err64 / err128;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "error ratio {ratio} outside [3.5, 4.5]"
    );
    pass(5, "quasi-1D gap matches the closed form at O(h²)");
}

/// Criterion 6: the non-uniqueness pair hides the inclusion, and the
/// real/imaginary closed forms match the quadrature gap on random intervals.
#[test]
fn acceptance_06_non_uniqueness_example() {
    let p = non_uniqueness_problem(-0.5, 0.5, C64::new(1.0, 0.0)).unwrap();
    let dw = power_gap_1d(&p).unwrap();
    assert!(dw.norm() <= 1e-12, "|δW| = {}", dw.norm());
    let mut rng = SplitMix64::new(0x06AC);
    for _ in 0..10 {
        let a = rng.next_range(-0.95, 0.8);
        let b = rng.next_range(a + 0.02, 0.98);
        let q = non_uniqueness_problem(a, b, C64::new(1.0, 0.5)).unwrap();
        let gap = power_gap_1d(&q).unwrap();
        let parts = re_im_gap_formulas(&q).unwrap();
        assert!((parts.re - gap.re).abs() <= 1e-10, "[{a},{b}] re");
        assert!((parts.im - gap.im).abs() <= 1e-10, "[{a},{b}] im");
    }
    pass(6, "non-uniqueness example and closed-form displays");
}

/// Criterion 7: Almgren frequency equals the degree for harmonic monomials.
#[test]
fn acceptance_07_almgren_constancy() {
    let start = Instant::now();
    let radii: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    for k in 1..=6u32 {
        let profile = frequency_profile_analytic(
            &HarmonicMonomial { degree: k },
            [0.0, 0.0],
            &radii,
            256,
        )
        .unwrap();
        for (r, n) in profile.radii.iter().zip(&profile.n) {
            assert!((n - k as f64).abs() <= 1e-2, "k = {k}, r = {r}: N = {n}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(7, "Almgren frequency constancy, degrees 1..6");
}

/// Criterion 8: doubling ratios 4, 16, 64 within 1%.
#[test]
fn acceptance_08_doubling_ratios() {
    for (k, expected) in [(1u32, 4.0), (2, 16.0), (3, 64.0)] {
        let check =
            doubling_ratio_analytic(&HarmonicMonomial { degree: k }, [0.0, 0.0], 0.5, 512)
                .unwrap();
        assert!(
            (check.ratio - expected).abs() / expected <= 1e-2,
            "degree {k}: ratio {}",
            check.ratio
        );
    }
    pass(8, "doubling ratios 4/16/64");
}

/// Criterion 9: three-spheres equality at radii (1, 2, 4) with θ = 1/2.
#[test]
fn acceptance_09_three_spheres_equality() {
    for k in 1..=4u32 {
        let check = three_spheres_analytic(
            &HarmonicMonomial { degree: k },
            [0.0, 0.0],
            (1.0, 2.0, 4.0),
            512,
        )
        .unwrap();
        let theta = check
            .parameters
            .iter()
            .find(|(n, _)| *n == "theta")
            .unwrap()
            .1;
        assert!((theta - 0.5).abs() < 1e-12);
        assert!(
            (check.ratio - 1.0).abs() <= 1e-3,
            "degree {k}: ratio {}",
            check.ratio
        );
    }
    pass(9, "three-spheres equality for monomials");
}

/// Criterion 10: F(mode-1) = 2^{1/4} by Parseval; F ≥ 1 for 50 random
/// band-limited zero-mean currents.
#[test]
fn acceptance_10_boundary_frequency() {
    let mesh = generate_mesh(DomainKind::UnitDisc, 16).unwrap();
    let chart = boundary_chart(&mesh).unwrap();
    let h = BoundaryCurrent::from_modes(&chart, &[(1, C64::new(1.0, 0.0))]).unwrap();
    let f = frequency_of_current(&h, &chart, 512).unwrap();
    assert!((f - 2f64.powf(0.25)).abs() <= 1e-10, "F = {f}");
    let mut rng = SplitMix64::new(0x10FF);
    for _ in 0..50 {
        let mut modes = Vec::new();
        for _ in 0..4 {
            let kappa = 1 + (rng.next_u64() % 24) as i32;
            let sign = if rng.next_f64() < 0.5 { -1 } else { 1 };
            modes.push((
                sign * kappa,
                C64::new(rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)),
            ));
        }
        let h = BoundaryCurrent::from_modes(&chart, &modes).unwrap();
        let f = frequency_of_current(&h, &chart, 512).unwrap();
        assert!(f >= 1.0 - 1e-12, "F = {f}");
    }
    pass(10, "boundary frequency Parseval value and F ≥ 1");
}

/// Criterion 11: the affine-field propagation-of-smallness minimum is the
/// disc area fraction πρ²/|Ω| within 2% at resolution 64.
#[test]
fn acceptance_11_lps_affine_case() {
    let mesh = generate_mesh(DomainKind::UnitSquare, 64).unwrap();
    let u = admitlab_core::fem::ComplexField::interpolate(&mesh, |p| C64::new(p[0], 0.0));
    let scan = lps_scan(&mesh, &u, 0.1).unwrap();
    let expected = std::f64::consts::PI * 0.01;
    let rel = (scan.min_ratio - expected).abs() / expected;
    assert!(rel <= 0.02, "min ratio {} off by {rel}", scan.min_ratio);
    pass(11, "LPS affine minimum = πρ²/|Ω|");
}

fn assert_sweep_shape(records: &[SweepRecord], expect_contact: bool, label: &str) {
    for w in records.windows(2) {
        assert!(
            w[1].gap_fraction > w[0].gap_fraction,
            "{label}: gap fraction not strictly monotone"
        );
    }
    assert!(records.iter().all(|r| r.boundary_contact == expect_contact));
    let fit = fit_size_law(records).unwrap();
    assert_eq!(fit.violations, 0, "{label}: violations");
    assert!(fit.c1_emp > 0.0, "{label}: C1");
    assert!((1.0..=8.0).contains(&fit.p_emp), "{label}: p = {}", fit.p_emp);
}

/// Criterion 12: interior and boundary-touching sweeps at resolution 64 both
/// produce feasible fits within the runtime budget.
#[test]
fn acceptance_12_size_law_sweeps() {
    let mesh = generate_mesh(DomainKind::UnitSquare, 64).unwrap();
    let chart = boundary_chart(&mesh).unwrap();
    let background = AdmittivityField::constant(&mesh, C64::new(1.0, 0.0), 1.0 / 5f64.sqrt())
        .unwrap()
        .with_regime(Regime::ConstantPair);
    let radii = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];

    let start = Instant::now();
    let interior = run_inclusion_sweep(
        &mesh,
        &chart,
        &background,
        |_| C64::new(2.0, 1.0),
        &two_mode_current(&chart),
        &concentric_disc_cases(&mesh, [0.5, 0.5], &radii),
        SweepGates::default(),
    )
    .unwrap();
    let interior_time = start.elapsed();
    assert!(interior_time.as_secs_f64() < 60.0, "{interior_time:?}");
    assert_sweep_shape(&interior, false, "interior");

    // Boundary-touching family: current supported on the top edge, half-disc
    // inclusions sitting on the bottom edge.
    let h_arc = BoundaryCurrent::from_modes_on_arc(
        &chart,
        &[(4, C64::new(1.0, 0.0)), (8, C64::new(0.0, 0.7))],
        (2.25, 2.75),
    )
    .unwrap();
    let start = Instant::now();
    let touching = run_inclusion_sweep(
        &mesh,
        &chart,
        &background,
        |_| C64::new(2.0, 1.0),
        &h_arc,
        &boundary_half_disc_cases(&mesh, [0.5, 0.0], &[0.1, 0.15, 0.2, 0.25, 0.3]),
        SweepGates::default(),
    )
    .unwrap();
    let touching_time = start.elapsed();
    assert!(touching_time.as_secs_f64() < 60.0, "{touching_time:?}");
    assert_sweep_shape(&touching, true, "boundary-touching");
    pass(12, "size-law sweeps fit with zero violations");
}

/// Criterion 13: even reflection of a diagonal-Lipschitz half-square solve
/// has weak residual ≤ 1e-8 and doubles the energy exactly.
#[test]
fn acceptance_13_reflection() {
    let n = 32;
    let mesh =
        structured_rectangle([0.0, 0.0], [1.0, 0.5], n, n / 2, DomainKind::UnitSquare, n)
            .unwrap();
    let chart = boundary_chart(&mesh).unwrap();
    let coeff =
        DiagonalCoefficient::from_fn(&mesh, |p| (1.0 + 0.25 * p[0], 1.3 + 0.1 * p[1])).unwrap();
    let h = BoundaryCurrent::per_edge_from_fn(&mesh, &chart, |p| {
        if p[1] > 0.5 - 1e-12 {
            if p[0] < 0.5 {
                C64::new(1.0, 0.4)
            } else {
                C64::new(-1.0, -0.4)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    })
    .unwrap();
    let load = assemble_current(&mesh, &chart, &h).unwrap();
    let system = assemble_system_diagonal(&mesh, &coeff.pairs()).unwrap();
    let u = solve_neumann(&system, &load).unwrap();
    let reflected = reflect_even(&mesh, &u, &coeff).unwrap();
    assert!(
        reflected.weak_residual <= 1e-8,
        "weak residual {}",
        reflected.weak_residual
    );
    let defect = (reflected.doubled_energy - 2.0 * reflected.half_energy).abs()
        / reflected.doubled_energy;
    assert!(defect <= 1e-14, "energy doubling defect {defect}");
    pass(13, "flat-boundary reflection");
}

/// Criterion 14: repeated sweep runs with a fixed config and seed produce
/// byte-identical CSV and JSON artifacts.
#[test]
fn acceptance_14_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("sweep.toml");
    std::fs::write(
        &config_path,
        r#"
[domain]
kind = "unit_square"
resolution = 24

[background]
re = { const = 1.0 }
regime = "constant_pair"

[inclusion]
shape = { random_discs = { count = 4, radius_range = [0.06, 0.16], margin = 0.1 } }
value = { re = { const = 2.0 }, im = { const = 1.0 } }

[current]
modes = [[1, 1.0, 0.0], [2, 0.7, 0.3]]
"#,
    )
    .unwrap();
    let run = |tag: &str| {
        let out = dir.path().join(tag);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_admitlab"))
            .args([
                "sweep",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "42",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        let csv = std::fs::read(format!("{}.sweep.csv", out.display())).unwrap();
        let json = std::fs::read(format!("{}.fit.json", out.display())).unwrap();
        (csv, json)
    };
    let (csv_a, json_a) = run("a");
    let (csv_b, json_b) = run("b");
    assert_eq!(csv_a, csv_b, "CSV bytes differ between runs");
    assert_eq!(json_a, json_b, "JSON bytes differ between runs");
    pass(14, "sweep determinism (byte-identical artifacts)");
}
