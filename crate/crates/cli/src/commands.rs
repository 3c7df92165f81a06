//! Subcommand implementations. Every command computes first and writes all
//! artifacts at the end, so a failing gate leaves no partial outputs.

use std::path::PathBuf;

use admitlab_core::fem::{
    assemble_current, assemble_system, solve_neumann, Regime,
};
use admitlab_core::geometry::DomainKind;
use admitlab_core::oned::{power_gap_1d, re_im_gap_formulas, solve_1d_background, solve_1d_perturbed, OneDProblem};
use admitlab_core::power::{
    bound_check_constant, bound_check_variable, compute_powers, identity_residuals,
    CoefficientPair, IdentityLedger, PowerReport,
};
use admitlab_core::reflect::{reflect_even, DiagonalCoefficient};
use admitlab_core::rng::SplitMix64;
use admitlab_core::sizelab::{
    mask_bound_exponent, fit_size_law, lps_constant, run_inclusion_sweep, SweepGates,
};
use admitlab_core::ucp::{
    boundary_sobolev_norm, doubling_ratio_analytic, doubling_ratio_fem, frequency_of_current,
    frequency_profile_analytic, frequency_profile_fem, mask_bound_constants, oscillation_quotient,
    lps_scan, three_spheres_analytic, three_spheres_fem, Coefficient, FrequencyProfile,
    HarmonicMonomial, UcpCheckResult,
};
use admitlab_core::C64;
use serde::Serialize;

use crate::config::{LoadedConfig, ToleranceOverrides, UcpSpec};
use crate::output::{fmt_f64, mesh_json, solution_json, write_atomic, write_json_report, CsvTable};
use crate::setup::{
    build_background, build_cases, build_current, build_mesh, from_core, inclusion_value, require,
};
use crate::CliError;

pub struct Invocation {
    pub loaded: LoadedConfig,
    pub out_prefix: PathBuf,
    pub seed: u64,
    pub tolerances: ToleranceOverrides,
}

impl Invocation {
    fn out(&self, suffix: &str) -> PathBuf {
        let mut name = self.out_prefix.as_os_str().to_owned();
        name.push(".");
        name.push(suffix);
        PathBuf::from(name)
    }

    fn identity_gate(&self) -> f64 {
        self.tolerances
            .get("identity_gate")
            .or_else(|| {
                self.loaded
                    .config
                    .tolerances
                    .as_ref()
                    .and_then(|t| t.identity_gate)
            })
            .unwrap_or(1e-9)
    }

    fn gap_floor(&self) -> f64 {
        self.tolerances
            .get("gap_floor")
            .or_else(|| {
                self.loaded
                    .config
                    .tolerances
                    .as_ref()
                    .and_then(|t| t.gap_floor)
            })
            .unwrap_or(admitlab_core::sizelab::GAP_FLOOR)
    }
}

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

impl From<C64> for ComplexOut {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct SolveReport {
    n_vertices: usize,
    n_cells: usize,
    bordered_residual_u0: f64,
    bordered_residual_u1: Option<f64>,
    boundary_mean_u0: ComplexOut,
}

/// `solve`: background (and optionally perturbed) Galerkin solution export.
pub fn solve(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let (mesh, chart) = build_mesh(require(&cfg.domain, "domain")?)?;
    let background = build_background(&mesh, require(&cfg.background, "background")?)?;
    let current = build_current(&mesh, &chart, require(&cfg.current, "current")?)?;
    let load = assemble_current(&mesh, &chart, &current).map_err(from_core)?;
    let system = assemble_system(&mesh, &background).map_err(from_core)?;
    let u0 = solve_neumann(&system, &load).map_err(from_core)?;
    let mut u1_out = None;
    let mut res1 = None;
    if let Some(inclusion) = &cfg.inclusion {
        let value = inclusion_value(cfg)?;
        let cases = build_cases(&mesh, inclusion, inv.seed);
        let (_, mask) = cases.first().ok_or_else(|| {
            CliError::Config("inclusion family is empty".into())
        })?;
        let perturbed = background
            .with_inclusion(&mesh, mask, value)
            .map_err(from_core)?;
        let s1 = assemble_system(&mesh, &perturbed).map_err(from_core)?;
        let u1 = solve_neumann(&s1, &load).map_err(from_core)?;
        res1 = Some(s1.bordered_residual(&u1, &load));
        u1_out = Some(u1);
    }
    let report = SolveReport {
        n_vertices: mesh.n_vertices(),
        n_cells: mesh.n_cells(),
        bordered_residual_u0: system.bordered_residual(&u0, &load),
        bordered_residual_u1: res1,
        boundary_mean_u0: u0.boundary_mean(&mesh).into(),
    };
    write_atomic(&inv.out("mesh.json"), &mesh_json(&mesh))?;
    write_atomic(&inv.out("u0.json"), &solution_json(&u0))?;
    if let Some(u1) = u1_out {
        write_atomic(&inv.out("u1.json"), &solution_json(&u1))?;
    }
    write_json_report(&inv.out("solve.json"), &report, &inv.loaded.raw)
}

#[derive(Serialize)]
struct IdentityRow {
    name: String,
    residual: f64,
    applicable: bool,
}

#[derive(Serialize)]
struct PowerOut {
    w0: ComplexOut,
    w1: ComplexOut,
    delta_w: ComplexOut,
    delta_v: Option<ComplexOut>,
    energy_d: f64,
    scale: f64,
    weak_form_consistency: f64,
}

impl PowerOut {
    fn new(report: &PowerReport) -> Self {
        Self {
            w0: report.w0.into(),
            w1: report.w1.into(),
            delta_w: report.delta_w.into(),
            delta_v: report.delta_v.map(Into::into),
            energy_d: report.energy_d,
            scale: report.scale,
            weak_form_consistency: report.weak_form_consistency(),
        }
    }
}

#[derive(Serialize)]
struct IdentitiesReport {
    case_id: String,
    power: PowerOut,
    residuals: Vec<IdentityRow>,
    max_applicable_residual: f64,
    identity_gate: f64,
}

struct CaseRun {
    case_id: String,
    report: PowerReport,
    ledger: IdentityLedger,
    pair: CoefficientPair,
    mask: admitlab_core::geometry::InclusionMask,
}

fn run_first_case(inv: &Invocation) -> Result<CaseRun, CliError> {
    let cfg = &inv.loaded.config;
    let (mesh, chart) = build_mesh(require(&cfg.domain, "domain")?)?;
    let background = build_background(&mesh, require(&cfg.background, "background")?)?;
    let current = build_current(&mesh, &chart, require(&cfg.current, "current")?)?;
    let value = inclusion_value(cfg)?;
    let cases = build_cases(&mesh, cfg.inclusion.as_ref().unwrap(), inv.seed);
    let (case_id, mask) = cases
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Config("inclusion family is empty".into()))?;
    let load = assemble_current(&mesh, &chart, &current).map_err(from_core)?;
    let u0 = solve_neumann(&assemble_system(&mesh, &background).map_err(from_core)?, &load)
        .map_err(from_core)?;
    let perturbed = background
        .with_inclusion(&mesh, &mask, value)
        .map_err(from_core)?;
    let u1 = solve_neumann(&assemble_system(&mesh, &perturbed).map_err(from_core)?, &load)
        .map_err(from_core)?;
    let pair = CoefficientPair::new(background, perturbed).map_err(from_core)?;
    let report = compute_powers(&mesh, &u0, &u1, &load, &pair, &mask).map_err(from_core)?;
    let ledger = identity_residuals(&mesh, &u0, &u1, &load, &pair, &mask).map_err(from_core)?;
    Ok(CaseRun {
        case_id,
        report,
        ledger,
        pair,
        mask,
    })
}

/// `identities`: one case, full ledger, hard identity gate.
pub fn identities(inv: &Invocation) -> Result<(), CliError> {
    let run = run_first_case(inv)?;
    let gate = inv.identity_gate();
    let report = IdentitiesReport {
        case_id: run.case_id.clone(),
        power: PowerOut::new(&run.report),
        residuals: run
            .ledger
            .entries()
            .iter()
            .map(|e| IdentityRow {
                name: e.name.to_string(),
                residual: e.residual,
                applicable: e.applicable,
            })
            .collect(),
        max_applicable_residual: run.ledger.max_applicable(),
        identity_gate: gate,
    };
    if run.ledger.max_applicable() > gate {
        return Err(CliError::Gate(format!(
            "case `{}`: identity residual {:.3e} exceeds the {:.1e} gate",
            run.case_id,
            run.ledger.max_applicable(),
            gate
        )));
    }
    write_json_report(&inv.out("identities.json"), &report, &inv.loaded.raw)
}

#[derive(Serialize)]
struct BoundsReport {
    case_id: String,
    regime: String,
    power: PowerOut,
    lower: Option<f64>,
    upper: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    mid: f64,
    holds: bool,
}

/// `bounds`: the regime's two-sided energy bound as a hard gate.
pub fn bounds(inv: &Invocation) -> Result<(), CliError> {
    let run = run_first_case(inv)?;
    let regime = run.pair.regime();
    let (lower, upper, k1, k2, mid, holds) = match regime {
        Regime::ConstantPair => {
            let check =
                bound_check_constant(&run.report, &run.pair, &run.mask).map_err(from_core)?;
            (
                Some(check.lower),
                Some(check.upper),
                None,
                None,
                check.mid,
                check.holds,
            )
        }
        Regime::RealBackground => {
            let check =
                bound_check_variable(&run.report, &run.pair, &run.mask).map_err(from_core)?;
            (
                None,
                None,
                Some(check.k1),
                Some(check.k2),
                check.mid,
                check.holds,
            )
        }
        Regime::General => {
            return Err(CliError::Config(
                "bounds: the general regime has no two-sided bound".into(),
            ))
        }
    };
    let report = BoundsReport {
        case_id: run.case_id.clone(),
        regime: regime.as_str().to_string(),
        power: PowerOut::new(&run.report),
        lower,
        upper,
        k1,
        k2,
        mid,
        holds,
    };
    if !holds {
        return Err(CliError::Gate(format!(
            "case `{}`: energy bound chain failed",
            run.case_id
        )));
    }
    write_json_report(&inv.out("bounds.json"), &report, &inv.loaded.raw)
}

#[derive(Serialize)]
struct OnedReport {
    rows: usize,
    max_oracle_residual: f64,
    max_parts_residual: f64,
}

/// `oned`: interval sweep of the closed-form gap, CSV `(a, b, Re δW, Im δW)`.
pub fn oned(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let spec = require(&cfg.oned, "oned")?;
    let gamma0 = spec.gamma0.build();
    let gamma1 = spec.gamma1.build();
    let flux = C64::new(spec.flux[0], spec.flux[1]);
    let mut intervals = spec.intervals.clone();
    let mut rng = SplitMix64::new(inv.seed);
    for _ in 0..spec.random_intervals {
        let a = rng.next_range(-0.95, 0.8);
        let b = rng.next_range(a + 0.02, 0.98);
        intervals.push([a, b]);
    }
    if intervals.is_empty() {
        return Err(CliError::Config("oned: no intervals given".into()));
    }
    let mut table = CsvTable::new(&["a", "b", "re_delta_w", "im_delta_w"]);
    let mut max_oracle = 0.0f64;
    let mut max_parts = 0.0f64;
    for [a, b] in &intervals {
        let problem = OneDProblem::new(gamma0.clone(), gamma1.clone(), *a, *b, flux)
            .map_err(from_core)?;
        let dw = power_gap_1d(&problem).map_err(from_core)?;
        let parts = re_im_gap_formulas(&problem).map_err(from_core)?;
        let d1 = solve_1d_perturbed(&problem, 1.0).map_err(from_core)?
            - solve_1d_background(&problem, 1.0).map_err(from_core)?;
        let oracle = flux * d1.conj();
        max_oracle = max_oracle.max((dw - oracle).norm());
        max_parts = max_parts.max(((parts.re - dw.re).abs()).max((parts.im - dw.im).abs()));
        table.push_row(vec![
            fmt_f64(*a),
            fmt_f64(*b),
            fmt_f64(dw.re),
            fmt_f64(dw.im),
        ]);
    }
    table.write(&inv.out("oned.csv"))?;
    let report = OnedReport {
        rows: intervals.len(),
        max_oracle_residual: max_oracle,
        max_parts_residual: max_parts,
    };
    write_json_report(&inv.out("oned.json"), &report, &inv.loaded.raw)
}

struct UcpContext {
    mesh: Option<admitlab_core::geometry::MeshTopology>,
    field: Option<admitlab_core::fem::ComplexField>,
    sigma: Option<admitlab_core::fem::AdmittivityField>,
    degree: Option<u32>,
}

fn ucp_context(inv: &Invocation, spec: &UcpSpec) -> Result<UcpContext, CliError> {
    if let Some(degree) = spec.analytic_degree {
        return Ok(UcpContext {
            mesh: None,
            field: None,
            sigma: None,
            degree: Some(degree),
        });
    }
    let cfg = &inv.loaded.config;
    let (mesh, chart) = build_mesh(require(&cfg.domain, "domain")?)?;
    let background = build_background(&mesh, require(&cfg.background, "background")?)?;
    let current = build_current(&mesh, &chart, require(&cfg.current, "current")?)?;
    let load = assemble_current(&mesh, &chart, &current).map_err(from_core)?;
    let u = solve_neumann(&assemble_system(&mesh, &background).map_err(from_core)?, &load)
        .map_err(from_core)?;
    Ok(UcpContext {
        mesh: Some(mesh),
        field: Some(u),
        sigma: Some(background),
        degree: None,
    })
}

#[derive(Serialize)]
struct FrequencyReport {
    monotonicity_constant: f64,
    oscillation_f: Option<f64>,
    mask_bound_p: Option<f64>,
    mask_bound_log10_h: Option<f64>,
    mask_bound_degenerate: Option<bool>,
}

/// `ucp frequency`: the Almgren profile as CSV plus derived constants.
pub fn ucp_frequency(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let spec = require(&cfg.ucp, "ucp")?;
    if spec.radii.is_empty() {
        return Err(CliError::Config("ucp: `radii` required".into()));
    }
    let ctx = ucp_context(inv, spec)?;
    let profile: FrequencyProfile = match ctx.degree {
        Some(degree) => frequency_profile_analytic(
            &HarmonicMonomial { degree },
            spec.center,
            &spec.radii,
            spec.angular_nodes,
        )
        .map_err(from_core)?,
        None => frequency_profile_fem(
            ctx.mesh.as_ref().unwrap(),
            ctx.field.as_ref().unwrap(),
            ctx.sigma.as_ref().unwrap(),
            spec.center,
            &spec.radii,
            spec.angular_nodes,
        )
        .map_err(from_core)?,
    };
    let mut table = CsvTable::new(&["r", "h", "i", "n"]);
    for k in 0..profile.radii.len() {
        table.push_row(vec![
            fmt_f64(profile.radii[k]),
            fmt_f64(profile.h[k]),
            fmt_f64(profile.i[k]),
            fmt_f64(profile.n[k]),
        ]);
    }
    let mut report = FrequencyReport {
        monotonicity_constant: profile.monotonicity_constant(),
        oscillation_f: None,
        mask_bound_p: None,
        mask_bound_log10_h: None,
        mask_bound_degenerate: None,
    };
    if let (Some(rbar), Some(mesh), Some(field)) = (spec.rbar, &ctx.mesh, &ctx.field) {
        let f = oscillation_quotient(mesh, field, rbar, spec.oscillation_c).map_err(from_core)?;
        let constants = mask_bound_constants(f).map_err(from_core)?;
        report.oscillation_f = Some(f);
        report.mask_bound_p = Some(constants.p);
        report.mask_bound_log10_h = Some(constants.log10_h);
        report.mask_bound_degenerate = Some(constants.degenerate);
    }
    table.write(&inv.out("frequency.csv"))?;
    write_json_report(&inv.out("frequency.json"), &report, &inv.loaded.raw)
}

#[derive(Serialize)]
struct RatioReport {
    lhs: f64,
    rhs: f64,
    ratio: f64,
    parameters: Vec<(String, f64)>,
}

impl RatioReport {
    fn new(check: &UcpCheckResult) -> Self {
        Self {
            lhs: check.lhs,
            rhs: check.rhs,
            ratio: check.ratio,
            parameters: check
                .parameters
                .iter()
                .map(|(n, v)| (n.to_string(), *v))
                .collect(),
        }
    }
}

/// `ucp threespheres`.
pub fn ucp_threespheres(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let spec = require(&cfg.ucp, "ucp")?;
    let radii = spec
        .three_radii
        .ok_or_else(|| CliError::Config("ucp: `three_radii` required".into()))?;
    let ctx = ucp_context(inv, spec)?;
    let check = match ctx.degree {
        Some(degree) => three_spheres_analytic(
            &HarmonicMonomial { degree },
            spec.center,
            (radii[0], radii[1], radii[2]),
            spec.angular_nodes.max(512),
        )
        .map_err(from_core)?,
        None => three_spheres_fem(
            ctx.mesh.as_ref().unwrap(),
            ctx.field.as_ref().unwrap(),
            &Coefficient::CellScalar(ctx.sigma.as_ref().unwrap()),
            spec.center,
            (radii[0], radii[1], radii[2]),
        )
        .map_err(from_core)?,
    };
    write_json_report(
        &inv.out("threespheres.json"),
        &RatioReport::new(&check),
        &inv.loaded.raw,
    )
}

/// `ucp doubling`.
pub fn ucp_doubling(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let spec = require(&cfg.ucp, "ucp")?;
    let r = spec
        .doubling_radius
        .ok_or_else(|| CliError::Config("ucp: `doubling_radius` required".into()))?;
    let ctx = ucp_context(inv, spec)?;
    let check = match ctx.degree {
        Some(degree) => doubling_ratio_analytic(
            &HarmonicMonomial { degree },
            spec.center,
            r,
            spec.angular_nodes.max(512),
        )
        .map_err(from_core)?,
        None => doubling_ratio_fem(
            ctx.mesh.as_ref().unwrap(),
            ctx.field.as_ref().unwrap(),
            &Coefficient::CellScalar(ctx.sigma.as_ref().unwrap()),
            spec.center,
            r,
        )
        .map_err(from_core)?,
    };
    write_json_report(
        &inv.out("doubling.json"),
        &RatioReport::new(&check),
        &inv.loaded.raw,
    )
}

#[derive(Serialize)]
struct LpsReport {
    min_ratio: f64,
    argmin: [f64; 2],
    rho: f64,
    samples: usize,
}

/// `ucp lps`: scan CSV `(x, y, ratio)` plus the minimum.
pub fn ucp_lps(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let spec = require(&cfg.ucp, "ucp")?;
    let rho = spec
        .rho
        .ok_or_else(|| CliError::Config("ucp: `rho` required".into()))?;
    let ctx = ucp_context(inv, spec)?;
    let (mesh, field) = (
        ctx.mesh
            .as_ref()
            .ok_or_else(|| CliError::Config("ucp lps needs a FEM solution".into()))?,
        ctx.field.as_ref().unwrap(),
    );
    let scan = lps_scan(mesh, field, rho).map_err(from_core)?;
    let mut table = CsvTable::new(&["x", "y", "ratio"]);
    for s in &scan.samples {
        table.push_row(vec![
            fmt_f64(s.center[0]),
            fmt_f64(s.center[1]),
            fmt_f64(s.ratio),
        ]);
    }
    let report = LpsReport {
        min_ratio: scan.min_ratio,
        argmin: scan.argmin,
        rho,
        samples: scan.samples.len(),
    };
    table.write(&inv.out("lps.csv"))?;
    write_json_report(&inv.out("lps.json"), &report, &inv.loaded.raw)
}

#[derive(Serialize)]
struct FohReport {
    l2_norm: f64,
    h_minus_half: f64,
    h_minus_one: f64,
    frequency: f64,
}

/// `ucp foh`: fractional norms and the frequency of the configured current.
pub fn ucp_foh(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let spec = require(&cfg.ucp, "ucp")?;
    let (mesh, chart) = build_mesh(require(&cfg.domain, "domain")?)?;
    let current = build_current(&mesh, &chart, require(&cfg.current, "current")?)?;
    let samples = spec.samples;
    let report = FohReport {
        l2_norm: boundary_sobolev_norm(&current, &chart, 0.0, samples).map_err(from_core)?,
        h_minus_half: boundary_sobolev_norm(&current, &chart, -0.5, samples)
            .map_err(from_core)?,
        h_minus_one: boundary_sobolev_norm(&current, &chart, -1.0, samples)
            .map_err(from_core)?,
        frequency: frequency_of_current(&current, &chart, samples).map_err(from_core)?,
    };
    write_json_report(&inv.out("foh.json"), &report, &inv.loaded.raw)
}

#[derive(Serialize)]
struct FitReport {
    c1_emp: f64,
    c2_emp: f64,
    p_emp: f64,
    violations: usize,
    excluded_zero_gap: usize,
    records: usize,
    lps_c1: Option<f64>,
    p_mask_bound: Option<f64>,
}

/// `sweep`: family run with hard gates, records CSV, fitted constants JSON.
pub fn sweep(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.loaded.config;
    let (mesh, chart) = build_mesh(require(&cfg.domain, "domain")?)?;
    let background = build_background(&mesh, require(&cfg.background, "background")?)?;
    let current = build_current(&mesh, &chart, require(&cfg.current, "current")?)?;
    let value = inclusion_value(cfg)?;
    let cases = build_cases(&mesh, cfg.inclusion.as_ref().unwrap(), inv.seed);
    let gates = SweepGates {
        identity: inv.identity_gate(),
        bounds: true,
    };
    let records = run_inclusion_sweep(&mesh, &chart, &background, value, &current, &cases, gates)
        .map_err(from_core)?;

    let mut table = CsvTable::new(&[
        "case_id",
        "volume_fraction",
        "gap_fraction",
        "energy_fraction",
        "regime",
        "boundary_contact",
    ]);
    for r in &records {
        table.push_row(vec![
            r.case_id.clone(),
            fmt_f64(r.volume_fraction),
            fmt_f64(r.gap_fraction),
            fmt_f64(r.energy_fraction),
            r.regime.as_str().to_string(),
            r.boundary_contact.to_string(),
        ]);
    }
    let gap_floor = inv.gap_floor();
    let usable: Vec<_> = records
        .iter()
        .filter(|r| r.gap_fraction > gap_floor)
        .cloned()
        .collect();
    let fit = fit_size_law(&usable).map_err(from_core)?;
    let (mut lps_c1, mut p_mask_bound) = (None, None);
    if let Some(rho) = cfg.sweep.as_ref().and_then(|s| s.lps_rho) {
        let load = assemble_current(&mesh, &chart, &current).map_err(from_core)?;
        let u0 = solve_neumann(&assemble_system(&mesh, &background).map_err(from_core)?, &load)
            .map_err(from_core)?;
        let c1 = lps_constant(&mesh, &u0, rho).map_err(from_core)?;
        lps_c1 = Some(c1);
        p_mask_bound = Some(mask_bound_exponent(c1));
    }
    let report = FitReport {
        c1_emp: fit.c1_emp,
        c2_emp: fit.c2_emp,
        p_emp: fit.p_emp,
        violations: fit.violations,
        excluded_zero_gap: fit.excluded_zero_gap + (records.len() - usable.len()),
        records: records.len(),
        lps_c1,
        p_mask_bound,
    };
    table.write(&inv.out("sweep.csv"))?;
    write_json_report(&inv.out("fit.json"), &report, &inv.loaded.raw)
}

#[derive(Serialize)]
struct ReflectReport {
    weak_residual: f64,
    half_energy: f64,
    doubled_energy: f64,
    energy_doubling_defect: f64,
    ellipticity_preserved: bool,
}

/// `reflect`: half-square solve, even reflection, weak verification.
pub fn reflect(inv: &Invocation) -> Result<(), CliError> {
    use admitlab_core::fem::BoundaryCurrent;
    use admitlab_core::geometry::{boundary_chart, structured_rectangle};

    let cfg = &inv.loaded.config;
    let spec = require(&cfg.reflect, "reflect")?;
    let n = spec.resolution.max(2);
    let mesh = structured_rectangle(
        [0.0, 0.0],
        [1.0, 0.5],
        n,
        n / 2,
        DomainKind::UnitSquare,
        n,
    )
    .map_err(from_core)?;
    let chart = boundary_chart(&mesh).map_err(from_core)?;
    let coeff = DiagonalCoefficient::from_fn(&mesh, |p| {
        (spec.a_xx.eval(p), spec.a_yy.eval(p))
    })
    .map_err(from_core)?;
    // Dipole current on the top edge keeps the flat bottom flux-free.
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
    .map_err(from_core)?;
    let load = assemble_current(&mesh, &chart, &h).map_err(from_core)?;
    let system = admitlab_core::fem::assemble_system_diagonal(&mesh, &coeff.pairs())
        .map_err(from_core)?;
    let u = solve_neumann(&system, &load).map_err(from_core)?;
    let reflected = reflect_even(&mesh, &u, &coeff).map_err(from_core)?;
    let defect =
        (reflected.doubled_energy - 2.0 * reflected.half_energy).abs() / reflected.doubled_energy;
    let n_half = mesh.n_cells();
    let ellipticity_preserved = (0..n_half).all(|c| {
        coeff.eigenvalues(c) == reflected.a_tilde.eigenvalues(n_half + c)
    });
    let report = ReflectReport {
        weak_residual: reflected.weak_residual,
        half_energy: reflected.half_energy,
        doubled_energy: reflected.doubled_energy,
        energy_doubling_defect: defect,
        ellipticity_preserved,
    };
    let gate = inv.tolerances.get("reflect_residual").unwrap_or(1e-8);
    if reflected.weak_residual > gate {
        return Err(CliError::Gate(format!(
            "case `reflect`: weak residual {:.3e} exceeds the {:.1e} gate",
            reflected.weak_residual, gate
        )));
    }
    write_json_report(&inv.out("reflect.json"), &report, &inv.loaded.raw)
}
