//! Builds core objects (meshes, coefficients, currents, inclusion families)
//! from a validated configuration.

use admitlab_core::fem::{AdmittivityField, BoundaryCurrent};
use admitlab_core::geometry::{
    boundary_chart, generate_mesh, BoundaryChart, InclusionMask, MeshTopology,
};
use admitlab_core::sizelab::{
    boundary_half_disc_cases, concentric_disc_cases, random_disc_cases, strip_case,
};
use admitlab_core::C64;

use crate::config::{
    BackgroundSpec, CurrentSpec, DomainSpec, ExperimentConfig, InclusionSpec, ShapeSpec,
};
use crate::CliError;

pub fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    field
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing `[{name}]` section")))
}

pub fn build_mesh(spec: &DomainSpec) -> Result<(MeshTopology, BoundaryChart), CliError> {
    let mesh = generate_mesh(spec.kind.into(), spec.resolution).map_err(from_core)?;
    let chart = boundary_chart(&mesh).map_err(from_core)?;
    Ok((mesh, chart))
}

pub fn build_background(
    mesh: &MeshTopology,
    spec: &BackgroundSpec,
) -> Result<AdmittivityField, CliError> {
    let eval = |p: [f64; 2]| spec.coefficient.eval(p);
    let c0 = match spec.c0 {
        Some(c0) => c0,
        None => {
            let mut min = f64::INFINITY;
            for c in 0..mesh.n_cells() {
                let g = eval(mesh.cell_centroid(c));
                min = min.min(g.re.min(1.0 / g.norm()));
            }
            min
        }
    };
    let mut field = AdmittivityField::from_fn(mesh, eval, c0)
        .map_err(from_core)?
        .with_regime(spec.regime.into());
    if let Some(l) = spec.lipschitz {
        field = field.with_lipschitz(l);
    }
    Ok(field)
}

pub fn build_current(
    mesh: &MeshTopology,
    chart: &BoundaryChart,
    spec: &CurrentSpec,
) -> Result<BoundaryCurrent, CliError> {
    if let Some([re, im]) = spec.side_flux {
        if !spec.modes.is_empty() {
            return Err(CliError::Config(
                "current: give either `modes` or `side_flux`, not both".into(),
            ));
        }
        let k = C64::new(re, im);
        return BoundaryCurrent::per_edge_from_fn(mesh, chart, |p| {
            if p[0] > 1.0 - 1e-12 {
                k
            } else if p[0] < 1e-12 {
                -k
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .map_err(from_core);
    }
    if spec.modes.is_empty() {
        return Err(CliError::Config(
            "current: `modes` or `side_flux` required".into(),
        ));
    }
    let modes: Vec<(i32, C64)> = spec
        .modes
        .iter()
        .map(|[k, re, im]| (*k as i32, C64::new(*re, *im)))
        .collect();
    match spec.support {
        Some([s0, s1]) => {
            BoundaryCurrent::from_modes_on_arc(chart, &modes, (s0, s1)).map_err(from_core)
        }
        None => BoundaryCurrent::from_modes(chart, &modes).map_err(from_core),
    }
}

pub fn build_cases(
    mesh: &MeshTopology,
    spec: &InclusionSpec,
    seed: u64,
) -> Vec<(String, InclusionMask)> {
    match &spec.shape {
        ShapeSpec::Disc { center, radius } => {
            concentric_disc_cases(mesh, *center, &[*radius])
        }
        ShapeSpec::Discs { center, radii } => concentric_disc_cases(mesh, *center, radii),
        ShapeSpec::HalfDiscs { center, radii } => {
            boundary_half_disc_cases(mesh, *center, radii)
        }
        ShapeSpec::Strip { x_range } => vec![strip_case(mesh, x_range[0], x_range[1])],
        ShapeSpec::RandomDiscs {
            count,
            radius_range,
            margin,
        } => random_disc_cases(
            mesh,
            seed,
            *count,
            (radius_range[0], radius_range[1]),
            *margin,
        ),
    }
}

/// The inclusion value closure of a configured experiment.
pub fn inclusion_value(config: &ExperimentConfig) -> Result<impl Fn([f64; 2]) -> C64 + '_, CliError> {
    let spec = require(&config.inclusion, "inclusion")?;
    Ok(move |p: [f64; 2]| spec.value.eval(p))
}

pub fn from_core(e: admitlab_core::Error) -> CliError {
    match e {
        admitlab_core::Error::GateFailure { case, detail } => {
            CliError::Gate(format!("case `{case}`: {detail}"))
        }
        other => CliError::Other(other.to_string()),
    }
}
