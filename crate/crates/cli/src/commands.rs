use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;

use chargedrop::fekete::{empirical_diagnostics, minimize, FeketeDiagnostics, FeketeOptions};
use chargedrop::geometry::{
    area, boundary_points, classify_phase, droplet, offcenter_tau0_map, topology, Coords,
    DropletRegion, OffCenterMap, Phase, RationalMap, RegionShape, Topology,
};
use chargedrop::hermitian::SpectralDensity1D;
use chargedrop::transforms::{
    equilibrium_moment, laurent_moments, postcritical_measure_cauchy, precritical_moments,
    symmetric_moments_from_squared,
};
use chargedrop::variational::{
    mass_one_check, verify_equality, verify_inequality, MassOneReport, VerificationReport,
};
use chargedrop::{Error, ModelParams, PotentialKind};

use crate::args::{Cli, Command, CoordsArg, EnsembleArg, ModelArgs, PotentialArg};
use crate::error::CliError;
use crate::output::OutputSink;

pub const EQUALITY_TOL: f64 = 1e-8;
pub const MASS_TOL: f64 = 1e-8;
pub const RESIDUE_TOL: f64 = 1e-10;
pub const MOMENT_TOL: f64 = 1e-6;
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Validated settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sink: OutputSink,
    pub deterministic: bool,
}

fn params_of(model: &ModelArgs) -> Result<ModelParams, CliError> {
    Ok(ModelParams::with_charge(model.tau, model.c, model.p)?)
}

fn coords_of(arg: CoordsArg) -> Coords {
    match arg {
        CoordsArg::Symmetric => Coords::Symmetric,
        CoordsArg::Squared => Coords::Squared,
    }
}

fn coords_name(coords: Coords) -> &'static str {
    match coords {
        Coords::Symmetric => "symmetric",
        Coords::Squared => "squared",
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let out = &cli.output;
    let threads = if out.deterministic {
        Some(1)
    } else {
        out.threads
    };
    let config = RunConfig {
        sink: OutputSink::new(out.out_dir.clone(), out.format)?,
        deterministic: out.deterministic,
    };
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))?;
            pool.install(|| dispatch(&cli.command, &config))
        }
        None => dispatch(&cli.command, &config),
    }
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Droplet { model, n } => cmd_droplet(config, model, *n),
        Command::Fekete {
            model,
            n,
            seed,
            ensemble,
            potential,
            max_iter,
            tol,
        } => {
            let mut params = params_of(model)?;
            if *ensemble == EnsembleArg::Symplectic {
                params = params.symplectic();
            }
            let which = match potential {
                PotentialArg::Q => PotentialKind::Q,
                PotentialArg::Qhat => PotentialKind::Qhat,
            };
            let opts = FeketeOptions {
                max_iter: *max_iter,
                tol: *tol,
                parallel: !config.deterministic,
                mirror_init: false,
            };
            cmd_fekete(config, &params, which, *n, *seed, &opts)
        }
        Command::Verify {
            model,
            n,
            rays,
            coords,
        } => cmd_verify(config, &params_of(model)?, *n, *rays, coords.map(coords_of)),
        Command::Spectrum1d { c, p, n } => {
            if p.im != 0.0 {
                return Err(CliError::Usage(format!(
                    "the 1D limit needs a real charge, got p={p}"
                )));
            }
            cmd_spectrum1d(config, *c, p.re, *n)
        }
        Command::Moments {
            model,
            kmax,
            coords,
        } => cmd_moments(config, &params_of(model)?, *kmax, coords_of(*coords)),
    }
}

#[derive(Debug, Serialize)]
struct CoordsSummary {
    coords: &'static str,
    area: f64,
    bounding_box: [Complex64; 2],
    curves: usize,
    file: PathBuf,
}

#[derive(Debug, Serialize)]
struct DropletSummary {
    params: ModelParams,
    /// `post-critical`, `critical`, `pre-critical`, or `off-center` for the
    /// simply connected droplet of a displaced charge without ellipticity.
    phase: &'static str,
    topology: Option<Topology>,
    coordinates: Vec<CoordsSummary>,
    map: Option<RationalMap>,
    offcenter_map: Option<OffCenterMap>,
}

fn phase_name(phase: Phase) -> &'static str {
    match phase {
        Phase::PostCritical => "post-critical",
        Phase::Critical => "critical",
        Phase::PreCritical => "pre-critical",
    }
}

fn describe(
    region: &DropletRegion,
    curves: &[Vec<Complex64>],
    file: PathBuf,
) -> Result<CoordsSummary, CliError> {
    let (lo, hi) = region.bounding_box();
    Ok(CoordsSummary {
        coords: coords_name(region.coords),
        area: area(region)?,
        bounding_box: [lo, hi],
        curves: curves.len(),
        file,
    })
}

pub fn cmd_droplet(config: &RunConfig, model: &ModelArgs, n: usize) -> Result<(), CliError> {
    let params = params_of(model)?;
    let sink = &config.sink;
    let symmetric = match droplet(&params, Coords::Symmetric) {
        Ok(region) => region,
        Err(Error::ContainmentViolated) if params.tau == 0.0 => {
            return offcenter_droplet(config, &params, n)
        }
        Err(e) => return Err(e.into()),
    };
    let mut coordinates = Vec::new();
    let curves = boundary_points(&symmetric, n)?;
    let file = sink.write_curves("droplet_symmetric", &curves)?;
    coordinates.push(describe(&symmetric, &curves, file)?);
    if params.is_centered() {
        let squared = droplet(&params, Coords::Squared)?;
        let curves = boundary_points(&squared, n)?;
        let file = sink.write_curves("droplet_squared", &curves)?;
        coordinates.push(describe(&squared, &curves, file)?);
    }
    let summary = DropletSummary {
        params,
        phase: phase_name(symmetric.phase()),
        topology: Some(topology(&symmetric)?),
        coordinates,
        map: symmetric.map().copied(),
        offcenter_map: None,
    };
    sink.write_json("droplet", &summary)?;
    println!(
        "phase={} curves={}",
        summary.phase, summary.coordinates[0].curves
    );
    Ok(())
}

/// `τ = 0` with a displaced charge outside the containment regime: the
/// droplet is simply connected and rotationally equivalent to a real charge.
fn offcenter_droplet(config: &RunConfig, params: &ModelParams, n: usize) -> Result<(), CliError> {
    let radius = params.p.norm();
    let rotation = params.p / radius;
    let map = offcenter_tau0_map(params.c, radius)?;
    let curve: Vec<Complex64> = map.boundary(n).into_iter().map(|z| z * rotation).collect();
    let curves = vec![curve];
    let file = config.sink.write_curves("droplet_symmetric", &curves)?;
    let (mut lo, mut hi) = (
        Complex64::new(f64::INFINITY, f64::INFINITY),
        Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for z in &curves[0] {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let summary = DropletSummary {
        params: *params,
        phase: "off-center",
        topology: Some(Topology {
            components: 1,
            holes: 0,
            double_points: Vec::new(),
            tangency_residual: None,
        }),
        coordinates: vec![CoordsSummary {
            coords: "symmetric",
            // unit density with unit mass
            area: std::f64::consts::PI,
            bounding_box: [lo, hi],
            curves: 1,
            file,
        }],
        map: None,
        offcenter_map: Some(map),
    };
    config.sink.write_json("droplet", &summary)?;
    println!("phase=off-center curves=1");
    Ok(())
}

#[derive(Debug, Serialize)]
struct FeketeSummary {
    params: ModelParams,
    potential: PotentialKind,
    n: usize,
    seed: u64,
    energy: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    points_file: PathBuf,
    diagnostics: Option<FeketeDiagnostics>,
    /// Why no diagnostics were produced, if so.
    diagnostics_error: Option<String>,
}

pub fn cmd_fekete(
    config: &RunConfig,
    params: &ModelParams,
    which: PotentialKind,
    n: usize,
    seed: u64,
    opts: &FeketeOptions,
) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let cfg = minimize(n, params, which, seed, opts)?;
    let points_file = config.sink.write_points("fekete_points", &cfg.points)?;
    let coords = match which {
        PotentialKind::Q => Coords::Symmetric,
        PotentialKind::Qhat => Coords::Squared,
    };
    let (diagnostics, diagnostics_error) =
        match droplet(params, coords).and_then(|r| empirical_diagnostics(&cfg, &r)) {
            Ok(d) => (Some(d), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let summary = FeketeSummary {
        params: *params,
        potential: which,
        n,
        seed,
        energy: cfg.energy,
        grad_norm: cfg.grad_norm,
        iterations: cfg.iterations,
        converged: cfg.converged,
        points_file,
        diagnostics,
        diagnostics_error,
    };
    config.sink.write_json("fekete", &summary)?;
    if let Some(d) = &summary.diagnostics {
        println!(
            "energy={:.16e} iterations={} converged={} inside_fraction={} clusters={}",
            cfg.energy, cfg.iterations, cfg.converged, d.inside_fraction, d.clusters
        );
    } else {
        println!(
            "energy={:.16e} iterations={} converged={}",
            cfg.energy, cfg.iterations, cfg.converged
        );
    }
    if !cfg.converged {
        return Err(CliError::NotConverged {
            iterations: cfg.iterations,
            grad_norm: cfg.grad_norm,
        });
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    params: ModelParams,
    coords: &'static str,
    area: f64,
    report: Option<VerificationReport>,
    mass_one: Option<MassOneReport>,
    failures: Vec<String>,
    pass: bool,
}

pub fn cmd_verify(
    config: &RunConfig,
    params: &ModelParams,
    grid: usize,
    rays: usize,
    coords: Option<Coords>,
) -> Result<(), CliError> {
    let coords = match coords {
        Some(c) => c,
        None if params.is_centered() && classify_phase(params)? == Phase::PreCritical => {
            Coords::Squared
        }
        None => Coords::Symmetric,
    };
    let region = droplet(params, coords)?;
    let mut failures = Vec::new();
    let mut report = match verify_equality(params, &region, grid) {
        Ok(r) => {
            if let Some(res) = r.interior_max_residual.filter(|v| !(*v <= EQUALITY_TOL)) {
                failures.push(format!(
                    "interior residual {res:e} exceeds {EQUALITY_TOL:e}"
                ));
            }
            Some(r)
        }
        Err(e) => {
            failures.push(format!("equality: {e}"));
            None
        }
    };
    match verify_inequality(params, &region, rays) {
        Ok(r) => {
            report = Some(match report {
                Some(eq) => eq.merge(&r),
                None => r,
            })
        }
        Err(e @ Error::InequalityViolated { .. }) => failures.push(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    let mass_one = match &region.shape {
        RegionShape::PreCritical(map) if !map.is_critical() => {
            let m = mass_one_check(map)?;
            if !(m.residual <= MASS_TOL) {
                failures.push(format!(
                    "mass-one residual {:e} exceeds {MASS_TOL:e}",
                    m.residual
                ));
            }
            if !(m.residue_zero_error <= RESIDUE_TOL && m.residue_pole_error <= RESIDUE_TOL) {
                failures.push(format!(
                    "residue errors {:e}, {:e} exceed {RESIDUE_TOL:e}",
                    m.residue_zero_error, m.residue_pole_error
                ));
            }
            if let Some(r) = report.as_mut() {
                r.mass_residual = Some(m.residual);
            }
            Some(m)
        }
        _ => None,
    };
    let summary = VerifySummary {
        params: *params,
        coords: coords_name(coords),
        area: area(&region)?,
        report,
        mass_one,
        pass: failures.is_empty(),
        failures,
    };
    config.sink.write_json("verify", &summary)?;
    if let Some(r) = &summary.report {
        print!("{}", r.to_kv());
    }
    println!("area={:.16e}", summary.area);
    if summary.pass {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(CliError::Verification(summary.failures.join("; ")))
    }
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    c: f64,
    p: f64,
    edges: [f64; 4],
    bands: Vec<(f64, f64)>,
    one_cut: bool,
    total_mass: f64,
    samples: usize,
    file: PathBuf,
}

pub fn cmd_spectrum1d(config: &RunConfig, c: f64, p: f64, n: usize) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Usage("--n must be at least 2".into()));
    }
    let density = SpectralDensity1D::new(c, p)?;
    let (lo, hi) = (density.edges[0] - 0.5, density.edges[3] + 0.5);
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            (x, density.density(x))
        })
        .collect();
    let file = config.sink.write_density("spectrum1d", &samples)?;
    let summary = SpectrumSummary {
        c,
        p,
        edges: density.edges,
        bands: density.bands(),
        one_cut: density.is_one_cut(),
        total_mass: density.total_mass()?,
        samples: n,
        file,
    };
    config.sink.write_json("spectrum1d", &summary)?;
    println!(
        "bands={} total_mass={:.16e}",
        summary.bands.len(),
        summary.total_mass
    );
    if !((summary.total_mass - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(CliError::Verification(format!(
            "density integrates to {}",
            summary.total_mass
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MomentsSummary {
    params: ModelParams,
    coords: &'static str,
    /// Closed form; only available after the transition.
    closed_form: Option<Vec<Complex64>>,
    series: Vec<Complex64>,
    max_discrepancy: Option<f64>,
}

fn postcritical_series(params: &ModelParams, kmax: usize) -> Result<Vec<Complex64>, CliError> {
    let reach = (1.0 + params.tau) * (1.0 + params.c).sqrt() + params.p.norm();
    let failure = std::cell::RefCell::new(None);
    let series = laurent_moments(
        |z| {
            postcritical_measure_cauchy(params, z).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            })
        },
        2.0 * reach,
        kmax,
        16 * (kmax + 8),
    );
    match failure.into_inner() {
        Some(e) => Err(e.into()),
        None => Ok(series),
    }
}

pub fn cmd_moments(
    config: &RunConfig,
    params: &ModelParams,
    kmax: usize,
    coords: Coords,
) -> Result<(), CliError> {
    let region = droplet(params, coords)?;
    let (closed_form, series) = match (&region.shape, coords) {
        (RegionShape::PostCritical(_), Coords::Symmetric) => (
            (0..=kmax)
                .map(|k| equilibrium_moment(params, k))
                .collect::<Result<Vec<_>, _>>()?,
            postcritical_series(params, kmax)?,
        ),
        (RegionShape::PostCritical(_), Coords::Squared) => (
            (0..=kmax)
                .map(|k| equilibrium_moment(params, 2 * k))
                .collect::<Result<Vec<_>, _>>()?,
            postcritical_series(params, 2 * kmax)?
                .into_iter()
                .step_by(2)
                .collect(),
        ),
        (RegionShape::PreCritical(map), Coords::Squared) => {
            let series = precritical_moments(map, kmax)?;
            return finish_moments(config, params, coords, None, series);
        }
        (RegionShape::PreCritical(map), Coords::Symmetric) => {
            let series =
                symmetric_moments_from_squared(&precritical_moments(map, kmax / 2 + 1)?, kmax);
            return finish_moments(config, params, coords, None, series);
        }
    };
    finish_moments(config, params, coords, Some(closed_form), series)
}

fn finish_moments(
    config: &RunConfig,
    params: &ModelParams,
    coords: Coords,
    closed_form: Option<Vec<Complex64>>,
    series: Vec<Complex64>,
) -> Result<(), CliError> {
    let max_discrepancy = closed_form.as_ref().map(|cf| {
        cf.iter()
            .zip(&series)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    });
    let summary = MomentsSummary {
        params: *params,
        coords: coords_name(coords),
        closed_form,
        series,
        max_discrepancy,
    };
    config.sink.write_json("moments", &summary)?;
    for (k, m) in summary.series.iter().enumerate() {
        println!("m{k}={:.16e},{:.16e}", m.re, m.im);
    }
    match max_discrepancy {
        Some(d) if !(d <= MOMENT_TOL) => Err(CliError::Verification(format!(
            "closed form and series differ by {d:e}"
        ))),
        _ => Ok(()),
    }
}
