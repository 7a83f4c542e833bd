//! Command dispatch.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use spectral_core::classify::{
    classify_orthogonality, classify_spectrality, OrthoOutcome, SpectralOutcome,
};
use spectral_core::construct::{
    graded_family, hadamard_check, infinite_orthogonal_family, p_element_family,
    spectral_hadamard_triple, spectrum_truncation, verify_bizero, FrequencySet, HadamardMode,
};
use spectral_core::model::MeasureInstance;
use spectral_core::numerics::{grid_scan, FourierEvaluator, Window};
use spectral_core::render::{
    attractor_points, bounding_window, heat_field, heat_file_name, ppm_file_name, rasterize_cloud,
    rasterize_heat, zero_sites, DEFAULT_POINT_CAP,
};
use spectral_core::search::{enumerate_candidates, max_orthogonal_clique};
use spectral_core::zeros::{analyze_zero_structure, ZeroStructureReport};
use spectral_core::{Error, Result};

use crate::problem::{window, ProblemFile};
use crate::report::{
    ConstructionReport, HadamardReport, InstanceEcho, QScanReport, RenderReport, Report,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "spectral",
    version,
    about = "Spectrality and orthogonal exponentials of planar self-affine measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// {0} ∪ {t^{puℓ} a/p}, ℓ = 1..n
    Infinite,
    /// (M*)^n {0, a/p, ..., (p-1)a/p}
    PElement,
    /// n-point graded family
    Graded,
    /// p^n-point spectrum of the level-n truncation
    Truncation,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admissible vectors and exactness of the mask zero set.
    Zeros { problem: PathBuf },
    /// Spectrality and orthogonal-exponential verdicts with evidence.
    Classify { problem: PathBuf },
    /// Build a frequency family and check it exactly.
    Construct {
        #[arg(value_enum)]
        family: Family,
        problem: PathBuf,
        #[arg(long, default_value_t = 2)]
        n: u64,
    },
    /// The explicit Hadamard triple behind a spectral verdict.
    Hadamard {
        problem: PathBuf,
        /// Check numerically with this tolerance instead of exactly.
        #[arg(long)]
        numeric: Option<f64>,
    },
    /// Grid scan of Q(ξ) = Σ|μ̂(ξ+λ)|² over a family.
    Qscan {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = Family::PElement)]
        family: Family,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long)]
        grid: Option<usize>,
        /// x0,x1,y0,y1
        #[arg(long, value_delimiter = ',', num_args = 4)]
        window: Option<Vec<f64>>,
    },
    /// Maximum mutually orthogonal family in a bounded candidate pool.
    Clique {
        problem: PathBuf,
        #[arg(long)]
        kmax: Option<u64>,
        #[arg(long)]
        radius: Option<i64>,
        /// Add the graded family of this size to the pool.
        #[arg(long)]
        seed_graded: Option<u64>,
    },
    /// Attractor approximation (and optional |μ̂|² heat map) as PPM files.
    Render {
        problem: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        /// WxH
        #[arg(long, default_value = "512x512")]
        size: String,
        #[arg(long)]
        heat: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Zero structure, verdicts, triple, a family with its Q scan, clique search and a render.
    All { problem: PathBuf },
}

impl Command {
    fn problem(&self) -> &Path {
        match self {
            Command::Zeros { problem }
            | Command::Classify { problem }
            | Command::Construct { problem, .. }
            | Command::Hadamard { problem, .. }
            | Command::Qscan { problem, .. }
            | Command::Clique { problem, .. }
            | Command::Render { problem, .. }
            | Command::All { problem } => problem,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Zeros { .. } => "zeros",
            Command::Classify { .. } => "classify",
            Command::Construct { .. } => "construct",
            Command::Hadamard { .. } => "hadamard",
            Command::Qscan { .. } => "qscan",
            Command::Clique { .. } => "clique",
            Command::Render { .. } => "render",
            Command::All { .. } => "all",
        }
    }
}

/// Loaded problem plus its (lazily computed) zero structure.
pub struct Session {
    pub problem: ProblemFile,
    pub inst: MeasureInstance,
    zeros: Option<ZeroStructureReport>,
}

impl Session {
    pub fn new(problem: ProblemFile) -> Result<Self> {
        let inst = problem.instance()?;
        Ok(Session {
            problem,
            inst,
            zeros: None,
        })
    }

    pub fn zeros(&mut self) -> &ZeroStructureReport {
        if self.zeros.is_none() {
            self.zeros = Some(analyze_zero_structure(
                &self.inst.d,
                &self.problem.options.scan(),
            ));
        }
        self.zeros.as_ref().expect("just computed")
    }

    fn a(&mut self) -> Result<(i64, i64)> {
        let z = self.zeros();
        z.a().ok_or_else(|| Error::ZeroStructure(z.note.clone()))
    }

    pub fn family(&mut self, family: Family, n: u64) -> Result<FrequencySet> {
        let zeros = self.zeros().clone();
        match family {
            Family::Infinite => infinite_orthogonal_family(&self.inst, &zeros, n),
            Family::PElement => {
                let a = self.a()?;
                Ok(p_element_family(&self.inst, a, n))
            }
            Family::Graded => graded_family(&self.inst, &zeros, n),
            Family::Truncation => spectrum_truncation(&self.inst, &zeros, n),
        }
    }
}

/// Exit 2 when the verdicts that apply to the instance are Unsupported.
fn verdict_exit(report: &Report, equal_rho: bool) -> i32 {
    let spectral_unsupported = matches!(
        report.spectral.as_ref().map(|s| &s.outcome),
        Some(SpectralOutcome::Unsupported { .. })
    );
    let ortho_unsupported = matches!(
        report.orthogonality.as_ref().map(|o| &o.outcome),
        Some(OrthoOutcome::Unsupported { .. })
    );
    if spectral_unsupported || (equal_rho && ortho_unsupported) {
        EXIT_UNSUPPORTED
    } else {
        EXIT_OK
    }
}

fn classify_into(s: &mut Session, report: &mut Report) {
    let zeros = s.zeros().clone();
    report.spectral = Some(classify_spectrality(&s.inst, &zeros));
    report.orthogonality = Some(classify_orthogonality(&s.inst, &zeros));
    report.zero_structure = Some(zeros);
}

fn construct_into(
    s: &mut Session,
    family: Family,
    n: u64,
    report: &mut Report,
) -> Result<FrequencySet> {
    let f = s.family(family, n)?;
    let a = s.a()?;
    let bizero = verify_bizero(&s.inst, &f, a, f.default_kmax());
    report.construction = Some(ConstructionReport {
        family: f.clone(),
        bizero,
    });
    Ok(f)
}

fn hadamard_into(s: &mut Session, numeric: Option<f64>, report: &mut Report) -> Result<()> {
    let zeros = s.zeros().clone();
    let triple = spectral_hadamard_triple(&s.inst, &zeros)?;
    let mode = numeric.map_or(HadamardMode::Exact, |tol| HadamardMode::Numeric { tol });
    let certificate = hadamard_check(&triple.m, &triple.digit_vecs(), &triple.l, mode)?;
    report.hadamard = Some(HadamardReport {
        triple,
        certificate,
    });
    Ok(())
}

fn qscan_into(
    s: &mut Session,
    f: &FrequencySet,
    grid: usize,
    win: Window,
    report: &mut Report,
) -> Result<()> {
    let a = s.a().ok();
    let eps = s.problem.options.eps;
    let eval = FourierEvaluator::new(&s.inst, a);
    let stats = grid_scan(&eval, &f.points, win, grid, eps);
    let orthogonal = stats.max <= 1.0 + stats.max_error + 1e-9;
    report.qscan = Some(QScanReport {
        family: f.provenance.clone(),
        points: f.len(),
        grid,
        window: win,
        eps,
        stats,
        orthogonal,
    });
    Ok(())
}

fn clique_into(
    s: &mut Session,
    kmax: u64,
    radius: i64,
    seed: Option<u64>,
    report: &mut Report,
) -> Result<()> {
    let a = s.a()?;
    let mut pool = enumerate_candidates(&s.inst, a, kmax, radius);
    if let Some(n) = seed {
        let zeros = s.zeros().clone();
        pool.seed(&graded_family(&s.inst, &zeros, n)?);
    }
    let result = max_orthogonal_clique(&s.inst, a, &pool);
    let zeros = s.zeros().clone();
    if let OrthoOutcome::AtMostP { p, .. } = classify_orthogonality(&s.inst, &zeros).outcome {
        if result.size as u64 > p {
            report.errors.push(format!(
                "clique of size {} exceeds the AtMostP bound {p}: the implementation or the classification is wrong",
                result.size
            ));
        }
    }
    report.clique = Some(result);
    Ok(())
}

fn parse_size(size: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("size must be WxH, got {size}"),
    };
    let (w, h) = size.split_once('x').ok_or_else(bad)?;
    Ok((
        w.trim().parse().map_err(|_| bad())?,
        h.trim().parse().map_err(|_| bad())?,
    ))
}

fn render_into(
    s: &mut Session,
    depth: u32,
    size: (usize, usize),
    heat: bool,
    out_dir: &Path,
    report: &mut Report,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let cloud = attractor_points(&s.inst, depth, DEFAULT_POINT_CAP)?;
    let win = bounding_window(&cloud);
    let img = rasterize_cloud(&cloud, size.0, size.1, &win)?;
    let tag = s.problem.name.clone();
    let path = out_dir.join(ppm_file_name(&tag, depth, size.0, size.1));
    img.write_ppm(&path)?;
    let mut files = vec![path];
    let (mut sites_n, mut max_site) = (0, None);
    if heat {
        let a = s.a().ok();
        let hw = window(s.problem.options.heat_window);
        let sites = a
            .map(|a| zero_sites(&s.inst, a, &hw, 6))
            .unwrap_or_default();
        let eval = FourierEvaluator::new(&s.inst, a);
        let field = heat_field(&eval, hw, size.0, size.1, &sites, s.problem.options.eps);
        sites_n = field.sites.len();
        max_site = field
            .sites
            .iter()
            .map(|&(c, r)| field.get(c, r))
            .reduce(f64::max);
        let path = out_dir.join(heat_file_name(&tag, size.0, size.1));
        rasterize_heat(&field)?.write_ppm(&path)?;
        files.push(path);
    }
    report.render = Some(RenderReport {
        points: cloud.points.len(),
        depth,
        files,
        zero_sites: sites_n,
        max_site_value: max_site,
    });
    Ok(())
}

fn run_all(s: &mut Session, report: &mut Report) -> Result<()> {
    classify_into(s, report);
    if s.zeros().a().is_none() {
        return Ok(());
    }
    if let Some(SpectralOutcome::Spectral { .. }) = report.spectral.as_ref().map(|v| &v.outcome) {
        if let Err(e) = hadamard_into(s, None, report) {
            report.errors.push(e.to_string());
        }
    }
    let (family, n) = match report.orthogonality.as_ref().map(|o| &o.outcome) {
        Some(OrthoOutcome::InfiniteOrthogonalSet) => (Family::Infinite, 2),
        Some(OrthoOutcome::ArbitraryFiniteNumbers) => (Family::Graded, 2),
        _ => (Family::PElement, 1),
    };
    let f = construct_into(s, family, n, report)?;
    let o = s.problem.options.clone();
    qscan_into(s, &f, o.grid, window(o.window), report)?;
    clique_into(s, o.kmax, o.radius, None, report)?;
    render_into(s, 4, (512, 512), false, &o.output_dir, report)
}

/// Runs one command on a loaded problem.
pub fn execute(command: &Command, problem: ProblemFile) -> Report {
    let mut report = Report {
        command: command.name().to_string(),
        ..Default::default()
    };
    let mut s = match Session::new(problem.clone()) {
        Ok(s) => s,
        Err(e) => {
            report.instance.name = problem.name;
            report.errors.push(e.to_string());
            report.exit_code = EXIT_ERROR;
            return report;
        }
    };
    report.instance = InstanceEcho::new(&s.problem.name, &s.inst);
    let opts = s.problem.options.clone();
    let outcome: Result<()> = match command {
        Command::Zeros { .. } => {
            report.zero_structure = Some(s.zeros().clone());
            Ok(())
        }
        Command::Classify { .. } => {
            classify_into(&mut s, &mut report);
            Ok(())
        }
        Command::Construct { family, n, .. } => {
            construct_into(&mut s, *family, *n, &mut report).map(|_| ())
        }
        Command::Hadamard { numeric, .. } => hadamard_into(&mut s, *numeric, &mut report),
        Command::Qscan {
            family,
            n,
            grid,
            window: w,
            ..
        } => s.family(*family, *n).and_then(|f| {
            let win = w
                .as_ref()
                .map_or(window(opts.window), |v| window([v[0], v[1], v[2], v[3]]));
            qscan_into(&mut s, &f, grid.unwrap_or(opts.grid), win, &mut report)
        }),
        Command::Clique {
            kmax,
            radius,
            seed_graded,
            ..
        } => clique_into(
            &mut s,
            kmax.unwrap_or(opts.kmax),
            radius.unwrap_or(opts.radius),
            *seed_graded,
            &mut report,
        ),
        Command::Render {
            depth,
            size,
            heat,
            out_dir,
            ..
        } => parse_size(size).and_then(|sz| {
            let dir = out_dir.clone().unwrap_or(opts.output_dir.clone());
            render_into(&mut s, *depth, sz, *heat, &dir, &mut report)
        }),
        Command::All { .. } => run_all(&mut s, &mut report),
    };
    if let Err(e) = outcome {
        report.errors.push(e.to_string());
    }
    report.exit_code = if !report.errors.is_empty() {
        EXIT_ERROR
    } else {
        verdict_exit(&report, s.inst.m.equal_rho())
    };
    report
}

/// Full CLI behaviour minus process exit: returns (exit code, stdout text).
pub fn run(cli: &Cli) -> (i32, String) {
    let path = cli.command.problem();
    let report = match ProblemFile::load(path) {
        Ok(problem) => execute(&cli.command, problem),
        Err(e) => Report {
            command: cli.command.name().to_string(),
            errors: vec![format!("{}: {e}", path.display())],
            exit_code: EXIT_ERROR,
            ..Default::default()
        },
    };
    let mut code = report.exit_code;
    if let Some(out) = &cli.report {
        if let Err(e) = std::fs::write(out, report.to_json()) {
            eprintln!("cannot write {}: {e}", out.display());
            code = EXIT_ERROR;
        }
    }
    let text = if cli.json {
        report.to_json()
    } else {
        report.to_text()
    };
    (code, text)
}
