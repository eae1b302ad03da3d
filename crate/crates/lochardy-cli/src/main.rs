use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use lochardy::atoms::{l1q_decompose, t1_decompose, DensityConfig};
use lochardy::complex::{FormField, WeightedComplex};
use lochardy::corpus;
use lochardy::covering::{unit_cubes, vitali_select, whitney_cover, BallRef};
use lochardy::hardy::{
    hinfty_operator_norm, hp_norm, lq_atom_to_molecule, molecule_h1_bound, tent_atom_to_molecule, validate_molecule,
    HardyConfig,
};
use lochardy::holo::{contour_apply, q_transform, Calculus, ContourSpec, HoloFn, SectorParams, SpectralCalculus};
use lochardy::offdiag::{boundary_samples, measured_commutator_constant, resolvent_profile, verify_bound, BoundConstants};
use lochardy::space::{fit_growth, Space};
use lochardy::tent::{TentField, TimeGrid};
use lochardy::{verify, C64};

#[derive(Parser)]
#[command(name = "lochardy", version, about = "Local Hardy space computations on finite spaces and complexes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Global {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Time grid as `q,M`.
    #[arg(long, global = true, value_parser = parse_pair)]
    grid: Option<(f64, f64)>,
    /// Sector as `theta,r`.
    #[arg(long, global = true, value_parser = parse_pair)]
    sector: Option<(f64, f64)>,
    /// Contour tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit growth constants of a space.
    Space {
        space: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
        scales: Vec<f64>,
    },
    /// Vitali selection, Whitney cover or unit cubes.
    Cover {
        #[arg(value_enum)]
        kind: CoverKind,
        space: PathBuf,
        /// Balls `[{"center", "radius"}, ...]` (vitali) or point list (whitney);
        /// seeded random input when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        h: f64,
    },
    /// Atomic decomposition of a tent field (t1) or a vector (lq).
    Decompose {
        #[arg(value_enum)]
        kind: DecomposeKind,
        space: PathBuf,
        input: PathBuf,
    },
    /// Apply `f(D)` to a form.
    Calculus {
        /// Complex JSON file or generator such as `path:40`.
        complex: String,
        /// Function descriptor JSON file.
        function: PathBuf,
        /// Form coefficients `[[re, im], ...]`; seeded random when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Route::Contour)]
        route: Route,
    },
    /// Resolvent shell profiles on the sector boundary.
    Offdiag {
        complex: String,
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[arg(long, default_value_t = 2.0)]
        width: f64,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
    },
    /// Hardy norms, molecules and H^∞ ratios on a seeded corpus.
    Hardy {
        complex: String,
        #[arg(long, default_value_t = 10)]
        corpus: usize,
    },
    /// Run the acceptance suite.
    Verify {
        /// Criterion ids; all when absent.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverKind {
    Vitali,
    Whitney,
    Cubes,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecomposeKind {
    T1,
    Lq,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Route {
    Contour,
    Spectral,
}

/// Settings read from `--config`.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    grid: Option<(f64, usize)>,
    sector: Option<(f64, f64)>,
    tolerance: Option<f64>,
}

struct Run {
    seed: u64,
    out: PathBuf,
    grid: Option<TimeGrid>,
    sector: Option<SectorParams>,
    tolerance: Option<f64>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

type Fallible<T> = Result<T, Box<dyn std::error::Error>>;

impl Run {
    fn resolve(g: &Global) -> Fallible<Run> {
        let cfg: RunConfig = match &g.config {
            Some(p) => serde_json::from_str(&read(p)?)?,
            None => RunConfig::default(),
        };
        let grid = match (g.grid, cfg.grid) {
            (Some((q, m)), _) => {
                if m.fract() != 0.0 || m < 1.0 {
                    return Err(format!("grid size must be a positive integer, got {m}").into());
                }
                Some(TimeGrid::gregory(q, m as usize)?)
            }
            (None, Some((q, m))) => Some(TimeGrid::gregory(q, m)?),
            _ => None,
        };
        let sector = match g.sector.or(cfg.sector) {
            Some((theta, r)) => Some(SectorParams::new(theta, r)?),
            None => None,
        };
        let out = g.out.clone().or(cfg.out).unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&out)?;
        Ok(Run { seed: g.seed.or(cfg.seed).unwrap_or(0), out, grid, sector, tolerance: g.tolerance.or(cfg.tolerance) })
    }

    fn write(&self, name: &str, text: &str) -> Fallible<PathBuf> {
        let p = self.out.join(name);
        fs::write(&p, text)?;
        Ok(p)
    }
}

fn read(p: &Path) -> Fallible<String> {
    fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()).into())
}

fn load_space(p: &Path) -> Fallible<Space> {
    Ok(Space::from_json(&read(p)?)?)
}

fn load_complex(spec: &str) -> Fallible<WeightedComplex> {
    let p = Path::new(spec);
    if p.exists() {
        Ok(WeightedComplex::from_json(&read(p)?)?)
    } else {
        Ok(WeightedComplex::generate(spec)?)
    }
}

fn load_vector(p: &Path) -> Fallible<Vec<C64>> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(&read(p)?)?;
    Ok(raw.into_iter().map(|v| C64::new(v[0], v[1])).collect())
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Run::resolve(&cli.global).and_then(|run| dispatch(&run, cli.cmd));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check the command ran passed.
fn dispatch(run: &Run, cmd: Cmd) -> Fallible<bool> {
    match cmd {
        Cmd::Space { space, scales } => cmd_space(run, &space, &scales),
        Cmd::Cover { kind, space, input, h } => cmd_cover(run, kind, &space, input.as_deref(), h),
        Cmd::Decompose { kind, space, input } => cmd_decompose(run, kind, &space, &input),
        Cmd::Calculus { complex, function, input, route } => cmd_calculus(run, &complex, &function, input.as_deref(), route),
        Cmd::Offdiag { complex, source, width, a } => cmd_offdiag(run, &complex, source, width, a),
        Cmd::Hardy { complex, corpus } => cmd_hardy(run, &complex, corpus),
        Cmd::Verify { only } => cmd_verify(run, &only),
    }
}

fn cmd_space(run: &Run, space: &Path, scales: &[f64]) -> Fallible<bool> {
    let s = load_space(space)?;
    let report = fit_growth(&s, scales)?;
    let p = run.write("growth.json", &pretty(&report))?;
    println!(
        "{}: n = {}, envelope A = {:.4} kappa = {} lambda = {} -> {}",
        s.name(),
        s.len(),
        report.envelope.a,
        report.envelope.kappa,
        report.envelope.lambda,
        p.display()
    );
    Ok(true)
}

fn cmd_cover(run: &Run, kind: CoverKind, space: &Path, input: Option<&Path>, h: f64) -> Fallible<bool> {
    let s = load_space(space)?;
    let (name, text) = match kind {
        CoverKind::Vitali => {
            let balls: Vec<BallRef> = match input {
                Some(p) => serde_json::from_str(&read(p)?)?,
                None => corpus::random_balls(&s, run.seed, 40, 0.05, 2.0),
            };
            if let Some(b) = balls.iter().find(|b| b.center >= s.len()) {
                return Err(format!("ball center {} outside the space", b.center).into());
            }
            let v = vitali_select(&s, &balls);
            println!("{} balls, {} selected", balls.len(), v.selected.len());
            ("vitali.json", pretty(&v))
        }
        CoverKind::Whitney => {
            let open: Vec<usize> = match input {
                Some(p) => serde_json::from_str(&read(p)?)?,
                None => corpus::random_subset(run.seed, s.len(), 0.5),
            };
            let w = whitney_cover(&s, &open, h)?;
            println!("{} balls, intersection bound {}", w.balls.len(), w.intersection_bound);
            ("whitney.json", pretty(&w))
        }
        CoverKind::Cubes => {
            let u = unit_cubes(&s);
            println!("{} cubes", u.cubes.len());
            ("cubes.json", pretty(&u))
        }
    };
    let p = run.write(name, &text)?;
    println!("-> {}", p.display());
    Ok(true)
}

fn cmd_decompose(run: &Run, kind: DecomposeKind, space: &Path, input: &Path) -> Fallible<bool> {
    let s = load_space(space)?;
    let atoms: Vec<serde_json::Value> = match kind {
        DecomposeKind::T1 => {
            let f = TentField::from_json(&read(input)?)?;
            t1_decompose(&s, &f, &DensityConfig::default())?
                .into_iter()
                .map(|a| {
                    let field: serde_json::Value = serde_json::from_str(&a.field.to_json()).expect("valid JSON");
                    json!({"ball": a.ball, "weight": a.weight, "field": field})
                })
                .collect()
        }
        DecomposeKind::Lq => {
            let u = load_vector(input)?;
            let cubes = unit_cubes(&s);
            l1q_decompose(&s, &cubes, &u)?.into_iter().map(|a| serde_json::to_value(a).expect("serializes")).collect()
        }
    };
    let p = run.write("atoms.json", &pretty(&atoms))?;
    println!("{} atoms -> {}", atoms.len(), p.display());
    Ok(true)
}

fn cmd_calculus(run: &Run, complex: &str, function: &Path, input: Option<&Path>, route: Route) -> Fallible<bool> {
    let c = load_complex(complex)?;
    let f = HoloFn::from_json(&read(function)?)?;
    let u = match input {
        Some(p) => FormField::new(load_vector(p)?),
        None => corpus::random_form(run.seed, &c),
    };
    if u.len() != c.len() {
        return Err(format!("input has {} coefficients, the complex has {} simplices", u.len(), c.len()).into());
    }
    let d = c.dirac();
    let (v, estimate) = match route {
        Route::Contour => {
            let mut spec = ContourSpec::for_sector(&run.sector.unwrap_or_default())?;
            if let Some(t) = run.tolerance {
                spec.tolerance = t;
            }
            contour_apply(&f, &d, &u, spec)?
        }
        Route::Spectral => (SpectralCalculus::new(&d)?.apply(&f, &u)?, 0.0),
    };
    let coeffs: Vec<[f64; 2]> = v.coeffs.iter().map(|z| [z.re, z.im]).collect();
    let p = run.write("field.json", &serde_json::to_string(&coeffs)?)?;
    println!("|f(D)u| = {:.6e}, error estimate {:.2e} -> {}", v.norm(c.weights()), estimate, p.display());
    Ok(true)
}

fn cmd_offdiag(run: &Run, complex: &str, source: usize, width: f64, a: f64) -> Fallible<bool> {
    let c = load_complex(complex)?;
    if source >= c.len() {
        return Err(format!("source simplex {source} outside the complex").into());
    }
    let sector = run.sector.unwrap_or_default();
    let c_d = measured_commutator_constant(&c, run.seed, 6);
    let k = BoundConstants { c_theta_r: 1.0 / sector.theta.sin(), c_d, a, b: 0.0 };
    let mut w = csv::Writer::from_path(run.out.join("profile.csv"))?;
    w.write_record(["z_re", "z_im", "rho", "measured", "bound", "ratio", "c_theta_r", "c_d", "a", "source"])?;
    let mut c_needed: f64 = 0.0;
    for z in boundary_samples(sector.theta, sector.r, 12) {
        let prof = resolvent_profile(&c, z, &[source], width)?;
        let rep = verify_bound(&prof, z, &k, None);
        c_needed = c_needed.max(rep.c_needed);
        for row in &rep.rows {
            w.write_record([
                z.re.to_string(),
                z.im.to_string(),
                row.rho.to_string(),
                row.measured.to_string(),
                row.bound.to_string(),
                row.ratio.to_string(),
                k.c_theta_r.to_string(),
                c_d.to_string(),
                a.to_string(),
                "c_theta_r given; c_d fitted; a given".into(),
            ])?;
        }
    }
    w.flush()?;
    println!("{}: C_D = {c_d:.4}, fitted prefactor c = {c_needed:.4e}", c.name());
    Ok(c_needed.is_finite())
}

fn cmd_hardy(run: &Run, complex: &str, size: usize) -> Fallible<bool> {
    let c = load_complex(complex)?;
    let cfg = match &run.grid {
        Some(g) => HardyConfig::with_grid(&c, run.sector, g.clone())?,
        None => HardyConfig::new(&c, run.sector)?,
    };
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let us: Vec<FormField> = (0..size as u64).map(|k| corpus::random_form(run.seed + k, &c)).collect();
    let mut w = csv::Writer::from_path(run.out.join("hardy.csv"))?;
    w.write_record(["p", "quantity", "value", "source"])?;
    let mut ok = true;
    for p in [1.0, 2.0, f64::INFINITY] {
        let norms: Vec<f64> = us.iter().map(|u| hp_norm(&cfg, u, p)).collect::<Result<_, _>>()?;
        let band: Vec<f64> = norms.iter().zip(&us).map(|(h, u)| h / u.norm(c.weights())).collect();
        let lo = band.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = band.iter().copied().fold(0.0, f64::max);
        let riesz = hinfty_operator_norm(&cfg, &HoloFn::riesz(1.0), p, &us)?;
        for (q, v) in [("hp_over_l2_min", lo), ("hp_over_l2_max", hi), ("riesz_hinfty_ratio", riesz.ratio)] {
            w.write_record([p.to_string(), q.into(), v.to_string(), "measured".into()])?;
        }
        ok &= riesz.ratio.is_finite();
    }
    let n = (cfg.kappa / 2.0).floor() as u32 + 1;
    let q = cfg.lambda.max(1.0);
    let c_d = measured_commutator_constant(&c, run.seed, 6);
    let u = corpus::random_form(run.seed, &c);
    let (tent, _) = q_transform(&cfg.calc, &u, &cfg.eta, &cfg.phi, &cfg.grid)?;
    let mut molecules = Vec::new();
    for a in t1_decompose(&cfg.space, &tent, &DensityConfig::default())?.iter().take(size) {
        molecules.push(tent_atom_to_molecule(&cfg, a, n, q, c_d)?);
    }
    for a in l1q_decompose(&cfg.space, &cfg.cubes, &u.coeffs)?.iter().take(size) {
        molecules.push(lq_atom_to_molecule(&cfg, a, n, q, c_d)?);
    }
    let mut records = Vec::new();
    for m in &molecules {
        let rep = validate_molecule(&cfg.space, Some(&cfg.dirac), &m.molecule);
        let (t, l) = molecule_h1_bound(&cfg, &m.molecule)?;
        ok &= rep.pass;
        records.push(json!({"conversion": m, "validation": rep, "h1": {"tent": t, "lq": l}}));
    }
    w.write_record(["1", "kappa", &cfg.kappa.to_string(), "fitted"])?;
    w.write_record(["1", "lambda", &cfg.lambda.to_string(), "fitted"])?;
    w.flush()?;
    run.write("molecules.json", &pretty(&records))?;
    println!("{}: {} molecules, all valid: {ok}", c.name(), molecules.len());
    Ok(ok)
}

fn cmd_verify(run: &Run, only: &[u32]) -> Fallible<bool> {
    let ids: Vec<u32> = if only.is_empty() { verify::CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    let mut reports = Vec::new();
    for id in ids {
        let rep = verify::run(id, run.seed).ok_or_else(|| format!("no criterion {id}"))?;
        println!("{}", rep.line());
        reports.push(rep);
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    run.write("verify.json", &pretty(&reports))?;
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    Ok(failed == 0)
}
