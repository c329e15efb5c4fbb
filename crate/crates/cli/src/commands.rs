use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sphere_mt::conformal::{bubble_pair, mobius_factor, MobiusMap};
use sphere_mt::functional::{linspace, Functional, Normalization};
use sphere_mt::optimize::{continuation, minimize, Init, MinimizeConfig, Status};
use sphere_mt::{
    build_grid, bubble_pair_sweep, energy_expansion_report, Error, Field, Grid, Spectrum,
    Transform, DEFAULT_N_PHI, DEFAULT_N_THETA,
};

use crate::args::{
    CheckArgs, Cli, Command, EvaluateArgs, ExpansionArgs, FieldKind, MakeFieldArgs, MinimizeArgs,
    SweepArgs,
};
use crate::check;
use crate::error::{code, CliError, CliResult};
use crate::field_file::{Encoding, FieldFile, FORMAT_VERSION};
use crate::report::{to_json_pretty, Csv, Envelope};

pub const GRID_ENV: &str = "SPHERE_MT_GRID";

/// Grid shape: explicit flags, then `SPHERE_MT_GRID` (`"64x128"`), then the default.
pub fn grid_shape(cli: &Cli) -> CliResult<(usize, usize)> {
    let (mut n_theta, mut n_phi) = (DEFAULT_N_THETA, DEFAULT_N_PHI);
    if let Ok(value) = std::env::var(GRID_ENV) {
        let parsed = value
            .split_once(['x', 'X'])
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
        match parsed {
            Some((a, b)) => (n_theta, n_phi) = (a, b),
            None => {
                return Err(CliError::Usage(format!(
                    "{GRID_ENV} must look like 64x128, got {value:?}"
                )))
            }
        }
    }
    Ok((cli.n_theta.unwrap_or(n_theta), cli.n_phi.unwrap_or(n_phi)))
}

fn grid_from(cli: &Cli) -> CliResult<Arc<Grid>> {
    let (n_theta, n_phi) = grid_shape(cli)?;
    Ok(build_grid(n_theta, n_phi)?)
}

/// Loads a field file; its grid wins unless grid flags contradict it.
fn load_field(cli: &Cli, path: &Path) -> CliResult<(Field, FieldFile)> {
    let file = FieldFile::read(path)?;
    let h = &file.header;
    if cli.n_theta.is_some_and(|n| n != h.n_theta) || cli.n_phi.is_some_and(|n| n != h.n_phi) {
        return Err(Error::GridMismatch.into());
    }
    let grid = build_grid(h.n_theta, h.n_phi)?;
    let field = Field::from_values(grid, file.values.clone())?;
    Ok((field, file))
}

fn encoding(json: bool) -> Encoding {
    if json {
        Encoding::Json
    } else {
        Encoding::F64le
    }
}

fn field_file(u: &Field, l_max: Option<usize>, params: serde_json::Value, json: bool) -> FieldFile {
    let g = u.grid();
    FieldFile::new(g.n_theta(), g.n_phi(), l_max, params, u.values().to_vec(), encoding(json))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
}

fn random_spectrum(seed: u64, l_max: usize, scale: f64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Spectrum::zeros(l_max);
    for l in 1..=l_max {
        for m in -(l as i64)..=l as i64 {
            s.set(l, m, scale * rng.gen_range(-1.0..1.0) / (1.0 + l as f64));
        }
    }
    s
}

/// Runs one parsed command and returns the exit code.
pub fn run(cli: &Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Check(a) => cmd_check(cli, a),
        Command::MakeField(a) => cmd_make_field(cli, a),
        Command::Evaluate(a) => cmd_evaluate(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Minimize(a) => cmd_minimize(cli, a),
        Command::Expansion(a) => cmd_expansion(cli, a),
    }
}

fn cmd_check(cli: &Cli, a: &CheckArgs) -> CliResult<u8> {
    let loaded = a.field.as_deref().map(|p| load_field(cli, p)).transpose()?;
    let grid = match &loaded {
        Some((u, _)) => Arc::clone(u.grid()),
        None => grid_from(cli)?,
    };
    let rows = check::run(&grid, a.l_max, cli.seed(), loaded.as_ref().map(|(u, _)| u))?;
    print!("{}", check::table(&rows));
    match rows.iter().find(|r| !r.pass) {
        Some(r) => Err(CliError::Invariant(r.name.clone())),
        None => Ok(code::SUCCESS),
    }
}

fn cmd_make_field(cli: &Cli, a: &MakeFieldArgs) -> CliResult<u8> {
    let grid = grid_from(cli)?;
    let (u, l_max, params) = match a.kind {
        FieldKind::Zero => (Field::zeros(grid), None, json!({"kind": "zero"})),
        FieldKind::BubblePair => (
            bubble_pair(a.t, &grid)?.field,
            None,
            json!({"kind": "bubble_pair", "t": a.t}),
        ),
        FieldKind::Conformal => (
            mobius_factor(&MobiusMap::north(a.t)?, &grid)?,
            None,
            json!({"kind": "conformal", "t": a.t, "pole": [0.0, 0.0, 1.0]}),
        ),
        FieldKind::Random => {
            let tr = Transform::new(grid, a.l_max)?;
            let u = tr.synthesize(&random_spectrum(cli.seed(), a.l_max, a.scale))?;
            (
                u,
                Some(a.l_max),
                json!({"kind": "random", "seed": cli.seed(), "scale": a.scale}),
            )
        }
    };
    field_file(&u, l_max, params, a.json).write(&a.out)?;
    Ok(code::SUCCESS)
}

#[derive(Serialize)]
struct EvaluateBody {
    source: serde_json::Value,
    report: sphere_mt::FunctionalReport<f64>,
    residual: sphere_mt::ResidualReport<f64>,
}

fn cmd_evaluate(cli: &Cli, a: &EvaluateArgs) -> CliResult<u8> {
    let (u, source) = match (&a.field, a.make_bubble_pair) {
        (Some(path), _) => {
            let (u, file) = load_field(cli, path)?;
            let mut source = file.header.params.clone();
            if let serde_json::Value::Object(m) = &mut source {
                m.insert("content_hash".into(), file.header.content_hash.clone().into());
            }
            (u, source)
        }
        (None, Some(t)) => {
            let grid = grid_from(cli)?;
            (bubble_pair(t, &grid)?.field, json!({"kind": "bubble_pair", "t": t}))
        }
        (None, None) => unreachable!("clap requires a field source"),
    };
    let f = Functional::for_grid(Arc::clone(u.grid()));
    let report = f.evaluate(&u, a.alpha, a.eps)?;
    let residual = f.el_residual(&u, a.eps.unwrap_or(0.0), Normalization::U)?;
    let g = u.grid();
    let env = Envelope {
        format_version: FORMAT_VERSION,
        kind: "functional_report",
        n_theta: g.n_theta(),
        n_phi: g.n_phi(),
        body: EvaluateBody {
            source: source.clone(),
            report,
            residual,
        },
    };
    if let Some(path) = &a.save_field {
        field_file(&u, None, source, a.json_field).write(path)?;
    }
    emit(a.out.as_deref(), &to_json_pretty(&env))?;
    Ok(code::SUCCESS)
}

fn fmt_alpha(a: f64) -> String {
    format!("I_{a}")
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> CliResult<u8> {
    if a.steps == 0 || !(a.t_min >= 1.0) || !(a.t_max >= a.t_min) {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ t-min ≤ t-max and steps ≥ 1, got [{}, {}] with {} steps",
            a.t_min, a.t_max, a.steps
        ))
        .into());
    }
    let grid = grid_from(cli)?;
    let ts = linspace(a.t_min, a.t_max, a.steps);
    let rows = pool(cli.jobs).install(|| {
        ts.par_iter()
            .map(|&t| bubble_pair_sweep(&grid, &[t], &a.alpha_list).map(|mut r| r.remove(0)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut header: Vec<String> = ["t", "avg_grad_sq", "avg_u", "log_avg_exp"]
        .map(String::from)
        .to_vec();
    header.extend(a.alpha_list.iter().map(|&x| fmt_alpha(x)));
    let mut csv = Csv::new(&header);
    for r in &rows {
        let mut cells = vec![r.t, r.avg_grad_sq, r.avg_u, r.log_avg_exp];
        cells.extend(&r.i_alpha);
        csv.row(&cells);
    }
    emit(a.out.as_deref(), &csv.finish())?;
    Ok(code::SUCCESS)
}

fn cmd_expansion(cli: &Cli, a: &ExpansionArgs) -> CliResult<u8> {
    let pairs: Vec<(f64, f64)> = a
        .t_list
        .iter()
        .flat_map(|&t| a.r_list.iter().map(move |&r| (t, r)))
        .collect();
    let rows = pool(cli.jobs).install(|| {
        pairs
            .par_iter()
            .map(|&(t, r)| energy_expansion_report(t, r))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let header = [
        "t",
        "R",
        "lambda",
        "tau",
        "ball_radius",
        "I1_closed",
        "I1_numeric",
        "I1_truncated",
        "truncation_gap",
        "I1_sphere",
        "bubble_mass_closed",
        "bubble_mass_numeric",
        "ball_mass_sphere",
        "D",
        "obstruction",
    ]
    .map(String::from);
    let mut csv = Csv::new(&header);
    for r in &rows {
        csv.row(&[
            r.t,
            r.r,
            r.lambda,
            r.tau,
            r.ball_radius,
            r.i1_closed,
            r.i1_numeric,
            r.i1_truncated,
            r.truncation_gap,
            r.i1_sphere,
            r.bubble_mass_closed,
            r.bubble_mass_numeric,
            r.ball_mass_sphere,
            r.d_value,
            r.obstruction,
        ]);
    }
    emit(a.out.as_deref(), &csv.finish())?;
    Ok(code::SUCCESS)
}

/// Entries of a `minimize --config` file. Flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub format_version: Option<u32>,
    pub eps: Option<f64>,
    pub continuation: Option<Vec<f64>>,
    pub n_theta: Option<usize>,
    pub n_phi: Option<usize>,
    pub l_max: Option<usize>,
    /// Same syntax as `--init`.
    pub init: Option<String>,
    pub scale: Option<f64>,
    pub seed: Option<u64>,
    pub tol_grad: Option<f64>,
    pub tol_constraint: Option<f64>,
    pub mu0: Option<f64>,
    pub mu_growth: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub blowup_max_u: Option<f64>,
    pub blowup_mass: Option<f64>,
}

impl ConfigFile {
    fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(v) = cfg.format_version.filter(|&v| v != FORMAT_VERSION) {
            return Err(CliError::Config(format!("unsupported format_version {v}")));
        }
        Ok(cfg)
    }
}

enum InitSpec {
    Zero,
    Random,
    BubblePair(f64),
    File(PathBuf),
}

fn parse_init(s: &str) -> CliResult<InitSpec> {
    let bad = || CliError::Usage(format!("--init expects zero, random, bubble-pair:T or file:PATH, got {s:?}"));
    match s.split_once(':') {
        None if s == "zero" => Ok(InitSpec::Zero),
        None if s == "random" => Ok(InitSpec::Random),
        Some(("bubble-pair", t)) => t.parse().map(InitSpec::BubblePair).map_err(|_| bad()),
        Some(("file", p)) if !p.is_empty() => Ok(InitSpec::File(PathBuf::from(p))),
        _ => Err(bad()),
    }
}

#[derive(Serialize)]
struct MinimizeBody<R: Serialize> {
    init: String,
    config: MinimizeConfig<f64>,
    #[serde(flatten)]
    result: R,
}

fn cmd_minimize(cli: &Cli, a: &MinimizeArgs) -> CliResult<u8> {
    let file = a.config.as_deref().map(ConfigFile::read).transpose()?.unwrap_or_default();
    let eps_list = match (a.eps, &a.continuation) {
        (Some(e), _) => vec![e],
        (None, Some(list)) => list.clone(),
        (None, None) => match (file.eps, &file.continuation) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either eps or continuation, not both".into()))
            }
            (Some(e), None) => vec![e],
            (None, Some(list)) => list.clone(),
            (None, None) => {
                return Err(CliError::Usage("minimize needs --eps or --continuation".into()))
            }
        },
    };
    let is_continuation = a.continuation.is_some() || (a.eps.is_none() && file.continuation.is_some());
    if eps_list.is_empty() {
        return Err(CliError::Usage("empty --continuation list".into()));
    }

    let (mut n_theta, mut n_phi) = grid_shape(cli)?;
    if cli.n_theta.is_none() {
        n_theta = file.n_theta.unwrap_or(n_theta);
    }
    if cli.n_phi.is_none() {
        n_phi = file.n_phi.unwrap_or(n_phi);
    }
    let mut cfg = MinimizeConfig::<f64>::new(eps_list[0]).with_grid(n_theta, n_phi);
    cfg.l_max = a.l_max.or(file.l_max).unwrap_or(cfg.l_max);
    cfg.tol_grad = a.tol_grad.or(file.tol_grad).unwrap_or(cfg.tol_grad);
    cfg.tol_constraint = a.tol_constraint.or(file.tol_constraint).unwrap_or(cfg.tol_constraint);
    cfg.max_outer = a.max_outer.or(file.max_outer).unwrap_or(cfg.max_outer);
    cfg.max_inner = a.max_inner.or(file.max_inner).unwrap_or(cfg.max_inner);
    cfg.mu0 = file.mu0.unwrap_or(cfg.mu0);
    cfg.mu_growth = file.mu_growth.unwrap_or(cfg.mu_growth);
    cfg.blowup_max_u = file.blowup_max_u.unwrap_or(cfg.blowup_max_u);
    cfg.blowup_mass = file.blowup_mass.unwrap_or(cfg.blowup_mass);

    let init_str = a.init.clone().or(file.init.clone()).unwrap_or_else(|| "zero".into());
    let seed = cli.seed.or(file.seed).unwrap_or(crate::args::DEFAULT_SEED);
    cfg.init = match parse_init(&init_str)? {
        InitSpec::Zero => Init::Zero,
        InitSpec::Random => Init::Random {
            seed,
            scale: a.scale.or(file.scale).unwrap_or(0.1),
        },
        InitSpec::BubblePair(t) => Init::BubblePair { t },
        InitSpec::File(path) => {
            let f = FieldFile::read(&path)?;
            if (f.header.n_theta, f.header.n_phi) != (cfg.n_theta, cfg.n_phi) {
                return Err(Error::GridMismatch.into());
            }
            Init::Values(f.values)
        }
    };
    let init_label = match &cfg.init {
        Init::Random { seed, scale } => format!("random:seed={seed},scale={scale}"),
        _ => init_str,
    };
    let mut echo = cfg.clone();
    if matches!(echo.init, Init::Values(_)) {
        // the values live in the referenced file
        echo.init = Init::Zero;
    }

    let (text, exit, u_star, l_max) = if is_continuation {
        let rep = continuation(&eps_list, &cfg)?;
        let exit = rep
            .runs
            .iter()
            .map(|r| status_code(r.status))
            .max_by_key(|&c| severity(c))
            .unwrap_or(code::SUCCESS);
        let last = rep.runs.last().expect("non-empty list");
        let u = last.u_star.clone();
        let env = Envelope {
            format_version: FORMAT_VERSION,
            kind: "continuation_report",
            n_theta: cfg.n_theta,
            n_phi: cfg.n_phi,
            body: MinimizeBody {
                init: init_label,
                config: echo,
                result: &rep,
            },
        };
        (to_json_pretty(&env), exit, u, cfg.l_max)
    } else {
        let r = minimize(&cfg)?;
        let env = Envelope {
            format_version: FORMAT_VERSION,
            kind: "minimize_result",
            n_theta: cfg.n_theta,
            n_phi: cfg.n_phi,
            body: MinimizeBody {
                init: init_label,
                config: echo,
                result: &r,
            },
        };
        (to_json_pretty(&env), status_code(r.status), r.u_star.clone(), cfg.l_max)
    };
    if let Some(path) = &a.field_out {
        let params = json!({"kind": "minimizer", "eps": eps_list.last()});
        field_file(&u_star, Some(l_max), params, a.json_field).write(path)?;
    }
    emit(a.out.as_deref(), &text)?;
    Ok(exit)
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Converged => code::SUCCESS,
        Status::BlowupDetected => code::BLOWUP,
        Status::IterationCap => code::ITERATION_CAP,
    }
}

/// Blow-up outranks an iteration cap, which outranks convergence.
fn severity(c: u8) -> u8 {
    match c {
        code::BLOWUP => 2,
        code::ITERATION_CAP => 1,
        _ => 0,
    }
}
