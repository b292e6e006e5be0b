//! Command implementations behind the `cfid` binary.

pub mod args;
pub mod embedding;
pub mod error;
pub mod output;

use std::fs;
use std::path::Path;

use cfid::experiments::{alpha_sweep, contour_grid, default_alphas, run_synthetic};
use cfid::metrics::all_metrics;
use cfid::ot_oracle::{
    cwd_discrete, mwd_discrete, random_instance_pair, rwd3_discrete, rwd_discrete,
    shuffled_pairing_instance, DiscreteJoint, OracleChain,
};
use cfid::stats::estimate_cond_pair;
use cfid::Tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::args::{Cli, Command, ExperimentKind, MetricsArgs, OracleArgs, OutputFormat};
use crate::embedding::FileFormat;
use crate::error::{CliError, Result};
use crate::output::{write_atomic, Rendered};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 0;

/// Runs one invocation and writes its output to `--out` or stdout.
pub fn run(cli: &Cli) -> Result<()> {
    let (body, failure) = match &cli.command {
        Command::Metrics(args) => (metrics(args, cli)?, None),
        Command::Oracle(args) => oracle(args, cli)?,
        Command::Experiment { kind } => (experiment(kind, cli)?, None),
        Command::Convert { input, output, to } => {
            if cli.out.is_some() {
                return Err(CliError::Usage("convert writes to its OUTPUT argument, not --out".into()));
            }
            convert(input, output, *to)?;
            return Ok(());
        }
    };
    match &cli.out {
        Some(path) => write_atomic(path, &body)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&body)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    failure.map_or(Ok(()), Err)
}

fn check_tolerance(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must lie in [0, 1), got {value}")))
    }
}

pub fn metrics(args: &MetricsArgs, cli: &Cli) -> Result<Vec<u8>> {
    check_tolerance("eps", args.eps)?;
    check_tolerance("clamp-tol", args.clamp_tol)?;
    let tol = Tolerances {
        clamp_tol: args.clamp_tol,
        pinv_eps: args.eps,
    };
    let x = embedding::read(&args.x)?;
    let y = embedding::read(&args.y)?;
    let yhat = embedding::read(&args.yhat)?;
    for (path, e) in [(&args.y, &y), (&args.yhat, &yhat)] {
        if e.rows() != x.rows() {
            return Err(CliError::Usage(format!(
                "{} has {} rows but {} has {}",
                path.display(),
                e.rows(),
                args.x.display(),
                x.rows()
            )));
        }
    }
    if y.cols() != yhat.cols() {
        return Err(CliError::Usage(format!(
            "{} has {} columns but {} has {}",
            args.y.display(),
            y.cols(),
            args.yhat.display(),
            yhat.cols()
        )));
    }
    let ps = estimate_cond_pair(&x.to_matrix(), &y.to_matrix(), &yhat.to_matrix())?;
    let reports: Vec<_> = all_metrics(&ps, &tol)?
        .into_iter()
        .map(|r| r.with_seed(cli.seed))
        .collect();
    let rendered = Rendered::Reports(&reports);
    match cli.format {
        OutputFormat::Row => Ok(output::table_row(&args.label, &reports)),
        format => rendered.render(format),
    }
}

#[derive(Deserialize)]
struct InstanceFile {
    a: DiscreteJoint,
    b: DiscreteJoint,
}

fn load_instance(path: &Path) -> Result<(DiscreteJoint, DiscreteJoint)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let inst: InstanceFile = serde_json::from_slice(&bytes).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((inst.a, inst.b))
}

pub fn oracle(args: &OracleArgs, cli: &Cli) -> Result<(Vec<u8>, Option<CliError>)> {
    if cli.format == OutputFormat::Row {
        return Err(CliError::Usage("--format row only applies to metrics".into()));
    }
    if let Some(count) = args.random {
        if count == 0 || args.max_x == 0 || args.max_y == 0 || args.max_dim == 0 {
            return Err(CliError::Usage("--random and the --max-* bounds must be positive".into()));
        }
        let seed = cli.seed.unwrap_or(DEFAULT_SEED);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chains = (0..count)
            .map(|_| {
                let (a, b) = random_instance_pair(&mut rng, args.max_x, args.max_y, args.max_dim);
                OracleChain::compute(&a, &b)
            })
            .collect::<cfid::Result<Vec<_>>>()?;
        let violations = chains.iter().filter(|c| c.min_slack() < -output::SLACK_TOL).count();
        let min_slack = chains.iter().map(OracleChain::min_slack).fold(f64::INFINITY, f64::min);
        let body = Rendered::RandomChains {
            seed,
            chains: &chains,
            violations,
            min_slack,
        }
        .render(cli.format)?;
        let failure = (violations > 0).then_some(CliError::ChainViolation {
            count: violations,
            total: count,
            min_slack,
        });
        return Ok((body, failure));
    }

    let (a, b) = match &args.instance {
        Some(path) => load_instance(path)?,
        None => shuffled_pairing_instance(),
    };
    let reports = [
        mwd_discrete(&a, &b)?,
        rwd_discrete(&a, &b)?,
        rwd3_discrete(&a, &b)?,
        cwd_discrete(&a, &b)?,
    ]
    .map(|r| r.with_seed(cli.seed));
    let chain = OracleChain {
        mwd: reports[0].value,
        rwd: reports[1].value,
        rwd3: reports[2].value,
        cwd: reports[3].value,
    };
    let body = Rendered::Chain {
        reports: &reports,
        chain: &chain,
    }
    .render(cli.format)?;
    let failure = (chain.min_slack() < -output::SLACK_TOL).then_some(CliError::ChainViolation {
        count: 1,
        total: 1,
        min_slack: chain.min_slack(),
    });
    Ok((body, failure))
}

pub fn experiment(kind: &ExperimentKind, cli: &Cli) -> Result<Vec<u8>> {
    if cli.format == OutputFormat::Row {
        return Err(CliError::Usage("--format row only applies to metrics".into()));
    }
    let rendered = match kind {
        ExperimentKind::Synthetic { rho, n, trials, cxx } => {
            let seed = cli.seed.unwrap_or(DEFAULT_SEED);
            Rendered::Synthetic(run_synthetic(*rho, *n, *trials, seed, cxx.mode())?)
        }
        ExperimentKind::Contour { resolution } => Rendered::Contour(contour_grid(*resolution)?),
        ExperimentKind::Alpha {
            rho,
            rhohat,
            alpha_min,
            points,
        } => {
            if !(*alpha_min > 0.0 && *alpha_min <= 1.0) || *points < 2 {
                return Err(CliError::Usage(
                    "--alpha-min must lie in (0, 1] and --points be at least 2".into(),
                ));
            }
            Rendered::Alpha {
                rho: *rho,
                rhohat: *rhohat,
                points: alpha_sweep(*rho, *rhohat, &default_alphas(*alpha_min, *points))?,
            }
        }
    };
    rendered.render(cli.format)
}

pub fn convert(input: &Path, output: &Path, to: Option<FileFormat>) -> Result<()> {
    let table = embedding::read(input)?;
    let format = to.unwrap_or_else(|| FileFormat::from_extension(output));
    write_atomic(output, &embedding::encode(&table, format)?)
}
