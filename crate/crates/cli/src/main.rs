//! Command-line front end: net generation and verification, scrambled
//! sampling into geometric regions, convergence studies, gain tables,
//! measure-preservation checks, and sphericity probes. All output is
//! CSV with a leading comment line that records the effective
//! configuration and seed; identical configuration and seed produce
//! byte-identical output regardless of worker count.
//!
//! Exit codes: 0 success, 1 validation failure, 2 verification failure.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use geonets::digits::default_depth;
use geonets::experiment::{run_convergence, ExperimentConfig, ExperimentError, Method};
use geonets::nets::{faure_net_with_depth, vdc_points_with_depth, verify_net, PointSet};
use geonets::quad::catalog::{FactorKind, INTEGRAND_NAMES};
use geonets::quad::gains::gain_table;
use geonets::regions::schemes::{default_root, lookup, rule_base, RULE_NAMES};
use geonets::regions::transform::{measure_preservation_check, phi, sphericity_probe};
use geonets::regions::ProductSpace;
use geonets::scramble::{scramble_point_set, ScrambleKey};
use geonets::stats::chi_square_critical;

/// Largest point set any subcommand will materialize.
const MAX_POINTS: u128 = 1 << 22;

#[derive(Parser)]
#[command(
    name = "geonets",
    version,
    about = "Scrambled geometric net quadrature"
)]
struct Cli {
    /// Master seed; all randomness is derived from (seed, replicate).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of independent scramble replicates.
    #[arg(long, global = true, default_value_t = 32)]
    replicates: usize,
    /// Digit depth override for stored points and region descent.
    #[arg(long, global = true)]
    digits: Option<usize>,
    /// Write CSV to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a digital net and verify its equidistribution.
    Net(NetArgs),
    /// Scramble a net and map it into product-region coordinates.
    Sample(SampleArgs),
    /// Replicated variance versus sample size, with a Monte Carlo control.
    Converge(ConvergeArgs),
    /// Exact gain coefficients of a net, per projection and level vector.
    Gains(GainsArgs),
    /// Chi-square check that scrambled digit paths fill cells uniformly.
    VerifyMeasure(VerifyMeasureArgs),
    /// Scaled cell diameters per level for one split rule.
    Sphericity(SphericityArgs),
}

#[derive(Args)]
struct NetArgs {
    /// Net base b (2..=64; must be prime when s > 1).
    #[arg(short, long)]
    base: u32,
    /// Number of coordinates s.
    #[arg(short = 's', long)]
    dimension: usize,
    /// Resolution m; the net has b^m points.
    #[arg(short = 'm', long)]
    resolution: u32,
}

#[derive(Args)]
struct SampleArgs {
    /// Net base b.
    #[arg(short, long)]
    base: u32,
    /// Comma-separated factor regions: interval, triangle, disk, sphertri.
    #[arg(short = 'f', long, value_delimiter = ',', required = true)]
    factors: Vec<String>,
    /// Resolution m; b^m points are emitted.
    #[arg(short = 'm', long)]
    resolution: u32,
    /// Which scramble replicate to emit.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Integrand name from the catalog.
    #[arg(short = 'f', long)]
    integrand: String,
    /// Net base b.
    #[arg(short, long)]
    base: u32,
    /// Smallest resolution.
    #[arg(long)]
    m_min: u32,
    /// Largest resolution.
    #[arg(long)]
    m_max: u32,
}

#[derive(Args)]
struct GainsArgs {
    /// Net base b.
    #[arg(short, long)]
    base: u32,
    /// Number of coordinates s.
    #[arg(short = 's', long)]
    dimension: usize,
    /// Resolution m.
    #[arg(short = 'm', long)]
    resolution: u32,
    /// Largest total level |kappa| to tabulate.
    #[arg(long, default_value_t = 4)]
    max_level: u32,
}

#[derive(Args)]
struct VerifyMeasureArgs {
    /// Split rules to test (default: every convergent registry rule).
    #[arg(long, value_delimiter = ',')]
    rules: Vec<String>,
    /// Cell level k to classify against (b^k cells).
    #[arg(short = 'k', long, default_value_t = 2)]
    level: usize,
    /// Scramble draws per rule (default: 200 per cell).
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args)]
struct SphericityArgs {
    /// Split rule from the registry.
    #[arg(long)]
    rule: String,
    /// Base for rules that accept any base.
    #[arg(short, long, default_value_t = 2)]
    base: u32,
    /// Deepest level to enumerate.
    #[arg(long, default_value_t = 8)]
    depth: u32,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

/// Dispatches to the subcommand; `Ok(false)` means a verification
/// failed (exit 2), `Err` means the inputs were invalid (exit 1).
fn run(cli: &Cli) -> Result<bool> {
    let mut w: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(io::BufWriter::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    let ok = match &cli.command {
        Command::Net(a) => cmd_net(cli, a, &mut w)?,
        Command::Sample(a) => cmd_sample(cli, a, &mut w)?,
        Command::Converge(a) => cmd_converge(cli, a, &mut w)?,
        Command::Gains(a) => cmd_gains(cli, a, &mut w)?,
        Command::VerifyMeasure(a) => cmd_verify_measure(cli, a, &mut w)?,
        Command::Sphericity(a) => cmd_sphericity(cli, a, &mut w)?,
    };
    w.flush()?;
    Ok(ok)
}

/// Points of a base net: the radical-inverse sequence for one
/// coordinate, the prime-base digital net otherwise.
fn base_net(base: u32, s: usize, m: u32, depth: usize) -> Result<PointSet> {
    let n = (base as u128)
        .checked_pow(m)
        .filter(|n| *n <= MAX_POINTS)
        .ok_or_else(|| anyhow!("b^m = {base}^{m} exceeds the point budget of {MAX_POINTS}"))?;
    let points = if s == 1 {
        vdc_points_with_depth(base, n as usize, depth)?
    } else {
        faure_net_with_depth(base, s, m, depth)?
    };
    Ok(points)
}

fn cmd_net(cli: &Cli, a: &NetArgs, w: &mut dyn Write) -> Result<bool> {
    let depth = cli.digits.unwrap_or(a.resolution.max(1) as usize);
    let points = base_net(a.base, a.dimension, a.resolution, depth)?;
    writeln!(
        w,
        "# config: cmd=net base={} s={} m={} t=0 digits={} seed={}",
        a.base, a.dimension, a.resolution, depth, cli.seed
    )?;
    writeln!(w, "i,j,value,digits")?;
    for i in 0..points.n() {
        for j in 0..points.dimension() {
            let digits: Vec<String> = points
                .coordinate_digits(i, j)
                .iter()
                .map(u8::to_string)
                .collect();
            writeln!(w, "{},{},{},{}", i, j, points.value(i, j), digits.join("."))?;
        }
    }
    let ok = verify_net(&points, 0)?;
    writeln!(w, "# verdict,t=0,{}", if ok { "PASS" } else { "FAIL" })?;
    Ok(ok)
}

fn cmd_sample(cli: &Cli, a: &SampleArgs, w: &mut dyn Write) -> Result<bool> {
    let kinds = a
        .factors
        .iter()
        .map(|name| FactorKind::parse(name))
        .collect::<Result<Vec<_>, _>>()?;
    let mut factors = Vec::with_capacity(kinds.len());
    for kind in &kinds {
        let name = kind
            .rule_name(a.base)
            .ok_or_else(|| anyhow!("no split rule for factor {kind:?} in base {}", a.base))?;
        factors.push((kind.root(), lookup(name, a.base)?));
    }
    let space = ProductSpace::new(factors)?;
    let depth = cli.digits.unwrap_or(default_depth(a.base));
    let net = base_net(a.base, space.s(), a.resolution, depth)?;
    let scrambled = scramble_point_set(&net, &ScrambleKey::new(cli.seed, a.replicate));
    writeln!(
        w,
        "# config: cmd=sample base={} factors={} m={} replicate={} digits={} seed={}",
        a.base,
        a.factors.join("+"),
        a.resolution,
        a.replicate,
        depth,
        cli.seed
    )?;
    writeln!(w, "i,j,x,y,z")?;
    for i in 0..scrambled.n() {
        for j in 0..scrambled.dimension() {
            let factor = space.factor(j);
            let point = phi(
                &scrambled.digit_vector(i, j),
                &factor.root,
                factor.rule.as_ref(),
            )?;
            let mut cols = [String::new(), String::new(), String::new()];
            for (k, v) in point.coords().iter().enumerate() {
                cols[k] = v.to_string();
            }
            writeln!(w, "{},{},{},{},{}", i, j, cols[0], cols[1], cols[2])?;
        }
    }
    Ok(true)
}

fn cmd_converge(cli: &Cli, a: &ConvergeArgs, w: &mut dyn Write) -> Result<bool> {
    let config = ExperimentConfig {
        integrand: a.integrand.clone(),
        base: a.base,
        m_min: a.m_min,
        m_max: a.m_max,
        replicates: cli.replicates,
        seed: cli.seed,
        methods: vec![Method::ScrambledNet, Method::MonteCarlo],
    };
    let report = run_convergence(&config).map_err(|e| match e {
        ExperimentError::UnknownIntegrand(_) => {
            anyhow!("{e}; known integrands: {}", INTEGRAND_NAMES.join(", "))
        }
        other => anyhow::Error::from(other),
    })?;
    writeln!(w, "# config: {}", serde_json::to_string(&config)?)?;
    writeln!(w, "method,m,n,mean,variance,stderr")?;
    for row in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.method.label(),
            row.m,
            row.n,
            row.mean,
            row.variance,
            row.std_error
        )?;
    }
    for (method, slope) in &report.slopes {
        writeln!(w, "# slope,{},{}", method.label(), slope)?;
    }
    Ok(true)
}

fn cmd_gains(cli: &Cli, a: &GainsArgs, w: &mut dyn Write) -> Result<bool> {
    let depth = cli.digits.unwrap_or(default_depth(a.base));
    let net = base_net(a.base, a.dimension, a.resolution, depth)?;
    let entries = gain_table(&net, a.max_level)?;
    writeln!(
        w,
        "# config: cmd=gains base={} s={} m={} max_level={} digits={} seed={}",
        a.base, a.dimension, a.resolution, a.max_level, depth, cli.seed
    )?;
    writeln!(w, "u,kappa,gamma")?;
    for e in &entries {
        let u: Vec<String> = e.u.iter().map(|j| (j + 1).to_string()).collect();
        let kappa: Vec<String> = e.kappa.iter().map(u32::to_string).collect();
        writeln!(w, "{},{},{}", u.join("+"), kappa.join("+"), e.gamma)?;
    }
    Ok(true)
}

fn cmd_verify_measure(cli: &Cli, a: &VerifyMeasureArgs, w: &mut dyn Write) -> Result<bool> {
    let names: Vec<String> = if a.rules.is_empty() {
        RULE_NAMES
            .iter()
            .filter(|name| {
                lookup(name, rule_base(name).flatten().unwrap_or(2))
                    .map(|rule| rule.convergent())
                    .unwrap_or(false)
            })
            .map(|name| name.to_string())
            .collect()
    } else {
        a.rules.clone()
    };
    writeln!(
        w,
        "# config: cmd=verify-measure rules={} level={} seed={}",
        names.join("+"),
        a.level,
        cli.seed
    )?;
    writeln!(w, "scheme,level,samples,chi2,threshold,verdict")?;
    let mut all = true;
    for name in &names {
        let base = rule_base(name)
            .ok_or_else(|| anyhow!("unknown split rule {name:?}"))?
            .unwrap_or(2);
        let rule = lookup(name, base)?;
        let root = default_root(name).expect("known rule has a default root");
        let cells = (base as u64).pow(a.level as u32);
        let samples = a.samples.unwrap_or(200 * cells);
        let chi = measure_preservation_check(&root, rule.as_ref(), a.level, samples, cli.seed)?;
        let threshold = chi_square_critical(chi.df, 0.999);
        let pass = chi.statistic <= threshold;
        all &= pass;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            name,
            a.level,
            samples,
            chi.statistic,
            threshold,
            if pass { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(all)
}

fn cmd_sphericity(cli: &Cli, a: &SphericityArgs, w: &mut dyn Write) -> Result<bool> {
    let base = rule_base(&a.rule)
        .ok_or_else(|| anyhow!("unknown split rule {:?}", a.rule))?
        .unwrap_or(a.base);
    let rule = lookup(&a.rule, base)?;
    let root = default_root(&a.rule).expect("known rule has a default root");
    let report = sphericity_probe(&root, rule.as_ref(), a.depth)?;
    writeln!(
        w,
        "# config: cmd=sphericity rule={} base={} depth={} seed={}",
        a.rule, base, a.depth, cli.seed
    )?;
    writeln!(w, "level,scaled_diameter")?;
    for (level, value) in report.per_level.iter().enumerate() {
        writeln!(w, "{level},{value}")?;
    }
    writeln!(w, "# c_hat,{}", report.c_hat)?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn short_flags_parse_like_the_documented_examples() {
        let cli = Cli::try_parse_from(["geonets", "net", "-b", "2", "-s", "1", "-m", "2"]).unwrap();
        match &cli.command {
            Command::Net(a) => {
                assert_eq!((a.base, a.dimension, a.resolution), (2, 1, 2));
            }
            _ => panic!("expected net subcommand"),
        }
        assert_eq!(cli.seed, 0);
        assert_eq!(cli.replicates, 32);
    }

    #[test]
    fn global_flags_can_follow_the_subcommand() {
        let cli = Cli::try_parse_from([
            "geonets",
            "converge",
            "-f",
            "interval-x",
            "-b",
            "2",
            "--m-min",
            "2",
            "--m-max",
            "4",
            "--seed",
            "9",
            "--replicates",
            "8",
        ])
        .unwrap();
        assert_eq!(cli.seed, 9);
        assert_eq!(cli.replicates, 8);
    }
}
