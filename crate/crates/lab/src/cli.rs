//! Command-line interface.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use permuton_lab_core::coalescent::CoalescentProcess;
use permuton_lab_core::gentree::{counts_up_to, perm_to_walk, ExactSampler, Label, Rule, DEFAULT_BUDGET};
use permuton_lab_core::limit_sim::Z99;
use permuton_lab_core::permuton::{permuton_of, rect_distance, EmpiricalPermuton, DEFAULT_GRID};
use permuton_lab_core::walks::{params, RejectionSampler};
use permuton_lab_core::{gentree::walk_to_perm, seed, Family, Permutation};
use rayon::prelude::*;
use serde_json::json;

use crate::envelope::{write_atomic, Envelope, Kind};
use crate::verify::{self, Budget, Suite};
use crate::{par, render};

/// Largest size accepted by the rejection sampler unless `--budget` is raised.
pub const REJECTION_MAX: usize = 200;
/// Largest size for brute-force enumeration.
pub const BRUTE_MAX: usize = 9;

#[derive(Parser, Debug)]
#[command(name = "permuton-lab", version, about = "Strong and semi Baxter permutations, their walks and their limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the limit parameters of a family.
    Params(ParamsArgs),
    /// Count the permutations of each size.
    Enumerate(EnumerateArgs),
    /// Draw uniform permutations or walks of one size.
    Sample(SampleArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Draw a permutation diagram or a coalescent fan as SVG.
    Render(RenderArgs),
    /// Rectangle distances between averaged permutons of increasing size.
    Converge(ConvergeArgs),
    /// Coalescent trajectories of one walk as CSV.
    Trajectories(TrajectoriesArgs),
    /// Averaged empirical permuton as a mass matrix.
    Permuton(PermutonArgs),
}

#[derive(Args, Debug)]
pub struct ParamsArgs {
    /// Family, positionally or with --family.
    #[arg(value_parser = parse_family)]
    pub name: Option<Family>,
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    /// Emit key=value lines.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub nmax: usize,
    /// Cross-check every size against the pattern-avoidance oracle.
    #[arg(long)]
    pub brute: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Rejection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    Permutation,
    Walk,
    Labels,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = SampleKind::Permutation)]
    pub kind: SampleKind,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest size accepted (default 500 for exact, 200 for rejection).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Attempts per draw for the rejection sampler.
    #[arg(long, default_value_t = 10_000_000)]
    pub max_attempts: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Largest size for the exhaustive suites.
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Walk length for the skewness suite.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    /// Samples per estimate for the ladder and tail suites.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RenderMode {
    Diagram,
    Coalescent,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = RenderMode::Diagram)]
    pub mode: RenderMode,
    /// Which object of the input file to draw.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, value_delimiter = ',', default_values_t = [125, 250, 500])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrajectoriesArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Walk or label file; a uniform walk of size --n is drawn otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of start times to emit, evenly spread.
    #[arg(long, default_value_t = 50)]
    pub starts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct PermutonArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Permutation, walk or label file; uniform samples are drawn otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|_| format!("expected strong or semi, got {s:?}"))
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Params(a) => cmd_params(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Sample(a) => par::with_pool(|| cmd_sample(a))?,
        Command::Verify(a) => par::with_pool(|| cmd_verify(a))?,
        Command::Render(a) => cmd_render(a),
        Command::Converge(a) => par::with_pool(|| cmd_converge(a))?,
        Command::Trajectories(a) => cmd_trajectories(a),
        Command::Permuton(a) => par::with_pool(|| cmd_permuton(a))?,
    }
}

pub fn params_report(family: Family, machine: bool) -> String {
    let p = params(family);
    let mut rows: Vec<(String, f64)> = vec![("alpha".into(), p.alpha), ("gamma".into(), p.gamma)];
    if let Some(t) = p.theta {
        rows.push(("theta".into(), t));
    }
    rows.extend([
        ("sigma".into(), p.sigma()),
        ("sigma_prime".into(), p.sigma_prime()),
        ("cov".into(), p.cov),
        ("rho".into(), p.rho),
        ("q".into(), p.q),
        ("beta".into(), p.beta),
    ]);
    rows.extend(p.residuals.iter().map(|(k, v)| (format!("residual_{k}"), *v)));
    let mut s = String::new();
    if machine {
        let _ = writeln!(s, "family={family}");
        for (k, v) in rows {
            let _ = writeln!(s, "{k}={v:?}");
        }
    } else {
        let _ = writeln!(s, "{family} family");
        for (k, v) in rows {
            if k.starts_with("residual") {
                let _ = writeln!(s, "  {k:<16} {v:.3e}");
            } else {
                let _ = writeln!(s, "  {k:<16} {v:.8}");
            }
        }
    }
    s
}

fn cmd_params(a: ParamsArgs) -> Result<Outcome> {
    let family = match (a.name, a.family) {
        (Some(f), None) | (None, Some(f)) => f,
        (Some(f), Some(g)) if f == g => f,
        (Some(_), Some(_)) => bail!("two different families given"),
        (None, None) => bail!("a family is required"),
    };
    print!("{}", params_report(family, a.machine));
    Ok(Outcome::Pass)
}

/// Size-`n` class members found by scanning all permutations.
pub fn brute_count(family: Family, n: usize) -> u64 {
    let class = family.class();
    Permutation::all(n).filter(|s| class.contains(s)).count() as u64
}

fn cmd_enumerate(a: EnumerateArgs) -> Result<Outcome> {
    ensure!(a.nmax >= 1, "--nmax must be at least 1");
    ensure!(!a.brute || a.nmax <= BRUTE_MAX, "--brute supports --nmax up to {BRUTE_MAX}");
    let counts = counts_up_to(&Rule::from(a.family), a.nmax);
    let mut ok = true;
    let mut out = String::from(if a.brute { "n,count,brute\n" } else { "n,count\n" });
    for n in 1..=a.nmax {
        let c = &counts[n - 1];
        if a.brute {
            let b = brute_count(a.family, n);
            ok &= *c == b.into();
            let _ = writeln!(out, "{n},{c},{b}");
        } else {
            let _ = writeln!(out, "{n},{c}");
        }
    }
    print!("{out}");
    if !ok {
        eprintln!("enumeration disagrees with the pattern-avoidance oracle");
    }
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

pub fn sample_envelope(a: &SampleArgs) -> Result<Envelope> {
    ensure!(a.n >= 1, "--n must be at least 1");
    ensure!(a.count >= 1, "--count must be at least 1");
    let (paths, meta) = match a.method {
        Method::Exact => {
            let budget = a.budget.unwrap_or(DEFAULT_BUDGET);
            let s = ExactSampler::with_budget(Rule::from(a.family), a.n, budget)?;
            let paths: Vec<Vec<Label>> = (0..a.count as u64).into_par_iter().map(|i| s.sample(&mut seed::stream(a.seed, i))).collect();
            let meta = json!({"method": "exact", "n": a.n, "count": a.count, "seed": a.seed, "exact_counts": s.is_exact()});
            (paths, meta)
        }
        Method::Rejection => {
            let budget = a.budget.unwrap_or(REJECTION_MAX);
            ensure!(a.n <= budget, "size {} exceeds the rejection budget {budget}; raise --budget to force it", a.n);
            let s = RejectionSampler::new(a.family, a.n)?;
            let draws = (0..a.count as u64)
                .into_par_iter()
                .map(|i| s.sample(&mut seed::stream(a.seed, i), a.max_attempts))
                .collect::<Result<Vec<_>, _>>()?;
            let attempts: u64 = draws.iter().map(|d| d.1).sum();
            let rate = a.count as f64 / attempts as f64;
            let half = Z99 * (rate * (1.0 - rate) / attempts as f64).sqrt();
            let meta = json!({
                "method": "rejection", "n": a.n, "count": a.count, "seed": a.seed,
                "attempts": attempts, "acceptance_rate": rate, "acceptance_ci99": [rate - half, rate + half],
            });
            (draws.into_iter().map(|d| d.0).collect(), meta)
        }
    };
    let env = match a.kind {
        SampleKind::Walk => Envelope::walks(a.family, &paths),
        SampleKind::Labels => Envelope::labels(a.family, &paths),
        SampleKind::Permutation => {
            let perms = paths.iter().map(|p| walk_to_perm(p, a.family)).collect::<Result<Vec<_>, _>>()?;
            Envelope::permutations(a.family, &perms)
        }
    };
    Ok(env.with_meta(meta))
}

fn cmd_sample(a: SampleArgs) -> Result<Outcome> {
    let env = sample_envelope(&a)?;
    emit(a.out.as_deref(), &(env.to_json() + "\n"))?;
    Ok(Outcome::Pass)
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    let b = Budget { nmax: a.nmax, n: a.n, reps: a.reps, samples: a.samples, seed: a.seed };
    let report = verify::run(a.suite, a.family, &b)?;
    println!("{report}");
    Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_render(a: RenderArgs) -> Result<Outcome> {
    let env = Envelope::read(&a.input)?;
    let svg = match a.mode {
        RenderMode::Diagram => {
            let perms = env.to_permutations()?;
            let sigma = perms.get(a.index).with_context(|| format!("no object {} in the input", a.index))?;
            render::diagram_svg(sigma)
        }
        RenderMode::Coalescent => {
            let family = env.family()?;
            let path = match env.kind {
                Kind::Walk | Kind::Labels => env.paths()?.into_iter().nth(a.index),
                Kind::Permutation => env.to_permutations()?.get(a.index).map(|s| perm_to_walk(s, family)).transpose()?,
                Kind::Permuton => bail!("a permuton has no coalescent process"),
            };
            let path = path.with_context(|| format!("no object {} in the input", a.index))?;
            render::coalescent_svg(&CoalescentProcess::from_labels(family, &path)?)
        }
    };
    write_atomic(&a.out, svg.as_bytes())?;
    Ok(Outcome::Pass)
}

pub fn converge_csv(a: &ConvergeArgs) -> Result<String> {
    ensure!(a.sizes.len() >= 2, "--sizes needs at least two sizes");
    ensure!(a.reps >= 1 && a.grid >= 1, "--reps and --grid must be positive");
    let averages = par::averaged_permutons(a.family, &a.sizes, a.reps, a.grid, a.seed)?;
    let mut out = String::from("kind,family,n_from,n_to,distance\n");
    for (s, w) in a.sizes.windows(2).zip(averages.windows(2)) {
        let _ = writeln!(out, "consecutive,{},{},{},{:.6}", a.family, s[0], s[1], rect_distance(&w[0], &w[1])?);
    }
    let other = match a.family {
        Family::Strong => Family::Semi,
        Family::Semi => Family::Strong,
    };
    let n = *a.sizes.last().expect("two sizes");
    let cross = par::averaged_permuton(other, n, a.reps, a.grid, a.seed)?;
    let d = rect_distance(averages.last().expect("two sizes"), &cross)?;
    let _ = writeln!(out, "cross,{}-{other},{n},{n},{d:.6}", a.family);
    Ok(out)
}

fn cmd_converge(a: ConvergeArgs) -> Result<Outcome> {
    emit(a.out.as_deref(), &converge_csv(&a)?)?;
    Ok(Outcome::Pass)
}

fn cmd_trajectories(a: TrajectoriesArgs) -> Result<Outcome> {
    let path = match &a.input {
        Some(p) => {
            let env = Envelope::read(p)?;
            ensure!(env.family()? == a.family, "input holds {} walks", env.family);
            env.paths()?.into_iter().next().context("empty input")?
        }
        None => ExactSampler::new(Rule::from(a.family), a.n)?.sample(&mut seed::rng(a.seed)),
    };
    let p = CoalescentProcess::from_labels(a.family, &path)?;
    let n = p.n();
    let starts = a.starts.clamp(1, n);
    let mut out = String::from("t,s,z\n");
    let mut last = usize::MAX;
    for i in 0..starts {
        let t = if starts == 1 { 0 } else { i * (n - 1) / (starts - 1) };
        if t == last {
            continue;
        }
        last = t;
        for (j, z) in p.trajectory(t).into_iter().enumerate() {
            let _ = writeln!(out, "{t},{},{z}", t + j);
        }
    }
    emit(a.out.as_deref(), &out)?;
    Ok(Outcome::Pass)
}

pub fn permuton_csv(p: &EmpiricalPermuton) -> String {
    let mut out = String::new();
    for row in p.masses().chunks(p.k()) {
        let line: Vec<String> = row.iter().map(|m| format!("{m}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn cmd_permuton(a: PermutonArgs) -> Result<Outcome> {
    ensure!(a.grid >= 1, "--grid must be positive");
    let p = match &a.input {
        Some(path) => {
            let perms = Envelope::read(path)?.to_permutations()?;
            ensure!(!perms.is_empty(), "empty input");
            let items = perms.iter().map(|s| permuton_of(s, a.grid)).collect::<Result<Vec<_>, _>>()?;
            EmpiricalPermuton::average(&items)?
        }
        None => par::averaged_permuton(a.family, a.n, a.reps, a.grid, a.seed)?,
    };
    let text = match a.format {
        Format::Csv => permuton_csv(&p),
        Format::Json => Envelope::permuton(a.family, &p).to_json() + "\n",
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Pass)
}
