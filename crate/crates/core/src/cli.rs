//! The `minfact` command line.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or input error,
//! 3 resource cap hit.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::bijections::{compute_faces, dual_dot, gy_dual, moszkowski_forward};
use crate::error::{Error, Result};
use crate::factorization::{write_trajectories_csv, Factorization};
use crate::labelling::{find_k, full_relabel, ofind_k, write_traces_csv, Labelling};
use crate::random::{sample_uniform_factorization, LimitRun, RandomSource, DEFAULT_SEED, DEFAULT_STEP_BUDGET};
use crate::stats::{
    enumerate_factorizations_capped, exact_joint_pgp_capped, mc_limit_check, verify_conjecture_capped,
    verify_horizontal_symmetry, verify_symmetry, write_histogram_csv, Source, StatPair, Statistic,
    VerificationEntry, ENUMERATION_CAP,
};
use crate::tree::EvTree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Largest radius `limit-sample --A` may label while resolving entering indices.
pub const ENTERING_CAP: usize = 1 << 20;

/// Largest `|z|` accepted by `limit-stats`.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Parser, Debug)]
#[command(name = "minfact", version, about = "Minimal factorizations of the n-cycle into transpositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Random seed (default: $MINFACT_SEED, else 1729).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Largest n accepted by exhaustive enumeration.
    #[arg(long = "max-n", global = true, default_value_t = ENUMERATION_CAP)]
    max_n: usize,
    /// Walker steps allowed per label on the infinite tree.
    #[arg(long = "step-budget", global = true, default_value_t = DEFAULT_STEP_BUDGET)]
    step_budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every minimal factorization of (1..n), or tally a pair of statistics.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// t1-m1, t1-mJ or tI-tJ, e.g. t1-m3 or t1-t2.
        #[arg(long = "stat-pair")]
        stat_pair: Option<String>,
    },
    /// Draw uniform minimal factorizations.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        samples: u64,
    },
    /// Trajectory breakpoints of every label, as CSV.
    Trajectories {
        /// Size of a sampled factorization (ignored with --input).
        #[arg(long)]
        n: Option<usize>,
        /// Factorization JSON file.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Recenter labels around 1 first.
        #[arg(long)]
        tilde: bool,
    },
    /// Faces, dual tree and the dual factorization.
    Dual {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run Find/OFind on a pointed tree.
    Relabel {
        /// Size of a sampled factorization whose tree is relabelled.
        #[arg(long)]
        n: Option<usize>,
        /// Tree JSON file (edge labels read as numbers).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Run Find_k only (with --ofind, OFind_k only) instead of the full relabelling.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        ofind: bool,
    },
    /// Check the conjectured law of (#T1, #M1) exactly.
    VerifyConjecture {
        #[arg(long)]
        n: usize,
    },
    /// Check the tuple equidistribution and the horizontal symmetry exactly.
    VerifySymmetry {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Label the infinite tree out to radius K and dump trajectories.
    LimitSample {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        /// Also report the indices whose trajectory enters [-A, A].
        #[arg(long = "A")]
        a: Option<i64>,
    },
    /// Monte Carlo estimate of a local statistic against its limit law.
    LimitStats {
        /// stays-positive, t1-marginal, m1-marginal, t1-m1-joint, t1-t2-joint, deg-dist-joint
        #[arg(long)]
        stat: String,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Sample uniform factorizations of this size instead of the infinite tree.
        #[arg(long)]
        n: Option<usize>,
    },
}

struct Ctx {
    seed: u64,
    format: Option<Format>,
    max_n: usize,
    budget: u64,
}

impl Ctx {
    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Error::Domain(format!("format {f:?} is not available for this command")))
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("MINFACT_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("MINFACT_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_resource() {
                EXIT_RESOURCE
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let c = cli.common;
    let ctx = Ctx {
        seed: resolve_seed(c.seed)?,
        format: c.format,
        max_n: c.max_n,
        budget: c.step_budget,
    };
    let workers = match c.workers {
        Some(0) => return Err(Error::Domain("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(e.to_string()))?;
    let mut out: Box<dyn Write + Send> = match &c.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let code = pool.install(|| dispatch(cli.command, &ctx, &mut out))?;
    out.flush()?;
    Ok(code)
}

fn read_factorization(path: &PathBuf) -> Result<Factorization> {
    Factorization::from_json(std::fs::read_to_string(path)?.trim())
}

fn source_factorization(n: Option<usize>, input: &Option<PathBuf>, seed: u64) -> Result<Factorization> {
    match (input, n) {
        (Some(p), _) => read_factorization(p),
        (None, Some(n)) => sample_uniform_factorization(n, &mut RandomSource::new(seed).rng()),
        (None, None) => Err(Error::Domain("pass --n or --input".into())),
    }
}

fn parse_stat_pair(s: &str) -> Result<StatPair> {
    let bad = || Error::Domain(format!("unknown stat pair {s:?}; use t1-m1, t1-mJ or tI-tJ"));
    let lower = s.to_ascii_lowercase().replace('_', "-");
    let (a, b) = lower.split_once('-').ok_or_else(bad)?;
    let idx = |p: &str, c: char| p.strip_prefix(c).and_then(|x| x.parse::<usize>().ok());
    match (idx(a, 't'), idx(b, 'm'), idx(b, 't')) {
        (Some(1), Some(1), _) => Ok(StatPair::T1M1),
        (Some(1), Some(j), _) => Ok(StatPair::T1Mj(j)),
        (Some(i), _, Some(j)) => Ok(StatPair::TiTj(i, j)),
        _ => Err(bad()),
    }
}

fn dispatch(cmd: Command, ctx: &Ctx, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Enumerate { n, stat_pair } => {
            if let Some(sp) = stat_pair {
                let pair = parse_stat_pair(&sp)?;
                let pgp = exact_joint_pgp_capped(n, pair, ctx.max_n)?;
                let rows = pgp.histogram_rows(&pair.to_string());
                match ctx.format(Format::Csv, &[Format::Csv, Format::Json])? {
                    Format::Csv => write_histogram_csv(out, &rows)?,
                    _ => writeln!(out, "{}", serde_json::to_string(&rows)?)?,
                }
            } else {
                ctx.format(Format::Json, &[Format::Json])?;
                for f in enumerate_factorizations_capped(n, ctx.max_n)? {
                    writeln!(out, "{}", f.to_json())?;
                }
            }
        }
        Command::Sample { n, samples } => {
            ctx.format(Format::Json, &[Format::Json])?;
            let fs: Vec<Factorization> = (0..samples)
                .into_par_iter()
                .map(|r| sample_uniform_factorization(n, &mut RandomSource::new(ctx.seed).with_stream(r).rng()))
                .collect::<Result<_>>()?;
            for f in fs {
                writeln!(out, "{}", f.to_json())?;
            }
        }
        Command::Trajectories { n, input, tilde } => {
            ctx.format(Format::Csv, &[Format::Csv])?;
            let mut f = source_factorization(n, &input, ctx.seed)?;
            if tilde && !f.is_tilde() {
                f = f.to_tilde()?;
            }
            write_trajectories_csv(out, &f.trajectories())?;
        }
        Command::Dual { n, input } => {
            let f = source_factorization(n, &input, ctx.seed)?;
            match ctx.format(Format::Json, &[Format::Json, Format::Dot])? {
                Format::Dot => write!(out, "{}", dual_dot(&f)?)?,
                _ => {
                    let emb = compute_faces(&f)?;
                    let (dual, sym, b) = gy_dual(&f)?;
                    let report = json!({
                        "factorization": serde_json::from_str::<serde_json::Value>(&f.to_json())?,
                        "faces": emb.faces(),
                        "dual": dual.edge_table(),
                        "symmetrized": sym.edge_table(),
                        "bijection": serde_json::from_str::<serde_json::Value>(&b.to_json())?,
                    });
                    writeln!(out, "{report}")?;
                }
            }
        }
        Command::Relabel { n, input, k, ofind } => {
            let tree: EvTree<f64> = match (&input, n) {
                (Some(p), _) => EvTree::from_json(std::fs::read_to_string(p)?.trim())?,
                (None, Some(n)) => {
                    let f = sample_uniform_factorization(n, &mut RandomSource::new(ctx.seed).rng())?;
                    EvTree::unlabelled(moszkowski_forward(&f)?.map_labels(|l| l as f64)?)
                }
                (None, None) => return Err(Error::Domain("pass --n or --input".into())),
            };
            let (labelled, lab): (EvTree<f64>, Labelling<f64>) = match (k, ofind) {
                (Some(k), false) => find_k(&tree, k)?,
                (Some(k), true) => ofind_k(&tree, k)?,
                (None, true) => return Err(Error::Domain("--ofind needs --k".into())),
                (None, false) => {
                    let full = full_relabel(&tree.tree)?;
                    let lab = Labelling::from_vlabels(full.tree.point(), full.vlabels())?;
                    (full, lab)
                }
            };
            match ctx.format(Format::Json, &[Format::Json, Format::Dot, Format::Csv])? {
                Format::Json => writeln!(out, "{}", labelled.to_json())?,
                Format::Dot => write!(out, "{}", labelled.to_dot("relabelled"))?,
                Format::Csv => {
                    if k.is_none() {
                        return Err(Error::Domain("walk traces need --k".into()));
                    }
                    let traces: Vec<_> = lab.find_traces().iter().chain(lab.ofind_traces()).cloned().collect();
                    write_traces_csv(out, &traces)?;
                }
            }
        }
        Command::VerifyConjecture { n } => {
            let report = verify_conjecture_capped(n, ctx.max_n)?;
            match ctx.format {
                None => writeln!(out, "{report}")?,
                Some(Format::Json) => writeln!(out, "{}", serde_json::to_string(&report)?)?,
                Some(f) => return Err(Error::Domain(format!("format {f:?} is not available for this command"))),
            }
            return Ok(if report.matches { EXIT_OK } else { EXIT_FAILED });
        }
        Command::VerifySymmetry { n, k } => {
            if n > ctx.max_n {
                return Err(Error::EnumerationCap { n, cap: ctx.max_n });
            }
            let sym = verify_symmetry(n, k)?;
            let mut entries = vec![VerificationEntry {
                identity: format!("tuple equidistribution, k = {k}"),
                n,
                passed: sym.equal,
                detail: format!("supports {:?}", sym.support),
            }];
            for j in 1..=n {
                let ok = verify_horizontal_symmetry(n, j)?;
                entries.push(VerificationEntry {
                    identity: format!("horizontal symmetry, j = {j}"),
                    n,
                    passed: ok,
                    detail: format!("(T1, M{j}) vs (T1, M{})", n + 1 - j),
                });
            }
            match ctx.format {
                Some(Format::Json) => writeln!(out, "{}", serde_json::to_string(&entries)?)?,
                Some(f) => return Err(Error::Domain(format!("format {f:?} is not available for this command"))),
                None => {
                    for e in &entries {
                        let verdict = if e.passed { "ok" } else { "FAILED" };
                        writeln!(out, "{verdict}: {} (n = {}, {})", e.identity, e.n, e.detail)?;
                    }
                }
            }
            return Ok(if entries.iter().all(|e| e.passed) { EXIT_OK } else { EXIT_FAILED });
        }
        Command::LimitSample { k, samples, a } => {
            ctx.format(Format::Json, &[Format::Json])?;
            let lines: Vec<String> = (0..samples)
                .into_par_iter()
                .map(|r| {
                    let src = RandomSource::new(ctx.seed).with_stream(r);
                    let mut run = LimitRun::with_radius(src, k, ctx.budget)?;
                    let mut v: serde_json::Value = serde_json::from_str(&run.to_json())?;
                    if let Some(a) = a {
                        v["A"] = json!(a);
                        v["entering"] = json!(run.limit_entering_indices(a, ENTERING_CAP)?);
                    }
                    Ok(v.to_string())
                })
                .collect::<Result<_>>()?;
            for l in lines {
                writeln!(out, "{l}")?;
            }
        }
        Command::LimitStats { stat, samples, n } => {
            let statistic = Statistic::parse(&stat).ok_or_else(|| Error::Domain(format!("unknown statistic {stat:?}")))?;
            let source = n.map_or(Source::Kesten, Source::Finite);
            let report = mc_limit_check(statistic, source, samples, ctx.seed, ctx.budget)?;
            match ctx.format(Format::Json, &[Format::Json, Format::Csv])? {
                Format::Csv => write_histogram_csv(out, &report.histogram_rows())?,
                _ => writeln!(out, "{}", serde_json::to_string(&report)?)?,
            }
            return Ok(if report.passes(Z_THRESHOLD) { EXIT_OK } else { EXIT_FAILED });
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_pairs() {
        assert_eq!(parse_stat_pair("t1-m1").unwrap(), StatPair::T1M1);
        assert_eq!(parse_stat_pair("T1_M3").unwrap(), StatPair::T1Mj(3));
        assert_eq!(parse_stat_pair("t2-t4").unwrap(), StatPair::TiTj(2, 4));
        assert!(parse_stat_pair("m1-t1").is_err());
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["minfact", "no-such-command"]), EXIT_USAGE);
        assert_eq!(run(["minfact", "enumerate"]), EXIT_USAGE);
        assert_eq!(run(["minfact", "enumerate", "--n", "12", "--output", "/dev/null"]), EXIT_RESOURCE);
    }
}
