use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use holocgh_core::psychstats::{bootstrap_ci, jod_ztest, scale_jod, screen_outliers, JodResult, VoteMatrix};
use serde::Deserialize;

use crate::common::{usage, Context};

#[derive(clap::Subcommand, Debug)]
pub enum Command {
    /// Scale votes to JOD scores with covariance; flags outlier observers.
    Scale(VotesArg),
    /// Two-tailed z-test between two options.
    Test(TestArgs),
    /// Percentile bootstrap intervals over observers.
    Bootstrap(BootstrapArgs),
}

#[derive(clap::Args, Debug)]
pub struct VotesArg {
    /// CSV with columns observer,option_i,option_j,chosen.
    votes: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct TestArgs {
    #[command(flatten)]
    votes: VotesArg,
    /// First option label.
    #[arg(long)]
    a: String,
    /// Second option label.
    #[arg(long)]
    b: String,
}

#[derive(clap::Args, Debug)]
pub struct BootstrapArgs {
    #[command(flatten)]
    votes: VotesArg,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Deserialize)]
struct Row {
    observer: String,
    option_i: String,
    option_j: String,
    chosen: String,
}

/// Labels in order of first appearance and one vote matrix per observer.
struct Votes {
    labels: Vec<String>,
    observers: Vec<String>,
    matrices: Vec<VoteMatrix>,
}

fn read_votes(path: &Path) -> Result<Votes> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let rows: Vec<Row> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing {}", path.display()))?;
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut observers: Vec<String> = Vec::new();
    let mut obs_index: HashMap<String, usize> = HashMap::new();
    let intern = |s: &str, list: &mut Vec<String>, map: &mut HashMap<String, usize>| {
        *map.entry(s.to_string()).or_insert_with(|| {
            list.push(s.to_string());
            list.len() - 1
        })
    };
    let mut triples = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        let i = intern(&r.option_i, &mut labels, &mut index);
        let j = intern(&r.option_j, &mut labels, &mut index);
        let o = intern(&r.observer, &mut observers, &mut obs_index);
        if i == j {
            anyhow::bail!("row {}: an option is compared with itself", k + 2);
        }
        let (loser, winner) = if r.chosen == r.option_j {
            (i, j)
        } else if r.chosen == r.option_i {
            (j, i)
        } else {
            anyhow::bail!("row {}: chosen {:?} is neither {:?} nor {:?}", k + 2, r.chosen, r.option_i, r.option_j);
        };
        triples.push((o, loser, winner));
    }
    if labels.len() < 2 {
        anyhow::bail!("{} has fewer than two options", path.display());
    }
    let mut matrices = (0..observers.len())
        .map(|_| VoteMatrix::zeros(labels.len()))
        .collect::<holocgh_core::Result<Vec<_>>>()?;
    for (o, l, w) in triples {
        matrices[o].add(l, w, 1)?;
    }
    Ok(Votes { labels, observers, matrices })
}

pub fn run(ctx: &Context, cmd: Command) -> Result<()> {
    match cmd {
        Command::Scale(a) => scale(ctx, a),
        Command::Test(a) => test(a),
        Command::Bootstrap(a) => bootstrap(ctx, a),
    }
}

fn write_scores(dir: &Path, labels: &[String], r: &JodResult) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let scores = dir.join("scores.csv");
    let mut w = csv::Writer::from_path(&scores)?;
    w.write_record(["option", "jod", "ci_low", "ci_high"])?;
    for (k, l) in labels.iter().enumerate() {
        let (lo, hi) = r
            .confidence
            .as_ref()
            .map(|c| (format!("{:.6}", c[k].0), format!("{:.6}", c[k].1)))
            .unwrap_or_default();
        w.write_record([l.clone(), format!("{:.6}", r.scores[k]), lo, hi])?;
    }
    w.flush()?;
    let cov = dir.join("covariance.csv");
    let mut w = csv::Writer::from_path(&cov)?;
    let mut header = vec!["option".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for (k, l) in labels.iter().enumerate() {
        let mut row = vec![l.clone()];
        row.extend(r.covariance.row(k).iter().map(|v| format!("{v:.8e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(vec![scores, cov])
}

fn print_scores(labels: &[String], r: &JodResult) {
    for (k, l) in labels.iter().enumerate() {
        let sd = r.covariance[[k, k]].max(0.0).sqrt();
        match &r.confidence {
            Some(c) => println!("{l}: {:+.3} JOD (95% CI {:+.3} .. {:+.3})", r.scores[k], c[k].0, c[k].1),
            None => println!("{l}: {:+.3} JOD (sd {sd:.3})", r.scores[k]),
        }
    }
}

fn finish(ctx: &Context, labels: &[String], r: &JodResult) -> Result<()> {
    let out = ctx.out_dir(None);
    let outputs = write_scores(&out, labels, r)?;
    let mut m = ctx.manifest();
    m.seed = ctx.seed;
    m.outputs = outputs;
    m.write(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn scale(ctx: &Context, a: VotesArg) -> Result<()> {
    let v = read_votes(&a.votes)?;
    let r = scale_jod(&VoteMatrix::sum(&v.matrices)?)?;
    print_scores(&v.labels, &r);
    for o in screen_outliers(&v.matrices)? {
        println!("outlier observer: {}", v.observers[o]);
    }
    finish(ctx, &v.labels, &r)
}

fn test(a: TestArgs) -> Result<()> {
    let v = read_votes(&a.votes.votes)?;
    let find = |s: &str| {
        v.labels.iter().position(|l| l == s).ok_or_else(|| usage(format!("unknown option {s:?}")))
    };
    let (i, j) = (find(&a.a)?, find(&a.b)?);
    if i == j {
        return Err(usage("--a and --b must differ"));
    }
    let r = scale_jod(&VoteMatrix::sum(&v.matrices)?)?;
    let t = jod_ztest(&r, i, j)?;
    println!(
        "{} - {} = {:+.3} JOD, z = {:.3}, p = {:.4}",
        a.a,
        a.b,
        r.scores[i] - r.scores[j],
        t.z,
        t.p
    );
    Ok(())
}

fn bootstrap(ctx: &Context, a: BootstrapArgs) -> Result<()> {
    let v = read_votes(&a.votes.votes)?;
    if v.matrices.len() < 2 {
        return Err(usage("bootstrap needs at least two observers"));
    }
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let mut r = scale_jod(&VoteMatrix::sum(&v.matrices)?)?;
    r.confidence = Some(bootstrap_ci(&v.matrices, a.samples, ctx.seed.unwrap_or(0))?);
    print_scores(&v.labels, &r);
    finish(ctx, &v.labels, &r)
}
