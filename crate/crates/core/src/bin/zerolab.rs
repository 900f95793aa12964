//! `zerolab`: runs one config file through the library and writes its outputs under `--out`.
//!
//! Exit status: 0 on success, 1 on a bad or missing config (or other input
//! problem), 2 on a numerical failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zerolab::ensembles::Basis;
use zerolab::error::{Error, Result};
use zerolab::experiments::{self, check_references, load_records, persist_records, persist_summary, summarize, ExperimentConfig, Manifest, Model};
use zerolab::zeros::{find_roots, write_roots_csv, RootOptions, RootSet};

#[derive(Parser)]
#[command(name = "zerolab", version, about = "Zeros of random polynomials and their limit laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; nothing is written elsewhere.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More progress on stderr; repeat for detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// `V_Q` and the radial equilibrium distribution on a log-radius grid.
    Extremal,
    /// Orthonormal basis tables for each configured degree.
    Onb,
    /// Coefficient draws for each degree and trial.
    Sample,
    /// Roots of each sampled polynomial (one variable).
    Roots,
    /// Full experiment: records, summary, manifest.
    Experiment,
    /// Re-summarizes the records already in `--out`.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Extremal => "extremal",
            Command::Onb => "onb",
            Command::Sample => "sample",
            Command::Roots => "roots",
            Command::Experiment => "experiment",
            Command::Report => "report",
        }
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    out: PathBuf,
    verbose: u8,
    files: Vec<String>,
}

impl Ctx {
    fn log(&self, level: u8, msg: impl AsRef<str>) {
        if self.verbose >= level {
            eprintln!("zerolab: {}", msg.as_ref());
        }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.out.join(name)
    }

    fn finish(mut self, command: Command, records: usize) -> Result<()> {
        self.files.sort();
        self.files.dedup();
        let manifest = Manifest::new(command.name(), self.cfg.hash(), self.cfg.seed, records, self.files);
        manifest.persist(&self.out.join("manifest.json"))
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let path = path.ok_or_else(|| Error::Config("--config <FILE> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn extremal(ctx: &mut Ctx) -> Result<usize> {
    let model = Model::new(&ctx.cfg.ensemble)?;
    let ev = model
        .evaluator()
        .ok_or_else(|| Error::Config("extremal needs a weighted or elliptic ensemble".into()))?;
    let m = ev.dimension();
    let mut w = ctx.create("extremal.csv")?;
    writeln!(w, "log_r,V,mu_cdf")?;
    let points = 2001;
    for i in 0..points {
        let s = -2.0 + 4.0 * i as f64 / (points - 1) as f64;
        let v = ev.value_at_log_radii(&vec![s; m]);
        if m == 1 {
            writeln!(w, "{s:?},{v:?},{:?}", ev.radial_equilibrium_cdf(s.exp())?)?;
        } else {
            // the diagonal |z_1| = … = |z_m|; no radial distribution
            writeln!(w, "{s:?},{v:?},")?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn onb(ctx: &mut Ctx) -> Result<usize> {
    let model = Model::new(&ctx.cfg.ensemble)?;
    for &n in &ctx.cfg.degrees.clone() {
        ctx.log(1, format!("basis n = {n}"));
        let mut w = ctx.create(&format!("onb_n{n}.csv"))?;
        match model.basis(n)? {
            Basis::Monomial(b) => b.write_csv(&mut w)?,
            Basis::Recurrence(b) => {
                let (a, bb) = b.recurrence();
                writeln!(w, "k,a,b,log_leading")?;
                for k in 0..=n {
                    writeln!(w, "{k},{:?},{:?},{:?}", a[k], bb[k], b.log_leading(k))?;
                }
            }
        }
        w.flush()?;
    }
    Ok(0)
}

fn sample(ctx: &mut Ctx) -> Result<usize> {
    let model = Model::new(&ctx.cfg.ensemble)?;
    let cfg = ctx.cfg.clone();
    for &n in &cfg.degrees {
        let basis = model.basis(n)?;
        let mut w = ctx.create(&format!("sample_n{n}.csv"))?;
        writeln!(w, "trial,k,log_abs,phase")?;
        for t in 0..cfg.trials {
            let f = experiments::sample(&basis, &cfg.coefficients, cfg.seed, t)?;
            for (k, c) in f.coeffs().iter().enumerate() {
                writeln!(w, "{t},{k},{:?},{:?}", c.log_abs, c.phase)?;
            }
        }
        w.flush()?;
    }
    Ok(0)
}

fn roots(ctx: &mut Ctx) -> Result<usize> {
    if ctx.cfg.dimension() != 1 {
        return Err(Error::Config("roots needs a one-variable ensemble".into()));
    }
    let model = Model::new(&ctx.cfg.ensemble)?;
    let cfg = ctx.cfg.clone();
    let mut failed = 0;
    for &n in &cfg.degrees {
        let basis = model.basis(n)?;
        let sets: Vec<Result<RootSet>> = {
            use rayon::prelude::*;
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| find_roots(&experiments::sample(&basis, &cfg.coefficients, cfg.seed, t)?, &RootOptions::default()))
                .collect()
        };
        for (t, set) in sets.into_iter().enumerate() {
            let set = set?;
            if !set.converged {
                failed += 1;
                ctx.log(0, format!("n = {n} trial {t}: roots did not converge (max residual 1e{:.1})", set.max_log10_residual()));
            }
            let mut w = ctx.create(&format!("roots_n{n}_t{t}.csv"))?;
            write_roots_csv(&set, &mut w)?;
            w.flush()?;
        }
        ctx.log(1, format!("roots n = {n}: {} trials", cfg.trials));
    }
    if failed > 0 {
        return Err(Error::RootNonConvergence { restarts: RootOptions::default().restarts });
    }
    Ok(0)
}

fn experiment(ctx: &mut Ctx) -> Result<usize> {
    ctx.log(1, format!("{} over degrees {:?}, {} trials", ctx.cfg.experiment_kind.name(), ctx.cfg.degrees, ctx.cfg.trials));
    let out = experiments::run(&ctx.cfg)?;
    let path = ctx.path("records.jsonl");
    persist_records(&out.records, &path)?;
    let path = ctx.path("summary.csv");
    persist_summary(&out.summary, &path)?;
    for (n, t, set) in &out.roots {
        let mut w = ctx.create(&format!("roots_n{n}_t{t}.csv"))?;
        write_roots_csv(set, &mut w)?;
        w.flush()?;
    }
    if out.notes.as_object().is_some_and(|o| !o.is_empty()) {
        let mut w = ctx.create("notes.json")?;
        writeln!(w, "{}", serde_json::to_string_pretty(&out.notes).expect("notes serialize"))?;
        w.flush()?;
    }
    let flagged = out.records.iter().filter(|r| r.has_flag(experiments::flags::NONCONVERGED)).count();
    if flagged > 0 {
        ctx.log(0, format!("warning: {flagged} records from non-converged root sets"));
    }
    for row in &out.summary.rows {
        ctx.log(1, format!("n = {} {} {}: mean |dev| {:.4} (se {:.4})", row.degree, row.region, row.kind, row.mean_abs_dev, row.se));
    }
    Ok(out.records.len())
}

fn report(ctx: &mut Ctx) -> Result<usize> {
    let path = ctx.out.join("records.jsonl");
    let records = load_records(&path).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
        other => other,
    })?;
    check_references(&records, &ctx.cfg)?;
    let summary = summarize(&records, &ctx.cfg.epsilons);
    let spath = ctx.path("summary.csv");
    persist_summary(&summary, &spath)?;
    let eps: Vec<String> = summary.epsilons.iter().map(|e| format!("P[>={e}]")).collect();
    println!("{:>6} {:<28} {:<22} {:>6} {:>10} {} {:>8}", "degree", "region", "kind", "trials", "mean|dev|", eps.join(" "), "se");
    for r in &summary.rows {
        let ex: Vec<String> = r.exceed.iter().zip(&eps).map(|(x, h)| format!("{:>w$.3}", x, w = h.len())).collect();
        println!(
            "{:>6} {:<28} {:<22} {:>6} {:>10.5} {} {:>8.5}",
            r.degree,
            r.region,
            r.kind,
            r.trials,
            r.mean_abs_dev,
            ex.join(" "),
            r.se
        );
    }
    Ok(records.len())
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref(), cli.seed)?;
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out)?;
    let mut ctx = Ctx {
        cfg,
        out: cli.out.clone(),
        verbose: cli.verbose,
        files: Vec::new(),
    };
    let records = match cli.command {
        Command::Extremal => extremal(&mut ctx)?,
        Command::Onb => onb(&mut ctx)?,
        Command::Sample => sample(&mut ctx)?,
        Command::Roots => roots(&mut ctx)?,
        Command::Experiment => experiment(&mut ctx)?,
        Command::Report => report(&mut ctx)?,
    };
    ctx.log(1, format!("wrote {} files to {}", ctx.files.len(), ctx.out.display()));
    ctx.finish(cli.command, records)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zerolab {}: {e}", cli.command.name());
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
