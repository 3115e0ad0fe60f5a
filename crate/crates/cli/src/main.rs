//! Command-line driver: structure validation, reduction, threshold prediction,
//! counting, sweeps, self-checks and group tables.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use congruence_lab::counting::{
    cauchy_schwarz_lower_bound, nu_histogram, r_rooted, Mode, NuOptions, PointSet,
};
use congruence_lab::experiments::{
    bound_report, threshold_sweep, verify, write_checks_csv, BoundsConfig, Suite, SweepConfig,
};
use congruence_lab::field::FieldParams;
use congruence_lab::group::{enumerate_group, GroupTable};
use congruence_lab::structure::{
    canonicalize_traced, predict_all_k, predict_threshold, shape_key, Kind, StructureDoc,
    ThresholdPrediction,
};
use congruence_lab::{Error, Result};

/// Directory holding cached group tables.
const CACHE_ENV: &str = "CONGRUENCE_LAB_CACHE";

const EXIT_INVALID: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "congruence-lab", version, about = "Congruence classes of simplex structures over finite fields")]
struct Cli {
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on worker threads; output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Literal,
    Nondegenerate,
}

#[derive(Subcommand)]
enum Command {
    /// Check the axioms of a structure file.
    Validate { structure: PathBuf },
    /// Canonicalize a rooted tree and print the rewrite trace.
    Reduce {
        structure: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Predicted size thresholds.
    Predict {
        structure: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long, conflicts_with = "all_k")]
        k: Option<usize>,
        #[arg(long)]
        all_k: bool,
    },
    /// Congruence-class histogram and the rooted sum for a point set.
    Count {
        structure: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        /// Point set file {"points": [[...], ...]}.
        #[arg(long, conflicts_with = "full")]
        set: Option<PathBuf>,
        /// Use every point of F_q^d.
        #[arg(long)]
        full: bool,
        #[arg(long, value_enum, default_value = "literal")]
        mode: ModeArg,
    },
    /// Threshold sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run invariant checks.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the full bound table as CSV.
        #[arg(long)]
        bounds_csv: Option<PathBuf>,
    },
    /// Enumerate O_d(F_q) and write its cache file.
    Group {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: usize,
        /// Defaults to $CONGRUENCE_LAB_CACHE, then the current directory.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Resource(_) | Error::Overflow(_) => EXIT_RESOURCE,
        Error::Parameter(_) => EXIT_USAGE,
        Error::Invalid(_) | Error::Format(_) | Error::Io(_) | Error::Json(_) => EXIT_INVALID,
    }
}

fn read_doc(path: &Path) -> Result<StructureDoc> {
    StructureDoc::from_json(&fs::read_to_string(path)?)
}

fn cache_path(dir: &Path, params: FieldParams) -> PathBuf {
    dir.join(format!("o{}_q{}.ogt", params.d(), params.q()))
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

/// The cached table when one exists, otherwise a fresh enumeration.
fn load_group(params: FieldParams) -> Result<GroupTable> {
    if let Some(dir) = cache_dir() {
        let path = cache_path(&dir, params);
        if path.exists() {
            return GroupTable::read_cache(&path, params);
        }
    }
    enumerate_group(params)
}

fn validate(out: &mut impl Write, json_out: bool, path: &Path) -> Result<u8> {
    let doc = read_doc(path)?;
    let mut violation = doc.structure_unchecked().validate().err().map(|v| v.to_string());
    if violation.is_none() && doc.kind == Kind::Tree && (doc.root.is_some() || doc.free_vertex.is_some()) {
        violation = doc.rooted().err().map(|e| e.to_string());
    }
    if json_out {
        let v = doc.structure_unchecked().validate().err();
        writeln!(out, "{}", json!({ "valid": violation.is_none(), "violation": v, "message": violation }))?;
    } else {
        match &violation {
            None => writeln!(out, "valid")?,
            Some(m) => writeln!(out, "invalid: {m}")?,
        }
    }
    Ok(if violation.is_some() { EXIT_INVALID } else { 0 })
}

fn reduce(out: &mut impl Write, path: &Path, k: usize) -> Result<u8> {
    let tree = read_doc(path)?.rooted()?;
    let trace = canonicalize_traced(&tree, k)?;
    let terminal: Vec<_> = trace
        .terminal
        .iter()
        .map(|t| json!({ "tree": t.to_doc(), "shape": shape_key(t.structure()), "dims": t.structure().dims() }))
        .collect();
    let doc = json!({ "k": trace.k, "steps": trace.steps, "terminal": terminal });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(0)
}

fn predict(out: &mut impl Write, json_out: bool, path: &Path, d: usize, k: Option<usize>, all_k: bool) -> Result<u8> {
    let structure = read_doc(path)?.structure()?;
    let rows: Vec<ThresholdPrediction> = match (k, all_k) {
        (Some(k), _) => vec![predict_threshold(&structure, d, k)?],
        (None, true) => predict_all_k(&structure, d)?,
        (None, false) => vec![predict_threshold(&structure, d, 1)?],
    };
    if json_out {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        return Ok(0);
    }
    writeln!(out, "d,k,n_k,rule,s")?;
    for r in &rows {
        let mut emit = |rule: &str, s: String| writeln!(out, "{},{},{},{rule},{s}", r.d, r.k, r.n_k);
        emit("general", r.general.to_string())?;
        if let Some(p) = r.planar {
            emit("planar", p.to_string())?;
        }
        if let Some(p) = r.small_simplex {
            emit("small-simplex", p.to_string())?;
        }
        emit("minimum", r.minimum.to_string())?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn count(
    out: &mut impl Write,
    json_out: bool,
    path: &Path,
    q: u32,
    d: usize,
    set: Option<&Path>,
    full: bool,
    mode: ModeArg,
) -> Result<u8> {
    let doc = read_doc(path)?;
    let structure = doc.structure()?;
    let params = FieldParams::new(q, d)?;
    let e = match (set, full) {
        (Some(p), false) => PointSet::from_json(params, &fs::read_to_string(p)?)?,
        (None, true) => PointSet::full(params),
        _ => return Err(Error::Parameter("give exactly one of --set or --full".into())),
    };
    let mode = match mode {
        ModeArg::Literal => Mode::Literal,
        ModeArg::Nondegenerate => Mode::Nondegenerate,
    };
    let opts = NuOptions {
        nondegenerate_only: matches!(mode, Mode::Nondegenerate),
        track_degenerate: true,
    };
    let hist = nu_histogram(&e, &structure, opts)?;
    let cs = cauchy_schwarz_lower_bound(&hist);
    let sum_sq = hist.sum_sq();
    let rooted = if structure.kind() == Kind::Tree {
        let group = load_group(params)?;
        Some(r_rooted(&e, &doc.rooted()?, &group, mode)?)
    } else {
        None
    };
    let ratio = rooted.as_ref().map(|r| if sum_sq == 0 { 0.0 } else { r.to_f64() / sum_sq as f64 });
    if json_out {
        let classes: Vec<_> = hist
            .counts()
            .iter()
            .map(|(k, c)| json!({ "distances": k.0, "count": c }))
            .collect();
        let doc = json!({
            "size": e.len(),
            "delta": hist.delta(),
            "delta_nonzero": hist.delta_nonzero(),
            "degenerate_maps": hist.degenerate_maps(),
            "cauchy_schwarz": cs.to_string(),
            "sum_sq": sum_sq.to_string(),
            "r_rooted": rooted.as_ref().map(|r| r.value().to_string()),
            "ratio": ratio,
            "classes": classes,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        return Ok(0);
    }
    hist.write_csv(&mut *out)?;
    writeln!(out)?;
    writeln!(out, "metric,value")?;
    writeln!(out, "size,{}", e.len())?;
    writeln!(out, "delta,{}", hist.delta())?;
    writeln!(out, "delta_nonzero,{}", hist.delta_nonzero())?;
    writeln!(out, "degenerate_maps,{}", hist.degenerate_maps().unwrap_or(0))?;
    writeln!(out, "cauchy_schwarz,{cs}")?;
    writeln!(out, "sum_sq,{sum_sq}")?;
    match (&rooted, ratio) {
        (Some(r), Some(x)) => {
            writeln!(out, "r_rooted,{}", r.value())?;
            writeln!(out, "ratio,{x}")?;
        }
        _ => {
            writeln!(out, "r_rooted,NA")?;
            writeln!(out, "ratio,NA")?;
        }
    }
    Ok(0)
}

fn sweep(out: &mut impl Write, json_out: bool, path: &Path, seed: Option<u64>) -> Result<u8> {
    let mut config = SweepConfig::from_json(&fs::read_to_string(path)?)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let report = threshold_sweep(&config)?;
    if json_out {
        writeln!(out, "{}", report.to_json()?)?;
    } else {
        report.write_csv(&mut *out)?;
    }
    Ok(0)
}

fn run_verify(out: &mut impl Write, json_out: bool, suite: &str, seed: u64, bounds_csv: Option<&Path>) -> Result<u8> {
    let suite: Suite = suite.parse()?;
    let checks = verify(suite, seed)?;
    if let Some(path) = bounds_csv {
        let report = bound_report(&BoundsConfig { seed, ..BoundsConfig::default() })?;
        report.write_csv(fs::File::create(path)?)?;
    }
    if json_out {
        writeln!(out, "{}", serde_json::to_string_pretty(&checks)?)?;
    } else {
        write_checks_csv(&checks, &mut *out)?;
    }
    Ok(if checks.iter().all(|c| c.pass) { 0 } else { EXIT_INVALID })
}

fn group(out: &mut impl Write, json_out: bool, q: u32, d: usize, dir: Option<PathBuf>) -> Result<u8> {
    let params = FieldParams::new(q, d)?;
    let dir = dir.or_else(cache_dir).unwrap_or_else(|| PathBuf::from("."));
    let path = cache_path(&dir, params);
    let cached = path.exists();
    let table = if cached {
        GroupTable::read_cache(&path, params)?
    } else {
        let table = enumerate_group(params)?;
        fs::create_dir_all(&dir)?;
        table.write_cache(&path)?;
        table
    };
    if json_out {
        let doc = json!({ "q": q, "d": d, "size": table.len(), "cache": path, "cached": cached });
        writeln!(out, "{doc}")?;
    } else {
        writeln!(out, "q,d,size,cache,cached")?;
        writeln!(out, "{q},{d},{},{},{cached}", table.len(), path.display())?;
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Parameter(e.to_string()))?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let json_out = cli.json;
    match cli.command {
        Command::Validate { structure } => validate(&mut out, json_out, &structure),
        Command::Reduce { structure, k } => reduce(&mut out, &structure, k),
        Command::Predict { structure, d, k, all_k } => predict(&mut out, json_out, &structure, d, k, all_k),
        Command::Count { structure, q, d, set, full, mode } => {
            count(&mut out, json_out, &structure, q, d, set.as_deref(), full, mode)
        }
        Command::Sweep { config, seed } => sweep(&mut out, json_out, &config, seed),
        Command::Verify { suite, seed, bounds_csv } => {
            run_verify(&mut out, json_out, &suite, seed, bounds_csv.as_deref())
        }
        Command::Group { q, d, cache_dir } => group(&mut out, json_out, q, d, cache_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        // A closed downstream pipe (e.g. `| head`) is not a failure.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
