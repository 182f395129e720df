//! `seer` — destroy files by encrypting them in place and erasing the keys.
//!
//! Subcommands: `destroy` (irreversible), `verify` and `audit` (read-only),
//! `bench` (timing comparison against overwrite wipes). Exit codes: 0 all
//! good, 1 usage or refused operation, 2 at least one file failed.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seer_core::audit::{audit_file, AuditThresholds, VerdictKind};
use seer_core::bench::{run_bench, render_csv, render_table, BenchResult, BenchSpec, ContentClass, WipeMethod};
use seer_core::engine::{destroy_tree, read_footer, ErasureConfig, ErasureReport, ErasureStatus};
use seer_core::keymgr::EntropySource;

#[derive(Parser)]
#[command(
    name = "seer",
    version,
    about = "Secure file destruction: encrypt in place, then destroy the keys",
    after_help = "Destruction is irreversible. There is no recovery mode, by design."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Irreversibly destroy files (or directory trees with --recursive)
    Destroy(DestroyArgs),
    /// Check that paths are destroyed files with valid footers
    Verify(CheckArgs),
    /// Full audit: footer, header signatures, entropy, uniformity
    Audit(CheckArgs),
    /// Benchmark the erasure against overwrite baselines
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct DestroyArgs {
    /// Files or directories to destroy
    #[arg(required = true)]
    paths: Vec<PathBuf>,

    /// Descend into subdirectories
    #[arg(long)]
    recursive: bool,

    /// Worker threads for batch destruction
    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Read/encrypt/write chunk size in bytes (>= 4096, multiple of 16)
    #[arg(long, default_value_t = 65_536)]
    chunk_size: usize,

    /// Skip the final fsync (faster, weaker durability)
    #[arg(long)]
    no_fsync: bool,

    /// Destroy symlink targets instead of skipping symlinks
    #[arg(long)]
    follow_symlinks: bool,

    /// Walk and report without touching any bytes
    #[arg(long)]
    dry_run: bool,

    /// Skip the interactive confirmation
    #[arg(long)]
    force: bool,

    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,

    /// Also append one JSON report per file to this file
    #[arg(long)]
    report: Option<PathBuf>,

    /// Allow filesystem roots and the seer binary itself as targets
    #[arg(long)]
    allow_protected: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated methods: seer, single, dod3, gutmann
    #[arg(long, default_value = "seer")]
    method: String,

    /// Comma-separated file counts (default mirrors the 100/1000/10000 grid)
    #[arg(long, default_value = "100,1000,10000")]
    count: String,

    /// File size in bytes
    #[arg(long, default_value_t = 1024)]
    size: u64,

    /// Comma-separated content classes: text, image, binary
    #[arg(long, default_value = "text,image,binary")]
    class: String,

    /// Repetitions per cell (medians are reported)
    #[arg(long, default_value_t = 1)]
    reps: usize,

    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Directory for scratch corpora (default: a temp directory)
    #[arg(long)]
    workdir: Option<PathBuf>,

    /// Write per-repetition CSV rows to this file
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Corpus seed; identical seeds give bit-identical corpora
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let code = match cli.command {
        Command::Destroy(args) => cmd_destroy(args),
        Command::Verify(args) => cmd_check(args, false),
        Command::Audit(args) => cmd_check(args, true),
        Command::Bench(args) => cmd_bench(args),
    };
    ExitCode::from(code)
}

/// Deterministic entropy for the test harness; debug builds only, and only
/// when SEER_TEST_MODE=1 is set. Release builds always use the system path.
fn make_entropy() -> seer_core::Result<EntropySource> {
    #[cfg(debug_assertions)]
    if std::env::var("SEER_TEST_MODE").as_deref() == Ok("1") {
        let mut seed = [0u8; 32];
        if let Ok(s) = std::env::var("SEER_TEST_SEED") {
            for (i, b) in s.as_bytes().iter().take(32).enumerate() {
                seed[i] = *b;
            }
        }
        eprintln!("seer: SEER_TEST_MODE active, entropy is deterministic");
        return Ok(seer_core::testmode::deterministic_entropy(seed));
    }
    EntropySource::system()
}

// ---------------------------------------------------------------------------
// destroy
// ---------------------------------------------------------------------------

fn protected_target(path: &Path) -> Option<String> {
    let canonical = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
    if canonical.parent().is_none() {
        return Some(format!("{} is a filesystem root", canonical.display()));
    }
    if let Ok(exe) = std::env::current_exe() {
        if let Ok(exe) = exe.canonicalize() {
            if canonical == exe {
                return Some("refusing to destroy the seer binary itself".into());
            }
        }
    }
    None
}

fn cmd_destroy(args: DestroyArgs) -> u8 {
    let config = ErasureConfig {
        chunk_size: args.chunk_size,
        recursive: args.recursive,
        follow_symlinks: args.follow_symlinks,
        threads: args.threads,
        fsync: !args.no_fsync,
        dry_run: args.dry_run,
    };
    if let Err(e) = config.validate() {
        eprintln!("seer: {e}");
        return 1;
    }

    if !args.allow_protected {
        for path in &args.paths {
            if let Some(reason) = protected_target(path) {
                eprintln!("seer: {reason} (use --allow-protected to override)");
                return 1;
            }
        }
    }

    if !args.force && !args.dry_run {
        eprint!(
            "About to IRREVERSIBLY destroy {} path(s). There is no recovery. Continue? [y/N] ",
            args.paths.len()
        );
        let mut answer = String::new();
        if std::io::stdin().lock().read_line(&mut answer).is_err()
            || !answer.trim().eq_ignore_ascii_case("y")
        {
            eprintln!("aborted");
            return 1;
        }
    }

    let entropy = match make_entropy() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("seer: {e}");
            return 2;
        }
    };

    let mut report_sink = match &args.report {
        Some(path) => match std::fs::OpenOptions::new().create(true).append(true).open(path) {
            Ok(f) => Some(f),
            Err(e) => {
                eprintln!("seer: cannot open report file: {e}");
                return 1;
            }
        },
        None => None,
    };

    let mut failed = 0usize;
    for path in &args.paths {
        let reports = match destroy_tree(path, &config, &entropy) {
            Ok(reports) => reports,
            Err(e) => vec![ErasureReport {
                path: path.clone(),
                status: ErasureStatus::Failed,
                bytes_processed: 0,
                wall_time_ms: 0.0,
                session_destroyed: false,
                error: Some(e.to_string()),
            }],
        };
        for report in &reports {
            if report.status == ErasureStatus::Failed {
                failed += 1;
            }
            emit_report(report, args.output, report_sink.as_mut());
        }
    }

    if failed > 0 {
        2
    } else {
        0
    }
}

fn emit_report(report: &ErasureReport, output: OutputFormat, sink: Option<&mut std::fs::File>) {
    let json = serde_json::to_string(report).expect("report serializes");
    match output {
        OutputFormat::Json => println!("{json}"),
        OutputFormat::Text => match report.status {
            ErasureStatus::Destroyed => println!(
                "destroyed  {}  ({} bytes, {:.2} ms)",
                report.path.display(),
                report.bytes_processed,
                report.wall_time_ms
            ),
            ErasureStatus::Skipped => println!(
                "skipped    {}  ({})",
                report.path.display(),
                report.error.as_deref().unwrap_or("")
            ),
            ErasureStatus::Failed => println!(
                "FAILED     {}  ({})",
                report.path.display(),
                report.error.as_deref().unwrap_or("unknown error")
            ),
        },
    }
    if let Some(f) = sink {
        let _ = writeln!(f, "{json}");
    }
}

// ---------------------------------------------------------------------------
// verify / audit
// ---------------------------------------------------------------------------

fn cmd_check(args: CheckArgs, full_audit: bool) -> u8 {
    let thresholds = AuditThresholds::default();
    let mut all_destroyed = true;

    for path in &args.paths {
        // the footer parse result carries the precise failure detail
        let footer_detail = match read_footer(path) {
            Ok(_) => None,
            Err(e) => Some(e.to_string()),
        };
        match audit_file(path, None, &thresholds) {
            Ok(verdict) => {
                if verdict.verdict != VerdictKind::Destroyed {
                    all_destroyed = false;
                }
                match args.output {
                    OutputFormat::Json => {
                        println!("{}", serde_json::to_string(&verdict).expect("verdict serializes"))
                    }
                    OutputFormat::Text => {
                        if full_audit {
                            println!(
                                "{:?}  {}  footer_ok={} header_changed={} entropy={:.3} chi2_p={:.4}{}",
                                verdict.verdict,
                                path.display(),
                                verdict.footer_ok,
                                verdict.header_changed,
                                verdict.entropy_bits_per_octet,
                                verdict.chi_square_p,
                                footer_detail
                                    .as_deref()
                                    .map(|d| format!("  [{d}]"))
                                    .unwrap_or_default(),
                            );
                        } else {
                            println!(
                                "{:?}  {}{}",
                                verdict.verdict,
                                path.display(),
                                footer_detail
                                    .as_deref()
                                    .map(|d| format!("  [{d}]"))
                                    .unwrap_or_default(),
                            );
                        }
                    }
                }
            }
            Err(e) => {
                all_destroyed = false;
                eprintln!("seer: {}: {e}", path.display());
            }
        }
    }

    if all_destroyed {
        0
    } else {
        2
    }
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn parse_list<T>(s: &str, parse: impl Fn(&str) -> seer_core::Result<T>) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|item| parse(item.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn cmd_bench(args: BenchArgs) -> u8 {
    let methods = match parse_list(&args.method, WipeMethod::parse) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("seer: {e}");
            return 1;
        }
    };
    let classes = match parse_list(&args.class, ContentClass::parse) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("seer: {e}");
            return 1;
        }
    };
    let counts = match parse_list(&args.count, |s| {
        s.parse::<usize>()
            .map_err(|e| seer_core::Error::InvalidConfig(format!("bad count '{s}': {e}")))
    }) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("seer: {e}");
            return 1;
        }
    };
    if args.size < 1 {
        eprintln!("seer: file size must be >= 1");
        return 1;
    }

    let tempdir;
    let workdir = match &args.workdir {
        Some(dir) => dir.clone(),
        None => {
            tempdir = match tempfile_dir() {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("seer: cannot create work directory: {e}");
                    return 2;
                }
            };
            tempdir
        }
    };

    let mut results: Vec<BenchResult> = Vec::new();
    for class in &classes {
        for &count in &counts {
            for method in &methods {
                let spec = BenchSpec {
                    method: *method,
                    content_class: *class,
                    file_count: count,
                    file_size: args.size,
                    threads: args.threads,
                    repetitions: args.reps,
                };
                if let Err(e) = spec.validate() {
                    eprintln!("seer: {e}");
                    return 1;
                }
                eprintln!(
                    "bench: {} {} {}x{} ({} reps)...",
                    method.name(),
                    class.name(),
                    count,
                    args.size,
                    args.reps
                );
                match run_bench(&spec, &workdir, args.seed) {
                    Ok(result) => results.push(result),
                    Err(e) => {
                        eprintln!("seer: bench failed: {e}");
                        return 2;
                    }
                }
            }
        }
    }

    print!("{}", render_table(&results));
    if let Some(path) = &args.csv {
        if let Err(e) = std::fs::write(path, render_csv(&results)) {
            eprintln!("seer: cannot write csv: {e}");
            return 2;
        }
    }
    if results.iter().any(|r| !r.valid) {
        return 2;
    }
    0
}

fn tempfile_dir() -> std::io::Result<PathBuf> {
    let base = std::env::temp_dir().join(format!("seer-bench-{}", std::process::id()));
    std::fs::create_dir_all(&base)?;
    Ok(base)
}
