//! Wipe-method benchmark harness.
//!
//! Generates reproducible corpora of N files x S octets in three content
//! classes (text, image-like, binary-executable shaped), times the
//! cryptographic erasure against classic overwrite baselines, and renders
//! the measurements as aligned text or CSV. Every method in a comparison
//! consumes a bit-identical, freshly generated corpus; write volume is
//! counted exactly so the pass-count laws can be asserted.

use std::fs::{self, OpenOptions};
use std::io::{Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::{Rng, SeedableRng};

use crate::engine::{destroy_tree, ErasureConfig, ErasureStatus, FOOTER_LEN};
use crate::error::{Error, Result};
use crate::keymgr::EntropySource;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WipeMethod {
    /// Encrypt in place and destroy the keys.
    Seer,
    /// One random overwrite pass.
    SinglePass,
    /// Zeros, ones, random; each pass flushed.
    Dod3Pass,
    /// The canonical 35-pass sequence (4 random, 27 patterned, 4 random).
    Gutmann35,
}

impl WipeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            WipeMethod::Seer => "seer",
            WipeMethod::SinglePass => "single",
            WipeMethod::Dod3Pass => "dod3",
            WipeMethod::Gutmann35 => "gutmann",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "seer" => Ok(WipeMethod::Seer),
            "single" | "singlepass" => Ok(WipeMethod::SinglePass),
            "dod3" | "dod" => Ok(WipeMethod::Dod3Pass),
            "gutmann" | "gutmann35" => Ok(WipeMethod::Gutmann35),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }

    /// Number of full payload writes the method performs.
    pub fn pass_count(&self) -> u64 {
        match self {
            WipeMethod::Seer | WipeMethod::SinglePass => 1,
            WipeMethod::Dod3Pass => 3,
            WipeMethod::Gutmann35 => 35,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ContentClass {
    Text,
    ImageLike,
    Binary,
}

impl ContentClass {
    pub const ALL: [ContentClass; 3] =
        [ContentClass::Text, ContentClass::ImageLike, ContentClass::Binary];

    pub fn name(&self) -> &'static str {
        match self {
            ContentClass::Text => "text",
            ContentClass::ImageLike => "image",
            ContentClass::Binary => "binary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ContentClass::Text),
            "image" | "img" | "jpg" => Ok(ContentClass::ImageLike),
            "binary" | "bin" | "exe" => Ok(ContentClass::Binary),
            other => Err(Error::InvalidConfig(format!("unknown content class '{other}'"))),
        }
    }

    fn extension(&self) -> &'static str {
        match self {
            ContentClass::Text => "txt",
            ContentClass::ImageLike => "jpg",
            ContentClass::Binary => "exe",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BenchSpec {
    pub method: WipeMethod,
    pub content_class: ContentClass,
    pub file_count: usize,
    pub file_size: u64,
    pub threads: usize,
    pub repetitions: usize,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.file_count < 1 {
            return Err(Error::InvalidConfig("file_count must be >= 1".into()));
        }
        if self.file_size < 1 {
            return Err(Error::InvalidConfig("file_size must be >= 1".into()));
        }
        if self.repetitions < 1 {
            return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.threads < 1 {
            return Err(Error::InvalidConfig("threads must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RepRun {
    pub repetition: usize,
    pub total_seconds: f64,
    pub bytes_written: u64,
}

/// Aggregated timing for one spec. `total_seconds` is the median over
/// repetitions; per-repetition measurements are kept for the CSV.
#[derive(Clone, Debug)]
pub struct BenchResult {
    pub spec: BenchSpec,
    pub runs: Vec<RepRun>,
    pub total_seconds: f64,
    pub mean_ms_per_file: f64,
    pub stddev_ms: f64,
    pub bytes_written: u64,
    pub valid: bool,
}

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

const WORDS: &[&str] = &[
    "the", "of", "record", "entry", "system", "data", "report", "value", "index", "session",
    "archive", "note", "line", "field", "table", "status", "update", "proto", "batch", "check",
];

fn file_rng(seed: u64, class: ContentClass, index: usize) -> ChaCha8Rng {
    let mix = seed
        ^ (class.name().len() as u64) << 56
        ^ (class.name().as_bytes()[0] as u64) << 40
        ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha8Rng::seed_from_u64(mix)
}

fn gen_content(class: ContentClass, size: u64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let size = size as usize;
    let mut out = Vec::with_capacity(size);
    match class {
        ContentClass::Text => {
            while out.len() < size {
                let mut col = 0;
                while col < 72 && out.len() < size {
                    let word = WORDS[(rng.next_u32() as usize) % WORDS.len()];
                    out.extend_from_slice(word.as_bytes());
                    out.push(b' ');
                    col += word.len() + 1;
                }
                if out.len() < size {
                    *out.last_mut().unwrap() = b'\n';
                }
            }
        }
        ContentClass::ImageLike => {
            // JPEG SOI + APP0, then a structured pseudo-image payload.
            out.extend_from_slice(&[
                0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, b'J', b'F', b'I', b'F', 0x00, 0x01, 0x01,
                0x00, 0x00, 0x48, 0x00, 0x48, 0x00, 0x00,
            ]);
            let mut x = 0u32;
            while out.len() < size {
                let gradient = ((x / 8) % 223) as u8;
                let noise = (rng.next_u32() & 0x1F) as u8;
                out.push(gradient.wrapping_add(noise));
                x += 1;
            }
            if size >= 2 {
                out[size - 2] = 0xFF;
                out[size - 1] = 0xD9;
            }
        }
        ContentClass::Binary => {
            out.extend_from_slice(&[
                0x7F, b'E', b'L', b'F', 2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0,
            ]);
            while out.len() < size {
                match (out.len() / 64) % 3 {
                    0 => {
                        // code-like section
                        let mut chunk = [0u8; 16];
                        rng.fill_bytes(&mut chunk);
                        out.extend_from_slice(&chunk);
                    }
                    1 => out.extend_from_slice(&[0u8; 16]),
                    _ => {
                        let word = WORDS[(rng.next_u32() as usize) % WORDS.len()];
                        out.extend_from_slice(word.as_bytes());
                        out.push(0);
                    }
                }
            }
        }
    }
    out.truncate(size);
    debug_assert_eq!(out.len(), size);
    out
}

/// Write `file_count` files of exactly `file_size` octets into `dir`.
/// Deterministic in `seed`: the same seed yields bit-identical corpora.
pub fn make_corpus(
    dir: &Path,
    class: ContentClass,
    file_count: usize,
    file_size: u64,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(file_count);
    for i in 0..file_count {
        let mut rng = file_rng(seed, class, i);
        let content = gen_content(class, file_size, &mut rng);
        let path = dir.join(format!("f{i:06}.{}", class.extension()));
        fs::write(&path, &content)?;
        paths.push(path);
    }
    Ok(paths)
}

// ---------------------------------------------------------------------------
// Overwrite baselines
// ---------------------------------------------------------------------------

enum Pass {
    Fixed(&'static [u8]),
    Random,
}

// Gutmann's 27 deterministic middle passes.
const GUTMANN_PATTERNS: [&[u8]; 27] = [
    &[0x55],
    &[0xAA],
    &[0x92, 0x49, 0x24],
    &[0x49, 0x24, 0x92],
    &[0x24, 0x92, 0x49],
    &[0x00],
    &[0x11],
    &[0x22],
    &[0x33],
    &[0x44],
    &[0x55],
    &[0x66],
    &[0x77],
    &[0x88],
    &[0x99],
    &[0xAA],
    &[0xBB],
    &[0xCC],
    &[0xDD],
    &[0xEE],
    &[0xFF],
    &[0x92, 0x49, 0x24],
    &[0x49, 0x24, 0x92],
    &[0x24, 0x92, 0x49],
    &[0x6D, 0xB6, 0xDB],
    &[0xB6, 0xDB, 0x6D],
    &[0xDB, 0x6D, 0xB6],
];

fn method_passes(method: WipeMethod) -> Vec<Pass> {
    match method {
        WipeMethod::Seer => Vec::new(),
        WipeMethod::SinglePass => vec![Pass::Random],
        WipeMethod::Dod3Pass => vec![Pass::Fixed(&[0x00]), Pass::Fixed(&[0xFF]), Pass::Random],
        WipeMethod::Gutmann35 => {
            let mut v: Vec<Pass> = (0..4).map(|_| Pass::Random).collect();
            v.extend(GUTMANN_PATTERNS.iter().map(|p| Pass::Fixed(p)));
            v.extend((0..4).map(|_| Pass::Random));
            v
        }
    }
}

const WRITE_CHUNK: usize = 64 * 1024;

fn overwrite_file(path: &Path, passes: &[Pass], rng: &mut ChaCha8Rng) -> Result<u64> {
    let mut file = OpenOptions::new().write(true).open(path)?;
    let len = file.metadata()?.len();
    let mut written = 0u64;
    let mut buf = vec![0u8; WRITE_CHUNK];
    for pass in passes {
        file.seek(SeekFrom::Start(0))?;
        if let Pass::Fixed(pattern) = pass {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = pattern[i % pattern.len()];
            }
        }
        let mut pos = 0u64;
        while pos < len {
            let n = ((len - pos) as usize).min(WRITE_CHUNK);
            if matches!(pass, Pass::Random) {
                rng.fill_bytes(&mut buf[..n]);
            }
            file.write_all(&buf[..n])?;
            pos += n as u64;
            written += n as u64;
        }
        file.flush()?;
        file.sync_data()?;
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

/// Time one spec. Each repetition regenerates the corpus from the same
/// seed, so every repetition (and every method benchmarked with the same
/// seed) sees identical input bytes. Cache dropping is not portable from
/// userspace; timings are wall-clock over a freshly written corpus.
pub fn run_bench(spec: &BenchSpec, workdir: &Path, seed: u64) -> Result<BenchResult> {
    spec.validate()?;
    let mut runs = Vec::with_capacity(spec.repetitions);
    let mut valid = true;

    for rep in 0..spec.repetitions {
        let corpus = workdir.join(format!(
            "{}_{}_{}x{}_rep{rep}",
            spec.method.name(),
            spec.content_class.name(),
            spec.file_count,
            spec.file_size
        ));
        let files = make_corpus(&corpus, spec.content_class, spec.file_count, spec.file_size, seed)?;

        let start = Instant::now();
        let bytes_written = match spec.method {
            WipeMethod::Seer => {
                let entropy = EntropySource::system()?;
                let config = ErasureConfig {
                    recursive: true,
                    threads: spec.threads,
                    // throughput-oriented chunking for bulk runs
                    chunk_size: 1 << 20,
                    ..Default::default()
                };
                let reports = destroy_tree(&corpus, &config, &entropy)?;
                if reports.len() != spec.file_count
                    || reports.iter().any(|r| r.status != ErasureStatus::Destroyed)
                {
                    valid = false;
                }
                reports
                    .iter()
                    .map(|r| r.bytes_processed + FOOTER_LEN as u64)
                    .sum()
            }
            method => {
                let passes = method_passes(method);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xDEAD_BEEF);
                let mut total = 0u64;
                for f in &files {
                    total += overwrite_file(f, &passes, &mut rng)?;
                }
                total
            }
        };
        let total_seconds = start.elapsed().as_secs_f64();
        runs.push(RepRun { repetition: rep, total_seconds, bytes_written });
        fs::remove_dir_all(&corpus)?;
    }

    let mut times: Vec<f64> = runs.iter().map(|r| r.total_seconds).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total_seconds = times[times.len() / 2];
    let mean_ms_per_file = total_seconds * 1e3 / spec.file_count as f64;

    let per_file_ms: Vec<f64> = runs
        .iter()
        .map(|r| r.total_seconds * 1e3 / spec.file_count as f64)
        .collect();
    let mean_of_means = per_file_ms.iter().sum::<f64>() / per_file_ms.len() as f64;
    let variance = per_file_ms
        .iter()
        .map(|m| (m - mean_of_means).powi(2))
        .sum::<f64>()
        / per_file_ms.len() as f64;
    let stddev_ms = variance.sqrt();

    let mut volumes: Vec<u64> = runs.iter().map(|r| r.bytes_written).collect();
    volumes.sort_unstable();
    let bytes_written = volumes[volumes.len() / 2];

    Ok(BenchResult {
        spec: *spec,
        runs,
        total_seconds,
        mean_ms_per_file,
        stddev_ms,
        bytes_written,
        valid,
    })
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str =
    "method,content_class,file_count,file_size,repetition,total_seconds,mean_ms_per_file";

/// One CSV row per repetition.
pub fn render_csv(results: &[BenchResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        for run in &r.runs {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{:.6}\n",
                r.spec.method.name(),
                r.spec.content_class.name(),
                r.spec.file_count,
                r.spec.file_size,
                run.repetition,
                run.total_seconds,
                run.total_seconds * 1e3 / r.spec.file_count as f64,
            ));
        }
    }
    out
}

/// Aligned text table, one row per result (medians over repetitions).
pub fn render_table(results: &[BenchResult]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<8} {:<7} {:>8} {:>10} {:>5} {:>12} {:>14} {:>11} {:>14}\n",
        "method", "class", "files", "size", "reps", "total_s", "mean_ms/file", "stddev_ms", "bytes_written"
    ));
    for r in results {
        out.push_str(&format!(
            "{:<8} {:<7} {:>8} {:>10} {:>5} {:>12.4} {:>14.4} {:>11.4} {:>14}{}\n",
            r.spec.method.name(),
            r.spec.content_class.name(),
            r.spec.file_count,
            r.spec.file_size,
            r.spec.repetitions,
            r.total_seconds,
            r.mean_ms_per_file,
            r.stddev_ms,
            r.bytes_written,
            if r.valid { "" } else { "  (INVALID)" },
        ));
    }
    out
}
