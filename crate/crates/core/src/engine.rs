//! The erasure pipeline: per-file session setup, in-place streaming
//! encryption through the original file handle, footer append, durable
//! flush, and key destruction.
//!
//! A destroyed file is the Sosemanuk ciphertext of its original content
//! followed by a fixed 104-octet footer carrying the session public key
//! and the public cipher parameters. No plaintext ever touches a sibling
//! or temporary file; chunks are read, encrypted and written back through
//! seeks on the single handle. The footer is the final write, so a valid
//! footer implies every content chunk was committed first.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdf::Salt;
use crate::keymgr::{EntropySource, SessionKeys};
use crate::sosemanuk::{CipherIV, CipherState, IV_LEN};

// ---------------------------------------------------------------------------
// CRC-32 (IEEE 802.3 polynomial, reflected)
// ---------------------------------------------------------------------------

const fn crc32_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 { 0xEDB88320 ^ (c >> 1) } else { c >> 1 };
            k += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
}

static CRC32_TABLE: [u32; 256] = crc32_table();

pub(crate) fn crc32(data: &[u8]) -> u32 {
    let mut c = 0xFFFFFFFFu32;
    for &b in data {
        c = CRC32_TABLE[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFFFFFF
}

// ---------------------------------------------------------------------------
// Footer
// ---------------------------------------------------------------------------

pub const FOOTER_MAGIC: &[u8; 8] = b"SEERDSTR";
pub const FOOTER_VERSION: u16 = 1;
/// Bit 0: the whole file content is encrypted. Always set in version 1;
/// all other bits are reserved and must be zero.
pub const FLAG_FULL_FILE: u16 = 0x0001;
/// Serialized footer size in octets.
pub const FOOTER_LEN: usize = 104;

/// Bit-exact trailer appended to destroyed files. All multi-octet integers
/// are little-endian; the CRC covers every preceding footer octet.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ErasureFooter {
    pub version: u16,
    pub flags: u16,
    pub original_length: u64,
    pub salt: [u8; 32],
    pub iv: [u8; IV_LEN],
    pub u_publ: [u8; 32],
}

impl ErasureFooter {
    pub fn serialize(&self) -> [u8; FOOTER_LEN] {
        let mut buf = [0u8; FOOTER_LEN];
        buf[0..8].copy_from_slice(FOOTER_MAGIC);
        buf[8..10].copy_from_slice(&self.version.to_le_bytes());
        buf[10..12].copy_from_slice(&self.flags.to_le_bytes());
        buf[12..20].copy_from_slice(&self.original_length.to_le_bytes());
        buf[20..52].copy_from_slice(&self.salt);
        buf[52..68].copy_from_slice(&self.iv);
        buf[68..100].copy_from_slice(&self.u_publ);
        let crc = crc32(&buf[..100]);
        buf[100..104].copy_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn parse(buf: &[u8]) -> Result<Self> {
        if buf.len() != FOOTER_LEN {
            return Err(Error::NotASeerFile("footer-sized trailer missing"));
        }
        if &buf[0..8] != FOOTER_MAGIC {
            return Err(Error::NotASeerFile("bad magic"));
        }
        let stored_crc = u32::from_le_bytes(buf[100..104].try_into().unwrap());
        if crc32(&buf[..100]) != stored_crc {
            return Err(Error::CorruptFooter("crc mismatch"));
        }
        let version = u16::from_le_bytes(buf[8..10].try_into().unwrap());
        if version != FOOTER_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let flags = u16::from_le_bytes(buf[10..12].try_into().unwrap());
        if flags & !FLAG_FULL_FILE != 0 {
            return Err(Error::CorruptFooter("reserved flag bits set"));
        }
        Ok(ErasureFooter {
            version,
            flags,
            original_length: u64::from_le_bytes(buf[12..20].try_into().unwrap()),
            salt: buf[20..52].try_into().unwrap(),
            iv: buf[52..68].try_into().unwrap(),
            u_publ: buf[68..100].try_into().unwrap(),
        })
    }
}

/// Parse and CRC-validate the trailing footer of a destroyed file.
pub fn read_footer(path: &Path) -> Result<ErasureFooter> {
    let mut file = File::open(path)?;
    let len = file.metadata()?.len();
    if len < FOOTER_LEN as u64 {
        return Err(Error::NotASeerFile("file shorter than a footer"));
    }
    file.seek(SeekFrom::End(-(FOOTER_LEN as i64)))?;
    let mut buf = [0u8; FOOTER_LEN];
    file.read_exact(&mut buf)?;
    ErasureFooter::parse(&buf)
}

// ---------------------------------------------------------------------------
// Config and reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ErasureConfig {
    /// Read-encrypt-write chunk size; at least 4096 and a multiple of 16.
    pub chunk_size: usize,
    pub recursive: bool,
    pub follow_symlinks: bool,
    pub threads: usize,
    pub fsync: bool,
    pub dry_run: bool,
}

impl Default for ErasureConfig {
    fn default() -> Self {
        ErasureConfig {
            chunk_size: 65_536,
            recursive: false,
            follow_symlinks: false,
            threads: 1,
            fsync: true,
            dry_run: false,
        }
    }
}

impl ErasureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chunk_size < 4096 || !self.chunk_size.is_multiple_of(16) {
            return Err(Error::InvalidConfig(format!(
                "chunk_size {} must be >= 4096 and a multiple of 16",
                self.chunk_size
            )));
        }
        if self.threads < 1 {
            return Err(Error::InvalidConfig("threads must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ErasureStatus {
    Destroyed,
    Skipped,
    Failed,
}

/// Per-file outcome record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErasureReport {
    pub path: PathBuf,
    pub status: ErasureStatus,
    pub bytes_processed: u64,
    pub wall_time_ms: f64,
    pub session_destroyed: bool,
    pub error: Option<String>,
}

// ---------------------------------------------------------------------------
// Destruction
// ---------------------------------------------------------------------------

/// Test-instrumentation slot filled by [`crate::testmode`]: the cipher
/// parameters before destruction and the wiped buffers after.
pub(crate) struct CapturedSession {
    pub cipher_key: [u8; 32],
    pub iv: [u8; IV_LEN],
    pub salt: [u8; 32],
    pub u_publ: [u8; 32],
    pub post_destroy: Vec<(&'static str, Vec<u8>)>,
    pub fields_cleared: Vec<&'static str>,
    pub proof_verified: bool,
}

/// Destroy a single file in place. Failures are reported, never panicked;
/// a Failed report before the first chunk write means the file bytes are
/// untouched.
pub fn destroy_file(path: &Path, config: &ErasureConfig, entropy: &EntropySource) -> ErasureReport {
    destroy_file_impl(path, config, entropy, None)
}

pub(crate) fn destroy_file_impl(
    path: &Path,
    config: &ErasureConfig,
    entropy: &EntropySource,
    mut capture: Option<&mut Option<CapturedSession>>,
) -> ErasureReport {
    let start = Instant::now();
    let mut report = ErasureReport {
        path: path.to_path_buf(),
        status: ErasureStatus::Failed,
        bytes_processed: 0,
        wall_time_ms: 0.0,
        session_destroyed: false,
        error: None,
    };

    let fail = |mut report: ErasureReport, start: Instant, msg: String| {
        report.status = ErasureStatus::Failed;
        report.error = Some(msg);
        report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        report
    };

    if let Err(e) = config.validate() {
        return fail(report, start, e.to_string());
    }

    let meta = match fs::symlink_metadata(path) {
        Ok(m) => m,
        Err(e) => return fail(report, start, format!("stat failed: {e}")),
    };
    if meta.file_type().is_symlink() {
        if !config.follow_symlinks {
            report.status = ErasureStatus::Skipped;
            report.error = Some("symlink (follow_symlinks disabled)".into());
            report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            return report;
        }
        match fs::metadata(path) {
            Ok(m) if m.is_file() => {}
            Ok(_) => return fail(report, start, "symlink target is not a regular file".into()),
            Err(e) => return fail(report, start, format!("broken symlink: {e}")),
        }
    } else if !meta.is_file() {
        return fail(report, start, "not a regular file".into());
    }

    let original_length = match fs::metadata(path) {
        Ok(m) => m.len(),
        Err(e) => return fail(report, start, format!("stat failed: {e}")),
    };

    if config.dry_run {
        report.status = ErasureStatus::Skipped;
        report.bytes_processed = original_length;
        report.error = Some("dry run".into());
        report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        return report;
    }

    // Key material first: an entropy failure must leave the file untouched.
    let mut session = match SessionKeys::generate(entropy) {
        Ok(s) => s,
        Err(e) => return fail(report, start, format!("session generation: {e}")),
    };
    let salt = match Salt::generate(entropy) {
        Ok(s) => s,
        Err(e) => return fail(report, start, format!("salt generation: {e}")),
    };
    let mut iv_bytes = [0u8; IV_LEN];
    if let Err(e) = entropy.fill(&mut iv_bytes) {
        return fail(report, start, format!("iv generation: {e}"));
    }
    let iv = CipherIV(iv_bytes);
    if let Err(e) = session.derive(&salt) {
        return fail(report, start, e.to_string());
    }

    if let Some(slot) = capture.as_mut() {
        let key = session.cipher_key().expect("derived session has a cipher key");
        **slot = Some(CapturedSession {
            cipher_key: key.as_bytes().try_into().expect("cipher key is 32 octets"),
            iv: iv_bytes,
            salt: *salt.as_bytes(),
            u_publ: *session.public_key().as_bytes(),
            post_destroy: Vec::new(),
            fields_cleared: Vec::new(),
            proof_verified: false,
        });
    }

    let footer = ErasureFooter {
        version: FOOTER_VERSION,
        flags: FLAG_FULL_FILE,
        original_length,
        salt: *salt.as_bytes(),
        iv: iv_bytes,
        u_publ: *session.public_key().as_bytes(),
    };

    let outcome = encrypt_in_place(path, config, &session, &iv, original_length, &footer);

    // The session is destroyed on every path, success or not.
    let proof = session.destroy();
    if let Some(slot) = capture.as_mut() {
        if let Some(c) = slot.as_mut() {
            c.post_destroy = session
                .destruction_residue()
                .expect("session just destroyed")
                .into_iter()
                .map(|(name, buf)| (name, buf.to_vec()))
                .collect();
            c.fields_cleared = proof.fields_cleared.clone();
            c.proof_verified = proof.verified;
        }
    }

    report.session_destroyed = proof.verified;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        // a Destroyed status asserts the keys are verifiably gone
        Ok(()) if proof.verified => {
            report.status = ErasureStatus::Destroyed;
            report.bytes_processed = original_length;
        }
        Ok(()) => {
            report.status = ErasureStatus::Failed;
            report.error = Some("zeroization verification failed".into());
        }
        Err(e) => {
            report.status = ErasureStatus::Failed;
            report.error = Some(e.to_string());
        }
    }
    report
}

/// Chunked read-encrypt-seek-back-write through one handle, then the
/// footer, then flush and (optionally) fsync.
fn encrypt_in_place(
    path: &Path,
    config: &ErasureConfig,
    session: &SessionKeys,
    iv: &CipherIV,
    original_length: u64,
    footer: &ErasureFooter,
) -> Result<()> {
    let mut file = OpenOptions::new().read(true).write(true).open(path)?;
    let mut cipher = CipherState::init(session.cipher_key()?, iv);

    let mut buf = vec![0u8; config.chunk_size];
    let mut pos = 0u64;
    while pos < original_length {
        let n = ((original_length - pos) as usize).min(config.chunk_size);
        file.seek(SeekFrom::Start(pos))?;
        file.read_exact(&mut buf[..n])?;
        cipher.xor_in_place(&mut buf[..n]);
        file.seek(SeekFrom::Start(pos))?;
        file.write_all(&buf[..n])?;
        pos += n as u64;
    }

    file.seek(SeekFrom::Start(original_length))?;
    file.write_all(&footer.serialize())?;
    file.flush()?;
    if config.fsync {
        file.sync_all()?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Batch destruction
// ---------------------------------------------------------------------------

/// Destroy every regular file under `root` (respecting recursion and
/// symlink policy), one independent session per file. Per-file failures
/// never abort the batch; reports come back in path order.
pub fn destroy_tree(
    root: &Path,
    config: &ErasureConfig,
    entropy: &EntropySource,
) -> Result<Vec<ErasureReport>> {
    config.validate()?;
    let files = collect_files(root, config)?;
    let reports = Mutex::new(Vec::with_capacity(files.len()));
    let next = AtomicUsize::new(0);
    let workers = config.threads.clamp(1, files.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= files.len() {
                    break;
                }
                let report = destroy_file(&files[i], config, entropy);
                reports.lock().expect("report sink poisoned").push(report);
            });
        }
    });

    let mut reports = reports.into_inner().expect("report sink poisoned");
    reports.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(reports)
}

/// Regular files under `root` in sorted order. A bare file root is
/// returned as-is; directories are listed (recursively when configured).
pub(crate) fn collect_files(root: &Path, config: &ErasureConfig) -> Result<Vec<PathBuf>> {
    let meta = fs::symlink_metadata(root)?;
    if !meta.is_dir() {
        return Ok(vec![root.to_path_buf()]);
    }

    let mut files = Vec::new();
    let mut dirs = vec![root.to_path_buf()];
    while let Some(dir) = dirs.pop() {
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            let path = entry.path();
            let meta = fs::symlink_metadata(&path)?;
            if meta.file_type().is_symlink() {
                if config.follow_symlinks {
                    match fs::metadata(&path) {
                        Ok(m) if m.is_file() => files.push(path),
                        Ok(_) => {} // symlink to a non-file
                        // broken symlink: keep it so the failure is
                        // reported per file instead of vanishing
                        Err(_) => files.push(path),
                    }
                }
            } else if meta.is_file() {
                files.push(path);
            } else if meta.is_dir() && config.recursive {
                dirs.push(path);
            }
        }
    }
    files.sort();
    Ok(files)
}
