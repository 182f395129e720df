//! Cryptographic file erasure.
//!
//! Files are destroyed by encrypting them in place under an ephemeral,
//! per-file key hierarchy and then wiping every piece of key material from
//! memory. Nothing recoverable remains: the only copy of the cipher key is
//! derived from an X25519 exchange between two key pairs that are both
//! generated, used and zeroized inside a single [`engine::destroy_file`]
//! call.
//!
//! The pipeline per file:
//!
//! 1. [`keymgr`] draws entropy from a mixed OS/PRNG cascade and generates
//!    two ephemeral X25519 key pairs; the shared secret is computed from
//!    one private key and the other public key.
//! 2. [`kdf`] hashes the shared secret with a per-file random salt
//!    (SHA-256) into the stream-cipher key.
//! 3. [`sosemanuk`] encrypts the file content in place through the
//!    original file handle.
//! 4. [`engine`] appends a fixed-size footer (session public key, salt,
//!    IV, original length, CRC) and flushes to stable storage.
//! 5. [`keymgr`] overwrites every secret buffer with zeros using writes
//!    the optimizer cannot elide, and verifies the wipe by re-reading.
//!
//! [`audit`] checks destroyed files (footer, header signatures, entropy,
//! chi-square uniformity, plaintext residue scan) and [`bench`] compares
//! the erasure against classic multi-pass overwrite methods.

pub mod audit;
pub mod bench;
pub mod engine;
pub mod error;
pub mod kdf;
pub mod keymgr;
pub mod sha256;
pub mod sosemanuk;
pub mod testmode;
pub mod x25519;

pub use error::{Error, Result};
