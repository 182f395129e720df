//! Salted derivation of the cipher key from the X25519 shared secret.
//!
//! The construction is a single salted hash, secret first:
//! `cipher_key = sha256(shared_secret || salt)`. The salt is 32 random
//! octets generated per file and stored publicly in the footer; the
//! concatenation order is fixed and versioned through the footer format.

use crate::error::{Error, Result};
use crate::keymgr::EntropySource;
use crate::sha256::Sha256;
use crate::sosemanuk::CipherKey;
use crate::x25519::SharedSecret;

pub const SALT_LEN: usize = 32;

/// Per-file random salt. Public data, never reused across files within a
/// run (uniqueness comes from the entropy contract).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Salt(pub [u8; SALT_LEN]);

impl Salt {
    pub fn generate(entropy: &EntropySource) -> Result<Self> {
        let mut bytes = [0u8; SALT_LEN];
        entropy.fill(&mut bytes)?;
        Ok(Salt(bytes))
    }

    pub fn new(bytes: &[u8]) -> Result<Self> {
        let b: [u8; SALT_LEN] = bytes
            .try_into()
            .map_err(|_| Error::InvalidSaltLength(bytes.len()))?;
        Ok(Salt(b))
    }

    pub fn as_bytes(&self) -> &[u8; SALT_LEN] {
        &self.0
    }
}

/// Derive the 32-octet cipher key from a live shared secret and a salt.
/// Inputs are not consumed; the caller owns destruction ordering.
pub fn derive_cipher_key(shared: &SharedSecret, salt: &Salt) -> Result<CipherKey> {
    let secret = shared.bytes()?;
    let mut h = Sha256::new();
    h.update(secret);
    h.update(&salt.0);
    let digest = h.finalize();
    CipherKey::new(digest.as_bytes())
}

pub use crate::sha256::sha256;
