//! Test instrumentation. Everything here defeats the destruction
//! guarantee on purpose — deterministic entropy and capture of cipher
//! parameters before the keys are wiped — and exists solely so the test
//! harness can verify roundtrips and zeroization. None of it is reachable
//! from the production CLI surface.

use std::fs;
use std::path::Path;

use crate::engine::{
    destroy_file_impl, read_footer, CapturedSession, ErasureConfig, ErasureReport,
};
use crate::error::Result;
use crate::keymgr::EntropySource;
use crate::sosemanuk::{CipherIV, CipherKey, CipherState};

/// Entropy source where both cascade streams derive from a fixed seed.
/// Reproducible and therefore unsafe for production use.
pub fn deterministic_entropy(seed: [u8; 32]) -> EntropySource {
    EntropySource::deterministic(seed)
}

/// Cipher parameters captured before destruction plus the observed state
/// of the secret buffers after it.
pub struct SessionCapture {
    pub cipher_key: [u8; 32],
    pub iv: [u8; 16],
    pub salt: [u8; 32],
    pub u_publ: [u8; 32],
    /// Raw re-reads of (u_priv, m_priv, sm_key, cipher_key) taken after
    /// the session was destroyed.
    pub post_destroy_secrets: Vec<(&'static str, Vec<u8>)>,
    pub fields_cleared: Vec<&'static str>,
    pub proof_verified: bool,
}

impl From<CapturedSession> for SessionCapture {
    fn from(c: CapturedSession) -> Self {
        SessionCapture {
            cipher_key: c.cipher_key,
            iv: c.iv,
            salt: c.salt,
            u_publ: c.u_publ,
            post_destroy_secrets: c.post_destroy,
            fields_cleared: c.fields_cleared,
            proof_verified: c.proof_verified,
        }
    }
}

/// [`crate::engine::destroy_file`] that additionally hands back the
/// session's cipher key and IV (captured while live) and the post-destroy
/// buffer contents. The capture is `None` when destruction failed before
/// a session was derived.
pub fn destroy_file_capturing(
    path: &Path,
    config: &ErasureConfig,
    entropy: &EntropySource,
) -> (ErasureReport, Option<SessionCapture>) {
    let mut slot: Option<CapturedSession> = None;
    let report = destroy_file_impl(path, config, entropy, Some(&mut slot));
    (report, slot.map(SessionCapture::from))
}

/// Decrypt the content region of a destroyed file with retained cipher
/// parameters. Returns exactly `original_length` plaintext octets.
pub fn decrypt_destroyed(path: &Path, cipher_key: &[u8; 32], iv: &[u8; 16]) -> Result<Vec<u8>> {
    let footer = read_footer(path)?;
    let bytes = fs::read(path)?;
    let mut content = bytes[..footer.original_length as usize].to_vec();
    let key = CipherKey::new(cipher_key)?;
    let mut cipher = CipherState::init(&key, &CipherIV(*iv));
    cipher.xor_in_place(&mut content);
    Ok(content)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ErasureStatus;

    #[test]
    fn capture_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc");
        let original: Vec<u8> = (0..10_000u32).map(|i| (i % 256) as u8).collect();
        fs::write(&path, &original).unwrap();

        let entropy = EntropySource::system().unwrap();
        let (report, capture) =
            destroy_file_capturing(&path, &ErasureConfig::default(), &entropy);
        assert_eq!(report.status, ErasureStatus::Destroyed);
        let capture = capture.unwrap();

        let plain = decrypt_destroyed(&path, &capture.cipher_key, &capture.iv).unwrap();
        assert_eq!(plain, original);

        let footer = read_footer(&path).unwrap();
        assert_eq!(footer.u_publ, capture.u_publ);
        assert_eq!(footer.salt, capture.salt);
        assert_eq!(footer.iv, capture.iv);

        assert!(capture.proof_verified);
        for (name, buf) in &capture.post_destroy_secrets {
            assert!(buf.iter().all(|&b| b == 0), "{name} not wiped");
        }
    }

    #[test]
    fn deterministic_entropy_gives_reproducible_sessions() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        fs::write(&a, b"same bytes").unwrap();
        fs::write(&b, b"same bytes").unwrap();

        let ra = destroy_file_capturing(&a, &ErasureConfig::default(), &deterministic_entropy([1; 32]));
        let rb = destroy_file_capturing(&b, &ErasureConfig::default(), &deterministic_entropy([1; 32]));
        assert_eq!(ra.1.unwrap().u_publ, rb.1.unwrap().u_publ);
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}
