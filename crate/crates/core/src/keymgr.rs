//! Entropy sourcing and the ephemeral session-key lifecycle.
//!
//! Each destroyed file gets its own [`SessionKeys`]: two X25519 key pairs
//! (`u`, `m`), their shared secret, and the derived cipher key. The state
//! machine only moves forward — Generated, Derived, Destroyed — and
//! destruction overwrites every secret buffer with writes the optimizer
//! must not elide, then verifies the wipe by re-reading. The `m` pair is
//! generated and destroyed locally: there is no second party and no
//! escrow, so destruction is unconditionally irreversible.
//!
//! Entropy is a cascade: every 32-octet block is `sha256(primary ||
//! secondary)` where primary comes from the OS CSPRNG and secondary from
//! an independently seeded software PRNG. A primary failure is a hard
//! error, never a silent downgrade.

use std::sync::atomic::{compiler_fence, AtomicUsize, Ordering};
use std::sync::Mutex;

use rand_chacha::ChaCha20Rng;
use rand_chacha::rand_core::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::kdf::{derive_cipher_key, Salt};
use crate::sha256::Sha256;
use crate::sosemanuk::CipherKey;
use crate::x25519::{base_point_mult, scalar_mult, PrivateScalar, PublicPoint, SharedSecret};

/// Overwrite a buffer with zeros through volatile writes and a compiler
/// fence, so the stores survive optimization even when the buffer is dead.
pub(crate) fn wipe_bytes(buf: &mut [u8]) {
    for b in buf.iter_mut() {
        // SAFETY: `b` is a valid, exclusively borrowed byte.
        unsafe { std::ptr::write_volatile(b, 0) };
    }
    compiler_fence(Ordering::SeqCst);
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

#[allow(clippy::large_enum_variant)] // deterministic variant exists only in tests
enum EntropyInner {
    /// OS CSPRNG mixed with a software PRNG seeded separately at startup.
    System { secondary: ChaCha20Rng },
    /// Both streams derived from a fixed seed. Unsafe for production;
    /// constructed only through [`crate::testmode`].
    Deterministic { primary: ChaCha20Rng, secondary: ChaCha20Rng },
}

/// Dual-source entropy with hash mixing. Shareable across threads; fills
/// are serialized internally.
pub struct EntropySource {
    inner: Mutex<EntropyInner>,
}

impl EntropySource {
    /// OS-backed source. Probes the OS CSPRNG once so a broken system
    /// fails here rather than mid-run.
    pub fn system() -> Result<Self> {
        let mut seed = [0u8; 32];
        getrandom::fill(&mut seed)
            .map_err(|e| Error::EntropyFailure(format!("OS CSPRNG unavailable: {e}")))?;
        let secondary = ChaCha20Rng::from_seed(seed);
        wipe_bytes(&mut seed);
        Ok(EntropySource { inner: Mutex::new(EntropyInner::System { secondary }) })
    }

    pub(crate) fn deterministic(seed: [u8; 32]) -> Self {
        let stream = |label: &[u8]| {
            let mut h = Sha256::new();
            h.update(&seed);
            h.update(label);
            ChaCha20Rng::from_seed(h.finalize().0)
        };
        EntropySource {
            inner: Mutex::new(EntropyInner::Deterministic {
                primary: stream(b"primary"),
                secondary: stream(b"secondary"),
            }),
        }
    }

    /// Fill `out` with mixed output. Any primary-source failure is a hard
    /// error and nothing of the failed fill is exposed.
    pub fn fill(&self, out: &mut [u8]) -> Result<()> {
        let mut inner = self.inner.lock().expect("entropy mutex poisoned");
        let mut primary = [0u8; 32];
        let mut secondary = [0u8; 32];
        for chunk in out.chunks_mut(32) {
            match &mut *inner {
                EntropyInner::System { secondary: sw } => {
                    getrandom::fill(&mut primary)
                        .map_err(|e| Error::EntropyFailure(format!("OS CSPRNG: {e}")))?;
                    sw.fill_bytes(&mut secondary);
                }
                EntropyInner::Deterministic { primary: a, secondary: b } => {
                    a.fill_bytes(&mut primary);
                    b.fill_bytes(&mut secondary);
                }
            }
            let mut h = Sha256::new();
            h.update(&primary);
            h.update(&secondary);
            let block = h.finalize();
            chunk.copy_from_slice(&block.0[..chunk.len()]);
        }
        wipe_bytes(&mut primary);
        wipe_bytes(&mut secondary);
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Session lifecycle
// ---------------------------------------------------------------------------

static LIVE_SESSIONS: AtomicUsize = AtomicUsize::new(0);

/// Number of sessions created but not yet destroyed, process-wide.
pub fn live_session_count() -> usize {
    LIVE_SESSIONS.load(Ordering::SeqCst)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LifecycleState {
    Generated,
    Derived,
    Destroyed,
}

/// Record of a completed destruction, produced by re-reading the wiped
/// buffers.
#[derive(Debug)]
pub struct DestructionProof {
    pub fields_cleared: Vec<&'static str>,
    pub verified: bool,
}

/// The ephemeral key hierarchy for one file.
pub struct SessionKeys {
    u_priv: PrivateScalar,
    u_publ: PublicPoint,
    m_priv: PrivateScalar,
    #[allow(dead_code)] // part of the hierarchy; consumed at generation time
    m_publ: PublicPoint,
    sm_key: SharedSecret,
    cipher_key: Option<CipherKey>,
    state: LifecycleState,
}

/// Generate a fresh session: two clamped key pairs and the shared secret
/// `scalar_mult(u_priv, m_publ)`.
pub fn generate_session(entropy: &EntropySource) -> Result<SessionKeys> {
    SessionKeys::generate(entropy)
}

impl SessionKeys {
    pub fn generate(entropy: &EntropySource) -> Result<Self> {
        let mut raw = [0u8; 32];

        entropy.fill(&mut raw)?;
        let u_priv = PrivateScalar::clamp(&raw)?;
        entropy.fill(&mut raw)?;
        let m_priv = PrivateScalar::clamp(&raw)?;
        wipe_bytes(&mut raw);

        let u_publ = base_point_mult(&u_priv)?;
        let m_publ = base_point_mult(&m_priv)?;
        let sm_key = SharedSecret::from_point(scalar_mult(&u_priv, &m_publ)?);

        LIVE_SESSIONS.fetch_add(1, Ordering::SeqCst);
        Ok(SessionKeys {
            u_priv,
            u_publ,
            m_priv,
            m_publ,
            sm_key,
            cipher_key: None,
            state: LifecycleState::Generated,
        })
    }

    pub fn state(&self) -> LifecycleState {
        self.state
    }

    /// The session public key attached to destroyed files. The only field
    /// that remains exportable after destruction.
    pub fn public_key(&self) -> &PublicPoint {
        &self.u_publ
    }

    /// Populate the cipher key from the shared secret and `salt`.
    pub fn derive(&mut self, salt: &Salt) -> Result<()> {
        if self.state != LifecycleState::Generated {
            return Err(Error::Lifecycle("derive requires a freshly generated session"));
        }
        self.cipher_key = Some(derive_cipher_key(&self.sm_key, salt)?);
        self.state = LifecycleState::Derived;
        Ok(())
    }

    /// The derived cipher key. Never serialized; crate-internal.
    pub(crate) fn cipher_key(&self) -> Result<&CipherKey> {
        if self.state != LifecycleState::Derived {
            return Err(Error::Lifecycle("cipher key is only available in the Derived state"));
        }
        self.cipher_key
            .as_ref()
            .ok_or(Error::Lifecycle("cipher key missing"))
    }

    /// Overwrite every secret buffer with zeros and verify by re-reading.
    /// Infallible and idempotent; repeated calls re-verify and return the
    /// same proof shape.
    pub fn destroy(&mut self) -> DestructionProof {
        let first = self.state != LifecycleState::Destroyed;

        self.u_priv.destroy();
        self.m_priv.destroy();
        self.sm_key.destroy();
        if let Some(key) = self.cipher_key.as_mut() {
            key.destroy();
        }

        let mut fields_cleared = vec!["u_priv", "m_priv", "sm_key"];
        if self.cipher_key.is_some() {
            fields_cleared.push("cipher_key");
        }

        let verified = self.secret_buffers().iter().all(|(_, buf)| buf.iter().all(|&b| b == 0));

        self.state = LifecycleState::Destroyed;
        if first {
            LIVE_SESSIONS.fetch_sub(1, Ordering::SeqCst);
        }
        DestructionProof { fields_cleared, verified }
    }

    /// Raw views of the wiped buffers, available only once destroyed.
    /// Live secrets are never exposed through this.
    pub fn destruction_residue(&self) -> Option<Vec<(&'static str, &[u8])>> {
        if self.state != LifecycleState::Destroyed {
            return None;
        }
        Some(self.secret_buffers())
    }

    fn secret_buffers(&self) -> Vec<(&'static str, &[u8])> {
        let mut v: Vec<(&'static str, &[u8])> = vec![
            ("u_priv", &self.u_priv.as_bytes()[..]),
            ("m_priv", &self.m_priv.as_bytes()[..]),
            ("sm_key", &self.sm_key.raw()[..]),
        ];
        if let Some(key) = self.cipher_key.as_ref() {
            v.push(("cipher_key", key.as_bytes()));
        }
        v
    }
}

impl Drop for SessionKeys {
    fn drop(&mut self) {
        if self.state != LifecycleState::Destroyed {
            self.destroy();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entropy() -> EntropySource {
        EntropySource::system().unwrap()
    }

    #[test]
    fn entropy_blocks_differ() {
        let e = entropy();
        let mut a = [0u8; 64];
        let mut b = [0u8; 64];
        e.fill(&mut a).unwrap();
        e.fill(&mut b).unwrap();
        assert_ne!(a, b);
        assert_ne!(a[..32], a[32..]);
    }

    #[test]
    fn deterministic_entropy_reproduces() {
        let mut a = [0u8; 96];
        let mut b = [0u8; 96];
        EntropySource::deterministic([7u8; 32]).fill(&mut a).unwrap();
        EntropySource::deterministic([7u8; 32]).fill(&mut b).unwrap();
        assert_eq!(a, b);
        let mut c = [0u8; 96];
        EntropySource::deterministic([8u8; 32]).fill(&mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sessions_are_distinct() {
        let e = entropy();
        let s1 = SessionKeys::generate(&e).unwrap();
        let s2 = SessionKeys::generate(&e).unwrap();
        assert_ne!(s1.public_key(), s2.public_key());
    }

    #[test]
    fn dh_symmetry_inside_session() {
        let e = entropy();
        let s = SessionKeys::generate(&e).unwrap();
        let other_way = scalar_mult(&s.m_priv, &s.u_publ).unwrap();
        assert_eq!(s.sm_key.raw(), other_way.as_bytes());
    }

    #[test]
    fn lifecycle_only_advances() {
        let e = entropy();
        let mut s = SessionKeys::generate(&e).unwrap();
        assert_eq!(s.state(), LifecycleState::Generated);
        assert!(s.cipher_key().is_err());
        assert!(s.destruction_residue().is_none());

        s.derive(&Salt([5u8; 32])).unwrap();
        assert_eq!(s.state(), LifecycleState::Derived);
        assert_eq!(s.cipher_key().unwrap().len(), 32);
        assert!(matches!(s.derive(&Salt([5u8; 32])), Err(Error::Lifecycle(_))));

        let proof = s.destroy();
        assert!(proof.verified);
        assert_eq!(proof.fields_cleared, vec!["u_priv", "m_priv", "sm_key", "cipher_key"]);
        assert!(matches!(s.derive(&Salt([5u8; 32])), Err(Error::Lifecycle(_))));
        assert!(s.cipher_key().is_err());
    }

    #[test]
    fn derived_key_matches_kdf() {
        let e = entropy();
        let mut s = SessionKeys::generate(&e).unwrap();
        let salt = Salt([0xCDu8; 32]);
        let expect = derive_cipher_key(&s.sm_key, &salt).unwrap();
        s.derive(&salt).unwrap();
        assert_eq!(s.cipher_key().unwrap().as_bytes(), expect.as_bytes());
    }

    // This is the zeroization contract: run under the optimized profile,
    // the buffers must read back all-zero after destroy.
    #[test]
    fn destroy_wipes_and_is_idempotent() {
        let e = entropy();
        let mut s = SessionKeys::generate(&e).unwrap();
        s.derive(&Salt([9u8; 32])).unwrap();

        let proof = s.destroy();
        assert!(proof.verified);
        for (name, buf) in s.destruction_residue().unwrap() {
            assert!(buf.iter().all(|&b| b == 0), "{name} not wiped");
        }

        let proof2 = s.destroy();
        assert!(proof2.verified);
        assert_eq!(proof2.fields_cleared.len(), 4);
    }

    #[test]
    fn live_count_returns_to_baseline() {
        // Other tests may hold sessions transiently; poll for quiescence
        // rather than asserting an absolute instant.
        let settle = |target: usize| {
            for _ in 0..100 {
                if live_session_count() <= target {
                    return true;
                }
                std::thread::sleep(std::time::Duration::from_millis(20));
            }
            false
        };
        let e = entropy();
        let before = live_session_count();
        let s = SessionKeys::generate(&e).unwrap();
        assert!(live_session_count() > before);
        drop(s); // drop without explicit destroy still retires the session
        assert!(settle(before), "session leaked");
    }
}
