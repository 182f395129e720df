//! Sosemanuk stream cipher (eSTREAM portfolio, software profile).
//!
//! A SNOW 2.0-style LFSR over GF(2^32) driven together with a two-register
//! FSM; initialization runs the 128-bit IV through Serpent reduced to 24
//! rounds under a Serpent key schedule. Keys are 16..=32 octets, the IV is
//! exactly 16 octets. Keystream is produced in 80-octet internal bursts but
//! exposed as an arbitrary-length octet stream.
//!
//! Word packing is little-endian throughout, matching the reference
//! definition; conformance is pinned by the bundled eSTREAM-derived vector
//! corpus in `tests/data/sosemanuk_vectors.txt`.

use crate::error::{Error, Result};
use crate::keymgr::wipe_bytes;

pub const MIN_KEY_LEN: usize = 16;
pub const MAX_KEY_LEN: usize = 32;
pub const IV_LEN: usize = 16;

/// The cipher's natural output granularity: 20 LFSR steps per burst.
const BURST_LEN: usize = 80;

// ---------------------------------------------------------------------------
// GF(2^32) alpha tables
// ---------------------------------------------------------------------------
//
// GF(2^8) is F_2[beta] with beta^8 = beta^7 + beta^5 + beta^3 + 1, and
// GF(2^32) is GF(2^8)[alpha] with
//   alpha^4 = beta^23 alpha^3 + beta^245 alpha^2 + beta^48 alpha + beta^239.
// Multiplying a word by alpha is then (w << 8) ^ MUL_A[w >> 24]; dividing is
// (w >> 8) ^ DIV_A[w & 0xff] with alpha^-1 expanded via beta^-239 = beta^16.

const fn gf256_double(v: u8) -> u8 {
    if v & 0x80 != 0 {
        (v << 1) ^ 0xA9
    } else {
        v << 1
    }
}

const fn gf256_beta_pow(x: u8, n: u32) -> u8 {
    let mut v = x;
    let mut i = 0;
    while i < n {
        v = gf256_double(v);
        i += 1;
    }
    v
}

const fn alpha_entry(x: u8, p3: u32, p2: u32, p1: u32, p0: u32) -> u32 {
    ((gf256_beta_pow(x, p3) as u32) << 24)
        | ((gf256_beta_pow(x, p2) as u32) << 16)
        | ((gf256_beta_pow(x, p1) as u32) << 8)
        | (gf256_beta_pow(x, p0) as u32)
}

const fn build_alpha_table(p3: u32, p2: u32, p1: u32, p0: u32) -> [u32; 256] {
    let mut t = [0u32; 256];
    let mut x = 0usize;
    while x < 256 {
        t[x] = alpha_entry(x as u8, p3, p2, p1, p0);
        x += 1;
    }
    t
}

static MUL_A: [u32; 256] = build_alpha_table(23, 245, 48, 239);
static DIV_A: [u32; 256] = build_alpha_table(16, 39, 6, 64);

// ---------------------------------------------------------------------------
// Serpent building blocks (bitsliced)
// ---------------------------------------------------------------------------
//
// Each S-box maps (x0, x1, x2, x3) to (y0, y1, y2, y3) in canonical order;
// the register shuffles of the usual unrolled implementations are folded
// into the return tuples.

type Quad = (u32, u32, u32, u32);

#[inline(always)]
fn sb0((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r3 ^= r0;
    r4 = r1;
    r1 &= r3;
    r4 ^= r2;
    r1 ^= r0;
    r0 |= r3;
    r0 ^= r4;
    r4 ^= r3;
    r3 ^= r2;
    r2 |= r1;
    r2 ^= r4;
    r4 = !r4;
    r4 |= r1;
    r1 ^= r3;
    r1 ^= r4;
    r3 |= r0;
    r1 ^= r3;
    r4 ^= r3;
    (r1, r4, r2, r0)
}

#[inline(always)]
fn sb1((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r0 = !r0;
    r2 = !r2;
    r4 = r0;
    r0 &= r1;
    r2 ^= r0;
    r0 |= r3;
    r3 ^= r2;
    r1 ^= r0;
    r0 ^= r4;
    r4 |= r1;
    r1 ^= r3;
    r2 |= r0;
    r2 &= r4;
    r0 ^= r1;
    r1 &= r2;
    r1 ^= r0;
    r0 &= r2;
    r0 ^= r4;
    (r2, r0, r3, r1)
}

#[inline(always)]
fn sb2((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r4 = r0;
    r0 &= r2;
    r0 ^= r3;
    r2 ^= r1;
    r2 ^= r0;
    r3 |= r4;
    r3 ^= r1;
    r4 ^= r2;
    r1 = r3;
    r3 |= r4;
    r3 ^= r0;
    r0 &= r1;
    r4 ^= r0;
    r1 ^= r3;
    r1 ^= r4;
    r4 = !r4;
    (r2, r3, r1, r4)
}

#[inline(always)]
fn sb3((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r4 = r0;
    r0 |= r3;
    r3 ^= r1;
    r1 &= r4;
    r4 ^= r2;
    r2 ^= r3;
    r3 &= r0;
    r4 |= r1;
    r3 ^= r4;
    r0 ^= r1;
    r4 &= r0;
    r1 ^= r3;
    r4 ^= r2;
    r1 |= r0;
    r1 ^= r2;
    r0 ^= r3;
    r2 = r1;
    r1 |= r3;
    r1 ^= r0;
    (r1, r2, r3, r4)
}

#[inline(always)]
fn sb4((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r1 ^= r3;
    r3 = !r3;
    r2 ^= r3;
    r3 ^= r0;
    r4 = r1;
    r1 &= r3;
    r1 ^= r2;
    r4 ^= r3;
    r0 ^= r4;
    r2 &= r4;
    r2 ^= r0;
    r0 &= r1;
    r3 ^= r0;
    r4 |= r1;
    r4 ^= r0;
    r0 |= r3;
    r0 ^= r2;
    r2 &= r3;
    r0 = !r0;
    r4 ^= r2;
    (r1, r4, r0, r3)
}

#[inline(always)]
fn sb5((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r0 ^= r1;
    r1 ^= r3;
    r3 = !r3;
    r4 = r1;
    r1 &= r0;
    r2 ^= r3;
    r1 ^= r2;
    r2 |= r4;
    r4 ^= r3;
    r3 &= r1;
    r3 ^= r0;
    r4 ^= r1;
    r4 ^= r2;
    r2 ^= r0;
    r0 &= r3;
    r2 = !r2;
    r0 ^= r4;
    r4 |= r3;
    r2 ^= r4;
    (r1, r3, r0, r2)
}

#[inline(always)]
fn sb6((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r2 = !r2;
    r4 = r3;
    r3 &= r0;
    r0 ^= r4;
    r3 ^= r2;
    r2 |= r4;
    r1 ^= r3;
    r2 ^= r0;
    r0 |= r1;
    r2 ^= r1;
    r4 ^= r0;
    r0 |= r3;
    r0 ^= r2;
    r4 ^= r3;
    r4 ^= r0;
    r3 = !r3;
    r2 &= r4;
    r2 ^= r3;
    (r0, r1, r4, r2)
}

#[inline(always)]
fn sb7((mut r0, mut r1, mut r2, mut r3): Quad) -> Quad {
    let mut r4;
    r4 = r1;
    r1 |= r2;
    r1 ^= r3;
    r4 ^= r2;
    r2 ^= r1;
    r3 |= r4;
    r3 &= r0;
    r4 ^= r2;
    r3 ^= r1;
    r1 |= r4;
    r1 ^= r0;
    r0 |= r4;
    r0 ^= r2;
    r1 ^= r4;
    r2 ^= r1;
    r1 &= r0;
    r1 ^= r4;
    r2 = !r2;
    r2 |= r0;
    r4 ^= r2;
    (r4, r3, r1, r0)
}

const SBOXES: [fn(Quad) -> Quad; 8] = [sb0, sb1, sb2, sb3, sb4, sb5, sb6, sb7];

/// Serpent linear transformation.
#[inline(always)]
fn linear_transform((mut x0, mut x1, mut x2, mut x3): Quad) -> Quad {
    x0 = x0.rotate_left(13);
    x2 = x2.rotate_left(3);
    x1 ^= x0 ^ x2;
    x3 ^= x2 ^ (x0 << 3);
    x1 = x1.rotate_left(1);
    x3 = x3.rotate_left(7);
    x0 ^= x1 ^ x3;
    x2 ^= x3 ^ (x1 << 7);
    x0 = x0.rotate_left(5);
    x2 = x2.rotate_left(22);
    (x0, x1, x2, x3)
}

const PHI: u32 = 0x9E3779B9;

/// Serpent key schedule truncated to the 100 round-key words (25 subkeys)
/// that Serpent24 consumes. Keys shorter than 32 octets are padded with a
/// single 0x01 octet followed by zeros, per the cipher definition.
fn serpent24_subkeys(key: &[u8]) -> [u32; 100] {
    debug_assert!((MIN_KEY_LEN..=MAX_KEY_LEN).contains(&key.len()));
    let mut padded = [0u8; 32];
    padded[..key.len()].copy_from_slice(key);
    if key.len() < 32 {
        padded[key.len()] = 0x01;
    }

    let mut w = [0u32; 8];
    for (i, chunk) in padded.chunks_exact(4).enumerate() {
        w[i] = u32::from_le_bytes(chunk.try_into().unwrap());
    }

    let mut sk = [0u32; 100];
    for g in 0..25 {
        for j in 0..4 {
            let i = (4 * g + j) as u32;
            let idx = (i as usize) % 8;
            w[idx] = (w[idx]
                ^ w[(idx + 3) % 8]
                ^ w[(idx + 5) % 8]
                ^ w[(idx + 7) % 8]
                ^ PHI
                ^ i)
                .rotate_left(11);
        }
        let base = (4 * g) % 8;
        let quad = (w[base], w[base + 1], w[base + 2], w[base + 3]);
        // subkey group g runs through S-box (3 - g) mod 8
        let (y0, y1, y2, y3) = SBOXES[(11 - (g % 8)) % 8](quad);
        sk[4 * g] = y0;
        sk[4 * g + 1] = y1;
        sk[4 * g + 2] = y2;
        sk[4 * g + 3] = y3;
    }
    wipe_bytes(&mut padded);
    sk
}

// ---------------------------------------------------------------------------
// Key / IV types
// ---------------------------------------------------------------------------

/// Cipher key, 16..=32 octets. The buffer is wiped on drop and can be wiped
/// explicitly; a destroyed key reads back as all zeros.
pub struct CipherKey {
    bytes: [u8; MAX_KEY_LEN],
    len: usize,
}

impl CipherKey {
    pub fn new(key: &[u8]) -> Result<Self> {
        if !(MIN_KEY_LEN..=MAX_KEY_LEN).contains(&key.len()) {
            return Err(Error::InvalidKeyLength(key.len()));
        }
        let mut bytes = [0u8; MAX_KEY_LEN];
        bytes[..key.len()].copy_from_slice(key);
        Ok(CipherKey { bytes, len: key.len() })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Overwrite the key with zeros. The length is retained so the buffer
    /// can still be inspected; all octets read back as 0x00 afterwards.
    pub fn destroy(&mut self) {
        wipe_bytes(&mut self.bytes);
    }
}

impl Drop for CipherKey {
    fn drop(&mut self) {
        self.destroy();
    }
}

/// Cipher IV, exactly 16 octets. Public data; stored in the footer.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CipherIV(pub [u8; IV_LEN]);

impl CipherIV {
    pub fn new(iv: &[u8]) -> Result<Self> {
        let bytes: [u8; IV_LEN] =
            iv.try_into().map_err(|_| Error::InvalidIvLength(iv.len()))?;
        Ok(CipherIV(bytes))
    }

    pub fn as_bytes(&self) -> &[u8; IV_LEN] {
        &self.0
    }
}

// ---------------------------------------------------------------------------
// Cipher state
// ---------------------------------------------------------------------------

/// Running cipher state: ten-word LFSR, two FSM registers, and the buffered
/// tail of the current 80-octet keystream burst.
pub struct CipherState {
    lfsr: [u32; 10],
    r1: u32,
    r2: u32,
    buf: [u8; BURST_LEN],
    consumed: usize,
}

/// Initialize a cipher state from key and IV; `CipherState::init` is the
/// free-function spelling used by the engine.
pub fn cipher_init(key: &CipherKey, iv: &CipherIV) -> CipherState {
    CipherState::init(key, iv)
}

impl CipherState {
    pub fn init(key: &CipherKey, iv: &CipherIV) -> CipherState {
        let mut sk = serpent24_subkeys(key.as_bytes());

        let mut x = (
            u32::from_le_bytes(iv.0[0..4].try_into().unwrap()),
            u32::from_le_bytes(iv.0[4..8].try_into().unwrap()),
            u32::from_le_bytes(iv.0[8..12].try_into().unwrap()),
            u32::from_le_bytes(iv.0[12..16].try_into().unwrap()),
        );

        let mut lfsr = [0u32; 10];
        let mut r1 = 0u32;
        let mut r2 = 0u32;

        // Serpent24 over the IV; the states after rounds 12, 18 and 24 seed
        // the LFSR and FSM.
        for round in 0..24 {
            x.0 ^= sk[4 * round];
            x.1 ^= sk[4 * round + 1];
            x.2 ^= sk[4 * round + 2];
            x.3 ^= sk[4 * round + 3];
            x = SBOXES[round % 8](x);
            x = linear_transform(x);
            if round == 11 {
                lfsr[9] = x.0;
                lfsr[8] = x.1;
                lfsr[7] = x.2;
                lfsr[6] = x.3;
            } else if round == 17 {
                r1 = x.0;
                lfsr[4] = x.1;
                r2 = x.2;
                lfsr[5] = x.3;
            }
        }
        x.0 ^= sk[96];
        x.1 ^= sk[97];
        x.2 ^= sk[98];
        x.3 ^= sk[99];
        lfsr[3] = x.0;
        lfsr[2] = x.1;
        lfsr[1] = x.2;
        lfsr[0] = x.3;

        wipe_words(&mut sk);

        CipherState { lfsr, r1, r2, buf: [0u8; BURST_LEN], consumed: BURST_LEN }
    }

    /// Produce one 80-octet burst: 20 LFSR/FSM steps, with the FSM outputs
    /// of each group of four steps mixed through one Serpent S-box layer.
    /// Unrolled with the LFSR cells in locals; after 20 steps the ring is
    /// back in phase, so no rotation bookkeeping survives the call.
    fn burst(&mut self) {
        let [mut s0, mut s1, mut s2, mut s3, mut s4, mut s5, mut s6, mut s7, mut s8, mut s9] =
            self.lfsr;
        let mut r1 = self.r1;
        let mut r2 = self.r2;

        // One step: v = s_t, feedback replaces s_t, f = s_{t+9} + R1 ^ R2.
        macro_rules! step {
            ($st:ident, $st1:ident, $st3:ident, $st8:ident, $st9:ident) => {{
                let old_r1 = r1;
                r1 = r2.wrapping_add($st1 ^ if old_r1 & 1 != 0 { $st8 } else { 0 });
                r2 = old_r1.wrapping_mul(0x54655307).rotate_left(7);
                let v = $st;
                // s_{t+10} = alpha*s_t ^ alpha^-1*s_{t+3} ^ s_{t+9}
                $st = (($st << 8) ^ MUL_A[($st >> 24) as usize])
                    ^ (($st3 >> 8) ^ DIV_A[($st3 & 0xFF) as usize])
                    ^ $st9;
                (v, $st9.wrapping_add(r1) ^ r2)
            }};
        }

        macro_rules! emit {
            ($group:expr, $q:expr) => {{
                let ((v0, f0), (v1, f1), (v2, f2), (v3, f3)) = $q;
                let (o0, o1, o2, o3) = sb2((f0, f1, f2, f3));
                let out = &mut self.buf[16 * $group..16 * $group + 16];
                out[0..4].copy_from_slice(&(o0 ^ v0).to_le_bytes());
                out[4..8].copy_from_slice(&(o1 ^ v1).to_le_bytes());
                out[8..12].copy_from_slice(&(o2 ^ v2).to_le_bytes());
                out[12..16].copy_from_slice(&(o3 ^ v3).to_le_bytes());
            }};
        }

        emit!(0, (
            step!(s0, s1, s3, s8, s9),
            step!(s1, s2, s4, s9, s0),
            step!(s2, s3, s5, s0, s1),
            step!(s3, s4, s6, s1, s2)
        ));
        emit!(1, (
            step!(s4, s5, s7, s2, s3),
            step!(s5, s6, s8, s3, s4),
            step!(s6, s7, s9, s4, s5),
            step!(s7, s8, s0, s5, s6)
        ));
        emit!(2, (
            step!(s8, s9, s1, s6, s7),
            step!(s9, s0, s2, s7, s8),
            step!(s0, s1, s3, s8, s9),
            step!(s1, s2, s4, s9, s0)
        ));
        emit!(3, (
            step!(s2, s3, s5, s0, s1),
            step!(s3, s4, s6, s1, s2),
            step!(s4, s5, s7, s2, s3),
            step!(s5, s6, s8, s3, s4)
        ));
        emit!(4, (
            step!(s6, s7, s9, s4, s5),
            step!(s7, s8, s0, s5, s6),
            step!(s8, s9, s1, s6, s7),
            step!(s9, s0, s2, s7, s8)
        ));

        self.lfsr = [s0, s1, s2, s3, s4, s5, s6, s7, s8, s9];
        self.r1 = r1;
        self.r2 = r2;
        self.consumed = 0;
    }

    /// Next `n` keystream octets.
    pub fn keystream(&mut self, n: usize) -> Vec<u8> {
        let mut out = vec![0u8; n];
        self.fill_keystream(&mut out);
        out
    }

    pub fn fill_keystream(&mut self, out: &mut [u8]) {
        let mut filled = 0;
        while filled < out.len() {
            if self.consumed == BURST_LEN {
                self.burst();
            }
            let take = (BURST_LEN - self.consumed).min(out.len() - filled);
            out[filled..filled + take]
                .copy_from_slice(&self.buf[self.consumed..self.consumed + take]);
            self.consumed += take;
            filled += take;
        }
    }

    /// XOR the next keystream octets into `data`.
    pub fn xor_in_place(&mut self, data: &mut [u8]) {
        let mut done = 0;
        while done < data.len() {
            if self.consumed == BURST_LEN {
                self.burst();
            }
            let take = (BURST_LEN - self.consumed).min(data.len() - done);
            for (d, k) in data[done..done + take]
                .iter_mut()
                .zip(&self.buf[self.consumed..self.consumed + take])
            {
                *d ^= k;
            }
            self.consumed += take;
            done += take;
        }
    }

    /// Stream-cipher transform: `out[i] = data[i] ^ keystream[i]`.
    pub fn xor_transform(&mut self, data: &[u8]) -> Vec<u8> {
        let mut out = data.to_vec();
        self.xor_in_place(&mut out);
        out
    }
}

impl Drop for CipherState {
    fn drop(&mut self) {
        wipe_words(&mut self.lfsr);
        // SAFETY: exclusively borrowed fields of self
        unsafe {
            std::ptr::write_volatile(&mut self.r1, 0);
            std::ptr::write_volatile(&mut self.r2, 0);
        }
        std::sync::atomic::compiler_fence(std::sync::atomic::Ordering::SeqCst);
        wipe_bytes(&mut self.buf);
    }
}

fn wipe_words(words: &mut [u32]) {
    for w in words.iter_mut() {
        // SAFETY: `w` is a valid, exclusively borrowed word.
        unsafe { std::ptr::write_volatile(w, 0) };
    }
    std::sync::atomic::compiler_fence(std::sync::atomic::Ordering::SeqCst);
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        // decrypt(encrypt(m)) == m under fresh states with the same key/IV
        #[test]
        fn involution(
            key in proptest::collection::vec(any::<u8>(), 16..=32),
            iv in proptest::collection::vec(any::<u8>(), 16..=16),
            msg in proptest::collection::vec(any::<u8>(), 0..4096),
        ) {
            let k = CipherKey::new(&key).unwrap();
            let v = CipherIV::new(&iv).unwrap();
            let ct = CipherState::init(&k, &v).xor_transform(&msg);
            let pt = CipherState::init(&k, &v).xor_transform(&ct);
            prop_assert_eq!(pt, msg);
        }

        // arbitrary chunk splits produce the one-shot ciphertext
        #[test]
        fn chunked_transform_matches_oneshot(
            msg in proptest::collection::vec(any::<u8>(), 1..2048),
            splits in proptest::collection::vec(1usize..200, 0..12),
        ) {
            let k = CipherKey::new(&[0x33; 16]).unwrap();
            let v = CipherIV::new(&[0xCC; 16]).unwrap();
            let oneshot = CipherState::init(&k, &v).xor_transform(&msg);

            let mut s = CipherState::init(&k, &v);
            let mut out = Vec::new();
            let mut rest = &msg[..];
            for sp in splits {
                if rest.is_empty() { break; }
                let take = sp.min(rest.len());
                out.extend(s.xor_transform(&rest[..take]));
                rest = &rest[take..];
            }
            out.extend(s.xor_transform(rest));
            prop_assert_eq!(out, oneshot);
        }
    }
}
