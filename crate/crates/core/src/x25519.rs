//! X25519 Diffie-Hellman over Curve25519 (RFC 7748).
//!
//! Field elements of GF(2^255 - 19) are held as five 51-bit limbs; scalar
//! multiplication is the Montgomery ladder with constant-time conditional
//! swaps. No point validation is performed beyond rejecting an all-zero
//! result (low-order input), which callers treat as a session-aborting
//! error.

use crate::error::{Error, Result};
use crate::keymgr::wipe_bytes;

// ---------------------------------------------------------------------------
// GF(2^255 - 19)
// ---------------------------------------------------------------------------

const MASK51: u64 = (1u64 << 51) - 1;

/// (486662 - 2) / 4, the ladder constant for Curve25519.
const A24: u64 = 121665;

#[derive(Clone, Copy)]
struct Fe([u64; 5]);

impl Fe {
    const ZERO: Fe = Fe([0; 5]);
    const ONE: Fe = Fe([1, 0, 0, 0, 0]);
}

#[allow(clippy::needless_range_loop)] // the carry chain reads i and writes i+1
fn fe_carry(mut h: [u64; 5]) -> Fe {
    for i in 0..4 {
        let c = h[i] >> 51;
        h[i] &= MASK51;
        h[i + 1] += c;
    }
    let c = h[4] >> 51;
    h[4] &= MASK51;
    h[0] += c * 19; // 2^255 = 19 mod p
    let c = h[0] >> 51;
    h[0] &= MASK51;
    h[1] += c;
    Fe(h)
}

fn fe_add(a: &Fe, b: &Fe) -> Fe {
    let mut h = a.0;
    for (h, b) in h.iter_mut().zip(&b.0) {
        *h += b;
    }
    fe_carry(h)
}

// 2p per limb keeps subtraction non-negative.
const TWO_P: [u64; 5] = [
    0xFFFFFFFFFFFDA,
    0xFFFFFFFFFFFFE,
    0xFFFFFFFFFFFFE,
    0xFFFFFFFFFFFFE,
    0xFFFFFFFFFFFFE,
];

fn fe_sub(a: &Fe, b: &Fe) -> Fe {
    let mut h = TWO_P;
    for ((h, a), b) in h.iter_mut().zip(&a.0).zip(&b.0) {
        *h += a;
        *h -= b;
    }
    fe_carry(h)
}

fn fe_mul(a: &Fe, b: &Fe) -> Fe {
    let a = a.0.map(|x| x as u128);
    // limbs that wrap past position 4 pick up the factor 19
    let b0 = b.0[0] as u128;
    let b1 = b.0[1] as u128;
    let b2 = b.0[2] as u128;
    let b3 = b.0[3] as u128;
    let b4 = b.0[4] as u128;
    let b1_19 = (b.0[1] * 19) as u128;
    let b2_19 = (b.0[2] * 19) as u128;
    let b3_19 = (b.0[3] * 19) as u128;
    let b4_19 = (b.0[4] * 19) as u128;

    let t = [
        a[0] * b0 + a[1] * b4_19 + a[2] * b3_19 + a[3] * b2_19 + a[4] * b1_19,
        a[0] * b1 + a[1] * b0 + a[2] * b4_19 + a[3] * b3_19 + a[4] * b2_19,
        a[0] * b2 + a[1] * b1 + a[2] * b0 + a[3] * b4_19 + a[4] * b3_19,
        a[0] * b3 + a[1] * b2 + a[2] * b1 + a[3] * b0 + a[4] * b4_19,
        a[0] * b4 + a[1] * b3 + a[2] * b2 + a[3] * b1 + a[4] * b0,
    ];
    reduce_wide(t)
}

fn fe_square(a: &Fe) -> Fe {
    let a0 = a.0[0] as u128;
    let a1 = a.0[1] as u128;
    let a2 = a.0[2] as u128;
    let a3 = a.0[3] as u128;
    let a4 = a.0[4] as u128;
    let a3_19 = (a.0[3] * 19) as u128;
    let a4_19 = (a.0[4] * 19) as u128;

    let t = [
        a0 * a0 + 2 * (a1 * a4_19 + a2 * a3_19),
        2 * (a0 * a1 + a2 * a4_19) + a3 * a3_19,
        2 * (a0 * a2 + a3_19 * a4) + a1 * a1,
        2 * (a0 * a3 + a1 * a2) + a4 * a4_19,
        2 * (a0 * a4 + a1 * a3) + a2 * a2,
    ];
    reduce_wide(t)
}

fn reduce_wide(t: [u128; 5]) -> Fe {
    let mut r = [0u64; 5];
    let mut carry = 0u128;
    for i in 0..5 {
        let v = t[i] + carry;
        r[i] = (v as u64) & MASK51;
        carry = v >> 51;
    }
    r[0] += (carry as u64) * 19;
    let c = r[0] >> 51;
    r[0] &= MASK51;
    r[1] += c;
    let c = r[1] >> 51;
    r[1] &= MASK51;
    r[2] += c;
    Fe(r)
}

fn fe_mul_small(a: &Fe, c: u64) -> Fe {
    let t = a.0.map(|x| x as u128 * c as u128);
    reduce_wide(t)
}

fn fe_square_n(a: &Fe, n: u32) -> Fe {
    let mut r = fe_square(a);
    for _ in 1..n {
        r = fe_square(&r);
    }
    r
}

/// a^(p-2) via the standard addition chain.
fn fe_invert(a: &Fe) -> Fe {
    let z2 = fe_square(a);
    let z8 = fe_square_n(&z2, 2);
    let z9 = fe_mul(&z8, a);
    let z11 = fe_mul(&z9, &z2);
    let z31 = fe_mul(&fe_square(&z11), &z9); // 2^5 - 1
    let z10 = fe_mul(&fe_square_n(&z31, 5), &z31); // 2^10 - 1
    let z20 = fe_mul(&fe_square_n(&z10, 10), &z10);
    let z40 = fe_mul(&fe_square_n(&z20, 20), &z20);
    let z50 = fe_mul(&fe_square_n(&z40, 10), &z10);
    let z100 = fe_mul(&fe_square_n(&z50, 50), &z50);
    let z200 = fe_mul(&fe_square_n(&z100, 100), &z100);
    let z250 = fe_mul(&fe_square_n(&z200, 50), &z50);
    fe_mul(&fe_square_n(&z250, 5), &z11)
}

/// Constant-time swap: `swap` must be 0 or 1.
fn fe_cswap(a: &mut Fe, b: &mut Fe, swap: u64) {
    let mask = 0u64.wrapping_sub(swap);
    for i in 0..5 {
        let t = mask & (a.0[i] ^ b.0[i]);
        a.0[i] ^= t;
        b.0[i] ^= t;
    }
}

fn fe_from_bytes(bytes: &[u8; 32]) -> Fe {
    let load = |s: &[u8]| -> u64 {
        let mut v = 0u64;
        for (i, b) in s.iter().take(8).enumerate() {
            v |= (*b as u64) << (8 * i);
        }
        v
    };
    // bit 255 falls outside the top limb's 51-bit mask, per RFC 7748
    let mut h = [0u64; 5];
    h[0] = load(&bytes[0..]) & MASK51;
    h[1] = (load(&bytes[6..]) >> 3) & MASK51;
    h[2] = (load(&bytes[12..]) >> 6) & MASK51;
    h[3] = (load(&bytes[19..]) >> 1) & MASK51;
    h[4] = (load(&bytes[24..]) >> 12) & MASK51;
    Fe(h)
}

fn fe_to_bytes(f: &Fe) -> [u8; 32] {
    let mut h = fe_carry(f.0).0;

    // canonical reduction: subtract p once if h >= p
    let mut q = (h[0] + 19) >> 51;
    for limb in h.iter().skip(1) {
        q = (limb + q) >> 51;
    }
    h[0] += q * 19;
    for i in 0..4 {
        let c = h[i] >> 51;
        h[i] &= MASK51;
        h[i + 1] += c;
    }
    h[4] &= MASK51;

    let mut out = [0u8; 32];
    for (i, limb) in h.iter().enumerate() {
        let bit = i * 51;
        let shifted = (*limb as u128) << (bit % 8);
        for j in 0..8 {
            let idx = bit / 8 + j;
            if idx < 32 {
                out[idx] |= (shifted >> (8 * j)) as u8;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Scalars and points
// ---------------------------------------------------------------------------

/// Apply the RFC 7748 clamping bit operations.
pub fn clamp_bytes(mut raw: [u8; 32]) -> [u8; 32] {
    raw[0] &= 0xF8;
    raw[31] &= 0x7F;
    raw[31] |= 0x40;
    raw
}

/// A clamped Curve25519 private scalar. Zeroizable; a destroyed scalar is
/// flagged unusable and reads back as all zeros.
pub struct PrivateScalar {
    bytes: [u8; 32],
    destroyed: bool,
}

impl PrivateScalar {
    /// Clamp 32 raw octets into a usable scalar.
    pub fn clamp(raw: &[u8]) -> Result<Self> {
        let bytes: [u8; 32] = raw
            .try_into()
            .map_err(|_| Error::InvalidScalarLength(raw.len()))?;
        Ok(PrivateScalar { bytes: clamp_bytes(bytes), destroyed: false })
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.bytes
    }

    pub fn is_live(&self) -> bool {
        !self.destroyed
    }

    pub fn destroy(&mut self) {
        wipe_bytes(&mut self.bytes);
        self.destroyed = true;
    }
}

impl Drop for PrivateScalar {
    fn drop(&mut self) {
        self.destroy();
    }
}

/// Montgomery u-coordinate, little-endian. Public data.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PublicPoint(pub [u8; 32]);

impl PublicPoint {
    pub fn new(bytes: &[u8]) -> Result<Self> {
        let b: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::InvalidPointLength(bytes.len()))?;
        Ok(PublicPoint(b))
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

/// X25519 shared secret. Consumed at most once by the KDF, then destroyed.
pub struct SharedSecret {
    bytes: [u8; 32],
    destroyed: bool,
}

impl SharedSecret {
    pub(crate) fn from_point(p: PublicPoint) -> Self {
        SharedSecret { bytes: p.0, destroyed: false }
    }

    /// Secret bytes; fails once the secret has been destroyed.
    pub fn bytes(&self) -> Result<&[u8; 32]> {
        if self.destroyed {
            return Err(Error::Lifecycle("shared secret already destroyed"));
        }
        Ok(&self.bytes)
    }

    pub fn is_live(&self) -> bool {
        !self.destroyed
    }

    pub fn destroy(&mut self) {
        wipe_bytes(&mut self.bytes);
        self.destroyed = true;
    }

    /// Raw buffer view regardless of lifecycle, for wipe verification.
    pub(crate) fn raw(&self) -> &[u8; 32] {
        &self.bytes
    }
}

impl Drop for SharedSecret {
    fn drop(&mut self) {
        self.destroy();
    }
}

// ---------------------------------------------------------------------------
// Scalar multiplication
// ---------------------------------------------------------------------------

fn ladder(scalar: &[u8; 32], point: &[u8; 32]) -> [u8; 32] {
    let x1 = fe_from_bytes(point);
    let mut x2 = Fe::ONE;
    let mut z2 = Fe::ZERO;
    let mut x3 = x1;
    let mut z3 = Fe::ONE;
    let mut swap = 0u64;

    for pos in (0..255).rev() {
        let bit = ((scalar[pos / 8] >> (pos % 8)) & 1) as u64;
        swap ^= bit;
        fe_cswap(&mut x2, &mut x3, swap);
        fe_cswap(&mut z2, &mut z3, swap);
        swap = bit;

        let a = fe_add(&x2, &z2);
        let aa = fe_square(&a);
        let b = fe_sub(&x2, &z2);
        let bb = fe_square(&b);
        let e = fe_sub(&aa, &bb);
        let c = fe_add(&x3, &z3);
        let d = fe_sub(&x3, &z3);
        let da = fe_mul(&d, &a);
        let cb = fe_mul(&c, &b);
        x3 = fe_square(&fe_add(&da, &cb));
        z3 = fe_mul(&x1, &fe_square(&fe_sub(&da, &cb)));
        x2 = fe_mul(&aa, &bb);
        z2 = fe_mul(&e, &fe_add(&aa, &fe_mul_small(&e, A24)));
    }
    fe_cswap(&mut x2, &mut x3, swap);
    fe_cswap(&mut z2, &mut z3, swap);

    fe_to_bytes(&fe_mul(&x2, &fe_invert(&z2)))
}

/// X25519 scalar multiplication. An all-zero output means the input point
/// was low-order; the session must abort rather than use it.
pub fn scalar_mult(k: &PrivateScalar, u: &PublicPoint) -> Result<PublicPoint> {
    if !k.is_live() {
        return Err(Error::Lifecycle("scalar already destroyed"));
    }
    let out = ladder(&k.bytes, &u.0);
    if out == [0u8; 32] {
        return Err(Error::DegenerateSharedSecret);
    }
    Ok(PublicPoint(out))
}

/// Scalar multiplication by the standard base point u = 9.
pub fn base_point_mult(k: &PrivateScalar) -> Result<PublicPoint> {
    let mut g = [0u8; 32];
    g[0] = 9;
    scalar_mult(k, &PublicPoint(g))
}
