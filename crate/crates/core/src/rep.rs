//! Concrete encoded-permutation families.
//!
//! Two families are provided, plus their combinations:
//!
//! - **Coset representation of modular integers** ([`make_coset_aep`]): a
//!   value `g` modulo `N` is stored as `g + c*N` for a padding value
//!   `c < 2^m`, so ordinary wrapping addition approximates modular addition.
//!   Deviation is at most `2^-m`.
//! - **Carry runway** ([`make_runway_aep`]): `m` extra bits are spliced into
//!   a `2^n` register at bit position `p` and subtracted from the high part,
//!   so additions can stop carries at the runway instead of rippling across
//!   the whole register. Deviation is at most `2^-m`.
//!
//! [`make_multi_runway_aep`] places several runways in one register by
//! iterated first-piece concatenation, and [`make_modular_runway_aep`] nests
//! runways inside the coset representation, with deviation at most
//! `(r+1)/2^m` for `r` runways.

use num_bigint::BigInt;

use crate::aep::{rational, EncodedPermutation, Rational};
use crate::error::{domain, Result};
use crate::perm::{Permutation, PieceOffset};

/// Width limit keeping every encoded value inside a `u64`.
const MAX_ENCODED_BITS: u32 = 62;

/// Bits needed to hold values in `[0, modulus)`: the bit length of
/// `modulus - 1`.
pub fn ceil_lg(modulus: u64) -> u32 {
    64 - (modulus - 1).leading_zeros()
}

/// Parameters of the coset representation of modular integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CosetParams {
    /// Modulus `N >= 2`.
    pub modulus: u64,
    /// Padding bits `m >= 0`; the coset value ranges over `[0, 2^m)`.
    pub padding_bits: u32,
    /// Addition offset in `[0, N)`.
    pub offset: u64,
}

impl CosetParams {
    /// Encoded register width in bits: `m + ceil(lg N)`.
    pub fn encoded_bits(&self) -> u32 {
        self.padding_bits + ceil_lg(self.modulus)
    }

    fn validate(&self) -> Result<()> {
        if self.modulus < 2 {
            return Err(domain(format!("modulus {} must be at least 2", self.modulus)));
        }
        if self.offset >= self.modulus {
            return Err(domain(format!(
                "offset {} out of range [0, {})",
                self.offset, self.modulus
            )));
        }
        if self.encoded_bits() > MAX_ENCODED_BITS {
            return Err(domain(format!(
                "encoded register of {} bits exceeds the {MAX_ENCODED_BITS}-bit limit",
                self.encoded_bits()
            )));
        }
        Ok(())
    }
}

/// Parameters of a single carry runway.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunwayParams {
    /// Register bits `n >= 1`.
    pub register_bits: u32,
    /// Runway position `p`: `1 <= p <= n - m` when `m >= 1` (any position up
    /// to `n` in the degenerate `m = 0` case).
    pub position: u32,
    /// Runway length `m >= 0`.
    pub runway_bits: u32,
    /// Addition offset; reduced modulo `2^n`.
    pub offset: i64,
}

impl RunwayParams {
    fn validate(&self) -> Result<()> {
        let (n, p, m) = (self.register_bits, self.position, self.runway_bits);
        if n < 1 {
            return Err(domain("register must have at least one bit".to_string()));
        }
        if p < 1 || p > n {
            return Err(domain(format!("runway position {p} out of range [1, {n}]")));
        }
        if m >= 1 && p > n - m {
            return Err(domain(format!(
                "runway position {p} exceeds n - m = {}",
                n - m
            )));
        }
        if n + m > MAX_ENCODED_BITS {
            return Err(domain(format!(
                "encoded register of {} bits exceeds the {MAX_ENCODED_BITS}-bit limit",
                n + m
            )));
        }
        Ok(())
    }

    fn reduced_offset(&self) -> u64 {
        reduce_mod_pow2(self.offset, self.register_bits)
    }
}

/// A register with several runways at fixed positions, or none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutParams {
    /// Register bits `n`.
    pub register_bits: u32,
    /// Strictly increasing runway positions, all in `(0, n)`.
    pub positions: Vec<u32>,
    /// Common runway length `m`.
    pub runway_bits: u32,
}

impl LayoutParams {
    pub fn new(register_bits: u32, positions: Vec<u32>, runway_bits: u32) -> Result<Self> {
        let layout = Self { register_bits, positions, runway_bits };
        layout.validate()?;
        Ok(layout)
    }

    /// Runways at every multiple of `spacing` that is not within `spacing`
    /// bits of the end of the register.
    pub fn from_spacing(register_bits: u32, spacing: u32, runway_bits: u32) -> Result<Self> {
        if spacing == 0 {
            return Err(domain("spacing must be positive".to_string()));
        }
        let positions = (1..)
            .map(|i| i * spacing)
            .take_while(|&p| p + spacing <= register_bits)
            .collect();
        Self::new(register_bits, positions, runway_bits)
    }

    pub fn runway_count(&self) -> u64 {
        self.positions.len() as u64
    }

    /// Total encoded bits: `n + r*m`.
    pub fn encoded_bits(&self) -> u32 {
        self.register_bits + self.positions.len() as u32 * self.runway_bits
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let (n, m) = (self.register_bits, self.runway_bits);
        if n < 1 {
            return Err(domain("register must have at least one bit".to_string()));
        }
        for w in self.positions.windows(2) {
            if w[0] >= w[1] {
                return Err(domain(format!(
                    "runway positions must strictly increase: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&first) = self.positions.first() {
            if first == 0 {
                return Err(domain("runway position 0 is not inside the register".to_string()));
            }
        }
        if let Some(&last) = self.positions.last() {
            if last >= n || (m >= 1 && last > n - m) {
                return Err(domain(format!(
                    "runway position {last} does not fit a length-{m} runway in {n} bits"
                )));
            }
        }
        Ok(())
    }

    /// Layouts are also plain cost-model inputs, so the width cap is only
    /// enforced where encoded values must fit a u64.
    pub(crate) fn check_encodable(&self) -> Result<()> {
        if self.encoded_bits() > MAX_ENCODED_BITS {
            return Err(domain(format!(
                "encoded register of {} bits exceeds the {MAX_ENCODED_BITS}-bit limit",
                self.encoded_bits()
            )));
        }
        Ok(())
    }

    /// Widths of the pieces the register splits into, low piece first: each
    /// runway piece carries its data bits plus `m` runway bits.
    pub fn piece_widths(&self) -> Vec<u32> {
        let r = self.positions.len();
        let mut widths = Vec::with_capacity(r + 1);
        let mut prev = 0;
        for &p in &self.positions {
            widths.push(p - prev + self.runway_bits);
            prev = p;
        }
        widths.push(self.register_bits - prev);
        widths
    }

    /// The slice of the constant `k` each piece receives under piecewise
    /// addition, low piece first.
    pub fn constant_slices(&self, k: u64) -> Vec<u64> {
        let n = self.register_bits;
        let k = k & mask_bits(n);
        let r = self.positions.len();
        let mut slices = Vec::with_capacity(r + 1);
        let mut prev = 0;
        for &p in &self.positions {
            slices.push((k >> prev) & mask_bits(p - prev));
            prev = p;
        }
        slices.push(k >> prev);
        slices
    }

    /// Splits a packed coset value into per-runway values, in position order.
    /// The lowest-position runway occupies the most significant base-`2^m`
    /// digit, matching the coset packing of iterated concatenation.
    pub fn split_coset(&self, coset: u64) -> Vec<u64> {
        let r = self.positions.len() as u32;
        let m = self.runway_bits;
        (0..r).map(|i| (coset >> (m * (r - 1 - i))) & mask_bits(m)).collect()
    }
}

fn mask_bits(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn reduce_mod_pow2(k: i64, bits: u32) -> u64 {
    (k as u64) & mask_bits(bits)
}

/// The coset representation of modular integers as an encoded permutation:
/// `G = Z/N`, `u(g) = (g+k) mod N`, `E = Z/2^(m+ceil lg N)`,
/// `v(e) = (e+k) mod |E|`, `encode(g,c) = g + c*N`.
pub fn make_coset_aep(params: CosetParams) -> Result<EncodedPermutation> {
    params.validate()?;
    let n_mod = params.modulus;
    let m = params.padding_bits;
    let e_size = 1u64 << params.encoded_bits();
    let c_size = 1u64 << m;
    let desired = Permutation::offset(n_mod, params.offset);
    let encoded = Permutation::offset(e_size, params.offset);
    let coder = crate::aep::coset_coder(n_mod, m);
    EncodedPermutation::from_parts(desired, encoded, coder, c_size, Some(pow2_bound(1, m)))
}

/// A single carry runway as an encoded permutation: `G = Z/2^n`,
/// `u(g) = (g+k) mod 2^n`, `E = Z/2^(p+m) x Z/2^(n-p)` packed as
/// `e0 + 2^(p+m) * e1`, with the runway value subtracted from the high part
/// during encoding. The encoder is a total bijection (no leakage).
pub fn make_runway_aep(params: RunwayParams) -> Result<EncodedPermutation> {
    params.validate()?;
    let (n, p, m) = (params.register_bits, params.position, params.runway_bits);
    let k = params.reduced_offset();
    let desired = Permutation::offset(1u64 << n, k);
    let encoded = Permutation::piecewise(vec![
        PieceOffset { size: 1u64 << (p + m), offset: k & mask_bits(p) },
        PieceOffset { size: 1u64 << (n - p), offset: (k >> p) & mask_bits(n - p) },
    ])?;
    let coder = crate::aep::runway_coder(n, p, m);
    EncodedPermutation::from_parts(desired, encoded, coder, 1u64 << m, Some(pow2_bound(1, m)))
}

/// Several runways in one plain `2^n` register, built by iterated
/// first-piece concatenation from the highest position down. Each piece's
/// encoded permutation adds the matching slice of `k`.
pub fn make_multi_runway_aep(layout: &LayoutParams, offset: i64) -> Result<EncodedPermutation> {
    layout.validate()?;
    layout.check_encodable()?;
    let n = layout.register_bits;
    let m = layout.runway_bits;
    let k = reduce_mod_pow2(offset, n);
    let r = layout.positions.len();
    if r == 0 {
        let size = 1u64 << n;
        let perm = Permutation::offset(size, k);
        return Ok(EncodedPermutation::identity(size)
            .with_offsets(perm.clone(), perm)
            .with_bound(Some(rational(0, 1))));
    }

    // Innermost split at the highest position over the full register.
    let mut aep = make_runway_aep(RunwayParams {
        register_bits: n,
        position: layout.positions[r - 1],
        runway_bits: m,
        offset: k as i64,
    })?;
    // Current factorization of the encoded space, low piece first.
    let mut pieces: Vec<u64> = vec![
        1u64 << (layout.positions[r - 1] + m),
        1u64 << (n - layout.positions[r - 1]),
    ];
    for i in (0..r - 1).rev() {
        let sub_bits = layout.positions[i + 1] + m;
        let wrapper = make_runway_aep(RunwayParams {
            register_bits: sub_bits,
            position: layout.positions[i],
            runway_bits: m,
            offset: (k & mask_bits(layout.positions[i + 1])) as i64,
        })?;
        aep = wrapper.first_piece_concat(&aep, &pieces)?;
        let mut next = vec![
            1u64 << (layout.positions[i] + m),
            1u64 << (sub_bits - layout.positions[i]),
        ];
        next.extend_from_slice(&pieces[1..]);
        pieces = next;
    }
    Ok(aep.with_bound(Some(pow2_bound(r as u64, m))))
}

/// Runways nested inside the coset representation: modular addition by `k`
/// with `r` runways in the coset-encoded register. Deviation is at most
/// `(r+1)/2^m`.
pub fn make_modular_runway_aep(
    modulus: u64,
    runway_bits: u32,
    positions: &[u32],
    offset: u64,
) -> Result<EncodedPermutation> {
    let coset = CosetParams { modulus, padding_bits: runway_bits, offset };
    coset.validate()?;
    let width = coset.encoded_bits();
    let mut aep = make_coset_aep(coset)?;
    if positions.is_empty() {
        return Ok(aep);
    }
    let layout = LayoutParams::new(width, positions.to_vec(), runway_bits)?;
    let m = runway_bits;
    let r = layout.positions.len();
    let k = offset; // already < modulus <= 2^width

    // Innermost wrap: a runway over the whole coset-encoded register (plain
    // concatenation; the runway's desired permutation is the coset
    // representation's encoded permutation). Each further runway wraps the
    // current low piece, whose offset is k reduced to the piece's data bits.
    let mut sub_bits = width;
    let mut offset_bits = width;
    let mut pieces: Vec<u64> = vec![1u64 << width];
    for i in (0..r).rev() {
        let wrapper = make_runway_aep(RunwayParams {
            register_bits: sub_bits,
            position: layout.positions[i],
            runway_bits: m,
            offset: (k & mask_bits(offset_bits)) as i64,
        })?;
        aep = if pieces.len() == 1 {
            wrapper.concatenate(&aep)?
        } else {
            wrapper.first_piece_concat(&aep, &pieces)?
        };
        let mut next = vec![
            1u64 << (layout.positions[i] + m),
            1u64 << (sub_bits - layout.positions[i]),
        ];
        next.extend_from_slice(&pieces[1..]);
        pieces = next;
        offset_bits = layout.positions[i];
        sub_bits = layout.positions[i] + m;
    }
    Ok(aep.with_bound(Some(pow2_bound(r as u64 + 1, m))))
}

/// Representation families with proven deviation bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepresentationKind {
    /// Coset representation of modular integers.
    Coset,
    /// A single carry runway.
    Runway,
    /// `r` runways in a plain register.
    MultiRunway,
    /// `r` runways nested inside the coset representation.
    ModularRunway,
}

/// The proven deviation bound for a representation family: `2^-m` for a
/// single coset encoding or runway, `r * 2^-m` for `r` plain runways, and
/// `(r+1) * 2^-m` for runways nested in the coset representation.
pub fn deviation_bound(kind: RepresentationKind, runways: u64, padding_bits: u32) -> Rational {
    match kind {
        RepresentationKind::Coset | RepresentationKind::Runway => pow2_bound(1, padding_bits),
        RepresentationKind::MultiRunway => pow2_bound(runways, padding_bits),
        RepresentationKind::ModularRunway => pow2_bound(runways + 1, padding_bits),
    }
}

fn pow2_bound(numerator: u64, bits: u32) -> Rational {
    Rational::new(BigInt::from(numerator), BigInt::from(2u64).pow(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aep::Decoded;

    #[test]
    fn coset_decode_by_division() {
        let p = make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 0 }).unwrap();
        assert_eq!(p.decode(7).unwrap(), Decoded::Value { value: 1, coset: 2 });
    }

    #[test]
    fn coset_leak_count() {
        // N=3, m=2: |E| = 16, |L| = 16 - 12 = 4.
        let p = make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 0 }).unwrap();
        assert_eq!(p.leak_size(), 4);
        assert_eq!(p.encoded_size(), 16);
    }

    #[test]
    fn coset_zero_padding_degenerates() {
        // m=0: a single coset value; any nonzero offset can deviate fully.
        let p = make_coset_aep(CosetParams { modulus: 3, padding_bits: 0, offset: 1 }).unwrap();
        let report = p.deviation().unwrap();
        assert_eq!(report.deviation, rational(1, 1));
        assert!(report.within_bound(), "bound 2^0 = 1 is vacuous but must hold");
    }

    #[test]
    fn coset_rejects_bad_params() {
        assert!(make_coset_aep(CosetParams { modulus: 1, padding_bits: 2, offset: 0 }).is_err());
        assert!(make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 3 }).is_err());
        assert!(make_coset_aep(CosetParams { modulus: 3, padding_bits: 63, offset: 0 }).is_err());
    }

    #[test]
    fn runway_encode_matches_formula() {
        // n=2, p=1, m=1, g=3, c=1 -> (e0, e1) = (3, 0).
        let p = make_runway_aep(RunwayParams {
            register_bits: 2,
            position: 1,
            runway_bits: 1,
            offset: 0,
        })
        .unwrap();
        assert_eq!(p.encode(3, 1).unwrap(), 3);
        assert_eq!(p.encode(3, 0).unwrap(), 1 + 4);
    }

    #[test]
    fn runway_has_no_leakage_and_round_trips() {
        let p = make_runway_aep(RunwayParams {
            register_bits: 4,
            position: 2,
            runway_bits: 1,
            offset: 0,
        })
        .unwrap();
        assert_eq!(p.leak_size(), 0);
        for g in 0..16 {
            for c in 0..2 {
                let e = p.encode(g, c).unwrap();
                assert_eq!(p.decode(e).unwrap(), Decoded::Value { value: g, coset: c });
            }
        }
    }

    #[test]
    fn runway_rejects_bad_position() {
        assert!(make_runway_aep(RunwayParams {
            register_bits: 4,
            position: 3,
            runway_bits: 2,
            offset: 0
        })
        .is_err());
        assert!(make_runway_aep(RunwayParams {
            register_bits: 4,
            position: 0,
            runway_bits: 1,
            offset: 0
        })
        .is_err());
    }

    #[test]
    fn negative_offsets_reduce() {
        let p = make_runway_aep(RunwayParams {
            register_bits: 4,
            position: 2,
            runway_bits: 1,
            offset: -3,
        })
        .unwrap();
        assert_eq!(p.apply_desired(0).unwrap(), 13);
    }

    #[test]
    fn multi_runway_single_position_matches_runway() {
        let layout = LayoutParams::new(8, vec![4], 1).unwrap();
        for k in [0i64, 1, 77, 255] {
            let a = make_multi_runway_aep(&layout, k).unwrap();
            let b = make_runway_aep(RunwayParams {
                register_bits: 8,
                position: 4,
                runway_bits: 1,
                offset: k,
            })
            .unwrap();
            assert_eq!(a.encoded_size(), b.encoded_size());
            for e in 0..a.encoded_size() {
                assert_eq!(a.apply_encoded(e).unwrap(), b.apply_encoded(e).unwrap());
                assert_eq!(a.decode(e).unwrap(), b.decode(e).unwrap());
            }
            for g in 0..256 {
                for c in 0..2 {
                    assert_eq!(a.encode(g, c).unwrap(), b.encode(g, c).unwrap());
                }
            }
        }
    }

    #[test]
    fn multi_runway_zero_offset_has_zero_deviation() {
        let layout = LayoutParams::new(8, vec![3, 6], 2).unwrap();
        let p = make_multi_runway_aep(&layout, 0).unwrap();
        assert_eq!(p.deviation().unwrap().deviation, rational(0, 1));
    }

    #[test]
    fn modular_runway_empty_positions_is_plain_coset() {
        let a = make_modular_runway_aep(5, 2, &[], 3).unwrap();
        let b = make_coset_aep(CosetParams { modulus: 5, padding_bits: 2, offset: 3 }).unwrap();
        assert_eq!(a.encoded_size(), b.encoded_size());
        for e in 0..a.encoded_size() {
            assert_eq!(a.decode(e).unwrap(), b.decode(e).unwrap());
        }
    }

    #[test]
    fn layout_from_spacing() {
        let l = LayoutParams::from_spacing(4000, 1000, 40).unwrap();
        assert_eq!(l.positions, vec![1000, 2000, 3000]);
        // Desk-scale variant.
        let small = LayoutParams::from_spacing(8, 2, 1).unwrap();
        assert_eq!(small.positions, vec![2, 4, 6]);
    }

    #[test]
    fn bound_values() {
        assert_eq!(
            deviation_bound(RepresentationKind::Coset, 0, 20),
            Rational::new(1.into(), num_bigint::BigInt::from(2u64).pow(20))
        );
        assert_eq!(
            deviation_bound(RepresentationKind::ModularRunway, 3, 40),
            Rational::new(4.into(), num_bigint::BigInt::from(2u64).pow(40))
        );
        assert_eq!(deviation_bound(RepresentationKind::MultiRunway, 0, 5), rational(0, 1));
    }
}
