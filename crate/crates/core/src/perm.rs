//! Permutations over contiguous integer domains `[0, size)`.
//!
//! A [`Permutation`] is either backed by explicit forward/inverse tables or
//! by an arithmetic formula (a cyclic offset, or a product of cyclic offsets
//! over a mixed-radix packing). Formula backends evaluate in O(1) per point
//! and can be compared symbolically, which is what lets the combinators in
//! [`crate::aep`] check their preconditions without enumerating domains that
//! are too large for tables.

use std::sync::Arc;

use crate::error::{domain, incompatible, resource, Result};

/// Default cap on table sizes and exhaustive comparisons: 2^20 entries.
pub const DENSE_LIMIT: u64 = 1 << 20;

/// One factor of a mixed-radix product: a cyclic offset on `[0, size)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PieceOffset {
    pub size: u64,
    pub offset: u64,
}

/// Explicit table backend with precomputed inverse.
#[derive(Debug, PartialEq, Eq)]
pub struct PermTable {
    forward: Vec<u64>,
    inverse: Vec<u64>,
}

impl PermTable {
    /// Builds a table from a forward map, validating that it is a bijection.
    pub fn new(forward: Vec<u64>) -> Result<Self> {
        let n = forward.len() as u64;
        let mut inverse = vec![u64::MAX; forward.len()];
        for (x, &y) in forward.iter().enumerate() {
            if y >= n {
                return Err(domain(format!("permutation table maps {x} to {y}, outside [0, {n})")));
            }
            if inverse[y as usize] != u64::MAX {
                return Err(domain(format!(
                    "permutation table is not a bijection: {y} has two preimages"
                )));
            }
            inverse[y as usize] = x as u64;
        }
        Ok(Self { forward, inverse })
    }
}

/// A permutation of `[0, size)`.
#[derive(Clone, Debug)]
pub enum Permutation {
    /// The identity on `[0, size)`.
    Identity { size: u64 },
    /// `x -> (x + offset) mod size`.
    Offset { size: u64, offset: u64 },
    /// Independent cyclic offsets on each factor of a mixed-radix packing.
    /// Factor 0 is least significant.
    Piecewise { factors: Vec<PieceOffset> },
    /// Explicit tables.
    Table(Arc<PermTable>),
}

fn add_mod(x: u64, k: u64, size: u64) -> u64 {
    ((x as u128 + k as u128) % size as u128) as u64
}

fn sub_mod(x: u64, k: u64, size: u64) -> u64 {
    let k = k % size;
    ((x as u128 + (size - k) as u128) % size as u128) as u64
}

pub(crate) fn checked_product(sizes: impl IntoIterator<Item = u64>) -> Result<u64> {
    let mut acc: u64 = 1;
    for s in sizes {
        acc = acc
            .checked_mul(s)
            .ok_or_else(|| domain("domain size overflows u64".to_string()))?;
    }
    Ok(acc)
}

impl Permutation {
    pub fn identity(size: u64) -> Self {
        Permutation::Identity { size }
    }

    /// Cyclic offset `x -> (x + offset) mod size`, reduced on construction.
    pub fn offset(size: u64, offset: u64) -> Self {
        if offset % size == 0 {
            Permutation::Identity { size }
        } else {
            Permutation::Offset { size, offset: offset % size }
        }
    }

    /// Product of per-factor offsets. Size-1 factors are dropped and
    /// degenerate shapes collapse to `Offset` or `Identity`.
    pub fn piecewise(factors: Vec<PieceOffset>) -> Result<Self> {
        let size = checked_product(factors.iter().map(|f| f.size))?;
        let mut kept: Vec<PieceOffset> = Vec::with_capacity(factors.len());
        for f in factors {
            if f.size == 0 {
                return Err(domain("piecewise factor has size 0"));
            }
            if f.size == 1 {
                continue;
            }
            kept.push(PieceOffset { size: f.size, offset: f.offset % f.size });
        }
        if kept.iter().all(|f| f.offset == 0) {
            return Ok(Permutation::Identity { size });
        }
        if kept.len() == 1 {
            return Ok(Permutation::Offset { size: kept[0].size, offset: kept[0].offset });
        }
        Ok(Permutation::Piecewise { factors: kept })
    }

    /// Table-backed permutation; validates bijectivity.
    pub fn from_table(forward: Vec<u64>) -> Result<Self> {
        Ok(Permutation::Table(Arc::new(PermTable::new(forward)?)))
    }

    pub fn size(&self) -> u64 {
        match self {
            Permutation::Identity { size } | Permutation::Offset { size, .. } => *size,
            Permutation::Piecewise { factors } => {
                factors.iter().map(|f| f.size).product()
            }
            Permutation::Table(t) => t.forward.len() as u64,
        }
    }

    pub fn apply(&self, x: u64) -> u64 {
        debug_assert!(x < self.size());
        match self {
            Permutation::Identity { .. } => x,
            Permutation::Offset { size, offset } => add_mod(x, *offset, *size),
            Permutation::Piecewise { factors } => {
                let mut rem = x;
                let mut out: u128 = 0;
                let mut scale: u128 = 1;
                for f in factors {
                    let digit = rem % f.size;
                    rem /= f.size;
                    out += add_mod(digit, f.offset, f.size) as u128 * scale;
                    scale *= f.size as u128;
                }
                out as u64
            }
            Permutation::Table(t) => t.forward[x as usize],
        }
    }

    pub fn apply_inverse(&self, x: u64) -> u64 {
        debug_assert!(x < self.size());
        match self {
            Permutation::Identity { .. } => x,
            Permutation::Offset { size, offset } => sub_mod(x, *offset, *size),
            Permutation::Piecewise { factors } => {
                let mut rem = x;
                let mut out: u128 = 0;
                let mut scale: u128 = 1;
                for f in factors {
                    let digit = rem % f.size;
                    rem /= f.size;
                    out += sub_mod(digit, f.offset, f.size) as u128 * scale;
                    scale *= f.size as u128;
                }
                out as u64
            }
            Permutation::Table(t) => t.inverse[x as usize],
        }
    }

    /// Composition `self ∘ earlier`: `earlier` is applied first.
    ///
    /// Stays in the formula backend when both sides share a shape; otherwise
    /// falls back to a table, which requires the domain to fit under `limit`.
    pub fn compose(&self, earlier: &Permutation, limit: u64) -> Result<Permutation> {
        let size = self.size();
        if size != earlier.size() {
            return Err(incompatible(format!(
                "cannot compose permutations of sizes {} and {}",
                size,
                earlier.size()
            )));
        }
        match (self, earlier) {
            (Permutation::Identity { .. }, p) | (p, Permutation::Identity { .. }) => Ok(p.clone()),
            (Permutation::Offset { offset: a, .. }, Permutation::Offset { offset: b, .. }) => {
                Ok(Permutation::offset(size, add_mod(*a, *b, size)))
            }
            (Permutation::Piecewise { factors: a }, Permutation::Piecewise { factors: b })
                if a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.size == y.size) =>
            {
                Permutation::piecewise(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| PieceOffset {
                            size: x.size,
                            offset: add_mod(x.offset, y.offset, x.size),
                        })
                        .collect(),
                )
            }
            _ => {
                if size > limit {
                    return Err(resource(format!(
                        "composing permutations of size {size} needs a table, over the limit {limit}"
                    )));
                }
                let forward = (0..size).map(|x| self.apply(earlier.apply(x))).collect();
                Permutation::from_table(forward)
            }
        }
    }

    /// Structural equality test that never enumerates. `Some(answer)` when the
    /// backends decide it symbolically, `None` when only pointwise comparison
    /// can tell.
    fn symbolic_eq(&self, other: &Permutation) -> Option<bool> {
        use Permutation::*;
        match (self, other) {
            (Identity { .. }, Identity { .. }) => Some(true),
            (Identity { .. }, Offset { offset, .. }) | (Offset { offset, .. }, Identity { .. }) => {
                Some(*offset == 0)
            }
            (Offset { offset: a, .. }, Offset { offset: b, .. }) => Some(a == b),
            (Piecewise { factors: a }, Piecewise { factors: b })
                if a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.size == y.size) =>
            {
                Some(a == b)
            }
            (Table(a), Table(b)) if Arc::ptr_eq(a, b) => Some(true),
            _ => None,
        }
    }

    /// Pointwise equality. Uses the symbolic fast path when available,
    /// otherwise enumerates (requires `size <= limit`).
    pub fn pointwise_eq(&self, other: &Permutation, limit: u64) -> Result<bool> {
        if self.size() != other.size() {
            return Ok(false);
        }
        if let Some(ans) = self.symbolic_eq(other) {
            return Ok(ans);
        }
        let size = self.size();
        if size > limit {
            return Err(resource(format!(
                "permutations of size {size} cannot be compared extensionally (limit {limit})"
            )));
        }
        Ok((0..size).all(|x| self.apply(x) == other.apply(x)))
    }

    /// Checks `apply_inverse(apply(x)) == x`: exhaustively when the domain is
    /// at most `limit`, on `samples` seeded points otherwise.
    pub fn verify_bijection(&self, limit: u64, samples: u64) -> Result<()> {
        let size = self.size();
        let check = |x: u64| -> Result<()> {
            let y = self.apply(x);
            if y >= size || self.apply_inverse(y) != x {
                return Err(domain(format!(
                    "forward/inverse mismatch at {x}: forward gives {y}"
                )));
            }
            Ok(())
        };
        if size <= limit {
            (0..size).try_for_each(check)
        } else {
            // Cheap multiplicative stride; coverage, not uniformity, is the point.
            let stride = (size / samples.max(1)).max(1) | 1;
            (0..samples).try_for_each(|i| check((i.wrapping_mul(stride)) % size))
        }
    }

    /// Splits a permutation of `first * rest` into independent actions on the
    /// two factors, if it has that product structure. Returns
    /// `(first_action, rest_action)`.
    pub fn split_product(&self, first: u64, rest: u64, limit: u64) -> Result<(Permutation, Permutation)> {
        let size = self.size();
        if first.checked_mul(rest) != Some(size) {
            return Err(incompatible(format!(
                "factorization {first} x {rest} does not match permutation size {size}"
            )));
        }
        match self {
            Permutation::Identity { .. } => {
                return Ok((Permutation::identity(first), Permutation::identity(rest)));
            }
            Permutation::Offset { .. } => {
                if rest == 1 {
                    return Ok((self.clone(), Permutation::identity(1)));
                }
                if first == 1 {
                    return Ok((Permutation::identity(1), self.clone()));
                }
            }
            Permutation::Piecewise { factors } => {
                let mut prefix = 1u64;
                let mut split_at = None;
                for (i, f) in factors.iter().enumerate() {
                    if prefix == first {
                        split_at = Some(i);
                        break;
                    }
                    prefix = prefix.saturating_mul(f.size);
                }
                if prefix == first && split_at.is_none() {
                    split_at = Some(factors.len());
                }
                if let Some(i) = split_at {
                    let head = Permutation::piecewise(factors[..i].to_vec())?;
                    let tail = Permutation::piecewise(factors[i..].to_vec())?;
                    // piecewise() drops size-1 factors, so fix up sizes.
                    let head = if head.size() == first { head } else { pad_size(head, first)? };
                    let tail = if tail.size() == rest { tail } else { pad_size(tail, rest)? };
                    return Ok((head, tail));
                }
            }
            Permutation::Table(_) => {}
        }
        // Fall back to enumeration: derive the two actions and verify that the
        // permutation really factors.
        if size > limit {
            return Err(resource(format!(
                "permutation of size {size} cannot be split extensionally (limit {limit})"
            )));
        }
        let head: Vec<u64> = (0..first).map(|h| self.apply(h) % first).collect();
        let tail: Vec<u64> = (0..rest).map(|r| self.apply(r * first) / first).collect();
        for h in 0..first {
            for r in 0..rest {
                if self.apply(h + first * r) != head[h as usize] + first * tail[r as usize] {
                    return Err(incompatible(
                        "permutation does not act componentwise on the requested factors".to_string(),
                    ));
                }
            }
        }
        Ok((Permutation::from_table(head)?, Permutation::from_table(tail)?))
    }

    /// Product permutation acting as `self` on the low factor and `rest` on
    /// the high factor of `self.size() * rest.size()`.
    pub fn product_with(&self, rest: &Permutation, limit: u64) -> Result<Permutation> {
        let total = checked_product([self.size(), rest.size()])?;
        let as_factors = |p: &Permutation| -> Option<Vec<PieceOffset>> {
            match p {
                Permutation::Identity { size } => Some(vec![PieceOffset { size: *size, offset: 0 }]),
                Permutation::Offset { size, offset } => {
                    Some(vec![PieceOffset { size: *size, offset: *offset }])
                }
                Permutation::Piecewise { factors } => Some(factors.clone()),
                Permutation::Table(_) => None,
            }
        };
        if let (Some(mut a), Some(b)) = (as_factors(self), as_factors(rest)) {
            a.extend(b);
            return Permutation::piecewise(a);
        }
        if total > limit {
            return Err(resource(format!(
                "product permutation of size {total} needs a table, over the limit {limit}"
            )));
        }
        let first = self.size();
        let forward = (0..total)
            .map(|x| self.apply(x % first) + first * rest.apply(x / first))
            .collect();
        Permutation::from_table(forward)
    }
}

fn pad_size(p: Permutation, want: u64) -> Result<Permutation> {
    // A split that landed entirely on size-1 factors: the action is identity.
    if p.size() == 1 {
        Ok(Permutation::identity(want))
    } else if p.size() == want {
        Ok(p)
    } else {
        Err(incompatible(format!(
            "split produced size {} where {} was expected",
            p.size(),
            want
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_wraps() {
        let p = Permutation::offset(5, 3);
        assert_eq!(p.apply(4), 2);
        assert_eq!(p.apply_inverse(2), 4);
    }

    #[test]
    fn offset_zero_is_identity() {
        assert!(matches!(Permutation::offset(7, 7), Permutation::Identity { size: 7 }));
    }

    #[test]
    fn piecewise_mixed_radix() {
        // factors (4, +3), (8, +1): x = 5 -> digits (1, 1) -> (0, 2) -> 8.
        let p = Permutation::piecewise(vec![
            PieceOffset { size: 4, offset: 3 },
            PieceOffset { size: 8, offset: 1 },
        ])
        .unwrap();
        assert_eq!(p.apply(5), 8);
        assert_eq!(p.apply_inverse(8), 5);
        p.verify_bijection(64, 0).unwrap();
    }

    #[test]
    fn table_rejects_non_bijection() {
        assert!(Permutation::from_table(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_table(vec![0, 3]).is_err());
    }

    #[test]
    fn compose_offsets_and_tables() {
        let a = Permutation::offset(6, 2);
        let b = Permutation::offset(6, 5);
        let c = a.compose(&b, DENSE_LIMIT).unwrap();
        for x in 0..6 {
            assert_eq!(c.apply(x), (x + 7) % 6);
        }
        let t = Permutation::from_table(vec![1, 0, 2]).unwrap();
        let mixed = t.compose(&Permutation::offset(3, 1), DENSE_LIMIT).unwrap();
        for x in 0..3 {
            assert_eq!(mixed.apply(x), t.apply((x + 1) % 3));
        }
    }

    #[test]
    fn compose_size_mismatch_errors() {
        let a = Permutation::offset(4, 1);
        let b = Permutation::offset(5, 1);
        assert!(a.compose(&b, DENSE_LIMIT).is_err());
    }

    #[test]
    fn split_piecewise_product() {
        let p = Permutation::piecewise(vec![
            PieceOffset { size: 4, offset: 1 },
            PieceOffset { size: 2, offset: 1 },
            PieceOffset { size: 8, offset: 5 },
        ])
        .unwrap();
        let (head, tail) = p.split_product(8, 8, DENSE_LIMIT).unwrap();
        for x in 0..64u64 {
            assert_eq!(p.apply(x), head.apply(x % 8) + 8 * tail.apply(x / 8));
        }
    }

    #[test]
    fn split_rejects_entangled_permutation() {
        // A full-width offset with carries across the factor boundary.
        let p = Permutation::offset(8, 3);
        assert!(p.split_product(4, 2, DENSE_LIMIT).is_err());
    }

    #[test]
    fn pointwise_eq_mixed_backends() {
        let a = Permutation::offset(8, 3);
        let t = Permutation::from_table((0..8).map(|x| (x + 3) % 8).collect()).unwrap();
        assert!(a.pointwise_eq(&t, DENSE_LIMIT).unwrap());
        let wrong = Permutation::offset(8, 4);
        assert!(!a.pointwise_eq(&wrong, DENSE_LIMIT).unwrap());
    }
}
