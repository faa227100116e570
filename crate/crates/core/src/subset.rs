//! k-subsets of `[n] = {1, ..., n}` as single-word bitmasks, their
//! lexicographic order, and families of them.
//!
//! Element `i` lives at bit `i - 1`. The lexicographic order prefers sets
//! with smaller elements: `A < B` iff `min(A Δ B) ∈ A`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::combinatorics::small_binomial;
use crate::error::{Error, Result};

/// Largest ground set a [`KSubset`] can hold.
pub const MAX_GROUND: u32 = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct KSubset {
    bits: u64,
    n: u8,
    k: u8,
}

fn check_shape(n: u32, k: u32) -> Result<()> {
    if n > MAX_GROUND {
        return Err(Error::InvalidParams(format!(
            "ground set size {n} exceeds the {MAX_GROUND}-element bitmask"
        )));
    }
    if k < 1 || 2 * k > n {
        return Err(Error::InvalidParams(format!(
            "k-subsets need 1 <= k and 2k <= n (n = {n}, k = {k})"
        )));
    }
    Ok(())
}

#[inline]
fn ground_mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl KSubset {
    /// Builds a subset from 1-based elements. Order does not matter;
    /// repeated elements are rejected.
    pub fn new(n: u32, elements: &[u32]) -> Result<Self> {
        let k = elements.len() as u32;
        check_shape(n, k)?;
        let mut bits = 0u64;
        for &e in elements {
            if e < 1 || e > n {
                return Err(Error::Domain(format!("element {e} outside [1, {n}]")));
            }
            let b = 1u64 << (e - 1);
            if bits & b != 0 {
                return Err(Error::Domain(format!("element {e} repeated")));
            }
            bits |= b;
        }
        Ok(KSubset { bits, n: n as u8, k: k as u8 })
    }

    pub fn from_bits(n: u32, k: u32, bits: u64) -> Result<Self> {
        check_shape(n, k)?;
        if bits & !ground_mask(n) != 0 {
            return Err(Error::Domain(format!("bits {bits:#x} outside [1, {n}]")));
        }
        if bits.count_ones() != k {
            return Err(Error::Domain(format!("bits {bits:#x} do not have {k} elements")));
        }
        Ok(KSubset { bits, n: n as u8, k: k as u8 })
    }

    #[inline]
    pub(crate) fn from_bits_unchecked(n: u32, k: u32, bits: u64) -> Self {
        debug_assert_eq!(bits.count_ones(), k);
        KSubset { bits, n: n as u8, k: k as u8 }
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn n(&self) -> u32 {
        u32::from(self.n)
    }

    #[inline]
    pub fn k(&self) -> u32 {
        u32::from(self.k)
    }

    #[inline]
    pub fn contains(&self, element: u32) -> bool {
        element >= 1 && element <= self.n() && self.bits & (1u64 << (element - 1)) != 0
    }

    /// Ascending 1-based elements.
    pub fn elements(&self) -> impl Iterator<Item = u32> + '_ {
        BitIter(self.bits).map(|b| b + 1)
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.elements().collect()
    }

    #[inline]
    pub fn is_disjoint(&self, other: &KSubset) -> bool {
        self.bits & other.bits == 0
    }

    /// Position in lexicographic order, counted from zero.
    pub fn lex_rank(&self) -> u64 {
        let n = self.n();
        let k = self.k();
        let mut rank = 0u64;
        let mut start = 0u32;
        for (i, c) in BitIter(self.bits).enumerate() {
            let rest = k - i as u32;
            rank += small_binomial(n - start, rest) - small_binomial(n - c, rest);
            start = c + 1;
        }
        rank
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

impl fmt::Debug for KSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements()).finish()
    }
}

impl fmt::Display for KSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.elements().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for KSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.elements())
    }
}

/// Lexicographic comparison of two subsets with the same `(n, k)`.
///
/// # Panics
///
/// When the shapes differ.
pub fn lex_compare(a: &KSubset, b: &KSubset) -> Ordering {
    assert!(
        a.n == b.n && a.k == b.k,
        "lex_compare on mismatched shapes ({}, {}) vs ({}, {})",
        a.n,
        a.k,
        b.n,
        b.k
    );
    let diff = a.bits ^ b.bits;
    if diff == 0 {
        Ordering::Equal
    } else if a.bits & (diff & diff.wrapping_neg()) != 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl PartialOrd for KSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.k)
            .cmp(&(other.n, other.k))
            .then_with(|| lex_compare(self, other))
    }
}

pub fn lex_rank(a: &KSubset) -> u64 {
    a.lex_rank()
}

/// Inverse of [`lex_rank`].
pub fn lex_unrank(n: u32, k: u32, index: u64) -> Result<KSubset> {
    check_shape(n, k)?;
    let size = small_binomial(n, k);
    if index >= size {
        return Err(Error::OutOfRange { index, size });
    }
    let mut rest = index;
    let mut bits = 0u64;
    let mut c = 0u32;
    for i in 0..k {
        loop {
            let block = small_binomial(n - c - 1, k - i - 1);
            if rest < block {
                break;
            }
            rest -= block;
            c += 1;
        }
        bits |= 1u64 << c;
        c += 1;
    }
    Ok(KSubset::from_bits_unchecked(n, k, bits))
}

pub fn are_disjoint(a: &KSubset, b: &KSubset) -> bool {
    debug_assert_eq!(a.n, b.n);
    a.is_disjoint(b)
}

/// All k-subsets of `[n]` in lexicographic order.
pub fn all_subsets(n: u32, k: u32) -> Result<Vec<KSubset>> {
    check_shape(n, k)?;
    let total = small_binomial(n, k) as usize;
    let mut out = Vec::with_capacity(total);
    // Lex order on ascending tuples: advance the last position that can move.
    let mut pos: Vec<u32> = (0..k).collect();
    loop {
        let bits = pos.iter().fold(0u64, |m, &p| m | (1u64 << p));
        out.push(KSubset::from_bits_unchecked(n, k, bits));
        let mut i = k as usize;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if pos[i] < n - k + i as u32 {
                break;
            }
        }
        pos[i] += 1;
        for j in i + 1..k as usize {
            pos[j] = pos[j - 1] + 1;
        }
    }
}

/// A duplicate-free family of k-subsets sharing one `(n, k)`, kept in
/// lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Family {
    n: u32,
    k: u32,
    members: Vec<KSubset>,
}

impl Family {
    pub fn empty(n: u32, k: u32) -> Result<Self> {
        check_shape(n, k)?;
        Ok(Family { n, k, members: Vec::new() })
    }

    pub fn new(n: u32, k: u32, mut members: Vec<KSubset>) -> Result<Self> {
        check_shape(n, k)?;
        if let Some(bad) = members.iter().find(|m| m.n() != n || m.k() != k) {
            return Err(Error::Mismatch(format!(
                "member {bad} has shape ({}, {}), family is ({n}, {k})",
                bad.n(),
                bad.k()
            )));
        }
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate member {}", w[0])));
        }
        Ok(Family { n, k, members })
    }

    pub fn from_ranks(n: u32, k: u32, ranks: impl IntoIterator<Item = u64>) -> Result<Self> {
        let members = ranks
            .into_iter()
            .map(|r| lex_unrank(n, k, r))
            .collect::<Result<Vec<_>>>()?;
        Family::new(n, k, members)
    }

    /// Members already sorted and distinct.
    pub(crate) fn from_sorted_unchecked(n: u32, k: u32, members: Vec<KSubset>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Family { n, k, members }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[KSubset] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, KSubset> {
        self.members.iter()
    }

    pub fn contains(&self, a: &KSubset) -> bool {
        a.n() == self.n && a.k() == self.k && self.members.binary_search(a).is_ok()
    }

    pub fn ranks(&self) -> Vec<u64> {
        self.members.iter().map(KSubset::lex_rank).collect()
    }

    pub fn is_subfamily_of(&self, other: &Family) -> bool {
        self.members.iter().all(|m| other.contains(m))
    }

    /// Members containing `x`, i.e. `A ∩ S_x`.
    pub fn restricted_to(&self, x: u32) -> impl Iterator<Item = &KSubset> + '_ {
        self.members.iter().filter(move |m| m.contains(x))
    }

    pub fn with_member(&self, a: KSubset) -> Result<Family> {
        let mut members = self.members.clone();
        members.push(a);
        Family::new(self.n, self.k, members)
    }
}

impl<'a> IntoIterator for &'a Family {
    type Item = &'a KSubset;
    type IntoIter = std::slice::Iter<'a, KSubset>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.members.iter()).finish()
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.members.iter())
    }
}
