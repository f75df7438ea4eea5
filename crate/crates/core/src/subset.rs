//! Subsets of `{1,...,d}` as bitmasks, plus the Moebius relations between
//! variance components and lower Sobol' indices.
//!
//! Index `j` lives at bit `j-1`. Every enumeration in the crate walks subsets
//! in ascending integer order of their bitmask.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{GsiError, Result};

/// Largest ambient dimension a mask may carry.
pub const MAX_DIM: usize = 20;

/// Largest dimension for which we enumerate the full power set.
pub const MAX_ENUM_DIM: usize = 12;

/// A subset `u` of `{1,...,d}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetMask {
    // field order matters for the derived Ord: masks sort by bits.
    bits: u32,
    d: u8,
}

/// Real values keyed by subset, in canonical order.
pub type SubsetMap = BTreeMap<SubsetMask, f64>;

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(GsiError::DimensionOutOfRange(d));
    }
    Ok(())
}

/// Rejects dimensions whose power set is too large to walk.
pub fn check_enumerable(d: usize) -> Result<()> {
    check_dim(d)?;
    if d > MAX_ENUM_DIM {
        return Err(GsiError::EnumerationTooLarge(d));
    }
    Ok(())
}

impl SubsetMask {
    pub fn new(bits: u64, d: usize) -> Result<Self> {
        check_dim(d)?;
        if bits >> d != 0 {
            return Err(GsiError::InvalidMask { bits, d });
        }
        Ok(Self { bits: bits as u32, d: d as u8 })
    }

    pub fn empty(d: usize) -> Result<Self> {
        Self::new(0, d)
    }

    pub fn full(d: usize) -> Result<Self> {
        Self::new((1u64 << d) - 1, d)
    }

    /// Builds a mask from 1-based indices. Duplicates are ignored.
    pub fn from_indices(indices: &[usize], d: usize) -> Result<Self> {
        check_dim(d)?;
        let mut bits = 0u64;
        for &j in indices {
            if j == 0 || j > d {
                return Err(GsiError::IndexOutOfRange { index: j, d });
            }
            bits |= 1 << (j - 1);
        }
        Self::new(bits, d)
    }

    /// `{j}` for a 1-based index.
    pub fn singleton(j: usize, d: usize) -> Result<Self> {
        Self::from_indices(&[j], d)
    }

    /// The prefix segment `(0, j] = {1,...,j}`; `j = 0` gives the empty set.
    pub fn prefix(j: usize, d: usize) -> Result<Self> {
        if j > d {
            return Err(GsiError::IndexOutOfRange { index: j, d });
        }
        Self::new((1u64 << j) - 1, d)
    }

    /// The suffix segment `(j, d] = {j+1,...,d}`.
    pub fn suffix(j: usize, d: usize) -> Result<Self> {
        Ok(Self::prefix(j, d)?.complement())
    }

    /// Parses the textual notation `[1,3,4]`, `1,3,4` or `[]`.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let body = text.trim();
        let body = body.strip_prefix('[').unwrap_or(body);
        let body = body.strip_suffix(']').unwrap_or(body);
        let mut indices = Vec::new();
        for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let j: usize = tok
                .parse()
                .map_err(|_| GsiError::Parse(format!("bad subset index `{tok}` in `{text}`")))?;
            indices.push(j);
        }
        Self::from_indices(&indices, d)
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn cardinality(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn is_full(self) -> bool {
        self.bits == self.full_bits()
    }

    #[inline]
    fn full_bits(self) -> u32 {
        ((1u64 << self.d) - 1) as u32
    }

    /// Whether 1-based index `j` is in the set.
    #[inline]
    pub fn contains(self, j: usize) -> bool {
        j >= 1 && j <= self.dim() && self.bits & (1 << (j - 1)) != 0
    }

    #[inline]
    pub fn contains_bit(self, bit: usize) -> bool {
        self.bits & (1 << bit) != 0
    }

    /// 1-based indices in increasing order.
    pub fn indices(self) -> Vec<usize> {
        (0..self.dim()).filter(|&b| self.contains_bit(b)).map(|b| b + 1).collect()
    }

    /// Smallest index, `None` for the empty set.
    pub fn min_index(self) -> Option<usize> {
        (self.bits != 0).then(|| self.bits.trailing_zeros() as usize + 1)
    }

    /// Largest index, `None` for the empty set.
    pub fn max_index(self) -> Option<usize> {
        (self.bits != 0).then(|| 32 - self.bits.leading_zeros() as usize)
    }

    pub fn complement(self) -> Self {
        Self { bits: !self.bits & self.full_bits(), d: self.d }
    }

    fn same_dim(self, other: Self) -> Result<()> {
        if self.d != other.d {
            return Err(GsiError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn union(self, other: Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { bits: self.bits | other.bits, d: self.d })
    }

    pub fn intersection(self, other: Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { bits: self.bits & other.bits, d: self.d })
    }

    /// `self - other`.
    pub fn difference(self, other: Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { bits: self.bits & !other.bits, d: self.d })
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.d == other.d && self.bits & !other.bits == 0
    }

    /// All subsets of `self`, ascending by bitmask value.
    pub fn subsets(self) -> Subsets {
        Subsets { within: self.bits, next: Some(0), d: self.d }
    }

    /// Every subset of `{1,...,d}`, ascending. Requires `d <= MAX_ENUM_DIM`.
    pub fn all(d: usize) -> Result<Subsets> {
        check_enumerable(d)?;
        Ok(Self::full(d)?.subsets())
    }
}

/// Symmetric difference `u ∪ v − u ∩ v`.
pub fn xor_set(u: SubsetMask, v: SubsetMask) -> Result<SubsetMask> {
    u.same_dim(v)?;
    Ok(SubsetMask { bits: u.bits ^ v.bits, d: u.d })
}

/// `(u ∩ v) ∪ (u^c ∩ v^c)`, the complement of [`xor_set`].
pub fn nxor_set(u: SubsetMask, v: SubsetMask) -> Result<SubsetMask> {
    Ok(xor_set(u, v)?.complement())
}

pub fn complement(u: SubsetMask) -> SubsetMask {
    u.complement()
}

/// Eagerly collected [`SubsetMask::subsets`].
pub fn subsets_of(w: SubsetMask) -> Vec<SubsetMask> {
    w.subsets().collect()
}

/// Ascending walk over the subsets of a fixed mask.
#[derive(Clone, Debug)]
pub struct Subsets {
    within: u32,
    next: Option<u32>,
    d: u8,
}

impl Iterator for Subsets {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        // next larger submask: fill the holes outside `within`, add one, mask back
        self.next = if cur == self.within {
            None
        } else {
            Some(((cur | !self.within).wrapping_add(1)) & self.within)
        };
        Some(SubsetMask { bits: cur, d: self.d })
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, j) in self.indices().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/d{}", self.d)
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Variance components from lower indices:
/// `sigma2[u] = sum_{v ⊆ u} (-1)^{|u-v|} lower[v]`, for every key of `lower`.
pub fn sigma_from_lower(lower: &SubsetMap) -> Result<SubsetMap> {
    let mut out = SubsetMap::new();
    for &u in lower.keys() {
        let mut acc = 0.0;
        for v in u.subsets() {
            let t = *lower.get(&v).ok_or(GsiError::MissingSubset(v))?;
            acc += sign(u.cardinality() - v.cardinality()) * t;
        }
        out.insert(u, acc);
    }
    Ok(out)
}

/// Lower indices from variance components: `lower[u] = sum_{v ⊆ u} sigma2[v]`.
pub fn lower_from_sigma(sigma: &SubsetMap) -> Result<SubsetMap> {
    let mut out = SubsetMap::new();
    for &u in sigma.keys() {
        let mut acc = 0.0;
        for v in u.subsets() {
            acc += *sigma.get(&v).ok_or(GsiError::MissingSubset(v))?;
        }
        out.insert(u, acc);
    }
    Ok(out)
}

/// In-place subset-sum transform on a dense table indexed by bitmask.
pub fn zeta_dense(values: &mut [f64]) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let mut bit = 1;
    while bit < n {
        for s in 0..n {
            if s & bit != 0 {
                values[s] += values[s ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// Inverse of [`zeta_dense`].
pub fn moebius_dense(values: &mut [f64]) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let mut bit = 1;
    while bit < n {
        for s in 0..n {
            if s & bit != 0 {
                values[s] -= values[s ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// Dense table (index = bits) to a [`SubsetMap`] over all subsets.
pub fn dense_to_map(values: &[f64], d: usize) -> SubsetMap {
    values
        .iter()
        .enumerate()
        .map(|(bits, &v)| (SubsetMask { bits: bits as u32, d: d as u8 }, v))
        .collect()
}
