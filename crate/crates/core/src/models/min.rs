use super::{index_from_lower, IndexKind, LowerOracle, Model};
use crate::error::{GsiError, Result};
use crate::subset::{SubsetMask, MAX_DIM};

/// `f(x) = min_j x_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinModel {
    d: usize,
}

impl MinModel {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(GsiError::DimensionOutOfRange(d));
        }
        Ok(Self { d })
    }

    pub fn total_variance(&self) -> f64 {
        let d = self.d as f64;
        d / ((d + 1.0).powi(2) * (d + 2.0))
    }

    /// Everything except `lower`, `mean` and `total_variance` goes through
    /// Moebius sums and so needs `d <= MAX_ENUM_DIM` where the full power set is walked.
    pub fn exact_index(&self, kind: IndexKind, u: SubsetMask) -> Result<f64> {
        index_from_lower(self, kind, u)
    }
}

impl LowerOracle for MinModel {
    fn oracle_dim(&self) -> usize {
        self.d
    }

    fn mean(&self) -> f64 {
        1.0 / (self.d as f64 + 1.0)
    }

    /// `|u| / ((d+1)² (2d - |u| + 2))`.
    fn lower(&self, u: SubsetMask) -> Result<f64> {
        if u.dim() != self.d {
            return Err(GsiError::DimensionMismatch { left: self.d, right: u.dim() });
        }
        let d = self.d as f64;
        let k = u.cardinality() as f64;
        Ok(k / ((d + 1.0).powi(2) * (2.0 * d - k + 2.0)))
    }
}

impl Model for MinModel {
    fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(ix: &[usize], d: usize) -> SubsetMask {
        SubsetMask::from_indices(ix, d).unwrap()
    }

    #[test]
    fn eval_picks_smallest() {
        let m = MinModel::new(5).unwrap();
        assert_eq!(m.eval(&[0.9, 0.2, 0.5, 0.7, 0.3]).unwrap(), 0.2);
    }

    #[test]
    fn d5_values() {
        let m = MinModel::new(5).unwrap();
        assert!((m.lower(s(&[2, 4, 5], 5)).unwrap() - 1.0 / 108.0).abs() < 1e-16);
        let full = SubsetMask::full(5).unwrap();
        assert!((m.lower(full).unwrap() - 5.0 / 252.0).abs() < 1e-16);
        assert!((m.total_variance() - 5.0 / 252.0).abs() < 1e-16);
        let sig = m.exact_index(IndexKind::Sigma, s(&[1, 2, 3], 5)).unwrap();
        assert!((sig - 1.0 / 5940.0).abs() < 1e-16);
        let md = m.exact_index(IndexKind::MeanDimension, full).unwrap();
        assert!((md - 1.5).abs() < 1e-13);
        let up = m.exact_index(IndexKind::Upper, s(&[3], 5)).unwrap();
        assert!((up - 1.0 / 168.0).abs() < 1e-16);
        assert_eq!(m.exact_index(IndexKind::Mean, full).unwrap(), 1.0 / 6.0);
    }

    #[test]
    fn superset_of_full_set_is_top_component() {
        let m = MinModel::new(4).unwrap();
        let full = SubsetMask::full(4).unwrap();
        let a = m.exact_index(IndexKind::Superset, full).unwrap();
        let b = m.exact_index(IndexKind::Sigma, full).unwrap();
        assert!((a - b).abs() < 1e-16);
        let empty = SubsetMask::empty(4).unwrap();
        let total = m.exact_index(IndexKind::Superset, empty).unwrap();
        assert!((total - m.total_variance()).abs() < 1e-16);
    }

    #[test]
    fn moebius_expansions_cap_dimension() {
        let m = MinModel::new(15).unwrap();
        let u = s(&[1], 15);
        assert!(m.exact_index(IndexKind::Lower, u).is_ok());
        assert!(matches!(m.exact_index(IndexKind::Superset, u), Err(GsiError::EnumerationTooLarge(15))));
    }
}
