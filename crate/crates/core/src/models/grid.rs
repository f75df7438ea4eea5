use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Model, SobolTable};
use crate::error::{GsiError, Result};
use crate::subset::{check_enumerable, dense_to_map, lower_from_sigma, SubsetMap, SubsetMask};

/// Largest lattice `m^d` accepted by [`brute_force_anova`].
pub const ANOVA_CAP: u128 = 1_000_000;
/// Largest double lattice `m^(2d)` accepted by [`brute_force_theta`].
pub const THETA_CAP: u128 = 100_000_000;

/// A function tabulated on the `m^d` lattice; `x_j` maps to level `floor(m x_j)`,
/// clamped to `m - 1`. Values are row-major with the last index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    d: usize,
    m: usize,
    values: Vec<f64>,
}

fn lattice_size(m: usize, d: usize) -> u128 {
    (m as u128).saturating_pow(d as u32)
}

impl GridFunction {
    pub fn new(d: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        check_enumerable(d)?;
        if m < 2 {
            return Err(GsiError::InvalidParameter(format!("grid needs m >= 2, got {m}")));
        }
        let size = lattice_size(m, d);
        if size > ANOVA_CAP * 100 {
            return Err(GsiError::SizeCap { size, cap: ANOVA_CAP * 100 });
        }
        if values.len() as u128 != size {
            return Err(GsiError::InvalidParameter(format!(
                "grid with d={d}, m={m} needs {size} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GsiError::InvalidParameter("grid values must be finite".into()));
        }
        Ok(Self { d, m, values })
    }

    /// Tabulates `f(levels)` over the lattice.
    pub fn from_levels(d: usize, m: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_enumerable(d)?;
        let size = lattice_size(m, d);
        if size > ANOVA_CAP * 100 {
            return Err(GsiError::SizeCap { size, cap: ANOVA_CAP * 100 });
        }
        let mut levels = vec![0usize; d];
        let mut values = Vec::with_capacity(size as usize);
        for idx in 0..size as usize {
            decode(idx, m, &mut levels);
            values.push(f(&levels));
        }
        Self::new(d, m, values)
    }

    /// Discretizes a model at cell midpoints.
    pub fn from_model(model: &dyn Model, m: usize) -> Result<Self> {
        let d = model.dim();
        let mut x = vec![0.0; d];
        Self::from_levels(d, m, |lv| {
            for (xj, &l) in x.iter_mut().zip(lv) {
                *xj = (l as f64 + 0.5) / m as f64;
            }
            model.value(&x)
        })
    }

    /// Independent standard-uniform values drawn from a seeded generator.
    pub fn random(d: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_levels(d, m, |_| rng.gen::<f64>())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn levels(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at lattice coordinates.
    pub fn at(&self, levels: &[usize]) -> f64 {
        let mut idx = 0;
        for &l in levels {
            idx = idx * self.m + l;
        }
        self.values[idx]
    }

    #[inline]
    fn level(&self, x: f64) -> usize {
        ((self.m as f64 * x) as usize).min(self.m - 1)
    }
}

/// Row-major lattice index to per-axis levels.
fn decode(mut idx: usize, m: usize, levels: &mut [usize]) {
    for l in levels.iter_mut().rev() {
        *l = idx % m;
        idx /= m;
    }
}

impl Model for GridFunction {
    fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        for &xj in x {
            idx = idx * self.m + self.level(xj);
        }
        self.values[idx]
    }
}

/// Exact ANOVA of a grid function under the uniform lattice measure.
#[derive(Clone, Debug, PartialEq)]
pub struct AnovaTable {
    pub d: usize,
    pub mu: f64,
    pub total_variance: f64,
    /// Every subset, with `sigma[∅] = 0`.
    pub sigma: SubsetMap,
}

impl AnovaTable {
    pub fn sobol_table(&self) -> Result<SobolTable> {
        Ok(SobolTable { d: self.d, mu: self.mu, lower: lower_from_sigma(&self.sigma)? })
    }

    /// `sum_{v ⊇ w} sigma2_v`.
    pub fn superset(&self, w: SubsetMask) -> f64 {
        self.sigma.iter().filter(|(v, _)| w.is_subset_of(**v)).map(|(_, s)| s).sum()
    }
}

/// Exact `mu` and every `sigma2_u` of a grid function.
///
/// Each axis of the value tensor is replaced by `m + 1` slots: the axis mean,
/// then the `m` deviations from it. After all axes are transformed, the entries
/// whose residual axes are exactly `u` tabulate the ANOVA term `f_u`.
pub fn brute_force_anova(gf: &GridFunction) -> Result<AnovaTable> {
    let (d, m) = (gf.d, gf.m);
    let size = lattice_size(m, d);
    if size > ANOVA_CAP {
        return Err(GsiError::SizeCap { size, cap: ANOVA_CAP });
    }
    let mut shape = vec![m; d];
    let mut data = gf.values.clone();
    for axis in 0..d {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut out = vec![0.0; outer * (m + 1) * inner];
        for o in 0..outer {
            for i in 0..inner {
                let at = |l: usize| data[(o * m + l) * inner + i];
                let mean = (0..m).map(at).sum::<f64>() / m as f64;
                out[(o * (m + 1)) * inner + i] = mean;
                for l in 0..m {
                    out[(o * (m + 1) + 1 + l) * inner + i] = at(l) - mean;
                }
            }
        }
        shape[axis] = m + 1;
        data = out;
    }

    let mut sigma = vec![0.0; 1 << d];
    let mut slots = vec![0usize; d];
    for (idx, &v) in data.iter().enumerate() {
        decode(idx, m + 1, &mut slots);
        let mut bits = 0usize;
        for (axis, &s) in slots.iter().enumerate() {
            if s > 0 {
                bits |= 1 << axis;
            }
        }
        if bits != 0 {
            sigma[bits] += v * v;
        }
    }
    for (bits, s) in sigma.iter_mut().enumerate() {
        *s /= (m as f64).powi(bits.count_ones() as i32);
    }

    let mu = data[0];
    let n = gf.values.len() as f64;
    let total_variance = gf.values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    Ok(AnovaTable { d, mu, total_variance, sigma: dense_to_map(&sigma, d) })
}

/// `Theta_uv`: the average of `f(x_u:z_-u) f(x_v:z_-v)` over all lattice pairs `(x, z)`.
pub fn brute_force_theta(gf: &GridFunction, u: SubsetMask, v: SubsetMask) -> Result<f64> {
    let (d, m) = (gf.d, gf.m);
    for s in [u, v] {
        if s.dim() != d {
            return Err(GsiError::DimensionMismatch { left: d, right: s.dim() });
        }
    }
    let size = lattice_size(m, d).saturating_pow(2);
    if size > THETA_CAP {
        return Err(GsiError::SizeCap { size, cap: THETA_CAP });
    }
    let n = lattice_size(m, d) as usize;
    // part(s)[idx] is the lattice index contribution of the axes in s
    let part = |s: SubsetMask| -> Vec<usize> {
        let mut levels = vec![0usize; d];
        (0..n)
            .map(|idx| {
                decode(idx, m, &mut levels);
                let mut acc = 0;
                for (axis, &l) in levels.iter().enumerate() {
                    acc = acc * m + if s.contains_bit(axis) { l } else { 0 };
                }
                acc
            })
            .collect()
    };
    let (xu, zu) = (part(u), part(u.complement()));
    let (xv, zv) = (part(v), part(v.complement()));
    let mut total = 0.0;
    for x in 0..n {
        let mut row = 0.0;
        for z in 0..n {
            row += gf.values[xu[x] + zu[z]] * gf.values[xv[x] + zv[z]];
        }
        total += row;
    }
    Ok(total / (n as f64 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::nxor_set;

    fn s(ix: &[usize], d: usize) -> SubsetMask {
        SubsetMask::from_indices(ix, d).unwrap()
    }

    /// Literal ANOVA recursion: f_u = avg over -u of (f - sum_{v ⊊ u} f_v).
    fn naive_anova(gf: &GridFunction) -> SubsetMap {
        let (d, m) = (gf.dim(), gf.levels());
        let n = gf.values().len();
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); 1 << d];
        let mut levels = vec![0usize; d];
        let mut out = SubsetMap::new();
        for u in SubsetMask::all(d).unwrap() {
            let mut resid = gf.values().to_vec();
            for v in u.subsets().filter(|&v| v != u) {
                for (r, t) in resid.iter_mut().zip(&terms[v.bits() as usize]) {
                    *r -= t;
                }
            }
            // average over coordinates outside u
            let mut sums = vec![0.0; n];
            let mut counts = vec![0usize; n];
            let key = |levels: &[usize]| {
                levels.iter().enumerate().fold(0, |acc, (a, &l)| acc * m + if u.contains_bit(a) { l } else { 0 })
            };
            for idx in 0..n {
                decode(idx, m, &mut levels);
                sums[key(&levels)] += resid[idx];
                counts[key(&levels)] += 1;
            }
            let fu: Vec<f64> = (0..n)
                .map(|idx| {
                    decode(idx, m, &mut levels);
                    let k = key(&levels);
                    sums[k] / counts[k] as f64
                })
                .collect();
            let var = if u.is_empty() { 0.0 } else { fu.iter().map(|v| v * v).sum::<f64>() / n as f64 };
            out.insert(u, var);
            terms[u.bits() as usize] = fu;
        }
        out
    }

    #[test]
    fn lattice_lookup() {
        let g = GridFunction::new(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.eval(&[0.7, 0.1]).unwrap(), 2.0);
        assert_eq!(g.eval(&[1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(g.eval(&[0.0, 0.5]).unwrap(), 1.0);
        assert_eq!(g.at(&[1, 0]), 2.0);
    }

    #[test]
    fn additive_grid_anova() {
        let g = GridFunction::new(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let a = brute_force_anova(&g).unwrap();
        assert!((a.mu - 1.5).abs() < 1e-15);
        assert!((a.sigma[&s(&[1], 2)] - 1.0).abs() < 1e-15);
        assert!((a.sigma[&s(&[2], 2)] - 0.25).abs() < 1e-15);
        assert!(a.sigma[&s(&[1, 2], 2)].abs() < 1e-15);
    }

    #[test]
    fn constant_grid_has_no_variance() {
        let g = GridFunction::new(3, 2, vec![4.0; 8]).unwrap();
        let a = brute_force_anova(&g).unwrap();
        assert!(a.sigma.values().all(|v| v.abs() < 1e-15));
        assert_eq!(a.mu, 4.0);
    }

    #[test]
    fn matches_literal_recursion() {
        for (d, m, seed) in [(1, 3, 1), (2, 3, 2), (3, 3, 3), (3, 4, 4), (4, 2, 5)] {
            let g = GridFunction::random(d, m, seed).unwrap();
            let fast = brute_force_anova(&g).unwrap();
            let slow = naive_anova(&g);
            for (u, v) in &slow {
                assert!((fast.sigma[u] - v).abs() < 1e-12, "d={d} m={m} {u}");
            }
            let summed: f64 = fast.sigma.values().sum();
            assert!((summed - fast.total_variance).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_edge_cases() {
        let g = GridFunction::random(2, 3, 11).unwrap();
        let a = brute_force_anova(&g).unwrap();
        let full = SubsetMask::full(2).unwrap();
        let empty = SubsetMask::empty(2).unwrap();
        let second = brute_force_theta(&g, full, full).unwrap();
        assert!((second - (a.mu * a.mu + a.total_variance)).abs() < 1e-12);
        let indep = brute_force_theta(&g, empty, full).unwrap();
        assert!((indep - a.mu * a.mu).abs() < 1e-12);
    }

    #[test]
    fn theta_matches_nxor_identity() {
        let g = GridFunction::random(2, 3, 12).unwrap();
        let t = brute_force_anova(&g).unwrap().sobol_table().unwrap();
        for u in SubsetMask::all(2).unwrap() {
            for v in SubsetMask::all(2).unwrap() {
                let th = brute_force_theta(&g, u, v).unwrap();
                let want = t.mu * t.mu + t.lower[&nxor_set(u, v).unwrap()];
                assert!((th - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn caps_and_validation() {
        assert!(GridFunction::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GridFunction::new(2, 1, vec![0.0]).is_err());
        assert!(GridFunction::new(1, 2, vec![0.0, f64::INFINITY]).is_err());
        let big = GridFunction::from_levels(3, 101, |_| 0.0).unwrap();
        assert!(matches!(brute_force_anova(&big), Err(GsiError::SizeCap { .. })));
        let mid = GridFunction::from_levels(3, 22, |_| 0.0).unwrap();
        let full = SubsetMask::full(3).unwrap();
        assert!(matches!(brute_force_theta(&mid, full, full), Err(GsiError::SizeCap { .. })));
    }

    #[test]
    fn random_is_seeded() {
        assert_eq!(GridFunction::random(2, 3, 9).unwrap(), GridFunction::random(2, 3, 9).unwrap());
        assert_ne!(GridFunction::random(2, 3, 9).unwrap(), GridFunction::random(2, 3, 10).unwrap());
    }
}
