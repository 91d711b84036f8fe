//! Simplicial cochains on the full simplex over `n` bodies, with coefficients
//! in the Euclidean space `E = R^d`.
//!
//! A configuration of `n` bodies is a 0-cochain (one vector of `E` per body).
//! Mutual differences live in the space `C^1` of 1-cochains: one vector per
//! unordered pair, extended skew-symmetrically (`z_ji = -z_ij`). The coboundary
//! `delta^0` sends a configuration to its difference cochain, and `delta^1`
//! tests the cocycle condition `z_ij + z_jk + z_ki = 0`. The mass-weighted
//! projection [`project_pm`] maps all of `C^1` orthogonally (in the `C^1`
//! mass-metric) onto the subspace `Z^1` of cocycles, which is exactly the
//! image of `delta^0`.
//!
//! Body indices are 0-based throughout; pairs `(i, j)` always satisfy `i < j`
//! and are stored in lexicographic order `(0,1), (0,2), ..., (n-2,n-1)`.

use nalgebra::DMatrix;

use crate::error::{CcError, Result};

/// Number of unordered pairs `C(n, 2)`.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Number of unordered triples `C(n, 3)`.
pub fn triple_count(n: usize) -> usize {
    n * (n - 1) * (n - 2) / 6
}

/// Flat lexicographic index of the pair `(i, j)` with `i < j < n`.
///
/// `(0,1) -> 0`, `(0,2) -> 1`, ..., `(n-2,n-1) -> C(n,2)-1`.
///
/// Panics if `i >= j` or `j >= n`, like out-of-range slice indexing.
#[inline]
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    assert!(i < j && j < n, "invalid pair ({i},{j}) for n={n}");
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Flat lexicographic index of the triple `(i, j, k)` with `i < j < k < n`.
///
/// Panics on out-of-order or out-of-range indices.
#[inline]
pub fn triple_index(i: usize, j: usize, k: usize, n: usize) -> usize {
    assert!(
        i < j && j < k && k < n,
        "invalid triple ({i},{j},{k}) for n={n}"
    );
    // triples starting below i, then those with first = i and second below j
    let mut idx = 0;
    for a in 0..i {
        idx += pair_count(n - 1 - a);
    }
    for b in (i + 1)..j {
        idx += n - 1 - b;
    }
    idx + (k - j - 1)
}

/// Positive masses normalized to sum 1; the original sum is kept as `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Masses {
    values: Vec<f64>,
    scale: f64,
}

impl Masses {
    /// Normalizes the given positive weights to total mass 1.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(CcError::InvalidMasses(format!(
                "need at least 2 masses, got {}",
                values.len()
            )));
        }
        for (j, &m) in values.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(CcError::InvalidMasses(format!(
                    "mass {j} is {m}; every mass must be strictly positive"
                )));
            }
        }
        let scale: f64 = values.iter().sum();
        let values = values.iter().map(|&m| m / scale).collect();
        Ok(Self { values, scale })
    }

    /// `n` equal masses `1/n`.
    pub fn equal(n: usize) -> Self {
        Self::new(&vec![1.0; n]).expect("n >= 2")
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Normalized mass of body `j`.
    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of the masses as originally supplied.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True when all masses coincide to machine precision.
    pub fn all_equal(&self) -> bool {
        let m0 = self.values[0];
        self.values.iter().all(|&m| (m - m0).abs() <= 1e-12)
    }
}

/// A 0-cochain: one vector of `E = R^d` per body. Doubles as a tangent vector
/// of configuration space. Points are stored flat, body `j` occupying
/// `data[j*d .. (j+1)*d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Configuration {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(CcError::InvalidParameter(format!(
                "n must be >= 2, got {n}"
            )));
        }
        if d < 1 {
            return Err(CcError::InvalidParameter(format!(
                "d must be >= 1, got {d}"
            )));
        }
        if data.len() != n * d {
            return Err(CcError::DimensionMismatch {
                context: "configuration data length",
                expected: n * d,
                found: data.len(),
            });
        }
        Ok(Self { n, d, data })
    }

    /// Builds from per-body points, each of length `d`.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(CcError::InvalidParameter(format!(
                "n must be >= 2, got {n}"
            )));
        }
        let d = points[0].len();
        let mut data = Vec::with_capacity(n * d);
        for p in points {
            if p.len() != d {
                return Err(CcError::DimensionMismatch {
                    context: "point dimension",
                    expected: d,
                    found: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Self::new(n, d, data)
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            data: vec![0.0; n * d],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Position of body `j`.
    #[inline]
    pub fn point(&self, j: usize) -> &[f64] {
        &self.data[j * self.d..(j + 1) * self.d]
    }

    #[inline]
    pub fn point_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.d..(j + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Euclidean distance between bodies `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest pairwise distance together with the closest pair.
    pub fn min_pair_distance(&self) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 1);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let r = self.distance(i, j);
                if r < best.0 {
                    best = (r, i, j);
                }
            }
        }
        best
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    /// Errors with the offending pair when any two bodies are closer than
    /// `rel_tol * diameter`.
    pub fn check_collision_free(&self, rel_tol: f64) -> Result<()> {
        let (r, i, j) = self.min_pair_distance();
        if r <= rel_tol * self.diameter() {
            return Err(CcError::Collision { i, j, distance: r });
        }
        Ok(())
    }

    /// Sorted multiset of pairwise distances (a relabeling- and
    /// rotation-invariant signature).
    pub fn sorted_distances(&self) -> Vec<f64> {
        let mut ds = Vec::with_capacity(pair_count(self.n));
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                ds.push(self.distance(i, j));
            }
        }
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ds
    }

    /// Componentwise `self + t * other`.
    pub fn add_scaled(&self, other: &Configuration, t: f64) -> Configuration {
        debug_assert_eq!(self.data.len(), other.data.len());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + t * b)
            .collect();
        Configuration {
            n: self.n,
            d: self.d,
            data,
        }
    }

    pub fn scaled(&self, t: f64) -> Configuration {
        Configuration {
            n: self.n,
            d: self.d,
            data: self.data.iter().map(|x| x * t).collect(),
        }
    }
}

/// A 1-cochain: one vector of `E` per unordered pair, skew-symmetric under
/// index swap. Only the `i < j` entries are stored, so skew symmetry cannot
/// be violated by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OneCochain {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl OneCochain {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            data: vec![0.0; pair_count(n) * d],
        }
    }

    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != pair_count(n) * d {
            return Err(CcError::DimensionMismatch {
                context: "one-cochain data length",
                expected: pair_count(n) * d,
                found: data.len(),
            });
        }
        Ok(Self { n, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Stored entry for `i < j`.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> &[f64] {
        let p = pair_index(i, j, self.n);
        &self.data[p * self.d..(p + 1) * self.d]
    }

    #[inline]
    pub fn pair_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let p = pair_index(i, j, self.n);
        &mut self.data[p * self.d..(p + 1) * self.d]
    }

    /// Skew-symmetric access: `entry(i, j) = -entry(j, i)`, and the diagonal
    /// `entry(i, i)` is the zero vector.
    pub fn entry(&self, i: usize, j: usize) -> Vec<f64> {
        if i == j {
            return vec![0.0; self.d];
        }
        if i < j {
            self.pair(i, j).to_vec()
        } else {
            self.pair(j, i).iter().map(|x| -x).collect()
        }
    }

    /// Adds `sign * entry(i, j)` into `out` without allocating.
    #[inline]
    pub fn accumulate(&self, i: usize, j: usize, sign: f64, out: &mut [f64]) {
        if i == j {
            return;
        }
        let (s, p) = if i < j {
            (sign, self.pair(i, j))
        } else {
            (-sign, self.pair(j, i))
        };
        for (o, x) in out.iter_mut().zip(p) {
            *o += s * x;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn add_scaled(&self, other: &OneCochain, t: f64) -> OneCochain {
        debug_assert_eq!(self.data.len(), other.data.len());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + t * b)
            .collect();
        OneCochain {
            n: self.n,
            d: self.d,
            data,
        }
    }
}

/// A 2-cochain: one vector of `E` per unordered triple, fully alternating
/// under index permutations. Only `i < j < k` entries are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoCochain {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl TwoCochain {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            data: vec![0.0; triple_count(n) * d],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Stored entry for `i < j < k`.
    #[inline]
    pub fn triple(&self, i: usize, j: usize, k: usize) -> &[f64] {
        let t = triple_index(i, j, k, self.n);
        &self.data[t * self.d..(t + 1) * self.d]
    }

    #[inline]
    pub fn triple_mut(&mut self, i: usize, j: usize, k: usize) -> &mut [f64] {
        let t = triple_index(i, j, k, self.n);
        &mut self.data[t * self.d..(t + 1) * self.d]
    }

    /// Alternating access: the entry at any permutation of a sorted triple is
    /// the stored entry times the permutation sign; repeated indices give zero.
    pub fn entry(&self, i: usize, j: usize, k: usize) -> Vec<f64> {
        if i == j || j == k || i == k {
            return vec![0.0; self.d];
        }
        let mut idx = [i, j, k];
        // sort the three indices, counting swaps
        let mut sign = 1.0;
        if idx[0] > idx[1] {
            idx.swap(0, 1);
            sign = -sign;
        }
        if idx[1] > idx[2] {
            idx.swap(1, 2);
            sign = -sign;
        }
        if idx[0] > idx[1] {
            idx.swap(0, 1);
            sign = -sign;
        }
        self.triple(idx[0], idx[1], idx[2])
            .iter()
            .map(|x| sign * x)
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Euclidean norm over all stored entries.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Coboundary `delta^0`: differences of a configuration, with the convention
/// that the stored entry at `(i, j)`, `i < j`, is `q_i - q_j`.
pub fn coboundary0(q: &Configuration) -> OneCochain {
    let (n, d) = (q.n(), q.d());
    let mut z = OneCochain::zeros(n, d);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (q.point(i), q.point(j));
            let e = z.pair_mut(i, j);
            for c in 0..d {
                e[c] = a[c] - b[c];
            }
        }
    }
    z
}

/// Coboundary `delta^1`: entry at `(i, j, k)` is `z_ij + z_jk + z_ki`.
/// Vanishes exactly on the image of [`coboundary0`].
pub fn coboundary1(z: &OneCochain) -> TwoCochain {
    let (n, d) = (z.n(), z.d());
    let mut w = TwoCochain::zeros(n, d);
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let out = w.triple_mut(i, j, k);
                let (zij, zjk, zik) = (z.pair(i, j), z.pair(j, k), z.pair(i, k));
                for c in 0..d {
                    // z_ki = -z_ik
                    out[c] = zij[c] + zjk[c] - zik[c];
                }
            }
        }
    }
    w
}

/// Mass-metric inner product on `C^0`: `sum_j m_j (v_j . w_j)`.
pub fn mass_inner_c0(v: &Configuration, w: &Configuration, m: &Masses) -> Result<f64> {
    check_same_shape(v.n(), v.d(), w.n(), w.d(), m.n())?;
    let mut acc = 0.0;
    for j in 0..v.n() {
        let (a, b) = (v.point(j), w.point(j));
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        acc += m.get(j) * dot;
    }
    Ok(acc)
}

/// Mass-norm on `C^0`.
pub fn mass_norm_c0(v: &Configuration, m: &Masses) -> Result<f64> {
    Ok(mass_inner_c0(v, v, m)?.sqrt())
}

/// Mass-metric inner product on `C^1`: `sum_{i<j} m_i m_j (v_ij . w_ij)`.
pub fn mass_inner_c1(v: &OneCochain, w: &OneCochain, m: &Masses) -> Result<f64> {
    check_same_shape(v.n(), v.d(), w.n(), w.d(), m.n())?;
    let mut acc = 0.0;
    for i in 0..v.n() {
        for j in (i + 1)..v.n() {
            let (a, b) = (v.pair(i, j), w.pair(i, j));
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            acc += m.get(i) * m.get(j) * dot;
        }
    }
    Ok(acc)
}

/// Mass-norm on `C^1`.
pub fn mass_norm_c1(v: &OneCochain, m: &Masses) -> Result<f64> {
    Ok(mass_inner_c1(v, v, m)?.sqrt())
}

fn check_same_shape(n1: usize, d1: usize, n2: usize, d2: usize, nm: usize) -> Result<()> {
    if n1 != n2 || n1 != nm {
        return Err(CcError::DimensionMismatch {
            context: "body count",
            expected: n1,
            found: if n1 != n2 { n2 } else { nm },
        });
    }
    if d1 != d2 {
        return Err(CcError::DimensionMismatch {
            context: "ambient dimension",
            expected: d1,
            found: d2,
        });
    }
    Ok(())
}

/// Orthogonal projection of `C^1` onto the cocycle subspace `Z^1`:
///
/// `(P_m Q)_ij = sum_{k not in {i,j}} m_k (Q_ik + Q_kj + Q_ji) + Q_ij`.
///
/// Fixes every cocycle, is idempotent, and is self-adjoint in the `C^1`
/// mass-metric.
pub fn project_pm(q: &OneCochain, m: &Masses) -> Result<OneCochain> {
    if q.n() != m.n() {
        return Err(CcError::DimensionMismatch {
            context: "body count",
            expected: q.n(),
            found: m.n(),
        });
    }
    let (n, d) = (q.n(), q.d());
    let mut out = OneCochain::zeros(n, d);
    let mut acc = vec![0.0; d];
    for i in 0..n {
        for j in (i + 1)..n {
            acc.iter_mut().for_each(|x| *x = 0.0);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let mk = m.get(k);
                q.accumulate(i, k, mk, &mut acc);
                q.accumulate(k, j, mk, &mut acc);
                q.accumulate(j, i, mk, &mut acc);
            }
            let qij = q.pair(i, j);
            let e = out.pair_mut(i, j);
            for c in 0..d {
                e[c] = acc[c] + qij[c];
            }
        }
    }
    Ok(out)
}

/// Dense matrix of [`project_pm`] on the `C(n,2)` pair coordinates for `d = 1`.
/// The projection has scalar coefficients, so for `d > 1` it acts blockwise
/// (Kronecker with the identity on `E`). Rank is `n - 1`.
///
/// Assembled directly from the coefficient pattern, independently of
/// `project_pm`, so the two serve as cross-checks of each other.
pub fn pm_matrix(n: usize, m: &Masses) -> DMatrix<f64> {
    assert!(n >= 2 && m.n() == n, "need n >= 2 matching masses");
    let np = pair_count(n);
    let mut a = DMatrix::zeros(np, np);
    for i in 0..n {
        for j in (i + 1)..n {
            let row = pair_index(i, j, n);
            // Q_ij and Q_ji terms collapse to (m_i + m_j) Q_ij
            a[(row, row)] += m.get(i) + m.get(j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let mk = m.get(k);
                // Q_ik contribution
                if i < k {
                    a[(row, pair_index(i, k, n))] += mk;
                } else {
                    a[(row, pair_index(k, i, n))] -= mk;
                }
                // Q_kj contribution
                if k < j {
                    a[(row, pair_index(k, j, n))] += mk;
                } else {
                    a[(row, pair_index(j, k, n))] -= mk;
                }
            }
        }
    }
    a
}

/// Mass-weighted center `sum_j m_j q_j` (masses sum to 1, so no division).
pub fn center_of_mass(q: &Configuration, m: &Masses) -> Vec<f64> {
    let d = q.d();
    let mut c = vec![0.0; d];
    for j in 0..q.n() {
        let p = q.point(j);
        let mj = m.get(j);
        for k in 0..d {
            c[k] += mj * p[k];
        }
    }
    c
}

/// Translates so the mass-weighted center sits at the origin. Leaves
/// [`coboundary0`] unchanged.
pub fn project_to_x(q: &Configuration, m: &Masses) -> Configuration {
    let c = center_of_mass(q, m);
    let mut out = q.clone();
    for j in 0..q.n() {
        let p = out.point_mut(j);
        for k in 0..q.d() {
            p[k] -= c[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_cochain(n: usize, d: usize, rng: &mut ChaCha8Rng) -> OneCochain {
        let data = (0..pair_count(n) * d)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        OneCochain::new(n, d, data).unwrap()
    }

    fn random_masses(n: usize, rng: &mut ChaCha8Rng) -> Masses {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        Masses::new(&v).unwrap()
    }

    fn random_config(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Configuration {
        let data = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        Configuration::new(n, d, data).unwrap()
    }

    #[test]
    fn pair_index_lexicographic() {
        assert_eq!(pair_index(0, 1, 3), 0);
        assert_eq!(pair_index(1, 2, 3), 2);
        assert_eq!(pair_index(0, 3, 4), 2);
        // full enumeration is bijective and ordered
        for n in 2..=8 {
            let mut seen = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    assert_eq!(pair_index(i, j, n), seen);
                    seen += 1;
                }
            }
            assert_eq!(seen, pair_count(n));
        }
    }

    #[test]
    #[should_panic]
    fn pair_index_rejects_equal() {
        pair_index(1, 1, 3);
    }

    #[test]
    #[should_panic]
    fn pair_index_rejects_out_of_range() {
        pair_index(0, 3, 3);
    }

    #[test]
    fn triple_index_lexicographic() {
        for n in 3..=8 {
            let mut seen = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        assert_eq!(triple_index(i, j, k, n), seen);
                        seen += 1;
                    }
                }
            }
            assert_eq!(seen, triple_count(n));
        }
    }

    #[test]
    fn masses_normalize_and_keep_scale() {
        let m = Masses::new(&[1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(m.values().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.scale(), 6.0);
        assert_relative_eq!(m.get(2), 0.5);
        assert!(Masses::new(&[1.0, 0.0]).is_err());
        assert!(Masses::new(&[1.0, -0.5]).is_err());
    }

    #[test]
    fn skew_access() {
        let mut z = OneCochain::zeros(3, 2);
        z.pair_mut(0, 1).copy_from_slice(&[1.0, -2.0]);
        assert_eq!(z.entry(1, 0), vec![-1.0, 2.0]);
        assert_eq!(z.entry(1, 1), vec![0.0, 0.0]);
    }

    #[test]
    fn two_cochain_alternating() {
        let mut w = TwoCochain::zeros(4, 1);
        w.triple_mut(0, 1, 2)[0] = 5.0;
        assert_eq!(w.entry(0, 1, 2), vec![5.0]);
        assert_eq!(w.entry(1, 0, 2), vec![-5.0]);
        assert_eq!(w.entry(2, 0, 1), vec![5.0]);
        assert_eq!(w.entry(0, 2, 1), vec![-5.0]);
        assert_eq!(w.entry(0, 0, 2), vec![0.0]);
    }

    #[test]
    fn coboundary0_two_bodies() {
        let q = Configuration::new(2, 1, vec![0.0, 3.0]).unwrap();
        let z = coboundary0(&q);
        assert_eq!(z.pair(0, 1), &[-3.0]);
    }

    #[test]
    fn coboundary0_hand_example() {
        let q =
            Configuration::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let z = coboundary0(&q);
        assert_eq!(z.pair(0, 1), &[-1.0, 0.0]);
        assert_eq!(z.pair(0, 2), &[0.0, -1.0]);
        assert_eq!(z.pair(1, 2), &[1.0, -1.0]);
    }

    #[test]
    fn coboundary_composition_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=7 {
            for d in 1..=3 {
                let q = random_config(n, d, &mut rng);
                let w = coboundary1(&coboundary0(&q));
                let scale = q.as_slice().iter().fold(0.0f64, |a, x| a.max(x.abs()));
                assert!(w.norm() <= 1e-14 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn coboundary1_hand_examples() {
        // n=3, d=1, z = (1, 1, 1): z_01 + z_12 + z_20 = 1 + 1 - 1
        let z = OneCochain::new(3, 1, vec![1.0, 1.0, 1.0]).unwrap();
        let w = coboundary1(&z);
        assert_eq!(w.triple(0, 1, 2), &[1.0]);

        // n=4, one nonzero entry z_01 = v: triples (0,1,k) carry v
        let mut z = OneCochain::zeros(4, 1);
        z.pair_mut(0, 1)[0] = 2.5;
        let w = coboundary1(&z);
        assert_eq!(w.triple(0, 1, 2), &[2.5]);
        assert_eq!(w.triple(0, 1, 3), &[2.5]);
        assert_eq!(w.triple(0, 2, 3), &[0.0]);
        assert_eq!(w.triple(1, 2, 3), &[0.0]);
    }

    #[test]
    fn mass_inner_c0_examples() {
        let m = Masses::new(&[1.0, 1.0]).unwrap();
        // unit vector at body 0 only, m_0 = 1/2
        let v = Configuration::new(2, 1, vec![1.0, 0.0]).unwrap();
        assert_relative_eq!(mass_inner_c0(&v, &v, &m).unwrap(), 0.5);
        // orthogonal per-body vectors
        let a = Configuration::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Configuration::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(mass_inner_c0(&a, &b, &m).unwrap(), 0.0);
        // v = w = ((1),(1)) with equal masses
        let v = Configuration::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(mass_inner_c0(&v, &v, &m).unwrap(), 1.0);
    }

    #[test]
    fn mass_inner_c1_single_entry() {
        let m = Masses::equal(3);
        let mut v = OneCochain::zeros(3, 2);
        v.pair_mut(0, 1).copy_from_slice(&[0.6, 0.8]);
        assert_relative_eq!(
            mass_inner_c1(&v, &v, &m).unwrap(),
            1.0 / 9.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn coboundary_isometry_on_centered_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(2..=8);
            let d = rng.random_range(1..=3);
            let m = random_masses(n, &mut rng);
            let q = project_to_x(&random_config(n, d, &mut rng), &m);
            let lhs = mass_norm_c1(&coboundary0(&q), &m).unwrap();
            let rhs = mass_norm_c0(&q, &m).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn project_pm_first_basis_vector_n3() {
        // first column of the 3x3 projection matrix
        let m = Masses::new(&[0.2, 0.3, 0.5]).unwrap();
        let mut q = OneCochain::zeros(3, 1);
        q.pair_mut(0, 1)[0] = 1.0;
        let p = project_pm(&q, &m).unwrap();
        assert_relative_eq!(p.pair(0, 1)[0], m.get(0) + m.get(1), epsilon = 1e-15);
        assert_relative_eq!(p.pair(0, 2)[0], m.get(1), epsilon = 1e-15);
        assert_relative_eq!(p.pair(1, 2)[0], -m.get(0), epsilon = 1e-15);
    }

    #[test]
    fn project_pm_fixes_coboundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(2..=8);
            let d = rng.random_range(1..=3);
            let m = random_masses(n, &mut rng);
            let z = coboundary0(&random_config(n, d, &mut rng));
            let p = project_pm(&z, &m).unwrap();
            let diff = p.add_scaled(&z, -1.0);
            let rel = mass_norm_c1(&diff, &m).unwrap() / mass_norm_c1(&z, &m).unwrap();
            assert!(rel <= 1e-13, "P fails to fix a cocycle: rel err {rel}");
        }
    }

    #[test]
    fn project_pm_idempotent_and_into_cocycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.random_range(3..=8);
            let d = rng.random_range(1..=3);
            let m = random_masses(n, &mut rng);
            let q = random_cochain(n, d, &mut rng);
            let p1 = project_pm(&q, &m).unwrap();
            let p2 = project_pm(&p1, &m).unwrap();
            let qn = mass_norm_c1(&q, &m).unwrap();
            let diff = p2.add_scaled(&p1, -1.0);
            assert!(mass_norm_c1(&diff, &m).unwrap() <= 1e-12 * qn);
            // image lies in Z^1
            assert!(coboundary1(&p1).norm() <= 1e-12 * qn.max(1.0));
        }
    }

    #[test]
    fn project_pm_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let n = rng.random_range(3..=8);
            let d = rng.random_range(1..=3);
            let m = random_masses(n, &mut rng);
            let v = random_cochain(n, d, &mut rng);
            let w = random_cochain(n, d, &mut rng);
            let lhs = mass_inner_c1(&v, &project_pm(&w, &m).unwrap(), &m).unwrap();
            let rhs = mass_inner_c1(&project_pm(&v, &m).unwrap(), &w, &m).unwrap();
            let bound = 1e-12 * mass_norm_c1(&v, &m).unwrap() * mass_norm_c1(&w, &m).unwrap();
            assert!((lhs - rhs).abs() <= bound.max(1e-15));
        }
    }

    #[test]
    fn pm_matrix_matches_displayed_n3() {
        let (m1, m2, m3) = (0.2, 0.3, 0.5);
        let m = Masses::new(&[m1, m2, m3]).unwrap();
        let a = pm_matrix(3, &m);
        let expected = [[m1 + m2, m3, -m3], [m2, m1 + m3, m2], [-m1, m1, m2 + m3]];
        for r in 0..3 {
            for c in 0..3 {
                assert_relative_eq!(a[(r, c)], expected[r][c], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn pm_matrix_equal_masses_n3() {
        let m = Masses::equal(3);
        let a = pm_matrix(3, &m);
        let t = 1.0 / 3.0;
        let expected = [[2.0 * t, t, -t], [t, 2.0 * t, t], [-t, t, 2.0 * t]];
        for r in 0..3 {
            for c in 0..3 {
                assert_relative_eq!(a[(r, c)], expected[r][c], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn pm_matrix_agrees_with_project_pm_on_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 2..=8 {
            let m = random_masses(n, &mut rng);
            let a = pm_matrix(n, &m);
            for col in 0..pair_count(n) {
                let mut q = OneCochain::zeros(n, 1);
                q.as_mut_slice()[col] = 1.0;
                let p = project_pm(&q, &m).unwrap();
                for row in 0..pair_count(n) {
                    assert!((a[(row, col)] - p.as_slice()[row]).abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn pm_matrix_rank_is_n_minus_1() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=8 {
            let m = random_masses(n, &mut rng);
            let a = pm_matrix(n, &m);
            let svd = a.svd(false, false);
            let smax = svd.singular_values.max();
            let rank = svd
                .singular_values
                .iter()
                .filter(|&&s| s > 1e-10 * smax)
                .count();
            assert_eq!(rank, n - 1, "rank of P_m for n={n}");
        }
    }

    #[test]
    fn project_pm_image_equals_coboundary_image() {
        // least-squares recovery of a preimage under delta^0
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let n = rng.random_range(3..=6);
            let m = random_masses(n, &mut rng);
            let q = random_cochain(n, 1, &mut rng);
            let p = project_pm(&q, &m).unwrap();
            // matrix of delta^0 on d=1: rows indexed by pairs, cols by bodies
            let np = pair_count(n);
            let mut d0 = DMatrix::zeros(np, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let r = pair_index(i, j, n);
                    d0[(r, i)] = 1.0;
                    d0[(r, j)] = -1.0;
                }
            }
            let rhs = nalgebra::DVector::from_column_slice(p.as_slice());
            let x = d0.clone().svd(true, true).solve(&rhs, 1e-12).unwrap();
            let resid = (&d0 * &x - &rhs).norm();
            let qn = mass_norm_c1(&q, &m).unwrap();
            assert!(
                resid <= 1e-10 * qn.max(1.0),
                "P_m image escapes Im(delta^0)"
            );
        }
    }

    #[test]
    fn center_of_mass_examples() {
        let m = Masses::new(&[1.0, 1.0]).unwrap();
        let q = Configuration::new(2, 1, vec![-1.0, 1.0]).unwrap();
        assert_relative_eq!(center_of_mass(&q, &m)[0], 0.0);

        let q = Configuration::new(2, 2, vec![3.0, -2.0, 3.0, -2.0]).unwrap();
        let c = center_of_mass(&q, &m);
        assert_relative_eq!(c[0], 3.0);
        assert_relative_eq!(c[1], -2.0);

        let m = Masses::new(&[0.5, 0.25, 0.25]).unwrap();
        let q = Configuration::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        assert_relative_eq!(center_of_mass(&q, &m)[0], 0.75);
    }

    #[test]
    fn project_to_x_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = random_masses(4, &mut rng);
        let q = random_config(4, 3, &mut rng);
        let centered = project_to_x(&q, &m);
        let c = center_of_mass(&centered, &m);
        let scale = q.as_slice().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(c.iter().all(|x| x.abs() <= 1e-14 * scale.max(1.0)));
        // idempotent up to rounding of an already-tiny center
        let twice = project_to_x(&centered, &m);
        for (a, b) in centered.as_slice().iter().zip(twice.as_slice()) {
            assert!((a - b).abs() <= 1e-14 * scale.max(1.0));
        }
        // differences unchanged
        let (za, zb) = (coboundary0(&q), coboundary0(&centered));
        for (a, b) in za.as_slice().iter().zip(zb.as_slice()) {
            assert!((a - b).abs() <= 1e-15 * scale.max(1.0));
        }
    }
}
