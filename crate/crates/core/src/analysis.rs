//! Hessians, Morse data and geometric verifiers.
//!
//! A central configuration at mass-norm `r` is a critical point of the
//! restriction of `U` to the inertia ellipsoid `S_r`, and the Hessian of that
//! restriction is the restriction of the Hessian of
//! `F(q) = U(q) - (lambda/2) |q|_M^2` to the tangent space of `S_r`. At the
//! `lambda = -2` scale, the nonzero spectrum of the `C^0` Hessian `H` and the
//! nonzero spectrum of the Hessian `H~` of `f_tilde . P_m` on `C^1` coincide
//! once the translation eigenvalue `2` (multiplicity `d`) is removed from
//! `H`; [`spectra_correspondence`] checks this numerically.
//!
//! The triple sums `Q_ijk = Q_ij + Q_jk + Q_ki` of force-like terms vanish
//! exactly on equilateral non-collinear triples and align with the edge
//! `q_ij` exactly when the triangle is isosceles at the third vertex;
//! [`triple_q`] and [`classify_geometry`] turn that into verifiable reports.

use nalgebra::{DMatrix, DVector};

use crate::cochain::{
    coboundary0, coboundary1, pair_index, pm_matrix, Configuration, Masses, OneCochain,
};
use crate::error::{CcError, Result};
use crate::potential::{psi_gamma, PotentialParams};
use crate::solvers::{rescale_to_lambda, CCSolution};

/// Which space and metric a symmetric operator lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumContext {
    /// Full `nd x nd` Hessian on `C^0` in the mass-metric.
    C0Full,
    /// Hessian of `f_tilde . P_m` on `C^1` in the pair mass-metric.
    C1Composed,
    /// Hessian of `U` restricted to the tangent space of the inertia
    /// ellipsoid, expressed in an orthonormal tangent basis.
    SphereRestricted,
}

impl SpectrumContext {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumContext::C0Full => "c0_full",
            SpectrumContext::C1Composed => "c1_composed",
            SpectrumContext::SphereRestricted => "sphere_restricted",
        }
    }
}

/// A symmetric bilinear form together with the diagonal metric in whose
/// geometry its eigenvalues are to be read. Eigenvalues come from the
/// generalized problem `B v = mu D v`, solved by symmetrizing with the exact
/// diagonal square root.
#[derive(Debug, Clone)]
pub struct MetricOperator {
    pub matrix: DMatrix<f64>,
    pub metric: DVector<f64>,
    pub context: SpectrumContext,
}

impl MetricOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `D^{-1/2} B D^{-1/2}`, whose ordinary spectrum equals the metric
    /// spectrum of the operator.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.dim();
        let inv_sqrt: Vec<f64> = self.metric.iter().map(|&w| 1.0 / w.sqrt()).collect();
        DMatrix::from_fn(n, n, |r, c| inv_sqrt[r] * self.matrix[(r, c)] * inv_sqrt[c])
    }
}

/// Eigenvalues sorted ascending, with the Morse index (count below
/// `-zero_threshold`) and nullity (count within `+-zero_threshold`).
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub nullity: usize,
    pub zero_threshold: f64,
    pub context: SpectrumContext,
}

impl SpectrumReport {
    /// Eigenvalues outside the zero band.
    pub fn nonzero(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|e| e.abs() > self.zero_threshold)
            .collect()
    }
}

/// Euclidean Hessian of `U` as a dense `nd x nd` matrix of second partials.
fn hessian_u_matrix(q: &Configuration, m: &Masses, p: &PotentialParams) -> DMatrix<f64> {
    let (n, d) = (q.n(), q.d());
    let alpha = p.alpha();
    let mut h = DMatrix::zeros(n * d, n * d);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = q.distance(i, j);
            let w = m.get(i) * m.get(j) * r.powf(-alpha - 2.0);
            // pair block: radial coefficient alpha(alpha+1), tangential -alpha
            let radial = alpha * (alpha + 1.0) * w;
            let tangential = -alpha * w;
            let (a, b) = (q.point(i), q.point(j));
            for c1 in 0..d {
                for c2 in 0..d {
                    let u1 = (a[c1] - b[c1]) / r;
                    let u2 = (a[c2] - b[c2]) / r;
                    let mut block = (radial - tangential) * u1 * u2;
                    if c1 == c2 {
                        block += tangential;
                    }
                    h[(i * d + c1, i * d + c2)] += block;
                    h[(j * d + c1, j * d + c2)] += block;
                    h[(i * d + c1, j * d + c2)] -= block;
                    h[(j * d + c1, i * d + c2)] -= block;
                }
            }
        }
    }
    h
}

/// Diagonal of the mass-metric on `C^0` in flat coordinates.
fn c0_metric(m: &Masses, d: usize) -> DVector<f64> {
    let n = m.n();
    DVector::from_fn(n * d, |idx, _| m.get(idx / d))
}

/// Diagonal of the mass-metric on `C^1` in flat pair coordinates.
fn c1_metric(m: &Masses, d: usize) -> DVector<f64> {
    let n = m.n();
    let mut w = Vec::with_capacity(crate::cochain::pair_count(n) * d);
    for i in 0..n {
        for j in (i + 1)..n {
            for _ in 0..d {
                w.push(m.get(i) * m.get(j));
            }
        }
    }
    DVector::from_vec(w)
}

/// Hessian of `F(q) = U(q) - (lambda/2) |q|_M^2` on `C^0`, as a
/// mass-metric-self-adjoint operator. With `lambda = -2` this is the Hessian
/// of `U + |.|_M^2`.
pub fn hessian_f(
    q: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    lambda: f64,
) -> Result<MetricOperator> {
    q.check_collision_free(p.collision_rel_tol())?;
    let d = q.d();
    let mut b = hessian_u_matrix(q, m, p);
    let metric = c0_metric(m, d);
    for idx in 0..b.nrows() {
        b[(idx, idx)] -= lambda * metric[idx];
    }
    Ok(MetricOperator {
        matrix: b,
        metric,
        context: SpectrumContext::C0Full,
    })
}

/// Euclidean Hessian of `f_tilde` on flat `C^1` coordinates: block-diagonal,
/// one `d x d` block per pair.
fn hessian_f_tilde_matrix(z: &OneCochain, m: &Masses, p: &PotentialParams) -> Result<DMatrix<f64>> {
    let (n, d) = (z.n(), z.d());
    let alpha = p.alpha();
    let np = crate::cochain::pair_count(n);
    let mut h = DMatrix::zeros(np * d, np * d);
    for i in 0..n {
        for j in (i + 1)..n {
            let e = z.pair(i, j);
            let r2: f64 = e.iter().map(|v| v * v).sum();
            if r2 == 0.0 {
                return Err(CcError::Collision {
                    i,
                    j,
                    distance: 0.0,
                });
            }
            let r = r2.sqrt();
            let w = m.get(i) * m.get(j);
            // phi(r) = r^-alpha + r^2
            let radial = w * (alpha * (alpha + 1.0) * r.powf(-alpha - 2.0) + 2.0);
            let tangential = w * (-alpha * r.powf(-alpha - 2.0) + 2.0);
            let off = pair_index(i, j, n) * d;
            for c1 in 0..d {
                for c2 in 0..d {
                    let u1 = e[c1] / r;
                    let u2 = e[c2] / r;
                    let mut block = (radial - tangential) * u1 * u2;
                    if c1 == c2 {
                        block += tangential;
                    }
                    h[(off + c1, off + c2)] = block;
                }
            }
        }
    }
    Ok(h)
}

/// Hessian of the composition `f_tilde . P_m` at a cocycle `z`, self-adjoint
/// in the `C^1` mass-metric. The kernel of `P_m` contributes
/// `dim C^1 - d(n-1)` zero eigenvalues.
pub fn hessian_composed(z: &OneCochain, m: &Masses, p: &PotentialParams) -> Result<MetricOperator> {
    let (n, d) = (z.n(), z.d());
    let znorm = z.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    let cob = coboundary1(z).norm();
    if cob > 1e-8 * znorm.max(1e-300) {
        return Err(CcError::NotCocycle {
            coboundary_norm: cob,
        });
    }
    let bf = hessian_f_tilde_matrix(z, m, p)?;
    let pflat = pm_matrix(n, m).kronecker(&DMatrix::identity(d, d));
    let b = pflat.transpose() * bf * &pflat;
    Ok(MetricOperator {
        matrix: b,
        metric: c1_metric(m, d),
        context: SpectrumContext::C1Composed,
    })
}

/// Hessian of `U` restricted to the tangent space of the inertia ellipsoid
/// at `q`, expressed in an orthonormal basis of that tangent space (so the
/// metric is the identity and the radial direction is removed exactly rather
/// than projected to a spurious zero).
pub fn sphere_restricted_hessian(
    q: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    lambda: f64,
) -> Result<MetricOperator> {
    let full = hessian_f(q, m, p, lambda)?;
    let s = full.symmetrized();
    let nd = s.nrows();

    // radial direction in symmetrized coordinates
    let mut y = DVector::from_column_slice(q.as_slice());
    for idx in 0..nd {
        y[idx] *= full.metric[idx].sqrt();
    }
    let ynorm = y.norm();
    if ynorm == 0.0 {
        return Err(CcError::Degenerate(
            "zero configuration has no sphere tangent".into(),
        ));
    }
    y /= ynorm;

    // Householder reflector swapping span(y) with span(e1); its remaining
    // columns form an orthonormal basis of the tangent space
    let sigma = if y[0] >= 0.0 { -1.0 } else { 1.0 };
    let mut v = y.clone();
    v[0] -= sigma;
    let vnorm2 = v.norm_squared();
    let mut basis = DMatrix::zeros(nd, nd - 1);
    for col in 1..nd {
        let proj = 2.0 * v[col] / vnorm2;
        for row in 0..nd {
            let e = if row == col { 1.0 } else { 0.0 };
            basis[(row, col - 1)] = e - proj * v[row];
        }
    }
    let reduced = basis.transpose() * s * &basis;
    Ok(MetricOperator {
        matrix: reduced,
        metric: DVector::from_element(nd - 1, 1.0),
        context: SpectrumContext::SphereRestricted,
    })
}

/// Solves the metric eigenproblem of a symmetric operator and classifies the
/// spectrum. The zero band is `1e-8` times the largest eigenvalue magnitude.
pub fn spectrum(op: &MetricOperator) -> Result<SpectrumReport> {
    let b = &op.matrix;
    let bmax = b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut asym = 0.0f64;
    for r in 0..b.nrows() {
        for c in (r + 1)..b.ncols() {
            asym = asym.max((b[(r, c)] - b[(c, r)]).abs());
        }
    }
    if asym > 1e-10 * bmax.max(1e-300) {
        return Err(CcError::NotSymmetric {
            asymmetry: asym / bmax,
        });
    }
    let s = op.symmetrized();
    let sym = (&s + s.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let emax = eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let zero_threshold = 1e-8 * emax;
    let morse_index = eigenvalues.iter().filter(|&&e| e < -zero_threshold).count();
    let nullity = eigenvalues
        .iter()
        .filter(|&&e| e.abs() <= zero_threshold)
        .count();
    Ok(SpectrumReport {
        eigenvalues,
        morse_index,
        nullity,
        zero_threshold,
        context: op.context,
    })
}

/// Expected vs measured radial eigenvalue at a solved central configuration.
#[derive(Debug, Clone, Copy)]
pub struct RadialCheck {
    /// `-lambda (alpha + 2)`, always positive.
    pub expected: f64,
    /// Rayleigh quotient of the `C^0` Hessian along `q - O` in the mass-metric.
    pub measured: f64,
}

impl RadialCheck {
    pub fn relative_error(&self) -> f64 {
        (self.measured - self.expected).abs() / self.expected.abs()
    }
}

/// Checks that the direction `q - O` is an eigenvector of the Hessian of
/// `U - (lambda/2)|.|_M^2` with eigenvalue `-lambda (alpha + 2)`.
pub fn radial_eigencheck(sol: &CCSolution, m: &Masses, p: &PotentialParams) -> Result<RadialCheck> {
    let q = &sol.configuration;
    let lambda = sol.lambda.value();
    let op = hessian_f(q, m, p, lambda)?;
    let x = DVector::from_column_slice(q.as_slice());
    let num = (&op.matrix * &x).dot(&x);
    let mut den = 0.0;
    for idx in 0..x.len() {
        den += op.metric[idx] * x[idx] * x[idx];
    }
    Ok(RadialCheck {
        expected: -lambda * (p.alpha() + 2.0),
        measured: num / den,
    })
}

/// Outcome of the nonzero-spectra comparison between the `C^0` Hessian `H`
/// and the composed `C^1` Hessian `H~` at the `lambda = -2` scale.
#[derive(Debug, Clone)]
pub struct CorrespondenceReport {
    /// Nonzero eigenvalues of `H` with the translation block removed.
    pub h_nonzero: Vec<f64>,
    /// Nonzero eigenvalues of `H~`.
    pub htilde_nonzero: Vec<f64>,
    /// Translation eigenvalues (close to 2) removed from `H`, one per
    /// ambient dimension.
    pub removed_translations: Vec<f64>,
    /// Largest relative mismatch between the paired spectra.
    pub max_rel_error: f64,
    pub pass: bool,
    /// Human-readable diff when the match fails.
    pub detail: String,
}

/// Compares the nonzero spectra of `H` and `H~` at the solution rescaled to
/// `lambda = -2`: they must agree after removing the eigenvalue `2` with
/// multiplicity `d` from `H`, within `1e-7` relative per eigenvalue.
pub fn spectra_correspondence(
    sol: &CCSolution,
    m: &Masses,
    p: &PotentialParams,
) -> Result<CorrespondenceReport> {
    let q2 = rescale_to_lambda(sol, -2.0, p)?;
    let d = q2.d();
    let h = spectrum(&hessian_f(&q2, m, p, -2.0)?)?;
    let ht = spectrum(&hessian_composed(&coboundary0(&q2), m, p)?)?;

    let mut h_nonzero = h.nonzero();
    let htilde_nonzero = ht.nonzero();

    // remove d eigenvalues closest to 2 (the translation block)
    let mut removed = Vec::with_capacity(d);
    for _ in 0..d {
        let (pos, _) = h_nonzero
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - 2.0).abs().partial_cmp(&(*b - 2.0).abs()).unwrap())
            .ok_or_else(|| CcError::Degenerate("H has no nonzero eigenvalues".into()))?;
        removed.push(h_nonzero.remove(pos));
    }
    let translations_ok = removed.iter().all(|e| (e - 2.0).abs() <= 1e-7 * 2.0);

    let mut max_rel = 0.0f64;
    let counts_ok = h_nonzero.len() == htilde_nonzero.len();
    if counts_ok {
        for (a, b) in h_nonzero.iter().zip(&htilde_nonzero) {
            max_rel = max_rel.max((a - b).abs() / a.abs().max(b.abs()));
        }
    }
    let pass = translations_ok && counts_ok && max_rel <= 1e-7;
    let detail = if pass {
        String::new()
    } else {
        format!(
            "H nonzero (translations {removed:?} removed): {h_nonzero:?}\n\
             H~ nonzero: {htilde_nonzero:?}\n\
             counts {} vs {}, max relative mismatch {max_rel:.3e}",
            h_nonzero.len(),
            htilde_nonzero.len()
        )
    };
    Ok(CorrespondenceReport {
        h_nonzero,
        htilde_nonzero,
        removed_translations: removed,
        max_rel_error: max_rel,
        pass,
        detail,
    })
}

/// How a triple sum `Q_ijk` sits relative to its triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleClass {
    /// `Q_ijk = 0`: the triple is equilateral (when non-collinear).
    ZeroEquilateral,
    /// `Q_ijk` is parallel to the edge `q_ij`: isosceles at the third body.
    ParallelToEdge,
    General,
}

impl TripleClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TripleClass::ZeroEquilateral => "zeroEquilateral",
            TripleClass::ParallelToEdge => "parallelToEdge",
            TripleClass::General => "general",
        }
    }
}

/// Report for a single triple of bodies.
#[derive(Debug, Clone)]
pub struct TripleReport {
    pub triple: (usize, usize, usize),
    /// `Q_ij + Q_jk + Q_ki` with `Q_ab = Psi_{alpha+2}(q_a - q_b)`.
    pub q_ijk: Vec<f64>,
    /// Norm of `q_ijk`.
    pub norm: f64,
    /// Component of `q_ijk` orthogonal to the edge `q_i - q_j`.
    pub cross_norm: f64,
    /// Largest of the three `|Q_ab|`, the natural comparison scale.
    pub scale: f64,
    pub classification: TripleClass,
}

/// Classification threshold for [`triple_q`], relative to the entry scale;
/// exact patterns land near 1e-15 and genuinely scalene triples above 1e-4.
const TRIPLE_CLASS_REL_TOL: f64 = 1e-8;

/// Evaluates the triple sum `Q_ijk` for three bodies of a configuration and
/// classifies it: zero (equilateral), parallel to `q_ij` (isosceles at `k`),
/// or general.
pub fn triple_q(
    q: &Configuration,
    triple: (usize, usize, usize),
    p: &PotentialParams,
) -> Result<TripleReport> {
    let (i, j, k) = triple;
    let d = q.d();
    let diff = |a: usize, b: usize| -> Vec<f64> {
        let (pa, pb) = (q.point(a), q.point(b));
        (0..d).map(|c| pa[c] - pb[c]).collect()
    };
    for &(a, b) in &[(i, j), (j, k), (i, k)] {
        if q.distance(a, b) == 0.0 {
            return Err(CcError::Collision {
                i: a.min(b),
                j: a.max(b),
                distance: 0.0,
            });
        }
    }
    let gamma = p.gamma();
    let qij = psi_gamma(&diff(i, j), gamma)?;
    let qjk = psi_gamma(&diff(j, k), gamma)?;
    let qki = psi_gamma(&diff(k, i), gamma)?;
    let q_ijk: Vec<f64> = (0..d).map(|c| qij[c] + qjk[c] + qki[c]).collect();

    let vnorm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = vnorm(&qij).max(vnorm(&qjk)).max(vnorm(&qki));
    let norm = vnorm(&q_ijk);

    // component orthogonal to the edge q_i - q_j
    let edge = diff(i, j);
    let enorm2: f64 = edge.iter().map(|x| x * x).sum();
    let dot: f64 = q_ijk.iter().zip(&edge).map(|(a, b)| a * b).sum();
    let cross: Vec<f64> = (0..d).map(|c| q_ijk[c] - dot / enorm2 * edge[c]).collect();
    let cross_norm = vnorm(&cross);

    let classification = if norm <= TRIPLE_CLASS_REL_TOL * scale {
        TripleClass::ZeroEquilateral
    } else if cross_norm <= TRIPLE_CLASS_REL_TOL * scale {
        TripleClass::ParallelToEdge
    } else {
        TripleClass::General
    };
    Ok(TripleReport {
        triple,
        q_ijk,
        norm,
        cross_norm,
        scale,
        classification,
    })
}

/// Geometric features detected on a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagKind {
    Collinear,
    Planar,
    Equilateral,
    ApexEquidistant,
    CocircularBase,
}

impl TagKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TagKind::Collinear => "collinear",
            TagKind::Planar => "planar",
            TagKind::Equilateral => "equilateral",
            TagKind::ApexEquidistant => "apexEquidistant",
            TagKind::CocircularBase => "cocircularBase",
        }
    }
}

/// A detected feature with its measured deviation (smaller is cleaner).
#[derive(Debug, Clone, Copy)]
pub struct GeometryTag {
    pub kind: TagKind,
    pub deviation: f64,
}

/// Relative thresholds for geometric detection.
#[derive(Debug, Clone, Copy)]
pub struct GeometryTolerances {
    /// Singular-value ratio below which a direction counts as flat.
    pub rank_rel: f64,
    /// Relative spread below which distances count as equal.
    pub distance_rel: f64,
}

impl Default for GeometryTolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-8,
            distance_rel: 1e-8,
        }
    }
}

/// Singular values of the centroid-centered point matrix of a subset,
/// sorted descending.
fn subset_singular_values(q: &Configuration, subset: &[usize]) -> Vec<f64> {
    let d = q.d();
    let k = subset.len();
    let mut centroid = vec![0.0; d];
    for &j in subset {
        for c in 0..d {
            centroid[c] += q.point(j)[c] / k as f64;
        }
    }
    let mat = DMatrix::from_fn(k, d, |r, c| q.point(subset[r])[c] - centroid[c]);
    let mut sv: Vec<f64> = mat
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Affine rank of a subset of bodies under the relative threshold.
pub fn subset_rank(q: &Configuration, subset: &[usize], rank_rel: f64) -> usize {
    let sv = subset_singular_values(q, subset);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_rel * smax).count()
}

/// Relative spread `(max - min) / mean` of a list of positive lengths.
fn relative_spread(values: &[f64]) -> f64 {
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, 0.0f64, 0.0);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    (hi - lo) / (sum / values.len() as f64)
}

/// Detects collinearity, coplanarity, equilaterality and the
/// coplanar-base-plus-apex pattern, emitting tags with measured deviations.
pub fn classify_geometry(q: &Configuration, tol: &GeometryTolerances) -> Vec<GeometryTag> {
    let (n, d) = (q.n(), q.d());
    let mut tags = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    let sv = subset_singular_values(q, &all);
    let smax = sv[0].max(1e-300);

    if d == 1 || sv.get(1).is_none_or(|&s| s <= tol.rank_rel * smax) {
        tags.push(GeometryTag {
            kind: TagKind::Collinear,
            deviation: sv.get(1).map_or(0.0, |&s| s / smax),
        });
    }
    if d >= 3 && sv.get(2).is_none_or(|&s| s <= tol.rank_rel * smax) {
        tags.push(GeometryTag {
            kind: TagKind::Planar,
            deviation: sv.get(2).map_or(0.0, |&s| s / smax),
        });
    }

    // all mutual distances equal: equilateral triangle / regular simplex
    let spread = relative_spread(&q.sorted_distances());
    if spread <= tol.distance_rel {
        tags.push(GeometryTag {
            kind: TagKind::Equilateral,
            deviation: spread,
        });
    }

    // coplanar base plus apex, only meaningful off the base plane
    if d >= 3 && n >= 4 {
        if let Some((apex, base)) = find_apex(q, tol) {
            let apex_distances: Vec<f64> = base.iter().map(|&j| q.distance(apex, j)).collect();
            let apex_spread = relative_spread(&apex_distances);
            if apex_spread <= tol.distance_rel {
                tags.push(GeometryTag {
                    kind: TagKind::ApexEquidistant,
                    deviation: apex_spread,
                });
            }
            if let Some(dev) = cocircular_deviation(q, &base) {
                if dev <= tol.distance_rel {
                    tags.push(GeometryTag {
                        kind: TagKind::CocircularBase,
                        deviation: dev,
                    });
                }
            }
        }
    }
    tags
}

/// Finds a body whose complement is coplanar while the body itself leaves
/// the plane.
pub fn find_apex(q: &Configuration, tol: &GeometryTolerances) -> Option<(usize, Vec<usize>)> {
    let n = q.n();
    let all: Vec<usize> = (0..n).collect();
    if subset_rank(q, &all, tol.rank_rel) < 3 {
        return None;
    }
    for apex in 0..n {
        let base: Vec<usize> = (0..n).filter(|&j| j != apex).collect();
        if base.len() >= 3 && subset_rank(q, &base, tol.rank_rel) <= 2 {
            return Some((apex, base));
        }
    }
    None
}

/// Relative spread of base-point distances to their best-fit circumcenter
/// inside the base plane. `None` when the base has fewer than three points
/// or the circumcenter system is singular.
pub fn cocircular_deviation(q: &Configuration, base: &[usize]) -> Option<f64> {
    let d = q.d();
    let k = base.len();
    if k < 3 {
        return None;
    }
    let mut centroid = vec![0.0; d];
    for &j in base {
        for c in 0..d {
            centroid[c] += q.point(j)[c] / k as f64;
        }
    }
    let mat = DMatrix::from_fn(k, d, |r, c| q.point(base[r])[c] - centroid[c]);
    let svd = mat.clone().svd(false, true);
    let vt = svd.v_t?;
    // in-plane 2D coordinates
    let coords: Vec<(f64, f64)> = (0..k)
        .map(|r| {
            let row = mat.row(r);
            let u: f64 = (0..d).map(|c| row[c] * vt[(0, c)]).sum();
            let v: f64 = (0..d).map(|c| row[c] * vt[(1, c)]).sum();
            (u, v)
        })
        .collect();
    // circumcenter from |x_0|^2 - |x_j|^2 = 2 (x_0 - x_j) . c
    let mut a = DMatrix::zeros(k - 1, 2);
    let mut rhs = DVector::zeros(k - 1);
    let (u0, v0) = coords[0];
    for j in 1..k {
        let (uj, vj) = coords[j];
        a[(j - 1, 0)] = 2.0 * (u0 - uj);
        a[(j - 1, 1)] = 2.0 * (v0 - vj);
        rhs[j - 1] = (u0 * u0 + v0 * v0) - (uj * uj + vj * vj);
    }
    let center = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let radii: Vec<f64> = coords
        .iter()
        .map(|&(u, v)| ((u - center[0]).powi(2) + (v - center[1]).powi(2)).sqrt())
        .collect();
    Some(relative_spread(&radii))
}

/// One rigidity verdict for a verification report.
#[derive(Debug, Clone)]
pub struct RigidityCheck {
    pub name: &'static str,
    /// Whether the hypothesis of the rigidity fact holds for this input.
    pub applicable: bool,
    /// Whether the conclusion holds (true whenever not applicable).
    pub pass: bool,
    pub detail: String,
}

/// Evaluates the geometric rigidity facts a central configuration must satisfy.
/// Failures are only meaningful on inputs that already pass the residual test.
pub fn rigidity_checks(q: &Configuration, tol: &GeometryTolerances) -> Vec<RigidityCheck> {
    let (n, d) = (q.n(), q.d());
    let mut checks = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    let full_rank = subset_rank(q, &all, tol.rank_rel);

    if n == 3 && d >= 2 {
        let applicable = full_rank >= 2;
        let spread = relative_spread(&q.sorted_distances());
        // converged solutions sit within solver tolerance of the exact
        // shape, so the conclusion is tested at a looser spread
        let pass = !applicable || spread <= 1e-6;
        checks.push(RigidityCheck {
            name: "n3-noncollinear-implies-equilateral",
            applicable,
            pass,
            detail: format!("side spread {spread:.3e}"),
        });
    }

    if n >= 4 && d >= 2 {
        let mut sub_collinear = None;
        for out in 0..n {
            let subset: Vec<usize> = (0..n).filter(|&j| j != out).collect();
            if subset_rank(q, &subset, tol.rank_rel) <= 1 {
                sub_collinear = Some(out);
                break;
            }
        }
        let applicable = sub_collinear.is_some();
        let pass = !applicable || full_rank <= 1;
        checks.push(RigidityCheck {
            name: "n-1-collinear-implies-collinear",
            applicable,
            pass,
            detail: match sub_collinear {
                Some(out) => format!("bodies excluding {out} are collinear; full rank {full_rank}"),
                None => "no collinear (n-1)-subset".into(),
            },
        });
    }

    if n == 4 && d >= 2 {
        let mut any_triple = None;
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    if subset_rank(q, &[i, j, k], tol.rank_rel) <= 1 {
                        any_triple = Some((i, j, k));
                        break 'outer;
                    }
                }
            }
        }
        let applicable = any_triple.is_some();
        let pass = !applicable || full_rank <= 1;
        checks.push(RigidityCheck {
            name: "three-collinear-implies-collinear",
            applicable,
            pass,
            detail: match any_triple {
                Some(t) => format!("collinear triple {t:?}; full rank {full_rank}"),
                None => "no collinear triple".into(),
            },
        });
    }

    if n >= 4 && d >= 3 {
        let apex = find_apex(q, tol);
        let applicable = apex.is_some();
        let (pass, detail) = match &apex {
            Some((a, base)) => {
                let dists: Vec<f64> = base.iter().map(|&j| q.distance(*a, j)).collect();
                let spread = relative_spread(&dists);
                let cocirc = cocircular_deviation(q, base).unwrap_or(f64::INFINITY);
                (
                    spread <= 1e-6 && cocirc <= 1e-6,
                    format!("apex {a}: distance spread {spread:.3e}, cocircularity {cocirc:.3e}"),
                )
            }
            None => (true, "no coplanar-base-plus-apex pattern".into()),
        };
        checks.push(RigidityCheck {
            name: "coplanar-base-apex-cocircular",
            applicable,
            pass,
            detail,
        });
    }

    checks
}
