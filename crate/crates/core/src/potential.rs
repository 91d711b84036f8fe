//! Potentials on configurations and on difference cochains.
//!
//! The pairwise potential is `U(q) = sum_{i<j} m_i m_j / |q_i - q_j|^alpha`.
//! Through the isometry `delta^0 : X -> Z^1` it factors over the cochain
//! functional [`f_tilde`], whose critical points on `Z^1` are exactly the
//! central configurations at the `lambda = -2` scale. [`cc_residual`]
//! measures centrality directly in cocycle form.

use crate::cochain::{
    coboundary0, mass_inner_c0, mass_norm_c1, project_pm, project_to_x, Configuration, Masses,
    OneCochain,
};
use crate::error::{CcError, Result};

/// Homogeneity parameter `alpha` of the pairwise potential, with the derived
/// exponents of the radial map and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    alpha: f64,
    collision_rel_tol: f64,
}

impl PotentialParams {
    /// Requires `alpha > 0`. The collision tolerance defaults to `1e-9`
    /// relative to the configuration diameter.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(CcError::InvalidParameter(format!(
                "alpha must be a positive finite number, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            collision_rel_tol: 1e-9,
        })
    }

    /// Newtonian potential (`alpha = 1`).
    pub fn newtonian() -> Self {
        Self::new(1.0).unwrap()
    }

    pub fn with_collision_rel_tol(mut self, rel_tol: f64) -> Self {
        self.collision_rel_tol = rel_tol;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Radial-map exponent `gamma = alpha + 2 > 2`.
    pub fn gamma(&self) -> f64 {
        self.alpha + 2.0
    }

    /// Inverse-map exponent `gamma / (gamma - 1)`, always in `(1, 2)`.
    pub fn gamma_hat(&self) -> f64 {
        let g = self.gamma();
        g / (g - 1.0)
    }

    pub fn collision_rel_tol(&self) -> f64 {
        self.collision_rel_tol
    }
}

/// The proportionality constant of a central configuration,
/// `lambda = -alpha U(q) / |q|_M^2`, strictly negative off collisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda(pub(crate) f64);

impl Lambda {
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// The radial map `Psi_gamma(x) = x / |x|^gamma`, a diffeomorphism of
/// `E \ {0}` with inverse `Psi_{gamma/(gamma-1)}`.
pub fn psi_gamma(x: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(CcError::Collision {
            i: 0,
            j: 0,
            distance: 0.0,
        });
    }
    let factor = norm2.powf(-gamma / 2.0);
    Ok(x.iter().map(|v| v * factor).collect())
}

/// Applies `Psi_gamma` entrywise to a 1-cochain. `Psi_gamma` is odd, so the
/// result is again skew-symmetric. Errors with the offending pair when an
/// entry vanishes.
pub fn psi_cochain(z: &OneCochain, gamma: f64) -> Result<OneCochain> {
    let (n, d) = (z.n(), z.d());
    let mut out = OneCochain::zeros(n, d);
    for i in 0..n {
        for j in (i + 1)..n {
            let e = z.pair(i, j);
            let norm2: f64 = e.iter().map(|v| v * v).sum();
            if norm2 == 0.0 {
                return Err(CcError::Collision {
                    i,
                    j,
                    distance: 0.0,
                });
            }
            let factor = norm2.powf(-gamma / 2.0);
            let o = out.pair_mut(i, j);
            for c in 0..d {
                o[c] = e[c] * factor;
            }
        }
    }
    Ok(out)
}

/// `U(q) = sum_{i<j} m_i m_j / |q_i - q_j|^alpha`; positive and homogeneous
/// of degree `-alpha`.
pub fn potential_u(q: &Configuration, m: &Masses, p: &PotentialParams) -> Result<f64> {
    q.check_collision_free(p.collision_rel_tol)?;
    let mut u = 0.0;
    for i in 0..q.n() {
        for j in (i + 1)..q.n() {
            u += m.get(i) * m.get(j) * q.distance(i, j).powf(-p.alpha);
        }
    }
    Ok(u)
}

/// The cochain functional `sum_{i<j} m_i m_j (|z_ij|^-alpha + |z_ij|^2)`.
///
/// On cocycles `z = delta^0 q` with `q` centered this equals
/// `U(q) + |q|_M^2`; its critical points restricted to `Z^1` are the central
/// configurations at the `lambda = -2` scale.
pub fn f_tilde(z: &OneCochain, m: &Masses, p: &PotentialParams) -> Result<f64> {
    let mut f = 0.0;
    for i in 0..z.n() {
        for j in (i + 1)..z.n() {
            let r2: f64 = z.pair(i, j).iter().map(|v| v * v).sum();
            if r2 == 0.0 {
                return Err(CcError::Collision {
                    i,
                    j,
                    distance: 0.0,
                });
            }
            f += m.get(i) * m.get(j) * (r2.powf(-p.alpha / 2.0) + r2);
        }
    }
    Ok(f)
}

/// Euclidean gradient of `U` per body:
/// `dU/dq_j = -alpha sum_{k != j} m_j m_k (q_j - q_k) / |q_j - q_k|^(alpha+2)`.
///
/// The mass-metric gradient is obtained by dividing body `j`'s component by
/// `m_j`. Components sum to zero (translation invariance).
pub fn grad_u(q: &Configuration, m: &Masses, p: &PotentialParams) -> Result<Configuration> {
    q.check_collision_free(p.collision_rel_tol)?;
    let (n, d) = (q.n(), q.d());
    let mut g = Configuration::zeros(n, d);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = q.distance(i, j);
            let w = p.alpha * m.get(i) * m.get(j) * r.powf(-p.gamma());
            let (a, b) = (q.point(i), q.point(j));
            for c in 0..d {
                let f = w * (a[c] - b[c]);
                g.point_mut(i)[c] -= f;
                g.point_mut(j)[c] += f;
            }
        }
    }
    Ok(g)
}

/// `lambda = -alpha U(q) / |q|_M^2`, computed after centering. Negative for
/// every collision-free, non-degenerate configuration.
pub fn lambda_of(q: &Configuration, m: &Masses, p: &PotentialParams) -> Result<Lambda> {
    let centered = project_to_x(q, m);
    let norm2 = mass_inner_c0(&centered, &centered, m)?;
    if norm2 <= 0.0 || !norm2.is_finite() {
        return Err(CcError::Degenerate(
            "configuration has zero mass-norm after centering".into(),
        ));
    }
    let u = potential_u(&centered, m, p)?;
    Ok(Lambda(-p.alpha * u / norm2))
}

/// Central-configuration residual in cocycle form,
/// `P_m(Psi_{alpha+2}(delta^0 q)) + (lambda/alpha) delta^0 q`, with `lambda`
/// computed from `q`. The returned norm is the `C^1` mass-norm of the
/// residual divided by `|delta^0 q|_M`, so it is scale-free and vanishes
/// exactly at central configurations.
pub fn cc_residual(
    q: &Configuration,
    m: &Masses,
    p: &PotentialParams,
) -> Result<(OneCochain, f64)> {
    let lambda = lambda_of(q, m, p)?.value();
    let dq = coboundary0(q);
    let projected = project_pm(&psi_cochain(&dq, p.gamma())?, m)?;
    let residual = projected.add_scaled(&dq, lambda / p.alpha());
    let norm = mass_norm_c1(&residual, m)? / mass_norm_c1(&dq, m)?;
    Ok((residual, norm))
}

/// Largest per-body residual `|lambda m_j q_j - dU/dq_j|` of the pointwise
/// central-configuration equation, evaluated on the centered configuration.
///
/// The cocycle residual controls this: writing `rho` for the `C^1` residual
/// of [`cc_residual`], one has `rho = delta^0(s)` with
/// `s_j = (lambda m_j q_j - dU/dq_j) / (alpha m_j)`, and by the isometry
/// `|s|_M = |rho|_M`, hence
/// `max_j |lambda m_j q_j - dU/dq_j| <= alpha |rho|_M` (masses are at most 1).
pub fn body_equation_residual(
    q: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    lambda: f64,
) -> Result<f64> {
    let centered = project_to_x(q, m);
    let g = grad_u(&centered, m, p)?;
    let mut worst = 0.0f64;
    for j in 0..q.n() {
        let qj = centered.point(j);
        let gj = g.point(j);
        let mut acc = 0.0;
        for c in 0..q.d() {
            let r = lambda * m.get(j) * qj[c] - gj[c];
            acc += r * r;
        }
        worst = worst.max(acc.sqrt());
    }
    Ok(worst)
}
