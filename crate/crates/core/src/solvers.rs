//! Solvers for central configurations.
//!
//! Three routes to the same critical points:
//! - fixed-point iteration of `F(q) = -grad_M U / |grad_M U|_M` on the unit
//!   mass-sphere, damped and with backtracking;
//! - descent (L-BFGS with Armijo backtracking) on `U(x) + |x|_M^2`, whose
//!   critical points are central configurations at the `lambda = -2` scale;
//! - modified Newton with eigenvalue clamping on the same objective, which
//!   also converges to saddle points and is the default for multistart
//!   surveys.
//!
//! For `d = 1` the objective is convex on each ordering chamber, so
//! [`solve_moulton`] reaches the unique collinear configuration of a chamber
//! by damped Newton. Solutions are reported centered at unit mass-norm with
//! `lambda` attached; [`rescale_to_lambda`] recovers any other scale.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::analysis::{classify_geometry, hessian_f, GeometryTag, GeometryTolerances};
use crate::cochain::{mass_inner_c0, mass_norm_c0, project_to_x, Configuration, Masses};
use crate::error::{CcError, Result};
use crate::potential::{cc_residual, grad_u, lambda_of, potential_u, Lambda, PotentialParams};

/// Which iteration drives a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FixedPoint,
    Variational,
    Newton,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::FixedPoint => "fixedPoint",
            Method::Variational => "variational",
            Method::Newton => "newton",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = CcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixedPoint" | "fixed-point" | "fixedpoint" => Ok(Method::FixedPoint),
            "variational" => Ok(Method::Variational),
            "newton" => Ok(Method::Newton),
            other => Err(CcError::InvalidParameter(format!(
                "unknown method '{other}'"
            ))),
        }
    }
}

/// Damping and backtracking bounds.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Initial damping / line-search step.
    pub initial: f64,
    /// Multiplicative shrink on rejection.
    pub shrink: f64,
    /// Floor below which the solve gives up.
    pub min: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial: 0.5,
            shrink: 0.5,
            min: 1e-14,
        }
    }
}

/// Iteration budget, target residual and method selection.
#[derive(Debug, Clone, Copy)]
pub struct SolveSettings {
    pub max_iterations: usize,
    /// Bound on the scale-free cocycle residual of a returned solution.
    pub residual_tolerance: f64,
    pub step: StepControl,
    pub rng_seed: u64,
    pub method: Method,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            residual_tolerance: 1e-11,
            step: StepControl::default(),
            rng_seed: 0,
            method: Method::Newton,
        }
    }
}

impl SolveSettings {
    fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(CcError::InvalidParameter(
                "maxIterations must be >= 1".into(),
            ));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(CcError::InvalidParameter(
                "residualTolerance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A solved central configuration: centered, unit mass-norm, with its
/// `lambda`, residual and geometric tags.
#[derive(Debug, Clone)]
pub struct CCSolution {
    pub configuration: Configuration,
    pub lambda: Lambda,
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: Method,
    pub classification: Vec<GeometryTag>,
}

/// Validates a candidate configuration and packages it as a solution:
/// centers, normalizes to unit mass-norm, recomputes `lambda`, measures the
/// cocycle residual against `tol` and classifies the geometry.
pub fn solution_from_configuration(
    q: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    tol: f64,
    method: Method,
    iterations: usize,
) -> Result<CCSolution> {
    let unit = normalize_sphere(q, m)?;
    let (_, residual_norm) = cc_residual(&unit, m, p)?;
    if residual_norm > tol {
        return Err(CcError::NoConvergence {
            iterations,
            residual_norm,
            best: Box::new(unit),
        });
    }
    let lambda = lambda_of(&unit, m, p)?;
    let classification = classify_geometry(&unit, &GeometryTolerances::default());
    Ok(CCSolution {
        configuration: unit,
        lambda,
        residual_norm,
        iterations,
        method,
        classification,
    })
}

/// Centers a configuration and rescales it to unit mass-norm.
pub fn normalize_sphere(q: &Configuration, m: &Masses) -> Result<Configuration> {
    let centered = project_to_x(q, m);
    let norm = mass_norm_c0(&centered, m)?;
    if norm <= 1e-300 {
        return Err(CcError::Degenerate("all bodies at the mass center".into()));
    }
    Ok(centered.scaled(1.0 / norm))
}

/// One application of the sphere map `F(q) = -grad_M U / |grad_M U|_M`,
/// whose fixed points are exactly the central configurations on the unit
/// mass-sphere. `F` is equivariant under the diagonal orthogonal action and
/// its image is automatically centered.
pub fn fixed_point_step(
    q: &Configuration,
    m: &Masses,
    p: &PotentialParams,
) -> Result<Configuration> {
    let g = grad_u(q, m, p)?;
    let mut mg = g.clone();
    for j in 0..q.n() {
        let inv = 1.0 / m.get(j);
        for v in mg.point_mut(j) {
            *v *= inv;
        }
    }
    let norm = mass_norm_c0(&mg, m)?;
    if norm <= 1e-300 {
        return Err(CcError::Degenerate("vanishing potential gradient".into()));
    }
    Ok(mg.scaled(-1.0 / norm))
}

/// Damped fixed-point iteration `q <- normalize((1-t) q + t F(q))` with
/// backtracking on collisions and on potential increase. Converges to local
/// minima of `U` restricted to the unit mass-sphere.
pub fn solve_fixed_point(
    q0: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
) -> Result<CCSolution> {
    s.validate()?;
    let mut q = normalize_sphere(q0, m)?;
    let (_, mut residual) = cc_residual(&q, m, p)?;
    if residual <= s.residual_tolerance {
        return solution_from_configuration(&q, m, p, s.residual_tolerance, Method::FixedPoint, 0);
    }
    let mut best = (residual, q.clone(), 0usize);
    let mut u_current = potential_u(&q, m, p)?;
    let mut t = s.step.initial;

    for iter in 1..=s.max_iterations {
        let image = fixed_point_step(&q, m, p)?;
        loop {
            let blended = q.scaled(1.0 - t).add_scaled(&image, t);
            let candidate = match normalize_sphere(&blended, m) {
                Ok(c) => c,
                Err(_) => {
                    t *= s.step.shrink;
                    if t < s.step.min {
                        return Err(CcError::NoConvergence {
                            iterations: iter,
                            residual_norm: best.0,
                            best: Box::new(best.1),
                        });
                    }
                    continue;
                }
            };
            match potential_u(&candidate, m, p) {
                Ok(u_new) if u_new <= u_current * (1.0 + 1e-13) => {
                    q = candidate;
                    u_current = u_new;
                    t = (t * 1.3).min(1.0);
                    break;
                }
                _ => {
                    t *= s.step.shrink;
                    if t < s.step.min {
                        return Err(CcError::NoConvergence {
                            iterations: iter,
                            residual_norm: best.0,
                            best: Box::new(best.1),
                        });
                    }
                }
            }
        }
        residual = cc_residual(&q, m, p)?.1;
        if residual < best.0 {
            best = (residual, q.clone(), iter);
        }
        if residual <= s.residual_tolerance {
            return solution_from_configuration(
                &q,
                m,
                p,
                s.residual_tolerance,
                Method::FixedPoint,
                iter,
            );
        }
    }
    Err(CcError::NoConvergence {
        iterations: s.max_iterations,
        residual_norm: best.0,
        best: Box::new(best.1),
    })
}

/// Objective `g(x) = U(x) + |x|_M^2` and its Euclidean gradient.
fn objective_g(x: &Configuration, m: &Masses, p: &PotentialParams) -> Result<f64> {
    Ok(potential_u(x, m, p)? + mass_inner_c0(x, x, m)?)
}

fn grad_g(x: &Configuration, m: &Masses, p: &PotentialParams) -> Result<Configuration> {
    let mut g = grad_u(x, m, p)?;
    for j in 0..x.n() {
        let w = 2.0 * m.get(j);
        let (gp, xp) = (j, x.point(j).to_vec());
        for (c, v) in g.point_mut(gp).iter_mut().enumerate() {
            *v += w * xp[c];
        }
    }
    Ok(g)
}

struct DescentOutcome {
    x: Configuration,
    iterations: usize,
    #[cfg_attr(not(test), allow(dead_code))]
    residual_norm: f64,
    /// Objective values at accepted iterates; non-increasing by construction.
    #[cfg_attr(not(test), allow(dead_code))]
    objective_history: Vec<f64>,
}

/// Residual below which descent hands over to Newton polishing: near a
/// critical point objective differences scale like the squared residual and
/// sink under f64 rounding, which stalls any line search on the objective.
const DESCENT_HANDOVER: f64 = 1e-7;

/// L-BFGS (two-loop recursion, memory 8) with Armijo backtracking on
/// `U + |.|_M^2`. Steps that collide are rejected by the line search, so the
/// iteration never leaves the collision-free component it starts in.
/// Returns the best iterate seen when the line search stalls or the budget
/// runs out; the caller decides whether that counts as convergence.
fn minimize_g(
    x0: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
) -> Result<DescentOutcome> {
    const MEMORY: usize = 8;
    const ARMIJO_C1: f64 = 1e-4;

    let target = s.residual_tolerance.max(DESCENT_HANDOVER);
    let mut x = x0.clone();
    let mut f = objective_g(&x, m, p)?;
    let mut grad = grad_g(&x, m, p)?;
    let mut history = vec![f];
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new(); // (s_k, y_k)
    let (_, mut residual) = cc_residual(&x, m, p)?;
    let mut best = (residual, x.clone(), 0usize);

    for iter in 1..=s.max_iterations {
        if residual <= target {
            return Ok(DescentOutcome {
                x,
                iterations: iter - 1,
                residual_norm: residual,
                objective_history: history,
            });
        }

        // two-loop recursion
        let mut dir: Vec<f64> = grad.as_slice().iter().map(|v| -v).collect();
        let mut alphas = vec![0.0; pairs.len()];
        for (idx, (sk, yk)) in pairs.iter().enumerate().rev() {
            let rho = 1.0 / dot(sk, yk);
            let a = rho * dot(sk, &dir);
            alphas[idx] = a;
            axpy(&mut dir, yk, -a);
        }
        if let Some((sk, yk)) = pairs.last() {
            let gamma = dot(sk, yk) / dot(yk, yk);
            dir.iter_mut().for_each(|v| *v *= gamma);
        }
        for (idx, (sk, yk)) in pairs.iter().enumerate() {
            let rho = 1.0 / dot(sk, yk);
            let b = rho * dot(yk, &dir);
            axpy(&mut dir, sk, alphas[idx] - b);
        }

        let mut slope = dot(&dir, grad.as_slice());
        if slope >= 0.0 {
            // not a descent direction; fall back to steepest descent
            dir = grad.as_slice().iter().map(|v| -v).collect();
            slope = -dot(&dir, &dir);
            pairs.clear();
        }

        // Armijo backtracking
        let mut step = 1.0;
        let accepted = loop {
            let mut cand = x.clone();
            for (v, d) in cand.as_mut_slice().iter_mut().zip(&dir) {
                *v += step * d;
            }
            if let Ok(fc) = objective_g(&cand, m, p) {
                if fc <= f + ARMIJO_C1 * step * slope {
                    break Some((cand, fc));
                }
            }
            step *= s.step.shrink;
            if step < 1e-16 {
                break None;
            }
        };
        let Some((x_new, f_new)) = accepted else {
            // objective differences are under the rounding floor; hand the
            // best point seen to the caller for polishing
            return Ok(DescentOutcome {
                x: best.1,
                iterations: iter,
                residual_norm: best.0,
                objective_history: history,
            });
        };

        let grad_new = grad_g(&x_new, m, p)?;
        let sk: Vec<f64> = x_new
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(a, b)| a - b)
            .collect();
        let yk: Vec<f64> = grad_new
            .as_slice()
            .iter()
            .zip(grad.as_slice())
            .map(|(a, b)| a - b)
            .collect();
        if dot(&sk, &yk) > 1e-12 * norm2(&sk).sqrt() * norm2(&yk).sqrt() {
            pairs.push((sk, yk));
            if pairs.len() > MEMORY {
                pairs.remove(0);
            }
        }
        x = x_new;
        f = f_new;
        grad = grad_new;
        history.push(f);
        residual = cc_residual(&x, m, p)?.1;
        if residual < best.0 {
            best = (residual, x.clone(), iter);
        }
    }
    Ok(DescentOutcome {
        x: best.1,
        iterations: s.max_iterations,
        residual_norm: best.0,
        objective_history: history,
    })
}

/// Plain Newton refinement near a critical point of `U + |.|_M^2`, used to
/// push the residual from the descent handover level down to the requested
/// tolerance (quadratic convergence, no objective comparisons). Candidates
/// failing `guard` are treated like collisions and the step is halved.
fn newton_polish(
    x0: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
    guard: impl Fn(&Configuration) -> bool,
) -> Result<(Configuration, f64, usize)> {
    let mut x = x0.clone();
    let (_, mut residual) = cc_residual(&x, m, p)?;
    let mut best = (residual, x.clone());
    let budget = 60.min(s.max_iterations);
    for iter in 0..budget {
        if residual <= s.residual_tolerance {
            return Ok((x, residual, iter));
        }
        let grad = grad_g(&x, m, p)?;
        let b = hessian_f(&x, m, p, -2.0)?.matrix;
        let gvec = DVector::from_column_slice(grad.as_slice());
        let step_vec = match b.clone().cholesky() {
            Some(ch) => -ch.solve(&gvec),
            None => {
                let eig = b.symmetric_eigen();
                let emax = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let floor = 1e-10 * emax.max(1e-300);
                let coeffs = eig.eigenvectors.transpose() * &gvec;
                let mut sv = DVector::zeros(gvec.len());
                for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
                    let clamped = ev.signum() * ev.abs().max(floor);
                    sv += eig.eigenvectors.column(idx) * (-coeffs[idx] / clamped);
                }
                sv
            }
        };
        let mut tau = 1.0;
        loop {
            let mut cand = x.clone();
            for (v, d) in cand.as_mut_slice().iter_mut().zip(step_vec.iter()) {
                *v += tau * d;
            }
            if guard(&cand) {
                if let Ok((_, r)) = cc_residual(&cand, m, p) {
                    x = cand;
                    residual = r;
                    break;
                }
            }
            tau *= s.step.shrink;
            if tau < s.step.min {
                return Ok((best.1.clone(), best.0, iter));
            }
        }
        if residual < best.0 {
            best = (residual, x.clone());
        }
    }
    Ok((best.1, best.0, budget))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

fn axpy(out: &mut [f64], v: &[f64], scale: f64) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += scale * x;
    }
}

/// Minimizes `U + |.|_M^2` from `q0` by L-BFGS descent, then polishes the
/// critical point with plain Newton once objective differences sink under
/// the rounding floor. The unscaled critical point has `lambda = -2`; the
/// returned solution is renormalized to the unit mass-sphere with `lambda`
/// recomputed.
pub fn solve_variational(
    q0: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
) -> Result<CCSolution> {
    s.validate()?;
    let x0 = rescale_configuration(&project_to_x(q0, m), m, p, -2.0)?;
    let out = minimize_g(&x0, m, p, s)?;
    let (x, residual, extra) = if out.residual_norm > s.residual_tolerance {
        newton_polish(&out.x, m, p, s, |_| true)?
    } else {
        (out.x, out.residual_norm, 0)
    };
    if residual > s.residual_tolerance {
        return Err(CcError::NoConvergence {
            iterations: out.iterations + extra,
            residual_norm: residual,
            best: Box::new(x),
        });
    }
    solution_from_configuration(
        &x,
        m,
        p,
        s.residual_tolerance,
        Method::Variational,
        out.iterations + extra,
    )
}

/// Newton iteration on `U + |.|_M^2` with signed eigenvalue clamping
/// (small magnitudes floored, signs kept), so the iteration is attracted to
/// critical points of any Morse index. Step length is capped and collisions
/// are rejected by halving.
pub fn solve_newton(
    q0: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
) -> Result<CCSolution> {
    s.validate()?;
    let mut x = rescale_configuration(&project_to_x(q0, m), m, p, -2.0)?;
    let (_, mut residual) = cc_residual(&x, m, p)?;
    let mut best = (residual, x.clone(), 0usize);

    for iter in 1..=s.max_iterations {
        if residual <= s.residual_tolerance {
            return solution_from_configuration(
                &x,
                m,
                p,
                s.residual_tolerance,
                Method::Newton,
                iter - 1,
            );
        }
        let grad = grad_g(&x, m, p)?;
        let b = hessian_f(&x, m, p, -2.0)?.matrix;
        let eig = b.symmetric_eigen();
        let emax = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if emax <= 1e-300 {
            return Err(CcError::Degenerate("zero Hessian in Newton solve".into()));
        }
        let floor = 1e-8 * emax;
        let gvec = DVector::from_column_slice(grad.as_slice());
        let coeffs = eig.eigenvectors.transpose() * &gvec;
        let mut step_vec = DVector::zeros(gvec.len());
        for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
            // keep the eigenvalue sign so the iteration is attracted to
            // saddles as well as minima; only the magnitude is floored
            let clamped = ev.signum() * ev.abs().max(floor);
            step_vec += eig.eigenvectors.column(idx) * (-coeffs[idx] / clamped);
        }
        // cap the step so a single jump cannot cross a collision
        let cap = 0.3 * x.diameter();
        let snorm = step_vec.norm();
        if snorm > cap {
            step_vec *= cap / snorm;
        }

        let mut tau = 1.0;
        loop {
            let mut cand = x.clone();
            for (v, d) in cand.as_mut_slice().iter_mut().zip(step_vec.iter()) {
                *v += tau * d;
            }
            match cc_residual(&cand, m, p) {
                Ok((_, r)) => {
                    x = cand;
                    residual = r;
                    break;
                }
                Err(_) => {
                    tau *= s.step.shrink;
                    if tau < s.step.min {
                        return Err(CcError::NoConvergence {
                            iterations: iter,
                            residual_norm: best.0,
                            best: Box::new(best.1),
                        });
                    }
                }
            }
        }
        if residual < best.0 {
            best = (residual, x.clone(), iter);
        }
    }
    if residual <= s.residual_tolerance {
        return solution_from_configuration(
            &x,
            m,
            p,
            s.residual_tolerance,
            Method::Newton,
            s.max_iterations,
        );
    }
    Err(CcError::NoConvergence {
        iterations: s.max_iterations,
        residual_norm: best.0,
        best: Box::new(best.1),
    })
}

/// Runs the solver selected by `settings.method`.
pub fn solve(
    q0: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
) -> Result<CCSolution> {
    match s.method {
        Method::FixedPoint => solve_fixed_point(q0, m, p, s),
        Method::Variational => solve_variational(q0, m, p, s),
        Method::Newton => solve_newton(q0, m, p, s),
    }
}

/// Enumerates the `n!/2` collinear ordering chambers: permutations of
/// `0..n` with first entry smaller than last (reversal representatives),
/// in lexicographic order.
pub fn moulton_orderings(n: usize) -> Vec<Vec<usize>> {
    let mut all = permutations(n);
    all.retain(|p| p[0] < p[n - 1]);
    all.sort();
    all
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_recurse(n, &mut items, &mut out);
    out
}

fn heap_recurse(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_recurse(k - 1, items, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

fn ordering_respected(x: &Configuration, ordering: &[usize]) -> bool {
    ordering
        .windows(2)
        .all(|w| x.point(w[0])[0] < x.point(w[1])[0])
}

/// Solves the unique collinear central configuration in the chamber
/// `x_{ordering[0]} < ... < x_{ordering[n-1]}` (`d = 1`) by damped Newton
/// on `U + |.|_M^2`, which is convex on the chamber. Backtracking rejects
/// steps that leave the chamber.
pub fn solve_moulton(
    ordering: &[usize],
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
) -> Result<CCSolution> {
    s.validate()?;
    let n = m.n();
    if ordering.len() != n {
        return Err(CcError::DimensionMismatch {
            context: "ordering length",
            expected: n,
            found: ordering.len(),
        });
    }
    let mut sorted = ordering.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(CcError::InvalidParameter(format!(
            "ordering {ordering:?} is not a permutation of 0..{n}"
        )));
    }

    // equally spaced start inside the chamber
    let mut start = Configuration::zeros(n, 1);
    for (rank, &body) in ordering.iter().enumerate() {
        start.point_mut(body)[0] = rank as f64 - (n as f64 - 1.0) / 2.0;
    }
    let mut x = rescale_configuration(&project_to_x(&start, m), m, p, -2.0)?;
    let mut f = objective_g(&x, m, p)?;
    let (_, mut residual) = cc_residual(&x, m, p)?;
    let mut best = (residual, x.clone(), 0usize);
    // Armijo comparisons drown in rounding once the residual is tiny, so
    // the damped phase only aims for the handover level and Newton
    // polishing (chamber-guarded) finishes the job
    let target = s.residual_tolerance.max(DESCENT_HANDOVER);

    for iter in 1..=s.max_iterations {
        if residual <= target {
            let (xp, rp, extra) =
                newton_polish(&x, m, p, s, |cand| ordering_respected(cand, ordering))?;
            if rp > s.residual_tolerance {
                return Err(CcError::NoConvergence {
                    iterations: iter + extra,
                    residual_norm: rp,
                    best: Box::new(xp),
                });
            }
            let sol = solution_from_configuration(
                &xp,
                m,
                p,
                s.residual_tolerance,
                Method::Newton,
                iter - 1 + extra,
            )?;
            debug_assert!(ordering_respected(&sol.configuration, ordering));
            return Ok(sol);
        }
        let grad = grad_g(&x, m, p)?;
        let b = hessian_f(&x, m, p, -2.0)?.matrix;
        let gvec = DVector::from_column_slice(grad.as_slice());
        // convex on the chamber: Cholesky should succeed, eigen-clamp if not
        let step_vec = match b.clone().cholesky() {
            Some(ch) => -ch.solve(&gvec),
            None => {
                let eig = b.symmetric_eigen();
                let emax = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let floor = 1e-10 * emax.max(1e-300);
                let coeffs = eig.eigenvectors.transpose() * &gvec;
                let mut sv = DVector::zeros(gvec.len());
                for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
                    sv += eig.eigenvectors.column(idx) * (-coeffs[idx] / ev.abs().max(floor));
                }
                sv
            }
        };

        let slope = step_vec.dot(&gvec);
        let mut tau = 1.0;
        loop {
            let mut cand = x.clone();
            for (v, d) in cand.as_mut_slice().iter_mut().zip(step_vec.iter()) {
                *v += tau * d;
            }
            let in_chamber = ordering_respected(&cand, ordering);
            let fc = if in_chamber {
                objective_g(&cand, m, p).ok()
            } else {
                None
            };
            match fc {
                Some(fc) if fc <= f + 1e-4 * tau * slope => {
                    x = cand;
                    f = fc;
                    break;
                }
                _ => {
                    tau *= s.step.shrink;
                    if tau < s.step.min {
                        return Err(CcError::NoConvergence {
                            iterations: iter,
                            residual_norm: best.0,
                            best: Box::new(best.1),
                        });
                    }
                }
            }
        }
        residual = cc_residual(&x, m, p)?.1;
        if residual < best.0 {
            best = (residual, x.clone(), iter);
        }
    }
    Err(CcError::NoConvergence {
        iterations: s.max_iterations,
        residual_norm: best.0,
        best: Box::new(best.1),
    })
}

/// Result of a multistart survey; `solutions` holds one representative per
/// equivalence class modulo the diagonal orthogonal action (and body
/// relabeling when all masses are equal).
#[derive(Debug, Clone)]
pub struct MultistartOutcome {
    pub solutions: Vec<CCSolution>,
    pub attempted: usize,
    pub converged: usize,
    pub failed: usize,
}

/// Draws a centered unit-norm configuration with Gaussian shape, resampling
/// while any two bodies are closer than `0.05` of the diameter.
pub fn random_start(n: usize, d: usize, m: &Masses, rng: &mut ChaCha8Rng) -> Result<Configuration> {
    for _ in 0..10_000 {
        let data: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
        let q = Configuration::new(n, d, data)?;
        let unit = match normalize_sphere(&q, m) {
            Ok(u) => u,
            Err(_) => continue,
        };
        if unit.min_pair_distance().0 > 0.05 * unit.diameter() {
            return Ok(unit);
        }
    }
    Err(CcError::Degenerate(
        "failed to draw a well-separated start".into(),
    ))
}

/// Runs `starts` seeded solves with the configured method and deduplicates
/// the convergent ones modulo the orthogonal action (plus relabeling for
/// equal masses). Solves run in parallel; results merge in start order, so
/// the output is independent of scheduling.
pub fn multistart_solve(
    n: usize,
    d: usize,
    m: &Masses,
    p: &PotentialParams,
    s: &SolveSettings,
    starts: usize,
) -> Result<MultistartOutcome> {
    if starts < 1 {
        return Err(CcError::InvalidParameter("starts must be >= 1".into()));
    }
    if m.n() != n {
        return Err(CcError::DimensionMismatch {
            context: "body count",
            expected: n,
            found: m.n(),
        });
    }
    let results: Vec<Result<CCSolution>> = (0..starts)
        .into_par_iter()
        .map(|idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                s.rng_seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let q0 = random_start(n, d, m, &mut rng)?;
            solve(&q0, m, p, s)
        })
        .collect();

    let mut outcome = MultistartOutcome {
        solutions: Vec::new(),
        attempted: starts,
        converged: 0,
        failed: 0,
    };
    for res in results {
        match res {
            Ok(sol) => {
                outcome.converged += 1;
                let duplicate = outcome.solutions.iter().any(|have| {
                    config_distance(&have.configuration, &sol.configuration, m) <= DEDUP_TOLERANCE
                });
                if !duplicate {
                    outcome.solutions.push(sol);
                }
            }
            Err(_) => outcome.failed += 1,
        }
    }
    Ok(outcome)
}

/// Distance below which two unit-norm solutions count as the same class.
pub const DEDUP_TOLERANCE: f64 = 1e-6;

/// Rescales a configuration so that `lambda` becomes `target_lambda`
/// (strictly negative), using `lambda(r q) = r^-(alpha+2) lambda(q)`.
pub fn rescale_configuration(
    q: &Configuration,
    m: &Masses,
    p: &PotentialParams,
    target_lambda: f64,
) -> Result<Configuration> {
    if !(target_lambda < 0.0) {
        return Err(CcError::InvalidParameter(format!(
            "target lambda must be negative, got {target_lambda}"
        )));
    }
    let lambda = lambda_of(q, m, p)?.value();
    let r = (lambda / target_lambda).powf(1.0 / (p.alpha() + 2.0));
    Ok(q.scaled(r))
}

/// Rescales a solved configuration to the requested `lambda`.
pub fn rescale_to_lambda(
    sol: &CCSolution,
    target_lambda: f64,
    p: &PotentialParams,
) -> Result<Configuration> {
    if !(target_lambda < 0.0) {
        return Err(CcError::InvalidParameter(format!(
            "target lambda must be negative, got {target_lambda}"
        )));
    }
    let r = (sol.lambda.value() / target_lambda).powf(1.0 / (p.alpha() + 2.0));
    Ok(sol.configuration.scaled(r))
}

/// Mass-metric distance between two centered configurations minimized over
/// the diagonal orthogonal action (mass-weighted Procrustes via SVD), and
/// over body relabelings when all masses are equal. A sorted-distance
/// multiset prefilter skips the expensive search for clearly distinct
/// shapes; the multiset gap it returns is itself a lower bound witness.
pub fn config_distance(a: &Configuration, b: &Configuration, m: &Masses) -> f64 {
    let n = a.n();
    let (da, db) = (a.sorted_distances(), b.sorted_distances());
    let multiset_gap = da
        .iter()
        .zip(&db)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    if multiset_gap > 100.0 * DEDUP_TOLERANCE {
        return multiset_gap;
    }

    if m.all_equal() && n <= 8 {
        permutations(n)
            .into_iter()
            .map(|perm| procrustes_distance(a, b, m, &perm))
            .fold(f64::INFINITY, f64::min)
    } else {
        let identity: Vec<usize> = (0..n).collect();
        procrustes_distance(a, b, m, &identity)
    }
}

/// `min_g |g a_perm - b|_M` over the full orthogonal group, computed from
/// the SVD of the mass-weighted cross-covariance.
fn procrustes_distance(a: &Configuration, b: &Configuration, m: &Masses, perm: &[usize]) -> f64 {
    let d = a.d();
    let mut k = DMatrix::<f64>::zeros(d, d);
    for j in 0..a.n() {
        let (pa, pb) = (a.point(perm[j]), b.point(j));
        let w = m.get(j);
        for r in 0..d {
            for c in 0..d {
                k[(r, c)] += w * pa[r] * pb[c];
            }
        }
    }
    let trace_max: f64 = k.svd(false, false).singular_values.iter().sum();
    let na2 = mass_inner_c0(a, a, m).unwrap_or(0.0);
    let nb2 = mass_inner_c0(b, b, m).unwrap_or(0.0);
    (na2 + nb2 - 2.0 * trace_max).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::center_of_mass;
    use approx::assert_relative_eq;

    fn equilateral_unit(m: &Masses) -> Configuration {
        let q = Configuration::from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 3f64.sqrt() / 2.0],
        ])
        .unwrap();
        normalize_sphere(&q, m).unwrap()
    }

    fn rng_config(n: usize, d: usize, seed: u64, m: &Masses) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_start(n, d, m, &mut rng).unwrap()
    }

    #[test]
    fn normalize_sphere_examples() {
        let m = Masses::equal(2);
        let q = Configuration::new(2, 1, vec![0.0, 2.0]).unwrap();
        let unit = normalize_sphere(&q, &m).unwrap();
        assert_relative_eq!(unit.point(0)[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(unit.point(1)[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(mass_norm_c0(&unit, &m).unwrap(), 1.0, epsilon = 1e-14);
        // idempotent
        let again = normalize_sphere(&unit, &m).unwrap();
        for (x, y) in unit.as_slice().iter().zip(again.as_slice()) {
            assert!((x - y).abs() <= 1e-14);
        }
        // degenerate
        let q = Configuration::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(normalize_sphere(&q, &m).is_err());
    }

    #[test]
    fn fixed_point_step_properties() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let q = equilateral_unit(&m);
        let f = fixed_point_step(&q, &m, &p).unwrap();
        // central configurations are fixed points
        for (x, y) in q.as_slice().iter().zip(f.as_slice()) {
            assert!((x - y).abs() <= 1e-11, "not fixed: {x} vs {y}");
        }
        assert_relative_eq!(mass_norm_c0(&f, &m).unwrap(), 1.0, epsilon = 1e-14);

        // equivariance under a rotation
        let any = rng_config(3, 2, 5, &m);
        let (c, s) = (0.28f64.cos(), 0.28f64.sin());
        let rotate = |q: &Configuration| {
            let mut r = q.clone();
            for j in 0..3 {
                let (x, y) = (q.point(j)[0], q.point(j)[1]);
                r.point_mut(j)[0] = c * x - s * y;
                r.point_mut(j)[1] = s * x + c * y;
            }
            r
        };
        let lhs = fixed_point_step(&rotate(&any), &m, &p).unwrap();
        let rhs = rotate(&fixed_point_step(&any, &m, &p).unwrap());
        for (x, y) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn fixed_point_two_bodies_converges_immediately() {
        let p = PotentialParams::newtonian();
        let m = Masses::new(&[0.4, 0.6]).unwrap();
        let q = Configuration::new(2, 2, vec![0.3, 0.1, -0.5, 0.8]).unwrap();
        let sol = solve_fixed_point(&q, &m, &p, &SolveSettings::default()).unwrap();
        assert!(sol.iterations <= 2);
        assert!(sol.residual_norm <= 1e-11);
    }

    #[test]
    fn fixed_point_finds_equilateral() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let s = SolveSettings {
            method: Method::FixedPoint,
            ..Default::default()
        };
        let q0 = rng_config(3, 2, 11, &m);
        let sol = solve_fixed_point(&q0, &m, &p, &s).unwrap();
        let dists = sol.configuration.sorted_distances();
        let spread = (dists[2] - dists[0]) / dists[1];
        assert!(spread <= 1e-8, "side spread {spread}");
        // solution invariants
        let center = center_of_mass(&sol.configuration, &m);
        assert!(center.iter().all(|c| c.abs() <= 1e-13));
        assert_relative_eq!(
            mass_norm_c0(&sol.configuration, &m).unwrap(),
            1.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn fixed_point_square_is_retained() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(4);
        let q = Configuration::from_points(&[
            vec![0.5, 0.5],
            vec![-0.5, 0.5],
            vec![-0.5, -0.5],
            vec![0.5, -0.5],
        ])
        .unwrap();
        let s = SolveSettings {
            method: Method::FixedPoint,
            ..Default::default()
        };
        let sol = solve_fixed_point(&q, &m, &p, &s).unwrap();
        assert!(sol.residual_norm <= 1e-10);
        // still a square: two distinct distances, 4 sides + 2 diagonals
        let dists = sol.configuration.sorted_distances();
        assert_relative_eq!(dists[3] / dists[0], 1.0, max_relative = 1e-8);
        assert_relative_eq!(dists[5] / dists[4], 1.0, max_relative = 1e-8);
        assert_relative_eq!(dists[4] / dists[0], 2f64.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn variational_objective_descends() {
        let p = PotentialParams::newtonian();
        let m = Masses::new(&[1.0, 2.0, 1.4]).unwrap();
        let q0 = rescale_configuration(&rng_config(3, 2, 17, &m), &m, &p, -2.0).unwrap();
        let out = minimize_g(&q0, &m, &p, &SolveSettings::default()).unwrap();
        for w in out.objective_history.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-15),
                "objective increased: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(out.residual_norm <= DESCENT_HANDOVER);
    }

    #[test]
    fn variational_critical_point_has_lambda_minus_two_and_small_gradient() {
        let p = PotentialParams::newtonian();
        let m = Masses::new(&[1.0, 3.0, 2.0]).unwrap();
        let sol = solve_variational(&rng_config(3, 2, 23, &m), &m, &p, &SolveSettings::default())
            .unwrap();
        let unscaled = rescale_to_lambda(&sol, -2.0, &p).unwrap();
        assert_relative_eq!(
            lambda_of(&unscaled, &m, &p).unwrap().value(),
            -2.0,
            max_relative = 1e-8
        );
        let g = grad_g(&unscaled, &m, &p).unwrap();
        let gnorm = norm2(g.as_slice()).sqrt();
        assert!(gnorm <= 1e-10, "gradient at critical point: {gnorm}");
    }

    #[test]
    fn variational_reaches_moulton_in_1d() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let q0 = Configuration::new(3, 1, vec![-1.0, 0.1, 1.2]).unwrap();
        let s = SolveSettings {
            method: Method::Variational,
            ..Default::default()
        };
        let sol = solve_variational(&q0, &m, &p, &s).unwrap();
        // equal masses: middle body at the center
        let mut xs: Vec<f64> = (0..3).map(|j| sol.configuration.point(j)[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(xs[1].abs() <= 1e-10, "middle body off center: {}", xs[1]);
        assert_relative_eq!(xs[0], -xs[2], max_relative = 1e-9);
    }

    #[test]
    fn newton_converges_from_square_start() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(4);
        let q = Configuration::from_points(&[
            vec![0.52, 0.48],
            vec![-0.49, 0.51],
            vec![-0.51, -0.52],
            vec![0.5, -0.5],
        ])
        .unwrap();
        let sol = solve_newton(&q, &m, &p, &SolveSettings::default()).unwrap();
        assert!(sol.residual_norm <= 1e-11);
    }

    #[test]
    fn fixed_point_and_variational_agree_in_the_same_basin() {
        let p = PotentialParams::newtonian();
        let m = Masses::new(&[1.0, 1.5, 2.0]).unwrap();
        let q0 = rng_config(3, 2, 29, &m);
        let s = SolveSettings::default();
        let a = solve_fixed_point(&q0, &m, &p, &s).unwrap();
        let b = solve_variational(&q0, &m, &p, &s).unwrap();
        assert!(config_distance(&a.configuration, &b.configuration, &m) <= 1e-7);
    }

    #[test]
    fn solve_is_equivariant_under_rotations() {
        let p = PotentialParams::newtonian();
        let m = Masses::new(&[1.0, 1.3, 0.9]).unwrap();
        let s = SolveSettings {
            method: Method::FixedPoint,
            ..Default::default()
        };
        let q0 = rng_config(3, 2, 41, &m);
        let (c, sn) = (0.77f64.cos(), 0.77f64.sin());
        let rotate = |q: &Configuration| {
            let mut r = q.clone();
            for j in 0..3 {
                let (x, y) = (q.point(j)[0], q.point(j)[1]);
                r.point_mut(j)[0] = c * x - sn * y;
                r.point_mut(j)[1] = sn * x + c * y;
            }
            r
        };
        let plain = solve_fixed_point(&q0, &m, &p, &s).unwrap();
        let rotated = solve_fixed_point(&rotate(&q0), &m, &p, &s).unwrap();
        for (a, b) in rotate(&plain.configuration)
            .as_slice()
            .iter()
            .zip(rotated.configuration.as_slice())
        {
            assert!((a - b).abs() <= 1e-6, "equivariance broken: {a} vs {b}");
        }
    }

    #[test]
    fn moulton_three_bodies() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let s = SolveSettings::default();
        let orderings = moulton_orderings(3);
        assert_eq!(orderings.len(), 3);
        let sols: Vec<CCSolution> = orderings
            .iter()
            .map(|o| solve_moulton(o, &m, &p, &s).unwrap())
            .collect();
        // equal masses: middle body sits at the origin
        for (o, sol) in orderings.iter().zip(&sols) {
            let mid = o[1];
            assert!(sol.configuration.point(mid)[0].abs() <= 1e-10);
            assert!(sol.residual_norm <= s.residual_tolerance);
            assert!(sol
                .classification
                .iter()
                .any(|t| matches!(t.kind, crate::analysis::TagKind::Collinear)));
        }
        // chambers give genuinely different labelings
        for i in 0..3 {
            for j in (i + 1)..3 {
                let dist = config_distance(&sols[i].configuration, &sols[j].configuration, &m);
                // equal masses make all chambers one relabeling class
                assert!(
                    dist <= 1e-8,
                    "equal-mass chambers should coincide mod relabeling"
                );
            }
        }
    }

    #[test]
    fn moulton_reversal_gives_mirror() {
        let p = PotentialParams::newtonian();
        let m = Masses::new(&[1.0, 2.0, 3.0]).unwrap();
        let s = SolveSettings::default();
        let fwd = solve_moulton(&[0, 1, 2], &m, &p, &s).unwrap();
        let rev = solve_moulton(&[2, 1, 0], &m, &p, &s).unwrap();
        for j in 0..3 {
            assert_relative_eq!(
                fwd.configuration.point(j)[0],
                -rev.configuration.point(j)[0],
                max_relative = 1e-8,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn moulton_rejects_bad_ordering() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let s = SolveSettings::default();
        assert!(solve_moulton(&[0, 1], &m, &p, &s).is_err());
        assert!(solve_moulton(&[0, 1, 1], &m, &p, &s).is_err());
    }

    #[test]
    fn multistart_n3_two_classes() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let s = SolveSettings {
            rng_seed: 7,
            ..Default::default()
        };
        let out = multistart_solve(3, 2, &m, &p, &s, 50).unwrap();
        assert_eq!(
            out.solutions.len(),
            2,
            "expected equilateral + collinear classes"
        );
        let collinear_count = out
            .solutions
            .iter()
            .filter(|sol| {
                sol.classification
                    .iter()
                    .any(|t| matches!(t.kind, crate::analysis::TagKind::Collinear))
            })
            .count();
        assert_eq!(collinear_count, 1);
        for sol in &out.solutions {
            assert!(sol.residual_norm <= s.residual_tolerance);
        }
    }

    #[test]
    fn multistart_is_deterministic() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let s = SolveSettings {
            rng_seed: 99,
            ..Default::default()
        };
        let a = multistart_solve(3, 2, &m, &p, &s, 12).unwrap();
        let b = multistart_solve(3, 2, &m, &p, &s, 12).unwrap();
        assert_eq!(a.solutions.len(), b.solutions.len());
        for (x, y) in a.solutions.iter().zip(&b.solutions) {
            assert_eq!(x.configuration.as_slice(), y.configuration.as_slice());
            assert_eq!(x.lambda.value(), y.lambda.value());
        }
    }

    #[test]
    fn rescale_identity_and_homogeneity() {
        let p = PotentialParams::newtonian();
        let m = Masses::equal(3);
        let sol =
            solve_variational(&equilateral_unit(&m), &m, &p, &SolveSettings::default()).unwrap();
        let same = rescale_to_lambda(&sol, sol.lambda.value(), &p).unwrap();
        for (x, y) in sol.configuration.as_slice().iter().zip(same.as_slice()) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }

        let at2 = rescale_to_lambda(&sol, -2.0, &p).unwrap();
        assert_relative_eq!(
            lambda_of(&at2, &m, &p).unwrap().value(),
            -2.0,
            max_relative = 1e-11
        );
        // |q|_M^2 = (alpha/2) U at lambda = -2
        let norm2v = mass_inner_c0(&at2, &at2, &m).unwrap();
        let u = potential_u(&at2, &m, &p).unwrap();
        assert_relative_eq!(norm2v, p.alpha() / 2.0 * u, max_relative = 1e-11);

        // doubling the magnitude shrinks the scale by 2^(-1/(alpha+2))
        let at4 = rescale_to_lambda(&sol, -4.0, &p).unwrap();
        let ratio = at4.point(0)[0] / at2.point(0)[0];
        assert_relative_eq!(ratio, 2f64.powf(-1.0 / 3.0), max_relative = 1e-12);

        assert!(rescale_to_lambda(&sol, 1.0, &p).is_err());
    }

    #[test]
    fn config_distance_mods_out_rotation_and_relabeling() {
        let m = Masses::equal(3);
        let a = equilateral_unit(&m);
        // rotate and relabel
        let (c, s) = (1.1f64.cos(), 1.1f64.sin());
        let mut b = Configuration::zeros(3, 2);
        let perm = [2usize, 0, 1];
        for j in 0..3 {
            let (x, y) = (a.point(perm[j])[0], a.point(perm[j])[1]);
            b.point_mut(j)[0] = c * x - s * y;
            b.point_mut(j)[1] = s * x + c * y;
        }
        assert!(config_distance(&a, &b, &m) <= 1e-12);

        // genuinely different shape
        let line = normalize_sphere(
            &Configuration::from_points(&[vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]])
                .unwrap(),
            &m,
        )
        .unwrap();
        assert!(config_distance(&a, &line, &m) > 1e-2);
    }

    #[test]
    fn moulton_ordering_count() {
        assert_eq!(moulton_orderings(2).len(), 1);
        assert_eq!(moulton_orderings(3).len(), 3);
        assert_eq!(moulton_orderings(4).len(), 12);
        assert_eq!(moulton_orderings(5).len(), 60);
    }
}
