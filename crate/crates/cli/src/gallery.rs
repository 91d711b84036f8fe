//! Generators for canonical central configurations.

use cencon::cochain::{Configuration, Masses};
use cencon::potential::PotentialParams;
use cencon::solvers::{
    solution_from_configuration, solve_moulton, solve_newton, CCSolution, Method, SolveSettings,
};

/// Equilateral triangle, central for every choice of positive masses.
pub fn lagrange(m: &Masses, p: &PotentialParams) -> anyhow::Result<CCSolution> {
    anyhow::ensure!(m.n() == 3, "lagrange requires exactly 3 masses");
    let q = Configuration::from_points(&[
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.5, 3f64.sqrt() / 2.0],
    ])?;
    Ok(solution_from_configuration(
        &q,
        m,
        p,
        1e-12,
        Method::Variational,
        0,
    )?)
}

/// Collinear three-body configuration for the ordering 0 < 1 < 2.
pub fn euler(m: &Masses, p: &PotentialParams, s: &SolveSettings) -> anyhow::Result<CCSolution> {
    anyhow::ensure!(m.n() == 3, "euler requires exactly 3 masses");
    Ok(solve_moulton(&[0, 1, 2], m, p, s)?)
}

/// Regular polygon of `n` equal masses, central by symmetry.
pub fn ngon(n: usize, p: &PotentialParams) -> anyhow::Result<CCSolution> {
    anyhow::ensure!(n >= 3, "ngon requires n >= 3");
    let m = Masses::equal(n);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            vec![theta.cos(), theta.sin()]
        })
        .collect();
    let q = Configuration::from_points(&points)?;
    Ok(solution_from_configuration(
        &q,
        &m,
        p,
        1e-10,
        Method::Variational,
        0,
    )?)
}

/// Square of four equal masses.
pub fn square(p: &PotentialParams) -> anyhow::Result<CCSolution> {
    ngon(4, p)
}

/// Pyramid over a regular `(n-1)`-gon with an apex on the symmetry axis,
/// solved numerically from the symmetric start (`n = 5` is the square-base
/// pyramid). All masses equal.
pub fn pyramid(n: usize, p: &PotentialParams, s: &SolveSettings) -> anyhow::Result<CCSolution> {
    anyhow::ensure!(
        (4..=8).contains(&n),
        "pyramid supports 4 <= n <= 8, got {n}"
    );
    let m = Masses::equal(n);
    let base = n - 1;
    let mut points: Vec<Vec<f64>> = (0..base)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / base as f64;
            vec![theta.cos() / 2f64.sqrt(), theta.sin() / 2f64.sqrt(), 0.0]
        })
        .collect();
    points.push(vec![0.0, 0.0, 0.7]);
    let q = Configuration::from_points(&points)?;
    Ok(solve_newton(&q, &m, p, s)?)
}
