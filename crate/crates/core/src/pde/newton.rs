//! Residual, Jacobian and damped Newton iteration for the discrete boundary
//! value problem.
//!
//! Unknowns are the nodes with `j ≥ 1`, numbered `(j − 1)·N_θ + i`, so the
//! Jacobian is block tridiagonal with bandwidth `N_θ`. The Robin row at
//! `t = T` eliminates the ghost node `u_{J+1} = u_{J−1} + 2h_tρ(target − u_J)`.

use super::banded::BandMatrix;
use super::{CylGrid, CylinderField, FarCondition};
use crate::error::{Error, Result};
use crate::params::CylinderParams;

/// Time-direction coefficients `(previous, diagonal, next, constant)` of row `j`.
fn t_coeffs(grid: &CylGrid, cp: &CylinderParams, far: &FarCondition, j: usize) -> (f64, f64, f64, f64) {
    let ht = grid.h_t();
    let inv2 = 1.0 / (ht * ht);
    if j + 1 < grid.n_t {
        let c = cp.b / (2.0 * ht);
        (inv2 - c, -2.0 * inv2, inv2 + c, 0.0)
    } else {
        let k = 2.0 * far.rho / ht + cp.b * far.rho;
        (2.0 * inv2, -2.0 * inv2 - k, 0.0, k * far.target)
    }
}

fn pow_p(u: f64, p: f64) -> f64 {
    if u >= 0.0 {
        u.powf(p)
    } else {
        -(-u).powf(p)
    }
}

/// Discrete residual at every node; row 0 (Dirichlet data) is zero.
pub fn assemble_residual(f: &CylinderField, far: &FarCondition) -> Vec<f64> {
    let g = &f.grid;
    let cp = &f.params;
    let m = g.n_theta;
    let mut r = vec![0.0; m * g.n_t];
    for j in 1..g.n_t {
        let (cm, c0, cpl, k) = t_coeffs(g, cp, far, j);
        for i in 0..m {
            let u = f.get(i, j);
            let mut v = cm * f.get(i, j - 1) + c0 * u + k;
            if j + 1 < g.n_t {
                v += cpl * f.get(i, j + 1);
            }
            let (l, rt) = g.stencil(i);
            if i > 0 {
                v += l * (f.get(i - 1, j) - u);
            }
            if i + 1 < m {
                v += rt * (f.get(i + 1, j) - u);
            }
            v += cp.a * u + pow_p(u, cp.p);
            r[j * m + i] = v;
        }
    }
    r
}

pub fn residual_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn jacobian(f: &CylinderField, far: &FarCondition) -> BandMatrix {
    let g = &f.grid;
    let cp = &f.params;
    let m = g.n_theta;
    let size = m * (g.n_t - 1);
    let mut jac = BandMatrix::zeros(size, m, m);
    for j in 1..g.n_t {
        let (cm, c0, cpl, _) = t_coeffs(g, cp, far, j);
        for i in 0..m {
            let row = (j - 1) * m + i;
            let u = f.get(i, j);
            let (l, rt) = g.stencil(i);
            jac.add(row, row, c0 - l - rt + cp.a + cp.p * u.abs().powf(cp.p - 1.0));
            if j > 1 {
                jac.add(row, row - m, cm);
            }
            if j + 1 < g.n_t {
                jac.add(row, row + m, cpl);
            }
            if i > 0 {
                jac.add(row, row - 1, l);
            }
            if i + 1 < m {
                jac.add(row, row + 1, rt);
            }
        }
    }
    jac
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max-norm of the residual of the returned field.
    pub residual: f64,
    /// Residual before each iteration and after the last one.
    pub residual_history: Vec<f64>,
    /// Step length accepted in each iteration.
    pub damping: Vec<f64>,
    pub converged: bool,
}

/// Blend `target + (g(θ) − target)e^{−ρt}` from the boundary data to the far
/// target, floored at `1e−6`. The blend satisfies the far condition, which
/// keeps the first Newton step away from the weakly determined decaying modes.
pub fn initial_guess(
    grid: &CylGrid,
    cp: &CylinderParams,
    boundary: impl Fn(f64) -> f64,
    far: &FarCondition,
) -> CylinderField {
    CylinderField::from_fn(grid, cp, |th, t| {
        if t == 0.0 {
            boundary(th)
        } else {
            (far.target + (boundary(th) - far.target) * (-far.rho * t).exp()).max(1e-6)
        }
    })
}

pub fn newton_solve(
    guess: CylinderField,
    far: &FarCondition,
    opts: &NewtonOptions,
) -> Result<(CylinderField, NewtonReport)> {
    if !(1e-12..=1e-6).contains(&opts.tol) {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    guess.params.validate()?;
    if let Some(k) = guess.values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidGuess(format!(
            "guess is not strictly positive at node {k} (value {})",
            guess.values[k]
        )));
    }
    let m = guess.grid.n_theta;
    let mut u = guess;
    let mut res = assemble_residual(&u, far);
    let mut norm = residual_norm(&res);
    let mut report = NewtonReport {
        iterations: 0,
        residual: norm,
        residual_history: vec![norm],
        damping: Vec::new(),
        converged: norm <= opts.tol,
    };
    while !report.converged && report.iterations < opts.max_iter {
        let lu = jacobian(&u, far).factor()?;
        let rhs: Vec<f64> = res[m..].iter().map(|v| -v).collect();
        let step = lu.solve(&rhs);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut cand = u.clone();
            let mut positive = true;
            for (v, d) in cand.values[m..].iter_mut().zip(&step) {
                *v += lambda * d;
                positive &= *v > 0.0;
            }
            if positive {
                let r = assemble_residual(&cand, far);
                let nr = residual_norm(&r);
                if nr < norm {
                    accepted = Some((cand, r, nr));
                    break;
                }
            }
            lambda *= 0.5;
        }
        report.iterations += 1;
        match accepted {
            Some((cand, r, nr)) => {
                u = cand;
                res = r;
                norm = nr;
                report.damping.push(lambda);
                report.residual_history.push(nr);
                report.residual = nr;
                report.converged = nr <= opts.tol;
            }
            None => {
                report.damping.push(0.0);
                break;
            }
        }
    }
    Ok((u, report))
}


#[cfg(test)]
mod jac_check {
    use super::*;

    #[test]
    fn jacobian_matches_differences() {
        let cp = CylinderParams { a: -1.0, b: 2.0, p: 3.0, n: 3 };
        let far = FarCondition::for_params(&cp).unwrap();
        let g = CylGrid::new(16, 64, 5.0, 3).unwrap();
        let f = initial_guess(&g, &cp, |th| 1.0 + 0.1 * th.cos(), &far);
        let jac = jacobian(&f, &far);
        let m = g.n_theta;
        let r0 = assemble_residual(&f, &far);
        let mut worst: f64 = 0.0;
        for col in [0usize, 5, 15, 16, 100, m * 62 + 3, m * 62 + 15] {
            let mut f2 = f.clone();
            let eps = 1e-6;
            f2.values[m + col] += eps;
            let r1 = assemble_residual(&f2, &far);
            for row in 0..m * (g.n_t - 1) {
                let d = (r1[m + row] - r0[m + row]) / eps;
                worst = worst.max((d - jac.get(row, col)).abs());
            }
        }
        assert!(worst < 1e-5, "{worst}");
        let rhs: Vec<f64> = r0[m..].iter().map(|v| -v).collect();
        let step = jac.clone().factor().unwrap().solve(&rhs);
        let back = jac.mul_vec(&step);
        let e = back.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(e < 1e-8, "solve error {e}");
    }
}
