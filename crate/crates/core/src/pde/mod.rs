//! Axisymmetric solutions of `u_tt + Δ_{S^{n−1}}u + b u_t + a u + u^p = 0` on
//! `[0, π] × [0, T]`, their spherical averages, and the symmetry defect.
//!
//! The polar-angle grid includes both poles. The operator is a finite-volume
//! discretization with exact cell volumes `∫ sin^{n−2}`; the pole cells get
//! the weight that reproduces the stencil `2(n−1)(u₁ − u₀)/h²`. With these
//! weights the discrete spherical average of the discrete Laplacian is zero.

pub mod banded;
mod newton;

pub use newton::{
    assemble_residual, initial_guess, newton_solve, residual_norm, NewtonOptions, NewtonReport,
};

use crate::error::{Error, Result};
use crate::fitter::{fit_rate, RateFit};
use crate::ode::{linearized_roots_at_c0, char_roots};
use crate::params::CylinderParams;
use crate::quad::GaussRule;
use std::f64::consts::PI;

pub const MIN_THETA_NODES: usize = 16;
pub const MIN_T_NODES: usize = 64;
pub const DEFAULT_T_MAX: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CylGrid {
    pub n_theta: usize,
    pub n_t: usize,
    pub t_max: f64,
    pub n: u32,
    theta: Vec<f64>,
    t: Vec<f64>,
    /// Quadrature weight of each θ node (cell volume).
    weights: Vec<f64>,
    /// `sin^{n−2}` at the cell faces `θ_{i+1/2}`.
    faces: Vec<f64>,
}

impl CylGrid {
    pub fn new(n_theta: usize, n_t: usize, t_max: f64, n: u32) -> Result<Self> {
        if n_theta < MIN_THETA_NODES || n_t < MIN_T_NODES {
            return Err(Error::OutOfRange(format!(
                "grid {n_theta}×{n_t} below the minimum {MIN_THETA_NODES}×{MIN_T_NODES}"
            )));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::OutOfRange(format!("T = {t_max}")));
        }
        if n < 3 {
            return Err(Error::InvalidParams(format!("n = {n} < 3")));
        }
        let h = PI / (n_theta - 1) as f64;
        let theta: Vec<f64> = (0..n_theta).map(|i| i as f64 * h).collect();
        let t = (0..n_t)
            .map(|j| t_max * j as f64 / (n_t - 1) as f64)
            .collect();
        let k = n as i32 - 2;
        let s = |x: f64| x.sin().powi(k);
        let faces: Vec<f64> = (0..n_theta - 1).map(|i| s((i as f64 + 0.5) * h)).collect();
        let rule = GaussRule::new(8);
        let pole = h * s(0.5 * h) / (2.0 * (n as f64 - 1.0));
        let weights = (0..n_theta)
            .map(|i| {
                if i == 0 || i == n_theta - 1 {
                    pole
                } else {
                    rule.integrate(s, theta[i] - 0.5 * h, theta[i] + 0.5 * h, 1)
                }
            })
            .collect();
        Ok(Self {
            n_theta,
            n_t,
            t_max,
            n,
            theta,
            t,
            weights,
            faces,
        })
    }

    pub fn h_theta(&self) -> f64 {
        self.theta[1]
    }

    pub fn h_t(&self) -> f64 {
        self.t[1]
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Grid with halved spacings over the same domain.
    pub fn refined(&self) -> Result<Self> {
        Self::new(2 * self.n_theta - 1, 2 * self.n_t - 1, self.t_max, self.n)
    }

    /// Coefficients `(left, right)` of the θ-stencil at node `i`; the diagonal is
    /// `−(left + right)`.
    fn stencil(&self, i: usize) -> (f64, f64) {
        let h = self.h_theta();
        let m = self.n_theta;
        let w = self.weights[i] * h;
        let left = if i == 0 { 0.0 } else { self.faces[i - 1] / w };
        let right = if i == m - 1 { 0.0 } else { self.faces[i] / w };
        (left, right)
    }
}

/// Discrete `Δ_{S^{n−1}}` applied to an axisymmetric row `u(θᵢ)`.
pub fn laplace_beltrami_axisym(row: &[f64], grid: &CylGrid) -> Vec<f64> {
    let m = grid.n_theta;
    assert_eq!(row.len(), m, "row length");
    (0..m)
        .map(|i| {
            let (l, r) = grid.stencil(i);
            let left = if i > 0 { l * (row[i - 1] - row[i]) } else { 0.0 };
            let right = if i + 1 < m { r * (row[i + 1] - row[i]) } else { 0.0 };
            left + right
        })
        .collect()
}

/// `u(θᵢ, tⱼ)` stored row by row in `t`; row 0 holds the Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderField {
    pub grid: CylGrid,
    pub params: CylinderParams,
    pub values: Vec<f64>,
}

impl CylinderField {
    pub fn from_fn(grid: &CylGrid, cp: &CylinderParams, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_theta * grid.n_t);
        for &t in grid.t() {
            for &th in grid.theta() {
                values.push(f(th, t));
            }
        }
        Self {
            grid: grid.clone(),
            params: *cp,
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.n_theta + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let m = self.grid.n_theta;
        &self.values[j * m..(j + 1) * m]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest spread `max_θ u − min_θ u` over the rows.
    pub fn column_spread(&self) -> f64 {
        (0..self.grid.n_t)
            .map(|j| {
                let r = self.row(j);
                let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Cubic interpolation onto the grid with halved spacings.
    pub fn refine(&self) -> Result<CylinderField> {
        let fine = self.grid.refined()?;
        let (m, nt) = (self.grid.n_theta, self.grid.n_t);
        let mf = fine.n_theta;
        // θ direction first, on the coarse t rows; poles are even reflections
        let mut half = vec![0.0; mf * nt];
        for j in 0..nt {
            let row = self.row(j);
            let at = |k: isize| -> f64 {
                let k = if k < 0 {
                    -k
                } else if k >= m as isize {
                    2 * (m as isize - 1) - k
                } else {
                    k
                };
                row[k as usize]
            };
            for i in 0..mf {
                half[j * mf + i] = if i % 2 == 0 {
                    row[i / 2]
                } else {
                    let k = (i / 2) as isize;
                    (-at(k - 1) + 9.0 * at(k) + 9.0 * at(k + 1) - at(k + 2)) / 16.0
                };
            }
        }
        let ntf = fine.n_t;
        let mut values = vec![0.0; mf * ntf];
        for i in 0..mf {
            let col = |j: usize| half[j * mf + i];
            for jf in 0..ntf {
                values[jf * mf + i] = if jf % 2 == 0 {
                    col(jf / 2)
                } else {
                    let k = jf / 2;
                    if k == 0 {
                        (5.0 * col(0) + 15.0 * col(1) - 5.0 * col(2) + col(3)) / 16.0
                    } else if k + 2 >= nt {
                        (col(k - 2) - 5.0 * col(k - 1) + 15.0 * col(k) + 5.0 * col(k + 1)) / 16.0
                    } else {
                        (-col(k - 1) + 9.0 * col(k) + 9.0 * col(k + 1) - col(k + 2)) / 16.0
                    }
                };
            }
        }
        Ok(CylinderField {
            grid: fine,
            params: self.params,
            values,
        })
    }

    /// Replaces row 0 with `g(θ)` sampled on this field's grid.
    pub fn set_boundary(&mut self, g: impl Fn(f64) -> f64) {
        let m = self.grid.n_theta;
        for i in 0..m {
            self.values[i] = g(self.grid.theta[i]);
        }
    }
}

/// Max-norm residual of the cubic interpolant of `coarse` under the operator of
/// the grid with halved spacings.
pub fn cross_residual(coarse: &CylinderField, far: &FarCondition) -> Result<f64> {
    let fine = coarse.refine()?;
    Ok(residual_norm(&assemble_residual(&fine, far)))
}

/// Condition `∂ₜu + ρu = ρ·target` at `t = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarCondition {
    pub rho: f64,
    pub target: f64,
}

impl FarCondition {
    /// Convergence to `c₀` at rate `α₀` (`a < 0`), otherwise decay to 0 at the
    /// slowest linear rate `−Re λ₂` of `λ² + bλ + a`.
    pub fn for_params(cp: &CylinderParams) -> Result<Self> {
        cp.validate()?;
        if cp.a < 0.0 {
            let r = linearized_roots_at_c0(cp)?;
            Ok(Self {
                rho: r.alpha0.max(0.0),
                target: r.c0.expect("a < 0"),
            })
        } else {
            Ok(Self {
                rho: (-char_roots(cp).mu2).max(0.0),
                target: 0.0,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedProfile {
    pub t: Vec<f64>,
    pub ubar: Vec<f64>,
    pub defect: Vec<f64>,
}

/// `ū(tⱼ) = Σ wᵢ u(θᵢ, tⱼ) / Σ wᵢ` with the grid's cell volumes as weights.
pub fn spherical_average(f: &CylinderField) -> AveragedProfile {
    let g = &f.grid;
    let total: f64 = g.weights.iter().sum();
    let mut ubar = Vec::with_capacity(g.n_t);
    let mut defect = Vec::with_capacity(g.n_t);
    for j in 0..g.n_t {
        let row = f.row(j);
        let avg = row.iter().zip(&g.weights).map(|(u, w)| u * w).sum::<f64>() / total;
        let d = row.iter().map(|u| (u / avg - 1.0).abs()).fold(0.0, f64::max);
        ubar.push(avg);
        defect.push(d);
    }
    AveragedProfile {
        t: g.t.clone(),
        ubar,
        defect,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedResidual {
    pub t: f64,
    /// `ū'' + bū' + aū + ū^p` by the grid's finite differences.
    pub lhs: f64,
    /// `−avg(u^p − ū^p)`.
    pub rhs: f64,
    /// `|rhs| / ū^p`.
    pub bound: f64,
}

/// Both sides of the averaged equation at the interior time nodes.
pub fn averaged_residual(prof: &AveragedProfile, f: &CylinderField) -> Vec<AveragedResidual> {
    let g = &f.grid;
    let cp = &f.params;
    let (ht, p) = (g.h_t(), cp.p);
    let total: f64 = g.weights.iter().sum();
    let u = &prof.ubar;
    (1..g.n_t - 1)
        .map(|j| {
            let d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (ht * ht);
            let d1 = (u[j + 1] - u[j - 1]) / (2.0 * ht);
            let up = u[j].powf(p);
            let lhs = d2 + cp.b * d1 + cp.a * u[j] + up;
            let avg_pow = f
                .row(j)
                .iter()
                .zip(&g.weights)
                .map(|(v, w)| v.powf(p) * w)
                .sum::<f64>()
                / total;
            let rhs = -(avg_pow - up);
            AveragedResidual {
                t: g.t[j],
                lhs,
                rhs,
                bound: rhs.abs() / up,
            }
        })
        .collect()
}

/// Defect below which a profile counts as exactly symmetric.
pub const SYMMETRIC_DEFECT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryConfig {
    /// Fits start at this time, after the boundary layer at `t = 0`.
    pub t_min: f64,
    /// Fits stop once the defect falls below this level.
    pub defect_floor: f64,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        Self {
            t_min: 1.0,
            defect_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryOutcome {
    ExactlySymmetric,
    Rate(RateFit),
}

/// Exponential rate of the symmetry defect.
pub fn symmetry_rate(prof: &AveragedProfile, cfg: &SymmetryConfig) -> Result<SymmetryOutcome> {
    if prof.defect.iter().all(|&d| d <= SYMMETRIC_DEFECT) {
        return Ok(SymmetryOutcome::ExactlySymmetric);
    }
    let samples: Vec<(f64, f64)> = prof
        .t
        .iter()
        .zip(&prof.defect)
        .filter(|(&t, _)| t >= cfg.t_min)
        .map(|(&t, &d)| (t, d))
        .take_while(|&(_, d)| d >= cfg.defect_floor)
        .collect();
    Ok(SymmetryOutcome::Rate(fit_rate(&samples, 0.0)?))
}
