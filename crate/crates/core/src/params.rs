//! Parameter charts for the cylinder and punctured-ball forms of the equation.
//!
//! The cylinder form `u_tt + Δu + b u_t + a u + u^p = 0` and the ball form
//! `Δv + c v/|x|² + v^p/|x|^σ = 0` are related by `v(x) = e^{(n+b-2)t/2} u(θ, t)`
//! with `x = e^{-t} θ`.

use std::fmt;

use crate::error::{Error, Result};

/// Relative slack for the closed comparisons of the admissibility clauses.
///
/// Boundary cases such as `p = (n+2)/(n-2)` typed in as a decimal land within a
/// few ulps of the exact bound and must count as admissible.
const BOUNDARY_SLACK: f64 = 1e-12;

/// `a ≤ b` up to [`BOUNDARY_SLACK`].
fn leq(a: f64, b: f64) -> bool {
    a <= b + BOUNDARY_SLACK * a.abs().max(b.abs()).max(1.0)
}

/// Coefficients `(a, b, p, n)` of the cylinder equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub n: u32,
}

/// Coefficients `(c, σ, p, n)` of the punctured-ball equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallParams {
    pub c: f64,
    pub sigma: f64,
    pub p: f64,
    pub n: u32,
}

/// The three parameter regimes with distinct tail behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `b = 0, a < 0`: decay, equilibrium or periodic.
    I,
    /// `b > 0, a < 0`: decay or convergence to `c₀`.
    II,
    /// `a ≥ 0`: decay to zero.
    III,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::I => "I",
            Regime::II => "II",
            Regime::III => "III",
        };
        f.write_str(s)
    }
}

/// One named clause of an admissibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: &'static str,
    pub detail: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// `b ≥ 0`, `b² − 4a ≤ (n−2)²`, `1 < p ≤ (n+b+2)/(n+b−2)`.
    pub cylinder: Vec<Clause>,
    /// `c ≥ 0`, `σ ∈ [0, 2)`, `1 < p ≤ (n+2−2σ)/(n−2)` for the mapped chart.
    pub ball: Vec<Clause>,
    pub ball_params: BallParams,
}

impl AdmissibilityReport {
    pub fn pass(&self) -> bool {
        self.cylinder.iter().all(|c| c.pass)
    }

    pub fn ball_pass(&self) -> bool {
        self.ball.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&Clause> {
        self.cylinder.iter().filter(|c| !c.pass).collect()
    }
}

impl CylinderParams {
    pub fn new(a: f64, b: f64, p: f64, n: u32) -> Result<Self> {
        let cp = Self { a, b, p, n };
        cp.validate()?;
        Ok(cp)
    }

    /// Structural requirements shared by every operation: finite values,
    /// `n ≥ 3` and `p > 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.p.is_finite()) {
            return Err(Error::InvalidParams("non-finite coefficient".into()));
        }
        if self.n < 3 {
            return Err(Error::InvalidParams(format!("n = {} < 3", self.n)));
        }
        if self.p <= 1.0 {
            return Err(Error::InvalidParams(format!("p = {} is not > 1", self.p)));
        }
        Ok(())
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Exponent `(n+b−2)/2` of the Emden-Fowler transform.
    pub fn transform_exponent(&self) -> f64 {
        (self.nf() + self.b - 2.0) / 2.0
    }

    /// Critical upper bound `(n+b+2)/(n+b−2)` for `p`.
    pub fn p_bound(&self) -> f64 {
        let m = self.nf() + self.b;
        (m + 2.0) / (m - 2.0)
    }

    /// Positive equilibrium `(−a)^{1/(p−1)}`, defined for `a < 0`.
    pub fn c0(&self) -> Option<f64> {
        (self.a < 0.0).then(|| (-self.a).powf(1.0 / (self.p - 1.0)))
    }

    pub fn to_ball(&self) -> BallParams {
        to_ball(self)
    }
}

impl BallParams {
    pub fn new(c: f64, sigma: f64, p: f64, n: u32) -> Result<Self> {
        if !(c.is_finite() && sigma.is_finite() && p.is_finite()) {
            return Err(Error::InvalidParams("non-finite coefficient".into()));
        }
        if n < 3 {
            return Err(Error::InvalidParams(format!("n = {n} < 3")));
        }
        if p <= 1.0 {
            return Err(Error::InvalidParams(format!("p = {p} is not > 1")));
        }
        Ok(Self { c, sigma, p, n })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Upper bound `(n+2−2σ)/(n−2)` for `p`.
    pub fn p_bound(&self) -> f64 {
        (self.nf() + 2.0 - 2.0 * self.sigma) / (self.nf() - 2.0)
    }

    pub fn clauses(&self) -> Vec<Clause> {
        vec![
            Clause {
                name: "c >= 0",
                detail: format!("c = {}", self.c),
                pass: leq(0.0, self.c),
            },
            Clause {
                name: "sigma in [0,2)",
                detail: format!("sigma = {}", self.sigma),
                pass: leq(0.0, self.sigma) && self.sigma < 2.0,
            },
            Clause {
                name: "1 < p <= (n+2-2sigma)/(n-2)",
                detail: format!("p = {}, bound = {}", self.p, self.p_bound()),
                pass: self.p > 1.0 && leq(self.p, self.p_bound()),
            },
        ]
    }

    pub fn admissible(&self) -> bool {
        self.clauses().iter().all(|c| c.pass)
    }

    pub fn to_cylinder(&self) -> CylinderParams {
        to_cylinder(self)
    }
}

/// `c = ((n−2)² − b² + 4a)/4`, `σ = 2 − (p−1)(b+n−2)/2`.
pub fn to_ball(cp: &CylinderParams) -> BallParams {
    let m = cp.nf() - 2.0;
    BallParams {
        c: (m * m - cp.b * cp.b + 4.0 * cp.a) / 4.0,
        sigma: 2.0 - (cp.p - 1.0) * (cp.b + m) / 2.0,
        p: cp.p,
        n: cp.n,
    }
}

/// Inverse of [`to_ball`].
pub fn to_cylinder(bp: &BallParams) -> CylinderParams {
    let m = bp.nf() - 2.0;
    let b = 2.0 * (2.0 - bp.sigma) / (bp.p - 1.0) - m;
    // a = (b² − m² + 4c)/4, factored to limit cancellation
    let a = bp.c - (m - b) * (m + b) / 4.0;
    CylinderParams {
        a,
        b,
        p: bp.p,
        n: bp.n,
    }
}

pub fn check_admissible(cp: &CylinderParams) -> AdmissibilityReport {
    let m = cp.nf() - 2.0;
    let disc = cp.b * cp.b - 4.0 * cp.a;
    let denom = cp.nf() + cp.b - 2.0;
    // p ≤ (n+b+2)/(n+b−2) cross-multiplied; the denominator is positive when b ≥ 0
    let p_ok = cp.p > 1.0 && denom > 0.0 && leq(cp.p * denom, denom + 4.0);
    let cylinder = vec![
        Clause {
            name: "b >= 0",
            detail: format!("b = {}", cp.b),
            pass: leq(0.0, cp.b),
        },
        Clause {
            name: "b^2-4a <= (n-2)^2",
            detail: format!("b^2-4a = {}, (n-2)^2 = {}", disc, m * m),
            pass: leq(disc, m * m),
        },
        Clause {
            name: "1 < p <= (n+b+2)/(n+b-2)",
            detail: format!("p = {}, bound = {}", cp.p, cp.p_bound()),
            pass: p_ok,
        },
    ];
    let ball_params = to_ball(cp);
    AdmissibilityReport {
        cylinder,
        ball: ball_params.clauses(),
        ball_params,
    }
}

/// Regime split by the signs of `a` and `b`.
///
/// Only the structural requirements (`n ≥ 3`, `p > 1`, `b ≥ 0`) are enforced;
/// the quantitative clauses of [`check_admissible`] are reported separately.
pub fn classify_regime(cp: &CylinderParams) -> Result<Regime> {
    cp.validate()?;
    if !leq(0.0, cp.b) {
        return Err(Error::Inadmissible(format!(
            "b = {} < 0 is not supported",
            cp.b
        )));
    }
    Ok(if cp.a >= 0.0 {
        Regime::III
    } else if cp.b == 0.0 {
        Regime::I
    } else {
        Regime::II
    })
}

/// Like [`classify_regime`] but also requires every admissibility clause.
pub fn classify_regime_strict(cp: &CylinderParams) -> Result<Regime> {
    let report = check_admissible(cp);
    if !report.pass() {
        let names: Vec<_> = report.failed().iter().map(|c| c.name).collect();
        return Err(Error::Inadmissible(names.join(", ")));
    }
    classify_regime(cp)
}

/// A point of the punctured ball together with the value of `v` there.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    pub v: f64,
    pub x: Vec<f64>,
}

/// Largest `|k t|` for which `e^{k t}` is evaluated.
pub const TRANSFORM_EXP_LIMIT: f64 = 700.0;

/// Maps `u(θ, t)` to `(v(x), x)` with `x = e^{−t} θ`.
pub fn transform_point(u: f64, theta: &[f64], t: f64, cp: &CylinderParams) -> Result<BallPoint> {
    if !(u > 0.0) {
        return Err(Error::OutOfRange(format!("u = {u} must be positive")));
    }
    let k = cp.transform_exponent();
    if !t.is_finite() || (k * t).abs() > TRANSFORM_EXP_LIMIT || t.abs() > TRANSFORM_EXP_LIMIT {
        return Err(Error::OutOfRange(format!("t = {t} overflows the transform")));
    }
    let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::OutOfRange("theta must be a nonzero direction".into()));
    }
    let r = (-t).exp();
    Ok(BallPoint {
        v: (k * t).exp() * u,
        x: theta.iter().map(|c| r * c / norm).collect(),
    })
}

/// Inverse of [`transform_point`]: returns `(u, θ, t)`.
pub fn inverse_transform(point: &BallPoint, cp: &CylinderParams) -> Result<(f64, Vec<f64>, f64)> {
    let r = point.x.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(r > 0.0) {
        return Err(Error::OutOfRange("x = 0 is the singular point".into()));
    }
    let t = -r.ln();
    let k = cp.transform_exponent();
    if (k * t).abs() > TRANSFORM_EXP_LIMIT {
        return Err(Error::OutOfRange(format!("t = {t} overflows the transform")));
    }
    let theta = point.x.iter().map(|c| c / r).collect();
    Ok(((-k * t).exp() * point.v, theta, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyl(a: f64, b: f64, p: f64, n: u32) -> CylinderParams {
        CylinderParams { a, b, p, n }
    }

    #[test]
    fn yamabe_case_maps_to_zero_chart() {
        let bp = to_ball(&cyl(-0.25, 0.0, 5.0, 3));
        assert_eq!(bp.c, 0.0);
        assert_eq!(bp.sigma, 0.0);
        assert_eq!((bp.p, bp.n), (5.0, 3));
    }

    #[test]
    fn aviles_case() {
        for n in 3..8 {
            let p = 1.7;
            let bp = to_ball(&cyl(0.0, n as f64 - 2.0, p, n));
            assert!(bp.c.abs() < 1e-14);
            let expected = 2.0 - (p - 1.0) * (n as f64 - 2.0);
            assert!((bp.sigma - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn n4_p2_chart() {
        let bp = to_ball(&cyl(0.0, 0.0, 2.0, 4));
        assert_eq!(bp.c, 1.0);
        // 2 − (1/2)(1)(2) = 1
        assert_eq!(bp.sigma, 1.0);
    }

    #[test]
    fn inverse_chart_examples() {
        let cp = to_cylinder(&BallParams { c: 0.0, sigma: 0.0, p: 5.0, n: 3 });
        assert!((cp.a + 0.25).abs() < 1e-15 && cp.b.abs() < 1e-15);
        for n in 3..10u32 {
            let p = (n as f64 + 2.0) / (n as f64 - 2.0);
            let cp = to_cylinder(&BallParams { c: 0.0, sigma: 0.0, p, n });
            let m = n as f64 - 2.0;
            assert!(cp.b.abs() < 1e-13, "n={n} b={}", cp.b);
            assert!((cp.a + m * m / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn admissibility_examples() {
        let r = check_admissible(&cyl(-1.0, 1.0, 2.0, 4));
        assert!(!r.pass());
        assert!(r.cylinder[0].pass);
        assert!(!r.cylinder[1].pass);

        let r = check_admissible(&cyl(-0.25, 0.0, 5.0, 3));
        assert!(r.pass() && r.ball_pass());

        let r = check_admissible(&cyl(0.0, 0.0, 1.0, 3));
        assert!(!r.pass());
        assert!(!r.cylinder[2].pass);
    }

    #[test]
    fn decimal_critical_exponent_is_admissible() {
        // 7/3 typed as a decimal
        let r = check_admissible(&cyl(-1.0, 0.0, 2.3333333333333335, 5));
        assert!(r.pass());
        assert!(r.ball_pass());
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&cyl(-1.0, 0.0, 3.0, 5)).unwrap(), Regime::I);
        assert_eq!(classify_regime(&cyl(-1.0, 1.0, 2.0, 6)).unwrap(), Regime::II);
        assert_eq!(classify_regime(&cyl(0.0, 2.0, 2.0, 5)).unwrap(), Regime::III);
        assert!(classify_regime(&cyl(-1.0, -0.5, 2.0, 5)).is_err());
        assert!(classify_regime(&cyl(-1.0, 0.0, 1.0, 5)).is_err());
        assert!(classify_regime_strict(&cyl(-1.0, 0.0, 3.0, 5)).is_err());
        assert_eq!(
            classify_regime_strict(&cyl(-0.25, 0.0, 5.0, 3)).unwrap(),
            Regime::I
        );
    }

    #[test]
    fn transform_examples() {
        let cp = cyl(-1.0, 0.0, 2.0, 4);
        let pt = transform_point(1.0, &[0.0, 0.0, 0.0, 1.0], 0.0, &cp).unwrap();
        assert_eq!(pt.v, 1.0);
        assert!((pt.x.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-15);

        let pt = transform_point(1.0, &[1.0, 0.0, 0.0, 0.0], 2f64.ln(), &cp).unwrap();
        assert!((pt.v - 2.0).abs() < 1e-15);
        assert!((pt.x[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn transform_range_guard() {
        let cp = cyl(-1.0, 0.0, 2.0, 4);
        assert!(transform_point(1.0, &[1.0, 0.0, 0.0, 0.0], 701.0, &cp).is_err());
        assert!(transform_point(1.0, &[1.0, 0.0, 0.0, 0.0], -701.0, &cp).is_err());
        assert!(transform_point(0.0, &[1.0, 0.0, 0.0, 0.0], 1.0, &cp).is_err());
    }
}
