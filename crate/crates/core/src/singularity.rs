//! Behavior of `v` at the puncture of the ball chart: removability verdicts,
//! the Kelvin transform, the standard bubble and the symmetry condition for
//! `f(x, t) = c·t/|x|² + t^p/|x|^σ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fitter::AsymptoticClass;
use crate::params::{classify_regime, to_ball, BallParams, CylinderParams, Regime};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KelvinSpec {
    pub center: Vec<f64>,
    pub lambda: f64,
}

impl KelvinSpec {
    pub fn new(center: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::OutOfRange(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self { center, lambda })
    }

    /// The inverted point `x₀ + λ²(x−x₀)/|x−x₀|²`.
    pub fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.center.len() {
            return Err(Error::OutOfRange("dimension mismatch".into()));
        }
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let r2 = d.iter().map(|v| v * v).sum::<f64>();
        if r2 == 0.0 {
            return Err(Error::OutOfRange("x equals the center of inversion".into()));
        }
        let s = self.lambda * self.lambda / r2;
        Ok(self.center.iter().zip(&d).map(|(c, v)| c + s * v).collect())
    }
}

/// `w_{x₀,λ}(x) = (λ/|x−x₀|)^{n−2} w(x₀ + λ²(x−x₀)/|x−x₀|²)` with `n = x.len()`.
pub fn kelvin<W: Fn(&[f64]) -> f64>(w: W, spec: &KelvinSpec, x: &[f64]) -> Result<f64> {
    let y = spec.invert(x)?;
    let r = x
        .iter()
        .zip(&spec.center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let n = x.len() as i32;
    Ok((spec.lambda / r).powi(n - 2) * w(&y))
}

/// `(n(n−2)/(n(n−2) + |y|²))^{(n−2)/2}`.
pub fn bubble(y: &[f64], n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("n = {n} < 3")));
    }
    Ok(bubble_radial(norm(y), n))
}

fn bubble_radial(r: f64, n: u32) -> f64 {
    let k = (n * (n - 2)) as f64;
    (k / (k + r * r)).powf((n as f64 - 2.0) / 2.0)
}

/// `w'' + (n−1)w'/r + w^{(n+2)/(n−2)}` of the bubble by centered differences of step `h`.
pub fn bubble_residual(r: f64, h: f64, n: u32) -> f64 {
    let w = |s: f64| bubble_radial(s, n);
    let nf = n as f64;
    let d2 = (w(r + h) - 2.0 * w(r) + w(r - h)) / (h * h);
    let d1 = (w(r + h) - w(r - h)) / (2.0 * h);
    d2 + (nf - 1.0) * d1 / r + w(r).powf((nf + 2.0) / (nf - 2.0))
}

/// Whether `|x|^{−q}` and its gradient are square integrable near 0 in `ℝⁿ`.
pub fn h1loc_exponent_test(q: f64, n: u32) -> bool {
    q <= 0.0 || q < (n as f64 - 2.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictClass {
    RemovableSmooth,
    H1Unbounded,
    NonRemovableRate,
    /// Regime III: only an upper bound `v ≤ C|x|^{−q}` is available.
    UpperBoundOnly,
}

impl VerdictClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictClass::RemovableSmooth => "removable-smooth",
            VerdictClass::H1Unbounded => "H1-unbounded",
            VerdictClass::NonRemovableRate => "non-removable-rate",
            VerdictClass::UpperBoundOnly => "upper-bound-only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityVerdict {
    pub class: VerdictClass,
    /// `q` in `v ≍ |x|^{−q}` (or `v ≤ C|x|^{−q}` when not two-sided).
    pub exponent: f64,
    pub h1loc: bool,
    pub two_sided: bool,
}

const C_ZERO_TOL: f64 = 1e-12;

pub fn classify_singularity(cp: &CylinderParams, cls: &AsymptoticClass) -> Result<SingularityVerdict> {
    let regime = classify_regime(cp)?;
    let bp = to_ball(cp);
    let nm = cp.nf() - 2.0;
    let disc = cp.b * cp.b - 4.0 * cp.a;
    let rate_exponent = (2.0 - bp.sigma) / (cp.p - 1.0);
    if regime == Regime::III {
        // slowest admissible decay −Re λ₂ of λ² + bλ + a
        let gamma = if disc > 0.0 {
            (cp.b - disc.sqrt()) / 2.0
        } else {
            cp.b / 2.0
        };
        let q = rate_exponent - gamma;
        return Ok(SingularityVerdict {
            class: VerdictClass::UpperBoundOnly,
            exponent: q,
            h1loc: h1loc_exponent_test(q, cp.n),
            two_sided: false,
        });
    }
    match cls {
        AsymptoticClass::ConstantLimit { .. } | AsymptoticClass::PeriodicLimit { .. } => {
            Ok(SingularityVerdict {
                class: VerdictClass::NonRemovableRate,
                exponent: rate_exponent,
                h1loc: h1loc_exponent_test(rate_exponent, cp.n),
                two_sided: true,
            })
        }
        AsymptoticClass::FastDecay { .. } => {
            let c_scale = (nm * nm / 4.0).max(1.0);
            if bp.c.abs() <= C_ZERO_TOL * c_scale {
                Ok(SingularityVerdict {
                    class: VerdictClass::RemovableSmooth,
                    exponent: 0.0,
                    h1loc: true,
                    two_sided: true,
                })
            } else if bp.c > 0.0 && bp.c < nm * nm / 4.0 {
                let q = (nm - disc.sqrt()) / 2.0;
                Ok(SingularityVerdict {
                    class: VerdictClass::H1Unbounded,
                    exponent: q,
                    h1loc: h1loc_exponent_test(q, cp.n),
                    two_sided: true,
                })
            } else {
                Err(Error::Unsupported(format!(
                    "decay with c = {} lies outside 0 <= c < (n-2)^2/4",
                    bp.c
                )))
            }
        }
        other => Err(Error::Unsupported(format!(
            "no verdict for class {} in regime {regime}",
            other.tag()
        ))),
    }
}

/// `(b−√(b²−4a))/2 − (2−σ)/(p−1) + √((n−2)²−4c)/2 + (n−2)/2`, zero by the chart map.
///
/// Square roots of negative discriminants are replaced by their real part 0.
pub fn exponent_identity_gap(cp: &CylinderParams) -> f64 {
    let bp = to_ball(cp);
    let nm = cp.nf() - 2.0;
    let re_sqrt = |x: f64| x.max(0.0).sqrt();
    let lhs = (cp.b - re_sqrt(cp.b * cp.b - 4.0 * cp.a)) / 2.0 - (2.0 - bp.sigma) / (cp.p - 1.0);
    let rhs = -re_sqrt(nm * nm - 4.0 * bp.c) / 2.0 - nm / 2.0;
    lhs - rhs
}

/// `f(x, t) = c·t/|x|² + t^p/|x|^σ`.
pub fn source_term(bp: &BallParams, x: &[f64], t: f64) -> f64 {
    let r = norm(x);
    bp.c * t / (r * r) + t.powf(bp.p) / r.powf(bp.sigma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryWitness {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCheck {
    pub samples: usize,
    pub admissible: bool,
    /// Largest `lhs/rhs` over the samples.
    pub worst_ratio: f64,
    pub witness: Option<SymmetryWitness>,
}

impl SymmetryCheck {
    pub fn pass(&self) -> bool {
        self.witness.is_none()
    }
}

pub const SYMMETRY_SLACK: f64 = 1e-12;

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|c| c / r).collect();
        }
    }
}

/// Samples `x ≠ 0, 0 < λ < |x|, |z| > λ, 0 ≤ a ≤ b` and checks
/// `(λ/|z|)^{n+2} f(x + λ²z/|z|², (|z|/λ)^{n−2}a) ≤ f(x+z, b)`.
pub fn check_symmetry_condition(bp: &BallParams, samples: usize, seed: u64) -> SymmetryCheck {
    let n = bp.n as usize;
    let nf = bp.nf();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_ratio: f64 = 0.0;
    let mut witness = None;
    let mut done = 0;
    while done < samples {
        let rx = 10f64.powf(rng.gen_range(-1.0..1.0));
        let x: Vec<f64> = random_direction(&mut rng, n).iter().map(|v| v * rx).collect();
        let lambda = rx * rng.gen_range(0.01..1.0);
        let rz = lambda * (1.0 + 10f64.powf(rng.gen_range(-3.0..1.0)));
        let z: Vec<f64> = random_direction(&mut rng, n).iter().map(|v| v * rz).collect();
        let xz: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
        if norm(&xz) < 1e-9 * rx {
            continue;
        }
        let b_val = 10f64.powf(rng.gen_range(-2.0..2.0));
        let a_val = b_val * rng.gen_range(0.0..1.0);
        let mu = rz / lambda;
        let s = lambda * lambda / (rz * rz);
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + s * b).collect();
        let lhs = mu.powf(-(nf + 2.0)) * source_term(bp, &y, mu.powf(nf - 2.0) * a_val);
        let rhs = source_term(bp, &xz, b_val);
        done += 1;
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
        if witness.is_none() && lhs > rhs * (1.0 + SYMMETRY_SLACK) {
            witness = Some(SymmetryWitness {
                x,
                z,
                lambda,
                a: a_val,
                b: b_val,
                lhs,
                rhs,
            });
        }
    }
    SymmetryCheck {
        samples,
        admissible: bp.admissible(),
        worst_ratio,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitter::RateFit;

    fn fast() -> AsymptoticClass {
        AsymptoticClass::FastDecay {
            fit: RateFit {
                gamma: 1.0,
                c: 1.0,
                r2: 1.0,
                window: (0.0, 1.0),
                points: 10,
                envelope: false,
            },
            predicted: None,
        }
    }

    fn constant() -> AsymptoticClass {
        AsymptoticClass::ConstantLimit {
            c0: 1.0,
            fit: None,
            predicted: None,
        }
    }

    #[test]
    fn kelvin_identities() {
        let w = |y: &[f64]| 1.0 + y[0] * y[0] + 0.5 * y[1] - y[2].sin();
        let spec = KelvinSpec::new(vec![0.3, -0.2, 0.1], 1.5).unwrap();
        // fixed sphere
        let x = [0.3 + 1.5, -0.2, 0.1];
        assert!((kelvin(w, &spec, &x).unwrap() - w(&x)).abs() < 1e-14);
        // involution
        let x = [1.0, 2.0, -0.7];
        let twice = kelvin(|y: &[f64]| kelvin(w, &spec, y).unwrap(), &spec, &x).unwrap();
        assert!((twice / w(&x) - 1.0).abs() < 1e-12);
        // constants
        let r = norm(&[0.7, 2.2, -0.8]);
        let v = kelvin(|_: &[f64]| 2.0, &spec, &x).unwrap();
        assert!((v - 2.0 * 1.5 / r).abs() < 1e-14);
        assert!(kelvin(w, &spec, &[0.3, -0.2, 0.1]).is_err());
        assert!(KelvinSpec::new(vec![0.0; 3], 0.0).is_err());
    }

    #[test]
    fn bubble_values() {
        for n in 3..8 {
            assert_eq!(bubble(&vec![0.0; n as usize], n).unwrap(), 1.0);
        }
        let y = [1.0, 1.0, 1.0];
        assert!((bubble(&y, 3).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(bubble(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn bubble_solves_critical_equation() {
        for n in [3, 4, 5] {
            let worst = |h: f64| {
                (0..100)
                    .map(|k| 0.1 + 9.9 * k as f64 / 99.0)
                    .map(|r| bubble_residual(r, h, n).abs())
                    .fold(0.0, f64::max)
            };
            let (e1, e2) = (worst(1e-3), worst(5e-4));
            assert!(e1 < 1e-4, "n={n} {e1}");
            assert!((e1 / e2).log2() > 1.8, "n={n} {e1} {e2}");
        }
    }

    #[test]
    fn h1loc_examples() {
        assert!(h1loc_exponent_test(0.0, 3));
        assert!(!h1loc_exponent_test(0.5, 3));
        assert!(!h1loc_exponent_test(1.0, 4));
        assert!(h1loc_exponent_test(0.5, 4));
        assert!(h1loc_exponent_test(-2.0, 3));
    }

    #[test]
    fn verdicts() {
        // c = 0: b = 0, a = −(n−2)²/4
        let cp = CylinderParams { a: -0.25, b: 0.0, p: 5.0, n: 3 };
        let v = classify_singularity(&cp, &fast()).unwrap();
        assert_eq!(v.class, VerdictClass::RemovableSmooth);
        // 0 < c < (n−2)²/4
        let cp = CylinderParams { a: -1.0, b: 0.0, p: 1.5, n: 5 };
        let v = classify_singularity(&cp, &fast()).unwrap();
        assert_eq!(v.class, VerdictClass::H1Unbounded);
        assert!((v.exponent - 0.5).abs() < 1e-15 && v.h1loc);
        // constant limit
        let cp = CylinderParams { a: -1.0, b: 1.0, p: 2.0, n: 6 };
        let v = classify_singularity(&cp, &constant()).unwrap();
        let bp = to_ball(&cp);
        assert_eq!(v.class, VerdictClass::NonRemovableRate);
        assert!((v.exponent - (2.0 - bp.sigma) / (bp.p - 1.0)).abs() < 1e-15);
        assert!((v.exponent - cp.transform_exponent()).abs() < 1e-14);
        // regime III
        let cp = CylinderParams { a: 0.0, b: 2.0, p: 2.0, n: 5 };
        let v = classify_singularity(&cp, &fast()).unwrap();
        assert_eq!(v.class, VerdictClass::UpperBoundOnly);
        assert!(!v.two_sided);
        // c < 0 has no verdict
        let cp = CylinderParams { a: -9.0, b: 0.0, p: 1.2, n: 3 };
        assert!(classify_singularity(&cp, &fast()).is_err());
    }

    #[test]
    fn verdict_exponent_matches_transform() {
        // q = (n+b−2)/2 − decay rate
        let cp = CylinderParams { a: -1.0, b: 0.5, p: 1.3, n: 5 };
        let rate = (cp.b + (cp.b * cp.b - 4.0 * cp.a).sqrt()) / 2.0;
        let v = classify_singularity(&cp, &fast()).unwrap();
        assert!((cp.transform_exponent() - rate - v.exponent).abs() < 1e-14);
    }

    #[test]
    fn identity_gap_vanishes() {
        for (a, b, p, n) in [(-1.0, 0.0, 3.0, 5), (-0.3, 0.7, 1.4, 4), (0.1, 1.5, 1.2, 7)] {
            let gap = exponent_identity_gap(&CylinderParams { a, b, p, n });
            assert!(gap.abs() < 1e-12, "{gap}");
        }
    }

    #[test]
    fn symmetry_condition_critical_case() {
        let bp = BallParams { c: 0.0, sigma: 0.0, p: 5.0, n: 3 };
        let chk = check_symmetry_condition(&bp, 2000, 11);
        assert!(chk.pass() && chk.admissible);
        let bp = BallParams { c: 0.2, sigma: 1.0, p: 2.0, n: 4 };
        assert!(check_symmetry_condition(&bp, 2000, 12).pass());
    }

    #[test]
    fn symmetry_condition_is_seeded() {
        let bp = BallParams { c: 5.0, sigma: -1.0, p: 2.0, n: 3 };
        let a = check_symmetry_condition(&bp, 500, 3);
        let b = check_symmetry_condition(&bp, 500, 3);
        assert_eq!(a, b);
        assert!(!a.admissible);
    }
}
