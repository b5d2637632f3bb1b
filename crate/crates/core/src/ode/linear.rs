//! Linearization about the equilibria `0` and `c₀`, the variation-of-parameters
//! representation of the linearized equation, and the decay exponents of the
//! three regimes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{classify_regime, CylinderParams, Regime};
use crate::quad::GaussRule;

/// Relative tolerance on the discriminant below which the roots are treated as double.
pub const DOUBLE_ROOT_TOL: f64 = 1e-12;
const RESONANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedRoots {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub mu1: f64,
    pub mu2: f64,
    /// `min{−μ₂, 1}`.
    pub alpha0: f64,
    /// Set when the roots are taken about `c₀`.
    pub c0: Option<f64>,
    pub double_root: bool,
}

impl LinearizedRoots {
    /// Roots of `λ² + bλ + q = 0` ordered by real part.
    pub fn of_quadratic(b: f64, q: f64) -> Self {
        let disc = b * b - 4.0 * q;
        let scale = (b * b).max((4.0 * q).abs()).max(f64::MIN_POSITIVE);
        let double_root = disc.abs() <= DOUBLE_ROOT_TOL * scale;
        let (l1, l2) = if double_root {
            let l = Complex64::new(-0.5 * b, 0.0);
            (l, l)
        } else if disc > 0.0 {
            let r = disc.sqrt();
            // the root of larger modulus first, the other from the product q
            let big = if b >= 0.0 { -0.5 * (b + r) } else { 0.5 * (r - b) };
            let small = q / big;
            let (x, y) = if big <= small { (big, small) } else { (small, big) };
            (Complex64::new(x, 0.0), Complex64::new(y, 0.0))
        } else {
            let im = 0.5 * (-disc).sqrt();
            (Complex64::new(-0.5 * b, -im), Complex64::new(-0.5 * b, im))
        };
        let mu2 = l2.re;
        Self {
            lambda1: l1,
            lambda2: l2,
            mu1: l1.re,
            mu2,
            alpha0: (-mu2).min(1.0),
            c0: None,
            double_root,
        }
    }

    pub fn is_complex(&self) -> bool {
        self.lambda1.im != 0.0
    }
}

/// Roots of `λ² + bλ + a = 0`, the linearization about `0`.
pub fn char_roots(cp: &CylinderParams) -> LinearizedRoots {
    LinearizedRoots::of_quadratic(cp.b, cp.a)
}

/// Roots of `λ² + bλ + (p−1)c₀^{p−1} = 0` with `c₀^{p−1} = −a`.
pub fn linearized_roots_at_c0(cp: &CylinderParams) -> Result<LinearizedRoots> {
    let c0 = cp
        .c0()
        .ok_or_else(|| Error::OutOfRange(format!("no positive equilibrium for a = {}", cp.a)))?;
    let mut roots = LinearizedRoots::of_quadratic(cp.b, (cp.p - 1.0) * (-cp.a));
    roots.c0 = Some(c0);
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSample {
    pub t: f64,
    pub xi: f64,
    pub dxi: f64,
}

/// Solves `ξ'' − (λ₁+λ₂)ξ' + λ₁λ₂ξ = F(t)` with `ξ(t₀), ξ'(t₀)` given by `ic`,
/// sampled at `samples + 1` equally spaced times.
///
/// Distinct roots use the Wronskian `(λ₂−λ₁)e^{(λ₁+λ₂)τ}`, so that
/// `ξ = C₄e^{λ₁t} + C₅e^{λ₂t} + ∫(e^{λ₂(t−τ)} − e^{λ₁(t−τ)})F(τ)dτ/(λ₂−λ₁)`;
/// a double root uses the kernel `(t−τ)e^{λ(t−τ)}`.
pub fn variation_of_parameters<F: Fn(f64) -> f64>(
    forcing: F,
    roots: &LinearizedRoots,
    ic: (f64, f64),
    t_span: (f64, f64),
    samples: usize,
) -> Result<Vec<XiSample>> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) || samples == 0 {
        return Err(Error::OutOfRange(format!("bad sampling of [{t0}, {t1}]")));
    }
    let rule = GaussRule::new(8);
    let dt = (t1 - t0) / samples as f64;
    let panels = (dt / 0.25).ceil().max(1.0) as usize;
    let (x0, v0) = (Complex64::new(ic.0, 0.0), Complex64::new(ic.1, 0.0));
    let (l1, l2) = (roots.lambda1, roots.lambda2);

    // ∫_{lo}^{hi} k(hi − τ)F(τ)dτ for a complex kernel
    let conv = |k: &dyn Fn(f64) -> Complex64, lo: f64, hi: f64| -> Complex64 {
        let re = rule.integrate(|tau| k(hi - tau).re * forcing(tau), lo, hi, panels);
        let im = rule.integrate(|tau| k(hi - tau).im * forcing(tau), lo, hi, panels);
        Complex64::new(re, im)
    };

    let mut out = Vec::with_capacity(samples + 1);
    out.push(XiSample { t: t0, xi: ic.0, dxi: ic.1 });
    if roots.double_root {
        let l = l1;
        let c4 = x0;
        let c5 = v0 - l * x0;
        // j0 = ∫e^{λ(t−τ)}F, j1 = ∫(t−τ)e^{λ(t−τ)}F
        let (mut j0, mut j1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 1..=samples {
            let lo = t0 + (k - 1) as f64 * dt;
            let t = t0 + k as f64 * dt;
            let h = t - lo;
            let e = (l * h).exp();
            j1 = e * (j1 + h * j0) + conv(&|s| s * (l * s).exp(), lo, t);
            j0 = e * j0 + conv(&|s| (l * s).exp(), lo, t);
            let s = t - t0;
            let es = (l * s).exp();
            let xi = (c4 + c5 * s) * es + j1;
            let dxi = (c5 + l * (c4 + c5 * s)) * es + j0 + l * j1;
            out.push(XiSample { t, xi: xi.re, dxi: dxi.re });
        }
    } else {
        let w = l2 - l1;
        let c5 = (v0 - l1 * x0) / w;
        let c4 = x0 - c5;
        let (mut i1, mut i2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 1..=samples {
            let lo = t0 + (k - 1) as f64 * dt;
            let t = t0 + k as f64 * dt;
            let h = t - lo;
            i1 = (l1 * h).exp() * i1 + conv(&|s| (l1 * s).exp(), lo, t);
            i2 = (l2 * h).exp() * i2 + conv(&|s| (l2 * s).exp(), lo, t);
            let s = t - t0;
            let (e1, e2) = ((l1 * s).exp(), (l2 * s).exp());
            let xi = c4 * e1 + c5 * e2 + (i2 - i1) / w;
            let dxi = c4 * l1 * e1 + c5 * l2 * e2 + (l2 * i2 - l1 * i1) / w;
            out.push(XiSample { t, xi: xi.re, dxi: dxi.re });
        }
    }
    Ok(out)
}

/// Branches of the decay taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayBranch {
    /// Regime I, decay to 0 along the homoclinic.
    IDecay,
    /// Regime II, decay to 0.
    IIDecay,
    /// Regime II, convergence to `c₀`.
    IIConverge,
    /// Regime III.
    III,
}

impl DecayBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayBranch::IDecay => "I-decay",
            DecayBranch::IIDecay => "II-decay",
            DecayBranch::IIConverge => "II-converge",
            DecayBranch::III => "III",
        }
    }

    fn regime(&self) -> Regime {
        match self {
            DecayBranch::IDecay => Regime::I,
            DecayBranch::IIDecay | DecayBranch::IIConverge => Regime::II,
            DecayBranch::III => Regime::III,
        }
    }
}

impl std::str::FromStr for DecayBranch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I-decay" => Ok(DecayBranch::IDecay),
            "II-decay" => Ok(DecayBranch::IIDecay),
            "II-converge" => Ok(DecayBranch::IIConverge),
            "III" => Ok(DecayBranch::III),
            _ => Err(Error::Parse(format!("unknown decay branch '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPrediction {
    pub branch: DecayBranch,
    /// Exponent `γ` of `t^k e^{−γt}`; for regime III the barrier `(n+b−2)/2`.
    pub rate: f64,
    /// Power `k` of the polynomial correction.
    pub t_power: u32,
    /// Regime III only: `[min, max]` of `{−Re λ₁, −Re λ₂, (n+b−2)/2}`.
    pub bracket: Option<(f64, f64)>,
}

pub fn predicted_decay(branch: DecayBranch, cp: &CylinderParams) -> Result<DecayPrediction> {
    let regime = classify_regime(cp)?;
    if regime != branch.regime() {
        return Err(Error::Unsupported(format!(
            "branch {} does not apply in regime {regime}",
            branch.as_str()
        )));
    }
    let (a, b) = (cp.a, cp.b);
    let mut pred = DecayPrediction {
        branch,
        rate: 0.0,
        t_power: 0,
        bracket: None,
    };
    match branch {
        DecayBranch::IDecay => pred.rate = (-a).sqrt(),
        DecayBranch::IIDecay => pred.rate = 0.5 * (b + (b * b - 4.0 * a).sqrt()),
        DecayBranch::IIConverge => {
            let r = linearized_roots_at_c0(cp)?;
            pred.rate = r.alpha0;
            pred.t_power = if r.double_root {
                if (b - 2.0).abs() <= RESONANCE_TOL {
                    2
                } else if b < 2.0 {
                    1
                } else {
                    0
                }
            } else if (r.mu2 + 1.0).abs() <= RESONANCE_TOL {
                1
            } else {
                0
            };
        }
        DecayBranch::III => {
            let r = char_roots(cp);
            let barrier = 0.5 * (cp.nf() + b - 2.0);
            let vals = [-r.mu1, -r.mu2, barrier];
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            pred.rate = barrier;
            pred.bracket = Some((lo, hi));
        }
    }
    Ok(pred)
}
