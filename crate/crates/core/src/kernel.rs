//! Kernel families K(x, y) and exponent fields s(x), p(x).
//!
//! Every kernel is symmetric in `y`, comparable to `|y|^{-n-s(x)p(x)}` on `B_2`
//! with constants `(λ, Λ)`, and bounded by `M |y|^{-n-γ}` outside `B_{1/4}`.
//! [`validate_kernel`] checks these bounds by sampling.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{norm, Error, Point, Result};

/// Margin used when exponent bounds are derived from a profile instead of declared.
pub const DERIVED_BOUND_MARGIN: f64 = 1e-6;

/// Relative slack for the sampled bound checks.
const ROUNDOFF_SLACK: f64 = 1e-12;

/// A scalar exponent as a function of position.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentProfile {
    Constant(f64),
    /// `left` where `x_1 < split`, `right` otherwise.
    Piecewise { split: f64, left: f64, right: f64 },
    /// `mean + amplitude · sin(frequency · x_1)`.
    Smooth {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl ExponentProfile {
    #[inline]
    pub fn at(&self, x: Point) -> f64 {
        match *self {
            ExponentProfile::Constant(v) => v,
            ExponentProfile::Piecewise { split, left, right } => {
                if x[0] < split {
                    left
                } else {
                    right
                }
            }
            ExponentProfile::Smooth {
                mean,
                amplitude,
                frequency,
            } => mean + amplitude * (frequency * x[0]).sin(),
        }
    }

    /// Conservative range of the profile over all positions.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            ExponentProfile::Constant(v) => (v, v),
            ExponentProfile::Piecewise { left, right, .. } => (left.min(right), left.max(right)),
            ExponentProfile::Smooth {
                mean, amplitude, ..
            } => (mean - amplitude.abs(), mean + amplitude.abs()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ExponentProfile::Constant(_))
    }
}

impl fmt::Display for ExponentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentProfile::Constant(v) => write!(f, "{v}"),
            ExponentProfile::Piecewise { split, left, right } => {
                write!(f, "piecewise({split}, {left}, {right})")
            }
            ExponentProfile::Smooth {
                mean,
                amplitude,
                frequency,
            } => write!(f, "smooth({mean}, {amplitude}, {frequency})"),
        }
    }
}

/// The exponent maps `s(x)`, `p(x)` with their declared bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    pub s: ExponentProfile,
    pub p: ExponentProfile,
    pub s0: f64,
    pub s1: f64,
    pub p0: f64,
    pub p1: f64,
    /// Margin in `p(x)(1 - s(x)) - 1 > τ` wherever `p(x) < 2`.
    pub tau: f64,
}

impl ExponentField {
    /// Constant exponents with bounds derived from the values.
    pub fn constant(s: f64, p: f64) -> Result<Self> {
        Self::from_profiles(ExponentProfile::Constant(s), ExponentProfile::Constant(p), 0.0)
    }

    /// Builds a field whose bounds enclose the profile ranges by [`DERIVED_BOUND_MARGIN`].
    pub fn from_profiles(s: ExponentProfile, p: ExponentProfile, tau: f64) -> Result<Self> {
        let (smin, smax) = s.range();
        let (pmin, pmax) = p.range();
        let field = ExponentField {
            s0: (smin - DERIVED_BOUND_MARGIN).max(f64::MIN_POSITIVE),
            s1: (smax + DERIVED_BOUND_MARGIN).min(1.0 - f64::EPSILON),
            p0: (pmin - DERIVED_BOUND_MARGIN).max(1.0 + f64::EPSILON),
            p1: pmax + DERIVED_BOUND_MARGIN,
            s,
            p,
            tau,
        };
        field.check_declared()?;
        Ok(field)
    }

    pub fn with_bounds(mut self, s0: f64, s1: f64, p0: f64, p1: f64) -> Result<Self> {
        self.s0 = s0;
        self.s1 = s1;
        self.p0 = p0;
        self.p1 = p1;
        self.check_declared()?;
        Ok(self)
    }

    fn check_declared(&self) -> Result<()> {
        if !(0.0 < self.s0 && self.s0 < self.s1 && self.s1 < 1.0) {
            return Err(Error::domain(format!(
                "exponent bounds need 0 < s0 < s1 < 1, got s0={}, s1={}",
                self.s0, self.s1
            )));
        }
        if !(1.0 < self.p0 && self.p0 < self.p1) {
            return Err(Error::domain(format!(
                "exponent bounds need 1 < p0 < p1, got p0={}, p1={}",
                self.p0, self.p1
            )));
        }
        if self.tau < 0.0 {
            return Err(Error::domain("tau must be non-negative"));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.s.is_constant() && self.p.is_constant()
    }

    #[inline]
    pub fn s_at(&self, x: Point) -> f64 {
        self.s.at(x)
    }

    #[inline]
    pub fn p_at(&self, x: Point) -> f64 {
        self.p.at(x)
    }

    /// Worst violation of the field invariants at `x`; `<= 0` means satisfied.
    pub fn violation_at(&self, x: Point) -> f64 {
        let s = self.s_at(x);
        let p = self.p_at(x);
        let mut worst = f64::NEG_INFINITY;
        worst = worst.max(self.s0 - s).max(s - self.s1);
        worst = worst.max(self.p0 - p).max(p - self.p1);
        // strict inequalities: equality counts as a (zero-size) violation
        if s == self.s0 || s == self.s1 || p == self.p0 || p == self.p1 {
            worst = worst.max(0.0);
        }
        if p < 2.0 {
            let gap = p * (1.0 - s) - 1.0 - self.tau;
            worst = worst.max(-gap);
            if gap == 0.0 {
                worst = worst.max(0.0);
            }
        }
        worst
    }
}

/// Concrete kernel family. All families are even in `y`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `K = |y|^{-n-s(x)p(x)}`.
    Model,
    /// The model kernel restricted to `|y| < 2`.
    Truncated,
    /// The model kernel times `center + amplitude · cos(frequency |y| + x_1) / (1 + |y|^2)`.
    Perturbed {
        center: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Model => "model",
            KernelFamily::Truncated => "truncated",
            KernelFamily::Perturbed { .. } => "perturbed",
        }
    }
}

/// Affine change of variables `x ↦ scale · x + origin` applied by [`rescale_kernel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub scale: f64,
    pub origin: Point,
}

impl Default for Frame {
    fn default() -> Self {
        Frame {
            scale: 1.0,
            origin: [0.0, 0.0],
        }
    }
}

impl Frame {
    #[inline]
    pub fn map(&self, x: Point) -> Point {
        [
            self.scale * x[0] + self.origin[0],
            self.scale * x[1] + self.origin[1],
        ]
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.origin == [0.0, 0.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub dim: usize,
    pub exponents: ExponentField,
    pub lambda: f64,
    pub lambda_upper: f64,
    pub tail_m: f64,
    pub gamma: f64,
    pub family: KernelFamily,
    pub frame: Frame,
}

impl KernelSpec {
    pub fn new(
        dim: usize,
        exponents: ExponentField,
        lambda: f64,
        lambda_upper: f64,
        tail_m: f64,
        gamma: f64,
        family: KernelFamily,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::domain(format!("dim must be 1 or 2, got {dim}")));
        }
        if !(lambda > 0.0 && lambda_upper >= lambda) {
            return Err(Error::domain(format!(
                "ellipticity bounds need Lambda >= lambda > 0, got lambda={lambda}, Lambda={lambda_upper}"
            )));
        }
        if !(tail_m > 0.0 && gamma > 0.0) {
            return Err(Error::domain("tail bound needs M > 0 and gamma > 0"));
        }
        Ok(KernelSpec {
            dim,
            exponents,
            lambda,
            lambda_upper,
            tail_m,
            gamma,
            family,
            frame: Frame::default(),
        })
    }

    /// The model kernel `|y|^{-n-sp}` with `λ = Λ = 1` and `γ = sp`, `M = 1`.
    pub fn model(dim: usize, s: f64, p: f64) -> Result<Self> {
        Self::new(
            dim,
            ExponentField::constant(s, p)?,
            1.0,
            1.0,
            1.0,
            s * p,
            KernelFamily::Model,
        )
    }

    pub fn with_family(mut self, family: KernelFamily) -> Self {
        self.family = family;
        self
    }

    /// `s(x)` in the current frame.
    #[inline]
    pub fn s_at(&self, x: Point) -> f64 {
        self.exponents.s_at(self.frame.map(x))
    }

    /// `p(x)` in the current frame.
    #[inline]
    pub fn p_at(&self, x: Point) -> f64 {
        self.exponents.p_at(self.frame.map(x))
    }

    /// Freezes the kernel at `x` for repeated evaluation in `y`.
    pub fn at(&self, x: Point) -> KernelAt<'_> {
        let xm = self.frame.map(x);
        let s = self.exponents.s_at(xm);
        let p = self.exponents.p_at(xm);
        let order = self.dim as f64 + s * p;
        KernelAt {
            spec: self,
            mapped_x: xm,
            s,
            p,
            order,
            prefactor: self.frame.scale.powf(order),
        }
    }

    /// `K(x, y)`; errors when `y = 0`.
    pub fn eval(&self, x: Point, y: Point) -> Result<f64> {
        if norm(y, self.dim) == 0.0 {
            return Err(Error::domain("kernel is singular at y = 0"));
        }
        Ok(self.at(x).eval(y))
    }

    /// True when the singular-branch hypothesis `p(1-s) > 1` holds at `x` or `p(x) >= 2`.
    pub fn singular_branch_ok(&self, x: Point) -> bool {
        let p = self.p_at(x);
        p >= 2.0 || p * (1.0 - self.s_at(x)) > 1.0
    }
}

/// A kernel with its exponents frozen at one base point.
#[derive(Debug, Clone, Copy)]
pub struct KernelAt<'a> {
    spec: &'a KernelSpec,
    mapped_x: Point,
    pub s: f64,
    pub p: f64,
    /// `n + s p`
    pub order: f64,
    prefactor: f64,
}

impl KernelAt<'_> {
    /// `K(x, y)` for `y != 0` (no check).
    #[inline]
    pub fn eval(&self, y: Point) -> f64 {
        let r = norm(y, self.spec.dim) * self.spec.frame.scale;
        self.prefactor * self.base_radial(r)
    }

    /// Value at an offset of length `r`, valid for families that only depend on `|y|`.
    #[inline]
    pub fn eval_radius(&self, r: f64) -> f64 {
        self.prefactor * self.base_radial(r * self.spec.frame.scale)
    }

    #[inline]
    fn base_radial(&self, r: f64) -> f64 {
        let model = r.powf(-self.order);
        match self.spec.family {
            KernelFamily::Model => model,
            KernelFamily::Truncated => {
                if r < 2.0 {
                    model
                } else {
                    0.0
                }
            }
            KernelFamily::Perturbed {
                center,
                amplitude,
                frequency,
            } => {
                let m = center
                    + amplitude * (frequency * r + self.mapped_x[0]).cos() / (1.0 + r * r);
                model * m
            }
        }
    }

    /// `K(x, y) |y|^{n+sp}`, the ellipticity ratio that must lie in `[λ, Λ]` on `B_2`.
    pub fn ellipticity_ratio(&self, y: Point) -> f64 {
        let r = norm(y, self.spec.dim);
        self.eval(y) * r.powf(self.order)
    }
}

/// Outcome of [`validate_kernel`]. Violations are normalized so that `<= 0` means satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValidation {
    pub samples: usize,
    pub symmetry: f64,
    pub ellipticity: f64,
    pub tail: f64,
    pub exponents: f64,
    pub passed: bool,
}

fn sample_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Point {
    loop {
        let z = [
            rng.gen_range(-radius..radius),
            if dim == 2 {
                rng.gen_range(-radius..radius)
            } else {
                0.0
            },
        ];
        if norm(z, dim) < radius {
            return z;
        }
    }
}

fn sample_direction(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    if dim == 1 {
        [if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0]
    } else {
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        [t.cos(), t.sin()]
    }
}

/// Samples `(x, y)` pairs and reports the worst violation of symmetry, of the
/// ellipticity bounds on `B_2` and of the tail bound outside `B_{1/4}`.
pub fn validate_kernel(spec: &KernelSpec, sample_count: usize) -> KernelValidation {
    let sample_count = sample_count.max(1);
    let dim = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b65_726e);
    let mut symmetry = f64::NEG_INFINITY;
    let mut ellipticity = f64::NEG_INFINITY;
    let mut tail = f64::NEG_INFINITY;
    let mut exponents = f64::NEG_INFINITY;

    // fixed probes first: the centre, the |x| = 3/4 shell and the interface radii
    let mut xs: Vec<Point> = vec![[0.0, 0.0], [0.75, 0.0], [-0.75, 0.0]];
    let mut radii_inner: Vec<f64> = vec![1e-3, 0.25, 1.0, 2.0 - 1e-9];
    let mut radii_tail: Vec<f64> = vec![0.25, 1.0, 2.0, 10.0, 1e3];
    for _ in 0..sample_count {
        xs.push(sample_ball(&mut rng, dim, 2.0));
        radii_inner.push(1e-3 * (2.0f64 / 1e-3).powf(rng.gen::<f64>()));
        radii_tail.push(0.25 * (4e3f64).powf(rng.gen::<f64>()));
    }

    for (i, &x) in xs.iter().enumerate() {
        exponents = exponents.max(spec.exponents.violation_at(spec.frame.map(x)));
        let k = spec.at(x);
        let dir = sample_direction(&mut rng, dim);
        let pick = |list: &Vec<f64>| list[i % list.len()];
        for r in [pick(&radii_inner), radii_inner[(i * 7 + 3) % radii_inner.len()]] {
            let y = [r * dir[0], r * dir[1]];
            let ky = k.eval(y);
            let kmy = k.eval([-y[0], -y[1]]);
            let scale = ky.abs().max(kmy.abs()).max(f64::MIN_POSITIVE);
            symmetry = symmetry.max((ky - kmy).abs() / scale - ROUNDOFF_SLACK);
            let ratio = ky * r.powf(k.order);
            let e = (spec.lambda - ratio).max(ratio - spec.lambda_upper) / spec.lambda_upper;
            ellipticity = ellipticity.max(e - ROUNDOFF_SLACK);
        }
        for r in [pick(&radii_tail), radii_tail[(i * 5 + 1) % radii_tail.len()]] {
            let y = [r * dir[0], r * dir[1]];
            let ky = k.eval(y);
            let bound = spec.tail_m * r.powf(-(dim as f64) - spec.gamma);
            let mut t = (ky - bound) / bound - ROUNDOFF_SLACK;
            if ky < 0.0 {
                t = t.max(-ky / bound);
            }
            tail = tail.max(t);
        }
    }

    let passed = symmetry <= 0.0 && ellipticity <= 0.0 && tail <= 0.0 && exponents <= 0.0;
    KernelValidation {
        samples: xs.len(),
        symmetry: symmetry.max(0.0),
        ellipticity: ellipticity.max(0.0),
        tail: tail.max(0.0),
        exponents: exponents.max(0.0),
        passed,
    }
}

/// `K_{x0,r}(x, y) = r^{n + s p} K(r x + x0, r y)`, with exponents evaluated at `r x + x0`.
pub fn rescale_kernel(spec: &KernelSpec, x0: Point, scale: f64) -> Result<KernelSpec> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::domain(format!("scale must lie in (0, 1], got {scale}")));
    }
    let mut out = spec.clone();
    // compose: old frame applied after the new affine map
    out.frame = Frame {
        scale: spec.frame.scale * scale,
        origin: spec.frame.map(x0),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model_1d() -> KernelSpec {
        KernelSpec::model(1, 0.5, 2.0).unwrap()
    }

    #[test]
    fn model_value_matches_power_law() {
        let k = model_1d();
        assert_relative_eq!(k.eval([0.0, 0.0], [0.5, 0.0]).unwrap(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn kernel_rejects_zero_offset() {
        assert!(matches!(
            model_1d().eval([0.0, 0.0], [0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn every_family_is_even() {
        let fams = [
            KernelFamily::Model,
            KernelFamily::Truncated,
            KernelFamily::Perturbed {
                center: 1.0,
                amplitude: 0.3,
                frequency: 2.0,
            },
        ];
        for fam in fams {
            let k = KernelSpec::model(2, 0.4, 2.5).unwrap().with_family(fam);
            for &(x, y) in &[([0.1, 0.3], [0.4, -0.2]), ([-1.0, 0.5], [1.5, 0.7])] {
                let a = k.eval(x, y).unwrap();
                let b = k.eval(x, [-y[0], -y[1]]).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn truncated_vanishes_outside_support() {
        let k = model_1d().with_family(KernelFamily::Truncated);
        assert_eq!(k.eval([0.0, 0.0], [3.0, 0.0]).unwrap(), 0.0);
        assert_eq!(k.eval([0.0, 0.0], [-3.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn model_validates_with_zero_violation() {
        let v = validate_kernel(&KernelSpec::model(1, 0.5, 3.0).unwrap(), 500);
        assert!(v.passed, "{v:?}");
        assert_eq!(v.ellipticity, 0.0);
        let v2 = validate_kernel(&KernelSpec::model(2, 0.3, 1.8).unwrap(), 500);
        assert!(v2.passed, "{v2:?}");
    }

    #[test]
    fn escaping_modulation_fails_validation() {
        let k = KernelSpec::new(
            1,
            ExponentField::constant(0.5, 3.0).unwrap(),
            0.5,
            1.5,
            10.0,
            1.5,
            KernelFamily::Perturbed {
                center: 1.0,
                amplitude: 0.9,
                frequency: 3.0,
            },
        )
        .unwrap();
        let v = validate_kernel(&k, 500);
        assert!(!v.passed);
        assert!(v.ellipticity > 0.0);
    }

    #[test]
    fn truncated_passes_tail_check() {
        let k = KernelSpec::new(
            1,
            ExponentField::constant(0.5, 3.0).unwrap(),
            1.0,
            1.0,
            1.0,
            1.5,
            KernelFamily::Truncated,
        )
        .unwrap();
        let at = k.at([0.0, 0.0]);
        assert_eq!(at.eval([10.0, 0.0]), 0.0);
        assert!(validate_kernel(&k, 300).passed);
    }

    #[test]
    fn singular_branch_field_invariant() {
        let bad = ExponentField::constant(0.5, 1.3).unwrap();
        assert!(bad.violation_at([0.0, 0.0]) > 0.0);
        let good = ExponentField::from_profiles(
            ExponentProfile::Constant(0.3),
            ExponentProfile::Constant(1.8),
            0.2,
        )
        .unwrap();
        assert!(good.violation_at([0.0, 0.0]) <= 0.0);
    }

    #[test]
    fn rescale_identity_and_fixed_point() {
        let k = KernelSpec::model(1, 0.5, 3.0).unwrap();
        let same = rescale_kernel(&k, [0.3, 0.0], 1.0).unwrap();
        let half = rescale_kernel(&k, [0.3, 0.0], 0.5).unwrap();
        for &(x, y) in &[([0.1, 0.0], [0.2, 0.0]), ([-0.5, 0.0], [1.7, 0.0])] {
            let base = k.eval(x, y).unwrap();
            assert_eq!(same.eval(x, y).unwrap(), base);
            assert_relative_eq!(half.eval(x, y).unwrap(), base, max_relative = 1e-14);
        }
        assert!(validate_kernel(&rescale_kernel(&k, [0.25, 0.0], 1.0 / 16.0).unwrap(), 300).passed);
        assert!(rescale_kernel(&k, [0.0, 0.0], 0.0).is_err());
        assert!(rescale_kernel(&k, [0.0, 0.0], 1.5).is_err());
    }

    #[test]
    fn rescale_perturbed_matches_definition() {
        let k = KernelSpec::model(2, 0.4, 2.5).unwrap().with_family(KernelFamily::Perturbed {
            center: 1.0,
            amplitude: 0.2,
            frequency: 1.3,
        });
        let x0 = [0.2, -0.1];
        let r = 0.25;
        let kr = rescale_kernel(&k, x0, r).unwrap();
        let x = [0.3, 0.4];
        let y = [-0.7, 0.2];
        let xm = [r * x[0] + x0[0], r * x[1] + x0[1]];
        let expect = r.powf(2.0 + 0.4 * 2.5) * k.eval(xm, [r * y[0], r * y[1]]).unwrap();
        assert_relative_eq!(kr.eval(x, y).unwrap(), expect, max_relative = 1e-13);
    }
}
