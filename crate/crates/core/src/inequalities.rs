//! The three algebraic inequalities behind the oscillation lemma, evaluated
//! side by side so that callers can check `lhs <= rhs` on samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ppow, Error, Result};

/// Relative slack of the inequality checks.
pub const REL_SLACK: f64 = 1e-9;
/// Absolute slack of the inequality checks.
pub const ABS_SLACK: f64 = 1e-12;

/// Both sides of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    /// `lhs <= rhs (1 + 1e-9) + 1e-12`.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + REL_SLACK) + ABS_SLACK
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

fn ppow_difference(a: f64, b: f64, p: f64) -> f64 {
    (ppow(a + b, p) - ppow(a, p)).abs()
}

/// `| |a+b|^{p-2}(a+b) - |a|^{p-2}a | <= (p-1)|b|(|a|+|b|)^{p-2}` for `p >= 2`.
pub fn pineq1_sides(a: f64, b: f64, p: f64) -> Result<Sides> {
    if !(p >= 2.0) {
        return Err(Error::domain(format!("first increment bound needs p >= 2, got {p}")));
    }
    let lhs = ppow_difference(a, b, p);
    let rhs = if b == 0.0 {
        0.0
    } else {
        (p - 1.0) * b.abs() * (a.abs() + b.abs()).powf(p - 2.0)
    };
    Ok(Sides { lhs, rhs })
}

/// `| |a+b|^{p-2}(a+b) - |a|^{p-2}a | <= (3^{p-1}+2^{p-1})|b|^{p-1}` for `1 < p < 2`.
pub fn pineq2_sides(a: f64, b: f64, p: f64) -> Result<Sides> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::domain(format!(
            "second increment bound needs 1 < p < 2, got {p}"
        )));
    }
    let lhs = ppow_difference(a, b, p);
    let rhs = (3f64.powf(p - 1.0) + 2f64.powf(p - 1.0)) * b.abs().powf(p - 1.0);
    Ok(Sides { lhs, rhs })
}

/// `|a+b|^{p-2}(a+b) <= 2^{p-2}(|a|^{p-2}a + |b|^{p-2}b)` for `p >= 2`, `a + b >= 0`.
pub fn pest_sides(a: f64, b: f64, p: f64) -> Result<Sides> {
    if !(p >= 2.0) {
        return Err(Error::domain(format!("superadditivity bound needs p >= 2, got {p}")));
    }
    if a + b < 0.0 {
        return Err(Error::domain(format!("superadditivity bound needs a + b >= 0, got {}", a + b)));
    }
    let lhs = ppow(a + b, p);
    let rhs = 2f64.powf(p - 2.0) * (ppow(a, p) + ppow(b, p));
    Ok(Sides { lhs, rhs })
}

/// Which inequality a [`LemmaSummary`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    Pineq1,
    Pineq2,
    Pest,
}

impl Lemma {
    pub fn name(&self) -> &'static str {
        match self {
            Lemma::Pineq1 => "pineq1",
            Lemma::Pineq2 => "pineq2",
            Lemma::Pest => "pest",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSummary {
    pub lemma: Lemma,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `rhs - lhs` seen.
    pub worst_margin: f64,
    pub worst_sample: (f64, f64, f64),
}

impl LemmaSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn summarize(lemma: Lemma, samples: &[(f64, f64, f64)], f: fn(f64, f64, f64) -> Result<Sides>) -> LemmaSummary {
    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_sample = (0.0, 0.0, 0.0);
    for &(a, b, p) in samples {
        let sides = f(a, b, p).expect("sampler respects the preconditions");
        if !sides.holds() {
            violations += 1;
        }
        if sides.margin() < worst_margin {
            worst_margin = sides.margin();
            worst_sample = (a, b, p);
        }
    }
    LemmaSummary {
        lemma,
        samples: samples.len(),
        violations,
        worst_margin,
        worst_sample,
    }
}

/// Random sweep of all three inequalities: `(a, b)` uniform in `[-10, 10]^2`, `p`
/// uniform in `[2, 6]` (resp. `(1.01, 1.99)`), with `a + b >= 0` enforced for the
/// superadditivity bound by reflecting the pair.
pub fn check_lemmas(samples: usize, seed: u64) -> Vec<LemmaSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |plo: f64, phi: f64| -> (f64, f64, f64) {
        (
            rng.gen_range(-10.0..=10.0),
            rng.gen_range(-10.0..=10.0),
            rng.gen_range(plo..=phi),
        )
    };
    let s1: Vec<_> = (0..samples).map(|_| draw(2.0, 6.0)).collect();
    let s2: Vec<_> = (0..samples).map(|_| draw(1.01, 1.99)).collect();
    let s3: Vec<_> = (0..samples)
        .map(|_| {
            let (a, b, p) = draw(2.0, 6.0);
            if a + b < 0.0 {
                (-a, -b, p)
            } else {
                (a, b, p)
            }
        })
        .collect();
    vec![
        summarize(Lemma::Pineq1, &s1, pineq1_sides),
        summarize(Lemma::Pineq2, &s2, pineq2_sides),
        summarize(Lemma::Pest, &s3, pest_sides),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pineq1_examples() {
        let s = pineq1_sides(1.0, 1.0, 3.0).unwrap();
        assert_relative_eq!(s.lhs, 3.0, epsilon = 1e-14);
        assert_relative_eq!(s.rhs, 4.0, epsilon = 1e-14);
        let z = pineq1_sides(5.0, 0.0, 2.7).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        let s = pineq1_sides(0.0, 2.0, 3.0).unwrap();
        assert_relative_eq!(s.lhs, 4.0, epsilon = 1e-14);
        assert_relative_eq!(s.rhs, 8.0, epsilon = 1e-14);
        assert!(pineq1_sides(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn pineq2_examples() {
        let c = 3f64.sqrt() + 2f64.sqrt();
        let s = pineq2_sides(0.0, 1.0, 1.5).unwrap();
        assert_relative_eq!(s.lhs, 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.rhs, c, epsilon = 1e-14);
        assert_relative_eq!(s.rhs, 3.1463, epsilon = 1e-4);
        let z = pineq2_sides(7.0, 0.0, 1.2).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        let s = pineq2_sides(4.0, 1.0, 1.5).unwrap();
        assert_relative_eq!(s.lhs, 5f64.sqrt() - 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.lhs, 0.2361, epsilon = 1e-4);
        assert!(pineq2_sides(0.0, 1.0, 2.0).is_err());
        assert!(pineq2_sides(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn pest_examples() {
        let s = pest_sides(1.0, 1.0, 4.0).unwrap();
        assert_relative_eq!(s.lhs, 8.0, epsilon = 1e-13);
        assert_relative_eq!(s.rhs, 8.0, epsilon = 1e-13);
        let z = pest_sides(1.0, -1.0, 3.0).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        let e = pest_sides(3.0, -1.0, 2.0).unwrap();
        assert_eq!((e.lhs, e.rhs), (2.0, 2.0));
        assert!(pest_sides(-3.0, 1.0, 3.0).is_err());
        assert!(pest_sides(3.0, 1.0, 1.9).is_err());
    }

    #[test]
    fn sweep_is_clean_and_deterministic() {
        let a = check_lemmas(20_000, 11);
        assert!(a.iter().all(LemmaSummary::passed), "{a:?}");
        assert_eq!(a, check_lemmas(20_000, 11));
    }

    proptest! {
        #[test]
        fn pest_is_equality_at_p2(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            prop_assume!(a + b >= 0.0);
            let s = pest_sides(a, b, 2.0).unwrap();
            prop_assert!((s.lhs - s.rhs).abs() <= 1e-12 * (1.0 + s.lhs.abs()));
        }

        #[test]
        fn pineq1_holds(a in -10.0f64..10.0, b in -10.0f64..10.0, p in 2.0f64..6.0) {
            prop_assert!(pineq1_sides(a, b, p).unwrap().holds());
        }

        #[test]
        fn pineq2_holds(a in -10.0f64..10.0, b in -10.0f64..10.0, p in 1.01f64..1.99) {
            prop_assert!(pineq2_sides(a, b, p).unwrap().holds());
        }
    }
}
