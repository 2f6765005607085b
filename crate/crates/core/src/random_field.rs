//! Stochastic coefficient models and sample generation.
//!
//! Normal draws use `ChaCha20Rng::seed_from_u64(seed)` fed to
//! `rand_distr::StandardNormal` (ziggurat), filled row by row: entry `(i, k)`
//! is draw number `i * d + k` of the stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};

/// Truncated spectral expansion of a rescaled Brownian motion, exponentiated:
/// `a(x, xi) = exp(sigma * sum_k sqrt(lambda_k) sin(x / sqrt(lambda_k)) xi_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KklCoefficient {
    pub sigma: f64,
    lambdas: Vec<f64>,
    sqrt_lambdas: Vec<f64>,
}

impl KklCoefficient {
    pub fn new(sigma: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "number of modes must be positive".into(),
            ));
        }
        if !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma must be finite, got {sigma}"
            )));
        }
        let pi = std::f64::consts::PI;
        let lambdas: Vec<f64> = (1..=d)
            .map(|k| {
                let m = (2 * k - 1) as f64 * pi;
                4.0 / (m * m)
            })
            .collect();
        let sqrt_lambdas = (1..=d).map(|k| 2.0 / ((2 * k - 1) as f64 * pi)).collect();
        Ok(Self {
            sigma,
            lambdas,
            sqrt_lambdas,
        })
    }

    pub fn d(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn eval(&self, x: f64, xi: &[f64]) -> Result<f64> {
        check_len(self.d(), xi.len())?;
        let mut s = 0.0;
        for (sl, &v) in self.sqrt_lambdas.iter().zip(xi) {
            s += sl * (x / sl).sin() * v;
        }
        Ok((self.sigma * s).exp())
    }
}

pub fn eval_kkl(coef: &KklCoefficient, x: f64, xi: &[f64]) -> Result<f64> {
    coef.eval(x, xi)
}

/// `N x d` sample matrix stored row-major, with the first `n_corrupted` rows flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub n_corrupted: usize,
    pub data: Vec<f64>,
}

impl SampleSet {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn is_corrupted(&self, i: usize) -> bool {
        i < self.n_corrupted
    }
}

pub fn sample_standard_normal(n: usize, d: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "sample shape must be positive, got {n}x{d}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let data = (0..n * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(SampleSet {
        n,
        d,
        seed,
        n_corrupted: 0,
        data,
    })
}

/// Multiply rows `0..m` by 10. Refuses to act on an already corrupted set,
/// since applying the map twice would scale those rows by 100.
pub fn corrupt_samples(s: &SampleSet, m: usize) -> Result<SampleSet> {
    if m > s.n {
        return Err(Error::InvalidArgument(format!(
            "cannot corrupt {m} of {} samples",
            s.n
        )));
    }
    if s.n_corrupted > 0 && m > 0 {
        return Err(Error::InvalidArgument(
            "sample set is already corrupted".into(),
        ));
    }
    let mut out = s.clone();
    for v in &mut out.data[..m * s.d] {
        *v *= 10.0;
    }
    out.n_corrupted = m;
    Ok(out)
}

/// `1 / (xi + 3 sin(10 pi |x|))`.
pub fn eval_osc(xi: f64, x: [f64; 2]) -> Result<f64> {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let den = xi + 3.0 * (10.0 * std::f64::consts::PI * r).sin();
    if !(den > 0.0) {
        return Err(Error::Coercivity {
            value: den,
            location: format!("xi = {xi}, |x| = {r}"),
        });
    }
    Ok(1.0 / den)
}

/// Derivative of [`eval_osc`] with respect to `xi`, i.e. `-a^2`.
pub fn eval_osc_dxi(xi: f64, x: [f64; 2]) -> Result<f64> {
    let a = eval_osc(xi, x)?;
    Ok(-a * a)
}

/// `sup_x a / inf_x a = (xi + 3) / (xi - 3)`.
pub fn contrast_ratio(xi: f64) -> Result<f64> {
    if !(xi > 3.0) {
        return Err(Error::InvalidArgument(format!(
            "contrast ratio needs xi > 3, got {xi}"
        )));
    }
    Ok((xi + 3.0) / (xi - 3.0))
}

/// Two atoms `{0.2, 2.0}` with probabilities `(eps, 1 - eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomLaw {
    pub atoms: [f64; 2],
    pub probs: [f64; 2],
}

impl TwoAtomLaw {
    pub const LOW: f64 = 0.2;
    pub const HIGH: f64 = 2.0;

    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in [0, 1], got {eps}"
            )));
        }
        Ok(Self {
            atoms: [Self::LOW, Self::HIGH],
            probs: [eps, 1.0 - eps],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kkl_eigenvalues() {
        let c = KklCoefficient::new(0.4, 50).unwrap();
        let pi = std::f64::consts::PI;
        assert!((c.lambdas()[0] - 4.0 / (pi * pi)).abs() < 1e-15);
        assert!(c.lambdas().windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        assert!(KklCoefficient::new(0.4, 0).is_err());
    }

    #[test]
    fn kkl_values() {
        let c = KklCoefficient::new(0.4, 3).unwrap();
        assert_eq!(c.eval(0.7, &[0.0; 3]).unwrap(), 1.0);
        let c0 = KklCoefficient::new(0.0, 3).unwrap();
        assert_eq!(c0.eval(0.3, &[1.0, -2.0, 5.0]).unwrap(), 1.0);
        let c1 = KklCoefficient::new(1.0, 1).unwrap();
        let a = eval_kkl(&c1, 1.0, &[1.0]).unwrap();
        assert!((a - (2.0 / std::f64::consts::PI).exp()).abs() < 1e-14);
        assert!(c1.eval(0.5, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn normal_sampling_is_reproducible() {
        let a = sample_standard_normal(10, 4, 7).unwrap();
        let b = sample_standard_normal(10, 4, 7).unwrap();
        let c = sample_standard_normal(10, 4, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.data, c.data);
        assert!(sample_standard_normal(0, 4, 7).is_err());
    }

    #[test]
    fn normal_sample_moments() {
        let s = sample_standard_normal(1_000_000, 1, 2024).unwrap();
        let n = s.data.len() as f64;
        let mean = s.data.iter().sum::<f64>() / n;
        let var = s.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 0.005, "mean {mean}");
        assert!((0.99..=1.01).contains(&var), "var {var}");
    }

    #[test]
    fn corruption_scales_leading_rows() {
        let s = sample_standard_normal(5, 3, 1).unwrap();
        assert_eq!(corrupt_samples(&s, 0).unwrap(), s);
        let c = corrupt_samples(&s, 2).unwrap();
        assert_eq!(c.n_corrupted, 2);
        for i in 0..5 {
            for k in 0..3 {
                let f = if i < 2 { 10.0 } else { 1.0 };
                assert_eq!(c.row(i)[k], f * s.row(i)[k]);
            }
        }
        assert!(c.is_corrupted(1) && !c.is_corrupted(2));
        assert!(corrupt_samples(&c, 2).is_err());
        assert!(corrupt_samples(&s, 6).is_err());

        let mut one = s.clone();
        one.data[0] = 0.3;
        assert!((corrupt_samples(&one, 1).unwrap().data[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_coefficient() {
        assert!((eval_osc(3.5, [0.0, 0.0]).unwrap() - 1.0 / 3.5).abs() < 1e-15);
        assert!((eval_osc(3.5, [0.05, 0.0]).unwrap() - 1.0 / 6.5).abs() < 1e-14);
        assert!((eval_osc_dxi(3.5, [0.0, 0.0]).unwrap() + 1.0 / 12.25).abs() < 1e-15);
        assert!(matches!(
            eval_osc(2.5, [0.15, 0.0]),
            Err(Error::Coercivity { .. })
        ));
    }

    #[test]
    fn contrast() {
        assert!((contrast_ratio(3.5).unwrap() - 13.0).abs() < 1e-12);
        assert!((contrast_ratio(3.1).unwrap() - 61.0).abs() < 1e-9);
        assert!((contrast_ratio(1e12).unwrap() - 1.0).abs() < 1e-9);
        assert!(contrast_ratio(3.0).is_err());
    }

    #[test]
    fn two_atom_law() {
        let l = TwoAtomLaw::new(0.05).unwrap();
        assert_eq!(l.atoms, [0.2, 2.0]);
        assert!((l.probs[0] + l.probs[1] - 1.0).abs() < 1e-15);
        assert!(TwoAtomLaw::new(1.5).is_err());
    }

    proptest! {
        #[test]
        fn kkl_positive(x in 0.0f64..1.0, xi in proptest::collection::vec(-30.0f64..30.0, 5)) {
            let c = KklCoefficient::new(0.4, 5).unwrap();
            prop_assert!(c.eval(x, &xi).unwrap() > 0.0);
        }

        #[test]
        fn osc_derivative_matches_difference(xi in 3.05f64..3.95, r in 0.0f64..1.0, th in 0.0f64..std::f64::consts::TAU) {
            let x = [r * th.cos(), r * th.sin()];
            let h = 1e-6;
            let fd = (eval_osc(xi + h, x).unwrap() - eval_osc(xi - h, x).unwrap()) / (2.0 * h);
            let d = eval_osc_dxi(xi, x).unwrap();
            prop_assert!((fd - d).abs() <= 1e-8 * d.abs().max(1e-3) + 1e-10);
        }
    }
}
