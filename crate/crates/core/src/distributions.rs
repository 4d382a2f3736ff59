//! Scalar distribution families for priors and measurement likelihoods.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Result, VoiError};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this truncated mass the sampler switches from rejection to
/// inverse-CDF.
pub const REJECTION_MIN_ACCEPTANCE: f64 = 0.1;

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal upper tail `1 - Phi(z)`, accurate for large `z`.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Standard normal quantile.
pub fn std_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    TruncatedGaussian {
        mu: f64,
        sigma: f64,
        lower: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
    },
    DiscreteUniform {
        lo: i64,
        hi: i64,
        #[serde(default = "default_true")]
        inclusive: bool,
    },
    Categorical {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
    Degenerate {
        value: f64,
    },
}

fn default_true() -> bool {
    true
}

impl DistributionSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        Self::Gaussian { mu, sigma }
    }

    pub fn truncated_below(mu: f64, sigma: f64, lower: f64) -> Self {
        Self::TruncatedGaussian {
            mu,
            sigma,
            lower,
            upper: None,
        }
    }

    pub fn discrete_uniform(lo: i64, hi: i64) -> Self {
        Self::DiscreteUniform {
            lo,
            hi,
            inclusive: true,
        }
    }

    pub fn degenerate(value: f64) -> Self {
        Self::Degenerate { value }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(VoiError::InvalidDistribution(msg));
        match self {
            Self::Gaussian { mu, sigma } => {
                if !mu.is_finite() || !(sigma.is_finite() && *sigma > 0.0) {
                    return bad(format!("gaussian needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"));
                }
            }
            Self::TruncatedGaussian {
                mu,
                sigma,
                lower,
                upper,
            } => {
                if !mu.is_finite() || !(sigma.is_finite() && *sigma > 0.0) || !lower.is_finite() {
                    return bad(format!(
                        "truncated gaussian needs finite mu, lower and sigma > 0, got mu={mu}, sigma={sigma}, lower={lower}"
                    ));
                }
                if let Some(u) = upper {
                    if !(u.is_finite() && u > lower) {
                        return bad(format!("truncated gaussian needs lower < upper, got [{lower}, {u}]"));
                    }
                }
                if self.truncated_mass() <= 0.0 {
                    return bad("truncation interval carries no probability mass".into());
                }
            }
            Self::DiscreteUniform { lo, hi, inclusive } => {
                if (*inclusive && hi < lo) || (!*inclusive && hi <= lo) {
                    return bad(format!("discrete uniform has empty range lo={lo}, hi={hi}"));
                }
            }
            Self::Categorical { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad(format!(
                        "categorical needs matching non-empty values/probs, got {} and {}",
                        values.len(),
                        probs.len()
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("categorical values must be finite".into());
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return bad("categorical probabilities must be non-negative".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("categorical probabilities sum to {total}, not 1"));
                }
            }
            Self::Degenerate { value } => {
                if !value.is_finite() {
                    return bad(format!("degenerate value must be finite, got {value}"));
                }
            }
        }
        Ok(())
    }

    fn truncation(&self) -> Option<(f64, f64, f64, f64)> {
        match *self {
            Self::TruncatedGaussian {
                mu,
                sigma,
                lower,
                upper,
            } => Some((mu, sigma, (lower - mu) / sigma, upper.map_or(f64::INFINITY, |u| (u - mu) / sigma))),
            _ => None,
        }
    }

    /// Parent-Gaussian probability of the truncation interval (1 for
    /// untruncated families).
    pub fn truncated_mass(&self) -> f64 {
        match self.truncation() {
            Some((_, _, a, b)) => {
                if a > 0.0 {
                    std_normal_sf(a) - std_normal_sf(b)
                } else {
                    std_normal_cdf(b) - std_normal_cdf(a)
                }
            }
            None => 1.0,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Self::Gaussian { .. } | Self::TruncatedGaussian { .. })
    }

    /// Closed support interval (infinite ends allowed).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::TruncatedGaussian { lower, upper, .. } => (*lower, upper.unwrap_or(f64::INFINITY)),
            Self::DiscreteUniform { lo, hi, inclusive } => {
                (*lo as f64, if *inclusive { *hi as f64 } else { (*hi - 1) as f64 })
            }
            Self::Categorical { values, probs } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (v, p) in values.iter().zip(probs) {
                    if *p > 0.0 {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                }
                (lo, hi)
            }
            Self::Degenerate { value } => (*value, *value),
        }
    }

    /// Support points and probabilities of a finite-support family, in
    /// ascending order of value. `None` for continuous families.
    pub fn finite_support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Self::Gaussian { .. } | Self::TruncatedGaussian { .. } => None,
            Self::DiscreteUniform { lo, hi, inclusive } => {
                let top = if *inclusive { *hi } else { *hi - 1 };
                let p = 1.0 / (top - lo + 1) as f64;
                Some((*lo..=top).map(|k| (k as f64, p)).collect())
            }
            Self::Categorical { values, probs } => {
                let mut pts: Vec<(f64, f64)> = Vec::with_capacity(values.len());
                let mut order: Vec<usize> = (0..values.len()).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                for i in order {
                    if probs[i] == 0.0 {
                        continue;
                    }
                    match pts.last_mut() {
                        Some(last) if last.0 == values[i] => last.1 += probs[i],
                        _ => pts.push((values[i], probs[i])),
                    }
                }
                Some(pts)
            }
            Self::Degenerate { value } => Some(vec![(*value, 1.0)]),
        }
    }

    /// Number of support points of a finite-support family.
    pub fn support_size(&self) -> Option<u64> {
        match self {
            Self::Gaussian { .. } | Self::TruncatedGaussian { .. } => None,
            Self::DiscreteUniform { lo, hi, inclusive } => {
                let top = if *inclusive { *hi } else { *hi - 1 };
                Some((top - lo + 1) as u64)
            }
            Self::Categorical { .. } => self.finite_support().map(|s| s.len() as u64),
            Self::Degenerate { .. } => Some(1),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mu + sigma * z
            }
            Self::TruncatedGaussian {
                mu,
                sigma,
                lower,
                upper,
            } => {
                let upper = upper.unwrap_or(f64::INFINITY);
                let mass = self.truncated_mass();
                if mass >= REJECTION_MIN_ACCEPTANCE {
                    loop {
                        let z: f64 = rng.sample(StandardNormal);
                        let x = mu + sigma * z;
                        if x >= lower && x <= upper {
                            return x;
                        }
                    }
                }
                let a = (lower - mu) / sigma;
                let b = (upper - mu) / sigma;
                let u: f64 = rng.random();
                // Work in whichever tail keeps the probabilities away from 1.
                let z = if a > 0.0 {
                    let (sa, sb) = (std_normal_sf(a), std_normal_sf(b));
                    -std_normal_quantile(sa - u * (sa - sb))
                } else {
                    let (ca, cb) = (std_normal_cdf(a), std_normal_cdf(b));
                    std_normal_quantile(ca + u * (cb - ca))
                };
                (mu + sigma * z).clamp(lower, upper)
            }
            Self::DiscreteUniform { lo, hi, inclusive } => {
                if inclusive {
                    rng.random_range(lo..=hi) as f64
                } else {
                    rng.random_range(lo..hi) as f64
                }
            }
            Self::Categorical {
                ref values,
                ref probs,
            } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut last = 0;
                for (i, p) in probs.iter().enumerate() {
                    if *p > 0.0 {
                        last = i;
                        acc += p;
                        if u < acc {
                            return values[i];
                        }
                    }
                }
                values[last]
            }
            Self::Degenerate { value } => value,
        }
    }

    /// Probability mass at `x` for finite-support families; 0 for
    /// continuous families.
    pub fn mass(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { .. } | Self::TruncatedGaussian { .. } => 0.0,
            Self::DiscreteUniform { lo, hi, inclusive } => {
                let top = if *inclusive { *hi } else { *hi - 1 };
                if x.fract() == 0.0 && x >= *lo as f64 && x <= top as f64 {
                    1.0 / (top - lo + 1) as f64
                } else {
                    0.0
                }
            }
            Self::Categorical { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(v, _)| **v == x)
                .map(|(_, p)| p)
                .sum(),
            Self::Degenerate { value } => {
                if *value == x {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Normalized pdf for continuous families, pmf for finite-support ones.
    /// Zero outside the support.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            Self::TruncatedGaussian {
                mu,
                sigma,
                lower,
                upper,
            } => {
                if x < lower || upper.is_some_and(|u| x > u) {
                    0.0
                } else {
                    std_normal_pdf((x - mu) / sigma) / (sigma * self.truncated_mass())
                }
            }
            _ => self.mass(x),
        }
    }

    /// Natural log of [`density`](Self::density); `-inf` outside the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - LN_SQRT_2PI - sigma.ln()
            }
            Self::TruncatedGaussian {
                mu,
                sigma,
                lower,
                upper,
            } => {
                if x < lower || upper.is_some_and(|u| x > u) {
                    f64::NEG_INFINITY
                } else {
                    let z = (x - mu) / sigma;
                    -0.5 * z * z - LN_SQRT_2PI - sigma.ln() - self.truncated_mass().ln()
                }
            }
            _ => self.mass(x).ln(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mu, .. } => *mu,
            Self::TruncatedGaussian { .. } => {
                let (mu, sigma, a, b) = self.truncation().expect("truncated");
                mu + sigma * (std_normal_pdf(a) - pdf_or_zero(b)) / self.truncated_mass()
            }
            Self::DiscreteUniform { lo, hi, inclusive } => {
                let top = if *inclusive { *hi } else { *hi - 1 };
                (*lo as f64 + top as f64) / 2.0
            }
            Self::Categorical { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
            Self::Degenerate { value } => *value,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Gaussian { sigma, .. } => sigma * sigma,
            Self::TruncatedGaussian { .. } => {
                let (_, sigma, a, b) = self.truncation().expect("truncated");
                let z = self.truncated_mass();
                let pa = std_normal_pdf(a);
                let pb = pdf_or_zero(b);
                let ta = if a.is_finite() { a * pa } else { 0.0 };
                let tb = if b.is_finite() { b * pb } else { 0.0 };
                let shift = (pa - pb) / z;
                sigma * sigma * (1.0 + (ta - tb) / z - shift * shift)
            }
            Self::DiscreteUniform { lo, hi, inclusive } => {
                let top = if *inclusive { *hi } else { *hi - 1 };
                let n = (top - lo + 1) as f64;
                (n * n - 1.0) / 12.0
            }
            Self::Categorical { values, probs } => {
                let m = self.mean();
                values.iter().zip(probs).map(|(v, p)| p * (v - m) * (v - m)).sum()
            }
            Self::Degenerate { .. } => 0.0,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

fn pdf_or_zero(z: f64) -> f64 {
    if z.is_finite() {
        std_normal_pdf(z)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    fn alpha_prior() -> DistributionSpec {
        DistributionSpec::truncated_below(0.01, 0.25, 0.0)
    }

    // Trapezoid over a fine grid, independent of the closed forms.
    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
        h * (0.5 * f(a) + inner + 0.5 * f(b))
    }

    #[test]
    fn degenerate_always_returns_value() {
        let d = DistributionSpec::degenerate(5.0);
        let mut r = stream(1, Domain::Prior, 0);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut r), 5.0);
        }
    }

    #[test]
    fn standard_normal_density_at_zero() {
        let d = DistributionSpec::gaussian(0.0, 1.0);
        assert!((d.density(0.0) - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn truncated_density_outside_support_is_zero() {
        assert_eq!(alpha_prior().density(-0.1), 0.0);
        assert_eq!(alpha_prior().ln_density(-0.1), f64::NEG_INFINITY);
    }

    #[test]
    fn categorical_mass() {
        let d = DistributionSpec::Categorical {
            values: vec![1.0, 2.0],
            probs: vec![0.3, 0.7],
        };
        assert_eq!(d.mass(2.0), 0.7);
        assert_eq!(d.mass(1.5), 0.0);
    }

    #[test]
    fn closed_form_means() {
        assert_eq!(DistributionSpec::gaussian(1.94, 0.31).mean(), 1.94);
        assert_eq!(DistributionSpec::discrete_uniform(0, 100).mean(), 50.0);
        // scipy.stats.truncnorm(-0.04, inf, loc=0.01, scale=0.25).mean()
        assert!((alpha_prior().mean() - 0.203_148_851_103_741_8).abs() < 1e-12);
        assert!((alpha_prior().std_dev() - 0.152_518_958_842_063_8).abs() < 1e-12);
    }

    #[test]
    fn truncated_moments_match_quadrature() {
        let d = DistributionSpec::TruncatedGaussian {
            mu: 1.0,
            sigma: 2.0,
            lower: -0.5,
            upper: Some(4.0),
        };
        let m = integrate(|x| x * d.density(x), -0.5, 4.0, 200_000);
        let v = integrate(|x| (x - m) * (x - m) * d.density(x), -0.5, 4.0, 200_000);
        assert!((d.mean() - m).abs() < 1e-9);
        assert!((d.variance() - v).abs() < 1e-9);
    }

    #[test]
    fn densities_integrate_to_one() {
        let cases = [
            (DistributionSpec::gaussian(12.6, 1.36), 12.6 - 12.0 * 1.36, 12.6 + 12.0 * 1.36),
            (alpha_prior(), 0.0, 0.01 + 12.0 * 0.25),
            (
                DistributionSpec::TruncatedGaussian {
                    mu: 0.0,
                    sigma: 1.0,
                    lower: 2.5,
                    upper: Some(3.0),
                },
                2.5,
                3.0,
            ),
        ];
        for (d, a, b) in cases {
            let total = integrate(|x| d.density(x), a, b, 100_000);
            assert!((total - 1.0).abs() < 1e-6, "{d:?} integrates to {total}");
        }
        for d in [
            DistributionSpec::discrete_uniform(0, 100),
            DistributionSpec::Categorical {
                values: vec![3.0, 1.0, 3.0],
                probs: vec![0.25, 0.5, 0.25],
            },
            DistributionSpec::degenerate(2.0),
        ] {
            let total: f64 = d.finite_support().unwrap().iter().map(|(x, _)| d.mass(*x)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_uniform_empirical_mean() {
        let d = DistributionSpec::discrete_uniform(0, 100);
        let mut r = stream(11, Domain::Prior, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample(&mut r)).sum::<f64>() / n as f64;
        assert!((mean - 50.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn truncated_sampler_mean_by_rejection() {
        let d = alpha_prior();
        assert!(d.truncated_mass() >= REJECTION_MIN_ACCEPTANCE);
        let mut r = stream(12, Domain::Prior, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut r)).collect();
        assert!(xs.iter().all(|&x| x >= 0.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.2032).abs() < 0.001, "mean {mean}");
    }

    #[test]
    fn truncated_sampler_inverse_cdf_tail() {
        // 2.7% acceptance forces the inverse-CDF branch, in the upper tail
        let d = DistributionSpec::truncated_below(0.0, 1.0, 1.93);
        assert!(d.truncated_mass() < REJECTION_MIN_ACCEPTANCE);
        let mut r = stream(13, Domain::Prior, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut r)).collect();
        assert!(xs.iter().all(|&x| x >= 1.93));
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = d.std_dev() / (n as f64).sqrt();
        assert!((mean - d.mean()).abs() < 5.0 * se, "mean {mean} vs {}", d.mean());

        let lower_tail = DistributionSpec::TruncatedGaussian {
            mu: 0.0,
            sigma: 1.0,
            lower: -1.0,
            upper: Some(-0.8),
        };
        let mut r = stream(14, Domain::Prior, 0);
        let xs: Vec<f64> = (0..n).map(|_| lower_tail.sample(&mut r)).collect();
        assert!(xs.iter().all(|&x| (-1.0..=-0.8).contains(&x)));
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = lower_tail.std_dev() / (n as f64).sqrt();
        assert!((mean - lower_tail.mean()).abs() < 5.0 * se);
    }

    #[test]
    fn sample_moments_converge() {
        let n = 1_000_000u64;
        for (i, d) in [
            DistributionSpec::gaussian(1.94, 0.31),
            alpha_prior(),
            DistributionSpec::discrete_uniform(0, 100),
            DistributionSpec::Categorical {
                values: vec![-1.0, 4.0],
                probs: vec![0.8, 0.2],
            },
        ]
        .iter()
        .enumerate()
        {
            let mut r = stream(20, Domain::Prior, i as u64);
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut r)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            let se = (d.variance() / n as f64).sqrt();
            assert!((mean - d.mean()).abs() < 5.0 * se, "{d:?}: mean {mean}");
            // var of the sample variance ~ 2 sigma^4 / n for near-normal shapes; use a loose band
            assert!((var - d.variance()).abs() < 0.01 * d.variance(), "{d:?}: var {var}");
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(DistributionSpec::gaussian(0.0, 0.0).validate().is_err());
        assert!(DistributionSpec::TruncatedGaussian {
            mu: 0.0,
            sigma: 1.0,
            lower: 1.0,
            upper: Some(1.0)
        }
        .validate()
        .is_err());
        assert!(DistributionSpec::Categorical {
            values: vec![1.0, 2.0],
            probs: vec![0.5, 0.4]
        }
        .validate()
        .is_err());
        assert!(DistributionSpec::DiscreteUniform {
            lo: 3,
            hi: 3,
            inclusive: false
        }
        .validate()
        .is_err());
        assert!(DistributionSpec::discrete_uniform(0, 100).validate().is_ok());
        assert!(alpha_prior().validate().is_ok());
    }

    #[test]
    fn config_syntax() {
        let d: DistributionSpec = serde_json::from_str(r#"{"type":"gaussian","mu":12.6,"sigma":1.36}"#).unwrap();
        assert_eq!(d, DistributionSpec::gaussian(12.6, 1.36));
        let t: DistributionSpec =
            serde_json::from_str(r#"{"type":"truncated_gaussian","mu":0.01,"sigma":0.25,"lower":0}"#).unwrap();
        assert_eq!(t, alpha_prior());
        let u: DistributionSpec = serde_json::from_str(r#"{"type":"discrete_uniform","lo":0,"hi":100}"#).unwrap();
        assert_eq!(u, DistributionSpec::discrete_uniform(0, 100));
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"type":"gaussian","mu":1,"sigma":1,"tau":2}"#).is_err());
        let back: DistributionSpec = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
