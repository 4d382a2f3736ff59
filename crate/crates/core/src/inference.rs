//! Bayesian updates of a single scalar parameter.
//!
//! The conjugate Gaussian update is closed form. Everything else goes
//! through a fixed quadrature grid over the prior: the posterior is the
//! prior density times the likelihood, renormalized on the grid.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Result, VoiError};

/// Normal prior, normal observation with known noise: returns the normal
/// posterior.
pub fn conjugate_gaussian_posterior(prior: &DistributionSpec, obs_sigma: f64, z: f64) -> Result<DistributionSpec> {
    let DistributionSpec::Gaussian { mu, sigma } = *prior else {
        return Err(VoiError::InvalidDistribution(
            "conjugate update needs a gaussian prior".into(),
        ));
    };
    if !(obs_sigma.is_finite() && obs_sigma > 0.0) {
        return Err(VoiError::InvalidDistribution(format!(
            "observation sigma must be finite and positive, got {obs_sigma}"
        )));
    }
    let v0 = sigma * sigma;
    let ve = obs_sigma * obs_sigma;
    let mu1 = (ve * mu + v0 * z) / (v0 + ve);
    let var1 = v0 * ve / (v0 + ve);
    Ok(DistributionSpec::Gaussian {
        mu: mu1,
        sigma: var1.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Half-width of the grid in prior standard deviations.
    pub span_sigmas: f64,
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            span_sigmas: 6.0,
            n_points: 512,
        }
    }
}

impl GridSpec {
    pub const MIN_POINTS: usize = 64;

    pub fn validate(&self) -> Result<()> {
        if self.n_points < Self::MIN_POINTS {
            return Err(VoiError::InvalidConfig(format!(
                "posterior grid needs at least {} points, got {}",
                Self::MIN_POINTS,
                self.n_points
            )));
        }
        if !(self.span_sigmas.is_finite() && self.span_sigmas > 0.0) {
            return Err(VoiError::InvalidConfig(format!(
                "posterior grid span must be positive, got {}",
                self.span_sigmas
            )));
        }
        Ok(())
    }
}

/// Discretized posterior over one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPosterior {
    /// Strictly increasing parameter values.
    pub points: Vec<f64>,
    /// Probabilities, proportional to prior density times likelihood at
    /// each point, summing to one.
    pub weights: Vec<f64>,
    /// Posterior density at each point, normalized so the trapezoid rule
    /// integrates it to one. Equal to `weights` for finite-support priors.
    pub density: Vec<f64>,
}

impl GridPosterior {
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expectation(|x| (x - m) * (x - m))
    }
}

/// The fixed quadrature grid for one prior, reused for every observation.
#[derive(Debug, Clone)]
pub struct PriorGrid {
    points: Vec<f64>,
    ln_prior: Vec<f64>,
    /// Trapezoid integral of the normalized weights; `None` when discrete.
    spacing: Option<f64>,
}

impl PriorGrid {
    /// Grid over `prior`. Finite-support priors use their support points;
    /// continuous priors use `n_points` equally spaced points over
    /// `mean ± span_sigmas·sd`, clipped to the support and, if given, to
    /// below `ceiling`.
    pub fn new(prior: &DistributionSpec, spec: &GridSpec, ceiling: Option<f64>) -> Result<Self> {
        prior.validate()?;
        spec.validate()?;
        if let Some(support) = prior.finite_support() {
            let kept: Vec<(f64, f64)> = support
                .into_iter()
                .filter(|(x, _)| ceiling.is_none_or(|c| *x < c))
                .collect();
            if kept.is_empty() {
                return Err(VoiError::InvalidDistribution("prior support is empty below the ceiling".into()));
            }
            return Ok(Self {
                points: kept.iter().map(|p| p.0).collect(),
                ln_prior: kept.iter().map(|p| p.1.ln()).collect(),
                spacing: None,
            });
        }
        let (mean, sd) = (prior.mean(), prior.std_dev());
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(VoiError::InvalidDistribution("prior needs a finite mean and scale".into()));
        }
        let (s_lo, s_hi) = prior.support();
        let lo = (mean - spec.span_sigmas * sd).max(s_lo);
        let mut hi = (mean + spec.span_sigmas * sd).min(s_hi);
        if let Some(c) = ceiling {
            // keep the grid strictly below a redraw ceiling
            hi = hi.min(c - (c - lo) * 1e-9);
        }
        if hi <= lo {
            return Err(VoiError::InvalidDistribution("posterior grid interval is empty".into()));
        }
        let n = spec.n_points;
        let h = (hi - lo) / (n - 1) as f64;
        let points: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
            .collect();
        let ln_prior = points.iter().map(|&x| prior.ln_density(x)).collect();
        Ok(Self {
            points,
            ln_prior,
            spacing: Some(h),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Prior probabilities on the grid.
    pub fn prior_weights(&self) -> Vec<f64> {
        let mut w = Vec::new();
        self.weights_into(|_| 0.0, 0.0, &mut w).expect("prior has mass on its own grid");
        w
    }

    /// Posterior probabilities for observation `z` written into `out`.
    /// `ln_likelihood(theta)` is the log-likelihood of `z` at `theta`.
    pub fn weights_into(&self, ln_likelihood: impl Fn(f64) -> f64, z: f64, out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        out.extend(self.points.iter().zip(&self.ln_prior).map(|(&x, lp)| lp + ln_likelihood(x)));
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(VoiError::Posterior { z });
        }
        let mut total = 0.0;
        for w in out.iter_mut() {
            *w = if w.is_nan() { 0.0 } else { (*w - max).exp() };
            total += *w;
        }
        for w in out.iter_mut() {
            *w /= total;
        }
        Ok(())
    }

    pub fn posterior_ln(&self, ln_likelihood: impl Fn(f64) -> f64, z: f64) -> Result<GridPosterior> {
        let mut weights = Vec::with_capacity(self.points.len());
        self.weights_into(ln_likelihood, z, &mut weights)?;
        let density = match self.spacing {
            Some(h) => {
                let n = weights.len();
                let integral = h * (weights.iter().sum::<f64>() - 0.5 * (weights[0] + weights[n - 1]));
                weights.iter().map(|w| w / integral).collect()
            }
            None => weights.clone(),
        };
        Ok(GridPosterior {
            points: self.points.clone(),
            weights,
            density,
        })
    }
}

/// Posterior of a scalar parameter on a quadrature grid, for observation
/// `z` under `likelihood_density(z, theta)`.
pub fn grid_posterior(
    prior: &DistributionSpec,
    likelihood_density: impl Fn(f64, f64) -> f64,
    z: f64,
    grid: &GridSpec,
) -> Result<GridPosterior> {
    PriorGrid::new(prior, grid, None)?.posterior_ln(|theta| likelihood_density(z, theta).ln(), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};
    use proptest::prelude::*;

    fn lambda_prior() -> DistributionSpec {
        DistributionSpec::gaussian(1.94, 0.31)
    }

    fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
        DistributionSpec::gaussian(mu, sigma).density(x)
    }

    #[test]
    fn uninformative_measurement_leaves_prior() {
        let post = conjugate_gaussian_posterior(&lambda_prior(), 1e12, 2.2).unwrap();
        let DistributionSpec::Gaussian { mu, sigma } = post else { panic!() };
        assert!((mu - 1.94).abs() < 1e-6);
        assert!((sigma / 0.31 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn perfect_measurement_recovers_observation() {
        let post = conjugate_gaussian_posterior(&lambda_prior(), 1e-9, 2.2).unwrap();
        assert!((post.mean() - 2.2).abs() < 1e-9);
    }

    #[test]
    fn trt_conjugate_update() {
        // (0.097^2 * 1.94 + 0.31^2 * 2.2) / (0.31^2 + 0.097^2), sqrt(0.31^2 0.097^2 / (0.31^2 + 0.097^2))
        let post = conjugate_gaussian_posterior(&lambda_prior(), 0.097, 2.2).unwrap();
        assert!((post.mean() - 2.176_813_921_087_3).abs() < 1e-10);
        assert!((post.std_dev() - 0.092_573_924_379_6).abs() < 1e-10);
    }

    #[test]
    fn conjugate_rejects_non_gaussian_prior() {
        assert!(conjugate_gaussian_posterior(&DistributionSpec::degenerate(1.0), 1.0, 0.0).is_err());
        assert!(conjugate_gaussian_posterior(&lambda_prior(), 0.0, 0.0).is_err());
    }

    #[test]
    fn constant_likelihood_returns_prior_shape() {
        let post = grid_posterior(&lambda_prior(), |_, _| 3.7, 0.0, &GridSpec::default()).unwrap();
        let scale = post.weights[256] / lambda_prior().density(post.points[256]);
        let worst = post
            .points
            .iter()
            .zip(&post.weights)
            .map(|(x, w)| (w / (scale * lambda_prior().density(*x)) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "max relative deviation {worst}");
        assert!((post.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(post.points.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_matches_conjugate_mean() {
        for (obs_sigma, z) in [(0.097, 2.2), (0.3, 1.2), (0.05, 2.9)] {
            let exact = conjugate_gaussian_posterior(&lambda_prior(), obs_sigma, z).unwrap().mean();
            let post = grid_posterior(&lambda_prior(), |z, t| normal_pdf(z, t, obs_sigma), z, &GridSpec::default()).unwrap();
            assert!((post.mean() / exact - 1.0).abs() < 1e-4, "{} vs {exact}", post.mean());
        }
    }

    #[test]
    fn trapezoid_density_integrates_to_one() {
        let post = grid_posterior(&lambda_prior(), |z, t| normal_pdf(z, t, 0.1), 2.0, &GridSpec::default()).unwrap();
        let h = post.points[1] - post.points[0];
        let n = post.density.len();
        let integral = h * (post.density.iter().sum::<f64>() - 0.5 * (post.density[0] + post.density[n - 1]));
        assert!((integral - 1.0).abs() < 1e-12);
    }

    #[test]
    fn proportional_noise_posterior_matches_importance_sampling() {
        // z | theta ~ N(theta, (0.10 / 2) theta), observed z = 1.94
        let nu = 0.10;
        let z = 1.94;
        let lik = |z: f64, t: f64| if t > 0.0 { normal_pdf(z, t, 0.5 * nu * t) } else { 0.0 };
        let post = grid_posterior(&lambda_prior(), lik, z, &GridSpec::default()).unwrap();

        // Self-normalized importance sampling with the prior as proposal.
        let n = 10_000_000u64;
        let mut rng = stream(99, Domain::Prior, 0);
        let prior = lambda_prior();
        let (mut sw, mut swx, mut sw2, mut sw2x, mut sw2x2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let t = prior.sample(&mut rng);
            let w = lik(z, t);
            sw += w;
            swx += w * t;
            sw2 += w * w;
            sw2x += w * w * t;
            sw2x2 += w * w * t * t;
        }
        let est = swx / sw;
        // delta-method variance of the ratio estimator
        let var = (sw2x2 - 2.0 * est * sw2x + est * est * sw2) / (sw * sw);
        let se = var.sqrt();
        assert!((post.mean() - est).abs() < 3.0 * se, "grid {} vs IS {est} ± {se}", post.mean());
    }

    #[test]
    fn sharp_likelihood_concentrates() {
        let post = grid_posterior(&lambda_prior(), |z, t| normal_pdf(z, t, 1e-3), 2.0, &GridSpec::default()).unwrap();
        assert!(post.variance() < lambda_prior().variance());
        let tiny = PriorGrid::new(&lambda_prior(), &GridSpec::default(), None)
            .unwrap()
            .posterior_ln(|t| DistributionSpec::gaussian(t, 1e-12).ln_density(2.0), 2.0)
            .unwrap();
        assert!(tiny.variance() < 1e-4);
    }

    #[test]
    fn impossible_observation_is_an_error() {
        let prior = DistributionSpec::truncated_below(1.0, 0.5, 0.0);
        let err = grid_posterior(&prior, |z, t| if (z - t).abs() < 0.01 { 1.0 } else { 0.0 }, -50.0, &GridSpec::default())
            .unwrap_err();
        assert_eq!(err, VoiError::Posterior { z: -50.0 });
    }

    #[test]
    fn discrete_prior_uses_support_points() {
        let prior = DistributionSpec::discrete_uniform(0, 10);
        let post = grid_posterior(&prior, |z, t| normal_pdf(z, t, 1.0), 3.0, &GridSpec::default()).unwrap();
        assert_eq!(post.points.len(), 11);
        assert_eq!(post.points[0], 0.0);
        assert!((post.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_is_clipped_to_support_and_ceiling() {
        let prior = DistributionSpec::truncated_below(0.01, 0.25, 0.0);
        let g = PriorGrid::new(&prior, &GridSpec::default(), Some(1.0)).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert!(*g.points().last().unwrap() < 1.0);
        assert!(GridSpec { span_sigmas: 6.0, n_points: 10 }.validate().is_err());
    }

    proptest! {
        #[test]
        fn rescaling_likelihood_leaves_posterior(scale in 1e-200f64..1e200, z in 0.5f64..3.5) {
            let g = PriorGrid::new(&lambda_prior(), &GridSpec::default(), None).unwrap();
            let a = g.posterior_ln(|t| DistributionSpec::gaussian(t, 0.2).ln_density(z), z).unwrap();
            let b = g.posterior_ln(|t| DistributionSpec::gaussian(t, 0.2).ln_density(z) + scale.ln(), z).unwrap();
            for (x, y) in a.weights.iter().zip(&b.weights) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}
