/// Incremental Gaussian approximation of one attribute for one class.
///
/// Follows the classic weighted running-mean recurrence: the first call seeds
/// `w_sum`, `M` and `v_sum`; each later call updates them in place.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaussianStat {
    w_sum: f64,
    mean: f64,
    v_sum: f64,
    variance: f64,
}

impl GaussianStat {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, x: f64, weight: f64) {
        if self.w_sum == 0.0 {
            self.w_sum = weight;
            self.mean = x;
            self.v_sum = 0.0;
            self.variance = 0.0;
            return;
        }
        self.w_sum += weight;
        let prior = self.mean;
        self.mean += (x - prior) / self.w_sum;
        self.v_sum += (x - prior) * (x - self.mean);
        self.variance = if self.w_sum > 1.0 {
            self.v_sum / (self.w_sum - 1.0)
        } else {
            0.0
        };
    }

    pub fn weight_sum(&self) -> f64 {
        self.w_sum
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased variance; 0 until more than one unit of weight was seen.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn v_sum(&self) -> f64 {
        self.v_sum
    }

    /// `P(X <= pt)` under the fitted normal. Degenerates to a step at the
    /// mean when the variance is zero.
    pub fn cdf(&self, pt: f64) -> f64 {
        if self.variance <= 0.0 {
            return if pt < self.mean { 0.0 } else { 1.0 };
        }
        let z = (pt - self.mean) / (2.0 * self.variance).sqrt();
        0.5 * (1.0 + erf(z))
    }
}

/// Rational approximation of the error function, absolute error below 1.5e-7.
pub fn erf(x: f64) -> f64 {
    const P: f64 = 0.327_591_1;
    const A: [f64; 5] = [
        0.254_829_592,
        -0.284_496_736,
        1.421_413_741,
        -1.453_152_027,
        1.061_405_429,
    ];
    if x == 0.0 {
        return 0.0;
    }
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (A[0] + t * (A[1] + t * (A[2] + t * (A[3] + t * A[4]))));
    sign * (1.0 - poly * (-x * x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_two_three() {
        let mut g = GaussianStat::new();
        for x in [1.0, 2.0, 3.0] {
            g.update(x, 1.0);
        }
        assert_eq!(g.mean(), 2.0);
        assert_eq!(g.variance(), 1.0);
    }

    #[test]
    fn single_sample() {
        let mut g = GaussianStat::new();
        g.update(0.7, 1.0);
        assert_eq!(g.mean(), 0.7);
        assert_eq!(g.variance(), 0.0);
        assert_eq!(g.weight_sum(), 1.0);
    }

    #[test]
    fn matches_two_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random_range(-3.0..5.0)).collect();
        let mut g = GaussianStat::new();
        for &x in &xs {
            g.update(x, 1.0);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(((g.mean() - mean) / mean).abs() <= 1e-9);
        assert!(((g.variance() - var) / var).abs() <= 1e-9);
    }

    /// Simpson integration of the standard normal density.
    fn phi_oracle(z: f64) -> f64 {
        let n = 200_000;
        let (a, b) = (-12.0, z);
        let h = (b - a) / n as f64;
        let f = |x: f64| (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn cdf_values() {
        let mut g = GaussianStat::new();
        for x in [-1.0, 1.0] {
            g.update(x, 1.0);
        }
        assert_eq!(g.cdf(g.mean()), 0.5);

        let std = GaussianStat {
            w_sum: 10.0,
            mean: 0.0,
            v_sum: 9.0,
            variance: 1.0,
        };
        let oracle = phi_oracle(1.959964);
        assert!((oracle - 0.975).abs() < 1e-6);
        assert!((std.cdf(1.959964) - oracle).abs() < 1e-4);
        for z in [-3.0, -1.2, -0.3, 0.4, 2.5] {
            assert!((std.cdf(z) - phi_oracle(z)).abs() < 2e-7, "z={z}");
        }
    }

    #[test]
    fn zero_variance_is_a_step() {
        let mut g = GaussianStat::new();
        g.update(0.3, 1.0);
        assert_eq!(g.cdf(0.2), 0.0);
        assert_eq!(g.cdf(0.3), 1.0);
    }
}
