use std::f64::consts::{PI, SQRT_2};

/// Running mean and variance of one attribute (Welford).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussianEstimator {
    weight: f64,
    mean: f64,
    m2: f64,
}

impl GaussianEstimator {
    pub fn add(&mut self, value: f64) {
        self.weight += 1.0;
        let delta = value - self.mean;
        self.mean += delta / self.weight;
        self.m2 += delta * (value - self.mean);
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.weight > 1.0 {
            self.m2 / (self.weight - 1.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn density(&self, value: f64) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        let sd = self.std_dev();
        if sd > 0.0 {
            let z = (value - self.mean) / sd;
            (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
        } else if value == self.mean {
            1.0
        } else {
            0.0
        }
    }

    pub fn cdf(&self, value: f64) -> f64 {
        let sd = self.std_dev();
        if sd > 0.0 {
            0.5 * (1.0 + libm::erf((value - self.mean) / (sd * SQRT_2)))
        } else if value >= self.mean {
            1.0
        } else {
            0.0
        }
    }

    /// Estimated weight at or below `value` and strictly above it.
    pub fn split_weights(&self, value: f64) -> (f64, f64) {
        if self.weight == 0.0 {
            return (0.0, 0.0);
        }
        let equal = self.density(value) * self.weight;
        let less = if self.std_dev() > 0.0 {
            (self.cdf(value) * self.weight - equal).max(0.0)
        } else if value > self.mean {
            self.weight - equal
        } else {
            0.0
        };
        let greater = (self.weight - equal - less).max(0.0);
        (less + equal, greater)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let mut g = GaussianEstimator::default();
        xs.iter().for_each(|&x| g.add(x));
        assert!((g.mean() - 5.0).abs() < 1e-12);
        let var = xs.iter().map(|x| (x - 5.0f64).powi(2)).sum::<f64>() / 7.0;
        assert!((g.variance() - var).abs() < 1e-12);
        assert!((g.cdf(5.0) - 0.5).abs() < 1e-12);
    }
}
