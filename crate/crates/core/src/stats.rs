//! Order-stable summary statistics.

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Standard deviation with the `n - 1` denominator (0 for a single value).
    pub sample_std: f64,
    /// Standard deviation with the `n` denominator.
    pub population_std: f64,
}

impl Summary {
    /// Standard error of the mean of a random sample.
    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sample_std / (self.count as f64).sqrt()
        }
    }

    /// Population standard deviation over `√count`, used for exhaustive enumeration.
    pub fn population_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.population_std / (self.count as f64).sqrt()
        }
    }
}

/// Mean and spread computed on data shifted by the first value, so a
/// constant sample gives exactly that constant and zero spread.
pub fn summarize(values: &[f64]) -> Summary {
    let count = values.len();
    if count == 0 {
        return Summary { count, mean: f64::NAN, sample_std: 0.0, population_std: 0.0 };
    }
    let shift = values[0];
    let n = count as f64;
    let s1 = compensated_sum(values.iter().map(|x| x - shift));
    let s2 = compensated_sum(values.iter().map(|x| (x - shift) * (x - shift)));
    let ss = (s2 - s1 * s1 / n).max(0.0);
    Summary {
        count,
        mean: shift + s1 / n,
        sample_std: if count > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 },
        population_std: (ss / n).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_has_zero_spread() {
        let x = 0.1 + 0.2;
        let s = summarize(&vec![x; 200]);
        assert_eq!(s.mean, x);
        assert_eq!(s.sample_std, 0.0);
        assert_eq!(s.standard_error(), 0.0);
    }

    #[test]
    fn small_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.sample_std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.population_std - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(v), 1.0);
    }
}
