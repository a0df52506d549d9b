//! Dense truncated power series over f64, just enough to re-derive the
//! catalog expansion coefficients in closed form.

/// Coefficients c[0..=n] of a series truncated at degree n.
#[derive(Clone, Debug)]
pub(crate) struct Series(pub Vec<f64>);

impl Series {
    /// Series of exp(a t) truncated at degree n.
    pub fn exp_linear(a: f64, n: usize) -> Series {
        let mut c = vec![0.0; n + 1];
        let mut term = 1.0;
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = term;
            term *= a / (k as f64 + 1.0);
        }
        Series(c)
    }

    /// Series with coefficients a^k / (k+1)!, i.e. (exp(a t) - 1)/(a t).
    pub fn expm1_over_x(a: f64, n: usize) -> Series {
        let mut c = vec![0.0; n + 1];
        let mut term = 1.0;
        for (k, slot) in c.iter_mut().enumerate() {
            term /= k as f64 + 1.0;
            *slot = term;
            term *= a;
        }
        Series(c)
    }

    pub fn from_coeffs(c: Vec<f64>) -> Series {
        Series(c)
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.0.len().min(other.0.len());
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.0[i] * other.0[j];
            }
        }
        Series(c)
    }

    pub fn scale(&self, s: f64) -> Series {
        Series(self.0.iter().map(|x| x * s).collect())
    }

    /// A(t)^p for a series with A(0) = 1, by the Miller recurrence.
    pub fn powf(&self, p: f64) -> Series {
        assert!((self.0[0] - 1.0).abs() < 1e-14, "powf needs unit constant term");
        let n = self.0.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        for k in 1..n {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += (p * i as f64 - (k - i) as f64) * self.0[i] * b[k - i];
            }
            b[k] = acc / k as f64;
        }
        Series(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_series() {
        let s = Series::exp_linear(-1.0, 4);
        assert_relative_eq!(s.0[0], 1.0);
        assert_relative_eq!(s.0[1], -1.0);
        assert_relative_eq!(s.0[2], 0.5);
        assert_relative_eq!(s.0[3], -1.0 / 6.0);
    }

    #[test]
    fn powf_matches_binomial() {
        // (1 + t)^(-3/2) = 1 - 3/2 t + 15/8 t^2 - 35/16 t^3 ...
        let s = Series::from_coeffs(vec![1.0, 1.0, 0.0, 0.0]).powf(-1.5);
        assert_relative_eq!(s.0[1], -1.5);
        assert_relative_eq!(s.0[2], 15.0 / 8.0);
        assert_relative_eq!(s.0[3], -35.0 / 16.0);
    }

    #[test]
    fn mul_truncates() {
        let a = Series::from_coeffs(vec![1.0, 2.0, 3.0]);
        let b = Series::from_coeffs(vec![1.0, -1.0, 0.5]);
        let c = a.mul(&b);
        assert_relative_eq!(c.0[0], 1.0);
        assert_relative_eq!(c.0[1], 1.0);
        assert_relative_eq!(c.0[2], 1.5);
    }
}
