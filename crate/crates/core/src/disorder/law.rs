use std::fmt;
use std::str::FromStr;

use super::rng::{standard_normal_quantile, unit_open};
use super::DisorderError;

/// Marginal law of one disorder value `η(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisorderLaw {
    StandardGaussian,
    /// Uniform on `[-1, 1]`.
    UniformBounded,
    /// `±1` with probability one half each.
    Rademacher,
}

impl DisorderLaw {
    pub const ALL: [DisorderLaw; 3] = [
        DisorderLaw::StandardGaussian,
        DisorderLaw::UniformBounded,
        DisorderLaw::Rademacher,
    ];

    /// Identifier used in field files.
    pub fn id(self) -> u8 {
        match self {
            DisorderLaw::StandardGaussian => 0,
            DisorderLaw::UniformBounded => 1,
            DisorderLaw::Rademacher => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        DisorderLaw::ALL.into_iter().find(|law| law.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            DisorderLaw::StandardGaussian => "gaussian",
            DisorderLaw::UniformBounded => "uniform",
            DisorderLaw::Rademacher => "rademacher",
        }
    }

    pub fn is_bounded(self) -> bool {
        !matches!(self, DisorderLaw::StandardGaussian)
    }

    /// `λ(β) = log Q(e^{βη})`.
    pub fn lambda(self, beta: f64) -> f64 {
        let b = beta.abs();
        match self {
            DisorderLaw::StandardGaussian => 0.5 * beta * beta,
            DisorderLaw::UniformBounded => {
                // log(sinh β / β)
                if b < 1e-3 {
                    let b2 = b * b;
                    b2 / 6.0 - b2 * b2 / 180.0
                } else {
                    b + (-(-2.0 * b).exp()).ln_1p() - std::f64::consts::LN_2 - b.ln()
                }
            }
            DisorderLaw::Rademacher => {
                // log cosh β
                b + (-2.0 * b).exp().ln_1p() - std::f64::consts::LN_2
            }
        }
    }

    /// Maps 64 uniform bits to one variate of this law.
    #[inline]
    pub fn sample_from_bits(self, bits: u64) -> f64 {
        match self {
            DisorderLaw::StandardGaussian => standard_normal_quantile(unit_open(bits)),
            DisorderLaw::UniformBounded => 2.0 * unit_open(bits) - 1.0,
            DisorderLaw::Rademacher => {
                if bits >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl fmt::Display for DisorderLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DisorderLaw {
    type Err = DisorderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(DisorderLaw::StandardGaussian),
            "uniform" | "bounded" => Ok(DisorderLaw::UniformBounded),
            "rademacher" | "sign" => Ok(DisorderLaw::Rademacher),
            other => Err(DisorderError::UnknownLaw(other.to_string())),
        }
    }
}

/// Model parameters with the derived cumulants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub dim: usize,
    pub beta: f64,
    pub law: DisorderLaw,
    /// `λ(β)`
    pub lambda: f64,
    /// `λ(2β)`
    pub lambda2: f64,
    /// `λ(2β) − 2λ(β)`, the exponent governing second moments.
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(dim: usize, beta: f64, law: DisorderLaw) -> Result<Self, DisorderError> {
        if dim == 0 {
            return Err(DisorderError::InvalidParams("dimension must be at least 1".into()));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(DisorderError::InvalidParams(format!(
                "inverse temperature must be finite and non-negative, got {beta}"
            )));
        }
        let lambda = law.lambda(beta);
        let lambda2 = law.lambda(2.0 * beta);
        Ok(ModelParams {
            dim,
            beta,
            law,
            lambda,
            lambda2,
            gamma: (lambda2 - 2.0 * lambda).max(0.0),
        })
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self, DisorderError> {
        ModelParams::new(self.dim, beta, self.law)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_lambda() {
        assert!((DisorderLaw::StandardGaussian.lambda(0.3) - 0.045).abs() < 1e-15);
    }

    #[test]
    fn zero_beta() {
        for law in DisorderLaw::ALL {
            assert_eq!(law.lambda(0.0), 0.0);
            let p = ModelParams::new(3, 0.0, law).unwrap();
            assert_eq!((p.lambda, p.gamma), (0.0, 0.0));
        }
    }

    #[test]
    fn rademacher_closed_form() {
        let expect = ((1f64.exp() + (-1f64).exp()) / 2.0).ln();
        assert!((DisorderLaw::Rademacher.lambda(1.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn uniform_matches_direct_formula() {
        for b in [1e-4, 0.002, 0.4, 1.0, 3.0] {
            let direct = (f64::sinh(b) / b).ln();
            assert!((DisorderLaw::UniformBounded.lambda(b) - direct).abs() < 1e-13, "{b}");
        }
    }

    #[test]
    fn convexity_gap_is_nonnegative() {
        for law in DisorderLaw::ALL {
            for i in 1..=10 {
                let b = i as f64 / 10.0;
                assert!(law.lambda(2.0 * b) - 2.0 * law.lambda(b) >= 0.0);
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("Gaussian".parse::<DisorderLaw>().unwrap(), DisorderLaw::StandardGaussian);
        assert!("cauchy".parse::<DisorderLaw>().is_err());
        for law in DisorderLaw::ALL {
            assert_eq!(DisorderLaw::from_id(law.id()), Some(law));
            assert_eq!(law.name().parse::<DisorderLaw>().unwrap(), law);
        }
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(ModelParams::new(3, -0.1, DisorderLaw::Rademacher).is_err());
        assert!(ModelParams::new(3, f64::NAN, DisorderLaw::Rademacher).is_err());
        assert!(ModelParams::new(0, 0.1, DisorderLaw::Rademacher).is_err());
    }
}
