use crate::error::{Error, Result};

/// Numerical tolerances used when validating algebraic identities and
/// comparing integrated trajectories.
///
/// `alg` applies to exact algebraic identities (unitarity, completeness,
/// column sums). `int` applies to results of numerical integration or
/// finite differencing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    alg: f64,
    int: f64,
}

impl Tolerance {
    pub const DEFAULT_ALG: f64 = 1e-10;
    pub const DEFAULT_INT: f64 = 1e-6;

    pub fn new(alg: f64, int: f64) -> Result<Self> {
        for (name, v) in [("algebraic", alg), ("integration", int)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} tolerance must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self { alg, int })
    }

    pub fn with_alg(self, alg: f64) -> Result<Self> {
        Self::new(alg, self.int)
    }

    pub fn with_int(self, int: f64) -> Result<Self> {
        Self::new(self.alg, int)
    }

    #[inline]
    pub fn alg(&self) -> f64 {
        self.alg
    }

    #[inline]
    pub fn int(&self) -> f64 {
        self.int
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            alg: Self::DEFAULT_ALG,
            int: Self::DEFAULT_INT,
        }
    }
}
