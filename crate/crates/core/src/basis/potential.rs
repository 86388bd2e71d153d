use super::BasisError;

/// Highest polynomial degree accepted for a polynomial potential.
pub const MAX_POLYNOMIAL_DEGREE: usize = 12;

/// A real potential `V(x)` in physical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V(x) = Σ_k coeffs[k] x^k`.
    Polynomial { coeffs: Vec<f64> },
    /// `V(x) = amplitude · exp(-x^2 / (2 width^2))`.
    Gaussian { amplitude: f64, width: f64 },
    /// Sampled values joined by a monotone cubic, constant beyond the table.
    Tabulated(MonotoneCubic),
}

impl PotentialSpec {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        PotentialSpec::Polynomial { coeffs }
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        PotentialSpec::Gaussian { amplitude, width }
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self, BasisError> {
        Ok(PotentialSpec::Tabulated(MonotoneCubic::new(points)?))
    }

    pub fn harmonic() -> Self {
        Self::polynomial(vec![0.0, 0.0, 1.0])
    }

    pub fn zero() -> Self {
        Self::polynomial(Vec::new())
    }

    pub fn validate(&self) -> Result<(), BasisError> {
        match self {
            PotentialSpec::Polynomial { coeffs } => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(BasisError::Potential("non-finite polynomial coefficient".into()));
                }
                let d = self.degree();
                if d > MAX_POLYNOMIAL_DEGREE {
                    return Err(BasisError::Potential(format!(
                        "polynomial degree {d} exceeds cap {MAX_POLYNOMIAL_DEGREE}"
                    )));
                }
            }
            PotentialSpec::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() {
                    return Err(BasisError::Potential("non-finite gaussian amplitude".into()));
                }
                if !(width.is_finite() && *width > 0.0) {
                    return Err(BasisError::Potential(format!(
                        "gaussian width must be positive, got {width}"
                    )));
                }
            }
            PotentialSpec::Tabulated(_) => {}
        }
        Ok(())
    }

    /// Degree of a polynomial potential after trimming trailing zeros; 0 for
    /// the other kinds.
    pub fn degree(&self) -> usize {
        match self {
            PotentialSpec::Polynomial { coeffs } => {
                coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
            }
            _ => 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Polynomial { coeffs } => coeffs.iter().all(|&c| c == 0.0),
            PotentialSpec::Gaussian { amplitude, .. } => *amplitude == 0.0,
            PotentialSpec::Tabulated(t) => t.values.iter().all(|&v| v == 0.0),
        }
    }

    /// Smallest quadrature order accepted for an `n`-dimensional basis.
    pub fn required_quadrature_order(&self, n: usize) -> usize {
        match self {
            PotentialSpec::Polynomial { .. } => n + self.degree().div_ceil(2) + 1,
            _ => 2 * n,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
            }
            PotentialSpec::Gaussian { amplitude, width } => {
                amplitude * (-(x * x) / (2.0 * width * width)).exp()
            }
            PotentialSpec::Tabulated(t) => t.evaluate(x),
        }
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Between samples the interpolant never overshoots the data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    abscissae: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Requires at least two points with strictly increasing abscissae.
    pub fn new(points: &[(f64, f64)]) -> Result<Self, BasisError> {
        if points.len() < 2 {
            return Err(BasisError::Potential("table needs at least two points".into()));
        }
        if points.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(BasisError::Potential("table contains non-finite values".into()));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(BasisError::Potential(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();

        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] <= 0.0 {
                0.0
            } else {
                0.5 * (secants[i - 1] + secants[i])
            };
        }
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / secants[i];
            let b = slopes[i + 1] / secants[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                slopes[i] = t * a * secants[i];
                slopes[i + 1] = t * b * secants[i];
            }
        }
        Ok(Self {
            abscissae: xs,
            values: ys,
            slopes,
        })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let n = self.abscissae.len();
        if x <= self.abscissae[0] {
            return self.values[0];
        }
        if x >= self.abscissae[n - 1] {
            return self.values[n - 1];
        }
        let i = self.abscissae.partition_point(|&a| a <= x) - 1;
        let h = self.abscissae[i + 1] - self.abscissae[i];
        let t = (x - self.abscissae[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}
