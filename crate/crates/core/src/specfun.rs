//! Real special functions for the Laguerre machinery: `ln Γ`, the digamma
//! function, and generalized Laguerre polynomials.

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Largest Laguerre degree accepted by [`laguerre_eval`].
pub const MAX_LAGUERRE_DEGREE: usize = 200;

// ζ(2), ζ(3), ..., ζ(30)
const ZETA: [f64; 29] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
];

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("{what} requires a finite positive argument, got {x}")));
    }
    Ok(())
}

/// `ln Γ(1 + eps)` by its Taylor series; valid for `|eps| <= 0.25`.
fn ln_gamma_1p(eps: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = -eps;
    for (i, zeta) in ZETA.iter().enumerate() {
        let k = (i + 2) as f64;
        power *= -eps;
        sum += zeta * power / k;
    }
    -EULER_GAMMA * eps + sum
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0
                - r2 * (1.0 / 1260.0
                    - r2 * (1.0 / 1680.0
                        - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 / 156.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Natural log of the Gamma function for `x > 0`.
///
/// Near the roots at 1 and 2 the Taylor series in `x - 1` keeps the result
/// relatively accurate; elsewhere the argument is shifted up to 15 and the
/// Stirling series is used.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive(x, "log_gamma")?;
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if (x - 1.0).abs() <= 0.2 {
        return ln_gamma_1p(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.2 {
        let eps = x - 2.0;
        return ln_gamma_1p(eps) + eps.ln_1p();
    }
    if x < 0.8 {
        // Γ(x) = Γ(x + 1) / x
        return log_gamma_unchecked(x + 1.0) - x.ln();
    }
    if x >= 15.0 {
        return ln_gamma_stirling(x);
    }
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < 15.0 {
        product *= shifted;
        shifted += 1.0;
    }
    ln_gamma_stirling(shifted) - product.ln()
}

/// Digamma function Ψ(x) = d/dx ln Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma")?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let r = 1.0 / z;
    let r2 = r * r;
    let tail = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32_760.0 - r2 / 12.0))))));
    shift + z.ln() - 0.5 * r - tail
}

/// Generalized Laguerre polynomial `L_m^{(a)}` in the monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerrePolynomial {
    degree: usize,
    parameter: f64,
    coefficients: Vec<f64>,
}

impl LaguerrePolynomial {
    pub fn new(degree: usize, parameter: f64) -> Result<Self> {
        if degree > MAX_LAGUERRE_DEGREE {
            return Err(Error::UnsupportedDegree { degree, max: MAX_LAGUERRE_DEGREE });
        }
        if !(parameter > -1.0) || !parameter.is_finite() {
            return Err(Error::Domain(format!("Laguerre parameter must exceed -1, got {parameter}")));
        }
        let mut coefficients = vec![0.0; degree + 1];
        let mut c = if degree % 2 == 0 { 1.0 } else { -1.0 };
        for k in 1..=degree {
            c /= k as f64;
        }
        coefficients[degree] = c;
        // c_{h-1} = -c_h h (a + h) / (m - h + 1)
        for h in (1..=degree).rev() {
            let hf = h as f64;
            c = -c * hf * (parameter + hf) / ((degree - h + 1) as f64);
            coefficients[h - 1] = c;
        }
        Ok(Self { degree, parameter, coefficients })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    /// Monomial coefficients, constant term first.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Horner evaluation of the monomial form.
    pub fn eval(&self, y: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }
}

/// Evaluates `L_m^{(a)}(y)` with the three-term recurrence.
pub fn laguerre_eval(m: usize, a: f64, y: f64) -> Result<f64> {
    if m > MAX_LAGUERRE_DEGREE {
        return Err(Error::UnsupportedDegree { degree: m, max: MAX_LAGUERRE_DEGREE });
    }
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::Domain(format!("Laguerre parameter must exceed -1, got {a}")));
    }
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!("Laguerre argument must be finite and non-negative, got {y}")));
    }
    Ok(laguerre_unchecked(m, a, y))
}

pub(crate) fn laguerre_unchecked(m: usize, a: f64, y: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - y;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - y) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
