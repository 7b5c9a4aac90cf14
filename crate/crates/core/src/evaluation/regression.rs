use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::EvalError;

/// Polynomial used to map objective scores onto MOS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionForm {
    /// `b1 + b2 x + b3 x^2 + b4 x^3`.
    #[default]
    Cubic,
    /// `b1 + b2 x + b3 x^2 + b4 x^4`.
    Quartic,
}

impl RegressionForm {
    fn exponents(self) -> [i32; 4] {
        match self {
            RegressionForm::Cubic => [0, 1, 2, 3],
            RegressionForm::Quartic => [0, 1, 2, 4],
        }
    }
}

/// Least-squares polynomial fit of MOS on objective scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub form: RegressionForm,
    /// `b1..b4` in the raw objective scale.
    pub coefficients: [f64; 4],
    /// The fit is evaluated as `p((x - center) / scale)`.
    center: f64,
    scale: f64,
    scaled: [f64; 4],
}

impl Fit {
    pub fn predict(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.scale;
        self.form
            .exponents()
            .iter()
            .zip(&self.scaled)
            .map(|(&e, c)| c * t.powi(e))
            .sum()
    }

    fn derivative_scaled(&self, t: f64) -> f64 {
        let c = &self.scaled;
        match self.form {
            RegressionForm::Cubic => c[1] + 2.0 * c[2] * t + 3.0 * c[3] * t * t,
            RegressionForm::Quartic => c[1] + 2.0 * c[2] * t + 4.0 * c[3] * t * t * t,
        }
    }

    /// True when the fitted curve does not change direction on `[lo, hi]`.
    pub fn is_monotone_on(&self, lo: f64, hi: f64) -> bool {
        let (tlo, thi) = (
            (lo - self.center) / self.scale,
            (hi - self.center) / self.scale,
        );
        let c = &self.scaled;
        // Extrema of the derivative lie at the endpoints or where the second
        // derivative vanishes.
        let mut probes = vec![tlo, thi];
        match self.form {
            RegressionForm::Cubic if c[3] != 0.0 => probes.push(-c[2] / (3.0 * c[3])),
            RegressionForm::Quartic if c[3] != 0.0 && -c[2] / (6.0 * c[3]) > 0.0 => {
                let r = (-c[2] / (6.0 * c[3])).sqrt();
                probes.extend([r, -r]);
            }
            _ => {}
        }
        let slopes: Vec<f64> = probes
            .into_iter()
            .filter(|t| *t >= tlo && *t <= thi)
            .map(|t| self.derivative_scaled(t))
            .collect();
        let tol = 1e-12 * c.iter().map(|v| v.abs()).fold(0.0, f64::max);
        slopes.iter().all(|s| *s >= -tol) || slopes.iter().all(|s| *s <= tol)
    }
}

/// Fits `mos ~ b1 + b2 x + b3 x^2 + b4 x^3` by least squares.
pub fn fit_regression(objective: &[f64], mos: &[f64]) -> Result<Fit, EvalError> {
    fit_regression_form(objective, mos, RegressionForm::Cubic)
}

pub fn fit_regression_form(
    objective: &[f64],
    mos: &[f64],
    form: RegressionForm,
) -> Result<Fit, EvalError> {
    if objective.len() != mos.len() {
        return Err(EvalError::LengthMismatch(objective.len(), mos.len()));
    }
    if objective.len() < 5 {
        return Err(EvalError::TooFewSamples {
            needed: 5,
            actual: objective.len(),
        });
    }
    if objective.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite("objective scores"));
    }
    if mos.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite("mos"));
    }
    let mut sorted = objective.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < 4 {
        return Err(EvalError::RankDeficient {
            distinct: sorted.len(),
            params: 4,
        });
    }
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    // The quartic basis skips x^3, so only a pure scaling keeps it closed;
    // the cubic basis can also be centered.
    let (center, scale) = match form {
        RegressionForm::Cubic => ((lo + hi) / 2.0, (hi - lo) / 2.0),
        RegressionForm::Quartic => (0.0, lo.abs().max(hi.abs())),
    };
    let exps = form.exponents();
    let n = objective.len();
    let design = DMatrix::from_fn(n, 4, |i, j| ((objective[i] - center) / scale).powi(exps[j]));
    let rhs = DVector::from_column_slice(mos);
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-12 {
        return Err(EvalError::RankDeficient {
            distinct: sorted.len(),
            params: 4,
        });
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|e| EvalError::Manifest(format!("least squares failed: {e}")))?;
    let scaled = [solution[0], solution[1], solution[2], solution[3]];
    let coefficients = unscale(form, &scaled, center, scale);
    Ok(Fit {
        form,
        coefficients,
        center,
        scale,
        scaled,
    })
}

/// Re-expresses `sum c_j ((x - m) / s)^e_j` in powers of `x`.
fn unscale(form: RegressionForm, c: &[f64; 4], m: f64, s: f64) -> [f64; 4] {
    match form {
        RegressionForm::Cubic => {
            // Coefficients of x^0..x^3.
            let mut raw = [0.0; 4];
            for (j, cj) in c.iter().enumerate() {
                let w = cj / s.powi(j as i32);
                for (i, r) in raw.iter_mut().enumerate().take(j + 1) {
                    *r += w * binomial(j, i) * (-m).powi((j - i) as i32);
                }
            }
            raw
        }
        RegressionForm::Quartic => [c[0], c[1] / s, c[2] / (s * s), c[3] / s.powi(4)],
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
