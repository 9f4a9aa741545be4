//! Closed-form upper bounds on the log normalizers, obtained by integrating
//! over all symmetric matrices with positive diagonal instead of the PD cone,
//! and the exact normalizer in two dimensions.

use std::f64::consts::{LN_2, PI};

use super::{Kind, Partition, PenaltyConfig};
use crate::error::{Error, Result};
use crate::pdcore::ln_gamma_pos;

/// `ln Ẑ_1 = -D ln λ_D + Σ_{i<j} [ln 2 - ln λ_ij]`.
pub fn log_bound_gl1(p: &Partition, c: &PenaltyConfig) -> f64 {
    let d = p.dim() as f64;
    let within = p.c_t() as f64;
    let total_pairs = d * (d - 1.0) / 2.0;
    let between = total_pairs - within;
    -d * c.lambda_d.ln() + within * (LN_2 - c.lambda_1.ln()) + between * (LN_2 - c.lambda_0.ln())
}

/// `ln Ẑ_12`: diagonal and within-group terms as in the ℓ1 bound, plus one
/// multivariate Laplace normalizer per unordered pair of groups.
pub fn log_bound_gl12(p: &Partition, c: &PenaltyConfig) -> f64 {
    let d = p.dim() as f64;
    let mut s = -d * c.lambda_d.ln() + p.c_t() as f64 * (LN_2 - c.lambda_1.ln());
    for k in 0..p.k() {
        for l in (k + 1)..p.k() {
            let ckl = p.c_kl(k, l);
            s += log_laplace_normalizer(ckl, c.lambda_0 * ckl as f64);
        }
    }
    s
}

pub fn log_bound(kind: Kind, p: &Partition, c: &PenaltyConfig) -> f64 {
    match kind {
        Kind::Gl1 => log_bound_gl1(p, c),
        Kind::Gl12 => log_bound_gl12(p, c),
    }
}

/// `ln ∫_{R^n} exp(-rate ‖x‖₂) dx = ((n-1)/2) ln π + ln Γ((n+1)/2) + n ln 2 - n ln rate`.
pub fn log_laplace_normalizer(n: usize, rate: f64) -> f64 {
    let n = n as f64;
    0.5 * (n - 1.0) * PI.ln() + ln_gamma_pos(0.5 * (n + 1.0)) + n * LN_2 - n * rate.ln()
}

/// Exact log normalizer of the two-dimensional distribution (group ℓ1 and
/// ℓ1,2 coincide at `D = 2`). Requires `λ_D = λ_1`.
///
/// With `q = λ_1² - λ_0²/4`, the different-group normalizer is
/// `-λ_0 / (2 q λ_1²) + arctan(2√q / λ_0) / q^{3/2}` for `q > 0` and its
/// continuation `-λ_0 / (2 q λ_1²) - artanh(2√|q| / λ_0) / |q|^{3/2}` for
/// `q < 0`. The same-group case is the `λ_0 = λ_1` instance,
/// `(8π√3 - 18) / (27 λ_1³)`.
pub fn exact_logz_2d(c: &PenaltyConfig, same_group: bool) -> Result<f64> {
    let l1 = c.lambda_1;
    if (c.lambda_d - l1).abs() > 1e-12 * l1 {
        return Err(Error::Unsupported(format!(
            "exact 2-D normalizer needs lambda_d == lambda_1 (got {} and {l1})",
            c.lambda_d
        )));
    }
    if same_group {
        return Ok(((8.0 * PI * 3f64.sqrt() - 18.0) / 27.0).ln() - 3.0 * l1.ln());
    }
    let l0 = c.lambda_0;
    let q = l1 * l1 - 0.25 * l0 * l0;
    if q.abs() <= 1e-8 * l1 * l1 {
        return Err(Error::Singularity(format!(
            "exact 2-D normalizer is undefined at lambda_0 = 2 lambda_1 (lambda_0 = {l0}, lambda_1 = {l1})"
        )));
    }
    let rational = -l0 / (2.0 * q * l1 * l1);
    let transcendental = if q > 0.0 {
        (2.0 * q.sqrt() / l0).atan() / q.powf(1.5)
    } else {
        let r = -q;
        -(2.0 * r.sqrt() / l0).atanh() / r.powf(1.5)
    };
    let z = rational + transcendental;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("normalizer evaluated to {z}")));
    }
    Ok(z.ln())
}
