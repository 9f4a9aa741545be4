//! Exact draws from truncated one-dimensional densities.

use rand::Rng;

use crate::error::{Error, Result};

fn check_interval(rate: f64, lo: f64, hi: f64) -> Result<()> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidInput(format!("rate must be positive and finite, got {rate}")));
    }
    if lo.is_nan() || hi.is_nan() || !(lo < hi) {
        return Err(Error::InvalidInput(format!("need lo < hi, got ({lo}, {hi})")));
    }
    Ok(())
}

/// Uniform on the open unit interval.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Pulls a value that rounded onto (or past) an endpoint back inside.
fn inside(x: f64, lo: f64, hi: f64) -> f64 {
    if x > lo && x < hi {
        return x;
    }
    let width = if hi.is_finite() { hi - lo } else { lo.abs().max(1.0) };
    let step = 1e-12 * width;
    if x <= lo {
        (lo + step).max(lo.next_up()).min(0.5 * (lo + hi))
    } else {
        (hi - step).min(hi.next_down()).max(lo + 0.5 * (hi - lo))
    }
}

/// Density `∝ exp(-rate x)` on `(lo, hi)`; `hi` may be infinite.
pub fn sample_trunc_exponential<R: Rng + ?Sized>(rate: f64, lo: f64, hi: f64, rng: &mut R) -> Result<f64> {
    check_interval(rate, lo, hi)?;
    if !lo.is_finite() {
        return Err(Error::InvalidInput(format!("lower bound must be finite, got {lo}")));
    }
    // mass of (lo, hi) relative to (lo, ∞)
    let mass = -(-rate * (hi - lo)).exp_m1();
    if !(mass > 0.0) {
        return Err(Error::Sampling(format!(
            "interval mass underflow for exponential(rate={rate}) on ({lo}, {hi})"
        )));
    }
    let u = open_unit(rng);
    let x = lo - (-u * mass).ln_1p() / rate;
    Ok(inside(x, lo, hi))
}

/// Density `∝ exp(-rate |x|)` on `(lo, hi)`. Either bound may be infinite.
pub fn sample_trunc_laplace<R: Rng + ?Sized>(rate: f64, lo: f64, hi: f64, rng: &mut R) -> Result<f64> {
    check_interval(rate, lo, hi)?;
    if lo >= 0.0 {
        return sample_trunc_exponential(rate, lo, hi, rng);
    }
    if hi <= 0.0 {
        return Ok(-sample_trunc_exponential(rate, -hi, -lo, rng)?);
    }
    // straddles zero: pick a side by its mass, then draw on that side
    let left = -(rate * lo).exp_m1();
    let right = -(-rate * hi).exp_m1();
    let total = left + right;
    if !(total > 0.0) {
        return Err(Error::Sampling(format!(
            "interval mass underflow for laplace(rate={rate}) on ({lo}, {hi})"
        )));
    }
    let x = if rng.random::<f64>() * total < left {
        -sample_trunc_exponential(rate, 0.0, -lo, rng)?
    } else {
        sample_trunc_exponential(rate, 0.0, hi, rng)?
    };
    Ok(inside(x, lo, hi))
}

/// Density `∝ exp(-rate √(γ² + x²))` on `(lo, hi)`. Either bound may be
/// infinite. `γ = 0` is the Laplace case.
///
/// Draws by inverting a numerically integrated CDF; if the quadrature
/// breaks down, falls back to rejection sampling.
pub fn sample_trunc_hyperbolic<R: Rng + ?Sized>(
    rate: f64,
    gamma: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    check_interval(rate, lo, hi)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return sample_trunc_laplace(rate, lo, hi, rng);
    }
    let h = Hyperbolic::new(rate, gamma, lo, hi);
    let u = open_unit(rng);
    match h.invert(u) {
        Some(x) => Ok(inside(x, lo, hi)),
        None => h.reject(rng).map(|x| inside(x, lo, hi)),
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and |Kronrod - Gauss| on `[a, b]`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for n in 0..7 {
        let dx = h * XGK[n];
        let s = f(c - dx) + f(c + dx);
        k += WGK[n] * s;
        if n % 2 == 1 {
            g += WG[n / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    mass: f64,
}

/// Truncated hyperbolic density, shifted so its maximum on the interval is 1.
pub(crate) struct Hyperbolic {
    rate: f64,
    gamma: f64,
    lo: f64,
    hi: f64,
    peak: f64,
}

impl Hyperbolic {
    pub(crate) fn new(rate: f64, gamma: f64, lo: f64, hi: f64) -> Self {
        let nearest = 0f64.clamp(lo, hi);
        let peak = gamma.hypot(nearest);
        // beyond this distance past the nearest point the density is below e^-60
        let reach = gamma + nearest.abs() + 60.0 / rate;
        Self {
            rate,
            gamma,
            lo: lo.max(-reach),
            hi: hi.min(reach),
            peak,
        }
    }

    fn density(&self, x: f64) -> f64 {
        (-self.rate * (self.gamma.hypot(x) - self.peak)).exp()
    }

    fn panels(&self) -> Option<Vec<Panel>> {
        let f = |x: f64| self.density(x);
        let mut cuts = vec![self.lo];
        for c in [-self.gamma, 0.0, self.gamma] {
            if c > self.lo && c < self.hi {
                cuts.push(c);
            }
        }
        cuts.push(self.hi);
        let coarse: f64 = cuts.windows(2).map(|w| gk15(&f, w[0], w[1]).0).sum();
        if !(coarse > 0.0 && coarse.is_finite()) {
            return None;
        }
        let tol = 1e-13 * coarse;
        let span = self.hi - self.lo;
        let mut out = Vec::new();
        let mut stack: Vec<(f64, f64, u32)> = cuts.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();
        while let Some((a, b, depth)) = stack.pop() {
            let (k, err) = gk15(&f, a, b);
            if err <= tol * (b - a) / span || depth >= 40 {
                out.push(Panel { a, b, mass: k });
            } else {
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
        Some(out)
    }

    /// Quantile `u` of the truncated density; `None` if the quadrature is unusable.
    pub(crate) fn invert(&self, u: f64) -> Option<f64> {
        let panels = self.panels()?;
        let total: f64 = panels.iter().map(|p| p.mass).sum();
        if !(total > 0.0 && total.is_finite()) {
            return None;
        }
        let mut target = u * total;
        let mut idx = panels.len() - 1;
        for (n, p) in panels.iter().enumerate() {
            if target <= p.mass {
                idx = n;
                break;
            }
            target -= p.mass;
        }
        let p = &panels[idx];
        let target = target.clamp(0.0, p.mass);
        let f = |x: f64| self.density(x);
        let (mut a, mut b) = (p.a, p.b);
        let mut x = p.a + (p.b - p.a) * target / p.mass.max(f64::MIN_POSITIVE);
        for _ in 0..100 {
            let r = gk15(&f, p.a, x).0 - target;
            if r.abs() <= 1e-12 * total {
                return Some(x);
            }
            if r > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let newton = x - r / f(x);
            x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return Some(x);
            }
        }
        Some(x)
    }

    /// Rejection sampling from a uniform (finite interval) or Laplace envelope.
    pub(crate) fn reject<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..1_000_000 {
            let x = if (self.hi - self.lo).is_finite() {
                self.lo + (self.hi - self.lo) * rng.random::<f64>()
            } else {
                sample_trunc_laplace(self.rate, self.lo, self.hi, rng)?
            };
            let accept = if (self.hi - self.lo).is_finite() {
                self.density(x)
            } else {
                // exp(-rate √(γ²+x²)) / exp(-rate |x|) scaled to at most 1
                (-self.rate * (self.gamma.hypot(x) - x.abs())).exp()
            };
            if x > self.lo && x < self.hi && rng.random::<f64>() < accept {
                return Ok(x);
            }
        }
        Err(Error::Sampling(format!(
            "hyperbolic(rate={}, gamma={}) on ({}, {}): quadrature and rejection both failed",
            self.rate, self.gamma, self.lo, self.hi
        )))
    }
}
