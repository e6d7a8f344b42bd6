//! Sampling primitives for the load model layers.
//!
//! All draws consume [`RngStream`] uniforms directly so the number of words
//! read per draw is fixed, except for the gamma sampler whose rejection loop
//! is confined to a per-load stream.

use crate::rng::RngStream;
use libm::{erfc, exp, log, pow, sqrt};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x) / sqrt(2.0 * core::f64::consts::PI)
}

/// Inverse standard normal CDF (Wichura, algorithm AS 241, PPND16).
///
/// Relative accuracy is about 1e-16 over `(0, 1)`. Returns `-inf`/`+inf` at
/// the endpoints and NaN outside `[0, 1]`.
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2509.0809287301227 * r + 33430.575583588128) * r
            + 67265.770927008700)
            * r
            + 45921.953931549871)
            * r
            + 13731.693765509461)
            * r
            + 1971.5909503065513)
            * r
            + 133.14166789178438)
            * r
            + 3.3871328727963665;
        let den = ((((((5226.4952788525455 * r + 28729.085735721943) * r
            + 39307.895800092710)
            * r
            + 21213.794301586595)
            * r
            + 5394.1960214247511)
            * r
            + 687.18700749205791)
            * r
            + 42.313330701600911)
            * r
            + 1.0;
        return q * num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = sqrt(-log(r));
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.7454501427834141e-4 * r + 0.022723844989269184) * r
            + 0.24178072517745061)
            * r
            + 1.2704582524523684)
            * r
            + 3.6478483247632045)
            * r
            + 5.7694972214606914)
            * r
            + 4.6303378461565453)
            * r
            + 1.4234371107496835;
        let den = ((((((1.0507500716444169e-9 * r + 5.4759380849953449e-4) * r
            + 0.015198666563616457)
            * r
            + 0.14810397642748007)
            * r
            + 0.68976733498510004)
            * r
            + 1.6763848301838038)
            * r
            + 2.0531916266377588)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.0103343992922881e-7 * r + 2.7115555687434876e-5) * r
            + 0.0012426609473880784)
            * r
            + 0.026532189526576123)
            * r
            + 0.29656057182850489)
            * r
            + 1.7848265399172913)
            * r
            + 5.4637849111641144)
            * r
            + 6.6579046435011038;
        let den = ((((((2.0442631033899397e-15 * r + 1.4215117583164460e-7) * r
            + 1.8463183175100548e-5)
            * r
            + 7.8686913114561326e-4)
            * r
            + 0.014875361290850615)
            * r
            + 0.13692988092273581)
            * r
            + 0.59983220655588794)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// `true` with probability `p` (one uniform).
#[inline]
pub fn bernoulli(p: f64, rng: &mut RngStream) -> bool {
    rng.uniform() < p
}

/// Inverse-CDF draw from a categorical distribution on `weights.len()`
/// outcomes. Weights must be non-negative with positive sum. Outcomes with
/// zero weight are never returned.
pub fn categorical(weights: &[f64], rng: &mut RngStream) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.uniform() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last_positive = i;
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Standard normal draw by inversion of one open uniform.
#[inline]
pub fn standard_normal(rng: &mut RngStream) -> f64 {
    normal_quantile(rng.uniform_open())
}

/// Unit-scale gamma draw with the given shape (Marsaglia & Tsang, 2000).
///
/// Shapes below one use the boost `G(a) = G(a + 1) * U^(1/a)`.
pub fn gamma(shape: f64, rng: &mut RngStream) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let g = gamma(shape + 1.0, rng);
        let u = rng.uniform_open();
        return g * pow(u, 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / sqrt(9.0 * d);
    loop {
        let x = standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if log(u) < 0.5 * x2 + d * (1.0 - v + log(v)) {
            return d * v;
        }
    }
}

/// Dirichlet draw on the 3-simplex via normalised gamma variates.
///
/// If every component underflows to zero the normalised `alpha` is returned.
pub fn dirichlet3(alpha: [f64; 3], rng: &mut RngStream) -> [f64; 3] {
    let g = [gamma(alpha[0], rng), gamma(alpha[1], rng), gamma(alpha[2], rng)];
    let s = g[0] + g[1] + g[2];
    if s > 0.0 && s.is_finite() {
        [g[0] / s, g[1] / s, g[2] / s]
    } else {
        let a = alpha[0] + alpha[1] + alpha[2];
        [alpha[0] / a, alpha[1] / a, alpha[2] / a]
    }
}

/// Normal(`mu`, `sigma`) restricted to `(0, inf)`, by inversion on the
/// truncated interval. Uses exactly one uniform. `sigma == 0` returns `mu`.
///
/// Writing `b = mu / sigma`, the standardised draw is `Z = -Q(u * Phi(b))`,
/// which keeps the lower tail of `Q` (the accurate side) in play.
pub fn truncated_normal_positive(mu: f64, sigma: f64, rng: &mut RngStream) -> f64 {
    let u = rng.uniform_open();
    if sigma <= 0.0 {
        return mu;
    }
    let upper = normal_cdf(mu / sigma);
    let z = -normal_quantile(u * upper);
    let x = mu + sigma * z;
    if x > 0.0 {
        x
    } else {
        // Rounding at the truncation point; the event has vanishing mass.
        f64::MIN_POSITIVE
    }
}

/// Analytic mean of Normal(`mu`, `sigma`) truncated to `(0, inf)`.
pub fn truncated_normal_positive_mean(mu: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mu;
    }
    let a = -mu / sigma;
    mu + sigma * normal_pdf(a) / (1.0 - normal_cdf(a))
}
