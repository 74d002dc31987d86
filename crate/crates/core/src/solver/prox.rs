//! Exact proximal maps for the `ℓ_q` penalties used in the V-update.
//!
//! Both the row (group) and entrywise subproblems reduce to a scalar problem
//! in the magnitude `x = ‖v‖`:
//!
//! ```text
//! minimize  k1/2 x² + α x^q − k3 x     over x ≥ 0,
//! ```
//!
//! with `k1 = β + ρ`, `k3 = ‖b‖`, and the minimizer pointing along `−b`.
//! For `q = 0` the penalty is `α·1(x ≠ 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// The sparsity exponent `q ∈ {0, 1/2, 2/3, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Penalty {
    #[serde(rename = "0")]
    L0,
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "2/3")]
    TwoThirds,
    #[serde(rename = "1")]
    L1,
}

impl Penalty {
    pub const ALL: [Penalty; 4] = [Penalty::L0, Penalty::Half, Penalty::TwoThirds, Penalty::L1];

    pub fn q(self) -> f64 {
        match self {
            Penalty::L0 => 0.0,
            Penalty::Half => 0.5,
            Penalty::TwoThirds => 2.0 / 3.0,
            Penalty::L1 => 1.0,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Penalty::L0 => "0",
            Penalty::Half => "1/2",
            Penalty::TwoThirds => "2/3",
            Penalty::L1 => "1",
        }
    }

    /// `α x^q` for q > 0, `α 1(x ≠ 0)` for q = 0.
    pub fn value(self, alpha: f64, x: f64) -> f64 {
        match self {
            _ if x == 0.0 => 0.0,
            Penalty::L0 => alpha,
            Penalty::L1 => alpha * x,
            p => alpha * x.powf(p.q()),
        }
    }
}

impl std::fmt::Display for Penalty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Penalty {
    type Err = Error;

    /// Accepts exactly `0`, `1/2`, `2/3`, `1`; decimal spellings are refused.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Penalty::L0),
            "1/2" => Ok(Penalty::Half),
            "2/3" => Ok(Penalty::TwoThirds),
            "1" => Ok(Penalty::L1),
            other => Err(invalid(format!("q must be one of 0, 1/2, 2/3, 1 (got {other:?})"))),
        }
    }
}

/// Scalar objective `k1/2 x² + pen(x) − k3 x` minimized by [`prox_magnitude`].
pub fn magnitude_objective(x: f64, k1: f64, k3: f64, q: Penalty, alpha: f64) -> f64 {
    0.5 * k1 * x * x + q.value(alpha, x) - k3 * x
}

/// Minimizing magnitude `x ≥ 0` for the scalar problem above.
///
/// `k1 > 0`, `k3 ≥ 0`, `alpha ≥ 0`. Ties between a stationary point and the
/// origin resolve to the origin.
pub fn prox_magnitude(k3: f64, q: Penalty, alpha: f64, k1: f64) -> f64 {
    if !(k3 > 0.0) {
        return 0.0;
    }
    match q {
        Penalty::L1 => (k3 - alpha).max(0.0) / k1,
        Penalty::L0 => {
            if k3 * k3 > 2.0 * alpha * k1 {
                k3 / k1
            } else {
                0.0
            }
        }
        Penalty::Half | Penalty::TwoThirds => {
            // k1 x + α q x^{q−1} = k3. With x = z² (q = 1/2) this is
            // k1 z³ − k3 z + α/2 = 0; with x = z³ (q = 2/3) it is
            // k1 z⁴ − k3 z + 2α/3 = 0.
            let (m, c) = match q {
                Penalty::Half => (3, alpha / 2.0),
                _ => (4, 2.0 * alpha / 3.0),
            };
            let to_x = |z: f64| z.powi(m - 1);
            let mut best_x = 0.0;
            let mut best_f = 0.0;
            // Ascending root order makes the lowest magnitude win exact ties.
            for z in positive_roots(k1, k3, c, m) {
                let x = to_x(z);
                let f = magnitude_objective(x, k1, k3, q, alpha);
                if f < best_f {
                    best_f = f;
                    best_x = x;
                }
            }
            best_x
        }
    }
}

/// Positive real roots, ascending, of `k1 zᵐ − k3 z + c` for `m ≥ 3`,
/// `k1, k3 > 0`, `c ≥ 0`.
///
/// The polynomial is convex on `z > 0` with its minimum at
/// `z* = (k3 / (m k1))^{1/(m−1)}`, so there are zero, one (double) or two
/// positive roots, bracketed by `[0, z*]` and `[z*, (k3/k1)^{1/(m−1)}]`.
pub(crate) fn positive_roots(k1: f64, k3: f64, c: f64, m: i32) -> Vec<f64> {
    let poly = |z: f64| k1 * z.powi(m) - k3 * z + c;
    let deriv = |z: f64| m as f64 * k1 * z.powi(m - 1) - k3;
    let zstar = (k3 / (m as f64 * k1)).powf(1.0 / (m - 1) as f64);
    let fmin = poly(zstar);
    if fmin > 0.0 {
        return Vec::new();
    }
    if fmin == 0.0 {
        return vec![zstar];
    }
    let zhi = (k3 / k1).powf(1.0 / (m - 1) as f64);
    let mut roots = Vec::with_capacity(2);
    if c > 0.0 {
        roots.push(safeguarded_newton(&poly, &deriv, 0.0, zstar));
    }
    roots.push(safeguarded_newton(&poly, &deriv, zstar, zhi.max(zstar)));
    roots
}

/// Newton's method kept inside a sign-changing bracket, falling back to
/// bisection whenever a step leaves it.
fn safeguarded_newton(f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    let a_positive = fa > 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == a_positive {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || b - a <= f64::EPSILON * b.abs() {
            return next;
        }
        x = next;
    }
    x
}

fn check_args(alpha: f64, beta: f64, rho: f64) -> Result<f64> {
    let k1 = beta + rho;
    if !(alpha >= 0.0) || !(k1 > 0.0) {
        return Err(invalid(format!("need alpha >= 0 and beta + rho > 0 (alpha={alpha}, beta+rho={k1})")));
    }
    Ok(k1)
}

/// Row (group) proximal map: minimizer over `v ∈ ℝ^d` of
/// `(β+ρ)/2 ‖v‖² + α pen(‖v‖) + vᵀb`.
pub fn prox_row(b: &[f64], q: Penalty, alpha: f64, beta: f64, rho: f64) -> Result<Vec<f64>> {
    let k1 = check_args(alpha, beta, rho)?;
    let mut out = vec![0.0; b.len()];
    prox_row_into(b, q, alpha, k1, &mut out);
    Ok(out)
}

pub(crate) fn prox_row_into(b: &[f64], q: Penalty, alpha: f64, k1: f64, out: &mut [f64]) {
    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let x = prox_magnitude(norm, q, alpha, k1);
    if x == 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
    } else {
        let scale = -x / norm;
        for (o, bi) in out.iter_mut().zip(b) {
            *o = scale * bi;
        }
    }
}

/// Entrywise proximal map: minimizer over `v ∈ ℝ` of
/// `(β+ρ)/2 v² + α_j pen(|v|) + b v`.
pub fn prox_scalar(b: f64, q: Penalty, alpha_j: f64, beta: f64, rho: f64) -> Result<f64> {
    let k1 = check_args(alpha_j, beta, rho)?;
    Ok(prox_scalar_k1(b, q, alpha_j, k1))
}

#[inline]
pub(crate) fn prox_scalar_k1(b: f64, q: Penalty, alpha_j: f64, k1: f64) -> f64 {
    let x = prox_magnitude(b.abs(), q, alpha_j, k1);
    if x == 0.0 {
        0.0
    } else {
        -x * b.signum()
    }
}
