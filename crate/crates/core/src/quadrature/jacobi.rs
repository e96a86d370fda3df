//! Gauss-Jacobi rules on `[-1, 1]` for the weight `(1 - x)^a (1 + x)^b`.
//!
//! Nodes come from Newton iteration on the three-term recurrence, started
//! from the Tricomi-type asymptotic guesses; this is O(n²) and stays usable
//! at the adaptive cap of several thousand nodes where Golub-Welsch is not.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use super::gamma::gamma_unchecked;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    /// Nodes in ascending order.
    pub nodes: Vec<f64>,
    /// `1 - x` at each node, carried separately to keep precision near `x = 1`.
    pub one_minus: Vec<f64>,
    pub weights: Vec<f64>,
}

/// P_n^{(a,b)}(x) and P_{n-1}^{(a,b)}(x).
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let ab = a + b;
    let mut p1 = 0.5 * (a - b + (2.0 + ab) * x);
    let mut p2 = 1.0;
    for j in 2..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        let t = 2.0 * jf + ab;
        let c1 = 2.0 * jf * (jf + ab) * (t - 2.0);
        let c2 = (t - 1.0) * (a * a - b * b + t * (t - 2.0) * x);
        let c3 = 2.0 * (jf - 1.0 + a) * (jf - 1.0 + b) * t;
        p1 = (c2 * p2 - c3 * p3) / c1;
    }
    (p1, p2)
}

/// `t (1 - x²) P_n'(x)` with `t = 2n + a + b`, from P_n and P_{n-1}.
fn theta_derivative(n: usize, a: f64, b: f64, x: f64, pn: f64, pn1: f64) -> f64 {
    let nf = n as f64;
    let t = 2.0 * nf + a + b;
    nf * (a - b - t * x) * pn + 2.0 * (nf + a) * (nf + b) * pn1
}

/// Asymptotic angle of the k-th zero (k = 1 nearest x = 1).
fn initial_angle(k: usize, n: usize, a: f64, b: f64) -> f64 {
    (k as f64 + 0.5 * a - 0.25) * PI / (n as f64 + 0.5 * (a + b + 1.0))
}

pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<JacobiRule> {
    if n == 0 || !(a > -1.0) || !(b > -1.0) {
        return Err(Error::NodeComputation { n, alpha: a });
    }
    if n == 1 {
        let x = (b - a) / (a + b + 2.0);
        return Ok(JacobiRule {
            nodes: vec![x],
            one_minus: vec![1.0 - x],
            weights: vec![total_mass(a, b)],
        });
    }

    let mut nodes = Vec::with_capacity(n);
    let mut one_minus = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for k in 1..=n {
        // guesses are accurate near the endpoint they are anchored at
        let mirrored = k > n / 2;
        let theta = if mirrored {
            PI - initial_angle(n + 1 - k, n, b, a)
        } else {
            initial_angle(k, n, a, b)
        };
        // Newton in θ (x = cos θ) keeps 1 - x² = sin²θ accurate near ±1
        let mut theta = theta;
        let mut converged = false;
        for _ in 0..100 {
            let x = theta.cos();
            let (pn, pn1) = jacobi_pair(n, a, b, x);
            let t = 2.0 * n as f64 + a + b;
            let dp_dtheta = -theta_derivative(n, a, b, x, pn, pn1) / (t * theta.sin());
            let step = pn / dp_dtheta;
            theta -= step;
            // below this the step is rounding noise in cos θ
            let floor = 1e-15 * theta.min(PI - theta) + 1e-15 / theta.sin();
            if step.abs() <= floor {
                converged = true;
                break;
            }
        }
        let x = theta.cos();
        if !converged || !x.is_finite() || !(theta > 0.0 && theta < PI) || x <= -1.0 || x >= 1.0 {
            return Err(Error::NodeComputation { n, alpha: a });
        }
        let (pn, pn1) = jacobi_pair(n, a, b, x);
        let d = theta_derivative(n, a, b, x, pn, pn1);
        let s = theta.sin();
        // 1 - cos θ = 2 sin²(θ/2)
        let om = 2.0 * (0.5 * theta).sin().powi(2);
        nodes.push(x);
        one_minus.push(om);
        // 1 / ((1-x²) P'²) with P' = d / (t sin²θ); the t² factor cancels in normalization
        raw.push(s * s / (d * d));
    }

    // descending in k -> reverse to ascending
    nodes.reverse();
    one_minus.reverse();
    raw.reverse();
    for w in nodes.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::NodeComputation { n, alpha: a });
        }
    }

    // all weights share one constant factor; fix it from the exact zeroth moment
    let scale = total_mass(a, b) / raw.iter().sum::<f64>();
    let weights = raw.iter().map(|w| w * scale).collect();
    Ok(JacobiRule {
        nodes,
        one_minus,
        weights,
    })
}

fn total_mass(a: f64, b: f64) -> f64 {
    2f64.powf(a + b + 1.0) * gamma_unchecked(a + 1.0) * gamma_unchecked(b + 1.0) / gamma_unchecked(a + b + 2.0)
}

type RuleKey = (usize, u64, u64);

/// Memoized rule; rules are immutable so sharing is free.
pub fn cached_gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Arc<JacobiRule>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<JacobiRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_jacobi(n, a, b)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(key, Arc::clone(&rule));
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn beta_moment(k: i32, a: f64) -> f64 {
        // ∫_{-1}^{1} (1-x)^a x^k dx by brute-force substitution on a fine
        // Gauss-Legendre-free trapezoid in t with x = 1 - 2 t^{1/(a+1)}
        let n = 400_000;
        let mut s = 0.0;
        let h = 1.0 / n as f64;
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            let v = t.powf(1.0 / (a + 1.0));
            let x = 1.0 - 2.0 * v;
            s += x.powi(k);
        }
        s * h * 2f64.powf(a + 1.0) / (a + 1.0)
    }

    #[test]
    fn legendre_low_order() {
        let r = gauss_jacobi(2, 0.0, 0.0).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -x, epsilon = 1e-15);
        assert_relative_eq!(r.nodes[1], x, epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.weights[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_exactness_against_midpoint_oracle() {
        for &a in &[-0.5, 0.0, 1.0, 2.5] {
            let rule = gauss_jacobi(6, a, 0.0).unwrap();
            for k in 0..=11 {
                let q: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum();
                let exact = beta_moment(k, a);
                assert!(
                    (q - exact).abs() < 1e-6 * exact.abs().max(1.0),
                    "a={a} k={k}: {q} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn large_rules_are_well_formed() {
        for &n in &[64usize, 257, 1024, 4096] {
            for &a in &[-0.9, -0.5, 0.0, 1.0, 2.5] {
                let r = gauss_jacobi(n, a, 0.0).unwrap();
                assert_eq!(r.nodes.len(), n);
                assert!(r.weights.iter().all(|w| *w > 0.0));
                let mass: f64 = r.weights.iter().sum();
                assert_relative_eq!(mass, total_mass(a, 0.0), max_relative = 1e-13);
                // ∫ (1-x)^a x^2 dx, exact via Beta functions
                let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x).sum();
                // x = 1 - 2v with v = (1-x)/2, so x² = 1 - 4v + 4v²
                let c = 2f64.powf(a + 1.0);
                let e2 = c * (1.0 / (a + 1.0) - 4.0 / (a + 2.0) + 4.0 / (a + 3.0));
                // the recurrence loses digits for nodes packed against a strong endpoint singularity
                let tol = if a < -0.5 { 1e-9 } else { 1e-12 };
                assert_relative_eq!(m2, e2, max_relative = tol);
            }
        }
    }

    #[test]
    fn one_minus_matches_nodes() {
        let r = gauss_jacobi(300, 0.5, 0.0).unwrap();
        for (x, om) in r.nodes.iter().zip(&r.one_minus) {
            assert!((1.0 - x - om).abs() < 1e-15);
        }
    }
}
