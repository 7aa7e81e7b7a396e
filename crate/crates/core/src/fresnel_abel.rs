//! Abel-regularized Fresnel integrals.
//!
//! `∫_{ℝⁿ} e^{(i−α)|z|²} dz = (π/(α−i))^{n/2}` for `α > 0`, and the `α ↓ 0`
//! limit `(πi)^{n/2}` is the Abel value of the oscillatory integral. The same
//! number also comes out of polar coordinates, `ω_n Γ(n/2) i^{n/2} / 2`.

use std::f64::consts::PI;

use crate::special::{gamma, unit_sphere_area};
use crate::{Error, Result, C64};

/// Decreasing positive regularization parameters `α_k → 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelSchedule {
    alphas: Vec<f64>,
}

impl Default for AbelSchedule {
    fn default() -> Self {
        AbelSchedule::geometric(21)
    }
}

impl AbelSchedule {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::invalid("alphas", "schedule is empty"));
        }
        if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::invalid("alphas", "entries must be positive and finite"));
        }
        if alphas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::invalid("alphas", "must be strictly decreasing"));
        }
        Ok(AbelSchedule { alphas })
    }

    /// `α_k = 2^{−k}`, `k = 0 … len−1`.
    pub fn geometric(len: usize) -> Self {
        AbelSchedule { alphas: (0..len.max(1)).map(|k| 0.5f64.powi(k as i32)).collect() }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

/// `(π/(α − i))^{n/2}`, principal branch; `α = 0` gives `(πi)^{n/2}`.
pub fn fresnel_closed(n: u32, alpha: f64) -> C64 {
    let z = C64::new(PI, 0.0) / C64::new(alpha, -1.0);
    (z.ln() * (n as f64 / 2.0)).exp()
}

/// Polar-coordinate form `(ω_n/2) ∫₀^∞ e^{−αt} t^{n/2−1} e^{it} dt = (ω_n/2) Γ(n/2) (α − i)^{−n/2}`.
pub fn radial_abel_closed(n: u32, alpha: f64) -> C64 {
    let half_n = n as f64 / 2.0;
    let denom = (C64::new(alpha, -1.0).ln() * half_n).exp();
    unit_sphere_area(n) / 2.0 * gamma(half_n) / denom
}

/// `i^{n/2} ω_n Γ(n/2) / 2` with `i^m = e^{iπm/2}`.
pub fn gamma_route(n: u32) -> Result<C64> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    let half_n = n as f64 / 2.0;
    let i_power = C64::from_polar(1.0, PI / 2.0 * half_n);
    Ok(i_power * unit_sphere_area(n) * gamma(half_n) / 2.0)
}

/// Trapezoid approximation of `∫_{−R}^{R} e^{(i−α)x²} dx`; the step is
/// shrunk so that `2R/h` is an integer.
pub fn fresnel_quadrature(alpha: f64, radius: f64, h: f64) -> Result<C64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "the undamped integral has no controlled truncation error"));
    }
    if !(radius > 0.0) || !(h > 0.0) {
        return Err(Error::invalid("h", "radius and step must be positive"));
    }
    let cells = (2.0 * radius / h).ceil() as usize;
    let step = 2.0 * radius / cells as f64;
    let c = C64::new(-alpha, 1.0);
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=cells {
        let x = -radius + k as f64 * step;
        let w = if k == 0 || k == cells { 0.5 } else { 1.0 };
        sum += w * (c * x * x).exp();
    }
    Ok(step * sum)
}

/// Radius and step for which the truncated trapezoid rule is accurate to
/// about `1e−15` relative at this `α`.
pub fn quadrature_resolution(alpha: f64) -> (f64, f64) {
    let radius = (40.0 / alpha).sqrt();
    let h = (PI / (4.0 * radius)).min(1e-3);
    (radius, h)
}

/// Extrapolate `f(α_k)` to `α = 0` with a least-squares line through the
/// last four schedule points. The error estimate is `|f(α_K) − f(α_{K−1})|`.
pub fn abel_limit(f: impl Fn(f64) -> C64, sched: &AbelSchedule) -> (C64, f64) {
    let values: Vec<(f64, C64)> = sched.alphas.iter().map(|&a| (a, f(a))).collect();
    abel_limit_from_samples(&values)
}

pub fn abel_limit_from_samples(values: &[(f64, C64)]) -> (C64, f64) {
    let k = values.len();
    if k == 1 {
        return (values[0].1, 0.0);
    }
    let err = (values[k - 1].1 - values[k - 2].1).norm();
    let tail = &values[k.saturating_sub(4)..];
    let m = tail.len() as f64;
    let mean_a = tail.iter().map(|(a, _)| a).sum::<f64>() / m;
    let mean_f = tail.iter().map(|(_, v)| v).sum::<C64>() / m;
    let sxx: f64 = tail.iter().map(|(a, _)| (a - mean_a).powi(2)).sum();
    let sxy: C64 = tail.iter().map(|(a, v)| (v - mean_f) * (a - mean_a)).sum();
    let slope = sxy / sxx;
    (mean_f - slope * mean_a, err)
}

/// One row of the Abel sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelSample {
    pub alpha: f64,
    pub value: C64,
    /// `|value − fresnel_closed(n, α)|`
    pub error: f64,
}

/// Quadrature of the n-dimensional damped integral as the n-th power of the
/// one-dimensional rule, on every schedule point.
pub fn quadrature_sweep(n: u32, sched: &AbelSchedule) -> Result<Vec<AbelSample>> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    sched
        .alphas
        .iter()
        .map(|&alpha| {
            let (radius, h) = quadrature_resolution(alpha);
            let value = fresnel_quadrature(alpha, radius, h)?.powu(n);
            Ok(AbelSample { alpha, value, error: (value - fresnel_closed(n, alpha)).norm() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let z = fresnel_closed(1, 0.0);
        let r = (PI / 2.0).sqrt();
        assert!((z - C64::new(r, r)).norm() < 1e-15);
        assert!((z.re - 1.253_314).abs() < 1e-6);
        assert!((fresnel_closed(2, 0.0) - C64::new(0.0, PI)).norm() < 1e-14);
        assert!((fresnel_closed(2, 1.0) - C64::new(PI / 2.0, PI / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn square_root_never_crosses_the_cut() {
        for &a in AbelSchedule::default().alphas().iter().chain([0.0].iter()) {
            assert!(C64::new(a, -1.0).sqrt().re > 0.0);
        }
    }

    #[test]
    fn gamma_route_examples() {
        assert!((gamma_route(1).unwrap() - fresnel_closed(1, 0.0)).norm() < 1e-14);
        assert!((gamma_route(2).unwrap() - C64::new(0.0, PI)).norm() < 1e-14);
        assert!((gamma_route(4).unwrap() - C64::new(-PI * PI, 0.0)).norm() < 1e-13);
        assert!(gamma_route(0).is_err());
    }

    #[test]
    fn three_routes_agree() {
        for n in 1..=8 {
            let closed = fresnel_closed(n, 0.0);
            assert!((gamma_route(n).unwrap() - closed).norm() < 1e-12, "n={n}");
            for &a in &[0.0, 0.1, 1.0, 3.0] {
                assert!((radial_abel_closed(n, a) - fresnel_closed(n, a)).norm() < 1e-12 * fresnel_closed(n, a).norm());
            }
        }
    }

    #[test]
    fn product_rule_holds() {
        for n in 1..=8 {
            for &a in AbelSchedule::geometric(8).alphas() {
                let lhs = fresnel_closed(1, a).powu(n);
                assert!((lhs - fresnel_closed(n, a)).norm() < 1e-12 * lhs.norm());
            }
        }
    }

    #[test]
    fn closed_form_is_continuous_at_zero() {
        let target = fresnel_closed(3, 0.0);
        let gaps: Vec<f64> =
            AbelSchedule::default().alphas().iter().map(|&a| (fresnel_closed(3, a) - target).norm()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(*gaps.last().unwrap() < 1e-5);
    }

    #[test]
    fn quadrature_examples() {
        let q = fresnel_quadrature(1.0, 8.0, 1e-3).unwrap();
        assert!((q - fresnel_closed(1, 1.0)).norm() < 1e-8);
        let q = fresnel_quadrature(0.1, 30.0, 1e-3).unwrap();
        assert!((q - fresnel_closed(1, 0.1)).norm() < 1e-4);
        let a = fresnel_quadrature(2.0, 10.0, 1e-3).unwrap();
        let b = fresnel_quadrature(2.0, 20.0, 1e-3).unwrap();
        assert!((a - b).norm() < 1e-12);
        let odd = fresnel_quadrature(1.0, 8.0, 16.0 / 1001.0).unwrap();
        assert!((odd - fresnel_closed(1, 1.0)).norm() < 1e-8);
        assert!(fresnel_quadrature(0.0, 8.0, 1e-3).is_err());
    }

    #[test]
    fn abel_limit_examples() {
        let sched = AbelSchedule::default();
        let (lim, _) = abel_limit(|a| fresnel_closed(1, a), &sched);
        assert!((lim - fresnel_closed(1, 0.0)).norm() < 1e-6);
        let c = C64::new(0.3, -2.0);
        let (lim, err) = abel_limit(|_| c, &sched);
        assert_eq!((lim, err), (c, 0.0));
        let (lim, _) = abel_limit(|a| c + a, &sched);
        assert!((lim - c).norm() < 1e-14);
    }

    #[test]
    fn schedule_validation() {
        assert!(AbelSchedule::new(vec![1.0, 1.0]).is_err());
        assert!(AbelSchedule::new(vec![1.0, -0.5]).is_err());
        assert!(AbelSchedule::new(vec![]).is_err());
        assert_eq!(AbelSchedule::default().alphas().len(), 21);
    }
}
