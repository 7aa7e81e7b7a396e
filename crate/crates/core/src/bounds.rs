//! Closed-form majorants for iterated Volterra operators.
//!
//! With `‖A(t,τ)‖ ≤ D` the n-th Picard term obeys
//! `‖ψₙ‖ ≤ Dⁿ‖ψ₀‖ tⁿ/n!` in `L^∞` and `L¹`, and
//! `‖ψₙ‖ ≤ (Dⁿ/p^{n/p}) ‖ψ₀‖ tⁿ/(n!)^{1/p}` in `Lᵖ`, `1 < p < ∞`.

use crate::special::ln_factorial;
use crate::state_space::{trapezoid, LpExponent, TimeGrid};
use crate::{Error, Result};

/// Above this index factorials and powers are combined in log space.
const LOG_SPACE_THRESHOLD: u64 = 150;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantQuery {
    /// Term index `n`, or the real exponent of a lemma hypothesis `‖φ‖ ≤ C tⁿ`.
    pub order: f64,
    /// Uniform kernel bound `D`.
    pub bound: f64,
    pub t: f64,
    pub p: LpExponent,
    /// `‖ψ₀‖` for term bounds, `C` for lemma bounds.
    pub base_norm: f64,
}

impl MajorantQuery {
    pub fn new(order: f64, bound: f64, t: f64, p: LpExponent, base_norm: f64) -> Self {
        MajorantQuery { order, bound, t, p, base_norm }
    }

    fn validate(&self) -> Result<()> {
        self.p.validate()?;
        for (name, v) in [("n", self.order), ("D", self.bound), ("t", self.t), ("base_norm", self.base_norm)] {
            if !(v >= 0.0) {
                return Err(Error::invalid(name, format!("must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// `M(p) = D / p^{1/p}`; `D` itself at `p = ∞`.
pub fn growth_constant(bound: f64, p: LpExponent) -> f64 {
    match p {
        LpExponent::Infinity => bound,
        LpExponent::Finite(p) => bound / p.powf(1.0 / p),
    }
}

/// One application of `Q̂` to a function with `‖φ‖_{Lᵖ(0,t)} ≤ C tⁿ`:
/// `DCt^{n+1}/(n+1)` for `p ∈ {1, ∞}`, `CDt^{n+1}/[p(n+1)]^{1/p}` otherwise.
pub fn lemma_bound(q: &MajorantQuery) -> Result<f64> {
    q.validate()?;
    let n1 = q.order + 1.0;
    let denom = match q.p {
        p if p.is_endpoint() => n1,
        LpExponent::Finite(p) => (p * n1).powf(1.0 / p),
        LpExponent::Infinity => unreachable!(),
    };
    Ok(q.bound * q.base_norm * q.t.powf(n1) / denom)
}

/// Majorant of the n-th Neumann term. `q.order` must be a nonnegative integer.
pub fn theorem_term_bound(q: &MajorantQuery) -> f64 {
    let n = q.order.round() as u64;
    debug_assert!((q.order - n as f64).abs() < 1e-12, "term index must be integral");
    if n == 0 {
        return q.base_norm;
    }
    if q.base_norm == 0.0 || q.bound == 0.0 || q.t == 0.0 {
        return 0.0;
    }
    let inv_p = q.p.reciprocal();
    // (n!)^{1/p} with 1/p = 1 at the endpoints
    let fact_power = if q.p.is_endpoint() { 1.0 } else { inv_p };
    let p_power = if q.p.is_endpoint() {
        0.0
    } else {
        match q.p {
            LpExponent::Finite(p) => p.ln() * inv_p,
            LpExponent::Infinity => 0.0,
        }
    };
    let nf = n as f64;
    if n > LOG_SPACE_THRESHOLD {
        let ln = nf * (q.bound.ln() + q.t.ln()) - nf * p_power - fact_power * ln_factorial(n) + q.base_norm.ln();
        return ln.exp();
    }
    let mut value = q.base_norm;
    for k in 1..=n {
        value *= q.bound * q.t * (-p_power).exp() / (k as f64).powf(fact_power);
    }
    value
}

/// `base · (e^{Dt} − Σ_{k≤n} (Dt)^k/k!)`, summed as the remainder series.
pub fn exp_tail(n: u64, bound: f64, t: f64, base: f64) -> f64 {
    let x = bound * t;
    if x == 0.0 || base == 0.0 {
        return 0.0;
    }
    let mut k = n + 1;
    let mut term = ((k as f64) * x.ln() - ln_factorial(k)).exp();
    let mut sum = 0.0;
    loop {
        sum += term;
        k += 1;
        term *= x / k as f64;
        if term == 0.0 || ((k as f64) > x && term <= 1e-17 * sum) {
            break;
        }
    }
    base * sum
}

/// Majorant of `Σ_{k>n} ‖ψ_k‖` under the exponent `p`.
///
/// The endpoint exponents use [`exp_tail`]. For `1 < p < ∞` the series
/// `Σ Mᵏtᵏ/(k!)^{1/p}` has no closed form; terms are summed until they drop
/// below `cutoff` and the remainder is closed with a geometric bound.
pub fn series_tail(n: u64, bound: f64, t: f64, p: LpExponent, base: f64, cutoff: f64) -> f64 {
    if p.is_endpoint() {
        return exp_tail(n, bound, t, base);
    }
    let x = growth_constant(bound, p) * t;
    if x == 0.0 || base == 0.0 {
        return 0.0;
    }
    let inv_p = p.reciprocal();
    let mut k = n + 1;
    let mut term = base * theorem_term_bound(&MajorantQuery::new(k as f64, bound, t, p, 1.0));
    let mut sum = 0.0;
    loop {
        sum += term;
        let ratio = x / ((k + 1) as f64).powf(inv_p);
        k += 1;
        term *= ratio;
        if term == 0.0 {
            break;
        }
        if ratio < 0.5 && term < cutoff.max(1e-300) {
            // remaining terms shrink at least geometrically with this ratio
            sum += term / (1.0 - ratio);
            break;
        }
    }
    sum
}

/// Ratios `a_{n+1}/a_n`, truncated before the first zero denominator.
pub fn empirical_ratio(seq: &[f64]) -> Vec<f64> {
    seq.windows(2).take_while(|w| w[0] != 0.0).map(|w| w[1] / w[0]).collect()
}

/// Discrete simplex volumes `Pₙʰ(T)`: the trapezoid Volterra operator with the
/// unit kernel applied `n` times to the constant 1, evaluated at `T`.
pub fn discrete_simplex_volumes(grid: &TimeGrid, n_max: usize) -> Vec<f64> {
    let h = grid.step();
    let nodes = grid.n_nodes();
    let mut current = vec![1.0; nodes];
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    for _ in 0..n_max {
        let mut next = vec![0.0; nodes];
        let mut running = 0.0;
        for i in 1..nodes {
            running += 0.5 * h * (current[i - 1] + current[i]);
            next[i] = running;
        }
        current = next;
        out.push(current[nodes - 1]);
    }
    out
}

/// Relative excess `Pₙʰ(T)·n!/Tⁿ − 1` of the discrete simplex volume over the
/// exact one. Leading order is `(h/T)²·n(n−1)(n−2)/12`.
pub fn simplex_excess(grid: &TimeGrid, n_max: usize) -> Vec<f64> {
    let t = grid.horizon();
    discrete_simplex_volumes(grid, n_max)
        .into_iter()
        .enumerate()
        .map(|(n, v)| {
            let exact = (n as f64 * t.ln() - ln_factorial(n as u64)).exp();
            (v / exact - 1.0).max(0.0)
        })
        .collect()
}

/// Composite trapezoid over `[0, t_upto]`, exported for bound checks.
pub fn trapezoid_integral(samples: &[f64], upto: usize, h: f64) -> f64 {
    trapezoid(samples.iter().copied(), upto, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INF: LpExponent = LpExponent::Infinity;
    const P2: LpExponent = LpExponent::Finite(2.0);

    #[test]
    fn lemma_examples() {
        assert_eq!(lemma_bound(&MajorantQuery::new(0.0, 1.0, 1.0, INF, 1.0)).unwrap(), 1.0);
        let v = lemma_bound(&MajorantQuery::new(0.0, 1.0, 1.0, P2, 1.0)).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(lemma_bound(&MajorantQuery::new(2.3, 0.0, 4.0, P2, 3.0)).unwrap(), 0.0);
        assert!(lemma_bound(&MajorantQuery::new(1.0, 1.0, 1.0, LpExponent::Finite(0.5), 1.0)).is_err());
    }

    #[test]
    fn term_bound_examples() {
        let q = MajorantQuery::new(3.0, 1.0, 1.0, INF, 1.0);
        assert!((theorem_term_bound(&q) - 1.0 / 6.0).abs() < 1e-16);
        let q = MajorantQuery::new(1.0, 1.0, 1.0, P2, 1.0);
        assert!((theorem_term_bound(&q) - 0.5f64.sqrt()).abs() < 1e-15);
        let q = MajorantQuery::new(0.0, 7.0, 3.0, P2, 2.5);
        assert_eq!(theorem_term_bound(&q), 2.5);
    }

    #[test]
    fn term_bound_survives_large_n() {
        let q = MajorantQuery::new(400.0, 50.0, 1.0, INF, 1.0);
        let v = theorem_term_bound(&q);
        let expect = (400.0 * 50f64.ln() - ln_factorial(400)).exp();
        assert!(v.is_finite() && (v / expect - 1.0).abs() < 1e-9);
        // continuity across the log-space threshold
        let a = theorem_term_bound(&MajorantQuery::new(150.0, 60.0, 1.0, P2, 1.0));
        let b = theorem_term_bound(&MajorantQuery::new(151.0, 60.0, 1.0, P2, 1.0));
        let m = growth_constant(60.0, P2);
        assert!((b / a - m / 151f64.sqrt()).abs() < 1e-9 * (m / 151f64.sqrt()));
    }

    #[test]
    fn exp_tail_examples() {
        assert!((exp_tail(0, 1.0, 1.0, 1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert_eq!(exp_tail(4, 0.0, 1.0, 1.0), 0.0);
        let mut prev = f64::INFINITY;
        for n in 0..60 {
            let v = exp_tail(n, 2.0, 1.5, 1.0);
            assert!(v < prev && v >= 0.0);
            prev = v;
        }
        assert!(prev < 1e-40);
        // large Dt: compare against subtraction where it is still accurate
        let x: f64 = 30.0;
        let partial: f64 = (0..=5).map(|k| (k as f64 * x.ln() - ln_factorial(k)).exp()).sum();
        let v = exp_tail(5, 30.0, 1.0, 1.0);
        assert!((v - (x.exp() - partial)).abs() < 1e-12 * v);
    }

    #[test]
    fn series_tail_bounds_the_true_remainder() {
        for &p in &[1.5, 2.0, 3.0] {
            let p = LpExponent::Finite(p);
            for n in [0u64, 3, 10] {
                let brute: f64 = (n + 1..400)
                    .map(|k| theorem_term_bound(&MajorantQuery::new(k as f64, 2.0, 1.0, p, 1.0)))
                    .sum();
                let tail = series_tail(n, 2.0, 1.0, p, 1.0, 1e-14);
                assert!(tail >= brute * (1.0 - 1e-12), "p={p} n={n}: {tail} < {brute}");
                assert!(tail <= brute * (1.0 + 1e-10) + 1e-13, "p={p} n={n}: {tail} vs {brute}");
            }
        }
    }

    #[test]
    fn ratio_examples() {
        let seq: Vec<f64> = (0..10).map(|n| 2f64.powi(n) / (1..=n).product::<i32>().max(1) as f64).collect();
        for (n, r) in empirical_ratio(&seq).iter().enumerate() {
            assert!((r - 2.0 / (n as f64 + 1.0)).abs() < 1e-14);
        }
        assert!(empirical_ratio(&[3.0; 5]).iter().all(|&r| r == 1.0));
        let geo: Vec<f64> = (0..8).map(|n| 0.3f64.powi(n)).collect();
        assert!(empirical_ratio(&geo).iter().all(|r| (r - 0.3).abs() < 1e-15));
        assert_eq!(empirical_ratio(&[1.0, 0.5, 0.0, 0.0]), vec![0.5, 0.0]);
    }

    #[test]
    fn simplex_excess_matches_leading_order() {
        let grid = TimeGrid::new(1.0, 512).unwrap();
        let ex = simplex_excess(&grid, 12);
        assert_eq!(ex[0], 0.0);
        assert!(ex[1] < 1e-14 && ex[2] < 1e-14);
        let h2 = grid.step().powi(2);
        for n in 3..=12usize {
            let lead = h2 * (n * (n - 1) * (n - 2)) as f64 / 12.0;
            assert!((ex[n] / lead - 1.0).abs() < 0.01, "n={n}: {} vs {lead}", ex[n]);
        }
    }

    fn exponents() -> impl Strategy<Value = LpExponent> {
        prop_oneof![Just(INF), Just(LpExponent::Finite(1.0)), (1.01..8.0f64).prop_map(LpExponent::Finite)]
    }

    proptest! {
        #[test]
        fn lemma_bound_is_monotone(c in 0.0..5.0f64, d in 0.0..5.0f64, t in 0.0..3.0f64,
                                   n in 0.0..6.0f64, p in exponents(), bump in 0.0..1.0f64) {
            let base = lemma_bound(&MajorantQuery::new(n, d, t, p, c)).unwrap();
            for q in [MajorantQuery::new(n, d, t, p, c + bump), MajorantQuery::new(n, d + bump, t, p, c),
                      MajorantQuery::new(n, d, t + bump, p, c)] {
                prop_assert!(lemma_bound(&q).unwrap() >= base * (1.0 - 1e-15));
            }
        }

        #[test]
        fn consecutive_term_ratio_is_mt_over_root(n in 0u64..140, d in 0.1..10.0f64, t in 0.1..3.0f64, p in exponents()) {
            let a = theorem_term_bound(&MajorantQuery::new(n as f64, d, t, p, 1.0));
            let b = theorem_term_bound(&MajorantQuery::new(n as f64 + 1.0, d, t, p, 1.0));
            prop_assume!(a > 1e-280 && b > 1e-280);
            let expected = match p {
                LpExponent::Infinity => d * t / (n + 1) as f64,
                LpExponent::Finite(pp) => growth_constant(d, p) * t / ((n + 1) as f64).powf(1.0 / pp),
            };
            prop_assert!((b / a - expected).abs() <= 1e-13 * expected);
        }

        #[test]
        fn iterated_lemma_reproduces_term_bound(n in 0u32..40, d in 0.1..5.0f64, t in 0.1..2.0f64,
                                                p in exponents(), base in 0.1..4.0f64) {
            // C_{k+1} tᵏ⁺¹ = lemma(C_k, k); start from C₀ = base
            let mut c = base;
            for k in 0..n {
                c = lemma_bound(&MajorantQuery::new(k as f64, d, t, p, c)).unwrap() / t.powi(k as i32 + 1);
            }
            let direct = theorem_term_bound(&MajorantQuery::new(n as f64, d, t, p, base));
            prop_assert!((c * t.powi(n as i32) - direct).abs() <= 1e-12 * direct.max(1e-300));
        }
    }
}
