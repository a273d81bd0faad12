//! Closed-form constants and bounds, and checks of measurements against them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::Point;
use crate::random_system::RandomSystem;

/// Tail mass dropped when truncating the bound series.
pub const SERIES_TAIL_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("the upper envelope needs a bad map of order above one")]
    UndefinedEnvelope,
    #[error("eta must exceed one for every bad map")]
    InvalidEta,
    #[error("index {0} is not a bad map")]
    NotBad(usize),
    #[error("index {0} is not a good map")]
    NotGood(usize),
}

/// Envelope constants for words of bad maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    /// Lower constant, defined when every bad map has order above one.
    pub k_tilde: Option<f64>,
    pub m_tilde: Option<f64>,
    /// Upper constant valid near `c` when some bad map has order one.
    pub m_hat: Option<f64>,
    /// Lower constant for the exponents `eta_hat`.
    pub k_hat: Option<f64>,
    /// `max(eta_b, l_b)` per bad index, aligned with `bad_indices`.
    pub eta_hat: Vec<f64>,
    /// Radius of the neighbourhood of `c` where all bad maps contract.
    pub delta: f64,
}

/// Default `eta_b` for order one maps.
pub const DEFAULT_ETA: f64 = 1.5;

pub fn envelope_constants(sys: &RandomSystem) -> Result<EnvelopeConstants, BoundsError> {
    let eta = vec![DEFAULT_ETA; sys.bad_indices().len()];
    envelope_constants_with_eta(sys, &eta)
}

/// `eta` is aligned with `sys.bad_indices()`.
pub fn envelope_constants_with_eta(
    sys: &RandomSystem,
    eta: &[f64],
) -> Result<EnvelopeConstants, BoundsError> {
    let maps = sys.maps();
    let bad = sys.bad_indices();
    if eta.len() != bad.len() || eta.iter().any(|&e| !(e > 1.0)) {
        return Err(BoundsError::InvalidEta);
    }
    let k_min = bad.iter().map(|&b| maps[b].env_k).fold(f64::INFINITY, f64::min);
    let m_max = bad.iter().map(|&b| maps[b].env_m).fold(0.0, f64::max);
    let (l_min, l_max) = (sys.ell_min(), sys.ell_max());
    let (k_tilde, m_tilde) = if l_min > 1.0 {
        let e = 1.0 / (l_min - 1.0);
        (Some((k_min / l_max).powf(e)), Some((m_max / l_min).powf(e)))
    } else {
        (None, None)
    };
    let eta_hat: Vec<f64> = bad
        .iter()
        .zip(eta)
        .map(|(&b, &e)| e.max(maps[b].order))
        .collect();
    let eh_min = eta_hat.iter().copied().fold(f64::INFINITY, f64::min);
    let eh_max = eta_hat.iter().copied().fold(0.0, f64::max);
    let k_hat = Some((k_min / eh_max).powf(1.0 / (eh_min - 1.0)));
    Ok(EnvelopeConstants {
        k_tilde,
        m_tilde,
        m_hat: m_hat(sys).ok(),
        k_hat,
        eta_hat,
        delta: sys.attraction_radius(),
    })
}

/// `M^(1/(u - 1))` with `M = max M_b / l_b` and `u` the least order above
/// one, both over bad maps of order above one.
pub fn m_hat(sys: &RandomSystem) -> Result<f64, BoundsError> {
    let maps = sys.maps();
    let steep: Vec<usize> = sys
        .bad_indices()
        .iter()
        .copied()
        .filter(|&b| maps[b].order > 1.0)
        .collect();
    if steep.is_empty() {
        return Err(BoundsError::UndefinedEnvelope);
    }
    let m = steep
        .iter()
        .map(|&b| maps[b].env_m / maps[b].order)
        .fold(1.0, f64::max);
    let u = steep.iter().map(|&b| maps[b].order).fold(f64::INFINITY, f64::min);
    Ok(m.powf(1.0 / (u - 1.0)))
}

/// Log-domain margins of the envelope inequalities; positive is satisfied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub passed: bool,
    pub lower_margin: f64,
    /// `None` when no upper envelope applies to this `x`.
    pub upper_margin: Option<f64>,
}

/// Evaluates both envelopes for `|T_w^n(x) - c|` along a word of bad maps.
pub fn check_envelope(
    sys: &RandomSystem,
    env: &EnvelopeConstants,
    x: f64,
    word: &[usize],
) -> EnvelopeCheck {
    let c = sys.c();
    let maps = sys.maps();
    let bad = sys.bad_indices();
    let mut p = Point::from_x(x, c);
    for &s in word {
        debug_assert!(bad.contains(&s));
        p = maps[s].step_point(p);
    }
    let ln_d = p.ln_dist_to_crit(c);
    let ln_h = (x - c).abs().ln();
    if ln_h == f64::NEG_INFINITY {
        return EnvelopeCheck {
            passed: ln_d == f64::NEG_INFINITY,
            lower_margin: 0.0,
            upper_margin: Some(0.0),
        };
    }
    let ell: f64 = word.iter().map(|&s| maps[s].order).product();
    let tol = |v: f64| 1e-9 * v.abs().max(1.0);
    let (k, exp_lower) = match env.k_tilde {
        Some(k) => (k, ell),
        None => {
            let eta: f64 = word
                .iter()
                .map(|&s| env.eta_hat[bad.iter().position(|&b| b == s).unwrap()])
                .product();
            (env.k_hat.unwrap(), eta)
        }
    };
    let lower = exp_lower * (k.ln() + ln_h);
    let lower_margin = ln_d - lower + tol(lower);
    let upper = match (env.m_tilde, env.m_hat) {
        (Some(m), _) => Some(ell * (m.ln() + ln_h)),
        (None, Some(m)) if (x - c).abs() <= env.delta => Some(ell * (m.ln() + ln_h)),
        _ => None,
    };
    let upper_margin = upper.map(|u| u - ln_d + tol(u));
    EnvelopeCheck {
        passed: lower_margin >= 0.0 && upper_margin.map_or(true, |m| m >= 0.0),
        lower_margin,
        upper_margin,
    }
}

/// `(1 + sum_{i} l_n ... l_{n-i}) / (l_1 ... l_n)` from the induction behind
/// the envelope inequalities.
pub fn exponent_ratio(ells: &[f64]) -> f64 {
    let n = ells.len();
    if n == 0 {
        return 0.0;
    }
    let mut sum = 1.0;
    let mut prod = 1.0;
    for i in 0..n.saturating_sub(1) {
        prod *= ells[n - 1 - i];
        sum += prod;
    }
    sum / ells.iter().product::<f64>()
}

/// Parameters of the measure bound and of its logarithmic form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParameters {
    pub theta: f64,
    pub r_max: f64,
    pub ell_max: f64,
    pub kappa_exponent: f64,
    /// Multiplicative constant of the series bound.
    pub c_const: f64,
    /// Multiplicative constant of the log bound.
    pub k_const: f64,
    /// `lambda(A)` at which the constants were fitted, if they were.
    pub fitted_at: Option<f64>,
}

pub fn kappa_exponent(theta: f64, ell_max: f64) -> f64 {
    (1.0 / theta).ln() / (1.0 + ell_max.ln())
}

impl BoundParameters {
    pub fn new(theta: f64, r_max: f64, ell_max: f64) -> Self {
        BoundParameters {
            theta,
            r_max,
            ell_max,
            kappa_exponent: kappa_exponent(theta, ell_max),
            c_const: 1.0,
            k_const: 1.0,
            fitted_at: None,
        }
    }

    pub fn from_system(sys: &RandomSystem) -> Self {
        Self::new(sys.theta(), sys.r_max(), sys.ell_max())
    }

    /// Chooses both constants so that the bounds equal `mu` at `lambda`.
    pub fn fitted(mut self, lambda: f64, mu: f64) -> Self {
        self.c_const = 1.0;
        self.k_const = 1.0;
        self.c_const = mu / measure_bound(&self, lambda, None);
        self.k_const = mu / log_bound(&self, lambda);
        self.fitted_at = Some(lambda);
        self
    }
}

/// Number of series terms leaving a tail below [`SERIES_TAIL_EPS`].
pub fn default_k_terms(theta: f64) -> usize {
    if theta <= 0.0 {
        return 1;
    }
    ((SERIES_TAIL_EPS * (1.0 - theta)).ln() / theta.ln()).ceil().max(1.0) as usize
}

/// `C (sum_{k < K} theta^k lambda^(l^-k / r) + theta^K / (1 - theta))`;
/// infinite when `theta >= 1`.
pub fn measure_bound(params: &BoundParameters, lambda: f64, k_terms: Option<usize>) -> f64 {
    let th = params.theta;
    if th >= 1.0 {
        return f64::INFINITY;
    }
    let k = k_terms.unwrap_or_else(|| default_k_terms(th));
    let ln_l = lambda.ln();
    let mut sum = 0.0;
    let mut th_k = 1.0;
    let mut expo = 1.0 / params.r_max;
    for _ in 0..k {
        sum += th_k * (expo * ln_l).exp();
        th_k *= th;
        expo /= params.ell_max;
    }
    params.c_const * (sum + th_k / (1.0 - th))
}

/// `K / log(1/lambda)^kappa`
pub fn log_bound(params: &BoundParameters, lambda: f64) -> f64 {
    params.k_const / (1.0 / lambda).ln().powf(params.kappa_exponent)
}

/// Series bound keeping each word's own exponent `1 / (l_b r_g)` instead of
/// the worst case, summed over bad words up to `max_len` plus a tail.
pub fn refined_measure_bound(sys: &RandomSystem, c_const: f64, lambda: f64, max_len: usize) -> f64 {
    let th = sys.theta();
    if th >= 1.0 {
        return f64::INFINITY;
    }
    let maps = sys.maps();
    let p = sys.probabilities();
    // (product of orders, summed p_b l_b) over words of the current length
    let mut layer: Vec<(f64, f64)> = vec![(1.0, 1.0)];
    let mut total = 0.0;
    let ln_l = lambda.ln();
    for k in 0..=max_len {
        for &g in sys.good_indices() {
            let r = maps[g].order;
            total += p[g]
                * layer
                    .iter()
                    .map(|&(l, w)| w * (ln_l / (l * r)).exp())
                    .sum::<f64>();
        }
        if k == max_len {
            break;
        }
        let mut next: Vec<(f64, f64)> = Vec::new();
        for &(l, w) in &layer {
            for &b in sys.bad_indices() {
                let lb = maps[b].order;
                let key = l * lb;
                let add = w * p[b] * lb;
                match next.iter_mut().find(|e| (e.0 / key - 1.0).abs() < 1e-12) {
                    Some(e) => e.1 += add,
                    None => next.push((key, add)),
                }
            }
        }
        layer = next;
    }
    c_const * (total + th.powi(max_len as i32 + 1) / (1.0 - th))
}

/// Constants from the argument that `theta >= 1` forces an infinite measure:
/// the domain `(a, xi)` near `c` and the return time lower bound
/// `m >= k1 + k2 * l_1 ... l_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadBlockConstants {
    pub b: usize,
    pub g: usize,
    pub gamma: f64,
    pub a: f64,
    pub xi: f64,
    pub zeta: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Largest `|DT_j|` over all maps on a grid including the endpoints.
pub fn sup_derivative(sys: &RandomSystem) -> f64 {
    let n = 4097;
    sys.maps()
        .iter()
        .flat_map(|m| (0..n).map(move |i| m.deriv(i as f64 / (n - 1) as f64, 1).abs()))
        .fold(0.0, f64::max)
}

pub fn bad_block_constants(sys: &RandomSystem, b: usize, g: usize) -> Result<BadBlockConstants, BoundsError> {
    if !sys.bad_indices().contains(&b) {
        return Err(BoundsError::NotBad(b));
    }
    if !sys.good_indices().contains(&g) {
        return Err(BoundsError::NotGood(g));
    }
    let c = sys.c();
    let env = envelope_constants(sys)?;
    let m = match env.m_tilde {
        Some(m) => m,
        None => env.m_hat.ok_or(BoundsError::UndefinedEnvelope)?,
    };
    let gamma = env.delta.min(0.5 / m);
    let a = c - gamma;
    let tb = &sys.maps()[b];
    let t1 = tb.eval(a);
    let t2 = tb.eval(t1);
    let xi = a + (t1.min(t2).min(c) - a) / 2.0;
    let zeta = sup_derivative(sys);
    let mg = &sys.maps()[g];
    let k1 = (1.0 + (a.min(1.0 - xi) * mg.order / mg.env_m).ln()) / zeta.ln();
    let k2 = (2f64.powf(mg.order)).ln() / zeta.ln();
    Ok(BadBlockConstants {
        b,
        g,
        gamma,
        a,
        xi,
        zeta,
        k1,
        k2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_kernel::MapDescriptor;
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn sys(maps: Vec<MapDescriptor>, p: Vec<f64>) -> RandomSystem {
        RandomSystem::new(maps, p).unwrap()
    }

    #[test]
    fn envelope_examples() {
        let s = RandomSystem::logistic_pair(0.5).unwrap();
        let e = envelope_constants(&s).unwrap();
        assert_abs_diff_eq!(e.k_tilde.unwrap(), 0.495, epsilon = 1e-12);
        assert_abs_diff_eq!(e.m_tilde.unwrap(), 2.005, epsilon = 1e-12);
        let twin = MapDescriptor::logistic2().with_name("T2b");
        let s2 = sys(
            vec![MapDescriptor::logistic4(), MapDescriptor::logistic2(), twin],
            vec![0.5, 0.25, 0.25],
        );
        let e2 = envelope_constants(&s2).unwrap();
        assert_eq!(e2.k_tilde, e.k_tilde);
        assert_eq!(e2.m_tilde, e.m_tilde);
    }

    #[test]
    fn hat_constants_with_order_one_map() {
        let mo = MapDescriptor::mobius(0.5).unwrap();
        let s = sys(
            vec![MapDescriptor::logistic4(), MapDescriptor::logistic2(), mo.clone()],
            vec![0.5, 0.25, 0.25],
        );
        let e = envelope_constants_with_eta(&s, &[1.5, 1.5]).unwrap();
        assert!(e.k_tilde.is_none());
        assert_eq!(e.eta_hat, vec![2.0, 1.5]);
        // min K_b = 0.99 * 0.5, eta_hat max 2, min 1.5
        let k = (0.495f64 / 2.0).powf(1.0 / 0.5);
        assert_abs_diff_eq!(e.k_hat.unwrap(), k, epsilon = 1e-15);
        // M = 4.01 / 2 over the single steep map, u = 2
        assert_abs_diff_eq!(e.m_hat.unwrap(), 2.005, epsilon = 1e-12);
        let only_flat = sys(vec![MapDescriptor::logistic4(), mo], vec![0.5, 0.5]);
        assert_eq!(m_hat(&only_flat), Err(BoundsError::UndefinedEnvelope));
    }

    #[test]
    fn trivial_envelope_cases() {
        let s = RandomSystem::logistic_pair(0.5).unwrap();
        let e = envelope_constants(&s).unwrap();
        assert!(check_envelope(&s, &e, 0.3, &[]).passed);
        assert!(check_envelope(&s, &e, 0.5, &[1, 1, 1]).passed);
    }

    #[test]
    fn exponent_ratio_below_limit() {
        for word in [vec![2.0; 10], vec![3.0, 2.0, 2.0, 3.0], vec![2.0]] {
            let l_min = word.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(exponent_ratio(&word) < 1.0 / (l_min - 1.0));
        }
    }

    #[test]
    fn measure_bound_examples() {
        let p = BoundParameters::new(0.8, 2.0, 2.0);
        assert_abs_diff_eq!(measure_bound(&p, 1.0, None), 1.0 / 0.2, epsilon = 1e-12);
        let p5 = BoundParameters::new(0.5, 2.0, 2.0);
        let mut last = 0.0;
        for j in (1..30).rev() {
            let v = measure_bound(&p5, 2f64.powi(-j), None);
            assert!(v > last);
            last = v;
        }
        assert!(measure_bound(&BoundParameters::new(1.0, 2.0, 2.0), 0.5, None).is_infinite());
        let v = measure_bound(&p, 2f64.powi(-20), Some(60));
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn series_truncation_matches_long_sum() {
        let p = BoundParameters::new(0.8, 2.0, 2.0);
        let lam = 2f64.powi(-20);
        let exact: f64 = (0..2000)
            .map(|k| 0.8f64.powi(k) * lam.powf(0.5f64.powi(k) / 2.0))
            .sum();
        let approx = measure_bound(&p, lam, None);
        assert!(approx >= exact && approx - exact < 1e-11 * 10.0);
    }

    #[test]
    fn log_bound_examples() {
        let p = BoundParameters::new(0.5, 2.0, 2.0);
        assert_abs_diff_eq!(p.kappa_exponent, 2f64.ln() / (1.0 + 2f64.ln()), epsilon = 1e-15);
        assert_abs_diff_eq!(p.kappa_exponent, 0.409384, epsilon = 1e-6);
        assert_abs_diff_eq!(log_bound(&p, (-1f64).exp()), 1.0, epsilon = 1e-15);
        assert!(log_bound(&p, 1e-6) < log_bound(&p, 1e-3));
    }

    #[test]
    fn refined_bound_is_tighter() {
        let s = sys(
            vec![MapDescriptor::logistic4(), MapDescriptor::logistic2(), MapDescriptor::power_bad(1.5).unwrap()],
            vec![0.6, 0.2, 0.2],
        );
        let p = BoundParameters::from_system(&s);
        for j in [4, 8, 12] {
            let lam = 2f64.powi(-j);
            let r = refined_measure_bound(&s, 1.0, lam, 40);
            assert!(r <= measure_bound(&p, lam, None) * (1.0 + 1e-9));
        }
        // a single bad order makes the refinement exact up to the good weight
        let s1 = RandomSystem::logistic_pair(0.4).unwrap();
        let p1 = BoundParameters::from_system(&s1);
        let lam = 2f64.powi(-10);
        let r = refined_measure_bound(&s1, 1.0, lam, 200);
        assert_abs_diff_eq!(r, 0.6 * measure_bound(&p1, lam, None), epsilon = 1e-9);
    }

    #[test]
    fn bad_block_constants_for_logistic_pair() {
        let s = RandomSystem::logistic_pair(0.7).unwrap();
        let k = bad_block_constants(&s, 1, 0).unwrap();
        // delta = 1/4, M tilde = 2.005
        assert_abs_diff_eq!(k.gamma, 0.5 / 2.005, epsilon = 1e-12);
        assert!(k.a < k.xi && k.xi < 0.5);
        let t2 = MapDescriptor::logistic2();
        assert!(t2.eval(k.a) > k.xi && t2.eval(t2.eval(k.a)) > k.xi);
        assert_abs_diff_eq!(k.zeta, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.k2, 2.0 * 2f64.ln() / 4f64.ln(), epsilon = 1e-12);
        assert!(bad_block_constants(&s, 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn envelope_sweep_two_bad_maps(x in 0.0f64..=1.0, seed in any::<u64>(), len in 0usize..=6) {
            let s = sys(
                vec![MapDescriptor::logistic4(), MapDescriptor::logistic2(), MapDescriptor::cubic()],
                vec![0.5, 0.25, 0.25],
            );
            let e = envelope_constants(&s).unwrap();
            let mut rng = stream_rng(seed, 0);
            let word: Vec<usize> = (0..len).map(|_| rng.gen_range(1..3)).collect();
            prop_assert!(check_envelope(&s, &e, x, &word).passed);
        }

        #[test]
        fn exponent_ratio_bounded(word in proptest::collection::vec(prop_oneof![Just(2.0f64), Just(3.0), Just(2.5)], 1..=10)) {
            let l_min = word.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(exponent_ratio(&word) < 1.0 / (l_min - 1.0));
        }
    }
}
