//! Inducing domains `Y = C x J` and first-return-time sampling.
//!
//! `C` is a cylinder fixed by a word prefix and `J` a union of intervals. A
//! return happens at the first `n >= 1` with `T^n_w(x)` in `J` and the
//! shifted word again starting with the prefix. Symbols are drawn lazily, so
//! the prefix test for time `n` is only decided once symbol `n + |C|` exists;
//! the membership flags of the last `|C| + 1` orbit points are kept in a ring.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds_oracle::{bad_block_constants, BadBlockConstants, BoundsError};
use crate::map_kernel::{MapDescriptor, MapKind, Side};
use crate::point::Point;
use crate::random_system::RandomSystem;
use crate::rng::stream_rng;

/// Largest number of preimages kept while expanding the tree of `c`.
pub const PREIMAGE_BUDGET: usize = 1 << 24;
/// Default truncation of return times.
pub const DEFAULT_CAP: u64 = 1_000_000;
/// Grid used for the expansion constant.
const EXPANSION_GRID: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InducingError {
    #[error("preimage tree of depth {k} exceeds the budget")]
    Depth { k: usize },
    #[error("kappa must be at least 1")]
    ZeroKappa,
    #[error("t must differ from g")]
    SameIndex,
    #[error("index {0} is not a good map")]
    NotGood(usize),
    #[error("index {0} out of range")]
    NoSuchMap(usize),
    #[error("kappa = {kappa} fails the domain conditions")]
    InvalidKappa { kappa: usize, scheme: Box<InducingScheme> },
    #[error("no valid kappa up to {0}")]
    KappaSearch(usize),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Extreme critical points of `T_g^k` on each side of `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalQuadruple {
    pub k: usize,
    /// Closest to 0.
    pub x_k: f64,
    /// Closest to `c` from the left.
    pub x_k_prime: f64,
    /// Closest to `c` from the right.
    pub y_k_prime: f64,
    /// Closest to 1.
    pub y_k: f64,
    /// True when a side has fewer than two distinct critical points.
    pub degenerate: bool,
}

/// Critical points of `T_g^k` are the points sent to `c` by some `T_g^j`
/// with `j < k`; they are found by expanding preimages of `c` level by
/// level.
pub fn critical_points_iterate(g: &MapDescriptor, k: usize) -> Result<CriticalQuadruple, InducingError> {
    assert!(k >= 1, "k must be positive");
    if k >= usize::BITS as usize || (1usize << k) > PREIMAGE_BUDGET {
        return Err(InducingError::Depth { k });
    }
    let c = g.c;
    let mut level = vec![c];
    let mut all: Vec<f64> = Vec::new();
    for depth in 0..k {
        all.extend_from_slice(&level);
        if depth + 1 == k {
            break;
        }
        let mut next = Vec::with_capacity(2 * level.len());
        for &y in &level {
            for side in [Side::Left, Side::Right] {
                if let Ok(x) = g.branch_inverse(side, y) {
                    if x > 0.0 && x < 1.0 {
                        next.push(x);
                    }
                }
            }
        }
        level = next;
    }
    let left: Vec<f64> = all.iter().copied().filter(|&x| x < c).collect();
    let right: Vec<f64> = all.iter().copied().filter(|&x| x > c).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::NAN, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NAN, f64::max);
    let (x_k, x_k_prime) = if left.is_empty() { (c, c) } else { (min(&left), max(&left)) };
    let (y_k_prime, y_k) = if right.is_empty() { (c, c) } else { (min(&right), max(&right)) };
    Ok(CriticalQuadruple {
        k,
        x_k,
        x_k_prime,
        y_k_prime,
        y_k,
        degenerate: !(x_k < x_k_prime && y_k_prime < y_k),
    })
}

/// Outcomes of the domain conditions for one `kappa`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionFlags {
    /// Non-empty intervals on both sides.
    pub nondegenerate: bool,
    /// `T_g(x'), T_g(y')` avoid `(x', y')`.
    pub turning_points: bool,
    /// Every map sends the outer pieces into `[0, x') ∪ (y', 1]`.
    pub outer_images: bool,
    /// Every map expands by more than `d > 1` on the outer pieces.
    pub outer_expansion: bool,
    pub d: f64,
}

impl ConditionFlags {
    pub fn all(&self) -> bool {
        self.nondegenerate && self.turning_points && self.outer_images && self.outer_expansion
    }
}

/// The cylinder prefix and the interval union of an inducing domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducingScheme {
    pub g: Option<usize>,
    pub t: Option<usize>,
    pub kappa: usize,
    /// Word every return must start with.
    pub prefix: Vec<usize>,
    /// Disjoint open intervals making up `J`.
    pub intervals: Vec<(f64, f64)>,
    pub quadruple: Option<CriticalQuadruple>,
    pub flags: Option<ConditionFlags>,
    pub valid: bool,
}

fn check_conditions(sys: &RandomSystem, g: usize, q: &CriticalQuadruple) -> ConditionFlags {
    let maps = sys.maps();
    let tg = &maps[g];
    let outside = |v: f64| v <= q.x_k_prime || v >= q.y_k_prime;
    let turning_points = outside(tg.eval(q.x_k_prime)) && outside(tg.eval(q.y_k_prime));
    let strictly_outside = |v: f64| v < q.x_k_prime || v > q.y_k_prime;
    // branches are monotone, so the endpoint images bound each piece
    let outer_images = maps.iter().all(|m| {
        [0.0, q.x_k, q.y_k, 1.0].iter().all(|&x| strictly_outside(m.eval(x)))
            && {
                let (a, b) = (m.eval(0.0), m.eval(q.x_k));
                let (lo, hi) = (a.min(b), a.max(b));
                hi < q.x_k_prime || lo > q.y_k_prime
            }
            && {
                let (a, b) = (m.eval(q.y_k), m.eval(1.0));
                let (lo, hi) = (a.min(b), a.max(b));
                hi < q.x_k_prime || lo > q.y_k_prime
            }
    });
    let mut dmin = f64::INFINITY;
    for m in maps {
        for i in 0..EXPANSION_GRID {
            let s = i as f64 / EXPANSION_GRID as f64;
            for x in [s * q.x_k, 1.0 - s * (1.0 - q.y_k)] {
                dmin = dmin.min(m.deriv(x, 1).abs());
            }
        }
    }
    let d = 0.99 * dmin;
    ConditionFlags {
        nondegenerate: !q.degenerate,
        turning_points,
        outer_images,
        outer_expansion: d > 1.0,
        d,
    }
}

impl InducingScheme {
    /// Domain `[g^kappa t] x ((x_k, x_k') ∪ (y_k', y_k))` at `k = kappa`.
    pub fn build(sys: &RandomSystem, g: usize, t: usize, kappa: usize) -> Result<InducingScheme, InducingError> {
        let n = sys.maps().len();
        if g >= n {
            return Err(InducingError::NoSuchMap(g));
        }
        if t >= n {
            return Err(InducingError::NoSuchMap(t));
        }
        if sys.maps()[g].kind != MapKind::Good {
            return Err(InducingError::NotGood(g));
        }
        if kappa == 0 {
            return Err(InducingError::ZeroKappa);
        }
        if t == g {
            return Err(InducingError::SameIndex);
        }
        let q = critical_points_iterate(&sys.maps()[g], kappa)?;
        let flags = check_conditions(sys, g, &q);
        let valid = flags.all();
        let mut prefix = vec![g; kappa];
        prefix.push(t);
        let scheme = InducingScheme {
            g: Some(g),
            t: Some(t),
            kappa,
            prefix,
            intervals: vec![(q.x_k, q.x_k_prime), (q.y_k_prime, q.y_k)],
            quadruple: Some(q),
            flags: Some(flags),
            valid,
        };
        if valid {
            Ok(scheme)
        } else {
            Err(InducingError::InvalidKappa {
                kappa,
                scheme: Box::new(scheme),
            })
        }
    }

    /// Smallest valid `kappa` up to `max_kappa`; `t` defaults to the first
    /// bad index.
    pub fn search(sys: &RandomSystem, g: usize, t: Option<usize>, max_kappa: usize) -> Result<InducingScheme, InducingError> {
        let t = t.unwrap_or(sys.bad_indices()[0]);
        for kappa in 1..=max_kappa {
            match Self::build(sys, g, t, kappa) {
                Ok(s) => return Ok(s),
                Err(InducingError::InvalidKappa { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(InducingError::KappaSearch(max_kappa))
    }

    /// No prefix and `J = (0, c) ∪ (c, 1)`: every point returns at once.
    pub fn full_space(sys: &RandomSystem) -> InducingScheme {
        let c = sys.c();
        InducingScheme {
            g: None,
            t: None,
            kappa: 0,
            prefix: Vec::new(),
            intervals: vec![(0.0, c), (c, 1.0)],
            quadruple: None,
            flags: None,
            valid: true,
        }
    }

    /// Domain `[b b] x (a, xi)` next to `c` used to show that return times
    /// are not integrable when `theta >= 1`.
    pub fn bad_block(sys: &RandomSystem, b: usize, g: usize) -> Result<(InducingScheme, BadBlockConstants), InducingError> {
        let k = bad_block_constants(sys, b, g)?;
        let scheme = InducingScheme {
            g: Some(g),
            t: Some(b),
            kappa: 1,
            prefix: vec![b, b],
            intervals: vec![(k.a, k.xi)],
            quadruple: None,
            flags: None,
            valid: true,
        };
        Ok((scheme, k))
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| x > a && x < b)
    }

    /// Minimal possible return time.
    pub fn min_return(&self) -> u64 {
        self.prefix.len().max(1) as u64
    }

    /// Uniform point of `J`.
    pub fn sample_start<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total: f64 = self.intervals.iter().map(|(a, b)| b - a).sum();
        let mut u = rng.gen::<f64>() * total;
        for &(a, b) in &self.intervals {
            if u < b - a {
                let x = a + u;
                return if x > a && x < b { x } else { 0.5 * (a + b) };
            }
            u -= b - a;
        }
        let (a, b) = *self.intervals.last().unwrap();
        0.5 * (a + b)
    }
}

/// One first-return experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnEvent {
    pub start: f64,
    /// `None` when capped.
    pub time: Option<u64>,
    /// Orbit point at the return.
    pub end: f64,
    /// Symbols `n+1 ..= n+|C|` at the return.
    pub window: Vec<usize>,
    /// Length of the initial run of bad symbols.
    pub lead_bad: u64,
    /// `ln` of the product of orders over that run.
    pub lead_bad_ln_order: f64,
}

/// Draws `(w, x)` in `Y` and follows it to its first return.
pub fn sample_return<R: Rng + ?Sized>(scheme: &InducingScheme, sys: &RandomSystem, rng: &mut R, cap: u64) -> ReturnEvent {
    let c = sys.c();
    let maps = sys.maps();
    let l = scheme.prefix.len();
    let start = scheme.sample_start(rng);
    let mut p = Point::from_x(start, c);
    // ring of the last l + 1 points and symbols
    let mut pts = vec![p; l + 1];
    let mut syms = vec![usize::MAX; l.max(1)];
    let mut lead_bad = 0u64;
    let mut lead_ln = 0.0;
    let mut lead_open = true;
    let last = scheme.prefix.last().copied();
    let mut m: u64 = 0;
    loop {
        m += 1;
        let s = if (m as usize) <= l {
            scheme.prefix[m as usize - 1]
        } else {
            sys.sample_symbol(rng)
        };
        if lead_open {
            if maps[s].kind == MapKind::Bad {
                lead_bad += 1;
                lead_ln += maps[s].order.ln();
            } else {
                lead_open = false;
            }
        }
        p = maps[s].step_point(p);
        pts[(m as usize) % (l + 1)] = p;
        if l > 0 {
            syms[(m as usize) % l] = s;
        }
        let Some(n) = m.checked_sub(l as u64).filter(|&n| n >= 1) else {
            continue;
        };
        if n > cap {
            return ReturnEvent {
                start,
                time: None,
                end: f64::NAN,
                window: Vec::new(),
                lead_bad,
                lead_bad_ln_order: lead_ln,
            };
        }
        if l > 0 && Some(s) != last {
            continue;
        }
        // symbols n+1 ..= n+l sit at ring slots (n+1)..=(n+l) mod l
        let matches = (0..l).all(|i| syms[(n as usize + 1 + i) % l] == scheme.prefix[i]);
        if !matches {
            continue;
        }
        let xn = pts[(n as usize) % (l + 1)].x(c);
        if scheme.contains(xn) {
            return ReturnEvent {
                start,
                time: Some(n),
                end: xn,
                window: (0..l).map(|i| syms[(n as usize + 1 + i) % l]).collect(),
                lead_bad,
                lead_bad_ln_order: lead_ln,
            };
        }
    }
}

/// Return times of a batch; sample `i` uses stream `i` of `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeSample {
    pub seed: u64,
    pub cap: u64,
    pub starts: Vec<f64>,
    /// `None` marks a capped sample.
    pub times: Vec<Option<u64>>,
}

impl ReturnTimeSample {
    pub fn capped(&self) -> usize {
        self.times.iter().filter(|t| t.is_none()).count()
    }

    pub fn capped_fraction(&self) -> f64 {
        self.capped() as f64 / self.times.len().max(1) as f64
    }

    /// Mean of the uncapped times among the first `n` samples.
    pub fn prefix_mean(&self, n: usize) -> f64 {
        let v: Vec<u64> = self.times[..n.min(self.times.len())].iter().flatten().copied().collect();
        v.iter().map(|&t| t as f64).sum::<f64>() / v.len().max(1) as f64
    }
}

pub fn sample_returns(
    scheme: &InducingScheme,
    sys: &RandomSystem,
    n_samples: usize,
    cap: u64,
    seed: u64,
) -> (ReturnTimeSample, Vec<ReturnEvent>) {
    let events: Vec<ReturnEvent> = (0..n_samples)
        .into_par_iter()
        .map(|i| sample_return(scheme, sys, &mut stream_rng(seed, i as u64), cap))
        .collect();
    let sample = ReturnTimeSample {
        seed,
        cap,
        starts: events.iter().map(|e| e.start).collect(),
        times: events.iter().map(|e| e.time).collect(),
    };
    (sample, events)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KacVerdict {
    /// Mean changed by less than 10% over the last tenfold of samples.
    Stabilized,
    /// Mean grew by a factor of at least 1.5.
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KacDiagnostic {
    pub n_samples: usize,
    pub cap: u64,
    pub capped: usize,
    pub capped_fraction: f64,
    pub mean: f64,
    /// Mean over the first tenth of the samples.
    pub prefix_mean: f64,
    pub median: f64,
    pub growth: f64,
    pub relative_change: f64,
    /// `(2^j, number of uncapped times in [2^j, 2^(j+1)))`
    pub tail_histogram: Vec<(u64, u64)>,
    /// Least-squares slope `-a` of `ln P(time >= 2^j)` against `ln 2^j`,
    /// over octaves above the median with at least 20 samples beyond;
    /// `a <= 1` signals a non-integrable tail. Infinite when the tail thins
    /// out within three octaves, NaN without samples.
    pub tail_exponent: f64,
    pub verdict: KacVerdict,
}

impl KacDiagnostic {
    /// Tail looks integrable and almost nothing hit the cap.
    pub fn looks_finite(&self) -> bool {
        self.tail_exponent > 1.0 && self.capped_fraction < 1e-3
    }
}

fn tail_exponent(sorted: &[u64], capped: usize, median: f64) -> f64 {
    let n = (sorted.len() + capped) as f64;
    let mut pts = Vec::new();
    let mut j = 0;
    while (1u64 << j) as f64 <= sorted.last().copied().unwrap_or(0) as f64 {
        let t = 1u64 << j;
        j += 1;
        if (t as f64) < median {
            continue;
        }
        let beyond = sorted.len() - sorted.partition_point(|&s| s < t) + capped;
        if beyond < 20 {
            break;
        }
        pts.push(((t as f64).ln(), (beyond as f64 / n).ln()));
    }
    if sorted.is_empty() && capped == 0 {
        return f64::NAN;
    }
    if pts.len() < 3 {
        return f64::INFINITY;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -num / den
}

pub fn kac_estimate(scheme: &InducingScheme, sys: &RandomSystem, n_samples: usize, cap: u64, seed: u64) -> KacDiagnostic {
    let (sample, _) = sample_returns(scheme, sys, n_samples, cap, seed);
    kac_diagnostic(&sample)
}

pub fn kac_diagnostic(sample: &ReturnTimeSample) -> KacDiagnostic {
    let n = sample.times.len();
    let mean = sample.prefix_mean(n);
    let prefix_mean = sample.prefix_mean((n / 10).max(1));
    let mut sorted: Vec<u64> = sample.times.iter().flatten().copied().collect();
    sorted.sort_unstable();
    let median = if sorted.is_empty() {
        f64::NAN
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64
    };
    let mut hist: Vec<(u64, u64)> = Vec::new();
    for &t in &sorted {
        let lo = 1u64 << (63 - t.max(1).leading_zeros());
        match hist.last_mut() {
            Some(e) if e.0 == lo => e.1 += 1,
            _ => hist.push((lo, 1)),
        }
    }
    let growth = mean / prefix_mean;
    let relative_change = (mean - prefix_mean).abs() / prefix_mean;
    let verdict = if relative_change < 0.1 {
        KacVerdict::Stabilized
    } else if growth >= 1.5 {
        KacVerdict::Diverging
    } else {
        KacVerdict::Inconclusive
    };
    KacDiagnostic {
        n_samples: n,
        cap: sample.cap,
        capped: sample.capped(),
        capped_fraction: sample.capped_fraction(),
        mean,
        prefix_mean,
        median,
        growth,
        relative_change,
        tail_histogram: hist,
        tail_exponent: tail_exponent(&sorted, sample.capped(), median),
        verdict,
    }
}

/// Whether a return to the bad-block domain respects
/// `m >= k1 + k2 * l_1 ... l_n`, where `n` is the initial run of bad maps
/// and `m` the remaining time. Capped samples are not decided.
pub fn bad_block_bound_holds(event: &ReturnEvent, k: &BadBlockConstants) -> Option<bool> {
    let time = event.time?;
    if event.lead_bad < 2 {
        return None;
    }
    let m = time as f64 - event.lead_bad as f64;
    Some(m >= k.k1 + k.k2 * event.lead_bad_ln_order.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn t4_quadruples() {
        let t4 = MapDescriptor::logistic4();
        let q1 = critical_points_iterate(&t4, 1).unwrap();
        assert!(q1.degenerate);
        let q2 = critical_points_iterate(&t4, 2).unwrap();
        assert_abs_diff_eq!(q2.x_k, (1.0 - 0.5f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert!(q2.degenerate);
        let q3 = critical_points_iterate(&t4, 3).unwrap();
        let s = |k: f64| (std::f64::consts::PI / k).sin().powi(2);
        assert_abs_diff_eq!(q3.x_k, s(16.0), epsilon = 1e-14);
        assert_abs_diff_eq!(q3.x_k, 0.0380602, epsilon = 1e-7);
        assert_abs_diff_eq!(q3.x_k_prime, (3.0 * std::f64::consts::PI / 8.0 / 2.0).sin().powi(2), epsilon = 1e-14);
        assert!(!q3.degenerate);
    }

    #[test]
    fn quadruples_nest() {
        for g in [MapDescriptor::logistic4(), MapDescriptor::power_good(3.0).unwrap(), MapDescriptor::power_good(1.5).unwrap()] {
            let qs: Vec<_> = (2..=12).map(|k| critical_points_iterate(&g, k).unwrap()).collect();
            for w in qs.windows(2) {
                assert!(w[1].x_k < w[0].x_k, "{}", g.name);
                assert!(w[1].x_k_prime > w[0].x_k_prime);
                assert!(w[1].y_k_prime < w[0].y_k_prime);
                assert!(w[1].y_k > w[0].y_k);
            }
        }
    }

    #[test]
    fn kappa_search_on_logistic_pair() {
        let sys = RandomSystem::logistic_pair(0.4).unwrap();
        let s = InducingScheme::search(&sys, 0, None, 12).unwrap();
        assert_eq!(s.kappa, 3);
        assert_eq!(s.prefix, vec![0, 0, 0, 1]);
        assert!(s.flags.as_ref().unwrap().d > 1.0);
        assert!(matches!(InducingScheme::build(&sys, 0, 1, 2), Err(InducingError::InvalidKappa { .. })));
        assert_eq!(InducingScheme::build(&sys, 0, 1, 0).unwrap_err(), InducingError::ZeroKappa);
        assert_eq!(InducingScheme::build(&sys, 0, 0, 3).unwrap_err(), InducingError::SameIndex);
    }

    #[test]
    fn full_space_returns_immediately() {
        let sys = RandomSystem::logistic_pair(0.4).unwrap();
        let s = InducingScheme::full_space(&sys);
        let d = kac_estimate(&s, &sys, 2000, 100, 5);
        assert_eq!(d.mean, 1.0);
        assert_eq!(d.capped, 0);
    }

    #[test]
    fn finite_regime_returns() {
        let sys = RandomSystem::logistic_pair(0.4).unwrap();
        let s = InducingScheme::search(&sys, 0, None, 12).unwrap();
        let (sample, events) = sample_returns(&s, &sys, 4000, DEFAULT_CAP, 9);
        for e in &events {
            let t = e.time.unwrap();
            assert!(t >= s.kappa as u64 + 1);
            assert!(s.contains(e.end));
            assert_eq!(e.window, s.prefix);
        }
        assert!(sample.capped_fraction() < 1e-3);
        let again = sample_returns(&s, &sys, 4000, DEFAULT_CAP, 9).0;
        assert_eq!(sample, again);
    }

    #[test]
    fn bad_block_returns_respect_lower_bound() {
        let sys = RandomSystem::logistic_pair(0.7).unwrap();
        let (s, k) = InducingScheme::bad_block(&sys, 1, 0).unwrap();
        let (_, events) = sample_returns(&s, &sys, 3000, 100_000, 4);
        let mut checked = 0;
        for e in &events {
            if let Some(ok) = bad_block_bound_holds(e, &k) {
                assert!(ok, "{e:?} {k:?}");
                checked += 1;
            }
            if e.time.is_some() {
                assert!(s.contains(e.end));
            }
        }
        assert!(checked > 1000);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn returns_clear_the_prefix(seed in any::<u64>(), p2 in 0.2f64..0.6) {
            let sys = RandomSystem::logistic_pair(p2).unwrap();
            let s = InducingScheme::search(&sys, 0, None, 12).unwrap();
            let e = sample_return(&s, &sys, &mut stream_rng(seed, 0), 200_000);
            if let Some(t) = e.time {
                prop_assert!(t > s.kappa as u64);
                prop_assert!(s.contains(e.end));
                prop_assert_eq!(&e.window, &s.prefix);
            }
        }
    }
}
