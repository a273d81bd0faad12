//! I.i.d. random compositions of a finite family of maps.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map_kernel::{MapDescriptor, MapKind, ValidationReport};
use crate::point::Point;

/// Grid used to validate maps on system assembly.
pub const SYSTEM_VALIDATION_GRID: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("a system needs at least one good and one bad map")]
    MissingClass,
    #[error("{maps} maps but {probs} probabilities")]
    LengthMismatch { maps: usize, probs: usize },
    #[error("probabilities must be positive and sum to 1 (sum = {sum})")]
    BadProbabilities { sum: f64 },
    #[error("map {name} has c = {c}, expected {expected}")]
    CriticalPointMismatch { name: String, c: f64, expected: f64 },
    #[error("map {} failed validation", .0.map)]
    InvalidMap(Box<ValidationReport>),
}

/// A validated family of maps with a probability vector.
#[derive(Clone, Debug)]
pub struct RandomSystem {
    maps: Vec<MapDescriptor>,
    p: Vec<f64>,
    cdf: Vec<f64>,
    good: Vec<usize>,
    bad: Vec<usize>,
    c: f64,
}

impl RandomSystem {
    pub fn new(maps: Vec<MapDescriptor>, p: Vec<f64>) -> Result<RandomSystem, SystemError> {
        if maps.len() != p.len() {
            return Err(SystemError::LengthMismatch {
                maps: maps.len(),
                probs: p.len(),
            });
        }
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&q| !(q > 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(SystemError::BadProbabilities { sum });
        }
        let c = maps.first().map(|m| m.c).unwrap_or(0.5);
        for m in &maps {
            if m.c != c {
                return Err(SystemError::CriticalPointMismatch {
                    name: m.name.clone(),
                    c: m.c,
                    expected: c,
                });
            }
            let rep = m.validate(SYSTEM_VALIDATION_GRID);
            if !rep.passed() {
                return Err(SystemError::InvalidMap(Box::new(rep)));
            }
        }
        let good: Vec<usize> = (0..maps.len()).filter(|&i| maps[i].kind == MapKind::Good).collect();
        let bad: Vec<usize> = (0..maps.len()).filter(|&i| maps[i].kind == MapKind::Bad).collect();
        if good.is_empty() || bad.is_empty() {
            return Err(SystemError::MissingClass);
        }
        let p: Vec<f64> = p.iter().map(|q| q / sum).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = p
            .iter()
            .map(|q| {
                acc += q;
                acc
            })
            .collect();
        *cdf.last_mut().unwrap() = 1.0;
        Ok(RandomSystem {
            maps,
            p,
            cdf,
            good,
            bad,
            c,
        })
    }

    /// `{T4, T2}` with probability `p2` on the bad map.
    pub fn logistic_pair(p2: f64) -> Result<RandomSystem, SystemError> {
        RandomSystem::new(
            vec![MapDescriptor::logistic4(), MapDescriptor::logistic2()],
            vec![1.0 - p2, p2],
        )
    }

    pub fn maps(&self) -> &[MapDescriptor] {
        &self.maps
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn good_indices(&self) -> &[usize] {
        &self.good
    }

    pub fn bad_indices(&self) -> &[usize] {
        &self.bad
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Sum of `p_b * l_b` over the bad maps.
    pub fn theta(&self) -> f64 {
        self.bad.iter().map(|&b| self.p[b] * self.maps[b].order).sum()
    }

    /// Sum of `p_b / |DT_b(c)|`; infinite unless every bad map has order 1.
    pub fn expanding_average(&self) -> f64 {
        if self.bad.iter().any(|&b| self.maps[b].order > 1.0) {
            return f64::INFINITY;
        }
        self.bad
            .iter()
            .map(|&b| self.p[b] / self.maps[b].deriv(self.c, 1).abs())
            .sum()
    }

    pub fn r_max(&self) -> f64 {
        self.good.iter().map(|&g| self.maps[g].order).fold(1.0, f64::max)
    }

    pub fn ell_max(&self) -> f64 {
        self.bad.iter().map(|&b| self.maps[b].order).fold(1.0, f64::max)
    }

    pub fn ell_min(&self) -> f64 {
        self.bad.iter().map(|&b| self.maps[b].order).fold(f64::INFINITY, f64::min)
    }

    /// Largest `δ` such that every bad map has `|DT| < 1` on `(c - δ, c + δ)`,
    /// found on a grid of 4096 radii and rounded down to a grid value.
    pub fn attraction_radius(&self) -> f64 {
        let reach = self.c.min(1.0 - self.c);
        let n = 4096;
        let mut last = 0.0;
        for i in 1..=n {
            let h = reach * i as f64 / n as f64;
            let ok = self.bad.iter().all(|&b| {
                let m = &self.maps[b];
                m.deriv(self.c - h, 1).abs() < 1.0 && m.deriv((self.c + h).min(1.0), 1).abs() < 1.0
            });
            if !ok {
                break;
            }
            last = h;
        }
        last
    }

    #[inline]
    pub fn sample_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf.iter().position(|&q| u < q).unwrap_or(self.cdf.len() - 1)
    }

    pub fn sample_word<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| self.sample_symbol(rng)).collect()
    }

    #[inline]
    pub fn step(&self, symbol: usize, p: Point) -> Point {
        self.maps[symbol].step_point(p)
    }

    /// Follows `x0` along `word`.
    pub fn iterate(&self, x0: f64, word: &[usize]) -> OrbitTrace {
        self.trace(x0, word, false)
    }

    /// As [`iterate`](Self::iterate), also accumulating `ln |D T^n_w(x0)|`.
    pub fn iterate_with_derivative(&self, x0: f64, word: &[usize]) -> OrbitTrace {
        self.trace(x0, word, true)
    }

    fn trace(&self, x0: f64, word: &[usize], derivative: bool) -> OrbitTrace {
        let c = self.c;
        let mut p = Point::from_x(x0, c);
        let mut points = Vec::with_capacity(word.len() + 1);
        points.push(x0);
        let mut ln_d = 0.0;
        let mut absorbed_at = p.is_absorbed().then_some(0);
        for (n, &s) in word.iter().enumerate() {
            if derivative {
                ln_d += self.maps[s].ln_abs_deriv_point(p);
            }
            p = self.step(s, p);
            points.push(p.x(c));
            if absorbed_at.is_none() && p.is_absorbed() {
                absorbed_at = Some(n + 1);
            }
        }
        OrbitTrace {
            x0,
            word: word.to_vec(),
            points,
            seed: None,
            absorbed_at,
            ln_derivative: derivative.then_some(ln_d),
        }
    }

    /// Samples a word of length `n` from `rng` and follows `x0` along it.
    pub fn sample_orbit<R: Rng + ?Sized>(&self, x0: f64, n: usize, rng: &mut R) -> OrbitTrace {
        let word = self.sample_word(n, rng);
        self.iterate(x0, &word)
    }
}

/// A finite piece of a random orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub x0: f64,
    pub word: Vec<usize>,
    pub points: Vec<f64>,
    pub seed: Option<u64>,
    /// First step at which the orbit sits exactly on 0 or 1.
    pub absorbed_at: Option<usize>,
    pub ln_derivative: Option<f64>,
}

/// A set whose occupation is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "kebab-case")]
pub enum Region {
    /// `[lo, hi)`, closed at 1.
    Interval { lo: f64, hi: f64 },
    /// `(c - eps, c + eps)`
    NearCrit { eps: f64 },
    /// `[0, eps) ∪ (1 - eps, 1]`
    NearBoundary { eps: f64 },
    /// Union of the two neighbourhoods above.
    Intermittent { eps: f64 },
}

impl Region {
    pub fn contains(&self, x: f64, c: f64) -> bool {
        match *self {
            Region::Interval { lo, hi } => x >= lo && (x < hi || (hi >= 1.0 && x <= 1.0)),
            Region::NearCrit { eps } => (x - c).abs() < eps,
            Region::NearBoundary { eps } => x < eps || x > 1.0 - eps,
            Region::Intermittent { eps } => {
                Region::NearCrit { eps }.contains(x, c) || Region::NearBoundary { eps }.contains(x, c)
            }
        }
    }

    /// Membership decided on the anchored form, exact below `f64`
    /// resolution.
    #[inline]
    pub fn contains_point(&self, p: &Point, c: f64) -> bool {
        use crate::point::{Anchor, Offset};
        let small = |eps: f64| match p.offset {
            Offset::Log(_) => true,
            Offset::Linear(v) => v < eps,
        };
        match *self {
            Region::NearCrit { eps } => match p.anchor {
                Anchor::CritLeft | Anchor::CritRight => small(eps),
                _ => self.contains(p.x(c), c),
            },
            Region::NearBoundary { eps } => match p.anchor {
                Anchor::Zero | Anchor::One => small(eps),
                _ => self.contains(p.x(c), c),
            },
            Region::Intermittent { eps } => {
                Region::NearCrit { eps }.contains_point(p, c)
                    || Region::NearBoundary { eps }.contains_point(p, c)
            }
            Region::Interval { .. } => self.contains(p.x(c), c),
        }
    }
}

/// Streaming occupation counter for one region.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Occupation {
    pub steps: u64,
    pub visits: u64,
    /// Visit count per completed window.
    pub window_visits: Vec<u64>,
    /// `(length, count)` of maximal runs inside the region, sorted by length.
    pub laminar: Vec<(u64, u64)>,
    window: u64,
    in_window: u64,
    run: u64,
    #[serde(skip)]
    runs: std::collections::BTreeMap<u64, u64>,
}

impl Occupation {
    pub fn new(window: u64) -> Self {
        Occupation {
            window: window.max(1),
            ..Default::default()
        }
    }

    #[inline]
    pub fn push(&mut self, inside: bool) {
        self.steps += 1;
        if inside {
            self.visits += 1;
            self.in_window += 1;
            self.run += 1;
        } else if self.run > 0 {
            *self.runs.entry(self.run).or_insert(0) += 1;
            self.run = 0;
        }
        if self.steps % self.window == 0 {
            self.window_visits.push(self.in_window);
            self.in_window = 0;
        }
    }

    /// Closes an open run and freezes the histogram.
    pub fn finish(&mut self) {
        if self.run > 0 {
            *self.runs.entry(self.run).or_insert(0) += 1;
            self.run = 0;
        }
        self.laminar = self.runs.iter().map(|(&l, &n)| (l, n)).collect();
    }

    pub fn fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.visits as f64 / self.steps as f64
        }
    }

    pub fn window_fractions(&self) -> Vec<f64> {
        self.window_visits
            .iter()
            .map(|&v| v as f64 / self.window as f64)
            .collect()
    }

    pub fn phases(&self) -> u64 {
        self.laminar.iter().map(|&(_, n)| n).sum()
    }
}

/// Occupation statistics of a trace, one entry per region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationStats {
    pub regions: Vec<Region>,
    pub occupations: Vec<Occupation>,
}

pub fn orbit_statistics(trace: &OrbitTrace, regions: &[Region], c: f64, window: u64) -> OccupationStats {
    let mut occupations: Vec<Occupation> = regions.iter().map(|_| Occupation::new(window)).collect();
    for &x in &trace.points {
        for (r, o) in regions.iter().zip(occupations.iter_mut()) {
            o.push(r.contains(x, c));
        }
    }
    occupations.iter_mut().for_each(Occupation::finish);
    OccupationStats {
        regions: regions.to_vec(),
        occupations,
    }
}

/// Occupation fractions of one long orbit at each checkpoint in `checkpoints`
/// (ascending step counts), without storing the orbit.
pub fn occupation_fractions<R: Rng + ?Sized>(
    system: &RandomSystem,
    region: Region,
    x0: f64,
    checkpoints: &[u64],
    rng: &mut R,
) -> Vec<f64> {
    let c = system.c();
    let mut p = Point::from_x(x0, c);
    let mut visits = 0u64;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut n = 0u64;
    for &stop in checkpoints {
        while n < stop {
            p = system.step(system.sample_symbol(rng), p);
            visits += region.contains_point(&p, c) as u64;
            n += 1;
        }
        out.push(visits as f64 / n.max(1) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds_oracle::envelope_constants;
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn mobius_system(pb: f64) -> RandomSystem {
        RandomSystem::new(
            vec![MapDescriptor::logistic4(), MapDescriptor::mobius(0.5).unwrap()],
            vec![1.0 - pb, pb],
        )
        .unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_abs_diff_eq!(RandomSystem::logistic_pair(0.6).unwrap().theta(), 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(RandomSystem::logistic_pair(0.4).unwrap().theta(), 0.8, epsilon = 1e-12);
        let s = RandomSystem::new(
            vec![MapDescriptor::logistic4(), MapDescriptor::logistic2(), MapDescriptor::cubic()],
            vec![0.5, 0.25, 0.25],
        )
        .unwrap();
        assert_abs_diff_eq!(s.theta(), 1.25, epsilon = 1e-12);
    }

    #[test]
    fn expanding_average_examples() {
        assert_abs_diff_eq!(mobius_system(0.4).expanding_average(), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(mobius_system(0.6).expanding_average(), 1.2, epsilon = 1e-12);
        assert!(RandomSystem::logistic_pair(0.5).unwrap().expanding_average().is_infinite());
    }

    #[test]
    fn rejects_malformed_systems() {
        assert_eq!(
            RandomSystem::new(vec![MapDescriptor::logistic4()], vec![1.0]).unwrap_err(),
            SystemError::MissingClass
        );
        assert!(matches!(
            RandomSystem::new(
                vec![MapDescriptor::logistic4(), MapDescriptor::logistic2()],
                vec![0.5, 0.4]
            ),
            Err(SystemError::BadProbabilities { .. })
        ));
        let fake = MapDescriptor::logistic2().with_kind(MapKind::Good);
        assert!(matches!(
            RandomSystem::new(vec![fake, MapDescriptor::logistic2()], vec![0.5, 0.5]),
            Err(SystemError::InvalidMap(_))
        ));
    }

    #[test]
    fn words_are_deterministic_and_balanced() {
        let s = RandomSystem::logistic_pair(0.5).unwrap();
        assert!(s.sample_word(0, &mut stream_rng(1, 0)).is_empty());
        let w1 = s.sample_word(1_000_000, &mut stream_rng(42, 0));
        let w2 = s.sample_word(1_000_000, &mut stream_rng(42, 0));
        assert_eq!(w1, w2);
        let f = w1.iter().filter(|&&i| i == 0).count() as f64 / w1.len() as f64;
        assert!((f - 0.5).abs() < 0.002, "{f}");
    }

    #[test]
    fn iterate_examples() {
        let s = RandomSystem::logistic_pair(0.5).unwrap();
        assert_eq!(s.iterate(0.25, &[1, 0]).points, vec![0.25, 0.375, 0.9375]);
        assert!(s.iterate(0.5, &[1; 50]).points.iter().all(|&x| x == 0.5));
        assert_eq!(s.iterate(0.3, &[]).points, vec![0.3]);
        let t = s.iterate(0.5, &[0, 0]);
        assert_eq!(t.absorbed_at, Some(1));
    }

    #[test]
    fn statistics_examples() {
        let c = 0.5;
        let r = [Region::Interval { lo: 0.4, hi: 0.6 }];
        let flat = OrbitTrace {
            x0: 0.5,
            word: vec![],
            points: vec![0.5; 10],
            seed: None,
            absorbed_at: None,
            ln_derivative: None,
        };
        assert_eq!(orbit_statistics(&flat, &r, c, 5).occupations[0].fraction(), 1.0);
        let alt = OrbitTrace {
            points: (0..100).map(|i| if i % 2 == 0 { 0.5 } else { 0.9 }).collect(),
            ..flat
        };
        let st = orbit_statistics(&alt, &r, c, 10);
        let o = &st.occupations[0];
        assert_eq!(o.fraction(), 0.5);
        assert_eq!(o.laminar, vec![(1, 50)]);
        assert_eq!(o.phases(), 50);
        assert!(o.window_fractions().iter().all(|&f| f == 0.5));
    }

    #[test]
    fn t4_occupation_matches_arcsine_law() {
        let t4 = MapDescriptor::logistic4();
        let c = 0.5;
        let mut rng = stream_rng(3, 0);
        let reg = Region::Interval { lo: 0.4, hi: 0.6 };
        let n = 10_000_000u64;
        let mut hits = 0u64;
        let mut p = Point::from_x(rng.gen::<f64>(), c);
        for _ in 0..n {
            p = t4.step_point(p);
            hits += reg.contains_point(&p, c) as u64;
        }
        let cdf = |x: f64| 2.0 / std::f64::consts::PI * x.sqrt().asin();
        let exact = cdf(0.6) - cdf(0.4);
        let f = hits as f64 / n as f64;
        assert!((f / exact - 1.0).abs() < 0.01, "{f} vs {exact}");
    }

    #[test]
    fn attraction_radius_of_t2() {
        let s = RandomSystem::logistic_pair(0.5).unwrap();
        let d = s.attraction_radius();
        assert!(d <= 0.25 && d > 0.249, "{d}");
    }

    proptest! {
        #[test]
        fn bad_maps_attract_near_c(t in -1.0f64..1.0, idx in 0usize..3) {
            let maps = [MapDescriptor::logistic2(), MapDescriptor::cubic(), MapDescriptor::mobius(0.5).unwrap()];
            let s = RandomSystem::new(vec![MapDescriptor::logistic4(), maps[idx].clone()], vec![0.5, 0.5]).unwrap();
            let x = 0.5 + t * s.attraction_radius();
            prop_assume!(x != 0.5);
            let m = &maps[idx];
            prop_assert!((m.eval(x) - 0.5).abs() < (x - 0.5).abs());
        }

        #[test]
        fn chain_rule_matches_product(x in 0.01f64..0.99, seed in any::<u64>()) {
            let s = RandomSystem::new(
                vec![MapDescriptor::logistic4(), MapDescriptor::logistic2(), MapDescriptor::cubic()],
                vec![0.4, 0.3, 0.3],
            ).unwrap();
            let word = s.sample_word(6, &mut stream_rng(seed, 0));
            let t = s.iterate_with_derivative(x, &word);
            // plain coordinates lose relative precision next to c
            prop_assume!(t.points.iter().all(|&y| (y - 0.5).abs() > 1e-6));
            let prod: f64 = word.iter().zip(&t.points).map(|(&j, &y)| s.maps()[j].deriv(y, 1).abs()).product();
            prop_assume!(prod > 1e-200 && prod.is_finite());
            let got = t.ln_derivative.unwrap().exp();
            prop_assert!((got / prod - 1.0).abs() < 1e-8, "{} vs {}", got, prod);
        }

        #[test]
        fn envelopes_hold_for_bad_words(t in 0.0f64..1.0, seed in any::<u64>(), len in 0usize..=6) {
            let s = RandomSystem::new(
                vec![MapDescriptor::logistic4(), MapDescriptor::logistic2(), MapDescriptor::cubic()],
                vec![0.4, 0.3, 0.3],
            ).unwrap();
            let env = envelope_constants(&s).unwrap();
            let mut rng = stream_rng(seed, 0);
            let word: Vec<usize> = (0..len).map(|_| s.bad_indices()[rng.gen_range(0..2)]).collect();
            let x = t;
            let chk = crate::bounds_oracle::check_envelope(&s, &env, x, &word);
            prop_assert!(chk.passed, "{:?}", chk);
        }

        #[test]
        fn traces_are_deterministic(seed in any::<u64>()) {
            let s = RandomSystem::logistic_pair(0.6).unwrap();
            let a = s.sample_orbit(0.3, 200, &mut stream_rng(seed, 0));
            let b = s.sample_orbit(0.3, 200, &mut stream_rng(seed, 0));
            prop_assert_eq!(a, b);
        }
    }
}
