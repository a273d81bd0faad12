//! Executes one configured experiment into a [`ResultBundle`].

use std::time::Instant;

use critlab_core::bounds_oracle::{log_bound, measure_bound};
use critlab_core::inducing::{
    critical_points_iterate, kac_diagnostic, kac_estimate, sample_returns, InducingError, KacDiagnostic,
};
use critlab_core::transfer_ulam::{cdf_distance, lq_norm, power_iterate};
use critlab_core::{
    stream_rng, BoundParameters, DensityEstimate, InducingScheme, MapDescriptor, Point, RandomSystem, Region,
    UlamOperator,
};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::svg::{Axis, Chart, Scale};

/// Numeric table; every cell is an `f64` so that CSV output is exact and
/// byte-stable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Figure {
    pub name: String,
    #[serde(skip)]
    pub svg: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMeta {
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    pub meta: RunMeta,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub figures: Vec<Figure>,
    /// Set when the experiment stopped early; tables hold what was done.
    pub error: Option<String>,
}

impl ResultBundle {
    pub fn empty(config: &ExperimentConfig) -> Self {
        ResultBundle {
            config: config.clone(),
            meta: RunMeta {
                kind: config.experiment.kind().into(),
                seed: config.system.seed,
                config_hash: format!("{:016x}", crate::config::config_hash(config)),
                threads: rayon::current_num_threads(),
                wall_clock_seconds: 0.0,
                version: env!("CARGO_PKG_VERSION").into(),
            },
            tables: Vec::new(),
            verdicts: Vec::new(),
            figures: Vec::new(),
            error: None,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    fn verdict(&mut self, name: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn figure(&mut self, name: &str, chart: Chart) {
        self.figures.push(Figure {
            name: name.into(),
            svg: chart.render(),
        });
    }
}

type Step = Result<(), String>;

pub fn run_experiment(config: &ExperimentConfig) -> ResultBundle {
    let start = Instant::now();
    let mut bundle = ResultBundle::empty(config);
    let outcome = config
        .build_system()
        .map_err(|e| e.to_string())
        .and_then(|sys| dispatch(config, &sys, &mut bundle));
    if let Err(e) = outcome {
        bundle.error = Some(e);
    }
    bundle.meta.wall_clock_seconds = start.elapsed().as_secs_f64();
    bundle
}

fn dispatch(config: &ExperimentConfig, sys: &RandomSystem, b: &mut ResultBundle) -> Step {
    let seed = config.system.seed;
    match &config.experiment {
        Experiment::OrbitTrace { steps, x0, eps } => orbit_trace(sys, *steps, *x0, *eps, seed, b),
        Experiment::UlamDensity { resolution, tol, max_iter } => ulam_density(sys, *resolution, *tol, *max_iter, b),
        Experiment::LqSweep { resolutions, q } => lq_sweep(sys, resolutions, q, b),
        Experiment::PhaseScan { p2, steps, eps, samples, cap, margin } => {
            phase_scan(sys, p2, *steps, *eps, *samples, *cap, *margin, seed, b)
        }
        Experiment::Kac { samples, cap, max_kappa, g, t } => kac(sys, *samples, *cap, *max_kappa, *g, *t, seed, b),
        Experiment::Continuity { resolution, p2 } => continuity(sys, *resolution, p2, b),
        Experiment::BoundsCheck { resolution, fit_level, min_level } => {
            bounds_check(sys, *resolution, *fit_level, *min_level, b)
        }
        Experiment::InducingReport { max_kappa, g, t, samples, cap } => {
            inducing_report(sys, *max_kappa, *g, *t, *samples, *cap, seed, b)
        }
    }
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 200_000;

fn weighted(sys: &RandomSystem) -> Vec<(&MapDescriptor, f64)> {
    sys.maps().iter().zip(sys.probabilities().iter().copied()).collect()
}

fn density_of(maps: &[(&MapDescriptor, f64)], n: usize, tol: f64, max_iter: usize) -> Result<DensityEstimate, String> {
    let op = UlamOperator::build_weighted(maps, n).map_err(|e| e.to_string())?;
    Ok(power_iterate(&op, tol, max_iter))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn orbit_trace(sys: &RandomSystem, steps: usize, x0: f64, eps: f64, seed: u64, b: &mut ResultBundle) -> Step {
    let c = sys.c();
    let trace = sys.sample_orbit(x0, steps, &mut stream_rng(seed, 0));
    // the symbol applied to reach step n; -1 for the initial point
    let mut orbit = Table::new("orbit", &["step", "symbol", "x"]);
    for (n, &x) in trace.points.iter().enumerate() {
        let s = if n == 0 { -1.0 } else { trace.word[n - 1] as f64 };
        orbit.push(vec![n as f64, s, x]);
    }
    let regions = [Region::NearCrit { eps }, Region::NearBoundary { eps }, Region::Intermittent { eps }];
    let stats = critlab_core::random_system::orbit_statistics(&trace, &regions, c, steps as u64 + 1);
    let mut occ = Table::new("occupation", &["region", "eps", "fraction", "phases", "longest_phase"]);
    for (k, o) in stats.occupations.iter().enumerate() {
        let longest = o.laminar.last().map_or(0, |&(l, _)| l);
        occ.push(vec![k as f64, eps, o.fraction(), o.phases() as f64, longest as f64]);
    }
    let chart = Chart {
        hlines: vec![c],
        ..Chart::new(
            &format!("random orbit, theta = {:.3}", sys.theta()),
            Axis::linear("n", 0.0, steps as f64),
            Axis::linear("x", 0.0, 1.0),
        )
        .series("orbit", trace.points.iter().enumerate().map(|(n, &x)| (n as f64, x)).collect())
    };
    b.tables.push(orbit);
    b.tables.push(occ);
    b.figure("orbit", chart);
    Ok(())
}

fn ulam_density(sys: &RandomSystem, n: usize, tol: f64, max_iter: usize, b: &mut ResultBundle) -> Step {
    let d = density_of(&weighted(sys), n, tol, max_iter)?;
    let mut t = Table::new("density", &["cell_left", "cell_right", "value"]);
    for (l, r, v) in d.cells() {
        t.push(vec![l, r, v]);
    }
    let mut s = Table::new("summary", &["resolution", "iterations", "residual", "total_mass", "l1.5_norm"]);
    s.push(vec![n as f64, d.iterations as f64, d.residual, d.total_mass(), lq_norm(&d, 1.5)]);
    let pts: Vec<(f64, f64)> = d.cells().flat_map(|(l, r, v)| [(l, v), (r, v)]).collect();
    let chart = Chart::new(
        &format!("Ulam density, {n} cells"),
        Axis::linear("x", 0.0, 1.0),
        Axis::fit("density", pts.iter().map(|p| p.1).chain([0.0]), Scale::Linear),
    )
    .series("density", pts);
    b.verdict(
        "power-iteration-converged",
        d.converged,
        format!("residual {:.3e} after {} iterations", d.residual, d.iterations),
    );
    b.tables.push(t);
    b.tables.push(s);
    b.figure("density", chart);
    Ok(())
}

fn lq_sweep(sys: &RandomSystem, resolutions: &[usize], qs: &[f64], b: &mut ResultBundle) -> Step {
    let mut t = Table::new("lq", &["resolution", "q", "norm"]);
    let mut norms = vec![Vec::new(); qs.len()];
    for &n in resolutions {
        let d = density_of(&weighted(sys), n, POWER_TOL, POWER_MAX_ITER)?;
        for (k, &q) in qs.iter().enumerate() {
            let v = lq_norm(&d, q);
            norms[k].push(v);
            t.push(vec![n as f64, q, v]);
        }
    }
    b.tables.push(t);
    // order one bad maps expanding on average keep the density in L^q
    // exactly for q below r / (r - 1)
    let regular = sys.ell_max() == 1.0 && sys.expanding_average() < 1.0;
    let r = sys.r_max();
    let q_limit = if r > 1.0 { r / (r - 1.0) } else { f64::INFINITY };
    let mut chart = Chart::new(
        "L^q norm of the Ulam density",
        Axis::log("cells", resolutions[0] as f64, *resolutions.last().unwrap() as f64),
        Axis::fit("norm", norms.iter().flatten().copied(), Scale::Log10),
    );
    for (k, &q) in qs.iter().enumerate() {
        let v = &norms[k];
        chart = chart.series(&format!("q = {q}"), resolutions.iter().map(|&n| n as f64).zip(v.iter().copied()).collect());
        if q <= 1.0 {
            continue;
        }
        let change = (v[v.len() - 1] - v[0]).abs() / v[0];
        if sys.ell_max() > 1.0 || (regular && q >= q_limit) {
            let ok = v.windows(2).all(|w| w[1] > w[0]);
            b.verdict(&format!("q={q}-growing"), ok, format!("norms {v:.4?}"));
        } else if regular {
            b.verdict(&format!("q={q}-bounded"), change < 0.1, format!("total change {change:.4}"));
        }
    }
    b.figure("lq", chart);
    Ok(())
}

fn domain(sys: &RandomSystem, max_kappa: usize, g: Option<usize>, t: Option<usize>) -> Result<InducingScheme, String> {
    let g = g.or_else(|| sys.good_indices().first().copied()).ok_or("no good map")?;
    InducingScheme::search(sys, g, t, max_kappa).map_err(|e| e.to_string())
}

fn survival_points(d: &KacDiagnostic) -> Vec<(f64, f64)> {
    let total = (d.n_samples) as f64;
    let mut beyond = total;
    let mut out = Vec::new();
    for &(lo, count) in &d.tail_histogram {
        out.push((lo as f64, beyond / total));
        beyond -= count as f64;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn phase_scan(
    sys: &RandomSystem,
    p2s: &[f64],
    steps: u64,
    eps: f64,
    samples: usize,
    cap: u64,
    margin: f64,
    seed: u64,
    b: &mut ResultBundle,
) -> Step {
    let mut t = Table::new(
        "phase",
        &[
            "p2",
            "theta",
            "occ_crit",
            "occ_boundary",
            "occ_union",
            "kappa",
            "kac_mean",
            "capped_fraction",
            "tail_exponent",
            "finite",
        ],
    );
    let regions = [Region::NearCrit { eps }, Region::NearBoundary { eps }, Region::Intermittent { eps }];
    let mut judged = 0;
    let mut wrong = Vec::new();
    for (i, &p2) in p2s.iter().enumerate() {
        let s = RandomSystem::new(sys.maps().to_vec(), vec![1.0 - p2, p2]).map_err(|e| e.to_string())?;
        let c = s.c();
        let mut rng = stream_rng(seed, 2 * i as u64);
        let mut p = Point::from_x(0.3, c);
        let mut hits = [0u64; 3];
        for _ in 0..steps {
            p = s.step(s.sample_symbol(&mut rng), p);
            for (h, r) in hits.iter_mut().zip(&regions) {
                *h += r.contains_point(&p, c) as u64;
            }
        }
        let occ: Vec<f64> = hits.iter().map(|&h| h as f64 / steps as f64).collect();
        let scheme = domain(&s, 12, None, None)?;
        let d = kac_estimate(&scheme, &s, samples, cap, seed.wrapping_add(2 * i as u64 + 1));
        let finite = d.looks_finite();
        let theta = s.theta();
        if (theta - 1.0).abs() >= margin {
            judged += 1;
            if finite != (theta < 1.0) {
                wrong.push(p2);
            }
        }
        t.push(vec![
            p2,
            theta,
            occ[0],
            occ[1],
            occ[2],
            scheme.kappa as f64,
            d.mean,
            d.capped_fraction,
            d.tail_exponent,
            flag(finite),
        ]);
    }
    let col = |name: &str| t.column(name).unwrap();
    let chart = Chart::new("phase scan", Axis::linear("p2", 0.0, 1.0), Axis::linear("fraction", 0.0, 1.0))
        .series("occupation near {0, c, 1}", col("p2").into_iter().zip(col("occ_union")).collect())
        .series("finite return mean", col("p2").into_iter().zip(col("finite")).collect());
    b.verdict(
        "finite-iff-theta-below-one",
        wrong.is_empty(),
        format!("{judged} rows judged, mismatches at p2 = {wrong:?}"),
    );
    b.tables.push(t);
    b.figure("phase", chart);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn kac(
    sys: &RandomSystem,
    samples: usize,
    cap: u64,
    max_kappa: usize,
    g: Option<usize>,
    t: Option<usize>,
    seed: u64,
    b: &mut ResultBundle,
) -> Step {
    let scheme = domain(sys, max_kappa, g, t)?;
    let (sample, _) = sample_returns(&scheme, sys, samples, cap, seed);
    let d = kac_diagnostic(&sample);
    let mut raw = Table::new("samples", &["stream", "start", "time_or_cap", "capped"]);
    for (i, (&x, &t)) in sample.starts.iter().zip(&sample.times).enumerate() {
        raw.push(vec![i as f64, x, t.unwrap_or(cap) as f64, flag(t.is_none())]);
    }
    let mut tail = Table::new("tail", &["lower", "count"]);
    for &(lo, n) in &d.tail_histogram {
        tail.push(vec![lo as f64, n as f64]);
    }
    let mut s = Table::new(
        "summary",
        &[
            "theta",
            "kappa",
            "samples",
            "cap",
            "mean",
            "prefix_mean",
            "median",
            "growth",
            "relative_change",
            "capped_fraction",
            "tail_exponent",
            "stabilized",
        ],
    );
    s.push(vec![
        sys.theta(),
        scheme.kappa as f64,
        samples as f64,
        cap as f64,
        d.mean,
        d.prefix_mean,
        d.median,
        d.growth,
        d.relative_change,
        d.capped_fraction,
        d.tail_exponent,
        flag(d.verdict == critlab_core::inducing::KacVerdict::Stabilized),
    ]);
    let pts = survival_points(&d);
    let chart = Chart::new(
        "return time tail",
        Axis::fit("n", pts.iter().map(|p| p.0).chain([cap as f64]), Scale::Log10),
        Axis::fit("P(return >= n)", pts.iter().map(|p| p.1), Scale::Log10),
    )
    .series("survival", pts);
    b.verdict(
        "finite-mean-matches-theta",
        d.looks_finite() == (sys.theta() < 1.0),
        format!(
            "theta {:.3}, tail exponent {:.3}, capped fraction {:.2e}, verdict {:?}",
            sys.theta(),
            d.tail_exponent,
            d.capped_fraction,
            d.verdict
        ),
    );
    b.tables.push(tail);
    b.tables.push(s);
    b.tables.push(raw);
    b.figure("tail", chart);
    Ok(())
}

fn continuity(sys: &RandomSystem, n: usize, p2s: &[f64], b: &mut ResultBundle) -> Step {
    let base_p2 = sys.probabilities()[1];
    let base = density_of(&weighted(sys), n, POWER_TOL, POWER_MAX_ITER)?;
    let (m0, m1) = (&sys.maps()[0], &sys.maps()[1]);
    let mut t = Table::new("continuity", &["p2", "distance", "ks"]);
    for &p2 in p2s {
        let d = density_of(&[(m0, 1.0 - p2), (m1, p2)], n, POWER_TOL, POWER_MAX_ITER)?;
        let ks = cdf_distance(&d, &base).map_err(|e| e.to_string())?;
        t.push(vec![p2, (p2 - base_p2).abs(), ks]);
    }
    let mut ok = true;
    for side in [-1.0, 1.0] {
        let mut rows: Vec<&Vec<f64>> = t.rows.iter().filter(|r| (r[0] - base_p2) * side > 0.0).collect();
        rows.sort_by(|a, b| b[1].total_cmp(&a[1]));
        ok &= rows.windows(2).all(|w| w[1][2] < w[0][2]);
    }
    let pts: Vec<(f64, f64)> = t.rows.iter().map(|r| (r[0], r[2])).collect();
    let chart = Chart::new(
        &format!("Kolmogorov distance to p2 = {base_p2}"),
        Axis::linear("p2", 0.0, 1.0),
        Axis::fit("distance", pts.iter().map(|p| p.1).chain([0.0]), Scale::Linear),
    )
    .series("ks", {
        let mut p = pts.clone();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        p
    });
    b.verdict(
        "ks-decreasing-towards-base",
        ok,
        format!("on each side of p2 = {base_p2}, ordered by distance"),
    );
    b.tables.push(t);
    b.figure("continuity", chart);
    Ok(())
}

fn bounds_check(sys: &RandomSystem, n: usize, fit_level: u32, min_level: u32, b: &mut ResultBundle) -> Step {
    let d = density_of(&weighted(sys), n, POWER_TOL, POWER_MAX_ITER)?;
    let max_mass = |j: u32| {
        let m = 1usize << j;
        (0..m)
            .map(|i| d.mass(i as f64 / m as f64, (i + 1) as f64 / m as f64))
            .fold(0.0, f64::max)
    };
    let params = BoundParameters::from_system(sys).fitted(2f64.powi(-(fit_level as i32)), max_mass(fit_level));
    let mut t = Table::new(
        "bounds",
        &["level", "lambda", "max_mass", "measure_bound", "margin", "log_bound", "violations"],
    );
    let mut violations = 0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in fit_level..=min_level {
        let lambda = 2f64.powi(-(j as i32));
        let bound = measure_bound(&params, lambda, None);
        let log = log_bound(&params, lambda);
        let m = 1usize << j;
        let v = (0..m)
            .filter(|&i| d.mass(i as f64 / m as f64, (i + 1) as f64 / m as f64) > bound)
            .count();
        violations += v;
        lo = lo.min(log / bound);
        hi = hi.max(log / bound);
        t.push(vec![j as f64, lambda, max_mass(j), bound, bound - max_mass(j), log, v as f64]);
    }
    let col = |name: &str| t.column(name).unwrap();
    let chart = Chart::new(
        "largest dyadic mass and bounds",
        Axis::log("lambda", 2f64.powi(-(min_level as i32)), 2f64.powi(-(fit_level as i32))),
        Axis::fit("mass", col("max_mass").into_iter().chain(col("measure_bound")).chain(col("log_bound")), Scale::Log10),
    )
    .series("max mass", col("lambda").into_iter().zip(col("max_mass")).collect())
    .series("series bound", col("lambda").into_iter().zip(col("measure_bound")).collect())
    .series("log bound", col("lambda").into_iter().zip(col("log_bound")).collect());
    let vacuous = sys.theta() >= 1.0;
    b.verdict(
        "no-bound-violations",
        violations == 0,
        if vacuous {
            "theta >= 1, the series bound is infinite".into()
        } else {
            format!("{violations} dyadic intervals above the bound")
        },
    );
    if !vacuous {
        b.verdict(
            "log-bound-band",
            hi / lo <= 10.0,
            format!("log/series ratio within [{lo:.3}, {hi:.3}]"),
        );
    }
    b.tables.push(t);
    b.figure("bounds", chart);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn inducing_report(
    sys: &RandomSystem,
    max_kappa: usize,
    g: Option<usize>,
    t: Option<usize>,
    samples: usize,
    cap: u64,
    seed: u64,
    b: &mut ResultBundle,
) -> Step {
    let g = g.or_else(|| sys.good_indices().first().copied()).ok_or("no good map")?;
    let t = t.or_else(|| sys.bad_indices().first().copied()).ok_or("no bad map")?;
    let mut table = Table::new(
        "kappa",
        &[
            "kappa",
            "x_k",
            "x_k_prime",
            "y_k_prime",
            "y_k",
            "nondegenerate",
            "turning_points",
            "outer_images",
            "outer_expansion",
            "d",
            "valid",
        ],
    );
    let mut found = None;
    for kappa in 1..=max_kappa {
        let scheme = match InducingScheme::build(sys, g, t, kappa) {
            Ok(s) => s,
            Err(InducingError::InvalidKappa { scheme, .. }) => *scheme,
            Err(InducingError::Depth { .. }) => break,
            Err(e) => return Err(e.to_string()),
        };
        let q = scheme.quadruple.unwrap_or_else(|| critical_points_iterate(&sys.maps()[g], kappa).unwrap());
        let f = scheme.flags.clone().expect("built domains carry flags");
        table.push(vec![
            kappa as f64,
            q.x_k,
            q.x_k_prime,
            q.y_k_prime,
            q.y_k,
            flag(f.nondegenerate),
            flag(f.turning_points),
            flag(f.outer_images),
            flag(f.outer_expansion),
            f.d,
            flag(scheme.valid),
        ]);
        if scheme.valid && found.is_none() {
            found = Some(scheme);
        }
    }
    b.tables.push(table);
    b.verdict(
        "domain-found",
        found.is_some(),
        found.as_ref().map_or("no valid kappa".into(), |s| format!("kappa = {}", s.kappa)),
    );
    let Some(scheme) = found else {
        return Ok(());
    };
    let (sample, events) = sample_returns(&scheme, sys, samples, cap, seed);
    let clean = events
        .iter()
        .filter(|e| e.time.is_some())
        .all(|e| e.time.unwrap() > scheme.kappa as u64 && scheme.contains(e.end) && e.window == scheme.prefix);
    let times: Vec<u64> = sample.times.iter().flatten().copied().collect();
    let mut r = Table::new("returns", &["kappa", "samples", "capped_fraction", "min_return", "mean_return"]);
    r.push(vec![
        scheme.kappa as f64,
        samples as f64,
        sample.capped_fraction(),
        times.iter().min().map_or(f64::NAN, |&m| m as f64),
        sample.prefix_mean(samples),
    ]);
    b.tables.push(r);
    b.verdict(
        "returns-land-in-domain",
        clean,
        "every return exceeds kappa, lands in J and repeats the prefix".into(),
    );
    Ok(())
}
