use critlab_cli::config::load_config;
use critlab_cli::{run_experiment, ResultBundle};

fn run(system: &str, experiment: &str) -> ResultBundle {
    let text = format!("schema = 1\n\n[system]\n{system}\n\n[experiment]\n{experiment}\n");
    let cfg = load_config(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    let b = run_experiment(&cfg);
    assert!(b.error.is_none(), "{:?}", b.error);
    b
}

const PAIR: &str = "maps = [\"T4\", \"T2\"]\np = [0.6, 0.4]\nseed = 3";

fn verdict(b: &ResultBundle, name: &str) -> bool {
    b.verdicts.iter().find(|v| v.name == name).unwrap_or_else(|| panic!("{name}: {:?}", b.verdicts)).passed
}

#[test]
fn phase_scan_flips_between_finite_and_infinite() {
    let b = run(
        PAIR,
        "kind = \"phase-scan\"\np2 = [0.2, 0.4, 0.5, 0.6, 0.8]\nsteps = 100000\nsamples = 1000\ncap = 100000",
    );
    assert!(verdict(&b, "finite-iff-theta-below-one"), "{:?}", b.verdicts);
    let t = b.table("phase").unwrap();
    let finite = t.column("finite").unwrap();
    assert_eq!((finite[0], finite[1], finite[3], finite[4]), (1.0, 1.0, 0.0, 0.0));
    assert_eq!(t.column("theta").unwrap()[2], 1.0);
}

#[test]
fn lq_sweep_expectations_follow_the_orders() {
    let b = run(PAIR, "kind = \"lq-sweep\"\nresolutions = [256, 1024, 4096]\nq = [1.5]");
    assert!(verdict(&b, "q=1.5-growing"));
    let tame = "maps = [\"T4\", \"mobius0.5\"]\np = [0.6, 0.4]\nseed = 3";
    let b = run(tame, "kind = \"lq-sweep\"\nresolutions = [256, 1024, 4096, 16384]\nq = [1.5, 2.0]");
    assert!(verdict(&b, "q=1.5-bounded"));
    assert!(verdict(&b, "q=2-growing"));
}

#[test]
fn kac_and_inducing() {
    let b = run(PAIR, "kind = \"kac\"\nsamples = 5000");
    assert!(verdict(&b, "finite-mean-matches-theta"));
    let s = b.table("summary").unwrap();
    assert_eq!(s.column("kappa").unwrap(), vec![3.0]);
    let b = run(PAIR, "kind = \"inducing-report\"\nmax_kappa = 5\nsamples = 500");
    assert!(b.all_passed());
    let valid = b.table("kappa").unwrap().column("valid").unwrap();
    assert_eq!(valid, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
}

#[test]
fn bounds_and_continuity() {
    let b = run(PAIR, "kind = \"bounds-check\"\nresolution = 4096\nmin_level = 10");
    assert!(b.all_passed(), "{:?}", b.verdicts);
    assert_eq!(b.table("bounds").unwrap().rows.len(), 7);
    let sym = "maps = [\"T4\", \"T2\"]\np = [0.5, 0.5]\nseed = 3";
    let b = run(sym, "kind = \"continuity\"\nresolution = 1024\np2 = [0.25, 0.375, 0.4375, 0.75, 0.625, 0.5625]");
    assert!(b.all_passed(), "{:?}", b.verdicts);
}

#[test]
fn failures_are_isolated() {
    let cfg = load_config(&format!(
        "schema = 1\n[system]\n{PAIR}\n[experiment]\nkind = \"kac\"\nsamples = 100\nmax_kappa = 2\n"
    ))
    .unwrap();
    let b = run_experiment(&cfg);
    assert!(b.error.as_deref().unwrap().contains("kappa"));
    assert!(b.tables.is_empty());
}
