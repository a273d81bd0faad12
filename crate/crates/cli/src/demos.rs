//! Ready-made configurations for `critlab demo`.

pub const DEMOS: &[(&str, &str)] = &[
    (
        "orbit",
        r#"schema = 1

[system]
maps = ["T2", "T4"]
p = [0.4, 0.6]
seed = 2

[experiment]
kind = "orbit-trace"
steps = 500
"#,
    ),
    (
        "density",
        r#"schema = 1

[system]
maps = ["T4", "T2"]
p = [0.6, 0.4]
seed = 1

[experiment]
kind = "ulam-density"
resolution = 4096
"#,
    ),
    (
        "lq-sweep",
        r#"schema = 1

[system]
maps = ["T4", "mobius0.5"]
p = [0.6, 0.4]
seed = 1

[experiment]
kind = "lq-sweep"
resolutions = [256, 1024, 4096, 16384]
q = [1.5, 2.0]
"#,
    ),
    (
        "phase-scan",
        r#"schema = 1

[system]
maps = ["T4", "T2"]
p = [0.5, 0.5]
seed = 5

[experiment]
kind = "phase-scan"
p2 = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
steps = 1000000
samples = 2000
cap = 100000
"#,
    ),
    (
        "kac",
        r#"schema = 1

[system]
maps = ["T4", "T2"]
p = [0.6, 0.4]
seed = 21

[experiment]
kind = "kac"
samples = 20000
"#,
    ),
    (
        "continuity",
        r#"schema = 1

[system]
maps = ["T4", "T2"]
p = [0.5, 0.5]
seed = 1

[experiment]
kind = "continuity"
resolution = 4096
p2 = [0.0, 0.25, 0.375, 0.4375, 0.46875, 0.484375, 1.0, 0.75, 0.625, 0.5625, 0.53125, 0.515625]
"#,
    ),
    (
        "bounds",
        r#"schema = 1

[system]
maps = ["T4", "T2"]
p = [0.6, 0.4]
seed = 1

[experiment]
kind = "bounds-check"
resolution = 16384
"#,
    ),
    (
        "inducing",
        r#"schema = 1

[system]
maps = ["T4", "T2"]
p = [0.6, 0.4]
seed = 9

[experiment]
kind = "inducing-report"
max_kappa = 8
"#,
    ),
];

pub fn demo(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
