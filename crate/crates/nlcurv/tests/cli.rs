use std::path::Path;
use std::process::{Command, Output};

use nlcurv::config::{parse_config, ParseFailure};

fn nlcurv(args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlcurv"))
        .args(args)
        .env("NLCURV_WORKERS", workers)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn strip_times(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("wall_time_s");
            m.values_mut().for_each(strip_times);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_times),
        _ => {}
    }
}

#[test]
fn oracle_prints_the_circle_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = nlcurv(&["oracle", "circle_fmc", "--R", "1", "--s", "0.5", "--out", out], "1");
    assert_eq!(o.status.code(), Some(0));
    let line: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["quantity", "inputs", "value", "method", "error_estimate"] {
        assert!(line.get(key).is_some(), "{key}");
    }
    assert!((line["value"].as_f64().unwrap() + 3.70815).abs() < 1e-5);
    assert_eq!(report(dir.path())["result"], line);
}

#[test]
fn out_of_range_values_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["eval", "--primitive", "sphere", "--sub", "3", "--s", "1.5", "--out", out],
        vec!["eval", "--primitive", "sphere", "--no-such-flag"],
        vec!["eval", "--out", out],
    ] {
        assert_eq!(nlcurv(&args, "1").status.code(), Some(2), "{args:?}");
    }
    let o = nlcurv(&["eval", "--primitive", "sphere", "--sub", "0", "--out", out], "0");
    assert_eq!(o.status.code(), Some(2));
    let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec["kind"], "UsageError");
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 5\n[energy]\ns = 0.3\np = 3.0\n[primitive]\nkind = \"sphere\"\nsub = 1\n[scheme]\norder = \"centroid\"\n",
    )
    .unwrap();
    let c = parse_config(["nlcurv", "eval", "--config", cfg.to_str().unwrap(), "--p", "6"]).unwrap();
    assert_eq!(c.energy.p, 6.0);
    assert_eq!(c.energy.s, 0.3);
    assert_eq!(c.seed, 5);
    assert_eq!(c.primitive.as_ref().unwrap().sub, 1);
    assert_eq!(c.scheme.order, Some(nlcurv_core::QuadratureOrder::Centroid));

    // a mesh flag replaces the file's primitive
    let c = parse_config(["nlcurv", "eval", "--config", cfg.to_str().unwrap(), "--mesh", "x.off"]).unwrap();
    assert!(c.primitive.is_none());

    std::fs::write(&cfg, "[energy]\nt = 1\n").unwrap();
    assert!(matches!(
        parse_config(["nlcurv", "eval", "--config", cfg.to_str().unwrap(), "--primitive", "sphere"]),
        Err(ParseFailure::Usage(_))
    ));
}

#[test]
fn eval_report_has_the_energy_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = nlcurv(&["eval", "--primitive", "sphere", "--sub", "1", "--s", "0.5", "--p", "4", "--tangent-point", "--out", out], "2");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("eval: W = "));
    let r = report(dir.path());
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["config"]["energy"]["p"], 4.0);
    for e in ["willmore", "bending", "tangent_point"] {
        let obj = r["result"][e].as_object().unwrap();
        for key in ["energy", "s", "p", "q", "normalization", "V", "M", "scheme", "diagonal_policy", "wall_time_s"] {
            assert!(obj.contains_key(key), "{e}: {key}");
        }
    }
    assert_eq!(r["result"]["willmore"]["V"], 42);
    assert_eq!(r["result"]["willmore"]["scheme"], "gauss3");
    assert_eq!(r["result"]["willmore"]["diagonal_policy"], "skip_vertex_star");
}

#[test]
fn reports_do_not_depend_on_workers() {
    let mut reports = Vec::new();
    // the output path is part of the embedded config, so both runs share it
    let dir = tempfile::tempdir().unwrap();
    for workers in ["1", "4"] {
        let out = dir.path().to_str().unwrap();
        let args = ["eval", "--primitive", "perturbed_sphere", "--sub", "2", "--amp", "0.1", "--seed", "3", "--pointwise", "--out", out];
        assert_eq!(nlcurv(&args, workers).status.code(), Some(0));
        let mut r = report(dir.path());
        strip_times(&mut r);
        reports.push(serde_json::to_string(&r).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn non_manifold_input_gives_an_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("open.off");
    std::fs::write(&mesh, "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 3 2\n").unwrap();
    let out = dir.path().join("out");
    let o = nlcurv(&["eval", "--mesh", mesh.to_str().unwrap(), "--out", out.to_str().unwrap()], "1");
    assert_eq!(o.status.code(), Some(1));
    let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec["kind"], "NonManifoldError");
}

#[test]
fn flow_writes_trajectory_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "flow", "--primitive", "perturbed_sphere", "--sub", "1", "--amp", "0.05", "--seed", "3", "--max-iter", "4",
        "--snapshot-every", "2", "--out", out,
    ];
    let o = nlcurv(&args, "4");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("subcritical"));

    let mut rdr = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["iteration", "energy", "area", "grad_norm", "hausdorff"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1]);
        assert!((w[1][2] - 1.0).abs() < 1e-10);
    }
    for it in [0, 2, 4] {
        let snap = dir.path().join(format!("snapshots/iter_{it:05}.off"));
        assert_eq!(nlcurv::io::load_mesh(&snap).unwrap().num_vertices(), 42);
    }
    let r = report(dir.path());
    assert_eq!(r["result"]["iterations"], 4);
    assert!(r["warnings"][0].as_str().unwrap().contains("subcritical"));
}

#[test]
fn every_probe_runs() {
    for (kind, extra) in [
        ("ahlfors", vec!["--radii", "0.05,0.1"]),
        ("chordarc", vec!["--sources", "8"]),
        ("patch", vec!["--vertex", "3", "--all-vertices"]),
        ("stability", vec![]),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let mut args = vec!["probe", kind, "--primitive", "sphere", "--sub", "2", "--out", out];
        args.extend(extra);
        let o = nlcurv(&args, "2");
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(report(dir.path())["config"]["probe"]["kind"], kind);
    }
}

#[test]
fn sobolev_reports_the_embedding_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = nlcurv(&["sobolev", "--primitive", "sphere", "--sub", "2", "--field", "zonal", "--out", out], "2");
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["result"]["lq_star"]["q"], 4.0);
    assert!(r["result"]["seminorm"]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(r["result"]["seminorm"]["kind"], "sobolev");
}
