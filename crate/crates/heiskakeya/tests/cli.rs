use std::path::Path;
use std::process::Command as Proc;

use heiskakeya::cli::{execute, parse_config, Command, ConfigError, FamilySource, ParseFailure, SetSource};
use heiskakeya::formats::{load_family, load_ifs};
use heiskakeya_core::dimest::{Metric, ScaleLadder};
use heiskakeya_core::setgen::{IfsSpec, Placement, PrimitiveKind};

fn parse(args: &[&str]) -> Result<heiskakeya::cli::RunConfig, ParseFailure> {
    parse_config(std::iter::once("heiskakeya").chain(args.iter().copied()))
}

fn config_key(args: &[&str]) -> String {
    match parse(args) {
        Err(ParseFailure::Config(e)) => e.to_string(),
        other => panic!("expected a config error, got {other:?}"),
    }
}

fn bin() -> Proc {
    let mut p = Proc::new(env!("CARGO_BIN_EXE_heiskakeya"));
    p.env_remove("HEISKAKEYA_THREADS");
    p
}

#[test]
fn dim_plane_heisenberg_uses_defaults() {
    let cfg = parse(&["dim", "--set", "plane", "--metric", "heisenberg"]).unwrap();
    assert_eq!(
        cfg.command,
        Command::Dim {
            source: SetSource::Primitive(PrimitiveKind::PlaneDisc, 1.0),
            metric: Metric::Heisenberg
        }
    );
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.stop_k, 2000);
    assert_eq!(cfg.ladder, ScaleLadder::default());
    assert_eq!(cfg.out, Path::new("dim.csv"));
}

#[test]
fn pipeline_reads_a_family_file() {
    let cfg = parse(&["pipeline", "--family", "f.json", "--c-grid", "16"]).unwrap();
    assert_eq!(
        cfg.command,
        Command::Pipeline {
            family: FamilySource::Load("f.json".into()),
            c_grid: 16
        }
    );
    let built = parse(&["pipeline"]).unwrap();
    assert_eq!(
        built.command,
        Command::Pipeline {
            family: FamilySource::Build { m: 4096, placement: Placement::Plane },
            c_grid: 9
        }
    );
}

#[test]
fn increasing_ladder_is_rejected() {
    let msg = config_key(&["dim", "--delta-min", "0.5", "--delta-max", "0.1"]);
    assert!(msg.contains("delta_min"), "{msg}");
}

#[test]
fn bad_values_name_their_key() {
    assert!(config_key(&["dim", "--size=-1"]).contains("`size`"));
    assert!(config_key(&["coarea", "--slices", "1"]).contains("`slices`"));
    assert!(config_key(&["coarea", "--alpha=-0.5"]).contains("`alpha`"));
    assert!(config_key(&["dim", "--stop-k", "0"]).contains("`stop_k`"));
    assert!(matches!(parse(&["dim", "--set", "plane", "--ifs", "CANTOR2"]), Err(ParseFailure::Clap(_))));
    assert!(matches!(parse(&["dim", "--bogus"]), Err(ParseFailure::Clap(_))));
    assert!(matches!(parse(&["dim", "--metric", "taxicab"]), Err(ParseFailure::Clap(_))));
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.json");
    std::fs::write(&conf, r#"{"seed": 7, "stop_k": 300, "metric": "euclidean", "delta_min": 0.15, "levels": 3}"#).unwrap();
    let c = conf.to_str().unwrap();

    let from_file = parse(&["dim", "--config", c]).unwrap();
    assert_eq!(from_file.seed, 7);
    assert_eq!(from_file.stop_k, 300);
    assert_eq!(from_file.ladder.deltas().len(), 3);
    assert!(matches!(from_file.command, Command::Dim { metric: Metric::Euclidean, .. }));

    let flagged = parse(&["dim", "--config", c, "--seed", "9", "--metric", "heisenberg"]).unwrap();
    assert_eq!(flagged.seed, 9);
    assert_eq!(flagged.stop_k, 300);
    assert!(matches!(flagged.command, Command::Dim { metric: Metric::Heisenberg, .. }));
}

#[test]
fn malformed_config_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.json");
    std::fs::write(&conf, r#"{"sead": 7}"#).unwrap();
    let err = config_key(&["dim", "--config", conf.to_str().unwrap()]);
    assert!(err.contains("sead"), "{err}");

    std::fs::write(&conf, r#"{"metric": "taxicab"}"#).unwrap();
    let err = config_key(&["dim", "--config", conf.to_str().unwrap()]);
    assert!(err.contains("`metric`") && err.contains("euclidean"), "{err}");

    // a source from the file conflicts with one from the flags
    std::fs::write(&conf, r#"{"ifs": "CANTOR2"}"#).unwrap();
    let err = config_key(&["dim", "--set", "plane", "--config", conf.to_str().unwrap()]);
    assert!(err.contains("`set`"), "{err}");

    match parse(&["dim", "--config", "/nonexistent/run.json"]) {
        Err(ParseFailure::Config(ConfigError::File { .. })) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn exit_codes() {
    let status = |p: &mut Proc| p.output().unwrap().status.code().unwrap();
    assert_eq!(status(bin().args(["dim", "--bogus"])), 2);
    assert_eq!(status(bin().args(["dim", "--delta-min", "0.5", "--delta-max", "0.1"])), 2);
    assert_eq!(status(bin().args(["dim", "--metric", "taxicab"])), 2);
    assert_eq!(status(bin().args(["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = bin()
        .args(["pipeline", "--family", "/nonexistent/f.json", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pipeline"));

    let o = bin()
        .env("HEISKAKEYA_THREADS", "0")
        .args(["duality", "verify", "--samples", "10", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn help_lists_commands_and_defaults() {
    let o = bin().arg("--help").output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    for cmd in ["dim", "kakeya", "duality", "marstrand", "coarea", "pipeline"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    let o = bin().args(["pipeline", "--help"]).output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("4096") && text.contains("default"), "{text}");
}

#[test]
fn summaries_carry_the_headline_number() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str], out: &str| {
        let p = d.join(out);
        let mut v = args.to_vec();
        let s = p.to_str().unwrap().to_owned();
        v.extend(["--out", &s]);
        execute(&parse(&v).unwrap()).unwrap()
    };

    let o = run(&["dim", "--set", "plane", "--metric", "heisenberg", "--delta-min", "0.106", "--stop-k", "500"], "dim.csv");
    assert!(o.summary.contains("slope="), "{}", o.summary);
    let csv = std::fs::read_to_string(d.join("dim.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("delta,count,log2_inv_delta,log2_count"));
    assert_eq!(csv.lines().count(), 5);
    assert!(d.join("dim.json").exists());

    let o = run(&["duality", "verify", "--samples", "20000"], "duality.json");
    assert!(o.summary.contains("max_residual<=1e-12"), "{}", o.summary);

    run(&["kakeya", "build", "--m", "24", "--placement", "random"], "family.json");
    let fam = d.join("family.json");
    let o = run(&["kakeya", "verify", "--family", fam.to_str().unwrap()], "verify.json");
    assert!(o.summary.contains("missing=0"), "{}", o.summary);

    run(&["coarea", "--set", "plane", "--delta-min", "0.212", "--stop-k", "200", "--slices", "4"], "coarea.csv");
    let csv = std::fs::read_to_string(d.join("coarea.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("delta,alpha,lhs,rhs,ratio,bulk_count"));

    run(&["pipeline", "--m", "64", "--c-grid", "3", "--stop-k", "200"], "pipeline.json");
    let csv = std::fs::read_to_string(d.join("pipeline.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("param,slope,r2,n_counts"));
    assert_eq!(csv.lines().count(), 4);

    // no temporary files survive the atomic writes
    for e in std::fs::read_dir(d).unwrap() {
        assert!(!e.unwrap().file_name().to_string_lossy().starts_with('.'));
    }
}

#[test]
fn built_family_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("family.json");
    let cfg = parse(&["kakeya", "build", "--m", "16", "--placement", "plane", "--out", out.to_str().unwrap()]).unwrap();
    execute(&cfg).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let fam = load_family(&text).unwrap();
    assert_eq!(fam.len(), 16);
    assert_eq!(load_family(out.to_str().unwrap()).unwrap(), fam);
    assert_eq!(heiskakeya::formats::to_json(&fam).unwrap(), text);
}

#[test]
fn family_schema_is_enforced() {
    let ok = r#"{"label":"one","codes":[{"a":0,"b":0.5,"d":0,"eps":0,"chart":"x"}]}"#;
    assert_eq!(load_family(ok).unwrap().len(), 1);
    for bad in [
        r#"{"label":"one","codes":[{"a":0,"b":0.5,"d":0,"eps":0,"chart":"z"}]}"#,
        r#"{"label":"one","codes":[{"a":0,"b":0.5,"d":0,"chart":"x"}]}"#,
        r#"{"label":"one","codes":[{"a":0,"b":0.5,"d":0,"eps":0,"chart":"x","extra":1}]}"#,
        r#"{"codes":[]}"#,
    ] {
        assert!(load_family(bad).is_err(), "{bad}");
    }
}

#[test]
fn ifs_schema_and_presets() {
    assert_eq!(load_ifs("CANTOR2").unwrap(), IfsSpec::cantor2());
    assert_eq!(load_ifs("CANTOR4").unwrap(), IfsSpec::cantor4());
    let inline = r#"{"maps":[{"ratio":0.5,"offset":[0,0,0]},{"ratio":0.5,"offset":[0.5,0,0]}],"depth":20}"#;
    let spec = load_ifs(inline).unwrap();
    assert!((spec.similarity_dimension() - 1.0).abs() < 1e-12);
    let round = serde_json::to_string(&spec).unwrap();
    assert_eq!(load_ifs(&round).unwrap(), spec);
    for bad in [
        r#"{"maps":[{"ratio":1.5,"offset":[0,0,0]}],"depth":20}"#,
        r#"{"maps":[],"depth":20}"#,
        r#"{"maps":[{"ratio":0.5,"offset":[0,0]}],"depth":20}"#,
        r#"{"maps":[{"ratio":0.5,"offset":[0,0,0]}]}"#,
    ] {
        assert!(load_ifs(bad).is_err(), "{bad}");
    }
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let runs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().join("m.csv");
            let o = bin()
                .env("HEISKAKEYA_THREADS", threads)
                .args(["marstrand", "--thetas", "6", "--delta-max", "0.01", "--delta-min", "0.0025", "--stop-k", "300", "--seed", "4", "--out"])
                .arg(&out)
                .output()
                .unwrap();
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let mut bytes = std::fs::read(&out).unwrap();
            bytes.extend(std::fs::read(out.with_extension("json")).unwrap());
            bytes
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}
