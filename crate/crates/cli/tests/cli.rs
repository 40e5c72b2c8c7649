use std::path::PathBuf;
use std::process::{Command, Output};

use msr_core::{parse_document, parse_documents, CodeDocument};

fn msrcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msrcode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn report_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next() == Some(key)).then(|| parts.collect::<Vec<_>>().join(" "))
        })
        .unwrap_or_else(|| panic!("no {key} in report:\n{text}"))
}

#[test]
fn verify_reference_codes() {
    for name in [
        "systematic_5_3_gf3.msr",
        "systematic_5_3_gf7.msr",
        "worked_4_2_gf3.msr",
    ] {
        let out = msrcode(&["verify", &fixture(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let text = stdout(&out);
        assert!(text.lines().all(|l| l.ends_with("OK")), "{text}");
        assert!(text.starts_with("independence OK\n"));
    }
}

#[test]
fn verify_reports_general_position_without_changing_exit() {
    let out = msrcode(&[
        "verify",
        "--general-position",
        &fixture("systematic_5_3_gf3.msr"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("general_position FAIL rows {"));
    let out = msrcode(&[
        "verify",
        "--general-position",
        &fixture("seed_5_3_gf17.msr"),
    ]);
    assert!(stdout(&out).contains("general_position OK"));
}

#[test]
fn verify_perturbed_code_fails() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("systematic_5_3_gf3.msr")).unwrap();
    let perturbed = text.replacen("1 1 2 0 1 2", "1 1 2 0 1 0", 1);
    assert_ne!(perturbed, text);
    let path = dir.path().join("bad.msr");
    std::fs::write(&path, perturbed).unwrap();
    let out = msrcode(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn verify_parse_errors_exit_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.msr");
    std::fs::write(
        &path,
        "msrcode 1\nfield 3 1\nparams 4 2\nform symmetric\nmatrix A 2 4\n1 0 0\n",
    )
    .unwrap();
    let out = msrcode(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));
    let missing = msrcode(&["verify", dir.path().join("nope.msr").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn verify_symmetric_and_expanded_agree() {
    let dir = tempfile::tempdir().unwrap();
    let seed =
        parse_document(&std::fs::read_to_string(fixture("seed_5_3_gf3.msr")).unwrap()).unwrap();
    let path = dir.path().join("expanded.msr");
    std::fs::write(
        &path,
        CodeDocument::Explicit(seed.to_explicit()).serialize(),
    )
    .unwrap();
    let a = msrcode(&["verify", &fixture("seed_5_3_gf3.msr")]);
    let b = msrcode(&["verify", path.to_str().unwrap()]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn search_gf3_five_three_emits_one_verified_code() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("found.msr");
    let out = msrcode(&[
        "search",
        "--n",
        "5",
        "--k",
        "3",
        "--p",
        "3",
        "--mode",
        "exhaustive",
        "--limit",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout(&out);
    assert_eq!(report_value(&report, "emitted"), "1");
    assert_ne!(report_value(&report, "codes_found"), "0");
    let docs = parse_documents(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(docs.len(), 1);
    let verify = msrcode(&["verify", out_path.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
}

#[test]
fn search_gf2_four_two_reports_codes_found() {
    let out = msrcode(&["search", "--n", "4", "--k", "2", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout(&out);
    assert_eq!(report_value(&report, "a_candidates"), "35");
    // A rotationally symmetric (4,2) code over GF(2) exists, for example
    // A = [1 0 0 0; 0 1 1 0] with B = (1 0), (1 0), (0 1).
    assert_eq!(report_value(&report, "codes_found"), "24");
}

#[test]
fn search_config_errors_exit_two() {
    assert_eq!(
        msrcode(&["search", "--n", "3", "--k", "3", "--p", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        msrcode(&["search", "--n", "4", "--k", "2", "--p", "6"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        msrcode(&["search", "--n", "4", "--k", "3", "--p", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        msrcode(&["search", "--n", "4", "--k", "2", "--p", "3", "--mode", "random"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        msrcode(&["search", "--n", "4", "--k", "2", "--p", "3", "--shard", "5/4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(msrcode(&["search", "--n", "4"]).status.code(), Some(2));
    assert_eq!(msrcode(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sharded_and_threaded_searches_sum_to_full_run() {
    let base = ["search", "--n", "4", "--k", "2", "--p", "3", "--limit", "0"];
    let full = stdout(&msrcode(&base));
    let mut independent = 0u64;
    let mut found = 0u64;
    for i in 1..=3 {
        let spec = format!("{i}/3");
        let mut args = base.to_vec();
        args.extend(["--shard", &spec]);
        let part = stdout(&msrcode(&args));
        independent += report_value(&part, "a_independent").parse::<u64>().unwrap();
        found += report_value(&part, "codes_found").parse::<u64>().unwrap();
    }
    assert_eq!(
        independent.to_string(),
        report_value(&full, "a_independent")
    );
    assert_eq!(found.to_string(), report_value(&full, "codes_found"));

    let mut threaded = base.to_vec();
    threaded.extend(["--threads", "3"]);
    let t = stdout(&msrcode(&threaded));
    for key in [
        "a_candidates",
        "a_independent",
        "y_candidates",
        "codes_found",
        "emitted",
    ] {
        assert_eq!(report_value(&t, key), report_value(&full, key), "{key}");
    }
}

#[test]
fn random_search_is_reproducible_and_records_parse() {
    let args = [
        "search",
        "--n",
        "4",
        "--k",
        "2",
        "--p",
        "7",
        "--mode",
        "random",
        "--seed",
        "9",
        "--samples",
        "30",
        "--format",
        "records",
        "--limit",
        "2",
    ];
    let a = stdout(&msrcode(&args));
    let b = stdout(&msrcode(&args));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("elapsed_ms="))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    let records = msr_core::format::parse_report_records(&a).unwrap();
    assert_eq!(records.values["seed"], "9");
    assert_eq!(records.values["a_candidates"], "30");
    assert_eq!(records.codes.len(), 2);
}

#[test]
fn systematic_transform_of_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sys.msr");
    let out = msrcode(&[
        "systematic",
        &fixture("worked_4_2_gf3.msr"),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "T =\n1 0 0 0\n0 0 1 0\n0 1 2 0\n0 2 1 1\n");
    let doc = parse_document(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let code = doc.to_explicit();
    assert_eq!(code.storage(1).row(0), &[1, 0, 0, 0]);
    assert_eq!(code.storage(1).row(1), &[0, 1, 0, 0]);

    let again = msrcode(&["systematic", out_path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert!(stdout(&again).starts_with("T =\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n"));
}

#[test]
fn systematic_rejects_dependent_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dep.msr");
    let text = std::fs::read_to_string(fixture("worked_4_2_gf3.msr"))
        .unwrap()
        .replace("1 0 0 0\n0 1 1 0", "1 0 1 0\n0 1 0 1");
    std::fs::write(&path, text).unwrap();
    let out = msrcode(&["systematic", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rate_tables() {
    let five_three = stdout(&msrcode(&["rate", "--n", "5", "--k", "3", "--M", "1"]));
    assert_eq!(report_value(&five_three, "gamma_msr"), "2/3");
    assert_eq!(report_value(&five_three, "gamma_ia"), "5/6");
    assert_eq!(report_value(&five_three, "equal"), "false");
    let four_two = stdout(&msrcode(&["rate", "--n", "4", "--k", "2", "--M", "1"]));
    assert_eq!(report_value(&four_two, "gamma_msr"), "3/4");
    assert_eq!(report_value(&four_two, "gamma_ia"), "3/4");
    let five_four = stdout(&msrcode(&["rate", "--n", "5", "--k", "4", "--M", "1"]));
    assert_eq!(report_value(&five_four, "gamma_msr"), "1");
    assert_eq!(report_value(&five_four, "equal"), "true");
    let scaled = stdout(&msrcode(&["rate", "--n", "5", "--k", "3", "--M", "6"]));
    assert_eq!(report_value(&scaled, "gamma_ia"), "5");
    assert_eq!(
        msrcode(&["rate", "--n", "3", "--k", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        msrcode(&["rate", "--n", "5", "--k", "3", "--M", "x"])
            .status
            .code(),
        Some(2)
    );
}
