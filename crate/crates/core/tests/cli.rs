mod common;

use std::fs;
use std::process::{Command, Output};

use common::{fixture, panel_csv, tree, Fixture, COUNTRIES, SECTORS};

fn cospec(fx: &Fixture, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cospec"))
        .current_dir(fx.dir.path())
        .arg("--config")
        .arg(&fx.config)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn small() -> Fixture {
    fixture(&panel_csv(&COUNTRIES, &SECTORS, 2000..=2003, 3), "[[models]]\nname = \"overall\"\n")
}

#[test]
fn full_pipeline_writes_manifest_of_every_file() {
    let fx = small();
    for cmd in ["validate", "networks", "zscores", "panel", "report"] {
        let out = cospec(&fx, &[cmd]);
        assert!(out.status.success(), "{cmd}: {}", stderr(&out));
    }
    let manifest = fs::read_to_string(fx.path("out/manifest.csv")).unwrap();
    let listed: Vec<&str> = manifest.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let files: Vec<String> = tree(&fx.path("out")).into_iter().map(|(p, _)| p).filter(|p| p != "manifest.csv").collect();
    assert_eq!(listed, files);
    assert!(manifest.lines().skip(1).all(|l| l.split(',').nth(2).is_some_and(|h| h.len() == 64)));
}

#[test]
fn reruns_are_byte_identical() {
    let fx = small();
    let mut trees = Vec::new();
    for (out, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        for cmd in ["networks", "zscores", "panel", "report"] {
            let run = cospec(&fx, &["--out", out, "--threads", threads, cmd]);
            assert!(run.status.success(), "{}", stderr(&run));
        }
        trees.push(tree(&fx.path(out)));
    }
    assert_eq!(trees[0], trees[1]);
    assert_eq!(trees[0], trees[2]);
}

#[test]
fn one_network_file_per_year() {
    let fx = fixture(&panel_csv(&COUNTRIES, &SECTORS, 2000..=2001, 4), "");
    assert!(cospec(&fx, &["networks"]).status.success());
    let networks: Vec<String> = tree(&fx.path("out/networks"))
        .into_iter()
        .map(|(p, _)| p)
        .filter(|p| p.starts_with("network_"))
        .collect();
    assert_eq!(networks, ["network_2000.csv", "network_2001.csv"]);
}

#[test]
fn gaps_are_reported() {
    let panel = panel_csv(&COUNTRIES, &SECTORS, 2000..=2002, 5);
    // drop every row for one country-sector in 2001
    let gapped: String = panel
        .lines()
        .filter(|l| !l.starts_with("POL,D85,2001"))
        .map(|l| format!("{l}\n"))
        .collect();
    let fx = fixture(&gapped, "");
    let out = cospec(&fx, &["validate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = fs::read_to_string(fx.path("out/validation/report.txt")).unwrap();
    assert!(report.contains("POL"), "{report}");
    assert!(report.contains("2001"), "{report}");
}

#[test]
fn uniform_panel_is_complete_and_degenerate() {
    let mut panel = String::from("country,sector,year,employment,value_added_pc,gfc,ulc\n");
    for c in &COUNTRIES[..4] {
        for s in &SECTORS[..4] {
            panel.push_str(&format!("{c},{s},2000,10,1,1,1\n"));
        }
    }
    let fx = fixture(&panel, "");
    assert!(cospec(&fx, &["networks", "--samples", "50"]).status.success());
    let network = fs::read_to_string(fx.path("out/networks/network_2000.csv")).unwrap();
    assert_eq!(network.lines().skip(1).filter(|l| l.ends_with(",1")).count(), 4, "{network}");
    assert!(network.lines().skip(1).all(|l| !l.contains(",0")), "{network}");

    let out = cospec(&fx, &["zscores", "--samples", "50"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let z = fs::read_to_string(fx.path("out/zscores/zscores.csv")).unwrap();
    let rows: Vec<&str> = z.lines().skip(1).collect();
    assert!(!rows.is_empty());
    // every link is forced: zero variance everywhere, z left empty
    assert!(rows.iter().all(|r| r.ends_with(",,1") || r.ends_with(",,true")), "{z}");
}

/// Network-level overall z-score per year.
fn overall_z(fx: &Fixture, out: &str) -> Vec<f64> {
    let text = fs::read_to_string(fx.path(&format!("{out}/zscores/zscores.csv"))).unwrap();
    text.lines()
        .filter(|l| l.contains(",network,overall,"))
        .map(|l| l.split(',').nth(10).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn seeds_agree_within_monte_carlo_error() {
    let fx = fixture(&panel_csv(&COUNTRIES[..4], &SECTORS[..4], 2000..=2001, 9), "");
    let n = 4000usize;
    for (out, seed) in [("s1", "1"), ("s2", "2")] {
        let run = cospec(&fx, &["--out", out, "--seed", seed, "--samples", &n.to_string(), "zscores"]);
        assert!(run.status.success(), "{}", stderr(&run));
    }
    let (a, b) = (overall_z(&fx, "s1"), overall_z(&fx, "s2"));
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(&b) {
        assert_ne!(x, y);
        assert!((x - y).abs() < 4.0 / (n as f64).sqrt() * (1.0 + x.abs()), "{x} vs {y}");
    }
}

#[test]
fn missing_panel_is_a_data_error() {
    let fx = small();
    fs::remove_file(fx.path("panel.csv")).unwrap();
    let out = cospec(&fx, &["validate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("panel.csv"), "{}", stderr(&out));
}

#[test]
fn model_naming_an_absent_variable_fails() {
    let panel: String = panel_csv(&COUNTRIES, &SECTORS, 2000..=2003, 3)
        .lines()
        .map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string() + "\n")
        .collect();
    assert!(panel.starts_with("country,sector,year,employment,value_added_pc\n"));
    let fx = fixture(&panel, "[[models]]\nname = \"m\"\ncontrols = [\"gfc\"]\n");
    let out = cospec(&fx, &["panel"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("GFC"), "{}", stderr(&out));
}

#[test]
fn empty_sample_fails() {
    let panel: String = panel_csv(&COUNTRIES, &SECTORS, 2000..=2003, 3)
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                return format!("{l}\n");
            }
            let mut f: Vec<&str> = l.split(',').collect();
            f[4] = "";
            f.join(",") + "\n"
        })
        .collect();
    let fx = fixture(&panel, "[[models]]\nname = \"m\"\n");
    let out = cospec(&fx, &["panel"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    let fx = small();
    assert_eq!(cospec(&fx, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(cospec(&fx, &["--years", "2000", "networks"]).status.code(), Some(1));
    assert_eq!(cospec(&fx, &["--samples", "1", "zscores"]).status.code(), Some(1));
    fs::write(&fx.config, "[input]\npanel = 3\n").unwrap();
    assert_eq!(cospec(&fx, &["validate"]).status.code(), Some(1));
    fs::remove_file(&fx.config).unwrap();
    assert_eq!(cospec(&fx, &["validate"]).status.code(), Some(1));
}
