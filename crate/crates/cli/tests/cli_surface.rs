//! End-to-end checks of the command-line surface: file formats, row shapes,
//! aggregation arithmetic, and error behavior.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_colrand")
}

struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("colrand-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Workdir(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn run_ok(args: &[&str]) -> Output {
    let out = Command::new(bin()).args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "colrand {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(args: &[&str]) -> Output {
    let out = Command::new(bin()).args(args).output().expect("spawn");
    assert!(!out.status.success(), "colrand {args:?} unexpectedly succeeded");
    out
}

fn read_csv(path: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).expect("column exists")
}

#[test]
fn exact_method_on_a_tiny_instance_reports_zero_gap() {
    let w = Workdir::new("exact");
    run_ok(&["generate", "--family", "transportation", "--supplies", "2", "--demands", "3",
             "--seed", "3", "--out", &w.path("i.json")]);
    run_ok(&["run", "--instance", &w.path("i.json"), "--method", "exact",
             "--threads", "2", "--out", &w.path("r.csv")]);
    let rows = read_csv(&w.path("r.csv"));
    assert_eq!(rows.len(), 2);
    let (gap, status) = (column(&rows, "abs_gap"), column(&rows, "status"));
    assert_eq!(rows[1][status], "optimal");
    assert_eq!(rows[1][gap].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn cg_warm_rows_carry_their_init_provenance() {
    let w = Workdir::new("warm");
    run_ok(&["generate", "--family", "cutting-stock", "--demand-types", "6",
             "--roll-width", "60", "--seed", "2", "--out", &w.path("i.json")]);
    run_ok(&["run", "--instance", &w.path("i.json"), "--method", "cg-warm",
             "--k", "40", "--trials", "3", "--seed", "1", "--threads", "2",
             "--out", &w.path("r.csv")]);
    let rows = read_csv(&w.path("r.csv"));
    assert_eq!(rows.len(), 4);
    let (init, iters, method) = (
        column(&rows, "cg_init"),
        column(&rows, "cg_iterations"),
        column(&rows, "method"),
    );
    for row in &rows[1..] {
        assert_eq!(row[method], "cg-warm");
        assert_eq!(row[init], "cr");
        assert!(row[iters].parse::<usize>().unwrap() >= 1);
    }
}

#[test]
fn feas_and_distr_methods_emit_their_values() {
    let w = Workdir::new("fd");
    run_ok(&["generate", "--family", "transportation", "--supplies", "3", "--demands", "4",
             "--seed", "5", "--out", &w.path("i.json")]);
    // The identity-style hard case: small samples of a transportation
    // program may be infeasible, but the infeasibility value is always
    // defined and reported.
    run_ok(&["run", "--instance", &w.path("i.json"), "--method", "feas",
             "--k", "3,24", "--trials", "5", "--seed", "2", "--threads", "2",
             "--out", &w.path("f.csv")]);
    let rows = read_csv(&w.path("f.csv"));
    assert_eq!(rows.len(), 11);
    let (obj, k_col) = (column(&rows, "objective"), column(&rows, "k"));
    let mean_at = |k: &str| {
        let vals: Vec<f64> = rows[1..]
            .iter()
            .filter(|r| r[k_col] == k)
            .map(|r| r[obj].parse::<f64>().unwrap())
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    for row in &rows[1..] {
        assert!(row[obj].parse::<f64>().unwrap() >= -1e-9);
    }
    assert!(mean_at("24") <= mean_at("3") + 1e-9);

    run_ok(&["run", "--instance", &w.path("i.json"), "--method", "distr",
             "--threads", "2", "--out", &w.path("d.csv")]);
    let rows = read_csv(&w.path("d.csv"));
    assert_eq!(rows.len(), 2);
    let gap = column(&rows, "abs_gap");
    // With the default C = n box the distributional gap is nonnegative.
    assert!(rows[1][gap].parse::<f64>().unwrap() >= -1e-9);
}

#[test]
fn plotdata_aggregates_match_independent_recomputation() {
    let w = Workdir::new("plot");
    run_ok(&["generate", "--family", "covering", "--rows", "4", "--columns", "10",
             "--seed", "9", "--out", &w.path("i.json")]);
    run_ok(&["run", "--instance", &w.path("i.json"), "--method", "cr",
             "--k", "6,12,24,48", "--trials", "20", "--seed", "4", "--threads", "4",
             "--out", &w.path("r.csv")]);
    let rows = read_csv(&w.path("r.csv"));
    assert_eq!(rows.len(), 81); // 4 K values x 20 trials
    run_ok(&["plotdata", "--input", &w.path("r.csv"), "--out", &w.path("p.csv")]);
    let plot = read_csv(&w.path("p.csv"));
    assert_eq!(plot.len(), 5); // one aggregate row per K

    // Recompute one bucket's mean objective by hand.
    let (k_col, obj) = (column(&rows, "k"), column(&rows, "objective"));
    let bucket: Vec<f64> = rows[1..]
        .iter()
        .filter(|r| r[k_col] == "12" && !r[obj].is_empty())
        .map(|r| r[obj].parse().unwrap())
        .collect();
    let expected = bucket.iter().sum::<f64>() / bucket.len() as f64;
    let (pk, pmean, pn) = (
        column(&plot, "k"),
        column(&plot, "mean_objective"),
        column(&plot, "trials"),
    );
    let row = plot[1..].iter().find(|r| r[pk] == "12").unwrap();
    assert_eq!(row[pn].parse::<usize>().unwrap(), bucket.len());
    assert!((row[pmean].parse::<f64>().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn plotdata_of_an_empty_results_file_is_header_only() {
    let w = Workdir::new("empty");
    std::fs::write(
        w.path("empty.csv"),
        "schema,instance,method,scheme,k,n_r,trial,seed,status,objective,ref_objective,abs_gap,rel_gap,sampling_ms,solve_ms,cg_iterations,cg_init,columns_built,resamples\n",
    )
    .unwrap();
    run_ok(&["plotdata", "--input", &w.path("empty.csv"), "--out", &w.path("p.csv")]);
    let text = std::fs::read_to_string(w.path("p.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("schema,instance,method,scheme,k,trials"));
}

#[test]
fn bound_reports_serialize_per_kind() {
    let w = Workdir::new("bounds");
    run_ok(&["generate", "--family", "choice", "--products", "4", "--assortments", "6",
             "--seed", "1", "--out", &w.path("choice.json")]);
    run_ok(&["bound", "--instance", &w.path("choice.json"), "--kind", "lipschitz",
             "--c", "2", "--k", "400", "--delta", "0.05", "--out", &w.path("lip.json")]);
    let lip: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.path("lip.json")).unwrap()).unwrap();
    assert_eq!(lip["report"]["kind"], "lipschitz");
    let symbols = lip["report"]["symbols"].as_array().unwrap();
    let h = symbols.iter().find(|s| s["name"] == "H").unwrap();
    assert!((h["value"].as_f64().unwrap() - 7f64.sqrt()).abs() < 1e-12);
    // Rankings are a procedural family: no distributional companion.
    assert!(lip["report"]["delta_v_distr"].is_null());
    assert!(lip["report"]["total_bound"].is_null());

    run_ok(&["generate", "--family", "mdp", "--states", "3", "--actions", "4",
             "--discount", "0.9", "--seed", "2", "--out", &w.path("mdp.json")]);
    run_ok(&["bound", "--instance", &w.path("mdp.json"), "--kind", "groupwise",
             "--c", "360", "--k", "4", "--delta", "0.1", "--trials", "40",
             "--out", &w.path("grp.json")]);
    let grp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.path("grp.json")).unwrap()).unwrap();
    assert_eq!(grp["report"]["kind"], "groupwise");
    assert!(grp["report"]["total_bound"].as_f64().is_some());
    assert!(grp["violation"]["rate"].as_f64().unwrap() <= 0.1);

    run_ok(&["bound", "--instance", &w.path("mdp.json"), "--kind", "near-feasibility",
             "--c", "120", "--k", "15", "--delta", "0.2", "--trials", "40",
             "--out", &w.path("nf.json")]);
    let nf: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.path("nf.json")).unwrap()).unwrap();
    let symbols = nf["report"]["symbols"].as_array().unwrap();
    assert!(symbols.iter().any(|s| s["name"] == "v_feas_distr"));
    assert!(nf["violation"]["rate"].as_f64().unwrap() <= 0.2);

    // A-posteriori kind on an explicit family.
    run_ok(&["generate", "--family", "covering", "--rows", "4", "--columns", "9",
             "--seed", "3", "--out", &w.path("cov.json")]);
    run_ok(&["bound", "--instance", &w.path("cov.json"), "--kind", "posterior-dual",
             "--k", "9", "--seed", "8", "--out", &w.path("post.json")]);
    let post: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.path("post.json")).unwrap()).unwrap();
    let symbols = post["report"]["symbols"].as_array().unwrap();
    assert!(symbols.iter().any(|s| s["name"] == "p_inf"));
}

#[test]
fn config_errors_exit_nonzero() {
    let w = Workdir::new("errors");
    // Unknown instance file.
    run_err(&["run", "--instance", &w.path("missing.json"), "--method", "exact",
              "--out", &w.path("r.csv")]);
    // Wrong schema version.
    std::fs::write(
        w.path("bad.json"),
        r#"{"schema_version": 99, "name": "x", "seed": 0, "kind": "mdp", "params": {}}"#,
    )
    .unwrap();
    run_err(&["run", "--instance", &w.path("bad.json"), "--method", "exact",
              "--out", &w.path("r.csv")]);
    // Missing K sweep.
    run_ok(&["generate", "--family", "covering", "--rows", "3", "--columns", "6",
             "--seed", "0", "--out", &w.path("i.json")]);
    run_err(&["run", "--instance", &w.path("i.json"), "--method", "cr",
              "--out", &w.path("r.csv")]);
    // Family-specific generation flags are required.
    run_err(&["generate", "--family", "mdp", "--out", &w.path("j.json")]);
    // Infeasible trials are data, not errors.
    run_ok(&["run", "--instance", &w.path("i.json"), "--method", "cr", "--k", "1",
             "--trials", "4", "--threads", "2", "--out", &w.path("r.csv")]);
    let rows = read_csv(&w.path("r.csv"));
    let status = column(&rows, "status");
    assert!(rows[1..].iter().any(|r| r[status] == "infeasible"));
}

#[test]
fn groupwise_runs_record_rounds_and_sample_size() {
    let w = Workdir::new("grp");
    run_ok(&["generate", "--family", "mdp", "--states", "4", "--actions", "6",
             "--discount", "0.85", "--seed", "4", "--out", &w.path("i.json")]);
    run_ok(&["run", "--instance", &w.path("i.json"), "--method", "cr",
             "--scheme", "groupwise", "--n-r", "2", "--trials", "5",
             "--threads", "2", "--out", &w.path("r.csv")]);
    let rows = read_csv(&w.path("r.csv"));
    assert_eq!(rows.len(), 6);
    let (k, n_r, scheme, status) = (
        column(&rows, "k"),
        column(&rows, "n_r"),
        column(&rows, "scheme"),
        column(&rows, "status"),
    );
    for row in &rows[1..] {
        assert_eq!(row[scheme], "groupwise");
        assert_eq!(row[k], "8"); // 2 rounds x 4 groups
        assert_eq!(row[n_r], "2");
        assert_eq!(row[status], "optimal");
    }
}
