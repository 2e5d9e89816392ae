use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polyagglo"));
    c.env_remove("POLYAGGLO_OUT");
    c
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(out).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn value_after(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no {key:?} in {text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn agglomerate_prints_levels_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["agglomerate", "--gen", "quad:32", "--order", "2,4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let sizes: Vec<usize> = text
        .lines()
        .skip_while(|l| !l.starts_with("level"))
        .skip(1)
        .take_while(|l| !l.contains(':'))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(sizes, [1024, 256, 64, 16, 4, 1]);
    for phase in ["build_tree", "visit_hierarchy", "flag_elements"] {
        assert!(text.contains(phase));
    }
    assert!(dir.path().join("hierarchy.json").exists());
    let vtk = std::fs::read_to_string(dir.path().join("level_3.vtk")).unwrap();
    assert!(vtk.contains("SCALARS agglomerate"));

    // the written hierarchy can be reused
    let h = dir.path().join("hierarchy.json");
    let o = run(dir.path(), &["metrics", "--gen", "quad:32", "--hierarchy", h.to_str().unwrap(), "--agglomerates", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(dir.path(), &["metrics", "--gen", "quad:16", "--hierarchy", h.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_and_external_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = fixture("square_tri.msh");
    let o = run(dir.path(), &["agglomerate", "--mesh", mesh.to_str().unwrap(), "--strategy", "graph", "--parts", "16", "--no-vtk"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("    1  16"));
    assert!(!stdout(&o).contains("    2  "));

    let part = dir.path().join("parts.txt");
    std::fs::write(&part, "0\n".repeat(36) + &"1\n".repeat(36)).unwrap();
    let o = run(dir.path(), &["metrics", "--mesh", mesh.to_str().unwrap(), "--strategy", "external", "--partition", part.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("metrics_external_level1.csv").exists());

    let o = run(dir.path(), &["agglomerate", "--gen", "quad:4", "--strategy", "graph"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--parts"));
}

#[test]
fn usage_and_io_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["agglomerate", "--mesh", "/no/such/mesh.msh"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/mesh.msh"));
    assert_eq!(run(dir.path(), &["metrics", "--gen", "quad:8", "--level", "9"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["metrics", "--gen", "tri:8"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let o = run(dir.path(), &["solve", "--gen", "quad:128", "--level", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r3mg"));
}

#[test]
fn numerical_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = fixture("cube_tet.msh");
    // Q_2 on single tetrahedra is not coercive at the default penalty
    let o = run(dir.path(), &["solve", "--mesh", mesh.to_str().unwrap(), "--level", "0", "--p", "2"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("not positive definite"));
}

#[test]
fn metrics_of_sixteen_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["metrics", "--gen", "quad:32", "--agglomerates", "16"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("UF 1.0 CR 0.707107 BR 1.0 OF 1.0"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("metrics_rtree_level3.csv")).unwrap();
    assert!(csv.starts_with("agglomerate,uf,cr,br\n"));
    assert_eq!(csv.lines().count(), 1 + 16 + 4);

    let o = run(dir.path(), &["metrics", "--gen", "quad:8", "--level", "0"]);
    assert!(stdout(&o).contains("OF 1.0"));
}

#[test]
fn solve_reports_reference_errors() {
    let dir = tempfile::tempdir().unwrap();
    for (p, reference) in [(1, 1.89974e-3), (2, 2.93253e-5), (3, 3.48542e-7)] {
        let o = run(dir.path(), &["solve", "--gen", "quad:32", "--agglomerates", "256", "--p", &p.to_string()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let l2 = value_after(&stdout(&o), "l2 ");
        assert!((l2 / reference - 1.0).abs() < 0.25, "p={p}: {l2}");
    }
    assert!(dir.path().join("solution.vtk").exists());
    let o = run(dir.path(), &["solve", "--gen", "quad:32", "--agglomerates", "256", "--p", "2", "--solver", "r3mg"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((value_after(&stdout(&o), "l2 ") / 2.93253e-5 - 1.0).abs() < 0.25);
}

#[test]
fn studies_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["study", "mg-levels", "--gen", "quad:32", "--p", "1", "--levels", "2,3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("mg_levels.csv")).unwrap();
    let rows: Vec<Vec<usize>> = csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(csv.starts_with("levels,p,dofs_finest,iters_pcg,iters_plain_cg\n"));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[2], 4096);
        assert!(r[3] <= 8 && r[4] > 3 * r[3]);
    }

    let o = run(dir.path(), &["study", "h-convergence", "--gen", "quad:8", "--refinements", "3", "--degrees", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let orders = std::fs::read_to_string(dir.path().join("h_convergence_orders.csv")).unwrap();
    let l2: Vec<f64> = orders.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((l2[0] - 2.0).abs() < 0.3 && (l2[1] - 3.0).abs() < 0.3, "{l2:?}");

    let o = run(dir.path(), &["study", "p-convergence", "--gen", "quad:16", "--agglomerates", "64", "--degrees", "1,2"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("p_convergence.csv")).unwrap();
    assert!(csv.starts_with("p,dofs,l2,h1semi\n1,256,"));

    let o = run(dir.path(), &["study", "timing", "--gen", "quad:16", "--repeat", "2"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("timing.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("rtree,256,0,build_tree,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["metrics", "--gen", "pquad:12:0.3:5", "--strategy", "graph", "--parts", "9", "--seed", "3"];
    assert!(run(dir.path(), &args).status.success());
    let first = std::fs::read(dir.path().join("metrics_graph_level1.csv")).unwrap();
    assert!(run(dir.path(), &args).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("metrics_graph_level1.csv")).unwrap());
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.toml");
    let target = dir.path().join("from_config");
    std::fs::write(&cfg, format!("gen = \"quad:16\"\nagglomerates = 16\nout = {:?}\n", target.to_str().unwrap())).unwrap();
    let o = bin().args(["--config", cfg.to_str().unwrap(), "metrics", "--gen", "quad:8"]).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("16 agglomerates"));
    assert!(target.join("metrics_rtree_level2.csv").exists());

    std::fs::write(&cfg, "gen = \"quad:16\"\nflavour = 1\n").unwrap();
    let o = bin().args(["--config", cfg.to_str().unwrap(), "metrics", "--gen", "quad:8"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("flavour"));

    let env_out = dir.path().join("from_env");
    let o = bin()
        .env("POLYAGGLO_OUT", &env_out)
        .args(["agglomerate", "--gen", "quad:4", "--no-vtk"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_out.join("hierarchy.json").exists());
}
