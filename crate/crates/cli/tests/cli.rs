use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn freetensor(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_freetensor"));
    cmd.args(args).env_remove("FREETENSOR_CACHE_DIR");
    if let Some(c) = cache {
        cmd.env("FREETENSOR_CACHE_DIR", c);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[test]
fn catalan_table() {
    let v = json(&freetensor(&["laws", "--family", "semicircular", "--p", "2", "--K", "6"], None));
    assert_eq!(strings(&v["moments"]), ["1/1", "0/1", "1/1", "0/1", "2/1", "0/1", "5/1"]);
    assert_eq!(v["config"]["subcommand"], "laws");
    assert_eq!(v["config"]["K"], 6);
}

#[test]
fn convolving_two_semicirculars_dilates() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let out = freetensor(&["laws", "--family", "semicircular", "--p", "4", "--K", "6", "-o", a.to_str().unwrap()], None);
    assert!(out.status.success());
    let a = a.to_str().unwrap();
    let v = json(&freetensor(&["convolve", a, a, "--p", "4"], None));
    assert_eq!(strings(&v["moments"])[4], "16/1");
    assert_eq!(strings(&v["cumulants"])[2], "2/1");
}

#[test]
fn transform_reports_identities() {
    let v = json(&freetensor(&["transform", "--family", "free-poisson", "--p", "4", "--K", "6", "--t", "2"], None));
    assert_eq!(v["functional_relation"], true);
    assert_eq!(v["cauchy"]["kg"], true);
    assert_eq!(v["cauchy"]["gk"], true);
    assert!(strings(&v["r_transform"]).iter().all(|x| x == "2/1"));
}

#[test]
fn clt_sweep_is_exact() {
    let v = json(&freetensor(&["clt", "--family", "semicircular", "--p", "4", "--K", "6", "--k", "1,4"], None));
    for row in v["rescaled"].as_array().unwrap() {
        assert_eq!(strings(&row["cumulants"]), ["1/1", "0/1", "1/1", "0/1", "0/1", "0/1", "0/1"]);
    }
    let v = json(&freetensor(&["clt", "--p", "4", "--K", "6", "--poisson-t", "1/2,100"], None));
    assert_eq!(v["cumulants_exact"], true);
}

#[test]
fn csv_has_header() {
    let out = freetensor(&["laws", "--family", "delta", "--p", "4", "--K", "2", "--t", "3", "--format", "csv"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "n,m_n,kappa_n\n0,1/1,1/1\n1,3/1,3/1\n2,18/1,0/1\n");
}

#[test]
fn exit_codes() {
    assert_eq!(freetensor(&["nonsense"], None).status.code(), Some(2));
    assert_eq!(freetensor(&["laws", "--p", "2"], None).status.code(), Some(2));
    assert_eq!(freetensor(&["laws", "--family", "delta", "--p", "3"], None).status.code(), Some(2));
    assert_eq!(freetensor(&["selftest", "--only", "99"], None).status.code(), Some(2));
    assert_eq!(freetensor(&["selftest", "--only", "1,3"], None).status.code(), Some(0));
    assert_eq!(freetensor(&["selftest", "--only", "12"], None).status.code(), Some(1));
}

#[test]
fn poset_of_a_bouquet_pair() {
    // two vertices with a self-loop each, joined by two edges
    let v = json(&freetensor(&["poset", "--cycles", "1,2,3,4;5,6,7,8", "--pairs", "1-2,3-5,4-6,7-8"], None));
    assert_eq!(v["is_melonic"], false);
    let mu: Vec<i64> = v["moebius_to_top"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
    assert_eq!(mu[0], 1);
    assert_eq!(mu.len(), v["size"].as_u64().unwrap() as usize);
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = json(&freetensor(&["enumerate", "--p", "3", "--n", "4"], None));
    let first = json(&freetensor(&["enumerate", "--p", "3", "--n", "4"], Some(dir.path())));
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let second = json(&freetensor(&["enumerate", "--p", "3", "--n", "4"], Some(dir.path())));
    assert_eq!(first["classes"], second["classes"]);
    assert_eq!(fresh["classes"], first["classes"]);
    assert_eq!(fresh["count"], 60);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let args = ["simulate", "wishart", "--p", "3", "--N", "4,6", "--trials", "8", "--seed", "11", "--n-max", "2", "-o", path.to_str().unwrap()];
        assert!(freetensor(&args, None).status.success());
        assert!(dir.path().join(format!("{name}.log")).exists());
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("out.json"), run("out.json"));
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["config"]["details"]["ensemble"]["family"], "wishart");
}

#[test]
fn wigner_ladder_approaches_the_limit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ladder.csv");
    let out = freetensor(&["simulate", "wigner", "--p", "3", "--N", "8,16,32", "--trials", "200", "--seed", "7", "--format", "csv", "-o", path.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(dir.path().join("ladder.csv.config.json").exists());
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,n,mean,stderr,variance,trials"));
    let errs: Vec<f64> = lines
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|f| f[1] == "4")
        .map(|f| (f[2].parse::<f64>().unwrap() - 3.0).abs())
        .collect();
    assert_eq!(errs.len(), 3);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}
