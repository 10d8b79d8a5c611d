//! End-to-end tests of the `nilspace` binary: exit codes, report
//! determinism, and the four subcommands on small fixtures.

use nilspace_core::cube::Vertex;
use nilspace_core::fixtures::{nonzero_class_table, twisted_extension_space};
use nilspace_core::host_kra::dk_space;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilspace"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, content: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const DK3: &str = "[space]\nkind = dk\nmoduli = 3\ndegree = 1\nmax-dim = 2\n";

#[test]
fn check_passes_on_a_degree_one_space() {
    let spec = write("dk3.cfg", DK3);
    let out = run(&["check", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("status = pass"));
    assert!(text.contains("space = D_1(Z/3)"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let spec = write("dk3-det.cfg", DK3);
    let a = run(&["check", "--spec", spec.to_str().unwrap(), "--seed", "7"]);
    let b = run(&["check", "--spec", spec.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    // A different seed still reports, but with a different digest line.
    let c = run(&["check", "--spec", spec.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn corrupted_table_space_fails_completion_with_witness() {
    // Two points, all edges, and the even-parity squares minus one
    // reflection-closed orbit: completion at dimension 2 must fail.
    let mut spec = String::from("[space]\nkind = table\npoints = 2\ndegree = 1\n\n[cubes]\n");
    for e in ["0,0", "0,1", "1,0", "1,1"] {
        spec.push_str(&format!("cube = {e}\n"));
    }
    for sq in ["0,0,0,0", "1,1,1,1", "0,1,0,1", "1,0,1,0", "0,0,1,1", "1,1,0,0"] {
        spec.push_str(&format!("cube = {sq}\n"));
    }
    let spec = write("broken.cfg", &spec);
    let out = run(&["check", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("pass = false"));
    assert!(text.contains("witness"));
}

#[test]
fn empty_spec_is_a_parse_error() {
    let spec = write("empty.cfg", "");
    let out = run(&["check", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn malformed_lines_report_their_line_number() {
    let spec = write("bad.cfg", "[space]\nkind = dk\nmoduli 3\n");
    let out = run(&["check", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn translations_lists_orders_and_the_commutator_law() {
    let spec = write("dk3-tr.cfg", DK3);
    let out = run(&["translations", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("[level 1]\norder = 3"));
    assert!(text.contains("[level 2]\norder = 1"));
    assert!(text.contains("commutator-law = pass"));
}

#[test]
fn enumeration_cap_gives_a_partial_report_and_exit_three() {
    let spec = write("dk3-cap.cfg", DK3);
    let out = bin()
        .args(["translations", "--spec", spec.to_str().unwrap()])
        .env("NILSPACE_ENUM_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("status = partial"));
    assert!(text.contains("cap-exceeded"));
}

#[test]
fn solve_round_trips_a_planted_coboundary() {
    // Table built in the cube enumeration order of the library itself.
    let space = dk_space(&[2], 1, 2).unwrap();
    let planted = [0u64, 1];
    let mut table = String::new();
    for (i, c) in space.cubes(2).unwrap().cubes.iter().enumerate() {
        let s: i64 = Vertex::all(2)
            .map(|v| v.sign() as i64 * planted[*c.get(v) as usize] as i64)
            .sum();
        table.push_str(&format!("{i} ;{}\n", s.rem_euclid(2)));
    }
    let spec = write(
        "solve.cfg",
        "[space]\nkind = dk\nmoduli = 2\ndegree = 1\nmax-dim = 2\n\n[solve]\norder = 2\nmoduli = 2\n",
    );
    let tab = write("planted.tab", &table);
    let out = run(&[
        "solve",
        "--spec",
        spec.to_str().unwrap(),
        "--cocycle",
        tab.to_str().unwrap(),
        "--method",
        "both",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("agree-up-to-constant = true"));
    assert!(text.contains("status = solved"));
}

#[test]
fn solve_emits_an_obstruction_certificate() {
    let (space, rhs) = nonzero_class_table().unwrap();
    let mut table = String::new();
    for (i, r) in rhs.iter().enumerate() {
        table.push_str(&format!("{i} ;{}\n", r[0]));
    }
    assert_eq!(rhs.len(), space.cubes(2).unwrap().cubes.len());
    let spec = write(
        "obstructed.cfg",
        "[space]\nkind = dk\nmoduli = 2\ndegree = 1\nmax-dim = 2\n\n[solve]\norder = 2\nmoduli = 2\n",
    );
    let tab = write("class.tab", &table);
    let out = run(&[
        "solve",
        "--spec",
        spec.to_str().unwrap(),
        "--cocycle",
        tab.to_str().unwrap(),
        "--method",
        "linear",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("status = obstructed"));
    assert!(text.contains("obstruction-modulus = 2"));
}

#[test]
fn lift_of_the_identity_on_the_heisenberg_nilmanifold() {
    let spec = write(
        "heis.cfg",
        "[space]\nkind = heisenberg-nilmanifold\nmodulus = 3\nmax-dim = 3\n\n[lift]\nk = 1\nmap = identity\n",
    );
    let out = run(&["lift", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("is-k-translation = true"));
    assert!(text.contains("pushforward-matches = true"));
    assert!(text.contains("status = lifted"));
}

#[test]
fn lift_reports_the_obstructed_base_swap() {
    // Serialize the twisted four-point extension as a table space and ask
    // for a lift of the base swap, which has none.
    let space = twisted_extension_space();
    let mut spec = String::from("[space]\nkind = table\npoints = 4\ndegree = 2\n\n[cubes]\n");
    for n in 1..=3usize {
        for c in &space.cubes(n).unwrap().cubes {
            let vals: Vec<String> = c.vals().iter().map(|v| v.to_string()).collect();
            spec.push_str(&format!("cube = {}\n", vals.join(",")));
        }
    }
    spec.push_str("\n[lift]\nk = 1\nmap = 1,0\n");
    let spec = write("twisted.cfg", &spec);
    let out = run(&["lift", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("lifted = false"));
    assert!(text.contains("status = obstructed"));
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let spec = write("dk3-out.cfg", DK3);
    let report = tmp("report.txt");
    let out = run(&[
        "check",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("status = pass"));
}
