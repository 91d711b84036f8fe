//! CLI acceptance: identical seeds must produce byte-identical solution
//! files across independent runs.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cencon"))
}

fn run_solve(dir: &Path) {
    let status = bin()
        .args([
            "solve",
            "--n",
            "3",
            "--d",
            "2",
            "--alpha",
            "1",
            "--equal-masses",
            "--starts",
            "10",
            "--seed",
            "20240601",
            "--output",
        ])
        .arg(dir)
        .status()
        .expect("running cencon");
    assert!(status.success(), "solve failed");
}

#[test]
fn acceptance_cli_determinism() {
    let tmp = std::env::temp_dir().join(format!("cencon-det-{}", std::process::id()));
    let (a, b) = (tmp.join("a"), tmp.join("b"));
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&b).unwrap();
    run_solve(&a);
    run_solve(&b);

    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty(), "solve produced no files");
    for name in &names {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name)).unwrap();
        assert_eq!(left, right, "file {name} differs between runs");
    }
    std::fs::remove_dir_all(&tmp).ok();
    println!(
        "ACCEPTANCE PASS cli-determinism: {} files byte-identical across runs",
        names.len()
    );
}
