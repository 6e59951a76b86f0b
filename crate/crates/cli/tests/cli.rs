use std::process::{Command, Output};

fn hypdpg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypdpg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').collect()
}

#[test]
fn uniform_study_to_stdout() {
    let out = hypdpg(&["--steps", "3", "--elements", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], hypdpg::study::CSV_HEADER);
    let first = fields(lines[1]);
    assert_eq!(first.len(), 11);
    assert_eq!(&first[..3], ["0", "7", "2"]);
    assert_eq!(first[9], "");
    assert_eq!(first[10], "");
    for row in &lines[1..] {
        let energy = fields(row)[8];
        let mantissa = energy.split('e').next().unwrap();
        assert!(mantissa.trim_start_matches('-').replace('.', "").len() >= 12, "{energy}");
    }
    let elements: Vec<usize> = lines[1..].iter().map(|r| fields(r)[2].parse().unwrap()).collect();
    assert_eq!(elements, [2, 4, 8]);
    assert!(!fields(lines[3])[9].is_empty());
}

#[test]
fn config_file_with_flag_override_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    let csv = dir.path().join("rows.csv");
    std::fs::write(
        &cfg,
        format!(
            "# closed square\ncurve = square:0.5\nmode = uniform\nsteps = 5\np = 0\nout = {}\n",
            csv.display()
        ),
    )
    .unwrap();
    let out = hypdpg(&["--config", cfg.to_str().unwrap(), "--steps", "2", "--mode", "adaptive", "--p", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let row = fields(lines[1]);
    assert_eq!(row[2], "16");
    assert_eq!(row[1], (16 * 2 * 2 + 16).to_string());
    assert_eq!(&row[5..8], ["", "", ""]);
    assert!(row[8].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn invalid_theta_fails_with_diagnostic() {
    let out = hypdpg(&["--theta", "1.5"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("theta"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "speed = 3\n").unwrap();
    let out = hypdpg(&["--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));

    let out = hypdpg(&["--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cfg"));

    let out = hypdpg(&["--curve", "polygon:0,0;0,1;1,0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("oriented"));

    let out = hypdpg(&["--curve", "interval:-3,0,3,0", "--steps", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity"));
}
