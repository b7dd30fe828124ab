use std::process::{Command, Output};

fn ttafft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttafft"))
        .args(args)
        .env_remove("TTAFFT_PROFILE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_reports_cycles_and_verifies() {
    let o = ttafft(&["run", "--n", "1024", "--verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("cycles=5152 stalls=0"), "{out}");
    assert!(out.contains("verify=ok"));
}

#[test]
fn unsupported_size_is_a_usage_error() {
    let o = ttafft(&["run", "--n", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a supported size"));
}

#[test]
fn scheduler_off_still_matches_but_stalls() {
    let o = ttafft(&["run", "--n", "64", "--no-scheduler", "--verify"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(!out.contains("stalls=0"), "{out}");
}

#[test]
fn impulse_outputs_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.txt");
    let bin = dir.path().join("y.bin");
    let mem = dir.path().join("mem.txt");
    let trace = dir.path().join("trace.txt");
    let p = |q: &std::path::Path| q.to_str().unwrap().to_owned();
    let o = ttafft(&[
        "run", "--n", "64", "--input", "impulse", "--output", &p(&out), "--memory-dump", &p(&mem), "--trace", &p(&trace),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 64);
    assert!(text.lines().all(|l| l.ends_with(" 31 0")), "{text}");
    assert!(std::fs::read_to_string(&mem).unwrap().starts_with("0 0000001f\n"));
    let t = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(t.lines().count(), 224);
    assert!(t.starts_with("cycle 0 | bus B0: #1 -> ADD.o"));

    // A sample file fed back in gives the same run as the generator.
    let x = dir.path().join("x.txt");
    let mut lines = String::from("# impulse\n");
    for i in 0..64 {
        lines += &format!("{i} {} 0\n", if i == 0 { 16384 } else { 0 });
    }
    std::fs::write(&x, lines).unwrap();
    let o = ttafft(&["run", "--n", "64", "--input-file", &p(&x), "--output", &p(&bin), "--verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(bytes.len(), 256);
    assert_eq!(&bytes[..4], &[31, 0, 0, 0]);
}

#[test]
fn assembler_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("fft.s");
    let bin = dir.path().join("fft.bin");
    let (s, b) = (src.to_str().unwrap(), bin.to_str().unwrap());
    assert!(ttafft(&["asm", "gen", "--n", "256", "-o", s]).status.success());
    assert!(ttafft(&["asm", "assemble", s, "-o", b]).status.success());
    assert_eq!(&std::fs::read(&bin).unwrap()[..4], b"TTAF");
    let dis = stdout(&ttafft(&["asm", "disasm", b]));
    let again = std::fs::read_to_string(&src).unwrap();
    // The binary image is flat, so section directives are gone but the words agree.
    let words = |t: &str| t.lines().filter(|l| !l.starts_with('.')).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(words(&dis), words(&again));

    let o = ttafft(&["run", "--n", "256", "--program", b, "--verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("cycles=1056"));

    let enc = stdout(&ttafft(&["asm", "encode", b]));
    assert_eq!(enc.lines().count(), 33);
}

#[test]
fn assembler_reports_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.s");
    std::fs::write(&src, "nop\nB0: LSU0.r -> CMUL.t\n").unwrap();
    let o = ttafft(&["asm", "assemble", src.to_str().unwrap(), "-o", dir.path().join("x.bin").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn energy_and_comparison_table() {
    let out = stdout(&ttafft(&["energy", "--n", "1024", "--normalize", "28,0.6,16"]));
    assert!(out.contains("fft_per_mj=20916.0"), "{out}");
    assert!(out.contains("norm_fft_per_mj=3243.6"), "{out}");

    let csv = stdout(&ttafft(&["energy", "--table1", "--csv"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,raw_fft_per_mj,norm_fft_per_mj"));
    let norms: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(norms.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn zero_profile_gives_infinite_efficiency() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("zero.profile");
    std::fs::write(&prof, "# nothing costs anything\n").unwrap();
    let out = stdout(&ttafft(&["energy", "--n", "64", "--profile", prof.to_str().unwrap()]));
    assert!(out.contains("fft_per_mj=inf"), "{out}");
}

#[test]
fn lut_dump_has_every_entry() {
    let out = stdout(&ttafft(&["lutdump"]));
    assert_eq!(out.lines().count(), 2049);
    assert_eq!(out.lines().next(), Some("0 32767 0"));
}
