//! Acceptance criterion 10: repeated runs, including with internal
//! parallelism enabled, produce byte-identical CLI output.

use std::process::Command;

fn run_with_threads(args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_bgw"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "command {:?} failed", args);
    out.stdout
}

#[test]
fn criterion_10_byte_deterministic_output() {
    let cases: &[&[&str]] = &[
        &["tau", "--level", "7"],
        &["correlator", "--ells", "0,1,1", "--normalization", "nu"],
        &[
            "correlator",
            "--ells",
            "1,1",
            "--normalization",
            "norbury",
            "--format",
            "csv",
        ],
        &["table", "b2", "--max", "2", "--diff", "--format", "csv"],
        &["verify", "--suite", "cross", "--level", "5"],
    ];
    for args in cases {
        let reference = run_with_threads(args, "1");
        for threads in ["2", "4"] {
            let again = run_with_threads(args, threads);
            assert_eq!(
                again, reference,
                "output of {:?} differs between 1 and {} threads",
                args, threads
            );
        }
        let repeat = run_with_threads(args, "4");
        assert_eq!(
            repeat,
            run_with_threads(args, "4"),
            "repeat run differs: {:?}",
            args
        );
    }
    println!(
        "[PASS] criterion 10: CLI output is byte-identical across repeated runs and thread counts"
    );
}
