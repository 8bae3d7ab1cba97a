//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// `target/<profile>`, two levels above the test executable.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/ldp_osc.h")).unwrap();
    for sym in [
        "typedef struct LdpMethod LdpMethod;",
        "ldp_method_from_selector",
        "ldp_method_from_text",
        "ldp_method_free",
        "ldp_rate",
        "ldp_law",
        "ldp_interval_log_probability",
        "ldp_last_error_message",
        "LDP_STATUS_OK = 0",
        "LDP_OBSERVABLE_MEAN_VELOCITY = 1",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}

#[test]
fn c_program_links_and_runs() {
    // `cargo test` leaves the archive in deps/; `cargo build` also copies it up
    let dir = profile_dir();
    let lib = [dir.join("deps/libldp_osc_ffi.a"), dir.join("libldp_osc_ffi.a")]
        .into_iter()
        .find(|p| p.exists())
        .unwrap_or_else(|| panic!("static library not found under {}", dir.display()));
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success(), "compiling the C smoke test failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "smoke test exited with {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).ends_with("ok\n"));
}
