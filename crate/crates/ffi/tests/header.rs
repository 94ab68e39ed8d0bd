use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(crate_dir().join("include/nmfpool.h")).unwrap()
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for symbol in [
        "nmfpool_version",
        "nmfpool_last_error_message",
        "nmfpool_matrix_new",
        "nmfpool_matrix_free",
        "nmfpool_matrix_copy_data",
        "nmfpool_normalize_adjacency",
        "nmfpool_factorize",
        "nmfpool_coarsen",
        "nmfpool_pool_sizes",
        "nmfpool_dataset_open",
        "nmfpool_dataset_stats",
        "nmfpool_dataset_graph",
        "nmfpool_dataset_free",
    ] {
        assert!(h.contains(&format!("{symbol}(")), "{symbol} missing from header");
    }
    assert!(h.contains("typedef struct NmfpoolMatrix NmfpoolMatrix;"));
    assert!(h.contains("NMFPOOL_STATUS_OK = 0"));
    assert!(h.contains("#ifndef NMFPOOL_H"));
}

fn static_lib() -> Option<PathBuf> {
    // tests run from target/<profile>/deps/
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libnmfpool_ffi.a");
    lib.exists().then_some(lib)
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success())
    })
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (compiler(), static_lib()) else {
        eprintln!("skipping: no C compiler or static library");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(Path::new(&exe)).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
