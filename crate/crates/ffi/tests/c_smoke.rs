//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "ellipse_phase.h"

int main(void) {
    EpLattice *l = NULL;
    EpComplex p1 = {1.0, 0.0}, p2 = {0.0, 1.0};
    if (ep_lattice_new(p1, p2, &l) != EP_STATUS_OK) return 1;

    EpSpec *spec = NULL;
    const char *div = "{\"zeros\": [[0.3, 0.4, 1]], \"poles\": [[0.6, 0.1, 1]]}";
    if (ep_synthesize(l, div, 1, 0, &spec) != EP_STATUS_OK) return 2;

    double alpha[2];
    if (ep_spec_params(spec, NULL, NULL, alpha) != EP_STATUS_OK) return 3;
    EpValue a, b;
    EpComplex z = {0.15, 0.8}, zp = {1.15, 0.8};
    if (ep_spec_eval(spec, z, &a) != EP_STATUS_OK || ep_spec_eval(spec, zp, &b) != EP_STATUS_OK) return 4;
    if (fabs(b.phase - a.phase) > 1e-8 || fabs(b.log_mag - a.log_mag - alpha[0]) > 1e-8) return 5;

    EpLattice *bad = NULL;
    EpComplex q = {2.0, 0.0};
    if (ep_lattice_new(p1, q, &bad) != EP_STATUS_INVALID_INPUT) return 6;
    if (strstr(ep_last_error(), "DegenerateLattice") == NULL) return 7;

    char *json = NULL;
    if (ep_spec_to_json(spec, &json) != EP_STATUS_OK || json == NULL) return 8;
    ep_string_free(json);
    ep_spec_free(spec);
    ep_lattice_free(l);
    printf("ok\n");
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libellipse_phase_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I", include])
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler (cc) is required for this test");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
