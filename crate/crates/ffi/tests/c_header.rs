//! Compiles and runs a small C program against the generated header and
//! the static library. Skipped when no C compiler is on the path.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "burgers2d.h"

int main(void) {
    B2dCurve *c = NULL;
    if (b2d_curve_line(1.0, 0.0, &c) != B2D_STATUS_HYPERBOLICITY_VIOLATED) return 1;
    if (b2d_curve_mollified_polyline(-0.2, 0.0, 0.2, 0.0, 2.0, &c) != B2D_STATUS_OK) return 2;
    B2dRiemann *r = NULL;
    if (b2d_riemann_new(-1.0, 1.0, c, &r) != B2D_STATUS_OK) return 3;
    double u = 0.0;
    if (b2d_rarefaction_eval(r, 4.0, 0.0, -10.0, &u) != B2D_STATUS_OK || u != -1.0) return 4;
    B2dCoefficients k;
    if (b2d_coefficients(c, 0.3, &k) != B2D_STATUS_OK) return 5;
    printf("%.12f\n", k.a * k.a - 8.0 * k.k);
    b2d_riemann_free(r);
    b2d_curve_free(c);
    return 0;
}
"#;

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libburgers2d_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let value: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((value + 4.0).abs() < 1e-12);
}
