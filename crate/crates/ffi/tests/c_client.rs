//! Compiles a small C program against the generated header and the static
//! library. Skipped when no C compiler is on the PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "qhtree.h"

int main(void) {
    const char *schema = "{\"attributes\":[{\"name\":\"x\",\"kind\":\"numeric\"}],\"labels\":2}";
    QhtTree *tree = NULL;
    if (qht_tree_new(schema, NULL, &tree) != QHT_STATUS_OK) return 1;
    for (unsigned i = 0; i < 2000; i++) {
        unsigned label = i % 2;
        double x = label ? 0.5 + (i % 10) * 0.01 : -0.5 - (i % 10) * 0.01;
        if (qht_tree_learn(tree, &x, 1, NULL, 0, label, NULL) != QHT_STATUS_OK) return 2;
    }
    double probe = 0.7;
    uint32_t out = 0;
    if (qht_tree_predict(tree, &probe, 1, NULL, 0, &out) != QHT_STATUS_OK || out != 1) return 3;
    uint32_t bad = 0;
    if (qht_tree_learn(tree, &probe, 1, NULL, 0, 9, NULL) != QHT_STATUS_CONTRACT) return 4;
    char msg[128];
    if (qht_last_error(msg, sizeof msg, NULL) != QHT_STATUS_OK || strlen(msg) == 0) return 5;
    qht_tree_free(tree);
    (void)bad;
    printf("ok %s\n", qht_version());
    return 0;
}
"#;

fn cc() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .map(str::to_string)
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libqhtree_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C client failed to build");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C client exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
