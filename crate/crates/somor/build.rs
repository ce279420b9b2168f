fn main() {
    // LAPACK/BLAS symbols come from the system OpenBLAS. Prefer pkg-config;
    // fall back to plain -lopenblas so the build still works where only the
    // library (and no .pc file) is installed.
    if pkg_config::probe_library("openblas").is_err() {
        println!("cargo:rustc-link-lib=dylib=openblas");
    }
    println!("cargo:rerun-if-changed=build.rs");
}
