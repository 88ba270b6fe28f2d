fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR is set");
    let enumeration = cbindgen::EnumConfig {
        prefix_with_name: true,
        ..Default::default()
    };
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        cpp_compat: true,
        include_guard: Some("SEQTREE_H".into()),
        documentation: true,
        enumeration,
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen header generation")
        .write_to_file(format!("{crate_dir}/include/seqtree.h"));
    println!("cargo:rerun-if-changed=src/lib.rs");
}
