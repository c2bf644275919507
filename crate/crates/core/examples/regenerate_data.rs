//! Rewrites the shipped data files from the built-in model and catalog.

fn main() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    std::fs::write(root.join("catch919.json"), catch_core::hand_model::default_catch919().to_json()).unwrap();
    std::fs::write(root.join("grasps.json"), catch_core::grasps::catalog_json(&catch_core::grasps::builtin_catalog())).unwrap();
}
