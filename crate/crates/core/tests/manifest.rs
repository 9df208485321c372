use memcap::verify::bounds::{BITS_CONSTANT, DEPTH_CONSTANT, LIMITED_BITS_CONSTANT, LIMITED_DEPTH_CONSTANT};

#[test]
fn frozen_constants_match_manifest() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/Cargo.toml")).unwrap();
    let manifest: toml::Value = toml::from_str(&text).unwrap();
    let bounds = &manifest["package"]["metadata"]["bounds"];
    let get = |k: &str| bounds[k].as_float().unwrap_or_else(|| panic!("bounds.{k} missing"));
    assert_eq!(get("depth"), DEPTH_CONSTANT);
    assert_eq!(get("bits"), BITS_CONSTANT);
    assert_eq!(get("limited_depth"), LIMITED_DEPTH_CONSTANT);
    assert_eq!(get("limited_bits"), LIMITED_BITS_CONSTANT);
}
