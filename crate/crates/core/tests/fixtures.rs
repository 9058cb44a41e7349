//! The committed example code files must stay in sync with the builder
//! that produced them. Regenerate with:
//!
//! ```text
//! QLDPC_REGEN_FIXTURES=1 cargo test -p qldpc --test fixtures
//! ```

mod common;

use std::path::PathBuf;

use qldpc::code::{alist, build_layer_cover, LayerCover, ParityCheckMatrix};

fn codes_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../codes")
}

fn expected_files() -> Vec<(PathBuf, String)> {
    let code = common::toric_code(4);
    let cover = build_layer_cover(&code.h_z, 1).unwrap();
    let mut cover_text = format!("{} {}\n", cover.iterations_covered(), cover.n_layers());
    for layer in cover.layers() {
        let line: Vec<String> = layer.iter().map(|c| c.to_string()).collect();
        cover_text.push_str(&line.join(" "));
        cover_text.push('\n');
    }
    let dir = codes_dir();
    vec![
        (dir.join("toric-l4.hx.alist"), alist::write_alist(&code.h_x)),
        (dir.join("toric-l4.hz.alist"), alist::write_alist(&code.h_z)),
        (dir.join("toric-l4.hz.layers"), cover_text),
    ]
}

#[test]
fn committed_fixtures_match_the_builder() {
    let regen = std::env::var("QLDPC_REGEN_FIXTURES").is_ok();
    for (path, expected) in expected_files() {
        if regen {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &expected).unwrap();
            continue;
        }
        let actual = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("missing fixture {path:?}: {e}"));
        assert_eq!(actual, expected, "fixture {path:?} is stale");
    }
}

#[test]
fn fixtures_load_as_a_valid_css_code() {
    let dir = codes_dir();
    let hx = ParityCheckMatrix::from_alist_file(dir.join("toric-l4.hx.alist")).unwrap();
    let hz = ParityCheckMatrix::from_alist_file(dir.join("toric-l4.hz.alist")).unwrap();
    assert_eq!((hx.n_checks(), hx.n_qubits()), (16, 32));
    assert_eq!((hz.n_checks(), hz.n_qubits()), (16, 32));
    let code = qldpc::code::CssCode::new(hx, hz).unwrap();
    assert!(qldpc::code::validate_css(&code));
    let cover = LayerCover::from_file(&code.h_z, dir.join("toric-l4.hz.layers")).unwrap();
    assert_eq!(cover.iterations_covered(), 1);
}
