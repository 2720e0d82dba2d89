use std::path::{Path, PathBuf};

use sv_calendar::data::{ingest, DesignOptions, Ingested};

pub fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

pub fn toy() -> Ingested {
    let dir = toy_dir();
    let paths = ["jp.txt", "cn.txt", "de.txt", "us.txt"].map(|f| dir.join(f));
    ingest(
        &dir.join("prices.csv"),
        [&paths[0], &paths[1], &paths[2], &paths[3]],
        DesignOptions::default(),
    )
    .unwrap()
}

/// Hand-enumerated design for 2017-07-02 (Sunday) … 2017-07-16 with a single
/// US holiday on Tuesday 2017-07-04.
pub fn toy_expected() -> Vec<[f64; 19]> {
    //            c  Su Mo Tu Th Fr Sa | pre JP CN DE US | hol JP CN DE US | post JP CN DE US
    let sun = [1., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.];
    let mon = [1., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.];
    let tue = [1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.];
    let wed = [1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.];
    let thu = [1., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.];
    let fri = [1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.];
    let sat = [1., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.];
    let mon_pre_us = [1., 0., 1., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0.];
    let tue_hol_us = [1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0.];
    let wed_post_us = [1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 1.];
    vec![
        sun, mon_pre_us, tue_hol_us, wed_post_us, thu, fri, sat, // 07-02 … 07-08
        sun, mon, tue, wed, thu, fri, sat, // 07-09 … 07-15
        sun, // trailing 07-16
    ]
}

pub fn toy_design_matches_hand_enumeration() -> bool {
    let ing = toy();
    let expected = toy_expected();
    ing.design.values.nrows() == expected.len()
        && ing.design.values.ncols() == 19
        && expected
            .iter()
            .enumerate()
            .all(|(i, row)| ing.design.row(i) == row.to_vec())
}

