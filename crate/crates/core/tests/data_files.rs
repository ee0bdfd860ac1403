//! The JSON files under `data/` stay in sync with the in-code fixtures.
//! Run with `GTODD_REGEN=1` to rewrite the short-sum files.

use std::path::PathBuf;

use gtodd::bsct::{ILPInstance, Relation};
use gtodd::fixtures::{box_series, ms3_series, unit_square_qn, unit_square_series};
use gtodd::mpa::{parse_shortsum, ShortSum};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn shortsum_files_match_fixtures() {
    let fixtures: [(&str, ShortSum); 5] = [
        ("unit_square_series", unit_square_series()),
        ("unit_square_q1", unit_square_qn(1)),
        ("unit_square_q3", unit_square_qn(3)),
        ("box_2x3_series", box_series(&[2, 3])),
        ("ms3_series", ms3_series()),
    ];
    let regen = std::env::var_os("GTODD_REGEN").is_some();
    for (name, ss) in fixtures {
        let path = data_dir().join("shortsums").join(format!("{name}.json"));
        if regen {
            std::fs::write(&path, ss.to_json() + "\n").unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_shortsum(&text).unwrap(), ss, "{name}");
    }
}

#[test]
fn knapsack_files_are_valid() {
    let dir = data_dir().join("knapsack");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.ends_with(".shortsum.json") || !name.ends_with(".json") {
            continue;
        }
        let inst: ILPInstance = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        inst.validate().unwrap();
        assert_eq!(inst.relation, Relation::Eq, "{name}");
        assert_eq!(inst.c, ILPInstance::benchmark_cost(inst.a.len()), "{name}");
        seen += 1;
    }
    assert_eq!(seen, 15);
}
