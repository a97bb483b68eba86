use std::path::{Path, PathBuf};

use paamp::geometry::{contains, intersects};
use paamp::scenario::{builtin_crossing_scenario, load_scenario, Scenario};
use paamp::Error;
use proptest::prelude::*;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/crossing4.scn")
}

#[test]
fn fixture_equals_builtin() {
    let s = load_scenario(&fixture()).unwrap();
    assert_eq!(s.agents.len(), 4);
    assert_eq!(s.regions.len(), 6);
    assert_eq!(s.obstacles.len(), 4);
    assert_eq!(s.params.steps, 12);
    assert_eq!(s, builtin_crossing_scenario());
}

#[test]
fn builtin_values() {
    let s = builtin_crossing_scenario();
    let r4 = &s.regions[4];
    assert!(contains(r4, &[0.0, 3.66], 0.0).unwrap());
    assert!(contains(r4, &[10.0, 6.33], 0.0).unwrap());
    assert!(!contains(r4, &[5.0, 3.65], 0.0).unwrap());
    assert!(!contains(r4, &[5.0, 6.34], 0.0).unwrap());
    assert_eq!((s.agents[3].start, s.agents[3].goal), ([9.0, 9.0], [1.0, 1.0]));
    for a in &s.agents {
        for b in &s.agents {
            if a.id < b.id {
                let d = (a.start[0] - b.start[0]).hypot(a.start[1] - b.start[1]);
                assert!(d >= s.params.d_min);
            }
        }
    }
}

#[test]
fn obstacles_only_touch_regions() {
    let s = builtin_crossing_scenario();
    for o in &s.obstacles {
        for r in &s.regions {
            // Closed boxes may share a face; the interiors must be disjoint.
            assert!(!intersects(&o.inflate(-1e-6), r).unwrap());
        }
    }
}

fn with_change(edit: impl FnOnce(&mut serde_json::Value)) -> Result<Scenario, Error> {
    let mut v: serde_json::Value = serde_json::from_str(&builtin_crossing_scenario().to_json_string()).unwrap();
    edit(&mut v);
    Scenario::from_json_str(&v.to_string(), Path::new("edited.scn"))
}

#[test]
fn invalid_files_are_rejected() {
    let e = with_change(|v| v["agents"][0]["start"] = serde_json::json!([11.0, 1.0])).unwrap_err();
    assert!(matches!(e, Error::Validation(_)), "{e}");
    let e = with_change(|v| v["regions"] = serde_json::json!([])).unwrap_err();
    assert!(matches!(e, Error::Validation(_)), "{e}");
    let e = with_change(|v| v["params"]["colour"] = serde_json::json!(1)).unwrap_err();
    assert!(matches!(e, Error::Parse { .. }), "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn round_trip(steps in 4usize..40, d_min in 0.1f64..3.0, alpha in 0.0f64..2.0, gap in 0.0f64..10.0, dx in -0.5f64..0.5) {
        let mut s = builtin_crossing_scenario();
        s.params.steps = steps;
        s.params.d_min = d_min;
        s.params.alpha = alpha;
        s.params.gap = gap;
        s.agents[0].start[0] += dx;
        let back = Scenario::from_json_str(&s.to_json_string(), Path::new("mem")).unwrap();
        prop_assert_eq!(back, s);
    }
}
