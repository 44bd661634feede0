mod common;

use common::{fixture, read_fixture};
use renewcast::io::load_panel;
use renewcast::model_file::{load_model, model_from_json, model_id, model_to_json, save_model, ModelFileError};
use renewcast::Error;

#[test]
fn json_round_trip_is_exact() {
    let text = read_fixture("models/testland.json");
    let model = model_from_json(&text, "m").unwrap();
    assert_eq!(model_to_json(&model), text);
    let again = model_from_json(&model_to_json(&model), "m").unwrap();
    assert_eq!(again, model);
}

#[test]
fn reload_predicts_identically() {
    let model = load_model(&fixture("models/testland.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.json");
    save_model(&model, &path).unwrap();
    let copy = load_model(&path).unwrap();
    let panel = load_panel(&fixture("testland.csv"), &model.schema, None).unwrap();
    let a = model.predict_monthly(&panel).unwrap();
    let b = copy.predict_monthly(&panel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn wrong_format() {
    let text = read_fixture("models/testland.json").replacen("renewcast-model", "other", 1);
    assert!(matches!(
        model_from_json(&text, "m"),
        Err(ModelFileError::WrongFormat { found, .. }) if found == "other"
    ));
}

#[test]
fn unsupported_version() {
    let text = read_fixture("models/testland.json").replacen("\"version\": 1", "\"version\": 2", 1);
    assert!(matches!(
        model_from_json(&text, "m"),
        Err(ModelFileError::UnsupportedVersion { found: 2, .. })
    ));
}

#[test]
fn corrupt() {
    assert!(matches!(model_from_json("{", "m"), Err(ModelFileError::Corrupt { .. })));
    let text = read_fixture("models/testland.json");
    let truncated = &text[..text.len() / 2];
    assert!(matches!(
        model_from_json(truncated, "m"),
        Err(ModelFileError::Corrupt { .. })
    ));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "[]").unwrap();
    let err = load_model(&path).unwrap_err();
    assert!(matches!(err, Error::Model(ModelFileError::Corrupt { .. })), "{err:?}");
    assert!(err.to_string().contains("bad.json"));
}

#[test]
fn ids_are_file_stems() {
    assert_eq!(model_id("../models/testland.json"), "testland");
    assert_eq!(model_id("testland"), "testland");
}
