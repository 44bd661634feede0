mod common;

use common::{fixture, read_fixture};
use renewcast::io::{
    load_overrides, load_panel, load_schema, parse_overrides, parse_panel, parse_series, write_panel, write_series,
};
use renewcast::Error;
use renewcast_core::ingest::IngestError;
use renewcast_core::{TargetKind, YearMonth};

fn schema() -> renewcast_core::ingest::PanelSchema {
    load_schema(&fixture("testland_schema.json")).unwrap()
}

fn ym(y: i32, m: u8) -> YearMonth {
    YearMonth::new(y, m).unwrap()
}

#[test]
fn fixture_panel_loads() {
    let panel = load_panel(&fixture("testland.csv"), &schema(), None).unwrap();
    assert_eq!(panel.region(), "testland");
    assert_eq!(panel.len(), 144);
    assert_eq!(panel.months()[0], ym(2010, 1));
    assert_eq!(
        panel.column_ids(),
        ["GDP", "LCOE", "POP", "GRID=regulated", "GRID=liberalized"]
    );
    let cap = panel.target(TargetKind::Capacity).unwrap();
    assert_eq!(cap.len(), 12);
    assert_eq!(cap[0].year, 2010);
    assert!(panel.target(TargetKind::Production).is_none());
}

#[test]
fn region_override() {
    let panel = load_panel(&fixture("testland.csv"), &schema(), Some("Elsewhere")).unwrap();
    assert_eq!(panel.region(), "Elsewhere");
}

fn cut(lines: &[usize]) -> String {
    read_fixture("testland.csv")
        .lines()
        .enumerate()
        .filter(|(i, _)| !lines.contains(&(i + 1)))
        .map(|(_, l)| format!("{l}\n"))
        .collect()
}

#[test]
fn month_gap_reports_line() {
    // drop 2010-03 (file line 4)
    let err = parse_panel(&cut(&[4]), "gap.csv", "t", &schema()).unwrap_err();
    match &err {
        Error::Ingest {
            origin,
            source: IngestError::MonthGap { row, after, missing },
        } => {
            assert_eq!(origin, "gap.csv");
            assert_eq!(*row, Some(4));
            assert_eq!(*after, ym(2010, 2));
            assert_eq!(*missing, ym(2010, 3));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().starts_with("gap.csv: "));
}

#[test]
fn unknown_category_rejected() {
    let text = read_fixture("testland.csv").replacen("regulated", "nationalized", 1);
    let err = parse_panel(&text, "cat.csv", "t", &schema()).unwrap_err();
    assert!(
        matches!(
            err,
            Error::Ingest {
                source: IngestError::UnknownCategory { line: 2, .. },
                ..
            }
        ),
        "{err:?}"
    );
}

#[test]
fn unparseable_number_rejected() {
    let text = read_fixture("testland.csv").replacen("119.795", "12x", 1);
    let err = parse_panel(&text, "num.csv", "t", &schema()).unwrap_err();
    assert!(
        matches!(&err, Error::Ingest { source: IngestError::UnparseableCell { line: 2, column, .. }, .. } if column == "LCOE"),
        "{err:?}"
    );
}

#[test]
fn missing_column_rejected() {
    let text: String = read_fixture("testland.csv")
        .lines()
        .map(|l| {
            let mut cells: Vec<&str> = l.split(',').collect();
            cells.remove(3);
            format!("{}\n", cells.join(","))
        })
        .collect();
    let err = parse_panel(&text, "m.csv", "t", &schema()).unwrap_err();
    assert!(
        matches!(&err, Error::Ingest { source: IngestError::MissingColumn { column }, .. } if column == "POP"),
        "{err:?}"
    );
}

#[test]
fn write_panel_round_trips() {
    let schema = schema();
    let panel = load_panel(&fixture("testland.csv"), &schema, None).unwrap();
    let mut buf = Vec::new();
    write_panel(&panel, &schema, &mut buf).unwrap();
    let again = parse_panel(std::str::from_utf8(&buf).unwrap(), "again", "testland", &schema).unwrap();
    assert_eq!(again, panel);
}

#[test]
fn overrides_skip_blanks() {
    let o = parse_overrides("month,LCOE,GDP\n2022-01,80,\n2022-02,,101.5\n", "o.csv").unwrap();
    assert_eq!(o["LCOE"].len(), 1);
    assert_eq!(o["LCOE"][&ym(2022, 1)], 80.0);
    assert_eq!(o["GDP"][&ym(2022, 2)], 101.5);
    let fixture_overrides = load_overrides(&fixture("testland_overrides.csv")).unwrap();
    assert_eq!(fixture_overrides["LCOE"].len(), 108);
}

#[test]
fn overrides_errors() {
    assert!(matches!(parse_overrides("when,LCOE\n", "o"), Err(Error::Parse { .. })));
    let err = parse_overrides("month,LCOE\n2022-13,1\n", "o").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let err = parse_overrides("month,LCOE\n2022-01,abc\n", "o").unwrap_err();
    assert!(err.to_string().contains("LCOE"), "{err}");
}

#[test]
fn series_round_trip() {
    let s = parse_series("year,value\n2022,1.5\n2023,0.1\n", "s").unwrap();
    let mut buf = Vec::new();
    write_series(&s, &mut buf).unwrap();
    assert_eq!(parse_series(std::str::from_utf8(&buf).unwrap(), "s").unwrap(), s);
}

#[test]
fn series_errors() {
    assert!(parse_series("yr,value\n", "s").is_err());
    let err = parse_series("year,value\n2022,x\n", "s").unwrap_err();
    assert!(err.to_string().contains("line 2"));
    // years must increase
    assert!(parse_series("year,value\n2023,1\n2022,1\n", "s").is_err());
}

#[test]
fn missing_file_is_io() {
    let err = load_schema(&fixture("nope.json")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("nope.json"));
}
