//! Report renderings: aligned text for people, sectioned CSV that reads back
//! losslessly, and JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use renewcast_core::diffusion::{DiffusionParams, Envelope, PolicyIntensity, RequiredFactor, ScenarioBounds};
use renewcast_core::scenario::{ScenarioCurve, ScenarioKind, ScenarioReport, TargetGap};
use renewcast_core::TargetKind;

use crate::document::{ReportDocument, SCHEMA_VERSION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

pub fn emit(doc: &ReportDocument, format: Format) -> String {
    match format {
        Format::Table => table_text(&doc.report),
        Format::Csv => to_csv(doc),
        Format::Json => doc.to_json(),
    }
}

fn envelope_note(f: &RequiredFactor) -> &'static str {
    match f.envelope {
        Envelope::Within => "",
        Envelope::AboveOptimal => "  OUT OF ENVELOPE: above optimal",
        Envelope::BelowBaseline => "  below baseline effort",
        Envelope::Unreachable => "  OUT OF ENVELOPE: needs a ceiling above optimal",
    }
}

pub fn gap_text(gap: &TargetGap, unit: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Gap at horizon");
    let _ = writeln!(s, "  target      {:>14.3} {unit}", gap.target_value);
    let _ = writeln!(s, "  predicted   {:>14.3} {unit}", gap.predicted_value);
    let _ = writeln!(s, "  shortfall   {:>14.3} {unit}", gap.shortfall);
    let _ = writeln!(s, "  target share {:.6}  ceiling {:.6}", gap.target_share, gap.ceiling);
    let _ = writeln!(
        s,
        "  required p {:.6}  f_p {:.4}{}",
        gap.required_p,
        gap.required_f_p.value,
        envelope_note(&gap.required_f_p)
    );
    if let Some(f_c) = &gap.required_f_c {
        let _ = writeln!(s, "  required f_c {:.4}{}", f_c.value, envelope_note(f_c));
    }
    s
}

pub fn table_text(r: &ScenarioReport) -> String {
    let unit = r.target.unit();
    let mut s = String::new();
    let _ = writeln!(s, "Scenario report: {} {} ({unit})", r.region, r.target);
    let _ = writeln!(
        s,
        "policy start {}  horizon {}  anchor share {:.6}",
        r.policy_start, r.horizon, r.anchor_share
    );
    let _ = write!(s, "intensity f_c {:.3}  f_p {:.3}", r.intensity.f_c, r.intensity.f_p);
    match &r.intensity.source {
        Some(src) => {
            let _ = writeln!(s, "  [{src}]");
        }
        None => s.push('\n'),
    }
    let b = &r.bounds;
    let _ = writeln!(
        s,
        "bounds c_base {:.3}  c_op {:.3}  p_base {:.4}  p_op {:.4}",
        b.c_base, b.c_op, b.p_base, b.p_op
    );
    s.push('\n');
    let _ = writeln!(s, "{:<9} {:>8} {:>8} {:>9}", "scenario", "c", "p", "t0");
    for kind in ScenarioKind::ALL {
        let p = &r.curve(kind).params;
        let _ = writeln!(s, "{:<9} {:>8.4} {:>8.5} {:>9.4}", kind.as_str(), p.c, p.p, p.t0);
    }
    s.push('\n');
    let _ = writeln!(
        s,
        "{:<5} {:>12} {:>12} {:>12} {:>12} {:>12} {:>8} {:>8} {:>8}",
        "year", "total", "ann", "baseline", "policy", "optimal", "s_base", "s_pol", "s_opt"
    );
    for i in 0..r.years.len() {
        let ann = r.ann[i].map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            s,
            "{:<5} {:>12.3} {:>12} {:>12.3} {:>12.3} {:>12.3} {:>8.4} {:>8.4} {:>8.4}",
            r.years[i],
            r.totals[i],
            ann,
            r.baseline.values[i],
            r.policy.values[i],
            r.optimal.values[i],
            r.baseline.shares[i],
            r.policy.shares[i],
            r.optimal.shares[i]
        );
    }
    if let Some(gap) = &r.gap {
        s.push('\n');
        s.push_str(&gap_text(gap, unit));
    }
    s
}

const COLUMNS: [&str; 10] = [
    "year",
    "total",
    "ann",
    "baseline_share",
    "policy_share",
    "optimal_share",
    "baseline",
    "policy",
    "optimal",
    "",
];

fn envelope_str(e: Envelope) -> &'static str {
    match e {
        Envelope::Within => "within",
        Envelope::AboveOptimal => "above_optimal",
        Envelope::BelowBaseline => "below_baseline",
        Envelope::Unreachable => "unreachable",
    }
}

fn parse_envelope(s: &str) -> Option<Envelope> {
    Some(match s {
        "within" => Envelope::Within,
        "above_optimal" => Envelope::AboveOptimal,
        "below_baseline" => Envelope::BelowBaseline,
        "unreachable" => Envelope::Unreachable,
        _ => return None,
    })
}

pub fn to_csv(doc: &ReportDocument) -> String {
    let r = &doc.report;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let mut put = |fields: Vec<String>| w.write_record(&fields).expect("in-memory write");
    let kv = |section: &str, key: &str, value: String| vec![section.to_string(), key.to_string(), value];

    put(kv("meta", "schema_version", doc.schema_version.to_string()));
    put(kv("meta", "region", r.region.clone()));
    put(kv("meta", "target", r.target.code().into()));
    put(kv("meta", "policy_start", r.policy_start.to_string()));
    put(kv("meta", "horizon", r.horizon.to_string()));
    put(kv("meta", "anchor_share", r.anchor_share.to_string()));
    put(kv("bounds", "c_base", r.bounds.c_base.to_string()));
    put(kv("bounds", "c_op", r.bounds.c_op.to_string()));
    put(kv("bounds", "p_base", r.bounds.p_base.to_string()));
    put(kv("bounds", "p_op", r.bounds.p_op.to_string()));
    put(kv("intensity", "f_c", r.intensity.f_c.to_string()));
    put(kv("intensity", "f_p", r.intensity.f_p.to_string()));
    if let Some(src) = &r.intensity.source {
        put(kv("intensity", "source", src.clone()));
    }
    for kind in ScenarioKind::ALL {
        let p = &r.curve(kind).params;
        put(vec![
            "params".into(),
            kind.as_str().into(),
            p.c.to_string(),
            p.p.to_string(),
            p.t0.to_string(),
        ]);
    }
    let mut header = vec!["columns".to_string()];
    header.extend(COLUMNS[..9].iter().map(|s| s.to_string()));
    put(header);
    for i in 0..r.years.len() {
        put(vec![
            "row".into(),
            r.years[i].to_string(),
            r.totals[i].to_string(),
            r.ann[i].map(|v| v.to_string()).unwrap_or_default(),
            r.baseline.shares[i].to_string(),
            r.policy.shares[i].to_string(),
            r.optimal.shares[i].to_string(),
            r.baseline.values[i].to_string(),
            r.policy.values[i].to_string(),
            r.optimal.values[i].to_string(),
        ]);
    }
    if let Some(g) = &r.gap {
        put(kv("gap", "target_value", g.target_value.to_string()));
        put(kv("gap", "predicted_value", g.predicted_value.to_string()));
        put(kv("gap", "shortfall", g.shortfall.to_string()));
        put(kv("gap", "target_share", g.target_share.to_string()));
        put(kv("gap", "ceiling", g.ceiling.to_string()));
        put(kv("gap", "required_p", g.required_p.to_string()));
        let factor = |name: &str, f: &RequiredFactor| {
            vec![
                "gap".into(),
                name.into(),
                f.value.to_string(),
                envelope_str(f.envelope).into(),
            ]
        };
        put(factor("required_f_p", &g.required_f_p));
        if let Some(f) = &g.required_f_c {
            put(factor("required_f_c", f));
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

struct Rows {
    records: Vec<(usize, Vec<String>)>,
    pos: usize,
}

fn bad(line: usize, what: impl std::fmt::Display) -> Error {
    Error::parse("report csv", format!("line {line}: {what}"))
}

fn num<T: FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(line, format!("cannot parse {s:?}")))
}

impl Rows {
    fn peek(&self) -> Option<&(usize, Vec<String>)> {
        self.records.get(self.pos)
    }

    fn next_kv(&mut self, section: &str, key: &str) -> Result<(usize, Vec<String>)> {
        let (line, rec) = self
            .records
            .get(self.pos)
            .cloned()
            .ok_or_else(|| bad(0, format!("missing {section}.{key}")))?;
        if rec.len() < 3 || rec[0] != section || rec[1] != key {
            return Err(bad(line, format!("expected {section}.{key}")));
        }
        self.pos += 1;
        Ok((line, rec[2..].to_vec()))
    }

    fn value<T: FromStr>(&mut self, section: &str, key: &str) -> Result<T> {
        let (line, v) = self.next_kv(section, key)?;
        if v.len() != 1 {
            return Err(bad(line, format!("{section}.{key} takes one value")));
        }
        num(line, &v[0])
    }

    fn is_next(&self, section: &str, key: &str) -> bool {
        self.peek()
            .is_some_and(|(_, r)| r.len() >= 2 && r[0] == section && r[1] == key)
    }
}

/// Reads a report written by [`to_csv`].
pub fn from_csv(text: &str) -> Result<ReportDocument> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse("report csv", e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec.iter().map(str::to_string).collect::<Vec<_>>()));
    }
    let mut rows = Rows { records, pos: 0 };

    let schema_version: u32 = rows.value("meta", "schema_version")?;
    if schema_version != SCHEMA_VERSION {
        return Err(bad(1, format!("unsupported schema_version {schema_version}")));
    }
    let region: String = rows.value("meta", "region")?;
    let (line, code) = rows.next_kv("meta", "target")?;
    let target = code
        .first()
        .and_then(|c| TargetKind::from_code(c))
        .ok_or_else(|| bad(line, "unknown target"))?;
    let policy_start: i32 = rows.value("meta", "policy_start")?;
    let horizon: i32 = rows.value("meta", "horizon")?;
    let anchor_share: f64 = rows.value("meta", "anchor_share")?;
    let bounds = ScenarioBounds {
        target,
        c_base: rows.value("bounds", "c_base")?,
        c_op: rows.value("bounds", "c_op")?,
        p_base: rows.value("bounds", "p_base")?,
        p_op: rows.value("bounds", "p_op")?,
    };
    let mut intensity = PolicyIntensity {
        f_c: rows.value("intensity", "f_c")?,
        f_p: rows.value("intensity", "f_p")?,
        source: None,
    };
    if rows.is_next("intensity", "source") {
        intensity.source = Some(rows.value("intensity", "source")?);
    }
    let mut params = Vec::new();
    for kind in ScenarioKind::ALL {
        let (line, v) = rows.next_kv("params", kind.as_str())?;
        if v.len() != 3 {
            return Err(bad(line, "params take c, p, t0"));
        }
        params.push(DiffusionParams {
            c: num(line, &v[0])?,
            p: num(line, &v[1])?,
            t0: num(line, &v[2])?,
        });
    }
    let (line, cols) = rows.next_kv("columns", COLUMNS[0])?;
    if cols.len() != 8 || cols.iter().zip(&COLUMNS[1..9]).any(|(a, b)| a != b) {
        return Err(bad(line, "unexpected series columns"));
    }

    let (mut years, mut totals, mut ann) = (Vec::new(), Vec::new(), Vec::new());
    let mut shares = [Vec::new(), Vec::new(), Vec::new()];
    let mut values = [Vec::new(), Vec::new(), Vec::new()];
    while let Some((line, rec)) = rows.peek().cloned() {
        if rec.first().map(String::as_str) != Some("row") {
            break;
        }
        rows.pos += 1;
        if rec.len() != 10 {
            return Err(bad(line, "series rows have 9 values"));
        }
        years.push(num(line, &rec[1])?);
        totals.push(num(line, &rec[2])?);
        ann.push(if rec[3].is_empty() {
            None
        } else {
            Some(num(line, &rec[3])?)
        });
        for k in 0..3 {
            shares[k].push(num(line, &rec[4 + k])?);
            values[k].push(num(line, &rec[7 + k])?);
        }
    }
    if years.is_empty() {
        return Err(bad(line, "no series rows"));
    }

    let gap = if rows.is_next("gap", "target_value") {
        let target_value = rows.value("gap", "target_value")?;
        let predicted_value = rows.value("gap", "predicted_value")?;
        let shortfall = rows.value("gap", "shortfall")?;
        let target_share = rows.value("gap", "target_share")?;
        let ceiling = rows.value("gap", "ceiling")?;
        let required_p = rows.value("gap", "required_p")?;
        let factor = |rows: &mut Rows, name: &str| -> Result<RequiredFactor> {
            let (line, v) = rows.next_kv("gap", name)?;
            if v.len() != 2 {
                return Err(bad(line, "factor takes value and envelope"));
            }
            let envelope = parse_envelope(&v[1]).ok_or_else(|| bad(line, "unknown envelope"))?;
            Ok(RequiredFactor {
                value: num(line, &v[0])?,
                envelope,
            })
        };
        let required_f_p = factor(&mut rows, "required_f_p")?;
        let required_f_c = if rows.is_next("gap", "required_f_c") {
            Some(factor(&mut rows, "required_f_c")?)
        } else {
            None
        };
        Some(TargetGap {
            target_value,
            predicted_value,
            shortfall,
            target_share,
            ceiling,
            required_p,
            required_f_p,
            required_f_c,
        })
    } else {
        None
    };
    if let Some((line, _)) = rows.peek() {
        return Err(bad(*line, "unexpected trailing record"));
    }

    let [bs, ps, os] = shares;
    let [bv, pv, ov] = values;
    let curve = |params: DiffusionParams, shares, values| ScenarioCurve { params, shares, values };
    Ok(ReportDocument {
        schema_version,
        report: ScenarioReport {
            region,
            target,
            policy_start,
            horizon,
            bounds,
            intensity,
            anchor_share,
            years,
            totals,
            ann,
            baseline: curve(params[0], bs, bv),
            policy: curve(params[1], ps, pv),
            optimal: curve(params[2], os, ov),
            gap,
        },
    })
}
