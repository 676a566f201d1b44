//! The run ledger (one JSON object per line) and the result tables
//! derived from it: per-model mean +/- 95% CI of dev and test micro-F1,
//! in percentage points.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::summary::aggregate;
use super::StatsError;
use crate::trainer::RunRecord;

fn io_err(path: &Path, source: std::io::Error) -> StatsError {
    StatsError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write the whole ledger: one compact JSON object per line, in record
/// order. Identical record lists produce identical bytes.
pub fn write_ledger(path: &Path, records: &[RunRecord]) -> Result<(), StatsError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("ledger records serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn read_ledger(path: &Path) -> Result<Vec<RunRecord>, StatsError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| StatsError::LedgerParse {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// One result-table row: a model's runs aggregated, scores in percentage
/// points.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub model: String,
    pub runs: usize,
    pub dev_mean: f64,
    pub dev_ci: Option<f64>,
    pub test_mean: f64,
    pub test_ci: Option<f64>,
}

/// Group ledger records by model name (sorted) and aggregate.
pub fn result_table(records: &[RunRecord]) -> Vec<TableRow> {
    let mut groups: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(&r.model).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(model, rs)| {
            let dev: Vec<f64> = rs.iter().map(|r| r.dev_f1 * 100.0).collect();
            let test: Vec<f64> = rs.iter().map(|r| r.test_f1 * 100.0).collect();
            let d = aggregate(&dev).expect("non-empty group");
            let t = aggregate(&test).expect("non-empty group");
            TableRow {
                model: model.to_string(),
                runs: rs.len(),
                dev_mean: d.mean,
                dev_ci: d.half_width,
                test_mean: t.mean,
                test_ci: t.half_width,
            }
        })
        .collect()
}

fn score_cell(mean: f64, ci: Option<f64>) -> String {
    match ci {
        Some(hw) => format!("{mean:.1} ± {hw:.2}"),
        None => format!("{mean:.1} ± n/a"),
    }
}

/// Fixed-width text table; means to one decimal, half-widths to two.
pub fn render_text(rows: &[TableRow]) -> String {
    let name_w = rows
        .iter()
        .map(|r| r.model.len())
        .chain(["model".len()])
        .max()
        .unwrap();
    let mut out = format!("{:<name_w$}  {:>4}  {:<16}  {:<16}\n", "model", "runs", "dev-F1%", "test-F1%");
    for r in rows {
        out.push_str(&format!(
            "{:<name_w$}  {:>4}  {:<16}  {:<16}\n",
            r.model,
            r.runs,
            score_cell(r.dev_mean, r.dev_ci),
            score_cell(r.test_mean, r.test_ci),
        ));
    }
    out
}

/// Machine-readable CSV with full-precision values; empty CI cells for
/// single-run groups.
pub fn render_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("model,runs,dev_f1_pct,dev_ci_pct,test_f1_pct,test_ci_pct\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.model,
            r.runs,
            r.dev_mean,
            opt(r.dev_ci),
            r.test_mean,
            opt(r.test_ci),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::EpochTrace;
    use tempfile::tempdir;

    fn record(model: &str, seed: u64, dev: f64, test: f64) -> RunRecord {
        RunRecord {
            model: model.into(),
            seed,
            split_id: "standard".into(),
            best_epoch: 3,
            dev_f1: dev,
            test_f1: test,
            test_evaluations: 1,
            epochs: vec![EpochTrace { epoch: 1, lr: 5e-4, train_loss: 1.2, dev_f1: dev }],
            checkpoint: None,
        }
    }

    #[test]
    fn ledger_round_trips_and_is_byte_stable() {
        let records = vec![
            record("dag-gru-attn", 1, 0.84, 0.82),
            record("bigru", 1, 0.71, 0.70),
        ];
        let dir = tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        write_ledger(&path, &records).unwrap();
        assert_eq!(read_ledger(&path).unwrap(), records);

        let again = dir.path().join("runs2.jsonl");
        write_ledger(&again, &records).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
    }

    #[test]
    fn ledger_parse_errors_carry_line_numbers() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let good = serde_json::to_string(&record("bigru", 1, 0.7, 0.7)).unwrap();
        fs::write(&path, format!("{good}\nnot json\n")).unwrap();
        match read_ledger(&path) {
            Err(StatsError::LedgerParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert_eq!(read_ledger(&dir.path().join("missing.jsonl")).ok(), None);
    }

    #[test]
    fn table_groups_by_model_in_sorted_order() {
        let records = vec![
            record("dag-gru-attn", 1, 0.843, 0.829),
            record("bigru", 1, 0.702, 0.693),
            record("dag-gru-attn", 2, 0.851, 0.838),
            record("bigru", 2, 0.712, 0.701),
            record("dag-gru-attn", 3, 0.838, 0.822),
        ];
        let rows = result_table(&records);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].model, "bigru");
        assert_eq!(rows[1].model, "dag-gru-attn");
        assert_eq!(rows[0].runs, 2);
        assert_eq!(rows[1].runs, 3);
        assert!((rows[1].test_mean - 82.966_666).abs() < 1e-3);
        assert!(rows[1].test_ci.unwrap() > 0.0);
    }

    #[test]
    fn text_and_csv_formatting_are_stable() {
        let records = vec![
            record("dag-gru-attn", 1, 0.843, 0.821),
            record("dag-gru-attn", 2, 0.853, 0.831),
            record("bigru", 7, 0.71, 0.702),
        ];
        let rows = result_table(&records);
        let text = render_text(&rows);
        // 84.3/85.3 -> mean 84.8; t_{1,0.975} = 12.706, std = 0.7071...,
        // half-width = 12.706 * 0.5 / sqrt(2)... = 6.35.
        assert!(text.contains("dag-gru-attn"), "{text}");
        assert!(text.contains("84.8 ± 6.35"), "{text}");
        assert!(text.contains("71.0 ± n/a"), "{text}");

        // CSV keeps full precision; check it parses back to the row values.
        let csv = render_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "model,runs,dev_f1_pct,dev_ci_pct,test_f1_pct,test_ci_pct");
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "bigru");
        assert_eq!(fields[1], "1");
        assert_eq!(fields[2].parse::<f64>().unwrap(), rows[0].dev_mean);
        assert!(fields[3].is_empty(), "single runs have no CI");
        assert_eq!(fields[4].parse::<f64>().unwrap(), rows[0].test_mean);
        assert!(lines[2].starts_with("dag-gru-attn,2,"));
    }
}
