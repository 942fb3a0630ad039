//! CSV emission and the regret CSV reader used by offline slope fits.
//!
//! Every CSV starts with the schema line `# semr-lab v1`. Floats use Rust's
//! shortest round-trip exponent form, so files are byte-stable.

use std::collections::BTreeMap;

use super::sweep::SweepRow;
use crate::bounds::{BoundCertificate, ConcentrationTrial};
use crate::error::{Error, Result};
use crate::lowerbound::LowerBoundVerdict;

pub const SCHEMA_LINE: &str = "# semr-lab v1";

pub fn float(x: f64) -> String {
    format!("{x:e}")
}

fn finish(records: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in records {
        w.write_record(&r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| Error::Csv(e.to_string()))?;
    Ok(format!("{SCHEMA_LINE}\n{body}"))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let k = rows.first().map_or(0, |r| r.report.mean_counts.len());
    let mut head = header(&[
        "n",
        "policy",
        "replications",
        "count_based_regret",
        "count_based_se",
        "mse_based_regret",
        "mse_based_se",
        "r_i",
        "r_thetatilde",
        "r_thetatilde_se",
        "dec1_second_term",
    ]);
    head.extend((1..=k).map(|i| format!("mean_count_{i}")));
    let mut records = vec![head];
    for row in rows {
        let r = &row.report;
        let mut rec = vec![
            r.n.to_string(),
            row.policy.clone(),
            r.replications.to_string(),
            float(r.count_based_regret.mean),
            float(r.count_based_regret.se),
            float(r.mse_based_regret.mean),
            float(r.mse_based_regret.se),
            float(r.r_i),
            float(r.r_thetatilde.mean),
            float(r.r_thetatilde.se),
            float(r.dec1_second_term),
        ];
        rec.extend(r.mean_counts.iter().map(|&c| float(c)));
        records.push(rec);
    }
    finish(records)
}

pub fn concentration_csv(cells: &[(String, ConcentrationTrial)]) -> Result<String> {
    let mut records = vec![header(&["sigma", "m", "epsilon", "trials", "empirical", "bound", "se", "pass"])];
    for (label, c) in cells {
        records.push(vec![
            label.clone(),
            c.m.to_string(),
            float(c.epsilon),
            c.trials.to_string(),
            float(c.empirical_tail),
            float(c.bound),
            float(c.se),
            c.pass.to_string(),
        ]);
    }
    finish(records)
}

pub fn certificate_csv(certs: &[BoundCertificate]) -> Result<String> {
    let mut records = vec![header(&[
        "n",
        "arm",
        "gap",
        "u",
        "eta",
        "c_d",
        "predicted_bound",
        "empirical_mean",
        "empirical_se",
        "pass",
    ])];
    for c in certs {
        records.push(vec![
            c.n.to_string(),
            (c.arm + 1).to_string(),
            float(c.gap),
            float(c.u),
            float(c.eta),
            float(c.c_d),
            float(c.predicted_bound),
            float(c.empirical_mean),
            float(c.empirical_se),
            c.pass.to_string(),
        ]);
    }
    finish(records)
}

pub fn lowerbound_csv(verdicts: &[LowerBoundVerdict]) -> Result<String> {
    let mut records = vec![header(&[
        "n",
        "k",
        "policy",
        "h",
        "r_nu",
        "r_nu_prime",
        "sum",
        "se",
        "threshold",
        "pass",
        "c2",
        "c3",
        "floor",
        "realized_max_r_i",
        "floor_pass",
        "bh_p",
        "bh_q",
        "bh_kl",
        "bh_threshold",
        "bh_pass",
    ])];
    for v in verdicts {
        records.push(vec![
            v.n.to_string(),
            v.k.to_string(),
            v.policy.clone(),
            (v.h + 1).to_string(),
            float(v.r_nu.mean),
            float(v.r_nu_prime.mean),
            float(v.sum),
            float(v.se),
            float(v.threshold),
            v.pass.to_string(),
            float(v.c2),
            float(v.c3),
            float(v.floor),
            float(v.realized_r_i_nu.max(v.realized_r_i_nu_prime)),
            v.floor_pass.to_string(),
            float(v.bh.p),
            float(v.bh.q),
            float(v.bh.kl),
            float(v.bh.threshold),
            v.bh.pass.to_string(),
        ]);
    }
    finish(records)
}

/// Reads `(n, value)` series per policy from a sweep CSV. Lines starting
/// with `#` are skipped.
pub fn read_regret_series(text: &str, column: &str) -> Result<BTreeMap<String, Vec<(usize, f64)>>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Csv(format!("missing column `{name}`")))
    };
    let (ni, pi, vi) = (find("n")?, find("policy")?, find(column)?);
    let mut out: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Csv(format!("record {}: bad {what}", line + 1));
        let n = rec[ni].parse().map_err(|_| bad("n"))?;
        let v = rec[vi].parse().map_err(|_| bad(column))?;
        out.entry(rec[pi].to_string()).or_default().push((n, v));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regret::{Estimate, RegretReport};

    fn row(n: usize, policy: &str, reg: f64) -> SweepRow {
        let e = Estimate { mean: reg, se: 0.5 * reg };
        SweepRow {
            policy: policy.into(),
            report: RegretReport {
                n,
                replications: 4,
                mean_counts: vec![n as f64 * 0.75, n as f64 * 0.25],
                count_se: vec![0.0; 2],
                count_based_regret: e,
                mse: e,
                mse_based_regret: e,
                r_i: reg,
                r_thetatilde: e,
                dec1_second_term: reg,
            },
        }
    }

    #[test]
    fn sweep_csv_round_trips_through_reader() {
        let rows = vec![row(100, "lcb", 0.125), row(100, "uniform", 0.5), row(200, "lcb", 1.0 / 3.0)];
        let text = sweep_csv(&rows).unwrap();
        assert!(text.starts_with("# semr-lab v1\nn,policy,replications,count_based_regret,"));
        assert!(text.lines().nth(1).unwrap().ends_with("mean_count_1,mean_count_2"));
        let series = read_regret_series(&text, "count_based_regret").unwrap();
        assert_eq!(series["lcb"], vec![(100, 0.125), (200, 1.0 / 3.0)]);
        assert_eq!(series["uniform"], vec![(100, 0.5)]);
        assert!(matches!(read_regret_series(&text, "nope"), Err(Error::Csv(_))));
    }

    #[test]
    fn floats_use_exponent_form() {
        assert_eq!(float(0.125), "1.25e-1");
        assert_eq!(float(0.0), "0e0");
    }
}
