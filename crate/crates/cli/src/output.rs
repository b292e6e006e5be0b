//! JSON and CSV rendering, and atomic file output.

use std::io::Write;
use std::path::Path;

use cfid::experiments::{AlphaPoint, GridResult, TrialTable};
use cfid::ot_oracle::OracleChain;
use cfid::{MetricKind, MetricReport};
use serde::Serialize;

use crate::args::OutputFormat;
use crate::error::{CliError, Result};
use crate::TOOL_VERSION;

/// Negative slack tolerated before the ordering counts as violated.
pub const SLACK_TOL: f64 = 1e-9;

pub enum Rendered<'a> {
    Reports(&'a [MetricReport]),
    Chain {
        reports: &'a [MetricReport],
        chain: &'a OracleChain,
    },
    RandomChains {
        seed: u64,
        chains: &'a [OracleChain],
        violations: usize,
        min_slack: f64,
    },
    Synthetic(TrialTable),
    Contour(GridResult),
    Alpha {
        rho: f64,
        rhohat: f64,
        points: Vec<AlphaPoint>,
    },
}

#[derive(Serialize)]
struct Record<'a> {
    #[serde(flatten)]
    report: &'a MetricReport,
    tool_version: &'static str,
}

fn records(reports: &[MetricReport]) -> Vec<Record<'_>> {
    reports
        .iter()
        .map(|report| Record {
            report,
            tool_version: TOOL_VERSION,
        })
        .collect()
}

#[derive(Serialize)]
struct Slacks {
    cwd_minus_rwd3: f64,
    rwd3_minus_rwd: f64,
    rwd_minus_mwd: f64,
}

impl From<&OracleChain> for Slacks {
    fn from(c: &OracleChain) -> Self {
        let [a, b, d] = c.slacks();
        Slacks {
            cwd_minus_rwd3: a,
            rwd3_minus_rwd: b,
            rwd_minus_mwd: d,
        }
    }
}

#[derive(Serialize)]
struct ChainDoc<'a> {
    reports: Vec<Record<'a>>,
    slacks: Slacks,
    min_slack: f64,
    tool_version: &'static str,
}

#[derive(Serialize)]
struct RandomDoc<'a> {
    instances: usize,
    seed: u64,
    violations: usize,
    min_slack: f64,
    slack_tol: f64,
    chains: &'a [OracleChain],
    tool_version: &'static str,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    tool_version: &'static str,
}

#[derive(Serialize)]
struct AlphaDoc<'a> {
    rho: f64,
    rhohat: f64,
    points: &'a [AlphaPoint],
    tool_version: &'static str,
}

fn json<T: Serialize>(doc: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(doc).map_err(|e| CliError::Usage(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn report_rows(reports: &[MetricReport]) -> impl Iterator<Item = Vec<String>> + '_ {
    reports.iter().map(|r| {
        vec![
            r.metric.to_string(),
            num(r.value),
            r.n_samples.to_string(),
            r.dim_x.to_string(),
            r.dim_y.to_string(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            num(r.tolerances.clamp_tol),
            num(r.tolerances.pinv_eps),
            TOOL_VERSION.to_string(),
        ]
    })
}

const REPORT_HEADER: [&str; 9] = [
    "metric",
    "value",
    "n",
    "dim_x",
    "dim_y",
    "seed",
    "clamp_tol",
    "pinv_eps",
    "tool_version",
];

impl Rendered<'_> {
    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>> {
        match format {
            OutputFormat::Json => self.json(),
            OutputFormat::Csv => self.csv(),
            OutputFormat::Row => Err(CliError::Usage("--format row only applies to metrics".into())),
        }
    }

    fn json(&self) -> Result<Vec<u8>> {
        match self {
            Rendered::Reports(reports) => json(&records(reports)),
            Rendered::Chain { reports, chain } => json(&ChainDoc {
                reports: records(reports),
                slacks: Slacks::from(*chain),
                min_slack: chain.min_slack(),
                tool_version: TOOL_VERSION,
            }),
            Rendered::RandomChains {
                seed,
                chains,
                violations,
                min_slack,
            } => json(&RandomDoc {
                instances: chains.len(),
                seed: *seed,
                violations: *violations,
                min_slack: *min_slack,
                slack_tol: SLACK_TOL,
                chains,
                tool_version: TOOL_VERSION,
            }),
            Rendered::Synthetic(table) => json(&Versioned {
                body: table,
                tool_version: TOOL_VERSION,
            }),
            Rendered::Contour(grid) => json(&Versioned {
                body: grid,
                tool_version: TOOL_VERSION,
            }),
            Rendered::Alpha { rho, rhohat, points } => json(&AlphaDoc {
                rho: *rho,
                rhohat: *rhohat,
                points,
                tool_version: TOOL_VERSION,
            }),
        }
    }

    fn csv(&self) -> Result<Vec<u8>> {
        match self {
            Rendered::Reports(reports) | Rendered::Chain { reports, .. } => {
                csv_table(&REPORT_HEADER, report_rows(reports))
            }
            Rendered::RandomChains { chains, .. } => csv_table(
                &["instance", "mwd", "rwd", "rwd3", "cwd", "min_slack"],
                chains.iter().enumerate().map(|(i, c)| {
                    vec![
                        i.to_string(),
                        num(c.mwd),
                        num(c.rwd),
                        num(c.rwd3),
                        num(c.cwd),
                        num(c.min_slack()),
                    ]
                }),
            ),
            Rendered::Synthetic(table) => csv_table(
                &["trial", "estimator", "mfid", "rfid", "cfid"],
                table.series.iter().flat_map(|s| {
                    (0..s.mfid.len()).map(move |t| {
                        vec![
                            t.to_string(),
                            s.estimator.name().to_string(),
                            num(s.mfid[t]),
                            num(s.rfid[t]),
                            num(s.cfid[t]),
                        ]
                    })
                }),
            ),
            Rendered::Contour(grid) => csv_table(
                &["rho", "rhohat", "squared_diff", "rfid", "cfid"],
                grid.rho_axis.iter().enumerate().flat_map(|(i, &rho)| {
                    grid.rhohat_axis.iter().enumerate().map(move |(j, &rhohat)| {
                        vec![
                            num(rho),
                            num(rhohat),
                            num(grid.squared_diff[i][j]),
                            num(grid.rfid[i][j]),
                            num(grid.cfid[i][j]),
                        ]
                    })
                }),
            ),
            Rendered::Alpha { points, .. } => csv_table(
                &["alpha", "mfid", "rfid", "cfid"],
                points
                    .iter()
                    .map(|p| vec![num(p.alpha), num(p.mfid), num(p.rfid), num(p.cfid)]),
            ),
        }
    }
}

/// `label: mfid, rfid, cfid` with two decimals.
pub fn table_row(label: &str, reports: &[MetricReport]) -> Vec<u8> {
    let value = |kind: MetricKind| {
        reports
            .iter()
            .find(|r| r.metric == kind)
            .map_or(f64::NAN, |r| r.value)
    };
    format!(
        "{label}: {:.2}, {:.2}, {:.2}\n",
        value(MetricKind::Mfid),
        value(MetricKind::Rfid),
        value(MetricKind::Cfid)
    )
    .into_bytes()
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfid::Tolerances;

    fn report(metric: MetricKind, value: f64) -> MetricReport {
        MetricReport {
            metric,
            value,
            n_samples: 10,
            dim_x: 2,
            dim_y: 3,
            seed: Some(4),
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn json_schema_fields_in_order() {
        let reports = [report(MetricKind::Cfid, 1.5)];
        let text = String::from_utf8(Rendered::Reports(&reports).render(OutputFormat::Json).unwrap()).unwrap();
        let keys = ["\"metric\"", "\"value\"", "\"n\"", "\"dim_x\"", "\"dim_y\"", "\"seed\"", "\"tolerances\"", "\"tool_version\""];
        let positions: Vec<usize> = keys.iter().map(|k| text.find(k).expect(k)).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{text}");
        assert!(text.contains("\"CFID\""));
    }

    #[test]
    fn row_has_two_decimals_in_mfid_rfid_cfid_order() {
        let reports = [
            report(MetricKind::Cfid, 105.2349),
            report(MetricKind::Mfid, 42.8512),
            report(MetricKind::Rfid, 69.375),
        ];
        let row = String::from_utf8(table_row("BiCycle GAN", &reports)).unwrap();
        assert_eq!(row, "BiCycle GAN: 42.85, 69.38, 105.23\n");
    }

    #[test]
    fn csv_report_header() {
        let reports = [report(MetricKind::Mfid, 0.25)];
        let text = String::from_utf8(Rendered::Reports(&reports).render(OutputFormat::Csv).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), REPORT_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("MFID,0.25,10,2,3,4,"));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
