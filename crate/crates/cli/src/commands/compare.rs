use std::path::PathBuf;

use btcp::report::ExperimentReport;

use crate::args::CompareArgs;
use crate::error::{usage, CliError};

use super::{find_reports, load_report};

type Extract = fn(&ExperimentReport) -> Option<f64>;

/// Column name and how to read it from a report. `au` is the mean test
/// uncertainty, `std` its standard deviation.
pub const METRICS: [(&str, Extract); 7] = [
    ("bacc", |r| r.final_metrics.failure.map(|m| m.bacc)),
    ("auroc", |r| r.final_metrics.failure.map(|m| m.auroc)),
    ("fpr", |r| r.final_metrics.failure.map(|m| m.fpr)),
    ("fnr", |r| r.final_metrics.failure.map(|m| m.fnr)),
    ("accuracy", |r| Some(r.final_metrics.test_accuracy)),
    ("au", |r| Some(r.final_metrics.uncertainty_mean)),
    ("std", |r| Some(r.final_metrics.uncertainty_std)),
];

fn metric_index(name: &str) -> Option<usize> {
    let name = if name == "auc" { "auroc" } else { name };
    METRICS.iter().position(|(n, _)| *n == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: String,
    pub reports: usize,
    /// Mean over the reports that define the metric.
    pub values: Vec<Option<f64>>,
}

/// One row per baseline mode, in order of first appearance.
pub fn comparison_rows(
    reports: &[(PathBuf, ExperimentReport)],
    metrics: &[usize],
) -> Result<Vec<ComparisonRow>, CliError> {
    let (first_path, first) = reports.first().ok_or_else(|| usage("no reports given"))?;
    let Some(dataset) = &first.dataset else {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "{} records no dataset; cannot check comparability",
            first_path.display()
        )));
    };
    for (path, r) in &reports[1..] {
        if r.dataset.as_ref() != Some(dataset) || r.test_size != first.test_size {
            return Err(CliError::Runtime(anyhow::anyhow!(
                "{} and {} were evaluated on different datasets; refusing to compare",
                first_path.display(),
                path.display()
            )));
        }
    }
    let mut methods: Vec<&str> = Vec::new();
    for (_, r) in reports {
        let m = r.config.baseline.as_str();
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    Ok(methods
        .into_iter()
        .map(|method| {
            let group: Vec<&ExperimentReport> = reports
                .iter()
                .map(|(_, r)| r)
                .filter(|r| r.config.baseline.as_str() == method)
                .collect();
            let values = metrics
                .iter()
                .map(|&i| {
                    let vals: Vec<f64> = group.iter().filter_map(|r| (METRICS[i].1)(r)).collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                })
                .collect();
            ComparisonRow {
                method: method.to_string(),
                reports: group.len(),
                values,
            }
        })
        .collect())
}

pub fn compare(args: &CompareArgs) -> Result<Vec<ComparisonRow>, CliError> {
    let metrics: Vec<usize> = if args.metric.is_empty() {
        (0..METRICS.len()).collect()
    } else {
        args.metric
            .iter()
            .map(|m| {
                metric_index(m).ok_or_else(|| {
                    let valid: Vec<&str> = METRICS.iter().map(|(n, _)| *n).collect();
                    usage(format!(
                        "unknown metric {m:?}; valid metrics: {}",
                        valid.join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut paths = Vec::new();
    for p in &args.reports {
        paths.extend(find_reports(p)?);
    }
    if paths.len() < 2 {
        return Err(usage(format!(
            "compare needs at least 2 reports, found {}",
            paths.len()
        )));
    }
    let reports = paths
        .into_iter()
        .map(|p| load_report(&p).map(|r| (p, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = comparison_rows(&reports, &metrics)?;

    let names: Vec<&str> = metrics.iter().map(|&i| METRICS[i].0).collect();
    print!("{:<10} {:>7}", "method", "reports");
    for n in &names {
        print!(" {n:>9}");
    }
    println!();
    for row in &rows {
        print!("{:<10} {:>7}", row.method, row.reports);
        for v in &row.values {
            match v {
                Some(v) => print!(" {v:>9.4}"),
                None => print!(" {:>9}", "-"),
            }
        }
        println!();
    }

    if let Some(out) = &args.out {
        let mut w = csv::Writer::from_path(out)?;
        let mut header = vec!["method", "reports"];
        header.extend(&names);
        w.write_record(&header)?;
        for row in &rows {
            let mut rec = vec![row.method.clone(), row.reports.to_string()];
            rec.extend(
                row.values
                    .iter()
                    .map(|v| v.map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(rows)
}
