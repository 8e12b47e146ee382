use btcp::report::write_csv;

use crate::args::HistArgs;
use crate::error::{usage, CliError};

use super::{find_reports, load_report};

pub fn hist(args: &HistArgs) -> Result<(), CliError> {
    if args.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    let paths = find_reports(&args.report)?;
    let [path] = paths.as_slice() else {
        return Err(usage(format!(
            "expected exactly one report under {}, found {}",
            args.report.display(),
            paths.len()
        )));
    };
    let report = load_report(path)?;
    if report.test_uncertainties.is_empty() {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "{} holds no test uncertainties",
            path.display()
        )));
    }
    let rows = report.histogram_rows(args.bins)?;
    match &args.out {
        Some(out) => write_csv(out, &rows)?,
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
