//! CSV and plot-data emission. Reports are deterministic byte-for-byte for
//! identical configurations: rows are ordered by key and floats use the
//! shortest round-trip formatting.

use std::fmt::Write as _;
use std::path::Path;

use crate::limit::LimitSeries;
use crate::sweep::ErrorReport;

fn fmt_err(v: f64) -> String {
    format!("{v:e}")
}

/// Sweep CSV: comment header, then `epsilon,h,tau,T,error,order` rows.
/// Gated and failed cells leave the error column blank; the header lists
/// them with the reason.
pub fn sweep_csv(report: &ErrorReport, notes: &[String]) -> String {
    let mut out = String::new();
    out.push_str("# dirac-mti sweep report\n");
    let _ = writeln!(out, "# method={} T={}", report.method.name(), report.t_final);
    for note in notes {
        let _ = writeln!(out, "# {note}");
    }
    for note in &report.reference_notes {
        let _ = writeln!(out, "# reference {note}");
    }
    for row in &report.rows {
        if row.gated {
            let _ = writeln!(
                out,
                "# gated: eps={} h={} tau={} raw={} below validity floor {}",
                row.eps,
                row.h,
                row.tau,
                fmt_err(row.raw_error.unwrap_or(f64::NAN)),
                fmt_err(row.floor.unwrap_or(f64::NAN)),
            );
        }
        if let Some(failure) = &row.failure {
            let _ = writeln!(
                out,
                "# failed: eps={} h={} tau={}: {failure}",
                row.eps, row.h, row.tau
            );
        }
    }
    out.push_str("epsilon,h,tau,T,error,order\n");
    for row in &report.rows {
        let error = row.error.map(fmt_err).unwrap_or_default();
        let order = row.order.map(|o| format!("{o:.2}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.eps, row.h, row.tau, report.t_final, error, order
        );
    }
    out
}

/// Limit-study CSV: `epsilon,t,e_sch,e_pau` rows in config order.
pub fn limit_csv(series: &[LimitSeries], notes: &[String]) -> String {
    let mut out = String::new();
    out.push_str("# dirac-mti limit-study report\n");
    for note in notes {
        let _ = writeln!(out, "# {note}");
    }
    out.push_str("epsilon,t,e_sch,e_pau\n");
    for s in series {
        for &(t, es, ep) in &s.samples {
            let _ = writeln!(out, "{},{},{},{}", s.eps, t, fmt_err(es), fmt_err(ep));
        }
    }
    out
}

/// Whitespace-separated series (`t  e_sch  e_pau`), one file per eps,
/// consumable by gnuplot without preprocessing.
pub fn write_plot_data(series: &[LimitSeries], dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for s in series {
        let mut out = String::new();
        let _ = writeln!(out, "# eps={}  columns: t e_sch e_pau", s.eps);
        for &(t, es, ep) in &s.samples {
            let _ = writeln!(out, "{t} {} {}", fmt_err(es), fmt_err(ep));
        }
        std::fs::write(dir.join(format!("limit_eps{}.dat", s.eps)), out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Method;
    use crate::sweep::CellRow;

    #[test]
    fn sweep_csv_shape() {
        let report = ErrorReport {
            method: Method::Mti,
            t_final: 2.0,
            rows: vec![
                CellRow {
                    eps: 1.0,
                    h: 0.03125,
                    tau: 0.1,
                    error: Some(3.69e-2),
                    raw_error: Some(3.69e-2),
                    gated: false,
                    floor: Some(1e-9),
                    failure: None,
                    order: None,
                },
                CellRow {
                    eps: 1.0,
                    h: 0.03125,
                    tau: 0.05,
                    error: Some(9.18e-3),
                    raw_error: Some(9.18e-3),
                    gated: false,
                    floor: Some(1e-9),
                    failure: None,
                    order: Some(2.0071),
                },
            ],
            reference_notes: vec![],
            any_gated: false,
            any_failed: false,
        };
        let csv = sweep_csv(&report, &[]);
        let mut lines = csv.lines().skip_while(|l| l.starts_with('#'));
        assert_eq!(lines.next().unwrap(), "epsilon,h,tau,T,error,order");
        assert_eq!(lines.next().unwrap(), "1,0.03125,0.1,2,3.69e-2,");
        assert_eq!(lines.next().unwrap(), "1,0.03125,0.05,2,9.18e-3,2.01");
    }
}
