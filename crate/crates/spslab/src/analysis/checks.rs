//! Trajectory checkers and their reports. A report carries one row per
//! checkpoint (or violation), a worst empirical-to-reference ratio, and
//! serializes to a line report and a machine-readable CSV.

use super::certificate::RateCertificate;
use crate::record::format_f64;

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub label: String,
    pub empirical: f64,
    pub reference: f64,
    pub ratio: f64,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Max over checked rows of empirical/reference; pass means `<= 1`.
    pub worst_ratio: f64,
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, rows: Vec<CheckRow>) -> Self {
        // NaN marks a skipped row; infinite ratios must still fail.
        let worst = rows
            .iter()
            .filter(|r| !r.ratio.is_nan())
            .map(|r| r.ratio)
            .fold(0.0f64, f64::max);
        CheckReport {
            name: name.into(),
            passed: worst <= 1.0,
            worst_ratio: worst,
            rows,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "[{}] {} worst_ratio={}\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            format_f64(self.worst_ratio)
        );
        for row in &self.rows {
            out.push_str(&format!(
                "    {}: empirical={} reference={} ratio={}{}\n",
                row.label,
                format_f64(row.empirical),
                format_f64(row.reference),
                format_f64(row.ratio),
                if row.note.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", row.note)
                }
            ));
        }
        out
    }
}

pub fn reports_to_text(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.to_text());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    out.push_str(&format!(
        "{} checks, {} failed\n",
        reports.len(),
        failed
    ));
    out
}

pub fn reports_to_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("name,passed,worst_ratio\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{}\n",
            r.name,
            r.passed,
            format_f64(r.worst_ratio)
        ));
    }
    out
}

/// Passes when `series[t+1] <= series[t] * (1 + rel_tol) + rel_tol` for all
/// consecutive entries. Reports the worst step only.
pub fn check_monotone(name: impl Into<String>, series: &[f64], rel_tol: f64) -> CheckReport {
    assert!(!series.is_empty(), "series must be nonempty");
    let mut worst = CheckRow {
        label: "worst step".into(),
        empirical: series[0],
        reference: series[0],
        ratio: 0.0,
        note: format!("{} entries", series.len()),
    };
    for (t, pair) in series.windows(2).enumerate() {
        let allowed = pair[0] * (1.0 + rel_tol) + rel_tol;
        let ratio = if allowed > 0.0 {
            pair[1] / allowed
        } else if pair[1] <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > worst.ratio {
            worst = CheckRow {
                label: format!("worst step t={t}"),
                empirical: pair[1],
                reference: allowed,
                ratio,
                note: String::new(),
            };
        }
    }
    CheckReport::new(name, vec![worst])
}

/// Compares seed-averaged gaps `(t, gap)` against a certificate with
/// multiplicative `slack`; checkpoints before the certificate's validity
/// threshold are skipped with a note.
pub fn check_rate(
    name: impl Into<String>,
    mean_gap: &[(f64, f64)],
    cert: &RateCertificate,
    slack: f64,
) -> CheckReport {
    let rows = mean_gap
        .iter()
        .map(|&(t, gap)| {
            if t < cert.valid_from {
                CheckRow {
                    label: format!("t={t}"),
                    empirical: gap,
                    reference: f64::NAN,
                    ratio: f64::NAN,
                    note: format!("below validity threshold {:.1}, skipped", cert.valid_from),
                }
            } else {
                let bound = cert.bound(t) * (1.0 + slack);
                CheckRow {
                    label: format!("t={t}"),
                    empirical: gap,
                    reference: bound,
                    ratio: gap / bound,
                    note: if cert.advisory {
                        "advisory: empirical ball constants".into()
                    } else {
                        String::new()
                    },
                }
            }
        })
        .collect();
    CheckReport::new(name, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::certificate::{certificate, CertificateKind};
    use crate::problems::ProblemConstants;

    #[test]
    fn clean_decay_passes() {
        let r = check_monotone("decay", &[4.0, 2.0, 1.0, 0.5], 1e-9);
        assert!(r.passed);
    }

    #[test]
    fn ten_percent_bump_fails() {
        let r = check_monotone("bump", &[1.0, 1.1], 1e-9);
        assert!(!r.passed);
        assert!(r.worst_ratio > 1.0);
    }

    fn unit_cert() -> RateCertificate {
        let c = ProblemConstants {
            d_init: 1.0,
            g_sq: Some(1.0),
            ..ProblemConstants::default()
        };
        certificate(CertificateKind::NonsmoothAvg, &c).unwrap()
    }

    #[test]
    fn zero_gap_passes_rate_check() {
        let cert = unit_cert();
        let r = check_rate("zero", &[(10.0, 0.0), (100.0, 0.0)], &cert, 0.1);
        assert!(r.passed);
        assert_eq!(r.worst_ratio, 0.0);
    }

    #[test]
    fn twenty_percent_violation_fails_with_ten_percent_slack() {
        let cert = unit_cert();
        let t = 100.0;
        let gap = cert.bound(t) * 1.2;
        let r = check_rate("hot", &[(t, gap)], &cert, 0.1);
        assert!(!r.passed);
    }

    #[test]
    fn below_threshold_checkpoints_are_skipped() {
        let mut c = ProblemConstants {
            d_init: 10.0,
            mu: Some(0.5),
            l_smooth: Some(4.0),
            delta_star: Some(1e-4),
            ..ProblemConstants::default()
        };
        c.g_sq = None;
        let cert = certificate(CertificateKind::StrongConvexDist, &c).unwrap();
        assert!(cert.valid_from > 10.0);
        let r = check_rate("warmup", &[(10.0, 123.0)], &cert, 0.1);
        // The only checkpoint is skipped, so nothing can fail.
        assert!(r.passed);
        assert!(r.rows[0].note.contains("skipped"));
    }

    #[test]
    fn infinite_ratio_fails_but_skipped_rows_do_not() {
        let inf_row = CheckRow {
            label: "violation".into(),
            empirical: 1.0,
            reference: 0.0,
            ratio: f64::INFINITY,
            note: String::new(),
        };
        assert!(!CheckReport::new("inf", vec![inf_row]).passed);
        let skipped = CheckRow {
            label: "skipped".into(),
            empirical: 1.0,
            reference: f64::NAN,
            ratio: f64::NAN,
            note: "skipped".into(),
        };
        assert!(CheckReport::new("nan", vec![skipped]).passed);
    }

    #[test]
    fn csv_shape_is_stable() {
        let r = check_monotone("m", &[2.0, 1.0], 0.0);
        let csv = reports_to_csv(&[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "name,passed,worst_ratio");
        assert!(lines.next().unwrap().starts_with("m,true,"));
    }
}
