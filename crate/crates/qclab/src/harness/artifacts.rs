//! Run artifacts: deterministic plain-text serializations plus a checksum
//! manifest.
//!
//! Every artifact is rendered to bytes in memory and written through an
//! [`ArtifactSink`], which records name, SHA-256 and size into
//! `manifest.csv`. Floats are rendered with Rust's shortest round-trip
//! formatting, so identical inputs always serialize byte-for-byte
//! identically. Envelope tables get a gnuplot-friendly `.dat` twin next to
//! each `.csv`.

use super::CheckRow;
use crate::couplingflow::{BoundReport, CouplingSeries};
use crate::error::Result;
use crate::hilbert::WignerTable;
use crate::transport::TransportPlan;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Collects artifacts of one run into its directory and keeps the checksum
/// ledger for `manifest.csv`.
#[derive(Debug)]
pub struct ArtifactSink {
    dir: PathBuf,
    entries: Vec<(String, String, u64)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

impl ArtifactSink {
    /// Create (or wipe and recreate) the run directory.
    pub fn create(dir: &Path) -> Result<ArtifactSink> {
        if dir.exists() {
            std::fs::remove_dir_all(dir)?;
        }
        std::fs::create_dir_all(dir)?;
        Ok(ArtifactSink {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write one artifact and record its checksum.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.entries
            .push((name.to_string(), sha256_hex(bytes), bytes.len() as u64));
        Ok(())
    }

    /// Record a file some other writer placed into the run directory
    /// (e.g. the binary operator container).
    pub fn record_file(&mut self, name: &str) -> Result<()> {
        let bytes = std::fs::read(self.dir.join(name))?;
        self.entries
            .push((name.to_string(), sha256_hex(&bytes), bytes.len() as u64));
        Ok(())
    }

    /// Write `manifest.csv` listing every artifact recorded so far.
    pub fn finish(mut self) -> Result<()> {
        self.entries.sort();
        let mut out = String::from("artifact,sha256,bytes\n");
        for (name, hash, bytes) in &self.entries {
            let _ = writeln!(out, "{name},{hash},{bytes}");
        }
        std::fs::write(self.dir.join("manifest.csv"), out)?;
        Ok(())
    }
}

/// Envelope table as CSV: one row per report time.
pub fn bound_report_csv(report: &BoundReport) -> String {
    let mut out = String::from("t,lhs,rhs,ratio,pass\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.t, r.lhs, r.rhs, r.ratio, r.pass);
    }
    out
}

/// Gnuplot twin of [`bound_report_csv`]: whitespace-separated columns with a
/// commented header, ready for `plot "file.dat" using 1:2, "" using 1:3`.
pub fn bound_report_dat(report: &BoundReport) -> String {
    let mut out = format!(
        "# {} (rate = {}, tolerance = {})\n# t lhs rhs ratio\n",
        report.name, report.rate, report.tol
    );
    for r in &report.rows {
        let _ = writeln!(out, "{} {} {} {}", r.t, r.lhs, r.rhs, r.ratio);
    }
    out
}

/// Coupling-energy series as CSV (total, displacement and dispersion parts).
pub fn series_csv(series: &CouplingSeries) -> String {
    let mut out = String::from("t,energy,displacement,dispersion\n");
    for i in 0..series.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            series.times[i], series.energy[i], series.displacement[i], series.dispersion[i]
        );
    }
    out
}

/// Trajectory checkpoint manifest: named columns, one row per checkpoint.
pub fn checkpoints_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Phase-space density table as CSV rows (x, xi, value).
pub fn phase_density_csv(table: &WignerTable) -> String {
    let mut out = String::from("x,xi,value\n");
    for i in 0..table.grid.n {
        let x = table.grid.node(i);
        for k in 0..table.n_xi() {
            let _ = writeln!(out, "{},{},{}", x, table.xi_node(k), table.value(i, k));
        }
    }
    out
}

/// Transport plan as CSV: one row per positive-mass pairing, with the
/// endpoint coordinates spelled out.
pub fn plan_csv(
    plan: &TransportPlan,
    source: &[(f64, f64)],
    target: &[(f64, f64)],
) -> String {
    let mut out = String::from("source,target,mass,source_x,source_xi,target_x,target_xi\n");
    for &(k, l, w) in &plan.entries {
        let (sx, sxi) = source[k as usize];
        let (tx, txi) = target[l as usize];
        let _ = writeln!(out, "{k},{l},{w},{sx},{sxi},{tx},{txi}");
    }
    out
}

/// Summary table of one run: one row per check.
pub fn summary_csv(kind: &str, label: &str, rows: &[CheckRow]) -> String {
    let mut out = String::from("kind,label,check,value,limit,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{kind},{label},{},{},{},{}",
            r.name, r.value, r.limit, r.pass
        );
    }
    out
}

/// Human-readable twin of [`summary_csv`].
pub fn summary_text(kind: &str, label: &str, rows: &[CheckRow]) -> String {
    let mut out = format!("{kind} :: {label}\n");
    let all = rows.iter().all(|r| r.pass);
    for r in rows {
        let _ = writeln!(
            out,
            "  [{}] {:<42} value {:>14.6e}  limit {:>14.6e}",
            if r.pass { "pass" } else { "FAIL" },
            r.name,
            r.value,
            r.limit
        );
    }
    let _ = writeln!(out, "  => {}", if all { "PASS" } else { "FAIL" });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplingflow::BoundReport;

    #[test]
    fn sink_hashes_every_artifact_into_the_manifest() {
        let dir = std::env::temp_dir().join(format!("qclab-artifacts-{}", std::process::id()));
        let mut sink = ArtifactSink::create(&dir).unwrap();
        sink.write("a.csv", b"x,y\n1,2\n").unwrap();
        sink.write("b.dat", b"# twin\n1 2\n").unwrap();
        sink.finish().unwrap();
        let manifest = std::fs::read_to_string(dir.join("manifest.csv")).unwrap();
        let lines: Vec<&str> = manifest.lines().collect();
        assert_eq!(lines[0], "artifact,sha256,bytes");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a.csv,"));
        assert!(lines[1].ends_with(",8"));
        // Recreating the sink wipes stale artifacts.
        let sink2 = ArtifactSink::create(&dir).unwrap();
        assert!(!dir.join("a.csv").exists());
        sink2.finish().unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn envelope_serializations_share_rows() {
        let report = BoundReport::new(
            "demo",
            5.0,
            0.05,
            vec![
                crate::couplingflow::bound_row(0.0, 1.0, 1.0, 0.05),
                crate::couplingflow::bound_row(0.5, 2.0, 12.18, 0.05),
            ],
        );
        let csv = bound_report_csv(&report);
        let dat = bound_report_dat(&report);
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(dat.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,1,1,"));
        assert!(dat.lines().nth(2).unwrap().starts_with("0 1 1"));
    }

    #[test]
    fn checkpoint_rows_render_with_headers() {
        let csv = checkpoints_csv(
            &["t", "trace", "purity"],
            &[vec![0.0, 1.0, 1.0], vec![0.5, 1.0, 0.999]],
        );
        assert_eq!(csv.lines().next().unwrap(), "t,trace,purity");
        assert_eq!(csv.lines().count(), 3);
    }
}
