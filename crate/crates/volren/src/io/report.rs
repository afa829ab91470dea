//! Quality report CSV: one row per measured scene.

use std::path::Path;

use volren_core::quality::QualityReport;

use crate::error::{Error, Result};

pub const QUALITY_CSV_HEADER: &str = "scene,digest,psnr_db,mse,banding_energy,anisotropy,notes";

/// Append one report row, writing the header when the file is new or empty.
pub fn append_quality_csv(
    path: &Path,
    scene_id: &str,
    digest: &str,
    report: &QualityReport,
) -> Result<()> {
    let existing = std::fs::read_to_string(path).unwrap_or_default();
    let mut text = String::new();
    if existing.trim().is_empty() {
        text.push_str(QUALITY_CSV_HEADER);
        text.push('\n');
    } else {
        text.push_str(&existing);
    }
    let psnr = if report.psnr_db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{:.6}", report.psnr_db)
    };
    text.push_str(&format!(
        "{scene_id},{digest},{psnr},{:.10e},{:.10e},{:.10e},\"{}\"\n",
        report.mse, report.banding_energy, report.anisotropy, report.notes
    ));
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
