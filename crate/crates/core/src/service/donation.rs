use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::report::BiasReport;

/// One line of the donation store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonatedReport {
    pub id: String,
    pub report: BiasReport,
    pub consent: bool,
    pub donated_at: DateTime<Utc>,
}

/// Append-only JSON-lines file. Every append is flushed before returning.
#[derive(Debug, Clone)]
pub struct DonationStore {
    path: PathBuf,
    file: Arc<Mutex<File>>,
}

pub fn new_donation_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl DonationStore {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(DonationStore { path, file: Arc::new(Mutex::new(file)) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Store a consented report and return its id.
    pub fn append(&self, report: BiasReport) -> std::io::Result<String> {
        let record = DonatedReport {
            id: new_donation_id(),
            report,
            consent: true,
            donated_at: Utc::now().trunc_subsecs(0),
        };
        let mut line = serde_json::to_string(&record)?;
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
        file.write_all(line.as_bytes())?;
        file.flush()?;
        file.sync_data()?;
        Ok(record.id)
    }

    pub fn read_all(path: impl AsRef<Path>) -> std::io::Result<Vec<DonatedReport>> {
        let text = std::fs::read_to_string(path)?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
            .collect()
    }
}
