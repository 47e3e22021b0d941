//! Bearing runs: ordered snapshots plus the geometry and conditions they
//! were recorded under, loaded from rig-format directories.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::snapshot::{parse_snapshot, write_snapshot, VibrationSnapshot};
use super::{BearingGeometry, IngestError, OperatingCondition};
use crate::kv::KvMap;

/// File name of the manifest written next to snapshot files.
pub const MANIFEST_FILE: &str = "run.manifest";

#[derive(Debug, Clone, PartialEq)]
pub struct BearingRun {
    pub id: String,
    pub geometry: BearingGeometry,
    pub condition: OperatingCondition,
    pub snapshots: Vec<VibrationSnapshot>,
    /// Failure time in seconds measured from the start of the run, when known.
    pub true_failure_time: Option<f64>,
}

impl BearingRun {
    /// Builds a run, checking index contiguity and snapshot lengths.
    pub fn new(
        id: impl Into<String>,
        geometry: BearingGeometry,
        condition: OperatingCondition,
        snapshots: Vec<VibrationSnapshot>,
        true_failure_time: Option<f64>,
    ) -> Result<Self, IngestError> {
        geometry.validate()?;
        condition.validate()?;
        if snapshots.is_empty() {
            return Err(IngestError::EmptyRun);
        }
        for (i, s) in snapshots.iter().enumerate() {
            if s.index != i + 1 {
                return Err(IngestError::NonContiguous {
                    position: i + 1,
                    index: s.index,
                });
            }
            if s.len() != condition.snapshot_length {
                return Err(IngestError::LengthMismatch {
                    expected: condition.snapshot_length,
                    found: s.len(),
                });
            }
            if s.samples.iter().any(|x| !x.is_finite()) {
                return Err(IngestError::NonFinite { index: s.index });
            }
        }
        Ok(Self {
            id: id.into(),
            geometry,
            condition,
            snapshots,
            true_failure_time,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Seconds covered by the run, one interval per snapshot.
    pub fn elapsed(&self) -> f64 {
        self.len() as f64 * self.condition.snapshot_interval
    }

    /// Remaining life after the last snapshot, when the failure time is known.
    pub fn true_rul(&self) -> Option<f64> {
        self.true_failure_time.map(|t| t - self.elapsed())
    }

    /// Keeps the first `units` snapshots; the failure time is preserved so the
    /// truncated run carries a known remaining life.
    pub fn truncated(&self, units: usize) -> Result<Self, IngestError> {
        if units == 0 || units > self.len() {
            return Err(IngestError::InvalidTruncation {
                units,
                len: self.len(),
            });
        }
        Ok(Self {
            id: self.id.clone(),
            geometry: self.geometry,
            condition: self.condition,
            snapshots: self.snapshots[..units].to_vec(),
            true_failure_time: self.true_failure_time,
        })
    }
}

/// Numeric suffix of a snapshot file stem, e.g. `acc_00042` -> (42, 5).
fn numeric_suffix(path: &Path) -> Option<(usize, usize)> {
    if path.extension()?.to_str()? != "csv" {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    let digits: String = stem
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    if digits.is_empty() {
        return None;
    }
    Some((digits.parse().ok()?, digits.len()))
}

/// Loads every `*.csv` snapshot file whose stem ends in a number. Numbering
/// must run 1..N without gaps.
pub fn load_run(
    directory: &Path,
    geometry: BearingGeometry,
    condition: OperatingCondition,
) -> Result<BearingRun, IngestError> {
    let io = |e: std::io::Error| IngestError::Io {
        path: directory.to_owned(),
        source: e,
    };
    let mut files: Vec<(usize, usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(directory).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() {
            if let Some((n, width)) = numeric_suffix(&path) {
                files.push((n, width, path));
            }
        }
    }
    if files.is_empty() {
        return Err(IngestError::EmptyRun);
    }
    files.sort();
    for (pos, (n, width, _)) in files.iter().enumerate() {
        let expected = pos + 1;
        if *n != expected {
            return Err(IngestError::MissingSnapshot {
                name: format!("{expected:0width$}"),
            });
        }
    }
    let snapshots = files
        .par_iter()
        .enumerate()
        .map(|(pos, (_, _, path))| {
            let text = fs::read_to_string(path).map_err(|e| IngestError::Io {
                path: path.clone(),
                source: e,
            })?;
            parse_snapshot(&text, condition.snapshot_length, pos + 1).map_err(|e| {
                IngestError::InFile {
                    path: path.clone(),
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let id = directory
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("run")
        .to_owned();
    BearingRun::new(id, geometry, condition, snapshots, None)
}

/// Geometry, condition and data location of a run on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub id: String,
    pub geometry: BearingGeometry,
    pub condition: OperatingCondition,
    /// Snapshot directory, relative paths resolved against the manifest's folder.
    pub directory: PathBuf,
    pub true_failure_time: Option<f64>,
}

const MANIFEST_KEYS: &[&str] = &[
    "id",
    "ball_count",
    "ball_diameter_mm",
    "pitch_diameter_mm",
    "contact_angle_rad",
    "rotation_frequency_hz",
    "radial_load_n",
    "sampling_frequency_hz",
    "snapshot_length",
    "snapshot_interval_s",
    "directory",
    "true_failure_time_s",
];

impl RunManifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self, IngestError> {
        let kv = KvMap::parse(text)?;
        kv.check_keys(MANIFEST_KEYS)?;
        let geometry = BearingGeometry::new(
            kv.require("ball_count")?,
            kv.require("ball_diameter_mm")?,
            kv.require("pitch_diameter_mm")?,
            kv.get_or("contact_angle_rad", 0.0)?,
        )?;
        let condition = OperatingCondition::new(
            kv.require("rotation_frequency_hz")?,
            kv.get_or("radial_load_n", 4000.0)?,
            kv.require("sampling_frequency_hz")?,
            kv.require("snapshot_length")?,
            kv.require("snapshot_interval_s")?,
        )?;
        let dir: String = kv.get_or("directory", ".".to_owned())?;
        Ok(Self {
            id: kv.get_or("id", "run".to_owned())?,
            geometry,
            condition,
            directory: base.join(dir),
            true_failure_time: kv.get("true_failure_time_s")?,
        })
    }

    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path).map_err(|e| IngestError::Io {
            path: path.to_owned(),
            source: e,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Renders with `directory=.`, i.e. for a manifest stored beside the data.
    pub fn render(&self) -> String {
        let mut kv = KvMap::default();
        kv.insert("id", &self.id);
        kv.insert("ball_count", self.geometry.ball_count);
        kv.insert("ball_diameter_mm", self.geometry.ball_diameter);
        kv.insert("pitch_diameter_mm", self.geometry.pitch_diameter);
        kv.insert("contact_angle_rad", self.geometry.contact_angle);
        kv.insert("rotation_frequency_hz", self.condition.rotation_frequency);
        kv.insert("radial_load_n", self.condition.radial_load);
        kv.insert("sampling_frequency_hz", self.condition.sampling_frequency);
        kv.insert("snapshot_length", self.condition.snapshot_length);
        kv.insert("snapshot_interval_s", self.condition.snapshot_interval);
        kv.insert("directory", ".");
        if let Some(t) = self.true_failure_time {
            kv.insert("true_failure_time_s", t);
        }
        format!("# bearing run manifest\n{}", kv.render())
    }

    pub fn load(&self) -> Result<BearingRun, IngestError> {
        let mut run = load_run(&self.directory, self.geometry, self.condition)?;
        run.id = self.id.clone();
        run.true_failure_time = self.true_failure_time;
        Ok(run)
    }
}

/// Writes a run as `acc_NNNNN.csv` files plus a manifest into `directory`.
pub fn write_run(run: &BearingRun, directory: &Path) -> Result<(), IngestError> {
    let io = |path: &Path| {
        let path = path.to_owned();
        move |e| IngestError::Io { path, source: e }
    };
    fs::create_dir_all(directory).map_err(io(directory))?;
    for snap in &run.snapshots {
        let path = directory.join(format!("acc_{:05}.csv", snap.index));
        fs::write(&path, write_snapshot(snap, run.condition.sampling_frequency))
            .map_err(io(&path))?;
    }
    let manifest = RunManifest {
        id: run.id.clone(),
        geometry: run.geometry,
        condition: run.condition,
        directory: PathBuf::from("."),
        true_failure_time: run.true_failure_time,
    };
    let path = directory.join(MANIFEST_FILE);
    fs::write(&path, manifest.render()).map_err(io(&path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_condition(p: usize) -> OperatingCondition {
        OperatingCondition {
            snapshot_length: p,
            ..OperatingCondition::rig_default()
        }
    }

    fn snapshot_text(p: usize, offset: f64) -> String {
        (0..p)
            .map(|k| format!("1,2,3,{k},{},0.5\n", k as f64 + offset))
            .collect()
    }

    #[test]
    fn loads_in_suffix_order() {
        let dir = tempfile::tempdir().unwrap();
        for n in [3, 1, 2] {
            fs::write(dir.path().join(format!("acc_{n:05}.csv")), snapshot_text(4, n as f64)).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let run = load_run(dir.path(), BearingGeometry::rig_default(), small_condition(4)).unwrap();
        assert_eq!(run.len(), 3);
        for (i, s) in run.snapshots.iter().enumerate() {
            assert_eq!(s.index, i + 1);
            assert_eq!(s.samples[0], (i + 1) as f64);
        }
    }

    #[test]
    fn single_file_run() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("acc_00001.csv"), snapshot_text(4, 0.0)).unwrap();
        let run = load_run(dir.path(), BearingGeometry::rig_default(), small_condition(4)).unwrap();
        assert_eq!(run.len(), 1);
    }

    #[test]
    fn gap_names_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        for n in [1, 3] {
            fs::write(dir.path().join(format!("acc_{n:05}.csv")), snapshot_text(4, 0.0)).unwrap();
        }
        let err = load_run(dir.path(), BearingGeometry::rig_default(), small_condition(4)).unwrap_err();
        match err {
            IngestError::MissingSnapshot { name } => assert_eq!(name, "00002"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_run(dir.path(), BearingGeometry::rig_default(), small_condition(4)).unwrap_err();
        assert!(matches!(err, IngestError::EmptyRun));
    }

    #[test]
    fn parse_error_names_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("acc_00001.csv"), "1,2,3,4,x,0\n").unwrap();
        let err = load_run(dir.path(), BearingGeometry::rig_default(), small_condition(1)).unwrap_err();
        assert!(err.to_string().contains("acc_00001.csv"), "{err}");
    }

    #[test]
    fn manifest_round_trip_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let snaps = (1..=2)
            .map(|i| VibrationSnapshot::new(i, vec![i as f64, -1.0, 0.25]))
            .collect();
        let run = BearingRun::new(
            "b1",
            BearingGeometry::rig_default(),
            small_condition(3),
            snaps,
            Some(100.0),
        )
        .unwrap();
        write_run(&run, dir.path()).unwrap();
        let manifest = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.geometry, run.geometry);
        assert_eq!(manifest.condition, run.condition);
        let back = manifest.load().unwrap();
        assert_eq!(back.id, "b1");
        assert_eq!(back.true_failure_time, Some(100.0));
        assert_eq!(back.snapshots[1].samples, run.snapshots[1].samples);
        assert_eq!(back.true_rul(), Some(80.0));
    }

    #[test]
    fn manifest_rejects_unknown_key() {
        let text = "ball_count=13\nball_diameter_mm=3.5\npitch_diameter_mm=25.6\nbogus=1\n";
        assert!(RunManifest::parse(text, Path::new(".")).is_err());
    }

    #[test]
    fn run_invariants() {
        let geom = BearingGeometry::rig_default();
        let cond = small_condition(2);
        assert!(matches!(
            BearingRun::new("x", geom, cond, vec![], None),
            Err(IngestError::EmptyRun)
        ));
        let skipped = vec![VibrationSnapshot::new(2, vec![0.0, 0.0])];
        assert!(BearingRun::new("x", geom, cond, skipped, None).is_err());
        let short = vec![VibrationSnapshot::new(1, vec![0.0])];
        assert!(BearingRun::new("x", geom, cond, short, None).is_err());
    }

    #[test]
    fn truncation_keeps_failure_time() {
        let snaps = (1..=10).map(|i| VibrationSnapshot::new(i, vec![0.0; 2])).collect();
        let run = BearingRun::new(
            "x",
            BearingGeometry::rig_default(),
            small_condition(2),
            snaps,
            Some(150.0),
        )
        .unwrap();
        let t = run.truncated(4).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.true_rul(), Some(110.0));
        assert!(run.truncated(0).is_err());
        assert!(run.truncated(11).is_err());
    }
}
