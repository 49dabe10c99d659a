//! On-disk tag dump format.
//!
//! A dump is a pair of CSV tag files plus one JSON sidecar header:
//!
//! * `<stem>_alice.csv`, `<stem>_bob.csv`: one `channel,ticks` record per
//!   line after a `channel,ticks` header row. `channel` is 0..3 (0 = Alice
//!   +1, 1 = Alice -1, 2 = Bob +1, 3 = Bob -1), `ticks` an unsigned 64-bit
//!   timestamp in tagger ticks.
//! * `<stem>_header.json`: format version, the simulation config, optical
//!   layout, pulse clock and setting schedule the tags were produced with.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventsim::{PulseClock, SettingSchedule, SimConfig, TagRecord, TagStream};
use crate::optics::OpticalLayout;

pub const TAG_DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagDumpHeader {
    pub format_version: u32,
    pub config: SimConfig,
    pub layout: OpticalLayout,
    pub clock: PulseClock,
    pub schedule: SettingSchedule,
}

/// File paths of one dump, derived from a directory and stem.
#[derive(Debug, Clone)]
pub struct TagDumpPaths {
    pub alice: PathBuf,
    pub bob: PathBuf,
    pub header: PathBuf,
}

impl TagDumpPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        TagDumpPaths {
            alice: dir.join(format!("{stem}_alice.csv")),
            bob: dir.join(format!("{stem}_bob.csv")),
            header: dir.join(format!("{stem}_header.json")),
        }
    }
}

pub fn write_tags_csv(path: &Path, tags: &TagStream) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "channel,ticks")?;
    for t in tags {
        writeln!(w, "{},{}", t.channel, t.ticks)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tags_csv(path: &Path) -> Result<TagStream> {
    let r = BufReader::new(File::open(path)?);
    let mut tags = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == "channel,ticks") {
            continue;
        }
        let (ch, ticks) = line.split_once(',').ok_or_else(|| {
            Error::BadInput(format!("{}:{}: expected channel,ticks", path.display(), lineno + 1))
        })?;
        let channel: u8 = ch.trim().parse().map_err(|_| {
            Error::BadInput(format!("{}:{}: bad channel id", path.display(), lineno + 1))
        })?;
        if channel > 3 {
            return Err(Error::BadInput(format!(
                "{}:{}: channel id {} out of range 0..3",
                path.display(),
                lineno + 1,
                channel
            )));
        }
        let ticks: u64 = ticks.trim().parse().map_err(|_| {
            Error::BadInput(format!("{}:{}: bad tick count", path.display(), lineno + 1))
        })?;
        tags.push(TagRecord { channel, ticks });
    }
    Ok(tags)
}

/// Write both tag streams and the sidecar header.
pub fn write_dump(
    paths: &TagDumpPaths,
    alice: &TagStream,
    bob: &TagStream,
    header: &TagDumpHeader,
) -> Result<()> {
    write_tags_csv(&paths.alice, alice)?;
    write_tags_csv(&paths.bob, bob)?;
    let mut w = BufWriter::new(File::create(&paths.header)?);
    serde_json::to_writer_pretty(&mut w, header)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Read a dump back; rejects unknown format versions.
pub fn read_dump(paths: &TagDumpPaths) -> Result<(TagStream, TagStream, TagDumpHeader)> {
    let header: TagDumpHeader = serde_json::from_reader(BufReader::new(File::open(&paths.header)?))?;
    if header.format_version != TAG_DUMP_VERSION {
        return Err(Error::BadInput(format!(
            "unsupported tag dump version {} (expected {})",
            header.format_version, TAG_DUMP_VERSION
        )));
    }
    let alice = read_tags_csv(&paths.alice)?;
    let bob = read_tags_csv(&paths.bob)?;
    Ok((alice, bob, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventsim::{run_simulation, schedule_settings, SettingEntry};
    use crate::quantum::Scheme;

    #[test]
    fn roundtrip_preserves_tags_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let config = SimConfig {
            duration_s: 1e-3,
            rng_seed: 5,
            ..SimConfig::default()
        };
        let layout = OpticalLayout::new(Scheme::PassivePostselected, 0.95);
        let (a, b, clock) = run_simulation(&config, &layout).unwrap();
        let schedule = schedule_settings(
            vec![SettingEntry {
                phi_a: 0.0,
                phi_b: 0.0,
                duration_s: config.duration_s,
            }],
            config.rep_rate_hz,
        )
        .unwrap();
        let header = TagDumpHeader {
            format_version: TAG_DUMP_VERSION,
            config,
            layout,
            clock,
            schedule,
        };
        let paths = TagDumpPaths::new(dir.path(), "run");
        write_dump(&paths, &a, &b, &header).unwrap();
        let (a2, b2, h2) = read_dump(&paths).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
        assert_eq!(header, h2);
    }

    #[test]
    fn rejects_malformed_rows_and_versions() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "channel,ticks\n9,12\n").unwrap();
        assert!(read_tags_csv(&bad).is_err());
        std::fs::write(&bad, "channel,ticks\n1\n").unwrap();
        assert!(read_tags_csv(&bad).is_err());
        std::fs::write(&bad, "channel,ticks\n1,notanumber\n").unwrap();
        assert!(read_tags_csv(&bad).is_err());
    }
}
