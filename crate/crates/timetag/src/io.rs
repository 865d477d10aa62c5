//! Binary and CSV exchange formats for time-tag streams.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! header  16 bytes   8-byte magic "PLTTAG\0\0", u32 version, 4 reserved bytes
//! records  9 bytes   u64 timestamp in ps, u8 channel, tightly packed
//! footer  16 bytes   u64 record count, u64 repetition period in ps (0 = CW)
//! ```
//!
//! The file carries the tags and the repetition period; wavelength and power
//! metadata travel in scenario/config JSON instead. A decoded stream's
//! duration is the latest timestamp present.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{AcquisitionMeta, TimeTag, TimeTagError, TimeTagStream};

pub const BINARY_MAGIC: [u8; 8] = *b"PLTTAG\0\0";
pub const BINARY_VERSION: u32 = 1;

const HEADER_LEN: usize = 16;
const RECORD_LEN: usize = 9;
const FOOTER_LEN: usize = 16;

/// Serializes a stream into the binary time-tag format.
pub fn to_bytes(stream: &TimeTagStream) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + RECORD_LEN * stream.len() + FOOTER_LEN);
    buf.extend_from_slice(&BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&[0u8; 4]);
    for tag in stream.tags() {
        buf.extend_from_slice(&tag.t_ps.to_le_bytes());
        buf.push(tag.channel);
    }
    buf.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    buf.extend_from_slice(&stream.meta().rep_period_ps.to_le_bytes());
    buf
}

/// Parses the binary time-tag format.
pub fn from_bytes(bytes: &[u8]) -> Result<TimeTagStream, TimeTagError> {
    if bytes.len() < HEADER_LEN + FOOTER_LEN {
        return Err(TimeTagError::Format(format!(
            "file too short: {} bytes",
            bytes.len()
        )));
    }
    if bytes[..8] != BINARY_MAGIC {
        return Err(TimeTagError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(TimeTagError::Format(format!(
            "unsupported version {version}"
        )));
    }
    let body = &bytes[HEADER_LEN..bytes.len() - FOOTER_LEN];
    if body.len() % RECORD_LEN != 0 {
        return Err(TimeTagError::Format(format!(
            "record section length {} not a multiple of {RECORD_LEN}",
            body.len()
        )));
    }
    let footer = &bytes[bytes.len() - FOOTER_LEN..];
    let count = u64::from_le_bytes(footer[..8].try_into().unwrap());
    let rep_period_ps = u64::from_le_bytes(footer[8..].try_into().unwrap());
    let n_records = (body.len() / RECORD_LEN) as u64;
    if count != n_records {
        return Err(TimeTagError::Format(format!(
            "footer claims {count} records, file holds {n_records}"
        )));
    }

    let mut tags = Vec::with_capacity(n_records as usize);
    for record in body.chunks_exact(RECORD_LEN) {
        tags.push(TimeTag {
            t_ps: u64::from_le_bytes(record[..8].try_into().unwrap()),
            channel: record[8],
        });
    }
    let duration_ps = tags.iter().map(|t| t.t_ps).max().unwrap_or(0);
    Ok(TimeTagStream::new_unchecked(
        tags,
        duration_ps,
        AcquisitionMeta {
            rep_period_ps,
            ..AcquisitionMeta::default()
        },
    ))
}

pub fn write_binary(path: &Path, stream: &TimeTagStream) -> Result<(), TimeTagError> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_all(&to_bytes(stream))?;
    writer.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<TimeTagStream, TimeTagError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

/// Writes the two-column CSV form (`t_ps,channel`).
pub fn write_csv<W: Write>(mut writer: W, stream: &TimeTagStream) -> Result<(), TimeTagError> {
    writeln!(writer, "t_ps,channel")?;
    for tag in stream.tags() {
        writeln!(writer, "{},{}", tag.t_ps, tag.channel)?;
    }
    Ok(())
}

/// Reads the two-column CSV form. Metadata is not part of the CSV format and
/// must be supplied by the caller.
pub fn read_csv<R: Read>(reader: R, meta: AcquisitionMeta) -> Result<TimeTagStream, TimeTagError> {
    let mut content = String::new();
    let mut reader = BufReader::new(reader);
    reader.read_to_string(&mut content)?;
    let mut tags = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("t_ps")) {
            continue;
        }
        let mut fields = line.split(',');
        let (t_field, ch_field) = match (fields.next(), fields.next()) {
            (Some(t), Some(c)) => (t.trim(), c.trim()),
            _ => {
                return Err(TimeTagError::Format(format!(
                    "line {}: expected `t_ps,channel`",
                    lineno + 1
                )))
            }
        };
        let t_ps = t_field.parse::<u64>().map_err(|e| {
            TimeTagError::Format(format!("line {}: bad timestamp: {e}", lineno + 1))
        })?;
        let channel = ch_field.parse::<u8>().map_err(|e| {
            TimeTagError::Format(format!("line {}: bad channel: {e}", lineno + 1))
        })?;
        tags.push(TimeTag { t_ps, channel });
    }
    let duration_ps = tags.iter().map(|t| t.t_ps).max().unwrap_or(0);
    Ok(TimeTagStream::new_unchecked(tags, duration_ps, meta))
}
