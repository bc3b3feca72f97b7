//! Tag-file I/O.
//!
//! Binary format, little endian: magic `QJMC`, `u32` version (1), `u64`
//! stream duration in ps, `u64` tag count, then that many `u64` arrival
//! times in ps. The CSV form is one tag per line with `#` comment lines; a
//! `# duration_ps = N` comment preserves the stream duration across a
//! round trip (absent that, the last tag is used).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::PhotonStream;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QJMC";
pub const VERSION: u32 = 1;

pub fn write_tags_binary(path: &Path, stream: &PhotonStream) -> Result<()> {
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&stream.duration_ps().to_le_bytes()).map_err(io_err)?;
    w.write_all(&(stream.len() as u64).to_le_bytes()).map_err(io_err)?;
    for &t in stream.tags_ps() {
        w.write_all(&t.to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_tags_binary(path: &Path) -> Result<PhotonStream> {
    let file = File::open(path).map_err(io_err)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::TagFormat(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::TagFormat(format!("unsupported version {version}")));
    }
    let duration = read_u64(&mut r)?;
    let count = read_u64(&mut r)? as usize;
    let mut tags = Vec::with_capacity(count);
    for _ in 0..count {
        tags.push(read_u64(&mut r)?);
    }
    PhotonStream::new(tags, duration, 0)
}

pub fn write_tags_csv(path: &Path, stream: &PhotonStream) -> Result<()> {
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# photon arrival tags, one per line, picoseconds").map_err(io_err)?;
    writeln!(w, "# duration_ps = {}", stream.duration_ps()).map_err(io_err)?;
    for &t in stream.tags_ps() {
        writeln!(w, "{t}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_tags_csv(path: &Path) -> Result<PhotonStream> {
    let file = File::open(path).map_err(io_err)?;
    let r = BufReader::new(file);
    let mut tags = Vec::new();
    let mut duration: Option<u64> = None;
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("duration_ps") {
                if let Some(v) = rest.trim().strip_prefix('=') {
                    duration = v.trim().parse::<u64>().ok();
                }
            }
            continue;
        }
        let t: u64 = trimmed.parse().map_err(|_| {
            Error::TagFormat(format!("line {}: not an integer tag: {trimmed:?}", lineno + 1))
        })?;
        tags.push(t);
    }
    let duration = duration.unwrap_or_else(|| tags.last().copied().unwrap_or(0));
    PhotonStream::new(tags, duration, 0)
}

/// Sniff the format from the first bytes: binary when the magic matches,
/// CSV otherwise.
pub fn read_tags_auto(path: &Path) -> Result<PhotonStream> {
    let mut head = [0u8; 4];
    {
        let mut f = File::open(path).map_err(io_err)?;
        let n = f.read(&mut head).map_err(io_err)?;
        if n < 4 {
            return read_tags_csv(path);
        }
    }
    if &head == MAGIC {
        read_tags_binary(path)
    } else {
        read_tags_csv(path)
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u64::from_le_bytes(b))
}

fn io_err(e: std::io::Error) -> Error {
    Error::TagFormat(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = std::env::temp_dir().join("mollow_tags_test_bin");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stream.bin");
        let s = PhotonStream::new(vec![5, 17, 17, 950], 1000, 9).unwrap();
        write_tags_binary(&path, &s).unwrap();
        let back = read_tags_binary(&path).unwrap();
        assert_eq!(back.tags_ps(), s.tags_ps());
        assert_eq!(back.duration_ps(), 1000);
        let auto = read_tags_auto(&path).unwrap();
        assert_eq!(auto.tags_ps(), s.tags_ps());
    }

    #[test]
    fn csv_round_trip_preserves_duration() {
        let dir = std::env::temp_dir().join("mollow_tags_test_csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stream.csv");
        let s = PhotonStream::new(vec![1, 2, 3], 5000, 0).unwrap();
        write_tags_csv(&path, &s).unwrap();
        let back = read_tags_auto(&path).unwrap();
        assert_eq!(back.tags_ps(), s.tags_ps());
        assert_eq!(back.duration_ps(), 5000);
    }

    #[test]
    fn rejects_corrupt_files() {
        let dir = std::env::temp_dir().join("mollow_tags_test_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.bin");
        std::fs::write(&path, b"NOPE whatever").unwrap();
        assert!(read_tags_binary(&path).is_err());
        // auto falls through to CSV, which also fails on the text
        assert!(read_tags_auto(&path).is_err());
        // unsorted tags rejected at construction
        assert!(PhotonStream::new(vec![5, 3], 10, 0).is_err());
        assert!(PhotonStream::new(vec![5, 30], 10, 0).is_err());
    }
}
