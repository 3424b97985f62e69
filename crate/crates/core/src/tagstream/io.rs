//! `TTAG1` single-channel file format (little-endian).
//!
//! ```text
//! offset  size  field
//!      0     6  magic "TTAG1\0"
//!      6     2  format version (u16, = 1)
//!      8     1  channel id
//!      9     1  flags (bit 0: records sorted)
//!     10     6  reserved, zero
//!     16     8  record count (u64)
//!     24     8  duration in ps (u64)
//!     32  8*n   timestamps in ps (u64 each)
//! ```

use std::io::{Read, Write};

use crate::{Error, Result};

use super::{check_sorted, Origin, TagStream};

pub const MAGIC: &[u8; 6] = b"TTAG1\0";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
const FLAG_SORTED: u8 = 0b1;

/// Writes `stream` as a `TTAG1` image. The stream is always sorted, so the
/// sorted flag is always set.
pub fn write_tags<W: Write>(stream: &TagStream, mut dst: W) -> Result<()> {
    check_sorted(stream.times(), "stream to write")?;
    let mut header = [0u8; HEADER_LEN];
    header[..6].copy_from_slice(MAGIC);
    header[6..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8] = stream.channel();
    header[9] = FLAG_SORTED;
    header[16..24].copy_from_slice(&(stream.len() as u64).to_le_bytes());
    header[24..32].copy_from_slice(&stream.duration().to_le_bytes());
    dst.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 * 8192);
    for chunk in stream.times().chunks(8192) {
        buf.clear();
        for t in chunk {
            buf.extend_from_slice(&t.to_le_bytes());
        }
        dst.write_all(&buf)?;
    }
    dst.flush()?;
    Ok(())
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format { offset: offset as u64, message: message.into() }
}

/// Reads a `TTAG1` image. Files without the sorted flag are sorted on load.
pub fn read_tags<R: Read>(mut src: R) -> Result<TagStream> {
    let mut bytes = Vec::new();
    src.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(format_err(bytes.len(), format!("truncated header ({} of {HEADER_LEN} bytes)", bytes.len())));
    }
    if &bytes[..6] != MAGIC {
        return Err(format_err(0, "bad magic, expected \"TTAG1\\0\""));
    }
    let version = u16::from_le_bytes([bytes[6], bytes[7]]);
    if version != VERSION {
        return Err(format_err(6, format!("unsupported format version {version}")));
    }
    let channel = bytes[8];
    let flags = bytes[9];
    let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let duration = u64::from_le_bytes(bytes[24..32].try_into().unwrap());

    let body = &bytes[HEADER_LEN..];
    let expected = count.checked_mul(8).ok_or_else(|| format_err(16, "record count overflows"))?;
    if (body.len() as u64) < expected {
        let whole = body.len() / 8;
        return Err(format_err(
            HEADER_LEN + whole * 8,
            format!("truncated record {whole} of {count}"),
        ));
    }
    if body.len() as u64 > expected {
        return Err(format_err(HEADER_LEN + expected as usize, "trailing bytes after last record"));
    }
    let mut times: Vec<u64> = body
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if flags & FLAG_SORTED != 0 {
        if let Some(i) = times.windows(2).position(|w| w[1] < w[0]) {
            return Err(format_err(
                HEADER_LEN + (i + 1) * 8,
                format!("sorted flag set but record {} precedes its predecessor", i + 1),
            ));
        }
    } else {
        times.sort_unstable();
    }
    if let Some(&last) = times.last() {
        if last > duration {
            return Err(format_err(24, format!("duration {duration} ps shorter than last record {last} ps")));
        }
    }
    TagStream::new(channel, times, duration, Origin::Imported)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream_is_header_only() {
        let s = TagStream::empty(2, 1_000, Origin::Imported);
        let mut buf = Vec::new();
        write_tags(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), 32);
        let back = read_tags(&buf[..]).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.channel(), 2);
        assert_eq!(back.duration(), 1_000);
    }

    #[test]
    fn known_records_match_fixture() {
        let s = TagStream::new(3, vec![1, 256, 0x0102_0304_0506_0708], 0x0102_0304_0506_0709, Origin::Imported).unwrap();
        let mut buf = Vec::new();
        write_tags(&s, &mut buf).unwrap();
        let fixture = "\
            5454414731000100030100000000000003000000000000000907060504030201\
            0100000000000000\
            0001000000000000\
            0807060504030201";
        assert_eq!(hex(&buf), fixture);
        assert_eq!(read_tags(&buf[..]).unwrap().times(), s.times());
    }

    fn hex(b: &[u8]) -> String {
        b.iter().map(|x| format!("{x:02x}")).collect()
    }

    fn image(times: &[u64], flags: u8) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&1u16.to_le_bytes());
        buf.push(0);
        buf.push(flags);
        buf.extend_from_slice(&[0; 6]);
        buf.extend_from_slice(&(times.len() as u64).to_le_bytes());
        buf.extend_from_slice(&u64::MAX.to_le_bytes());
        for t in times {
            buf.extend_from_slice(&t.to_le_bytes());
        }
        buf
    }

    #[test]
    fn descending_with_sorted_flag_names_offset() {
        let err = read_tags(&image(&[10, 20, 15, 30], 1)[..]).unwrap_err();
        match err {
            Error::Format { offset, .. } => assert_eq!(offset, 32 + 16),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unsorted_flag_clear_is_sorted_on_load() {
        let s = read_tags(&image(&[30, 10], 0)[..]).unwrap();
        assert_eq!(s.times(), &[10, 30]);
    }

    #[test]
    fn bad_magic_and_truncation() {
        let mut img = image(&[1, 2], 1);
        img[0] = b'X';
        assert!(matches!(read_tags(&img[..]), Err(Error::Format { offset: 0, .. })));
        let img = image(&[1, 2], 1);
        let cut = &img[..img.len() - 3];
        assert!(matches!(read_tags(cut), Err(Error::Format { offset: 40, .. })));
        assert!(matches!(read_tags(&img[..20]), Err(Error::Format { .. })));
    }
}
