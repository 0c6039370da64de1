//! Small helpers for the little-endian binary file formats.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

/// Writes a file by streaming into a temporary sibling and renaming it into
/// place, so a failed write never leaves a partial file at `path`.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn write_header(w: &mut dyn Write, magic: &[u8; 8], version: u32) -> std::io::Result<()> {
    w.write_all(magic)?;
    w.write_u32::<LittleEndian>(version)
}

pub(crate) fn write_f64s(w: &mut dyn Write, values: &[f64]) -> std::io::Result<()> {
    for &v in values {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

pub(crate) fn write_str(w: &mut dyn Write, s: &str) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

/// Cursor over a fully-read file that maps every failure to a format error.
pub(crate) struct Reader<'a> {
    path: &'a Path,
    cur: Cursor<Vec<u8>>,
}

impl<'a> Reader<'a> {
    pub fn open(path: &'a Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path,
            cur: Cursor::new(bytes),
        })
    }

    fn truncated(&self) -> Error {
        Error::format(self.path, "unexpected end of file")
    }

    pub fn fail(&self, reason: impl Into<String>) -> Error {
        Error::format(self.path, reason)
    }

    /// Checks magic bytes and returns the version number.
    pub fn header(&mut self, magic: &[u8; 8], supported: u32) -> Result<u32> {
        let mut found = [0u8; 8];
        self.cur.read_exact(&mut found).map_err(|_| self.truncated())?;
        if &found != magic {
            return Err(self.fail("wrong magic bytes"));
        }
        let version = self.u32()?;
        if version != supported {
            return Err(self.fail(format!("unsupported version {version}")));
        }
        Ok(version)
    }

    pub fn u32(&mut self) -> Result<u32> {
        self.cur.read_u32::<LittleEndian>().map_err(|_| self.truncated())
    }

    pub fn u64(&mut self) -> Result<u64> {
        self.cur.read_u64::<LittleEndian>().map_err(|_| self.truncated())
    }

    pub fn f64(&mut self) -> Result<f64> {
        self.cur.read_f64::<LittleEndian>().map_err(|_| self.truncated())
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        if n.saturating_mul(8) > self.remaining() {
            return Err(self.truncated());
        }
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        if len > self.remaining() {
            return Err(self.truncated());
        }
        let mut buf = vec![0u8; len];
        self.cur.read_exact(&mut buf).map_err(|_| self.truncated())?;
        String::from_utf8(buf).map_err(|_| self.fail("invalid utf-8 in string"))
    }

    pub fn remaining(&self) -> usize {
        self.cur.get_ref().len().saturating_sub(self.cur.position() as usize)
    }

    pub fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(self.fail("trailing bytes"));
        }
        Ok(())
    }
}
