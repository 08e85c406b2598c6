//! Binary container framing shared by neural checkpoints and baseline model
//! files.
//!
//! Layout: 8-byte magic `LADIFF\0\x01`, a little-endian `u32` format version,
//! a length-prefixed kind tag, then a kind-specific body built from the
//! primitives below. All integers are little-endian; reals are IEEE-754
//! binary64 little-endian; strings are `u32` byte length + UTF-8.

use std::io::{self, Read, Write};

use thiserror::Error;

pub const MAGIC: [u8; 8] = *b"LADIFF\0\x01";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a ladiff container (bad magic)")]
    BadMagic,
    #[error("unsupported container version {0}")]
    Version(u32),
    #[error("expected container kind `{expected}`, found `{found}`")]
    Kind { expected: String, found: String },
    #[error("malformed container: {0}")]
    Malformed(String),
}

pub struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    /// Writes the header and returns a writer positioned at the body.
    pub fn new(mut inner: W, kind: &str) -> Result<Self, ContainerError> {
        inner.write_all(&MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        let mut w = Writer { inner };
        w.str(kind)?;
        Ok(w)
    }

    pub fn u8(&mut self, v: u8) -> Result<(), ContainerError> {
        self.inner.write_all(&[v])?;
        Ok(())
    }

    pub fn u32(&mut self, v: u32) -> Result<(), ContainerError> {
        self.inner.write_all(&v.to_le_bytes())?;
        Ok(())
    }

    pub fn u64(&mut self, v: u64) -> Result<(), ContainerError> {
        self.inner.write_all(&v.to_le_bytes())?;
        Ok(())
    }

    pub fn usize(&mut self, v: usize) -> Result<(), ContainerError> {
        self.u64(v as u64)
    }

    pub fn f64(&mut self, v: f64) -> Result<(), ContainerError> {
        self.inner.write_all(&v.to_le_bytes())?;
        Ok(())
    }

    pub fn bool(&mut self, v: bool) -> Result<(), ContainerError> {
        self.u8(v as u8)
    }

    pub fn str(&mut self, s: &str) -> Result<(), ContainerError> {
        let len = u32::try_from(s.len())
            .map_err(|_| ContainerError::Malformed("string too long".into()))?;
        self.u32(len)?;
        self.inner.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn f64_slice(&mut self, values: &[f64]) -> Result<(), ContainerError> {
        self.usize(values.len())?;
        for &v in values {
            self.f64(v)?;
        }
        Ok(())
    }

    /// Named tensor: name, rank, dims, then row-major values.
    pub fn tensor(&mut self, name: &str, shape: &[usize], data: &[f64]) -> Result<(), ContainerError> {
        self.str(name)?;
        self.u32(shape.len() as u32)?;
        for &d in shape {
            self.usize(d)?;
        }
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        for &v in data {
            self.f64(v)?;
        }
        Ok(())
    }

    pub fn strings(&mut self, items: &[String]) -> Result<(), ContainerError> {
        self.usize(items.len())?;
        for s in items {
            self.str(s)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, ContainerError> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub struct Reader<R: Read> {
    inner: R,
    kind: String,
}

impl<R: Read> Reader<R> {
    pub fn new(mut inner: R) -> Result<Self, ContainerError> {
        let mut magic = [0u8; 8];
        inner.read_exact(&mut magic).map_err(|_| ContainerError::BadMagic)?;
        if magic != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let mut buf = [0u8; 4];
        inner.read_exact(&mut buf)?;
        let version = u32::from_le_bytes(buf);
        if version != VERSION {
            return Err(ContainerError::Version(version));
        }
        let mut r = Reader { inner, kind: String::new() };
        r.kind = r.str()?;
        Ok(r)
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn expect_kind(&self, expected: &str) -> Result<(), ContainerError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(ContainerError::Kind { expected: expected.into(), found: self.kind.clone() })
        }
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], ContainerError> {
        let mut b = [0u8; N];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| ContainerError::Malformed(format!("truncated: {e}")))?;
        Ok(b)
    }

    pub fn u8(&mut self) -> Result<u8, ContainerError> {
        Ok(self.bytes::<1>()?[0])
    }

    pub fn u32(&mut self) -> Result<u32, ContainerError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    pub fn u64(&mut self) -> Result<u64, ContainerError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    pub fn usize(&mut self) -> Result<usize, ContainerError> {
        usize::try_from(self.u64()?).map_err(|_| ContainerError::Malformed("length overflow".into()))
    }

    pub fn f64(&mut self) -> Result<f64, ContainerError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    pub fn bool(&mut self) -> Result<bool, ContainerError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(ContainerError::Malformed(format!("bad bool byte {b}"))),
        }
    }

    pub fn str(&mut self) -> Result<String, ContainerError> {
        let len = self.u32()? as usize;
        let mut buf = vec![0u8; len];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| ContainerError::Malformed(format!("truncated string: {e}")))?;
        String::from_utf8(buf).map_err(|_| ContainerError::Malformed("invalid utf-8".into()))
    }

    pub fn f64_vec(&mut self) -> Result<Vec<f64>, ContainerError> {
        let n = self.usize()?;
        (0..n).map(|_| self.f64()).collect()
    }

    /// Reads a tensor, returning (name, shape, data).
    pub fn tensor(&mut self) -> Result<(String, Vec<usize>, Vec<f64>), ContainerError> {
        let name = self.str()?;
        let rank = self.u32()? as usize;
        let shape: Vec<usize> = (0..rank).map(|_| self.usize()).collect::<Result<_, _>>()?;
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| ContainerError::Malformed("tensor size overflow".into()))?;
        let data = (0..len).map(|_| self.f64()).collect::<Result<_, _>>()?;
        Ok((name, shape, data))
    }

    pub fn strings(&mut self) -> Result<Vec<String>, ContainerError> {
        let n = self.usize()?;
        (0..n).map(|_| self.str()).collect()
    }

    /// Errors unless the stream is exhausted.
    pub fn finish(mut self) -> Result<(), ContainerError> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe)? {
            0 => Ok(()),
            _ => Err(ContainerError::Malformed("trailing bytes".into())),
        }
    }
}

/// Kind tag of a container file without reading the body.
pub fn peek_kind<R: Read>(inner: R) -> Result<String, ContainerError> {
    Ok(Reader::new(inner)?.kind().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitives_round_trip() {
        let mut w = Writer::new(Vec::new(), "test").unwrap();
        w.u32(7).unwrap();
        w.f64(-0.25).unwrap();
        w.bool(true).unwrap();
        w.str("héllo").unwrap();
        w.tensor("w", &[2, 2], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        w.strings(&["a".into(), "b".into()]).unwrap();
        let bytes = w.finish().unwrap();

        let mut r = Reader::new(bytes.as_slice()).unwrap();
        assert_eq!(r.kind(), "test");
        assert_eq!(r.u32().unwrap(), 7);
        assert_eq!(r.f64().unwrap(), -0.25);
        assert!(r.bool().unwrap());
        assert_eq!(r.str().unwrap(), "héllo");
        let (name, shape, data) = r.tensor().unwrap();
        assert_eq!((name.as_str(), shape, data), ("w", vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]));
        assert_eq!(r.strings().unwrap(), vec!["a".to_string(), "b".to_string()]);
        r.finish().unwrap();
    }

    #[test]
    fn rejects_bad_magic_and_kind() {
        assert!(matches!(Reader::new(&b"NOTLADIF\x01\0\0\0"[..]), Err(ContainerError::BadMagic)));
        let bytes = Writer::new(Vec::new(), "forest").unwrap().finish().unwrap();
        let r = Reader::new(bytes.as_slice()).unwrap();
        assert!(matches!(r.expect_kind("lm"), Err(ContainerError::Kind { .. })));
    }

    #[test]
    fn truncated_body_is_malformed() {
        let mut w = Writer::new(Vec::new(), "t").unwrap();
        w.u32(1).unwrap();
        let mut bytes = w.finish().unwrap();
        bytes.pop();
        let mut r = Reader::new(bytes.as_slice()).unwrap();
        assert!(matches!(r.u32(), Err(ContainerError::Malformed(_))));
    }
}
