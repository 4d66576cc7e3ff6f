//! Frame codec for the remote restorer protocol.
//!
//! ```text
//! magic "FIRE" | version u8 (=1) | type u8 | payload length u32 LE | payload
//! ```
//!
//! INIT and INIT_ACK carry UTF-8 JSON capabilities, RESTORE and RESPONSE a
//! tensor (`u32` rank, `u64` dims, `f32` data, little-endian), ERROR a UTF-8
//! message.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::RemoteError;

pub const MAGIC: &[u8; 4] = b"FIRE";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;
/// Upper bound on accepted payloads (256 MiB).
pub const MAX_PAYLOAD: u32 = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameType {
    Init = 1,
    InitAck = 2,
    Restore = 3,
    Response = 4,
    Error = 5,
}

impl FrameType {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            1 => FrameType::Init,
            2 => FrameType::InitAck,
            3 => FrameType::Restore,
            4 => FrameType::Response,
            5 => FrameType::Error,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameType, payload: Vec<u8>) -> Self {
        Frame { kind, payload }
    }

    pub fn error(message: &str) -> Self {
        Frame::new(FrameType::Error, message.as_bytes().to_vec())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }
}

pub fn write_frame(w: &mut impl Write, frame: &Frame) -> Result<(), RemoteError> {
    w.write_all(&frame.encode())?;
    w.flush()?;
    Ok(())
}

/// Reads one frame. Returns `Ok(None)` on a clean end of stream before any
/// header byte.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Frame>, RemoteError> {
    let mut header = [0u8; HEADER_LEN];
    let mut filled = 0;
    while filled < HEADER_LEN {
        let n = r.read(&mut header[filled..])?;
        if n == 0 {
            if filled == 0 {
                return Ok(None);
            }
            return Err(RemoteError::Protocol("truncated frame header".into()));
        }
        filled += n;
    }
    if &header[..4] != MAGIC {
        return Err(RemoteError::Protocol(format!(
            "bad magic {:02x?}",
            &header[..4]
        )));
    }
    if header[4] != VERSION {
        return Err(RemoteError::Version(header[4]));
    }
    let kind = FrameType::from_u8(header[5])
        .ok_or_else(|| RemoteError::Protocol(format!("unknown frame type {}", header[5])))?;
    let len = u32::from_le_bytes(header[6..10].try_into().unwrap());
    if len > MAX_PAYLOAD {
        return Err(RemoteError::Protocol(format!("payload of {len} bytes exceeds limit")));
    }
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload)?;
    Ok(Some(Frame { kind, payload }))
}

/// Capabilities exchanged in INIT / INIT_ACK.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub family: String,
    /// `"any"` or `"fixed"`.
    pub shape_policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<u64>>,
}

impl Capabilities {
    pub fn any(family: &str) -> Self {
        Capabilities {
            family: family.to_string(),
            shape_policy: "any".into(),
            dims: None,
        }
    }

    pub fn to_payload(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("capabilities serialize")
    }

    pub fn from_payload(bytes: &[u8]) -> Result<Self, RemoteError> {
        serde_json::from_slice(bytes)
            .map_err(|e| RemoteError::Protocol(format!("bad capabilities json: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let f = Frame::new(FrameType::Restore, vec![1, 2, 3]);
        let bytes = f.encode();
        assert_eq!(&bytes[..4], b"FIRE");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 3);
        assert_eq!(&bytes[6..10], &[3, 0, 0, 0]);
        assert_eq!(&bytes[10..], &[1, 2, 3]);
        let back = read_frame(&mut bytes.as_slice()).unwrap().unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let mut bytes = Frame::new(FrameType::Init, vec![]).encode();
        bytes[0] = b'X';
        assert!(matches!(read_frame(&mut bytes.as_slice()), Err(RemoteError::Protocol(_))));
        let mut bytes = Frame::new(FrameType::Init, vec![]).encode();
        bytes[4] = 2;
        assert!(matches!(read_frame(&mut bytes.as_slice()), Err(RemoteError::Version(2))));
    }

    #[test]
    fn clean_eof_and_truncation() {
        assert!(read_frame(&mut [].as_slice()).unwrap().is_none());
        assert!(read_frame(&mut b"FIR".as_slice()).is_err());
        let bytes = Frame::new(FrameType::Error, b"boom".to_vec()).encode();
        assert!(read_frame(&mut &bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn capabilities_json() {
        let c = Capabilities::any("denoise");
        assert_eq!(
            String::from_utf8(c.to_payload()).unwrap(),
            r#"{"family":"denoise","shape_policy":"any"}"#
        );
        let fixed: Capabilities =
            Capabilities::from_payload(br#"{"family":"sr","shape_policy":"fixed","dims":[8,8,1]}"#)
                .unwrap();
        assert_eq!(fixed.dims, Some(vec![8, 8, 1]));
    }
}
