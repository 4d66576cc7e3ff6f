//! Client side of the out-of-process restorer protocol.
//!
//! A [`RemoteHandle`] owns one connection (TCP or a child process's stdio)
//! and allows exactly one request in flight. Use several handles for
//! parallel priors.

pub mod protocol;

use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{Shutdown, TcpStream};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::tensor::io::{decode_tensor, encode_tensor};
use crate::tensor::Image;
use protocol::{read_frame, write_frame, Capabilities, Frame, FrameType};

pub use protocol::Capabilities as RemoteCapabilities;

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("unsupported protocol version {0}")]
    Version(u8),
    #[error("timed out waiting for the remote restorer")]
    Timeout,
    #[error("remote restorer reported: {0}")]
    Server(String),
    #[error("response shape {got:?} does not match request {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("handshake already completed on this handle")]
    AlreadyInitialized,
    #[error("handshake has not been performed")]
    NotInitialized,
    #[error("connection closed")]
    Closed,
    #[error("remote i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    /// Spawn `program args...` and speak over its stdin/stdout.
    Stdio { program: String, args: Vec<String> },
    Tcp(String),
}

impl Transport {
    /// Parses `exec:<command line>` or a `host:port` address.
    pub fn parse(address: &str) -> Self {
        if let Some(cmd) = address.strip_prefix("exec:") {
            let mut parts = cmd.split_whitespace().map(str::to_string);
            let program = parts.next().unwrap_or_default();
            Transport::Stdio {
                program,
                args: parts.collect(),
            }
        } else {
            Transport::Tcp(address.trim_start_matches("tcp:").to_string())
        }
    }
}

type FrameResult = Result<Frame, RemoteError>;

pub struct RemoteHandle {
    writer: Option<Box<dyn Write + Send>>,
    frames: Receiver<FrameResult>,
    timeout: Duration,
    capabilities: Option<Capabilities>,
    child: Option<Child>,
    tcp: Option<TcpStream>,
}

impl std::fmt::Debug for RemoteHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteHandle")
            .field("timeout", &self.timeout)
            .field("capabilities", &self.capabilities)
            .finish_non_exhaustive()
    }
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

impl RemoteHandle {
    pub fn connect(transport: &Transport, timeout: Duration) -> Result<Self, RemoteError> {
        match transport {
            Transport::Tcp(addr) => {
                let stream = TcpStream::connect(addr)?;
                stream.set_nodelay(true).ok();
                let reader = stream.try_clone()?;
                let writer = stream.try_clone()?;
                let mut handle = Self::from_streams(reader, writer, timeout);
                handle.tcp = Some(stream);
                Ok(handle)
            }
            Transport::Stdio { program, args } => {
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                let mut handle = Self::from_streams(stdout, stdin, timeout);
                handle.child = Some(child);
                Ok(handle)
            }
        }
    }

    /// Wraps an arbitrary byte stream pair. Frames are read on a background
    /// thread so that every wait honours `timeout`.
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Self
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(reader);
            loop {
                match read_frame(&mut reader) {
                    Ok(Some(frame)) => {
                        if tx.send(Ok(frame)).is_err() {
                            break;
                        }
                    }
                    Ok(None) => {
                        let _ = tx.send(Err(RemoteError::Closed));
                        break;
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        RemoteHandle {
            writer: Some(Box::new(BufWriter::new(writer))),
            frames: rx,
            timeout,
            capabilities: None,
            child: None,
            tcp: None,
        }
    }

    pub fn capabilities(&self) -> Option<&Capabilities> {
        self.capabilities.as_ref()
    }

    fn close(&mut self) {
        self.writer = None;
        if let Some(s) = &self.tcp {
            let _ = s.shutdown(Shutdown::Both);
        }
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }

    fn send(&mut self, frame: &Frame) -> Result<(), RemoteError> {
        let writer = self.writer.as_mut().ok_or(RemoteError::Closed)?;
        if let Err(e) = write_frame(writer, frame) {
            self.close();
            return Err(e);
        }
        Ok(())
    }

    fn receive(&mut self) -> Result<Frame, RemoteError> {
        match self.frames.recv_timeout(self.timeout) {
            Ok(Ok(frame)) => Ok(frame),
            Ok(Err(e)) => {
                self.close();
                Err(e)
            }
            Err(RecvTimeoutError::Timeout) => Err(RemoteError::Timeout),
            Err(RecvTimeoutError::Disconnected) => {
                self.close();
                Err(RemoteError::Closed)
            }
        }
    }

    /// Exchanges INIT / INIT_ACK and returns the server's capabilities.
    pub fn handshake(&mut self) -> Result<Capabilities, RemoteError> {
        if self.capabilities.is_some() {
            return Err(RemoteError::AlreadyInitialized);
        }
        let request = Capabilities::any("any");
        self.send(&Frame::new(FrameType::Init, request.to_payload()))?;
        let reply = self.receive()?;
        match reply.kind {
            FrameType::InitAck => {
                let caps = Capabilities::from_payload(&reply.payload)?;
                if caps.shape_policy != "any" && caps.shape_policy != "fixed" {
                    return Err(RemoteError::Protocol(format!(
                        "unknown shape policy {:?}",
                        caps.shape_policy
                    )));
                }
                self.capabilities = Some(caps.clone());
                Ok(caps)
            }
            FrameType::Error => Err(RemoteError::Server(
                String::from_utf8_lossy(&reply.payload).into_owned(),
            )),
            other => {
                self.close();
                Err(RemoteError::Protocol(format!("expected INIT_ACK, got {other:?}")))
            }
        }
    }

    /// Sends one RESTORE request and returns the response tensor as received.
    pub fn restore_unclamped(&mut self, x: &Image) -> Result<Image, RemoteError> {
        let caps = self.capabilities.as_ref().ok_or(RemoteError::NotInitialized)?;
        if caps.shape_policy == "fixed" {
            let (h, w, c) = x.shape();
            if let Some(dims) = &caps.dims {
                if dims.as_slice() != [h as u64, w as u64, c as u64] {
                    return Err(RemoteError::ShapeMismatch {
                        expected: (
                            dims.first().copied().unwrap_or(0) as usize,
                            dims.get(1).copied().unwrap_or(0) as usize,
                            dims.get(2).copied().unwrap_or(1) as usize,
                        ),
                        got: x.shape(),
                    });
                }
            }
        }
        self.send(&Frame::new(FrameType::Restore, encode_tensor(x)))?;
        let reply = self.receive()?;
        match reply.kind {
            FrameType::Response => {
                let out = decode_tensor(&reply.payload)
                    .map_err(|e| RemoteError::Protocol(e.to_string()))?;
                if out.shape() != x.shape() {
                    return Err(RemoteError::ShapeMismatch {
                        expected: x.shape(),
                        got: out.shape(),
                    });
                }
                Ok(out)
            }
            FrameType::Error => Err(RemoteError::Server(
                String::from_utf8_lossy(&reply.payload).into_owned(),
            )),
            other => {
                self.close();
                Err(RemoteError::Protocol(format!("expected RESPONSE, got {other:?}")))
            }
        }
    }

    /// [`RemoteHandle::restore_unclamped`] followed by clamping to `[0, 1]`.
    pub fn restore(&mut self, x: &Image) -> Result<Image, RemoteError> {
        Ok(self.restore_unclamped(x)?.clamp01())
    }
}

impl Drop for RemoteHandle {
    fn drop(&mut self) {
        self.close();
    }
}
