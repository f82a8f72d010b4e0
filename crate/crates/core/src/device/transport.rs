use std::fs::OpenOptions;
use std::io::Write;
use std::net::TcpStream;
use std::str::FromStr;
use std::sync::mpsc;
use std::thread::JoinHandle;

use super::wire::{encode_wire, Command};
use crate::error::{Error, Result};

/// Where wire lines go: `tcp://host:port` or `serial:<device path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportUri {
    Tcp(String),
    Serial(String),
}

impl FromStr for TransportUri {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(addr) = s.strip_prefix("tcp://") {
            let (host, port) = addr
                .rsplit_once(':')
                .ok_or_else(|| Error::Config(format!("{s}: expected tcp://host:port")))?;
            if host.is_empty() || port.parse::<u16>().is_err() {
                return Err(Error::Config(format!("{s}: expected tcp://host:port")));
            }
            return Ok(TransportUri::Tcp(addr.to_string()));
        }
        if let Some(path) = s.strip_prefix("serial:") {
            if path.is_empty() {
                return Err(Error::Config("serial: needs a device path".into()));
            }
            return Ok(TransportUri::Serial(path.to_string()));
        }
        Err(Error::Config(format!("{s}: unsupported transport URI")))
    }
}

pub fn open_transport(uri: &TransportUri) -> Result<Box<dyn Write + Send>> {
    Ok(match uri {
        TransportUri::Tcp(addr) => Box::new(TcpStream::connect(addr)?),
        TransportUri::Serial(path) => Box::new(OpenOptions::new().append(true).create(true).open(path)?),
    })
}

/// Single-writer sink that frames commands as wire lines.
pub struct WireWriter<W: Write> {
    inner: W,
    written: usize,
}

impl<W: Write> WireWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, written: 0 }
    }

    pub fn send(&mut self, cmd: &Command) -> Result<()> {
        self.inner.write_all(&encode_wire(cmd))?;
        self.written += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// Runs a [`WireWriter`] on its own thread, fed through an ordered channel.
pub struct TransportWorker {
    sender: Option<mpsc::Sender<Command>>,
    handle: Option<JoinHandle<Result<usize>>>,
}

impl TransportWorker {
    pub fn spawn<W: Write + Send + 'static>(sink: W) -> Self {
        let (sender, receiver) = mpsc::channel::<Command>();
        let handle = std::thread::spawn(move || {
            let mut writer = WireWriter::new(sink);
            for cmd in receiver {
                writer.send(&cmd)?;
            }
            writer.flush()?;
            Ok(writer.written())
        });
        Self {
            sender: Some(sender),
            handle: Some(handle),
        }
    }

    pub fn send(&self, cmd: Command) -> Result<()> {
        self.sender
            .as_ref()
            .expect("sender lives until finish")
            .send(cmd)
            .map_err(|_| Error::Io(std::io::Error::new(std::io::ErrorKind::BrokenPipe, "transport thread exited")))
    }

    /// Closes the queue and waits for every queued command to be written.
    pub fn finish(mut self) -> Result<usize> {
        drop(self.sender.take());
        self.handle
            .take()
            .expect("handle lives until finish")
            .join()
            .map_err(|_| Error::Io(std::io::Error::other("transport thread panicked")))?
    }
}
