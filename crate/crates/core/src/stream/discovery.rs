//! Stream discovery over UDP.
//!
//! Each device periodically sends a JSON [`Announcement`] datagram to the
//! configured discovery address. Listeners deduplicate by `source_id`.

use std::collections::BTreeMap;
use std::net::{IpAddr, SocketAddr, UdpSocket};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{StreamError, StreamInfo};

pub const ANNOUNCE_PROTOCOL: &str = "cognitrace/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Announcement {
    pub protocol: String,
    pub info: StreamInfo,
    /// TCP port serving sample frames.
    pub data_port: u16,
    /// UDP port answering clock probes.
    pub probe_port: u16,
}

impl Announcement {
    pub fn new(info: StreamInfo, data_port: u16, probe_port: u16) -> Self {
        Announcement {
            protocol: ANNOUNCE_PROTOCOL.to_string(),
            info,
            data_port,
            probe_port,
        }
    }

    pub fn to_datagram(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("announcement serializes")
    }

    pub fn from_datagram(bytes: &[u8]) -> Option<Self> {
        let a: Announcement = serde_json::from_slice(bytes).ok()?;
        (a.protocol == ANNOUNCE_PROTOCOL && a.info.validate().is_ok()).then_some(a)
    }
}

/// A discovered stream together with the address it announced from.
#[derive(Debug, Clone, PartialEq)]
pub struct Discovered {
    pub announcement: Announcement,
    pub host: IpAddr,
}

impl Discovered {
    pub fn data_addr(&self) -> SocketAddr {
        SocketAddr::new(self.host, self.announcement.data_port)
    }

    pub fn probe_addr(&self) -> SocketAddr {
        SocketAddr::new(self.host, self.announcement.probe_port)
    }
}

/// Listens for announcements on a bound UDP socket.
pub struct Discovery {
    socket: UdpSocket,
}

impl Discovery {
    pub fn bind(addr: SocketAddr) -> Result<Self, StreamError> {
        Ok(Discovery {
            socket: UdpSocket::bind(addr)?,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, StreamError> {
        Ok(self.socket.local_addr()?)
    }

    /// Waits at most `timeout` for one datagram; `None` on timeout or junk.
    pub fn recv(&self, timeout: Duration) -> Result<Option<Discovered>, StreamError> {
        self.socket
            .set_read_timeout(Some(timeout.max(Duration::from_millis(1))))?;
        let mut buf = [0u8; 8192];
        match self.socket.recv_from(&mut buf) {
            Ok((n, from)) => Ok(Announcement::from_datagram(&buf[..n]).map(|announcement| {
                Discovered {
                    announcement,
                    host: from.ip(),
                }
            })),
            Err(e)
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) =>
            {
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Collects announcements until `timeout` elapses, one entry per source_id.
    pub fn collect(&self, timeout: Duration) -> Result<Vec<Discovered>, StreamError> {
        let deadline = Instant::now() + timeout;
        let mut seen: BTreeMap<String, Discovered> = BTreeMap::new();
        loop {
            let now = Instant::now();
            if now >= deadline {
                break;
            }
            if let Some(d) = self.recv(deadline - now)? {
                seen.entry(d.announcement.info.source_id.clone()).or_insert(d);
            }
        }
        Ok(seen.into_values().collect())
    }
}

/// Listens on `addr` for `timeout` and returns every distinct stream announced.
pub fn discover_streams(addr: SocketAddr, timeout: Duration) -> Result<Vec<StreamInfo>, StreamError> {
    let discovery = Discovery::bind(addr)?;
    Ok(discovery
        .collect(timeout)?
        .into_iter()
        .map(|d| d.announcement.info)
        .collect())
}

/// Sends one announcement datagram.
pub fn announce(socket: &UdpSocket, target: SocketAddr, a: &Announcement) -> Result<(), StreamError> {
    socket.send_to(&a.to_datagram(), target)?;
    Ok(())
}
