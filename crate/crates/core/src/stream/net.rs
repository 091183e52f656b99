//! Network side of a simulated device and the matching inlet.
//!
//! A [`SimulatorServer`] owns three endpoints: a TCP listener that pushes
//! sample frames to every connected inlet, a UDP socket answering clock
//! probes, and (optionally) a periodic discovery announcement. All sample
//! timestamps are on the device's own shifted clock.

use std::io::{BufReader, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr, TcpListener, TcpStream, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use parking_lot::Mutex;

use super::clock::{decode_probe_request, encode_probe_reply};
use super::discovery::announce;
use super::{
    read_frame, encode_chunk, Announcement, Chunk, DeviceProfile, MonotonicClock, Simulator,
    SourceRegistry, StreamError, StreamInfo,
};

pub const DEFAULT_DISCOVERY_PORT: u16 = 16571;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind_ip: IpAddr,
    /// Where announcements go; `None` disables announcing.
    pub announce_target: Option<SocketAddr>,
    pub announce_interval: Duration,
    pub chunk_interval: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind_ip: IpAddr::V4(Ipv4Addr::LOCALHOST),
            announce_target: Some(SocketAddr::new(
                IpAddr::V4(Ipv4Addr::LOCALHOST),
                DEFAULT_DISCOVERY_PORT,
            )),
            announce_interval: Duration::from_millis(500),
            chunk_interval: Duration::from_millis(50),
        }
    }
}

/// A running simulated device. Dropping it stops all threads.
pub struct SimulatorServer {
    info: StreamInfo,
    data_addr: SocketAddr,
    probe_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    sent: Arc<AtomicU64>,
    threads: Vec<JoinHandle<()>>,
}

impl SimulatorServer {
    pub fn start(
        registry: &SourceRegistry,
        profile: &DeviceProfile,
        config: &ServerConfig,
    ) -> Result<Self, StreamError> {
        let sim = Simulator::new(registry, profile)?;
        Self::start_with(sim, profile.clock_offset_s, profile.drift_ppm, config)
    }

    /// Serves an already-built simulator, e.g. one driven by a live pointer.
    pub fn start_with(
        mut sim: Simulator,
        clock_offset_s: f64,
        drift_ppm: f64,
        config: &ServerConfig,
    ) -> Result<Self, StreamError> {
        let info = sim.info().clone();
        let clock = MonotonicClock::shifted(clock_offset_s, drift_ppm);
        let rate = 1.0 + drift_ppm * 1e-6;

        let listener = TcpListener::bind((config.bind_ip, 0))?;
        listener.set_nonblocking(true)?;
        let data_addr = listener.local_addr()?;
        let probe = UdpSocket::bind((config.bind_ip, 0))?;
        probe.set_read_timeout(Some(Duration::from_millis(50)))?;
        let probe_addr = probe.local_addr()?;

        let stop = Arc::new(AtomicBool::new(false));
        let sent = Arc::new(AtomicU64::new(0));
        let clients: Arc<Mutex<Vec<TcpStream>>> = Arc::default();
        let mut threads = Vec::new();

        {
            let stop = stop.clone();
            let clients = clients.clone();
            threads.push(std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    match listener.accept() {
                        Ok((s, _)) => {
                            let _ = s.set_nodelay(true);
                            let _ = s.set_nonblocking(false);
                            let _ = s.set_write_timeout(Some(Duration::from_secs(1)));
                            clients.lock().push(s);
                        }
                        Err(_) => std::thread::sleep(Duration::from_millis(10)),
                    }
                }
            }));
        }

        {
            let stop = stop.clone();
            let sent = sent.clone();
            let interval = config.chunk_interval;
            let id = info.source_id.clone();
            threads.push(std::thread::spawn(move || {
                let started = std::time::Instant::now();
                while !stop.load(Ordering::Relaxed) {
                    std::thread::sleep(interval);
                    let mut samples = sim.poll(started.elapsed().as_secs_f64());
                    if samples.is_empty() {
                        continue;
                    }
                    for s in &mut samples {
                        s.timestamp = clock_offset_s + s.timestamp * rate;
                    }
                    let n = samples.len() as u64;
                    let frame = match Chunk::new(id.clone(), samples).and_then(|c| encode_chunk(&c)) {
                        Ok(f) => f,
                        Err(e) => {
                            log::warn!("simulator {id}: dropping chunk: {e}");
                            continue;
                        }
                    };
                    clients.lock().retain_mut(|c| c.write_all(&frame).is_ok());
                    sent.fetch_add(n, Ordering::Relaxed);
                }
            }));
        }

        {
            let stop = stop.clone();
            threads.push(std::thread::spawn(move || {
                let mut buf = [0u8; 64];
                while !stop.load(Ordering::Relaxed) {
                    let Ok((n, from)) = probe.recv_from(&mut buf) else {
                        continue;
                    };
                    let t1 = clock.now();
                    if let Some(t0) = decode_probe_request(&buf[..n]) {
                        let _ = probe.send_to(&encode_probe_reply(t0, t1, clock.now()), from);
                    }
                }
            }));
        }

        if let Some(target) = config.announce_target {
            let stop = stop.clone();
            let socket = UdpSocket::bind((config.bind_ip, 0))?;
            let a = Announcement::new(info.clone(), data_addr.port(), probe_addr.port());
            let interval = config.announce_interval;
            threads.push(std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    if let Err(e) = announce(&socket, target, &a) {
                        log::debug!("announce to {target} failed: {e}");
                    }
                    sleep_while(&stop, interval);
                }
            }));
        }

        Ok(SimulatorServer {
            info,
            data_addr,
            probe_addr,
            stop,
            sent,
            threads,
        })
    }

    pub fn info(&self) -> &StreamInfo {
        &self.info
    }

    pub fn data_addr(&self) -> SocketAddr {
        self.data_addr
    }

    pub fn probe_addr(&self) -> SocketAddr {
        self.probe_addr
    }

    pub fn samples_sent(&self) -> u64 {
        self.sent.load(Ordering::Relaxed)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for SimulatorServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn sleep_while(stop: &AtomicBool, total: Duration) {
    let step = Duration::from_millis(20);
    let mut left = total;
    while !left.is_zero() && !stop.load(Ordering::Relaxed) {
        let d = left.min(step);
        std::thread::sleep(d);
        left -= d;
    }
}

/// Receiving end of one stream connection.
pub struct Inlet {
    reader: BufReader<TcpStream>,
}

impl Inlet {
    pub fn connect(addr: SocketAddr, timeout: Duration) -> Result<Self, StreamError> {
        let stream = TcpStream::connect_timeout(&addr, timeout)?;
        stream.set_nodelay(true)?;
        Ok(Inlet {
            reader: BufReader::new(stream),
        })
    }

    /// Bounds how long [`Inlet::next_chunk`] blocks.
    pub fn set_read_timeout(&self, timeout: Option<Duration>) -> Result<(), StreamError> {
        Ok(self.reader.get_ref().set_read_timeout(timeout)?)
    }

    /// Next chunk in send order; `None` once the sender closed the stream.
    pub fn next_chunk(&mut self) -> Result<Option<Chunk>, StreamError> {
        read_frame(&mut self.reader)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::clock::probe_burst;
    use crate::stream::{default_device_set, Discovery};

    fn quiet() -> ServerConfig {
        ServerConfig {
            announce_target: None,
            chunk_interval: Duration::from_millis(20),
            ..ServerConfig::default()
        }
    }

    #[test]
    fn inlet_receives_ordered_chunks() {
        let mut p = default_device_set(3).remove(2);
        p.clock_offset_s = 1000.0;
        let server = SimulatorServer::start(&SourceRegistry::with_builtins(), &p, &quiet()).unwrap();
        let mut inlet = Inlet::connect(server.data_addr(), Duration::from_secs(1)).unwrap();
        inlet.set_read_timeout(Some(Duration::from_secs(2))).unwrap();
        let mut last = f64::NEG_INFINITY;
        let mut total = 0;
        while total < 64 {
            let c = inlet.next_chunk().unwrap().unwrap();
            assert_eq!(c.stream_id, "eda");
            for s in &c.samples {
                assert!(s.timestamp > last);
                assert!(s.timestamp >= 1000.0);
                last = s.timestamp;
            }
            total += c.samples.len();
        }
        server.stop();
    }

    #[test]
    fn probes_recover_device_offset() {
        let mut p = default_device_set(3).remove(4);
        p.clock_offset_s = 2.5;
        let server = SimulatorServer::start(&SourceRegistry::with_builtins(), &p, &quiet()).unwrap();
        let est = probe_burst(server.probe_addr(), &MonotonicClock::new(), 8, Duration::from_millis(200))
            .unwrap();
        // receiver clock and device clock share an origin to within thread start-up
        assert!((est.offset + 2.5).abs() < 0.05, "{est:?}");
        assert!(est.round_trip < 0.05);
    }

    #[test]
    fn five_devices_are_discovered_once_each() {
        let discovery = Discovery::bind("127.0.0.1:0".parse().unwrap()).unwrap();
        let config = ServerConfig {
            announce_target: Some(discovery.local_addr().unwrap()),
            announce_interval: Duration::from_millis(50),
            ..quiet()
        };
        let reg = SourceRegistry::with_builtins();
        let servers: Vec<_> = default_device_set(1)
            .iter()
            .map(|p| SimulatorServer::start(&reg, p, &config).unwrap())
            .collect();
        let found = discovery.collect(Duration::from_millis(400)).unwrap();
        let mut ids: Vec<_> = found.iter().map(|d| d.announcement.info.source_id.clone()).collect();
        ids.sort();
        assert_eq!(ids, ["eda", "eeg", "gaze", "ppg", "temperature"]);
        assert_eq!(found.iter().find(|d| d.announcement.info.source_id == "eeg").unwrap().data_addr(),
            servers[1].data_addr());
    }
}
