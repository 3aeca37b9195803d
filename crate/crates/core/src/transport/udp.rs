//! Datagram socket backend, one port per channel.
//!
//! A watcher joins channel `i` by sending `JOIN` to `base_port + i`. The
//! server answers with a 16-byte info datagram naming the scheme and the video
//! size, then sends that channel's frames to every joined peer. Frames on the
//! wire are byte-identical to the loopback backend.

use std::io;
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr, SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::{Assembler, AssemblyStats, FrameSink, SegmentLayout, Server, TransportError};
use crate::model::{Family, SchemeConfig};

pub const JOIN: &[u8; 4] = b"JOIN";
const INFO_MAGIC: &[u8; 4] = b"NVIN";
const INFO_LEN: usize = 16;
const MAX_DATAGRAM: usize = 65_536;
const RETRY: Duration = Duration::from_millis(200);

/// What a watcher needs before it can assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamInfo {
    pub config: SchemeConfig,
    pub total_bytes: u64,
}

impl StreamInfo {
    fn encode(&self) -> [u8; INFO_LEN] {
        let mut out = [0u8; INFO_LEN];
        out[..4].copy_from_slice(INFO_MAGIC);
        out[4] = self.config.family().wire_code();
        out[5] = self.config.k() as u8;
        out[6] = self.config.aux() as u8;
        out[8..].copy_from_slice(&self.total_bytes.to_be_bytes());
        out
    }

    fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != INFO_LEN || &bytes[..4] != INFO_MAGIC {
            return None;
        }
        let family = Family::from_wire_code(bytes[4])?;
        let config = SchemeConfig::from_parts(family, bytes[5] as u32, bytes[6] as u32).ok()?;
        let total_bytes = u64::from_be_bytes(bytes[8..].try_into().ok()?);
        Some(Self {
            config,
            total_bytes,
        })
    }
}

fn is_info(bytes: &[u8]) -> bool {
    bytes.len() == INFO_LEN && &bytes[..4] == INFO_MAGIC
}

fn channel_port(base_port: u16, channel: usize) -> io::Result<u16> {
    u16::try_from(channel)
        .ok()
        .and_then(|c| base_port.checked_add(c))
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "channel port overflows"))
}

fn transient(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut | io::ErrorKind::ConnectionRefused
    )
}

/// Server side of one channel.
#[derive(Debug)]
pub struct UdpChannelSink {
    socket: UdpSocket,
    peers: Vec<SocketAddr>,
    info: [u8; INFO_LEN],
}

impl UdpChannelSink {
    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn listeners(&self) -> usize {
        self.peers.len()
    }

    fn poll_joins(&mut self) -> io::Result<()> {
        let mut buf = [0u8; 16];
        loop {
            match self.socket.recv_from(&mut buf) {
                Ok((n, peer)) if &buf[..n] == JOIN => {
                    if !self.peers.contains(&peer) {
                        self.peers.push(peer);
                    }
                    send_all(&self.socket, &self.info, peer)?;
                }
                Ok(_) => {}
                Err(e) if transient(&e) => return Ok(()),
                // a vanished peer surfaces here on some platforms
                Err(e) if e.kind() == io::ErrorKind::ConnectionReset => {}
                Err(e) => return Err(e),
            }
        }
    }
}

fn send_all(socket: &UdpSocket, bytes: &[u8], peer: SocketAddr) -> io::Result<()> {
    loop {
        match socket.send_to(bytes, peer) {
            Ok(_) => return Ok(()),
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                thread::sleep(Duration::from_micros(200))
            }
            Err(e) => return Err(e),
        }
    }
}

impl FrameSink for UdpChannelSink {
    fn send_frame(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.poll_joins()?;
        for &peer in &self.peers {
            match send_all(&self.socket, bytes, peer) {
                Err(e) if e.kind() == io::ErrorKind::ConnectionRefused => {}
                other => other?,
            }
        }
        Ok(())
    }
}

/// Binds `ip:base_port + i` for every channel of the server's map.
pub fn bind_channels(
    server: &Server<'_>,
    ip: IpAddr,
    base_port: u16,
) -> io::Result<Vec<UdpChannelSink>> {
    let info = StreamInfo {
        config: server.map().config,
        total_bytes: server.layout().total_bytes(),
    }
    .encode();
    (0..server.map().channel_count())
        .map(|ch| {
            let socket = UdpSocket::bind((ip, channel_port(base_port, ch)?))?;
            socket.set_nonblocking(true)?;
            Ok(UdpChannelSink {
                socket,
                peers: Vec::new(),
                info,
            })
        })
        .collect()
}

/// Blocks until every channel has at least one joined watcher.
pub fn wait_for_listeners(
    sinks: &mut [UdpChannelSink],
    timeout: Duration,
) -> Result<(), TransportError> {
    let deadline = Instant::now() + timeout;
    loop {
        for sink in sinks.iter_mut() {
            sink.poll_joins()?;
        }
        if sinks.iter().all(|s| s.listeners() > 0) {
            return Ok(());
        }
        if Instant::now() >= deadline {
            return Err(TransportError::Timeout(
                "no watcher joined every channel".into(),
            ));
        }
        thread::sleep(Duration::from_millis(5));
    }
}

#[derive(Debug, Clone)]
pub struct WatchOutcome {
    pub info: StreamInfo,
    pub video: Vec<u8>,
    pub stats: AssemblyStats,
}

fn join_socket(server_ip: IpAddr, port: u16) -> io::Result<UdpSocket> {
    let local: IpAddr = match server_ip {
        IpAddr::V4(_) => Ipv4Addr::UNSPECIFIED.into(),
        IpAddr::V6(_) => Ipv6Addr::UNSPECIFIED.into(),
    };
    let socket = UdpSocket::bind((local, 0))?;
    socket.connect((server_ip, port))?;
    socket.set_read_timeout(Some(RETRY))?;
    Ok(socket)
}

/// Joins every channel, assembles until the video is complete and returns it.
/// `preload` must hold the bytes of the scheme's preloaded segments.
pub fn watch(
    server_ip: IpAddr,
    base_port: u16,
    preload: &[u8],
    timeout: Duration,
) -> Result<WatchOutcome, TransportError> {
    let deadline = Instant::now() + timeout;
    let first = join_socket(server_ip, base_port)?;
    let mut buf = vec![0u8; MAX_DATAGRAM];
    let mut early = Vec::new();

    // channel 0 tells us the scheme and how many other channels to join
    let info = loop {
        if Instant::now() >= deadline {
            return Err(TransportError::Timeout("no answer from the server".into()));
        }
        let _ = first.send(JOIN);
        match first.recv(&mut buf) {
            Ok(n) => match StreamInfo::decode(&buf[..n]) {
                Some(info) => break info,
                None => early.push(buf[..n].to_vec()),
            },
            Err(e) if transient(&e) => thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(e.into()),
        }
    };

    let layout = SegmentLayout::new(info.total_bytes, info.config.segment_count())?;
    let mut assembler = Assembler::new(info.config, layout, preload)?;
    for bytes in &early {
        assembler.accept_bytes(bytes);
    }

    let mut sockets = vec![first];
    for ch in 1..info.config.channel_count() {
        let socket = join_socket(server_ip, channel_port(base_port, ch)?)?;
        let _ = socket.send(JOIN);
        sockets.push(socket);
    }

    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Vec<u8>>();
    thread::scope(|scope| {
        for socket in &sockets {
            let tx = tx.clone();
            let stop = &stop;
            scope.spawn(move || {
                let mut buf = vec![0u8; MAX_DATAGRAM];
                let mut heard = false;
                while !stop.load(Ordering::Relaxed) {
                    match socket.recv(&mut buf) {
                        Ok(n) => {
                            heard = true;
                            if !is_info(&buf[..n]) && tx.send(buf[..n].to_vec()).is_err() {
                                return;
                            }
                        }
                        Err(e) if transient(&e) => {
                            if !heard {
                                let _ = socket.send(JOIN);
                            }
                        }
                        Err(_) => return,
                    }
                }
            });
        }
        drop(tx);

        let result = loop {
            if assembler.is_complete() {
                break Ok(());
            }
            let now = Instant::now();
            if now >= deadline {
                break Err(TransportError::Timeout(format!(
                    "{} segment(s) still missing",
                    assembler.missing().len()
                )));
            }
            match rx.recv_timeout((deadline - now).min(RETRY)) {
                Ok(bytes) => {
                    assembler.accept_bytes(&bytes);
                }
                Err(mpsc::RecvTimeoutError::Timeout) => {}
                Err(mpsc::RecvTimeoutError::Disconnected) => {
                    break Err(TransportError::Protocol(
                        "all channel sockets failed".into(),
                    ))
                }
            }
        };
        stop.store(true, Ordering::Relaxed);
        result
    })?;

    let stats = assembler.stats().clone();
    Ok(WatchOutcome {
        info,
        video: assembler.into_video()?,
        stats,
    })
}
