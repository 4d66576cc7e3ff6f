use std::io::{BufReader, Write};
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use fire_core::degradations::{gaussian_smooth, DegradationSpec, Range};
use fire_core::engine::prior_residual;
use fire_core::remote::protocol::{read_frame, write_frame, Capabilities, Frame, FrameType};
use fire_core::remote::{RemoteError, RemoteHandle, Transport};
use fire_core::restorers::{PriorTerm, Restorer};
use fire_core::tensor::io::{decode_tensor, encode_tensor};
use fire_core::tensor::{Image, Rng};
use fire_core::FireError;

#[derive(Clone, Copy)]
enum Mode {
    Echo,
    Gaussian(f64),
    Transposed,
    BadMagic,
    Fails,
    Silent,
}

/// Periodic Gaussian smoothing by direct summation with its own weights.
fn smooth_reference(x: &Image, sigma: f64) -> Image {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let g: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm = g.iter().sum::<f64>().powi(2);
    let (h, w, c) = x.shape();
    Image::from_fn(h, w, c, |i, j, ch| {
        let mut acc = 0.0;
        for (a, ga) in (-radius..=radius).zip(&g) {
            for (b, gb) in (-radius..=radius).zip(&g) {
                let r = (i as isize - a).rem_euclid(h as isize) as usize;
                let s = (j as isize - b).rem_euclid(w as isize) as usize;
                acc += ga * gb * x.get(r, s, ch);
            }
        }
        acc / norm
    })
}

fn respond(mode: Mode, frame: &Frame) -> Option<Vec<u8>> {
    match (frame.kind, mode) {
        (_, Mode::Silent) => None,
        (FrameType::Init, Mode::BadMagic) => Some(b"NOPE\x01\x02\x00\x00\x00\x00".to_vec()),
        (FrameType::Init, _) => Some(Frame::new(FrameType::InitAck, Capabilities::any("denoise").to_payload()).encode()),
        (FrameType::Restore, Mode::Echo) => Some(Frame::new(FrameType::Response, frame.payload.clone()).encode()),
        (FrameType::Restore, Mode::Gaussian(sigma)) => {
            let x = decode_tensor(&frame.payload).unwrap();
            Some(Frame::new(FrameType::Response, encode_tensor(&smooth_reference(&x, sigma))).encode())
        }
        (FrameType::Restore, Mode::Transposed) => {
            let x = decode_tensor(&frame.payload).unwrap();
            let t = Image::zeros(x.width(), x.height() + 1, x.channels());
            Some(Frame::new(FrameType::Response, encode_tensor(&t)).encode())
        }
        (FrameType::Restore, Mode::Fails) => Some(Frame::error("model exploded").encode()),
        _ => Some(Frame::error("unexpected frame").encode()),
    }
}

fn spawn_server(mode: Mode) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { return };
            thread::spawn(move || {
                let mut writer = stream.try_clone().unwrap();
                let mut reader = BufReader::new(stream);
                while let Ok(Some(frame)) = read_frame(&mut reader) {
                    match respond(mode, &frame) {
                        Some(bytes) => {
                            if writer.write_all(&bytes).is_err() {
                                return;
                            }
                        }
                        None => thread::sleep(Duration::from_secs(5)),
                    }
                }
            });
        }
    });
    addr
}

fn connect(mode: Mode, timeout: Duration) -> RemoteHandle {
    RemoteHandle::connect(&Transport::Tcp(spawn_server(mode)), timeout).unwrap()
}

fn ready(mode: Mode) -> RemoteHandle {
    let mut h = connect(mode, Duration::from_secs(10));
    h.handshake().unwrap();
    h
}

fn seeded(h: usize, w: usize, c: usize, seed: u64) -> Image {
    let mut rng = Rng::new(seed);
    Image::from_fn(h, w, c, |_, _, _| rng.uniform(-0.2, 1.2) as f32 as f64)
}

#[test]
fn handshake_reports_capabilities() {
    let mut h = connect(Mode::Echo, Duration::from_secs(10));
    let caps = h.handshake().unwrap();
    assert_eq!(caps, Capabilities::any("denoise"));
    assert!(matches!(h.handshake(), Err(RemoteError::AlreadyInitialized)));
}

#[test]
fn restore_before_handshake_is_rejected() {
    let mut h = connect(Mode::Echo, Duration::from_secs(10));
    assert!(matches!(h.restore(&Image::zeros(2, 2, 1)), Err(RemoteError::NotInitialized)));
}

#[test]
fn bad_magic_closes_the_connection() {
    let mut h = connect(Mode::BadMagic, Duration::from_secs(10));
    assert!(matches!(h.handshake(), Err(RemoteError::Protocol(_))));
    assert!(matches!(h.handshake(), Err(RemoteError::Closed)));
}

#[test]
fn echo_round_trips_bit_exactly() {
    let mut h = ready(Mode::Echo);
    for seed in 0..100 {
        let x = seeded(1 + (seed % 7) as usize, 3 + (seed % 5) as usize, 1 + (seed % 3) as usize, seed);
        assert_eq!(h.restore_unclamped(&x).unwrap(), x);
        assert_eq!(h.restore(&x).unwrap(), x.clamp01());
    }
}

#[test]
fn gaussian_server_matches_local_smoothing() {
    let mut h = ready(Mode::Gaussian(1.0));
    let x = seeded(8, 8, 1, 42).clamp01();
    let remote = h.restore_unclamped(&x).unwrap();
    let local = gaussian_smooth(&x, 1.0).unwrap();
    assert!(remote.sub(&local).unwrap().max_abs() <= 1e-6);
}

#[test]
fn wrong_response_shape_is_an_error() {
    let mut h = ready(Mode::Transposed);
    let err = h.restore(&Image::zeros(4, 6, 1)).unwrap_err();
    assert!(matches!(err, RemoteError::ShapeMismatch { expected: (4, 6, 1), got: (6, 5, 1) }), "{err:?}");
}

#[test]
fn server_errors_carry_the_message() {
    let mut h = ready(Mode::Fails);
    match h.restore(&Image::zeros(2, 2, 1)) {
        Err(RemoteError::Server(msg)) => assert_eq!(msg, "model exploded"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn silent_server_times_out() {
    let mut h = connect(Mode::Silent, Duration::from_millis(200));
    assert!(matches!(h.handshake(), Err(RemoteError::Timeout)));
}

#[test]
fn stdio_peer_echoing_init_is_a_protocol_error() {
    let mut h = RemoteHandle::connect(&Transport::parse("exec:cat"), Duration::from_secs(10)).unwrap();
    assert!(matches!(h.handshake(), Err(RemoteError::Protocol(_))));
}

#[test]
fn remote_prior_residual_is_manual_composition() {
    let addr = spawn_server(Mode::Echo);
    let restorer = Arc::new(Restorer::from_id(&format!("remote:{addr}")).unwrap());
    assert_eq!(restorer.name(), format!("remote:{addr}"));
    let spec = DegradationSpec::AdditiveNoise { sigma: Range::fixed(0.05) };
    let term = PriorTerm::new(restorer.clone(), spec.clone(), 0.5).unwrap();
    let x = seeded(8, 8, 3, 7).clamp01();

    let stream = Rng::new(3);
    let got = prior_residual(&x, &term, &mut stream.clone()).unwrap();
    let mut manual = stream.clone();
    let d = spec.sample(&mut manual, 8, 8).unwrap();
    let noisy = d.apply(&x, &mut manual).unwrap();
    let restored = noisy.map(|v| (v as f32 as f64).clamp(0.0, 1.0));
    assert_eq!(got, x.sub(&restored).unwrap());
}

#[test]
fn remote_family_must_match_the_spec() {
    let restorer = Arc::new(Restorer::from_id(&format!("remote:{}", spawn_server(Mode::Echo))).unwrap());
    let blur = DegradationSpec::Blur { kernel_sigma: Range::fixed(1.0), sigma: Range::fixed(0.0) };
    assert!(matches!(PriorTerm::new(restorer, blur, 0.5), Err(FireError::IncompatibleFamily { .. })));
}

#[test]
fn unreachable_server_fails_to_connect() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    drop(listener);
    assert!(Restorer::from_id(&format!("remote:{addr}")).is_err());
}

#[test]
fn frames_survive_a_pipe() {
    let frame = Frame::new(FrameType::Restore, encode_tensor(&seeded(3, 3, 3, 1)));
    let mut buf = Vec::new();
    write_frame(&mut buf, &frame).unwrap();
    assert_eq!(read_frame(&mut buf.as_slice()).unwrap(), Some(frame));
}
