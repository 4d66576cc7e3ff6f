use std::time::{Duration, Instant};

use fire_core::remote::{RemoteHandle, Transport};
use fire_core::tensor::{Image, Rng};

use crate::error::CliError;

/// Connects to a remote prior, performs the handshake and one 8x8 request.
pub fn run(address: &str, timeout: Duration) -> Result<(), CliError> {
    let start = Instant::now();
    let mut handle = RemoteHandle::connect(&Transport::parse(address), timeout)
        .map_err(|e| CliError::solver(format!("cannot reach {address}: {e}")))?;
    let caps = handle
        .handshake()
        .map_err(|e| CliError::solver(format!("handshake with {address} failed: {e}")))?;
    println!(
        "family {} shape_policy {}{}",
        caps.family,
        caps.shape_policy,
        caps.dims.as_ref().map(|d| format!(" dims {d:?}")).unwrap_or_default()
    );
    let probe = match &caps.dims {
        Some(d) if caps.shape_policy == "fixed" && d.len() >= 2 => {
            (d[0] as usize, d[1] as usize, d.get(2).copied().unwrap_or(1) as usize)
        }
        _ => (8, 8, 1),
    };
    let mut rng = Rng::new(0);
    let x = Image::from_fn(probe.0, probe.1, probe.2, |_, _, _| rng.uniform(0.0, 1.0));
    let y = handle
        .restore(&x)
        .map_err(|e| CliError::solver(format!("restore request failed: {e}")))?;
    println!(
        "restore ok: {:?} -> {:?}, mean change {:.6}, round trip {:.1} ms",
        x.shape(),
        y.shape(),
        x.sub(&y).map_err(CliError::solve)?.l2_norm() / (x.len() as f64).sqrt(),
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(())
}
