use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sim::Trace;

pub const TRACE_HEADER: &str = "t,T_E,T_C,setpoint,filtered_setpoint,u,Q_ab,x_amp,P_comp";

/// CSV text of a trace: fixed header, one row per sample, shortest
/// round-trip float formatting.
pub fn trace_csv(tr: &Trace) -> String {
    let mut out = String::with_capacity(64 * (tr.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &tr.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t, r.t_e, r.t_c, r.sp, r.filtered_sp, r.u, r.q_ab, r.x_amp, r.p_comp
        );
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).map_err(|source| Error::Io { path, source })
}

pub fn write_trace(dir: &Path, name: &str, tr: &Trace) -> Result<()> {
    write(dir.join(name), &trace_csv(tr))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io {
        path: dir.join(name),
        source: std::io::Error::other(e),
    })?;
    text.push('\n');
    write(dir.join(name), &text)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    write(dir.join(name), text)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}
