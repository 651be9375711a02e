use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use super::TrainedBundle;
use crate::error::{Error, Result};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format_version: u32,
    checksum: String,
    bundle: &'a RawValue,
}

#[derive(Deserialize)]
struct EnvelopeIn<'a> {
    format_version: u32,
    checksum: String,
    #[serde(borrow)]
    bundle: &'a RawValue,
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Writes the bundle as a versioned JSON envelope with a SHA-256 of its body.
pub fn save_bundle(bundle: &TrainedBundle, path: impl AsRef<Path>) -> Result<()> {
    let body = serde_json::to_string(bundle).map_err(|e| Error::Persistence(e.to_string()))?;
    let raw = RawValue::from_string(body).map_err(|e| Error::Persistence(e.to_string()))?;
    let env = EnvelopeOut {
        format_version: BUNDLE_FORMAT_VERSION,
        checksum: digest(raw.get()),
        bundle: &raw,
    };
    let text = serde_json::to_string(&env).map_err(|e| Error::Persistence(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<TrainedBundle> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Persistence(format!("cannot read bundle {}: {e}", path.display())))?;
    let env: EnvelopeIn<'_> = serde_json::from_str(&text)
        .map_err(|e| Error::Persistence(format!("{}: malformed bundle: {e}", path.display())))?;
    if env.format_version != BUNDLE_FORMAT_VERSION {
        return Err(Error::Persistence(format!(
            "{}: bundle format version {} is not supported (expected {BUNDLE_FORMAT_VERSION})",
            path.display(),
            env.format_version
        )));
    }
    if digest(env.bundle.get()) != env.checksum {
        return Err(Error::Persistence(format!("{}: checksum mismatch", path.display())));
    }
    serde_json::from_str(env.bundle.get())
        .map_err(|e| Error::Persistence(format!("{}: invalid bundle body: {e}", path.display())))
}
