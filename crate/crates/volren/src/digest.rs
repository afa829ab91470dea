//! Canonical settings digests: every CLI run prints one and every output
//! file gets a sidecar carrying it, so any image or table can be traced back
//! to the exact settings that produced it.

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Accumulates `key=value` pairs into a canonical one-line description plus
/// a short hash of it.
#[derive(Debug, Default, Clone)]
pub struct SettingsDigest {
    parts: Vec<(String, String)>,
}

impl SettingsDigest {
    pub fn new(command: &str) -> SettingsDigest {
        let mut d = SettingsDigest::default();
        d.push("command", command);
        d
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.parts.push((key.to_string(), value.to_string()));
    }

    pub fn push_opt(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.push(key, v);
        }
    }

    /// Canonical settings line: keys in insertion order, space separated.
    pub fn canonical(&self) -> String {
        self.parts
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn hash_hex(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical().as_bytes()))
    }

    /// Full sidecar text: one `key=value` line per setting plus the hash.
    pub fn sidecar_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.parts {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out.push_str(&format!("digest={}\n", self.hash_hex()));
        out
    }
}
