//! Run manifests: every output file opens with `#`-prefixed lines echoing
//! the command, tool version, seed, and input digests, plus a digest of the
//! manifest itself so outputs can be traced to the exact invocation.

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new() -> Self {
        let mut m = RunManifest::default();
        let args: Vec<String> = std::env::args().collect();
        m.push("command", args.join(" "));
        m.push("tool_version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_input_digest(&mut self, label: &str, bytes: &[u8]) {
        self.push(&format!("input_digest_{label}"), format!("{:016x}", fnv1a64(bytes)));
    }

    /// The digest over all recorded entries.
    pub fn digest(&self) -> String {
        let mut buf = String::new();
        for (k, v) in &self.entries {
            buf.push_str(k);
            buf.push(' ');
            buf.push_str(v);
            buf.push('\n');
        }
        format!("{:016x}", fnv1a64(buf.as_bytes()))
    }

    /// Key-value pairs with the manifest digest first.
    pub fn meta(&self) -> Vec<(String, String)> {
        let mut out = vec![("manifest".to_string(), self.digest())];
        out.extend(self.entries.clone());
        out
    }

    /// The `#`-prefixed header block.
    pub fn header(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.meta() {
            out.push_str(&format!("# {k} {v}\n"));
        }
        out
    }
}
