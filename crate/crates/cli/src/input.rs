use std::io::Read;

use permlift::json;
use serde::de::DeserializeOwned;

/// Reads a JSON argument: inline text if it starts with `{` or `[`, `-` for
/// stdin, otherwise a file path.
pub fn load<T: DeserializeOwned>(what: &str, arg: Option<&str>) -> Result<T, String> {
    let text = match arg.map(str::trim) {
        None | Some("-") => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("{what}: reading stdin: {e}"))?;
            buf
        }
        Some(s) if s.starts_with('{') || s.starts_with('[') => s.to_string(),
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{what}: {path}: {e}"))?,
    };
    json::from_str(&text).map_err(|e| format!("{what}: {e}"))
}

/// Like [`load`] but never falls back to stdin.
pub fn require<T: DeserializeOwned>(what: &str, arg: Option<&str>) -> Result<T, String> {
    match arg {
        Some(a) => load(what, Some(a)),
        None => Err(format!("missing --{what}")),
    }
}
