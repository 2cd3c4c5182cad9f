//! Invocation sidecars: every data-producing command records its argument
//! vector as a `key=value` file next to its main output, and `rerun`
//! replays such a file verbatim.

use std::path::{Path, PathBuf};

use surftopo::{Error, Result};

/// Sidecar path for an output file or directory: `<name>.conf` inside a
/// directory, `<file>.conf` next to a file.
pub fn sidecar_path(target: &Path, command: &str) -> PathBuf {
    if target.is_dir() {
        target.join(format!("{command}.conf"))
    } else {
        let name = target
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| command.to_string());
        target.with_file_name(format!("{name}.conf"))
    }
}

/// Record the full argument vector (binary name excluded).
pub fn write(path: &Path, command: &str, argv: &[String]) -> Result<()> {
    let mut text =
        String::from("# invocation record; replay with: surftopo rerun --config <this file>\n");
    text.push_str(&format!("version={}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("command={command}\n"));
    for (i, arg) in argv.iter().enumerate() {
        if arg.contains('\n') {
            return Err(Error::InvalidConfig(
                "arguments with newlines cannot be recorded".into(),
            ));
        }
        text.push_str(&format!("arg{i}={arg}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Read back the recorded arguments, in order.
pub fn read(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut numbered: Vec<(usize, String)> = Vec::new();
    let mut saw_command = false;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "{}:{}: expected key=value",
                path.display(),
                lineno + 1
            )));
        };
        match key {
            "version" => {}
            "command" => saw_command = true,
            _ => {
                let Some(n) = key.strip_prefix("arg").and_then(|s| s.parse().ok()) else {
                    return Err(Error::InvalidConfig(format!(
                        "{}:{}: unknown key {key:?}",
                        path.display(),
                        lineno + 1
                    )));
                };
                numbered.push((n, value.to_string()));
            }
        }
    }
    if !saw_command || numbered.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} is not an invocation record",
            path.display()
        )));
    }
    numbered.sort_unstable_by_key(|&(n, _)| n);
    Ok(numbered.into_iter().map(|(_, a)| a).collect())
}
