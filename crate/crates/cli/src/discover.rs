//! Silhouette file discovery from a `cam{K}_frame{N}` style pattern.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use regex::Regex;

/// Silhouette paths by frame id, then camera index.
pub type SilhouetteIndex = BTreeMap<u64, BTreeMap<usize, PathBuf>>;

fn file_regex(name_pattern: &str) -> Result<Regex> {
    if !name_pattern.contains("{K}") || !name_pattern.contains("{N}") {
        bail!("silhouette pattern {name_pattern:?} needs both {{K}} and {{N}} placeholders");
    }
    let mut re = String::from("^");
    let mut rest = name_pattern;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("{K}") {
            re.push_str("(?P<k>\\d+)");
            rest = r;
        } else if let Some(r) = rest.strip_prefix("{N}") {
            re.push_str("(?P<n>\\d+)");
            rest = r;
        } else {
            let c = rest.chars().next().expect("non-empty");
            match c {
                '*' => re.push_str(".*"),
                '?' => re.push('.'),
                _ => re.push_str(&regex::escape(c.encode_utf8(&mut [0; 4]))),
            }
            rest = &rest[c.len_utf8()..];
        }
    }
    re.push('$');
    Ok(Regex::new(&re)?)
}

/// Lists files matching `pattern`. Placeholders may appear only in the file
/// name, not in directory components.
pub fn discover_silhouettes(pattern: &str) -> Result<SilhouetteIndex> {
    let path = Path::new(pattern);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .with_context(|| format!("silhouette pattern {pattern:?} has no file name"))?;
    let re = file_regex(name)?;
    let mut index = SilhouetteIndex::new();
    let entries = fs::read_dir(&dir).with_context(|| format!("listing {}", dir.display()))?;
    for entry in entries {
        let entry = entry?;
        let file_name = entry.file_name();
        let Some(file_name) = file_name.to_str() else { continue };
        let Some(caps) = re.captures(file_name) else { continue };
        let k: usize = caps["k"].parse()?;
        let n: u64 = caps["n"].parse()?;
        if let Some(prev) = index.entry(n).or_default().insert(k, entry.path()) {
            bail!(
                "frame {n} camera {k} matched twice: {} and {}",
                prev.display(),
                entry.path().display()
            );
        }
    }
    Ok(index)
}
