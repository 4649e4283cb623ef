//! Flat `key = value` config files with one `[section]` per subcommand.
//!
//! Keys are long flag names. Values from the file are spliced into the
//! argument list ahead of parsing, so flags given on the command line win.

use std::collections::BTreeMap;

use clap::Command;

use crate::error::CliError;

pub type Sections = BTreeMap<String, Vec<(String, String)>>;

pub fn parse(text: &str, origin: &str) -> Result<Sections, CliError> {
    let mut sections = Sections::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CliError::input(format!("{origin}:{}: {msg}", idx + 1));
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return Err(err(format!("duplicate section [{name}]")));
            }
            sections.insert(name.clone(), Vec::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected `key = value`, found {line:?}")));
        };
        let Some(section) = &current else {
            return Err(err("setting outside of a [section]".into()));
        };
        let key = key.trim().to_string();
        let entries = sections.get_mut(section).expect("section exists");
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(err(format!("duplicate key {key:?}")));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(sections)
}

/// Inserts settings for the chosen subcommand into `args` (the full argv,
/// program name first). Unknown sections and keys are rejected.
pub fn merge(args: Vec<String>, cmd: &Command, sections: &Sections, origin: &str) -> Result<Vec<String>, CliError> {
    for name in sections.keys() {
        if cmd.find_subcommand(name).is_none() {
            return Err(CliError::input(format!("{origin}: unknown section [{name}]")));
        }
    }
    let Some(pos) = args.iter().position(|a| cmd.find_subcommand(a).is_some()) else {
        return Ok(args);
    };
    let sub = cmd.find_subcommand(&args[pos]).expect("found above");
    let Some(entries) = sections.get(sub.get_name()) else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            return Err(CliError::input(format!("{origin}: unknown key {key:?} in [{}]", sub.get_name())));
        };
        let flag = format!("--{key}");
        let given = args[pos + 1..]
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("{flag}={value}"));
        } else {
            match value.as_str() {
                "true" => extra.push(flag),
                "false" => {}
                other => {
                    return Err(CliError::input(format!("{origin}: {key} expects true or false, found {other:?}")))
                }
            }
        }
    }
    let mut out = args;
    let tail = out.split_off(pos + 1);
    out.extend(extra);
    out.extend(tail);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let s = parse("# top\n[recompile]\nsteps = 10 # inline\n\n[trotter]\ncycles=6\n", "c").unwrap();
        assert_eq!(s["recompile"], vec![("steps".to_string(), "10".to_string())]);
        assert_eq!(s["trotter"][0].1, "6");
    }

    #[test]
    fn malformed_lines() {
        assert!(parse("steps = 1", "c").unwrap_err().to_string().contains("c:1"));
        assert!(parse("[a]\nnonsense", "c").unwrap_err().to_string().contains("c:2"));
        assert!(parse("[a]\nx=1\nx=2", "c").is_err());
    }
}
