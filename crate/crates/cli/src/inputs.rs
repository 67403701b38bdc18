//! Argument-to-domain parsing: generator specs, tie policies, backends,
//! and instance sources (files, globs, or generator specs).

use crate::CliError;
use pargbfs::engine::{parse_schedule, Backend, TiePolicy};
use pargbfs::topology::{gen_patho1, gen_patho2, gen_random, parse_topology, HMode, StateSpace};
use std::fs;
use std::sync::Arc;

pub fn is_genspec(s: &str) -> bool {
    ["patho1:", "patho2:", "random:"]
        .iter()
        .any(|p| s.starts_with(p))
}

fn lookup<'a>(kvs: &[(&str, &'a str)], key: &str) -> Option<&'a str> {
    kvs.iter().find(|&&(k, _)| k == key).map(|&(_, v)| v)
}

fn required<T: std::str::FromStr>(
    kvs: &[(&str, &str)],
    family: &str,
    key: &str,
) -> Result<T, String> {
    lookup(kvs, key)
        .ok_or_else(|| format!("`{family}` spec needs `{key}=`"))?
        .parse()
        .map_err(|_| format!("bad value for `{key}`"))
}

/// `patho1:x=5`, `patho2:x=5:t=3`, `random:seed=7:n=50:b=3:mode=layered`.
pub fn parse_genspec(spec: &str) -> Result<StateSpace, String> {
    let mut parts = spec.split(':');
    let family = parts.next().unwrap_or("");
    let kvs: Vec<(&str, &str)> = parts
        .map(|p| {
            p.split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{p}`"))
        })
        .collect::<Result<_, _>>()?;
    let known: &[&str] = match family {
        "patho1" => &["x"],
        "patho2" => &["x", "t"],
        "random" => &["seed", "n", "b", "mode"],
        other => return Err(format!("unknown generator family `{other}`")),
    };
    if let Some(&(k, _)) = kvs.iter().find(|&&(k, _)| !known.contains(&k)) {
        return Err(format!("`{family}` spec does not take `{k}`"));
    }
    match family {
        "patho1" => {
            let x: u32 = required(&kvs, family, "x")?;
            if x < 1 {
                return Err("patho1 needs x >= 1".into());
            }
            Ok(gen_patho1(x))
        }
        "patho2" => {
            let x: u32 = required(&kvs, family, "x")?;
            let t: u32 = required(&kvs, family, "t")?;
            if x < 1 || t < 1 {
                return Err("patho2 needs x >= 1 and t >= 1".into());
            }
            Ok(gen_patho2(x, t))
        }
        _ => {
            let seed: u64 = required(&kvs, family, "seed")?;
            let n: u32 = required(&kvs, family, "n")?;
            let b: u32 = match lookup(&kvs, "b") {
                Some(v) => v.parse().map_err(|_| "bad value for `b`".to_string())?,
                None => 3,
            };
            let mode: HMode = lookup(&kvs, "mode").unwrap_or("layered").parse()?;
            if n < 2 || b < 1 {
                return Err("random needs n >= 2 and b >= 1".into());
            }
            Ok(gen_random(seed, n, b, mode))
        }
    }
}

/// Loads one instance: a generator spec or a topology file. The returned
/// label (the source string itself) becomes the `instance` metrics column.
pub fn load_instance(src: &str) -> Result<(String, StateSpace), CliError> {
    if is_genspec(src) {
        let space = parse_genspec(src).map_err(CliError::Usage)?;
        Ok((src.to_string(), space))
    } else {
        let text = fs::read_to_string(src).map_err(|e| CliError::Io(format!("{src}: {e}")))?;
        let space = parse_topology(&text).map_err(|e| CliError::Io(format!("{src}: {e}")))?;
        Ok((src.to_string(), space))
    }
}

/// Expands a list of sources: generator specs pass through, glob patterns
/// fan out to every matching file (alphabetically), plain paths load as-is.
pub fn expand_instances(sources: &[String]) -> Result<Vec<(String, StateSpace)>, CliError> {
    let mut out = Vec::new();
    for src in sources {
        if !is_genspec(src) && src.contains(['*', '?', '[']) {
            let entries =
                glob::glob(src).map_err(|e| CliError::Usage(format!("bad glob `{src}`: {e}")))?;
            let mut any = false;
            for entry in entries {
                let path = entry.map_err(|e| CliError::Io(e.to_string()))?;
                out.push(load_instance(path.to_string_lossy().as_ref())?);
                any = true;
            }
            if !any {
                return Err(CliError::Io(format!("glob `{src}` matched no files")));
            }
        } else {
            out.push(load_instance(src)?);
        }
    }
    Ok(out)
}

pub fn parse_tie(s: &str) -> Result<TiePolicy, String> {
    match s {
        "fifo" => Ok(TiePolicy::Fifo),
        "lifo" => Ok(TiePolicy::Lifo),
        _ => match s.split_once(':') {
            Some(("rand", seed)) => seed
                .parse()
                .map(TiePolicy::Random)
                .map_err(|_| format!("bad tie seed `{seed}`")),
            _ => Err(format!("unknown tie policy `{s}` (fifo|lifo|rand:SEED)")),
        },
    }
}

pub fn parse_backend(s: &str) -> Result<Backend, CliError> {
    if s == "native" {
        return Ok(Backend::Native);
    }
    match s.split_once(':') {
        Some(("virtual", seed)) => seed
            .parse()
            .map(Backend::VirtualSeeded)
            .map_err(|_| CliError::Usage(format!("bad virtual seed `{seed}`"))),
        Some(("virtual-script", path)) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            let steps = parse_schedule(&text).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            Ok(Backend::VirtualScripted(Arc::new(steps)))
        }
        _ => Err(CliError::Usage(format!(
            "unknown backend `{s}` (native|virtual:SEED|virtual-script:FILE)"
        ))),
    }
}
