//! Line-oriented configuration files: `[section]` headers with `key = value`
//! entries, `#` comments, blank lines ignored.  Keys may repeat within a
//! section (used for cube tables).  Every diagnostic carries a line number.

use nilspace_core::cube::{Configuration, DEFAULT_MAX_DIM};
use nilspace_core::groups::{make_heisenberg, Elem, Filtration};
use nilspace_core::host_kra::{dk_space, nilmanifold_space};
use nilspace_core::space::{Config, CubeSpace, Point};
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

/// Environment variable overriding the default dimension cap.
pub const ENV_MAX_DIM: &str = "NILSPACE_MAX_DIM";
/// Environment variable overriding the default enumeration cap.
pub const ENV_ENUM_CAP: &str = "NILSPACE_ENUM_CAP";

const DEFAULT_ENUM_CAP: usize = 4096;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn new(message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// One `key = value` entry with its source line.
#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn get_all(&self, key: &str) -> Vec<&Entry> {
        self.entries.iter().filter(|e| e.key == key).collect()
    }

    pub fn require(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.get(key).ok_or_else(|| {
            ConfigError::at(self.line, format!("section [{}] needs `{key} = ...`", self.name))
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub sections: Vec<Section>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig, ConfigError> {
        let mut sections: Vec<Section> = Vec::new();
        let mut any_content = false;
        for (i, raw_line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            any_content = true;
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(lineno, "unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(ConfigError::at(lineno, "empty section name"));
                }
                sections.push(Section {
                    name: name.to_string(),
                    line: lineno,
                    entries: Vec::new(),
                });
            } else if let Some((key, value)) = line.split_once('=') {
                let section = sections
                    .last_mut()
                    .ok_or_else(|| ConfigError::at(lineno, "entry before any [section]"))?;
                section.entries.push(Entry {
                    key: key.trim().to_string(),
                    value: value.trim().to_string(),
                    line: lineno,
                });
            } else {
                return Err(ConfigError::at(
                    lineno,
                    "expected `[section]` or `key = value`",
                ));
            }
        }
        if !any_content {
            return Err(ConfigError::new("empty configuration"));
        }
        Ok(RawConfig { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

fn parse_num<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| ConfigError::at(e.line, format!("invalid number `{}` for {}", e.value, e.key)))
}

fn parse_list<T: std::str::FromStr>(e: &Entry) -> Result<Vec<T>, ConfigError> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|p| {
            p.trim().parse().map_err(|_| {
                ConfigError::at(e.line, format!("invalid list entry `{}` for {}", p.trim(), e.key))
            })
        })
        .collect()
}

/// A space built from a configuration file, with the caps resolved.
pub struct BuiltSpace {
    pub space: Arc<CubeSpace>,
    pub enumeration_cap: usize,
}

impl BuiltSpace {
    /// The degree checks and factors should use.
    pub fn degree(&self) -> usize {
        self.space
            .claimed_degree()
            .unwrap_or_else(|| self.space.max_dim().saturating_sub(1).max(1))
    }
}

fn env_cap(var: &str) -> Option<usize> {
    std::env::var(var).ok().and_then(|v| v.parse().ok())
}

/// Build the space described by the `[space]` section.  `flag_max_dim` is the
/// command-line override; the environment variable only replaces the
/// built-in default.
pub fn build_space(
    raw: &RawConfig,
    flag_max_dim: Option<usize>,
) -> Result<BuiltSpace, ConfigError> {
    let section = raw
        .section("space")
        .ok_or_else(|| ConfigError::new("missing [space] section"))?;
    let kind = section.require("kind")?;
    let default_dim = env_cap(ENV_MAX_DIM).unwrap_or(DEFAULT_MAX_DIM);
    let max_dim = match (flag_max_dim, section.get("max-dim")) {
        (Some(d), _) => d,
        (None, Some(e)) => parse_num(e)?,
        (None, None) => default_dim,
    };
    if max_dim == 0 {
        return Err(ConfigError::at(kind.line, "max-dim must be positive"));
    }
    let enumeration_cap = match raw.section("caps").and_then(|s| s.get("enumeration")) {
        Some(e) => parse_num(e)?,
        None => env_cap(ENV_ENUM_CAP).unwrap_or(DEFAULT_ENUM_CAP),
    };
    if enumeration_cap == 0 {
        return Err(ConfigError::at(kind.line, "enumeration cap must be positive"));
    }

    let wrap = |line: usize| move |e: nilspace_core::Error| ConfigError::at(line, e.to_string());
    match kind.value.as_str() {
        "dk" => {
            let moduli: Vec<u32> = parse_list(section.require("moduli")?)?;
            let degree: usize = parse_num(section.require("degree")?)?;
            let space = dk_space(&moduli, degree, max_dim).map_err(wrap(kind.line))?;
            Ok(BuiltSpace {
                space,
                enumeration_cap,
            })
        }
        "heisenberg-nilmanifold" => {
            let modulus: u32 = parse_num(section.require("modulus")?)?;
            let lattice: Vec<Elem> = match section.get("lattice") {
                Some(e) => parse_list(e)?,
                None => Vec::new(),
            };
            let filt = make_heisenberg(modulus).map_err(wrap(kind.line))?;
            let name = format!("heisenberg-{modulus}-nilmanifold");
            let nil =
                nilmanifold_space(filt, &lattice, max_dim, name).map_err(wrap(kind.line))?;
            Ok(BuiltSpace {
                space: nil.space.clone(),
                enumeration_cap,
            })
        }
        "abelian-nilmanifold" => {
            let moduli: Vec<u32> = parse_list(section.require("moduli")?)?;
            let degree: usize = parse_num(section.require("degree")?)?;
            let lattice: Vec<Elem> = match section.get("lattice") {
                Some(e) => parse_list(e)?,
                None => Vec::new(),
            };
            let filt =
                Filtration::abelian_of_degree(&moduli, degree).map_err(wrap(kind.line))?;
            let name = format!(
                "abelian-nilmanifold({})",
                moduli.iter().map(|m| format!("Z/{m}")).collect::<Vec<_>>().join(" x ")
            );
            let nil =
                nilmanifold_space(filt, &lattice, max_dim, name).map_err(wrap(kind.line))?;
            Ok(BuiltSpace {
                space: nil.space.clone(),
                enumeration_cap,
            })
        }
        "table" => {
            let points: usize = parse_num(section.require("points")?)?;
            if points == 0 {
                return Err(ConfigError::at(kind.line, "points must be positive"));
            }
            let degree: Option<usize> = match section.get("degree") {
                Some(e) => Some(parse_num(e)?),
                None => None,
            };
            let cubes_section = raw
                .section("cubes")
                .ok_or_else(|| ConfigError::at(kind.line, "table spaces need a [cubes] section"))?;
            let mut top = 0usize;
            let mut parsed: Vec<(usize, Config)> = Vec::new();
            for e in cubes_section.get_all("cube") {
                let vals: Vec<Point> = parse_list(e)?;
                if !vals.len().is_power_of_two() {
                    return Err(ConfigError::at(
                        e.line,
                        format!("cube needs a power-of-two vertex count, got {}", vals.len()),
                    ));
                }
                if let Some(&v) = vals.iter().find(|&&v| v as usize >= points) {
                    return Err(ConfigError::at(
                        e.line,
                        format!("vertex {v} out of range for {points} points"),
                    ));
                }
                let dim = vals.len().trailing_zeros() as usize;
                top = top.max(dim);
                parsed.push((dim, Configuration::new(dim, vals)));
            }
            let top = top.min(max_dim);
            let mut sets: Vec<HashSet<Config>> = vec![HashSet::new(); top + 1];
            for (dim, c) in parsed {
                if dim <= top {
                    sets[dim].insert(c);
                }
            }
            let space = CubeSpace::from_sets("table", points, sets, degree)
                .map_err(wrap(cubes_section.line))?;
            Ok(BuiltSpace {
                space,
                enumeration_cap,
            })
        }
        other => Err(ConfigError::at(
            kind.line,
            format!("unknown space kind `{other}` (expected dk, heisenberg-nilmanifold, abelian-nilmanifold, or table)"),
        )),
    }
}
