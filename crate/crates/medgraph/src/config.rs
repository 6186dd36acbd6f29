//! Sectioned `key = value` text config, shared by scenario files and the
//! CLI config file.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::synthetic::{GraphPattern, Marginals, SyntheticScenario};

/// One `[name]` section: keys in file order, later duplicates winning.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    pub name: String,
    entries: Vec<(String, String)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::InvalidConfig(format!("bad value {raw:?} for key {key:?}"))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }
}

/// A parsed config document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IniDoc {
    sections: Vec<Section>,
}

impl IniDoc {
    pub fn parse(text: &str, origin: &str) -> Result<IniDoc> {
        let mut doc = IniDoc::default();
        let mut current: Option<Section> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if let Some(done) = current.take() {
                    doc.sections.push(done);
                }
                current = Some(Section {
                    name: name.trim().to_string(),
                    entries: Vec::new(),
                });
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    message: format!("expected `key = value`, got {line:?}"),
                });
            };
            let section = current.as_mut().ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: idx + 1,
                message: "key outside any [section]".into(),
            })?;
            section
                .entries
                .push((key.trim().to_string(), value.trim().to_string()));
        }
        if let Some(done) = current.take() {
            doc.sections.push(done);
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<IniDoc> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        IniDoc::parse(&text, &path.display().to_string())
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }
}

/// Builds a graph pattern from a name plus optional parameter keys,
/// falling back to the dimension-aware defaults.
pub fn pattern_from_parts(
    name: &str,
    d: usize,
    bandwidth: Option<usize>,
    groups: Option<usize>,
    within_prob: Option<f64>,
    hub_count: Option<usize>,
    edge_prob: Option<f64>,
) -> Result<GraphPattern> {
    let base = GraphPattern::default_for(name, d)?;
    Ok(match base {
        GraphPattern::Banded { bandwidth: def } => GraphPattern::Banded {
            bandwidth: bandwidth.unwrap_or(def),
        },
        GraphPattern::Clustered {
            groups: dg,
            within_prob: dp,
        } => GraphPattern::Clustered {
            groups: groups.unwrap_or(dg),
            within_prob: within_prob.unwrap_or(dp),
        },
        GraphPattern::Hub { hub_count: dh } => GraphPattern::Hub {
            hub_count: hub_count.unwrap_or(dh),
        },
        GraphPattern::Random { edge_prob: dp } => GraphPattern::Random {
            edge_prob: edge_prob.unwrap_or(dp),
        },
        GraphPattern::ScaleFree => GraphPattern::ScaleFree,
    })
}

/// Reads one scenario out of a `[name]` section.
///
/// Required keys: `pattern`, `d`, `t`, `n`, `seed`. Optional:
/// `perturb-edges`, `off-value`, `sigma-fill`, `marginals`, plus the
/// pattern parameters (`bandwidth`, `groups`, `within-prob`, `hub-count`,
/// `edge-prob`).
pub fn scenario_from_section(section: &Section) -> Result<SyntheticScenario> {
    let require = |key: &str| {
        section.get(key).ok_or_else(|| {
            Error::InvalidConfig(format!("scenario [{}] missing key {key:?}", section.name))
        })
    };
    let d: usize = require("d")?
        .parse()
        .map_err(|_| Error::InvalidConfig("bad d".into()))?;
    let pattern = pattern_from_parts(
        require("pattern")?,
        d,
        section.parse("bandwidth")?,
        section.parse("groups")?,
        section.parse("within-prob")?,
        section.parse("hub-count")?,
        section.parse("edge-prob")?,
    )?;
    let mut scenario = SyntheticScenario::new(
        d,
        section.parse("t")?.ok_or_else(|| {
            Error::InvalidConfig(format!("scenario [{}] missing key \"t\"", section.name))
        })?,
        section.parse("n")?.ok_or_else(|| {
            Error::InvalidConfig(format!("scenario [{}] missing key \"n\"", section.name))
        })?,
        pattern,
        section.parse("seed")?.ok_or_else(|| {
            Error::InvalidConfig(format!("scenario [{}] missing key \"seed\"", section.name))
        })?,
    );
    if let Some(k) = section.parse("perturb-edges")? {
        scenario.perturb_edges = k;
    }
    if let Some(v) = section.parse("off-value")? {
        scenario.off_value = v;
    }
    if let Some(v) = section.parse("sigma-fill")? {
        scenario.sigma_fill = v;
    }
    if let Some(m) = section.get("marginals") {
        scenario.marginals = Marginals::from_name(m)?;
    }
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let doc = IniDoc::parse(
            "# top comment\n[one]\na = 1\nb = x y\n\n[two]\na = 2\na = 3\n",
            "test",
        )
        .unwrap();
        assert_eq!(doc.sections().len(), 2);
        assert_eq!(doc.section("one").unwrap().get("a"), Some("1"));
        assert_eq!(doc.section("one").unwrap().get("b"), Some("x y"));
        // later duplicate wins
        assert_eq!(doc.section("two").unwrap().get("a"), Some("3"));
        assert!(doc.section("three").is_none());
    }

    #[test]
    fn rejects_stray_keys_and_bad_lines() {
        assert!(IniDoc::parse("a = 1\n", "test").is_err());
        assert!(IniDoc::parse("[s]\nnot a pair\n", "test").is_err());
    }

    #[test]
    fn scenario_round_trip() {
        let text = "\
[smoke]
pattern = banded
bandwidth = 2
d = 12
t = 3
n = 50
seed = 9
perturb-edges = 4
off-value = 0.25
sigma-fill = 0.05
marginals = gaussian
";
        let doc = IniDoc::parse(text, "test").unwrap();
        let scenario = scenario_from_section(doc.section("smoke").unwrap()).unwrap();
        assert_eq!(scenario.d, 12);
        assert_eq!(scenario.t_count, 3);
        assert_eq!(scenario.pattern, GraphPattern::Banded { bandwidth: 2 });
        assert_eq!(scenario.perturb_edges, 4);
        assert_eq!(scenario.marginals, Marginals::Gaussian);
        assert_eq!(scenario.seed, 9);
    }

    #[test]
    fn scenario_missing_key_is_reported() {
        let doc = IniDoc::parse("[s]\npattern = banded\nd = 5\n", "test").unwrap();
        let err = scenario_from_section(doc.section("s").unwrap()).unwrap_err();
        assert!(err.to_string().contains("missing key"), "{err}");
    }

    #[test]
    fn pattern_defaults_scale_with_dimension() {
        let p = pattern_from_parts("hub", 100, None, None, None, None, None).unwrap();
        assert_eq!(p, GraphPattern::Hub { hub_count: 5 });
        let p = pattern_from_parts("random", 30, None, None, None, None, None).unwrap();
        assert_eq!(p, GraphPattern::Random { edge_prob: 0.1 });
        assert!(pattern_from_parts("triangle", 10, None, None, None, None, None).is_err());
    }
}
