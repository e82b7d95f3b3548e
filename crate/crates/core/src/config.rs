//! Analysis configuration: the JSON domain tree, the domain stack it builds,
//! and the option table.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::numeric::NonRelConfig;

pub const ITERATORS: [&str; 3] = ["intraproc", "loops", "interproc"];
pub const STRING_DOMAINS: [&str; 3] = ["string.length", "string.summary", "string.powerset"];
pub const NUMERIC_DOMAINS: [&str; 3] = ["intervals", "congruences", "polyhedra"];
pub const REDUCTIONS: [&str; 2] = ["itv_congr", "string.length_summary"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigNode {
    Leaf(String),
    Seq(Vec<ConfigNode>),
    Product {
        children: Vec<ConfigNode>,
        reductions: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigTree {
    pub language: String,
    pub root: ConfigNode,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    /// JSON pointer into the offending document.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn is_known(name: &str) -> bool {
    ITERATORS.contains(&name) || STRING_DOMAINS.contains(&name) || NUMERIC_DOMAINS.contains(&name)
}

fn parse_node(v: &Value, path: &str) -> Result<ConfigNode, ConfigError> {
    match v {
        Value::String(name) => {
            if is_known(name) {
                Ok(ConfigNode::Leaf(name.clone()))
            } else {
                Err(ConfigError::new(path, format!("unknown domain '{name}'")))
            }
        }
        Value::Object(map) => {
            let children = |key: &str| -> Result<Vec<ConfigNode>, ConfigError> {
                let p = format!("{path}/{key}");
                let Some(Value::Array(items)) = map.get(key) else {
                    return Err(ConfigError::new(&p, format!("'{key}' expects a list of domains")));
                };
                if items.is_empty() {
                    return Err(ConfigError::new(&p, format!("empty '{key}'")));
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(i, c)| parse_node(c, &format!("{p}/{i}")))
                    .collect()
            };
            if map.contains_key("seq") {
                if let Some(k) = map.keys().find(|k| *k != "seq") {
                    return Err(ConfigError::new(format!("{path}/{k}"), format!("unexpected key '{k}'")));
                }
                Ok(ConfigNode::Seq(children("seq")?))
            } else if map.contains_key("product") {
                if let Some(k) = map.keys().find(|k| *k != "product" && *k != "reductions") {
                    return Err(ConfigError::new(format!("{path}/{k}"), format!("unexpected key '{k}'")));
                }
                let kids = children("product")?;
                let mut reductions = Vec::new();
                if let Some(r) = map.get("reductions") {
                    let p = format!("{path}/reductions");
                    let Value::Array(items) = r else {
                        return Err(ConfigError::new(p, "'reductions' expects a list of names"));
                    };
                    for (i, it) in items.iter().enumerate() {
                        match it {
                            Value::String(s) if REDUCTIONS.contains(&s.as_str()) => reductions.push(s.clone()),
                            Value::String(s) => {
                                return Err(ConfigError::new(format!("{p}/{i}"), format!("unknown reduction '{s}'")))
                            }
                            _ => return Err(ConfigError::new(format!("{p}/{i}"), "reduction names are strings")),
                        }
                    }
                }
                Ok(ConfigNode::Product {
                    children: kids,
                    reductions,
                })
            } else {
                Err(ConfigError::new(path, "malformed domain node: expected 'seq' or 'product'"))
            }
        }
        _ => Err(ConfigError::new(path, "malformed domain node")),
    }
}

/// Leaves in document order with their JSON pointers.
fn leaves<'a>(n: &'a ConfigNode, path: &str, out: &mut Vec<(&'a str, String)>) {
    match n {
        ConfigNode::Leaf(s) => out.push((s, path.to_string())),
        ConfigNode::Seq(c) => {
            for (i, k) in c.iter().enumerate() {
                leaves(k, &format!("{path}/seq/{i}"), out);
            }
        }
        ConfigNode::Product { children, .. } => {
            for (i, k) in children.iter().enumerate() {
                leaves(k, &format!("{path}/product/{i}"), out);
            }
        }
    }
}

fn check_reductions(n: &ConfigNode, path: &str) -> Result<(), ConfigError> {
    match n {
        ConfigNode::Leaf(_) => Ok(()),
        ConfigNode::Seq(c) => c
            .iter()
            .enumerate()
            .try_for_each(|(i, k)| check_reductions(k, &format!("{path}/seq/{i}"))),
        ConfigNode::Product { children, reductions } => {
            let names: Vec<&str> = children
                .iter()
                .filter_map(|c| match c {
                    ConfigNode::Leaf(s) => Some(s.as_str()),
                    _ => None,
                })
                .collect();
            for (i, r) in reductions.iter().enumerate() {
                let need: &[&str] = match r.as_str() {
                    "itv_congr" => &["intervals", "congruences"],
                    _ => &["string.length", "string.summary"],
                };
                if let Some(m) = need.iter().find(|d| !names.contains(d)) {
                    return Err(ConfigError::new(
                        format!("{path}/reductions/{i}"),
                        format!("reduction '{r}' needs '{m}' in the same product"),
                    ));
                }
            }
            children
                .iter()
                .enumerate()
                .try_for_each(|(i, k)| check_reductions(k, &format!("{path}/product/{i}")))
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(document: &str) -> Result<ConfigTree, ConfigError> {
    let v: Value =
        serde_json::from_str(document).map_err(|e| ConfigError::new("", format!("invalid JSON: {e}")))?;
    parse_config_value(&v)
}

pub fn parse_config_value(v: &Value) -> Result<ConfigTree, ConfigError> {
    let Value::Object(map) = v else {
        return Err(ConfigError::new("", "configuration must be a JSON object"));
    };
    if let Some(k) = map.keys().find(|k| *k != "language" && *k != "domain") {
        return Err(ConfigError::new(format!("/{k}"), format!("unexpected key '{k}'")));
    }
    let language = match map.get("language") {
        Some(Value::String(l)) if l == "universal" => l.clone(),
        Some(Value::String(l)) => return Err(ConfigError::new("/language", format!("unsupported language '{l}'"))),
        Some(_) => return Err(ConfigError::new("/language", "language must be a string")),
        None => return Err(ConfigError::new("", "missing 'language'")),
    };
    let Some(d) = map.get("domain") else {
        return Err(ConfigError::new("", "missing 'domain'"));
    };
    let root = parse_node(d, "/domain")?;

    let mut ls = Vec::new();
    leaves(&root, "/domain", &mut ls);
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    for (name, path) in &ls {
        if seen.insert(name, path).is_some() {
            let what = if ITERATORS.contains(name) { "iterator" } else { "domain" };
            return Err(ConfigError::new(path, format!("duplicate {what} '{name}'")));
        }
    }
    if !seen.contains_key("intraproc") {
        return Err(ConfigError::new("/domain", "missing iterator 'intraproc'"));
    }
    let has_poly = seen.contains_key("polyhedra");
    let has_nonrel = seen.contains_key("intervals") || seen.contains_key("congruences");
    if !has_poly && !has_nonrel {
        return Err(ConfigError::new("/domain", "missing numeric backend"));
    }
    if has_poly && has_nonrel {
        let p = ls.iter().filter(|(n, _)| NUMERIC_DOMAINS.contains(n)).nth(1).map(|(_, p)| p.clone());
        return Err(ConfigError::new(p.unwrap_or_default(), "more than one numeric backend"));
    }
    if has_nonrel {
        // intervals and congruences must share one product when both appear
        let paths: Vec<&String> = ls
            .iter()
            .filter(|(n, _)| *n == "intervals" || *n == "congruences")
            .map(|(_, p)| p)
            .collect();
        if paths.len() == 2 {
            let parent = |p: &str| p.rsplit_once('/').map(|x| x.0.to_string()).unwrap_or_default();
            if parent(paths[0]) != parent(paths[1]) || !paths[0].contains("/product/") {
                return Err(ConfigError::new(
                    paths[1].clone(),
                    "intervals and congruences must be combined in one product",
                ));
            }
        }
    }
    check_reductions(&root, "/domain")?;
    Ok(ConfigTree { language, root })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Polyhedra,
    NonRel(NonRelConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StringLayer {
    pub length: bool,
    pub summary: bool,
    pub powerset: bool,
    pub length_summary: bool,
}

impl StringLayer {
    pub fn any(&self) -> bool {
        self.length || self.summary || self.powerset
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptionKind {
    Flag,
    Int,
    String,
    Choice { values: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptionValue {
    Flag(bool),
    Int(i64),
    Str(String),
}

impl fmt::Display for OptionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptionValue::Flag(b) => write!(f, "{b}"),
            OptionValue::Int(n) => write!(f, "{n}"),
            OptionValue::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionMeta {
    pub key: String,
    pub owner: String,
    #[serde(flatten)]
    pub kind: OptionKind,
    pub default: OptionValue,
    pub doc: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("option '{key}': {message}")]
pub struct OptionError {
    pub key: String,
    pub message: String,
}

fn meta(key: &str, owner: &str, kind: OptionKind, default: OptionValue, doc: &str) -> OptionMeta {
    OptionMeta {
        key: key.into(),
        owner: owner.into(),
        kind,
        default,
        doc: doc.into(),
    }
}

fn framework_options() -> Vec<OptionMeta> {
    let choice = |v: &[&str]| OptionKind::Choice {
        values: v.iter().map(|s| s.to_string()).collect(),
    };
    vec![
        meta(
            "engine",
            "framework",
            choice(&["automatic", "interactive"]),
            OptionValue::Str("automatic".into()),
            "Run to completion or drive the analysis from the debugger",
        ),
        meta(
            "format",
            "framework",
            choice(&["text", "json"]),
            OptionValue::Str("text".into()),
            "Report format",
        ),
        meta("no-color", "framework", OptionKind::Flag, OptionValue::Flag(false), "Disable ANSI colors"),
        meta(
            "show-safe-checks",
            "framework",
            OptionKind::Flag,
            OptionValue::Flag(false),
            "List proved checks in the report",
        ),
        meta(
            "call-depth",
            "framework",
            OptionKind::Int,
            OptionValue::Int(64),
            "Maximal depth of inlined calls",
        ),
    ]
}

fn loop_options() -> Vec<OptionMeta> {
    vec![
        meta(
            "widening-delay",
            "loops",
            OptionKind::Int,
            OptionValue::Int(1),
            "Number of joins before widening",
        ),
        meta(
            "loop-unrolling",
            "loops",
            OptionKind::Int,
            OptionValue::Int(0),
            "Number of iterations analyzed separately before the fixpoint",
        ),
        meta(
            "decreasing-iterations",
            "loops",
            OptionKind::Int,
            OptionValue::Int(1),
            "Number of narrowing passes after stabilization",
        ),
        meta(
            "widening-thresholds",
            "loops",
            OptionKind::String,
            OptionValue::Str(String::new()),
            "Comma-separated integers used as widening thresholds",
        ),
    ]
}

fn powerset_options() -> Vec<OptionMeta> {
    vec![meta(
        "string.powerset.max-size",
        "string.powerset",
        OptionKind::Int,
        OptionValue::Int(5),
        "Largest set of strings tracked before going to top",
    )]
}

pub fn parse_thresholds(s: &str) -> Option<Vec<i64>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    let mut v = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().ok())
        .collect::<Option<Vec<_>>>()?;
    v.sort_unstable();
    v.dedup();
    Some(v)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainStack {
    pub tree: ConfigTree,
    pub intraproc: bool,
    pub loops: bool,
    pub interproc: bool,
    pub strings: StringLayer,
    pub backend: Backend,
    metas: Vec<OptionMeta>,
    options: BTreeMap<String, OptionValue>,
}

/// Instantiates the stack described by a validated tree.
pub fn build_stack(tree: &ConfigTree) -> DomainStack {
    let mut ls = Vec::new();
    leaves(&tree.root, "", &mut ls);
    let has = |n: &str| ls.iter().any(|(x, _)| *x == n);
    let mut reductions = Vec::new();
    collect_reductions(&tree.root, &mut reductions);
    let backend = if has("polyhedra") {
        Backend::Polyhedra
    } else {
        Backend::NonRel(NonRelConfig {
            intervals: has("intervals"),
            congruences: has("congruences"),
            reduce: reductions.contains(&"itv_congr"),
        })
    };
    let strings = StringLayer {
        length: has("string.length"),
        summary: has("string.summary"),
        powerset: has("string.powerset"),
        length_summary: reductions.contains(&"string.length_summary"),
    };
    let mut metas = framework_options();
    if has("loops") {
        metas.extend(loop_options());
    }
    if strings.powerset {
        metas.extend(powerset_options());
    }
    let options = metas.iter().map(|m| (m.key.clone(), m.default.clone())).collect();
    DomainStack {
        tree: tree.clone(),
        intraproc: has("intraproc"),
        loops: has("loops"),
        interproc: has("interproc"),
        strings,
        backend,
        metas,
        options,
    }
}

fn collect_reductions<'a>(n: &'a ConfigNode, out: &mut Vec<&'a str>) {
    match n {
        ConfigNode::Leaf(_) => {}
        ConfigNode::Seq(c) => c.iter().for_each(|k| collect_reductions(k, out)),
        ConfigNode::Product { children, reductions } => {
            out.extend(reductions.iter().map(|s| s.as_str()));
            children.iter().for_each(|k| collect_reductions(k, out));
        }
    }
}

/// Parses, validates and builds in one step.
pub fn load_stack(document: &str) -> Result<DomainStack, ConfigError> {
    Ok(build_stack(&parse_config(document)?))
}

pub fn list_options(stack: &DomainStack) -> Vec<OptionMeta> {
    stack.metas.clone()
}

pub fn set_option(stack: &mut DomainStack, key: &str, value: &str) -> Result<(), OptionError> {
    let err = |m: &str| OptionError {
        key: key.to_string(),
        message: m.to_string(),
    };
    let Some(m) = stack.metas.iter().find(|m| m.key == key) else {
        return Err(err("unknown option"));
    };
    let v = match &m.kind {
        OptionKind::Flag => match value.trim() {
            "true" | "1" | "on" | "" => OptionValue::Flag(true),
            "false" | "0" | "off" => OptionValue::Flag(false),
            _ => return Err(err("expected true or false")),
        },
        OptionKind::Int => {
            let n: i64 = value.trim().parse().map_err(|_| err("expected integer"))?;
            let min = if key == "call-depth" { 1 } else { 0 };
            if n < min {
                return Err(err(if min == 1 {
                    "expected a positive integer"
                } else {
                    "expected a non-negative integer"
                }));
            }
            OptionValue::Int(n)
        }
        OptionKind::String => {
            if key == "widening-thresholds" && parse_thresholds(value).is_none() {
                return Err(err("expected comma-separated integers"));
            }
            OptionValue::Str(value.trim().to_string())
        }
        OptionKind::Choice { values } => {
            if !values.iter().any(|x| x == value) {
                return Err(err(&format!("expected one of: {}", values.join(", "))));
            }
            OptionValue::Str(value.to_string())
        }
    };
    stack.options.insert(key.to_string(), v);
    Ok(())
}

impl DomainStack {
    pub fn options(&self) -> &BTreeMap<String, OptionValue> {
        &self.options
    }

    pub fn option(&self, key: &str) -> Option<&OptionValue> {
        self.options.get(key)
    }

    pub fn int_option(&self, key: &str) -> Option<i64> {
        match self.options.get(key) {
            Some(OptionValue::Int(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.options.get(key), Some(OptionValue::Flag(true)))
    }

    pub fn str_option(&self, key: &str) -> Option<&str> {
        match self.options.get(key) {
            Some(OptionValue::Str(s)) => Some(s),
            _ => None,
        }
    }

    /// Checks that the stack has the iterators a program needs.
    pub fn supports(&self, needs_loops: bool, needs_calls: bool) -> Result<(), ConfigError> {
        if needs_loops && !self.loops {
            return Err(ConfigError::new("/domain", "the program has loops but iterator 'loops' is not enabled"));
        }
        if needs_calls && !self.interproc {
            return Err(ConfigError::new(
                "/domain",
                "the program calls functions but iterator 'interproc' is not enabled",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RELATIONAL: &str = r#"{"language":"universal",
 "domain":{"seq":["intraproc","loops","interproc",
   {"product":["string.length","string.summary"],
    "reductions":["string.length_summary"]},
   "polyhedra"]}}"#;

    #[test]
    fn relational_tree_shape() {
        let t = parse_config(RELATIONAL).unwrap();
        let leaf = |s: &str| ConfigNode::Leaf(s.into());
        assert_eq!(
            t.root,
            ConfigNode::Seq(vec![
                leaf("intraproc"),
                leaf("loops"),
                leaf("interproc"),
                ConfigNode::Product {
                    children: vec![leaf("string.length"), leaf("string.summary")],
                    reductions: vec!["string.length_summary".into()],
                },
                leaf("polyhedra"),
            ])
        );
        let s = build_stack(&t);
        assert_eq!(s.backend, Backend::Polyhedra);
        assert_eq!(list_options(&s).len(), 9);
    }

    #[test]
    fn nonrel_tree() {
        let doc = r#"{"language":"universal","domain":{"seq":["intraproc","loops",{"product":["intervals","congruences"],"reductions":["itv_congr"]}]}}"#;
        let s = load_stack(doc).unwrap();
        assert_eq!(s.backend, Backend::NonRel(NonRelConfig::product()));
    }

    #[test]
    fn errors_carry_paths() {
        let e = parse_config(r#"{"language":"universal","domain":"octagons"}"#).unwrap_err();
        assert_eq!(e.path, "/domain");
        assert_eq!(e.message, "unknown domain 'octagons'");
        let e = parse_config(r#"{"language":"universal","domain":{"seq":["intraproc","loops"]}}"#).unwrap_err();
        assert_eq!(e.message, "missing numeric backend");
        let e = parse_config(r#"{"language":"universal","domain":{"seq":["intraproc","loops","loops","intervals"]}}"#)
            .unwrap_err();
        assert_eq!((e.path.as_str(), e.message.as_str()), ("/domain/seq/2", "duplicate iterator 'loops'"));
        let e = parse_config(r#"{"language":"universal","domain":{"seq":["intraproc",{"product":["intervals"],"reductions":["itv_congr"]}]}}"#)
            .unwrap_err();
        assert_eq!(e.path, "/domain/seq/1/reductions/0");
        let e = parse_config(r#"{"language":"universal","domain":{"seq":["intraproc",7]}}"#).unwrap_err();
        assert_eq!(e.path, "/domain/seq/1");
    }

    #[test]
    fn options() {
        let mut s = load_stack(RELATIONAL).unwrap();
        set_option(&mut s, "widening-delay", "3").unwrap();
        assert_eq!(s.int_option("widening-delay"), Some(3));
        set_option(&mut s, "engine", "interactive").unwrap();
        assert_eq!(s.str_option("engine"), Some("interactive"));
        let e = set_option(&mut s, "widening-delay", "abc").unwrap_err();
        assert_eq!(e.message, "expected integer");
        assert!(set_option(&mut s, "format", "xml").is_err());
        assert!(set_option(&mut s, "nope", "1").is_err());
        let straight = load_stack(r#"{"language":"universal","domain":{"seq":["intraproc","intervals"]}}"#).unwrap();
        assert_eq!(list_options(&straight).len(), 5);
    }
}
