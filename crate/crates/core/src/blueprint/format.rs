//! Blueprint text format.
//!
//! ```text
//! # comment
//! blueprint <name>
//! [biases]
//! <name> = <expr>          # expr over bgw, b, nu1, nu2 and decimals
//! [mu]
//! <bias> = <expr>          # may also use bias names; unlisted biases get 0
//! [configs]
//! <bias> <bias> | <pairwise expr> | <weight expr>
//! ```
//!
//! Expressions follow the grammar in [`super::expr`]. Writing a parsed spec
//! back out reproduces it exactly.

use super::expr::Expr;
use super::model::{BlueprintSpec, ConfigSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Head,
    Biases,
    Mu,
    Configs,
}

pub fn parse(text: &str) -> Result<BlueprintSpec> {
    let mut name = None;
    let mut spec = BlueprintSpec { name: String::new(), biases: vec![], mu: vec![], configs: vec![] };
    let mut section = Section::Head;
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let expr = |s: &str| Expr::parse(s).map_err(|m| Error::parse(ln, m));
        match line {
            "[biases]" => section = Section::Biases,
            "[mu]" => section = Section::Mu,
            "[configs]" => section = Section::Configs,
            _ => match section {
                Section::Head => {
                    let n = line
                        .strip_prefix("blueprint ")
                        .ok_or_else(|| Error::parse(ln, "expected `blueprint <name>`"))?;
                    if name.is_some() {
                        return Err(Error::parse(ln, "duplicate header"));
                    }
                    name = Some(n.trim().to_string());
                }
                Section::Biases | Section::Mu => {
                    let (lhs, rhs) = line
                        .split_once('=')
                        .ok_or_else(|| Error::parse(ln, "expected `name = expr`"))?;
                    let entry = (lhs.trim().to_string(), expr(rhs)?);
                    if section == Section::Biases {
                        spec.biases.push(entry);
                    } else {
                        spec.mu.push(entry);
                    }
                }
                Section::Configs => {
                    let parts: Vec<&str> = line.split('|').collect();
                    let [pair, pw, w] = parts[..] else {
                        return Err(Error::parse(ln, "expected `bi bj | pairwise | weight`"));
                    };
                    let ids: Vec<&str> = pair.split_whitespace().collect();
                    let [i, j] = ids[..] else {
                        return Err(Error::parse(ln, "expected two bias names"));
                    };
                    spec.configs.push(ConfigSpec {
                        i: i.to_string(),
                        j: j.to_string(),
                        pairwise: expr(pw)?,
                        weight: expr(w)?,
                    });
                }
            },
        }
    }
    spec.name = name.ok_or_else(|| Error::parse(0, "missing `blueprint <name>` header"))?;
    if spec.name.is_empty() || spec.name.contains(char::is_whitespace) {
        return Err(Error::parse(0, "blueprint name must be a single word"));
    }
    Ok(spec)
}

pub fn to_text(spec: &BlueprintSpec) -> String {
    let mut s = format!("blueprint {}\n[biases]\n", spec.name);
    for (n, e) in &spec.biases {
        s.push_str(&format!("{n} = {e}\n"));
    }
    s.push_str("[mu]\n");
    for (n, e) in &spec.mu {
        s.push_str(&format!("{n} = {e}\n"));
    }
    s.push_str("[configs]\n");
    for c in &spec.configs {
        s.push_str(&format!("{} {} | {} | {}\n", c.i, c.j, c.pairwise, c.weight));
    }
    s
}
