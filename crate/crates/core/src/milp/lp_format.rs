//! CPLEX LP text writer.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::model::{MilpModel, VarId, VarKind};
use crate::error::{Error, Result};

const LINE_WIDTH: usize = 200;

/// Formats `v` with 12 significant digits, trimming trailing zeros.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.starts_with(|c: char| c.is_ascii_digit())
}

fn push_terms(out: &mut String, model: &MilpModel, terms: &[(VarId, f64)]) {
    let mut line_len = 0;
    for (k, &(v, a)) in terms.iter().enumerate() {
        let name = &model.variables[v.0].name;
        let piece = if a == 1.0 {
            if k == 0 {
                name.clone()
            } else {
                format!(" + {name}")
            }
        } else if a == -1.0 {
            if k == 0 {
                format!("- {name}")
            } else {
                format!(" - {name}")
            }
        } else if k == 0 {
            if a < 0.0 {
                format!("- {} {name}", format_number(-a))
            } else {
                format!("{} {name}", format_number(a))
            }
        } else if a < 0.0 {
            format!(" - {} {name}", format_number(-a))
        } else {
            format!(" + {} {name}", format_number(a))
        };
        if line_len + piece.len() > LINE_WIDTH {
            out.push_str("\n   ");
            line_len = 3;
        }
        line_len += piece.len();
        out.push_str(&piece);
    }
    if terms.is_empty() {
        out.push('0');
    }
}

/// Renders the model in CPLEX LP format.
pub fn to_lp_string(model: &MilpModel) -> Result<String> {
    model.validate()?;
    let mut seen = HashSet::new();
    for name in model
        .variables
        .iter()
        .map(|v| &v.name)
        .chain(model.constraints.iter().map(|c| &c.name))
    {
        if !valid_name(name) || name == "obj" || !seen.insert(name.as_str()) {
            return Err(Error::BadName(name.clone()));
        }
    }
    let mut out = String::new();
    out.push_str("Minimize\nobj: ");
    let objective: Vec<(VarId, f64)> = model.objective.iter().copied().filter(|t| t.1 != 0.0).collect();
    push_terms(&mut out, model, &objective);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, "{}: ", c.name);
        push_terms(&mut out, model, &c.terms);
        let _ = writeln!(out, " {} {}", c.relation.symbol(), format_number(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.kind == VarKind::Binary {
            if v.lower != 0.0 || v.upper != 1.0 {
                let _ = writeln!(out, "{} <= {} <= {}", format_number(v.lower), v.name, format_number(v.upper));
            }
            continue;
        }
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, "{} free", v.name);
            }
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, "{} = {}", v.name, format_number(v.lower));
            }
            (true, true) => {
                let _ = writeln!(out, "{} <= {} <= {}", format_number(v.lower), v.name, format_number(v.upper));
            }
            (true, false) => {
                if v.lower != 0.0 {
                    let _ = writeln!(out, "{} >= {}", v.name, format_number(v.lower));
                }
            }
            (false, true) => {
                let _ = writeln!(out, "-inf <= {} <= {}", v.name, format_number(v.upper));
            }
        }
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(10) {
            let _ = writeln!(out, "{}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

pub fn export_lp(model: &MilpModel, path: &Path) -> Result<()> {
    let text = to_lp_string(model)?;
    std::fs::write(path, text)?;
    Ok(())
}
