//! Plain-text persistence of a twin model.
//!
//! ```text
//! vhtwin-twin 1
//! arch mlp 8
//! input_dim 8
//! params 81
//! 0.0123
//! ...
//! ```
//!
//! Values use the shortest representation that parses back to the same
//! `f64`, so a save/load cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use vhtwin_core::forecast::{Arch, TwinModel};

use crate::error::{Error, Result};

const MAGIC: &str = "vhtwin-twin 1";

pub fn to_text(model: &TwinModel) -> String {
    let mut out = String::new();
    let arch = match model.arch {
        Arch::Linear => "linear".to_string(),
        Arch::Mlp { hidden } => format!("mlp {hidden}"),
    };
    let _ = writeln!(out, "{MAGIC}\narch {arch}\ninput_dim {}\nparams {}", model.input_dim, model.params.len());
    for p in &model.params {
        let _ = writeln!(out, "{p}");
    }
    out
}

pub fn from_text(text: &str, source: &str) -> Result<TwinModel> {
    let err = |line: usize, msg: &str| Error::Parse {
        path: source.to_string(),
        line: line as u64,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, &format!("missing {what}")));

    let (n, magic) = next("header")?;
    if magic != MAGIC {
        return Err(err(n, "not a twin file"));
    }
    let (n, arch_line) = next("arch")?;
    let arch = match arch_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["arch", "linear"] => Arch::Linear,
        ["arch", "mlp", h] => Arch::Mlp {
            hidden: h.parse().map_err(|_| err(n, "bad hidden size"))?,
        },
        _ => return Err(err(n, "expected `arch linear` or `arch mlp <hidden>`")),
    };
    let mut field = |name: &str| -> Result<usize> {
        let (n, line) = next(name)?;
        line.strip_prefix(name)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| err(n, &format!("expected `{name} <count>`")))
    };
    let input_dim = field("input_dim")?;
    let count = field("params")?;
    let mut params = Vec::with_capacity(count);
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        params.push(line.parse::<f64>().map_err(|_| err(n, "not a number"))?);
    }
    if params.len() != count {
        return Err(Error::Data(format!(
            "{source}: header announces {count} parameters, found {}",
            params.len()
        )));
    }
    TwinModel::new(arch, input_dim, params).map_err(|e| Error::Data(format!("{source}: {e}")))
}

pub fn save(path: &Path, model: &TwinModel) -> Result<()> {
    std::fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<TwinModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text, &path.display().to_string())
}
