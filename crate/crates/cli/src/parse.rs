//! Value parsers for level and contrast lists, and `key = value` config files.

use std::path::Path;

/// `"1..4"`, `"2"` or `"1,3"`.
pub fn levels(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| format!("bad level `{a}`"))?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad level `{b}`"))?;
            if a > b {
                return Err(format!("empty level range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad level `{part}`"))?);
        }
    }
    if out.is_empty() {
        return Err("no levels given".into());
    }
    if out.contains(&0) {
        return Err("levels start at 1".into());
    }
    Ok(out)
}

/// Comma-separated contrasts; `a..b` expands to every decade from `a` to `b`.
/// An empty string gives an empty list.
pub fn contrasts(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (positive(a)?, positive(b)?);
            let (ea, eb) = (a.log10(), b.log10());
            if (ea - ea.round()).abs() > 1e-12 || (eb - eb.round()).abs() > 1e-12 || ea > eb {
                return Err(format!("`{part}` is not a rising range of powers of ten"));
            }
            out.extend((ea.round() as i32..=eb.round() as i32).map(|e| 10f64.powi(e)));
        } else {
            out.push(positive(part)?);
        }
    }
    Ok(out)
}

fn positive(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive contrast")),
    }
}

/// `x0,y0,x1,y1`.
pub fn island(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad coordinate `{p}`")))
        .collect::<Result<_, _>>()?;
    <[f64; 4]>::try_from(v).map_err(|_| "island needs four numbers x0,y0,x1,y1".to_string())
}

/// Turns `key = value` lines into long flags. `true` becomes a bare flag and
/// `false` drops it; `#` starts a comment.
pub fn config_flags(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key `{key}`", n + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

/// Splices the flags of every `--config <file>` in right after the
/// subcommand name, so explicit flags later on the line win.
pub fn expand_config(args: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, String> {
    let mut files = Vec::new();
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            files.push(it.next().ok_or("--config needs a file")?);
        } else if let Some(f) = a.strip_prefix("--config=") {
            files.push(f.to_string());
        } else {
            rest.push(a);
        }
    }
    if files.is_empty() {
        return Ok(rest);
    }
    let mut injected = Vec::new();
    for f in &files {
        let text = std::fs::read_to_string(Path::new(f)).map_err(|e| format!("cannot read config `{f}`: {e}"))?;
        injected.extend(config_flags(&text).map_err(|e| format!("{f}: {e}"))?);
    }
    let at = rest
        .iter()
        .skip(1)
        .position(|a| subcommands.contains(&a.as_str()))
        .map(|i| i + 2)
        .ok_or("--config needs a subcommand")?;
    rest.splice(at..at, injected);
    Ok(rest)
}
