//! Parsers for list-valued flags.

use anyhow::{bail, Context, Result};

/// Circuit lengths: `a..b:step` (inclusive), `a..b` (step 1), a comma list,
/// or a single value. Output is sorted and deduplicated.
pub fn parse_lengths(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    let mut out = if let Some((range, step)) = split_range(text) {
        let (a, b) = range;
        let step = match step {
            Some(s) => s.parse::<usize>().with_context(|| format!("bad step '{s}' in '{text}'"))?,
            None => 1,
        };
        let a: usize = a.parse().with_context(|| format!("bad start in '{text}'"))?;
        let b: usize = b.parse().with_context(|| format!("bad end in '{text}'"))?;
        if step == 0 {
            bail!("step must be positive in '{text}'");
        }
        if a > b {
            bail!("empty range '{text}'");
        }
        (a..=b).step_by(step).collect::<Vec<_>>()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad length '{s}' in '{text}'")))
            .collect::<Result<Vec<_>>>()?
    };
    if out.is_empty() {
        bail!("no lengths in '{text}'");
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn split_range(text: &str) -> Option<((&str, &str), Option<&str>)> {
    let (a, rest) = text.split_once("..")?;
    let (b, step) = match rest.split_once(':') {
        Some((b, s)) => (b, Some(s)),
        None => (rest, None),
    };
    Some(((a.trim(), b.trim()), step.map(str::trim)))
}

/// Comma-separated reals.
pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|s| {
            let v: f64 = s.trim().parse().with_context(|| format!("bad number '{s}' in '{text}'"))?;
            if !v.is_finite() {
                bail!("non-finite value in '{text}'");
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(values)
}
