//! Parameter grids: `start:stop:count`, `log:start:stop:count` or a comma list.

use anyhow::{bail, Context, Result};

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let mut g: Vec<f64> = linspace(start.ln(), stop.ln(), count).into_iter().map(f64::exp).collect();
    // exp(ln x) need not give x back
    if let Some(first) = g.first_mut() {
        *first = start;
    }
    if count > 1 {
        g[count - 1] = stop;
    }
    g
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let num = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in grid {text:?}"));
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (log, rest) = if parts[0].eq_ignore_ascii_case("log") { (true, &parts[1..]) } else { (false, &parts[..]) };
        let [a, b, n] = rest else { bail!("grid {text:?} must be start:stop:count or log:start:stop:count") };
        let (a, b) = (num(a)?, num(b)?);
        let n: usize = n.trim().parse().with_context(|| format!("bad count in grid {text:?}"))?;
        if log {
            if !(a > 0.0 && b > 0.0) {
                bail!("log grid {text:?} needs positive endpoints");
            }
            logspace(a, b, n)
        } else {
            linspace(a, b, n)
        }
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<Vec<_>>>()?
    };
    check_grid(&grid).with_context(|| format!("grid {text:?}"))?;
    Ok(grid)
}

/// Nonempty, finite and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        bail!("grid is empty");
    }
    if grid.iter().any(|x| !x.is_finite()) {
        bail!("grid has non-finite points");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        bail!("grid is not strictly increasing");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0.1, 0.2,0.4").unwrap(), vec![0.1, 0.2, 0.4]);
        let g = parse_grid("log:0.01:1:3").unwrap();
        assert!((g[1] - 0.1).abs() < 1e-15 && (g[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid() {
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1,0.5").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("log:0:1:4").is_err());
        assert!(parse_grid("1:1:3").is_err());
    }
}
