//! Success-rate / expected-time reports over results files.
//!
//! Each section starts with a `#` line carrying the source, fingerprint,
//! trial count, censored count and expected time (hours), followed by
//! `t_seconds,success_rate[,diversity_m<M>]` rows. Sections are separated by
//! a blank line.

use std::fmt::Write as _;

use deepbo_core::metrics::{theoretical_diversity, TrialEnsemble};

use crate::error::{Error, Result};
use crate::runner::ResultsFile;

/// Parses a comma-separated grid of seconds; `inf` is allowed.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let grid = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            _ => match t.parse::<f64>() {
                Ok(v) if v >= 0.0 => Ok(v),
                _ => Err(Error::Results(format!("bad time grid value {t:?}"))),
            },
        })
        .collect::<Result<Vec<f64>>>()?;
    if grid.is_empty() {
        return Err(Error::Results("time grid is empty".into()));
    }
    Ok(grid)
}

pub struct Source {
    pub name: String,
    pub results: ResultsFile,
}

/// One section per source, or a single section over all sources when
/// `merge` is set (their fingerprints must agree).
pub fn report(sources: &[Source], grid: &[f64], diversity: Option<usize>, merge: bool) -> Result<String> {
    if sources.is_empty() {
        return Err(Error::Results("no results files given".into()));
    }
    let groups: Vec<(String, &str, Vec<Option<f64>>)> = if merge {
        let fp = sources[0].results.fingerprint();
        if let Some(other) = sources.iter().find(|s| s.results.fingerprint() != fp) {
            return Err(Error::Results(format!(
                "cannot merge {} (fingerprint {}) with {} (fingerprint {fp})",
                other.name,
                other.results.fingerprint(),
                sources[0].name
            )));
        }
        let names: Vec<&str> = sources.iter().map(|s| s.name.as_str()).collect();
        vec![(names.join("+"), fp, sources.iter().flat_map(|s| s.results.taus()).collect())]
    } else {
        sources.iter().map(|s| (s.name.clone(), s.results.fingerprint(), s.results.taus())).collect()
    };

    let mut out = String::new();
    for (i, (name, fp, taus)) in groups.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let ensemble = TrialEnsemble::new(taus, f64::NAN, fp)
            .map_err(|e| Error::Results(format!("{name}: {e}")))?;
        let (mean, std) = match ensemble.expected_time() {
            Ok(t) => (format!("{:.6}", t.mean_hours), format!("{:.6}", t.std_hours)),
            Err(_) => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "# source={name} fingerprint={fp} trials={} censored={} expected_hours_mean={mean} expected_hours_std={std}",
            ensemble.len(),
            ensemble.censored()
        );
        out.push_str("t_seconds,success_rate");
        if let Some(m) = diversity {
            let _ = write!(out, ",diversity_m{m}");
        }
        out.push('\n');
        for &t in grid {
            let s = ensemble.success_rate(t);
            let t_str = if t.is_infinite() { "inf".to_string() } else { format!("{t:.3}") };
            let _ = write!(out, "{t_str},{s:.6}");
            if let Some(m) = diversity {
                let d = theoretical_diversity(s, m)?;
                let _ = write!(out, ",{d:.6}");
            }
            out.push('\n');
        }
    }
    Ok(out)
}
