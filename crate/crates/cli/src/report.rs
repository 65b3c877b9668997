//! The analysis report and its two renderings.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use fcrystal::families::Family;
use fcrystal::{AlphaBetaDelta, IsoReport, NStatus, Slope, SlopeData};

pub const SCHEMA: &str = "fcrystal-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub input: InputEcho,
    pub slopes: SlopeSection,
    pub level_torsion: Option<LevelTorsionSection>,
    pub bounds: BTreeMap<String, u64>,
    pub n: NSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub p: u64,
    pub m: usize,
    pub rank: usize,
    pub modulus: String,
    pub precision: u32,
    /// `"auto"` or `"explicit"`.
    pub precision_rule: &'static str,
    pub auto_precision: u64,
    pub q_max: u64,
    pub summands: Option<Vec<usize>>,
    pub family: Option<Family>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeSection {
    pub hodge: Vec<u32>,
    pub hodge_numbers: BTreeMap<u32, usize>,
    pub newton: Vec<String>,
    pub hodge_polygon: Vec<(u64, String)>,
    pub newton_polygon: Vec<(u64, String)>,
    pub isoclinic: bool,
    pub lambda: Option<String>,
    pub ordinary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelTorsionSection {
    pub lower: u64,
    pub upper: u64,
    pub exact: bool,
    pub certificate: String,
    pub trace: Vec<AlphaBetaDelta>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NSection {
    pub status: &'static str,
    pub value: Option<u64>,
    pub upper_bound: Option<u64>,
    pub certificate: Option<String>,
    pub note: Option<String>,
}

fn slope_str(s: &Slope) -> String {
    s.to_string()
}

/// Vertices of the polygon with the given ascending slopes (breakpoints
/// only, endpoints included).
fn vertices(slopes: &[Slope]) -> Vec<(u64, String)> {
    let mut out = vec![(0, "0".to_string())];
    let mut y = Slope::from_integer(0);
    for (i, s) in slopes.iter().enumerate() {
        y += s;
        if i + 1 == slopes.len() || slopes[i + 1] != *s {
            out.push((i as u64 + 1, slope_str(&y)));
        }
    }
    out
}

impl SlopeSection {
    pub fn new(sd: &SlopeData) -> Self {
        let hodge: Vec<Slope> = sd.hodge.as_slice().iter().map(|&e| Slope::from_integer(e as i64)).collect();
        SlopeSection {
            hodge: sd.hodge.as_slice().to_vec(),
            hodge_numbers: sd.hodge_numbers.clone(),
            newton: sd.newton.iter().map(slope_str).collect(),
            hodge_polygon: vertices(&hodge),
            newton_polygon: vertices(&sd.newton),
            isoclinic: sd.isoclinic,
            lambda: sd.lambda.as_ref().map(slope_str),
            ordinary: sd.ordinary,
        }
    }
}

impl Report {
    pub fn new(input: InputEcho, iso: &IsoReport) -> Self {
        let level_torsion = iso.ell.as_ref().map(|l| LevelTorsionSection {
            lower: l.lower,
            upper: l.upper,
            exact: l.exact,
            certificate: l.certificate.to_string(),
            trace: l.trace.clone(),
        });
        let ell_cert = iso.ell.as_ref().map(|l| l.certificate.to_string());
        let n = match &iso.n_status {
            NStatus::Equal => NSection {
                status: "Equal",
                value: iso.n_value(),
                upper_bound: iso.ell.as_ref().map(|l| l.upper),
                certificate: ell_cert,
                note: iso.note.clone(),
            },
            NStatus::UpperBoundOnly(b) => NSection {
                status: "UpperBoundOnly",
                value: None,
                upper_bound: Some(*b),
                certificate: Some("UpperBound".to_string()),
                note: iso.note.clone(),
            },
            NStatus::FamilyFormula(v) => NSection {
                status: "FamilyFormula",
                value: Some(*v),
                upper_bound: Some(*v),
                certificate: Some("FamilyFormula".to_string()),
                note: iso.note.clone(),
            },
            NStatus::Unresolved => NSection {
                status: "Unresolved",
                value: None,
                upper_bound: None,
                certificate: None,
                note: iso.note.clone(),
            },
        };
        Report {
            schema: SCHEMA,
            input,
            slopes: SlopeSection::new(&iso.slope_data),
            level_torsion,
            bounds: iso.bounds.clone(),
            n,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let i = &self.input;
        let _ = writeln!(
            out,
            "p = {}, m = {}, rank = {}, modulus {}, N = {} ({}), q_max = {}",
            i.p, i.m, i.rank, i.modulus, i.precision, i.precision_rule, i.q_max
        );
        if let Some(f) = &i.family {
            let _ = writeln!(out, "family         {}", serde_json::to_string(f).expect("family serializes"));
        }
        if let Some(s) = &i.summands {
            let _ = writeln!(out, "summands       {s:?}");
        }
        let s = &self.slopes;
        let join = |v: &[String]| v.join(" ");
        let _ = writeln!(out, "Hodge slopes   {}", join(&s.hodge.iter().map(u32::to_string).collect::<Vec<_>>()));
        let hn: Vec<String> = s.hodge_numbers.iter().map(|(k, v)| format!("h{k}={v}")).collect();
        let _ = writeln!(out, "Hodge numbers  {}", join(&hn));
        let _ = writeln!(out, "Newton slopes  {}", join(&s.newton));
        let iso = match &s.lambda {
            Some(l) => format!("yes (λ = {l})"),
            None => "no".to_string(),
        };
        let _ = writeln!(out, "isoclinic      {iso}");
        let _ = writeln!(out, "ordinary       {}", if s.ordinary { "yes" } else { "no" });
        if let Some(lt) = &self.level_torsion {
            let value = if lt.exact { lt.lower.to_string() } else { format!("[{}, {}]", lt.lower, lt.upper) };
            let _ = writeln!(out, "level torsion  {value} [{}]", lt.certificate);
            for t in &lt.trace {
                let _ = writeln!(out, "  {:>4} → ({}, {}, {})", t.q, t.alpha, t.beta, t.delta);
            }
        }
        if !self.bounds.is_empty() {
            let _ = writeln!(out, "bounds");
            for (k, v) in &self.bounds {
                let _ = writeln!(out, "  {k:<14} {v}");
            }
        }
        let n = &self.n;
        let value = match (n.value, n.upper_bound) {
            (Some(v), _) => v.to_string(),
            (None, Some(b)) => format!("≤ {b}"),
            (None, None) => "?".to_string(),
        };
        let cert = n.certificate.as_deref().map(|c| format!(", {c}")).unwrap_or_default();
        let _ = writeln!(out, "n              {value} ({}{cert})", n.status);
        if let Some(note) = &n.note {
            let _ = writeln!(out, "note           {note}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_vertices() {
        let s = |a, b| Slope::new(a, b);
        assert_eq!(
            vertices(&[s(1, 2), s(1, 2), s(3, 2), s(3, 2)]),
            vec![(0, "0".into()), (2, "1".into()), (4, "4".into())]
        );
        assert_eq!(vertices(&[]), vec![(0, "0".to_string())]);
    }
}
