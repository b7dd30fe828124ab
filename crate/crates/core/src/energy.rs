//! Activity-based energy estimation and technology normalization.
//!
//! Energy is a dot product of the run's event counters with a per-event
//! cost profile, plus a per-cycle leakage term. Profiles are plain text,
//! one `key = picojoules` pair per line. Results are compared across
//! technologies by scaling with `L * U^2 * (W^2/3 + 2W/3)`, where `L` is the
//! feature size, `U` the supply voltage and `W` the word length.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::arch::Unit;
use crate::machine::{RunStats, BLOCKS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("technology parameters must be positive, got {0:?}")]
    BadTech(TechParams),
    #[error("unknown built-in profile `{0}`")]
    UnknownProfile(String),
}

/// Per-event energies in picojoules.
#[derive(Debug, Clone, PartialEq)]
pub struct CostProfile {
    pub name: String,
    pub imem_fetch: f64,
    pub loop_buffer_fetch: f64,
    pub block_access: [f64; BLOCKS],
    pub rf_read: f64,
    pub rf_write: f64,
    pub trigger: [f64; Unit::ALL.len()],
    pub bus_transport: f64,
    pub leakage_per_cycle: f64,
}

const PROFILE_28NM: &str = include_str!("../profiles/28nm-0.6V.profile");
const PROFILE_65NM: &str = include_str!("../profiles/65nm-1.0V.profile");

impl CostProfile {
    pub fn zero(name: &str) -> CostProfile {
        CostProfile {
            name: name.to_string(),
            imem_fetch: 0.0,
            loop_buffer_fetch: 0.0,
            block_access: [0.0; BLOCKS],
            rf_read: 0.0,
            rf_write: 0.0,
            trigger: [0.0; Unit::ALL.len()],
            bus_transport: 0.0,
            leakage_per_cycle: 0.0,
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["28nm-0.6V", "65nm-1.0V"]
    }

    pub fn builtin(name: &str) -> Result<CostProfile, EnergyError> {
        let text = match name {
            "28nm-0.6V" => PROFILE_28NM,
            "65nm-1.0V" => PROFILE_65NM,
            _ => return Err(EnergyError::UnknownProfile(name.to_string())),
        };
        CostProfile::parse(name, text)
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        if let Some(i) = key.strip_prefix("block_access.") {
            let i: usize = i.parse().ok()?;
            return self.block_access.get_mut(i);
        }
        if let Some(u) = key.strip_prefix("trigger.") {
            let unit = Unit::ALL.iter().position(|x| x.name() == u)?;
            return Some(&mut self.trigger[unit]);
        }
        Some(match key {
            "imem_fetch" => &mut self.imem_fetch,
            "loop_buffer_fetch" => &mut self.loop_buffer_fetch,
            "rf_read" => &mut self.rf_read,
            "rf_write" => &mut self.rf_write,
            "bus_transport" => &mut self.bus_transport,
            "leakage_per_cycle" => &mut self.leakage_per_cycle,
            _ => return None,
        })
    }

    /// Parse `key = value` lines; `#` starts a comment, missing keys cost 0.
    pub fn parse(name: &str, text: &str) -> Result<CostProfile, EnergyError> {
        let mut p = CostProfile::zero(name);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| EnergyError::Parse { line, msg };
            let (key, value) = body.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let v: f64 = value.parse().map_err(|_| err(format!("`{value}` is not a number")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(err(format!("cost for `{key}` must be a finite non-negative number")));
            }
            *p.slot(key).ok_or_else(|| err(format!("unknown key `{key}`")))? = v;
        }
        Ok(p)
    }

    /// Text form accepted by [`CostProfile::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: f64| writeln!(out, "{k} = {v}").unwrap();
        kv("imem_fetch", self.imem_fetch);
        kv("loop_buffer_fetch", self.loop_buffer_fetch);
        for (i, v) in self.block_access.iter().enumerate() {
            kv(&format!("block_access.{i}"), *v);
        }
        kv("rf_read", self.rf_read);
        kv("rf_write", self.rf_write);
        for u in Unit::ALL {
            kv(&format!("trigger.{}", u.name()), self.trigger[u.index()]);
        }
        kv("bus_transport", self.bus_transport);
        kv("leakage_per_cycle", self.leakage_per_cycle);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub profile: String,
    pub total_nj: f64,
    /// `(category, nJ)`; sums to `total_nj`.
    pub breakdown: Vec<(&'static str, f64)>,
    /// `f64::INFINITY` when the run cost nothing.
    pub ffts_per_mj: f64,
}

pub fn ffts_per_mj(energy_nj: f64) -> f64 {
    if energy_nj == 0.0 {
        f64::INFINITY
    } else {
        1e6 / energy_nj
    }
}

pub fn energy_of(stats: &RunStats, profile: &CostProfile) -> EnergyReport {
    let c = |n: u64, pj: f64| n as f64 * pj * 1e-3;
    let memory: f64 = (0..BLOCKS).map(|b| c(stats.block_total(b), profile.block_access[b])).sum();
    let triggers: f64 = Unit::ALL.iter().map(|u| c(stats.triggers_of(*u), profile.trigger[u.index()])).sum();
    let breakdown = vec![
        ("instruction_memory", c(stats.fetches_imem, profile.imem_fetch)),
        ("loop_buffer", c(stats.fetches_loop_buffer, profile.loop_buffer_fetch)),
        ("data_memory", memory),
        ("register_file", c(stats.rf_reads, profile.rf_read) + c(stats.rf_writes, profile.rf_write)),
        ("function_units", triggers),
        ("interconnect", c(stats.total_moves(), profile.bus_transport)),
        ("leakage", c(stats.total_cycles, profile.leakage_per_cycle)),
    ];
    let total_nj = breakdown.iter().map(|(_, e)| e).sum();
    EnergyReport { profile: profile.name.clone(), total_nj, breakdown, ffts_per_mj: ffts_per_mj(total_nj) }
}

/// Feature size (nm), supply voltage (V) and word length (bits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechParams {
    pub l_nm: f64,
    pub u_volts: f64,
    pub w_bits: f64,
}

impl TechParams {
    pub const REFERENCE: TechParams = TechParams { l_nm: 65.0, u_volts: 1.0, w_bits: 16.0 };

    pub fn new(l_nm: f64, u_volts: f64, w_bits: f64) -> Result<TechParams, EnergyError> {
        let t = TechParams { l_nm, u_volts, w_bits };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), EnergyError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.l_nm) && ok(self.u_volts) && ok(self.w_bits) {
            Ok(())
        } else {
            Err(EnergyError::BadTech(*self))
        }
    }

    fn weight(&self) -> f64 {
        let w = self.w_bits;
        self.l_nm * self.u_volts * self.u_volts * (w * w / 3.0 + 2.0 * w / 3.0)
    }
}

/// Energy `e` spent in `tech`, expressed in `reference` technology.
pub fn normalize(e: f64, tech: &TechParams, reference: &TechParams) -> Result<f64, EnergyError> {
    tech.validate()?;
    reference.validate()?;
    Ok(e * reference.weight() / tech.weight())
}

/// Transforms per millijoule after normalizing the per-transform energy.
pub fn normalize_ffts_per_mj(raw: f64, tech: &TechParams, reference: &TechParams) -> Result<f64, EnergyError> {
    tech.validate()?;
    reference.validate()?;
    Ok(raw * tech.weight() / reference.weight())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub name: String,
    pub raw_ffts_per_mj: f64,
    pub tech: TechParams,
}

impl ComparisonRow {
    pub fn new(name: &str, raw_ffts_per_mj: f64, l_nm: f64, u_volts: f64, w_bits: f64) -> ComparisonRow {
        ComparisonRow { name: name.to_string(), raw_ffts_per_mj, tech: TechParams { l_nm, u_volts, w_bits } }
    }
}

/// Published 1024-point designs: name, FFT/mJ and technology, with the
/// normalized FFT/mJ each publication reports.
pub fn published_designs() -> Vec<(ComparisonRow, f64)> {
    vec![
        (ComparisonRow::new("garrido16", 2641.0, 65.0, 1.10, 16.0), 3196.0),
        (ComparisonRow::new("proposed-28nm", 20916.0, 28.0, 0.60, 16.0), 3243.0),
        (ComparisonRow::new("shami18", 2287.0, 65.0, 1.20, 16.0), 3292.0),
        (ComparisonRow::new("pitkanen11", 802.0, 130.0, 1.50, 16.0), 3609.0),
        (ComparisonRow::new("bass99", 39.0, 600.0, 3.30, 20.0), 6058.0),
        (ComparisonRow::new("proposed-65nm", 7171.0, 65.0, 1.00, 16.0), 7171.0),
        (ComparisonRow::new("huang16", 13360.0, 90.0, 1.00, 16.0), 18498.0),
        (ComparisonRow::new("garrido18", 77131.0, 55.0, 0.90, 16.0), 52865.0),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub raw_ffts_per_mj: f64,
    pub norm_ffts_per_mj: f64,
}

/// Normalize every row to the reference technology, ascending by the
/// normalized figure.
pub fn table1_report(rows: &[ComparisonRow]) -> Result<Vec<ReportRow>, EnergyError> {
    let mut out = rows
        .iter()
        .map(|r| {
            Ok(ReportRow {
                name: r.name.clone(),
                raw_ffts_per_mj: r.raw_ffts_per_mj,
                norm_ffts_per_mj: normalize_ffts_per_mj(r.raw_ffts_per_mj, &r.tech, &TechParams::REFERENCE)?,
            })
        })
        .collect::<Result<Vec<_>, EnergyError>>()?;
    out.sort_by(|a, b| a.norm_ffts_per_mj.partial_cmp(&b.norm_ffts_per_mj).unwrap_or(Ordering::Equal));
    Ok(out)
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("name,raw_fft_per_mj,norm_fft_per_mj\n");
    for r in rows {
        writeln!(out, "{},{:.1},{:.1}", r.name, r.raw_ffts_per_mj, r.norm_ffts_per_mj).unwrap();
    }
    out
}

pub fn report_table(rows: &[ReportRow]) -> String {
    let mut out = format!("{:<16} {:>12} {:>12}\n", "design", "FFT/mJ", "norm FFT/mJ");
    for r in rows {
        writeln!(out, "{:<16} {:>12.1} {:>12.1}", r.name, r.raw_ffts_per_mj, r.norm_ffts_per_mj).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_with_lb(n: u64) -> RunStats {
        RunStats { fetches_loop_buffer: n, total_cycles: n, ..RunStats::default() }
    }

    #[test]
    fn zero_and_single_term() {
        let r = energy_of(&stats_with_lb(5120), &CostProfile::zero("z"));
        assert_eq!(r.total_nj, 0.0);
        assert_eq!(r.ffts_per_mj, f64::INFINITY);
        let mut p = CostProfile::zero("lb");
        p.loop_buffer_fetch = 1.0;
        let r = energy_of(&stats_with_lb(5120), &p);
        assert!((r.total_nj - 5.12).abs() < 1e-12);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let p = CostProfile::parse("t", "# c\nimem_fetch = 2.5\ntrigger.CMUL = 1\nblock_access.8 = 3\n").unwrap();
        assert_eq!((p.imem_fetch, p.trigger[Unit::Cmul.index()], p.block_access[8]), (2.5, 1.0, 3.0));
        assert_eq!(CostProfile::parse("t", &p.to_text()).unwrap(), p);
        for (text, line) in [("\n\nbogus = 1", 3), ("rf_read 1", 1), ("rf_read = x", 1), ("rf_read = -1", 1), ("block_access.9 = 1", 1)] {
            match CostProfile::parse("t", text) {
                Err(EnergyError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn builtins_parse() {
        for name in CostProfile::builtin_names() {
            let p = CostProfile::builtin(name).unwrap();
            assert!(p.imem_fetch > p.loop_buffer_fetch);
        }
        assert!(CostProfile::builtin("nope").is_err());
    }

    #[test]
    fn normalization_examples() {
        let r = TechParams::REFERENCE;
        assert_eq!(normalize(3.5, &r, &r).unwrap(), 3.5);
        let t28 = TechParams::new(28.0, 0.6, 16.0).unwrap();
        assert!((normalize_ffts_per_mj(20916.0, &t28, &r).unwrap() - 3243.0).abs() <= 1.0);
        let g16 = TechParams::new(65.0, 1.1, 16.0).unwrap();
        assert!((normalize_ffts_per_mj(2641.0, &g16, &r).unwrap() - 3196.0).abs() <= 1.0);
        assert!(TechParams::new(0.0, 1.0, 16.0).is_err());
    }

    #[test]
    fn report_ordering_and_csv() {
        assert!(table1_report(&[]).unwrap().is_empty());
        let one = table1_report(&[ComparisonRow::new("ref", 100.0, 65.0, 1.0, 16.0)]).unwrap();
        assert_eq!(one[0].norm_ffts_per_mj, 100.0);
        let rows: Vec<_> = published_designs().into_iter().map(|(r, _)| r).collect();
        let rep = table1_report(&rows).unwrap();
        let names: Vec<_> = rep.iter().map(|r| r.name.as_str()).collect();
        let paper: Vec<_> = rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, paper);
        let csv = report_csv(&rep);
        assert!(csv.starts_with("name,raw_fft_per_mj,norm_fft_per_mj\ngarrido16,2641.0,3195.6"));
    }
}
