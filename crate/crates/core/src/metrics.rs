//! Step-response metrics and the weighted absolute-error integral.

use std::fmt::Write as _;

use crate::controllers::{ControllerKind, Reference};
use crate::error::{Error, Result};
use crate::integrator::SimTrace;

/// Weight on `|e|` in the error integral.
pub const ALPHA: f64 = 0.01;
/// Weight on `|ė|` in the error integral.
pub const BETA: f64 = 0.01;

pub const RISE_LOW: f64 = 0.1;
pub const RISE_HIGH: f64 = 0.9;
pub const SETTLING_BAND: f64 = 0.02;

pub const JOINT_NAMES: [&str; 2] = ["RA", "DEC"];
const ABSENT: &str = "NA";

fn normalized(series: &[f64], final_value: f64) -> Result<Vec<f64>> {
    if final_value == 0.0 || !final_value.is_finite() {
        return Err(Error::DegenerateReference);
    }
    Ok(series.iter().map(|x| x / final_value).collect())
}

/// Time at which the normalized series first reaches `level`, interpolated.
fn first_crossing(r: &[f64], t: &[f64], level: f64) -> Option<f64> {
    let k = r.iter().position(|&v| v >= level)?;
    if k == 0 {
        return Some(t[0]);
    }
    let (r0, r1) = (r[k - 1], r[k]);
    Some(t[k - 1] + (level - r0) / (r1 - r0) * (t[k] - t[k - 1]))
}

/// 10-90% rise time; `None` if the series never reaches 90% of `final_value`.
pub fn rise_time(series: &[f64], final_value: f64, t: &[f64]) -> Result<Option<f64>> {
    rise_time_between(series, final_value, t, RISE_LOW, RISE_HIGH)
}

/// Rise time between fractions `low < high` of `final_value`.
pub fn rise_time_between(series: &[f64], final_value: f64, t: &[f64], low: f64, high: f64) -> Result<Option<f64>> {
    let r = normalized(series, final_value)?;
    let Some(t_high) = first_crossing(&r, t, high) else {
        return Ok(None);
    };
    let t_low = first_crossing(&r, t, low).expect("upper crossing implies lower crossing");
    Ok(Some(t_high - t_low))
}

/// Rise and settling conventions used by [`analyze_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseConventions {
    pub rise_low: f64,
    pub rise_high: f64,
    pub settling_band: f64,
}

impl Default for ResponseConventions {
    fn default() -> Self {
        Self {
            rise_low: RISE_LOW,
            rise_high: RISE_HIGH,
            settling_band: SETTLING_BAND,
        }
    }
}

impl ResponseConventions {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 <= self.rise_low
            && self.rise_low < self.rise_high
            && self.rise_high <= 1.0
            && self.settling_band > 0.0
            && self.settling_band < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "need 0 <= rise_low < rise_high <= 1 and 0 < settling_band < 1, got {self:?}"
            )))
        }
    }
}

/// Time from the first sample until the series stays within
/// `±band_fraction·|final_value|`; `None` if it ends outside the band.
pub fn settling_time(series: &[f64], final_value: f64, t: &[f64], band_fraction: f64) -> Result<Option<f64>> {
    let r = normalized(series, final_value)?;
    let outside = |v: f64| (v - 1.0).abs() > band_fraction;
    let Some(last_out) = r.iter().rposition(|&v| outside(v)) else {
        return Ok(Some(0.0));
    };
    if last_out + 1 == r.len() {
        return Ok(None);
    }
    // Interpolate where |r - 1| crosses the band between the last outside
    // sample and the first inside one.
    let (a, b) = (r[last_out], r[last_out + 1]);
    let edge = if a > 1.0 { 1.0 + band_fraction } else { 1.0 - band_fraction };
    let frac = if b != a { ((edge - a) / (b - a)).clamp(0.0, 1.0) } else { 1.0 };
    let crossing = t[last_out] + frac * (t[last_out + 1] - t[last_out]);
    Ok(Some(crossing - t[0]))
}

/// Peak excursion past `final_value` in percent; zero for monotone approach.
pub fn overshoot_pct(series: &[f64], final_value: f64) -> Result<f64> {
    let r = normalized(series, final_value)?;
    let peak = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(100.0 * (peak - 1.0).max(0.0))
}

/// Left Riemann sum of `Σ_j (α|e_j| + β|ė_j|)` over the trace intervals.
pub fn itae(trace: &SimTrace, reference: &Reference) -> f64 {
    let h = trace.step_size;
    let n = trace.len().saturating_sub(1);
    let mut total = 0.0;
    for state in &trace.states[..n] {
        let e = reference.error(state);
        let de = reference.error_rate(state);
        for j in 0..2 {
            total += (ALPHA * e[j].abs() + BETA * de[j].abs()) * h;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransientMetrics {
    pub rise_time: [Option<f64>; 2],
    pub settling_time: [Option<f64>; 2],
    pub overshoot_pct: [Option<f64>; 2],
    pub itae_value: f64,
}

/// Per-joint step metrics against the reference set-point plus the error integral.
pub fn analyze(trace: &SimTrace, reference: &Reference) -> TransientMetrics {
    analyze_with(trace, reference, &ResponseConventions::default())
}

pub fn analyze_with(trace: &SimTrace, reference: &Reference, conv: &ResponseConventions) -> TransientMetrics {
    let mut m = TransientMetrics {
        itae_value: itae(trace, reference),
        ..Default::default()
    };
    for j in 0..2 {
        let x = trace.joint_positions(j);
        let target = reference.theta_d[j];
        m.rise_time[j] = rise_time_between(&x, target, &trace.times, conv.rise_low, conv.rise_high)
            .ok()
            .flatten();
        m.settling_time[j] = settling_time(&x, target, &trace.times, conv.settling_band).ok().flatten();
        m.overshoot_pct[j] = overshoot_pct(&x, target).ok();
    }
    m
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.to_string(), |x| format!("{x:?}"))
}

fn parse_cell(s: &str, line: usize) -> Result<Option<f64>> {
    let s = s.trim();
    if s == ABSENT {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Parse {
        line,
        msg: format!("bad number '{s}'"),
    })
}

impl TransientMetrics {
    /// Long-format CSV: `metric,joint,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,joint,value\n");
        let rows: [(&str, &[Option<f64>; 2]); 3] = [
            ("rise_time", &self.rise_time),
            ("settling_time", &self.settling_time),
            ("overshoot_pct", &self.overshoot_pct),
        ];
        for (name, vals) in rows {
            for (joint, v) in JOINT_NAMES.iter().zip(vals) {
                let _ = writeln!(s, "{name},{joint},{}", cell(*v));
            }
        }
        let _ = writeln!(s, "itae,total,{:?}", self.itae_value);
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut m = TransientMetrics::default();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "metric,joint,value")) => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "expected header 'metric,joint,value'".into(),
                })
            }
        }
        let mut seen_itae = false;
        for (idx, line) in lines {
            let lineno = idx + 1;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected 3 fields".into(),
                });
            }
            let value = parse_cell(f[2], lineno)?;
            if f[0] == "itae" {
                m.itae_value = value.ok_or(Error::Parse {
                    line: lineno,
                    msg: "itae must be present".into(),
                })?;
                seen_itae = true;
                continue;
            }
            let j = JOINT_NAMES.iter().position(|n| *n == f[1]).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("unknown joint '{}'", f[1]),
            })?;
            let slot = match f[0] {
                "rise_time" => &mut m.rise_time,
                "settling_time" => &mut m.settling_time,
                "overshoot_pct" => &mut m.overshoot_pct,
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unknown metric '{other}'"),
                    })
                }
            };
            slot[j] = value;
        }
        if !seen_itae {
            return Err(Error::Parse {
                line: 0,
                msg: "missing itae row".into(),
            });
        }
        Ok(m)
    }
}

/// Rows of the comparison table.
pub const TABLE_METRICS: [(&str, &str); 3] = [
    ("rise_time", "Rise Time"),
    ("settling_time", "Settling Time"),
    ("overshoot_pct", "Overshoot"),
];

/// One metric row per transient quantity, one (RA, DEC) column pair per controller.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonTable {
    pub columns: Vec<(ControllerKind, Option<TransientMetrics>)>,
}

impl ComparisonTable {
    /// Builds a table with columns ordered GA-FLC, GA-PD, FLC, PD.
    pub fn new(mut columns: Vec<(ControllerKind, Option<TransientMetrics>)>) -> Self {
        columns.sort_by_key(|(k, _)| ControllerKind::TABLE_ORDER.iter().position(|o| o == k));
        Self { columns }
    }

    pub fn get(&self, kind: ControllerKind) -> Option<&TransientMetrics> {
        self.columns.iter().find(|(k, _)| *k == kind).and_then(|(_, m)| m.as_ref())
    }

    fn row(&self, metric: &str) -> Vec<Option<f64>> {
        let mut out = Vec::new();
        for (_, m) in &self.columns {
            for j in 0..2 {
                out.push(m.as_ref().and_then(|m| match metric {
                    "rise_time" => m.rise_time[j],
                    "settling_time" => m.settling_time[j],
                    _ => m.overshoot_pct[j],
                }));
            }
        }
        out
    }

    fn header_cells(&self) -> Vec<String> {
        self.columns
            .iter()
            .flat_map(|(k, _)| JOINT_NAMES.map(|j| format!("{} {j}", k.display_name())))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric");
        for h in self.header_cells() {
            s.push(',');
            s.push_str(&h);
        }
        s.push('\n');
        for (key, _) in TABLE_METRICS {
            s.push_str(key);
            for v in self.row(key) {
                s.push(',');
                s.push_str(&cell(v));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty table".into(),
        })?;
        let heads: Vec<&str> = header.split(',').collect();
        if heads.first() != Some(&"metric") || heads.len() % 2 != 1 {
            return Err(Error::Parse {
                line: 1,
                msg: "malformed comparison header".into(),
            });
        }
        let mut kinds = Vec::new();
        for pair in heads[1..].chunks(2) {
            let name = pair[0].strip_suffix(" RA").ok_or(Error::Parse {
                line: 1,
                msg: format!("expected '<controller> RA', found '{}'", pair[0]),
            })?;
            let kind = ControllerKind::TABLE_ORDER
                .into_iter()
                .find(|k| k.display_name() == name)
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("unknown controller '{name}'"),
                })?;
            kinds.push(kind);
        }
        let mut cols: Vec<[[Option<f64>; 2]; 3]> = vec![[[None; 2]; 3]; kinds.len()];
        let mut rows_seen = 0;
        for (idx, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            let r = TABLE_METRICS.iter().position(|(k, _)| *k == f[0]).ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("unknown metric '{}'", f[0]),
            })?;
            if f.len() != heads.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "column count mismatch".into(),
                });
            }
            for (c, col) in cols.iter_mut().enumerate() {
                for j in 0..2 {
                    col[r][j] = parse_cell(f[1 + 2 * c + j], idx + 1)?;
                }
            }
            rows_seen += 1;
        }
        if rows_seen != TABLE_METRICS.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {} metric rows", TABLE_METRICS.len()),
            });
        }
        let columns = kinds
            .into_iter()
            .zip(cols)
            .map(|(k, c)| {
                let all_absent = c.iter().flatten().all(Option::is_none);
                let m = (!all_absent).then_some(TransientMetrics {
                    rise_time: c[0],
                    settling_time: c[1],
                    overshoot_pct: c[2],
                    itae_value: 0.0,
                });
                (k, m)
            })
            .collect();
        Ok(Self { columns })
    }

    /// Aligned plain-text rendering with four decimals.
    pub fn to_text(&self) -> String {
        let heads = self.header_cells();
        let label_w = TABLE_METRICS.iter().map(|(_, l)| l.len()).max().unwrap_or(0).max(18);
        let col_w = heads.iter().map(|h| h.len()).max().unwrap_or(0).max(10);
        let mut s = format!("{:<label_w$}", "Transient response");
        for h in &heads {
            let _ = write!(s, "  {h:>col_w$}");
        }
        s.push('\n');
        for (key, label) in TABLE_METRICS {
            let _ = write!(s, "{label:<label_w$}");
            for v in self.row(key) {
                let txt = v.map_or_else(|| ABSENT.to_string(), |x| format!("{x:.4}"));
                let _ = write!(s, "  {txt:>col_w$}");
            }
            s.push('\n');
        }
        s
    }
}
