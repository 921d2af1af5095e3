//! Mamdani fuzzy inference with triangular memberships.
//!
//! Every linguistic variable has the five labels NL, NS, Z, PS, PL. Rules
//! fire with `min`, consequents are clipped and aggregated with `max`, and
//! the crisp output is the sampled center of area of the aggregate set.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ini::{Document, Section};

/// Default number of samples for center-of-area defuzzification.
pub const DEFAULT_RESOLUTION: usize = 1001;
pub const MIN_RESOLUTION: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NL,
    NS,
    Z,
    PS,
    PL,
}

impl Label {
    pub const ALL: [Label; 5] = [Label::NL, Label::NS, Label::Z, Label::PS, Label::PL];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Self::ALL.get(i).copied()
    }

    /// Mirror image about Z (NL <-> PL, NS <-> PS).
    pub fn reflect(self) -> Label {
        Self::ALL[4 - self.index()]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NL => "NL",
            Label::NS => "NS",
            Label::Z => "Z",
            Label::PS => "PS",
            Label::PL => "PL",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Fuzzy(format!("unknown label '{s}'")))
    }
}

/// Triangle with support `(left, right)` and prototype `peak`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularMF {
    left: f64,
    peak: f64,
    right: f64,
}

impl TriangularMF {
    pub fn new(left: f64, peak: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && peak.is_finite() && right.is_finite()) {
            return Err(Error::Fuzzy("membership vertices must be finite".into()));
        }
        if !(left <= peak && peak <= right && left < right) {
            return Err(Error::Fuzzy(format!(
                "triangle ({left}, {peak}, {right}) must satisfy left <= peak <= right, left < right"
            )));
        }
        Ok(Self { left, peak, right })
    }

    pub fn left(&self) -> f64 {
        self.left
    }
    pub fn peak(&self) -> f64 {
        self.peak
    }
    pub fn right(&self) -> f64 {
        self.right
    }

    /// Copy with a new right vertex; fails if the support would collapse.
    pub fn with_right(&self, right: f64) -> Result<Self> {
        Self::new(self.left, self.peak, right)
    }

    #[inline]
    pub fn grade(&self, x: f64) -> f64 {
        if x == self.peak {
            1.0
        } else if x <= self.left || x >= self.right {
            0.0
        } else if x < self.peak {
            (x - self.left) / (self.peak - self.left)
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }
}

pub fn membership(mf: &TriangularMF, x: f64) -> f64 {
    mf.grade(x)
}

/// Five-label linguistic variable over a closed universe.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVariable {
    mfs: [TriangularMF; 5],
    universe_min: f64,
    universe_max: f64,
}

impl FuzzyVariable {
    pub fn new(mfs: [TriangularMF; 5], universe_min: f64, universe_max: f64) -> Result<Self> {
        if !(universe_min.is_finite() && universe_max.is_finite() && universe_min < universe_max) {
            return Err(Error::Fuzzy(format!(
                "universe [{universe_min}, {universe_max}] is empty or non-finite"
            )));
        }
        if mfs.windows(2).any(|w| w[0].peak >= w[1].peak) {
            return Err(Error::Fuzzy("peaks must increase strictly from NL to PL".into()));
        }
        let var = Self {
            mfs,
            universe_min,
            universe_max,
        };
        if let Some(x) = var.uncovered_point() {
            return Err(Error::Fuzzy(format!("no membership covers x = {x}")));
        }
        Ok(var)
    }

    /// Evenly spaced triangles with 50% overlap: peaks at `center + (k - 2) * half_width`.
    pub fn uniform(center: f64, half_width: f64, universe_min: f64, universe_max: f64) -> Result<Self> {
        let mut mfs = [TriangularMF {
            left: 0.0,
            peak: 0.0,
            right: 1.0,
        }; 5];
        for (k, mf) in mfs.iter_mut().enumerate() {
            let offset = k as f64 - 2.0;
            *mf = TriangularMF::new(
                center + (offset - 1.0) * half_width,
                center + offset * half_width,
                center + (offset + 1.0) * half_width,
            )?;
        }
        Self::new(mfs, universe_min, universe_max)
    }

    /// Position error (rad): peaks at multiples of π/2, universe [-π, π].
    pub fn default_error() -> Self {
        Self::uniform(0.0, FRAC_PI_2, -PI, PI).expect("default error variable")
    }

    /// Error rate (rad/s): peaks at multiples of 0.5, universe [-1, 1].
    pub fn default_rate() -> Self {
        Self::uniform(0.0, 0.5, -1.0, 1.0).expect("default rate variable")
    }

    /// Output: peaks at multiples of 50/3, universe over the peak range.
    pub fn default_output() -> Self {
        let hw = 50.0 / 3.0;
        Self::uniform(0.0, hw, -2.0 * hw, 2.0 * hw).expect("default output variable")
    }

    pub fn mfs(&self) -> &[TriangularMF; 5] {
        &self.mfs
    }
    pub fn mf(&self, label: Label) -> &TriangularMF {
        &self.mfs[label.index()]
    }
    pub fn universe_min(&self) -> f64 {
        self.universe_min
    }
    pub fn universe_max(&self) -> f64 {
        self.universe_max
    }
    pub fn width(&self) -> f64 {
        self.universe_max - self.universe_min
    }

    /// Copy with the right vertex of every label replaced.
    pub fn with_rights(&self, rights: &[f64]) -> Result<Self> {
        if rights.len() != 5 {
            return Err(Error::Fuzzy(format!("expected 5 right vertices, got {}", rights.len())));
        }
        let mut mfs = self.mfs;
        for (mf, &r) in mfs.iter_mut().zip(rights) {
            *mf = mf.with_right(r)?;
        }
        Self::new(mfs, self.universe_min, self.universe_max)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe_min, self.universe_max)
    }

    // Coverage is piecewise constant between vertices, so probing every
    // vertex and every midpoint between consecutive ones is exhaustive.
    fn uncovered_point(&self) -> Option<f64> {
        let mut pts = vec![self.universe_min, self.universe_max];
        for mf in &self.mfs {
            pts.extend([mf.left, mf.peak, mf.right]);
        }
        pts.retain(|&p| p >= self.universe_min && p <= self.universe_max);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        pts.into_iter()
            .chain(mids)
            .find(|&x| self.mfs.iter().all(|mf| mf.grade(x) == 0.0))
    }
}

pub fn fuzzify(var: &FuzzyVariable, x: f64) -> [f64; 5] {
    let x = var.clamp(x);
    var.mfs.map(|mf| mf.grade(x))
}

/// 5x5 consequent table indexed by (error label, rate label).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleBase {
    table: [[Label; 5]; 5],
}

impl RuleBase {
    pub fn new(table: [[Label; 5]; 5]) -> Self {
        Self { table }
    }

    pub fn consequent(&self, error: Label, rate: Label) -> Label {
        self.table[error.index()][rate.index()]
    }

    pub fn table(&self) -> &[[Label; 5]; 5] {
        &self.table
    }
}

impl Default for RuleBase {
    fn default() -> Self {
        use Label::*;
        Self::new([
            [NL, NL, NL, NS, Z],
            [NL, NL, NS, Z, PS],
            [NL, NS, Z, PS, PL],
            [NS, Z, PS, PL, PL],
            [Z, PS, PL, PL, PL],
        ])
    }
}

/// Firing strength of every rule, row-major over (error, rate).
pub fn infer(rules: &RuleBase, grades_e: &[f64; 5], grades_de: &[f64; 5]) -> [(Label, f64); 25] {
    let mut out = [(Label::Z, 0.0); 25];
    for (i, &ge) in grades_e.iter().enumerate() {
        for (j, &gd) in grades_de.iter().enumerate() {
            out[5 * i + j] = (rules.table[i][j], ge.min(gd));
        }
    }
    out
}

/// Max-aggregates activations into one clip level per output label.
pub fn aggregate(activations: &[(Label, f64)]) -> [f64; 5] {
    let mut levels = [0.0_f64; 5];
    for &(label, s) in activations {
        let slot = &mut levels[label.index()];
        *slot = slot.max(s);
    }
    levels
}

/// i-th of `n` evenly spaced points on `[lo, hi]`, mirror-exact for `lo = -hi`.
#[inline]
fn sample_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    let k = i as f64;
    let m = (n - 1) as f64;
    ((m - k) * lo + k * hi) / m
}

/// Center of area of the aggregated output set, sampled at `resolution` points.
///
/// The two end samples carry half weight (trapezoid rule). With full
/// weights a shoulder set that is still high at the universe edge biases
/// the centroid by about half a sample spacing, which at 1001 samples is
/// several times the error of a dense evaluation.
///
/// Returns the universe midpoint when nothing fires.
pub fn defuzzify_coa(var_out: &FuzzyVariable, activations: &[(Label, f64)], resolution: usize) -> f64 {
    coa_from_levels(var_out, &aggregate(activations), resolution)
}

fn coa_from_levels(var_out: &FuzzyVariable, levels: &[f64; 5], resolution: usize) -> f64 {
    let active: Vec<(TriangularMF, f64)> = Label::ALL
        .iter()
        .filter(|l| levels[l.index()] > 0.0)
        .map(|l| (var_out.mfs[l.index()], levels[l.index()]))
        .collect();
    let midpoint = 0.5 * (var_out.universe_min + var_out.universe_max);
    if active.is_empty() {
        return midpoint;
    }
    let smooth = active.iter().all(|(mf, _)| mf.left < mf.peak && mf.peak < mf.right);
    let (mut num, mut den) = if smooth {
        coa_sums_piecewise(var_out, &active, resolution.max(2))
    } else {
        coa_sums_sampled(var_out, &active, resolution.max(2))
    };
    for y in [var_out.universe_min, var_out.universe_max] {
        let mu = active.iter().map(|(mf, s)| mf.grade(y).min(*s)).fold(0.0, f64::max);
        num -= 0.5 * y * mu;
        den -= 0.5 * mu;
    }
    if den > 0.0 {
        num / den
    } else {
        midpoint
    }
}

/// Direct evaluation of `Σ y_k μ(y_k)` and `Σ μ(y_k)` over the sample grid.
fn coa_sums_sampled(var_out: &FuzzyVariable, active: &[(TriangularMF, f64)], n: usize) -> (f64, f64) {
    let (lo, hi) = (var_out.universe_min, var_out.universe_max);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let y = sample_point(lo, hi, i, n);
        let mu = active.iter().map(|(mf, s)| mf.grade(y).min(*s)).fold(0.0, f64::max);
        num += y * mu;
        den += mu;
    }
    (num, den)
}

/// Linear piece `μ(y) = a + b·y` on `[u, v]`.
#[derive(Clone, Copy)]
struct Piece {
    u: f64,
    v: f64,
    a: f64,
    b: f64,
}

impl Piece {
    fn at(&self, y: f64) -> f64 {
        self.a + self.b * y
    }
}

/// Same sums as [`coa_sums_sampled`], computed in closed form.
///
/// The aggregate set is the upper envelope of clipped triangles, which is
/// continuous and piecewise linear when no flank is vertical. Between
/// consecutive breakpoints it is a single linear function, so the sums over
/// the grid points falling there reduce to arithmetic series.
fn coa_sums_piecewise(var_out: &FuzzyVariable, active: &[(TriangularMF, f64)], n: usize) -> (f64, f64) {
    let (lo, hi) = (var_out.universe_min, var_out.universe_max);
    let mut pieces: Vec<Piece> = Vec::with_capacity(3 * active.len());
    for &(mf, s) in active {
        let (l, p, r) = (mf.left, mf.peak, mf.right);
        let rise_end = l + s * (p - l);
        let fall_start = r - s * (r - p);
        pieces.push(Piece { u: l, v: rise_end, a: -l / (p - l), b: 1.0 / (p - l) });
        if fall_start > rise_end {
            pieces.push(Piece { u: rise_end, v: fall_start, a: s, b: 0.0 });
        }
        pieces.push(Piece { u: fall_start, v: r, a: r / (r - p), b: -1.0 / (r - p) });
    }

    let mut breaks: Vec<f64> = Vec::with_capacity(4 * pieces.len());
    for (i, pi) in pieces.iter().enumerate() {
        breaks.push(pi.u);
        breaks.push(pi.v);
        for pj in &pieces[i + 1..] {
            if pi.b != pj.b {
                let y = (pj.a - pi.a) / (pi.b - pj.b);
                if y > pi.u.max(pj.u) && y < pi.v.min(pj.v) {
                    breaks.push(y);
                }
            }
        }
    }
    breaks.retain(|&y| y > lo && y < hi);
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let d = (hi - lo) / (n - 1) as f64;
    // First grid index at or after y; shared by adjacent intervals so every
    // sample is counted exactly once.
    let first_at = |y: f64| -> usize { (((y - lo) / d).ceil().max(0.0) as usize).min(n) };
    let (mut num, mut den) = (0.0, 0.0);
    let last = breaks.len() - 1;
    for w in 0..last {
        let (x0, x1) = (breaks[w], breaks[w + 1]);
        let k0 = first_at(x0);
        let k1 = if w + 1 == last { n } else { first_at(x1) };
        if k1 <= k0 {
            continue;
        }
        let mid = 0.5 * (x0 + x1);
        let Some(best) = pieces
            .iter()
            .filter(|p| p.u <= mid && mid <= p.v)
            .max_by(|a, b| a.at(mid).total_cmp(&b.at(mid)))
        else {
            continue;
        };
        if best.at(mid) <= 0.0 {
            continue;
        }
        // y_k = lo + k d for k in [k0, k1).
        let cnt = (k1 - k0) as f64;
        let (kf0, kf1) = (k0 as f64, (k1 - 1) as f64);
        let sum_k = 0.5 * cnt * (kf0 + kf1);
        let sum_k2 = (kf1 * (kf1 + 1.0) * (2.0 * kf1 + 1.0) - (kf0 - 1.0) * kf0 * (2.0 * kf0 - 1.0)) / 6.0;
        let sum_y = cnt * lo + d * sum_k;
        let sum_y2 = cnt * lo * lo + 2.0 * lo * d * sum_k + d * d * sum_k2;
        den += best.a * cnt + best.b * sum_y;
        num += best.a * sum_y + best.b * sum_y2;
    }
    (num, den)
}

/// Input and output scaling around the inference core:
/// `u = output · coa(error · e, rate · ė)`.
///
/// The default maps the rate universe onto ±10 rad/s and the output onto
/// ±100 rad/s². With unit gains the rate sets saturate during a step and
/// the loop barely moves within a few seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub error: f64,
    pub rate: f64,
    pub output: f64,
}

impl Default for Scaling {
    fn default() -> Self {
        Self {
            error: 1.0,
            rate: 0.1,
            output: 3.0,
        }
    }
}

/// Two-input, one-output Mamdani controller.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyController {
    pub error: FuzzyVariable,
    pub rate: FuzzyVariable,
    pub output: FuzzyVariable,
    pub rules: RuleBase,
    pub scaling: Scaling,
    pub resolution: usize,
}

impl Default for FuzzyController {
    fn default() -> Self {
        Self {
            error: FuzzyVariable::default_error(),
            rate: FuzzyVariable::default_rate(),
            output: FuzzyVariable::default_output(),
            rules: RuleBase::default(),
            scaling: Scaling::default(),
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl FuzzyController {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::Fuzzy(format!(
                "resolution {} is below the minimum {MIN_RESOLUTION}",
                self.resolution
            )));
        }
        let g = self.scaling;
        if [g.error, g.rate, g.output].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Fuzzy("scaling gains must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn variables(&self) -> [(&'static str, &FuzzyVariable); 3] {
        [("error", &self.error), ("rate", &self.rate), ("output", &self.output)]
    }

    /// Crisp output for position error `e` and error rate `e_dot`.
    pub fn output(&self, e: f64, e_dot: f64) -> f64 {
        let ge = fuzzify(&self.error, self.scaling.error * e);
        let gd = fuzzify(&self.rate, self.scaling.rate * e_dot);
        let mut levels = [0.0_f64; 5];
        for (i, &a) in ge.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in gd.iter().enumerate() {
                let slot = &mut levels[self.rules.table[i][j].index()];
                *slot = slot.max(a.min(b));
            }
        }
        self.scaling.output * coa_from_levels(&self.output, &levels, self.resolution)
    }

    /// Renders the definition as a `key = value` document.
    ///
    /// Numbers use the shortest representation that parses back to the same
    /// `f64`, so `parse(to_text(x)) == x`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# fuzzy controller definition\n");
        let _ = writeln!(s, "resolution = {}", self.resolution);
        let _ = writeln!(s, "error_gain = {:?}", self.scaling.error);
        let _ = writeln!(s, "rate_gain = {:?}", self.scaling.rate);
        let _ = writeln!(s, "output_gain = {:?}", self.scaling.output);
        for (name, var) in self.variables() {
            let _ = writeln!(s, "\n[variable {name}]");
            let _ = writeln!(s, "universe = {:?} {:?}", var.universe_min, var.universe_max);
            for (label, mf) in Label::ALL.iter().zip(&var.mfs) {
                let _ = writeln!(s, "{label} = {:?} {:?} {:?}", mf.left, mf.peak, mf.right);
            }
        }
        s.push_str("\n[rules]\n# rows: error label; columns: rate NL NS Z PS PL\n");
        for (label, row) in Label::ALL.iter().zip(&self.rules.table) {
            let cells: Vec<&str> = row.iter().map(|l| l.as_str()).collect();
            let _ = writeln!(s, "{label} = {}", cells.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let root = doc.root();
        root.deny_unknown(&["resolution", "error_gain", "rate_gain", "output_gain"])?;
        let resolution = root.parse_opt("resolution")?.unwrap_or(DEFAULT_RESOLUTION);
        let d = Scaling::default();
        let scaling = Scaling {
            error: root.parse_opt("error_gain")?.unwrap_or(d.error),
            rate: root.parse_opt("rate_gain")?.unwrap_or(d.rate),
            output: root.parse_opt("output_gain")?.unwrap_or(d.output),
        };
        let error = parse_variable(doc.require_section("variable error")?)?;
        let rate = parse_variable(doc.require_section("variable rate")?)?;
        let output = parse_variable(doc.require_section("variable output")?)?;
        let rules_sec = doc.require_section("rules")?;
        rules_sec.deny_unknown(&["NL", "NS", "Z", "PS", "PL"])?;
        let mut table = [[Label::Z; 5]; 5];
        for (row, label) in table.iter_mut().zip(Label::ALL) {
            let entry = rules_sec.require(label.as_str())?;
            let cells: Vec<Label> = entry.parse_list(5)?;
            row.copy_from_slice(&cells);
        }
        let ctl = Self {
            error,
            rate,
            output,
            rules: RuleBase::new(table),
            scaling,
            resolution,
        };
        ctl.validate()?;
        Ok(ctl)
    }
}

fn parse_variable(sec: &Section) -> Result<FuzzyVariable> {
    sec.deny_unknown(&["universe", "NL", "NS", "Z", "PS", "PL"])?;
    let u: Vec<f64> = sec.require("universe")?.parse_list(2)?;
    let mut mfs = Vec::with_capacity(5);
    for label in Label::ALL {
        let entry = sec.require(label.as_str())?;
        let v: Vec<f64> = entry.parse_list(3)?;
        mfs.push(TriangularMF::new(v[0], v[1], v[2]).map_err(|e| entry.error(e.to_string()))?);
    }
    let mfs: [TriangularMF; 5] = mfs.try_into().expect("five labels");
    FuzzyVariable::new(mfs, u[0], u[1]).map_err(|e| Error::Parse {
        line: sec.line,
        msg: format!("[{}]: {e}", sec.name),
    })
}

pub fn flc_output(e: f64, e_dot: f64, controller: &FuzzyController) -> f64 {
    controller.output(e, e_dot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn tri(l: f64, p: f64, r: f64) -> TriangularMF {
        TriangularMF::new(l, p, r).unwrap()
    }

    #[test]
    fn membership_basic_shape() {
        let mf = tri(-1.57, 0.0, 1.57);
        assert_eq!(membership(&mf, 0.0), 1.0);
        assert_eq!(membership(&mf, 1.57), 0.0);
        assert_eq!(membership(&mf, -1.57), 0.0);
        assert_eq!(membership(&mf, 5.0), 0.0);
        assert_relative_eq!(membership(&mf, 0.785), 0.5, epsilon = 1e-15);
        assert_relative_eq!(membership(&mf, -0.785), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn membership_left_shoulder() {
        let mf = tri(0.0, 0.0, 2.0);
        assert_eq!(mf.grade(0.0), 1.0);
        assert_eq!(mf.grade(-1e-12), 0.0);
        assert_relative_eq!(mf.grade(0.5), 0.75);
    }

    #[test]
    fn invalid_triangles_rejected() {
        assert!(TriangularMF::new(1.0, 0.0, 2.0).is_err());
        assert!(TriangularMF::new(1.0, 1.0, 1.0).is_err());
        assert!(TriangularMF::new(0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn variable_invariants() {
        let good = FuzzyVariable::default_error();
        let mut mfs = *good.mfs();
        mfs.swap(1, 2);
        assert!(FuzzyVariable::new(mfs, -PI, PI).is_err());
        // Shrinking NS to a sliver on its peak opens a gap before Z's support.
        let mut mfs = *good.mfs();
        mfs[1] = tri(-FRAC_PI_2 - 0.1, -FRAC_PI_2, -FRAC_PI_2 + 0.1);
        mfs[0] = tri(-3.0 * FRAC_PI_2, -PI, -PI + 0.1);
        assert!(FuzzyVariable::new(mfs, -PI, PI).is_err());
        assert!(FuzzyVariable::new(*good.mfs(), 1.0, 1.0).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)] // tabulated vertices, not pi
    fn default_geometry_right_vertices() {
        let rights = |v: &FuzzyVariable| v.mfs().map(|m| m.right());
        let e = rights(&FuzzyVariable::default_error());
        for (got, want) in e.iter().zip([-1.57, 0.0, 1.57, 3.142, 4.712]) {
            assert!((got - want).abs() < 5e-3, "{got}");
        }
        assert_eq!(rights(&FuzzyVariable::default_rate()), [-0.5, 0.0, 0.5, 1.0, 1.5]);
        let t = rights(&FuzzyVariable::default_output());
        assert_eq!(t[1], 0.0);
        assert_eq!(t[4], 50.0);
    }

    #[test]
    fn fuzzify_examples() {
        let e = FuzzyVariable::default_error();
        assert_eq!(fuzzify(&e, 0.0), [0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(fuzzify(&e, 10.0), fuzzify(&e, PI));
        assert_eq!(fuzzify(&e, -10.0), fuzzify(&e, -PI));
        let g = fuzzify(&e, FRAC_PI_4);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 0.0);
        assert_relative_eq!(g[2], 0.5, epsilon = 1e-15);
        assert_relative_eq!(g[3], 0.5, epsilon = 1e-15);
        assert_eq!(g[4], 0.0);
    }

    #[test]
    fn rule_table_matches_lookup_table() {
        let rb = RuleBase::default();
        use Label::*;
        assert_eq!(rb.consequent(Z, Z), Z);
        assert_eq!(rb.consequent(PS, Z), PS);
        assert_eq!(rb.consequent(PL, Z), PL);
        assert_eq!(rb.consequent(NL, PL), Z);
        assert_eq!(rb.consequent(PS, NL), NS);
    }

    #[test]
    fn rule_table_is_antisymmetric() {
        let rb = RuleBase::default();
        for e in Label::ALL {
            for d in Label::ALL {
                assert_eq!(rb.consequent(e, d), rb.consequent(e.reflect(), d.reflect()).reflect());
            }
        }
    }

    #[test]
    fn infer_examples() {
        let rb = RuleBase::default();
        let one_z = [0.0, 0.0, 1.0, 0.0, 0.0];
        let acts = infer(&rb, &one_z, &one_z);
        let fired: Vec<_> = acts.iter().filter(|a| a.1 > 0.0).collect();
        assert_eq!(fired, vec![&(Label::Z, 1.0)]);

        assert!(infer(&rb, &[0.0; 5], &one_z).iter().all(|a| a.1 == 0.0));

        let acts = infer(&rb, &[0.0, 0.0, 0.5, 0.5, 0.0], &one_z);
        let fired: Vec<_> = acts.iter().filter(|a| a.1 > 0.0).copied().collect();
        assert_eq!(fired, vec![(Label::Z, 0.5), (Label::PS, 0.5)]);
        assert_eq!(aggregate(&acts), [0.0, 0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn coa_symmetric_and_fallback() {
        let out = FuzzyVariable::default_output();
        assert!(defuzzify_coa(&out, &[(Label::Z, 1.0)], 1001).abs() < 1e-12);
        assert_eq!(defuzzify_coa(&out, &[(Label::PS, 0.0)], 1001), 0.0);
        let shifted = FuzzyVariable::uniform(10.0, 1.0, 8.0, 12.0).unwrap();
        assert_eq!(defuzzify_coa(&shifted, &[], 1001), 10.0);
    }

    #[test]
    fn coa_between_z_and_ps() {
        let out = FuzzyVariable::default_output();
        let acts = [(Label::Z, 0.5), (Label::PS, 0.5)];
        let y = defuzzify_coa(&out, &acts, 1001);
        assert!(y > 0.0 && y < out.mf(Label::PS).peak(), "{y}");
        // The clipped set is a trapezoid [-50/3, 100/3] with plateau [-25/3, 25]
        // symmetric about 25/3, so the centroid is exactly 25/3.
        assert_relative_eq!(y, 25.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn shoulder_centroid_matches_continuous() {
        // NL alone: the part inside the universe is the falling flank from
        // -100/3 to -50/3, a right triangle with centroid a third of the way in.
        let out = FuzzyVariable::default_output();
        let y = defuzzify_coa(&out, &[(Label::NL, 1.0)], 1001);
        let want = -100.0 / 3.0 + (50.0 / 3.0) / 3.0;
        assert!((y - want).abs() < 1e-3, "{y} vs {want}");
    }

    proptest! {
        #[test]
        fn closed_form_matches_direct_sums(
            levels in proptest::array::uniform5(0.0f64..=1.0),
            n in 100usize..3000,
        ) {
            let out = FuzzyVariable::default_output();
            let active: Vec<(TriangularMF, f64)> = Label::ALL
                .iter()
                .filter(|l| levels[l.index()] > 0.0)
                .map(|l| (*out.mf(*l), levels[l.index()]))
                .collect();
            prop_assume!(!active.is_empty());
            let (n1, d1) = coa_sums_piecewise(&out, &active, n);
            let (n2, d2) = coa_sums_sampled(&out, &active, n);
            prop_assert!((d1 - d2).abs() <= 1e-9 * d2.abs().max(1.0), "{d1} vs {d2}");
            prop_assert!((n1 - n2).abs() <= 1e-9 * n2.abs().max(1.0) * 40.0, "{n1} vs {n2}");
        }
    }

    #[test]
    fn flc_zero_and_large_error() {
        let c = FuzzyController::default();
        assert!(flc_output(0.0, 0.0, &c).abs() < 1e-12);
        let u = flc_output(PI, 0.0, &c);
        assert!(u > c.output.mf(Label::PS).peak(), "{u}");
        assert!(flc_output(-PI, 0.0, &c) < 0.0);
    }

    #[test]
    fn text_roundtrip() {
        let mut c = FuzzyController::default();
        c.error = c.error.with_rights(&[-2.6082, -0.0003, 1.0282, 2.033, 4.2358]).unwrap();
        let text = c.to_text();
        let back = FuzzyController::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_errors_carry_lines() {
        let text = FuzzyController::default().to_text().replace("NS = NL NL NS Z PS", "NS = NL NL XX Z PS");
        assert!(matches!(FuzzyController::from_text(&text), Err(Error::Parse { .. })));
        let bad = FuzzyController::default().to_text().replacen("resolution = 1001", "resolution = 10", 1);
        assert!(FuzzyController::from_text(&bad).is_err());
    }

    proptest! {
        #[test]
        fn coa_stays_in_universe(levels in proptest::array::uniform5(0.0f64..=1.0)) {
            let out = FuzzyVariable::default_output();
            let acts: Vec<(Label, f64)> = Label::ALL.iter().copied().zip(levels).collect();
            let y = defuzzify_coa(&out, &acts, DEFAULT_RESOLUTION);
            prop_assert!(y >= out.universe_min() && y <= out.universe_max());
        }

        #[test]
        fn some_rule_always_fires(e in -4.0f64..4.0, d in -2.0f64..2.0) {
            let c = FuzzyController::default();
            let acts = infer(&c.rules, &fuzzify(&c.error, e), &fuzzify(&c.rate, d));
            prop_assert!(acts.iter().any(|a| a.1 > 0.0));
        }
    }

    #[test]
    fn flc_output_is_lipschitz_on_grid() {
        let c = FuzzyController::default();
        let delta = 1e-6;
        let mut worst: f64 = 0.0;
        for i in 0..=60 {
            for j in 0..=20 {
                let e = -PI + i as f64 * (2.0 * PI / 60.0);
                let d = -1.0 + j as f64 * 0.1;
                let du = (flc_output(e + delta, d, &c) - flc_output(e, d, &c)).abs();
                worst = worst.max(du / delta);
            }
        }
        // A jump would show up as a slope of order 1 / delta.
        assert!(worst < 1e3, "max local slope {worst}");
    }
}
