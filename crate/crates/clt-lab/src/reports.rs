//! Report serialization.
//!
//! Hand-assembled JSON with a fixed layout: floats carry 17 significant
//! digits so parsing a report back reproduces the exact bit patterns, and
//! key order is fixed so identical runs produce identical bytes. The
//! simulation report deliberately has no clock field; it is part of the
//! determinism contract that repeated runs match byte for byte.

use clt_lab_core::bounds::{BoundProbe, Certificate, KsUpperBound, RectangleBound};
use clt_lab_core::montecarlo::{Histogram, HISTOGRAM_HI, HISTOGRAM_LO};
use clt_lab_core::{CoefficientArray, Region, WeightArray};
use sha2::{Digest, Sha256};

pub const LAB_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits: enough to round-trip any finite f64.
pub fn fmt17(v: f64) -> String {
    debug_assert!(v.is_finite(), "reports only carry finite values");
    format!("{v:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

enum Frame {
    Obj { n: usize },
    /// `inline` arrays hold scalars on one line; block arrays put one
    /// item per line.
    Arr { n: usize, inline: bool },
}

/// Minimal pretty-printing JSON writer with deterministic output.
pub struct JsonWriter {
    buf: String,
    stack: Vec<Frame>,
}

impl JsonWriter {
    pub fn new() -> Self {
        JsonWriter {
            buf: String::new(),
            stack: Vec::new(),
        }
    }

    fn indent(&mut self, levels: usize) {
        for _ in 0..levels {
            self.buf.push_str("  ");
        }
    }

    /// Separator before an array item (object values follow their key).
    fn item_sep(&mut self) {
        let depth = self.stack.len();
        if let Some(Frame::Arr { n, inline }) = self.stack.last_mut() {
            let first = *n == 0;
            *n += 1;
            let inline = *inline;
            if !first {
                self.buf.push(',');
            }
            if inline {
                if !first {
                    self.buf.push(' ');
                }
            } else {
                self.buf.push('\n');
                self.indent(depth);
            }
        }
    }

    pub fn key(&mut self, k: &str) {
        let depth = self.stack.len();
        match self.stack.last_mut() {
            Some(Frame::Obj { n }) => {
                if *n > 0 {
                    self.buf.push(',');
                }
                *n += 1;
            }
            _ => unreachable!("key outside object"),
        }
        self.buf.push('\n');
        self.indent(depth);
        self.push_string(k);
        self.buf.push_str(": ");
    }

    pub fn begin_obj(&mut self) {
        self.item_sep();
        self.buf.push('{');
        self.stack.push(Frame::Obj { n: 0 });
    }

    pub fn end_obj(&mut self) {
        match self.stack.pop() {
            Some(Frame::Obj { n }) => {
                if n > 0 {
                    self.buf.push('\n');
                    self.indent(self.stack.len());
                }
                self.buf.push('}');
            }
            _ => unreachable!("end_obj outside object"),
        }
    }

    pub fn begin_arr(&mut self, inline: bool) {
        self.item_sep();
        self.buf.push('[');
        self.stack.push(Frame::Arr { n: 0, inline });
    }

    pub fn end_arr(&mut self) {
        match self.stack.pop() {
            Some(Frame::Arr { n, inline }) => {
                if !inline && n > 0 {
                    self.buf.push('\n');
                    self.indent(self.stack.len());
                }
                self.buf.push(']');
            }
            _ => unreachable!("end_arr outside array"),
        }
    }

    fn push_string(&mut self, s: &str) {
        self.buf.push('"');
        for ch in s.chars() {
            match ch {
                '"' => self.buf.push_str("\\\""),
                '\\' => self.buf.push_str("\\\\"),
                '\n' => self.buf.push_str("\\n"),
                '\r' => self.buf.push_str("\\r"),
                '\t' => self.buf.push_str("\\t"),
                c if (c as u32) < 0x20 => {
                    self.buf.push_str(&format!("\\u{:04x}", c as u32));
                }
                c => self.buf.push(c),
            }
        }
        self.buf.push('"');
    }

    pub fn val_f64(&mut self, v: f64) {
        self.item_sep();
        self.buf.push_str(&fmt17(v));
    }

    pub fn val_u64(&mut self, v: u64) {
        self.item_sep();
        self.buf.push_str(&v.to_string());
    }

    pub fn val_i64(&mut self, v: i64) {
        self.item_sep();
        self.buf.push_str(&v.to_string());
    }

    pub fn val_str(&mut self, v: &str) {
        self.item_sep();
        self.push_string(v);
    }

    pub fn val_bool(&mut self, v: bool) {
        self.item_sep();
        self.buf.push_str(if v { "true" } else { "false" });
    }

    pub fn val_null(&mut self) {
        self.item_sep();
        self.buf.push_str("null");
    }

    pub fn field_f64(&mut self, k: &str, v: f64) {
        self.key(k);
        self.val_f64(v);
    }

    pub fn field_u64(&mut self, k: &str, v: u64) {
        self.key(k);
        self.val_u64(v);
    }

    pub fn field_str(&mut self, k: &str, v: &str) {
        self.key(k);
        self.val_str(v);
    }

    pub fn field_pair_i64(&mut self, k: &str, v: (i64, i64)) {
        self.key(k);
        self.begin_arr(true);
        self.val_i64(v.0);
        self.val_i64(v.1);
        self.end_arr();
    }

    pub fn finish(mut self) -> String {
        debug_assert!(self.stack.is_empty(), "unbalanced writer");
        self.buf.push('\n');
        self.buf
    }
}

impl Default for JsonWriter {
    fn default() -> Self {
        Self::new()
    }
}

/// Writes a grid-shaped value block: origin plus row-major rows.
fn grid_block(w: &mut JsonWriter, bounds: (i64, i64, i64, i64), get: impl Fn(i64, i64) -> f64) {
    let (r_lo, r_hi, s_lo, s_hi) = bounds;
    w.begin_obj();
    w.field_pair_i64("origin", (r_lo, s_lo));
    w.key("values");
    w.begin_arr(false);
    for r in r_lo..=r_hi {
        w.begin_arr(true);
        for s in s_lo..=s_hi {
            w.val_f64(get(r, s));
        }
        w.end_arr();
    }
    w.end_arr();
    w.end_obj();
}

fn region_block(w: &mut JsonWriter, gamma: &Region) {
    w.begin_obj();
    if let Some(rects) = gamma.rects() {
        w.key("rects");
        w.begin_arr(false);
        for r in rects {
            w.begin_arr(true);
            w.val_i64(r.m_lo);
            w.val_i64(r.m_hi);
            w.val_i64(r.n_lo);
            w.val_i64(r.n_hi);
            w.end_arr();
        }
        w.end_arr();
    } else if let Some(points) = gamma.points() {
        w.key("points");
        w.begin_arr(false);
        for &(m, n) in points {
            w.begin_arr(true);
            w.val_i64(m);
            w.val_i64(n);
            w.end_arr();
        }
        w.end_arr();
    }
    w.end_obj();
}

fn versions_block(w: &mut JsonWriter) {
    w.key("versions");
    w.begin_obj();
    w.field_str("lab", LAB_VERSION);
    w.field_str("core", clt_lab_core::VERSION);
    w.end_obj();
}

/// The weight-array artifact. Echoes the instance (`a`, `gamma`) so the
/// file can be fed back in as an instance descriptor; readers ignore the
/// computed fields.
pub fn weights_report(
    a: &CoefficientArray,
    gamma: &Region,
    b: &WeightArray,
    hash: &str,
) -> String {
    let mut w = JsonWriter::new();
    w.begin_obj();
    w.key("a");
    grid_block(&mut w, a.grid().bounds(), |r, s| a.grid().get(r, s));
    w.key("gamma");
    region_block(&mut w, gamma);
    w.field_f64("sigma", b.sigma());
    w.field_f64("rho", b.rho());
    w.field_pair_i64("argmax", b.argmax());
    w.key("weights");
    grid_block(&mut w, b.grid().bounds(), |r, s| b.grid().get(r, s));
    w.field_str("instance", hash);
    w.end_obj();
    w.finish()
}

/// Weight table as CSV, every cell of the bounding box in row-major order.
pub fn weights_csv(b: &WeightArray) -> String {
    let (r_lo, r_hi, s_lo, s_hi) = b.grid().bounds();
    let mut out = String::from("r,s,value\n");
    for r in r_lo..=r_hi {
        for s in s_lo..=s_hi {
            out.push_str(&format!("{r},{s},{}\n", fmt17(b.grid().get(r, s))));
        }
    }
    out
}

/// One row of the square-window bound table.
pub struct WindowRow {
    pub m: u64,
    pub n: u64,
    pub value: f64,
    /// True when the window evaluation sits below the exact rho; such
    /// rows are audit data (the window expression is a hypothesis-bearing
    /// display quantity, not a certified bound).
    pub below_rho: bool,
}

pub struct BoundsReportInputs<'a> {
    pub hash: &'a str,
    pub b: &'a WeightArray,
    pub crude_p1: f64,
    pub crude_p2: f64,
    /// None when the region is a point set.
    pub rectangle: Option<&'a RectangleBound>,
    pub window_grid: &'a [WindowRow],
    pub law_name: &'a str,
    pub ks_upper: &'a KsUpperBound,
    pub trace: Option<&'a [BoundProbe]>,
    /// Seconds since the Unix epoch. The bounds report is the one output
    /// that carries a clock; simulation artifacts must stay reproducible.
    pub generated_unix: u64,
}

pub fn bounds_report(inputs: &BoundsReportInputs) -> String {
    let rho = inputs.b.rho();
    let mut w = JsonWriter::new();
    w.begin_obj();
    w.field_str("instance", inputs.hash);
    w.field_f64("sigma", inputs.b.sigma());
    w.field_f64("rho", rho);
    w.field_pair_i64("argmax", inputs.b.argmax());
    w.key("crude");
    w.begin_obj();
    w.field_f64("p1", inputs.crude_p1);
    w.field_f64("p2", inputs.crude_p2);
    w.end_obj();
    w.key("rectangle");
    match inputs.rectangle {
        None => w.val_null(),
        Some(rb) => {
            w.begin_obj();
            w.field_f64("value", rb.value);
            w.field_f64("x", rb.x);
            w.field_u64("rect_count", rb.rect_count);
            w.field_u64("window", rb.window);
            w.field_f64("intermediate", rb.intermediate);
            w.field_u64("certifying_window", rb.certifying_window);
            w.field_f64("certifying_intermediate", rb.certifying_intermediate);
            w.end_obj();
        }
    }
    w.key("window_bounds");
    w.begin_arr(false);
    for row in inputs.window_grid {
        w.begin_obj();
        w.field_u64("m", row.m);
        w.field_u64("n", row.n);
        w.field_f64("value", row.value);
        w.key("below_rho");
        w.val_bool(row.below_rho);
        w.end_obj();
    }
    w.end_arr();
    w.key("ks_upper");
    w.begin_obj();
    w.field_str("law", inputs.law_name);
    w.field_f64("value", inputs.ks_upper.value);
    w.field_f64("t", inputs.ks_upper.t);
    w.field_f64("eta", inputs.ks_upper.eta);
    w.field_f64("lindeberg", inputs.ks_upper.lindeberg);
    w.end_obj();
    if let Some(trace) = inputs.trace {
        w.key("trace");
        w.begin_arr(false);
        for p in trace {
            w.begin_arr(true);
            w.val_f64(p.t);
            w.val_f64(p.eta);
            w.val_f64(p.value);
            w.end_arr();
        }
        w.end_arr();
    }
    w.key("provenance");
    w.begin_obj();
    w.field_u64("generated_unix", inputs.generated_unix);
    versions_block(&mut w);
    w.end_obj();
    w.end_obj();
    w.finish()
}

pub struct SimulationReportInputs<'a> {
    pub hash: &'a str,
    pub law_name: &'a str,
    pub n_samples: u64,
    pub seed: u64,
    pub alpha: f64,
    pub ks_empirical: f64,
    pub dkw_margin: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub variance_tolerance: f64,
    pub histogram: &'a Histogram,
}

/// Deliberately clock-free; see the module comment.
pub fn simulation_report(inputs: &SimulationReportInputs) -> String {
    let mut w = JsonWriter::new();
    w.begin_obj();
    w.field_str("instance", inputs.hash);
    w.field_str("law", inputs.law_name);
    w.field_u64("n_samples", inputs.n_samples);
    w.field_u64("seed", inputs.seed);
    w.field_f64("alpha", inputs.alpha);
    w.field_f64("ks_empirical", inputs.ks_empirical);
    w.field_f64("dkw_margin", inputs.dkw_margin);
    w.field_f64("sample_mean", inputs.sample_mean);
    w.field_f64("sample_variance", inputs.sample_variance);
    w.field_f64("variance_tolerance", inputs.variance_tolerance);
    w.key("histogram");
    w.begin_obj();
    w.field_f64("lo", HISTOGRAM_LO);
    w.field_f64("hi", HISTOGRAM_HI);
    w.field_u64("underflow", inputs.histogram.underflow());
    w.field_u64("overflow", inputs.histogram.overflow());
    w.key("counts");
    w.begin_arr(true);
    for &c in inputs.histogram.bins() {
        w.val_u64(c);
    }
    w.end_arr();
    w.end_obj();
    versions_block(&mut w);
    w.end_obj();
    w.finish()
}

pub fn certificate_report(cert: &Certificate, class_names: &[String]) -> String {
    let mut w = JsonWriter::new();
    w.begin_obj();
    w.field_f64("epsilon", cert.epsilon);
    w.key("class");
    w.begin_arr(true);
    for name in class_names {
        w.val_str(name);
    }
    w.end_arr();
    w.field_f64("t", cert.t);
    w.field_f64("eta", cert.eta);
    w.field_f64("z", cert.z);
    w.field_f64("sharp", cert.sharp);
    w.field_f64("delta", cert.delta);
    versions_block(&mut w);
    w.end_obj();
    w.finish()
}

/// One sweep member. `ks_exact` is present only when a closed-form oracle
/// exists for the member (i.i.d. square with Rademacher innovations).
pub struct SweepRow {
    pub kappa: f64,
    pub rho: f64,
    pub ks_empirical: f64,
    pub ks_upper: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub n: i64,
    pub ell: u64,
    pub ks_exact: Option<f64>,
}

/// Fixed column contract: kappa,rho,ks_empirical,ks_upper,n_samples,seed.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("kappa,rho,ks_empirical,ks_upper,n_samples,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(r.kappa),
            fmt17(r.rho),
            fmt17(r.ks_empirical),
            fmt17(r.ks_upper),
            r.n_samples,
            r.seed
        ));
    }
    out
}

pub fn sweep_report(
    family: &str,
    law_name: &str,
    alpha: f64,
    rows: &[SweepRow],
    warnings: &[String],
) -> String {
    let mut w = JsonWriter::new();
    w.begin_obj();
    w.field_str("family", family);
    w.field_str("law", law_name);
    w.field_f64("alpha", alpha);
    w.key("rows");
    w.begin_arr(false);
    for r in rows {
        w.begin_obj();
        w.field_f64("kappa", r.kappa);
        w.field_f64("rho", r.rho);
        w.field_f64("ks_empirical", r.ks_empirical);
        w.field_f64("ks_upper", r.ks_upper);
        w.field_u64("n_samples", r.n_samples);
        w.field_u64("seed", r.seed);
        w.key("n");
        w.val_i64(r.n);
        w.field_u64("ell", r.ell);
        w.key("ks_exact");
        match r.ks_exact {
            Some(v) => w.val_f64(v),
            None => w.val_null(),
        }
        w.end_obj();
    }
    w.end_arr();
    w.key("warnings");
    w.begin_arr(false);
    for msg in warnings {
        w.val_str(msg);
    }
    w.end_arr();
    versions_block(&mut w);
    w.end_obj();
    w.finish()
}

pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Run manifest: resolved config, versions, input identity, and output
/// hashes. Carries no clock so reruns of a deterministic command produce
/// an identical manifest.
pub fn manifest(
    command: &str,
    config: &[(&str, String)],
    inputs: &[(&str, String)],
    outputs: &[ManifestEntry],
) -> String {
    let mut w = JsonWriter::new();
    w.begin_obj();
    w.field_str("command", command);
    w.key("config");
    w.begin_obj();
    for (k, v) in config {
        w.field_str(k, v);
    }
    w.end_obj();
    versions_block(&mut w);
    w.key("inputs");
    w.begin_obj();
    for (k, v) in inputs {
        w.field_str(k, v);
    }
    w.end_obj();
    w.key("outputs");
    w.begin_arr(false);
    for e in outputs {
        w.begin_obj();
        w.field_str("file", &e.name);
        w.field_str("sha256", &e.sha256);
        w.field_u64("bytes", e.bytes);
        w.end_obj();
    }
    w.end_arr();
    w.end_obj();
    w.finish()
}

/// Single-line machine-readable error for standard error.
pub fn error_json(kind: &str, message: &str) -> String {
    let mut w = JsonWriter::new();
    w.begin_obj();
    w.key("error");
    w.begin_obj();
    w.field_str("kind", kind);
    w.field_str("message", message);
    w.end_obj();
    w.end_obj();
    w.finish().replace('\n', " ").trim().to_string()
}
