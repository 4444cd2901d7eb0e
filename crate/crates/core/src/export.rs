//! Key-value and CSV exports of reports.
//!
//! Key-value output is one `key=value` per line in a fixed order. CSV output
//! has a fixed header; floats use the shortest round-trip form.

use crate::basin::{IntermingleReport, MeasureReport};
use crate::certify::{CertificateReport, EscapeReport};
use crate::dynamics::{Label, LyapunovEstimate, ProbeReport};
use crate::error::{Error, Result};
use crate::report::PropertyReport;

pub trait Export {
    fn fields(&self) -> Vec<(String, String)>;
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

pub fn export_kv(report: &impl Export) -> String {
    report
        .fields()
        .into_iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
}

pub fn export_csv(report: &impl Export) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Precondition(format!("csv: {e}"));
    w.write_record(report.header()).map_err(io)?;
    for r in report.rows() {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Precondition(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

fn label(l: Label) -> String {
    match l {
        Label::Attractor(c) => c.to_string(),
        Label::Unresolved => "U".to_string(),
    }
}

fn kv(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

impl Export for CertificateReport {
    fn fields(&self) -> Vec<(String, String)> {
        kv(&[
            ("N0", self.n0.to_string()),
            ("N1", self.n1.to_string()),
            ("max_dilatation", f(self.max_dilatation)),
            ("outside_factor", f(self.outside_factor)),
            ("product", f(self.product)),
            ("pass", self.pass.to_string()),
        ])
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["N0", "N1", "max_dilatation", "outside_factor", "product", "pass"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![self.fields().into_iter().map(|(_, v)| v).collect()]
    }
}

impl Export for PropertyReport {
    fn fields(&self) -> Vec<(String, String)> {
        let mut out = vec![("pass".to_string(), self.pass().to_string())];
        for c in &self.checks {
            out.push((format!("{}.pass", c.name), c.pass.to_string()));
            out.push((format!("{}.margin", c.name), f(c.margin)));
            if let Some(w) = c.witness {
                out.push((format!("{}.witness", c.name), format!("{},{},{}", f(w[0]), f(w[1]), f(w[2]))));
            }
            for (k, v) in &c.observed {
                out.push((format!("{}.{k}", c.name), f(*v)));
            }
            if !c.detail.is_empty() {
                out.push((format!("{}.detail", c.name), c.detail.replace('\n', " ")));
            }
        }
        out
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["property", "pass", "margin", "witness_x1", "witness_x2", "witness_t", "detail"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                let w = c.witness.map(|w| w.map(f)).unwrap_or_default();
                vec![
                    c.name.clone(),
                    c.pass.to_string(),
                    f(c.margin),
                    w[0].clone(),
                    w[1].clone(),
                    w[2].clone(),
                    c.detail.clone(),
                ]
            })
            .collect()
    }
}

impl Export for EscapeReport {
    fn fields(&self) -> Vec<(String, String)> {
        let mut out = kv(&[
            ("starts_per_hole", self.starts_per_hole.to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("max_escape", self.max_escape.to_string()),
            ("N0", self.n0.to_string()),
            ("N1", self.n1.to_string()),
            ("N1_censored", self.n1_censored.to_string()),
        ]);
        out.extend(self.checks.fields());
        out
    }
    fn header(&self) -> Vec<&'static str> {
        self.checks.header()
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.checks.rows()
    }
}

impl Export for IntermingleReport {
    fn fields(&self) -> Vec<(String, String)> {
        let mut out = kv(&[
            ("width", self.width.to_string()),
            ("height", self.height.to_string()),
            ("k", self.k.to_string()),
            ("min_fraction", f(self.min_fraction)),
        ]);
        for &s in &self.scales {
            out.push((format!("scale{s}.all_mixed"), self.all_mixed(s).to_string()));
        }
        out
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["scale", "box_i", "box_j", "label", "fraction"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.boxes
            .iter()
            .flat_map(|b| {
                b.present.iter().map(move |&l| {
                    vec![
                        b.scale.to_string(),
                        b.index.0.to_string(),
                        b.index.1.to_string(),
                        label(l),
                        f(b.fraction(l)),
                    ]
                })
            })
            .collect()
    }
}

impl Export for MeasureReport {
    fn fields(&self) -> Vec<(String, String)> {
        let mut out = vec![("total".to_string(), self.total.to_string())];
        for (i, x) in self.fractions.iter().enumerate() {
            out.push((format!("fraction.{}", i + 1), f(*x)));
        }
        out.push(("fraction.U".to_string(), f(self.unresolved)));
        for (i, m) in self.mean_settle.iter().enumerate() {
            out.push((format!("mean_settle.{}", i + 1), m.map(f).unwrap_or_default()));
        }
        out
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["label", "fraction", "mean_settle"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .fractions
            .iter()
            .zip(&self.mean_settle)
            .enumerate()
            .map(|(i, (x, m))| vec![(i + 1).to_string(), f(*x), m.map(f).unwrap_or_default()])
            .collect();
        if self.total > 0 {
            rows.push(vec!["U".to_string(), f(self.unresolved), String::new()]);
        }
        rows
    }
}

impl Export for LyapunovEstimate {
    fn fields(&self) -> Vec<(String, String)> {
        let mut out = vec![("iterations".to_string(), self.iterations.to_string())];
        for (i, (e, s)) in self.exponents.iter().zip(&self.stderr).enumerate() {
            out.push((format!("exponent.{}", i + 1), f(*e)));
            out.push((format!("stderr.{}", i + 1), f(*s)));
        }
        out
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["index", "exponent", "stderr"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.exponents
            .iter()
            .zip(&self.stderr)
            .enumerate()
            .map(|(i, (e, s))| vec![(i + 1).to_string(), f(*e), f(*s)])
            .collect()
    }
}

impl Export for ProbeReport {
    fn fields(&self) -> Vec<(String, String)> {
        kv(&[
            ("fraction_negative", f(self.fraction_negative)),
            ("curve_length", f(self.curve_length)),
            ("growth_iterations", self.growth_iterations.to_string()),
            ("points", self.exponents.len().to_string()),
        ])
    }
    fn header(&self) -> Vec<&'static str> {
        vec!["point", "top_cs_exponent"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.exponents
            .iter()
            .enumerate()
            .map(|(i, e)| vec![i.to_string(), f(*e)])
            .collect()
    }
}
