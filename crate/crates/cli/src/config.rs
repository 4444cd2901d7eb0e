//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated; point lists separate points with `;`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use imlab::surgery::{DAParams, PushParams, Stage};
use imlab::{ClassifyParams, ProfileParams, SliceKind, SliceSpec};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub const KEYS: &[(&str, &str)] = &[
    ("matrix", "8,7,1,1"),
    ("k", "6"),
    ("specials", "0,1,2,3,4"),
    ("nu", "0.1"),
    ("g_plus", "0.05"),
    ("u_plus", "0.002"),
    ("rho_b", "0.04"),
    ("saddle_node", "0.5"),
    ("eps", "0.02"),
    ("delta_da", "12"),
    ("s0", "auto"),
    ("theta_inner", "auto"),
    ("theta_outer", "auto"),
    ("zeta", "auto"),
    ("saddle_s", "auto"),
    ("aspect", "3"),
    ("delta", "auto"),
    ("push_inner", "auto"),
    ("push_outer", "auto"),
    ("stage", "F"),
    ("n_transient", "20000"),
    ("window", "2000"),
    ("majority", "0.9"),
    ("t_tol", "auto"),
    ("n_max", "200000"),
    ("sweep", "slice"),
    ("slice", "FixBase1"),
    ("slice_fixed", "0.5"),
    ("slice_range_h", "0,1"),
    ("slice_range_v", "0,1"),
    ("resolution", "64,64"),
    ("jitter", "false"),
    ("grid", "16,16,16"),
    ("scales", "1,4,8,16"),
    ("min_fraction", "0.01"),
    ("raster_in", ""),
    ("samples", "10000"),
    ("escape_samples", "2000"),
    ("max_iters", "1000"),
    ("lyap_points", "0.3,0.7,0.25;0.61,0.13,0.55"),
    ("lyap_iters", "100000"),
    ("lyap_period", "2"),
    ("probe_points", "200"),
    ("probe_iters", "200"),
    ("seed", "1"),
    ("workers", "1"),
    ("out", "out"),
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub values: BTreeMap<String, String>,
    pub matrix: [i64; 4],
    pub profile: ProfileParams,
    pub da: DAParams,
    pub push: PushParams,
    pub stage: Stage,
    pub classify: ClassifyParams,
    pub sweep_box: bool,
    pub slice: SliceSpec,
    pub grid: (usize, usize, usize),
    pub scales: Vec<usize>,
    pub min_fraction: f64,
    pub raster_in: Option<String>,
    pub samples: usize,
    pub escape_samples: usize,
    pub max_iters: usize,
    pub lyap_points: Vec<[f64; 3]>,
    pub lyap_iters: usize,
    pub lyap_period: usize,
    pub probe_points: usize,
    pub probe_iters: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: String,
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parses `key = value` lines. Unknown and repeated keys are errors.
pub fn parse_lines(text: &str, into: &mut BTreeMap<String, String>) -> Result<(), ConfigError> {
    let mut seen = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected key = value", n + 1));
        };
        let k = k.trim();
        set(into, k, v.trim())?;
        if seen.insert(k.to_string(), n + 1).is_some() {
            return err(format!("line {}: key {k} repeated", n + 1));
        }
    }
    Ok(())
}

pub fn set(into: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<(), ConfigError> {
    if !KEYS.iter().any(|(k, _)| *k == key) {
        return err(format!("unknown key {key:?}"));
    }
    into.insert(key.to_string(), value.to_string());
    Ok(())
}

pub fn defaults() -> BTreeMap<String, String> {
    KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn raw(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.raw(key);
        v.parse().or_else(|_| err(format!("{key}: cannot parse {v:?}")))
    }

    fn auto(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            "auto" => Ok(None),
            _ => self.parse(key).map(Some),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        let v = self.raw(key);
        v.split(',')
            .map(|s| s.trim().parse().or_else(|_| err(format!("{key}: cannot parse {v:?}"))))
            .collect()
    }

    fn list_n<T: std::str::FromStr + Copy, const N: usize>(&self, key: &str) -> Result<[T; N], ConfigError> {
        let v: Vec<T> = self.list(key)?;
        v.try_into().or_else(|_| err(format!("{key}: expected {N} comma-separated values")))
    }
}

impl RunConfig {
    pub fn from_values(values: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let r = Reader(&values);
        let matrix = r.list_n::<i64, 4>("matrix")?;
        let specials = r.list_n::<usize, 5>("specials")?;
        let profile = ProfileParams {
            k: r.parse("k")?,
            specials,
            nu: r.parse("nu")?,
            g_plus: r.parse("g_plus")?,
            u_plus: r.parse("u_plus")?,
            rho_b: r.parse("rho_b")?,
            saddle_node: r.parse("saddle_node")?,
            ..ProfileParams::default()
        };
        let eps: f64 = r.parse("eps")?;
        let mut da = DAParams::with_eps(eps);
        da.delta_da = r.parse("delta_da")?;
        da.s0 = r.auto("s0")?;
        da.aspect = r.parse("aspect")?;
        if let Some(v) = r.auto("theta_inner")? {
            da.theta_inner = v;
        }
        if let Some(v) = r.auto("theta_outer")? {
            da.theta_outer = v;
        }
        if let Some(v) = r.auto("zeta")? {
            da.zeta = v;
        }
        if let Some(v) = r.auto("saddle_s")? {
            da.saddle_s = v;
        }
        let mut push = PushParams::with_eps(eps);
        if let Some(v) = r.auto("delta")? {
            push.delta = v;
        }
        if let Some(v) = r.auto("push_inner")? {
            push.inner = v;
        }
        if let Some(v) = r.auto("push_outer")? {
            push.outer = v;
        }
        let stage: Stage = r.raw("stage").parse().map_err(|e| ConfigError(format!("stage: {e}")))?;
        let classify = ClassifyParams {
            n_transient: r.parse("n_transient")?,
            window: r.parse("window")?,
            majority: r.parse("majority")?,
            t_tol: r.auto("t_tol")?,
            n_max: r.parse("n_max")?,
        };
        let sweep_box = match r.raw("sweep") {
            "slice" => false,
            "box" => true,
            v => return err(format!("sweep: expected slice or box, got {v:?}")),
        };
        let kind: SliceKind = r.raw("slice").parse().map_err(|e| ConfigError(format!("slice: {e}")))?;
        let [w, h] = r.list_n::<usize, 2>("resolution")?;
        let [h0, h1] = r.list_n::<f64, 2>("slice_range_h")?;
        let [v0, v1] = r.list_n::<f64, 2>("slice_range_v")?;
        let slice = SliceSpec {
            kind,
            fixed_value: r.parse("slice_fixed")?,
            ranges: [(h0, h1), (v0, v1)],
            resolution: (w, h),
            jitter: r.parse("jitter")?,
        };
        let [g1, g2, g3] = r.list_n::<usize, 3>("grid")?;
        let lyap_points = r
            .raw("lyap_points")
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|p| {
                let v: Vec<f64> = p
                    .split(',')
                    .map(|x| x.trim().parse().or_else(|_| err(format!("lyap_points: cannot parse {p:?}"))))
                    .collect::<Result<_, _>>()?;
                v.try_into().or_else(|_| err(format!("lyap_points: {p:?} is not x1,x2,t")))
            })
            .collect::<Result<Vec<[f64; 3]>, _>>()?;
        let raster_in = Some(r.raw("raster_in").to_string()).filter(|s| !s.is_empty());
        let cfg = Self {
            matrix,
            profile,
            da,
            push,
            stage,
            classify,
            sweep_box,
            slice,
            grid: (g1, g2, g3),
            scales: r.list("scales")?,
            min_fraction: r.parse("min_fraction")?,
            raster_in,
            samples: r.parse("samples")?,
            escape_samples: r.parse("escape_samples")?,
            max_iters: r.parse("max_iters")?,
            lyap_points,
            lyap_iters: r.parse("lyap_iters")?,
            lyap_period: r.parse("lyap_period")?,
            probe_points: r.parse("probe_points")?,
            probe_iters: r.parse("probe_iters")?,
            seed: r.parse("seed")?,
            workers: r.parse("workers")?,
            out: r.raw("out").to_string(),
            values,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        let map_err = |e: imlab::Error| ConfigError(e.to_string());
        self.classify.validate(self.profile.k).map_err(map_err)?;
        self.slice.validate().map_err(map_err)?;
        if !(self.min_fraction > 0.0 && self.min_fraction <= 1.0) {
            return err("min_fraction must lie in (0, 1]");
        }
        if self.workers == 0 {
            return err("workers must be positive");
        }
        if self.samples < 1000 {
            return err("samples must be at least 1000");
        }
        Ok(())
    }

    /// Canonical `key = value` text of every resolved key.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
