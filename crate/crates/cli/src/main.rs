mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use imlab::surgery::Stage;
use imlab::{
    export_csv, export_kv, intermingle_report, lyapunov_spectrum, make_profile, measure_report, render_plane,
    render_ppm, sweep_box3, sweep_raster, unstable_disk_probe, validate_m, validate_p, validate_r, volume_certificate,
    AnosovBase64, BasinLabel, Export, Label, LabelPlane, LayeredMap64, Palette, Point3d, SkewMap,
};

use config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "imlab", version, about = "Intermingled-basin maps of the 3-torus")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Compare the rendered PPM with this file byte for byte.
    #[arg(long, global = true)]
    golden: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// validate_P, and validate_M / validate_R as the stage allows.
    Validate,
    /// Lyapunov spectra at the configured points.
    Lyap,
    /// Unstable-disk probes seeded on every circle.
    Probe,
    /// Basin sweep of a slice or a box, with PPM and reports.
    Sweep,
    /// Intermingling statistics of a fresh or stored raster.
    Intermingle,
    /// Escape statistics and the volume certificate.
    Certify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Lyap => "lyap",
            Command::Probe => "probe",
            Command::Sweep => "sweep",
            Command::Intermingle => "intermingle",
            Command::Certify => "certify",
        }
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<imlab::Error> for Failure {
    fn from(e: imlab::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Run(format!("{}: {e}", path.display()))
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut values = config::defaults();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        config::parse_lines(&text, &mut values)?;
    }
    for s in &cli.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("--set {s:?}: expected KEY=VALUE")))?;
        config::set(&mut values, k.trim(), v.trim())?;
    }
    if let Some(w) = cli.workers {
        values.insert("workers".into(), w.to_string());
    }
    if let Some(s) = cli.seed {
        values.insert("seed".into(), s.to_string());
    }
    if let Some(o) = &cli.out {
        values.insert("out".into(), o.display().to_string());
    }
    let cfg = RunConfig::from_values(values)?;
    build_map(&cfg, cfg.stage).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn build_map(cfg: &RunConfig, stage: Stage) -> imlab::Result<LayeredMap64> {
    let [a, b, c, d] = cfg.matrix;
    let base = AnosovBase64::new(a, b, c, d)?;
    let profile = make_profile(&base, &cfg.profile)?;
    let skew = SkewMap::new_unchecked(base, profile);
    let da = (stage >= Stage::F1).then(|| cfg.da.clone());
    let push = (stage >= Stage::F).then(|| cfg.push.clone());
    LayeredMap64::new(skew, da, push, stage)
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(io(&path))?;
        self.files.push((name.to_string(), hex(&Sha256::digest(bytes))));
        Ok(())
    }

    fn report(&mut self, stem: &str, r: &impl Export) -> Result<(), Failure> {
        self.write(&format!("{stem}.txt"), export_kv(r).as_bytes())?;
        self.write(&format!("{stem}.csv"), export_csv(r)?.as_bytes())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(Failure::Config(m)) | Err(Failure::Run(m)) => {
            eprintln!("imlab: invalid configuration: {m}");
            return ExitCode::from(2);
        }
    };
    let mut out = Outputs {
        dir: PathBuf::from(&cfg.out),
        files: Vec::new(),
    };
    if let Err(e) = fs::create_dir_all(&out.dir) {
        eprintln!("imlab: {}: {e}", out.dir.display());
        return ExitCode::from(2);
    }
    let result = run(cli.command, &cfg, &mut out, cli.golden.as_deref());
    let status = match &result {
        Ok(true) => "pass",
        Ok(false) => "fail",
        Err(_) => "error",
    };
    if let Err(Failure::Run(m)) | Err(Failure::Config(m)) = manifest(&cli, &cfg, &mut out, status) {
        eprintln!("imlab: {m}");
        return ExitCode::from(2);
    }
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("imlab: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("imlab: {m}");
            ExitCode::from(1)
        }
    }
}

fn manifest(cli: &Cli, cfg: &RunConfig, out: &mut Outputs, status: &str) -> Result<(), Failure> {
    let canonical = cfg.canonical();
    let mut text = String::new();
    text.push_str(&format!("command = {}\n", cli.command.name()));
    text.push_str(&format!("status = {status}\n"));
    text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("config_sha256 = {}\n", hex(&Sha256::digest(canonical.as_bytes()))));
    text.push_str(&format!("seed = {}\n", cfg.seed));
    text.push_str(&format!("workers = {}\n", cfg.workers));
    for (name, sum) in &out.files {
        text.push_str(&format!("output.{name} = {sum}\n"));
    }
    text.push_str("\n[config]\n");
    text.push_str(&canonical);
    let path = out.dir.join("manifest.txt");
    fs::write(&path, text).map_err(io(&path))
}

fn run(cmd: Command, cfg: &RunConfig, out: &mut Outputs, golden: Option<&Path>) -> Result<bool, Failure> {
    match cmd {
        Command::Validate => validate(cfg, out),
        Command::Lyap => lyap(cfg, out),
        Command::Probe => probe(cfg, out),
        Command::Sweep => sweep(cfg, out, golden),
        Command::Intermingle => intermingle(cfg, out),
        Command::Certify => certify(cfg, out),
    }
}

fn validate(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, Failure> {
    let f0 = build_map(cfg, Stage::F0)?;
    let p = validate_p(&f0.skew, cfg.samples, cfg.seed)?;
    println!("validate_P\n{p}");
    out.report("validate_P", &p)?;
    let mut pass = p.pass();
    if cfg.stage >= Stage::F1 {
        let f1 = build_map(cfg, Stage::F1)?;
        let m = validate_m(&f1, cfg.samples, cfg.seed)?;
        println!("validate_M\n{m}");
        out.report("validate_M", &m)?;
        pass &= m.pass();
    }
    if cfg.stage == Stage::F {
        let f = build_map(cfg, Stage::F)?;
        let r = validate_r(&f, cfg.escape_samples, cfg.seed, cfg.max_iters)?;
        println!("validate_R\n{}", r.checks);
        out.report("validate_R", &r)?;
        pass &= r.checks.pass();
    }
    Ok(pass)
}

fn lyap(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, Failure> {
    let map = build_map(cfg, cfg.stage)?;
    let mut csv = String::from("x1,x2,t,exponent_1,exponent_2,exponent_3,stderr_1,stderr_2,stderr_3\n");
    for (n, p) in cfg.lyap_points.iter().enumerate() {
        let x = Point3d::new(p[0], p[1], p[2]);
        let e = lyapunov_spectrum(&map, &x, cfg.lyap_iters, cfg.lyap_period, cfg.seed.wrapping_add(n as u64))?;
        println!("({:?}, {:?}, {:?}) exponents {:?}", p[0], p[1], p[2], e.exponents);
        let cols: Vec<String> = p.iter().chain(&e.exponents).chain(&e.stderr).map(|v| format!("{v:?}")).collect();
        csv.push_str(&cols.join(","));
        csv.push('\n');
    }
    out.write("lyap.csv", csv.as_bytes())?;
    Ok(true)
}

pub const PROBE_MIN_FRACTION: f64 = 0.99;

fn probe(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, Failure> {
    let map = build_map(cfg, cfg.stage)?;
    let k = map.k();
    let mut csv = String::from("circle,fraction_negative,curve_length,growth_iterations\n");
    let mut pass = true;
    for i in 0..k {
        let seed_point = Point3d::new(0.31, 0.77, i as f64 / k as f64);
        let r = unstable_disk_probe(&map, &seed_point, cfg.probe_points, cfg.probe_iters, cfg.seed)?;
        println!("circle {}: fraction_negative {:.4}", i + 1, r.fraction_negative);
        pass &= r.fraction_negative >= PROBE_MIN_FRACTION;
        csv.push_str(&format!(
            "{},{:?},{:?},{}\n",
            i + 1,
            r.fraction_negative,
            r.curve_length,
            r.growth_iterations
        ));
    }
    out.write("probe.csv", csv.as_bytes())?;
    Ok(pass)
}

fn raster_csv(plane: &LabelPlane, labels: &[BasinLabel]) -> String {
    let mut s = String::from("col,row,label,settle_time\n");
    for (n, l) in labels.iter().enumerate() {
        let tag = match l.tag {
            Label::Attractor(c) => c.to_string(),
            Label::Unresolved => "U".to_string(),
        };
        s.push_str(&format!("{},{},{tag},{}\n", n % plane.width, n / plane.width, l.settle_time));
    }
    s
}

fn check_golden(bytes: &[u8], golden: Option<&Path>) -> Result<bool, Failure> {
    let Some(path) = golden else { return Ok(true) };
    let want = fs::read(path).map_err(|e| Failure::Config(format!("golden file {}: {e}", path.display())))?;
    let same = want == bytes;
    println!("golden {}: {}", path.display(), if same { "match" } else { "MISMATCH" });
    Ok(same)
}

fn sweep(cfg: &RunConfig, out: &mut Outputs, golden: Option<&Path>) -> Result<bool, Failure> {
    let map = build_map(cfg, cfg.stage)?;
    let palette = Palette::hues(map.k());
    if cfg.sweep_box {
        let g = sweep_box3(&map, cfg.grid, &cfg.classify, cfg.workers, cfg.seed)?;
        let m = g.measure()?;
        out.report("measure", &m)?;
        let plane = g.plane_x1(cfg.grid.0 / 2);
        let ppm = render_plane(&plane, &palette)?;
        out.write("basin.ppm", &ppm)?;
        println!("{}", export_kv(&m));
        return check_golden(&ppm, golden);
    }
    let r = sweep_raster(&map, &cfg.slice, &cfg.classify, cfg.workers, cfg.seed)?;
    let plane = r.plane();
    let ppm = render_ppm(&r, &palette)?;
    out.write("basin.ppm", &ppm)?;
    out.write("raster.csv", raster_csv(&plane, &r.labels).as_bytes())?;
    let m = measure_report(&r.labels, r.k)?;
    out.report("measure", &m)?;
    println!("map {}\n{}", r.map_fingerprint, export_kv(&m));
    check_golden(&ppm, golden)
}

fn read_raster(path: &str, k: usize) -> Result<LabelPlane, Failure> {
    let p = Path::new(path);
    let text = fs::read_to_string(p).map_err(io(p))?;
    let mut cells = BTreeMap::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Failure::Config(format!("{path}: line {}: malformed", n + 1));
        if f.len() != 4 {
            return Err(bad());
        }
        let col: usize = f[0].parse().map_err(|_| bad())?;
        let row: usize = f[1].parse().map_err(|_| bad())?;
        let label = match f[2] {
            "U" => Label::Unresolved,
            c => Label::Attractor(c.parse().map_err(|_| bad())?),
        };
        cells.insert((row, col), label);
    }
    let width = cells.keys().map(|k| k.1).max().map_or(0, |m| m + 1);
    let height = cells.keys().map(|k| k.0).max().map_or(0, |m| m + 1);
    if cells.len() != width * height {
        return Err(Failure::Config(format!("{path}: raster is not rectangular")));
    }
    Ok(LabelPlane {
        width,
        height,
        labels: cells.into_values().collect(),
        k,
    })
}

fn intermingle(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, Failure> {
    let plane = match &cfg.raster_in {
        Some(path) => read_raster(path, cfg.profile.k)?,
        None => {
            let map = build_map(cfg, cfg.stage)?;
            sweep_raster(&map, &cfg.slice, &cfg.classify, cfg.workers, cfg.seed)?.plane()
        }
    };
    let r = intermingle_report(&plane, &cfg.scales, cfg.min_fraction)?;
    print!("{}", export_kv(&r));
    out.report("intermingle", &r)?;
    Ok(true)
}

fn certify(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, Failure> {
    if cfg.stage != Stage::F {
        return Err(Failure::Config("certify needs stage = F".into()));
    }
    let map = build_map(cfg, Stage::F)?;
    let esc = validate_r(&map, cfg.escape_samples, cfg.seed, cfg.max_iters)?;
    out.report("validate_R", &esc)?;
    let c = volume_certificate(&map, &esc, cfg.samples, cfg.seed);
    print!("{}", export_kv(&c));
    out.report("certificate", &c)?;
    Ok(c.pass && esc.checks.pass())
}
