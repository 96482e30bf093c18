//! The `bcwave` command line.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench;
use crate::error::{invalid, BcError, Result};
use crate::inverse::{recover_potential, smoothstep, ReconstructionConfig};
use crate::io::{fmt_f64, read_columns, write_columns, write_control, write_rows, write_wave_field, RunManifest};
use crate::model::{model_coefficients, recover_q_from_pq, ModelCoefficients, DEFAULT_COND_TOL};
use crate::potential::Potential;
use crate::sets::{neighborhood, ElementarySet};
use crate::sl;
use crate::spectral::{truncated_measure, wave_image, SpectralMeasure};
use crate::wave::{forward_fd, forward_kernel, goursat_kernel, smooth_bump, solve_control, Control};

#[derive(Debug, Parser)]
#[command(name = "bcwave", version, about = "Boundary-control wave model of -y'' + q y on the half-line")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Space/time grid step.
    #[arg(long = "grid-h", global = true, default_value_t = 0.005)]
    pub grid_h: f64,
    /// Final time.
    #[arg(long = "T", global = true, default_value_t = 2.0)]
    pub t: f64,
    /// Length of the space interval for potentials and measures.
    #[arg(long = "X", global = true, default_value_t = 20.0)]
    pub x: f64,
    #[arg(long = "lambda-max", global = true, default_value_t = 400.0)]
    pub lambda_max: f64,
    /// Output file (CSV, or JSON for `bench`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json`, or stderr without `--out`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reconstruction config (key=value text) for `invert`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fd,
    Kernel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gauge φ and η: CSV `x,phi,eta`.
    Gauge {
        /// `const:c`, `bump:c,amp,center,width` or a CSV `x,q` path.
        #[arg(long)]
        potential: String,
    },
    /// Wave field `u^f` on `[0,T]^2`.
    Forward {
        #[arg(long)]
        potential: String,
        /// `bump:center,radius`, `data:k` or a CSV `t,f` path.
        #[arg(long)]
        control: String,
        #[arg(long, value_enum, default_value_t = Method::Fd)]
        method: Method,
    },
    /// Transmutation kernel: CSV `x,s,w` on `0 <= x <= s <= T`.
    Kernel {
        #[arg(long)]
        potential: String,
    },
    /// Control steering the wave to a target: CSV `t,f`.
    Control {
        #[arg(long)]
        potential: String,
        /// `bump:center,radius` or a CSV `x,y` path.
        #[arg(long)]
        target: String,
    },
    /// Metric neighborhoods of elementary sets: CSV `set,a,b,closed_left`.
    Lattice {
        /// JSON `[[a,b],...]` or a list of such sets.
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        r: f64,
    },
    /// Truncated spectral measure: CSV `lambda,rho`.
    Spectrum {
        #[arg(long)]
        potential: String,
    },
    /// Spectral image of the wave at time T: CSV `lambda,re,im`.
    WaveImage {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        control: String,
    },
    /// Coordinate-model coefficients from pairs: CSV `tau,y1,g1,y2,g2,...`.
    Model {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_COND_TOL)]
        cond_tol: f64,
    },
    /// Reconstruct q from a measure CSV.
    Invert {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Acceptance benchmark by name, or `all`.
    Bench { name: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gauge { .. } => "gauge",
            Command::Forward { .. } => "forward",
            Command::Kernel { .. } => "kernel",
            Command::Control { .. } => "control",
            Command::Lattice { .. } => "lattice",
            Command::Spectrum { .. } => "spectrum",
            Command::WaveImage { .. } => "wave-image",
            Command::Model { .. } => "model",
            Command::Invert { .. } => "invert",
            Command::Bench { .. } => "bench",
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            1
        }
    }
}

struct Run<'a> {
    cli: &'a Cli,
    manifest: RunManifest,
}

impl<'a> Run<'a> {
    fn new(cli: &'a Cli) -> Self {
        let mut manifest = RunManifest::new(cli.command.name());
        manifest.set("grid_h", cli.grid_h);
        manifest.set("T", cli.t);
        manifest.set("X", cli.x);
        manifest.set("lambda_max", cli.lambda_max);
        Self { cli, manifest }
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_input(path)
    }

    /// Records a spec argument, hashing it when it names a file.
    fn spec_input(&mut self, key: &str, spec: &str) -> Result<()> {
        self.manifest.set(key, spec);
        let p = Path::new(spec);
        if p.is_file() {
            self.input(p)?;
        }
        Ok(())
    }

    fn output(&mut self, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match &self.cli.out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                write(&mut w)?;
                w.flush()?;
                self.manifest.output_paths.push(path.display().to_string());
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)?;
                lock.flush()?;
            }
        }
        Ok(())
    }

    fn finish(mut self, diagnostics: serde_json::Value) -> Result<()> {
        self.manifest.diagnostics = diagnostics;
        let path = self.cli.manifest.clone().or_else(|| {
            self.cli.out.as_ref().map(|o| {
                let mut s = o.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            })
        });
        match path {
            Some(p) => self.manifest.write(&p),
            None => {
                eprintln!("{}", self.manifest.to_json());
                Ok(())
            }
        }
    }

    fn potential(&mut self, spec: &str) -> Result<Potential> {
        self.spec_input("potential", spec)?;
        Potential::load(spec, self.cli.grid_h, self.cli.x)
    }
}

fn parse_args(spec: &str, kind: &str, n: usize) -> Result<Vec<f64>> {
    let nums = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| BcError::Parse(format!("`{s}` in `{kind}:{spec}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if nums.len() != n {
        return Err(BcError::Parse(format!("`{kind}:` takes {n} numbers, got `{spec}`")));
    }
    Ok(nums)
}

/// Two-column CSV on a uniform grid starting at 0; returns `(values, step)`.
fn read_uniform(path: &Path) -> Result<(Vec<f64>, f64)> {
    let (_, cols) = read_columns(&fs::read_to_string(path)?)?;
    if cols.len() != 2 || cols[0].len() < 2 {
        return Err(BcError::Parse(format!("{}: expected two columns and at least two rows", path.display())));
    }
    let h = cols[0][1] - cols[0][0];
    let uniform = cols[0].iter().enumerate().all(|(i, &t)| (t - i as f64 * h).abs() <= 1e-9 * (1.0 + t.abs()));
    if !(h > 0.0) || !uniform {
        return Err(BcError::GridMismatch(format!("{}: first column must be 0, h, 2h, ...", path.display())));
    }
    Ok((cols[1].clone(), h))
}

fn parse_control(spec: &str, h: f64, t: f64) -> Result<Control> {
    if let Some(args) = spec.strip_prefix("bump:") {
        let a = parse_args(args, "bump", 2)?;
        Control::bump(a[0], a[1], h, t)
    } else if let Some(args) = spec.strip_prefix("data:") {
        let k = parse_args(args, "data", 1)?[0];
        Control::from_fn(|s| smoothstep(s, 0.2, 1.2) * ((t - s) / t).powf(k), h, t)
    } else {
        let (v, step) = read_uniform(Path::new(spec))?;
        Control::new(v, step)
    }
}

fn parse_target(spec: &str, h: f64, t: f64) -> Result<Vec<f64>> {
    let m = (t / h).round() as usize;
    if let Some(args) = spec.strip_prefix("bump:") {
        let a = parse_args(args, "bump", 2)?;
        Ok((0..=m).map(|i| smooth_bump((i as f64 * h - a[0]) / a[1])).collect())
    } else {
        let (v, step) = read_uniform(Path::new(spec))?;
        if (step - h).abs() > 1e-9 * h {
            return Err(BcError::GridMismatch(format!("target step {step} differs from --grid-h {h}")));
        }
        Ok(v)
    }
}

fn coefficients_csv(w: &mut dyn Write, mc: &ModelCoefficients) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..mc.tau.len())
        .map(|i| {
            let mut row: Vec<String> =
                [mc.tau[i], mc.p[i], mc.q_coef[i], mc.e[i], mc.q_rec[i]].iter().map(|&v| fmt_f64(v)).collect();
            row.push(u8::from(mc.mask[i]).to_string());
            row
        })
        .collect();
    write_rows(w, &["tau", "p", "Q", "e", "q_rec", "mask"], &rows)
}

fn run(cli: &Cli) -> Result<i32> {
    let mut r = Run::new(cli);
    let (h, t) = (cli.grid_h, cli.t);
    let diagnostics = match &cli.command {
        Command::Gauge { potential } => {
            let q = r.potential(potential)?.certified()?;
            let g = sl::gauge(&q)?;
            let x: Vec<f64> = (0..q.len()).map(|i| q.x(i)).collect();
            r.output(|w| write_columns(w, &["x", "phi", "eta"], &[&x, &g.phi, &g.eta]))?;
            json!({ "phi_prime0": g.phi_prime0, "eta_prime0": g.eta_prime0, "kappa": q.kappa() })
        }
        Command::Forward { potential, control, method } => {
            let q = r.potential(potential)?;
            r.spec_input("control", control)?;
            r.manifest.set("method", format!("{method:?}").to_lowercase());
            let f = parse_control(control, h, t)?;
            let u = match method {
                Method::Fd => forward_fd(&q, &f, t)?,
                Method::Kernel => forward_kernel(&goursat_kernel(&q, t)?, &f, t)?,
            };
            r.output(|w| write_wave_field(w, &u))?;
            json!({ "nx": u.nx, "nt": u.nt, "max_abs": u.max_abs() })
        }
        Command::Kernel { potential } => {
            let q = r.potential(potential)?;
            let k = goursat_kernel(&q, t)?;
            let (mut xs, mut ss, mut ws) = (Vec::new(), Vec::new(), Vec::new());
            for i in 0..=k.m {
                for j in i..=k.m {
                    xs.push(i as f64 * k.h);
                    ss.push(j as f64 * k.h);
                    ws.push(k.get(i, j));
                }
            }
            r.output(|w| write_columns(w, &["x", "s", "w"], &[&xs, &ss, &ws]))?;
            json!({ "sweeps": k.sweeps, "m": k.m })
        }
        Command::Control { potential, target } => {
            let q = r.potential(potential)?;
            r.spec_input("target", target)?;
            let y = parse_target(target, h, t)?;
            let k = goursat_kernel(&q, t)?;
            let f = solve_control(&k, &y, t)?;
            let reached = forward_kernel(&k, &f, t)?;
            let m = reached.nx.min(y.len());
            let residual = crate::wave::rel_l2(&reached.last()[..m], &y[..m], h);
            r.output(|w| write_control(w, &f))?;
            json!({ "kernel_residual": residual })
        }
        Command::Lattice { set, r: radius } => {
            r.input(set)?;
            r.manifest.set("r", radius);
            if !(*radius > 0.0) {
                return Err(invalid(format!("--r must be positive, got {radius}")));
            }
            let text = fs::read_to_string(set)?;
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| BcError::Parse(format!("{}: {e}", set.display())))?;
            let sets = ElementarySet::many_from_json(&v)?;
            let mut rows = Vec::new();
            let mut measures = Vec::new();
            for (k, e) in sets.iter().enumerate() {
                let n = neighborhood(e, *radius);
                measures.push(fmt_f64(n.measure()));
                for iv in n.intervals() {
                    rows.push(vec![k.to_string(), fmt_f64(iv.a), fmt_f64(iv.b), u8::from(iv.closed_left).to_string()]);
                }
            }
            r.output(|w| write_rows(w, &["set", "a", "b", "closed_left"], &rows))?;
            json!({ "sets": sets.len(), "measures": measures })
        }
        Command::Spectrum { potential } => {
            let q = r.potential(potential)?.certified()?;
            let mu = truncated_measure(&q, cli.x, cli.lambda_max)?;
            r.output(|w| mu.write_csv(w))?;
            json!({ "eigenvalues": mu.len(), "lambda_1": mu.nodes[0] })
        }
        Command::WaveImage { measure, control } => {
            r.input(measure)?;
            r.spec_input("control", control)?;
            let mu = SpectralMeasure::read_csv(BufReader::new(File::open(measure)?))?;
            let f = parse_control(control, h, t)?;
            let img = wave_image(&f, t, &mu);
            r.output(|w| img.write_csv(&mu, w))?;
            json!({ "nodes": mu.len(), "norm": mu.norm(&img) })
        }
        Command::Model { pairs, cond_tol } => {
            r.input(pairs)?;
            r.manifest.set("cond_tol", cond_tol);
            let (header, cols) = read_columns(&fs::read_to_string(pairs)?)?;
            if cols.len() < 3 || cols.len() % 2 == 0 {
                return Err(BcError::Parse(format!("pairs CSV needs tau,y1,g1,...; got header {header:?}")));
            }
            let data: Vec<(Vec<f64>, Vec<f64>)> = cols[1..].chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
            let mut mc = model_coefficients(&data, &cols[0], *cond_tol)?;
            recover_q_from_pq(&mut mc)?;
            r.output(|w| coefficients_csv(w, &mc))?;
            json!({ "masked_nodes": mc.mask.iter().filter(|&&m| m).count() })
        }
        Command::Invert { measure } => {
            r.input(measure)?;
            let cfg = match &cli.config {
                Some(p) => {
                    r.input(p)?;
                    ReconstructionConfig::parse(&fs::read_to_string(p)?)?
                }
                None => ReconstructionConfig::default(),
            };
            for line in cfg.to_string().lines() {
                if let Some((k, v)) = line.split_once('=') {
                    r.manifest.set(k.trim(), v.trim());
                }
            }
            let mu = SpectralMeasure::read_csv(BufReader::new(File::open(measure)?))?;
            let rec = recover_potential(&mu, &cfg)?;
            r.output(|w| coefficients_csv(w, &rec.model))?;
            serde_json::to_value(&rec.diagnostics).expect("diagnostics are plain data")
        }
        Command::Bench { name } => {
            r.manifest.set("name", name);
            let reports = bench::run(name)?;
            for rep in &reports {
                println!("{}", rep.line());
            }
            if let Some(path) = &cli.out {
                fs::write(path, serde_json::to_string_pretty(&reports).expect("reports are plain data") + "\n")?;
                r.manifest.output_paths.push(path.display().to_string());
            }
            let failed: Vec<&str> = reports.iter().filter(|b| !b.passed).map(|b| b.name.as_str()).collect();
            let diag = serde_json::to_value(&reports).expect("reports are plain data");
            r.finish(json!({ "reports": diag }))?;
            if !failed.is_empty() {
                eprintln!("error[BenchFailed]: {}", failed.join(", "));
                return Ok(1);
            }
            return Ok(0);
        }
    };
    r.finish(diagnostics)?;
    Ok(0)
}
