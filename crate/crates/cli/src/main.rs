//! `jacobi-bc`: file-based front end for the jacobi-bc library.
//!
//! Every command reads one JSON input document (`--input`, or stdin when
//! omitted), calls the library and writes JSON or CSV (`--output`, or
//! stdout). Exit codes: 0 success, 2 invalid input, 1 internal failure.
//! Failures print `{"schema": ..., "error": {"kind", "message"}}` on stderr.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jacobi_bc::connecting::{
    connecting_from_hankel, connecting_from_response, connecting_from_spectrum, gram_from_control, validate_response,
    ConnectingMatrix, Orientation,
};
use jacobi_bc::debranges::{hb_function, kernel_infinite, kernel_polynomial_sum, krein_solve};
use jacobi_bc::determinacy::{classify, connecting_max_eig_sequence, connecting_min_eig_sequence, hankel_min_eig_sequence};
use jacobi_bc::dynamics::{response_vector, solve_finite, solve_semi_infinite};
use jacobi_bc::inverse::{recover_from_moments, recover_from_response, RecoveryResult};
use jacobi_bc::io::{self as fmt, InputDocument, SCHEMA};
use jacobi_bc::moments::{build_hankel_in, hankel_positivity, moments_to_response, response_to_moments};
use jacobi_bc::spectral::spectral_data;
use jacobi_bc::{with_precision, Complex64, Error, PrecisionMode, Scalar};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "jacobi-bc", version, about = "Boundary control toolkit for Jacobi matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Input JSON document (stdin when omitted).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Time horizon / matrix size.
    #[arg(long = "T", global = true)]
    t: Option<usize>,
    /// Size of the finite block A^N.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Largest section for diagnostics.
    #[arg(long = "N-max", global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true, env = "JACOBI_BC_PRECISION", default_value = "double")]
    precision: PrecisionMode,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for parallel sections (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the wave system for `control` (finite system when --N is given).
    Simulate,
    /// Response vector of the coefficients (length 2T-1 unless --length).
    Response {
        #[arg(long)]
        length: Option<usize>,
    },
    /// Connecting operator built by the chosen method.
    Connect {
        #[arg(long, value_enum, default_value_t = Method::Response)]
        method: Method,
        #[arg(long, value_enum, default_value_t = OrientationArg::Bottom)]
        orientation: OrientationArg,
    },
    /// Recover a_1..a_{T-1}, b_1..b_{T-1} from `response` or `moments`.
    Recover,
    /// Determinacy report (coefficients), Hankel sequences (moments) or
    /// connecting sequences (response).
    Diagnose,
    /// Reproducing kernel J_z(lambda) on a set of points.
    Kernel {
        /// Kernel base point `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Points `re,im;re,im;...`.
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        /// Grid `x0:x1:nx,y0:y1:ny`.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value_t = Backend::Sum)]
        backend: Backend,
        /// Relative tail tolerance for the infinite series.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Hermite-Biehler function E_T on a set of points.
    Hb {
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Convert between response vectors and moment sequences.
    Moments {
        #[arg(long, value_enum, default_value_t = Target::Moments)]
        to: Target,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Response,
    Spectrum,
    Gram,
    Hankel,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OrientationArg {
    Top,
    Bottom,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Sum,
    Krein,
    Infinite,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Moments,
    Response,
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_validation() { 2 } else { 1 }, kind: e.kind(), message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "invalid_argument", message: message.into() }
}

type CliResult<T> = Result<T, Failure>;

enum Output {
    Json(Value),
    Csv(String),
}

fn read_input(common: &Common) -> CliResult<InputDocument> {
    let text = match &common.input {
        Some(p) => fs::read_to_string(p).map_err(|e| invalid(format!("cannot read {}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| invalid(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    Ok(InputDocument::parse(&text)?)
}

fn need(v: Option<usize>, flag: &str) -> CliResult<usize> {
    v.ok_or_else(|| invalid(format!("{flag} is required for this command")))
}

fn parse_complex(s: &str) -> CliResult<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| invalid(format!("bad number `{t}` in `{s}`")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(invalid(format!("expected `re,im`, got `{s}`"))),
    }
}

fn parse_axis(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(invalid(format!("expected `start:end:count`, got `{s}`")));
    };
    let lo: f64 = lo.parse().map_err(|_| invalid(format!("bad grid start in `{s}`")))?;
    let hi: f64 = hi.parse().map_err(|_| invalid(format!("bad grid end in `{s}`")))?;
    let n: usize = n.parse().map_err(|_| invalid(format!("bad grid count in `{s}`")))?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    })
}

fn sample_points(points: Option<&str>, grid: Option<&str>) -> CliResult<Vec<Complex64>> {
    match (points, grid) {
        (Some(p), None) => p.split(';').filter(|s| !s.trim().is_empty()).map(parse_complex).collect(),
        (None, Some(g)) => {
            let (x, y) = g.split_once(',').ok_or_else(|| invalid("grid needs `x0:x1:nx,y0:y1:ny`"))?;
            let (xs, ys) = (parse_axis(x)?, parse_axis(y)?);
            Ok(ys.iter().flat_map(|&im| xs.iter().map(move |&re| Complex64::new(re, im))).collect())
        }
        _ => Err(invalid("give exactly one of --points or --grid")),
    }
}

fn response_or_coeffs(doc: &InputDocument, t: usize) -> CliResult<jacobi_bc::ResponseVector> {
    if doc.response.is_some() {
        Ok(doc.response()?)
    } else {
        Ok(response_vector(&doc.coefficients()?, 2 * t - 1)?)
    }
}

fn recovery_json(r: &RecoveryResult) -> Value {
    json!({
        "schema": SCHEMA,
        "a": r.a,
        "b": r.b,
        "residual": r.residual,
        "path": r.path,
        "precision": r.precision,
    })
}

fn connecting_output(c: &ConnectingMatrix, format: Format) -> Output {
    match format {
        Format::Json => Output::Json(fmt::connecting_to_json(c)),
        Format::Csv => Output::Csv(fmt::connecting_to_csv(c)),
    }
}

fn grid_output(kind: &str, values: &[(Complex64, Complex64)], format: Format, extra: Value) -> Output {
    match format {
        Format::Csv => Output::Csv(fmt::grid_to_csv(values)),
        Format::Json => {
            let mut v = fmt::grid_to_json(kind, values);
            if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
                obj.extend(more);
            }
            Output::Json(v)
        }
    }
}

fn run(cli: &Cli) -> CliResult<Output> {
    let c = &cli.common;
    let doc = read_input(c)?;
    Ok(match &cli.command {
        Command::Simulate => {
            let control = doc.control()?;
            let coeffs = doc.coefficients()?;
            let t = c.t.unwrap_or(control.horizon());
            let field = match c.n {
                Some(n) => solve_finite(&coeffs, n, &control, t)?,
                None => solve_semi_infinite(&coeffs, &control, t)?,
            };
            match c.format {
                Format::Json => Output::Json(fmt::wavefield_to_json(&field)),
                Format::Csv => Output::Csv(fmt::wavefield_to_csv(&field)),
            }
        }
        Command::Response { length } => {
            let len = match length {
                Some(l) => *l,
                None => 2 * need(c.t, "--T")? - 1,
            };
            let r = with_precision!(c.precision, S => {
                jacobi_bc::dynamics::response_vector_in::<S>(&doc.coefficients()?, len)?
                    .iter()
                    .map(|v| v.to_f64())
                    .collect::<Vec<f64>>()
            });
            match c.format {
                Format::Json => Output::Json(fmt::sequence_to_json("response", &r)),
                Format::Csv => Output::Csv(fmt::sequence_to_csv(&r, 0)),
            }
        }
        Command::Connect { method, orientation } => {
            let t = need(c.t, "--T")?;
            let m = match method {
                Method::Response => connecting_from_response(&response_or_coeffs(&doc, t)?, t)?,
                Method::Spectrum => {
                    let n = c.n.unwrap_or(t);
                    connecting_from_spectrum(&spectral_data(&doc.coefficients()?, n)?, t)?
                }
                Method::Gram => gram_from_control(&doc.coefficients()?, t)?,
                Method::Hankel => {
                    let s = if doc.moments.is_some() {
                        doc.moments()?
                    } else {
                        response_to_moments(&response_or_coeffs(&doc, t)?, c.precision)?
                    };
                    with_precision!(c.precision, S => {
                        let x: Vec<S> = s.0.iter().map(|&v| S::from_f64(v)).collect();
                        connecting_from_hankel(&build_hankel_in(&x, t)?)?.to_f64()
                    })
                }
            };
            let m = m.oriented(match orientation {
                OrientationArg::Top => Orientation::CornerTop,
                OrientationArg::Bottom => Orientation::CornerBottom,
            });
            connecting_output(&m, c.format)
        }
        Command::Recover => {
            let r = if doc.response.is_some() {
                let r = doc.response()?;
                let t = c.t.unwrap_or(r.len().div_ceil(2));
                recover_from_response(&r, t, c.precision)?
            } else if doc.moments.is_some() {
                let s = doc.moments()?;
                let t = c.t.unwrap_or(s.len().div_ceil(2));
                recover_from_moments(&s, t, c.precision)?
            } else {
                return Err(invalid("recover needs a `response` or `moments` array"));
            };
            match c.format {
                Format::Json => Output::Json(recovery_json(&r)),
                Format::Csv => {
                    let mut out = String::from("k,a,b\n");
                    for k in 0..r.a.len() {
                        out.push_str(&format!("{},{},{}\n", k + 1, fmt::fmt_num(r.a[k]), fmt::fmt_num(r.b[k])));
                    }
                    Output::Csv(out)
                }
            }
        }
        Command::Diagnose => diagnose(&doc, c)?,
        Command::Kernel { z, points, grid, backend, tol } => {
            let z = parse_complex(z)?;
            let pts = sample_points(points.as_deref(), grid.as_deref())?;
            let coeffs = doc.coefficients()?;
            let mut orders = Vec::new();
            let values: Vec<(Complex64, Complex64)> = match backend {
                Backend::Sum => {
                    let t = need(c.t, "--T")?;
                    pts.iter().map(|&l| Ok((l, kernel_polynomial_sum(&coeffs, t, z, l)?))).collect::<CliResult<_>>()?
                }
                Backend::Krein => {
                    let t = need(c.t, "--T")?;
                    let sol = krein_solve(&gram_from_control(&coeffs, t)?, z)?;
                    pts.iter().map(|&l| (l, sol.kernel_at(l))).collect()
                }
                Backend::Infinite => pts
                    .iter()
                    .map(|&l| {
                        let k = kernel_infinite(&coeffs, z, l, *tol)?;
                        orders.push(k.order);
                        Ok((l, k.value))
                    })
                    .collect::<CliResult<_>>()?,
            };
            let extra = json!({ "z": [z.re, z.im], "backend": format!("{backend:?}").to_lowercase(), "orders": orders });
            grid_output("kernel", &values, c.format, extra)
        }
        Command::Hb { points, grid } => {
            let t = need(c.t, "--T")?;
            let e = hb_function(&doc.coefficients()?, t)?;
            let pts = sample_points(points.as_deref(), grid.as_deref())?;
            let values: Vec<(Complex64, Complex64)> = pts.iter().map(|&z| (z, e.eval(z))).collect();
            let violations: Vec<[f64; 2]> = pts
                .iter()
                .filter(|z| z.im > 0.0 && !e.hb_inequality(**z))
                .map(|z| [z.re, z.im])
                .collect();
            let extra = json!({ "T": t, "norm_sq": e.norm_sq(), "hb_violations": violations });
            grid_output("hermite_biehler", &values, c.format, extra)
        }
        Command::Moments { to } => {
            let (kind, values) = match to {
                Target::Moments => ("moments", response_to_moments(&doc.response()?, c.precision)?.0),
                Target::Response => ("response", moments_to_response(&doc.moments()?, c.precision)?.0),
            };
            match c.format {
                Format::Json => Output::Json(fmt::sequence_to_json(kind, &values)),
                Format::Csv => Output::Csv(fmt::sequence_to_csv(&values, 0)),
            }
        }
    })
}

fn diagnose(doc: &InputDocument, c: &Common) -> CliResult<Output> {
    if doc.has_coefficients() {
        let report = classify(&doc.coefficients()?, c.n_max.unwrap_or(24))?;
        return Ok(match c.format {
            Format::Json => Output::Json(fmt::determinacy_to_json(&report)),
            Format::Csv => Output::Csv(fmt::determinacy_to_csv(&report)),
        });
    }
    if doc.moments.is_some() {
        let s = doc.moments()?;
        let n = c.n_max.unwrap_or(s.len().div_ceil(2));
        let pos = hankel_positivity(&s, n, c.precision)?;
        let seq = hankel_min_eig_sequence(&s, n, c.precision)?;
        if let Some(k) = pos.first_failure {
            return Err(Error::NotAMomentSequence { index: k - 1 }.into());
        }
        return Ok(match c.format {
            Format::Json => Output::Json(json!({ "schema": SCHEMA, "kind": "hankel", "positivity": pos, "lambda": seq })),
            Format::Csv => Output::Csv(fmt::sequence_to_csv(&seq.values, 1)),
        });
    }
    let r = doc.response()?;
    let t = c.n_max.unwrap_or(r.len().div_ceil(2));
    let check = validate_response(&r, t)?;
    if let Some(k) = check.failure_index {
        return Err(Error::NotAResponseVector { index: k - 1 }.into());
    }
    let beta = connecting_min_eig_sequence(&r, t, c.precision)?;
    let gamma = connecting_max_eig_sequence(&r, t, c.precision)?;
    Ok(match c.format {
        Format::Json => Output::Json(json!({
            "schema": SCHEMA, "kind": "connecting", "validation": check, "beta": beta, "gamma": gamma,
        })),
        Format::Csv => {
            let mut out = String::from("T,beta,gamma\n");
            for k in 0..t {
                out.push_str(&format!("{},{},{}\n", k + 1, fmt::fmt_num(beta.values[k]), fmt::fmt_num(gamma.values[k])));
            }
            Output::Csv(out)
        }
    })
}

fn write_output(common: &Common, out: Output) -> CliResult<()> {
    let text = match out {
        Output::Json(v) => fmt::to_pretty(&v),
        Output::Csv(s) => s,
    };
    let internal = |e: io::Error| Failure { code: 1, kind: "io", message: e.to_string() };
    match &common.output {
        Some(p) => fs::write(p, text).map_err(internal),
        None => io::stdout().write_all(text.as_bytes()).map_err(internal),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "schema": SCHEMA, "error": { "kind": "internal", "message": e.to_string() } }));
            return ExitCode::from(1);
        }
    }
    match run(&cli).and_then(|out| write_output(&cli.common, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "schema": SCHEMA, "error": { "kind": f.kind, "message": f.message } }));
            ExitCode::from(f.code)
        }
    }
}
