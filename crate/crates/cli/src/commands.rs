use std::str::FromStr;

use serde_json::Value;

use qwein_core::category::{closure, CategorySpec, NamedCategory};
use qwein_core::exact::Rational;
use qwein_core::haar::{self, EasyGroupId, Haar, Monomial, Series};
use qwein_core::linear_maps;
use qwein_core::models::model::{format_complex, ModelValue, TransferEntries};
use qwein_core::models::oracle::parse_oracle_id;
use qwein_core::models::{Classical, FiniteGroupOracle, HaarSampler, MatrixModel};
use qwein_core::partition::{ColorWord, Partition};
use qwein_core::{Bounds, Error, Result};

use crate::report::Report;
use crate::{Cli, Command, ModelCommand, ModelSource};

pub fn run(cli: &Cli) -> Result<Report> {
    let mut bounds = Bounds::from_env();
    if let Some(v) = cli.max_legs {
        bounds.max_legs = v;
    }
    if let Some(v) = cli.max_degree {
        bounds.max_degree = v;
    }
    if let Some(v) = cli.max_cells {
        bounds.max_cells = v;
    }
    let haar = Haar::new(bounds);
    match &cli.command {
        Command::Integrate(a) => integrate(&haar, &a.group, &a.monomial, a.samples, a.seed),
        Command::Char(a) => match (&a.group, &a.category) {
            (Some(g), _) => char_moment(&haar, g, a.k, a.word.as_deref()),
            (None, Some(c)) => asymptotic(&bounds, c, a.max_k),
            (None, None) => Err(Error::InvalidParameter("give --group or --category".into())),
        },
        Command::Truncated(a) => truncated(&haar, &a.group, &a.t, a.k, a.word.as_deref()),
        Command::Enumerate(a) => enumerate(
            &bounds,
            &a.category,
            a.legs,
            a.upper.as_deref(),
            a.lower.as_deref(),
        ),
        Command::Closure(a) => closure_cmd(
            &bounds,
            &a.generators,
            a.bound,
            a.compare.as_deref(),
            a.list,
        ),
        Command::Membership(a) => membership(&a.category, &a.partition),
        Command::Gram(a) => gram(&bounds, &a.category, &a.word, a.n, a.twisted),
        Command::Model(m) => model(&haar, &bounds, m),
        Command::Oracle(a) => oracle(&bounds, &a.group, &a.monomial),
    }
}

fn rational(q: &Rational) -> Value {
    Value::from(q.to_string())
}

fn word_arg(word: Option<&str>, k: Option<usize>) -> Result<ColorWord> {
    match (word, k) {
        (Some(w), _) => ColorWord::from_str(w),
        (None, Some(k)) => Ok(ColorWord::white(k)),
        (None, None) => Err(Error::InvalidParameter("give --k or --word".into())),
    }
}

fn category(id: &str) -> Result<CategorySpec> {
    Ok(CategorySpec::Named(NamedCategory::from_str(id)?))
}

fn integrate(
    haar: &Haar,
    group: &str,
    monomial: &str,
    samples: Option<usize>,
    seed: u64,
) -> Result<Report> {
    let g = EasyGroupId::from_str(group)?;
    let m = Monomial::from_str(monomial)?;
    let report = Report::new("integrate")
        .field("group", g.to_string())
        .field("monomial", m.to_string());
    match samples {
        None => Ok(report
            .field("value", rational(&haar.integrate(&g, &m)?))
            .field("exact", true)),
        Some(samples) => {
            let classical = match (g.series, g.twisted) {
                (Series::O, false) => Classical::Orthogonal,
                (Series::U, false) => Classical::Unitary,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "Monte Carlo integration is available for O:N and U:N, not {g}"
                    )))
                }
            };
            let e = HaarSampler::new(classical, g.n, seed)?.mc_integral(&m, samples)?;
            Ok(report
                .field("value", e.mean.re)
                .field("value_imag", e.mean.im)
                .field("stderr", e.stderr)
                .field("samples", e.samples)
                .field("seed", seed)
                .field("exact", false))
        }
    }
}

fn char_moment(haar: &Haar, group: &str, k: Option<usize>, word: Option<&str>) -> Result<Report> {
    let g = EasyGroupId::from_str(group)?;
    let w = word_arg(word, k)?;
    let value = haar.char_moment(&g, &w)?;
    Ok(Report::new("char")
        .field("group", g.to_string())
        .field("word", w.to_string())
        .field("value", rational(&value))
        .field("exact", true))
}

fn asymptotic(bounds: &Bounds, cat: &str, max_k: usize) -> Result<Report> {
    let c = category(cat)?;
    let moments = haar::asymptotic_char_moments(&c, max_k, bounds)?;
    let rows = moments
        .iter()
        .enumerate()
        .map(|(k, m)| {
            vec![
                Value::from(k),
                Value::from(haar::moment_word(&c, k).to_string()),
                Value::from(m.to_string()),
            ]
        })
        .collect();
    Ok(Report::new("char")
        .field("category", c.to_string())
        .field("limit", "N -> infinity")
        .field("exact", true)
        .table("moments", &["k", "word", "value"], rows))
}

fn truncated(
    haar: &Haar,
    group: &str,
    t: &str,
    k: Option<usize>,
    word: Option<&str>,
) -> Result<Report> {
    let g = EasyGroupId::from_str(group)?;
    let t: Rational = t
        .parse()
        .map_err(|_| Error::Parse(format!("bad fraction '{t}' for t")))?;
    let w = word_arg(word, k)?;
    let value = haar.truncated_char_moment_word(&g, &t, &w)?;
    Ok(Report::new("truncated")
        .field("group", g.to_string())
        .field("t", t.to_string())
        .field("m", haar::truncation_size(&t, g.n))
        .field("word", w.to_string())
        .field("value", rational(&value))
        .field("exact", true))
}

fn enumerate(
    bounds: &Bounds,
    cat: &str,
    legs: Option<usize>,
    upper: Option<&str>,
    lower: Option<&str>,
) -> Result<Report> {
    let c = category(cat)?;
    let (up, down) = match legs {
        Some(l) => (ColorWord::empty(), haar::moment_word(&c, l)),
        None => (
            ColorWord::from_str(upper.unwrap_or(""))?,
            ColorWord::from_str(lower.unwrap_or(""))?,
        ),
    };
    let members = c.enumerate(&up, &down, bounds.max_legs)?;
    let rows = members
        .iter()
        .map(|p| vec![Value::from(p.to_string())])
        .collect();
    Ok(Report::new("enumerate")
        .field("category", c.to_string())
        .field("upper", up.to_string())
        .field("lower", down.to_string())
        .field("count", members.len())
        .table("partitions", &["partition"], rows))
}

fn closure_cmd(
    bounds: &Bounds,
    generators: &[String],
    bound: usize,
    compare: Option<&str>,
    list: bool,
) -> Result<Report> {
    if bound > bounds.max_legs {
        return Err(Error::LegBound {
            legs: bound,
            bound: bounds.max_legs,
        });
    }
    let gens = generators
        .iter()
        .map(|g| Partition::from_str(g))
        .collect::<Result<Vec<_>>>()?;
    let spec = closure(&gens, bound);
    let members = spec.members_up_to(bound, true)?;
    let mut report = Report::new("closure")
        .field(
            "generators",
            Value::Array(gens.iter().map(|g| Value::from(g.to_string())).collect()),
        )
        .field("bound", bound)
        .field("count", members.len());
    if let Some(id) = compare {
        let other = category(id)?;
        let theirs = other.members_up_to(bound, true)?;
        let mut a: Vec<String> = members.iter().map(|p| p.to_string()).collect();
        let mut b: Vec<String> = theirs.iter().map(|p| p.to_string()).collect();
        a.sort();
        b.sort();
        report = report
            .field("compare", other.to_string())
            .field("equal", a == b);
    }
    if list {
        let rows = members
            .iter()
            .map(|p| vec![Value::from(p.to_string())])
            .collect();
        report = report.table("members", &["partition"], rows);
    }
    Ok(report)
}

fn membership(cat: &str, partition: &str) -> Result<Report> {
    let c = category(cat)?;
    let p = Partition::from_str(partition)?;
    let member = c.member(&p)?;
    Ok(Report::new("membership")
        .field("category", c.to_string())
        .field("partition", p.to_string())
        .field("member", member))
}

fn gram(bounds: &Bounds, cat: &str, word: &str, n: usize, twisted: bool) -> Result<Report> {
    let c = category(cat)?;
    let w = ColorWord::from_str(word)?;
    let table = linear_maps::weingarten(linear_maps::gram(&c, &w, n, twisted, bounds)?);
    let wg = table.wg.as_ref().expect("weingarten fills wg");
    let row_text = |m: &qwein_core::matrix::Matrix<Rational>, r: usize| {
        m.row(r)
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let rows = table
        .basis
        .iter()
        .enumerate()
        .map(|(r, p)| {
            vec![
                Value::from(r),
                Value::from(p.to_string()),
                Value::from(row_text(&table.gram, r)),
                Value::from(row_text(wg, r)),
            ]
        })
        .collect();
    Ok(Report::new("gram")
        .field("category", c.to_string())
        .field("word", w.to_string())
        .field("n", n)
        .field("twisted", twisted)
        .field("size", table.size())
        .field("rank", table.rank)
        .field("invertible", table.is_invertible())
        .field("exact", true)
        .table("basis", &["index", "partition", "gram", "wg"], rows))
}

fn load_model(source: &ModelSource, bounds: &Bounds) -> Result<MatrixModel> {
    match (&source.model, &source.file) {
        (Some(id), _) => MatrixModel::from_id(id, bounds),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
            })?;
            MatrixModel::from_text(&text, bounds)
        }
        (None, None) => Err(Error::InvalidParameter("give --model or --file".into())),
    }
}

fn value_fields(report: Report, v: &ModelValue) -> Report {
    match v {
        ModelValue::Exact(z) => report
            .field("value", format_complex(z))
            .field("exact", true),
        ModelValue::Float(z) => report
            .field("value", z.re)
            .field("value_imag", z.im)
            .field("exact", false),
        ModelValue::MonteCarlo(e) => report
            .field("value", e.mean.re)
            .field("value_imag", e.mean.im)
            .field("stderr", e.stderr)
            .field("samples", e.samples)
            .field("exact", false),
    }
}

fn model(haar: &Haar, bounds: &Bounds, cmd: &ModelCommand) -> Result<Report> {
    match cmd {
        ModelCommand::Stationarity { source, pmax, tol } => {
            let m = load_model(source, bounds)?;
            let report = m.stationarity_check(haar, *pmax, *tol)?;
            let rows = report
                .words
                .iter()
                .map(|w| {
                    vec![
                        Value::from(w.word.to_string()),
                        Value::from(w.exact),
                        Value::from(w.residual),
                        Value::from(w.pass),
                    ]
                })
                .collect();
            Ok(Report::new("model stationarity")
                .field("model", m.name.clone())
                .field("pmax", *pmax)
                .field("tol", *tol)
                .field("exact", m.is_exact())
                .field("stationary", report.pass)
                .table("words", &["word", "exact", "residual", "pass"], rows))
        }
        ModelCommand::Cesaro {
            source,
            monomial,
            depth,
            tol,
        } => {
            let m = load_model(source, bounds)?;
            let mono = Monomial::from_str(monomial)?;
            let c = m.cesaro_integral(haar, &mono, *depth, *tol)?;
            Ok(Report::new("model cesaro")
                .field("model", m.name.clone())
                .field("monomial", mono.to_string())
                .field("depth", c.depth)
                .field("value", c.value.re)
                .field("value_imag", c.value.im)
                .field("previous", c.previous.re)
                .field("tol", c.tol)
                .field("converged", c.converged)
                .field("exact_transfer", c.exact_transfer)
                .field("exact", false))
        }
        ModelCommand::Transfer {
            source,
            word,
            monomial,
            r,
            samples,
            seed,
        } => {
            let m = load_model(source, bounds)?;
            if let Some(mono) = monomial {
                let mono = Monomial::from_str(mono)?;
                let v = m.truncated_integral(haar, *r, &mono)?;
                let report = Report::new("model transfer")
                    .field("model", m.name.clone())
                    .field("monomial", mono.to_string())
                    .field("r", *r);
                return Ok(value_fields(report, &v));
            }
            let w = ColorWord::from_str(word.as_deref().unwrap_or(""))?;
            let t = match samples {
                Some(s) => m.transfer_matrix_mc(&w, *seed, *s, bounds)?,
                None => m.transfer_matrix(haar, &w)?,
            };
            let d = t.dim();
            let text = |r: usize| -> String {
                match &t.entries {
                    TransferEntries::Exact(x) => x
                        .row(r)
                        .iter()
                        .map(format_complex)
                        .collect::<Vec<_>>()
                        .join(" "),
                    TransferEntries::Float(x) => x
                        .row(r)
                        .iter()
                        .map(|z| format!("{}", z))
                        .collect::<Vec<_>>()
                        .join(" "),
                    TransferEntries::MonteCarlo { mean, .. } => mean
                        .row(r)
                        .iter()
                        .map(|z| format!("{}", z))
                        .collect::<Vec<_>>()
                        .join(" "),
                }
            };
            let rows = (0..d)
                .map(|r| vec![Value::from(r), Value::from(text(r))])
                .collect();
            let mut report = Report::new("model transfer")
                .field("model", m.name.clone())
                .field("word", w.to_string())
                .field("dim", d)
                .field("exact", t.is_exact());
            if let TransferEntries::MonteCarlo {
                stderr, samples, ..
            } = &t.entries
            {
                let worst = stderr.iter().copied().fold(0.0, f64::max);
                report = report
                    .field("samples", *samples)
                    .field("seed", *seed)
                    .field("max_stderr", worst);
            }
            Ok(report.table("rows", &["row", "entries"], rows))
        }
    }
}

fn oracle(bounds: &Bounds, group: &str, monomial: &str) -> Result<Report> {
    let (g, n) = parse_oracle_id(group)?;
    let o = FiniteGroupOracle::new(g, n, bounds)?;
    let m = Monomial::from_str(monomial)?;
    let v = o.exact_integral(&m)?;
    Ok(Report::new("oracle")
        .field("group", o.to_string())
        .field("elements", o.len())
        .field("monomial", m.to_string())
        .field("value", format_complex(&v))
        .field("exact", true))
}
