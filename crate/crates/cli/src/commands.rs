use std::fs;
use std::io::Read;

use cantor_core::census::{self, CensusOptions, CensusRun, Convention};
use cantor_core::dirichlet::{self, ApproxCertificate};
use cantor_core::expansion::expand;
use cantor_core::forms::{enumerate_forms, enumerate_forms_filtered, FormFilter};
use cantor_core::lab;
use cantor_core::membership::{is_member, ExpansionKind};
use cantor_core::rational::{display_fraction, parse_fraction, unit_parts};
use cantor_core::scheme::format_digits;
use cantor_core::{Budget, CantorScheme, DigitStream, Error, Result, StreamSpec};
use serde_json::{json, Value};

use crate::config::Config;
use crate::output::Report;
use crate::{Cli, Command, StreamArgs};

/// Published values of `phi(n)` for `(3, {0, 2})`, `n = 4..=11`, as printed.
const TABLE1: [(u32, &str); 8] = [
    (4, "1.808"),
    (5, "1.064"),
    (6, "1.32"),
    (7, "1.18"),
    (8, "1.258"),
    (9, "1.057"),
    (10, "1.176"),
    (11, "1.063"),
];

pub struct Output {
    pub text: String,
    pub negative: bool,
}

struct Ctx {
    scheme: CantorScheme,
    budget: Budget,
    seed: u64,
    checkpoint: Option<std::path::PathBuf>,
    parallel: bool,
}

impl Ctx {
    fn census(&self) -> CensusOptions {
        CensusOptions {
            parallel: self.parallel,
            budget: self.budget,
            ..CensusOptions::default()
        }
    }

    fn stream(&self, x: &StreamArgs) -> Result<DigitStream> {
        let spec = match (&x.x_rational, &x.x_digits, x.x_seed) {
            (Some(r), _, _) => StreamSpec::Rational(r.clone()),
            (_, Some(d), _) => StreamSpec::Digits(d.clone()),
            (_, _, Some(s)) => StreamSpec::Seed(s),
            _ => StreamSpec::Seed(self.seed),
        };
        DigitStream::new(spec, &self.scheme)
    }
}

pub fn run(cli: &Cli, mut config: Config) -> Result<Output> {
    if let Some(s) = &cli.scheme {
        config.scheme = s.clone();
    }
    if let Some(f) = cli.format {
        config.format = f;
    }
    if let Some(t) = cli.threads {
        config.threads = t;
    }
    let b = &mut config.budget;
    b.max_windows = cli.max_windows.unwrap_or(b.max_windows);
    b.max_denominator = cli.max_denominator.unwrap_or(b.max_denominator);
    b.max_forms = cli.max_forms.unwrap_or(b.max_forms);
    b.max_stream_digits = cli.max_stream_digits.unwrap_or(b.max_stream_digits);

    if let Command::Config = cli.command {
        config.scheme()?;
        return Ok(Output {
            text: config.to_toml(),
            negative: false,
        });
    }
    if config.threads > 0 {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
    let ctx = Ctx {
        scheme: config.scheme()?,
        budget: config.budget,
        seed: config.seed,
        checkpoint: config.checkpoint.clone(),
        parallel: config.threads != 1,
    };
    let report = dispatch(&cli.command, &ctx)?;
    Ok(Output {
        text: report.render(config.format, cli.deterministic),
        negative: report.negative,
    })
}

fn dispatch(command: &Command, ctx: &Ctx) -> Result<Report> {
    match command {
        Command::Config => unreachable!("handled before dispatch"),
        Command::Scheme => Ok(scheme(&ctx.scheme)),
        Command::Member { fraction } => member(fraction, &ctx.scheme),
        Command::Expand { fraction } => expand_cmd(fraction, &ctx.scheme),
        Command::Forms {
            max_len,
            max_preperiod,
            max_period,
        } => forms(ctx, *max_len, max_preperiod.zip(*max_period)),
        Command::Approx { x, n } => approx(ctx, x, *n),
        Command::Verify { cert, x } => verify(ctx, cert, x),
        Command::Ladder { x, n_max } => ladder(ctx, x, *n_max),
        Command::Census {
            from,
            to,
            n_lo,
            n_hi,
            chunk,
            checkpoint,
            convention,
        } => match (from.zip(*to), n_lo.zip(*n_hi)) {
            (Some((s, t)), _) => census_range(ctx, s, t, *convention),
            (_, Some((lo, hi))) => census_bands(
                ctx,
                lo,
                hi,
                *chunk,
                checkpoint.clone().or(ctx.checkpoint.clone()),
                *convention,
            ),
            _ => Err(Error::Parse(
                "census needs --from/--to or --n-lo/--n-hi".into(),
            )),
        },
        Command::Phi {
            n,
            table1,
            extended,
            convention,
        } => phi(ctx, *n, *table1, *extended, *convention),
        Command::Fit {
            n_lo,
            n_hi,
            convention,
        } => fit(ctx, *n_lo, *n_hi, *convention),
        Command::Score { x, q_max, epsilon } => score(ctx, x, *q_max, epsilon.as_deref()),
        Command::Convergents { x, count } => convergents(ctx, x, *count),
        Command::Extrinsic { x, count } => extrinsic(ctx, x, *count),
    }
}

fn scheme(s: &CantorScheme) -> Report {
    let json = json!({
        "scheme": s.to_string(),
        "b": s.base(),
        "S": s.digits(),
        "a": s.cardinality(),
        "b0": s.min_base(),
        "r": s.power(),
        "S0": s.min_digits(),
        "d": s.dimension(),
    });
    Report::fields(
        json,
        &[
            ("b", s.base().to_string()),
            ("S", format_digits(s.digits())),
            ("a", s.cardinality().to_string()),
            ("b0", s.min_base().to_string()),
            ("r", s.power().to_string()),
            ("S0", format_digits(s.min_digits())),
            ("d", format!("{:.6}", s.dimension())),
        ],
    )
}

fn member(fraction: &str, s: &CantorScheme) -> Result<Report> {
    let x = parse_fraction(fraction)?;
    unit_parts(&x)?;
    let w = is_member(&x, s)?;
    let verdict = if w.is_member() {
        "member"
    } else {
        "not-member"
    };
    let expansion = match w.expansion_used {
        ExpansionKind::Canonical => "canonical",
        ExpansionKind::Alternate => "alternate",
    };
    let json = json!({
        "x": display_fraction(&x),
        "scheme": s.to_string(),
        "witness": w,
    });
    let mut fields = vec![
        ("x", display_fraction(&x)),
        ("verdict", verdict.to_string()),
        ("expansion", expansion.to_string()),
    ];
    if let Some(a) = &w.analysis {
        fields.push(("digits", a.render()));
    }
    if let Some(i) = w.failing_digit_index {
        fields.push(("failing digit index", i.to_string()));
    }
    Ok(Report::fields(json, &fields).negative(!w.is_member()))
}

fn expand_cmd(fraction: &str, s: &CantorScheme) -> Result<Report> {
    let x = parse_fraction(fraction)?;
    let a = expand(&x, s)?;
    let json = json!({
        "x": display_fraction(&x),
        "base": a.base,
        "preperiod": format_digits(&a.preperiod),
        "period": format_digits(&a.period),
        "k": a.preperiod_len(),
        "l": a.period_len(),
    });
    Ok(Report::fields(
        json,
        &[
            ("x", display_fraction(&x)),
            ("base", a.base.to_string()),
            ("preperiod", format_digits(&a.preperiod)),
            ("period", format_digits(&a.period)),
            ("k", a.preperiod_len().to_string()),
            ("l", a.period_len().to_string()),
        ],
    ))
}

fn forms(ctx: &Ctx, max_len: Option<usize>, split: Option<(usize, usize)>) -> Result<Report> {
    let values = match (max_len, split) {
        (Some(m), _) => enumerate_forms(&ctx.scheme, m, &ctx.budget)?,
        (None, Some((k, l))) => enumerate_forms_filtered(
            &ctx.scheme,
            FormFilter {
                max_preperiod: k,
                max_period: l,
            },
            &ctx.budget,
        )?,
        (None, None) => {
            return Err(Error::Parse(
                "forms needs --max-len or --max-preperiod/--max-period".into(),
            ))
        }
    };
    let list: Vec<String> = values.iter().map(display_fraction).collect();
    let mut r = Report::new(
        json!({"scheme": ctx.scheme.to_string(), "count": list.len(), "values": list}),
        &["p", "q"],
    );
    for v in &values {
        r.row(vec![v.numer().to_string(), v.denom().to_string()]);
    }
    Ok(r)
}

fn certificate_rows(r: &mut Report, c: &ApproxCertificate, s: &CantorScheme) {
    let (kind, k, k_prime) = match c.collision {
        dirichlet::Collision::Pair { k, k_prime } => ("pair", k.to_string(), k_prime.to_string()),
        dirichlet::Collision::Zero { k } => ("zero", k.to_string(), String::new()),
    };
    r.row(vec![
        c.n.to_string(),
        kind.into(),
        k,
        k_prime,
        c.p.to_string(),
        c.q.to_string(),
        display_fraction(&c.error_bound(s)),
    ]);
}

const CERT_HEADER: [&str; 7] = ["n", "collision", "k", "k'", "p", "q", "bound"];

fn approx(ctx: &Ctx, x: &StreamArgs, n: u32) -> Result<Report> {
    let mut stream = ctx.stream(x)?;
    let cert = dirichlet::dirichlet_approx(&mut stream, n, &ctx.scheme, &ctx.budget)?;
    let json = json!({"x": stream.spec().to_string(), "certificate": cert});
    let mut r = Report::new(json, &CERT_HEADER);
    certificate_rows(&mut r, &cert, &ctx.scheme);
    Ok(r)
}

fn verify(ctx: &Ctx, path: &str, x: &StreamArgs) -> Result<Report> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(path)?;
    }
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("certificate file: {e}")))?;
    let (cert_value, spec) = match doc.get("certificate") {
        Some(c) => (
            c.clone(),
            doc.get("x").and_then(Value::as_str).map(str::to_string),
        ),
        None => (doc.clone(), None),
    };
    let cert: ApproxCertificate = serde_json::from_value(cert_value)
        .map_err(|e| Error::Parse(format!("certificate: {e}")))?;
    let given = x.x_rational.is_some() || x.x_digits.is_some() || x.x_seed.is_some();
    let stream = match (given, spec) {
        (false, Some(spec)) => DigitStream::new(spec.parse()?, &ctx.scheme)?,
        _ => ctx.stream(x)?,
    };
    let v = dirichlet::verify_certificate(&stream, &cert, &ctx.scheme, &ctx.budget)?;
    let valid = v.is_valid();
    let json = json!({"x": stream.spec().to_string(), "valid": valid, "checks": v});
    let yes = |b: bool| if b { "yes" } else { "no" }.to_string();
    Ok(Report::fields(
        json,
        &[
            ("valid", yes(valid)),
            ("scheme matches", yes(v.scheme_matches)),
            ("q matches collision", yes(v.q_matches)),
            ("window matches stream", yes(v.window_matches)),
            ("p/q in C", yes(v.member)),
            ("q <= b0^(a^n)", yes(v.within_bound)),
            ("|x - p/q| < 1/(qQ)", yes(v.inequality)),
        ],
    )
    .negative(!valid))
}

fn ladder(ctx: &Ctx, x: &StreamArgs, n_max: u32) -> Result<Report> {
    let stream = ctx.stream(x)?;
    let ladder = dirichlet::solution_ladder(&stream, n_max, &ctx.scheme, &ctx.budget)?;
    let mut r = Report::new(
        json!({"x": stream.spec().to_string(), "ladder": ladder}),
        &["levels", "p", "q", "theorem", "corollary"],
    );
    let mut negative = false;
    for e in &ladder.entries {
        let levels: Vec<String> = e.levels.iter().map(u32::to_string).collect();
        let corollary = match e.corollary {
            Some(dirichlet::Check::Certified) => "certified",
            Some(dirichlet::Check::Violated) => "violated",
            Some(dirichlet::Check::Undecided) => "undecided",
            None => "-",
        };
        negative |= !e.theorem || e.corollary == Some(dirichlet::Check::Violated);
        r.row(vec![
            levels.join(" "),
            e.certificate.p.to_string(),
            e.certificate.q.to_string(),
            e.theorem.to_string(),
            corollary.into(),
        ]);
    }
    Ok(r.negative(negative))
}

fn record_rows(r: &mut Report, records: &[census::CensusRecord]) {
    for c in records {
        r.row(vec![
            c.s.to_string(),
            c.t.to_string(),
            c.convention.to_string(),
            c.count.to_string(),
        ]);
    }
}

fn census_range(ctx: &Ctx, s: u64, t: u64, convention: Convention) -> Result<Report> {
    let rec = census::count_band_with(&ctx.scheme, s, t, convention, &ctx.census())?;
    let mut r = Report::new(
        serde_json::to_value(&rec).expect("record serializes"),
        &["s", "t", "convention", "count"],
    );
    record_rows(&mut r, std::slice::from_ref(&rec));
    Ok(r)
}

fn census_bands(
    ctx: &Ctx,
    n_lo: u32,
    n_hi: u32,
    chunk: u64,
    checkpoint: Option<std::path::PathBuf>,
    convention: Convention,
) -> Result<Report> {
    let records = census::run_census(&CensusRun {
        scheme: &ctx.scheme,
        n_lo,
        n_hi,
        chunk_size: chunk,
        convention,
        checkpoint,
        options: ctx.census(),
    })?;
    let mut r = Report::new(
        json!({"scheme": ctx.scheme.to_string(), "bands": records}),
        &["s", "t", "convention", "count"],
    );
    record_rows(&mut r, &records);
    Ok(r)
}

fn decimals(printed: &str) -> usize {
    printed.split_once('.').map_or(0, |(_, f)| f.len())
}

fn phi(
    ctx: &Ctx,
    n: Option<u32>,
    table1: bool,
    extended: bool,
    convention: Convention,
) -> Result<Report> {
    let opts = ctx.census();
    if !table1 {
        let n = n.ok_or_else(|| Error::Parse("phi needs --n or --table1".into()))?;
        let v = census::phi(&ctx.scheme, n, convention, &opts)?;
        let mut r = Report::new(
            serde_json::to_value(&v).expect("phi serializes"),
            &["n", "N(b^n,b^(n+1))", "N(b^(n-1),b^n)", "phi"],
        );
        r.row(vec![
            v.n.to_string(),
            v.upper.to_string(),
            v.lower.to_string(),
            format!("{:.6}", v.value),
        ]);
        return Ok(r);
    }
    let cantor = CantorScheme::new(3, &[0, 2])?;
    if ctx.scheme.base() != cantor.base() || ctx.scheme.digits() != cantor.digits() {
        return Err(Error::Parse("--table1 applies to b=3;S=0,2 only".into()));
    }
    let hi = if extended { 11 } else { 8 };
    let values = census::phi_series(&ctx.scheme, 4, hi, convention, &opts)?;
    let mut r = Report::new(
        Value::Null,
        &["n", "N", "phi", "rounded", "published", "match"],
    );
    let mut rows = Vec::new();
    let mut all = true;
    for (v, (_, printed)) in values.iter().zip(TABLE1) {
        let rounded = format!("{:.*}", decimals(printed), v.value);
        let ok = rounded == printed;
        all &= ok;
        r.row(vec![
            v.n.to_string(),
            v.upper.to_string(),
            format!("{:.6}", v.value),
            rounded.clone(),
            printed.to_string(),
            ok.to_string(),
        ]);
        rows.push(json!({
            "n": v.n,
            "upper": v.upper,
            "lower": v.lower,
            "phi": v.value,
            "rounded": rounded,
            "published": printed,
            "match": ok,
        }));
    }
    r.json = json!({"convention": convention.to_string(), "rows": rows, "all_match": all});
    Ok(r.negative(!all))
}

fn fit(ctx: &Ctx, n_lo: u32, n_hi: u32, convention: Convention) -> Result<Report> {
    let opts = ctx.census();
    let mut points = Vec::new();
    for n in n_lo..=n_hi {
        let (s, t) = census::band_bounds(&ctx.scheme, n)?;
        points.push((
            n,
            census::count_band_with(&ctx.scheme, s, t, convention, &opts)?.count,
        ));
    }
    let f = census::growth_fit(&points)?;
    let mut r = Report::new(
        json!({"points": points, "fit": f, "convention": convention.to_string()}),
        &["n", "N", "log2 N", "residual"],
    );
    for ((n, c), res) in points.iter().zip(&f.residuals) {
        r.row(vec![
            n.to_string(),
            c.to_string(),
            format!("{:.6}", (*c as f64).log2()),
            format!("{res:+.6}"),
        ]);
    }
    r.row(vec![
        "slope".into(),
        format!("{:.6}", f.slope),
        String::new(),
        String::new(),
    ]);
    Ok(r)
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_default()
}

fn score(ctx: &Ctx, x: &StreamArgs, q_max: u64, epsilon: Option<&str>) -> Result<Report> {
    let stream = ctx.stream(x)?;
    let mut table = lab::best_intrinsic(&stream, &ctx.scheme, q_max, &ctx.budget)?;
    let flags = match epsilon {
        Some(e) => Some(lab::vwa_flags(
            &mut table,
            &parse_fraction(e)?,
            &ctx.budget,
        )?),
        None => None,
    };
    let mut json = table.to_json();
    if let Some(f) = &flags {
        json["vwa"] = serde_json::to_value(f).expect("flags serialize");
    }
    let mut header = vec!["q", "p", "error_lo", "error_hi", "badness", "epsilon"];
    if flags.is_some() {
        header.push("vwa");
    }
    let mut r = Report::new(json, &header);
    for (i, rec) in table.records.iter().enumerate() {
        let mut row = vec![
            rec.q.to_string(),
            rec.p.to_string(),
            format!("{:.9e}", rec.error_lo_f64()),
            format!("{:.9e}", rec.error_hi_f64()),
            opt(rec.badness, 9),
            opt(rec.epsilon, 9),
        ];
        if let Some(f) = &flags {
            row.push(f.indices.contains(&i).to_string());
        }
        r.row(row);
    }
    Ok(r)
}

fn convergents(ctx: &Ctx, x: &StreamArgs, count: usize) -> Result<Report> {
    let stream = ctx.stream(x)?;
    let list = lab::convergents(&stream, count, &ctx.budget)?;
    let text: Vec<String> = list.iter().map(display_fraction).collect();
    let mut r = Report::new(
        json!({"x": stream.spec().to_string(), "convergents": text}),
        &["i", "p", "q"],
    );
    for (i, c) in list.iter().enumerate() {
        r.row(vec![
            i.to_string(),
            c.numer().to_string(),
            c.denom().to_string(),
        ]);
    }
    Ok(r)
}

fn extrinsic(ctx: &Ctx, x: &StreamArgs, count: usize) -> Result<Report> {
    let stream = ctx.stream(x)?;
    let split = lab::extrinsic_split(&stream, &ctx.scheme, count, &ctx.budget)?;
    let mut r = Report::new(
        json!({"x": stream.spec().to_string(), "inside": split.inside, "outside": split.outside}),
        &["convergent", "in C", "eps'", "running min"],
    );
    for c in &split.inside {
        r.row(vec![c.clone(), "true".into(), String::new(), String::new()]);
    }
    for c in &split.outside {
        r.row(vec![
            c.value.clone(),
            "false".into(),
            format!("{:.9}", c.epsilon),
            format!("{:.9}", c.running_min),
        ]);
    }
    Ok(r)
}
