use std::path::{Path, PathBuf};

use latsym::functionals::{
    cavalieri_sum, check_supermodular, default_supermodular_grid, f_weighted_sum,
    hardy_littlewood_sum, le_rel, lp_distance_pow, riesz_sum, sobolev_energy, Bivariate, Kernel,
    INEQUALITY_RTOL,
};
use latsym::io::{format_sparse_function, parse_sparse_function};
use latsym::optimize::{
    minimize_dnls, minimize_nonnormalized, minimize_sobolev_extremal, DescentOptions, Minimized,
    TruncatedDomain,
};
use latsym::oracle::{
    brute_force_riesz_max, enumerate_connected_supports, equimeasurable_minimizers,
    pruss_obstruction,
};
use latsym::rearrange::{default_max_cycles, is_schwarz_symmetric, rearranged, schwarz_iterate};
use latsym::sample::random_function;
use latsym::{direction_set, values_multiset, Direction, SparseFunction, ValueMultiset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{function_json, point_json, shape_json, Report};
use crate::{Command, DomainArgs, Failure, OracleQuery, Problem, VerifyArgs, VerifyKind};

pub(crate) fn execute(cmd: &Command, seed: u64, report: &mut Report) -> Result<(), Failure> {
    match cmd {
        Command::Rearrange(a) => rearrange(a, report),
        Command::Verify(a) => verify(a, seed, report),
        Command::Oracle { query } => oracle(query, report),
        Command::Minimize { problem } => minimize(problem, report),
        Command::Sample(a) => sample(a, seed, report),
    }
}

fn load(role: &str, path: &Path, report: &mut Report) -> Result<SparseFunction, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?;
    report.input(role, path, &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))?;
    parse_sparse_function(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_function(path: &Path, u: &SparseFunction) -> Result<String, Failure> {
    let text = format_sparse_function(u);
    std::fs::write(path, &text)
        .map_err(|e| Failure::Internal(format!("writing {}: {e}", path.display())))?;
    Ok(crate::sha256_hex(text.as_bytes()))
}

fn parse_cycle(spec: &str, dim: usize) -> Result<Vec<Direction>, Failure> {
    if spec == "default" {
        return Ok(direction_set(dim)?);
    }
    let list = spec.strip_prefix("custom:").ok_or_else(|| {
        Failure::Usage(format!(
            "bad cycle {spec:?}: expected default or custom:LIST"
        ))
    })?;
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<Direction>()
                .map_err(|e| Failure::Usage(format!("bad direction {s:?}: {e}")))
        })
        .collect()
}

fn rearrange(a: &crate::RearrangeArgs, report: &mut Report) -> Result<(), Failure> {
    let u = load("input", &a.input, report)?;
    let cycle = parse_cycle(&a.cycle, u.dim())?;
    let max_cycles = a.max_cycles.unwrap_or_else(|| default_max_cycles(&u));
    let mut traces: Vec<(usize, Direction, SparseFunction)> = Vec::new();
    let res = schwarz_iterate(&u, &cycle, max_cycles, |step, e, cur| {
        if a.trace {
            traces.push((step, e, cur.clone()));
        }
    })?;
    let mut files = Vec::new();
    for (step, e, f) in &traces {
        let path = trace_path(&a.output, *step);
        write_function(&path, f)?;
        files.push(
            json!({ "direction": e.to_string(), "path": path.display().to_string(), "step": step }),
        );
    }
    let digest = write_function(&a.output, &res.function)?;
    report.set(
        "cycle",
        Value::Array(cycle.iter().map(|e| json!(e.to_string())).collect()),
    );
    report.set("cycles", res.cycles);
    report.set("steps", res.cycles * cycle.len());
    report.set("support_size", res.function.len());
    report.set(
        "output",
        json!({ "path": a.output.display().to_string(), "sha256": digest }),
    );
    report.set("schwarz_symmetric", is_schwarz_symmetric(&res.function));
    report.set(
        "equimeasurable",
        values_multiset(&res.function) == values_multiset(&u),
    );
    if a.trace {
        report.set("trace", Value::Array(files));
    }
    Ok(())
}

fn trace_path(output: &Path, step: usize) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(format!(".step-{step:04}.tsv"));
    PathBuf::from(name)
}

fn require<'a>(p: &'a Option<PathBuf>, flag: &str, kind: VerifyKind) -> Result<&'a Path, Failure> {
    p.as_deref()
        .ok_or_else(|| Failure::Usage(format!("{kind:?} needs --{flag}")))
}

/// Records `lhs <= rhs` with its gap.
fn inequality(report: &mut Report, lhs: f64, rhs: f64) {
    let pass = le_rel(lhs, rhs, INEQUALITY_RTOL);
    report.set("lhs", lhs);
    report.set("rhs", rhs);
    report.set("gap", rhs - lhs);
    report.set("rtol", INEQUALITY_RTOL);
    report.fail_unless(pass);
}

fn verify(a: &VerifyArgs, seed: u64, report: &mut Report) -> Result<(), Failure> {
    let kind = a.kind;
    if kind == VerifyKind::Supermodular {
        let g: Bivariate = a.bivariate.parse()?;
        let grid = default_supermodular_grid(seed);
        let verdict = check_supermodular(&g, &grid, a.strict);
        report.set("bivariate", g.name());
        report.set("strict", a.strict);
        report.set("checked", verdict.checked);
        report.set(
            "witness",
            verdict.witness.map(|w| json!(w)).unwrap_or(Value::Null),
        );
        report.fail_unless(verdict.pass);
        return Ok(());
    }
    let u = load("u", require(&a.u, "u", kind)?, report)?;
    let us = rearranged(&u)?;
    match kind {
        VerifyKind::PolyaSzego => {
            report.set("p", a.p);
            inequality(report, sobolev_energy(&us, a.p)?, sobolev_energy(&u, a.p)?);
        }
        VerifyKind::Cavalieri => {
            let p = a.p;
            let f = move |t: f64| t.powf(p);
            let before = cavalieri_sum(&u, f)?;
            let after = cavalieri_sum(&us, f)?;
            report.set("p", p);
            report.set("lhs", before);
            report.set("rhs", after);
            report.set("gap", after - before);
            report.fail_unless((after - before).abs() <= 1e-12 * before.abs().max(1.0));
        }
        VerifyKind::WeightedF => {
            let p = a.p;
            let f = move |r: f64, t: f64| t.powf(p) / (1.0 + r);
            let window = u.max_linf().max(us.max_linf());
            report.set("p", p);
            report.set("weight", "t^p / (1 + |x|)");
            inequality(
                report,
                f_weighted_sum(&u, f, window)?,
                f_weighted_sum(&us, f, window)?,
            );
        }
        VerifyKind::Riesz | VerifyKind::HardyLittlewood | VerifyKind::Contraction => {
            let v = load("v", require(&a.v, "v", kind)?, report)?;
            let vs = rearranged(&v)?;
            match kind {
                VerifyKind::Riesz => {
                    let g: Bivariate = a.bivariate.parse()?;
                    let h: Kernel = a.kernel.parse()?;
                    report.set("bivariate", g.name());
                    report.set("kernel", h.to_string());
                    inequality(
                        report,
                        riesz_sum(&u, &v, &g, &h)?,
                        riesz_sum(&us, &vs, &g, &h)?,
                    );
                }
                VerifyKind::HardyLittlewood => {
                    inequality(
                        report,
                        hardy_littlewood_sum(&u, &v)?,
                        hardy_littlewood_sum(&us, &vs)?,
                    );
                }
                _ => {
                    report.set("p", a.p);
                    inequality(
                        report,
                        lp_distance_pow(&us, &vs, a.p)?,
                        lp_distance_pow(&u, &v, a.p)?,
                    );
                }
            }
        }
        VerifyKind::Supermodular => unreachable!("handled above"),
    }
    Ok(())
}

fn multiset(values: &[f64]) -> Result<ValueMultiset, Failure> {
    Ok(ValueMultiset::new(values.to_vec())?)
}

fn oracle(q: &OracleQuery, report: &mut Report) -> Result<(), Failure> {
    match q {
        OracleQuery::Pentominoes { n } => {
            let classes = enumerate_connected_supports(*n)?;
            report.set("n", *n);
            report.set("count", classes.len());
            report.set(
                "classes",
                Value::Array(classes.iter().map(shape_json).collect()),
            );
        }
        OracleQuery::Minimizers { values } => {
            let m = equimeasurable_minimizers(&multiset(values)?)?;
            report.set("values", json!(values));
            report.set("energy", m.energy);
            report.set(
                "shapes",
                Value::Array(m.shapes.iter().map(shape_json).collect()),
            );
            report.set(
                "placements",
                Value::Array(
                    m.assignments
                        .iter()
                        .map(|a| function_json(&a.placement))
                        .collect(),
                ),
            );
        }
        OracleQuery::Obstruction => {
            let r = pruss_obstruction()?;
            let sets = |s: &[Vec<latsym::LatticePoint>]| {
                Value::Array(
                    s.iter()
                        .map(|set| Value::Array(set.iter().map(point_json).collect()))
                        .collect(),
                )
            };
            report.set("multiset1", json!(r.multiset1.as_slice()));
            report.set("shape1", shape_json(&r.shape1));
            report.set("searched1", r.searched1);
            report.set("multiset2", json!(r.multiset2.as_slice()));
            report.set("shape2", shape_json(&r.shape2));
            report.set("searched2", r.searched2);
            report.set(
                "plus_eigenvector_minimizers",
                Value::Array(
                    r.plus_eigenvector_minimizers
                        .iter()
                        .map(shape_json)
                        .collect(),
                ),
            );
            report.set("first_five1", sets(&r.first_five1));
            report.set("first_five2", sets(&r.first_five2));
            report.set("diagonal_in_shape2", r.diagonal_in_shape2);
            report.set("contradiction", r.contradiction);
            report.fail_unless(r.contradiction);
        }
        OracleQuery::RieszMax {
            u_values,
            v_values,
            window,
            kernel,
            bivariate,
        } => {
            let g: Bivariate = bivariate.parse()?;
            let h: Kernel = kernel.parse()?;
            let (a, b) = (multiset(u_values)?, multiset(v_values)?);
            let best = brute_force_riesz_max(&a, &b, *window, &g, &h)?;
            let place = |m: &ValueMultiset| -> Result<SparseFunction, Failure> {
                let f = SparseFunction::from_entries(
                    1,
                    m.as_slice()
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| (latsym::LatticePoint::new(&[i as i64]), v)),
                )?;
                Ok(rearranged(&f)?)
            };
            let (us, vs) = (place(&a)?, place(&b)?);
            let symmetric = riesz_sum(&us, &vs, &g, &h)?;
            report.set("bivariate", g.name());
            report.set("kernel", h.to_string());
            report.set("window", *window);
            report.set("maximum", best.value);
            report.set("argmax_u", function_json(&best.u));
            report.set("argmax_v", function_json(&best.v));
            report.set("rearranged_value", symmetric);
            report.fail_unless((symmetric - best.value).abs() <= 1e-12 * best.value.abs().max(1.0));
        }
    }
    Ok(())
}

fn options(d: &DomainArgs) -> DescentOptions {
    DescentOptions {
        iters: d.iters,
        tol: d.tol,
        rearrange_every: d.rearrange_every,
        ..DescentOptions::default()
    }
}

fn record_run(report: &mut Report, d: &DomainArgs, m: &Minimized) -> Result<(), Failure> {
    let symmetric = is_schwarz_symmetric(&m.u);
    let monotone = m.trace.rearrangements_monotone(INEQUALITY_RTOL);
    report.set("dim", d.dim);
    report.set("radius", d.radius);
    report.set("objective", m.objective);
    report.set("residual", m.residual);
    report.set("converged", m.converged);
    report.set("iterations", m.iterations);
    report.set("rearrangement_steps", m.trace.rearrangement_steps.len());
    report.set("rejected_rearrangements", m.trace.rejected_rearrangements);
    report.set("monotone_across_rearrangements", monotone);
    report.set("schwarz_symmetric", symmetric);
    report.set("support_size", m.u.len());
    if let Some(path) = &d.solution {
        let digest = write_function(path, &m.u)?;
        report.set(
            "solution",
            json!({ "path": path.display().to_string(), "sha256": digest }),
        );
    }
    report.fail_unless(m.converged && symmetric && monotone);
    Ok(())
}

fn minimize(p: &Problem, report: &mut Report) -> Result<(), Failure> {
    match p {
        Problem::Dnls { c, sigma, domain } => {
            let dom = TruncatedDomain::new(domain.dim, domain.radius)?;
            let g = minimize_dnls(*c, *sigma, &dom, &options(domain))?;
            report.set("problem", "dnls");
            report.set("c", *c);
            report.set("sigma", *sigma);
            report.set("energy", g.energy);
            report.set("omega", g.omega);
            report.set("euler_lagrange_residual", g.euler_lagrange_residual);
            report.set("negative_energy", g.energy < 0.0);
            record_run(report, domain, &g.result)?;
        }
        Problem::Wave {
            omega,
            sigma,
            domain,
        } => {
            let dom = TruncatedDomain::new(domain.dim, domain.radius)?;
            let m = minimize_nonnormalized(*omega, *sigma, &dom, &options(domain))?;
            report.set("problem", "wave");
            report.set("omega", *omega);
            report.set("sigma", *sigma);
            record_run(report, domain, &m)?;
        }
        Problem::Sobolev { p, q, domain } => {
            let dom = TruncatedDomain::new(domain.dim, domain.radius)?;
            let m = minimize_sobolev_extremal(*p, *q, &dom, &options(domain))?;
            report.set("problem", "sobolev");
            report.set("p", *p);
            report.set("q", *q);
            report.set("sobolev_constant", m.objective.powf(1.0 / p));
            record_run(report, domain, &m)?;
        }
    }
    Ok(())
}

fn sample(a: &crate::SampleArgs, seed: u64, report: &mut Report) -> Result<(), Failure> {
    if a.dim < 1 {
        return Err(Failure::Usage("--dim must be at least 1".into()));
    }
    let cells = (2 * a.radius + 1).checked_pow(a.dim as u32);
    if cells.is_none_or(|c| a.support > c) {
        return Err(Failure::Usage(format!(
            "support {} does not fit in the box of radius {}",
            a.support, a.radius
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_function(&mut rng, a.dim, a.support, a.radius, !a.ties);
    let digest = write_function(&a.output, &u)?;
    report.set("dim", a.dim);
    report.set("support_size", u.len());
    report.set(
        "output",
        json!({ "path": a.output.display().to_string(), "sha256": digest }),
    );
    Ok(())
}
