//! The four analyses behind the subcommands.  Each returns a finished report
//! plus the process exit code; configuration problems are raised as
//! [`ConfigError`] before any report exists.

use crate::config::{BuiltSpace, ConfigError, RawConfig};
use crate::report::{Report, EXIT_CAP_EXCEEDED, EXIT_CHECK_FAILURE, EXIT_OK};
use nilspace_core::cocycle::{check_cocycle, solve_coboundary_averaging, solve_coboundary_linear, Cocycle};
use nilspace_core::error::Error;
use nilspace_core::space::{structure_group, CheckBudget, CheckReport, Coverage, Point};
use nilspace_core::translations::{
    enumerate_level, is_k_translation, lift_translation, pushforward, translation_filtration,
    LiftOutcome, TranslationTest,
};
use nilspace_core::values::{ValueGroup, ValuePoint};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

fn coverage_text(c: &Coverage) -> String {
    match c {
        Coverage::Exhaustive => "exhaustive".to_string(),
        Coverage::Sampled { checked } => format!("sampled:{checked}"),
        Coverage::Skipped { reason } => format!("skipped:{reason}"),
    }
}

fn emit_check(report: &mut Report, rep: &CheckReport) {
    report.section(&format!("check {}", rep.name));
    report.kv("pass", rep.passed);
    report.kv("coverage", coverage_text(&rep.coverage));
    if let Some(w) = &rep.witness {
        report.kv("witness", w);
    }
}

fn error_exit(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } | Error::DimensionCap { .. } => EXIT_CAP_EXCEEDED,
        _ => EXIT_CHECK_FAILURE,
    }
}

fn emit_error(report: &mut Report, e: &Error) -> i32 {
    report.section("error");
    report.kv("message", e);
    report.kv("status", "error");
    error_exit(e)
}

fn map_text(map: &[Point]) -> String {
    map.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_check(built: &BuiltSpace, mut report: Report, seed: u64) -> (Report, i32) {
    let space = &built.space;
    report.kv("space", space.name());
    report.kv("points", space.point_count());
    report.kv("max-dim", space.max_dim());
    let degree = built.degree();
    report.kv("degree", degree);
    let budget = CheckBudget {
        seed,
        ..CheckBudget::default()
    };
    let reports = match space.check_nilspace(degree, &budget) {
        Ok(r) => r,
        Err(e) => {
            let code = emit_error(&mut report, &e);
            return (report, code);
        }
    };
    let mut failures = 0usize;
    let mut partial = 0usize;
    for rep in &reports {
        emit_check(&mut report, rep);
        if !rep.passed {
            failures += 1;
        }
        if matches!(rep.coverage, Coverage::Skipped { .. }) {
            partial += 1;
        }
    }
    report.section("summary");
    report.kv("checks", reports.len());
    report.kv("failures", failures);
    report.kv("partial", partial);
    let code = if failures > 0 {
        report.kv("status", "fail");
        EXIT_CHECK_FAILURE
    } else if partial > 0 {
        report.kv("status", "partial");
        EXIT_CAP_EXCEEDED
    } else {
        report.kv("status", "pass");
        EXIT_OK
    };
    (report, code)
}

pub fn cmd_translations(
    built: &BuiltSpace,
    raw: &RawConfig,
    mut report: Report,
) -> Result<(Report, i32), ConfigError> {
    let space = &built.space;
    report.kv("space", space.name());
    let max_k = match raw.section("translations").and_then(|s| s.get("max-k")) {
        Some(e) => e.value.parse::<usize>().map_err(|_| ConfigError {
            line: Some(e.line),
            message: format!("invalid max-k `{}`", e.value),
        })?,
        None => built.degree() + 1,
    };
    report.kv("max-k", max_k);
    let mut capped = false;
    for k in 1..=max_k {
        report.section(&format!("level {k}"));
        match enumerate_level(space, k, built.enumeration_cap) {
            Ok(maps) => {
                report.kv("order", maps.len());
                for map in &maps {
                    report.kv("translation", map_text(map));
                }
            }
            Err(e @ Error::CapExceeded { .. }) => {
                report.kv("order", "unknown");
                report.kv("cap-exceeded", e);
                capped = true;
            }
            Err(e) => {
                let code = emit_error(&mut report, &e);
                return Ok((report, code));
            }
        }
    }
    report.section("filtration");
    let mut failed = false;
    if capped {
        report.kv("checked", false);
    } else {
        match translation_filtration(space, max_k, built.enumeration_cap) {
            Ok(tf) => match tf.check() {
                Ok(()) => report.kv("commutator-law", "pass"),
                Err((i, j, comm)) => {
                    failed = true;
                    report.kv("commutator-law", "fail");
                    report.kv("witness", format!("[{i}] x [{j}] -> {}", map_text(&comm)));
                }
            },
            Err(e) => {
                let code = emit_error(&mut report, &e);
                return Ok((report, code));
            }
        }
    }
    report.section("summary");
    let code = if failed {
        report.kv("status", "fail");
        EXIT_CHECK_FAILURE
    } else if capped {
        report.kv("status", "partial");
        EXIT_CAP_EXCEEDED
    } else {
        report.kv("status", "pass");
        EXIT_OK
    };
    Ok((report, code))
}

/// A parsed cocycle table: one value per cube of the given order, in cube
/// enumeration order.
pub struct CocycleTable {
    pub order: usize,
    pub group: ValueGroup,
    pub values: Vec<ValuePoint>,
    pub moduli: Vec<u64>,
    pub window: BigRational,
}

pub fn parse_cocycle_table(
    built: &BuiltSpace,
    raw: &RawConfig,
    table_text: &str,
) -> Result<CocycleTable, ConfigError> {
    let solve = raw.section("solve");
    let order: usize = match solve.and_then(|s| s.get("order")) {
        Some(e) => e.value.parse().map_err(|_| ConfigError {
            line: Some(e.line),
            message: format!("invalid order `{}`", e.value),
        })?,
        None => {
            return Err(ConfigError {
                line: None,
                message: "missing [solve] section with `order = ...`".into(),
            })
        }
    };
    let moduli: Vec<u64> = match solve.and_then(|s| s.get("moduli")) {
        Some(e) => e
            .value
            .split(',')
            .map(|p| {
                p.trim().parse().map_err(|_| ConfigError {
                    line: Some(e.line),
                    message: format!("invalid modulus `{}`", p.trim()),
                })
            })
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let window = match solve.and_then(|s| s.get("window")) {
        Some(e) => {
            let (p, q) = e.value.split_once('/').ok_or_else(|| ConfigError {
                line: Some(e.line),
                message: format!("invalid window `{}` (expected p/q)", e.value),
            })?;
            let p: i64 = p.trim().parse().map_err(|_| ConfigError {
                line: Some(e.line),
                message: format!("invalid window numerator `{p}`"),
            })?;
            let q: i64 = q.trim().parse().map_err(|_| ConfigError {
                line: Some(e.line),
                message: format!("invalid window denominator `{q}`"),
            })?;
            if q <= 0 {
                return Err(ConfigError {
                    line: Some(e.line),
                    message: "window denominator must be positive".into(),
                });
            }
            BigRational::new(BigInt::from(p), BigInt::from(q))
        }
        None => BigRational::one(),
    };

    let ncubes = match built.space.cubes(order) {
        Ok(list) => list.cubes.len(),
        Err(e) => {
            return Err(ConfigError {
                line: None,
                message: format!("cannot enumerate cubes of dimension {order}: {e}"),
            })
        }
    };

    // First pass: split ids and value strings, infer the torus rank.
    let mut entries: Vec<(usize, &str, usize)> = Vec::new();
    for (i, raw_line) in table_text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, value) = line.split_once(char::is_whitespace).ok_or_else(|| ConfigError {
            line: Some(lineno),
            message: "expected `cube-id value`".into(),
        })?;
        let id: usize = id.parse().map_err(|_| ConfigError {
            line: Some(lineno),
            message: format!("invalid cube id `{id}`"),
        })?;
        entries.push((id, value.trim(), lineno));
    }
    let torus_rank = entries
        .first()
        .map(|(_, v, _)| {
            let torus_part = v.split(';').next().unwrap_or("");
            if torus_part.is_empty() {
                0
            } else {
                torus_part.split(',').count()
            }
        })
        .unwrap_or(0);
    let group = ValueGroup::new(torus_rank, moduli.clone()).map_err(|e| ConfigError {
        line: None,
        message: e.to_string(),
    })?;

    let mut values: Vec<Option<ValuePoint>> = vec![None; ncubes];
    for (id, value, lineno) in entries {
        if id >= ncubes {
            return Err(ConfigError {
                line: Some(lineno),
                message: format!("cube id {id} out of range ({ncubes} cubes of dimension {order})"),
            });
        }
        if values[id].is_some() {
            return Err(ConfigError {
                line: Some(lineno),
                message: format!("duplicate entry for cube {id}"),
            });
        }
        let v = ValuePoint::parse(value, &group).map_err(|e| ConfigError {
            line: Some(lineno),
            message: e.to_string(),
        })?;
        values[id] = Some(v);
    }
    let values: Vec<ValuePoint> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| ConfigError {
                line: None,
                message: format!("cocycle table is missing cube {i}"),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(CocycleTable {
        order,
        group,
        values,
        moduli,
        window,
    })
}

/// Embed the finite components into torus coordinates so the averaging
/// solver can run on tables given over finite cyclic groups.
fn torus_form(table: &CocycleTable) -> Result<(ValueGroup, Vec<ValuePoint>), Error> {
    if table.group.finite_moduli.is_empty() {
        return Ok((table.group.clone(), table.values.clone()));
    }
    if table.group.torus_rank != 0 {
        return Err(Error::UnsupportedCarrier(
            "mixed torus/finite tables are not supported by the averaging path".into(),
        ));
    }
    let group = ValueGroup::torus_only(table.moduli.len());
    let values = table
        .values
        .iter()
        .map(|v| nilspace_core::values::embed_in_value_group(&table.moduli, &v.finite))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((group, values))
}

pub fn cmd_solve(
    built: &BuiltSpace,
    table: &CocycleTable,
    method: &str,
    mut report: Report,
    seed: u64,
) -> (Report, i32) {
    let space = &built.space;
    report.kv("space", space.name());
    report.kv("order", table.order);
    report.kv("method", method);

    let run_linear = method == "linear" || method == "both";
    let run_averaging = method == "averaging" || method == "both";
    if !run_linear && !run_averaging {
        report.section("error");
        report.kv("message", format!("unknown method `{method}`"));
        report.kv("status", "error");
        return (report, crate::report::EXIT_USAGE);
    }

    // Reject non-cocycles up front, whatever the method.
    let (torus_group, torus_values) = match torus_form(table) {
        Ok(x) => x,
        Err(e) => {
            let code = emit_error(&mut report, &e);
            return (report, code);
        }
    };
    let rho = match Cocycle::new(space.clone(), table.order, torus_group.clone(), torus_values) {
        Ok(r) => r,
        Err(e) => {
            let code = emit_error(&mut report, &e);
            return (report, code);
        }
    };
    let budget = CheckBudget {
        seed,
        ..CheckBudget::default()
    };
    match check_cocycle(&rho, &budget) {
        Ok(reps) => {
            for rep in &reps {
                emit_check(&mut report, rep);
                if !rep.passed {
                    report.section("summary");
                    report.kv("status", "rejected");
                    return (report, EXIT_CHECK_FAILURE);
                }
            }
        }
        Err(e) => {
            let code = emit_error(&mut report, &e);
            return (report, code);
        }
    }

    let mut linear_solution: Option<Vec<Vec<u64>>> = None;
    let mut obstructed = false;
    if run_linear {
        report.section("linear");
        if table.moduli.is_empty() {
            report.kv("skipped", "no moduli declared in [solve]");
        } else {
            let rhs: Vec<Vec<u64>> = table.values.iter().map(|v| v.finite.clone()).collect();
            match solve_coboundary_linear(space, table.order, &table.moduli, &rhs, 1 << 20) {
                Ok(f) => {
                    report.kv("solved", true);
                    for (x, coords) in f.iter().enumerate() {
                        let rendered = coords
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(",");
                        report.kv("f", format!("{x} ;{rendered}"));
                    }
                    linear_solution = Some(f);
                }
                Err(Error::Obstruction(cert)) => {
                    obstructed = true;
                    report.kv("solved", false);
                    report.kv("obstruction-component", cert.component);
                    report.kv("obstruction-modulus", cert.modulus);
                    report.kv("obstruction-gcd", cert.gcd);
                    report.kv("obstruction-rhs", cert.combined_rhs);
                    let combo = cert
                        .combination
                        .iter()
                        .map(|(i, c)| format!("{i}:{c}"))
                        .collect::<Vec<_>>()
                        .join(",");
                    report.kv("obstruction-combination", combo);
                }
                Err(e) => {
                    let code = emit_error(&mut report, &e);
                    return (report, code);
                }
            }
        }
    }

    let mut averaging_solution: Option<Vec<ValuePoint>> = None;
    if run_averaging {
        report.section("averaging");
        match solve_coboundary_averaging(&rho, &table.window) {
            Ok(sol) => {
                report.kv("solved", true);
                for (x, v) in sol.f.iter().enumerate() {
                    report.kv("f", format!("{x} {}", v.render()));
                }
                report.kv("input-diameter", &sol.report.input_diameter);
                report.kv("output-diameter", &sol.report.output_diameter);
                report.kv("max-window-spread", &sol.report.max_window_spread);
                report.kv("recursion-depth", sol.report.recursion_depth);
                averaging_solution = Some(sol.f);
            }
            Err(e) => {
                report.kv("solved", false);
                report.kv("error", &e);
                if method == "averaging" {
                    report.section("summary");
                    report.kv("status", "fail");
                    return (report, error_exit(&e));
                }
            }
        }
    }

    if method == "both" {
        report.section("cross-validation");
        match (&linear_solution, &averaging_solution) {
            (Some(lin), Some(avg)) => {
                // The two solutions must differ by a constant.
                let diffs: Vec<ValuePoint> = lin
                    .iter()
                    .zip(avg)
                    .map(|(coords, a)| {
                        let e = nilspace_core::values::embed_in_value_group(&table.moduli, coords)
                            .expect("solution coordinates are reduced");
                        torus_group.sub(a, &e)
                    })
                    .collect();
                let agree = diffs.iter().all(|d| d == &diffs[0]);
                report.kv("agree-up-to-constant", agree);
                if !agree {
                    report.section("summary");
                    report.kv("status", "fail");
                    return (report, EXIT_CHECK_FAILURE);
                }
            }
            _ => report.kv("agree-up-to-constant", "not-applicable"),
        }
    }

    report.section("summary");
    let solved = linear_solution.is_some() || averaging_solution.is_some();
    let code = if obstructed && !solved {
        report.kv("status", "obstructed");
        EXIT_CHECK_FAILURE
    } else if solved {
        report.kv("status", "solved");
        EXIT_OK
    } else {
        report.kv("status", "fail");
        EXIT_CHECK_FAILURE
    };
    (report, code)
}

pub fn cmd_lift(
    built: &BuiltSpace,
    raw: &RawConfig,
    mut report: Report,
) -> Result<(Report, i32), ConfigError> {
    let space = &built.space;
    report.kv("space", space.name());
    let section = raw.section("lift").ok_or_else(|| ConfigError {
        line: None,
        message: "missing [lift] section".into(),
    })?;
    let k: usize = {
        let e = section.require("k")?;
        e.value.parse().map_err(|_| ConfigError {
            line: Some(e.line),
            message: format!("invalid k `{}`", e.value),
        })?
    };
    report.kv("k", k);
    let degree = built.degree();
    let structure = match structure_group(space, degree) {
        Ok(s) => s,
        Err(e) => {
            let code = emit_error(&mut report, &e);
            return Ok((report, code));
        }
    };
    let target_points = structure.factor.target.point_count();
    report.kv("factor-points", target_points);
    let map_entry = section.require("map")?;
    let phi_bar: Vec<Point> = if map_entry.value == "identity" {
        (0..target_points as Point).collect()
    } else {
        map_entry
            .value
            .split(',')
            .map(|p| {
                p.trim().parse().map_err(|_| ConfigError {
                    line: Some(map_entry.line),
                    message: format!("invalid point `{}` in map", p.trim()),
                })
            })
            .collect::<Result<_, _>>()?
    };
    if phi_bar.len() != target_points {
        return Err(ConfigError {
            line: Some(map_entry.line),
            message: format!(
                "map has {} entries but the factor has {target_points} points",
                phi_bar.len()
            ),
        });
    }
    report.kv("input-map", map_text(&phi_bar));

    match lift_translation(&structure, &phi_bar, k) {
        Ok(LiftOutcome::Lifted { map, correction }) => {
            report.section("lift");
            report.kv("lifted", true);
            report.kv("map", map_text(&map));
            let correction_text = correction
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",");
            report.kv("correction", correction_text);
            // Verification transcript.
            let is_translation = is_k_translation(space, &map, k, TranslationTest::Auto);
            let down = pushforward(&structure.factor, &map);
            report.section("verification");
            report.kv(
                "is-k-translation",
                matches!(is_translation, Ok(true)),
            );
            let down_ok = matches!(&down, Ok(d) if d == &phi_bar);
            report.kv("pushforward-matches", down_ok);
            report.section("summary");
            if matches!(is_translation, Ok(true)) && down_ok {
                report.kv("status", "lifted");
                Ok((report, EXIT_OK))
            } else {
                report.kv("status", "fail");
                Ok((report, EXIT_CHECK_FAILURE))
            }
        }
        Ok(LiftOutcome::Obstructed { certificate }) => {
            report.section("lift");
            report.kv("lifted", false);
            report.kv("obstruction-modulus", certificate.modulus);
            report.kv("obstruction-gcd", certificate.gcd);
            report.kv("obstruction-rhs", certificate.combined_rhs);
            report.section("summary");
            report.kv("status", "obstructed");
            Ok((report, EXIT_CHECK_FAILURE))
        }
        Err(e) => {
            let code = emit_error(&mut report, &e);
            Ok((report, code))
        }
    }
}
