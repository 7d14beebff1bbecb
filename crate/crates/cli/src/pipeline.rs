//! Orchestration of the checks for one validated configuration.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::binomial;
use padic_soliton::curve::{BasePoint, CurveModel, GapData};
use padic_soliton::grassmann::{Certification, GrassPoint, Integrality, IntegralityReport};
use padic_soliton::padic::{PadicElement, PadicField};
use padic_soliton::soliton::{
    artin_hasse_multi, certify_torsion_point, decompose_frobenius_curve, formal_log, solve_torsion_cyclic,
    solve_torsion_full, verify_pn_torsion, Component, FormalLog, FrobeniusDecomposition, PnContext, PnWindow,
    TorsionCertificate,
};
use rayon::prelude::*;

use crate::config::{CheckName, RunConfig};
use crate::report::*;
use crate::CliError;

fn ratio_str(r: num_rational::Ratio<i64>) -> String {
    r.to_string()
}

fn val_str(x: &PadicElement) -> Option<String> {
    x.valuation().map(ratio_str)
}

fn field_str(f: &PadicField) -> String {
    format!("Q_{} extension with e = {}, f = {}", f.p(), f.e(), f.f())
}

/// Runs the selected checks; the configuration must have its precision resolved.
pub fn run(config: &RunConfig, timings: bool) -> Result<Report, CliError> {
    let curve = config.validate()?;
    let mut pipeline = Pipeline { config, curve, log: None };
    let mut checks = Vec::new();
    let mut times = BTreeMap::new();
    for name in config.selected_checks() {
        let start = Instant::now();
        let report = pipeline.check(name);
        times.insert(name.as_str().to_string(), start.elapsed().as_millis() as u64);
        checks.push(report);
    }
    Ok(Report::new(config.clone(), checks, timings.then_some(times)))
}

type LogData = (Vec<FrobeniusDecomposition>, FormalLog);

struct Pipeline<'a> {
    config: &'a RunConfig,
    curve: CurveModel,
    log: Option<Result<LogData, String>>,
}

fn error_check(name: CheckName, message: String) -> CheckReport {
    CheckReport {
        name,
        status: Status::Fail,
        summary: message.clone(),
        details: CheckDetails::Error { message },
    }
}

impl Pipeline<'_> {
    fn check(&mut self, name: CheckName) -> CheckReport {
        let result = match name {
            CheckName::Gaps => self.gaps(),
            CheckName::HasseWitt => self.hasse_witt(),
            CheckName::FormalLog => self.formal_log(),
            CheckName::Torsion => self.torsion(),
            CheckName::Theta => self.theta(),
            CheckName::All => unreachable!("expanded by selected_checks"),
        };
        result.unwrap_or_else(|message| error_check(name, message))
    }

    fn gap_data(&self) -> Result<GapData, String> {
        self.curve.gap_data().map_err(|e| e.to_string())
    }

    fn point_over(&self, field: &PadicField, cap: i64, floor: i64) -> Result<(GrassPoint<PadicElement>, IntegralityReport), String> {
        let (a, _) = self.curve.affine_ring_in(field, cap, floor).map_err(|e| e.to_string())?;
        let report = self.curve.certify_strict_integrality(&a).map_err(|e| e.to_string())?;
        Ok((a, report))
    }

    fn remainder_floor(&self) -> i64 {
        let w = &self.config.window;
        w.pn.map_or(w.remainder_floor, |pn| w.remainder_floor.min(pn.lo - pn.hi))
    }

    fn log(&mut self) -> Result<&LogData, String> {
        if self.log.is_none() {
            let kmax = self.config.level + 1;
            let computed = decompose_frobenius_curve(&self.curve, kmax, self.remainder_floor())
                .and_then(|d| formal_log(&d).map(|l| (d, l)))
                .map_err(|e| e.to_string());
            self.log = Some(computed);
        }
        self.log.as_ref().unwrap().as_ref().map_err(|e| e.clone())
    }

    fn gaps(&mut self) -> Result<CheckReport, String> {
        let gd = self.gap_data()?;
        let red = self.curve.reduction_gap_data().map_err(|e| e.to_string())?;
        let w = self.config.window;
        let (a, report) = self.point_over(self.curve.field(), w.cap, w.floor)?;
        let genus = gd.genus();
        let backed = matches!(report.certification, Certification::TheoremBacked { .. });
        let certification = match &report.certification {
            Certification::TheoremBacked { reason } => format!("theorem-backed: {reason}"),
            Certification::CapChecked { cap } => format!("checked through degree {cap}"),
        };
        let ok = gd == red && report.class == Integrality::Strict && backed && a.index() == 1 - genus as i64;
        let details = GapsReport {
            gaps: gd.gaps.clone(),
            reduction_gaps: red.gaps.clone(),
            genus,
            maya_low: a.maya().low().iter().copied().collect(),
            maya_gaps: a.maya().gaps().iter().copied().collect(),
            index: a.index(),
            partition: a.partition().to_string(),
            integrality: format!("{:?}", report.class).to_lowercase(),
            certification,
        };
        Ok(CheckReport {
            name: CheckName::Gaps,
            status: if ok { Status::Pass } else { Status::Fail },
            summary: format!(
                "gaps {:?} (reduction {:?}), index {}, partition {}, {}",
                details.gaps, details.reduction_gaps, details.index, details.partition, details.integrality
            ),
            details: CheckDetails::Gaps(details),
        })
    }

    fn hasse_witt(&mut self) -> Result<CheckReport, String> {
        let hw = self.curve.hasse_witt().map_err(|e| e.to_string())?;
        let rule = hw.product_rule.iter().all(|(_, ok)| *ok);
        let status = if hw.ordinary && rule { Status::Pass } else { Status::Fail };
        Ok(CheckReport {
            name: CheckName::HasseWitt,
            status,
            summary: format!(
                "matrix {:?}, det {} mod {}, {}, product rule {}",
                hw.matrix,
                hw.determinant,
                hw.p,
                if hw.ordinary { "ordinary" } else { "not ordinary" },
                if rule { "holds" } else { "fails" }
            ),
            details: CheckDetails::HasseWitt(HasseWittReport {
                matrix: hw.matrix,
                determinant: hw.determinant,
                ordinary: hw.ordinary,
                product_rule: hw.product_rule,
            }),
        })
    }

    fn formal_log(&mut self) -> Result<CheckReport, String> {
        let p = self.config.p;
        let curve_cfg = self.config.curve.clone();
        let field = self.curve.field().clone();
        let (decomps, log) = self.log()?;
        let matrices: Vec<Vec<Vec<String>>> = (0..log.levels())
            .map(|k| {
                log.e(k)
                    .iter()
                    .map(|row| {
                        row.iter().map(|x| x.to_bigint_mod().map_or_else(|| x.render(), |b| b.to_string())).collect()
                    })
                    .collect()
            })
            .collect();
        let mut formula = Vec::new();
        for k in 1..log.levels() as u32 {
            if let Some((top, bottom)) = curve_cfg.log_formula(p, k) {
                let b = binomial(BigInt::from(top), BigInt::from(bottom));
                let expected = PadicElement::from_bigint(&field, &b);
                formula.push(FormulaCheck { k, top, bottom, matches: log.e(k as usize)[0][0].eq_at_precision(&expected) });
            }
        }
        let details = FormalLogReport {
            levels: log.levels(),
            mu: log.mu().to_vec(),
            matrices,
            diagonal: log.is_diagonal(),
            reconstruction_ok: decomps.iter().all(|d| d.reconstruction_holds()),
            integral: decomps.iter().all(|d| d.is_integral()),
            formula,
        };
        let formula_ok = details.formula.iter().all(|f| f.matches);
        let ok = details.reconstruction_ok && details.integral && formula_ok;
        let summary = format!(
            "{} levels, {}, {}{}",
            details.levels,
            if details.diagonal { "diagonal" } else { "not diagonal" },
            if details.reconstruction_ok && details.integral { "integral decompositions" } else { "decomposition check failed" },
            if details.formula.is_empty() {
                String::new()
            } else if formula_ok {
                ", binomial formula matches".to_string()
            } else {
                ", binomial formula mismatch".to_string()
            }
        );
        Ok(CheckReport {
            name: CheckName::FormalLog,
            status: if ok { Status::Pass } else { Status::Fail },
            summary,
            details: CheckDetails::FormalLog(details),
        })
    }

    fn torsion(&mut self) -> Result<CheckReport, String> {
        let p = self.config.p;
        let level = self.config.level;
        let max_f = self.config.max_unramified;
        let (_, log) = self.log()?;
        let g = log.genus();
        let mut cyclic = Vec::new();
        let mut skipped = Vec::new();
        let mut notes = Vec::new();
        let mut ok = true;
        if log.is_diagonal() {
            for s in 1..=level {
                match solve_torsion_cyclic(log, 0, s) {
                    Ok(t) => {
                        let counts = t
                            .valuation_counts()
                            .into_iter()
                            .map(|(v, c)| (v.map_or_else(|| "zero".to_string(), ratio_str), c))
                            .collect();
                        let r = CyclicReport {
                            component: 0,
                            level: s,
                            eisenstein: render_poly(&t.eisenstein),
                            extension_degree: (t.eisenstein.len() - 1) as u64,
                            roots: t.roots.len(),
                            valuation_counts: counts,
                            residuals_zero: t.residuals_zero(),
                            distinct: t.distinct(),
                            polygon_matches: t.polygon_matches(),
                        };
                        ok &= r.roots as u64 == p.pow(s) && r.residuals_zero && r.distinct && r.polygon_matches;
                        cyclic.push(r);
                    }
                    Err(e) => skipped.push(format!("cyclic level {s}: {e}")),
                }
            }
        } else {
            notes.push("the logarithm is not diagonal, so only the full solve applies".to_string());
        }
        let full = match solve_torsion_full(log, max_f) {
            Ok(t) => {
                let r = FullReport {
                    residue_degree: t.residue_degree,
                    ramification: render_poly_i64(&t.eisenstein),
                    points: t.points.len(),
                    last_coordinate_minimal: t.count_with_valuation(g - 1, num_rational::Ratio::new(1, p as i64 - 1)),
                    residuals_zero: t.residuals_zero(),
                    distinct: t.distinct(),
                };
                ok &= r.points as u64 == p.pow(g as u32) && r.residuals_zero && r.distinct;
                Some(r)
            }
            Err(e) => {
                skipped.push(format!("full solve: {e}"));
                None
            }
        };
        let status = if !ok {
            Status::Fail
        } else if !skipped.is_empty() {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        let mut parts: Vec<String> =
            cyclic.iter().map(|c| format!("T_({},1): {} roots", c.level, c.roots)).collect();
        if let Some(f) = &full {
            parts.push(format!("T_1: {} points over f = {}", f.points, f.residue_degree));
        }
        parts.extend(skipped.iter().map(|s| format!("skipped {s}")));
        parts.extend(notes.iter().cloned());
        Ok(CheckReport {
            name: CheckName::Torsion,
            status,
            summary: parts.join("; "),
            details: CheckDetails::Torsion(TorsionReport { cyclic, full, skipped, notes }),
        })
    }

    fn hypotheses(&self, report: &IntegralityReport, genus: usize) -> Vec<String> {
        let mut out = Vec::new();
        if let Certification::TheoremBacked { reason } = &report.certification {
            out.push(format!("strict integrality: {reason}"));
        }
        if *self.curve.base_point() == BasePoint::Infinity {
            let d = self.curve.d() as usize;
            if d >= 2 * genus + 1 {
                out.push(format!("d = {d} ≥ 2g + 1 = {}", 2 * genus + 1));
            }
        }
        out
    }

    fn theta(&mut self) -> Result<CheckReport, String> {
        let cfg = self.config;
        let w = cfg.window;
        let gd = self.gap_data()?;
        let pn_ctx = match w.pn {
            Some(pn) => {
                let qp = self.curve.field().clone();
                let (a, _) = self.curve.affine_ring_in(&qp, pn.hi, pn.lo).map_err(|e| e.to_string())?;
                let (decomps, _) = self.log()?;
                Some(PnContext::new(a, gd.clone(), decomps.clone()).map_err(|e| e.to_string())?)
            }
            None => None,
        };
        let (_, log) = self.log()?;
        let log = log.clone();
        let mut jobs: Vec<(PadicField, u32, Component, Vec<PadicElement>)> = Vec::new();
        let mut skipped = Vec::new();
        if log.is_diagonal() {
            for s in 1..=cfg.level {
                match solve_torsion_cyclic(&log, 0, s) {
                    Ok(t) => {
                        for r in t.roots.iter().filter(|r| r.level == s || (s == 1 && r.level == 0)) {
                            jobs.push((t.field.clone(), s, Component::Index(0), vec![r.value.clone()]));
                        }
                    }
                    Err(e) => skipped.push(format!("level {s}: {e}")),
                }
            }
        } else {
            match solve_torsion_full(&log, cfg.max_unramified) {
                Ok(t) => {
                    for x in &t.points {
                        jobs.push((t.field.clone(), 1, Component::Full, x.clone()));
                    }
                }
                Err(e) => skipped.push(format!("full solve: {e}")),
            }
        }
        let mut points: Vec<(PadicField, GrassPoint<PadicElement>, IntegralityReport)> = Vec::new();
        for (field, ..) in &jobs {
            if !points.iter().any(|(f, ..)| f == field) {
                let (a, report) = self.point_over(field, w.cap, w.floor)?;
                points.push((field.clone(), a, report));
            }
        }
        let (_, base_report) = self.point_over(self.curve.field(), w.cap, w.floor)?;
        let hypotheses = self.hypotheses(&base_report, gd.genus());
        let results: Vec<Result<CertificateReport, String>> = jobs
            .par_iter()
            .map(|(field, level, component, pis)| {
                let (_, a, report) = points.iter().find(|(f, ..)| f == field).expect("point built above");
                let cert = certify_torsion_point(
                    a,
                    report,
                    &log,
                    *level,
                    component.clone(),
                    pis.clone(),
                    cfg.weight_cap,
                    w.top,
                    hypotheses.clone(),
                )
                .map_err(|e| e.to_string())?;
                let pn = match (&pn_ctx, w.pn) {
                    (Some(ctx), Some(win)) => Some(pn_report(ctx, &cert, PnWindow { lo: win.lo, hi: win.hi })?),
                    _ => None,
                };
                Ok(certificate_report(&cert, field, pn))
            })
            .collect();
        let mut certificates = Vec::new();
        for r in results {
            match r {
                Ok(c) => certificates.push(c),
                Err(e) => skipped.push(e),
            }
        }
        let count = |v: &str| certificates.iter().filter(|c| c.verdict == v).count();
        let (outside, member, inconclusive) = (count("outside-theta"), count("member-of-theta"), count("inconclusive"));
        let consistent = certificates.iter().all(|c| {
            let zero = c.valuations.iter().all(|v| v.is_none());
            let verdict_ok = if zero { c.verdict == "member-of-theta" } else { c.verdict != "member-of-theta" };
            verdict_ok && c.pn.as_ref().map_or(true, |p| p.passed)
        });
        let status = if !consistent {
            Status::Fail
        } else if inconclusive > 0 || !skipped.is_empty() || certificates.is_empty() {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        Ok(CheckReport {
            name: CheckName::Theta,
            status,
            summary: format!(
                "{outside} outside theta, {member} on theta (identity), {inconclusive} inconclusive{}",
                if skipped.is_empty() { String::new() } else { format!(", {} skipped", skipped.len()) }
            ),
            details: CheckDetails::Theta(ThetaReport { outside, member, inconclusive, certificates, skipped }),
        })
    }
}

fn pn_report(ctx: &PnContext, cert: &TorsionCertificate, window: PnWindow) -> Result<PnReport, String> {
    let h = artin_hasse_multi(&cert.pis, &cert.mu, 4).map_err(|e| e.to_string())?;
    let ev = verify_pn_torsion(ctx, &h, cert.level, window).map_err(|e| e.to_string())?;
    Ok(PnReport {
        level: ev.level,
        passed: ev.passed(),
        trivial: ev.trivial,
        norm_ok: ev.norm_ok,
        inequalities: ev.inequalities.len(),
        inequalities_ok: ev.inequalities_ok(),
        reconstruction_ok: ev.reconstruction_ok,
        a_parts_in_a: ev.a_parts_in_a,
        window: (window.lo, window.hi),
        certified_val: ev.certified_val.map(ratio_str),
        worst_val: ev.worst_val.map(ratio_str),
        window_ok: ev.window_ok,
    })
}

fn certificate_report(c: &TorsionCertificate, field: &PadicField, pn: Option<PnReport>) -> CertificateReport {
    let verdict = serde_json::to_value(c.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let case = serde_json::to_value(c.tau.case).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    CertificateReport {
        level: c.level,
        component: match c.component {
            Component::Index(i) => format!("{}", i + 1),
            Component::Full => "full".to_string(),
        },
        field: field_str(field),
        pis: c.pis.iter().map(|x| x.render()).collect(),
        mu: c.mu.clone(),
        valuations: c.valuations.iter().map(|v| v.map(ratio_str)).collect(),
        valuation_ok: c.valuation_ok,
        residual_valuations: c.residuals.iter().map(val_str).collect(),
        residual_zero: c.residual_zero,
        kappa: c.tau.kappa.to_string(),
        case,
        rho_val: c.tau.rho_val.map(ratio_str),
        s_kappa_val: c.tau.s_kappa_val.map(ratio_str),
        expected_val: c.tau.expected_val.map(ratio_str),
        exact: c.tau.exact,
        theorem_backed: c.tau.theorem_backed,
        window: WindowReport {
            rows: c.window.rows,
            first_column: c.window.first_column,
            last_column: c.window.last_column,
            det_val: c.window.det_val.map(ratio_str),
            error_val: c.window.error_val.map(ratio_str),
            full_rank: c.window.full_rank,
            exact_kernel: c.window.exact_kernel,
        },
        hypotheses: c.hypotheses.clone(),
        verdict,
        pn,
    }
}

fn render_terms(c: impl Iterator<Item = (usize, String)>) -> String {
    let mut terms: Vec<String> = c
        .filter(|(_, x)| x != "0")
        .map(|(j, x)| match j {
            0 => x,
            1 => format!("{x}*X"),
            _ => format!("{x}*X^{j}"),
        })
        .collect();
    terms.reverse();
    terms.join(" + ")
}

fn render_poly(c: &[BigInt]) -> String {
    render_terms(c.iter().map(|x| x.to_string()).enumerate())
}

fn render_poly_i64(c: &[i64]) -> String {
    render_terms(c.iter().map(|x| x.to_string()).enumerate())
}
