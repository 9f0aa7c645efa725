//! One function per subcommand; each fills a [`Report`].

use alchemy_core::{
    bowen_log_partition, conditional_unstable_measure_with, enumerate, equilibrium_state,
    gibbs_ratio_report, higher_block_recode, variational_score,
    BigRational, FiberConstraint, JobOptions, LocallyConstantPotential, MarkovChain,
    Normalization, PastWord, Query, Scalar, ShiftSpace, SquareMatrix, TransformJob,
    TwoSidedCylinder, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Arith, Experiment};
use crate::error::CliError;
use crate::report::{Render, Report, Row};

fn label(ix: usize) -> String {
    format!("A{ix}")
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Spectral pressure of every configured potential, with Bowen partition-sum estimates.
pub fn pressure(exp: &Experiment) -> Result<Report, CliError> {
    let mut report = Report::default();
    let ns: Vec<usize> = if exp.job.n.is_empty() {
        vec![10, 20, 40, 60]
    } else {
        exp.job.n.clone()
    };
    let mut pressures = serde_json::Map::new();
    for (name, g) in &exp.potentials {
        let state = equilibrium_state(g)?;
        let p = state.pressure();
        pressures.insert(
            name.clone(),
            json!({ "pressure": p, "entropy": state.entropy(), "mean_potential": state.mean_potential() }),
        );
        report.push(Row::value(None, format!("pressure[{name}]"), p.render()));
        let mut last_diff = None;
        for &n in &ns {
            let log_z = bowen_log_partition(g, n)?;
            let diff = bowen_log_partition(g, n + 1)? - log_z;
            report.push(Row::compared(Some(n), None, format!("bowen_mean[{name}]"), &(log_z / n as f64), &p));
            report.push(Row::compared(Some(n), None, format!("bowen_diff[{name}]"), &diff, &p));
            last_diff = Some((n, diff));
        }
        if let Some((n, diff)) = last_diff {
            report.check(
                format!("bowen_diff_matches[{name}]"),
                close(diff, p, 1e-8),
                format!("|Δ log Z_{n} - P| = {:e}", (diff - p).abs()),
            );
        }
        if let Some(&expected) = exp.expected_pressure.get(name) {
            report.check(
                format!("expected_pressure[{name}]"),
                close(p, expected, exp.tolerances.pressure),
                format!("P = {p}, expected {expected}"),
            );
        }
    }
    report.result("pressures", serde_json::Value::Object(pressures));
    Ok(report)
}

/// Gibbs ratios of the conditional measure of G1 on unstable Bowen balls.
pub fn gibbs(exp: &Experiment) -> Result<Report, CliError> {
    let g1 = exp.potential(&exp.job.g1, "g1")?;
    let past = exp.past()?;
    let n_max = *exp.n_values()?.last().unwrap();
    let fiber = conditional_unstable_measure_with(past, g1, exp.job.convention.clone())?;
    let depth = exp.job.gibbs_depth;
    let rep = gibbs_ratio_report(&fiber, g1, n_max, depth)?;
    let mut report = Report::default();
    for row in &rep.rows {
        if exp.job.n.contains(&row.n) {
            report.push(Row::value(Some(row.n), "gibbs_min", row.min.render()));
            report.push(Row::value(Some(row.n), "gibbs_max", row.max.render()));
        }
    }
    let from = exp.job.n[0].min(n_max);
    let spread = rep.spread_over(from..=n_max);
    report.result(
        "gibbs",
        json!({ "depth": depth, "constant": rep.constant(), "min_ratio": rep.min_ratio, "max_ratio": rep.max_ratio, "spread": spread }),
    );
    if exp.job.n.len() > 1 {
        report.check(
            "gibbs_ratio_stable",
            spread <= exp.tolerances.gibbs_spread,
            format!("relative spread over n in [{from}, {n_max}] = {spread:e}"),
        );
    }
    Ok(report)
}

fn job_options(exp: &Experiment) -> JobOptions {
    JobOptions {
        normalization: exp.job.normalization,
        convention: exp.job.convention.clone(),
        ..JobOptions::default()
    }
}

fn float_job(exp: &Experiment, g1: &LocallyConstantPotential, g2: &LocallyConstantPotential) -> Result<TransformJob<f64>, CliError> {
    Ok(TransformJob::new(g1, g2, exp.past()?, job_options(exp))?)
}

fn exact_job(exp: &Experiment, g1: &LocallyConstantPotential, g2: &LocallyConstantPotential) -> Result<TransformJob<BigRational>, CliError> {
    Ok(TransformJob::new_exact(g1, g2, exp.past()?, job_options(exp))?)
}

/// Conditional measure of G1 on the fiber: entry distribution and cylinder masses.
pub fn fiber(exp: &Experiment, arith: Arith) -> Result<Report, CliError> {
    let g1 = exp.potential(&exp.job.g1, "g1")?;
    match arith {
        Arith::Float => fiber_generic(exp, &float_job(exp, g1, g1)?),
        Arith::Exact => fiber_generic(exp, &exact_job(exp, g1, g1)?),
    }
}

fn fiber_generic<S: Scalar + Render>(exp: &Experiment, job: &TransformJob<S>) -> Result<Report, CliError> {
    let mut report = Report::default();
    // With G2 = G1 the density is 1, so λ_1 is the fiber measure itself.
    let lam = job.at(1)?;
    let entry = job.fiber().entry_distribution();
    for (s, p) in entry.iter().enumerate() {
        report.push(Row::value(None, format!("entry[{s}]"), p.render()));
    }
    let total = entry.iter().fold(S::zero(), |a, x| a + x.clone());
    report.check(
        "entry_distribution_sums_to_one",
        (total.to_f64() - 1.0).abs() <= exp.tolerances.probability,
        format!("sum = {}", total.render()),
    );
    for (ix, c) in exp.job.cylinders.iter().enumerate() {
        if c.start() < 0 {
            continue;
        }
        let mass = lam.lambda(&FiberConstraint::new(c.start() as usize, c.symbols().to_vec()));
        report.push(Row::value(None, format!("fiber_mass[{}]", label(ix)), mass.render()));
    }
    Ok(report)
}

fn expected_matches<S: Scalar + Render>(exp: &Experiment, value: &S, expected: &crate::config::ExpectValue) -> (bool, String) {
    match (S::EXACT, expected.exact()) {
        (true, Some(q)) => {
            let v = value.to_f64();
            let pass = value.render() == alchemy_core::render_rational(&q);
            (pass, format!("{} vs expected {} (exact, {v})", value.render(), alchemy_core::render_rational(&q)))
        }
        _ => {
            let v = value.to_f64();
            let e = expected.float();
            (close(v, e, exp.tolerances.probability.max(1e-12)), format!("{v} vs expected {e}"))
        }
    }
}

/// λ_n pushforwards, μ_n and the endpoint on each configured cylinder.
pub fn transform(exp: &Experiment, arith: Arith) -> Result<Report, CliError> {
    let g1 = exp.potential(&exp.job.g1, "g1")?;
    let g2 = exp.potential(&exp.job.g2, "g2")?;
    match arith {
        Arith::Float => transform_generic(exp, &float_job(exp, g1, g2)?, true),
        Arith::Exact => transform_generic(exp, &exact_job(exp, g1, g2)?, true),
    }
}

/// Only the unaveraged endpoint `σ^n_* λ_n`, next to `μ_n` for contrast.
pub fn endpoint(exp: &Experiment, arith: Arith) -> Result<Report, CliError> {
    let g1 = exp.potential(&exp.job.g1, "g1")?;
    let g2 = exp.potential(&exp.job.g2, "g2")?;
    match arith {
        Arith::Float => transform_generic(exp, &float_job(exp, g1, g2)?, false),
        Arith::Exact => transform_generic(exp, &exact_job(exp, g1, g2)?, false),
    }
}

/// `μ_{G2}(A)` in the job's arithmetic when available, otherwise the float value.
fn reference<S: Scalar>(job: &TransformJob<S>, c: &TwoSidedCylinder) -> Result<S, CliError> {
    match job.reference_measure(c) {
        Ok(v) => Ok(v),
        Err(_) => {
            let st = equilibrium_state(job.g2())?;
            let v = st.two_sided_measure(c);
            S::exp_weight(v.ln(), None)
                .ok_or_else(|| CliError::Core(alchemy_core::Error::ExactUnavailable("reference measure".into())))
        }
    }
}

fn transform_generic<S: Scalar + Render>(exp: &Experiment, job: &TransformJob<S>, full: bool) -> Result<Report, CliError> {
    let ns = exp.n_values()?;
    if exp.job.cylinders.is_empty() {
        return Err(CliError::Config("job.cylinders is required for this subcommand".into()));
    }
    let mut report = Report::default();
    let references: Vec<S> = exp
        .job
        .cylinders
        .iter()
        .map(|c| reference(job, c))
        .collect::<Result<_, _>>()?;
    let space = job.space().clone();
    let mut lambda_mass_ok = true;
    let mut mu_mass_ok = true;
    let mut normalization_ok = true;
    let other = job.with_normalization(match job.normalization() {
        Normalization::Raw => Normalization::PressureNormalized,
        Normalization::PressureNormalized => Normalization::Raw,
    });
    let tol = exp.tolerances.probability;
    let mass_ok = |total: &S| {
        if S::EXACT {
            *total == S::one()
        } else {
            (total.to_f64() - 1.0).abs() <= tol
        }
    };
    for &n in ns {
        let lam = job.at(n)?;
        if full {
            let z = lam.partition_sums(None);
            report.push(Row::value(Some(n), "log_z", z.log_z.render()));
            let total = space
                .words(2)
                .map(|w| lam.lambda(&FiberConstraint::new(0, w)))
                .fold(S::zero(), |a, x| a + x);
            lambda_mass_ok &= mass_ok(&total);
            let probe = FiberConstraint::new(0, space.words_after(job.past().last(), 1).next().unwrap());
            let a = lam.lambda(&probe);
            let b = other.at(n)?.lambda(&probe);
            normalization_ok &= if S::EXACT { a == b } else { (a.to_f64() - b.to_f64()).abs() <= tol };
        }
        for (ix, c) in exp.job.cylinders.iter().enumerate() {
            let reference = &references[ix];
            if full {
                if exp.job.pushforwards {
                    for i in 0..n {
                        let p = lam.pushforward(i, c);
                        report.push(Row::compared(Some(n), Some(i), format!("pushforward[{}]", label(ix)), &p, reference));
                    }
                }
                for want in exp.expected_values.iter().filter(|e| e.quantity == "pushforward" && e.n == n && e.cylinder == ix) {
                    let i = want.i.ok_or_else(|| CliError::Config("expected pushforward needs `i`".into()))?;
                    let (pass, detail) = expected_matches(exp, &lam.pushforward(i, c), want);
                    report.check(format!("expected_pushforward[{}][n={n},i={i}]", label(ix)), pass, detail);
                }
                let mu = lam.mu(c);
                report.push(Row::compared(Some(n), None, format!("mu_n[{}]", label(ix)), &mu, reference));
                for want in exp.expected_values.iter().filter(|e| e.quantity == "mu_n" && e.n == n && e.cylinder == ix) {
                    let (pass, detail) = expected_matches(exp, &mu, want);
                    report.check(format!("expected_mu_n[{}][n={n}]", label(ix)), pass, detail);
                }
                // μ_n over the partition by words at the same place sums to one.
                let total = space
                    .words(c.span())
                    .map(|w| lam.mu(&TwoSidedCylinder::new(&space, c.start(), w).expect("admissible")))
                    .fold(S::zero(), |a, x| a + x);
                mu_mass_ok &= mass_ok(&total);
            }
            if n > c.past_extent() + c.future_extent() {
                let e = lam.endpoint(c);
                report.push(Row::compared(Some(n), Some(n), format!("endpoint[{}]", label(ix)), &e, reference));
                for want in exp.expected_values.iter().filter(|e| e.quantity == "endpoint" && e.n == n && e.cylinder == ix) {
                    let (pass, detail) = expected_matches(exp, &e, want);
                    report.check(format!("expected_endpoint[{}][n={n}]", label(ix)), pass, detail);
                }
                if !full {
                    let mu = lam.mu(c);
                    report.push(Row::compared(Some(n), None, format!("mu_n[{}]", label(ix)), &mu, reference));
                }
            }
        }
    }
    if full {
        report.check("lambda_total_mass_is_one", lambda_mass_ok, "Σ_w λ_n([w]) over 2-words at the origin");
        report.check("mu_n_total_mass_is_one", mu_mass_ok, "Σ_w μ_n over each cylinder's partition");
        report.check("normalization_equivalence", normalization_ok, "λ_n agrees in raw and pressure-normalized modes");
    }
    let refs: serde_json::Map<String, serde_json::Value> = references
        .iter()
        .enumerate()
        .map(|(ix, r)| (label(ix), json!(r.render())))
        .collect();
    report.result("reference_measure", serde_json::Value::Object(refs));
    report.result(
        "pressures",
        json!({ "g1": job.pressure_g1(), "g2": job.pressure_g2() }),
    );
    Ok(report)
}

/// `(1/n) log Z_n` and `log Z_{n+1} - log Z_n` against `P(G2) - P(G1)`.
pub fn growth(exp: &Experiment, arith: Arith) -> Result<Report, CliError> {
    let g1 = exp.potential(&exp.job.g1, "g1")?;
    let g2 = exp.potential(&exp.job.g2, "g2")?;
    match arith {
        Arith::Float => growth_generic(exp, &float_job(exp, g1, g2)?),
        Arith::Exact => growth_generic(exp, &exact_job(exp, g1, g2)?),
    }
}

fn growth_generic<S: Scalar + Render>(exp: &Experiment, job: &TransformJob<S>) -> Result<Report, CliError> {
    let ns = exp.n_values()?;
    let raw = job.with_normalization(Normalization::Raw);
    let series = raw.growth_series(ns)?;
    let mut report = Report::default();
    for p in &series.points {
        if S::EXACT {
            let z = raw.partition_sum(p.n, None)?.z;
            report.push(Row::value(Some(p.n), "z", z.render()));
        }
        report.push(Row::compared(Some(p.n), None, "mean_log_z", &p.mean_log, &series.target));
        report.push(Row::compared(Some(p.n), None, "log_z_diff", &p.difference, &series.target));
    }
    let last = series.points.last().unwrap();
    let err = (last.difference - series.target).abs();
    report.check(
        "growth_matches_pressure_gap",
        err <= exp.tolerances.growth,
        format!("|Δ log Z_{} - (P2 - P1)| = {err:e}", last.n),
    );
    report.result("target", json!(series.target));
    Ok(report)
}

fn random_chain(space: &ShiftSpace, rng: &mut ChaCha8Rng) -> SquareMatrix<f64> {
    let k = space.k();
    let mut q = SquareMatrix::zeros(k);
    for i in 0..k {
        let row: Vec<(usize, f64)> = space.successors(i).map(|j| (j, rng.gen_range(0.01..1.0))).collect();
        let total: f64 = row.iter().map(|x| x.1).sum();
        for (j, v) in row {
            q.set(i, j, v / total);
        }
    }
    q
}

/// Seeded invariant battery on the configured space: pressure consistency, the variational
/// principle, Gibbs stability and contraction against enumeration.
pub fn audit(exp: &Experiment) -> Result<Report, CliError> {
    let space = &exp.space;
    space.require_primitive()?;
    let tol = &exp.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
    let mut report = Report::default();
    let window = Window::one_sided(2)?;
    let random_potential = |rng: &mut ChaCha8Rng| {
        let entries: Vec<_> = space.words(2).map(|w| (w, rng.gen_range(-0.3..0.3))).collect();
        LocallyConstantPotential::from_table(space, window, entries)
    };
    let past = match &exp.job.past {
        Some(p) => p.clone(),
        None => PastWord::new(space, space.words(1).next().unwrap())
            .or_else(|_| PastWord::new(space, vec![0]))?,
    };
    let count = 8;
    let (mut worst_pressure, mut worst_var, mut worst_eq, mut worst_gibbs, mut worst_oracle) =
        (0.0f64, f64::NEG_INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for t in 0..count {
        let g = random_potential(&mut rng)?;
        let state = equilibrium_state(&g)?;
        let p = state.pressure();
        let diff = bowen_log_partition(&g, 61)? - bowen_log_partition(&g, 60)?;
        worst_pressure = worst_pressure.max((diff - p).abs());
        report.push(Row::compared(Some(60), Some(t), "pressure_vs_bowen", &diff, &p));

        let blocks = higher_block_recode(space, state.recoding().block_len())?;
        for _ in 0..25 {
            let chain = MarkovChain::from_transitions(random_chain(blocks.space(), &mut rng), 1e-12)?;
            worst_var = worst_var.max(variational_score(&chain, &g)? - p);
        }
        let eq = MarkovChain::new(state.pi().to_vec(), state.q().clone(), 1e-12)?;
        let score = variational_score(&eq, &g)?;
        worst_eq = worst_eq.max((score - p).abs());
        report.push(Row::compared(None, Some(t), "equilibrium_score", &score, &p));

        let fiber = conditional_unstable_measure_with(&past, &g, Default::default())?;
        let spread = gibbs_ratio_report(&fiber, &g, 15, 2)?.spread_over(5..=15);
        worst_gibbs = worst_gibbs.max(spread);
        report.push(Row::value(Some(15), format!("gibbs_spread[{t}]"), spread.render()));

        let g1 = if t % 2 == 0 { LocallyConstantPotential::zero(space) } else { random_potential(&mut rng)? };
        let job = TransformJob::new(&g1, &g, &past, JobOptions::default())?;
        let cyl = TwoSidedCylinder::new(space, -1, space.words(2).last().unwrap())?;
        for n in [4, 8] {
            let queries: Vec<Query> = (0..=n).map(|i| Query::Pushforward { i, cylinder: cyl.clone() }).collect();
            let e = enumerate(&job, n, &queries)?;
            let lam = job.at(n)?;
            for i in 0..=n {
                let d = (lam.pushforward(i, &cyl) - e.lambda(i)).abs();
                worst_oracle = worst_oracle.max(d);
            }
            worst_oracle = worst_oracle.max((lam.z() - e.z).abs() / e.z.max(1.0));
        }
    }
    report.check("pressure_vs_bowen", worst_pressure <= 1e-8, format!("worst |Δ log Z_60 - P| = {worst_pressure:e}"));
    report.check("variational_upper_bound", worst_var <= tol.variational, format!("max(score - P) = {worst_var:e}"));
    report.check("equilibrium_attains_pressure", worst_eq <= tol.variational, format!("max |score - P| = {worst_eq:e}"));
    report.check("gibbs_ratio_stable", worst_gibbs <= tol.gibbs_spread, format!("worst spread = {worst_gibbs:e}"));
    report.check("contraction_matches_enumeration", worst_oracle <= tol.oracle, format!("worst deviation = {worst_oracle:e}"));
    report.result("potentials", json!(count));
    Ok(report)
}
