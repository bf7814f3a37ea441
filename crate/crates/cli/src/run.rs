//! Command dispatch: each command evaluates the resolved scenario and
//! returns an [`Artifact`].

use serde_json::json;
use spinlink::device::loss_balance_residual;
use spinlink::fidelity::TargetState;
use spinlink::montecarlo::simulate_rate;
use spinlink::rate::{
    error_probability_given_success, false_herald_weight, partition_diagnostic, repeaterless_bound, MaxAttempts,
    RateResult,
};
use spinlink::scenario::Scenario;
use spinlink::state::Outcome;
use spinlink::sweep::{run_sweep, sweep_rate_vs_loss, CellValue, SweepResult};

use crate::config::{Command, RunConfig, SweepConfig};
use crate::error::CliResult;
use crate::output::{Artifact, Field, Metadata, Table};

fn loss_db(eta_link: f64) -> f64 {
    -10.0 * eta_link.log10()
}

fn n_max_fields(n: MaxAttempts) -> (Field, Field) {
    let status = match n {
        MaxAttempts::Finite(_) => "finite",
        MaxAttempts::Capped(_) => "capped",
        MaxAttempts::Unbounded => "unbounded",
    };
    (n.get().into(), status.into())
}

pub fn run_command(config: &RunConfig, command: Command) -> CliResult<Artifact> {
    let scenario = config.scenario().resolve()?;
    match command {
        Command::Fidelity => fidelity(config, &scenario),
        Command::Rate => rate(config, &scenario),
        Command::Sweep => sweep(config, &scenario),
        Command::Montecarlo => montecarlo(config, &scenario),
        Command::Diagnose => diagnose(config, &scenario),
    }
}

fn fidelity(config: &RunConfig, s: &Scenario) -> CliResult<Artifact> {
    let report = s.fidelity()?;
    let mut table = Table::new(&[
        "f_avg",
        "f_phi1",
        "f_phi2",
        "f_phi3",
        "f_phi4",
        "herald_prob_h",
        "herald_prob_v",
        "fidelity_h",
        "fidelity_v",
    ]);
    let mut row: Vec<Field> = vec![report.f_avg.into()];
    for target in TargetState::ALL {
        row.push(report.input(target).map(|i| i.fidelity).into());
    }
    row.extend(report.per_outcome.iter().map(|o| Field::from(o.herald_prob)));
    row.extend(report.per_outcome.iter().map(|o| Field::from(o.fidelity)));
    table.push(row);
    Ok(Artifact {
        metadata: Metadata::new("fidelity", config, None),
        table,
        result: serde_json::to_value(&report).expect("report serializes"),
    })
}

const RATE_COLUMNS: [&str; 16] = [
    "loss_db",
    "eta_link",
    "f_target",
    "f0",
    "p_det",
    "p_lost",
    "p_e",
    "n_max",
    "n_max_status",
    "p_error",
    "p_success",
    "t_failures",
    "t_success",
    "rate",
    "regime",
    "bound",
];

fn rate_row(s: &Scenario, r: &RateResult, bound: f64) -> Vec<Field> {
    let (n, status) = n_max_fields(r.n_max);
    vec![
        loss_db(s.link.eta_link).into(),
        s.link.eta_link.into(),
        s.rate.f_target.into(),
        r.f0.into(),
        r.probs.p_det.into(),
        r.probs.p_lost.into(),
        r.probs.p_e.into(),
        n,
        status,
        r.p_error.into(),
        r.p_success.into(),
        r.t_failures.into(),
        r.t_success.into(),
        r.rate.into(),
        u64::from(r.regime.number()).into(),
        bound.into(),
    ]
}

fn rate(config: &RunConfig, s: &Scenario) -> CliResult<Artifact> {
    let r = s.rate()?;
    let bound = repeaterless_bound(s.link.eta_link, &s.timing);
    let mut table = Table::new(&RATE_COLUMNS);
    table.push(rate_row(s, &r, bound));
    Ok(Artifact { metadata: Metadata::new("rate", config, None), table, result: json!({ "rate": r, "bound": bound }) })
}

fn grid_table(result: &SweepResult) -> Table {
    let mut columns: Vec<&str> = result.axes.iter().map(|a| a.param.name()).collect();
    columns.push(result.quantity.name());
    columns.push("status");
    let mut table = Table::new(&columns);
    for (index, cell) in result.cells.iter().enumerate() {
        let coords = result.coords_of(index);
        let mut row: Vec<Field> = coords.iter().zip(&result.axes).map(|(&i, a)| a.values[i].into()).collect();
        match cell {
            CellValue::Value(v) => row.extend([Field::Num(*v), "ok".into()]),
            CellValue::Unbounded => row.extend([Field::Empty, "unbounded".into()]),
            CellValue::Infeasible(reason) => row.extend([Field::Empty, reason.as_str().into()]),
        }
        table.push(row);
    }
    table
}

fn sweep(config: &RunConfig, s: &Scenario) -> CliResult<Artifact> {
    match &config.sweep {
        SweepConfig::Grid { spec } => {
            let result = run_sweep(s, spec)?;
            Ok(Artifact {
                metadata: Metadata::new("sweep", config, None),
                table: grid_table(&result),
                result: serde_json::to_value(&result).expect("sweep serializes"),
            })
        }
        SweepConfig::RateVsLoss { loss, constraints, monte_carlo } => {
            let mc = monte_carlo.then_some(&config.monte_carlo);
            let curves = sweep_rate_vs_loss(s, loss, constraints, mc)?;
            let mut table = Table::new(&[
                "f_target",
                "loss_db",
                "eta_link",
                "n_max",
                "n_max_status",
                "p_error",
                "rate",
                "regime",
                "bound",
                "mc_rate",
                "mc_std_error",
                "mc_error_fraction",
                "mc_error_fraction_std_error",
                "mc_seed",
                "status",
            ]);
            for curve in &curves {
                for p in &curve.points {
                    let (n, n_status) = match &p.analytic {
                        Some(r) => n_max_fields(r.n_max),
                        None => (Field::Empty, Field::Empty),
                    };
                    let a = p.analytic.as_ref();
                    let m = p.monte_carlo.as_ref();
                    table.push(vec![
                        curve.f_target.into(),
                        p.loss_db.into(),
                        p.eta_link.into(),
                        n,
                        n_status,
                        a.map(|r| r.p_error).into(),
                        a.map(|r| r.rate).into(),
                        a.map(|r| u64::from(r.regime.number())).into(),
                        p.bound.into(),
                        m.map(|e| e.mean_rate).into(),
                        m.map(|e| e.std_error).into(),
                        m.map(|e| e.error_fraction).into(),
                        m.map(|e| e.error_fraction_std_error).into(),
                        p.mc_seed.into(),
                        p.status.clone().unwrap_or_else(|| "ok".into()).into(),
                    ]);
                }
            }
            let seed = monte_carlo.then_some(config.monte_carlo.seed);
            Ok(Artifact {
                metadata: Metadata::new("sweep", config, seed),
                table,
                result: serde_json::to_value(&curves).expect("curves serialize"),
            })
        }
    }
}

fn montecarlo(config: &RunConfig, s: &Scenario) -> CliResult<Artifact> {
    let r = s.rate()?;
    let cfg = &config.monte_carlo;
    let est = simulate_rate(&r.probs, r.n_max, &s.timing, cfg)?;
    let analytic_errors = match r.n_max.get() {
        Some(n) => error_probability_given_success(n, &r.probs)?,
        None => 0.0,
    };
    let mut table = Table::new(&[
        "loss_db",
        "f_target",
        "n_max",
        "trials",
        "seed",
        "mean_rate",
        "std_error",
        "error_fraction",
        "error_fraction_std_error",
        "mean_elapsed",
        "mean_attempts",
        "analytic_rate",
        "analytic_error_fraction",
    ]);
    table.push(vec![
        loss_db(s.link.eta_link).into(),
        s.rate.f_target.into(),
        r.n_max.get().into(),
        est.trials.into(),
        cfg.seed.into(),
        est.mean_rate.into(),
        est.std_error.into(),
        est.error_fraction.into(),
        est.error_fraction_std_error.into(),
        est.mean_elapsed.into(),
        est.mean_attempts.into(),
        r.rate.into(),
        analytic_errors.into(),
    ]);
    Ok(Artifact {
        metadata: Metadata::new("montecarlo", config, Some(cfg.seed)),
        table,
        result: json!({ "monte_carlo": est, "analytic": r, "analytic_error_fraction": analytic_errors }),
    })
}

fn diagnose(config: &RunConfig, s: &Scenario) -> CliResult<Artifact> {
    let eff = s.effective_reflections()?;
    let pdr = s.pdr_params()?;
    let link = s.link_params()?;
    let partition = partition_diagnostic(&pdr, &s.polarizer, &link)?;
    let model_r_cav_v = s.cavity_params()?.mean_v_reflectivity()?;
    let report = s.fidelity()?;

    let mut items: Vec<(String, f64)> = vec![("loss_balance_residual".into(), loss_balance_residual(&eff))];
    for (name, r) in eff.as_array() {
        items.push((format!("{name}_re"), r.re));
        items.push((format!("{name}_im"), r.im));
        items.push((format!("{name}_abs"), r.norm()));
    }
    items.extend([
        ("r_cav_v_model".into(), model_r_cav_v),
        ("r_cav_v_used".into(), link.r_cav_v_avg),
        ("p_e_canonical".into(), partition.canonical_p_e),
        ("p_e_explicit".into(), partition.explicit_p_e),
        ("p_e_gap".into(), partition.gap),
        ("false_herald_weight".into(), false_herald_weight(&pdr, &s.polarizer, &link)),
        ("f0".into(), report.f_avg),
    ]);
    for (o, summary) in Outcome::ALL.iter().zip(&report.per_outcome) {
        items.push((format!("herald_prob_{}", o.label().to_lowercase()), summary.herald_prob));
    }

    let mut table = Table::new(&["quantity", "value"]);
    for (name, value) in &items {
        table.push(vec![name.as_str().into(), (*value).into()]);
    }
    let result = serde_json::Value::Object(items.into_iter().map(|(k, v)| (k, json!(v))).collect());
    Ok(Artifact { metadata: Metadata::new("diagnose", config, None), table, result })
}
