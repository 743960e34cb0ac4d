use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use qudit_coherence::analytics::{
    eta_classical, eta_closed_form, eta_df_for_target, resource_summary, threshold, threshold_for_basis,
    THRESHOLD_CONSISTENCY_TOL,
};
use qudit_coherence::channels::{
    compose_f, verify_transpose_identity, ChannelKind, ComposedNoise, KrausChannel, COMPLETENESS_TOL,
};
use qudit_coherence::io::{decode_matrix, read_channel, read_state, ChannelFile, CHANNEL_FILE_TOL};
use qudit_coherence::measurement::{check_povm_family, DENSE_POVM_MAX_DIM};
use qudit_coherence::montecarlo::{
    estimate_avg_efficiency, Ensemble, EstimatorConfig, PerturbationPolicy, DEFAULT_MAX_SAMPLES,
    DEFAULT_SEM_TARGET, SPOT_CHECK_TOL,
};
use qudit_coherence::states::{
    child_rng, engineer_phases, haar_vector, max_entangled, noisy_singlet, sample_haar_pure, sample_hs_mixed,
    sample_nonnegative_reference, Magnitudes, TargetState,
};
use qudit_coherence::teleport::{
    perfect_basis_check, teleport_brute, teleport_cjks, TeleportOutcome, BOB_STATE_TOL, BRUTE_MAX_DIM,
    PERFECT_BASIS_TOL,
};
use qudit_coherence::linalg::DENSITY_TOL;

use crate::output::{emit, render_document, Cell, Format, Meta, Table};
use crate::{
    ClassicalArgs, Cli, Command, Common, Engine, EnsembleArg, PerfectBasisArgs, PolicyArg, Preset, ResourcesArgs,
    RobustnessArgs, SweepArgs, TeleportArgs, ThresholdsArgs, ValidateArgs,
};

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A check failed; the report was still written.
    Failed,
}

/// Agreement required between the closed form and the simulated efficiency.
const SWEEP_TOL: f64 = 1e-9;
/// Noiseless engineered targets must reach unit efficiency within this.
const PERFECT_TELEPORT_TOL: f64 = 1e-9;
/// Every outcome probability must equal 1/d within this.
const PROBABILITY_TOL: f64 = 1e-10;
/// Sweeps above this dimension run grid points sequentially to bound memory.
const PARALLEL_SWEEP_MAX_DIM: usize = 8;

pub fn run(cli: &Cli) -> Result<Status> {
    let c = &cli.common;
    match &cli.command {
        Command::Validate(a) => validate(c, a),
        Command::Sweep(a) => sweep(c, a),
        Command::Robustness(a) => robustness(c, a),
        Command::Teleport(a) => teleport(c, a),
        Command::Thresholds(a) => thresholds(c, a),
        Command::Classical(a) => classical(c, a),
        Command::PerfectBasis(a) => perfect_basis(c, a),
        Command::Resources(a) => resources(c, a),
    }
}

fn write_table(c: &Common, meta: &Meta, table: &Table) -> Result<()> {
    emit(&table.render(meta, c.format), c.out.as_deref())
}

// ---------------------------------------------------------------- validate

struct Check {
    name: &'static str,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
    detail: String,
}

impl Check {
    fn deviation(name: &'static str, max_deviation: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            max_deviation,
            tolerance,
            // NaN deviations fail.
            passed: max_deviation <= tolerance,
            detail,
        }
    }
}

fn validate(c: &Common, a: &ValidateArgs) -> Result<Status> {
    ensure!(
        (2..=DENSE_POVM_MAX_DIM).contains(&a.d_max),
        "--d-max must lie in [2, {DENSE_POVM_MAX_DIM}], got {}",
        a.d_max
    );
    let dims: Vec<usize> = (2..=a.d_max).collect();
    let probs = [0.0, 0.1, 0.5, 0.9, 1.0];
    let mut checks = Vec::new();

    let povm: Vec<_> = dims
        .par_iter()
        .flat_map(|&d| (0..d).into_par_iter().map(move |x| check_povm_family(d, x)))
        .collect::<std::result::Result<_, _>>()?;
    let worst = povm.iter().map(|r| r.max_deviation()).fold(0.0, f64::max);
    let bijective = povm.iter().all(|r| r.bijective);
    let mut povm_check = Check::deviation(
        "povm_structure",
        worst,
        1e-10,
        format!("d=2..{} all x; index map bijective: {bijective}", a.d_max),
    );
    povm_check.passed &= bijective;
    checks.push(povm_check);

    let mut completeness = 0.0f64;
    let mut transpose = 0.0f64;
    for &d in &dims {
        for kind in ChannelKind::BUILTIN {
            for p in probs {
                let chan = kind.build(d, p)?;
                completeness = completeness.max(chan.completeness_deviation());
                transpose = transpose.max(verify_transpose_identity(&chan));
            }
        }
    }
    let grid = format!("AD/PF/DP/DF d=2..{} p in {{0 0.1 0.5 0.9 1}}", a.d_max);
    checks.push(Check::deviation("channel_completeness", completeness, COMPLETENESS_TOL, grid.clone()));
    checks.push(Check::deviation("transpose_identity", transpose, 1e-10, grid));

    let mut composed = 0.0f64;
    for &d in &dims {
        for kind in [ChannelKind::PhaseFlip, ChannelKind::Depolarizing, ChannelKind::DitFlip] {
            for p in [0.1, 0.9] {
                composed = composed.max(ComposedNoise::symmetric(&kind.build(d, p)?).completeness_deviation());
            }
        }
    }
    checks.push(Check::deviation(
        "composed_completeness",
        composed,
        COMPLETENESS_TOL,
        format!("unital PF/DP/DF d=2..{} p in {{0.1 0.9}}", a.d_max),
    ));

    let (engine_dev, prob_dev, runs) = engine_equivalence(c.seed, a.d_max.min(5))?;
    checks.push(Check::deviation(
        "engine_equivalence",
        engine_dev,
        BOB_STATE_TOL,
        format!("{runs} runs brute vs composite map"),
    ));
    checks.push(Check::deviation(
        "probability_law",
        prob_dev,
        PROBABILITY_TOL,
        format!("{runs} runs |p - 1/d|"),
    ));

    let mut perfect = 0.0f64;
    for &d in &dims {
        let mags = sample_nonnegative_reference(d, &mut child_rng(c.seed, d as u64))?;
        for x in 0..d {
            let target = engineer_phases(&mags, x)?;
            for y in 0..d {
                let eta = teleport_cjks(&target, None, x, y)?
                    .efficiency
                    .value()
                    .context("engineered target has no coherence")?;
                perfect = perfect.max((eta - 1.0).abs());
            }
        }
    }
    checks.push(Check::deviation(
        "perfect_teleportation",
        perfect,
        PERFECT_TELEPORT_TOL,
        format!("noiseless engineered targets d=2..{} all (x y)", a.d_max),
    ));

    let mut thr = 0.0f64;
    for d in 2..=32usize {
        for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseFlip, ChannelKind::Depolarizing] {
            if kind == ChannelKind::AmplitudeDamping && d < 3 {
                continue;
            }
            let t = threshold(kind, d)?;
            thr = thr.max((t.eta_at_threshold - t.classical_bound).abs());
        }
    }
    checks.push(Check::deviation(
        "threshold_consistency",
        thr,
        THRESHOLD_CONSISTENCY_TOL,
        "AD d=3..32 and PF/DP d=2..32: |eta(p_th) - 1/(d+1)|".into(),
    ));

    if let Some(path) = &a.channel_file {
        let chan = load_unchecked_channel(path)?;
        checks.push(Check::deviation(
            "channel_file_completeness",
            chan.completeness_deviation(),
            CHANNEL_FILE_TOL,
            format!("{} (d={})", path.display(), chan.dim()),
        ));
        checks.push(Check::deviation(
            "channel_file_transpose_identity",
            verify_transpose_identity(&chan),
            1e-10,
            format!("{} (d={})", path.display(), chan.dim()),
        ));
    }

    let mut table = Table::new(&["check", "max_deviation", "tolerance", "passed", "detail"]);
    for ch in &checks {
        table.push(vec![
            ch.name.into(),
            ch.max_deviation.into(),
            ch.tolerance.into(),
            ch.passed.into(),
            ch.detail.replace(',', ";").into(),
        ]);
    }
    let meta = Meta::new("validate", c.seed).with("d_max", a.d_max);
    write_table(c, &meta, &table)?;
    let failed: Vec<&str> = checks.iter().filter(|ch| !ch.passed).map(|ch| ch.name).collect();
    if failed.is_empty() {
        Ok(Status::Ok)
    } else {
        eprintln!("validation failed: {}", failed.join(", "));
        Ok(Status::Failed)
    }
}

/// Parses a channel file without enforcing completeness, so that the
/// deviation can be reported instead of aborting.
fn load_unchecked_channel(path: &Path) -> Result<KrausChannel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ChannelFile =
        serde_json::from_str(&text).with_context(|| format!("parsing channel file {}", path.display()))?;
    ensure!(file.d >= 2, "channel file field `d`: dimension {} is below 2", file.d);
    ensure!(!file.operators.is_empty(), "channel file field `operators`: no Kraus operators");
    let ops = file
        .operators
        .iter()
        .enumerate()
        .map(|(k, m)| decode_matrix(&format!("operators[{k}]"), file.d, m))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(KrausChannel::custom(file.d, ops, f64::INFINITY)?)
}

/// Brute vs composite-map Bob states over a fixed grid of asymmetric noise.
fn engine_equivalence(seed: u64, d_max: usize) -> Result<(f64, f64, usize)> {
    let mut cases = Vec::new();
    for d in 2..=d_max {
        for (ia, ka) in ChannelKind::BUILTIN.into_iter().enumerate() {
            let kb = ChannelKind::BUILTIN[(ia + 1) % 4];
            for p in [0.1, 0.9] {
                for (x, y) in [(0, 0), (1, 1)] {
                    cases.push((d, ka, kb, p, x, y));
                }
            }
        }
    }
    let results = cases
        .par_iter()
        .map(|&(d, ka, kb, p, x, y)| -> Result<(f64, f64)> {
            let a = ka.build(d, p)?;
            let b = kb.build(d, 1.0 - p)?;
            let mags = sample_nonnegative_reference(d, &mut child_rng(seed, (d * 100 + x) as u64))?;
            let target = engineer_phases(&mags, x)?;
            let pair = max_entangled(d)?.rho_ab;
            let brute = teleport_brute(&target, &pair, Some(&a), Some(&b), x, y)?;
            let fast = teleport_cjks(&target, Some(&compose_f(&b, &a)?), x, y)?;
            let dev = brute.bob_state.matrix().max_abs_diff(fast.bob_state.matrix());
            let inv_d = 1.0 / d as f64;
            let prob = (brute.probability - inv_d).abs().max((fast.probability - inv_d).abs());
            Ok((dev, prob))
        })
        .collect::<Result<Vec<_>>>()?;
    let dev = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let prob = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((dev, prob, results.len()))
}

// ------------------------------------------------------------------- sweep

struct SweepRow {
    d: usize,
    p: f64,
    analytic: f64,
    simulated: f64,
    classical: f64,
    p_threshold: Option<f64>,
}

fn sweep(c: &Common, a: &SweepArgs) -> Result<Status> {
    ensure!(!a.d.is_empty(), "no dimensions given");
    let grid: Vec<f64> = if a.p.is_empty() {
        ensure!(a.points >= 2, "--points must be at least 2, got {}", a.points);
        (0..a.points).map(|i| i as f64 / (a.points - 1) as f64).collect()
    } else {
        a.p.clone()
    };
    for &p in &grid {
        ensure!((0.0..=1.0).contains(&p), "noise strength {p} is outside [0, 1]");
    }

    let mut rows = Vec::new();
    for &d in &a.d {
        ensure!(d >= 2, "dimension {d} is below 2");
        ensure!(a.x < d && a.y < d, "x={} and y={} must be below d={d}", a.x, a.y);
        let p_th = match threshold_for_basis(a.noise, d, Some(a.x)) {
            Ok(t) if t.crosses_bound => Some(t.p_th),
            Ok(_) => None,
            Err(e) => {
                eprintln!("note: no threshold for {} at d={d}: {e}", a.noise);
                None
            }
        };
        let mut ps = grid.clone();
        if let Some(t) = p_th {
            if !ps.iter().any(|&p| (p - t).abs() < 1e-12) {
                ps.push(t);
            }
        }
        ps.sort_by(f64::total_cmp);
        let point = |p: f64| sweep_point(a, d, p, p_th);
        let mut batch: Vec<SweepRow> = if d <= PARALLEL_SWEEP_MAX_DIM {
            ps.par_iter().map(|&p| point(p)).collect::<Result<_>>()?
        } else {
            ps.iter().map(|&p| point(p)).collect::<Result<_>>()?
        };
        rows.append(&mut batch);
    }

    let mut table = Table::new(&["d", "p", "eta_analytic", "eta_simulated", "eta_classical", "p_threshold"]);
    let mut worst = 0.0f64;
    for r in &rows {
        worst = worst.max((r.analytic - r.simulated).abs());
        table.push(vec![
            r.d.into(),
            r.p.into(),
            r.analytic.into(),
            r.simulated.into(),
            r.classical.into(),
            r.p_threshold.into(),
        ]);
    }
    let meta = Meta::new("sweep", c.seed)
        .with("noise", a.noise)
        .with("x", a.x)
        .with("y", a.y)
        .num("tol_analytic_vs_simulated", SWEEP_TOL)
        .num("max_deviation", worst);
    write_table(c, &meta, &table)?;
    if worst > SWEEP_TOL || worst.is_nan() {
        eprintln!("sweep: closed form and simulation differ by {worst:e} (tolerance {SWEEP_TOL:e})");
        return Ok(Status::Failed);
    }
    Ok(Status::Ok)
}

fn sweep_point(a: &SweepArgs, d: usize, p: f64, p_threshold: Option<f64>) -> Result<SweepRow> {
    let mags = Magnitudes::uniform(d)?;
    let target = engineer_phases(&mags, a.x)?;
    let chan = a.noise.build(d, p)?;
    let noise = ComposedNoise::symmetric(&chan);
    let simulated = teleport_cjks(&target, Some(&noise), a.x, a.y)?
        .efficiency
        .value()
        .context("maximally coherent target reported no coherence")?;
    let analytic = match eta_closed_form(a.noise, d, p, Some(a.x)) {
        Ok(v) => v,
        // DF with gcd(x, d) > 1 depends on the target; use the target-weighted form.
        Err(_) if a.noise == ChannelKind::DitFlip => eta_df_for_target(&mags, p, a.x)?
            .value()
            .context("maximally coherent target reported no coherence")?,
        Err(e) => return Err(e.into()),
    };
    Ok(SweepRow {
        d,
        p,
        analytic,
        simulated,
        classical: eta_classical(d)?,
        p_threshold,
    })
}

// -------------------------------------------------------------- robustness

fn robustness(c: &Common, a: &RobustnessArgs) -> Result<Status> {
    ensure!(!a.d.is_empty() && !a.delta.is_empty(), "need at least one dimension and one delta");
    let sem_target = a
        .sem_target
        .unwrap_or(if a.fast { 1e-4 } else { DEFAULT_SEM_TARGET });
    let max_samples = a.max_samples.unwrap_or(DEFAULT_MAX_SAMPLES);
    let policy = match a.policy {
        PolicyArg::Keep => PerturbationPolicy::Keep,
        PolicyArg::Reject => PerturbationPolicy::Reject,
    };
    let ensembles: &[Ensemble] = match a.ensemble {
        EnsembleArg::PureHaar => &[Ensemble::PureHaar],
        EnsembleArg::MixedHs => &[Ensemble::MixedHs],
        EnsembleArg::Both => &[Ensemble::PureHaar, Ensemble::MixedHs],
    };

    let mut table = Table::new(&[
        "d",
        "delta_phi",
        "ensemble",
        "mean_eta",
        "sem",
        "samples",
        "converged",
        "non_positive",
        "rejected",
        "spot_checks",
        "max_spot_deviation",
    ]);
    let mut spot_failure = false;
    for &d in &a.d {
        for &delta in &a.delta {
            for &ensemble in ensembles {
                let mut cfg = EstimatorConfig::new(d, ensemble, delta, c.seed);
                cfg.sem_target = sem_target;
                cfg.max_samples = max_samples;
                cfg.policy = policy;
                cfg.sweep_outcomes = a.sweep_outcomes;
                let r = estimate_avg_efficiency(&cfg)?;
                if !r.converged {
                    eprintln!(
                        "warning: d={d} delta={delta} {ensemble} stopped at the sample cap with sem {:e}",
                        r.sem
                    );
                }
                spot_failure |= r.max_spot_deviation > SPOT_CHECK_TOL;
                table.push(vec![
                    d.into(),
                    delta.into(),
                    ensemble.label().into(),
                    r.mean_eta.into(),
                    r.sem.into(),
                    r.samples.into(),
                    r.converged.into(),
                    r.non_positive.into(),
                    r.rejected.into(),
                    r.spot_checks.into(),
                    r.max_spot_deviation.into(),
                ]);
            }
        }
    }
    let meta = Meta::new("robustness", c.seed)
        .num("sem_target", sem_target)
        .with("max_samples", max_samples)
        .with("policy", format!("{policy:?}").to_lowercase())
        .num("spot_check_tol", SPOT_CHECK_TOL);
    write_table(c, &meta, &table)?;
    if spot_failure {
        eprintln!("robustness: a spot check exceeded {SPOT_CHECK_TOL:e}");
        return Ok(Status::Failed);
    }
    Ok(Status::Ok)
}

// ---------------------------------------------------------------- teleport

fn teleport(c: &Common, a: &TeleportArgs) -> Result<Status> {
    let target = build_target(c.seed, a)?;
    let d = target.dim();
    ensure!(a.x < d && a.y < d, "x={} and y={} must be below d={d}", a.x, a.y);
    let (chan_a, chan_b) = build_noise(a, d)?;
    let composed = match (&chan_a, &chan_b) {
        (None, None) => None,
        (ca, cb) => {
            let id = KrausChannel::identity(d)?;
            Some(compose_f(cb.as_ref().unwrap_or(&id), ca.as_ref().unwrap_or(&id))?)
        }
    };
    let run_brute = || -> Result<TeleportOutcome> {
        if d > BRUTE_MAX_DIM {
            bail!("brute-force engine is limited to d <= {BRUTE_MAX_DIM} (got d={d}); use --engine cjks");
        }
        let pair = max_entangled(d)?.rho_ab;
        Ok(teleport_brute(&target, &pair, chan_a.as_ref(), chan_b.as_ref(), a.x, a.y)?)
    };
    let run_cjks = || -> Result<TeleportOutcome> { Ok(teleport_cjks(&target, composed.as_ref(), a.x, a.y)?) };

    let outcomes: Vec<(&str, TeleportOutcome)> = match a.engine {
        Engine::Brute => vec![("brute", run_brute()?)],
        Engine::Cjks => vec![("cjks", run_cjks()?)],
        Engine::Both => vec![("brute", run_brute()?), ("cjks", run_cjks()?)],
    };
    let deviation = (outcomes.len() == 2)
        .then(|| outcomes[0].1.bob_state.matrix().max_abs_diff(outcomes[1].1.bob_state.matrix()));

    let meta = Meta::new("teleport", c.seed)
        .with("d", d)
        .with("x", a.x)
        .with("y", a.y)
        .num("bob_state_tol", BOB_STATE_TOL);
    let text = match c.format {
        Format::Json => {
            let mut result = serde_json::Map::new();
            for (name, o) in &outcomes {
                result.insert(name.to_string(), serde_json::to_value(o.record())?);
            }
            if let Some(dev) = deviation {
                result.insert("max_deviation".into(), json!(dev));
            }
            render_document(&meta, serde_json::Value::Object(result))
        }
        Format::Csv => {
            let mut table = Table::new(&[
                "engine",
                "d",
                "x",
                "y",
                "probability",
                "coherence_in",
                "coherence_out",
                "efficiency",
                "max_deviation",
            ]);
            for (name, o) in &outcomes {
                table.push(vec![
                    (*name).into(),
                    o.d.into(),
                    o.x.into(),
                    o.y.into(),
                    o.probability.into(),
                    o.coherence_in.into(),
                    o.coherence_out.into(),
                    o.efficiency.value().map_or(Cell::from("undefined"), Cell::Float),
                    deviation.into(),
                ]);
            }
            table.render(&meta, Format::Csv)
        }
    };
    emit(&text, c.out.as_deref())?;
    match deviation {
        Some(dev) if !(dev <= BOB_STATE_TOL) => {
            eprintln!("teleport: engines disagree by {dev:e} (tolerance {BOB_STATE_TOL:e})");
            Ok(Status::Failed)
        }
        _ => Ok(Status::Ok),
    }
}

fn build_target(seed: u64, a: &TeleportArgs) -> Result<TargetState> {
    let mut rng = child_rng(seed, 0);
    let target = if let Some(path) = &a.state {
        let rho = read_state(path).with_context(|| format!("state file {}", path.display()))?;
        if let Some(d) = a.d {
            ensure!(d == rho.dim(), "--d {d} does not match the state file dimension {}", rho.dim());
        }
        TargetState::unphased(rho)
    } else {
        let preset = a.preset.context("either --preset or --state is required")?;
        let d = a.d.context("--d is required with --preset")?;
        ensure!(a.x < d, "x={} must be below d={d}", a.x);
        match preset {
            Preset::MaxCoherent => engineer_phases(&Magnitudes::uniform(d)?, a.x)?,
            Preset::Diagonal => {
                let pops: Vec<f64> = haar_vector(d, &mut rng)?.iter().map(|z| z.norm_sqr()).collect();
                engineer_phases(&Magnitudes::diagonal(&pops)?, a.x)?
            }
            Preset::RandomHaar => sample_haar_pure(d, &mut rng)?,
            Preset::RandomHs => sample_hs_mixed(d, &mut rng)?,
        }
    };
    if a.engineer {
        ensure!(a.x < target.dim(), "x={} must be below d={}", a.x, target.dim());
        let mags = Magnitudes::of(target.matrix());
        return engineer_phases(&mags, a.x)
            .context("the moduli of this state are not a valid density matrix, so it cannot be phase engineered");
    }
    Ok(target)
}

fn build_noise(a: &TeleportArgs, d: usize) -> Result<(Option<KrausChannel>, Option<KrausChannel>)> {
    if let Some(path) = &a.channel_file {
        let chan = read_channel(path).with_context(|| format!("channel file {}", path.display()))?;
        ensure!(chan.dim() == d, "channel file dimension {} does not match d={d}", chan.dim());
        return Ok((Some(chan.clone()), Some(chan)));
    }
    let side_a = a.noise.map(|k| k.build(d, a.p)).transpose()?;
    let side_b = match (a.noise_b, a.noise) {
        (Some(k), _) => Some(k.build(d, a.p_b.unwrap_or(a.p))?),
        (None, Some(k)) => Some(k.build(d, a.p_b.unwrap_or(a.p))?),
        (None, None) => {
            ensure!(a.p_b.is_none(), "--p-b needs --noise or --noise-b");
            None
        }
    };
    Ok((side_a, side_b))
}

// -------------------------------------------------- thresholds and friends

fn thresholds(c: &Common, a: &ThresholdsArgs) -> Result<Status> {
    let d_min = a
        .d_min
        .unwrap_or(if a.kind == ChannelKind::AmplitudeDamping { 3 } else { 2 });
    ensure!(d_min >= 2 && d_min <= a.d_max, "empty dimension range {d_min}..={}", a.d_max);
    let x = (a.kind == ChannelKind::DitFlip).then_some(a.x);
    let mut table = Table::new(&["d", "kind", "x", "p_th", "classical_bound", "eta_at_threshold", "crosses_bound"]);
    for d in d_min..=a.d_max {
        if let Some(x) = x {
            ensure!(x < d, "x={x} must be below d={d}");
        }
        let t = threshold_for_basis(a.kind, d, x).with_context(|| format!("{} threshold at d={d}", a.kind))?;
        table.push(vec![
            t.d.into(),
            t.kind.label().into(),
            t.x.map_or(Cell::Empty, Cell::from),
            t.p_th.into(),
            t.classical_bound.into(),
            t.eta_at_threshold.into(),
            t.crosses_bound.into(),
        ]);
    }
    let meta = Meta::new("thresholds", c.seed)
        .with("kind", a.kind)
        .num("consistency_tol", THRESHOLD_CONSISTENCY_TOL);
    write_table(c, &meta, &table)?;
    Ok(Status::Ok)
}

fn classical(c: &Common, a: &ClassicalArgs) -> Result<Status> {
    ensure!(
        (2..=BRUTE_MAX_DIM).contains(&a.d),
        "classical teleportation runs on the brute-force engine, limited to 2 <= d <= {BRUTE_MAX_DIM} (got d={})",
        a.d
    );
    let rs: Vec<f64> = if a.r.is_empty() {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    } else {
        a.r.clone()
    };
    let target = engineer_phases(&Magnitudes::uniform(a.d)?, 0)?;
    let mut table = Table::new(&["d", "r", "separable", "coherence_in", "coherence_out", "ratio"]);
    for r in rs {
        let pair = noisy_singlet(a.d, r)?;
        let out = teleport_brute(&target, &pair.rho_r, None, None, 0, 0)?;
        table.push(vec![
            a.d.into(),
            r.into(),
            pair.separable.into(),
            out.coherence_in.into(),
            out.coherence_out.into(),
            (out.coherence_out / out.coherence_in).into(),
        ]);
    }
    let meta = Meta::new("classical", c.seed)
        .with("target", "max-coherent")
        .num("density_tol", DENSITY_TOL);
    write_table(c, &meta, &table)?;
    Ok(Status::Ok)
}

fn perfect_basis(c: &Common, a: &PerfectBasisArgs) -> Result<Status> {
    let chan = a.noise.build(a.d, a.p)?;
    let noise = ComposedNoise::symmetric(&chan);
    let xs: Vec<usize> = match a.x {
        Some(x) => {
            ensure!(x < a.d, "x={x} must be below d={}", a.d);
            vec![x]
        }
        None => (0..a.d).collect(),
    };
    let mut table = Table::new(&["d", "kind", "p", "x", "holds", "max_deviation"]);
    for x in xs {
        let r = perfect_basis_check(&noise, x)?;
        table.push(vec![
            a.d.into(),
            a.noise.label().into(),
            a.p.into(),
            x.into(),
            r.holds.into(),
            r.max_deviation.into(),
        ]);
    }
    let meta = Meta::new("perfect-basis", c.seed).num("tol", PERFECT_BASIS_TOL);
    write_table(c, &meta, &table)?;
    Ok(Status::Ok)
}

fn resources(c: &Common, a: &ResourcesArgs) -> Result<Status> {
    ensure!(a.d_max >= 2, "--d-max must be at least 2");
    let mut table = Table::new(&["d", "outcomes_full_bell", "outcomes_grouped", "cbits_full_bell", "cbits_grouped"]);
    for d in 2..=a.d_max {
        let r = resource_summary(d)?;
        table.push(vec![
            r.d.into(),
            r.outcomes_standard.into(),
            r.outcomes_grouped.into(),
            r.cbits_standard.into(),
            (r.cbits_grouped as usize).into(),
        ]);
    }
    write_table(c, &Meta::new("resources", c.seed), &table)?;
    Ok(Status::Ok)
}
