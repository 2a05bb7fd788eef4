//! Scenario execution: compose the library calls for one experiment and
//! persist plot-ready CSV / JSON-lines artifacts plus the run manifest.

use std::collections::BTreeMap;
use std::path::PathBuf;

use neelgen_core::{
    arrival_times, axis_diagnostics, branch_pair, decoherence_kernel_grid, decompose_onto_trs,
    exact_green, half_max_front, magnon_dispersion, measure_sx, run_cascade_ensemble, site_bloch,
    write_state_file, AxisDiagnostics, Component, EigenPropagator, Hamiltonian, LatticeSpec,
    Outcome, StateVector, TrajectoryStep,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ScenarioKind};
use crate::error::{runtime, CliError};
use crate::output::{f, Artifacts};

/// Run the configured scenario; returns the artifact directory and the
/// checksum map recorded in the manifest.
pub fn execute(
    cfg: &ExperimentConfig,
    kind: ScenarioKind,
) -> Result<(PathBuf, BTreeMap<String, String>), CliError> {
    let lat = cfg.build_lattice()?;
    let mut arts = Artifacts::create(&cfg.out_dir())?;
    arts.write_json("lattice.json", &lat.summary())?;
    match kind {
        ScenarioKind::Dispersion => run_dispersion(&lat, &mut arts)?,
        ScenarioKind::SingleMeasurement => run_single_measurement(cfg, &lat, &mut arts)?,
        ScenarioKind::Cascade => run_cascade_scenario(cfg, &lat, &mut arts)?,
        ScenarioKind::CorrelatorScan => run_correlator_scan(cfg, &lat, &mut arts)?,
        ScenarioKind::DecoherenceWave => run_decoherence_wave(cfg, &lat, &mut arts)?,
    }
    let dir = arts.dir().to_path_buf();
    let outputs = arts.finish(kind.name(), &cfg.hash(), cfg.run.seed, lat.summary())?;
    Ok((dir, outputs))
}

fn component_of(c: char) -> Component {
    match c {
        'p' => Component::Plus,
        'm' => Component::Minus,
        'x' => Component::X,
        'y' => Component::Y,
        'z' => Component::Z,
        _ => unreachable!("component letters are validated at config load"),
    }
}

fn q_headers(dims: usize) -> Vec<String> {
    (1..=dims).map(|d| format!("q{d}")).collect()
}

fn axis_json(d: &AxisDiagnostics) -> serde_json::Value {
    serde_json::json!({
        "k_pm": d.k_pm,
        "k_mm_re": d.k_mm.re,
        "k_mm_im": d.k_mm.im,
        "ratio": d.ratio,
        "angle": d.angle,
    })
}

fn bloch_csv(
    arts: &mut Artifacts,
    name: &str,
    lat: &LatticeSpec,
    state: &StateVector,
) -> Result<(), CliError> {
    let dims = lat.linear_sizes.len();
    let mut header = vec!["site".to_string()];
    header.extend((1..=dims).map(|d| format!("r{d}")));
    header.extend(["bx", "by", "bz"].map(String::from));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(lat.n_sites);
    for j in 0..lat.n_sites {
        let b = site_bloch(state, j).map_err(runtime)?;
        let mut row = vec![j.to_string()];
        row.extend(lat.positions[j].iter().map(|c| c.to_string()));
        row.extend(b.iter().map(|&x| f(x)));
        rows.push(row);
    }
    arts.write_csv(name, &header_refs, rows)
}

fn run_dispersion(lat: &LatticeSpec, arts: &mut Artifacts) -> Result<(), CliError> {
    let omega = magnon_dispersion(lat).map_err(runtime)?;
    let mut header = q_headers(lat.linear_sizes.len());
    header.push("omega".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..lat.n_sites).map(|iq| {
        let mut row: Vec<String> = lat.momentum_radians(iq).iter().map(|&q| f(q)).collect();
        row.push(f(omega[iq]));
        row
    });
    arts.write_csv("dispersion.csv", &header_refs, rows)
}

fn run_single_measurement(
    cfg: &ExperimentConfig,
    lat: &LatticeSpec,
    arts: &mut Artifacts,
) -> Result<(), CliError> {
    let state = cfg.build_state(lat)?;
    let site = cfg.scenario.site;
    let pair = branch_pair(&state, site).map_err(runtime)?;
    let outcome = match cfg.scenario.outcome.as_deref() {
        Some("plus") => Outcome::Plus,
        Some("minus") => Outcome::Minus,
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed()?);
            measure_sx(&state, site, &mut rng).map_err(runtime)?.outcome
        }
    };
    let branch = pair.branch(outcome);
    let collapsed = branch.normalized().map_err(runtime)?;

    // Staggered-family decomposition of the raw (unnormalized) branch, so
    // the central coefficient sits at 1/2 and the adjacent ones at alpha/2.
    let dec = decompose_onto_trs(branch, lat).map_err(runtime)?;
    let rows = dec.coefficients.iter().map(|(&m, c)| {
        vec![m.to_string(), f(c.re), f(c.im), f(c.norm())]
    });
    arts.write_csv("decomposition.csv", &["m", "re", "im", "abs"], rows)?;

    arts.write_json(
        "measurement.json",
        &serde_json::json!({
            "site": site,
            "outcome": outcome.sign() as i8,
            "p_plus": pair.p_plus,
            "p_minus": pair.p_minus,
            "prob": pair.probability(outcome),
            "branch_norm_sq": dec.total_norm_sq,
            "coherent_norm_sq": dec.coherent_norm_sq(),
            "incoherent_norm_sq": dec.incoherent_norm_sq,
        }),
    )?;

    bloch_csv(arts, "bloch_pre.csv", lat, &state)?;
    bloch_csv(arts, "bloch_post.csv", lat, &collapsed)?;

    let pre = axis_diagnostics(&state, lat).map_err(runtime)?;
    let post = axis_diagnostics(&collapsed, lat).map_err(runtime)?;
    arts.write_json(
        "axis.json",
        &serde_json::json!({ "pre": axis_json(&pre), "post": axis_json(&post) }),
    )?;

    let meta = serde_json::json!({
        "lattice_hash": lat.hash(),
        "state": serde_json::to_value(&cfg.state).map_err(runtime)?,
        "measurement": { "site": site, "outcome": outcome.sign() as i8 },
    });
    write_state_file(&collapsed, &arts.path("state_post.bin"), &meta).map_err(runtime)?;
    arts.record_existing("state_post.bin")?;
    arts.record_existing("state_post.bin.json")?;
    Ok(())
}

fn step_row(s: &TrajectoryStep) -> Vec<String> {
    vec![
        s.step.to_string(),
        s.site.to_string(),
        s.outcome.to_string(),
        f(s.prob),
        f(s.sz_mean),
        f(s.sz_std),
        f(s.staggered_x),
        f(s.axis_anisotropy),
    ]
}

const STEP_COLS: [&str; 8] = [
    "step",
    "site",
    "outcome",
    "prob",
    "sz_mean",
    "sz_std",
    "staggered_x",
    "axis_anisotropy",
];

fn run_cascade_scenario(
    cfg: &ExperimentConfig,
    lat: &LatticeSpec,
    arts: &mut Artifacts,
) -> Result<(), CliError> {
    let state = cfg.build_state(lat)?;
    let steps = cfg.scenario.steps.expect("validated");
    let n_traj = cfg.scenario.trajectories.unwrap_or(1);
    let schedule = cfg.schedule()?;
    let seed = cfg.seed()?;
    let trajs =
        run_cascade_ensemble(lat, &state, &schedule, steps, n_traj, seed).map_err(runtime)?;

    arts.write_jsonl("trajectory.jsonl", &trajs[0])?;
    arts.write_csv("trajectory.csv", &STEP_COLS, trajs[0].iter().map(step_row))?;

    let mut header = vec!["trajectory"];
    header.extend(STEP_COLS);
    let rows = trajs.iter().enumerate().flat_map(|(k, t)| {
        t.iter().map(move |s| {
            let mut row = vec![k.to_string()];
            row.extend(step_row(s));
            row
        })
    });
    arts.write_csv("ensemble.csv", &header, rows)?;

    // Plot-ready cross-trajectory means at each step.
    let mean_rows = (0..steps).map(|i| {
        let inv = 1.0 / n_traj as f64;
        let (mut std_acc, mut stag_acc, mut axis_acc) = (0.0, 0.0, 0.0);
        for t in &trajs {
            std_acc += t[i].sz_std;
            stag_acc += t[i].staggered_x.abs();
            axis_acc += t[i].axis_anisotropy;
        }
        vec![
            (i + 1).to_string(),
            f(std_acc * inv),
            f(stag_acc * inv),
            f(axis_acc * inv),
        ]
    });
    arts.write_csv(
        "ensemble_mean.csv",
        &["step", "mean_sz_std", "mean_abs_staggered_x", "mean_axis_anisotropy"],
        mean_rows,
    )
}

fn run_correlator_scan(
    cfg: &ExperimentConfig,
    lat: &LatticeSpec,
    arts: &mut Artifacts,
) -> Result<(), CliError> {
    let state = cfg.build_state(lat)?;
    let pairs = cfg.component_pairs()?;
    let mut header = q_headers(lat.linear_sizes.len());
    header.extend(["alpha", "beta", "re", "im"].map(String::from));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(pairs.len() * lat.n_sites);
    for &(a, b) in &pairs {
        for iq in 0..lat.n_sites {
            let k = neelgen_core::correlator(
                &state,
                lat,
                component_of(a),
                component_of(b),
                &lat.momenta[iq],
            )
            .map_err(runtime)?;
            let mut row: Vec<String> = lat.momentum_radians(iq).iter().map(|&q| f(q)).collect();
            row.extend([a.to_string(), b.to_string(), f(k.re), f(k.im)]);
            rows.push(row);
        }
    }
    arts.write_csv("correlators.csv", &header_refs, rows)?;
    bloch_csv(arts, "bloch.csv", lat, &state)?;
    let axis = axis_diagnostics(&state, lat).map_err(runtime)?;
    arts.write_json("axis.json", &axis_json(&axis))
}

fn wave_csv(
    arts: &mut Artifacts,
    name: &str,
    r_of: &[usize],
    times: &[f64],
    field: &[Vec<num_complex::Complex64>],
) -> Result<(), CliError> {
    let rows = times.iter().enumerate().flat_map(|(ti, &t)| {
        let field = &field[ti];
        r_of.iter().enumerate().map(move |(col, &r)| {
            let g = field[col];
            vec![r.to_string(), f(t), f(g.re), f(g.im), f(g.norm())]
        })
    });
    arts.write_csv(name, &["r", "t", "re", "im", "abs"], rows)
}

fn run_decoherence_wave(
    cfg: &ExperimentConfig,
    lat: &LatticeSpec,
    arts: &mut Artifacts,
) -> Result<(), CliError> {
    let mode = cfg.wave_mode()?;
    let mut times = cfg.scenario.times.clone().expect("validated");
    times.sort_by(f64::total_cmp);
    let n = lat.n_sites;

    if mode.analytic() {
        let kernel = decoherence_kernel_grid(lat, &times).map_err(runtime)?;
        let sites: Vec<usize> = (0..n).collect();
        wave_csv(arts, "wave_analytic.csv", &sites, &times, &kernel)?;
        if lat.linear_sizes.len() == 1 {
            // Outermost half-maximum radius of |G| per snapshot.
            let rows = times.iter().enumerate().map(|(ti, &t)| {
                let profile: Vec<f64> = kernel[ti].iter().map(|g| g.norm()).collect();
                vec![f(t), half_max_front(&profile).to_string()]
            });
            arts.write_csv("front_analytic.csv", &["t", "front_r"], rows)?;
        }
    }

    if mode.exact() {
        let state = cfg.build_state(lat)?;
        let source = cfg.scenario.source.unwrap_or(0);
        let delta_z = cfg.scenario.delta_z.unwrap_or(1.0);
        let h = Hamiltonian::new(lat, delta_z);
        let prop = EigenPropagator::new(&h).map_err(runtime)?;
        let dists: Vec<usize> = (1..=n / 2).collect();
        let probes: Vec<usize> = dists.iter().map(|d| (source + d) % n).collect();
        let green = exact_green(&prop, &state, source, &probes, &times).map_err(runtime)?;
        wave_csv(arts, "wave_exact.csv", &dists, &times, &green)?;
        let t_max = times.iter().cloned().fold(0.0f64, f64::max);
        let arrivals = arrival_times(&green, &times, t_max);
        let rows = dists
            .iter()
            .zip(&arrivals)
            .map(|(&d, &t)| vec![d.to_string(), f(t)]);
        arts.write_csv("arrivals_exact.csv", &["r", "t_arrival"], rows)?;
    }
    Ok(())
}
