use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use gaugeset::channels::{apply_error_model, avg_gate_fidelity, clifford_gateset, clifford_group_1q, hadamard, phase_s};
use gaugeset::gateset::{
    amplitude_damping_ptm, apply_gauge, build_theta, circuit_probabilities, gauge_matrix_q, validate_gateset, GateSet,
    ValidationReport,
};
use gaugeset::metrics::diamond_distance;
use gaugeset::pl::Ptm;
use gaugeset::protocol::{estimate_mve_curve, CurveConfig, ErrorModelSpec, ExperimentSampler, Mode, Shots};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::output::{render_series, write_atomic, Row};
use crate::{Failure, ShotArgs};

pub fn shots_of(args: &ShotArgs) -> Shots {
    match args.shots {
        Some(k) => Shots::Count(k),
        None => Shots::Exact,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_gateset(path: &Path) -> anyhow::Result<GateSet> {
    GateSet::from_json(&read(path)?).with_context(|| format!("parsing gate-set {}", path.display()))
}

fn fig2_gateset() -> anyhow::Result<GateSet> {
    Ok(clifford_gateset(&clifford_group_1q())?)
}

fn require_valid(what: &str, gs: &GateSet) -> Result<(), Failure> {
    let report = validate_gateset(gs);
    if report.all_passed() {
        return Ok(());
    }
    Err(Failure::Validation(format!("{what} gate-set violates the canonical constraints:\n{report}")))
}

fn csv_bytes(points: &[gaugeset::metrics::MvePoint]) -> anyhow::Result<Vec<u8>> {
    render_series(&points.iter().map(Row::from).collect::<Vec<_>>())
}

pub struct FigureArgs {
    pub out: PathBuf,
    pub seed: u64,
    pub r: f64,
    pub circuits: usize,
    pub ms: Vec<usize>,
    pub small_ms: Vec<usize>,
    pub shots: Shots,
}

pub fn figure(args: &FigureArgs) -> Result<(), Failure> {
    let ideal = fig2_gateset()?;
    let depol = ErrorModelSpec::Depolarizing { r: args.r };
    let unitary = ErrorModelSpec::UnitaryZ { theta: None, r: Some(args.r) };
    let series: [(&str, &ErrorModelSpec, Mode, &[usize]); 6] = [
        ("depolarizing_identity.csv", &depol, Mode::SelfInverting, &args.ms),
        ("depolarizing_general.csv", &depol, Mode::Generic, &args.ms),
        ("unitary_identity.csv", &unitary, Mode::SelfInverting, &args.ms),
        ("unitary_general.csv", &unitary, Mode::Generic, &args.ms),
        ("shortunitary_identity.csv", &unitary, Mode::SelfInverting, &args.small_ms),
        ("shortunitary_general.csv", &unitary, Mode::Generic, &args.small_ms),
    ];
    // Compute everything before touching the filesystem.
    let mut outputs = Vec::with_capacity(series.len());
    for (name, model, mode, ms) in series {
        let noisy = apply_error_model(&ideal, &model.build()?)?;
        let cfg = CurveConfig {
            ms: ms.to_vec(),
            n_circuits: args.circuits,
            shots: args.shots,
            mode,
            seed: args.seed,
            error_model: Some(model.clone()),
        };
        let curve = estimate_mve_curve(&ideal, &noisy, &cfg)?;
        outputs.push((name, csv_bytes(&curve.points)?));
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for (name, bytes) in outputs {
        let path = args.out.join(name);
        write_atomic(&path, &bytes)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub struct EstimateArgs {
    pub config: PathBuf,
    pub ideal: Option<PathBuf>,
    pub noisy: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub ms: Option<Vec<usize>>,
    pub circuits: Option<usize>,
    pub shots: Option<Shots>,
    pub skip_validation: bool,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".provenance.json");
    out.with_file_name(name)
}

pub fn estimate(args: &EstimateArgs) -> Result<(), Failure> {
    let text = read(&args.config)?;
    let verbatim: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", args.config.display()))?;
    let mut cfg =
        CurveConfig::from_json(&text).with_context(|| format!("parsing config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(ms) = &args.ms {
        cfg.ms = ms.clone();
    }
    if let Some(n) = args.circuits {
        cfg.n_circuits = n;
    }
    if let Some(shots) = args.shots {
        cfg.shots = shots;
    }

    let ideal = match &args.ideal {
        Some(p) => read_gateset(p)?,
        None => fig2_gateset()?,
    };
    let noisy = match (&args.noisy, &cfg.error_model) {
        (Some(p), _) => read_gateset(p)?,
        (None, Some(spec)) => apply_error_model(&ideal, &spec.build()?)?,
        (None, None) => {
            return Err(anyhow!("config has no error_model and no --noisy gate-set was given").into());
        }
    };
    if !args.skip_validation {
        require_valid("ideal", &ideal)?;
        require_valid("noisy", &noisy)?;
    }

    let curve = estimate_mve_curve(&ideal, &noisy, &cfg)?;
    let provenance = json!({
        "config": verbatim,
        "effective_config": curve.config,
        "seed": curve.config.seed,
        "library_version": env!("CARGO_PKG_VERSION"),
        "ideal": args.ideal.as_ref().map(|p| p.display().to_string()),
        "noisy": args.noisy.as_ref().map(|p| p.display().to_string()),
        "points": curve.points,
    });
    let csv = csv_bytes(&curve.points)?;
    let sidecar = serde_json::to_vec_pretty(&provenance).map_err(anyhow::Error::from)?;
    write_atomic(&args.out, &csv)?;
    write_atomic(&sidecar_path(&args.out), &sidecar)?;
    println!("wrote {} ({} points)", args.out.display(), curve.points.len());
    Ok(())
}

pub fn validate(path: &Path) -> Result<(), Failure> {
    let gs = read_gateset(path)?;
    let report = validate_gateset(&gs);
    println!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} element(s) violate the canonical constraints", report.failures().count())))
    }
}

#[derive(Serialize)]
struct GaugeEntry {
    q: f64,
    channel: Vec<Vec<f64>>,
    avg_gate_fidelity: f64,
    diamond_distance: f64,
    /// `None` for `q = 0`, where the gauge matrix is singular.
    validation: Option<ValidationReport>,
    max_probability_discrepancy: Option<f64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn print_matrix(indent: &str, m: &DMatrix<f64>) {
    for r in rows(m) {
        let cells: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
        println!("{indent}[{}]", cells.join(", "));
    }
}

fn slug(q: f64) -> String {
    format!("{q}").replace('-', "m").replace('.', "p")
}

pub fn gauge_demo(eps1: f64, eps2: f64, gamma: f64, qs: &[f64], seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    if qs.is_empty() {
        return Err(anyhow!("no gauge parameters given").into());
    }
    let unitaries = vec![
        ("I".to_string(), DMatrix::identity(2, 2)),
        ("H".to_string(), hadamard()),
        ("S".to_string(), phase_s()),
    ];
    let theta = build_theta(eps1, eps2, gamma, &unitaries)?;
    let identity = Ptm::identity(1);

    println!("Theta (eps1 = {eps1}, eps2 = {eps2}, gamma = {gamma})");
    println!("  state rho: {:?}", theta.states()[0].vector.as_slice());
    println!("  damping channel A:");
    print_matrix("    ", theta.gates()[0].ptm.matrix());
    for (k, e) in theta.povms()[0].effects().iter().enumerate() {
        println!("  effect {k}: {:?}", e.as_slice());
    }
    println!("  {}", validate_gateset(&theta).to_string().replace('\n', "\n  "));

    // Random circuits over {I, H, S} for the probability check.
    let sampler = ExperimentSampler::new(&theta, Mode::Generic)?;
    let circuits = (0..100u64).map(|i| sampler.sample(1 + (i as usize % 20), seed, i)).collect::<Result<Vec<_>, _>>()?;

    let mut entries = Vec::with_capacity(qs.len());
    let mut documents = Vec::new();
    for &q in qs {
        let channel = amplitude_damping_ptm(gamma, q)?;
        let fidelity = avg_gate_fidelity(&channel, &identity)?;
        let diamond = diamond_distance(&channel, &identity)?.value;
        println!();
        println!("q = {q}");
        println!("  channel A(gamma, q):");
        print_matrix("    ", channel.matrix());
        println!("  average gate fidelity = {fidelity}");
        println!("  half diamond distance to identity = {diamond}");
        let (validation, discrepancy) = if q == 0.0 {
            println!("  gauge matrix is singular at q = 0; channel comparison only");
            (None, None)
        } else {
            let theta_q = apply_gauge(&theta, &gauge_matrix_q(q)?)?;
            println!("  state rho_q: {:?}", theta_q.states()[0].vector.as_slice());
            for (k, e) in theta_q.povms()[0].effects().iter().enumerate() {
                println!("  effect {k}: {:?}", e.as_slice());
            }
            let report = validate_gateset(&theta_q);
            println!("  {}", report.to_string().replace('\n', "\n  "));
            let mut worst = 0.0f64;
            for spec in &circuits {
                let p = circuit_probabilities(&theta, spec)?.values;
                let pq = circuit_probabilities(&theta_q, spec)?.values;
                for (a, b) in p.iter().zip(&pq) {
                    worst = worst.max((a - b).abs());
                }
            }
            println!("  max probability discrepancy over {} circuits = {worst:e}", circuits.len());
            documents.push((format!("theta_q_{}.json", slug(q)), theta_q.to_json()));
            (Some(report), Some(worst))
        };
        entries.push(GaugeEntry {
            q,
            channel: rows(channel.matrix()),
            avg_gate_fidelity: fidelity,
            diamond_distance: diamond,
            validation,
            max_probability_discrepancy: discrepancy,
        });
    }

    let fids: Vec<f64> = entries.iter().map(|e| e.avg_gate_fidelity).collect();
    let spread = fids.iter().copied().fold(f64::NEG_INFINITY, f64::max) - fids.iter().copied().fold(f64::INFINITY, f64::min);
    println!();
    println!("fidelity spread across q = {spread:e}");
    let at = |q: f64| entries.iter().find(|e| e.q == q).map(|e| e.diamond_distance);
    let ratio = match (at(1.0), at(0.0)) {
        (Some(a), Some(b)) if b > 0.0 => {
            println!("diamond distance ratio q=1 / q=0 = {}", a / b);
            Some(a / b)
        }
        _ => None,
    };

    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let report = json!({
            "eps1": eps1,
            "eps2": eps2,
            "gamma": gamma,
            "theta": theta.to_document(),
            "entries": entries,
            "fidelity_spread": spread,
            "diamond_ratio_q1_q0": ratio,
        });
        let bytes = serde_json::to_vec_pretty(&report).map_err(anyhow::Error::from)?;
        write_atomic(&dir.join("gauge_report.json"), &bytes)?;
        write_atomic(&dir.join("theta.json"), theta.to_json().as_bytes())?;
        for (name, doc) in documents {
            write_atomic(&dir.join(name), doc.as_bytes())?;
        }
        println!("wrote report to {}", dir.display());
    }
    Ok(())
}
