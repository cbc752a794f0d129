use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use tailgating::adapt::{adapt_build, build_pool, AdaptConfig, GatePool, StopReason};
use tailgating::checkpoint::{write_json, write_text, Checkpoint, HessianRecord, ModesRecord, SelectionRecord};
use tailgating::energyderiv::hessian;
use tailgating::fermion::assemble_hamiltonian;
use tailgating::hamgrid::{
    load_grid, DisplacementLabel, HamiltonianGrid, Manifest, TaylorFamily, DEFAULT_CONTINUITY_BOUND,
};
use tailgating::normalmodes::{normal_modes, ModeOptions};
use tailgating::oracle::{
    exact_ground_state, fidelity_scan, linspace, FidelityCurve, GridLine, ScanCircuit, TaylorLine,
};
use tailgating::pauli::DENSE_QUBIT_CAP;
use tailgating::simulator::{circuit_state, expval, fidelity};
use tailgating::tailgate::{build_derivative_set, screen_gates, tailgate as append_tail};
use tailgating::Exec;

use crate::{AdaptArgs, Common, FidelityArgs, FreqArgs, HamArgs, HessianArgs, Outcome, TailgateArgs};

/// Creates the output directory and returns `out/name`.
fn output(common: &Common, name: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    Ok(common.out.join(name))
}

fn check_step(common: &Common, manifest_step: f64) -> anyhow::Result<()> {
    if let Some(h) = common.fd_step {
        if (h - manifest_step).abs() > 1e-12 * manifest_step.max(1.0) {
            bail!("--fd-step {h} disagrees with the grid spacing {manifest_step} in the manifest");
        }
    }
    Ok(())
}

pub(crate) fn load(common: &Common) -> anyhow::Result<HamiltonianGrid> {
    if !common.manifest.is_file() {
        bail!("manifest {} not found", common.manifest.display());
    }
    let grid = load_grid(&common.manifest).with_context(|| format!("loading {}", common.manifest.display()))?;
    check_step(common, grid.step())?;
    Ok(grid)
}

fn pool_for(grid: &HamiltonianGrid) -> anyhow::Result<GatePool> {
    let base = grid.base();
    let pool = build_pool(base.n_orbitals, base.n_electrons)?;
    if pool.is_empty() {
        bail!(
            "empty gate pool ({} electrons in {} orbitals)",
            base.n_electrons,
            base.n_orbitals
        );
    }
    Ok(pool)
}

fn read_checkpoint(path: &Path, grid: &HamiltonianGrid) -> anyhow::Result<(Checkpoint, Outcome)> {
    let c = Checkpoint::read(path).with_context(|| format!("reading {}", path.display()))?;
    if c.circuit.n_qubits != grid.n_qubits() {
        bail!(
            "checkpoint has {} qubits, grid has {}",
            c.circuit.n_qubits,
            grid.n_qubits()
        );
    }
    let mut outcome = Outcome::Ok;
    if let Some(h) = &c.grid_hash {
        if *h != grid.content_hash() {
            eprintln!("warning: checkpoint was built on a different grid");
            outcome = Outcome::Warning;
        }
    }
    Ok((c, outcome))
}

pub(crate) fn ham(a: HamArgs) -> anyhow::Result<Outcome> {
    let grid = load(&a.common)?;
    let h = assemble_hamiltonian(grid.base())?;
    let mut summary = serde_json::json!({
        "molecule": grid.molecule(),
        "qubits": h.n_qubits(),
        "terms": h.len(),
        "points": grid.len(),
        "coordinates": grid.n_coords(),
        "step_bohr": grid.step(),
        "grid_hash": grid.content_hash(),
    });
    println!(
        "{}: {} qubits, {} terms, {} grid points",
        grid.molecule(),
        h.n_qubits(),
        h.len(),
        grid.len()
    );
    if h.n_qubits() <= DENSE_QUBIT_CAP {
        let g = exact_ground_state(&h, Some(&grid.sector()))?;
        println!("ground energy {:.12} Ha (gap {:.3e})", g.energy, g.gap);
        summary["ground_energy"] = g.energy.into();
        summary["gap"] = g.gap.into();
    }
    let mut outcome = Outcome::Ok;
    if a.validate {
        let report = grid.validate_grid(DEFAULT_CONTINUITY_BOUND);
        println!("{}", serde_json::to_string_pretty(&report)?);
        if !report.is_clean() {
            eprintln!("gauge validation failed: {} violation(s)", report.violations.len());
            outcome = Outcome::Failed;
        }
        summary["validation"] = serde_json::to_value(&report)?;
    }
    write_json(output(&a.common, "ham.json")?, &summary)?;
    Ok(outcome)
}

pub(crate) fn adapt(a: AdaptArgs) -> anyhow::Result<Outcome> {
    let grid = load(&a.common)?;
    let h = assemble_hamiltonian(grid.base())?;
    let pool = pool_for(&grid)?;
    let mut config = AdaptConfig::default();
    if let Some(t) = a.vqe.vqe_tol {
        config.vqe_grad_tol = t;
    }
    if let Some(t) = a.selection_threshold {
        config.selection_threshold = t;
    }
    if let Some(m) = a.max_gates {
        config.max_gates = m;
    }
    config.polish_grad_tol = a.polish_tol.or(config.polish_grad_tol);
    if let Some(g) = a.step_growth {
        config.vqe_step_growth = g;
    }
    if let Some(s) = a.max_step {
        config.vqe_max_step = s;
    }
    if let Some(n) = a.max_iters {
        config.vqe_max_iters = n;
    }
    config.validate()?;
    let res = adapt_build(&h, &pool, &config)?;
    let mut ckpt = Checkpoint::from_adapt(grid.molecule(), Some(grid.content_hash()), &res, &config);
    println!(
        "{} gates from a pool of {}, energy {:.12} Ha (reference {:.12}), stop {:?}",
        res.circuit.gates.len(),
        pool.len(),
        res.energy,
        res.reference_energy,
        res.stop
    );
    if h.n_qubits() <= DENSE_QUBIT_CAP {
        let exact = exact_ground_state(&h, Some(&grid.sector()))?;
        let f = fidelity(&circuit_state(&res.circuit, &res.theta)?, &exact.state)?;
        println!(
            "exact {:.12} Ha, error {:.3e}, fidelity {:.8}",
            exact.energy,
            res.energy - exact.energy,
            f
        );
        ckpt.exact_energy = Some(exact.energy);
        ckpt.fidelity = Some(f);
    }
    write_json(output(&a.common, "checkpoint.json")?, &ckpt)?;
    Ok(if res.converged && res.stop == StopReason::BelowThreshold {
        Outcome::Ok
    } else {
        eprintln!("warning: optimization did not fully converge");
        Outcome::Warning
    })
}

pub(crate) fn tailgate(a: TailgateArgs) -> anyhow::Result<Outcome> {
    let grid = load(&a.common)?;
    let (ckpt, outcome) = read_checkpoint(&a.checkpoint, &grid)?;
    if a.epsilon.is_nan() || a.epsilon < 0.0 {
        bail!("--epsilon must be nonnegative");
    }
    let pool = pool_for(&grid)?;
    let exec = Exec::default();
    let derivs = build_derivative_set(&grid, a.order, exec)?;
    let report = screen_gates(&ckpt.circuit, &ckpt.theta, &pool, &derivs, a.epsilon, exec)?;
    let tc = append_tail(&ckpt.circuit, &ckpt.theta, &pool, &report)?;

    let h = assemble_hamiltonian(grid.base())?;
    let before = expval(&circuit_state(&ckpt.circuit, &ckpt.theta)?, &h)?;
    let after = expval(&circuit_state(&tc.circuit(), &tc.theta())?, &h)?;
    println!(
        "{} of {} pool gates selected against {} derivative operators (ε = {:e}); energy change {:.3e} Ha",
        tc.tail.len(),
        pool.len(),
        derivs.len(),
        a.epsilon,
        after - before
    );
    let members = derivs.members.iter().map(|m| m.coords.clone()).collect();
    write_json(
        output(&a.common, "selection.json")?,
        &SelectionRecord::new(a.order, members, report),
    )?;
    write_json(output(&a.common, "tailgated.json")?, &ckpt.with_tail(&tc, a.order))?;
    Ok(outcome)
}

fn compute_hessian(path: &Path, grid: &HamiltonianGrid) -> anyhow::Result<(HessianRecord, Outcome)> {
    let (ckpt, mut outcome) = read_checkpoint(path, grid)?;
    let mut res = hessian(&ckpt.tailgated(), grid)?;
    res.meta.epsilon = ckpt.epsilon;
    let tol = ckpt
        .adapt
        .as_ref()
        .map_or(AdaptConfig::default().vqe_grad_tol, |s| s.config.vqe_grad_tol);
    if res.meta.parameter_gradient_norm > tol {
        eprintln!(
            "warning: parameter gradient {:.3e} exceeds the VQE tolerance {tol:e}",
            res.meta.parameter_gradient_norm
        );
        outcome = Outcome::Warning;
    }
    if res.warning() {
        eprintln!("warning: Hessian asymmetry {:.3e} before symmetrization", res.asymmetry);
        outcome = Outcome::Warning;
    }
    Ok((HessianRecord::new(&res), outcome))
}

pub(crate) fn hessian_cmd(a: HessianArgs) -> anyhow::Result<Outcome> {
    let grid = load(&a.common)?;
    let (rec, outcome) = compute_hessian(&a.checkpoint, &grid)?;
    print!("{}", rec.to_text());
    println!(
        "asymmetry {:.3e}, response rank {}, {} head + {} tail parameters",
        rec.asymmetry, rec.meta.response_rank, rec.meta.n_head, rec.meta.n_tail
    );
    write_json(output(&a.common, "hessian.json")?, &rec)?;
    write_text(output(&a.common, "hessian.txt")?, &rec.to_text())?;
    Ok(outcome)
}

pub(crate) fn freq(a: FreqArgs) -> anyhow::Result<Outcome> {
    let (rec, geometry, mut outcome) = if let Some(path) = &a.hessian {
        let manifest =
            Manifest::read(&a.common.manifest).with_context(|| format!("reading {}", a.common.manifest.display()))?;
        check_step(&a.common, manifest.step_bohr)?;
        let geometry = manifest.geometry(&a.common.manifest)?;
        let rec = HessianRecord::read(path).with_context(|| format!("reading {}", path.display()))?;
        (rec, geometry, Outcome::Ok)
    } else {
        let grid = load(&a.common)?;
        let path = a
            .checkpoint
            .as_ref()
            .expect("clap requires a checkpoint without --hessian");
        let (rec, outcome) = compute_hessian(path, &grid)?;
        (rec, grid.geometry().clone(), outcome)
    };
    let opts = ModeOptions {
        drop_threshold: a.drop_threshold,
        project_rigid_body: !a.no_projection,
    };
    let modes = normal_modes(&rec.matrix(), &geometry, &opts)?;
    for (k, f) in modes.frequencies.iter().enumerate() {
        println!(
            "ω{} {:>12.2} cm⁻¹{}",
            k + 1,
            f,
            if *f < 0.0 { " (imaginary)" } else { "" }
        );
    }
    println!(
        "{} mode(s) dropped below {} cm⁻¹",
        modes.dropped_modes, a.drop_threshold
    );
    if modes.imaginary.iter().any(|&i| i) {
        outcome = outcome.max(Outcome::Warning);
    }
    write_text(output(&a.common, "modes.csv")?, &modes.to_csv())?;
    write_json(output(&a.common, "modes.json")?, &ModesRecord::new(modes))?;
    Ok(outcome)
}

fn parse_direction(spec: &str, n_coords: usize) -> anyhow::Result<DisplacementLabel> {
    let entries = spec
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("--direction {spec:?} is not a list of signed integers"))?;
    let label = DisplacementLabel::from_signed(&entries, n_coords).map_err(|e| anyhow::anyhow!(e))?;
    if label.is_base() {
        bail!("--direction {spec:?} is the zero displacement");
    }
    Ok(label)
}

fn paired_csv(a: &FidelityCurve, b: &FidelityCurve) -> String {
    let mut s = String::from("delta,fidelity,dfidelity_ddelta,compare_fidelity,compare_dfidelity_ddelta\n");
    for (p, q) in a.points.iter().zip(&b.points) {
        let _ = writeln!(
            s,
            "{},{:.12},{:.10e},{:.12},{:.10e}",
            p.delta, p.fidelity, p.dfidelity, q.fidelity, q.dfidelity
        );
    }
    s
}

pub(crate) fn fidelity_cmd(a: FidelityArgs) -> anyhow::Result<Outcome> {
    let grid = load(&a.common)?;
    let direction = parse_direction(&a.direction, grid.n_coords())?;
    if a.delta_steps == 0 {
        bail!("--delta-steps must be at least 1");
    }
    if a.delta_min > a.delta_max {
        bail!("--delta-min exceeds --delta-max");
    }
    let deltas = linspace(a.delta_min, a.delta_max, a.delta_steps);
    let mut paths = vec![&a.checkpoint];
    paths.extend(a.compare.as_ref());

    let coords: Vec<usize> = direction.iter().map(|(c, _)| c).collect();
    let taylor = a
        .taylor
        .map(|order| TaylorFamily::new(&grid, order, &coords))
        .transpose()?;
    let mut outcome = Outcome::Ok;
    let mut curves = Vec::new();
    for path in paths {
        let (ckpt, o) = read_checkpoint(path, &grid)?;
        outcome = outcome.max(o);
        let mut config = ckpt.adapt.as_ref().map_or_else(AdaptConfig::default, |s| s.config);
        if let Some(t) = a.vqe.vqe_tol {
            config.vqe_grad_tol = t;
        }
        let tc = ckpt.tailgated();
        let sc = ScanCircuit {
            circuit: tc.circuit(),
            theta: tc.theta(),
            reoptimize: !a.fixed,
        };
        let curve = match &taylor {
            Some(family) => {
                let line = TaylorLine {
                    family,
                    direction: direction.displacement(grid.n_coords(), 1.0),
                };
                fidelity_scan(&sc, &line, &deltas, &config, Exec::default())?
            }
            None => {
                let line = GridLine {
                    family: &grid,
                    direction: direction.clone(),
                };
                fidelity_scan(&sc, &line, &deltas, &config, Exec::default())?
            }
        };
        if !curve.all_converged() {
            eprintln!("warning: VQE did not converge at every sample for {}", path.display());
            outcome = outcome.max(Outcome::Warning);
        }
        println!(
            "{}: max |dF/dδ| {:.4e}, endpoints ({:.4e}, {:.4e})",
            path.display(),
            curve.max_abs_derivative(),
            curve.endpoint_derivatives().0,
            curve.endpoint_derivatives().1
        );
        curves.push(curve);
    }
    let csv = match curves.as_slice() {
        [one] => one.to_csv(),
        [one, two] => paired_csv(one, two),
        _ => unreachable!("one or two checkpoints"),
    };
    write_text(output(&a.common, "fidelity.csv")?, &csv)?;
    Ok(outcome)
}
