use serde::Serialize;
use tailgating::fermion::assemble_hamiltonian;
use tailgating::hamgrid::{DisplacementLabel, HamiltonianGrid};
use tailgating::oracle::{
    exact_ground_state, fd_energy_derivative, normalization_identity_check, second_derivative_via_states,
    theorem1_check, PhaseMode,
};
use tailgating::Exec;

use crate::commands::load;
use crate::{Outcome, ValidateArgs};

/// Largest sector handled by the full-spectrum state-derivative check.
const DENSE_SECTOR_CAP: usize = 500;
const IDENTITY_TOL: [f64; 2] = [1e-6, 1e-5];
const HESSIAN_TOL: f64 = 1e-4;

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    passed: bool,
}

impl Check {
    fn below(name: String, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value.abs() <= tolerance,
        }
    }
}

#[derive(Debug, Serialize)]
struct Report {
    molecule: String,
    seed: u64,
    skipped: Vec<String>,
    checks: Vec<Check>,
}

fn has(grid: &HamiltonianGrid, c: usize, k: i32) -> bool {
    let b = DisplacementLabel::base();
    grid.contains(&b.shifted(c, k)) && grid.contains(&b.shifted(c, -k))
}

pub(crate) fn run(a: ValidateArgs) -> anyhow::Result<Outcome> {
    let grid = load(&a.common)?;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();

    let gauge = grid.gauge_report();
    checks.push(Check {
        name: "gauge continuity".into(),
        value: gauge.max_rate,
        tolerance: gauge.continuity_bound,
        passed: gauge.is_clean(),
    });

    if gauge.is_clean() {
        derivative_checks(&grid, a.seed, &mut checks, &mut skipped)?;
    } else {
        skipped.push(format!(
            "derivative checks: {} gauge violation(s)",
            gauge.violations.len()
        ));
    }

    for c in &checks {
        println!(
            "{} {}: {:.3e} (tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    for s in &skipped {
        println!("SKIP {s}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let report = Report {
        molecule: grid.molecule().to_string(),
        seed: a.seed,
        skipped,
        checks,
    };
    std::fs::create_dir_all(&a.common.out)?;
    tailgating::checkpoint::write_json(a.common.out.join("validation.json"), &report)?;
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::Failed })
}

fn derivative_checks(
    grid: &HamiltonianGrid,
    seed: u64,
    checks: &mut Vec<Check>,
    skipped: &mut Vec<String>,
) -> anyhow::Result<()> {
    let h = assemble_hamiltonian(grid.base())?;
    let ground = exact_ground_state(&h, Some(&grid.sector()))?;
    checks.push(Check::below("ground-state residual".into(), ground.residual, 1e-9));

    let axial: Vec<usize> = (0..grid.n_coords()).filter(|&c| has(grid, c, 1)).collect();
    if axial.is_empty() {
        skipped.push("state-derivative checks: no axial ±1 points".into());
    }
    for &c in &axial {
        for k in 1..=2 {
            let r = normalization_identity_check(grid, c, k, PhaseMode::Aligned)?;
            checks.push(Check::below(
                format!("normalization identity k={k} coordinate {}", c + 1),
                r.residual,
                IDENTITY_TOL[k - 1],
            ));
        }
    }
    if let Some(&c) = axial.first() {
        let r = normalization_identity_check(grid, c, 1, PhaseMode::Scrambled(seed))?;
        checks.push(Check {
            name: format!("scrambled-phase control coordinate {} (must be violated)", c + 1),
            value: r.residual,
            tolerance: IDENTITY_TOL[0],
            passed: r.residual.abs() > IDENTITY_TOL[0],
        });
    }

    if grid.sector().dimension() <= DENSE_SECTOR_CAP {
        for &c in &axial {
            let fd = fd_energy_derivative(grid, &[c, c], Exec::default())?;
            let states = second_derivative_via_states(grid, c, c)?;
            checks.push(Check::below(
                format!("second derivative via states vs FD coordinate {}", c + 1),
                states - fd.value,
                HESSIAN_TOL + fd.error_bound(),
            ));
        }
    } else {
        skipped.push(format!(
            "second derivative via states: sector dimension {} above {DENSE_SECTOR_CAP}",
            grid.sector().dimension()
        ));
    }

    let doubled: Vec<Vec<usize>> = axial
        .iter()
        .filter(|&&c| has(grid, c, 2))
        .map(|&c| vec![c, c])
        .collect();
    if doubled.is_empty() {
        skipped.push("truncated-Hamiltonian check: no doubled stencil on the grid".into());
    } else {
        let report = theorem1_check(grid, 2, &doubled, Exec::default())?;
        for e in &report.entries {
            checks.push(Check {
                name: format!(
                    "truncated Hamiltonian n=2 p={} coordinates {:?}",
                    e.order,
                    e.coords.iter().map(|c| c + 1).collect::<Vec<_>>()
                ),
                value: e.difference,
                tolerance: e.tolerance,
                passed: e.within,
            });
        }
    }
    Ok(())
}
