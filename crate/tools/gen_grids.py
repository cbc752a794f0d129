#!/usr/bin/env python3
"""Generate geometry grids of FCIDUMP files for the tailgating engine.

Each grid is a manifest (JSON) plus one FCIDUMP per displaced geometry.
Orbitals at displaced geometries are RHF orbitals rotated (separately within
the occupied and the virtual block) to maximal overlap with the reference
orbitals, so integral coefficients vary smoothly with the nuclear positions.

Requires pyscf, numpy, scipy. Usage:

    python3 tools/gen_grids.py --out data            # all molecules
    python3 tools/gen_grids.py --out data --only h2
"""

import argparse
import itertools
import json
import os

import numpy as np
import scipy.optimize
from pyscf import ao2mo, fci, gto, scf
from pyscf.tools import fcidump

# standard atomic weights (IUPAC, conventional values)
MASS = {"H": 1.008, "Be": 9.0121831, "O": 15.999}
STEP = 5e-3


def make_mol(atoms, charge):
    return gto.M(
        atom=[(sym, tuple(xyz)) for sym, xyz in atoms],
        basis="sto-3g",
        unit="Bohr",
        charge=charge,
        spin=0,
        verbose=0,
    )


def run_rhf(mol, dm0=None):
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-13
    mf.conv_tol_grad = 1e-9
    mf.max_cycle = 200
    mf.kernel(dm0=dm0)
    if not mf.converged:
        raise RuntimeError("RHF did not converge")
    return mf


def polar(m):
    u, _, vt = np.linalg.svd(m)
    return u @ vt


def aligned_orbitals(mol, mf, c_ref, nocc):
    """Rotate occupied and virtual blocks of mf.mo_coeff onto c_ref."""
    s = mol.intor("int1e_ovlp")
    c = mf.mo_coeff
    out = np.empty_like(c)
    for blk in (slice(0, nocc), slice(nocc, c.shape[1])):
        m = c[:, blk].T @ s @ c_ref[:, blk]
        out[:, blk] = c[:, blk] @ polar(m)
    return out


def guess_from_reference(mol, c_ref, nocc):
    s = mol.intor("int1e_ovlp")
    cocc = c_ref[:, :nocc]
    ovl = cocc.T @ s @ cocc
    w, v = np.linalg.eigh(ovl)
    cocc = cocc @ (v @ np.diag(w ** -0.5) @ v.T)
    return 2.0 * cocc @ cocc.T


def integrals(mol, c):
    h1 = c.T @ mol.intor("int1e_kin") @ c + c.T @ mol.intor("int1e_nuc") @ c
    nmo = c.shape[1]
    eri = ao2mo.restore(1, ao2mo.full(mol, c), nmo)
    return h1, eri, mol.energy_nuc()


def hf_energy(atoms, charge):
    return run_rhf(make_mol(atoms, charge)).e_tot


def fci_energy(atoms, charge):
    mol = make_mol(atoms, charge)
    mf = run_rhf(mol)
    e, _ = fci.FCI(mf).kernel()
    return e


def displaced(atoms, label, step):
    flat = np.array([xyz for _, xyz in atoms], dtype=float).reshape(-1)
    for signed in label:
        idx = abs(signed) - 1
        flat[idx] += step * (1 if signed > 0 else -1)
    flat = flat.reshape(-1, 3)
    return [(sym, flat[k].tolist()) for k, (sym, _) in enumerate(atoms)]


def hessian_labels(ncoord, extra_axial=()):
    labels = [[]]
    for i in range(1, ncoord + 1):
        labels += [[i], [-i]]
    for i in range(1, ncoord + 1):
        for j in range(i + 1, ncoord + 1):
            labels += [[i, j], [i, -j], [-i, j], [-i, -j]]
    for i, kmax in extra_axial:
        for k in range(2, kmax + 1):
            labels += [[i] * k, [-i] * k]
    return labels


def label_name(label):
    if not label:
        return "base"
    parts = []
    for signed in label:
        parts.append(("p" if signed > 0 else "m") + str(abs(signed)))
    return "_".join(parts)


def write_grid(outdir, name, molecule, atoms, charge, step, labels, nelec):
    os.makedirs(os.path.join(outdir, name), exist_ok=True)
    mol0 = make_mol(atoms, charge)
    mf0 = run_rhf(mol0)
    c0 = mf0.mo_coeff
    nocc = nelec // 2
    points = []
    for label in labels:
        geom = displaced(atoms, label, step)
        mol = make_mol(geom, charge)
        if label:
            mf = run_rhf(mol, dm0=guess_from_reference(mol, c0, nocc))
            c = aligned_orbitals(mol, mf, c0, nocc)
        else:
            c = c0
        h1, eri, enuc = integrals(mol, c)
        rel = os.path.join(name, label_name(label) + ".fcidump")
        fcidump.from_integrals(
            os.path.join(outdir, rel), h1, eri, h1.shape[0], nelec, enuc,
            ms=0, tol=1e-15, float_format=" %.17e",
        )
        points.append({"label": label, "file": rel})
    manifest = {
        "molecule": molecule,
        "atoms": [
            {"symbol": sym, "mass_amu": MASS[sym], "xyz_bohr": list(xyz)}
            for sym, xyz in atoms
        ],
        "step_bohr": step,
        "points": points,
    }
    with open(os.path.join(outdir, name + ".json"), "w") as f:
        json.dump(manifest, f, indent=1)
    print(f"{name}: {len(points)} points, E_HF(R0) = {mf0.e_tot:.10f}")


def optimize(energy, x0):
    res = scipy.optimize.minimize(
        energy, x0, method="Nelder-Mead",
        options={"xatol": 1e-7, "fatol": 1e-13, "maxiter": 4000},
    )
    return res.x


def h2_atoms(r):
    return [("H", [0.0, 0.0, -r / 2]), ("H", [0.0, 0.0, r / 2])]


def h3p_atoms(a):
    return [
        ("H", [0.0, a / 2, 0.0]),
        ("H", [0.0, -a / 2, 0.0]),
        ("H", [-a * np.sqrt(3.0) / 2, 0.0, 0.0]),
    ]


def beh2_atoms(r):
    return [("Be", [0.0, 0.0, 0.0]), ("H", [0.0, 0.0, -r]), ("H", [0.0, 0.0, r])]


def h2o_atoms(r, theta):
    half = theta / 2
    return [
        ("O", [0.0, 0.0, 0.0]),
        ("H", [0.0, r * np.sin(half), r * np.cos(half)]),
        ("H", [0.0, -r * np.sin(half), r * np.cos(half)]),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--only", default=None)
    args = ap.parse_args()
    want = lambda k: args.only is None or args.only == k

    if want("h2"):
        write_grid(args.out, "h2", "H2", h2_atoms(1.40), 0, STEP,
                   hessian_labels(6, extra_axial=[(6, 4)]), 2)
        (r_eq,) = optimize(lambda x: fci_energy(h2_atoms(x[0]), 0), [1.39])
        print(f"H2 FCI equilibrium bond {r_eq:.8f} Bohr")
        labels = [[]] + [[s * i] for i in range(1, 7) for s in (1, -1)]
        write_grid(args.out, "h2_eq", "H2", h2_atoms(r_eq), 0, STEP, labels, 2)

    if want("h3p"):
        (a,) = optimize(lambda x: hf_energy(h3p_atoms(x[0]), 1), [1.70])
        print(f"H3+ HF equilibrium side {a:.8f} Bohr")
        write_grid(args.out, "h3p", "H3+", h3p_atoms(a), 1, STEP, hessian_labels(9), 2)
        # vertical stretch: atom 1 along +y, atom 2 along -y
        scan_step = 0.025
        labels = [[]]
        for k in range(1, 13):
            labels += [[2, -5] * k, [-2, 5] * k]
        write_grid(args.out, "h3p_scan", "H3+", h3p_atoms(a), 1, scan_step, labels, 2)

    if want("beh2"):
        (r,) = optimize(lambda x: hf_energy(beh2_atoms(x[0]), 0), [2.5])
        print(f"BeH2 HF equilibrium bond {r:.8f} Bohr")
        write_grid(args.out, "beh2", "BeH2", beh2_atoms(r), 0, STEP, hessian_labels(9), 6)

    if want("h2o"):
        r, th = optimize(lambda x: hf_energy(h2o_atoms(x[0], x[1]), 0), [1.87, 1.75])
        print(f"H2O HF equilibrium r {r:.8f} Bohr, angle {np.degrees(th):.6f} deg")
        write_grid(args.out, "h2o", "H2O", h2o_atoms(r, th), 0, STEP, hessian_labels(9), 10)


if __name__ == "__main__":
    main()
