"""Smoke test for the nanoqed_py extension.

Build and install first:  cd crates/py && maturin develop --release
(or `maturin build` and pip-install the wheel).
"""

import json
import math
import tempfile
from pathlib import Path

import nanoqed_py as nq


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        raise SystemExit(1)


def main():
    check(abs(nq.wigner3j(1, 1, 0, 0, 0, 0) + 1 / math.sqrt(3)) < 1e-14, "3j symbol")

    delta = nq.fit_detuning(10.0, 1.45**2)
    check(abs(delta - 116.8936795128107) < 1e-6, f"silica calibration at n0 = 10: {delta:.6f}")
    medium = nq.Medium.calibrated(10.0, 1.45**2)
    check(abs(medium.permittivity(0.0).real - 1.45**2) < 1e-9, "permittivity at the reference line")

    scheme = nq.Scheme.preset("rb87-f0-f1")
    check(scheme.n_excited == 1, repr(scheme))

    # an empty cloud gives the free-space spectrum
    free = nq.spectrum(scheme, nq.Cloud.from_positions([], medium), [0.0, 0.0, 0.0])
    check(len(free) == 1 and abs(free[0]["gamma"] - 1.0) < 1e-12, "free atom decays at the vacuum rate")

    geom = nq.Geometry.cylinder(1.6, 3.0)
    cloud = nq.Cloud.generate(geom, medium, seed=3)
    check(len(cloud) > 100, f"disordered cylinder with {len(cloud)} scatterers")
    atom = geom.atom_site("radial", 2.4)
    sigma = nq.self_energy(scheme, cloud, atom)
    check(len(sigma) == 1 and sigma[0][0].imag < 0, "1x1 self-energy of the tripod")
    levels = nq.spectrum(scheme, cloud, atom)
    check(all(l["gamma"] > 0 for l in levels), "positive decay rates near the cylinder")

    shift, err = nq.vdw_shift(1.45**2, scheme.dipole_sq_sum(), nq.Geometry.half_space(), [1.0, 0.0, 0.0])
    exact = -(1.45**2 - 1) * scheme.dipole_sq_sum() / (8 * (1.45**2 + 2))
    check(abs(shift / exact - 1) < 1e-6 and err < 1e-6 * abs(shift), "half-space van der Waals shift")

    cfg = json.loads(nq.preset_json("fig2-desk"))
    cfg["name"] = "smoke"
    cfg["sweep"] = {"distances_nm": [300.0, 600.0]}
    with tempfile.TemporaryDirectory() as out:
        csv, sidecar = nq.run_scan(json.dumps(cfg), out, threads=1)
        rows = [l for l in Path(csv).read_text().splitlines() if not l.startswith("#")]
        check(len(rows) == 3, f"scan wrote {Path(csv).name} with two data rows")
        check(json.loads(Path(sidecar).read_text())["failures"] == 0, "sidecar reports no failures")

    try:
        nq.Scheme.preset("h1")
        check(False, "unknown scheme rejected")
    except ValueError:
        check(True, "unknown scheme rejected")


if __name__ == "__main__":
    main()
