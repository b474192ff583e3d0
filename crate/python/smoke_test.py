"""Smoke test for the mtc extension module.

Build first, e.g. `pip install --no-build-isolation -e crates/python`.
"""

import math
import sys
import tempfile
from pathlib import Path

import mtc


def main() -> int:
    fam = mtc.Family(4, 8.0)
    assert fam.n == 4 and fam.d == 2
    assert fam.is_separated()
    lat = fam.lattice()
    assert len(lat) == math.comb(4, 2)
    assert lat.shifted_membership(0) == 0.5
    assert mtc.Family(2, 8.0).energy_delta() == 6.0

    energy, err = fam.energy_quadrature()
    assert energy > 0 and err >= 0

    inc = fam.incidence_check(dirs=500)
    assert inc["passed"] and inc["max_bad_set"] <= 1

    hy = mtc.hy_suite(d=2, m=8, draws=10)
    assert hy["failures"] == 0

    cfg = mtc.Config(
        c=8.0,
        schedule=[2, 3, 4],
        dir_samples=16,
        incidence_dirs=300,
        resolution_dirs=16,
        sup_line={"budget": 40, "refine_top": 2, "max_evals": 200, "seed": 1},
    )
    with tempfile.TemporaryDirectory() as out:
        rep = mtc.ratio_sweep(cfg, out_dir=out)
        assert (Path(out) / "ratio.csv").exists()
    assert rep["gates_passed"]
    assert all(r["ratio_conservative"] <= r["ratio_observed"] for r in rep["rows"])

    try:
        mtc.ratio_sweep(mtc.Config(c=1.05, b=1.02, schedule=[4, 6], incidence_dirs=300))
    except mtc.GateFailed:
        pass
    else:
        raise AssertionError("collapsed family passed the gate")

    for row in rep["rows"]:
        print(f"N={row['N']:>2} ratioConservative={row['ratio_conservative']:.4f}")
    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
