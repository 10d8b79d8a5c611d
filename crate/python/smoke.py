#!/usr/bin/env python3
"""Smoke test for the nilspace_py extension module.

Builds nothing itself: run `cargo build -p nilspace-py` first, then
`python3 python/smoke.py`.  The script locates the compiled extension in
target/, imports it, and exercises each exposed operation once.
"""

import pathlib
import shutil
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def import_module():
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libnilspace_py.so", "libnilspace_py.dylib", "nilspace_py.dll")
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p nilspace-py")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="nilspace_py_"))
    shutil.copy(built, stage / f"nilspace_py{suffix}")
    sys.path.insert(0, str(stage))
    import nilspace_py

    return nilspace_py


def main():
    nilspace_py = import_module()
    Space = nilspace_py.Space

    # Axiom checks on a degree-1 space.
    dk = Space.dk([3], 1, max_dim=3)
    assert dk.point_count() == 3 and dk.degree() == 1
    for name, passed, witness in dk.check():
        assert passed, f"{name}: {witness}"
    assert dk.is_cube([0, 1, 2, 0]) and not dk.is_cube([0, 1, 2, 1])

    # Translations and the commutator law.
    assert len(dk.translations(1)) == 3
    assert len(dk.translations(2)) == 1
    assert dk.translation_filtration_holds(2)

    # Structure group and lifting on the Heisenberg nilmanifold.
    heis = Space.heisenberg(3)
    order, maps = heis.structure_group(2)
    assert order == 3 and all(heis.is_translation(m, 2) for m in maps)
    factor_points = len(set(heis.factor_map(2)))
    identity = list(range(factor_points))
    lifted, lift, detail = heis.lift_translation(identity, 1, 2)
    assert lifted and "pushforward-matches: true" in detail, detail

    # Coboundary round trip through the averaging solver.
    f = [f"{i}/9" for i in range(3)]
    rho = dk.coboundary(2, f)
    sol = dk.solve_averaging(2, rho)
    assert dk.coboundary(2, sol) == rho

    # The linear solver certifies the classic non-coboundary.
    dk2 = Space.dk([2], 1, max_dim=2)
    rhs = []
    for cube in dk2.cubes(2):
        h1 = (cube[1] - cube[0]) % 2
        h2 = (cube[2] - cube[0]) % 2
        rhs.append([(h1 * h2) % 2])
    solved, _, certificate = dk2.solve_linear(2, [2], rhs)
    assert not solved and certificate, certificate

    # Table spaces round trip through explicit cube lists.
    table = Space.from_cubes(2, [dk2.cubes(1), []], degree=1)
    names = [name for name, passed, _ in table.check() if not passed]
    assert names == ["completion-2"], names

    print("nilspace_py smoke test: all assertions passed")


if __name__ == "__main__":
    main()
