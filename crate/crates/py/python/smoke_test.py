"""Smoke test for the gaudin extension module.

Build and install first, e.g. `pip install --no-build-isolation ./crates/py`
or `maturin develop -m crates/py/Cargo.toml`, then run this file.
"""

import json
import math

import gaudin


def close(a, b, tol):
    return abs(a - b) <= tol


def rational_model():
    d = lambda x: [[x, 0], [0, -x]]
    return gaudin.Model.rational(
        2,
        [0j, 1 + 0j, 0.4 + 0.9j],
        [d(0.6), d(0.5), d(0.8)],
        [(2 + 0.5j, 2), (-1 + 1j, 2)],
    )


def main():
    wp, zeta, sigma = gaudin.weierstrass(1j, 0.3 + 0.2j)
    wp2, _, _ = gaudin.weierstrass(1j, 1.3 + 0.2j)
    assert close(wp, wp2, 1e-10), (wp, wp2)
    assert close(sigma, 0.3 + 0.2j, 0.05)

    model = rational_model()
    assert model.genus == 0 and model.m == 2 and model.num_hamiltonians == 2
    again = gaudin.Model.from_json(model.to_json())
    assert again.to_json() == model.to_json()

    state = model.random_state(7)
    model.validate_state(state)
    assert model.residue_sum_norm(state) < 1e-10
    assert abs(model.poisson_bracket(state, 0, 1)) < 1e-9
    assert gaudin.State.from_json(state.to_json()).to_json() == state.to_json()

    traj = model.evolve(state, [[0, 0], [0.5, 0], [0.5, 0.5]], 0.01)
    assert len(traj) == 101, len(traj)
    h0 = model.hamiltonians(traj.states()[0])
    h1 = model.hamiltonians(traj.states()[-1])
    assert max(abs(a - b) for a, b in zip(h0, h1)) < 1e-8
    diag = json.loads(traj.diagnostics([2 + 1j]))
    assert diag["residue_sum_drift"] < 1e-8, diag
    assert math.isfinite(abs(traj.action()))

    stepped = model.step(state, 1, 0.01, method="conjugation")
    assert stepped.t == [0.0, 0.01]

    try:
        model.evolve(state, [[0, 0], [1, 1]], 0.01)
    except ValueError as e:
        assert "axis-aligned" in str(e)
    else:
        raise AssertionError("diagonal curve accepted")

    report = json.loads(gaudin.verify_suite("weierstrass", seed=3))
    assert report["passed"], report
    try:
        gaudin.verify_suite("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown suite accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
