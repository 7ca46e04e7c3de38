"""Smoke test for the `kantian` extension module.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, or copy
`target/release/libkantian.so` to `kantian.so` somewhere on PYTHONPATH.
"""

import math

import kantian


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert close(kantian.risk_aggregate([1.0, 3.0], [0.5, 0.5], 1.0), 2.4337808304830272, 1e-12)
    assert kantian.risk_aggregate([1.0, 3.0], [0.5, 0.5], math.inf) == 3.0

    ref = kantian.symmetric_reference(0.5)
    assert close(ref["kantian"], 2 / 7, 1e-15)
    assert close(ref["altruistic"], 0.3, 1e-15)

    game = kantian.QuadraticGame([1.0], [1.0], [1.0], alpha=0.5)
    u, report = game.fixed_point()
    assert report["converged"]
    assert close(u[0], 2 / 7, 1e-8)

    four = kantian.QuadraticGame.four_type(0.5)
    direct = four.rkn_direct()
    eg, _ = four.extragradient()
    assert max(abs(a - b) for a, b in zip(direct, eg)) < 1e-6
    assert len(four.hrkn_direct()) == 4
    assert four.monotonicity_probe(200, 1) > 0.0

    cont = kantian.ContinuumLQ(0.5, kernel="uniform", xi="const", n=201)
    sol = cont.solve()
    assert all(close(v, 1 / 7, 1e-8) for v in sol["ubar_minus"])
    assert all(close(v, 2 / 7, 1e-8) for v in sol["actions"])
    assert cont.crosscheck(51) < 1e-3

    windowed = kantian.ContinuumLQ(0.5, kernel="windowed").solve()
    assert windowed["residual"] < 1e-5

    try:
        kantian.QuadraticGame([1.0], [1.0], [1.0], alpha=2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha outside [0, 1] accepted")

    print("kantian smoke test passed")


if __name__ == "__main__":
    main()
