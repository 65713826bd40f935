"""Smoke test for the pymultirc extension.

Build and install first:
    cd crates/python && maturin build --release -o /tmp/wheels && pip install /tmp/wheels/pymultirc-*.whl
"""

import math

import numpy as np

import pymultirc as mr


def circle(n, cw=False, radius=5.0, step=0.01):
    t = np.arange(n) * step
    sign = -1.0 if cw else 1.0
    return np.stack([radius * np.cos(t), sign * radius * np.sin(t)], axis=1)


def main():
    assert "table2-fig2" in mr.presets()

    a, b = circle(3000), circle(3000, cw=True)
    assert mr.roundness(a.tolist()) < 1e-9
    outcome = mr.classify(a.tolist())
    assert outcome["class"] == "periodic", outcome
    assert abs(outcome["period_estimate"] - 2 * math.pi) < 0.05
    verdict = mr.judge(a.tolist(), b.tolist())
    assert verdict["success"], verdict

    spec = mr.reservoir_preset("table2-fig2")
    spec["n_neurons"] = 100
    spec["spectral_radius"] = 1.0
    report = mr.seeing_double_trial("li", spec, 1, with_stm=True)
    assert report["status"] in ("success", "failure"), report
    assert report["stm"] > 0.0
    print("seeing-double trial:", report["status"], "stm", round(report["stm"], 3))

    ng, _ = mr.ngrc_preset("table3-fig5")
    records = mr.ngrc_beta_sweep(ng, [1e-6])
    assert records[0]["success"], records[0]["outcome"]

    cfg = mr.Config("sweep-rho", preset="table2-fig2", overrides=["n_neurons=60", "rho_values=[0.6, 1.0]", "n_trials=2"])
    files = dict(cfg.run())
    rows = files["results.csv"].strip().splitlines()
    assert rows[0] == "rho,successes,completed,errors" and len(rows) == 3, rows
    assert dict(cfg.run())["results.csv"] == files["results.csv"]

    try:
        mr.Config("sweep-rho", overrides=["rho_typo=1"])
    except KeyError as e:
        assert "rho_typo" in str(e)
    else:
        raise AssertionError("unknown key accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
