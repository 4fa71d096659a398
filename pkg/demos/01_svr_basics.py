#!/usr/bin/env python3
"""Fit the from-scratch epsilon-SVR on a noisy sine and inspect the model.

The solver is the same one the market strategies train every simulated day,
just pointed at a toy curve here.
"""

import numpy as np

from powerbid.svr import (
    KernelSpec,
    SvrHyperparams,
    TrainingSet,
    kkt_residual,
    predict_batch,
    train,
)


def main():
    rng = np.random.default_rng(0)
    x = np.linspace(0.0, 2.0 * np.pi, 40)[:, None]
    y = np.sin(x[:, 0]) + rng.normal(0.0, 0.1, size=40)

    hp = SvrHyperparams(
        c=10.0,
        epsilon=0.1,
        kernel=KernelSpec(sigma=0.3),
        kkt_tolerance=1e-6,
    )
    ts = TrainingSet(features=x, targets=y)
    model = train(ts, hp)

    preds = predict_batch(model, x)
    rmse = float(np.sqrt(np.mean((preds - np.sin(x[:, 0])) ** 2)))
    inside = int(np.sum(np.abs(preds - y) <= hp.epsilon + 1e-9))

    print(f"samples:                {len(ts)}")
    print(f"support vectors:        {model.n_support}")
    print(f"bias:                   {model.bias:+.4f}")
    print(f"rmse vs clean sine:     {rmse:.4f}")
    print(f"targets inside tube:    {inside}/{len(ts)}")
    print(f"kkt residual:           {kkt_residual(model, ts, hp):.2e}")

    print("\n x        sin(x)   fitted")
    for xi in (0.5, 1.5708, 3.0, 4.7124, 6.0):
        p = predict_batch(model, [[xi]])[0]
        print(f" {xi:5.3f}   {np.sin(xi):+.3f}   {p:+.3f}")


if __name__ == "__main__":
    main()
