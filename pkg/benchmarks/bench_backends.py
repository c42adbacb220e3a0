"""Compare the compiled and NumPy kernel backends.

    python benchmarks/bench_backends.py [--seconds 10]

Prints per-call kernel timings on one 161-bin frame and the real-time factor
of every pipeline mode with each backend.
"""

import argparse
import timeit

import numpy as np

from stereocue._kernels import available, get_backend
from stereocue.erb import design_erb_filterbank
from stereocue.pipeline import MODES, PipelineConfig, run_stream
from stereocue.simulate import SceneSpec, synthesize_scene

K = 161


def kernel_calls(kb, rng):
    x = rng.standard_normal((2, K)) + 1j * rng.standard_normal((2, K))
    c = 0.5 * x
    a1 = np.full((2, K), 2**-0.5, dtype=complex)
    a2 = a1.copy()
    a2[1] *= -1
    R = np.zeros((K, 2, 2), complex)
    R[:, 0, 0] = R[:, 1, 1] = 1.0
    bank = design_erb_filterbank()
    g = rng.uniform(0, 1, 32)
    return {
        "project": lambda: kb.project(x, a1),
        "steering_update": lambda: kb.steering_update(R, x, c, 0.99, a1, a2, 1e-5),
        "band_energies": lambda: kb.band_energies(x[0], bank.lower_band, bank.lower_weight, 32),
        "band_to_bin": lambda: kb.band_to_bin(g, bank.lower_band, bank.lower_weight),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seconds", type=float, default=10.0, help="length of the synthetic scene")
    args = ap.parse_args()
    names = available()
    rng = np.random.default_rng(0)

    print("kernel timings, microseconds per call")
    print(f"{'kernel':18s}" + "".join(f"{n:>12s}" for n in names))
    calls = {n: kernel_calls(get_backend(n), rng) for n in names}
    for k in calls[names[0]]:
        row = []
        for n in names:
            t = timeit.Timer(calls[n][k])
            reps, _ = t.autorange()
            row.append(1e6 * min(t.repeat(5, reps)) / reps)
        print(f"{k:18s}" + "".join(f"{v:12.2f}" for v in row))

    scene = synthesize_scene(SceneSpec(duration=args.seconds, seed=0))
    print(f"\nreal-time factor, {args.seconds:g} s stereo at 16 kHz, spectral subtraction")
    print(f"{'mode':24s}" + "".join(f"{n:>12s}" for n in names))
    for m in MODES:
        row = []
        for n in names:
            _, rep = run_stream(scene.mixture, PipelineConfig(mode=m), backend=get_backend(n))
            row.append(rep.rtf)
        print(f"{m:24s}" + "".join(f"{v:12.4f}" for v in row))


if __name__ == "__main__":
    main()
