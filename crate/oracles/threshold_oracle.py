#!/usr/bin/env python3
"""Monte Carlo oracle for the default match threshold.

Enrolled templates are uniform in [-1024, 1024] per coordinate. Genuine probes
add uniform integer noise in [-16, 16]; impostor probes are fresh uniform
templates. The threshold is the midpoint between the largest genuine score and
the smallest impostor score observed over TRIALS pairs of each kind.
"""
import numpy as np

DIM = 64
TRIALS = 100_000
SEED = 20190601


def main():
    rng = np.random.default_rng(SEED)
    enrolled = rng.integers(-1024, 1025, size=(TRIALS, DIM), dtype=np.int64)
    noise = rng.integers(-16, 17, size=(TRIALS, DIM), dtype=np.int64)
    genuine = (noise * noise).sum(axis=1)

    enrolled_b = rng.integers(-1024, 1025, size=(TRIALS, DIM), dtype=np.int64)
    impostor = rng.integers(-1024, 1025, size=(TRIALS, DIM), dtype=np.int64)
    diff = enrolled_b - impostor
    impostor_scores = (diff * diff).sum(axis=1)

    genuine_max = int(genuine.max())
    impostor_min = int(impostor_scores.min())
    threshold = (genuine_max + impostor_min) // 2
    print(f"genuine_max={genuine_max}")
    print(f"impostor_min={impostor_min}")
    print(f"threshold={threshold}")


if __name__ == "__main__":
    main()
