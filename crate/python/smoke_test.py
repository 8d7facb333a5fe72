"""Smoke test for the abwave extension module.

Build and install first, e.g. `maturin build --release -m crates/python/Cargo.toml`
followed by `pip install target/wheels/abwave-*.whl`.
"""

import cmath
import math
import tempfile
from pathlib import Path

import abwave


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    d = 2 * math.pi
    a = 0.01 * d
    w = abwave.PiecewiseWave.two_packet(d, a, math.pi)
    close(w.norm(), 1.0, 1e-12)
    assert w.packet_count() == 2
    # alpha = pi: no probability at p = 0.
    assert w.momentum_density([0.0])[0] < 1e-12
    big_d = d + 2 * a
    for p in (0.3, 1.0, 2.5):
        close(w.momentum_density([p])[0], abwave.analytic_density_two_packet(d, big_d, math.pi, p), 1e-12)

    # Moments ignore the relative phase; the modular momentum does not.
    sm = [abwave.PiecewiseWave.two_packet(1.0, 0.25, al).smooth(0.1, dx=0.1 / 128) for al in (0.0, math.pi / 2)]
    for n in range(1, 5):
        m0, scale, _ = sm[0].moment(n)
        m1, _, _ = sm[1].moment(n)
        assert abs(m0 - m1) <= 1e-6 * max(scale, 1e-300), n
    w0 = abwave.PiecewiseWave.two_packet(1.0, 0.25, 0.0)
    w1 = abwave.PiecewiseWave.two_packet(1.0, 0.25, 1.0)
    close(w0.modular(0.3), w1.modular(0.3), 1e-14)
    close(w1.modular(1.5), cmath.rect(0.5, -1.0), 1e-14)

    # Comb against the boosted top-hat.
    n, big_l, xi = 40, 20 * math.pi, 0.02
    l = big_l / n
    comb = abwave.PiecewiseWave.comb(n, l * (1 - xi), l * xi, l)
    target = abwave.PiecewiseWave.boosted_tophat(big_l, 1.0)
    close(comb.overlap(target).conjugate(), abwave.boosted_overlap_closed_form(n, l, l * (1 - xi), 1.0), 1e-12)
    stair = abwave.PiecewiseWave.comb(n, l * (1 - xi), l * xi, 0.0).with_phases([k * l for k in range(n)])
    close(stair.overlap(comb), 1.0, 1e-12)

    # Sampling, Parseval and free evolution.
    s = w1.sample(1.0 / 64)
    p, dens = s.momentum_density()
    close(sum(dens) * (p[1] - p[0]), 1.0, 1e-9)
    start = abwave.PiecewiseWave.two_packet(1.0, 0.25, math.pi / 2).smooth(0.1, t=0.3)
    e = start.evolve(0.3)
    close(e.evolve(-0.3).overlap(start), 1.0, 1e-9)
    close(e.norm(), 1.0, 1e-9)
    assert len(e) == len(start)

    try:
        abwave.PiecewiseWave.comb(0, 1.0, 0.1, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("n = 0 must be rejected")

    result = abwave.run("verify")
    assert result["passed"], result["checks"]
    with tempfile.TemporaryDirectory() as tmp:
        r = abwave.run("two-packet", {"alpha": "pi/2"}, out=tmp)
        assert r["passed"]
        close(r["metrics"]["peak_final_times_d"], 1.2, 0.05)
        assert (Path(tmp) / "two_packet.csv").exists()
    print(f"abwave {abwave.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
