"""Smoke test for the qbsim Python bindings.

Build and install the extension first:

    pip install maturin
    maturin develop --release -m crates/py/Cargo.toml

then run ``python python/smoke_test.py``.
"""

import cmath
import math

import qbsim


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    eta = qbsim.round_trip_transmissivity(100.0, 2 * math.pi * 5e9, 0.01, 10.0, 10.0)
    assert close(eta, 1.811639599627927e-8, 1e-12), eta

    b = qbsim.siso_beam_splitter(0.25, math.pi / 2)
    assert close(abs(b[0][0]), 0.5, 1e-15)
    assert close(abs(b[0][1]), math.sqrt(0.75), 1e-15)

    snrs = [qbsim.siso_snr(1e-3, 0.01, 20.0, r) for r in ("classical", "guha", "zhuang")]
    assert snrs[1] == 2 * snrs[0] and snrs[2] == 4 * snrs[0]
    assert close(qbsim.chernoff_ber(1e-9, math.log(2) / 1e-9), 0.5, 1e-12)
    assert close(qbsim.modes_for_ber(1e-9, 1e-3), 6.907755278982137e9, 1e-12)

    ch = qbsim.Channel.double_rayleigh(4, 4, 2, 1e-3, seed=7)
    assert ch.rank == 2 and ch.shape == (4, 4)
    assert ch.reconstruction_residual() < 1e-10
    assert ch.emimo_snr(0.01, 20.0) >= ch.pmimo_snr(0.01, 20.0)

    det = qbsim.Channel.deterministic(8, 8, 8, 0.01)
    assert close(det.trace_hh, 0.64, 1e-12)

    mesh = qbsim.Mesh.decompose(ch.u)
    assert len(mesh) == 6
    rebuilt = mesh.reconstruct()
    err = max(abs(x - y) for rr, ur in zip(rebuilt, ch.u) for x, y in zip(rr, ur))
    assert err < 1e-10, err

    sweep = qbsim.run_rank_sweep(8, 8, list(range(1, 9)), 0.01, 0.5, 5.0, channel="deterministic")
    rows = sweep.results()
    e8 = next(r for r in rows if r["rank"] == 8 and r["protocol"] == "e-mimo")
    assert close(e8["mean_log_gain"], math.log10(64), 1e-12)
    assert len(sweep.summary_csv().splitlines()) == 17

    fading = qbsim.run_rank_sweep(4, 4, [1, 2], 1e-4, 0.01, 20.0, trials=200, seed=3, threads=2)
    again = qbsim.run_rank_sweep(4, 4, [1, 2], 1e-4, 0.01, 20.0, trials=200, seed=3, threads=1)
    assert fading.raw_csv() == again.raw_csv()

    report = qbsim.oracle(count=16, seed=1)
    assert report["emimo_max_cross_branch"] <= 1e-10
    assert report["pmimo_max_received_deviation"] <= 1e-9

    try:
        qbsim.Channel([[2.0 + 0j]]).emimo_snr(0.01, 20.0)
    except ValueError:
        pass
    else:
        raise AssertionError("non-physical channel accepted")

    assert cmath.isclose(qbsim.Channel([[0.5j]]).entries[0][0], 0.5j)
    print("qbsim", qbsim.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
