
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotconflict import _kernels


def _case(rng, n):
    starts = np.sort(rng.integers(0, 500, n)).astype(np.int64)
    ends = starts + rng.integers(0, 60, n)
    users = rng.integers(0, 3, n).astype(np.int64)
    return starts, ends, users


def _naive(starts, ends, users):
    out = []
    for i in range(len(starts)):
        for j in range(i + 1, len(starts)):
            if starts[j] < ends[i] and users[i] != users[j] and ends[j] > starts[j]:
                out.append((i, j))
    return out


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 80))
def test_numpy_backend_matches_naive(seed, n):
    s, e, u = _case(np.random.default_rng(seed), n)
    ii, jj = _kernels.overlap_pairs_numpy(s, e, u)
    assert sorted(zip(ii.tolist(), jj.tolist())) == _naive(s, e, u)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("seed", range(20))
def test_backends_agree(seed):
    s, e, u = _case(np.random.default_rng(seed), 200)
    a = _kernels.overlap_pairs_numpy(s, e, u)
    b = _kernels.overlap_pairs_numba(s, e, u)
    assert sorted(zip(*map(np.ndarray.tolist, a))) == sorted(zip(*map(np.ndarray.tolist, b)))


def test_empty_input():
    z = np.zeros(0, dtype=np.int64)
    ii, jj = _kernels.overlap_pairs(z, z, z)
    assert len(ii) == len(jj) == 0


def test_env_flag_disables_numba(monkeypatch):
    monkeypatch.setenv(_kernels.DISABLE_ENV, "1")
    assert not _kernels.numba_enabled()
    assert _kernels.backend() == "numpy"
    monkeypatch.delenv(_kernels.DISABLE_ENV)
    assert _kernels.numba_enabled() == _kernels.HAVE_NUMBA


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_benchmark_script_runs(capsys):
    import runpy
    from pathlib import Path

    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_overlaps.py"
    mod = runpy.run_path(str(path))
    mod["main"](["--sizes", "200", "2000", "--repeat", "1"])
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 3 and out[0].split()[0] == "events"
