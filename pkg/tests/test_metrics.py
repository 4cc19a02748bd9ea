import math

import numpy as np
import pytest

from regpath.baselines import WsConfig, ws_sweep
from regpath.continuation import ContinuationConfig, continuation_run
from regpath.core import FrontArchive, ParetoPoint, Trace
from regpath.data import Dataset, load_iris, minibatches
from regpath.metrics import ReferencePoint, budget_report, default_reference, hypervolume_2d, max_gap
from regpath.mpg import SolverConfig, mpg_solve
from regpath.nn import IRIS_ARCH, MlpArchitecture, mlp_init
from regpath.optim import AdamConfig
from regpath.problems import MlpProblem

from conftest import IRIS_CSV, needs_iris


def archive_of(pairs):
    arch = FrontArchive()
    for k, (f1, g2) in enumerate(pairs):
        arch.append(ParetoPoint(theta=np.zeros(1), f1_train=float(f1), g2=float(g2), index=k), "initial")
    return arch


def monte_carlo_hv(pairs, ref, rng, samples=400_000):
    pts = np.asarray(pairs, dtype=float)
    lo = pts.min(axis=0)
    box = np.array([ref.f1_ref, ref.g2_ref]) - lo
    u = lo + rng.random((samples, 2)) * box
    covered = np.zeros(samples, dtype=bool)
    for f1, g2 in pts:
        covered |= (u[:, 0] >= f1) & (u[:, 1] >= g2)
    return covered.mean() * box.prod()


def naive_gap(pairs):
    pts = np.asarray(pairs, dtype=float)
    keep = [i for i, p in enumerate(pts)
            if not any(np.all(q <= p) and np.any(q < p) for q in pts)]
    nd = pts[keep]
    span = nd.max(axis=0) - nd.min(axis=0)
    span[span == 0] = 1.0
    z = (nd - nd.min(axis=0)) / span
    z = z[np.lexsort((z[:, 0], z[:, 1]))]
    return max(math.dist(a, b) for a, b in zip(z, z[1:]))


REF = ReferencePoint(2.0, 2.0)


def test_hypervolume_examples():
    assert hypervolume_2d(archive_of([(1, 1)]), REF) == 1.0
    assert hypervolume_2d(archive_of([(0, 0)]), REF) == 4.0
    assert hypervolume_2d(archive_of([(0, 1), (1, 0)]), REF) == 3.0
    assert hypervolume_2d(FrontArchive(), REF) == 0.0


def test_hypervolume_examples_monte_carlo(rng):
    for pairs, exact in (([(1, 1)], 1.0), ([(0, 1), (1, 0)], 3.0)):
        assert monte_carlo_hv(pairs, REF, rng) == pytest.approx(exact, rel=0.01)


def test_hypervolume_ignores_dominated_points():
    base = [(0, 1), (1, 0)]
    assert hypervolume_2d(archive_of(base + [(1, 1), (1.5, 0.5)]), REF) == hypervolume_2d(archive_of(base), REF)


def test_hypervolume_grows_with_new_nondominated_point():
    base = [(0, 1.5), (1.5, 0)]
    assert hypervolume_2d(archive_of(base + [(0.5, 0.5)]), REF) > hypervolume_2d(archive_of(base), REF)


def test_hypervolume_rejects_bad_reference():
    with pytest.raises(ValueError, match="index=1"):
        hypervolume_2d(archive_of([(1, 1), (2.5, 0)]), REF)
    with pytest.raises(ValueError):
        hypervolume_2d(archive_of([(2, 1)]), REF)


def test_hypervolume_matches_monte_carlo(rng):
    for _ in range(20):
        g2 = np.sort(rng.random(8))
        f1 = np.sort(rng.random(8))[::-1]
        pairs = np.column_stack([f1, g2])
        pairs = np.vstack([pairs, rng.random((4, 2))])
        ref = default_reference(archive_of(pairs))
        exact = hypervolume_2d(archive_of(pairs), ref)
        assert monte_carlo_hv(pairs, ref, rng) == pytest.approx(exact, rel=0.01)


def test_default_reference():
    ref = default_reference(archive_of([(1, 0), (0, 2)]), archive_of([(3, 1)]))
    assert ref.f1_ref == pytest.approx(3.3) and ref.g2_ref == pytest.approx(2.2)
    # a zero maximum is moved off the front
    assert default_reference(archive_of([(1, 0)])).g2_ref > 0


def test_max_gap_examples():
    assert max_gap(archive_of([(1, 0), (0, 1)])) == pytest.approx(math.sqrt(2))
    k = 5
    line = [(1 - t, t) for t in np.linspace(0, 1, k)]
    assert max_gap(archive_of(line)) == pytest.approx(math.sqrt(2) / (k - 1))
    # scaling of either axis does not matter
    assert max_gap(archive_of([(100 * a, b / 100) for a, b in line])) == pytest.approx(math.sqrt(2) / (k - 1))


def test_max_gap_errors():
    with pytest.raises(ValueError):
        max_gap(archive_of([(1, 1)]))
    with pytest.raises(ValueError):
        max_gap(archive_of([(1, 1), (2, 2)]))


def test_max_gap_matches_naive_and_permutation(rng):
    for _ in range(30):
        t = rng.random(12)
        pairs = np.column_stack([1 - t, t]) + 0.2 * rng.random((12, 2))
        expected = naive_gap(pairs)
        assert max_gap(archive_of(pairs)) == pytest.approx(expected, abs=1e-12)
        assert max_gap(archive_of(pairs[rng.permutation(12)])) == pytest.approx(expected, abs=1e-12)


@needs_iris
def test_full_batch_budget_counts_samples():
    ds = load_iris(IRIS_CSV)
    p = MlpProblem(IRIS_ARCH, ds)
    trace = Trace()
    mpg_solve(p, mlp_init(IRIS_ARCH, 0.1, 0), SolverConfig(step_h=0.1, max_iter=10, direction_tol=1e-300),
              trace=trace)
    assert budget_report(trace)["gradient_evals"] == 10
    assert budget_report(trace)["samples_touched"] == 10 * 150


def tiny_problem():
    rng = np.random.default_rng(0)
    ds = Dataset(rng.standard_normal((40, 3)), rng.integers(0, 2, 40), "tiny", n_classes=2)
    return MlpProblem(MlpArchitecture((3, 4, 2)), ds), ds


def test_weighted_sum_budget():
    p, _ = tiny_problem()
    arch = ws_sweep(p, WsConfig(n_lambda=4, iters_per_lambda=50), mlp_init(p.arch, 0.1, 0))
    assert budget_report(arch.trace) == {"gradient_evals": 200, "prox_evals": 0, "samples_touched": 200 * 40}


def test_continuation_budget():
    p, ds = tiny_problem()
    cfg = ContinuationConfig(n_cont=44, init_iters=500, predictor_iters=7, corrector_iters=20, eta=0.1,
                             direction="toward_loss", adam=AdamConfig(lr=0.01))
    arch = continuation_run(p, mlp_init(p.arch, 0.1, 0), cfg, batches=minibatches(ds, 8, 0))
    assert len(arch) == 44
    assert arch.trace.gradient_evals == 500 + 43 * (7 + 20) == 1661
    assert arch.trace.samples_touched == 8 * 1661
    assert arch[-1].grad_evals_cum == 1661
