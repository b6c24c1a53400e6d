import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_skew(g, n, scale=1.0):
    X = g.standard_normal((n, n))
    return scale * (X - X.T) / 2


def random_rotation(g, n):
    Q, R = np.linalg.qr(g.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


def skew_with_angles(g, angles, n):
    from sodegen.skewlin import block_diagonal

    Q = random_rotation(g, n)
    return Q @ block_diagonal(angles, n) @ Q.T


def random_dependent_set(g, p):
    """p unit vectors spanning at most p - 1 dimensions."""
    kind = g.integers(3)
    if kind == 0:
        V = g.standard_normal((p - 1, p))
    elif kind == 1:
        # simplex directions: every |dot| equals 1/(p-1) exactly
        E = np.eye(p) - 1.0 / p
        V = E @ np.linalg.qr(g.standard_normal((p, p)))[0]
        V = np.vstack([V, np.zeros((1, p))])
    else:
        V = g.standard_normal((p - 1, p))
        V[:, -1] = V[:, :-1] @ g.standard_normal(p - 1)
    return V / np.linalg.norm(V, axis=0)


# one PASS/FAIL line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = {}


def record(criterion, ok, detail=""):
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    from sodegen import subspace

    guard = subspace.RANK_GUARD
    if ACCEPTANCE or guard["checked"]:
        ok = guard["fired"] == 0
        ACCEPTANCE["7s"] = (f"criterion  7: {'PASS' if ok else 'FAIL'}  whole suite: independence "
                            f"guard checked {guard['checked']} times, fired {guard['fired']}")
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).rstrip("s")), str(k))):
            terminalreporter.write_line(ACCEPTANCE[key])


def pytest_sessionfinish(session, exitstatus):
    from sodegen import subspace

    if subspace.RANK_GUARD["fired"] and exitstatus == 0:
        session.exitstatus = 1
