"""Session fixtures: a memoized end-to-end run cache and the acceptance
criteria report printed at the end of the session."""

import numpy as np
import pytest

from lfdrender import harness

_RUNS = {}
ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def run_root(tmp_path_factory):
    return tmp_path_factory.mktemp("runs")


@pytest.fixture(scope="session")
def run_cache(run_root):
    """Factory running each harness configuration at most once per session.

    Desk-scale renders are shared between the coverage, quality, mipmapping,
    and speed criteria, so they are keyed by their full configuration.
    """

    def get(scene, renderer, recon="none", frames=1, workers=4, mipmap=True,
            supersample="none", seed=0, views=None, view_res=None):
        key = (scene, renderer, recon, frames, workers, mipmap, supersample,
               seed, views, tuple(view_res) if view_res else None)
        if key not in _RUNS:
            parts = [f"{len(_RUNS):02d}", scene, renderer, recon, f"f{frames}",
                     f"w{workers}"]
            if not mipmap:
                parts.append("nomip")
            if views is not None:
                parts.append(f"v{views}")
            out = run_root / "-".join(parts)
            cfg = harness.RunConfig(
                scene=scene, out_dir=str(out), renderer=renderer, recon=recon,
                frames=frames, workers=workers, mipmap=mipmap,
                supersample=supersample, seed=seed, views=views,
                view_res=view_res)
            _RUNS[key] = harness.run(cfg)
        return _RUNS[key]

    return get


@pytest.fixture
def criterion():
    """Record one acceptance-criterion verdict and assert it."""

    def record(num, name, ok, detail=""):
        ok = bool(ok)
        ACCEPTANCE_RESULTS.append((num, name, ok, detail))
        line = f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" [{detail}]"
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        line = f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
