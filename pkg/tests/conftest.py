import json

import pytest

from mmfeat import kernels
from mmfeat.registry import registry_from_dict

BACKENDS = kernels.available_backends()

# criterion number -> (title, passed); filled in by test_acceptance
ACCEPTANCE_RESULTS = {}


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    """Each available kernel backend module in turn."""
    return BACKENDS[request.param]


@pytest.fixture
def write_registry(tmp_path):
    def _write(models, name="registry.json"):
        path = tmp_path / name
        path.write_text(json.dumps({"models": models}))
        return path

    return _write


@pytest.fixture
def make_registry():
    return lambda models: registry_from_dict({"models": models})


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}")
