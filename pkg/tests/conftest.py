import os
import subprocess
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FASHION = os.path.join(ROOT, "data", "fashion_mnist_20k.csv.gz")

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

# filled by test_acceptance; printed in the terminal summary
ACCEPTANCE = {}


def fashion_path():
    """Path of the 20k Fashion-MNIST CSV, fetching it once if needed; None if unavailable."""
    if os.path.exists(FASHION):
        return FASHION
    script = os.path.join(ROOT, "demos", "00_fetch_fashion_mnist.py")
    try:
        subprocess.run([sys.executable, script], check=True, timeout=600, capture_output=True)
    except (subprocess.SubprocessError, OSError):
        return None
    return FASHION if os.path.exists(FASHION) else None


@pytest.fixture(scope="session")
def fashion20k():
    from clusterreps import load_dense_csv

    path = fashion_path()
    if path is None:
        pytest.skip("Fashion-MNIST export not available (run demos/00_fetch_fashion_mnist.py)")
    return load_dense_csv(path)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_collection_modifyitems(items):
    # anything touching the Fashion export counts as slow
    for item in items:
        if "fashion20k" in getattr(item, "fixturenames", ()):
            item.add_marker(pytest.mark.slow)
