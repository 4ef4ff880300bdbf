import subprocess
import sys

import pytest


def run_experiment_cli(args):
    """Invoke the experiment runner through its command-line interface."""
    proc = subprocess.run([sys.executable, "-m", "curvmean.cli", *args],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"experiment CLI failed: {proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def modulation_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("csv") / "modulation_s2.csv"
    run_experiment_cli([
        "modulation", "--manifold", "s2", "--theta-grid", "0.2:0.8:0.2",
        "--n-list", "2,5,10", "--trials", "60", "--seed", "29",
        "--out", str(path)])
    return path


@pytest.fixture(scope="session")
def hyperbolic_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("csv") / "modulation_h3.csv"
    run_experiment_cli([
        "modulation", "--manifold", "h3", "--theta", "1,2", "--n-list",
        "10,100", "--trials", "40", "--seed", "31", "--out", str(path)])
    return path


@pytest.fixture(scope="session")
def profile_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("csv") / "profile.csv"
    run_experiment_cli([
        "variance-profile", "--theta", "0.3,1.5707963267948966",
        "--phi-grid", "0:3.141592653589793:0.19634954084936207",
        "--out", str(path)])
    return path
