"""
Shared fixtures for the backend tests.
"""
import importlib.util
import os
import sys

import numpy as np
import pytest

BACKEND_DIR = os.path.dirname(os.path.abspath(__file__))
if BACKEND_DIR not in sys.path:
    sys.path.insert(0, BACKEND_DIR)

from api_models import SampleSpec  # noqa: E402
from dyadic import CarlesonSequence, NodeId  # noqa: E402

CLI_PATH = os.path.join(BACKEND_DIR, "..", "cli", "main.py")


def nodes(*paths: str):
    return [NodeId.from_path(path) for path in paths]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def quick_spec():
    return SampleSpec(sample_count=2000, rng_seed=7, tolerance=1e-9)


@pytest.fixture
def f1_sequence():
    """{I, I_+, I_{+-}, I_{++}} on a depth-3 tree."""
    return CarlesonSequence.from_selected(3, nodes("", "+", "+-", "++"))


@pytest.fixture(scope="session")
def cli_module():
    spec = importlib.util.spec_from_file_location("sparse_bellman_cli", CLI_PATH)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module
