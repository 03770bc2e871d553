# -*- coding: utf-8 -*-
"""
End-to-end ordering of methods on a reduced sixteen-client experiment.

Every cell trains the tiny model on the bundled digits over the toy channel,
so these tests take a while; deselect them with -m "not slow".
"""

import pytest

from d2d_topology.models import DataConfig, ExperimentConfig
from d2d_topology.sweep import run_sweep

pytestmark = pytest.mark.slow

DEGREES = (2, 4, 10)
BASELINES = ("stl_fw", "random_regular", "fully_connected")
SEEDS = (0, 1)

SKEWS = {
    "dirichlet": DataConfig(dataset="digits", partition="dirichlet", dirichlet_alpha=0.1),
    "rotation": DataConfig(dataset="digits", partition="rotation"),
}


@pytest.fixture(scope="module", params=sorted(SKEWS))
def tables(request, tmp_path_factory):
    """Learned-method and baseline summary tables for one kind of skew."""
    cfg = ExperimentConfig(num_clients=16, rounds=100, data=SKEWS[request.param])
    out = tmp_path_factory.mktemp(request.param)
    learned = run_sweep(cfg, ["tolrdul"], list(DEGREES), list(SEEDS), out / "tolrdul")
    baselines = run_sweep(cfg, list(BASELINES), [2], list(SEEDS), out / "baselines")
    assert learned.failed == 0
    assert baselines.failed == 0
    return learned.table, baselines.table


class TestEndToEndOrdering:
    """Test the direction of the accuracy and latency comparisons."""

    def test_sparser_than_fully_connected(self, tables):
        """Test the learned topology has strictly lower mean latency than fully connected mixing."""
        learned, baselines = tables
        full = baselines.get("fully_connected", 2).mean_latency
        for degree in DEGREES:
            assert learned.get("tolrdul", degree).mean_latency < full

    def test_latency_grows_with_degree(self, tables):
        """Test mean latency is nondecreasing in the degree budget."""
        learned, _ = tables
        latencies = [learned.get("tolrdul", degree).mean_latency for degree in DEGREES]
        assert latencies == sorted(latencies)

    @pytest.mark.xfail(
        strict=False,
        reason="the learned topology stays close to the identity under strong skew; see the known gap in DESIGN.md",
    )
    def test_accuracy_matches_baselines(self, tables):
        """Test the learned topology is within half an accuracy point of every baseline."""
        learned, baselines = tables
        accuracy = learned.get("tolrdul", 2).final_test_acc
        for method in BASELINES:
            assert accuracy >= baselines.get(method, 2).final_test_acc - 0.005

    def test_every_cell_completes(self, tables):
        """Test every seed of every degree completed."""
        learned, _ = tables
        for degree in DEGREES:
            assert learned.get("tolrdul", degree).completed_seeds == len(SEEDS)
