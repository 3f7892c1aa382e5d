import hashlib
from decimal import Decimal
from pathlib import Path

import pytest

from fairprov import harness
from fairprov.errors import OutputNotEmpty
from fairprov.harness import AlwaysFail, FailKOfN, FailureRule, HarnessConfig, Probability

from oracles import failure_tally


def _digest(root: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_profile_sizes():
    assert (harness.paper_profile().n_configs, harness.paper_profile().n_runs) == (400, 4000)
    assert (harness.default_profile().n_configs, harness.default_profile().n_runs) == (200, 2000)
    assert (harness.demo_profile().n_configs, harness.demo_profile().n_runs) == (2, 4)


def test_paper_failure_count_without_writing():
    assert len(harness.assign_failures(harness.paper_profile())) == 290


def test_demo_summary_matches_tree(demo_tree):
    tally = failure_tally(demo_tree)
    assert tally == {"c_0000": (0, 2), "c_0001": (1, 2)}


def test_generate_is_deterministic(tmp_path):
    a = harness.generate(harness.demo_profile(7), tmp_path / "a")
    b = harness.generate(harness.demo_profile(7), tmp_path / "b", workers=3)
    assert a == b
    assert _digest(tmp_path / "a") == _digest(tmp_path / "b")
    c = harness.generate(harness.demo_profile(8), tmp_path / "c")
    assert _digest(tmp_path / "a") != _digest(tmp_path / "c")
    assert c.n_runs == 4


def test_generate_summary_counts(tmp_path):
    s = harness.generate(harness.demo_profile(), tmp_path / "d")
    assert s.as_dict() == {"n_configs": 2, "n_failed": 1, "n_runs": 4, "total_distance_m": str(s.total_distance_m)}
    assert s.total_distance_m > 0
    assert sum(f for f, _ in failure_tally(tmp_path / "d").values()) == s.n_failed


def test_output_not_empty(tmp_path):
    (tmp_path / "x").write_text("x")
    with pytest.raises(OutputNotEmpty):
        harness.generate(harness.demo_profile(), tmp_path)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"seed": -1},
        {"seed": 2**64},
        {"n_maps": 0},
        {"runs_per_config": 0},
        {"densities": ()},
        {"radii_m": (Decimal("0"),)},
        {"path_length_m": 0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        HarnessConfig(**kwargs)


@pytest.mark.parametrize("mode", [lambda: FailKOfN(3, 2), lambda: FailKOfN(-1), lambda: Probability(1.5)])
def test_failure_mode_validation(mode):
    with pytest.raises(ValueError):
        mode()


def test_rules_claim_in_order():
    cfg = HarnessConfig(
        n_maps=1, paths_per_map=2, runs_per_config=4,
        failure_profile=(
            FailureRule(AlwaysFail(), path=0, message="first"),
            FailureRule(FailKOfN(2), message="second"),
        ),
    )
    failed = harness.assign_failures(cfg)
    first = [k for k, m in failed.items() if m == "first"]
    second = [k for k, m in failed.items() if m == "second"]
    assert len(first) == 2 * 2 * 4
    assert len(second) == 2
    assert not set(first) & set(second)


def test_block_rule_must_divide_pool():
    cfg = HarnessConfig(n_maps=1, paths_per_map=1, runs_per_config=3, failure_profile=(FailureRule(FailKOfN(1, 5)),))
    with pytest.raises(ValueError):
        harness.assign_failures(cfg)


def test_probability_extremes():
    base = dict(n_maps=1, paths_per_map=1, runs_per_config=5)
    assert harness.assign_failures(HarnessConfig(failure_profile=(FailureRule(Probability(0.0)),), **base)) == {}
    assert len(harness.assign_failures(HarnessConfig(failure_profile=(FailureRule(Probability(1.0)),), **base))) == 20


def test_per_config_story_with_twenty_runs():
    failed = harness.assign_failures(harness.paper_profile(runs_per_config=20, paths_per_map=8))
    per_config = {}
    for (c, _), _msg in failed.items():
        per_config[c] = per_config.get(c, 0) + 1
    assert sorted(per_config.values()).count(19) >= 2
