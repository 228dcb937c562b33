import logging

import pytest

from errors import ConfigError
from potentials import Harmonic, PotentialSpec, RandomFourier, generate_random, write_potential
from systems import (
    R1_DOMINANT_RANGE,
    R2_SECOND_MINIMUM,
    SeedVerdict,
    bundled_potential,
    choose_r1,
    classify_seed,
    resolve_potential,
)


def _verdict(seed, r1_like, r2_like, second=0.0):
    return SeedVerdict(seed, (0.9, 0.1), (1.0 - second, second), 0.5, r1_like, r2_like)


def test_reference_forms():
    assert resolve_potential("harmonic:0.3") == PotentialSpec(Harmonic(0.3))
    assert resolve_potential("random:7:0.5:15") == generate_random(7, 0.5, 15.0)
    ho = resolve_potential("bundled:ho")
    assert ho.variant == Harmonic(0.2)
    assert ho.label() == "ho"


@pytest.mark.parametrize("reference", ["bundled:zz", "harmonic:-1", "harmonic:x", "random:x:0.5:15", "random:1:0.5"])
def test_bad_references(reference):
    with pytest.raises(ConfigError):
        resolve_potential(reference)


def test_file_references_resolve_relative_to_base(tmp_path):
    spec = PotentialSpec(Harmonic(0.7), name="wide")
    write_potential(tmp_path / "wide.pot", spec)
    assert resolve_potential("wide.pot", tmp_path) == spec
    assert resolve_potential(str(tmp_path / "wide.pot")) == spec
    with pytest.raises(ConfigError):
        resolve_potential("absent.pot", tmp_path)


def test_classify_seed_reports_sorted_weights(coarse_grid):
    verdict = classify_seed(3, coarse_grid)
    assert verdict.seed == 3
    for weights in (verdict.r1_weights, verdict.r2_weights):
        assert list(weights) == sorted(weights, reverse=True)
        assert sum(weights) == pytest.approx(1.0, abs=1e-3)
    low, high = R1_DOMINANT_RANGE
    expected_r1 = len(verdict.r1_weights) > 1 and low <= verdict.r1_weights[0] <= high and verdict.dipole > 1e-6
    assert verdict.r1_like == expected_r1
    assert verdict.r2_like == (verdict.r2_second_weight >= R2_SECOND_MINIMUM)


def test_choose_first_accepted_seed():
    consumed = []

    def stream():
        for v in (_verdict(1, False, True), _verdict(2, True, True), _verdict(3, True, True)):
            consumed.append(v.seed)
            yield v

    assert choose_r1(stream(), 10).seed == 2
    assert consumed == [1, 2]


def test_choose_falls_back_to_most_delocalized_mirror(caplog):
    verdicts = [_verdict(1, True, False, 0.01), _verdict(2, True, False, 0.04), _verdict(3, False, True, 0.3)]
    with caplog.at_level(logging.WARNING, logger="AdiabatSystems"):
        assert choose_r1(verdicts, 3).seed == 2
    assert "seed 2" in caplog.text


def test_choose_without_candidates():
    with pytest.raises(ConfigError) as info:
        choose_r1([_verdict(1, False, True)], 1)
    assert info.value.fields == ("ADIABAT_SCAN_SEEDS",)


@pytest.mark.slow
def test_bundled_random_systems():
    r1 = bundled_potential("r1")
    r2 = bundled_potential("r2")
    assert isinstance(r1.variant, RandomFourier) and r1.variant.scale == 0.5
    assert r2.variant.scale == pytest.approx(0.1)
    assert r2.variant.a == r1.variant.a
    assert r2.variant.b == tuple(-c for c in r1.variant.b)
    verdict = classify_seed(r1.seed)
    assert verdict.r1_like
    assert (r1.name, r2.name) == ("r1", "r2")
