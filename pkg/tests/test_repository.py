"""Version repository and release schedules."""

import numpy as np
import pytest

from mlvsim import domain, repository
from mlvsim.domain import default_models
from mlvsim.engine import substream
from mlvsim.repository import (NonMonotonicRelease, ReleaseSchedule,
                               UnknownModel, VersionRepository, release_times)


@pytest.fixture
def repo():
    return VersionRepository(default_models())


def test_seeded_with_version_zero(repo):
    for mid, model in default_models().items():
        assert repo.latest_version(mid) == 0
        attrs = repo.attributes(mid, 0)
        assert attrs.accuracy == pytest.approx(model.accuracy_start)
        assert attrs.stability == pytest.approx(model.stability_start)


def test_publish_monotonic(repo):
    rec = repo.publish("ML-d1", 1, 100.0)
    assert rec.version == 1 and rec.publish_time_ms == 100.0
    repo.publish("ML-d1", 2, 200.0)
    assert repo.latest_version("ML-d1") == 2
    assert repo.latest_version("ML-d2") == 0  # other models untouched


def test_publish_gap_rejected(repo):
    with pytest.raises(NonMonotonicRelease):
        repo.publish("ML-d1", 2, 100.0)  # skips index 1
    repo.publish("ML-d1", 1, 100.0)
    with pytest.raises(NonMonotonicRelease):
        repo.publish("ML-d1", 1, 200.0)  # re-publish


def test_publish_beyond_v_max():
    repo = VersionRepository(default_models(), v_max=2)
    repo.publish("ML-d1", 1, 1.0)
    repo.publish("ML-d1", 2, 2.0)
    with pytest.raises(domain.UnknownVersion):
        repo.publish("ML-d1", 3, 3.0)


def test_unknown_model(repo):
    with pytest.raises(UnknownModel):
        repo.latest_version("nope")
    with pytest.raises(UnknownModel):
        repo.publish("nope", 1, 0.0)


def test_attributes_only_for_published(repo):
    with pytest.raises(domain.UnknownVersion):
        repo.attributes("ML-d1", 1)
    repo.publish("ML-d1", 1, 5.0)
    assert repo.attributes("ML-d1", 1).accuracy > \
        repo.attributes("ML-d1", 0).accuracy


def test_schedule_validation():
    with pytest.raises(ValueError):
        ReleaseSchedule(mode="weekly")
    with pytest.raises(ValueError):
        ReleaseSchedule(mean_interrelease_ms=0.0)
    with pytest.raises(ValueError):
        ReleaseSchedule(max_version=-1)


def test_periodic_release_times():
    sched = ReleaseSchedule(mode="periodic", mean_interrelease_ms=1000.0,
                            max_version=5)
    assert release_times(sched) == [(1, 1000.0), (2, 2000.0), (3, 3000.0),
                                    (4, 4000.0), (5, 5000.0)]


def test_poisson_release_times_deterministic():
    sched = ReleaseSchedule(mode="poisson", mean_interrelease_ms=100.0,
                            max_version=50)
    a = release_times(sched, substream(1, "release/ML-d1"))
    b = release_times(sched, substream(1, "release/ML-d1"))
    assert a == b
    c = release_times(sched, substream(2, "release/ML-d1"))
    assert a != c
    gaps = np.diff([0.0] + [t for _, t in a])
    assert (gaps > 0).all()
    # Sample mean of 50 exponential gaps lands near the configured mean.
    assert 40.0 < gaps.mean() < 250.0


def test_poisson_requires_rng():
    sched = ReleaseSchedule(mode="poisson")
    with pytest.raises(ValueError):
        release_times(sched, None)


def test_dump_catalog(tmp_path, repo):
    repo.publish("ML-d1", 1, 10.0)
    path = tmp_path / "catalog.csv"
    repo.dump_catalog(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("model,version,publish_time_ms")
    # 6 models seeded at version 0 plus one extra release.
    assert len(lines) == 1 + 6 + 1
    assert any(line.startswith("ML-d1,1,10.0") for line in lines)
