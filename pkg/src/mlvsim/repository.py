"""Version repository: the catalog of published releases per model.

Every model starts at version 0. Releases arrive through a schedule
(periodic or Poisson) and must increase the index by exactly one.
"""

from dataclasses import dataclass

from . import domain, kernels


class RepositoryError(Exception):
    pass


class UnknownModel(RepositoryError):
    pass


class NonMonotonicRelease(RepositoryError):
    pass


@dataclass(frozen=True)
class ReleaseRecord:
    model_id: str
    version: int
    publish_time_ms: float
    attributes: domain.VersionAttributes


@dataclass(frozen=True)
class ReleaseSchedule:
    """Release stream parameters for one model.

    mode "periodic" spaces releases exactly mean_interrelease_ms apart;
    "poisson" draws exponential gaps from a dedicated substream.
    max_version bounds how many releases are ever generated.
    """

    mode: str = "periodic"
    mean_interrelease_ms: float = 1000.0
    max_version: int = domain.V_MAX

    def __post_init__(self):
        if self.mode not in ("periodic", "poisson"):
            raise ValueError(f"unknown release mode {self.mode!r}")
        if self.mean_interrelease_ms <= 0:
            raise ValueError("mean_interrelease_ms must be > 0")
        if self.max_version < 0:
            raise ValueError("max_version must be >= 0")


class VersionRepository:
    """Append-only release catalog with O(1) latest-version lookup."""

    def __init__(self, models, curve_mode="geometric", v_max=domain.V_MAX,
                 minors_per_major=domain.MINORS_PER_MAJOR):
        self._models = dict(models)
        self._curve_mode = curve_mode
        self._v_max = v_max
        self._minors_per_major = minors_per_major
        self._records = {}
        self._latest = {}
        for mid in self._models:
            self._latest[mid] = 0
            self._records[mid] = [self._make_record(mid, 0, 0.0)]

    def _make_record(self, model_id, version, time_ms):
        attrs = domain.attributes_of(self._models[model_id], version,
                                     mode=self._curve_mode, v_max=self._v_max,
                                     minors_per_major=self._minors_per_major)
        return ReleaseRecord(model_id=model_id, version=version,
                             publish_time_ms=time_ms, attributes=attrs)

    def _check_model(self, model_id):
        if model_id not in self._models:
            raise UnknownModel(model_id)

    def publish(self, model_id, version, time_ms):
        self._check_model(model_id)
        expected = self._latest[model_id] + 1
        if version != expected:
            raise NonMonotonicRelease(
                f"{model_id}: expected release index {expected}, got {version}")
        domain.check_version(version, self._v_max)
        record = self._make_record(model_id, version, time_ms)
        self._records[model_id].append(record)
        self._latest[model_id] = version
        return record

    def latest_version(self, model_id):
        self._check_model(model_id)
        return self._latest[model_id]

    def attributes(self, model_id, version):
        self._check_model(model_id)
        records = self._records[model_id]
        if not (0 <= version < len(records)):
            raise domain.UnknownVersion(
                f"{model_id}: version {version} not published")
        return records[version].attributes

    def records(self, model_id):
        self._check_model(model_id)
        return list(self._records[model_id])

    def dump_catalog(self, path):
        """Write one line per release: model, version, publish time, attributes."""
        with open(path, "w") as fh:
            fh.write("model,version,publish_time_ms,accuracy,stability,"
                     "service_time_ms\n")
            for mid in sorted(self._records):
                for rec in self._records[mid]:
                    a = rec.attributes
                    fh.write(f"{mid},{rec.version},{rec.publish_time_ms!r},"
                             f"{a.accuracy!r},{a.stability!r},"
                             f"{a.mean_service_time_ms!r}\n")


def release_times(schedule, rng=None):
    """Materialize the publish times for one model's release stream.

    Returns a list of (version, time_ms) for versions 1..max_version.
    Poisson mode needs the stream's own random generator.
    """
    times = []
    t = 0.0
    for version in range(1, schedule.max_version + 1):
        if schedule.mode == "periodic":
            t += schedule.mean_interrelease_ms
        else:
            if rng is None:
                raise ValueError("poisson release schedule needs an rng")
            t += kernels.exp_interval(rng.random(), schedule.mean_interrelease_ms)
        times.append((version, t))
    return times
