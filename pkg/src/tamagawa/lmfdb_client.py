"""Curve data by LMFDB label: vendored fixtures first, then (opt-in) the public JSON API with a disk cache."""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .curve import SingularCurveError, WeierstrassModel
from .localdata import KodairaType, global_tamagawa

log = logging.getLogger(__name__)

LABEL_RE = re.compile(r"^(\d+)\.([a-z]+)(\d+)$")
DEFAULT_BASE_URL = "https://www.lmfdb.org"
ENV_BASE_URL = "TAMAGAWA_LMFDB_URL"
ENV_CACHE_DIR = "TAMAGAWA_CACHE_DIR"
FIXTURE_SCHEMA_VERSION = 1


class LabelError(ValueError):
    pass


class FixtureNotFound(LookupError):
    pass


class TransportError(OSError):
    pass


@dataclass(frozen=True)
class ExpectedLocal:
    kodaira: str | None = None
    cp: int | None = None

    def to_json(self) -> dict:
        out = {}
        if self.kodaira is not None:
            out["kodaira"] = self.kodaira
        if self.cp is not None:
            out["cp"] = self.cp
        return out


@dataclass(frozen=True)
class CurveFixture:
    label: str
    ainvs: tuple[int, int, int, int, int]
    expected_local: dict[int, ExpectedLocal] = field(default_factory=dict)
    expected_global: int | None = None
    isogeny_degree: int | None = None

    def __post_init__(self):
        validate_label(self.label)
        if len(self.ainvs) != 5:
            raise ValueError("a fixture needs 5 a-invariants")
        self.model  # raises on a singular model

    @property
    def model(self) -> WeierstrassModel:
        return WeierstrassModel.from_ainvs(self.ainvs)

    def to_json(self) -> dict:
        expected: dict = {}
        if self.expected_global is not None:
            expected["global_tamagawa"] = self.expected_global
        if self.expected_local:
            expected["local"] = {str(p): e.to_json() for p, e in sorted(self.expected_local.items())}
        out: dict = {"ainvs": list(self.ainvs)}
        if self.isogeny_degree is not None:
            out["isogeny_degree"] = self.isogeny_degree
        if expected:
            out["expected"] = expected
        return out

    @classmethod
    def from_json(cls, label: str, data: dict) -> "CurveFixture":
        exp = data.get("expected", {})
        local = {
            int(p): ExpectedLocal(e.get("kodaira"), e.get("cp")) for p, e in exp.get("local", {}).items()
        }
        return cls(
            label,
            tuple(int(a) for a in data["ainvs"]),
            local,
            exp.get("global_tamagawa"),
            data.get("isogeny_degree"),
        )


def validate_label(label: str) -> tuple[int, str, int]:
    m = LABEL_RE.match(label)
    if not m:
        raise LabelError(f"{label!r} is not a curve label of the form conductor.class.index (e.g. 11.a2)")
    return int(m.group(1)), m.group(2), int(m.group(3))


def load_fixtures(path: str | Path | None = None) -> dict[str, CurveFixture]:
    if path is None:
        text = resources.files("tamagawa").joinpath("data/fixtures.json").read_text()
    else:
        text = Path(path).read_text()
    doc = json.loads(text)
    if doc.get("schema_version") != FIXTURE_SCHEMA_VERSION:
        raise ValueError(f"unsupported fixture schema version {doc.get('schema_version')}")
    return {label: CurveFixture.from_json(label, d) for label, d in doc["curves"].items()}


class LMFDBClient:
    """Thread-safe; at most one request per `min_interval` seconds."""

    def __init__(
        self,
        online: bool = False,
        base_url: str | None = None,
        cache_dir: str | Path | None = None,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 20.0,
        min_interval: float = 1.0,
        fixtures: dict[str, CurveFixture] | None = None,
    ):
        self.online = online
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL) or DEFAULT_BASE_URL).rstrip("/")
        cd = cache_dir or os.environ.get(ENV_CACHE_DIR)
        self.cache_dir = Path(cd) if cd else Path.home() / ".cache" / "tamagawa"
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.min_interval = min_interval
        self.fixtures = load_fixtures() if fixtures is None else fixtures
        self._lock = threading.Lock()
        self._last_request = 0.0

    def _cache_path(self, label: str) -> Path:
        return self.cache_dir / f"{label}.json"

    def _read_cache(self, label: str) -> CurveFixture | None:
        path = self._cache_path(label)
        if not path.exists():
            return None
        try:
            return CurveFixture.from_json(label, json.loads(path.read_text()))
        except (ValueError, KeyError, SingularCurveError) as exc:
            log.warning("ignoring corrupt cache entry %s: %s", path, exc)
            return None

    def _write_cache(self, fx: CurveFixture) -> None:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = self._cache_path(fx.label).with_suffix(".tmp")
        tmp.write_text(json.dumps(fx.to_json(), sort_keys=True))
        tmp.replace(self._cache_path(fx.label))

    def url_for(self, label: str) -> str:
        q = urllib.parse.urlencode({"lmfdb_label": label, "_format": "json", "_fields": "lmfdb_label,ainvs"})
        return f"{self.base_url}/api/ec_curvedata/?{q}"

    def _get(self, url: str) -> dict:
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            with self._lock:
                wait = self._last_request + self.min_interval - time.monotonic()
                if wait > 0:
                    time.sleep(wait)
                self._last_request = time.monotonic()
            try:
                with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                    return json.loads(resp.read().decode())
            except urllib.error.HTTPError as exc:
                if 400 <= exc.code < 500 and exc.code != 429:
                    raise TransportError(f"GET {url}: HTTP {exc.code}") from exc
                last = exc
            except (urllib.error.URLError, OSError, ValueError) as exc:
                last = exc
            if attempt < self.retries:
                time.sleep(self.backoff * 2**attempt)
        raise TransportError(f"GET {url} failed after {self.retries + 1} attempts: {last}")

    def fetch(self, label: str) -> CurveFixture:
        validate_label(label)
        if label in self.fixtures:
            return self.fixtures[label]
        cached = self._read_cache(label)
        if cached is not None:
            return cached
        if not self.online:
            raise FixtureNotFound(f"{label} is not vendored or cached; network access is off")
        doc = self._get(self.url_for(label))
        rows = doc.get("data", [])
        if not rows:
            raise FixtureNotFound(f"{label}: no such curve in the database")
        if rows[0].get("lmfdb_label", label) != label:
            raise TransportError(f"{label}: server answered with {rows[0].get('lmfdb_label')}")
        fx = CurveFixture(label, tuple(int(a) for a in rows[0]["ainvs"]))
        self._write_cache(fx)
        return fx


_default_client: LMFDBClient | None = None


def fetch_curve(label: str, online: bool = False) -> CurveFixture:
    global _default_client
    if online:
        return LMFDBClient(online=True).fetch(label)
    if _default_client is None:
        _default_client = LMFDBClient()
    return _default_client.fetch(label)


@dataclass(frozen=True)
class FixtureVerdict:
    label: str
    c: int
    local: dict[int, dict]
    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "c": self.c,
            "local": {str(p): d for p, d in sorted(self.local.items())},
            "mismatches": list(self.mismatches),
            "ok": self.ok,
        }


def verify_fixture(fx: CurveFixture) -> FixtureVerdict:
    c, breakdown = global_tamagawa(fx.model)
    by_p = {ld.p: ld for ld in breakdown}
    problems = []
    if fx.expected_global is not None and c != fx.expected_global:
        problems.append(f"c = {c}, expected {fx.expected_global}")
    for p, exp in sorted(fx.expected_local.items()):
        ld = by_p.get(p)
        kod = str(ld.kodaira) if ld else "I0"
        cp = ld.cp if ld else 1
        if exp.kodaira is not None and KodairaType.parse(exp.kodaira) != KodairaType.parse(kod):
            problems.append(f"type at {p} is {kod}, expected {exp.kodaira}")
        if exp.cp is not None and cp != exp.cp:
            problems.append(f"c_{p} = {cp}, expected {exp.cp}")
    return FixtureVerdict(fx.label, c, {ld.p: ld.to_json() for ld in breakdown}, tuple(problems))
