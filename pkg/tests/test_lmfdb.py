import json
import re
import threading
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path

import pytest

from helpers import validate
from tamagawa.curve import SingularCurveError
from tamagawa.lmfdb_client import (
    CurveFixture,
    ExpectedLocal,
    FixtureNotFound,
    LabelError,
    LMFDBClient,
    TransportError,
    fetch_curve,
    load_fixtures,
    validate_label,
    verify_fixture,
)
from tamagawa.localdata import KodairaType

CITING_TEXT = Path(__file__).resolve().parent.parent / "paper.md"

# extra curves served by the fake server: label -> ainvs
REMOTE = {"11.a1": [0, -1, 1, -10, -20], "37.a1": [0, 0, 1, -1, 0], "14.a1": [1, 0, 1, 4, -6]}


class FakeLMFDB(BaseHTTPRequestHandler):
    """Serves REMOTE; per-label failure plans: a list of status codes returned before success."""

    plans: dict[str, list[int]] = {}
    hits: list[tuple[str, float]] = []
    lock = threading.Lock()

    def do_GET(self):
        q = urllib.parse.parse_qs(urllib.parse.urlparse(self.path).query)
        label = q.get("lmfdb_label", [""])[0]
        with self.lock:
            self.hits.append((label, time.monotonic()))
            plan = self.plans.get(label, [])
            status = plan.pop(0) if plan else 200
        if status != 200:
            self.send_response(status)
            self.end_headers()
            return
        rows = [{"lmfdb_label": label, "ainvs": REMOTE[label]}] if label in REMOTE else []
        body = json.dumps({"data": rows}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def server():
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), FakeLMFDB)
    t = threading.Thread(target=httpd.serve_forever, daemon=True)
    t.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}"
    httpd.shutdown()


@pytest.fixture
def fake(server, tmp_path):
    FakeLMFDB.plans = {}
    FakeLMFDB.hits = []
    return LMFDBClient(online=True, base_url=server, cache_dir=tmp_path, backoff=0.01, min_interval=0.0, timeout=5)


class TestLabels:
    @pytest.mark.parametrize("label", ["11.a2", "130050.gu1", "20449.c1"])
    def test_valid(self, label):
        validate_label(label)

    @pytest.mark.parametrize("label", ["not-a-label", "11a2", "11.A2", "11.a", ".a1", "11.a2 "])
    def test_invalid(self, label):
        with pytest.raises(LabelError):
            validate_label(label)
        with pytest.raises(LabelError):
            fetch_curve(label)


class TestOfflineFixtures:
    def test_every_label_in_the_text_is_vendored(self):
        if not CITING_TEXT.exists():
            pytest.skip("source text not present")
        cited = set(re.findall(r"\b\d+\.[a-z]+\d+\b", CITING_TEXT.read_text()))
        assert cited, "no labels found"
        assert cited <= set(load_fixtures())
        for label in cited:
            fetch_curve(label)  # no network needed

    def test_examples(self):
        assert fetch_curve("121.a2").expected_global == 1
        assert fetch_curve("50.b4").expected_local[2].cp == 15

    @pytest.mark.parametrize("label", sorted(load_fixtures()))
    def test_verify_matches(self, label):
        v = verify_fixture(fetch_curve(label))
        assert v.ok, v.mismatches
        validate("fixture_verdict", v.to_json())

    @pytest.mark.parametrize(
        "label,p,kodaira,cp", [("49.a1", 7, "III*", 2), ("162.c2", 2, "I21", 21), ("27.a1", 3, "II*", 1)]
    )
    def test_cited_local_types(self, label, p, kodaira, cp):
        loc = verify_fixture(fetch_curve(label)).local[p]
        assert KodairaType.parse(loc["kodaira"]) == KodairaType.parse(kodaira)
        assert loc["cp"] == cp

    def test_mismatch_is_reported(self):
        fx = CurveFixture("11.a2", (0, -1, 1, 0, 0), {11: ExpectedLocal("I2", 2)}, expected_global=5)
        v = verify_fixture(fx)
        assert not v.ok and len(v.mismatches) == 3

    def test_fixture_file_matches_schema(self):
        doc = json.loads(resources.files("tamagawa").joinpath("data/fixtures.json").read_text())
        validate("fixtures", doc)

    def test_unknown_label_offline(self, tmp_path):
        client = LMFDBClient(cache_dir=tmp_path)
        with pytest.raises(FixtureNotFound):
            client.fetch("11.a1")

    def test_singular_fixture_rejected(self):
        with pytest.raises(SingularCurveError):
            CurveFixture("1.a1", (0, 0, 0, 0, 0))


class TestCache:
    @pytest.mark.parametrize("label", sorted(load_fixtures()))
    def test_round_trip(self, label):
        fx = load_fixtures()[label]
        assert CurveFixture.from_json(label, json.loads(json.dumps(fx.to_json()))) == fx

    def test_cache_serves_offline(self, tmp_path):
        fx = CurveFixture("37.a1", (0, 0, 1, -1, 0))
        LMFDBClient(cache_dir=tmp_path)._write_cache(fx)
        assert LMFDBClient(cache_dir=tmp_path).fetch("37.a1") == fx
        assert not list(tmp_path.glob("*.tmp"))

    def test_env_var_cache_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TAMAGAWA_CACHE_DIR", str(tmp_path))
        assert LMFDBClient().cache_dir == tmp_path

    def test_corrupt_cache_ignored(self, tmp_path):
        (tmp_path / "37.a1.json").write_text("{not json")
        with pytest.raises(FixtureNotFound):
            LMFDBClient(cache_dir=tmp_path).fetch("37.a1")


class TestOnline:
    def test_fetch_and_cache(self, fake, tmp_path):
        fx = fake.fetch("37.a1")
        assert fx.ainvs == (0, 0, 1, -1, 0)
        assert (tmp_path / "37.a1.json").exists()
        fake.online = False
        assert fake.fetch("37.a1") == fx
        assert len(FakeLMFDB.hits) == 1

    def test_vendored_labels_never_hit_the_network(self, fake):
        fake.fetch("121.a2")
        assert FakeLMFDB.hits == []

    def test_retries_server_errors(self, fake):
        FakeLMFDB.plans["11.a1"] = [500, 503, 429]
        assert fake.fetch("11.a1").ainvs == (0, -1, 1, -10, -20)
        assert len(FakeLMFDB.hits) == 4

    def test_retries_exhausted(self, fake):
        FakeLMFDB.plans["11.a1"] = [500] * 10
        with pytest.raises(TransportError, match="4 attempts"):
            fake.fetch("11.a1")
        assert len(FakeLMFDB.hits) == 4

    def test_client_error_is_not_retried(self, fake):
        FakeLMFDB.plans["11.a1"] = [403]
        with pytest.raises(TransportError, match="403"):
            fake.fetch("11.a1")
        assert len(FakeLMFDB.hits) == 1

    def test_backoff_grows(self, server, tmp_path):
        FakeLMFDB.plans = {"14.a1": [500, 500, 500]}
        FakeLMFDB.hits = []
        client = LMFDBClient(online=True, base_url=server, cache_dir=tmp_path, backoff=0.05, min_interval=0.0)
        client.fetch("14.a1")
        times = [t for _, t in FakeLMFDB.hits]
        gaps = [b - a for a, b in zip(times, times[1:])]
        assert gaps[0] >= 0.05 and gaps[1] >= 0.1 and gaps[2] >= 0.2

    def test_unknown_label_online(self, fake):
        with pytest.raises(FixtureNotFound):
            fake.fetch("999.z9")

    def test_unreachable_host(self, tmp_path):
        client = LMFDBClient(online=True, base_url="http://127.0.0.1:9", cache_dir=tmp_path, retries=1, backoff=0.01)
        with pytest.raises(TransportError):
            client.fetch("11.a1")

    def test_concurrent_fetches_respect_rate_cap(self, server, tmp_path):
        FakeLMFDB.plans = {}
        FakeLMFDB.hits = []
        client = LMFDBClient(online=True, base_url=server, cache_dir=tmp_path, min_interval=0.1)
        with ThreadPoolExecutor(3) as pool:
            got = list(pool.map(client.fetch, sorted(REMOTE)))
        assert [fx.ainvs for fx in got] == [tuple(REMOTE[k]) for k in sorted(REMOTE)]
        times = sorted(t for _, t in FakeLMFDB.hits)
        assert len(times) == 3
        assert all(b - a >= 0.09 for a, b in zip(times, times[1:]))
