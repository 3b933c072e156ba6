import threading
from concurrent.futures import ThreadPoolExecutor

import pytest

from latebind.clock import ManualClock
from latebind.errors import ContentExpired, NotFound
from latebind.lifecycle import LifecyclePolicy
from latebind.render import DEFAULT_SPEC, render_static
from latebind.storage import ContentStore, new_content_id


@pytest.fixture()
def store(data_dir):
    return ContentStore(data_dir, clock=ManualClock())


def make_content(store, kind="static") -> str:
    cid = new_content_id()
    store.create(cid, kind, DEFAULT_SPEC, LifecyclePolicy())
    return cid


def assets_for(text):
    return render_static(text, DEFAULT_SPEC)


def test_content_ids_are_url_safe_and_long():
    ids = {new_content_id() for _ in range(500)}
    assert len(ids) == 500
    for cid in ids:
        assert len(cid) == 32
        assert cid == cid.lower()
        assert cid.isalnum()


def test_first_revision_is_one(store):
    cid = make_content(store)
    assert store.put_revision(cid, "v1", assets_for("v1")) == 1
    assert store.load(cid).revision_count == 1


def test_latest_asset_tracks_commits(store):
    cid = make_content(store)
    store.put_revision(cid, "first", assets_for("first"))
    store.put_revision(cid, "second", assets_for("second"))
    asset = store.get_latest_asset(cid, 0)
    assert asset.revision == 2
    assert asset.payload == assets_for("second")[0].payload
    assert asset.content_id == cid


def test_unknown_ids_and_segments(store):
    with pytest.raises(NotFound):
        store.get_latest_asset("nope", 0)
    cid = make_content(store)
    store.put_revision(cid, "x", assets_for("x"))
    with pytest.raises(NotFound):
        store.get_latest_asset(cid, 5)
    with pytest.raises(NotFound):
        store.load("nope")


def test_put_on_non_live_content_fails(store):
    cid = make_content(store)
    store.put_revision(cid, "x", assets_for("x"))
    store.mutate(cid, lambda meta: meta.__setitem__("status", "expired"))
    with pytest.raises(ContentExpired):
        store.put_revision(cid, "y", assets_for("y"))


def test_concurrent_puts_get_distinct_ordinals(store):
    cid = make_content(store)
    results = []

    def writer(i):
        results.append(store.put_revision(cid, f"text {i}", assets_for(f"text {i}")))

    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(writer, range(16)))

    assert sorted(results) == list(range(1, 17))
    final = store.load(cid)
    assert final.latest.revision == 16


def test_reads_never_tear_under_interleaved_writes(store):
    """Every observed asset must byte-match a fully committed revision."""
    cid = make_content(store)
    texts = [f"revision number {i}" for i in range(12)]
    committed = {assets_for(t)[0].payload for t in texts}
    store.put_revision(cid, texts[0], assets_for(texts[0]))

    seen = []
    stop = threading.Event()

    def reader():
        while not stop.is_set():
            seen.append(store.get_latest_asset(cid, 0).payload)

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    for text in texts[1:]:
        store.put_revision(cid, text, assets_for(text))
    stop.set()
    for t in threads:
        t.join()

    assert seen
    for payload in seen:
        assert payload in committed


def test_monotone_revisions_across_reads(store):
    cid = make_content(store)
    observed = []
    for i in range(5):
        store.put_revision(cid, f"t{i}", assets_for(f"t{i}"))
        observed.append(store.get_latest_asset(cid, 0).revision)
    assert observed == sorted(observed)


def test_restart_serves_latest_committed_revision(store, data_dir):
    cid = make_content(store)
    store.put_revision(cid, "a", assets_for("a"))
    store.put_revision(cid, "b", assets_for("b"))

    reopened = ContentStore(data_dir, clock=ManualClock())
    asset = reopened.get_latest_asset(cid, 0)
    assert asset.revision == 2
    assert asset.payload == assets_for("b")[0].payload
    assert reopened.salt == store.salt


def test_revision_cap_drops_old_assets(data_dir):
    store = ContentStore(data_dir, clock=ManualClock(), revision_cap=3)
    cid = make_content(store)
    for i in range(6):
        store.put_revision(cid, f"text {i}", assets_for(f"text {i}"))
    content = store.load(cid)
    assert content.revision_count == 6
    assert [r.revision for r in content.revisions] == [4, 5, 6]
    files = list((data_dir / "contents" / cid / "assets").iterdir())
    assert len(files) == 3


def test_purge_removes_text_and_old_files(store, data_dir):
    cid = make_content(store)
    store.put_revision(cid, "secret text", assets_for("secret text"))
    store.put_revision(cid, None, assets_for("gone"))
    store.purge_source(cid)
    store.purge_source(cid)  # idempotent

    content = store.load(cid)
    assert all(r.text is None for r in content.revisions)
    files = list((data_dir / "contents" / cid / "assets").iterdir())
    assert len(files) == 1
    raw = (data_dir / "contents" / cid / "meta.json").read_bytes()
    assert b"secret text" not in raw

    with pytest.raises(NotFound):
        store.purge_source("missing")
