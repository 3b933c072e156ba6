"""File-backed content store.

One directory per content id holds a meta.json (the commit record) and an
assets/ directory of immutable, digest-named image files. Asset files are
written before meta.json is atomically replaced, so a reader always sees a
fully committed revision: the newest meta it can observe only references
files that already exist. Writers serialize per content id on an RLock.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .clock import Clock, SystemClock
from .errors import ContentExpired, NotFound
from .lifecycle import LifecyclePolicy, ViewState
from .render import ImageAsset, ImageFormat, RenderSpec

KINDS = ("static", "self-destruct", "continuous-edit", "dashboard", "web-reference")
DEFAULT_REVISION_CAP = 20


def new_content_id() -> str:
    """160-bit random, base32 lowercase: the unguessable URL is the read ACL."""
    raw = secrets.token_bytes(20)
    return base64.b32encode(raw).decode("ascii").lower().rstrip("=")


@dataclass
class RevisionRecord:
    revision: int
    text: Optional[str]
    origin: str
    created_at: float
    segments: list[dict] = field(default_factory=list)


@dataclass
class BoundContent:
    """Read view of one content's committed state."""

    content_id: str
    kind: str
    status: str
    spec: RenderSpec
    policy: LifecyclePolicy
    view_state: ViewState
    kt_enabled: bool
    created_at: float
    revisions: list[RevisionRecord]
    next_revision: int
    binding: Optional[dict] = None
    expiry_reason: Optional[str] = None
    token_status: Optional[str] = None
    kt_fraction: float = 0.0
    kt_refreshed_at: Optional[float] = None

    @property
    def live(self) -> bool:
        return self.status == "live"

    @property
    def latest(self) -> RevisionRecord:
        return self.revisions[-1]

    @property
    def revision_count(self) -> int:
        return self.next_revision - 1

    @property
    def segment_count(self) -> int:
        return len(self.latest.segments) if self.revisions else 0

    @property
    def serving_format(self) -> ImageFormat:
        if self.revisions and self.latest.segments:
            return ImageFormat(self.latest.segments[0]["format"])
        return ImageFormat.STATIC


class ContentStore:
    def __init__(
        self,
        data_dir: str | Path,
        clock: Clock | None = None,
        revision_cap: int = DEFAULT_REVISION_CAP,
    ):
        self.root = Path(data_dir)
        self.clock = clock or SystemClock()
        self.revision_cap = max(1, revision_cap)
        (self.root / "contents").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()
        self.salt = self._load_salt()

    # -- paths ---------------------------------------------------------

    def _dir(self, content_id: str) -> Path:
        return self.root / "contents" / content_id

    def _meta_path(self, content_id: str) -> Path:
        return self._dir(content_id) / "meta.json"

    def _asset_dir(self, content_id: str) -> Path:
        return self._dir(content_id) / "assets"

    def _load_salt(self) -> bytes:
        path = self.root / "salt"
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(secrets.token_bytes(16))
            os.replace(tmp, path)
        return path.read_bytes()

    # -- locking and raw meta access ------------------------------------

    def lock(self, content_id: str) -> threading.RLock:
        with self._locks_guard:
            lock = self._locks.get(content_id)
            if lock is None:
                lock = self._locks[content_id] = threading.RLock()
            return lock

    def _read_meta(self, content_id: str) -> dict:
        try:
            return json.loads(self._meta_path(content_id).read_text("utf-8"))
        except FileNotFoundError:
            raise NotFound(f"unknown content {content_id}") from None

    def _write_meta(self, content_id: str, meta: dict) -> None:
        path = self._meta_path(content_id)
        tmp = path.with_name("meta.json.tmp")
        tmp.write_text(json.dumps(meta, separators=(",", ":")), "utf-8")
        os.replace(tmp, path)

    def mutate(self, content_id: str, fn: Callable[[dict], object]):
        """Atomic read-modify-write of one content's meta under its lock."""
        with self.lock(content_id):
            meta = self._read_meta(content_id)
            result = fn(meta)
            self._write_meta(content_id, meta)
            return result

    # -- content lifecycle ----------------------------------------------

    def create(
        self,
        content_id: str,
        kind: str,
        spec: RenderSpec,
        policy: LifecyclePolicy,
        kt_enabled: bool = False,
        binding: Optional[dict] = None,
    ) -> None:
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        with self.lock(content_id):
            path = self._meta_path(content_id)
            if path.exists():
                raise ValueError(f"content {content_id} already exists")
            self._dir(content_id).mkdir(parents=True, exist_ok=True)
            self._asset_dir(content_id).mkdir(exist_ok=True)
            meta = {
                "content_id": content_id,
                "kind": kind,
                "status": "live",
                "spec": spec.to_dict(),
                "policy": policy.to_dict(),
                "kt_enabled": kt_enabled,
                "created_at": self.clock.now(),
                "view": ViewState().to_dict(),
                "token": {"hash": None, "status": "active"},
                "binding": binding,
                "revisions": [],
                "next_revision": 1,
                "expiry_reason": None,
                "kt_fraction": 0.0,
                "kt_refreshed_at": None,
            }
            self._write_meta(content_id, meta)

    def exists(self, content_id: str) -> bool:
        return self._meta_path(content_id).exists()

    def list_ids(self) -> list[str]:
        base = self.root / "contents"
        return sorted(p.name for p in base.iterdir() if (p / "meta.json").exists())

    def load(self, content_id: str) -> BoundContent:
        meta = self._read_meta(content_id)
        return BoundContent(
            content_id=meta["content_id"],
            kind=meta["kind"],
            status=meta["status"],
            spec=RenderSpec.from_dict(meta["spec"]),
            policy=LifecyclePolicy.from_dict(meta["policy"]),
            view_state=ViewState.from_dict(meta["view"]),
            kt_enabled=meta.get("kt_enabled", False),
            created_at=meta["created_at"],
            revisions=[RevisionRecord(**r) for r in meta["revisions"]],
            next_revision=meta["next_revision"],
            binding=meta.get("binding"),
            expiry_reason=meta.get("expiry_reason"),
            token_status=(meta.get("token") or {}).get("status"),
            kt_fraction=meta.get("kt_fraction", 0.0),
            kt_refreshed_at=meta.get("kt_refreshed_at"),
        )

    def token_record(self, content_id: str) -> dict:
        return self._read_meta(content_id).get("token") or {}

    # -- revisions and assets -------------------------------------------

    def _write_asset_file(self, content_id: str, asset: ImageAsset) -> str:
        digest = hashlib.sha256(asset.payload).hexdigest()[:16]
        name = f"{digest}.{asset.format.value}"
        path = self._asset_dir(content_id) / name
        if not path.exists():
            tmp = path.with_name(f"{name}.{threading.get_ident()}.tmp")
            tmp.write_bytes(asset.payload)
            os.replace(tmp, path)
        return name

    def put_revision(
        self,
        content_id: str,
        source_text: Optional[str],
        assets: list[ImageAsset],
        origin: str = "sender",
    ) -> int:
        """Append a revision; readers see either the old or the new one whole."""
        if not assets:
            raise ValueError("a revision needs at least one segment")
        with self.lock(content_id):
            meta = self._read_meta(content_id)
            if meta["status"] != "live":
                raise ContentExpired(f"content {content_id} is {meta['status']}")
            files = [self._write_asset_file(content_id, a) for a in assets]
            revision = meta["next_revision"]
            meta["next_revision"] = revision + 1
            meta["revisions"].append(
                {
                    "revision": revision,
                    "text": source_text,
                    "origin": origin,
                    "created_at": self.clock.now(),
                    "segments": [
                        {
                            "file": name,
                            "format": a.format.value,
                            "width": a.width,
                            "height": a.height,
                            "bytes": a.byte_length,
                            "replaced": a.replaced_glyphs,
                        }
                        for name, a in zip(files, assets)
                    ],
                }
            )
            meta["revisions"] = meta["revisions"][-self.revision_cap :]
            self._write_meta(content_id, meta)
            self._gc_assets(content_id, meta)
            return revision

    def _gc_assets(self, content_id: str, meta: dict) -> None:
        referenced = {
            seg["file"] for rev in meta["revisions"] for seg in rev["segments"]
        }
        for path in self._asset_dir(content_id).iterdir():
            if path.name not in referenced and not path.name.endswith(".tmp"):
                path.unlink(missing_ok=True)

    def _asset_from_record(self, content_id: str, rev: dict, segment_index: int) -> ImageAsset:
        segments = rev["segments"]
        if not 0 <= segment_index < len(segments):
            raise NotFound(f"content {content_id} has no segment {segment_index}")
        seg = segments[segment_index]
        payload = (self._asset_dir(content_id) / seg["file"]).read_bytes()
        return ImageAsset(
            segment_index=segment_index,
            format=ImageFormat(seg["format"]),
            width=seg["width"],
            height=seg["height"],
            payload=payload,
            content_id=content_id,
            revision=rev["revision"],
            created_at=rev["created_at"],
            replaced_glyphs=seg.get("replaced", False),
        )

    def get_latest_asset(self, content_id: str, segment_index: int) -> ImageAsset:
        for _ in range(2):  # one retry if GC raced the meta read
            meta = self._read_meta(content_id)
            if not meta["revisions"]:
                raise NotFound(f"content {content_id} has no committed revision")
            try:
                return self._asset_from_record(content_id, meta["revisions"][-1], segment_index)
            except FileNotFoundError:
                continue
        raise NotFound(f"asset file for {content_id}/{segment_index} disappeared")

    def latest_revision(self, content_id: str) -> RevisionRecord:
        meta = self._read_meta(content_id)
        if not meta["revisions"]:
            raise NotFound(f"content {content_id} has no committed revision")
        return RevisionRecord(**meta["revisions"][-1])

    def purge_source(self, content_id: str) -> None:
        """Strip source text everywhere; keep only the latest revision's files."""

        def apply(meta: dict):
            for rev in meta["revisions"]:
                rev["text"] = None
            meta["purged"] = True

        with self.lock(content_id):
            self.mutate(content_id, apply)
            meta = self._read_meta(content_id)
            keep = (
                {seg["file"] for seg in meta["revisions"][-1]["segments"]}
                if meta["revisions"]
                else set()
            )
            for path in self._asset_dir(content_id).iterdir():
                if path.name not in keep:
                    path.unlink(missing_ok=True)
