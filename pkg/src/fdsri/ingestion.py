"""Release-note and CVE-feed parsing, per-device series, workspace persistence."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import re
import warnings
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .core import (CVE_PATTERN, DeviceModel, FdsriError, PatchEvent,
                   PatchIntervalSeries, Point, SeveritySeries)


class UnknownParser(FdsriError, KeyError):
    pass


class MalformedBlock(FdsriError, ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class SchemaError(FdsriError, ValueError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field


class DuplicateCve(FdsriError, ValueError):
    pass


class CorruptWorkspace(FdsriError, ValueError):
    def __init__(self, file: str, reason: str):
        super().__init__(f"{file}: {reason}")
        self.file = file


class UnknownCveInNote(UserWarning):
    """A release note fixes a CVE that the feed does not know; the fix is dropped."""

    def __init__(self, cve_id: str, device_id: str = ""):
        super().__init__(f"{device_id}: release note fixes unknown {cve_id}")
        self.cve_id = cve_id
        self.device_id = device_id


@dataclass(frozen=True)
class ReleaseNote:
    firmware_version: str
    release_date: date
    fixed_cves: tuple[str, ...] = ()


@dataclass(frozen=True)
class CveFeedEntry:
    cve_id: str
    published: date
    cvss_v2: float
    products: tuple[str, ...] = ()


# --- release notes ---------------------------------------------------------

ReleaseNoteParser = Callable[[str], list[ReleaseNote]]
_PARSERS: dict[str, ReleaseNoteParser] = {}


def register_parser(parser_id: str):
    def deco(fn: ReleaseNoteParser) -> ReleaseNoteParser:
        _PARSERS[parser_id] = fn
        return fn
    return deco


HEADER = re.compile(r"^Firmware\s+(?P<version>\S+)\s+released\s+(?P<date>\S+)\s*$")
FIXED = re.compile(r"^Fixed:\s*(?P<cves>.*)$")


@register_parser("reference")
def parse_reference_notes(text: str) -> list[ReleaseNote]:
    """Vendor-neutral format: ``Firmware <version> released <YYYY-MM-DD>``
    followed by any number of ``Fixed: CVE-..., CVE-...`` lines. Other lines
    inside a block are free text and ignored.
    """
    notes: list[ReleaseNote] = []
    current = None  # [version, date, cves]
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("Firmware"):
            m = HEADER.match(line)
            if not m:
                raise MalformedBlock(lineno, "firmware header without release date")
            try:
                released = date.fromisoformat(m["date"])
            except ValueError:
                raise MalformedBlock(lineno, f"invalid release date {m['date']!r}") from None
            if current:
                notes.append(ReleaseNote(current[0], current[1], tuple(current[2])))
            current = [m["version"], released, []]
            continue
        m = FIXED.match(line)
        if m:
            if current is None:
                raise MalformedBlock(lineno, "Fixed: line outside a firmware block")
            for token in filter(None, (t.strip() for t in m["cves"].split(","))):
                if not CVE_PATTERN.match(token):
                    raise MalformedBlock(lineno, f"not a CVE id: {token!r}")
                if token not in current[2]:
                    current[2].append(token)
    if current:
        notes.append(ReleaseNote(current[0], current[1], tuple(current[2])))
    return notes


def parse_release_notes(text: str, parser_id: str = "reference") -> list[ReleaseNote]:
    try:
        parser = _PARSERS[parser_id]
    except KeyError:
        raise UnknownParser(parser_id) from None
    return parser(text)


# --- CVE feed --------------------------------------------------------------

def _parse_entry(i: int, obj) -> CveFeedEntry:
    where = f"[{i}]"
    if not isinstance(obj, dict):
        raise SchemaError(where, "entry must be an object")
    for key in ("id", "published", "cvss_v2", "products"):
        if key not in obj:
            raise SchemaError(f"{where}.{key}", "missing")
    cve_id = obj["id"]
    if not isinstance(cve_id, str) or not CVE_PATTERN.match(cve_id):
        raise SchemaError(f"{where}.id", f"not a CVE id: {cve_id!r}")
    try:
        published = date.fromisoformat(obj["published"])
    except (TypeError, ValueError):
        raise SchemaError(f"{where}.published", f"not an ISO date: {obj['published']!r}") from None
    score = obj["cvss_v2"]
    if isinstance(score, bool) or not isinstance(score, (int, float)):
        raise SchemaError(f"{where}.cvss_v2", "must be a number")
    if not 0.0 <= score <= 10.0:
        raise SchemaError(f"{where}.cvss_v2", f"{score} outside [0, 10]")
    products = obj["products"]
    if not isinstance(products, list) or not all(isinstance(p, str) for p in products):
        raise SchemaError(f"{where}.products", "must be a list of strings")
    return CveFeedEntry(cve_id, published, float(score), tuple(products))


def parse_cve_feed(text: str) -> list[CveFeedEntry]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise SchemaError("$", "feed must be a JSON array")
    entries = [_parse_entry(i, obj) for i, obj in enumerate(data)]
    seen: set[str] = set()
    for e in entries:
        if e.cve_id in seen:
            raise DuplicateCve(e.cve_id)
        seen.add(e.cve_id)
    return entries


def load_cve_feed(path) -> list[CveFeedEntry]:
    return parse_cve_feed(Path(path).read_text(encoding="utf-8"))


# --- joining ---------------------------------------------------------------

def device_cves(device: DeviceModel, feed: Iterable[CveFeedEntry],
                products: Sequence[str] | None = None) -> list[CveFeedEntry]:
    keys = set(products) if products else {device.product_key}
    return [e for e in feed if keys.intersection(e.products)]


def patch_events(device: DeviceModel, notes: Sequence[ReleaseNote],
                 feed: Sequence[CveFeedEntry],
                 products: Sequence[str] | None = None) -> list[PatchEvent]:
    """One event per device CVE fixed by some note, dated by the earliest fixing note.

    Fixes for CVEs the device's feed entries do not contain are dropped
    with an :class:`UnknownCveInNote` warning.
    """
    known = {e.cve_id: e for e in device_cves(device, feed, products)}
    first_fix: dict[str, date] = {}
    for note in notes:
        for cve in note.fixed_cves:
            if cve not in known:
                warnings.warn(UnknownCveInNote(cve, device.id), stacklevel=2)
                continue
            if cve not in first_fix or note.release_date < first_fix[cve]:
                first_fix[cve] = note.release_date
    events = [PatchEvent(cve, known[cve].published, released) for cve, released in first_fix.items()]
    return sorted(events, key=lambda e: (e.cve_published, e.cve_id))


def build_device_dataset(device: DeviceModel, notes: Sequence[ReleaseNote],
                         feed: Sequence[CveFeedEntry],
                         products: Sequence[str] | None = None
                         ) -> tuple[PatchIntervalSeries, SeveritySeries]:
    """Patch-interval and severity series for one device.

    Product matching is exact on ``vendor:name`` unless explicit product
    keys are given.
    """
    events = patch_events(device, notes, feed, products)
    cves = device_cves(device, feed, products)
    patch = PatchIntervalSeries.from_keyed(
        device.id, [(e.cve_published, e.cve_id, e.interval_days) for e in events])
    sev = SeveritySeries.from_keyed(device.id, [(e.published, e.cve_id, e.cvss_v2) for e in cves])
    return patch, sev


# --- workspace -------------------------------------------------------------

@dataclass
class DatasetWorkspace:
    devices: list[DeviceModel] = field(default_factory=list)
    patch: dict[str, PatchIntervalSeries] = field(default_factory=dict)
    severity: dict[str, SeveritySeries] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)

    def add(self, device: DeviceModel, patch: PatchIntervalSeries, sev: SeveritySeries) -> None:
        if any(d.id == device.id for d in self.devices):
            raise ValueError(f"device {device.id!r} already registered")
        if patch.device_id != device.id or sev.device_id != device.id:
            raise ValueError("series belong to a different device")
        self.devices.append(device)
        self.patch[device.id] = patch
        self.severity[device.id] = sev

    def device(self, device_id: str) -> DeviceModel:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(device_id)


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _format_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _write_csv(path: Path, header: tuple[str, str], points: Sequence[Point]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for p in points:
        w.writerow([p.date.isoformat(), _format_value(p.value)])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def _read_csv(path: Path, header: tuple[str, str]) -> list[Point]:
    name = f"{path.parent.name}/{path.name}"
    if not path.is_file():
        raise CorruptWorkspace(name, "missing")
    rows = list(csv.reader(path.read_text(encoding="utf-8").splitlines()))
    if not rows or tuple(rows[0]) != header:
        raise CorruptWorkspace(name, f"expected header {','.join(header)}")
    points = []
    for i, row in enumerate(rows[1:], 2):
        try:
            points.append(Point(date.fromisoformat(row[0]), float(row[1])))
        except (IndexError, ValueError) as exc:
            raise CorruptWorkspace(name, f"row {i}: {exc}") from None
    return points


def _safe_name(device_id: str) -> str:
    if not device_id or "/" in device_id or "\\" in device_id or device_id in {".", ".."}:
        raise ValueError(f"device id {device_id!r} is not usable as a file name")
    return device_id


def save_workspace(ws: DatasetWorkspace, directory) -> None:
    root = Path(directory)
    (root / "patch").mkdir(parents=True, exist_ok=True)
    (root / "sev").mkdir(parents=True, exist_ok=True)
    devices = [d.to_dict() for d in ws.devices]
    (root / "devices.json").write_text(json.dumps(devices, indent=2) + "\n", encoding="utf-8", newline="")
    for d in ws.devices:
        name = _safe_name(d.id)
        _write_csv(root / "patch" / f"{name}.csv", ("date", "interval_days"), ws.patch[d.id].points)
        _write_csv(root / "sev" / f"{name}.csv", ("date", "cvss"), ws.severity[d.id].points)
    if ws.provenance:
        (root / "provenance.json").write_text(
            json.dumps(ws.provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="")


def load_workspace(directory) -> DatasetWorkspace:
    root = Path(directory)
    dev_file = root / "devices.json"
    if not dev_file.is_file():
        raise CorruptWorkspace("devices.json", "missing")
    try:
        raw = json.loads(dev_file.read_text(encoding="utf-8"))
        devices = [DeviceModel.from_dict(d) for d in raw]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptWorkspace("devices.json", str(exc)) from None
    ws = DatasetWorkspace()
    for d in devices:
        name = _safe_name(d.id)
        try:
            patch = PatchIntervalSeries(d.id, _read_csv(root / "patch" / f"{name}.csv",
                                                        ("date", "interval_days")))
            sev = SeveritySeries(d.id, _read_csv(root / "sev" / f"{name}.csv", ("date", "cvss")))
            ws.add(d, patch, sev)
        except CorruptWorkspace:
            raise
        except ValueError as exc:
            raise CorruptWorkspace(f"{name}.csv", str(exc)) from None
    prov = root / "provenance.json"
    if prov.is_file():
        ws.provenance = json.loads(prov.read_text(encoding="utf-8"))
    return ws
