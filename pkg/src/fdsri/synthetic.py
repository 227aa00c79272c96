"""Seeded generator of device corpora with known patch and severity regimes."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .core import DeviceCategory, DeviceModel
from .ingestion import CveFeedEntry, DatasetWorkspace, ReleaseNote, build_device_dataset
from .scoring import PatchTrend, VulnTrend

PT_LEVEL_DAYS = {PatchTrend.FAST: 8.0, PatchTrend.MEDIUM: 150.0, PatchTrend.SLOW: 1000.0}
VT_LEVEL_CVSS = {VulnTrend.LOW: 2.5, VulnTrend.MEDIUM: 5.4, VulnTrend.HIGH: 8.5}
REGIMES = list(itertools.product(PatchTrend, VulnTrend))


@dataclass
class SyntheticDevice:
    device: DeviceModel
    pt: PatchTrend
    vt: VulnTrend
    notes: list[ReleaseNote]
    cves: list[CveFeedEntry]


def render_notes(notes: list[ReleaseNote]) -> str:
    blocks = []
    for n in notes:
        lines = [f"Firmware {n.firmware_version} released {n.release_date.isoformat()}"]
        if n.fixed_cves:
            lines.append("Fixed: " + ", ".join(n.fixed_cves))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _device(i: int, pt: PatchTrend, vt: VulnTrend, rng: np.random.Generator,
            pt_noise: float, vt_noise: float, cve_counter: itertools.count) -> SyntheticDevice:
    cats = list(DeviceCategory)
    device = DeviceModel(f"dev{i:03d}", "acme", f"model-{i:03d}", cats[i % len(cats)])
    n_cves = int(rng.integers(12, 41))
    n_fixed = int(rng.integers(8, min(30, n_cves) + 1))
    start = date(2012, 1, 1) + timedelta(days=int(rng.integers(0, 4 * 365)))
    gaps = np.maximum(1, rng.exponential(30.0, n_cves).round()).astype(int)
    published = [start + timedelta(days=int(g)) for g in np.cumsum(gaps)]
    sev = np.clip(VT_LEVEL_CVSS[vt] + vt_noise * rng.standard_normal(n_cves), 0.0, 10.0).round(1)
    cves = []
    for pub, s in zip(published, sev):
        cve_id = f"CVE-{pub.year}-{next(cve_counter):05d}"
        cves.append(CveFeedEntry(cve_id, pub, float(s), (device.product_key,)))
    fixed = sorted(rng.choice(n_cves, n_fixed, replace=False))
    by_release: dict[date, list[str]] = {}
    for k in fixed:
        interval = int(round(PT_LEVEL_DAYS[pt] * np.exp(pt_noise * rng.standard_normal())))
        released = cves[k].published + timedelta(days=interval)
        by_release.setdefault(released, []).append(cves[k].cve_id)
    notes = [ReleaseNote(f"{j + 1}.0", d, tuple(ids))
             for j, (d, ids) in enumerate(sorted(by_release.items()))]
    return SyntheticDevice(device, pt, vt, notes, cves)


def generate_corpus(n_devices: int = 60, seed: int = 0, pt_noise: float = 0.35,
                    vt_noise: float = 0.8) -> list[SyntheticDevice]:
    """Devices cycling through all nine (PT, VT) regimes.

    Patch intervals are log-normal around the regime's level and severities
    normal around it, clipped to [0, 10] and rounded to CVSS granularity.
    """
    rng = np.random.default_rng(seed)
    counter = itertools.count(1000)
    return [_device(i, *REGIMES[i % len(REGIMES)], rng, pt_noise, vt_noise, counter)
            for i in range(n_devices)]


def corpus_workspace(corpus: list[SyntheticDevice]) -> DatasetWorkspace:
    ws = DatasetWorkspace()
    for sd in corpus:
        ws.add(sd.device, *build_device_dataset(sd.device, sd.notes, sd.cves))
    return ws


def write_fixtures(corpus: list[SyntheticDevice], directory) -> dict[str, Path]:
    """Write ``devices.json``, ``feed.json`` and ``notes/<device id>.txt`` for ``fdsri ingest``."""
    root = Path(directory)
    (root / "notes").mkdir(parents=True, exist_ok=True)
    devices = [sd.device.to_dict() | {"pt_regime": sd.pt.value, "vt_regime": sd.vt.value}
               for sd in corpus]
    feed = [{"id": e.cve_id, "published": e.published.isoformat(), "cvss_v2": e.cvss_v2,
             "products": list(e.products)} for sd in corpus for e in sd.cves]
    (root / "devices.json").write_text(json.dumps(devices, indent=2) + "\n", encoding="utf-8")
    (root / "feed.json").write_text(json.dumps(feed, indent=1) + "\n", encoding="utf-8")
    for sd in corpus:
        (root / "notes" / f"{sd.device.id}.txt").write_text(render_notes(sd.notes), encoding="utf-8")
    return {"devices": root / "devices.json", "feed": root / "feed.json", "notes": root / "notes"}
