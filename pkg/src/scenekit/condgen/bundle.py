"""Conditioning-bundle export and verification.

A bundle is the on-disk package handed to an external video model: one
directory per frame holding the control rasters and final latent, plus the
prompt, the run config, the source trace, and a manifest of content hashes.
Exports are deterministic, so re-exporting identical inputs is byte
identical, manifest included.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from scenekit.render.formats import write_pfm, write_pgm
from scenekit.sim.engine import Trace
from scenekit.sim.traceio import write_trace_json


class BundleError(Exception):
    pass


class InconsistentDims(BundleError):
    """A frame's rasters disagree about dimensions."""


@dataclass(frozen=True)
class BundleFrame:
    """All rasters for one frame, dimensions shared."""

    seg: np.ndarray  # uint8 class ids
    depth: np.ndarray  # float32 meters
    edge: np.ndarray  # uint8 binary
    combined: np.ndarray  # float32 combined control
    latent_final: np.ndarray  # float32 output of the denoising loop


_RASTER_NAMES = ("seg", "depth", "edge", "combined", "latent_final")


def _frame_shape(frame: BundleFrame, index: int) -> tuple[int, ...]:
    shapes = {name: getattr(frame, name).shape for name in _RASTER_NAMES}
    first = shapes["seg"]
    for name, shape in shapes.items():
        if shape != first:
            raise InconsistentDims(
                f"frame {index}: raster {name!r} has shape {shape}, expected {first}"
            )
    return first


def export_bundle(
    frames: list[BundleFrame],
    prompt: str,
    config: dict,
    out_dir: str | Path,
    trace: Trace | None = None,
) -> dict:
    """Write the bundle layout and return its manifest.

    Layout: manifest.json, prompt.txt, config.json, optionally trace.json,
    and frames/NNNNNN/{seg.pgm, depth.pfm, edge.pgm, combined.pfm,
    latent_final.pfm}.  The manifest maps every relative path (except
    itself) to a sha256 hex digest.
    """
    if not frames:
        raise BundleError("bundle needs at least one frame")
    if not prompt:
        raise BundleError("prompt must be non-empty")
    shape = _frame_shape(frames[0], 0)
    for index, frame in enumerate(frames[1:], start=1):
        if _frame_shape(frame, index) != shape:
            raise InconsistentDims(
                f"frame {index}: shape {_frame_shape(frame, index)} differs from frame 0 {shape}"
            )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "prompt.txt").write_text(prompt)
    (out / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    if trace is not None:
        write_trace_json(trace, out / "trace.json")
    for index, frame in enumerate(frames):
        frame_dir = out / "frames" / f"{index:06d}"
        frame_dir.mkdir(parents=True, exist_ok=True)
        write_pgm(frame_dir / "seg.pgm", frame.seg)
        write_pfm(frame_dir / "depth.pfm", frame.depth)
        write_pgm(frame_dir / "edge.pgm", frame.edge)
        write_pfm(frame_dir / "combined.pfm", frame.combined)
        write_pfm(frame_dir / "latent_final.pfm", frame.latent_final)

    manifest = {"version": 1, "files": _hash_tree(out)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _hash_tree(root: Path) -> dict[str, str]:
    files: dict[str, str] = {}
    for path in sorted(root.rglob("*")):
        if path.is_dir() or path.name == "manifest.json":
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        files[path.relative_to(root).as_posix()] = digest
    return files


def verify_bundle(bundle_dir: str | Path) -> list[str]:
    """Re-hash a bundle against its manifest; returns problem descriptions.

    An empty list means the bundle is intact.  Problems cover a missing or
    unreadable manifest, missing files, hash mismatches, and files on disk
    that the manifest does not list.
    """
    root = Path(bundle_dir)
    problems: list[str] = []
    try:
        manifest = json.loads((root / "manifest.json").read_text())
        listed: dict[str, str] = manifest["files"]
    except FileNotFoundError:
        return [f"no manifest.json in {root}"]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        return [f"unreadable manifest in {root}: {e}"]

    for rel, expected in sorted(listed.items()):
        path = root / rel
        if not path.is_file():
            problems.append(f"missing file: {rel}")
            continue
        actual = hashlib.sha256(path.read_bytes()).hexdigest()
        if actual != expected:
            problems.append(f"hash mismatch: {rel}")
    on_disk = set(_hash_tree(root))
    unlisted = on_disk - set(listed)
    problems.extend(f"unlisted file: {rel}" for rel in sorted(unlisted))
    return problems
