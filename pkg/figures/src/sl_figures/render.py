"""Figure rendering from manifest-described simulation outputs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import (
    CHI_COLUMNS,
    SNAPSHOT_COLUMNS,
    Manifest,
    SchemaError,
    load_manifest,
    read_csv_columns,
)

__all__ = ["FigureJob", "RenderInfo", "render", "KINDS"]

KINDS = ("heatmap", "overlay", "spectrum", "auto")


@dataclass(frozen=True)
class FigureJob:
    """One figure request: manifest in, image file out."""

    manifest_path: Path
    kind: str = "auto"
    output_path: Path = Path("figure.png")
    dpi: int = 150
    cmap: str = "viridis"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class RenderInfo:
    """What was drawn, for callers that verify the output."""

    path: Path
    kind: str
    shape: tuple[int, int] | None = None
    axis_labels: tuple[str, ...] = field(default_factory=tuple)


def _resolve_kind(manifest: Manifest, kind: str) -> str:
    if kind != "auto":
        return kind
    files = manifest.files
    if files.get("chi"):
        return "spectrum"
    overlays = [k for k in files if k.endswith("_overlay") or k == "compression_series"]
    if overlays:
        return "overlay"
    return "heatmap"


def _length_label(manifest: Manifest) -> str:
    return "z  [c/g_p]" if "g_p" in manifest.units else "z"


def _time_label(manifest: Manifest) -> str:
    return "t  [1/g_p]" if "g_p" in manifest.units else "t"


def _render_heatmap(manifest: Manifest, job: FigureJob) -> RenderInfo:
    snaps = manifest.files.get("snapshots", [])
    if len(snaps) < 2:
        raise SchemaError(
            f"{manifest.name}: need at least two snapshots for a heatmap, "
            f"got {len(snaps)}"
        )
    times = manifest.times
    if len(times) != len(snaps):
        raise SchemaError(f"{manifest.name}: times/snapshots length mismatch")
    forward, backward = [], []
    z = None
    for rel in snaps:
        cols = read_csv_columns(manifest.root / rel, SNAPSHOT_COLUMNS)
        z = cols["z"]
        forward.append(np.hypot(cols["reE+"], cols["imE+"]))
        backward.append(np.hypot(cols["reE-"], cols["imE-"]))
    fwd = np.asarray(forward)
    bwd = np.asarray(backward)

    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2), sharey=True)
    extent = (z[0], z[-1], times[0], times[-1])
    for ax, data, title in ((axes[0], fwd, "|E+|"), (axes[1], bwd, "|E-|")):
        peak = data.max() or 1.0
        ax.imshow(
            data / peak, origin="lower", aspect="auto", extent=extent, cmap=job.cmap
        )
        ax.set_title(title)
        ax.set_xlabel(_length_label(manifest))
    axes[0].set_ylabel(_time_label(manifest))
    fig.suptitle(manifest.name)
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=job.dpi)
    plt.close(fig)
    return RenderInfo(
        path=Path(job.output_path),
        kind="heatmap",
        shape=fwd.shape,
        axis_labels=(_length_label(manifest), _time_label(manifest)),
    )


_OVERLAY_STYLES = {
    "width_overlay": ("width_sq", "simulated", "analytic"),
    "ntot_overlay": ("n_tot", "simulated", "analytic"),
    "cavity_overlay": ("n_tot", "simulated", "analytic"),
}


def _render_overlay(manifest: Manifest, job: FigureJob) -> RenderInfo:
    files = manifest.files
    panels = []
    for key in ("width_overlay", "ntot_overlay", "cavity_overlay"):
        if key in files:
            cols = read_csv_columns(manifest.root / files[key], ["t", "simulated", "analytic"])
            panels.append((key, cols))
    if "compression_series" in files:
        cols = read_csv_columns(
            manifest.root / files["compression_series"], ["t", "peak_norm", "ntot_norm"]
        )
        panels.append(("compression_series", cols))
    if not panels:
        raise SchemaError(f"{manifest.name}: no overlay series in the manifest")

    fig, axes = plt.subplots(len(panels), 1, figsize=(7, 3.2 * len(panels)), squeeze=False)
    labels = []
    for ax_row, (key, cols) in zip(axes, panels):
        ax = ax_row[0]
        t = cols["t"]
        if key == "compression_series":
            ax.plot(t, cols["peak_norm"], label="peak density")
            ax.plot(t, cols["ntot_norm"], "--", label="total excitation")
            ax.set_ylabel("normalized")
        else:
            good = np.isfinite(cols["simulated"]) & np.isfinite(cols["analytic"])
            ax.plot(t[good], cols["simulated"][good], label="simulation")
            ax.plot(t[good], cols["analytic"][good], "--", label="analytic")
            ax.set_ylabel(key.replace("_overlay", ""))
            if key == "width_overlay" and good.sum() > 10:
                # long-time behavior in an inset panel
                inset = ax.inset_axes([0.55, 0.12, 0.4, 0.4])
                inset.plot(t[good], cols["simulated"][good])
                inset.plot(t[good], cols["analytic"][good], "--")
                lo = t[good][int(0.5 * good.sum())]
                inset.set_xlim(lo, t[good][-1])
        ax.set_xlabel(_time_label(manifest))
        ax.legend(loc="upper left", fontsize=8)
        labels.append(key)
    fig.suptitle(manifest.name)
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=job.dpi)
    plt.close(fig)
    return RenderInfo(
        path=Path(job.output_path),
        kind="overlay",
        axis_labels=tuple(labels),
    )


def _render_spectrum(manifest: Manifest, job: FigureJob) -> RenderInfo:
    chi_files = manifest.files.get("chi", [])
    if not chi_files:
        raise SchemaError(f"{manifest.name}: manifest lists no susceptibility scans")
    entries = (("re_pp", "im_pp"), ("re_pm", "im_pm"),
               ("re_mp", "im_mp"), ("re_mm", "im_mm"))
    titles = ("chi++", "chi+-", "chi-+", "chi--")
    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True)
    for rel in chi_files:
        cols = read_csv_columns(manifest.root / rel, CHI_COLUMNS)
        tag = Path(rel).stem.replace("chi_", "")
        for ax, (re_key, im_key) in zip(axes.ravel(), entries):
            ax.plot(cols["omega"], cols[re_key], label=f"Re {tag}", lw=1)
            ax.plot(cols["omega"], cols[im_key], "--", label=f"Im {tag}", lw=1)
    for ax, title in zip(axes.ravel(), titles):
        ax.set_title(title)
        ax.set_xlabel("omega")
    axes[0, 0].legend(fontsize=6)
    fig.suptitle(manifest.name)
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=job.dpi)
    plt.close(fig)
    return RenderInfo(path=Path(job.output_path), kind="spectrum",
                      axis_labels=("omega",))


def render(job: FigureJob) -> RenderInfo:
    """Render one figure; raises SchemaError instead of writing a bad image."""
    manifest = load_manifest(job.manifest_path)
    kind = _resolve_kind(manifest, job.kind)
    Path(job.output_path).parent.mkdir(parents=True, exist_ok=True)
    if kind == "heatmap":
        return _render_heatmap(manifest, job)
    if kind == "overlay":
        return _render_overlay(manifest, job)
    return _render_spectrum(manifest, job)
