"""SVG figures for experiment reports, rendered byte-reproducibly.

The SVG writer is pinned down so reruns produce identical files: fixed hash
salt for generated element ids, no creation-date metadata, text kept as text
rather than rasterized glyph paths, and an explicit figure size.  Every bar
carries a structured gid so tests can address it inside the SVG.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["emit_histogram_svg", "emit_error_bars_svg"]

_PALETTE = ("#4C72B0", "#DD8452", "#55A165", "#C44E52")

_RC = {
    "svg.hashsalt": "nodeprune",
    "svg.fonttype": "none",
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
}


def _save(fig, out_path) -> None:
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_histogram_svg(counts: dict[str, dict[int, int]], out_path) -> None:
    """Render side-by-side frequency bars of selected node counts per method.

    `counts` maps method name to {node count: frequency}; only positive
    frequencies produce bars.  Bars of one method share a color; each bar's
    gid is "bar_<method>_<node count>".
    """
    if not counts:
        raise ValueError("counts must contain at least one method")
    for method, per_value in counts.items():
        if not per_value:
            raise ValueError(f"method {method!r} has no counts")
        if any(c < 0 for c in per_value.values()):
            raise ValueError(f"method {method!r} has negative counts")

    methods = list(counts)
    values = sorted({v for per_value in counts.values() for v in per_value})
    width = 0.8 / len(methods)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for m, method in enumerate(methods):
            offset = (m - (len(methods) - 1) / 2) * width
            shown = False
            for j, value in enumerate(values):
                height = counts[method].get(value, 0)
                if height <= 0:
                    continue
                bars = ax.bar(
                    j + offset,
                    height,
                    width=width,
                    color=_PALETTE[m % len(_PALETTE)],
                    label=None if shown else method,
                )
                bars[0].set_gid(f"bar_{method}_{value}")
                shown = True
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels([str(v) for v in values])
        ax.set_xlabel("selected hidden nodes")
        ax.set_ylabel("replicates")
        ax.legend()
        _save(fig, out_path)


def emit_error_bars_svg(errors: dict[str, dict[str, float]], out_path) -> None:
    """Render grouped train/test error bars, one group per method.

    `errors` maps method name to {"train": value, "test": value}; each bar's
    gid is "bar_<method>_<train|test>".
    """
    if not errors:
        raise ValueError("errors must contain at least one method")
    for method, pair in errors.items():
        missing = {"train", "test"} - set(pair)
        if missing:
            raise ValueError(f"method {method!r} lacks {sorted(missing)} errors")

    methods = list(errors)
    kinds = ("train", "test")
    width = 0.8 / len(kinds)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for k, kind in enumerate(kinds):
            offset = (k - (len(kinds) - 1) / 2) * width
            for m, method in enumerate(methods):
                bars = ax.bar(
                    m + offset,
                    errors[method][kind],
                    width=width,
                    color=_PALETTE[k % len(_PALETTE)],
                    label=kind if m == 0 else None,
                )
                bars[0].set_gid(f"bar_{method}_{kind}")
        ax.set_xticks(range(len(methods)))
        ax.set_xticklabels(methods)
        ax.set_ylabel("mean squared error")
        ax.legend()
        _save(fig, out_path)
