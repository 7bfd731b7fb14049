"""Figure rendering for traces and sweep tables.

Figures are written next to the CSV outputs; the CSV stays the data
contract and the images are a convenience for eyeballing results.
"""
from __future__ import annotations

from matplotlib.figure import Figure

from .propagation import RssTrace

_RC = {"figsize": (7.0, 3.2), "dpi": 120}


def plot_trace(trace: RssTrace, path, tau_ms=None, placement=None, window_ms=None, title=None) -> None:
    """RSS versus time with optional drop time and window annotations."""
    fig = Figure(**_RC)
    ax = fig.add_subplot()
    ax.plot(trace.times_ms, trace.samples, lw=0.8, color="k")
    ax.axhline(0.5 * trace.samples[0], color="0.6", ls=":", lw=0.8, label="50% of initial")
    if tau_ms is not None:
        ax.axvline(tau_ms, color="tab:red", lw=1.0, label=r"$\tau$")
    if placement is not None:
        a, b = placement.window
        ax.axvspan(a, b, color="tab:red", alpha=0.15, label="prediction window")
        if window_ms is not None:
            ax.axvspan(placement.T_ms - window_ms, placement.T_ms, color="tab:blue", alpha=0.12, label="observation window")
    ax.set_xlabel("t (ms)")
    ax.set_ylabel("|h'(t)|")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(path)


def plot_sweep(rows, param: str, path) -> None:
    """Accuracy, F1 and AUC (percent) per sweep value, in the order given."""
    fig = Figure(**_RC)
    ax = fig.add_subplot()
    labels = [str(r["value"]) for r in rows]
    x = range(len(rows))
    for key, marker in (("accuracy", "o"), ("f1", "s"), ("auc", "^")):
        ax.plot(x, [100 * r[key] for r in rows], marker=marker, lw=1.0, label=key)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_xlabel(param)
    ax.set_ylabel("%")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(path)
