"""Figure analogues rendered from skinchain scenario CSVs.

This package is strictly a consumer of the numeric component's documented
CSV schemas; the only numerics performed here are axis transforms
(1/L abscissa, log ordinate) and re-plotting of fit parameters computed
upstream.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

PROFILE_COLUMNS = ("L", "M", "phi", "deltaL", "deltaR", "bc", "site", "density")
SCALAR_COLUMNS = ("L", "M", "phi", "deltaL", "deltaR", "bc", "name", "value")

_NUMERIC = {"L": int, "M": int, "phi": float, "deltaL": float,
            "deltaR": float, "site": int, "density": float, "value": float}


class SchemaError(Exception):
    """A CSV does not match the documented schema; lists every problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def load_table(path: Path, columns) -> list[dict]:
    """Read a CSV and coerce the documented columns, aborting on mismatch."""
    path = Path(path)
    errors = []
    if not path.exists():
        raise SchemaError([f"{path}: file not found"])
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError([f"{path}: missing column {c!r}" for c in missing])
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            row = {}
            for c in columns:
                conv = _NUMERIC.get(c, str)
                try:
                    row[c] = conv(raw[c])
                except (TypeError, ValueError):
                    errors.append(f"{path}: line {lineno}: column {c!r} "
                                  f"is not {conv.__name__}: {raw[c]!r}")
                    break
            else:
                rows.append(row)
    if errors:
        raise SchemaError(errors)
    return rows


@dataclass(frozen=True)
class FigureSpec:
    """One figure: its inputs, axis transforms, and output path."""

    figure: str
    inputs: dict = field(hash=False)  # role -> CSV path
    x_transform: str = "linear"       # "linear" | "inverse_L"
    y_scale: str = "linear"           # "linear" | "log"
    out_path: Path = Path("figure.png")


# figure id -> (scenario CSV roles, x transform, y scale)
FIGURES = {
    "fig2a": ({"profiles": "profiles.csv"}, "linear", "linear"),
    "fig2b": ({"scalars": "imbalance.csv"}, "linear", "linear"),
    "fig3a": ({"scalars": "delta_imbalance.csv", "fit": "fit.csv"},
              "linear", "log"),
    "fig3b": ({"scalars": "delta_mean_energy.csv"}, "inverse_L", "linear"),
    "fig4a": ({"scalars": "fig4_observables.csv"}, "inverse_L", "linear"),
    "fig4b": ({"scalars": "fig4_observables.csv"}, "inverse_L", "log"),
    "fig4c": ({"scalars": "fig4_observables.csv"}, "inverse_L", "linear"),
    "fig4d": ({"scalars": "fig4_observables.csv"}, "inverse_L", "linear"),
}

# which scalar `name` each fig4 panel plots
_FIG4_NAMES = {"fig4a": "boundary_ratio", "fig4b": "boundary_ratio",
               "fig4c": "imbalance", "fig4d": "mean_imbalance"}


def figure_spec(figure: str, data_dir, out_dir) -> FigureSpec:
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; "
                         f"expected one of {', '.join(sorted(FIGURES))}")
    roles, x_transform, y_scale = FIGURES[figure]
    inputs = {role: Path(data_dir) / name for role, name in roles.items()}
    return FigureSpec(figure=figure, inputs=inputs, x_transform=x_transform,
                      y_scale=y_scale,
                      out_path=Path(out_dir) / f"{figure}.png")


def transform_x(values, transform: str):
    """The only abscissa transforms the renderer performs."""
    if transform == "linear":
        return list(values)
    if transform == "inverse_L":
        return [1.0 / v for v in values]
    raise ValueError(f"unknown x transform {transform!r}")


def _fixed_style():
    return plt.rc_context({
        "font.family": "DejaVu Sans",
        "font.size": 10.0,
        "figure.dpi": 100,
        "savefig.dpi": 150,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.markersize": 5,
    })


def _scalar_rows(spec, role, name):
    rows = load_table(spec.inputs[role], SCALAR_COLUMNS)
    return [r for r in rows if r["name"] == name]


def _plot_fig2a(spec, ax):
    rows = load_table(spec.inputs["profiles"], PROFILE_COLUMNS)
    keys = sorted({(r["L"], r["phi"]) for r in rows})
    for L, phi in keys:
        pts = sorted((r["site"], r["density"]) for r in rows
                     if r["L"] == L and r["phi"] == phi)
        ax.plot([x for x, _ in pts], [y for _, y in pts], "o-",
                label=f"L={L}, phi={phi:g}")
    ax.set_xlabel("site j")
    ax.set_ylabel("steady-state density n_j")


def _plot_fig2b(spec, ax):
    rows = _scalar_rows(spec, "scalars", "imbalance")
    for L in sorted({r["L"] for r in rows}):
        pts = sorted((r["phi"], r["value"]) for r in rows if r["L"] == L)
        ax.plot([x for x, _ in pts], [y for _, y in pts], "o-", label=f"L={L}")
    ax.set_xlabel("phi")
    ax.set_ylabel("imbalance I")


def _plot_fig3a(spec, ax):
    rows = _scalar_rows(spec, "scalars", "delta_I")
    pts = sorted((r["L"], abs(r["value"])) for r in rows)
    Ls = [x for x, _ in pts]
    ax.plot(Ls, [y for _, y in pts], "o", label="|dI|")
    # fit parameters computed upstream; re-plotted, never recomputed
    fit = {r["name"]: r["value"]
           for r in load_table(spec.inputs["fit"], SCALAR_COLUMNS)}
    if {"slope", "intercept"} <= fit.keys():
        ax.plot(Ls, [math.exp(fit["intercept"] + fit["slope"] * L) for L in Ls],
                "-", label=f"fit: slope {fit['slope']:.3f}")
    ax.set_xlabel("L")
    ax.set_ylabel("|dI|")


def _plot_fig3b(spec, ax):
    rows = _scalar_rows(spec, "scalars", "delta_Ebar")
    pts = sorted((r["L"], r["value"]) for r in rows)
    xs = transform_x([x for x, _ in pts], spec.x_transform)
    ax.plot(xs, [y for _, y in pts], "o-", label="dEbar")
    ax.set_xlabel("1/L")
    ax.set_ylabel("dEbar")
    ax.set_xlim(left=0.0)


def _plot_fig4(spec, ax):
    rows = _scalar_rows(spec, "scalars", _FIG4_NAMES[spec.figure])
    for dR in sorted({r["deltaR"] for r in rows}):
        pts = sorted((r["L"], r["value"]) for r in rows if r["deltaR"] == dR)
        xs = transform_x([x for x, _ in pts], spec.x_transform)
        label = "deltaR = 0" if dR == 0 else f"deltaR = {dR:g}"
        ax.plot(xs, [y for _, y in pts], "o-", label=label)
    ax.set_xlabel("1/L")
    ax.set_ylabel(_FIG4_NAMES[spec.figure].replace("_", " "))
    ax.set_xlim(left=0.0)


_PANELS = {
    "fig2a": _plot_fig2a,
    "fig2b": _plot_fig2b,
    "fig3a": _plot_fig3a,
    "fig3b": _plot_fig3b,
    "fig4a": _plot_fig4,
    "fig4b": _plot_fig4,
    "fig4c": _plot_fig4,
    "fig4d": _plot_fig4,
}


def render(spec: FigureSpec) -> Path:
    """Validate inputs, draw the figure, and write a deterministic PNG."""
    with _fixed_style():
        fig, ax = plt.subplots(figsize=(4.8, 3.6))
        try:
            _PANELS[spec.figure](spec, ax)
            if spec.y_scale == "log":
                ax.set_yscale("log")
            ax.set_title(spec.figure)
            ax.legend(loc="best")
            fig.tight_layout()
            spec.out_path.parent.mkdir(parents=True, exist_ok=True)
            # strip the library version string so identical inputs give
            # byte-identical files across patch releases too
            fig.savefig(spec.out_path, metadata={"Software": "skinchain-plots"})
        finally:
            plt.close(fig)
    return spec.out_path
