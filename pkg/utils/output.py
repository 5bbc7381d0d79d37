"""
CSV and SVG writers.

Every writer produces byte-identical files for identical input: floats are
printed with 17 significant digits, the decimal separator is '.', lines end
with '\\n'.
"""
import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({
    "svg.hashsalt": "pmech",
    "font.family": "DejaVu Sans",
    "axes.unicode_minus": False,
})
import matplotlib.pyplot as plt  # noqa: E402

from core.fock import StateVector
from core.parser import monomial_label, monomial_order
from core.states import GaussianKernel, ScanRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])
            count += 1
    logger.info(f"wrote {count} rows to {path}")
    return path


def state_rows(v: StateVector):
    """(q, p, re, im) with p varying fastest."""
    nodes = v.grid.nodes
    for i, q in enumerate(nodes):
        for j, p in enumerate(nodes):
            value = v.samples[i, j]
            yield q, p, value.real, value.imag


def write_state_csv(path: PathLike, v: StateVector) -> Path:
    return write_csv(path, ["q", "p", "re", "im"], state_rows(v))


def trajectory_table(times: Sequence[float], payloads: Sequence) -> tuple[list[str], list[list]]:
    """Header and rows for a trajectory of Symbols or GaussianKernels."""
    if payloads and isinstance(payloads[0], GaussianKernel):
        header = ["t", "q0", "p0", "D_qq", "D_qp", "D_pp"]
        rows = []
        for t, k in zip(times, payloads):
            D = k.quadratic_form
            rows.append([t, k.q0, k.p0, D[0][0], D[0][1], D[1][1]])
        return header, rows

    n = payloads[0].n if payloads else 1
    coefficient_maps = [s.coefficients() for s in payloads]
    monomials = sorted({m for c in coefficient_maps for m in c}, key=monomial_order)
    imaginary = [m for m in monomials if any(c.get(m, 0j).imag != 0 for c in coefficient_maps)]
    header = ["t"] + [monomial_label(m, n) for m in monomials] + [f"im {monomial_label(m, n)}" for m in imaginary]
    rows = []
    for t, coeffs in zip(times, coefficient_maps):
        row = [t] + [coeffs.get(m, 0j).real for m in monomials] + [coeffs.get(m, 0j).imag for m in imaginary]
        rows.append(row)
    return header, rows


def write_trajectory_csv(path: PathLike, trajectory) -> Path:
    header, rows = trajectory_table(trajectory.times, trajectory.payloads)
    return write_csv(path, header, rows)


def write_scan_csv(path: PathLike, rows: Sequence[ScanRow]) -> Path:
    return write_csv(
        path,
        ["h", "value_re", "value_im", "classical_value", "abs_error"],
        ([r.h, r.value.real, r.value.imag, r.classical_value.real, r.abs_error] for r in rows),
    )


def write_resonance_csv(path: PathLike, rows: Sequence[tuple[float, float]]) -> Path:
    return write_csv(path, ["t", "envelope"], rows)


def write_line_svg(path: PathLike, xs: Sequence[float], ys: Sequence[float], xlabel: str, ylabel: str,
                   title: Optional[str] = None) -> Path:
    """Static line chart; the SVG carries no date and fixed element ids."""
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    ax.plot(list(xs), list(ys), linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"wrote plot to {path}")
    return path


__all__ = [
    'fmt', 'write_csv', 'state_rows', 'write_state_csv', 'trajectory_table', 'write_trajectory_csv',
    'write_scan_csv', 'write_resonance_csv', 'write_line_svg',
]
