"""Result persistence: atomic CSV tables, the run manifest, the pass/fail
summary, and the convergence figures rendered next to the tables."""

from __future__ import annotations

import csv
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np


@dataclass
class Check:
    """One invariant margin: ``passed`` is value-vs-tolerance in the given
    direction ('>=' lower bounds, '<=' upper bounds)."""

    name: str
    value: float
    tolerance: float
    direction: str = ">="

    @property
    def passed(self) -> bool:
        if self.direction == ">=":
            return bool(self.value >= self.tolerance)
        return bool(self.value <= self.tolerance)

    def row(self) -> list:
        return [self.name, self.value, self.direction, self.tolerance,
                "pass" if self.passed else "FAIL"]


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv_atomic(path: str, header: list[str], rows: list[list]) -> None:
    """UTF-8, LF line endings, RFC-style quoting, temp-file + rename."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format_cell(c) for c in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(out_dir: str, payload: dict) -> str:
    import platform

    import matplotlib
    import scipy

    import wzwlab

    payload = dict(payload)
    payload["versions"] = {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
        "wzwlab": wzwlab.__version__,
    }
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "manifest.json")
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def write_summary(out_dir: str, checks: list[Check], stream=None) -> bool:
    stream = stream or sys.stdout
    rows = [c.row() for c in checks]
    write_csv_atomic(os.path.join(out_dir, "summary.csv"),
                     ["check", "value", "direction", "tolerance", "status"],
                     rows)
    ok = True
    for c in checks:
        status = "pass" if c.passed else "FAIL"
        print(f"[{status}] {c.name}: value={c.value:.6g} "
              f"{c.direction} tol={c.tolerance:.6g}", file=stream)
        ok = ok and c.passed
    return ok


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def render_figure(out_dir: str, kind: str, tables: dict) -> str | None:
    """One PNG per experiment next to the CSVs (Agg backend)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if kind == "envelope-converge" and "convergence" in tables:
            _, rows = tables["convergence"]
            ks = [r[0] for r in rows]
            ax.loglog(ks, [r[1] for r in rows], "o-", label="sup Cauchy diff")
            ax.loglog(ks, [r[2] for r in rows], "s--", label="WZW residual sup")
            ax.set_xlabel("k")
            ax.legend()
            ax.set_title("quantized envelope convergence")
        elif kind in ("geodesic",) and "error_profile" in tables:
            _, rows = tables["error_profile"]
            ax.semilogy([r[0] for r in rows],
                        [max(r[1], 1e-18) for r in rows], "o-")
            ax.set_xlabel("t")
            ax.set_ylabel("|solver - geodesic|")
            ax.set_title("solver vs closed-form geodesic")
        elif kind in ("harmonic2d", "hym-annulus") and "residual_history" in tables:
            _, rows = tables["residual_history"]
            ax.semilogy([r[0] for r in rows], [r[1] for r in rows], "-")
            ax.set_xlabel("sweep")
            ax.set_ylabel("residual")
            ax.set_title(f"{kind} relaxation history")
        elif kind == "distance-subharmonicity" and "distance" in tables:
            _, rows = tables["distance"]
            ax.plot([r[0] for r in rows], [r[1] for r in rows], "o-")
            ax.set_xlabel("t")
            ax.set_ylabel("d(V1, V2)")
            ax.set_title("distance between envelopes (subharmonic)")
        elif kind == "proportionality" and "pairs" in tables:
            _, rows = tables["pairs"]
            n = int(np.sqrt(len(rows)))
            defect = np.array([r[3] for r in rows]).reshape(n, n)
            im = ax.imshow(defect, origin="lower", extent=(0, 1, 0, 1))
            fig.colorbar(im, ax=ax, label="|d - |s-t| d01|")
            ax.set_title("geodesic proportionality defect")
        elif kind == "min-lem-audit" and "samples" in tables:
            _, rows = tables["samples"]
            ax.scatter([r[4] for r in rows], [r[3] for r in rows], s=8)
            lo = min(min(r[4] for r in rows), min(r[3] for r in rows))
            hi = max(max(r[4] for r in rows), max(r[3] for r in rows))
            ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
            ax.set_xlabel("rhs (Schur bound)")
            ax.set_ylabel("lhs (disc Laplacian)")
            ax.set_title("disc bound audit")
        elif kind == "duality" and "forward" in tables:
            _, rows = tables["forward"]
            ax.bar(range(len(rows)), [r[1] for r in rows])
            ax.set_xticks(range(len(rows)))
            ax.set_xticklabels([str(r[0]) for r in rows], rotation=20,
                               fontsize=7)
            ax.axhline(0.0, color="k", lw=0.8)
            ax.set_ylabel("dual subharmonicity defect")
            ax.set_title("forward Legendre duality")
        elif kind == "invariance-audit" and "rotations" in tables:
            _, rows = tables["rotations"]
            ax.plot([r[0] for r in rows], [r[1] for r in rows], "o-")
            ax.set_xlabel("rotation (grid steps)")
            ax.set_ylabel("defect gap")
            ax.set_title("pullback invariance under rotations")
        else:
            plt.close(fig)
            return None
        path = os.path.join(out_dir, f"fig_{kind}.png")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        return path
    finally:
        plt.close(fig)
