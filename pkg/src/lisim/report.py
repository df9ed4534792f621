"""CSV/meta emission and figure rendering for sweep results."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__
from .scenario import ResultRow

METRIC_COLUMNS = (
    "N",
    "M",
    "sum_capacity",
    "min_sinr",
    "max_sinr",
    "P_t",
    "P_l",
    "received_power",
    "reference_aperture_power",
    "error",
)


def _format(v) -> str:
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def csv_lines(rows: list[ResultRow]) -> list[str]:
    param_names = list(rows[0].params) if rows else []
    header = ",".join(list(param_names) + list(METRIC_COLUMNS))
    lines = [header]
    for row in rows:
        if list(row.params) != param_names:
            raise ValueError("rows do not share one schema")
        values = [_format(row.params[p]) for p in param_names]
        values += [
            _format(row.n_lis),
            _format(row.n_ue),
            _format(row.sum_capacity),
            _format(row.min_sinr),
            _format(row.max_sinr),
            _format(row.P_t),
            _format(row.P_l),
            _format(row.received_power),
            _format(row.reference_aperture_power),
            row.error.replace(",", ";").replace("\n", " "),
        ]
        lines.append(",".join(values))
    return lines


def emit_csv(rows: list[ResultRow], destination) -> Path:
    path = Path(destination)
    try:
        path.write_text("\n".join(csv_lines(rows)) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def config_hash(config_dict: dict) -> str:
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def emit_meta(destination, config_dict: dict, rows: list[ResultRow]) -> Path:
    path = Path(str(destination) + ".meta.json")
    meta = {
        "config_hash": config_hash(config_dict),
        "build": f"lisim {__version__}",
        "wall_times": [row.wall_time for row in rows],
        "total_wall_time": sum(row.wall_time for row in rows),
    }
    path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return path


def _figure_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".png")


def render_capacity_figure(rows: list[ResultRow], csv_path) -> Path:
    """Sum capacity vs number of users, one line per (spacing, efficiency, coupling)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    curves: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        if row.error:
            continue
        key = (row.params["spacing"], row.params["efficiency"], row.params["ue_coupling"])
        curves.setdefault(key, []).append(row)
    for (d, e_r, coupling), pts in curves.items():
        pts = sorted(pts, key=lambda r: r.params["users"])
        style = "-" if coupling else "--"
        label = f"d={d}$\\lambda$, $e_r$={e_r}, coupling {'on' if coupling else 'off'}"
        ax.plot([p.params["users"] for p in pts], [p.sum_capacity for p in pts], style, label=label)
    ax.set_xlabel("number of users M")
    ax.set_ylabel("sum capacity [bit/s/Hz]")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = _figure_path(csv_path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_received_power_figure(rows: list[ResultRow], csv_path) -> Path:
    """Received power vs element count with the aperture-fraction reference line."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    curves: dict[tuple, list[ResultRow]] = {}
    p_r_ref = None
    for row in rows:
        if row.error:
            continue
        p_r_ref = row.reference_aperture_power
        key = (row.params["efficiency"], row.params["scattering"])
        curves.setdefault(key, []).append(row)
    for (e_r, scattering), pts in curves.items():
        pts = sorted(pts, key=lambda r: r.n_lis)
        style = "-" if scattering else ":"
        label = f"$e_r$={e_r}, scattering {'on' if scattering else 'off'}"
        ax.semilogy([p.n_lis for p in pts], [p.received_power for p in pts], style, label=label)
    if p_r_ref is not None:
        ax.axhline(p_r_ref, color="k", linestyle="--", linewidth=1, label="aperture model $P_R/6$")
    ax.set_xlabel("number of LIS elements N")
    ax.set_ylabel("received power [W]")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = _figure_path(csv_path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_generic_figure(rows: list[ResultRow], csv_path) -> Path | None:
    """Single-parameter sweep plot: sum capacity against the swept value."""
    ok = [r for r in rows if not r.error and r.params]
    if len(ok) < 2:
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    name = list(ok[0].params)[0]
    xs = [r.params[name] for r in ok]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(xs, [r.sum_capacity for r in ok], "o-")
    axes[0].set_xlabel(name)
    axes[0].set_ylabel("sum capacity [bit/s/Hz]")
    axes[0].grid(True, alpha=0.3)
    axes[1].plot(xs, [r.received_power for r in ok], "o-")
    axes[1].set_xlabel(name)
    axes[1].set_ylabel("received power [W]")
    axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    out = _figure_path(csv_path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
