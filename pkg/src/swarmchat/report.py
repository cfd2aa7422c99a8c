"""Offline run reports: figures plus delimited summaries from persisted files.

Reads a run directory (transcript.jsonl + poses.jsonl + run_config.json) and
writes, next to a re-evaluated metrics.csv and aggregation.csv, two figures:
trajectories over the arena and the mean-distance-to-centroid curve.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness.metrics import aggregation_series, evaluate_run_dir, read_pose_history

ROBOT_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple",
                "tab:brown", "tab:pink", "tab:gray", "tab:olive", "tab:cyan")


def render_report(transcript_path: str | Path, out_dir: str | Path) -> list[Path]:
    transcript_path = Path(transcript_path)
    run_dir = transcript_path.parent
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    snapshot = json.loads((run_dir / "run_config.json").read_text(encoding="utf-8"))
    pose_history = read_pose_history(run_dir / "poses.jsonl")
    metrics = evaluate_run_dir(transcript_path)
    series = aggregation_series(pose_history)
    written: list[Path] = []

    agg_csv = out_dir / "aggregation.csv"
    with agg_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "mean_distance_to_centroid_m"])
        writer.writerows(series)
    written.append(agg_csv)

    metrics_csv = out_dir / "metrics.csv"
    with metrics_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for key, value in metrics.to_dict().items():
            if key == "aggregation":
                continue
            writer.writerow([key, json.dumps(value) if isinstance(value, dict) else value])
    written.append(metrics_csv)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([t for t, _ in series], [d for _, d in series], color="tab:blue")
    ax.set_xlabel("tick")
    ax.set_ylabel("mean distance to centroid [m]")
    ax.set_title(f"{snapshot['scenario']}: swarm spread over time")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    agg_png = out_dir / "aggregation.png"
    fig.savefig(agg_png, dpi=120)
    plt.close(fig)
    written.append(agg_png)

    arena = snapshot["arena"]
    fig, ax = plt.subplots(figsize=(6, 6))
    cell = snapshot["cell_size"]
    for row_idx, row in enumerate(snapshot["grid_rows"]):  # rows are top-down
        y_top = arena["y_max"] - row_idx * cell
        for col_idx, ch in enumerate(row):
            if ch == "i":
                ax.add_patch(plt.Rectangle(
                    (arena["x_min"] + col_idx * cell, y_top - cell), cell, cell,
                    color="crimson", alpha=0.6, lw=0))
    by_robot: dict[int, tuple[list[float], list[float]]] = {}
    for _, poses in pose_history:
        for rid, x, y, _theta in poses:
            by_robot.setdefault(rid, ([], []))
            by_robot[rid][0].append(x)
            by_robot[rid][1].append(y)
    for rid in sorted(by_robot):
        xs, ys = by_robot[rid]
        color = ROBOT_COLORS[(rid - 1) % len(ROBOT_COLORS)]
        ax.plot(xs, ys, color=color, lw=0.8, label=f"robot {rid}")
        ax.plot(xs[0], ys[0], "o", color=color, ms=5)
        ax.plot(xs[-1], ys[-1], "s", color=color, ms=5)
    ax.add_patch(plt.Rectangle((arena["x_min"], arena["y_min"]),
                               arena["x_max"] - arena["x_min"],
                               arena["y_max"] - arena["y_min"],
                               fill=False, color="black", lw=1.2))
    ax.set_xlim(arena["x_min"] - 0.1, arena["x_max"] + 0.1)
    ax.set_ylim(arena["y_min"] - 0.1, arena["y_max"] + 0.1)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"{snapshot['scenario']}: trajectories (o start, □ end)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    traj_png = out_dir / "trajectories.png"
    fig.savefig(traj_png, dpi=120)
    plt.close(fig)
    written.append(traj_png)
    return written
