"""Run metrics, CSV/manifest emission and cross-run comparison."""

from __future__ import annotations

import csv
import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .. import __version__
from ..errors import UsageError
from ..federation import FederationRound, round_log_header, round_log_row

MA_WINDOW = 20
NOT_REACHED = "not reached"


def moving_average(values: Sequence[float], window: int = MA_WINDOW) -> np.ndarray:
    """Trailing mean over the last ``window`` entries (fewer at the start)."""
    x = np.asarray(values, dtype=np.float64)
    return np.array([np.mean(x[max(0, i + 1 - window) : i + 1]) for i in range(len(x))])


@dataclass
class RunMetrics:
    rewards: np.ndarray  # (episodes, n_agents)
    rounds: list[FederationRound] = field(default_factory=list)
    wall_clock: np.ndarray | None = None  # seconds per episode

    @property
    def n_agents(self) -> int:
        return self.rewards.shape[1]

    @property
    def episodes(self) -> int:
        return self.rewards.shape[0]

    @property
    def global_reward(self) -> np.ndarray:
        return self.rewards.mean(axis=1)

    @property
    def global_moving_average(self) -> np.ndarray:
        return moving_average(self.global_reward)


def version_string() -> str:
    """``v<package version>`` plus ``git describe`` output when run from a checkout."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"v{__version__}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def _fmt(x: float) -> str:
    return repr(float(x))


class MetricsWriter:
    """Appends metrics to the run directory as episodes complete."""

    def __init__(self, out_dir: str | Path, n_agents: int):
        self.out_dir = Path(out_dir)
        self.n_agents = n_agents
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._files = {}
        self._writers = {}
        headers = {
            "rewards.csv": ["episode", "agent_id", "reward"],
            "global.csv": ["episode", "mean_reward", "moving_average"],
            "rounds.csv": round_log_header(n_agents),
            "timing.csv": ["episode", "wall_clock_s"],
        }
        for name, header in headers.items():
            fh = open(self.out_dir / name, "w", newline="")
            self._files[name] = fh
            self._writers[name] = csv.writer(fh, lineterminator="\n")
            self._writers[name].writerow(header)
        self._history: list[float] = []

    def episode(self, episode: int, rewards: Sequence[float], wall_clock: float | None = None) -> None:
        for k, r in enumerate(rewards):
            self._writers["rewards.csv"].writerow([episode, k, _fmt(r)])
        mean = float(np.mean(rewards))
        self._history.append(mean)
        ma = float(np.mean(self._history[-MA_WINDOW:]))
        self._writers["global.csv"].writerow([episode, _fmt(mean), _fmt(ma)])
        if wall_clock is not None:
            self._writers["timing.csv"].writerow([episode, f"{wall_clock:.6f}"])
        for name in ("rewards.csv", "global.csv", "timing.csv"):
            self._files[name].flush()

    def round(self, r: FederationRound) -> None:
        self._writers["rounds.csv"].writerow(round_log_row(r))
        self._files["rounds.csv"].flush()

    def close(self) -> None:
        for fh in self._files.values():
            fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_manifest(out_dir: str | Path, manifest: dict) -> Path:
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def emit_metrics(metrics: RunMetrics, out_dir: str | Path, manifest: dict | None = None) -> list[Path]:
    """Write a finished run's CSVs (and manifest, if given) to ``out_dir``."""
    out = Path(out_dir)
    with MetricsWriter(out, metrics.n_agents) as w:
        for e in range(metrics.episodes):
            wc = None if metrics.wall_clock is None else float(metrics.wall_clock[e])
            w.episode(e + 1, metrics.rewards[e], wc)
        for r in metrics.rounds:
            w.round(r)
    paths = [out / n for n in ("rewards.csv", "global.csv", "rounds.csv", "timing.csv")]
    if manifest is not None:
        paths.append(write_manifest(out, manifest))
    return paths


def read_global_csv(path: str | Path) -> np.ndarray:
    """Mean reward per episode from a ``global.csv``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["mean_reward"]) for r in rows])


def read_rewards_csv(path: str | Path) -> np.ndarray:
    """(episodes, n_agents) reward matrix from a ``rewards.csv``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    episodes = max(int(r["episode"]) for r in rows)
    agents = max(int(r["agent_id"]) for r in rows) + 1
    out = np.full((episodes, agents), np.nan)
    for r in rows:
        out[int(r["episode"]) - 1, int(r["agent_id"])] = float(r["reward"])
    return out


def summarize(series: np.ndarray, threshold: float | None, window: int = MA_WINDOW) -> dict:
    ma = moving_average(series, window)
    reached = np.nonzero(ma >= threshold)[0] if threshold is not None else np.array([], dtype=int)
    return {
        "episodes": len(series),
        "final_window_mean": float(np.mean(series[-window:])),
        "auc": float(np.sum(series)),
        "episodes_to_threshold": int(reached[0]) + 1 if reached.size else NOT_REACHED,
    }


def compare_runs(
    paths: Sequence[str | Path],
    threshold: float | None = None,
    window: int = MA_WINDOW,
    out_csv: str | Path | None = None,
) -> list[dict]:
    """Compare ``global.csv`` files; deltas and ratios are relative to the first run."""
    if len(paths) < 2:
        raise UsageError("compare_runs needs at least two runs")
    series = [read_global_csv(p) for p in paths]
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise UsageError(f"runs have different episode counts: {[len(s) for s in series]}")
    rows = []
    base = None
    for path, s in zip(paths, series):
        row = {"run": str(path), **summarize(s, threshold, window)}
        if base is None:
            base = row
        row["final_delta"] = row["final_window_mean"] - base["final_window_mean"]
        row["auc_ratio"] = row["auc"] / base["auc"] if base["auc"] != 0 else float("nan")
        rows.append(row)
    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    return rows


def format_table(rows: list[dict]) -> str:
    cols = list(rows[0])
    cells = [[c for c in cols]] + [
        [f"{r[c]:.4g}" if isinstance(r[c], float) else str(r[c]) for c in cols] for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells)
