"""
CSV report emission
Every report starts with a commented YAML header holding the run
configuration, and is written atomically once complete
"""
import io
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import aiofiles
import pandas as pd
import yaml

from estimation import CvScore, NeeBounds
from posterior import (
    PosteriorSampleSet,
    count_modes,
    credible_interval,
    marginal_cdf,
    monte_carlo_standard_error,
    weighted_mean,
    weighted_median,
)

logger = logging.getLogger("bgt.reports")

HEADER_PREFIX = "# "

CV_ROUND_COLUMNS = ["model", "dataset", "round", "mean_ll"]
CV_SUMMARY_COLUMNS = [
    "model", "dataset", "parameters", "mean_ll", "ci_half_width", "total_ll", "total_ci_half_width",
    "ln_ratio", "log10_ratio", "log10_ci_half_width", "status",
]
CHART_COLUMNS = ["model", "log10_ratio", "lower", "upper"]
FRONTIER_COLUMNS = ["model", "parameters", "log10_ratio", "log10_ci_half_width", "efficient"]
INTERVAL_COLUMNS = ["parameter", "mass", "lower", "upper", "median", "mean", "mc_standard_error", "modes"]


def render_csv(frame: pd.DataFrame, header: Optional[Mapping[str, Any]] = None) -> str:
    buffer = io.StringIO()
    if header:
        for line in yaml.safe_dump(dict(header), sort_keys=False, default_flow_style=False).splitlines():
            buffer.write(f"{HEADER_PREFIX}{line}\n")
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


async def write_report(path: Path, frame: pd.DataFrame, header: Optional[Mapping[str, Any]] = None) -> Path:
    """Write to a sibling temp file, then rename over the target"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    async with aiofiles.open(tmp, "w", encoding="utf-8", newline="") as f:
        await f.write(render_csv(frame, header))
    os.replace(tmp, path)
    logger.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def read_report(path: Path) -> Tuple[Dict[str, Any], pd.DataFrame]:
    """Header mapping and data frame of a report written by write_report"""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines(keepends=True)
    header_lines = []
    for line in lines:
        if not line.startswith(HEADER_PREFIX.rstrip()):
            break
        header_lines.append(line[len(HEADER_PREFIX):] if line.startswith(HEADER_PREFIX) else "\n")
    header = yaml.safe_load("".join(header_lines)) or {}
    frame = pd.read_csv(io.StringIO("".join(lines[len(header_lines):])))
    return header, frame


def cv_round_frame(model: str, dataset: str, score: CvScore) -> pd.DataFrame:
    return pd.DataFrame(
        [(model, dataset, r, mean) for r, mean in enumerate(score.round_means)],
        columns=CV_ROUND_COLUMNS,
    )


def cv_summary_row(model: str, dataset: str, parameters: int, score: Optional[CvScore], status: str = "ok") -> Dict[str, Any]:
    if score is None:
        row = {column: float("nan") for column in CV_SUMMARY_COLUMNS}
        row.update(model=model, dataset=dataset, parameters=parameters, status=status)
        return row
    return {
        "model": model,
        "dataset": dataset,
        "parameters": parameters,
        "mean_ll": score.mean,
        "ci_half_width": score.ci_half_width,
        "total_ll": score.total,
        "total_ci_half_width": score.total_ci_half_width,
        "ln_ratio": score.ln_ratio,
        "log10_ratio": score.log10_ratio,
        "log10_ci_half_width": score.log10_ci_half_width,
        "status": status,
    }


def nee_summary_rows(dataset: str, bounds: NeeBounds) -> List[Dict[str, Any]]:
    return [
        cv_summary_row(f"NEE-{label}", dataset, 1, score)
        for label, score in (("best", bounds.best), ("average", bounds.average), ("worst", bounds.worst))
    ]


def summary_frame(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=CV_SUMMARY_COLUMNS)


def chart_frame(summary: pd.DataFrame) -> pd.DataFrame:
    """Bar-chart data: log10 ratio per model with its 95% interval"""
    ok = summary[summary["status"] == "ok"]
    return pd.DataFrame({
        "model": ok["model"],
        "log10_ratio": ok["log10_ratio"],
        "lower": ok["log10_ratio"] - ok["log10_ci_half_width"],
        "upper": ok["log10_ratio"] + ok["log10_ci_half_width"],
    }, columns=CHART_COLUMNS)


def frontier_frame(summary: pd.DataFrame, efficient: Sequence[str]) -> pd.DataFrame:
    ok = summary[summary["status"] == "ok"].sort_values(["parameters", "model"])
    return pd.DataFrame({
        "model": ok["model"],
        "parameters": ok["parameters"],
        "log10_ratio": ok["log10_ratio"],
        "log10_ci_half_width": ok["log10_ci_half_width"],
        "efficient": ok["model"].isin(list(efficient)),
    }, columns=FRONTIER_COLUMNS)


def posterior_cdf_frame(samples: PosteriorSampleSet) -> pd.DataFrame:
    frames = [marginal_cdf(samples, name).to_frame() for name in samples.names]
    return pd.concat(frames, ignore_index=True)


def posterior_interval_frame(samples: PosteriorSampleSet, masses: Sequence[float]) -> pd.DataFrame:
    rows = []
    for name in samples.names:
        median = weighted_median(samples, name)
        mean = weighted_mean(samples, name)
        error = monte_carlo_standard_error(samples, name)
        modes = count_modes(samples, name)
        for mass in masses:
            lower, upper = credible_interval(samples, name, mass)
            rows.append((name, mass, lower, upper, median, mean, error, modes))
    return pd.DataFrame(rows, columns=INTERVAL_COLUMNS)


def posterior_diagnostics(samples: PosteriorSampleSet) -> Dict[str, Any]:
    return {
        "method": samples.method,
        "samples": int(samples.samples.shape[0]),
        "effective_sample_size": round(samples.ess, 6),
        "acceptance_rate": None if samples.acceptance_rate != samples.acceptance_rate else round(samples.acceptance_rate, 6),
    }
