from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from rich.table import Table

from ..model import COMPONENT_NAMES, ModelParams, forward_batch
from ..pipeline.dataset import SplitDataset, SplitSamples
from ..pipeline.trainer import TrainLog
from .baseline import naive_baseline
from .metrics import Metrics, evaluate_split

ALPHA_SUMMARY_FIELDS = (
    "run",
    "alpha_saliency",
    "alpha_memory",
    "alpha_trend",
    "dominant",
    "test_mae",
    "test_rmse",
    "test_r2",
    "naive_test_mae",
)


@dataclass
class EvalReport:
    """一次训练的评估摘要，序列化为 eval_report.json。"""

    metrics: dict[str, Metrics]
    baseline: dict[str, Metrics]
    alpha: list[float]
    param_count: int
    contributions: dict[str, float] = field(default_factory=dict)
    forward_seconds: float | None = None
    best_epoch: int = 0
    stop_reason: str = ""
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def dominant_component(self) -> str:
        return COMPONENT_NAMES[int(np.argmax(self.alpha))]

    def to_dict(self) -> dict[str, Any]:
        return {
            "metrics": {name: m.to_dict() for name, m in self.metrics.items()},
            "baseline": {name: m.to_dict() for name, m in self.baseline.items()},
            "alpha": dict(zip(COMPONENT_NAMES, self.alpha, strict=True)),
            "contributions": self.contributions,
            "param_count": self.param_count,
            "forward_seconds": self.forward_seconds,
            "best_epoch": self.best_epoch,
            "stop_reason": self.stop_reason,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> EvalReport:
        alpha = payload["alpha"]
        return cls(
            metrics={name: Metrics.from_dict(m) for name, m in payload["metrics"].items()},
            baseline={name: Metrics.from_dict(m) for name, m in payload.get("baseline", {}).items()},
            alpha=[float(alpha[name]) for name in COMPONENT_NAMES],
            param_count=int(payload["param_count"]),
            contributions={k: float(v) for k, v in payload.get("contributions", {}).items()},
            forward_seconds=payload.get("forward_seconds"),
            best_epoch=int(payload.get("best_epoch", 0)),
            stop_reason=str(payload.get("stop_reason", "")),
            config=dict(payload.get("config", {})),
        )


def component_contributions(params: ModelParams, samples: SplitSamples) -> dict[str, float]:
    """α_i·‖h_i[-1]‖ 的归一化份额，按样本取平均。"""
    trace = forward_batch(params, samples.s, samples.m, samples.g)
    norms = np.stack(
        [np.linalg.norm(h[:, -1, :], axis=1) for h in (trace.h_s, trace.h_m, trace.h_g)],
        axis=1,
    )
    weighted = norms * trace.alpha
    totals = weighted.sum(axis=1, keepdims=True)
    shares = np.divide(weighted, totals, out=np.full_like(weighted, 1.0 / 3.0), where=totals > 0)
    mean_shares = shares.mean(axis=0)
    return {name: float(v) for name, v in zip(COMPONENT_NAMES, mean_shares, strict=True)}


def build_eval_report(
    params: ModelParams,
    data: SplitDataset,
    log: TrainLog | None = None,
    *,
    config: dict[str, Any] | None = None,
    forward_seconds: float | None = None,
) -> EvalReport:
    splits = data.splits()
    return EvalReport(
        metrics={name: evaluate_split(params, samples) for name, samples in splits.items()},
        baseline={name: naive_baseline(samples, data.target_feature) for name, samples in splits.items()},
        alpha=[float(a) for a in params.alpha],
        param_count=params.param_count,
        contributions=component_contributions(params, data.test),
        forward_seconds=forward_seconds,
        best_epoch=log.best_epoch if log else 0,
        stop_reason=log.stop_reason.value if log else "",
        config=config or {},
    )


def _fmt(value: float | None, digits: int = 4) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def render_report_table(runs: list[tuple[str, EvalReport]]) -> Table:
    table = Table(title="Learned component weights and test metrics")
    table.add_column("run", style="bold")
    for name in COMPONENT_NAMES:
        table.add_column(f"α {name}", justify="right")
    table.add_column("test MAE", justify="right")
    table.add_column("test RMSE", justify="right")
    table.add_column("test R²", justify="right")
    table.add_column("naive MAE", justify="right")
    for name, report in runs:
        test = report.metrics["test"]
        naive = report.baseline.get("test")
        table.add_row(
            name,
            *(_fmt(a, 3) for a in report.alpha),
            _fmt(test.mae),
            _fmt(test.rmse),
            _fmt(test.r2),
            _fmt(naive.mae if naive else None),
        )
    return table


def alpha_summary_rows(runs: list[tuple[str, EvalReport]]) -> list[dict[str, Any]]:
    rows = []
    for name, report in runs:
        test = report.metrics["test"]
        naive = report.baseline.get("test")
        rows.append(
            {
                "run": name,
                "alpha_saliency": report.alpha[0],
                "alpha_memory": report.alpha[1],
                "alpha_trend": report.alpha[2],
                "dominant": report.dominant_component,
                "test_mae": test.mae,
                "test_rmse": test.rmse,
                "test_r2": test.r2,
                "naive_test_mae": naive.mae if naive else None,
            }
        )
    return rows
