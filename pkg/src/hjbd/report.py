"""Report serialization and figure rendering for verification runs.

A report is written twice: once as JSON (the VerificationReport fields
verbatim) and once as CSV with one row per check, so results can be
consumed by both scripts and spreadsheets.  ``render_figures`` draws a
small set of summary figures next to those files: a pass/fail overview
of the report itself plus closed-form illustration plots of the
estimator family (shrinkage curves, the MSE bound, and the
posterior-mean-to-MAP gap as the smoothing vanishes).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .posterior import EstimatorParams, u_pm_closed_l1
from .verification import VerificationReport


def write_report_json(report: VerificationReport, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report.to_json(), indent=2) + "\n",
                    encoding="utf-8")
    return path


def write_report_csv(report: VerificationReport, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["name", "passed", "observed", "bound_or_target",
                         "tolerance", "details"])
        for check in report.checks:
            writer.writerow([
                check.name,
                check.passed,
                json.dumps(check.observed),
                json.dumps(check.bound_or_target),
                check.tolerance,
                check.details,
            ])
    return path


def _figure_check_overview(report: VerificationReport, path: Path):
    names = [c.name for c in report.checks]
    colors = ["#2a9d42" if c.passed else "#c0392b" for c in report.checks]
    height = max(2.0, 0.28 * len(names) + 1.2)
    fig, ax = plt.subplots(figsize=(8, height))
    ax.barh(range(len(names)), [1.0] * len(names), color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xticks([])
    ax.invert_yaxis()
    ax.set_title(f"verification checks (seed={report.seed}): "
                 f"{sum(c.passed for c in report.checks)}/{len(names)} passed")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _figure_shrinkage_family(path: Path):
    t, lam = 1.25, 2.0
    xs = np.linspace(-10, 10, 801)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(xs, xs, "k:", lw=1, label="identity")
    soft = np.sign(xs) * np.maximum(np.abs(xs) - t * lam, 0.0)
    ax.plot(xs, soft, "k--", lw=1.2, label="soft threshold (smoothing 0)")
    for eps in (1.0, 0.5, 0.25, 0.1, 0.025):
        u = [float(u_pm_closed_l1([lam], np.array([x]),
                                  EstimatorParams(t=t, eps=eps)).u_pm[0])
             for x in xs]
        ax.plot(xs, u, lw=1.0, label=f"eps={eps:g}")
    ax.set_xlabel("data x")
    ax.set_ylabel("posterior-mean estimate")
    ax.set_title(f"l1 posterior-mean shrinkage, t={t:g}, lambda={lam:g}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _figure_mse_bound(path: Path):
    ts = np.linspace(0.05, 10, 400)
    eps = 1.0
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for m in (0.0, 0.5, 1.0, 2.0):
        ax.plot(ts, ts * eps / (1.0 + m * ts), lw=1.2, label=f"m={m:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("per-component MSE bound t*eps/(1+m*t)")
    ax.set_title("MSE bound vs t (eps=1), tight for quadratic priors")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _figure_vanishing_smoothing_gap(path: Path):
    t, lam = 1.25, 2.0
    xs = np.linspace(-5, 5, 201)
    eps_seq = np.geomspace(1.0, 1e-3, 13)
    soft = np.sign(xs) * np.maximum(np.abs(xs) - t * lam, 0.0)
    gaps = []
    for eps in eps_seq:
        u = np.array([
            float(u_pm_closed_l1([lam], np.array([x]),
                                 EstimatorParams(t=t, eps=eps)).u_pm[0])
            for x in xs
        ])
        gaps.append(np.max(np.abs(u - soft)))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(eps_seq, gaps, "o-", lw=1.2)
    ax.loglog(eps_seq, np.sqrt(t * eps_seq), "k--", lw=1,
              label="sqrt(t*eps) envelope")
    ax.set_xlabel("eps")
    ax.set_ylabel("sup |posterior mean - MAP|")
    ax.set_title(f"vanishing-smoothing gap, l1 prior, t={t:g}, lambda={lam:g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_figures(report: VerificationReport, directory) -> list:
    """Render the summary figures into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    jobs = [
        ("check_overview.png",
         lambda p: _figure_check_overview(report, p)),
        ("pm_shrinkage.png", _figure_shrinkage_family),
        ("mse_bound.png", _figure_mse_bound),
        ("vanishing_smoothing_gap.png", _figure_vanishing_smoothing_gap),
    ]
    paths = []
    for name, draw in jobs:
        target = directory / name
        draw(target)
        paths.append(target)
    return paths
