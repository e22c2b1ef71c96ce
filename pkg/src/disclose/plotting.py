"""Matplotlib figures written next to the JSON/CSV reports.

Figures are rendered with the Agg canvas and saved without a ``Software``
metadata stamp so repeated runs produce identical PNG bytes.
"""

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.backends.backend_agg import FigureCanvasAgg  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .io import ensure_parent  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "path.simplify": False,
}

AI_COLOR = "#c0392b"
NON_COLOR = "#2c7fb8"


def _figure(width=6.4, height=3.2):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    ensure_parent(path)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    return path


def confusion_roc(report, path, title=""):
    """Confusion-matrix heatmap beside the ROC curve."""
    with rc_context(STYLE):
        fig = _figure()
        ax_cm, ax_roc = fig.subplots(1, 2)
        cm = report.confusion
        grid = [[cm.tn, cm.fp], [cm.fn, cm.tp]]
        ax_cm.imshow(grid, cmap="Blues", vmin=0)
        for i in range(2):
            for j in range(2):
                ax_cm.text(j, i, str(grid[i][j]), ha="center", va="center")
        ax_cm.set_xticks([0, 1], ["NON_AI", "AI"])
        ax_cm.set_yticks([0, 1], ["NON_AI", "AI"])
        ax_cm.set_xlabel("predicted")
        ax_cm.set_ylabel("true")
        ax_cm.set_title(f"confusion (t={cm.threshold:g})")
        xs = [p[0] for p in report.roc_points]
        ys = [p[1] for p in report.roc_points]
        ax_roc.plot(xs, ys, color=AI_COLOR, lw=1.5, label=f"AUC = {report.auc:.3f}")
        ax_roc.plot([0, 1], [0, 1], color="0.6", lw=0.8, ls="--")
        ax_roc.set_xlim(-0.02, 1.02)
        ax_roc.set_ylim(-0.02, 1.02)
        ax_roc.set_xlabel("false positive rate")
        ax_roc.set_ylabel("true positive rate")
        ax_roc.set_title("ROC")
        ax_roc.legend(loc="lower right", frameon=False)
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def length_scatter(report, path):
    with rc_context(STYLE):
        fig = _figure(4.8, 3.2)
        ax = fig.add_subplot()
        xs = [p[0] for p in report.scatter]
        ys = [p[1] for p in report.scatter]
        ax.scatter(xs, ys, s=8, alpha=0.6, color=NON_COLOR, edgecolors="none")
        ax.set_xlabel("sentence length (tokens)")
        ax.set_ylabel("predicted P(AI)")
        ax.set_ylim(-0.03, 1.03)
        ax.set_title(f"length bias: Pearson r = {report.pearson_r:.3f} (n={report.n})")
        return _save(fig, path)


def temporal(report, path):
    with rc_context(STYLE):
        fig = _figure(4.8, 3.2)
        ax = fig.add_subplot()
        years = [r["year"] for r in report.rows]
        ax.plot(years, [r["accuracy"] for r in report.rows], marker="o", ms=3, label="accuracy",
                color=NON_COLOR)
        ax.plot(years, [r["f1_ai"] for r in report.rows], marker="s", ms=3, label="F1 (AI)",
                color=AI_COLOR)
        ax.set_xticks(years, [str(y) for y in years])
        ax.set_ylim(min([0.8] + [r["accuracy"] for r in report.rows] + [r["f1_ai"] for r in report.rows]) - 0.02,
                    1.02)
        ax.set_xlabel("year")
        ax.set_ylabel("score")
        ax.legend(loc="lower left", frameon=False)
        ax.set_title("per-year performance")
        return _save(fig, path)


def attribution(report, path):
    with rc_context(STYLE):
        n = max(1, len(report.tokens))
        fig = _figure(4.8, 0.9 + 0.22 * n)
        ax = fig.add_subplot()
        ys = list(range(len(report.tokens)))[::-1]
        colors = [AI_COLOR if v >= 0 else NON_COLOR for v in report.phi]
        ax.barh(ys, report.phi, color=colors)
        ax.set_yticks(ys, report.tokens)
        ax.axvline(0, color="0.3", lw=0.8)
        ax.set_xlabel(f"Shapley value ({report.scale.lower()} scale)")
        ax.set_title(f"{report.method.lower()} attribution, base={report.base_value:.3f}")
        return _save(fig, path)
