"""Matplotlib rendering of result tables, written next to the CSV output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .tables import ResultTable  # noqa: E402

__all__ = ["render_table"]


def _plot_fig4(table, ax):
    ax.loglog(table.column("n"), table.column("variance"), "o", label="block variance")
    ax.loglog(table.column("n"), table.column("crb"), "-", label="information bound")
    ax.set_xlabel("runs n")
    ax.set_ylabel("Var(a_ml)")
    ax.legend()


def _plot_fig5(table, ax):
    m = table.column("M")
    ax.semilogy(m, table.column("variance"), "o", label="variance")
    ax.semilogy(m, table.column("upper_bound"), "-", label="upper bound")
    ax.semilogy(m, table.column("lower_bound"), "--", label="lower bound")
    ax.set_xlabel("POVM uses M")
    ax.set_ylabel("Var(a_ml)")
    ax.legend()


def _plot_fig6(table, ax):
    ax.plot(table.column("M"), table.column("ordinate"), "o-")
    ax.set_xlabel("POVM uses M")
    ax.set_ylabel("-log2(1 - I/I_ideal)")


def _plot_fig8(table, ax):
    m = table.column("M")
    ax.plot(m, table.column("binary_ordinate"), "o-", label="full count statistic")
    ax.plot(m, table.column("majority_ordinate"), "s--", label="majority vote")
    ax.set_xlabel("POVM uses M")
    ax.set_ylabel("-log2(1 - I2)")
    ax.legend()


def _plot_fig_qudit(table, ax):
    m = table.column("M")
    for name in table.columns[1:]:
        ax.plot(m, table.column(name), "o-", label=name.replace("mi_alpha_", "alpha=").replace("p", "."))
    ax.set_xlabel("purifying copies M")
    ax.set_ylabel("mutual information [bits]")
    ax.legend()


def _plot_dist(table, ax):
    ax.bar(table.column("m1"), table.column("probability"))
    ax.set_xlabel("count m1")
    ax.set_ylabel("probability")


def _plot_generic(table, ax):
    x = table.column(table.columns[0])
    for name in table.columns[1:]:
        ax.plot(x, table.column(name), "o-", label=name)
    ax.set_xlabel(table.columns[0])
    ax.legend(fontsize=8)


_FIGURE_PLOTTERS = {
    "fig4": _plot_fig4,
    "fig5": _plot_fig5,
    "fig6": _plot_fig6,
    "fig8": _plot_fig8,
    "fig-qudit": _plot_fig_qudit,
}


def render_table(table: ResultTable, path) -> None:
    """Render ``table`` to an image file chosen by its experiment metadata."""
    experiment = table.metadata.get("experiment", "")
    figure = table.metadata.get("figure", "")
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    if experiment == "reproduce" and figure in _FIGURE_PLOTTERS:
        _FIGURE_PLOTTERS[figure](table, ax)
        ax.set_title(figure)
    elif experiment == "dist":
        _plot_dist(table, ax)
    else:
        _plot_generic(table, ax)
        ax.set_title(experiment)
    fig.savefig(path, dpi=150)
    plt.close(fig)
