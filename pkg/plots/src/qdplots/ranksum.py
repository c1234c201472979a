"""Pairwise Wilcoxon rank-sum comparison of final-checkpoint metrics."""
from __future__ import annotations

from itertools import combinations
from statistics import median

import pandas as pd
from scipy import stats

from .io import METRIC_CHOICES, load_members

MIN_REPLICATIONS = 5


class RefusalError(ValueError):
    """Raised instead of computing p-values from too little data;
    the message is the user-facing notice."""


def final_values(df: pd.DataFrame, metric: str) -> list[float]:
    """One final-checkpoint value per replication."""
    last = df.loc[df.groupby("replication")["evaluations"].idxmax()]
    return [float(v) for v in last.sort_values("replication")[metric]]


def ranksum_report(directories) -> str:
    members = load_members(directories)
    if len(members) < 2:
        raise RefusalError(
            f"rank-sum report needs at least two result directories, got "
            f"{len(members)}; no p-values computed")
    counts = {label: df["replication"].nunique() for label, df in members}
    starved = {lb: n for lb, n in counts.items() if n < MIN_REPLICATIONS}
    if starved:
        listing = ", ".join(f"{lb} has {n}" for lb, n in starved.items())
        raise RefusalError(
            f"not enough replications for a rank-sum test: {listing} "
            f"(need at least {MIN_REPLICATIONS} per variant); "
            f"no p-values computed")

    lines = ["pairwise Wilcoxon rank-sum on final-checkpoint metrics",
             "replications: " + ", ".join(f"{lb}={n}" for lb, n in counts.items()),
             ""]
    header = f"{'metric':<26} {'pair':<34} {'medians':<24} {'p-value':>10}"
    lines += [header, "-" * len(header)]
    for metric in METRIC_CHOICES:
        for (label_a, df_a), (label_b, df_b) in combinations(members, 2):
            a = final_values(df_a, metric)
            b = final_values(df_b, metric)
            _, p = stats.ranksums(a, b)
            med_a, med_b = median(a), median(b)
            direction = ">" if med_a > med_b else "<" if med_a < med_b else "~"
            lines.append(
                f"{metric:<26} {f'{label_a} {direction} {label_b}':<34} "
                f"{f'{med_a:g} vs {med_b:g}':<24} {p:>10.4g}")
    return "\n".join(lines) + "\n"
