"""
Curve files for external plotting

BLEU curves: one block per (dataset, run, condition, alpha, beta), blocks
separated by a blank line, rows sorted by step:

    step<TAB>bleu<TAB>dataset<TAB>run<TAB>condition<TAB>alpha<TAB>beta

Evaluations recorded without a run carry NO_RUN in the run column. Loss
curves: the same layout keyed by run, with the loss log columns.
"""

import logging
from itertools import groupby
from pathlib import Path

logger = logging.getLogger(__name__)

NO_RUN = "-"
CURVE_HEADER = ("step", "bleu", "dataset", "run", "condition", "alpha", "beta")
LOSS_CURVE_HEADER = ("step", "l_normal", "l_enc", "l_dec", "total", "run", "alpha", "beta")


def run_label(report):
    return report.run.name if report.run_id is not None else NO_RUN


def curve_blocks(reports):
    """
    Group evaluation points into curves

    Args:
        reports (iterable): EvalReport-like objects

    Returns:
        list: ((dataset, run label, condition, alpha, beta), [points sorted by step]) per curve
    """

    def key(report):
        return (report.dataset, report.run_id or 0, report.condition, report.alpha, report.beta)

    ordered = sorted(reports, key=lambda report: (*key(report), report.step))
    blocks = []
    for _, points in groupby(ordered, key=key):
        points = list(points)
        first = points[0]
        curve = (first.dataset, run_label(first), first.condition, first.alpha, first.beta)
        blocks.append((curve, points))
    return blocks


def _write_blocks(path, header, blocks):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(header) + "\n")
        for number, rows in enumerate(blocks):
            if number:
                handle.write("\n")
            for row in rows:
                handle.write("\t".join(str(value) for value in row) + "\n")
    return path


def write_bleu_curves(path, reports):
    blocks = [
        [
            (point.step, f"{point.bleu:.2f}", *curve)
            for point in points
        ]
        for curve, points in curve_blocks(reports)
    ]
    logger.info(f"Writing {len(blocks)} BLEU curves to {path}")
    return _write_blocks(path, CURVE_HEADER, blocks)


def write_loss_curves(path, runs):
    """
    Args:
        runs (iterable): (run name, alpha, beta, LossBreakdown records)
    """
    blocks = [
        [
            (
                record.step,
                f"{record.l_normal:.6f}",
                f"{record.l_enc:.6f}",
                f"{record.l_dec:.6f}",
                f"{record.total:.6f}",
                name,
                alpha,
                beta,
            )
            for record in records
        ]
        for name, alpha, beta, records in runs
        if records
    ]
    return _write_blocks(path, LOSS_CURVE_HEADER, blocks)


def read_curves(path):
    """Parse a BLEU curve file into {(dataset, run, condition, alpha, beta): [(step, bleu)]}"""
    curves = {}
    with open(path, encoding="utf-8") as handle:
        handle.readline()
        for line in handle:
            if not line.strip():
                continue
            step, score, dataset, run, condition, alpha, beta = line.rstrip("\n").split("\t")
            curves.setdefault((dataset, run, condition, float(alpha), float(beta)), []).append(
                (int(step), float(score))
            )
    return curves
