"""Independent reference computations used to freeze expected test values.

These deliberately re-derive results with straight-line arithmetic and no
imports from the package under test.
"""

import math


def adjusted_reference(tp, fp, fn, tn, ppr, pnr):
    """Multiplicative count adjustment and the four scores, written out
    directly. Zero denominators map to 0.0, mirroring the batch policy."""
    adj_tp = tp * ppr
    adj_fp = fp * pnr
    adj_fn = fn * ppr
    adj_tn = tn * pnr

    def div(num, den):
        return num / den if den != 0 else 0.0

    accuracy = div(adj_tp + adj_tn, adj_tp + adj_tn + adj_fp + adj_fn)
    precision = div(adj_tp, adj_tp + adj_fp)
    recall = div(adj_tp, adj_tp + adj_fn)
    f1 = div(2.0, (1.0 / precision + 1.0 / recall)) if precision > 0 and recall > 0 else 0.0
    return {
        "adj_tp": adj_tp,
        "adj_fp": adj_fp,
        "adj_fn": adj_fn,
        "adj_tn": adj_tn,
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def gwet_reference(r1, r2):
    """AC1 from the definition: observed agreement corrected by 2*pi*(1-pi)."""
    n = len(r1)
    pa = sum(1 for a, b in zip(r1, r2) if a == b) / n
    pi = (sum(r1) + sum(r2)) / (2 * n)
    pe = 2 * pi * (1 - pi)
    return (pa - pe) / (1 - pe)


def proportion_z_reference(p1, n1, p2, n2):
    se = math.sqrt(p1 * (1 - p1) / n1 + p2 * (1 - p2) / n2)
    z = (p1 - p2) / se
    p = math.erfc(abs(z) / math.sqrt(2))
    return z, p
