"""CSV emission with a stable schema and table-style number formatting.

Errors print as 4-significant-digit scientific notation and orders with
three decimals so the files line up with published tables at a glance.
Files are written atomically (temp file + rename) and byte-identically for
identical inputs.
"""

import os
import tempfile


def fmt_error(x):
    return f"{x:.3E}"


def fmt_order(x):
    return "--" if x is None else f"{x:.3f}"


def fmt_value(x):
    return f"{x:.10g}"


def atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".csv")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def report_to_csv(report, path):
    """Serialize a ConvergenceReport."""
    header = ["N", "h", "delta", "mu", "L2_error", "order",
              "energy_error", "energy_order"]
    rows = []
    for r in report.rows:
        rows.append([
            r.N, fmt_value(r.h), fmt_value(r.delta), fmt_value(r.mu),
            fmt_error(r.l2_error), fmt_order(r.l2_order),
            fmt_error(r.energy_error) if r.energy_error is not None else "--",
            fmt_order(r.energy_order),
        ])
    write_csv(path, header, rows)


def snapshot_to_csv(xs, us, path):
    header = ["x", "u"]
    rows = [[f"{x:.12e}", f"{u:.12e}"] for x, u in zip(xs, us)]
    write_csv(path, header, rows)


def inequalities_to_csv(reports, path):
    header = ["quantity", "N", "k", "alpha", "delta", "mu", "estimate"]
    rows = [[r.quantity, r.N, r.k, fmt_value(r.alpha), fmt_value(r.delta),
             fmt_value(r.mu), f"{r.estimate:.6E}"] for r in reports]
    write_csv(path, header, rows)
