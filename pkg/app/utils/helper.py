import logging
import os
import sys

import numpy as np

DB_FLOOR = -400.0


def to_linear(x_db):
    return np.power(10.0, np.asarray(x_db, dtype=float) / 10.0)


def to_db(x_lin):
    """10*log10 with linear zero mapped to -inf instead of a warning."""
    x = np.asarray(x_lin, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def clamp_db(x_db):
    # -inf is not representable in CSV/JSON consumers downstream
    return np.maximum(np.asarray(x_db, dtype=float), DB_FLOOR)


def parse_array_label(label: str) -> tuple[int, int]:
    try:
        rows, cols = label.lower().split("x")
        return int(rows), int(cols)
    except ValueError:
        raise ValueError(f"Invalid array label '{label}', expected e.g. '32x32'")


def configure_logging(level=logging.INFO):
    log_file = os.environ.get("COEXSIM_LOG_FILE", "coexsim.log")
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=[
            logging.StreamHandler(sys.stdout),
            logging.FileHandler(log_file)
        ]
    )
