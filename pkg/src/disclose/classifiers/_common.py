import numpy as np

from ..errors import DiscloseError

FORMAT_VERSION = 1


def as_binary_labels(y):
    """Labels as a float array with AI = 1, NON_AI = 0."""
    out = []
    for v in y:
        if v in ("AI", 1, True, 1.0):
            out.append(1.0)
        elif v in ("NON_AI", 0, False, 0.0):
            out.append(0.0)
        else:
            raise DiscloseError("BAD_LABEL", f"unrecognized label {v!r}")
    return np.asarray(out, dtype=np.float64)


def check_two_classes(X, y):
    if X.shape[0] != len(y) or len(y) == 0:
        raise DiscloseError("SHAPE_MISMATCH", f"X has {X.shape[0]} rows but y has {len(y)} labels")
    if y.min() == y.max():
        raise DiscloseError("SINGLE_CLASS", "training data must contain both classes")
