"""Input validation helpers shared by the detector estimators."""

import numpy as np


def as_real_channel(H):
    """Coerce a channel matrix to the stacked real-valued form.

    Accepts either a complex (Nr, Nt) matrix, which is expanded to the
    2Nr x 2Nt real block form [[Re, -Im], [Im, Re]], or an already-real
    matrix with even dimensions, which is passed through.
    """
    H = np.asarray(H)
    if H.ndim != 2:
        raise ValueError(f"channel matrix must be 2-D, got shape {H.shape}")
    if np.iscomplexobj(H):
        return np.block([[H.real, -H.imag], [H.imag, H.real]])
    H = H.astype(float, copy=False)
    if H.shape[0] % 2 or H.shape[1] % 2:
        raise ValueError(
            f"real channel matrix must have even dimensions (2Nr x 2Nt), got {H.shape}"
        )
    if not np.all(np.isfinite(H)):
        raise ValueError("channel matrix contains non-finite entries")
    return H


def as_real_received(y, n_rows):
    """Coerce a received vector to the stacked real form of length ``n_rows``.

    Complex input of length ``n_rows // 2`` is stacked as [Re; Im].
    """
    y = np.asarray(y)
    if np.iscomplexobj(y):
        y = np.concatenate([y.real, y.imag])
    y = y.astype(float, copy=False).ravel()
    if y.shape[0] != n_rows:
        raise ValueError(f"received vector has length {y.shape[0]}, expected {n_rows}")
    if not np.all(np.isfinite(y)):
        raise ValueError("received vector contains non-finite entries")
    return y


def check_fitted(estimator, attr="H_"):
    if not hasattr(estimator, attr):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted; call fit(H) with a channel first"
        )
