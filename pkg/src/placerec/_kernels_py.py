"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable (or disabled via
``PLACEREC_PURE_PYTHON=1``).  Semantics match ``_kernels.pyx``; floating
point results may differ in the last few bits because summation order
differs.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def accumulate_descriptors(
    mag: np.ndarray,
    ori_bin: np.ndarray,
    patch: int,
    stride: int,
    n_cells: int = 4,
    n_bins: int = 8,
) -> np.ndarray:
    """Accumulate raw (unnormalized) patch descriptors on a dense grid.

    Parameters
    ----------
    mag : (H, W) float64
        Gradient magnitude per pixel.
    ori_bin : (H, W) int64
        Orientation bin index per pixel, in [0, n_bins).
    patch, stride : int
        Patch side length (multiple of n_cells) and grid spacing.

    Returns
    -------
    (n_patches, n_cells*n_cells*n_bins) float64, patches in row-major grid
    order, layout ``(cell_row*n_cells + cell_col)*n_bins + bin``.
    """
    h, w = mag.shape
    cell = patch // n_cells
    ny = (h - patch) // stride + 1
    nx = (w - patch) // stride + 1

    # Per-bin magnitude maps, then an integral image per bin so every
    # cell sum is four lookups.
    binmaps = np.zeros((n_bins, h, w), dtype=np.float64)
    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    binmaps[ori_bin, rows, cols] = mag

    integral = np.zeros((n_bins, h + 1, w + 1), dtype=np.float64)
    integral[:, 1:, 1:] = binmaps.cumsum(axis=1).cumsum(axis=2)

    # Cell top-left coordinates: grid position + cell offset.
    ys = (np.arange(ny) * stride)[:, None] + (np.arange(n_cells) * cell)[None, :]
    xs = (np.arange(nx) * stride)[:, None] + (np.arange(n_cells) * cell)[None, :]

    def boxsum(y0, x0):
        # y0: (ny, n_cells), x0: (nx, n_cells) -> (n_bins, ny, n_cells, nx, n_cells)
        y0 = y0[None, :, :, None, None]
        x0 = x0[None, None, None, :, :]
        return (
            integral[:, y0 + cell, x0 + cell]
            - integral[:, y0, x0 + cell]
            - integral[:, y0 + cell, x0]
            + integral[:, y0, x0]
        )

    sums = boxsum(ys, xs)  # (n_bins, ny, cr, nx, cc)
    # -> (ny, nx, cr, cc, bin) -> flatten
    desc = sums.transpose(1, 3, 2, 4, 0).reshape(ny * nx, n_cells * n_cells * n_bins)
    return np.ascontiguousarray(desc)


def forward_pass(
    b: np.ndarray, transition: np.ndarray, initial: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Scaled HMM forward recursion.

    ``b`` holds per-frame emission weights (already exponentiated and
    per-row rescaled by the caller).  Returns the normalized forward
    probabilities and the per-step log normalizers.
    """
    t_len, k = b.shape
    alpha = np.empty((t_len, k), dtype=np.float64)
    lognorm = np.empty(t_len, dtype=np.float64)

    f = initial * b[0]
    c = f.sum()
    if c <= 0.0:
        raise FloatingPointError("forward mass underflowed at t=0")
    alpha[0] = f / c
    lognorm[0] = np.log(c)
    for t in range(1, t_len):
        f = (alpha[t - 1] @ transition) * b[t]
        c = f.sum()
        if c <= 0.0:
            raise FloatingPointError(f"forward mass underflowed at t={t}")
        alpha[t] = f / c
        lognorm[t] = np.log(c)
    return alpha, lognorm


def backward_pass(b: np.ndarray, transition: np.ndarray, norms: np.ndarray) -> np.ndarray:
    """Scaled HMM backward recursion matching :func:`forward_pass` scaling.

    ``norms`` are the linear-domain normalizers exp(lognorm).
    """
    t_len, k = b.shape
    beta = np.empty((t_len, k), dtype=np.float64)
    beta[t_len - 1] = 1.0
    for t in range(t_len - 2, -1, -1):
        beta[t] = (transition @ (b[t + 1] * beta[t + 1])) / norms[t + 1]
    return beta
