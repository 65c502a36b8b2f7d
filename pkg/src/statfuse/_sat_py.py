"""Pure-numpy summed-area-table box sums (fallback for the compiled kernel)."""
import numpy as np


def box_sum(x, win_h, win_w):
    """Sum of every ``win_h`` x ``win_w`` window, replicate-edge border."""
    if win_h < 1 or win_w < 1 or win_h % 2 == 0 or win_w % 2 == 0:
        raise ValueError("window sides must be odd and positive")
    src = np.asarray(x, dtype=np.float64)
    if src.ndim != 2:
        raise ValueError("expected a 2-D array")
    ry, rx = win_h // 2, win_w // 2
    padded = np.pad(src, ((ry, ry), (rx, rx)), mode="edge")
    table = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1))
    np.cumsum(padded, axis=0, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return (
        table[win_h:, win_w:]
        - table[:-win_h, win_w:]
        - table[win_h:, :-win_w]
        + table[:-win_h, :-win_w]
    )
