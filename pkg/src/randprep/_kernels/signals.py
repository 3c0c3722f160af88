"""Internal control-flow signals shared by both kernel lanes."""


class SmallColumn(Exception):
    """Householder QR met a pivot column below the caller's threshold.

    Callers translate this into the public RankDeficient error after
    confirming against the exact spectral-norm gate.
    """

    def __init__(self, col, norm):
        self.col = int(col)
        self.norm = float(norm)
        super().__init__(f"column {col} norm {norm:.3e} under threshold")
