"""The six code rates compared throughout, and their short file tags."""

STUDY_RATES = (0.5, 0.625, 0.75, 0.8125, 0.875, 0.9375)
BLOCK_LENGTH = 1024


def rate_tag(rate: float) -> str:
    """``0.5 -> 'r0500'``, ``0.8125 -> 'r0812'`` (thousandths, truncated)."""
    return "r" + f"{int(round(rate * 10000)):05d}"[:4]


def rate_from_tag(tag: str) -> float:
    for r in STUDY_RATES:
        if rate_tag(r) == tag:
            return r
    raise ValueError(f"unknown rate tag {tag!r}")
