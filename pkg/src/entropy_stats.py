"""
Zeroth- and k-th order empirical entropy of integer sequences.

Used to check the space the compressed structures actually take against
``n H_k(S)``. Contexts are the ``k`` symbols preceding a position; only
positions with a full context contribute (no wrap-around, no sentinel).
"""
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SequenceStats:
    """Size, alphabet bound, largest symbol and total of a sequence."""
    n: int
    sigma: int
    max_value: int
    total: int


def sequence_stats(seq, sigma: int | None = None) -> SequenceStats:
    """
    Summarize a sequence of non-negative integers.

    Args:
        seq: Sequence of integers.
        sigma (int, optional): Alphabet bound; defaults to ``max_value + 1``.

    Returns:
        SequenceStats: The summary.

    Raises:
        ValueError: If a symbol is negative or not below ``sigma``.
    """
    values = [int(x) for x in seq]
    max_value = max(values, default=0)
    if values and min(values) < 0:
        raise ValueError("sequence symbols must be non-negative")
    if sigma is None:
        sigma = max_value + 1
    if max_value >= sigma:
        raise ValueError(f"symbol {max_value} not below alphabet bound {sigma}")
    return SequenceStats(n=len(values), sigma=sigma, max_value=max_value, total=sum(values))


def _entropy_of_counts(counts) -> float:
    counts = [c for c in counts if c]
    total = sum(counts)
    if total == 0:
        return 0.0
    return sum(c / total * math.log2(total / c) for c in counts)


class ContextTable:
    """
    Followers of every length-``k`` context of a sequence.

    Attributes:
        k (int): Context length.
        followers (dict): ``tuple(context) -> Counter`` of the symbols that follow it.
    """

    def __init__(self, seq, k: int):
        if k < 0:
            raise ValueError("context length must be non-negative")
        self.k = k
        self.followers = defaultdict(Counter)
        values = list(seq)
        for i in range(k, len(values)):
            self.followers[tuple(values[i - k:i])][values[i]] += 1

    def total_followers(self) -> int:
        return sum(sum(c.values()) for c in self.followers.values())

    def weighted_entropy(self) -> float:
        """Return ``sum_w |S_w| H_0(S_w)`` in bits."""
        return sum(sum(c.values()) * _entropy_of_counts(c.values())
                   for c in self.followers.values())


def h0(seq, sigma: int | None = None) -> float:
    """
    Zeroth-order empirical entropy in bits per symbol.

    An empty sequence has entropy 0.
    """
    values = list(seq)
    if sigma is not None:
        sequence_stats(values, sigma)
    return _entropy_of_counts(Counter(values).values())


def hk(seq, sigma: int | None = None, k: int = 0) -> float:
    """
    k-th order empirical entropy in bits per symbol.

    ``H_k(S) = (1/n) * sum_w |S_w| H_0(S_w)`` over the length-``k`` contexts ``w``
    of ``S``, where ``S_w`` collects the symbols following occurrences of ``w``.

    Args:
        seq: Sequence of integers.
        sigma (int, optional): Alphabet bound, checked when given.
        k (int): Context length.

    Returns:
        float: ``H_k(S)``; 0 for an empty sequence or when ``k >= n``.
    """
    values = list(seq)
    if sigma is not None:
        sequence_stats(values, sigma)
    if k < 0:
        raise ValueError("context length must be non-negative")
    n = len(values)
    if n == 0 or k >= n:
        return 0.0
    if k == 0:
        return h0(values)
    return ContextTable(values, k).weighted_entropy() / n


def entropy_profile(seq, max_k: int = 3) -> list:
    """Return ``[H_0, H_1, ..., H_max_k]`` of ``seq``."""
    values = list(seq)
    return [hk(values, k=k) for k in range(max_k + 1)]
