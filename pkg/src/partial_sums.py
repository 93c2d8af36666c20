"""
Searchable partial sums over static sequences of small integers.

``sum(i)`` is the i-th prefix sum and ``search(j)`` the smallest ``i`` with
``sum(i) >= j``, i.e. the element holding unit ``j``. Three backends:

- ``mn``: one bitvector with ``S[i] - 1`` zeros then a 1 per element;
  ``sum(i) = select1(i)`` and ``search(j) = rank1(j - 1) + 1``.
- ``entropy``: the block-coded store of ``fv_store`` plus sampled sums,
  sampled search answers and two universal tables, all queries in constant time.
- ``chain``: a degenerate wavelet tree, one bitvector per symbol value;
  ``sum`` costs one rank per level and ``search`` binary-searches ``sum``.

``OutDegreeSums`` and ``InDegreeSums`` adapt a positive-sequence backend to
degree sequences containing zeros.
"""
import bisect
import logging
import struct
from dataclasses import dataclass

import numpy as np

from src.bitvector import BitVector
from src.fv_store import FvParams, FvStore, build_fv, ceil_lg, resolve_table_cap

logger = logging.getLogger(__name__)

BACKENDS = ("mn", "entropy", "chain")

MAGIC = b"WPS1"
_HEADER = struct.Struct("<4s8sQQQ")
_COUNT = struct.Struct("<Q")


def _width(bound: int) -> int:
    """Bits a packed field needs to hold any value in ``[0, bound]``."""
    return max(1, int(bound).bit_length())


def _values(seq) -> np.ndarray:
    return np.asarray(list(seq), dtype=np.int64).reshape(-1)


def _prefix_sums(values: np.ndarray) -> np.ndarray:
    prefix = np.zeros(len(values) + 1, dtype=np.int64)
    np.cumsum(values, out=prefix[1:])
    return prefix


def _require_positive(values: np.ndarray):
    if len(values) and values.min() < 1:
        bad = int(np.flatnonzero(values < 1)[0]) + 1
        raise ValueError(f"S[{bad}] = {int(values[bad - 1])} is not positive; "
                         "apply transform_out_degrees or transform_in_degrees first")


class PartialSums:
    """
    Common surface of every backend.

    Attributes:
        n (int): Sequence length.
        total (int): ``u = sum(n)``.
        backend (str): One of ``BACKENDS``.
    """

    backend = ""

    def __init__(self, n: int, total: int):
        self.n = n
        self.total = total

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, total={self.total})"

    def _check_sum(self, i):
        if not 0 <= i <= self.n:
            raise IndexError(f"sum index {i} outside [0, {self.n}]")

    def _check_search(self, j):
        if not 1 <= j <= self.total:
            raise IndexError(f"search argument {j} outside [1, {self.total}]")

    def sum(self, i: int) -> int:
        raise NotImplementedError()

    def search(self, j: int) -> int:
        """Smallest ``i`` with ``sum(i) >= j``, found by binary search over ``sum``."""
        self._check_search(j)
        return bisect.bisect_left(range(self.n + 1), j, key=self.sum)

    def decode(self) -> list:
        return [self.sum(i) - self.sum(i - 1) for i in range(1, self.n + 1)]

    def space_breakdown(self) -> dict:
        raise NotImplementedError()

    def auxiliary_bits(self) -> int:
        """Bits spent beyond the payload on query support."""
        return sum(v for k, v in self.space_breakdown().items() if k != "payload")

    def _payload_bytes(self) -> bytes:
        raise NotImplementedError()

    def sigma(self) -> int:
        raise NotImplementedError()

    def to_bytes(self) -> bytes:
        """Serialize as a ``WPS1`` header followed by the backend's payload component."""
        header = _HEADER.pack(MAGIC, self.backend.encode().ljust(8, b"\0"),
                              self.n, self.sigma(), self.total)
        return header + self._payload_bytes()


class MnPartialSums(PartialSums):
    """
    Makinen-Navarro bitvector backend.

    Attributes:
        bits (BitVector): ``u`` bits, exactly ``n`` ones; ``select1(i) = sum(i)``.
    """

    backend = "mn"

    def __init__(self, bits: BitVector, max_value: int = 0):
        super().__init__(bits.index.ones, bits.length)
        self.bits = bits
        self.max_value = max_value

    def sum(self, i: int) -> int:
        self._check_sum(i)
        return 0 if i == 0 else self.bits.select1(i)

    def search(self, j: int) -> int:
        self._check_search(j)
        return self.bits.rank1(j - 1) + 1

    def sigma(self) -> int:
        return self.max_value + 1

    def space_breakdown(self) -> dict:
        report = self.bits.space_report()
        return {"payload": report["payload"], "index": report["index"]}

    def _payload_bytes(self) -> bytes:
        return self.bits.to_bytes()


def build_mn(seq) -> MnPartialSums:
    """
    Build the bitvector backend over a sequence of positive integers.

    Args:
        seq: Positive integers.

    Returns:
        MnPartialSums: The structure.

    Raises:
        ValueError: If some element is not positive.
    """
    values = _values(seq)
    _require_positive(values)
    prefix = _prefix_sums(values)
    bits = np.zeros(int(prefix[-1]), dtype=bool)
    bits[prefix[1:] - 1] = True
    structure = MnPartialSums(BitVector(bits), int(values.max(initial=0)))
    logger.info(f"Built mn partial sums: n={structure.n}, u={structure.total}.")
    return structure


@dataclass
class SumIndex:
    """
    Sampled prefix sums on the block grid of the store.

    ``superblock_sums[c]`` is the sum of the first ``c * superblock_len``
    elements; ``block_sums[b]`` is the sum of the first ``b * block_len``
    elements minus the sum at the start of block ``b``'s superblock.
    """
    block_len: int
    blocks_per_superblock: int
    superblock_sums: np.ndarray
    block_sums: np.ndarray

    @property
    def superblock_len(self):
        return self.block_len * self.blocks_per_superblock

    @classmethod
    def build(cls, prefix: np.ndarray, block_len: int, blocks_per_superblock: int):
        superblock_len = block_len * blocks_per_superblock
        superblock_sums = prefix[::superblock_len].copy()
        block_starts = prefix[::block_len]
        owners = np.arange(len(block_starts)) // blocks_per_superblock
        return cls(block_len, blocks_per_superblock, superblock_sums,
                   block_starts - superblock_sums[owners])

    def size_in_bits(self, sigma: int, n: int) -> int:
        return (len(self.superblock_sums) * _width((sigma - 1) * n)
                + len(self.block_sums) * _width((sigma - 1) * self.superblock_len))


@dataclass
class SearchIndex:
    """
    Sampled search answers on two grids over the argument ``j``.

    ``coarse[c]`` holds ``search(max(c * t_big, 1))`` and ``fine[m]`` holds
    ``search(max(m * t_small, 1))`` minus the coarse sample preceding ``m * t_small``.
    """
    t_big: int
    t_small: int
    coarse: np.ndarray
    fine: np.ndarray

    @classmethod
    def build(cls, prefix: np.ndarray, t_big: int, t_small: int):
        total = int(prefix[-1])

        def search_at(points):
            return np.searchsorted(prefix, np.maximum(points, 1), side="left").astype(np.int64)

        coarse = search_at(np.arange(total // t_big + 1, dtype=np.int64) * t_big)
        fine_points = np.arange(total // t_small + 1, dtype=np.int64) * t_small
        fine = search_at(fine_points) - coarse[fine_points // t_big]
        return cls(t_big, t_small, coarse, fine)

    def size_in_bits(self, n: int) -> int:
        return len(self.coarse) * _width(n) + len(self.fine) * _width(self.t_big)


class UniversalSumTable:
    """
    ``entry[key, r]``: sum of the first ``r`` symbols of the packed block ``key``.

    Indexed directly by every possible key, so it depends only on the block
    parameters, never on the sequence.
    """

    def __init__(self, block_len: int, sym_bits: int):
        self.block_len = block_len
        self.sym_bits = sym_bits
        symbols = _all_blocks(block_len, sym_bits)
        self.entries = np.zeros((len(symbols), block_len + 1), dtype=np.int32)
        np.cumsum(symbols, axis=1, out=self.entries[:, 1:])

    def __getitem__(self, item):
        return int(self.entries[item])

    def size_in_bits(self) -> int:
        return self.entries.size * _width(((1 << self.sym_bits) - 1) * self.block_len)


class UniversalSearchTable:
    """
    ``entry[key, q]``: the largest ``t`` whose first ``t`` symbols of block
    ``key`` sum to at most ``q``, for ``q`` in ``[0, sigma * block_len]``.
    """

    def __init__(self, block_len: int, sym_bits: int, sigma: int):
        self.block_len = block_len
        self.max_query = sigma * block_len
        prefix = np.cumsum(_all_blocks(block_len, sym_bits), axis=1)
        queries = np.arange(self.max_query + 1, dtype=np.int64)
        self.entries = np.zeros((len(prefix), self.max_query + 1), dtype=np.int16)
        for t in range(block_len):
            self.entries += prefix[:, t, None] <= queries[None, :]

    def __getitem__(self, item):
        return int(self.entries[item])

    def size_in_bits(self) -> int:
        return self.entries.size * _width(self.block_len)

    @staticmethod
    def entry_count(block_len: int, sym_bits: int, sigma: int) -> int:
        return (1 << (block_len * sym_bits)) * (sigma * block_len + 1)


def _all_blocks(block_len: int, sym_bits: int) -> np.ndarray:
    keys = np.arange(1 << (block_len * sym_bits), dtype=np.int64)
    shifts = np.arange(block_len, dtype=np.int64) * sym_bits
    return (keys[:, None] >> shifts[None, :]) & ((1 << sym_bits) - 1)


class EntropyPartialSums(PartialSums):
    """
    Constant-time sum and search over the block-coded store.

    ``sum(i)`` adds a superblock sample, a block sample and one sum-table
    lookup on the block holding ``i``. ``search(j)`` starts from the sampled
    answer ``p0`` for the largest multiple of ``block_len`` not above ``j``.
    Positive elements put the answer fewer than ``block_len`` elements past
    ``p0``, so one search-table lookup on the window starting at ``p0``
    finishes the query.

    Attributes:
        store (FvStore): The coded sequence.
        sum_index (SumIndex): Sampled sums.
        search_index (SearchIndex): Sampled search answers.
        sum_table (UniversalSumTable): In-block prefix sums.
        search_table (UniversalSearchTable): In-block search.
    """

    backend = "entropy"

    def __init__(self, store: FvStore):
        values = np.asarray(store.decode(), dtype=np.int64)
        _require_positive(values)
        prefix = _prefix_sums(values)
        super().__init__(store.n, int(prefix[-1]))
        self.store = store
        params = store.params
        self.block_len = params.block_len
        lg_n = max(1, ceil_lg(store.n))
        self.sum_index = SumIndex.build(prefix, params.block_len, lg_n)
        self.search_index = SearchIndex.build(prefix, t_big=store.sigma * lg_n * lg_n,
                                              t_small=params.block_len)
        self.sum_table = UniversalSumTable(params.block_len, params.sym_bits)
        self.search_table = UniversalSearchTable(params.block_len, params.sym_bits, store.sigma)
        self._pad = store.sigma - 1

    def sum(self, i: int) -> int:
        self._check_sum(i)
        index = self.sum_index
        block, offset = divmod(i, self.block_len)
        result = (int(index.superblock_sums[block // index.blocks_per_superblock])
                  + int(index.block_sums[block]))
        if offset:
            result += int(self.sum_table.entries[self.store.block_key(block), offset])
        return result

    def sampled_search(self, j0: int) -> int:
        """Stored answer for a multiple ``j0`` of ``t_small``: ``search(max(j0, 1))``."""
        index = self.search_index
        return int(index.coarse[j0 // index.t_big]) + int(index.fine[j0 // index.t_small])

    def search(self, j: int) -> int:
        self._check_search(j)
        j0 = (j // self.block_len) * self.block_len
        start = self.sampled_search(j0)
        remaining = j - self.sum(start - 1)
        key = self.store.window_key(start, self._pad)
        return start + int(self.search_table.entries[key, remaining - 1])

    def decode(self) -> list:
        return self.store.decode()

    def sigma(self) -> int:
        return self.store.sigma

    def space_breakdown(self) -> dict:
        store = self.store.space_report()
        return {
            "payload": store["payload"],
            "pointers": store["pointers"],
            "codebook": store["codebook"],
            "sum_index": self.sum_index.size_in_bits(self.store.sigma, self.n),
            "search_index": self.search_index.size_in_bits(self.n),
            "tables": self.sum_table.size_in_bits() + self.search_table.size_in_bits(),
        }

    def auxiliary_bits(self) -> int:
        """Index and table bits added on top of the block-coded store."""
        report = self.space_breakdown()
        return report["sum_index"] + report["search_index"] + report["tables"]

    def _payload_bytes(self) -> bytes:
        return self.store.to_bytes()


def build_entropy(seq, sigma: int | None = None, table_cap: int | None = None) -> EntropyPartialSums:
    """
    Build the entropy-compressed backend over a sequence of positive integers.

    Args:
        seq: Positive integers.
        sigma (int, optional): Alphabet bound, greater than every element;
            defaults to ``max + 1`` (at least 2).
        table_cap (int, optional): Universal-table key cap in bits.

    Returns:
        EntropyPartialSums: The structure.

    The block length of the store is shrunk until the search table, which
    grows with ``sigma`` as well as with the block key, holds at most
    ``2 ** table_cap`` entries.

    Raises:
        ValueError: If an element is not positive or not below ``sigma``, or if
            the search table exceeds the cap even for one-symbol blocks.
    """
    values = _values(seq)
    _require_positive(values)
    max_value = int(values.max(initial=1))
    if sigma is None:
        sigma = max_value + 1
    if sigma <= max_value:
        raise ValueError(f"alphabet bound {sigma} must exceed the largest element {max_value}")
    cap = resolve_table_cap(table_cap)
    params = FvParams.choose(len(values), sigma, table_cap=cap)
    block_len = params.block_len
    while block_len > 1 and UniversalSearchTable.entry_count(block_len, params.sym_bits, sigma) > 1 << cap:
        block_len -= 1
    entries = UniversalSearchTable.entry_count(block_len, params.sym_bits, sigma)
    if entries > 1 << cap:
        raise ValueError(f"alphabet bound {sigma} needs a {entries}-entry search table, "
                         f"over the 2^{cap} table cap")
    structure = EntropyPartialSums(build_fv(values, sigma, block_len=block_len))
    logger.info(f"Built entropy partial sums: n={structure.n}, u={structure.total}, "
                f"block_len={structure.block_len}.")
    return structure


class ChainWavelet:
    """
    Degenerate wavelet tree: level ``l`` marks, among the elements that reached
    it, those equal to ``l`` with a 0 and the survivors with a 1. Zeros survive
    every level.

    Attributes:
        levels (list): ``BitVector`` per level ``1 .. sigma - 1``.
    """

    def __init__(self, levels: list):
        self.levels = levels

    @classmethod
    def build(cls, values: np.ndarray, sigma: int):
        levels = []
        current = values
        for level in range(1, sigma):
            survives = current != level
            levels.append(BitVector(survives))
            current = current[survives]
        return cls(levels)

    def decode(self, n: int) -> list:
        out = []
        for p in range(1, n + 1):
            value, pos = 0, p
            for level, bits in enumerate(self.levels, start=1):
                if not bits.access(pos):
                    value = level
                    break
                pos = bits.rank1(pos)
            out.append(value)
        return out


class ChainPartialSums(PartialSums):
    """Degenerate-wavelet-tree backend; ``sum`` costs one rank per level."""

    backend = "chain"

    def __init__(self, chain: ChainWavelet, n: int):
        self.chain = chain
        self._sigma = len(chain.levels) + 1
        super().__init__(n, 0)
        self.total = self.sum(n)

    def sum_trace(self, i: int) -> list:
        """Return the ``rank0`` value read at each level while computing ``sum(i)``."""
        self._check_sum(i)
        ranks = []
        pos = i
        for bits in self.chain.levels:
            zeros = bits.rank0(pos)
            ranks.append(zeros)
            pos -= zeros
        return ranks

    def sum(self, i: int) -> int:
        self._check_sum(i)
        total, pos = 0, i
        for level, bits in enumerate(self.chain.levels, start=1):
            if pos == 0:
                break
            zeros = bits.rank0(pos)
            total += level * zeros
            pos -= zeros
        return total

    def decode(self) -> list:
        return self.chain.decode(self.n)

    def sigma(self) -> int:
        return self._sigma

    def space_breakdown(self) -> dict:
        reports = [bits.space_report() for bits in self.chain.levels]
        return {"payload": sum(r["payload"] for r in reports),
                "index": sum(r["index"] for r in reports)}

    def _payload_bytes(self) -> bytes:
        parts = [_COUNT.pack(len(self.chain.levels))]
        parts.extend(bits.to_bytes() for bits in self.chain.levels)
        return b"".join(parts)


def build_chain(seq, sigma: int | None = None) -> ChainPartialSums:
    """
    Build the degenerate wavelet tree over symbols in ``[0, sigma)``.

    Raises:
        ValueError: If a symbol is negative or not below ``sigma``.
    """
    values = _values(seq)
    if len(values) and values.min() < 0:
        raise ValueError("chain backend needs non-negative symbols")
    max_value = int(values.max(initial=0))
    if sigma is None:
        sigma = max_value + 1
    if sigma <= max_value:
        raise ValueError(f"alphabet bound {sigma} must exceed the largest element {max_value}")
    structure = ChainPartialSums(ChainWavelet.build(values, sigma), len(values))
    logger.info(f"Built chain partial sums: n={structure.n}, {sigma - 1} levels.")
    return structure


def build_partial_sums(seq, backend: str = "mn", sigma: int | None = None,
                       table_cap: int | None = None) -> PartialSums:
    """Build ``backend`` over ``seq``; see ``build_mn``, ``build_entropy``, ``build_chain``."""
    if backend == "mn":
        return build_mn(seq)
    if backend == "entropy":
        return build_entropy(seq, sigma=sigma, table_cap=table_cap)
    if backend == "chain":
        return build_chain(seq, sigma=sigma)
    raise ValueError(f"unknown backend {backend!r}; expected one of {', '.join(BACKENDS)}")


def load_partial_sums(data: bytes, offset: int = 0):
    """
    Load a structure written by ``PartialSums.to_bytes``.

    Derived indexes are rebuilt from the stored payload component.

    Returns:
        tuple: ``(PartialSums, end_offset)``.

    Raises:
        ValueError: On a bad magic, unknown backend or truncated buffer.
    """
    if len(data) < offset + _HEADER.size:
        raise ValueError("truncated partial sums header")
    magic, tag, n, sigma, total = _HEADER.unpack_from(data, offset)
    if magic != MAGIC:
        raise ValueError(f"bad partial sums magic {magic!r}")
    backend = tag.rstrip(b"\0").decode()
    pos = offset + _HEADER.size
    if backend == "mn":
        bits, end = BitVector.from_bytes(data, pos)
        structure = MnPartialSums(bits, max_value=sigma - 1)
    elif backend == "entropy":
        store, end = FvStore.from_bytes(data, pos)
        structure = EntropyPartialSums(store)
    elif backend == "chain":
        (count,) = _COUNT.unpack_from(data, pos)
        end = pos + _COUNT.size
        levels = []
        for _ in range(count):
            bits, end = BitVector.from_bytes(data, end)
            levels.append(bits)
        structure = ChainPartialSums(ChainWavelet(levels), n)
    else:
        raise ValueError(f"unknown partial sums backend {backend!r}")
    if structure.n != n or structure.total != total:
        raise ValueError("partial sums header does not match its payload")
    return structure, end


class OutDegreeSums:
    """
    Partial sums over a sequence with zeros, stored as the sequence plus one.

    ``sum_D(i) = sum_D'(i) - i``; the incremented sequence has the same
    ``n H_k`` as the original.

    Attributes:
        inner (PartialSums): Structure over ``D' = D + 1``.
    """

    def __init__(self, inner: PartialSums):
        self.inner = inner
        self.n = inner.n
        self.total = inner.total - inner.n

    @property
    def backend(self):
        return self.inner.backend

    def sum(self, i: int) -> int:
        return self.inner.sum(i) - i

    def search(self, j: int) -> int:
        if not 1 <= j <= self.total:
            raise IndexError(f"search argument {j} outside [1, {self.total}]")
        return bisect.bisect_left(range(self.n + 1), j, key=self.sum)

    def decode(self) -> list:
        return [x - 1 for x in self.inner.decode()]

    def space_breakdown(self) -> dict:
        return self.inner.space_breakdown()


class InDegreeSums:
    """
    Partial sums over a sequence whose zeros form a prefix, stored without them.

    ``search_D(j) = search_D'(j) + z`` with ``z`` the number of leading zeros.

    Attributes:
        inner (PartialSums): Structure over the positive suffix ``D'``.
        leading_zeros (int): ``z``.
    """

    def __init__(self, inner: PartialSums, leading_zeros: int):
        self.inner = inner
        self.leading_zeros = leading_zeros
        self.n = inner.n + leading_zeros
        self.total = inner.total

    @property
    def backend(self):
        return self.inner.backend

    def sum(self, i: int) -> int:
        if not 0 <= i <= self.n:
            raise IndexError(f"sum index {i} outside [0, {self.n}]")
        return self.inner.sum(i - self.leading_zeros) if i > self.leading_zeros else 0

    def search(self, j: int) -> int:
        return self.inner.search(j) + self.leading_zeros

    def decode(self) -> list:
        return [0] * self.leading_zeros + self.inner.decode()

    def space_breakdown(self) -> dict:
        return self.inner.space_breakdown()


def transform_out_degrees(degrees, backend: str = "mn", table_cap: int | None = None) -> OutDegreeSums:
    """
    Build partial sums over out-degrees by incrementing every entry.

    Args:
        degrees: Non-negative integers.
        backend (str): Backend for the incremented sequence.
        table_cap (int, optional): Universal-table key cap for the entropy backend.

    Returns:
        OutDegreeSums: Adapter exposing ``sum`` on the original sequence; the
        structure over the incremented sequence is its ``inner``.

    Raises:
        ValueError: If an entry is negative.
    """
    values = _values(degrees)
    if len(values) and values.min() < 0:
        raise ValueError("degrees must be non-negative")
    return OutDegreeSums(build_partial_sums(values + 1, backend, table_cap=table_cap))


def transform_in_degrees(degrees, backend: str = "mn", table_cap: int | None = None) -> InDegreeSums:
    """
    Build partial sums over in-degrees by dropping the leading zeros.

    Args:
        degrees: Non-negative integers whose zeros all precede every nonzero.
        backend (str): Backend for the positive suffix.
        table_cap (int, optional): Universal-table key cap for the entropy backend.

    Returns:
        InDegreeSums: Adapter exposing ``search`` on the original sequence.

    Raises:
        ValueError: If a zero follows a nonzero entry, or an entry is negative.
    """
    values = _values(degrees)
    if len(values) and values.min() < 0:
        raise ValueError("degrees must be non-negative")
    nonzero = np.flatnonzero(values)
    leading = int(nonzero[0]) if len(nonzero) else len(values)
    rest = values[leading:]
    if len(rest) and rest.min() == 0:
        bad = leading + int(np.flatnonzero(rest == 0)[0]) + 1
        raise ValueError(f"in-degree zero at position {bad} follows a nonzero in-degree")
    return InDegreeSums(build_partial_sums(rest, backend, table_cap=table_cap), leading)


def space_breakdown(structure) -> dict:
    """Per-component bit counts of any backend or adapter."""
    return structure.space_breakdown()
