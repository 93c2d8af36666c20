"""
Block-compressed storage of an integer sequence with constant-time extraction.

The sequence is cut into blocks of ``block_len`` symbols. Distinct block
contents are ranked by decreasing frequency (ties by first occurrence) and the
block of rank ``r`` is written as the ``(r+1)``-st string of the enumeration
epsilon, 0, 1, 00, 01, 10, 11, 000, ... Codewords are not self-delimiting, so
block starts are sampled: an absolute 64-bit offset every ``superblock_blocks``
blocks and a relative offset for every block.

Blocks are also handed out in packed form (``sym_bits`` per symbol, symbol
``t`` of the block at bit ``t * sym_bits``), which is the key the universal
tables of ``partial_sums`` are indexed by.
"""
import logging
import os
import struct
from dataclasses import dataclass

import numpy as np
from bitarray import bitarray
from bitarray.util import ba2int

logger = logging.getLogger(__name__)

DEFAULT_TABLE_CAP = 24
TABLE_CAP_ENV = "WHEELER_SUMS_TABLE_CAP"
ABSOLUTE_OFFSET_BITS = 64

MAGIC = b"WFV1"
_HEADER = struct.Struct("<4sQQQQQ")


def resolve_table_cap(cap: int | None = None) -> int:
    """
    Return the universal-table key cap in bits.

    Args:
        cap (int, optional): Explicit cap. When omitted, ``WHEELER_SUMS_TABLE_CAP``
            is read from the environment, falling back to 24.

    Raises:
        ValueError: If the cap is not a positive integer.
    """
    if cap is None:
        raw = os.environ.get(TABLE_CAP_ENV)
        if raw is None or raw.strip() == "":
            return DEFAULT_TABLE_CAP
        try:
            cap = int(raw)
        except ValueError:
            raise ValueError(f"{TABLE_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"table cap must be positive, got {cap}")
    return cap


def floor_lg(n: int) -> int:
    return max(0, n.bit_length() - 1)


def ceil_lg(n: int) -> int:
    return max(0, (n - 1).bit_length())


def codeword_length(rank: int) -> int:
    """Length of the codeword for block rank ``rank``: ``floor(lg(rank + 1))``."""
    return (rank + 1).bit_length() - 1


def codeword(rank: int) -> bitarray:
    return bitarray(format(rank + 1, "b")[1:], endian="big")


@dataclass(frozen=True)
class FvParams:
    """
    Blocking parameters.

    Attributes:
        block_len (int): Symbols per block.
        sym_bits (int): Bits per packed symbol, ``ceil(lg sigma)`` (at least 1).
        key_bits (int): ``block_len * sym_bits``.
        superblock_blocks (int): Blocks per absolute offset sample.
    """
    block_len: int
    sym_bits: int
    key_bits: int
    superblock_blocks: int

    @classmethod
    def choose(cls, n: int, sigma: int, table_cap: int | None = None,
               block_len: int | None = None):
        """
        Pick ``block_len = max(1, floor(lg n / (2 sym_bits)))``, shrunk until the
        packed key fits the table cap.

        Raises:
            ValueError: If ``sigma < 1`` or a single symbol exceeds the cap.
        """
        if sigma < 1:
            raise ValueError(f"alphabet bound must be at least 1, got {sigma}")
        sym_bits = max(1, ceil_lg(sigma))
        if block_len is None:
            cap = resolve_table_cap(table_cap)
            if sym_bits > cap:
                raise ValueError(f"{sym_bits}-bit symbols exceed the {cap}-bit table cap")
            block_len = max(1, floor_lg(n) // (2 * sym_bits))
            while block_len > 1 and block_len * sym_bits > cap:
                block_len -= 1
        elif block_len < 1:
            raise ValueError(f"block length must be at least 1, got {block_len}")
        return cls(block_len=block_len, sym_bits=sym_bits,
                   key_bits=block_len * sym_bits,
                   superblock_blocks=max(1, ceil_lg(n)))


def pack_blocks(values: np.ndarray, params: FvParams, pad: int = 0) -> np.ndarray:
    """Pack a sequence into one integer key per block, padding the tail with ``pad``."""
    length = params.block_len
    num_blocks = -(-len(values) // length)
    padded = np.full(num_blocks * length, pad, dtype=np.int64)
    padded[:len(values)] = values
    shifts = np.arange(length, dtype=np.int64) * params.sym_bits
    return (padded.reshape(-1, length) << shifts).sum(axis=1)


def unpack_key(key: int, params: FvParams) -> list:
    mask = (1 << params.sym_bits) - 1
    return [(key >> (t * params.sym_bits)) & mask for t in range(params.block_len)]


class FvStore:
    """
    Immutable block-coded sequence.

    Attributes:
        n (int): Sequence length.
        sigma (int): Alphabet bound.
        params (FvParams): Blocking parameters.
        codebook (numpy.ndarray): Packed block keys in rank order.
        stream (bitarray): Concatenated codewords.
        superblock_offsets (numpy.ndarray): Absolute bit offset of every
            ``superblock_blocks``-th block.
        relative_offsets (numpy.ndarray): Offset of each block (plus an end
            sentinel) relative to its superblock's absolute offset.
    """

    def __init__(self, n, sigma, params, codebook, stream, superblock_offsets, relative_offsets):
        self.n = n
        self.sigma = sigma
        self.params = params
        self.codebook = codebook
        self.stream = stream
        self.superblock_offsets = superblock_offsets
        self.relative_offsets = relative_offsets
        self.num_blocks = len(relative_offsets) - 1
        self._full_mask = (1 << params.key_bits) - 1

    def __len__(self):
        return self.n

    def block_offset(self, b: int) -> int:
        """Bit offset of 0-based block ``b`` (``b == num_blocks`` gives the stream end)."""
        return (int(self.superblock_offsets[b // self.params.superblock_blocks])
                + int(self.relative_offsets[b]))

    def block_rank(self, b: int) -> int:
        start = self.block_offset(b)
        end = self.block_offset(b + 1)
        if end == start:
            return 0
        return (1 << (end - start)) - 1 + ba2int(self.stream[start:end])

    def block_key(self, b: int) -> int:
        """Packed contents of 0-based block ``b``."""
        return int(self.codebook[self.block_rank(b)])

    def decode_block(self, b: int) -> list:
        """
        Decode block ``b`` (1-based).

        The last block is truncated to the true sequence length.

        Raises:
            IndexError: If ``b`` is outside ``[1, num_blocks]``.
        """
        if not 1 <= b <= self.num_blocks:
            raise IndexError(f"block {b} outside [1, {self.num_blocks}]")
        symbols = unpack_key(self.block_key(b - 1), self.params)
        start = (b - 1) * self.params.block_len
        return symbols[:self.n - start]

    def extract(self, i: int, length: int) -> list:
        """
        Return ``S[i .. i + length - 1]``.

        Decodes ``O(1 + length / block_len)`` blocks.

        Raises:
            IndexError: If the range leaves ``[1, n]``.
        """
        if length < 0 or i < 1 or i + length - 1 > self.n:
            raise IndexError(f"extract({i}, {length}) outside [1, {self.n}]")
        if length == 0:
            return []
        block_len = self.params.block_len
        first = (i - 1) // block_len
        last = (i + length - 2) // block_len
        symbols = []
        for b in range(first, last + 1):
            symbols.extend(unpack_key(self.block_key(b), self.params))
        skip = (i - 1) - first * block_len
        return symbols[skip:skip + length]

    def window_key(self, p: int, pad: int) -> int:
        """
        Packed key of the ``block_len`` symbols starting at 1-based position ``p``.

        Positions past ``n`` are filled with ``pad``. At most two blocks are decoded.
        """
        params = self.params
        sym_bits = params.sym_bits
        length = params.block_len
        pad_key = 0
        for t in range(length):
            pad_key |= pad << (t * sym_bits)
        b, off = divmod(p - 1, length)
        key = self.block_key(b) if b < self.num_blocks else pad_key
        key >>= off * sym_bits
        if off:
            following = self.block_key(b + 1) if b + 1 < self.num_blocks else pad_key
            key |= (following << ((length - off) * sym_bits)) & self._full_mask
        valid = self.n - (p - 1)
        if valid < length:
            keep = (1 << (max(valid, 0) * sym_bits)) - 1
            key = (key & keep) | (pad_key & ~keep & self._full_mask)
        return key

    def decode(self) -> list:
        """Concatenate every block: reproduces the stored sequence."""
        out = []
        for b in range(self.num_blocks):
            out.extend(unpack_key(self.block_key(b), self.params))
        return out[:self.n]

    def space_report(self) -> dict:
        """
        Bits used, by component.

        Returns:
            dict: ``payload`` (codeword bits), ``pointers`` (offset samples) and
            ``codebook`` (distinct block keys).
        """
        relative_bits = max(1, int(self.relative_offsets.max(initial=0)).bit_length())
        return {
            "payload": len(self.stream),
            "pointers": (len(self.superblock_offsets) * ABSOLUTE_OFFSET_BITS
                         + len(self.relative_offsets) * relative_bits),
            "codebook": len(self.codebook) * self.params.key_bits,
        }

    def to_bytes(self) -> bytes:
        """Serialize as a ``WFV1`` header, the codebook, the offsets and the stream."""
        stream = bitarray(self.stream, endian="big")
        owners = np.arange(len(self.relative_offsets)) // self.params.superblock_blocks
        starts = self.superblock_offsets[owners] + self.relative_offsets
        parts = [
            _HEADER.pack(MAGIC, self.n, self.sigma, self.params.block_len,
                         len(self.codebook), len(stream)),
            np.asarray(self.codebook, dtype="<u8").tobytes(),
            np.asarray(starts, dtype="<u8").tobytes(),
            stream.tobytes(),
        ]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0):
        """
        Load a store written by ``to_bytes``.

        Returns:
            tuple: ``(FvStore, end_offset)``.

        Raises:
            ValueError: On a bad magic or a truncated buffer.
        """
        if len(data) < offset + _HEADER.size:
            raise ValueError("truncated block store header")
        magic, n, sigma, block_len, entries, stream_bits = _HEADER.unpack_from(data, offset)
        if magic != MAGIC:
            raise ValueError(f"bad block store magic {magic!r}")
        params = FvParams.choose(n, sigma, block_len=block_len)
        num_blocks = -(-n // block_len)
        pos = offset + _HEADER.size
        codebook_end = pos + 8 * entries
        offsets_end = codebook_end + 8 * (num_blocks + 1)
        end = offsets_end + -(-stream_bits // 8)
        if len(data) < end:
            raise ValueError("truncated block store payload")
        codebook = np.frombuffer(data[pos:codebook_end], dtype="<u8").astype(np.int64)
        starts = np.frombuffer(data[codebook_end:offsets_end], dtype="<u8").astype(np.int64)
        stream = bitarray(endian="big")
        stream.frombytes(bytes(data[offsets_end:end]))
        del stream[stream_bits:]
        superblock, relative = _split_offsets(starts, params)
        return cls(n, sigma, params, codebook, stream, superblock, relative), end


def _split_offsets(starts, params):
    """Split absolute block starts into superblock samples and relative offsets."""
    starts = np.asarray(starts, dtype=np.int64)
    superblock = starts[::params.superblock_blocks].copy()
    owners = np.arange(len(starts)) // params.superblock_blocks
    return superblock, starts - superblock[owners]


def build_fv(seq, sigma: int, table_cap: int | None = None, block_len: int | None = None) -> FvStore:
    """
    Block-code ``seq`` over the alphabet ``[0, sigma)``.

    Args:
        seq: Sequence of integers in ``[0, sigma)``.
        sigma (int): Alphabet bound.
        table_cap (int, optional): Key-bit cap; see ``resolve_table_cap``.
        block_len (int, optional): Force a block length (used when reloading).

    Returns:
        FvStore: The coded sequence.

    Raises:
        ValueError: If ``sigma < 1`` or a symbol lies outside ``[0, sigma)``.
    """
    values = np.asarray(list(seq), dtype=np.int64)
    n = len(values)
    params = FvParams.choose(n, sigma, table_cap=table_cap, block_len=block_len)
    if n and (values.min() < 0 or values.max() >= sigma):
        raise ValueError(f"symbols must lie in [0, {sigma})")

    keys = pack_blocks(values, params)
    if len(keys):
        distinct, first_seen, inverse, counts = np.unique(
            keys, return_index=True, return_inverse=True, return_counts=True)
        order = np.lexsort((first_seen, -counts))
        rank_of = np.empty(len(distinct), dtype=np.int64)
        rank_of[order] = np.arange(len(distinct))
        codebook = distinct[order]
        ranks = rank_of[inverse.reshape(-1)]
    else:
        codebook = np.zeros(0, dtype=np.int64)
        ranks = np.zeros(0, dtype=np.int64)

    codewords = [codeword(r) for r in range(len(codebook))]
    stream = bitarray(endian="big")
    for r in ranks.tolist():
        stream += codewords[r]

    lengths = np.array([len(c) for c in codewords], dtype=np.int64)[ranks] if len(ranks) else ranks
    starts = np.zeros(len(ranks) + 1, dtype=np.int64)
    np.cumsum(lengths, out=starts[1:])
    superblock, relative = _split_offsets(starts, params)

    store = FvStore(n, sigma, params, codebook, stream, superblock, relative)
    logger.info(f"Block-coded {n} symbols: block_len={params.block_len}, "
                f"{len(codebook)} distinct blocks, {len(stream)} payload bits.")
    return store
