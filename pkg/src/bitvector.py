"""
Plain bitvectors with sampled rank/select indexes.

Every other structure in the package sits on top of this module: the
Makinen-Navarro partial-sums backend is one bitvector, the chain wavelet is a
list of them, and the Wheeler index keeps one per edge label. Bits live in a
little-endian ``bitarray``; the index is three numpy arrays sampled over it.
Positions are 1-based everywhere, and ``rank1(0)`` is legal.
"""
import logging
import struct

import numpy as np
from bitarray import bitarray
from bitarray.util import count_n

logger = logging.getLogger(__name__)

SUPERBLOCK_BITS = 512
BLOCK_BITS = 64
BLOCKS_PER_SUPERBLOCK = SUPERBLOCK_BITS // BLOCK_BITS
SELECT_SAMPLE = 4096

# absolute samples are stored as 64-bit words, relative block ranks in ceil(lg SB) bits
ABSOLUTE_SAMPLE_BITS = 64
BLOCK_RANK_BITS = (SUPERBLOCK_BITS - 1).bit_length()

MAGIC = b"WBV1"
_HEADER = struct.Struct("<4sQ")


def _as_bitarray(bits):
    if isinstance(bits, (bitarray, str)):
        return bitarray(bits, endian="little")
    if isinstance(bits, np.ndarray):
        return pack_bits(bits)
    return bitarray([1 if b else 0 for b in bits], endian="little")


def pack_bits(values: np.ndarray) -> bitarray:
    """Pack a numpy array of 0/1 (or booleans) into a little-endian bitarray."""
    flat = np.asarray(values, dtype=bool).reshape(-1)
    out = bitarray(endian="little")
    out.frombytes(np.packbits(flat, bitorder="little").tobytes())
    del out[len(flat):]
    return out


def unpack_bits(bits: bitarray) -> np.ndarray:
    """
    Unpack a little-endian bitarray into a uint8 array of 0/1 values.

    Args:
        bits (bitarray): Bits to unpack.

    Returns:
        numpy.ndarray: One entry per bit, in order.
    """
    raw = np.frombuffer(bits.tobytes(), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:len(bits)]


class RankSelectIndex:
    """
    Two-level rank samples plus sampled select positions over a bitarray.

    Attributes:
        superblock_ranks (numpy.ndarray): ``superblock_ranks[c]`` is the number
            of 1s in the first ``c * SUPERBLOCK_BITS`` bits.
        block_ranks (numpy.ndarray): ``block_ranks[b]`` is the number of 1s
            between the start of block ``b``'s superblock and the start of block ``b``.
        select_samples (numpy.ndarray): 1-based position of the
            ``(s * SELECT_SAMPLE + 1)``-th 1-bit, for every ``s``.
        ones (int): Total number of 1s.
    """

    def __init__(self, bits: bitarray):
        length = len(bits)
        unpacked = unpack_bits(bits)
        num_blocks = -(-length // BLOCK_BITS)
        padded = np.zeros(num_blocks * BLOCK_BITS, dtype=np.uint8)
        padded[:length] = unpacked
        per_block = padded.reshape(-1, BLOCK_BITS).sum(axis=1, dtype=np.int64)

        cumulative = np.zeros(num_blocks + 1, dtype=np.int64)
        np.cumsum(per_block, out=cumulative[1:])

        self.superblock_ranks = cumulative[::BLOCKS_PER_SUPERBLOCK].copy()
        owners = np.arange(num_blocks + 1) // BLOCKS_PER_SUPERBLOCK
        self.block_ranks = (cumulative - self.superblock_ranks[owners]).astype(np.uint16)
        self.select_samples = (np.flatnonzero(unpacked)[::SELECT_SAMPLE] + 1).astype(np.int64)
        self.ones = int(cumulative[-1])
        self.num_blocks = num_blocks

    def size_in_bits(self) -> int:
        return (len(self.superblock_ranks) * ABSOLUTE_SAMPLE_BITS
                + len(self.block_ranks) * BLOCK_RANK_BITS
                + len(self.select_samples) * ABSOLUTE_SAMPLE_BITS)


class BitVector:
    """
    Immutable bit array answering access, rank and select in constant time.

    Args:
        bits: A string of '0'/'1', a bitarray, or any iterable of truthy/falsy values.

    Attributes:
        bits (bitarray): The payload, little-endian.
        length (int): Number of bits.
        index (RankSelectIndex): Sampled rank/select index built over ``bits``.
    """

    def __init__(self, bits=()):
        self.bits = _as_bitarray(bits)
        self.length = len(self.bits)
        self.index = RankSelectIndex(self.bits)

    def __len__(self):
        return self.length

    def __eq__(self, other):
        return isinstance(other, BitVector) and self.bits == other.bits

    def __repr__(self):
        return f"BitVector(length={self.length}, ones={self.index.ones})"

    def to01(self) -> str:
        return self.bits.to01()

    def access(self, i: int) -> int:
        """Return bit ``i`` (1-based)."""
        if not 1 <= i <= self.length:
            raise IndexError(f"access position {i} outside [1, {self.length}]")
        return self.bits[i - 1]

    def rank1(self, i: int) -> int:
        """
        Count the 1s among the first ``i`` bits.

        Args:
            i (int): Prefix length, ``0 <= i <= length``.

        Returns:
            int: Number of 1s in ``bits[1..i]``.

        Raises:
            IndexError: If ``i`` is outside ``[0, length]``.
        """
        if not 0 <= i <= self.length:
            raise IndexError(f"rank position {i} outside [0, {self.length}]")
        block = i // BLOCK_BITS
        start = block * BLOCK_BITS
        base = (int(self.index.superblock_ranks[block // BLOCKS_PER_SUPERBLOCK])
                + int(self.index.block_ranks[block]))
        if start == i:
            return base
        return base + self.bits.count(1, start, i)

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def select1(self, r: int) -> int:
        """
        Locate the ``r``-th 1-bit.

        The select sample narrows the search to a run of superblocks, a binary
        search over their absolute ranks picks the superblock, a second one over
        the relative block ranks picks the 64-bit block, and ``count_n`` finishes
        inside the word.

        Args:
            r (int): Rank of the wanted 1, ``1 <= r <= rank1(length)``.

        Returns:
            int: 1-based position of the ``r``-th 1.

        Raises:
            IndexError: If ``r`` is out of range.
        """
        index = self.index
        if not 1 <= r <= index.ones:
            raise IndexError(f"select rank {r} outside [1, {index.ones}]")
        sample = (r - 1) // SELECT_SAMPLE
        low_pos = int(index.select_samples[sample])
        if sample + 1 < len(index.select_samples):
            high_pos = int(index.select_samples[sample + 1])
        else:
            high_pos = self.length
        sb_low = (low_pos - 1) // SUPERBLOCK_BITS
        sb_high = (high_pos - 1) // SUPERBLOCK_BITS
        window = index.superblock_ranks[sb_low:sb_high + 1]
        superblock = sb_low + int(np.searchsorted(window, r, side="left")) - 1
        base = int(index.superblock_ranks[superblock])

        first_block = superblock * BLOCKS_PER_SUPERBLOCK
        last_block = min(first_block + BLOCKS_PER_SUPERBLOCK, index.num_blocks)
        blocks = index.block_ranks[first_block:last_block]
        block = first_block + int(np.searchsorted(blocks, r - base, side="left")) - 1
        base += int(index.block_ranks[block])

        start = block * BLOCK_BITS
        word = self.bits[start:min(start + BLOCK_BITS, self.length)]
        return start + count_n(word, r - base)

    def space_report(self) -> dict:
        """
        Report the bits used, split into payload and index.

        Returns:
            dict: ``{"payload": length, "index": sampled index bits}``.
        """
        return {"payload": self.length, "index": self.index.size_in_bits()}

    def to_bytes(self) -> bytes:
        """
        Serialize as ``WBV1`` header plus little-endian 64-bit words.

        The rank/select index is not written; ``from_bytes`` rebuilds it.
        """
        padded = bitarray(self.bits, endian="little")
        padded.extend([0] * (-self.length % 64))
        return _HEADER.pack(MAGIC, self.length) + padded.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0):
        """
        Load a bitvector written by ``to_bytes``.

        Args:
            data (bytes): Buffer holding the serialization.
            offset (int): Where the ``WBV1`` header starts.

        Returns:
            tuple: ``(BitVector, end_offset)``.

        Raises:
            ValueError: On a bad magic or a truncated buffer.
        """
        if len(data) < offset + _HEADER.size:
            raise ValueError("truncated bitvector header")
        magic, length = _HEADER.unpack_from(data, offset)
        if magic != MAGIC:
            raise ValueError(f"bad bitvector magic {magic!r}")
        start = offset + _HEADER.size
        end = start + (-(-length // 64)) * 8
        if len(data) < end:
            raise ValueError("truncated bitvector payload")
        bits = bitarray(endian="little")
        bits.frombytes(bytes(data[start:end]))
        del bits[length:]
        return cls(bits), end


def build_bitvector(bits) -> BitVector:
    """
    Build a bitvector and its rank/select index.

    Args:
        bits: A string of '0'/'1', a bitarray, or an iterable of bits.

    Returns:
        BitVector: The indexed vector.
    """
    vector = BitVector(bits)
    report = vector.space_report()
    logger.debug(f"Built bitvector of {report['payload']} bits with {report['index']} index bits.")
    return vector
