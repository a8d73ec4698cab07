"""Counter-based random numbers keyed by position in the L-ary construction tree.

Every node of the tree owns a 64-bit key.  The root key is the master seed;
the key of child ``j`` is read off one Philox4x32-10 block evaluated at
counter ``(j, 0, 0, 0)`` under the parent key, and the same block supplies the
uniform variate used for the perturbation of letter ``j`` at the parent.
Draws therefore depend only on ``(master_seed, word)``, never on traversal
order, and all functions here are vectorised over arrays of node keys.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

# tag in counter word 2 separating trial-key derivation from node blocks
_TRIAL_TAG = 1


def philox4x32(c0, c1, c2, c3, k0, k1, rounds: int = 10):
    """Philox4x32 block function on uint64 arrays holding 32-bit words.

    Returns the four output words as uint64 arrays.
    """
    c0 = np.asarray(c0, dtype=np.uint64)
    c1 = np.asarray(c1, dtype=np.uint64)
    c2 = np.asarray(c2, dtype=np.uint64)
    c3 = np.asarray(c3, dtype=np.uint64)
    k0 = np.asarray(k0, dtype=np.uint64)
    k1 = np.asarray(k1, dtype=np.uint64)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = c0 * _M0
        p1 = c2 * _M1
        c0, c1, c2, c3 = (
            (p1 >> _S32) ^ c1 ^ k0,
            p1 & _MASK,
            (p0 >> _S32) ^ c3 ^ k1,
            p0 & _MASK,
        )
    return c0, c1, c2, c3


def _split(keys):
    keys = np.asarray(keys, dtype=np.uint64)
    return keys & _MASK, keys >> _S32


def _to_unit(w0, w1):
    # 53 random bits, shifted off 0 so the value lies strictly inside (0, 1)
    hi = (w0 >> np.uint64(5)).astype(np.float64)
    lo = (w1 >> np.uint64(6)).astype(np.float64)
    return (hi * 67108864.0 + lo + 0.5) / 9007199254740992.0


def node_block(keys, letter: int):
    """Uniform for ``letter`` at each node and the key of child ``letter``.

    ``letter`` is 0-based.  Returns ``(uniforms, child_keys)``.
    """
    k0, k1 = _split(keys)
    zero = np.zeros_like(k0)
    w0, w1, w2, w3 = philox4x32(np.full_like(k0, letter), zero, zero, zero, k0, k1)
    return _to_unit(w0, w1), (w3 << _S32) | w2


def node_uniforms(keys, L: int) -> np.ndarray:
    """Array of shape ``(len(keys), L)`` of the per-letter uniforms."""
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    out = np.empty((keys.size, L))
    for j in range(L):
        out[:, j] = node_block(keys, j)[0]
    return out


def expand_nodes(keys, L: int):
    """Uniforms and child keys for all letters: two ``(len(keys), L)`` arrays."""
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    u = np.empty((keys.size, L))
    ck = np.empty((keys.size, L), dtype=np.uint64)
    for j in range(L):
        u[:, j], ck[:, j] = node_block(keys, j)
    return u, ck


def child_keys(keys, letter: int) -> np.ndarray:
    return node_block(keys, letter)[1]


def trial_keys(seed: int, trials) -> np.ndarray:
    """Independent root keys for trial indices under one master seed."""
    t = np.asarray(trials, dtype=np.uint64)
    k0, k1 = _split(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    w0, w1, _, _ = philox4x32(t & _MASK, t >> _S32, np.full_like(t, _TRIAL_TAG), np.zeros_like(t), k0, k1)
    return (w1 << _S32) | w0


@dataclass(frozen=True)
class RealizationTree:
    """One realisation of the random tree of translation perturbations.

    Only the master seed is stored; draws are recomputed on demand, and the
    scalar :meth:`key` lookup is memoised.
    """

    master_seed: int
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def root_key(self) -> np.uint64:
        return np.uint64(self.master_seed)

    def key(self, word) -> np.uint64:
        """Key of the node addressed by ``word`` (letters 1..L)."""
        word = tuple(word)
        if word in self._cache:
            return self._cache[word]
        if not word:
            k = self.root_key
        else:
            k = child_keys(self.key(word[:-1]), word[-1] - 1)[()]
            k = np.uint64(k)
        self._cache[word] = k
        return k

    def uniforms(self, word, L: int) -> np.ndarray:
        """The ``L`` uniforms attached to node ``word``."""
        return node_uniforms(self.key(word), L)[0]

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "RealizationTree":
        return cls(int(trial_keys(seed, [trial])[0]))
