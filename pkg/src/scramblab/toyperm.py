"""Shocked-permutation toy model.

A fixed permutation sigma on n-bit strings plays the scrambler; the shocked
variant pi flips the first (most significant) bit and then applies sigma.
Walking ell random steps of {sigma, pi} from 0^n induces the distribution
D_sigma, equivalently: a uniformly random leaf of the depth-ell binary tree
whose left/right children are sigma(x) / pi(x).

This module provides query-counted oracles, the tree and its leaf rows, the
five hybrid input distributions (A)-(E), exact joint-distribution enumeration
at (n=3, ell=2), total-variation distance in exact rationals, and the
distinguishing strategies (full forward enumeration, bidirectional
meet-in-the-middle, zero-query baseline) together with a coin-flip game
harness that records per-trial query counts.
"""

from __future__ import annotations

import csv
import io
import math
import struct
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rng
from .errors import InvalidParameterError, ResourceLimitError, SparseSetError

MAX_BITS = 26
TREE_DEPTH_LIMIT = 20


class PermutationOracle:
    """Explicit bijection table on n-bit strings with metered queries.

    ``forward``/``inverse`` increment the matching counter by exactly one per
    call. The raw tables are exposed read-only for harness construction,
    serialization, and exact enumeration; those paths are not metered.
    """

    def __init__(self, n: int, forward_table: np.ndarray):
        self.n = int(n)
        fwd = np.asarray(forward_table, dtype=np.int64)
        if fwd.shape != (1 << self.n,):
            raise InvalidParameterError(f"table must have 2^{self.n} entries")
        fwd.setflags(write=False)
        self._fwd = fwd
        self._inv = None  # filled on first use
        self.forward_queries = 0
        self.inverse_queries = 0

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def flip_mask(self) -> int:
        """Bit mask of the first (most significant) bit."""
        return 1 << (self.n - 1)

    @property
    def forward_table(self) -> np.ndarray:
        return self._fwd

    @property
    def inverse_table(self) -> np.ndarray:
        if self._inv is None:
            inv = np.empty_like(self._fwd)
            inv[self._fwd] = np.arange(self._fwd.size, dtype=np.int64)
            inv.setflags(write=False)
            self._inv = inv
        return self._inv

    @property
    def query_counts(self) -> tuple:
        return (self.forward_queries, self.inverse_queries)

    def forward(self, x: int) -> int:
        self.forward_queries += 1
        return int(self._fwd[x])

    def inverse(self, x: int) -> int:
        self.inverse_queries += 1
        return int(self.inverse_table[x])

    def query(self, direction: str, x: int) -> int:
        if direction == "forward":
            return self.forward(x)
        if direction == "inverse":
            return self.inverse(x)
        raise InvalidParameterError(f"direction must be 'forward' or 'inverse', got {direction!r}")

    def fresh_copy(self) -> "PermutationOracle":
        """Same tables, zeroed counters."""
        return PermutationOracle(self.n, self._fwd.copy())


def random_permutation(n: int, seed) -> PermutationOracle:
    """Uniformly random bijection on n-bit strings (in-place shuffle)."""
    if not 1 <= n <= MAX_BITS:
        raise ResourceLimitError(f"bit-width must satisfy 1 <= n <= {MAX_BITS}, got {n}")
    g = rng.stream(seed)
    return PermutationOracle(n, g.permutation(1 << n))


def sample_D_sigma(o: PermutationOracle, ell: int, seed) -> int:
    """Apply a uniform random word in {sigma, pi}^ell to 0^n (ell forward queries)."""
    if ell < 0:
        raise InvalidParameterError(f"depth must be >= 0, got {ell}")
    g = rng.stream(seed)
    x = 0
    mask = o.flip_mask
    for _ in range(ell):
        x = o.forward(x ^ (mask if g.integers(2) else 0))
    return x


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaTree:
    """Complete binary tree of the sigma/pi walk from 0^n.

    ``levels[j]`` holds the 2^j labels at depth j, children ordered
    (sigma-child, pi-child); ``leaves`` is the last level and
    ``second_last_row`` the one above it. ``all_distinct`` is the exact
    duplicate scan over every node, i.e. membership of sigma in the
    distinct-tree set S.
    """

    depth: int
    levels: tuple

    @property
    def leaves(self) -> np.ndarray:
        return self.levels[-1]

    @property
    def second_last_row(self) -> np.ndarray:
        if self.depth < 1:
            return np.empty(0, dtype=np.int64)
        return self.levels[-2]

    @property
    def node_count(self) -> int:
        return (1 << (self.depth + 1)) - 1

    @property
    def all_nodes(self) -> np.ndarray:
        return np.concatenate(self.levels)

    @property
    def all_distinct(self) -> bool:
        return np.unique(self.all_nodes).size == self.node_count

    def contains(self, y: int) -> bool:
        return bool(np.any(self.all_nodes == y))


def _levels_from_table(fwd: np.ndarray, n: int, depth: int) -> tuple:
    mask = 1 << (n - 1)
    levels = [np.zeros(1, dtype=np.int64)]
    for _ in range(depth):
        cur = levels[-1]
        nxt = np.column_stack((fwd[cur], fwd[cur ^ mask])).reshape(-1)
        levels.append(nxt)
    return tuple(levels)


def _check_tree_size(n: int, depth: int):
    if depth < 0:
        raise InvalidParameterError(f"depth must be >= 0, got {depth}")
    if depth > TREE_DEPTH_LIMIT or (1 << (depth + 1)) > 4 * (1 << n):
        raise ResourceLimitError(f"tree of depth {depth} at n = {n} exceeds the size cap")


def build_tree(o: PermutationOracle, depth: int) -> SigmaTree:
    """Materialize T(sigma) through the metered oracle (< 2^(depth+1) queries)."""
    _check_tree_size(o.n, depth)
    mask = o.flip_mask
    levels = [np.zeros(1, dtype=np.int64)]
    for _ in range(depth):
        nxt = []
        for x in levels[-1]:
            x = int(x)
            nxt.append(o.forward(x))
            nxt.append(o.forward(x ^ mask))
        levels.append(np.array(nxt, dtype=np.int64))
    return SigmaTree(depth, tuple(levels))


def tree_unmetered(o: PermutationOracle, depth: int) -> SigmaTree:
    """Same tree from the raw table; used by harnesses and exact enumeration."""
    _check_tree_size(o.n, depth)
    return SigmaTree(depth, _levels_from_table(o.forward_table, o.n, depth))


def exact_distribution_D(o: PermutationOracle, ell: int) -> dict:
    """Exact rational law of D_sigma: leaf multiplicity / 2^ell per string."""
    tree = tree_unmetered(o, ell)
    values, counts = np.unique(tree.leaves, return_counts=True)
    total = 1 << ell
    return {int(v): Fraction(int(c), total) for v, c in zip(values, counts)}


def swap_splice(o: PermutationOracle, x: int, y: int) -> PermutationOracle:
    """Fresh oracle realizing SWAP(x, y) o sigma: the two rows whose outputs
    are x and y exchange outputs. The input oracle is left untouched."""
    if x == y:
        warnings.warn("swap_splice with x == y is a no-op", stacklevel=2)
        return o.fresh_copy()
    fwd = o.forward_table.copy()
    ix = int(o.inverse_table[x])
    iy = int(o.inverse_table[y])
    fwd[ix], fwd[iy] = y, x
    return PermutationOracle(o.n, fwd)


# ---------------------------------------------------------------------------
# Hybrid input distributions
# ---------------------------------------------------------------------------

HYBRID_LABELS = ("A", "B", "C", "D", "E")


@dataclass(frozen=True)
class HybridInstance:
    label: str
    sigma: PermutationOracle
    y: int
    ground_truth: bool  # y in L(sigma)


def _uniform_leaf(o: PermutationOracle, ell: int, g) -> int:
    """Uniform leaf slot = uniform random walk (matches D_sigma exactly)."""
    x = 0
    mask = o.flip_mask
    fwd = o.forward_table
    for _ in range(ell):
        x = int(fwd[x ^ (mask if g.integers(2) else 0)])
    return x


def _distinct_tree_oracle(n: int, ell: int, g, retry_cap: int):
    attempts = 0
    while attempts < retry_cap:
        attempts += 1
        o = random_permutation(n, g)
        tree = tree_unmetered(o, ell)
        if tree.all_distinct:
            return o, tree, attempts
    raise SparseSetError(
        f"no distinct-tree permutation found in {retry_cap} attempts at n = {n}, ell = {ell}",
        acceptance_rate=0.0 if attempts == 0 else 1.0 / attempts)


def sample_hybrid(label: str, n: int, ell: int, seed, retry_cap: int = 10**4) -> HybridInstance:
    """Draw one instance of hybrid (A)-(E).

    (A) sigma uniform, y uniform and independent.
    (B) sigma from the distinct-tree set S, y uniform outside T(sigma).
    (C) sigma' from S, y outside T(sigma'), x a uniform leaf;
        sigma = SWAP(x, y) o sigma'.
    (D) sigma from S, y a uniform leaf.
    (E) sigma uniform, y a uniform leaf (slot-uniform, so collisions weight).
    """
    if label not in HYBRID_LABELS:
        raise InvalidParameterError(f"label must be one of {HYBRID_LABELS}, got {label!r}")
    g = rng.stream(seed)
    size = 1 << n
    if label == "A":
        o = random_permutation(n, g)
        y = int(g.integers(size))
        tree = tree_unmetered(o, ell)
        return HybridInstance("A", o, y, bool(np.any(tree.leaves == y)))
    if label == "E":
        o = random_permutation(n, g)
        y = _uniform_leaf(o, ell, g)
        return HybridInstance("E", o, y, True)
    o, tree, _ = _distinct_tree_oracle(n, ell, g, retry_cap)
    nodes = set(int(v) for v in tree.all_nodes)
    if label == "D":
        y = int(tree.leaves[g.integers(tree.leaves.size)])
        return HybridInstance("D", o, y, True)
    # B and C need y outside the tree
    while True:
        y = int(g.integers(size))
        if y not in nodes:
            break
    if label == "B":
        return HybridInstance("B", o, y, False)
    x = int(tree.leaves[g.integers(tree.leaves.size)])
    spliced = swap_splice(o, x, y)
    return HybridInstance("C", spliced, y, True)


# ---------------------------------------------------------------------------
# Exact enumeration at n = 3, ell = 2
# ---------------------------------------------------------------------------

def _tiny_tree(sigma: tuple, mask: int):
    """(nodes, leaves) of the depth-2 tree for a permutation given as a tuple."""
    a, b = sigma[0], sigma[mask]
    leaves = (sigma[a], sigma[a ^ mask], sigma[b], sigma[b ^ mask])
    return (0, a, b) + leaves, leaves


def distinct_tree_set(n: int = 3, ell: int = 2) -> list:
    """All sigma in S_{2^n} whose depth-ell tree has distinct nodes (n=3, ell=2)."""
    if (n, ell) != (3, 2):
        raise ResourceLimitError("exhaustive enumeration is fixed at (n, ell) = (3, 2)")
    import itertools

    mask = 1 << (n - 1)
    members = []
    for sigma in itertools.permutations(range(1 << n)):
        nodes, leaves = _tiny_tree(sigma, mask)
        if len(set(nodes)) == len(nodes):
            members.append((sigma, nodes, leaves))
    return members


def enumerate_joint_distribution(label: str, n: int = 3, ell: int = 2) -> dict:
    """Exact joint law over (sigma, y) for hybrid C or D by full enumeration.

    Keys are (sigma_tuple, y); values are exact Fractions summing to 1. The C
    table sums over every (sigma', y, x) sampling path; the D table is uniform
    over S x leaves.
    """
    if label not in ("C", "D"):
        raise InvalidParameterError(f"enumeration supports labels C and D, got {label!r}")
    if (n, ell) != (3, 2):
        raise ResourceLimitError("exhaustive enumeration is fixed at (n, ell) = (3, 2)")
    members = distinct_tree_set(n, ell)
    s_size = len(members)
    table: dict = {}
    if label == "D":
        p = Fraction(1, s_size * (1 << ell))
        for sigma, _nodes, leaves in members:
            for y in leaves:
                key = (sigma, y)
                table[key] = table.get(key, Fraction(0)) + p
        return table
    size = 1 << n
    for sigma_p, nodes, leaves in members:
        node_set = set(nodes)
        complement = [y for y in range(size) if y not in node_set]
        inv = [0] * size
        for idx, v in enumerate(sigma_p):
            inv[v] = idx
        p = Fraction(1, s_size * len(complement) * (1 << ell))
        for y in complement:
            for x in leaves:
                spliced = list(sigma_p)
                spliced[inv[x]] = y
                spliced[inv[y]] = x
                key = (tuple(spliced), y)
                table[key] = table.get(key, Fraction(0)) + p
    return table


def enumerate_marginal_distribution(label: str, n: int = 3, ell: int = 2) -> dict:
    """Exact joint law over (sigma, y) for hybrids A, B, or E at (3, 2)."""
    if label not in ("A", "B", "E"):
        raise InvalidParameterError(f"marginal enumeration supports A, B, E, got {label!r}")
    if (n, ell) != (3, 2):
        raise ResourceLimitError("exhaustive enumeration is fixed at (n, ell) = (3, 2)")
    import itertools

    size = 1 << n
    mask = 1 << (n - 1)
    n_perms = math.factorial(size)
    table: dict = {}
    if label == "A":
        p = Fraction(1, n_perms * size)
        for sigma in itertools.permutations(range(size)):
            for y in range(size):
                table[(sigma, y)] = p
        return table
    if label == "B":
        members = distinct_tree_set(n, ell)
        for sigma, nodes, _leaves in members:
            node_set = set(nodes)
            complement = [y for y in range(size) if y not in node_set]
            p = Fraction(1, len(members) * len(complement))
            for y in complement:
                table[(sigma, y)] = p
        return table
    # E: sigma uniform over all permutations, y a leaf slot (multiplicity-weighted)
    for sigma in itertools.permutations(range(size)):
        _nodes, leaves = _tiny_tree(sigma, mask)
        p = Fraction(1, n_perms * (1 << ell))
        for y in leaves:
            key = (sigma, y)
            table[key] = table.get(key, Fraction(0)) + p
    return table


def tv_distance(p: dict, q: dict):
    """(1/2) sum |p - q| over the union of supports (exact for Fractions)."""
    total = 0
    for key in set(p) | set(q):
        total += abs(p.get(key, 0) - q.get(key, 0))
    return total / 2


# ---------------------------------------------------------------------------
# Distinguishers and the coin-flip game
# ---------------------------------------------------------------------------

def distinguisher_forward_enum(o: PermutationOracle, y: int, ell: int) -> bool:
    """Build the full tree (<= 2^(ell+1) forward queries); decide y in L(sigma)."""
    tree = build_tree(o, ell)
    return bool(np.any(tree.leaves == y))


def distinguisher_meet_in_middle(o: PermutationOracle, y: int, ell: int) -> bool:
    """Bidirectional tree welding.

    Grows the forward tree to depth h = floor(ell/2) - 1 (frontier A) and the
    inverse tree from y to depth ell - h - 1 (frontier B, one inverse query
    per node since sigma^-1(c) and pi^-1(c) differ only in the first bit),
    then tests sigma(a) in B or pi(a) in B for each a in A via a hash set.
    """
    if ell > 24:
        raise ResourceLimitError(f"meet-in-the-middle supported for ell <= 24, got {ell}")
    mask = o.flip_mask
    if ell == 0:
        return y == 0
    if ell == 1:
        return o.forward(0) == y or o.forward(mask) == y
    h = ell // 2 - 1
    frontier = [0]
    for _ in range(h):
        nxt = []
        for x in frontier:
            nxt.append(o.forward(x))
            nxt.append(o.forward(x ^ mask))
        frontier = nxt
    back = [y]
    for _ in range(ell - h - 1):
        nxt = []
        for c in back:
            z = o.inverse(c)
            nxt.append(z)
            nxt.append(z ^ mask)
        back = nxt
    back_set = set(back)
    for a in frontier:
        if o.forward(a) in back_set or o.forward(a ^ mask) in back_set:
            return True
    return False


def distinguisher_zero_query(o: PermutationOracle, y: int, ell: int) -> bool:
    """Baseline: always guess 'uniform' without querying."""
    return False


STRATEGIES = {
    "forward_enum": distinguisher_forward_enum,
    "meet_in_middle": distinguisher_meet_in_middle,
    "zero_query": distinguisher_zero_query,
}


@dataclass(frozen=True)
class GameResult:
    trials: int
    successes: int
    hybrids: tuple      # "A" or "E" per trial
    decisions: tuple    # strategy output per trial
    corrects: tuple
    fwd_queries: tuple
    inv_queries: tuple

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    def wilson_interval(self, z: float = 1.96) -> tuple:
        n = self.trials
        p = self.success_rate
        denom = 1 + z**2 / n
        center = (p + z**2 / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
        return (center - half, center + half)

    @property
    def mean_queries(self) -> float:
        return float(np.mean(np.array(self.fwd_queries) + np.array(self.inv_queries)))


def run_distinguishing_game(strategy: str, n: int, ell: int, trials: int, seed) -> GameResult:
    """Fair coin between hybrid A (uniform y) and hybrid E (uniform leaf) per
    trial; the named strategy decides which; query counts come from the oracle
    counters' delta, exactly."""
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if strategy not in STRATEGIES:
        raise KeyError(f"unknown strategy {strategy!r}; registered: {sorted(STRATEGIES)}")
    strat = STRATEGIES[strategy]
    hybrids, decisions, corrects, fwds, invs = [], [], [], [], []
    successes = 0
    for t in range(trials):
        g = rng.stream(seed, t)
        is_leaf_instance = bool(g.integers(2))
        oracle = random_permutation(n, g)
        if is_leaf_instance:
            y = _uniform_leaf(oracle, ell, g)
        else:
            y = int(g.integers(1 << n))
        f0, i0 = oracle.query_counts
        decision = bool(strat(oracle, y, ell))
        f1, i1 = oracle.query_counts
        correct = decision == is_leaf_instance
        successes += correct
        hybrids.append("E" if is_leaf_instance else "A")
        decisions.append(decision)
        corrects.append(correct)
        fwds.append(f1 - f0)
        invs.append(i1 - i0)
    return GameResult(trials, successes, tuple(hybrids), tuple(decisions),
                      tuple(corrects), tuple(fwds), tuple(invs))


# ---------------------------------------------------------------------------
# External formats
# ---------------------------------------------------------------------------

def oracle_to_bytes(o: PermutationOracle) -> bytes:
    """Flat binary: n as 32-bit little-endian, then 2^n entries of ceil(n/8)
    little-endian bytes each (forward table; the inverse is rebuilt on load)."""
    width = (o.n + 7) // 8
    raw = o.forward_table.astype("<u4").tobytes()
    trimmed = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 4)[:, :width]
    return struct.pack("<I", o.n) + trimmed.tobytes()


def oracle_from_bytes(data: bytes) -> PermutationOracle:
    (n,) = struct.unpack_from("<I", data, 0)
    width = (n + 7) // 8
    body = np.frombuffer(data, dtype=np.uint8, offset=4).reshape(-1, width)
    padded = np.zeros((body.shape[0], 4), dtype=np.uint8)
    padded[:, :width] = body
    fwd = padded.view("<u4").reshape(-1).astype(np.int64)
    return PermutationOracle(n, fwd)


def save_oracle(o: PermutationOracle, path):
    with open(path, "wb") as fh:
        fh.write(oracle_to_bytes(o))


def load_oracle(path) -> PermutationOracle:
    with open(path, "rb") as fh:
        return oracle_from_bytes(fh.read())


def game_result_to_csv(result: GameResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "hybrid", "decision", "correct", "fwd_queries", "inv_queries"])
    for t in range(result.trials):
        writer.writerow([t, result.hybrids[t], int(result.decisions[t]),
                         int(result.corrects[t]), result.fwd_queries[t], result.inv_queries[t]])
    return buf.getvalue()
