"""Local decoders (adaptive and non-adaptive), oracles, and concrete codes.

A decoder output is 0, 1, or REJECT (None): decoders may refuse to decode a
corrupted word but must never be wrong too often inside the decoding radius,
and must be exact on valid codewords.

Non-adaptive decoders are stored per message index as weighted query sets
with predicate truth tables, which doubles as the weighted set system that
daisy extraction consumes.  Probabilities are exact rationals; sampling draws
integer masses so a seeded run is reproducible and matches the exact
distribution.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Callable, Iterable, Iterator, Sequence

from .exact import format_fraction, parse_fraction
from .set_system import SetSystem, WeightedSetSystem

Symbol = int | None  # 0, 1, or REJECT
REJECT = None

_SYMBOLS = (0, 1, None)


def _check_symbol(value) -> None:
    if value not in _SYMBOLS:
        raise ValueError(f"symbol must be 0, 1, or REJECT, got {value!r}")


# ---------------------------------------------------------------------------
# decision trees (adaptive decoders)


@dataclass(frozen=True)
class TreeNode:
    """Internal decision-tree node: query `coord`, branch on the read bit.

    Children are either TreeNode or a leaf symbol (0, 1, or REJECT).
    """

    coord: int
    if_zero: "TreeNode | int | None"
    if_one: "TreeNode | int | None"


def tree_depth(tree) -> int:
    if not isinstance(tree, TreeNode):
        return 0
    return 1 + max(tree_depth(tree.if_zero), tree_depth(tree.if_one))


def tree_coords(tree) -> frozenset[int]:
    """All coordinates labelling internal nodes."""
    if not isinstance(tree, TreeNode):
        return frozenset()
    return frozenset({tree.coord}) | tree_coords(tree.if_zero) | tree_coords(tree.if_one)


def validate_tree(tree, n: int, max_depth: int, _path: frozenset[int] = frozenset()) -> None:
    """Check coordinate ranges, the depth bound, and path-distinct queries."""
    if not isinstance(tree, TreeNode):
        _check_symbol(tree)
        return
    if max_depth < 1:
        raise ValueError("tree exceeds the depth bound")
    if tree.coord < 0 or tree.coord >= n:
        raise ValueError(f"tree queries coordinate {tree.coord} outside [0, {n})")
    if tree.coord in _path:
        raise ValueError(f"coordinate {tree.coord} queried twice on one path")
    path = _path | {tree.coord}
    validate_tree(tree.if_zero, n, max_depth - 1, path)
    validate_tree(tree.if_one, n, max_depth - 1, path)


def run_tree(tree, w) -> "tuple[int | None, tuple[int, ...]]":
    """Walk a tree against an oracle, returning (output, queried coords in order)."""
    queried: list[int] = []
    node = tree
    while isinstance(node, TreeNode):
        bit = w[node.coord]
        queried.append(node.coord)
        node = node.if_one if bit else node.if_zero
    return node, tuple(queried)


@dataclass(frozen=True)
class AdaptiveDecoder:
    """Per message index, a rational-weighted distribution over decision trees."""

    k: int
    n: int
    locality: int
    trees: tuple[tuple[tuple[Fraction, "TreeNode | int | None"], ...], ...]

    def __post_init__(self) -> None:
        if len(self.trees) != self.k:
            raise ValueError("one tree distribution per message index required")
        for i, dist in enumerate(self.trees):
            if sum(wt for wt, _ in dist) != 1:
                raise ValueError(f"tree weights for index {i} must sum to 1")
            for wt, tree in dist:
                if wt <= 0:
                    raise ValueError("tree weights must be positive")
                validate_tree(tree, self.n, self.locality)

    def decode(self, w, i: int, rng: Random) -> "tuple[int | None, frozenset[int]]":
        if i < 0 or i >= self.k:
            raise ValueError(f"index {i} outside [0, {self.k})")
        dist = self.trees[i]
        masses = _mass_table([wt for wt, _ in dist])
        tree = dist[_draw(masses, rng)][1]
        out, queried = run_tree(tree, w)
        return out, frozenset(queried)


def _mass_table(weights: Sequence[Fraction]) -> tuple[tuple[int, ...], int]:
    common = math.lcm(*(w.denominator for w in weights))
    masses = [w.numerator * (common // w.denominator) for w in weights]
    cum = list(itertools.accumulate(masses))
    return tuple(cum), common


def _draw(mass_table: tuple[tuple[int, ...], int], rng: Random) -> int:
    cum, total = mass_table
    return bisect_right(cum, rng.randrange(total))


# ---------------------------------------------------------------------------
# non-adaptive decoders


@dataclass(frozen=True)
class LocalView:
    """One query set with its predicate truth table.

    coords are strictly increasing; table has 2**len(coords) entries and
    bit j of the table index is the value read at coords[j].
    """

    coords: tuple[int, ...]
    table: "tuple[int | None, ...]"

    def __post_init__(self) -> None:
        if len(self.table) != 1 << len(self.coords):
            raise ValueError("table must cover all assignments of the query set")
        if any(a >= b for a, b in zip(self.coords, self.coords[1:])):
            raise ValueError(f"coords must be strictly increasing: {self.coords}")

    def evaluate(self, values: Sequence[int]) -> "int | None":
        idx = 0
        for j, v in enumerate(values):
            if v:
                idx |= 1 << j
        return self.table[idx]

    def read_and_evaluate(self, w) -> "int | None":
        idx = 0
        for j, c in enumerate(self.coords):
            if w[c]:
                idx |= 1 << j
        return self.table[idx]


@dataclass(frozen=True)
class UnanimityView:
    """Several views run on one merged query set; outputs b iff all parts do.

    Any REJECT or disagreement among the parts yields REJECT.
    """

    parts: tuple[LocalView, ...]
    coords: tuple[int, ...]

    @classmethod
    def of(cls, parts: Sequence[LocalView]) -> "UnanimityView":
        merged = sorted({c for part in parts for c in part.coords})
        return cls(tuple(parts), tuple(merged))

    def evaluate(self, values: Sequence[int]) -> "int | None":
        lookup = dict(zip(self.coords, values))
        verdict = None
        for part in self.parts:
            out = part.evaluate([lookup[c] for c in part.coords])
            if out is REJECT:
                return REJECT
            if verdict is None:
                verdict = out
            elif out != verdict:
                return REJECT
        return verdict

    def read_and_evaluate(self, w) -> "int | None":
        verdict = None
        for part in self.parts:
            out = part.read_and_evaluate(w)
            if out is REJECT:
                return REJECT
            if verdict is None:
                verdict = out
            elif out != verdict:
                return REJECT
        return verdict

    def materialize(self) -> LocalView:
        """Collapse to a concrete truth table over the merged query set."""
        table = tuple(
            self.evaluate([(idx >> j) & 1 for j in range(len(self.coords))])
            for idx in range(1 << len(self.coords))
        )
        return LocalView(self.coords, table)


class ExplicitViews:
    """A concrete weighted list of local views for one message index."""

    __slots__ = ("entries", "_cum", "_total")

    def __init__(self, entries: Sequence[tuple[Fraction, LocalView]]):
        if not entries:
            raise ValueError("a decoder index needs at least one view")
        total = sum(wt for wt, _ in entries)
        if total != 1:
            raise ValueError(f"view weights must sum to 1, got {total}")
        if any(wt <= 0 for wt, _ in entries):
            raise ValueError("view weights must be positive")
        self.entries = tuple(entries)
        self._cum = None
        self._total = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[Fraction, LocalView]]:
        return iter(self.entries)

    def sample(self, rng: Random) -> LocalView:
        if self._cum is None:
            self._cum, self._total = _mass_table([wt for wt, _ in self.entries])
        return self.entries[bisect_right(self._cum, rng.randrange(self._total))][1]

    def max_view_size(self) -> int:
        return max(len(v.coords) for _, v in self.entries)


class ProductViews:
    """The coin space of `times` independent runs of a base view list.

    Represents the amplified decoder's views without materialising the full
    product: iteration yields every combination lazily (exact weights),
    sampling draws the constituents independently.
    """

    __slots__ = ("base", "times")

    def __init__(self, base: ExplicitViews, times: int):
        if times < 1:
            raise ValueError("need at least one repetition")
        self.base = base
        self.times = times

    def __len__(self) -> int:
        return len(self.base) ** self.times

    def __iter__(self) -> Iterator[tuple[Fraction, UnanimityView]]:
        for combo in itertools.product(self.base.entries, repeat=self.times):
            weight = Fraction(1)
            for wt, _ in combo:
                weight *= wt
            yield weight, UnanimityView.of([view for _, view in combo])

    def sample(self, rng: Random) -> UnanimityView:
        return UnanimityView.of([self.base.sample(rng) for _ in range(self.times)])

    def max_view_size(self) -> int:
        return self.base.max_view_size() * self.times


@dataclass(frozen=True)
class NonAdaptiveDecoder:
    """Per message index, a weighted list of (query set, predicate) pairs."""

    k: int
    n: int
    locality: int
    views: "tuple[ExplicitViews | ProductViews, ...]"

    def __post_init__(self) -> None:
        if len(self.views) != self.k:
            raise ValueError("one view list per message index required")
        for i, view_set in enumerate(self.views):
            if view_set.max_view_size() > self.locality:
                raise ValueError(f"index {i} has a view larger than locality {self.locality}")
            if isinstance(view_set, ExplicitViews):
                for _, view in view_set:
                    if view.coords and (view.coords[0] < 0 or view.coords[-1] >= self.n):
                        raise ValueError(f"view coords outside [0, {self.n})")

    def decode(self, w, i: int, rng: Random) -> "tuple[int | None, frozenset[int]]":
        if i < 0 or i >= self.k:
            raise ValueError(f"index {i} outside [0, {self.k})")
        view = self.views[i].sample(rng)
        return view.read_and_evaluate(w), frozenset(view.coords)


def run_decoder(
    decoder: NonAdaptiveDecoder, w, i: int, rng: Random
) -> "tuple[int | None, frozenset[int]]":
    """Sample a query set for index i, read the oracle, apply the predicate.

    Returns the output symbol and the queried coordinate set.
    """
    return decoder.decode(w, i, rng)


def output_distribution(decoder: NonAdaptiveDecoder, w, i: int) -> "dict[int | None, Fraction]":
    """Exact output distribution of decoder(i) on oracle w over its coin space."""
    dist: dict = {}
    for weight, view in decoder.views[i]:
        out = view.read_and_evaluate(w)
        dist[out] = dist.get(out, Fraction(0)) + weight
    return dist


def wrong_rate(decoder: NonAdaptiveDecoder, w, i: int, true_bit: int) -> Fraction:
    """Exact probability that decoder(i) on w outputs the wrong bit (not REJECT)."""
    dist = output_distribution(decoder, w, i)
    return dist.get(1 - true_bit, Fraction(0))


def local_view_system(decoder: NonAdaptiveDecoder, i: int) -> WeightedSetSystem:
    """The index-i query distribution as a weighted set system (multiset order
    preserved, so view j of the decoder is set j of the system)."""
    view_set = decoder.views[i]
    if not isinstance(view_set, ExplicitViews):
        raise TypeError("only explicit view lists convert to set systems")
    sets = tuple(view.coords for _, view in view_set)
    system = SetSystem(decoder.n, sets)
    return WeightedSetSystem.from_weights(system, [wt for wt, _ in view_set])


class TrackingOracle:
    """Read-by-index access to a word, recording every queried coordinate."""

    __slots__ = ("_word", "reads")

    def __init__(self, word: Sequence[int]):
        self._word = tuple(word)
        self.reads: set[int] = set()

    def __len__(self) -> int:
        return len(self._word)

    def __getitem__(self, j: int) -> int:
        if j < 0 or j >= len(self._word):
            raise IndexError(f"oracle read at {j} outside [0, {len(self._word)})")
        self.reads.add(j)
        return self._word[j]


# ---------------------------------------------------------------------------
# codes


@dataclass(frozen=True)
class Code:
    """An injective encoder with relative distance and a decoding radius
    strictly below half the distance."""

    name: str
    k: int
    n: int
    encoder: Callable[[tuple[int, ...]], tuple[int, ...]]
    relative_distance: Fraction
    decoding_radius: Fraction

    def __post_init__(self) -> None:
        if not 0 < self.decoding_radius < self.relative_distance / 2:
            raise ValueError(
                f"decoding radius {self.decoding_radius} must lie in "
                f"(0, {self.relative_distance}/2)"
            )

    def encode(self, message: Sequence[int]) -> tuple[int, ...]:
        msg = tuple(message)
        if len(msg) != self.k:
            raise ValueError(f"message length {len(msg)} != k={self.k}")
        if any(b not in (0, 1) for b in msg):
            raise ValueError("message bits must be 0/1")
        word = self.encoder(msg)
        assert len(word) == self.n
        return word

    def radius_flips(self) -> int:
        """Largest corruption count within the decoding radius."""
        return (self.decoding_radius.numerator * self.n) // self.decoding_radius.denominator


_READ_BIT = (0, 1)
_PARITY2 = (0, 1, 1, 0)


def identity_code(k: int) -> tuple[Code, NonAdaptiveDecoder]:
    """n = k, each bit read directly; the degenerate baseline."""
    if k < 1:
        raise ValueError("k must be >= 1")
    code = Code(
        name=f"identity:k={k}",
        k=k,
        n=k,
        encoder=lambda msg: msg,
        relative_distance=Fraction(1, k),
        decoding_radius=Fraction(1, 4 * k),
    )
    views = tuple(
        ExplicitViews([(Fraction(1), LocalView((i,), _READ_BIT))]) for i in range(k)
    )
    return code, NonAdaptiveDecoder(k=k, n=k, locality=1, views=views)


def repetition_code(k: int, r: int) -> tuple[Code, NonAdaptiveDecoder]:
    """Each message bit repeated r times; the decoder reads one uniform copy."""
    if k < 1 or r < 1:
        raise ValueError("k and r must be >= 1")
    n = k * r

    def encode(msg: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(msg[j // r] for j in range(n))

    code = Code(
        name=f"repetition:k={k},r={r}",
        k=k,
        n=n,
        encoder=encode,
        relative_distance=Fraction(1, k),
        decoding_radius=Fraction(1, 4 * k),
    )
    views = tuple(
        ExplicitViews(
            [(Fraction(1, r), LocalView((i * r + j,), _READ_BIT)) for j in range(r)]
        )
        for i in range(k)
    )
    return code, NonAdaptiveDecoder(k=k, n=n, locality=1, views=views)


def hadamard_code(m: int) -> tuple[Code, NonAdaptiveDecoder]:
    """All parities of the message: k = m, n = 2**m, 2-query decoding.

    Position a holds the inner product <a, x> mod 2 (bit j of the position
    index is a_j).  The decoder for bit i draws a uniform pair {r, r^e_i}
    (stored as an unordered query set, so each of the n/2 sets has weight
    2/n) and outputs the XOR of the two reads.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > 20:
        raise ValueError("m > 20 would materialise an oversized decoder")
    n = 1 << m

    def encode(msg: tuple[int, ...]) -> tuple[int, ...]:
        x = 0
        for j, b in enumerate(msg):
            if b:
                x |= 1 << j
        return tuple((x & a).bit_count() & 1 for a in range(n))

    code = Code(
        name=f"hadamard:m={m}",
        k=m,
        n=n,
        encoder=encode,
        relative_distance=Fraction(1, 2),
        decoding_radius=Fraction(1, 8),
    )
    weight = Fraction(2, n)
    views = []
    for i in range(m):
        e = 1 << i
        views.append(
            ExplicitViews(
                [
                    (weight, LocalView((r, r ^ e), _PARITY2))
                    for r in range(n)
                    if not r & e
                ]
            )
        )
    return code, NonAdaptiveDecoder(k=m, n=n, locality=2, views=views)


def shared_pivot_code(kappa: int, r: int, k: int) -> tuple[Code, NonAdaptiveDecoder]:
    """A zero pivot block shared by every local view, then r copies per bit.

    The decoder for bit i reads the whole pivot block plus one uniform copy;
    it outputs the copy when the pivot reads all-zero and REJECT otherwise.
    Every view contains the pivot block, which forces a nonempty kernel in
    daisy extraction.
    """
    if kappa < 1 or r < 1 or k < 1:
        raise ValueError("kappa, r, k must be >= 1")
    n = kappa + k * r

    def encode(msg: tuple[int, ...]) -> tuple[int, ...]:
        word = [0] * kappa
        for b in msg:
            word.extend([b] * r)
        return tuple(word)

    code = Code(
        name=f"shared-pivot:kappa={kappa},r={r},k={k}",
        k=k,
        n=n,
        encoder=encode,
        relative_distance=Fraction(r, n),
        decoding_radius=Fraction(r, 4 * n),
    )
    pivot = tuple(range(kappa))
    pivot_mask = (1 << kappa) - 1
    table = tuple(
        REJECT if idx & pivot_mask else (idx >> kappa) & 1 for idx in range(1 << (kappa + 1))
    )
    views = tuple(
        ExplicitViews(
            [
                (Fraction(1, r), LocalView(pivot + (kappa + i * r + j,), table))
                for j in range(r)
            ]
        )
        for i in range(k)
    )
    return code, NonAdaptiveDecoder(k=k, n=n, locality=kappa + 1, views=views)


def parse_code_spec(spec: str) -> tuple[Code, NonAdaptiveDecoder]:
    """Build a code from "name:key=val,..." as used by the CLI.

    Known names: identity, repetition, hadamard, shared-pivot.
    """
    name, _, arg_text = spec.partition(":")
    name = name.strip().lower().replace("_", "-")
    args: dict[str, int] = {}
    if arg_text:
        for pair in arg_text.split(","):
            key, _, val = pair.partition("=")
            if not val:
                raise ValueError(f"malformed code argument {pair!r}")
            args[key.strip()] = int(val)
    try:
        if name == "identity":
            return identity_code(args["k"])
        if name == "repetition":
            return repetition_code(args["k"], args["r"])
        if name == "hadamard":
            return hadamard_code(args["m"])
        if name == "shared-pivot":
            return shared_pivot_code(args["kappa"], args["r"], args["k"])
    except KeyError as missing:
        raise ValueError(f"code {name!r} is missing argument {missing}") from None
    raise ValueError(f"unknown code {name!r}")


def corrupt(word: Sequence[int], coords: Iterable[int]) -> tuple[int, ...]:
    """A copy of the word with the given coordinates flipped."""
    out = list(word)
    for c in coords:
        out[c] ^= 1
    return tuple(out)


def random_corruption(word: Sequence[int], flips: int, rng: Random) -> tuple[int, ...]:
    """Flip exactly `flips` distinct uniformly random coordinates."""
    return corrupt(word, rng.sample(range(len(word)), flips))


# ---------------------------------------------------------------------------
# serialization


def decoder_to_json(decoder: NonAdaptiveDecoder) -> dict:
    """One weighted set system per index plus the predicate truth tables.

    REJECT serialises as JSON null.  Lazy (product) view lists must be
    reduced to explicit lists first.
    """
    indices = []
    for i in range(decoder.k):
        view_set = decoder.views[i]
        if not isinstance(view_set, ExplicitViews):
            raise TypeError("serialise explicit decoders only; reduce the coin space first")
        doc = {
            "n": decoder.n,
            "sets": [list(view.coords) for _, view in view_set],
            "weights": [format_fraction(wt) for wt, _ in view_set],
            "tables": [list(view.table) for _, view in view_set],
        }
        indices.append(doc)
    return {"k": decoder.k, "n": decoder.n, "locality": decoder.locality, "indices": indices}


def decoder_from_json(doc: dict) -> NonAdaptiveDecoder:
    views = []
    for entry in doc["indices"]:
        entries = []
        for coords, weight, table in zip(entry["sets"], entry["weights"], entry["tables"]):
            for value in table:
                _check_symbol(value)
            entries.append(
                (parse_fraction(weight), LocalView(tuple(coords), tuple(table)))
            )
        views.append(ExplicitViews(entries))
    return NonAdaptiveDecoder(
        k=int(doc["k"]), n=int(doc["n"]), locality=int(doc["locality"]), views=tuple(views)
    )
