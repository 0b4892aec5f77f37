"""Reduced bar construction over the DGA model.

A tensor is a finite sum of words; a word is a tuple of atoms, each standing
for one tensor factor. Words of 1-form atoms carry the H^0 classes; the Chen
differential produces words with one 2-form factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
import logging
from math import factorial
from typing import Any, Callable, Mapping, Sequence

from dga_model import (
    Atom,
    DgaElement,
    DgaModel,
    apply_M,
    apply_N,
    atom_degree,
    atom_label,
    atom_levels,
    augmentation,
    d,
    is_normal_atom,
    single,
    split_exact,
    wedge,
)
from scalar import Scalar


logger = logging.getLogger(__name__)

Word = tuple


class BarTensor:
    __slots__ = ("model", "terms")

    def __init__(self, model: DgaModel, terms: Mapping[Word, Scalar] | None = None) -> None:
        self.model = model
        self.terms: dict[Word, Scalar] = {}
        for word, coeff in (terms or {}).items():
            _add_word(self.terms, tuple(word), coeff)

    @classmethod
    def of(cls, *factors: DgaElement) -> BarTensor:
        """The pure tensor factors[0] (x) factors[1] (x) ..., expanded over atoms."""
        if not factors:
            raise ValueError("a pure tensor needs at least one factor")
        model = factors[0].model
        terms: dict[Word, Scalar] = {}
        for combo in product(*(f.atoms() for f in factors)):
            coeff = model.alphabet.one
            for _, c in combo:
                coeff = coeff * c
            _add_word(terms, tuple(atom for atom, _ in combo), coeff)
        return cls(model, terms)

    def _check(self, other: BarTensor) -> None:
        if other.model is not self.model:
            raise ValueError("tensors over different models")

    def __add__(self, other: BarTensor) -> BarTensor:
        self._check(other)
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            _add_word(terms, word, coeff)
        return BarTensor(self.model, terms)

    def __neg__(self) -> BarTensor:
        return BarTensor(self.model, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: BarTensor) -> BarTensor:
        return self + (-other)

    def __mul__(self, factor: Any) -> BarTensor:
        if isinstance(factor, BarTensor):
            return NotImplemented
        factor = self.model.scalar(factor)
        return BarTensor(self.model, {w: c * factor for w, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, BarTensor):
            return NotImplemented
        return other.model is self.model and other.terms == self.terms

    __hash__ = None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def part(self, length: int) -> BarTensor:
        return BarTensor(self.model, {w: c for w, c in self.terms.items() if len(w) == length})

    def words(self) -> list[tuple[Word, Scalar]]:
        return sorted(self.terms.items(), key=lambda item: (len(item[0]), item[0]))

    def coefficient(self, *atoms: Atom) -> Scalar:
        return self.terms.get(tuple(atoms), self.model.alphabet.zero)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})[{' | '.join(atom_label(a) for a in w)}]" for w, c in self.words())

    def __repr__(self) -> str:
        return f"BarTensor({self})"

    def to_json(self) -> dict[str, Any]:
        return {
            "words": [
                [[[list(x) if isinstance(x, tuple) else x for x in atom] for atom in word], str(coeff)]
                for word, coeff in self.words()
            ]
        }

    @classmethod
    def from_json(cls, model: DgaModel, data: Mapping[str, Any]) -> BarTensor:
        terms: dict[Word, Scalar] = {}
        for raw_word, coeff in data["words"]:
            word = tuple(tuple(tuple(x) if isinstance(x, list) else x for x in atom) for atom in raw_word)
            _add_word(terms, word, model.alphabet.parse(coeff))
        return cls(model, terms)


def _add_word(terms: dict[Word, Scalar], word: Word, coeff: Scalar) -> None:
    if not coeff:
        return
    total = terms.get(word)
    total = coeff if total is None else total + coeff
    if total.is_zero:
        terms.pop(word, None)
    else:
        terms[word] = total


def _splice(
    terms: dict[Word, Scalar],
    prefix: Word,
    replacement: DgaElement,
    suffix: Word,
    coeff: Scalar,
) -> None:
    for atom, value in replacement.terms.items():
        _add_word(terms, prefix + (atom,) + suffix, coeff * value)


def tensor_product(left: BarTensor, right: BarTensor) -> BarTensor:
    left._check(right)
    terms: dict[Word, Scalar] = {}
    for w1, c1 in left.terms.items():
        for w2, c2 in right.terms.items():
            _add_word(terms, w1 + w2, c1 * c2)
    return BarTensor(left.model, terms)


# Chen differential

def internal_differential(t: BarTensor) -> BarTensor:
    terms: dict[Word, Scalar] = {}
    for word, coeff in t.terms.items():
        for i, atom in enumerate(word):
            _splice(terms, word[:i], d(single(t.model, atom)), word[i + 1 :], coeff)
    return BarTensor(t.model, terms)


def combinatorial_differential(t: BarTensor) -> BarTensor:
    terms: dict[Word, Scalar] = {}
    for word, coeff in t.terms.items():
        for i in range(len(word) - 1):
            product_ = wedge(single(t.model, word[i]), single(t.model, word[i + 1]))
            _splice(terms, word[:i], product_, word[i + 2 :], coeff)
    return BarTensor(t.model, terms)


def chen_differential(t: BarTensor) -> BarTensor:
    return internal_differential(t) + combinatorial_differential(t)


# relations and normal form

def _times_function(function: DgaElement, atom: Atom) -> DgaElement:
    """(F - eps(F)) * atom."""
    model = function.model
    shifted = function - model.one() * augmentation(function)
    return wedge(shifted, single(model, atom))


def _rewrite_exact(
    terms: dict[Word, Scalar],
    word: Word,
    i: int,
    function: DgaElement,
    coeff: Scalar,
) -> None:
    """Add coeff times the relation-equivalent of `word` with dF in position i (0-based)."""
    r = len(word)
    if r == 1:
        return
    if i == 0:
        _splice(terms, (), _times_function(function, word[1]), word[2:], coeff)
    elif i == r - 1:
        _splice(terms, word[: r - 2], _times_function(function, word[r - 2]), (), -coeff)
    else:
        _splice(terms, word[: i - 1], _times_function(function, word[i - 1]), word[i + 1 :], -coeff)
        _splice(terms, word[:i], _times_function(function, word[i + 1]), word[i + 2 :], coeff)


def relation_element(u: Sequence[DgaElement], function: DgaElement, i: int) -> BarTensor:
    """R_i(u, f): the tensor with df inserted at position i (1-based) minus its rewrite."""
    if function.degree != 0:
        raise ValueError("relation elements take a degree-0 function")
    if not 1 <= i <= len(u) + 1:
        raise ValueError(f"position {i} out of range 1..{len(u) + 1}")
    factors = list(u[: i - 1]) + [d(function)] + list(u[i - 1 :])
    inserted = BarTensor.of(*factors)
    rewrite: dict[Word, Scalar] = {}
    if len(factors) > 1:
        for combo in product(*(f.atoms() for f in u)):
            coeff = function.model.alphabet.one
            for _, c in combo:
                coeff = coeff * c
            neighbours = tuple(atom for atom, _ in combo)
            word = neighbours[: i - 1] + (None,) + neighbours[i - 1 :]
            _rewrite_exact(rewrite, word, i - 1, function, coeff)
    return inserted - BarTensor(function.model, rewrite)


class _SplitCache:
    def __init__(self, model: DgaModel) -> None:
        self.model = model
        self.cache: dict[Atom, tuple[DgaElement, DgaElement]] = {}

    def __call__(self, atom: Atom) -> tuple[DgaElement, DgaElement]:
        if atom not in self.cache:
            self.cache[atom] = split_exact(single(self.model, atom))
        return self.cache[atom]


def reduce_normal_form(t: BarTensor) -> BarTensor:
    """Normal form with every factor in the fixed complement of exact forms."""
    model = t.model
    split = _SplitCache(model)
    done: dict[Word, Scalar] = {}
    pending = dict(t.terms)
    steps = 0
    while pending:
        word, coeff = pending.popitem()
        for atom in word:
            if atom_degree(model, atom) != 1:
                raise ValueError(f"normal form needs 1-form factors, got {atom_label(atom)}")
        position = next((n for n, atom in enumerate(word) if not is_normal_atom(model, atom)), None)
        if position is None:
            _add_word(done, word, coeff)
            continue
        steps += 1
        bar, function = split(word[position])
        _splice(pending, word[:position], bar, word[position + 1 :], coeff)
        _rewrite_exact(pending, word, position, function, coeff)
    logger.debug("normal form reached after %d splits", steps)
    return BarTensor(model, done)


def is_chen_closed(t: BarTensor) -> bool:
    return chen_differential(reduce_normal_form(t)).is_zero


# filtrations

def _word_levels(model: DgaModel, word: Word) -> tuple[int, int]:
    levels = [atom_levels(model, atom) for atom in word]
    return sum(w for w, _ in levels) + len(word), sum(f for _, f in levels)


def _levels(t: BarTensor) -> tuple[int | None, int | None]:
    if t.is_zero:
        return None, None
    levels = [_word_levels(t.model, w) for w in t.terms]
    return max(w for w, _ in levels), min(f for _, f in levels)


def bar_filtrations(t: BarTensor) -> tuple[int | None, int | None]:
    """(W-level, F-level), the better of the tensor and its normal form."""
    raw_w, raw_f = _levels(t)
    red_w, red_f = _levels(reduce_normal_form(t))
    if raw_w is None or red_w is None:
        return red_w, red_f
    return min(raw_w, red_w), max(raw_f, red_f)


# monodromy operators

def _leibniz(t: BarTensor, operator: Callable[[DgaElement], DgaElement]) -> BarTensor:
    terms: dict[Word, Scalar] = {}
    for word, coeff in t.terms.items():
        for i, atom in enumerate(word):
            _splice(terms, word[:i], operator(single(t.model, atom)), word[i + 1 :], coeff)
    return BarTensor(t.model, terms)


def apply_N_bar(t: BarTensor) -> BarTensor:
    return _leibniz(t, apply_N)


def apply_M_bar(t: BarTensor, branch: int) -> BarTensor:
    return _leibniz(t, lambda element: apply_M(element, branch))


def apply_lambda_N(t: BarTensor, log_lambda: Any) -> BarTensor:
    """lambda^N = exp(log(lambda) N), a finite sum since N lowers the u-degree."""
    coefficient = t.model.scalar(log_lambda)
    total = t
    term = t
    k = 0
    while True:
        k += 1
        term = apply_N_bar(term)
        if term.is_zero:
            return total
        total = total + term * (coefficient**k / factorial(k))


# formal power series connections

@dataclass
class FormalConnection:
    """Coefficients phi_I of the words I over the indeterminates X_1..X_s."""

    model: DgaModel
    coefficients: dict[tuple[int, ...], DgaElement] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return max((len(w) for w in self.coefficients), default=0)

    def coefficient(self, word: Sequence[int]) -> DgaElement:
        return self.coefficients.get(tuple(word), self.model.zero(1))

    def tensor(self, word: Sequence[int]) -> BarTensor:
        """Sum over splittings of `word` into consecutive blocks of phi_block1 (x) phi_block2 (x) ..."""
        word = tuple(word)
        total = BarTensor(self.model)
        for cuts in _splittings(len(word)):
            blocks = [word[a:b] for a, b in zip((0,) + cuts, cuts + (len(word),))]
            factors = [self.coefficient(block) for block in blocks]
            if any(f.is_zero for f in factors):
                continue
            total = total + BarTensor.of(*factors)
        return total


def _splittings(n: int) -> list[tuple[int, ...]]:
    out = []
    for mask in range(1 << (n - 1)):
        out.append(tuple(k for k in range(1, n) if mask >> (k - 1) & 1))
    return out


def fpsc_curvature(connection: FormalConnection) -> dict[tuple[int, ...], DgaElement]:
    """kappa_I = d phi_I + sum over I = I1 I2 of phi_I1 ^ phi_I2; zero entries dropped."""
    model = connection.model
    out = {}
    candidates = set(connection.coefficients)
    for a in connection.coefficients:
        for b in connection.coefficients:
            candidates.add(a + b)
    for word in sorted(candidates, key=lambda w: (len(w), w)):
        kappa = d(connection.coefficient(word))
        for k in range(1, len(word)):
            left, right = connection.coefficient(word[:k]), connection.coefficient(word[k:])
            if not left.is_zero and not right.is_zero:
                kappa = kappa + wedge(left, right)
        if not kappa.is_zero:
            out[word] = kappa
    return out


def is_flat(connection: FormalConnection) -> bool:
    return not fpsc_curvature(connection)


Primitive = Callable[[DgaElement], DgaElement]


def extend_closed_family(
    forms: Sequence[DgaElement],
    primitive: Primitive | None = None,
) -> tuple[BarTensor, FormalConnection]:
    """Chen-closed tensor with top part forms[0] (x) ... (x) forms[-1].

    phi_{i..j} solves d phi_{i..j} = -sum_k phi_{i..k} ^ phi_{k+1..j}; the
    primitive callback raises "primitive unavailable" when it cannot.
    """
    if not forms:
        raise ValueError("need at least one form")
    if primitive is None:
        # scenario builds on this module
        from scenario import find_primitive as primitive
    model = forms[0].model
    for n, form in enumerate(forms):
        if not d(form).is_zero:
            raise ValueError(f"form {n + 1} is not closed")
    s = len(forms)
    connection = FormalConnection(model)
    for i in range(s):
        connection.coefficients[(i + 1,)] = forms[i]
    for span in range(2, s + 1):
        for start in range(1, s - span + 2):
            word = tuple(range(start, start + span))
            target = model.zero(2)
            for k in range(1, span):
                left, right = connection.coefficient(word[:k]), connection.coefficient(word[k:])
                if not left.is_zero and not right.is_zero:
                    target = target - wedge(left, right)
            if target.is_zero:
                continue
            solution = primitive(target)
            if d(solution) != target:
                raise ValueError(f"primitive unavailable for the wedge at {word}")
            connection.coefficients[word] = solution
    tensor = connection.tensor(range(1, s + 1))
    logger.debug("closed family of length %d with %d corrections", s, len(connection.coefficients) - s)
    return tensor, connection


def class_coefficients(t: BarTensor) -> dict[str, Scalar]:
    """Normal-form coefficients keyed by word label."""
    reduced = reduce_normal_form(t)
    return {" | ".join(atom_label(a) for a in word): coeff for word, coeff in reduced.words()}

